//! `eogm` command line.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use thiserror::Error;

use crate::annotation::generate_label_from_annotations;
use crate::eval::{aggregate_with, evaluate_pair, Averaging};
use crate::grid::GridSpec;
use crate::io::{self, FormatError};
use crate::ism::{geometric_ism, IsmConfig};
use crate::sim::generate_synthetic_sample;

pub const EXIT_OK: i32 = 0;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_IO: i32 = 3;
pub const EXIT_FORMAT: i32 = 4;
pub const EXIT_DOMAIN: i32 = 5;

#[derive(Debug, Parser)]
#[command(
    name = "eogm",
    version,
    about = "Evidential occupancy grid maps: label generation, ISM, evaluation"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Simulate sparse clouds and evidential labels from a scene file.
    GenSynthetic {
        #[arg(long)]
        scene: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[arg(long, default_value_t = 1)]
        samples: u32,
        #[arg(long, default_value_t = 0)]
        seed: u64,
    },
    /// Build label grids from annotated samples (`*.json` sidecars).
    GenLabels {
        #[arg(long)]
        samples: PathBuf,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run the geometric inverse sensor model on one cloud.
    Ism {
        #[arg(long)]
        cloud: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = -0.3, allow_negative_numbers = true)]
        z_min: f64,
        #[arg(long, default_value_t = 0.3, allow_negative_numbers = true)]
        z_max: f64,
    },
    /// Score predicted grids against truth grids with matching file names.
    Eval {
        #[arg(long)]
        pred: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long, default_value_t = 0.5)]
        threshold: f64,
        #[arg(long, default_value_t = 0.5)]
        mask: f64,
        /// Text report; a JSON copy is written next to it with `.json` appended.
        #[arg(long)]
        report: Option<PathBuf>,
        /// Average per-sample ratios instead of pooling counts.
        #[arg(long = "macro")]
        macro_average: bool,
    },
    /// Render a grid as a PNG (red static, green free, blue dynamic).
    Render {
        #[arg(long)]
        ogm: PathBuf,
        #[arg(long)]
        png: PathBuf,
    },
    /// Export a pillar feature tensor for one cloud.
    Pillarize {
        #[arg(long)]
        cloud: PathBuf,
        #[arg(long)]
        out: PathBuf,
        #[command(flatten)]
        grid: GridArgs,
        #[arg(long, default_value_t = 12000, value_parser = clap::value_parser!(u32).range(1..))]
        max_pillars: u32,
        #[arg(long, default_value_t = 100, value_parser = clap::value_parser!(u32).range(1..))]
        max_points: u32,
    },
}

#[derive(Debug, Args)]
struct GridArgs {
    #[arg(long, default_value_t = crate::grid::DEFAULT_LENGTH_M)]
    length: f64,
    #[arg(long, default_value_t = crate::grid::DEFAULT_WIDTH_M)]
    width: f64,
    #[arg(long, default_value_t = crate::grid::DEFAULT_CELL_SIZE_M)]
    cell_size: f64,
}

impl GridArgs {
    fn spec(&self) -> Result<GridSpec, CliError> {
        GridSpec::new(self.length, self.width, self.cell_size).map_err(|e| CliError::Domain(e.to_string()))
    }
}

#[derive(Debug, Error)]
enum CliError {
    #[error("{path}: {source}")]
    Io { path: String, source: std::io::Error },
    #[error("{path}: {source}")]
    Format { path: String, source: FormatError },
    #[error("{0}")]
    Domain(String),
}

impl CliError {
    fn code(&self) -> i32 {
        match self {
            CliError::Io { .. } => EXIT_IO,
            CliError::Format { .. } => EXIT_FORMAT,
            CliError::Domain(_) => EXIT_DOMAIN,
        }
    }

    fn io(path: &Path, source: std::io::Error) -> Self {
        CliError::Io {
            path: path.display().to_string(),
            source,
        }
    }

    /// Attaches `path` unless the error already names one.
    fn format(path: &Path, e: FormatError) -> Self {
        match e {
            FormatError::Io { path, source } => CliError::Io { path, source },
            e => CliError::Format {
                path: path.display().to_string(),
                source: e,
            },
        }
    }

    fn domain(path: &Path, e: impl std::fmt::Display) -> Self {
        CliError::Domain(format!("{}: {e}", path.display()))
    }
}

/// Parses `args` (program name first), runs the command and returns the
/// process exit code. Diagnostics go to stderr.
pub fn run<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
        }
    };
    match execute(cli.command) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            eprintln!("eogm: {e}");
            e.code()
        }
    }
}

fn execute(command: Command) -> Result<(), CliError> {
    match command {
        Command::GenSynthetic {
            scene,
            out,
            samples,
            seed,
        } => gen_synthetic(&scene, &out, samples, seed),
        Command::GenLabels { samples, out } => gen_labels(&samples, &out),
        Command::Ism {
            cloud,
            out,
            grid,
            z_min,
            z_max,
        } => {
            let spec = grid.spec()?;
            let pc = io::read_cloud(&cloud).map_err(|e| CliError::format(&cloud, e))?;
            let cfg = IsmConfig {
                ground_band: (z_min, z_max),
                ..Default::default()
            };
            let g = geometric_ism(&pc, &cfg, &spec).map_err(|e| CliError::domain(&cloud, e))?;
            io::write_ogm(&out, &g).map_err(|e| CliError::format(&out, e))
        }
        Command::Eval {
            pred,
            truth,
            threshold,
            mask,
            report,
            macro_average,
        } => {
            let averaging = if macro_average {
                Averaging::Macro
            } else {
                Averaging::Micro
            };
            eval(&pred, &truth, threshold, mask, report.as_deref(), averaging)
        }
        Command::Render { ogm, png } => {
            let g = io::read_ogm(&ogm).map_err(|e| CliError::format(&ogm, e))?;
            io::render_png(&g, &png).map_err(|e| CliError::format(&png, e))
        }
        Command::Pillarize {
            cloud,
            out,
            grid,
            max_pillars,
            max_points,
        } => {
            let spec = grid.spec()?;
            let pc = io::read_cloud(&cloud).map_err(|e| CliError::format(&cloud, e))?;
            let t = io::pillarize(&pc, &spec, max_pillars as usize, max_points as usize);
            io::write_pillars(&out, &t).map_err(|e| CliError::format(&out, e))
        }
    }
}

fn create_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| CliError::io(dir, e))
}

/// Files in `dir` with extension `ext`, sorted by name.
fn list_files(dir: &Path, ext: &str) -> Result<Vec<PathBuf>, CliError> {
    let mut out = Vec::new();
    for entry in fs::read_dir(dir).map_err(|e| CliError::io(dir, e))? {
        let path = entry.map_err(|e| CliError::io(dir, e))?.path();
        if path.is_file() && path.extension().is_some_and(|e| e == ext) {
            out.push(path);
        }
    }
    out.sort();
    Ok(out)
}

fn gen_synthetic(scene: &Path, out: &Path, samples: u32, seed: u64) -> Result<(), CliError> {
    let setup = io::read_scene(scene).map_err(|e| CliError::format(scene, e))?;
    create_dir(out)?;
    for k in 0..samples {
        // One independent stream per sample index.
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        rng.set_stream(k as u64);
        let varied = setup.variation.apply(&setup.scene, &mut rng);
        let noise_seed = rng.next_u64();
        let s = generate_synthetic_sample(
            &varied,
            &setup.sparse,
            &setup.dense,
            &setup.spec,
            &setup.labels,
            noise_seed,
        )
        .map_err(|e| CliError::domain(scene, e))?;
        let stem = out.join(format!("sample_{k:05}"));
        let cloud_path = stem.with_extension("epcl");
        io::write_cloud(&cloud_path, &s.cloud).map_err(|e| CliError::format(&cloud_path, e))?;
        let ogm_path = stem.with_extension("eogm");
        io::write_ogm(&ogm_path, &s.label).map_err(|e| CliError::format(&ogm_path, e))?;
    }
    Ok(())
}

fn gen_labels(samples: &Path, out: &Path) -> Result<(), CliError> {
    let sidecars = list_files(samples, "json")?;
    create_dir(out)?;
    sidecars.par_iter().try_for_each(|path| {
        let loaded = io::read_annotated_sample(path).map_err(|e| CliError::format(path, e))?;
        let grid = generate_label_from_annotations(&loaded.sample, &loaded.spec, &loaded.config)
            .map_err(|e| CliError::domain(path, e))?;
        let dest = out
            .join(path.file_stem().expect("listed files have names"))
            .with_extension("eogm");
        io::write_ogm(&dest, &grid).map_err(|e| CliError::format(&dest, e))
    })
}

fn eval(
    pred: &Path,
    truth: &Path,
    threshold: f64,
    mask: f64,
    report: Option<&Path>,
    averaging: Averaging,
) -> Result<(), CliError> {
    let truths = list_files(truth, "eogm")?;
    if truths.is_empty() {
        return Err(CliError::domain(truth, "no .eogm files"));
    }
    let counts = truths
        .par_iter()
        .map(|t| {
            let p = pred.join(t.file_name().expect("listed files have names"));
            if !p.is_file() {
                return Err(CliError::domain(&p, "no prediction for this truth grid"));
            }
            let pg = io::read_ogm(&p).map_err(|e| CliError::format(&p, e))?;
            let tg = io::read_ogm(t).map_err(|e| CliError::format(t, e))?;
            evaluate_pair(&pg, &tg, threshold, mask).map_err(|e| CliError::domain(&p, e))
        })
        .collect::<Result<Vec<_>, _>>()?;
    let r = aggregate_with(&counts, averaging).map_err(|e| CliError::Domain(e.to_string()))?;
    let text = r.to_text();
    if let Some(path) = report {
        io::write_atomic(path, text.as_bytes()).map_err(|e| CliError::format(path, e))?;
        let mut json_path = path.as_os_str().to_owned();
        json_path.push(".json");
        let json_path = PathBuf::from(json_path);
        let json = serde_json::to_vec_pretty(&r).expect("reports serialize");
        io::write_atomic(&json_path, &json).map_err(|e| CliError::format(&json_path, e))?;
    }
    print!("{text}");
    Ok(())
}
