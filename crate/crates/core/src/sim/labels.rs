use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::lidar::{apply_sensor_noise, cast_rays, hits_to_cloud, LidarConfig, RayHit};
use super::scene::{Material, Scene};
use super::SimError;
use crate::cloud::PointCloud;
use crate::evidence::{BeliefMass, Hypothesis};
use crate::footprint::Coverage;
use crate::grid::{EvidentialGrid, GridSpec};

/// Which sensor's hits decide whether a dynamic object is observable enough.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BeamSource {
    #[default]
    Dense,
    Sparse,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct LabelConfig {
    /// Mass deposited per reflection.
    pub contribution: f64,
    /// Chebyshev radius of the deposit neighborhood; 0 means the hit cell only.
    pub neighborhood_radius: usize,
    /// Minimum beam hits before a dynamic object is labelled.
    pub min_beams: usize,
    pub beam_source: BeamSource,
    pub coverage: Coverage,
}

impl Default for LabelConfig {
    fn default() -> Self {
        LabelConfig {
            contribution: 0.1,
            neighborhood_radius: 1,
            min_beams: 20,
            beam_source: BeamSource::Dense,
            coverage: Coverage::CellCenter,
        }
    }
}

#[derive(Debug, Clone)]
pub struct SyntheticSample {
    /// Sparse measurement cloud, ego frame.
    pub cloud: PointCloud,
    /// Final label grid.
    pub label: EvidentialGrid,
    /// Label grid before dynamic-object postprocessing.
    pub reflections: EvidentialGrid,
    /// Beam hits per dynamic object id, from the configured beam source.
    pub beam_counts: BTreeMap<u32, usize>,
}

/// Deposits one simple mass per hit into the hit cell and its neighborhood:
/// `m(F)` for drivable material, `m(O_s)` for anything else.
pub fn deposit_reflections(grid: &mut EvidentialGrid, hits: &[RayHit], config: &LabelConfig) -> Result<(), SimError> {
    let free = BeliefMass::simple(Hypothesis::Free, config.contribution)?;
    let occupied = BeliefMass::simple(Hypothesis::Static, config.contribution)?;
    let spec = *grid.spec();
    let r = config.neighborhood_radius as i64;
    for hit in hits {
        let Some((row, col)) = spec.world_to_cell(hit.point[0], hit.point[1]) else {
            continue;
        };
        let mass = match hit.material {
            Material::Drivable => &free,
            Material::NonDrivable | Material::DynamicObject => &occupied,
        };
        for dr in -r..=r {
            for dc in -r..=r {
                if let Some((rr, cc)) = spec.checked_index(row as i64 + dr, col as i64 + dc) {
                    grid.deposit(rr, cc, mass)?;
                }
            }
        }
    }
    Ok(())
}

/// Number of hits per dynamic object id.
pub fn beam_counts(hits: &[RayHit]) -> BTreeMap<u32, usize> {
    let mut counts = BTreeMap::new();
    for id in hits.iter().filter_map(|h| h.object_id) {
        *counts.entry(id).or_insert(0) += 1;
    }
    counts
}

/// Converts static evidence under each sufficiently observed dynamic object
/// into dynamic evidence.
///
/// For an object hit by at least `min_beams` of `hits`, every footprint cell
/// gets `m(O_d) = mean m(O_s)` over the footprint, `m(O_s) = 0`, keeps its
/// `m(F)` where that still fits (otherwise `m(F) = 1 - m(O_d)`), and `Θ`
/// takes the remainder. Averages are taken over the input grid.
pub fn apply_dynamic_masses(
    grid: &EvidentialGrid,
    scene: &Scene,
    hits: &[RayHit],
    min_beams: usize,
    coverage: Coverage,
) -> EvidentialGrid {
    let counts = beam_counts(hits);
    let spec = grid.spec();
    let mut rewrites = Vec::new();
    for obj in &scene.dynamic_boxes {
        if counts.get(&obj.id).copied().unwrap_or(0) < min_beams {
            continue;
        }
        let cells = obj.solid.footprint.cells(spec, coverage);
        if cells.is_empty() {
            continue;
        }
        let sum: f64 = cells
            .iter()
            .map(|&(r, c)| {
                grid.get(r, c)
                    .expect("footprint cells lie on the grid")
                    .static_occupied()
            })
            .sum();
        rewrites.push((cells.clone(), sum / cells.len() as f64));
    }

    let mut out = grid.clone();
    for (cells, dynamic) in rewrites {
        for (r, c) in cells {
            let old = out.get(r, c).expect("footprint cells lie on the grid");
            let free = if old.free() + dynamic <= 1.0 {
                old.free()
            } else {
                1.0 - dynamic
            };
            let m = BeliefMass::new(free, 0.0, dynamic, 0.0).expect("rewritten masses stay in the simplex");
            out.set(r, c, m).expect("footprint cells lie on the grid");
        }
    }
    out
}

/// Simulates one training sample.
///
/// `seed` only matters when the measurement sensor has noise enabled.
pub fn generate_synthetic_sample(
    scene: &Scene,
    sparse: &LidarConfig,
    dense: &LidarConfig,
    spec: &GridSpec,
    config: &LabelConfig,
    seed: u64,
) -> Result<SyntheticSample, SimError> {
    scene.validate()?;
    sparse.validate()?;
    dense.validate()?;
    if sparse.mount != dense.mount || sparse.vertical_fov != dense.vertical_fov {
        return Err(SimError::SensorMismatch);
    }

    // Observability counts use noise-free returns: noise moves where a beam
    // lands, not what it hit.
    let clean_sparse = cast_rays(scene, sparse);
    let mut measured = clean_sparse.clone();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    apply_sensor_noise(&mut measured, sparse, &mut rng);
    let cloud = hits_to_cloud(&measured);

    let dense_hits = cast_rays(scene, dense);
    let mut reflections = EvidentialGrid::new(*spec);
    deposit_reflections(&mut reflections, &dense_hits, config)?;

    let counting = match config.beam_source {
        BeamSource::Dense => &dense_hits,
        BeamSource::Sparse => &clean_sparse,
    };
    let label = apply_dynamic_masses(&reflections, scene, counting, config.min_beams, config.coverage);
    let counts = beam_counts(counting);

    Ok(SyntheticSample {
        cloud,
        label,
        reflections,
        beam_counts: counts,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::scene::{DynamicObject, GroundPatch, SolidBox};

    fn hit_at(x: f64, y: f64, material: Material, object_id: Option<u32>) -> RayHit {
        RayHit {
            point: [x, y, 0.0],
            range: x.hypot(y),
            material,
            object_id,
            layer: 0,
            azimuth_step: 0,
        }
    }

    fn small_spec() -> GridSpec {
        GridSpec::from_cells(8, 8, 1.0).unwrap()
    }

    #[test]
    fn two_drivable_hits_in_one_cell() {
        let mut grid = EvidentialGrid::new(small_spec());
        let cfg = LabelConfig {
            neighborhood_radius: 0,
            ..Default::default()
        };
        let hits = [
            hit_at(0.5, 0.5, Material::Drivable, None),
            hit_at(0.2, 0.7, Material::Drivable, None),
        ];
        deposit_reflections(&mut grid, &hits, &cfg).unwrap();
        let m = grid.get(4, 4).unwrap();
        assert!((m.free() - 0.19).abs() < 1e-12);
        let touched = grid.cells().iter().filter(|m| !m.is_vacuous()).count();
        assert_eq!(touched, 1);
    }

    #[test]
    fn neighborhood_spreads_to_three_by_three() {
        let mut grid = EvidentialGrid::new(small_spec());
        deposit_reflections(
            &mut grid,
            &[hit_at(0.5, 0.5, Material::NonDrivable, None)],
            &LabelConfig::default(),
        )
        .unwrap();
        for ((r, c), m) in grid.iter() {
            let inside = (3..=5).contains(&r) && (3..=5).contains(&c);
            assert_eq!(m.static_occupied(), if inside { 0.1 } else { 0.0 });
        }
    }

    fn scene_with_object(center: (f64, f64), length: f64) -> Scene {
        Scene {
            dynamic_boxes: vec![DynamicObject {
                id: 3,
                solid: SolidBox::new(center, length, 0.8, 0.0, 0.0, 1.5),
            }],
            ..Default::default()
        }
    }

    #[test]
    fn footprint_average_becomes_dynamic_mass() {
        let spec = small_spec();
        let mut grid = EvidentialGrid::new(spec);
        // Footprint covers the centers of (4,4) and (5,4).
        grid.set(4, 4, BeliefMass::new(0.2, 0.1, 0.0, 0.0).unwrap()).unwrap();
        grid.set(5, 4, BeliefMass::new(0.0, 0.3, 0.0, 0.0).unwrap()).unwrap();
        let scene = scene_with_object((1.0, 0.5), 1.8);
        let hits = vec![hit_at(1.0, 0.5, Material::DynamicObject, Some(3)); 20];
        let out = apply_dynamic_masses(&grid, &scene, &hits, 20, Coverage::CellCenter);
        for (r, c) in [(4, 4), (5, 4)] {
            let m = out.get(r, c).unwrap();
            assert!((m.dynamic_occupied() - 0.2).abs() < 1e-12);
            assert_eq!(m.static_occupied(), 0.0);
        }
        assert_eq!(out.get(4, 4).unwrap().free(), 0.2);
        let changed = out.cells().iter().zip(grid.cells()).filter(|(a, b)| a != b).count();
        assert_eq!(changed, 2);
    }

    #[test]
    fn under_observed_object_is_ignored() {
        let spec = small_spec();
        let mut grid = EvidentialGrid::new(spec);
        grid.set(4, 4, BeliefMass::new(0.0, 0.5, 0.0, 0.0).unwrap()).unwrap();
        let scene = scene_with_object((1.0, 0.5), 1.8);
        let hits = vec![hit_at(1.0, 0.5, Material::DynamicObject, Some(3)); 19];
        let out = apply_dynamic_masses(&grid, &scene, &hits, 20, Coverage::CellCenter);
        assert_eq!(out, grid);
    }

    #[test]
    fn unobserved_footprint_adds_no_dynamic_mass() {
        let grid = EvidentialGrid::new(small_spec());
        let scene = scene_with_object((1.0, 0.5), 1.8);
        let hits = vec![hit_at(9.0, 9.0, Material::DynamicObject, Some(3)); 25];
        let out = apply_dynamic_masses(&grid, &scene, &hits, 20, Coverage::CellCenter);
        assert!(out.cells().iter().all(|m| m.dynamic_occupied() == 0.0));
    }

    #[test]
    fn dynamic_mass_caps_free_mass() {
        let mut grid = EvidentialGrid::new(small_spec());
        grid.set(4, 4, BeliefMass::new(0.0, 0.9, 0.0, 0.0).unwrap()).unwrap();
        grid.set(5, 4, BeliefMass::new(0.95, 0.05, 0.0, 0.0).unwrap()).unwrap();
        let scene = scene_with_object((1.0, 0.5), 1.8);
        let hits = vec![hit_at(1.0, 0.5, Material::DynamicObject, Some(3)); 20];
        let out = apply_dynamic_masses(&grid, &scene, &hits, 20, Coverage::CellCenter);
        let m = out.get(5, 4).unwrap();
        assert!((m.dynamic_occupied() - 0.475).abs() < 1e-12);
        assert!((m.free() - 0.525).abs() < 1e-12);
        assert!(m.unknown().abs() < 1e-12);
    }

    #[test]
    fn drivable_only_scene_has_no_occupied_mass() {
        let scene = Scene {
            ground: vec![GroundPatch::rectangle(
                -30.0,
                -30.0,
                30.0,
                30.0,
                0.0,
                Material::Drivable,
            )],
            ..Default::default()
        };
        let mount = crate::sim::SensorPose::at(0.0, 0.0, 1.8);
        let fov = (-0.5, 0.1);
        let mut sparse = LidarConfig::sparse(mount, fov, 60.0);
        sparse.azimuth_steps = 90;
        let mut dense = sparse.clone();
        dense.layers = 100;
        let spec = GridSpec::new(20.48, 20.48, 0.32).unwrap();
        let s = generate_synthetic_sample(&scene, &sparse, &dense, &spec, &LabelConfig::default(), 0).unwrap();
        assert!(!s.cloud.is_empty());
        let (r, c) = spec.world_to_cell(5.0, 0.0).unwrap();
        assert!(s.label.get(r, c).unwrap().free() > 0.0);
        assert!(s.label.cells().iter().all(|m| m.occupied_total() == 0.0));
    }

    #[test]
    fn mismatched_sensors_are_rejected() {
        let mount = crate::sim::SensorPose::at(0.0, 0.0, 1.8);
        let sparse = LidarConfig::sparse(mount, (-0.5, 0.1), 60.0);
        let mut dense = LidarConfig::dense(mount, (-0.5, 0.1), 60.0);
        dense.mount.position[2] = 2.0;
        let r = generate_synthetic_sample(
            &Scene::default(),
            &sparse,
            &dense,
            &GridSpec::default(),
            &LabelConfig::default(),
            0,
        );
        assert!(matches!(r, Err(SimError::SensorMismatch)));
    }
}
