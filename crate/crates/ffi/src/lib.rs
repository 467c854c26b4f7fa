//! C ABI over `evidential-ogm`.
//!
//! Grids and clouds cross the boundary as opaque handles created and freed
//! by this library. Every function returns an [`EogmStatus`]; on failure
//! [`eogm_last_error`] holds a message for the calling thread. Panics never
//! unwind into C: they are caught and reported as [`EogmStatus::Panic`].
//!
//! The header `include/evidential_ogm.h` is generated by the build script.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;

use evidential_ogm::cloud::{LidarPoint, PointCloud};
use evidential_ogm::eval::{evaluate_pair, EvalError};
use evidential_ogm::evidence::{
    classify_cell, combine_dempster, evidence_to_opinion, opinion_to_mass, BeliefMass, CellLabel, DirichletEvidence,
    EvidenceError,
};
use evidential_ogm::grid::{Deposit, EvidentialGrid, GridError, GridSpec};
use evidential_ogm::io::{self, FormatError};
use evidential_ogm::ism::{geometric_ism, IsmConfig, IsmError};

/// Result of every call.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EogmStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    OutOfRange = 3,
    Io = 4,
    Format = 5,
    TotalConflict = 6,
    Panic = 7,
}

/// Belief mass over F, O_s, O_d, O_sd and Θ. Components are in [0, 1] and
/// sum to 1.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EogmMass {
    pub free: f64,
    pub stat: f64,
    pub dynamic: f64,
    pub occupied: f64,
    pub unknown: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EogmLabel {
    Free = 0,
    Static = 1,
    Dynamic = 2,
    Occupied = 3,
    Unknown = 4,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EogmIsmConfig {
    pub ground_z_min: f64,
    pub ground_z_max: f64,
    pub free_mass_per_ray: f64,
    pub occupied_mass_per_hit: f64,
    pub sensor_x: f64,
    pub sensor_y: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EogmStateCounts {
    pub true_pos: u64,
    pub false_pos: u64,
    pub false_neg: u64,
}

/// Counts per state, in the order F, O_s, O_d, O_sd.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct EogmConfusion {
    pub states: [EogmStateCounts; 4],
    pub evaluated: u64,
    pub masked: u64,
}

/// Opaque grid handle.
pub struct EogmGrid(EvidentialGrid);

/// Opaque point cloud handle.
pub struct EogmCloud(PointCloud);

type Failure = (EogmStatus, String);

thread_local! {
    static LAST_ERROR: RefCell<CString> = RefCell::new(CString::default());
}

fn set_last_error(msg: &str) {
    let c = CString::new(msg.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|e| *e.borrow_mut() = c);
}

fn guard(f: impl FnOnce() -> Result<(), Failure>) -> EogmStatus {
    let (status, msg) = match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => (EogmStatus::Ok, String::new()),
        Ok(Err(failure)) => failure,
        Err(payload) => {
            let what = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            (EogmStatus::Panic, format!("panic: {what}"))
        }
    };
    set_last_error(&msg);
    status
}

fn null(name: &str) -> Failure {
    (EogmStatus::NullPointer, format!("{name} is null"))
}

fn invalid(msg: impl ToString) -> Failure {
    (EogmStatus::InvalidArgument, msg.to_string())
}

fn from_evidence(e: EvidenceError) -> Failure {
    match e {
        EvidenceError::TotalConflict { .. } => (EogmStatus::TotalConflict, e.to_string()),
        _ => invalid(e),
    }
}

fn from_grid(e: GridError) -> Failure {
    match e {
        GridError::IndexOutOfRange { .. } => (EogmStatus::OutOfRange, e.to_string()),
        GridError::Evidence(inner) => from_evidence(inner),
        _ => invalid(e),
    }
}

fn from_format(e: FormatError) -> Failure {
    match e {
        FormatError::Io { .. } => (EogmStatus::Io, e.to_string()),
        _ => (EogmStatus::Format, e.to_string()),
    }
}

fn from_ism(e: IsmError) -> Failure {
    match e {
        IsmError::Grid(g) => from_grid(g),
        _ => invalid(e),
    }
}

fn from_eval(e: EvalError) -> Failure {
    invalid(e)
}

unsafe fn deref<'a, T>(p: *const T, name: &str) -> Result<&'a T, Failure> {
    p.as_ref().ok_or_else(|| null(name))
}

unsafe fn deref_mut<'a, T>(p: *mut T, name: &str) -> Result<&'a mut T, Failure> {
    p.as_mut().ok_or_else(|| null(name))
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, Failure> {
    if p.is_null() {
        return Err(null("path"));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| invalid("path is not valid UTF-8"))?;
    if s.is_empty() {
        return Err(invalid("path is empty"));
    }
    Ok(PathBuf::from(s))
}

impl From<&BeliefMass> for EogmMass {
    fn from(m: &BeliefMass) -> Self {
        let [free, stat, dynamic, occupied, unknown] = *m.as_array();
        EogmMass {
            free,
            stat,
            dynamic,
            occupied,
            unknown,
        }
    }
}

impl TryFrom<&EogmMass> for BeliefMass {
    type Error = Failure;

    fn try_from(m: &EogmMass) -> Result<Self, Failure> {
        BeliefMass::from_array([m.free, m.stat, m.dynamic, m.occupied, m.unknown]).map_err(from_evidence)
    }
}

impl From<CellLabel> for EogmLabel {
    fn from(l: CellLabel) -> Self {
        match l {
            CellLabel::Free => EogmLabel::Free,
            CellLabel::Static => EogmLabel::Static,
            CellLabel::Dynamic => EogmLabel::Dynamic,
            CellLabel::Occupied => EogmLabel::Occupied,
            CellLabel::Unknown => EogmLabel::Unknown,
        }
    }
}

impl From<IsmConfig> for EogmIsmConfig {
    fn from(c: IsmConfig) -> Self {
        EogmIsmConfig {
            ground_z_min: c.ground_band.0,
            ground_z_max: c.ground_band.1,
            free_mass_per_ray: c.free_mass_per_ray,
            occupied_mass_per_hit: c.occupied_mass_per_hit,
            sensor_x: c.sensor_origin.0,
            sensor_y: c.sensor_origin.1,
        }
    }
}

impl From<&EogmIsmConfig> for IsmConfig {
    fn from(c: &EogmIsmConfig) -> Self {
        IsmConfig {
            ground_band: (c.ground_z_min, c.ground_z_max),
            free_mass_per_ray: c.free_mass_per_ray,
            occupied_mass_per_hit: c.occupied_mass_per_hit,
            sensor_origin: (c.sensor_x, c.sensor_y),
        }
    }
}

/// Static description of a status code. Never null, never freed.
#[no_mangle]
pub extern "C" fn eogm_status_str(status: EogmStatus) -> *const c_char {
    let s: &'static CStr = match status {
        EogmStatus::Ok => c"ok",
        EogmStatus::NullPointer => c"null pointer",
        EogmStatus::InvalidArgument => c"invalid argument",
        EogmStatus::OutOfRange => c"index out of range",
        EogmStatus::Io => c"i/o error",
        EogmStatus::Format => c"malformed file",
        EogmStatus::TotalConflict => c"total conflict",
        EogmStatus::Panic => c"internal panic",
    };
    s.as_ptr()
}

/// Message for the last failed call on this thread, empty after a success.
/// Valid until the next call into this library from the same thread.
#[no_mangle]
pub extern "C" fn eogm_last_error() -> *const c_char {
    LAST_ERROR.with(|e| e.borrow().as_ptr())
}

/// Maps non-negative class evidence to a belief mass.
///
/// # Safety
/// `out` must be null or point to writable storage for one `EogmMass`.
#[no_mangle]
pub unsafe extern "C" fn eogm_evidence_to_mass(free: f64, stat: f64, dynamic: f64, out: *mut EogmMass) -> EogmStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        let e = DirichletEvidence::new(free, stat, dynamic).map_err(from_evidence)?;
        *out = (&opinion_to_mass(&evidence_to_opinion(&e))).into();
        Ok(())
    })
}

/// Dempster's rule. Fails with `TOTAL_CONFLICT` when the operands share no
/// support.
///
/// # Safety
/// `a` and `b` must be null or point to valid masses; `out` must be null or
/// writable. `out` may alias either operand.
#[no_mangle]
pub unsafe extern "C" fn eogm_combine(a: *const EogmMass, b: *const EogmMass, out: *mut EogmMass) -> EogmStatus {
    guard(|| {
        let a = BeliefMass::try_from(deref(a, "a")?)?;
        let b = BeliefMass::try_from(deref(b, "b")?)?;
        let out = deref_mut(out, "out")?;
        *out = (&combine_dempster(&a, &b).map_err(from_evidence)?).into();
        Ok(())
    })
}

/// # Safety
/// `m` must be null or point to a valid mass; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn eogm_classify(m: *const EogmMass, threshold: f64, out: *mut EogmLabel) -> EogmStatus {
    guard(|| {
        let m = BeliefMass::try_from(deref(m, "m")?)?;
        let out = deref_mut(out, "out")?;
        *out = classify_cell(&m, threshold).into();
        Ok(())
    })
}

/// Creates a vacuous grid centred on the origin.
///
/// # Safety
/// `out` must be null or writable. On success `*out` owns a grid that must be
/// released with [`eogm_grid_free`].
#[no_mangle]
pub unsafe extern "C" fn eogm_grid_new(
    rows: usize,
    cols: usize,
    cell_size: f64,
    out: *mut *mut EogmGrid,
) -> EogmStatus {
    guard(|| {
        let out = deref_mut(out, "out")?;
        let spec = GridSpec::from_cells(rows, cols, cell_size).map_err(from_grid)?;
        *out = Box::into_raw(Box::new(EogmGrid(EvidentialGrid::new(spec))));
        Ok(())
    })
}

/// # Safety
/// `grid` must be null or a handle from this library not freed before.
#[no_mangle]
pub unsafe extern "C" fn eogm_grid_free(grid: *mut EogmGrid) {
    if !grid.is_null() {
        drop(Box::from_raw(grid));
    }
}

/// Any of the output pointers may be null.
///
/// # Safety
/// `grid` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn eogm_grid_dims(
    grid: *const EogmGrid,
    rows: *mut usize,
    cols: *mut usize,
    cell_size: *mut f64,
) -> EogmStatus {
    guard(|| {
        let spec = deref(grid, "grid")?.0.spec();
        if let Some(r) = rows.as_mut() {
            *r = spec.rows();
        }
        if let Some(c) = cols.as_mut() {
            *c = spec.cols();
        }
        if let Some(s) = cell_size.as_mut() {
            *s = spec.cell_size();
        }
        Ok(())
    })
}

/// # Safety
/// `grid` must be null or a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn eogm_grid_get(
    grid: *const EogmGrid,
    row: usize,
    col: usize,
    out: *mut EogmMass,
) -> EogmStatus {
    guard(|| {
        let grid = deref(grid, "grid")?;
        let out = deref_mut(out, "out")?;
        *out = grid.0.get(row, col).map_err(from_grid)?.into();
        Ok(())
    })
}

/// # Safety
/// `grid` must be null or a live handle; `mass` must be null or valid.
#[no_mangle]
pub unsafe extern "C" fn eogm_grid_set(
    grid: *mut EogmGrid,
    row: usize,
    col: usize,
    mass: *const EogmMass,
) -> EogmStatus {
    guard(|| {
        let grid = deref_mut(grid, "grid")?;
        let m = BeliefMass::try_from(deref(mass, "mass")?)?;
        grid.0.set(row, col, m).map_err(from_grid)
    })
}

/// Combines `mass` into a cell. A totally conflicting deposit leaves the cell
/// unchanged, sets `*conflict` and still returns `OK`.
///
/// # Safety
/// `grid` must be null or a live handle; `mass` must be null or valid;
/// `conflict` may be null.
#[no_mangle]
pub unsafe extern "C" fn eogm_grid_deposit(
    grid: *mut EogmGrid,
    row: usize,
    col: usize,
    mass: *const EogmMass,
    conflict: *mut bool,
) -> EogmStatus {
    guard(|| {
        let grid = deref_mut(grid, "grid")?;
        let m = BeliefMass::try_from(deref(mass, "mass")?)?;
        let outcome = grid.0.deposit(row, col, &m).map_err(from_grid)?;
        if let Some(c) = conflict.as_mut() {
            *c = outcome == Deposit::Conflict;
        }
        Ok(())
    })
}

/// # Safety
/// `path` must be null or a NUL-terminated string; `out` must be null or
/// writable. Free the result with [`eogm_grid_free`].
#[no_mangle]
pub unsafe extern "C" fn eogm_grid_read(path: *const c_char, out: *mut *mut EogmGrid) -> EogmStatus {
    guard(|| {
        let path = path_arg(path)?;
        let out = deref_mut(out, "out")?;
        let g = io::read_ogm(&path).map_err(from_format)?;
        *out = Box::into_raw(Box::new(EogmGrid(g)));
        Ok(())
    })
}

/// # Safety
/// `grid` must be null or a live handle; `path` must be null or a
/// NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn eogm_grid_write(grid: *const EogmGrid, path: *const c_char) -> EogmStatus {
    guard(|| {
        let grid = deref(grid, "grid")?;
        io::write_ogm(&path_arg(path)?, &grid.0).map_err(from_format)
    })
}

/// # Safety
/// Same as [`eogm_grid_write`].
#[no_mangle]
pub unsafe extern "C" fn eogm_grid_render_png(grid: *const EogmGrid, path: *const c_char) -> EogmStatus {
    guard(|| {
        let grid = deref(grid, "grid")?;
        io::render_png(&grid.0, &path_arg(path)?).map_err(from_format)
    })
}

/// # Safety
/// `out` must be null or writable. Free the result with [`eogm_cloud_free`].
#[no_mangle]
pub unsafe extern "C" fn eogm_cloud_new(out: *mut *mut EogmCloud) -> EogmStatus {
    guard(|| {
        *deref_mut(out, "out")? = Box::into_raw(Box::new(EogmCloud(PointCloud::default())));
        Ok(())
    })
}

/// # Safety
/// `cloud` must be null or a handle from this library not freed before.
#[no_mangle]
pub unsafe extern "C" fn eogm_cloud_free(cloud: *mut EogmCloud) {
    if !cloud.is_null() {
        drop(Box::from_raw(cloud));
    }
}

/// Appends one ego-frame return. Non-finite values are rejected.
///
/// # Safety
/// `cloud` must be null or a live handle.
#[no_mangle]
pub unsafe extern "C" fn eogm_cloud_push(
    cloud: *mut EogmCloud,
    x: f64,
    y: f64,
    z: f64,
    intensity: f64,
    ring: u32,
) -> EogmStatus {
    guard(|| {
        let cloud = deref_mut(cloud, "cloud")?;
        let p = LidarPoint::new(x, y, z, intensity, ring);
        if !p.is_finite() {
            return Err(invalid("point coordinates must be finite"));
        }
        cloud.0.points.push(p);
        Ok(())
    })
}

/// # Safety
/// `cloud` must be null or a live handle; `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn eogm_cloud_len(cloud: *const EogmCloud, out: *mut usize) -> EogmStatus {
    guard(|| {
        let cloud = deref(cloud, "cloud")?;
        *deref_mut(out, "out")? = cloud.0.len();
        Ok(())
    })
}

/// # Safety
/// `path` must be null or a NUL-terminated string; `out` must be null or
/// writable. Free the result with [`eogm_cloud_free`].
#[no_mangle]
pub unsafe extern "C" fn eogm_cloud_read(path: *const c_char, out: *mut *mut EogmCloud) -> EogmStatus {
    guard(|| {
        let path = path_arg(path)?;
        let out = deref_mut(out, "out")?;
        let pc = io::read_cloud(&path).map_err(from_format)?;
        *out = Box::into_raw(Box::new(EogmCloud(pc)));
        Ok(())
    })
}

/// Coordinates are narrowed to f32 on disk.
///
/// # Safety
/// `cloud` must be null or a live handle; `path` must be null or a
/// NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn eogm_cloud_write(cloud: *const EogmCloud, path: *const c_char) -> EogmStatus {
    guard(|| {
        let cloud = deref(cloud, "cloud")?;
        io::write_cloud(&path_arg(path)?, &cloud.0).map_err(from_format)
    })
}

/// Fills `out` with the library defaults.
///
/// # Safety
/// `out` must be null or writable.
#[no_mangle]
pub unsafe extern "C" fn eogm_ism_config_default(out: *mut EogmIsmConfig) -> EogmStatus {
    guard(|| {
        *deref_mut(out, "out")? = IsmConfig::default().into();
        Ok(())
    })
}

/// Geometric inverse sensor model on a `rows` x `cols` grid. A null `config`
/// means the defaults.
///
/// # Safety
/// `cloud` must be null or a live handle; `config` must be null or valid;
/// `out` must be null or writable. Free the result with [`eogm_grid_free`].
#[no_mangle]
pub unsafe extern "C" fn eogm_ism(
    cloud: *const EogmCloud,
    config: *const EogmIsmConfig,
    rows: usize,
    cols: usize,
    cell_size: f64,
    out: *mut *mut EogmGrid,
) -> EogmStatus {
    guard(|| {
        let cloud = deref(cloud, "cloud")?;
        let out = deref_mut(out, "out")?;
        let config = config.as_ref().map(IsmConfig::from).unwrap_or_default();
        let spec = GridSpec::from_cells(rows, cols, cell_size).map_err(from_grid)?;
        let g = geometric_ism(&cloud.0, &config, &spec).map_err(from_ism)?;
        *out = Box::into_raw(Box::new(EogmGrid(g)));
        Ok(())
    })
}

/// Scores `pred` against `truth` cell by cell. Truth cells whose Θ mass is
/// at least `mask_level` are skipped.
///
/// # Safety
/// `pred` and `truth` must be null or live handles; `out` must be null or
/// writable.
#[no_mangle]
pub unsafe extern "C" fn eogm_evaluate_pair(
    pred: *const EogmGrid,
    truth: *const EogmGrid,
    threshold: f64,
    mask_level: f64,
    out: *mut EogmConfusion,
) -> EogmStatus {
    guard(|| {
        let pred = deref(pred, "pred")?;
        let truth = deref(truth, "truth")?;
        let out = deref_mut(out, "out")?;
        let c = evaluate_pair(&pred.0, &truth.0, threshold, mask_level).map_err(from_eval)?;
        let mut states = [EogmStateCounts::default(); 4];
        for (s, c) in states.iter_mut().zip(&c.states) {
            *s = EogmStateCounts {
                true_pos: c.tp,
                false_pos: c.fp,
                false_neg: c.fn_,
            };
        }
        *out = EogmConfusion {
            states,
            evaluated: c.evaluated_cells,
            masked: c.masked_cells,
        };
        Ok(())
    })
}
