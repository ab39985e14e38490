//! C interface to the simulator.
//!
//! Fields are exposed as opaque `LdgField` handles created by the `ldg_field_*`
//! constructors and released with [`ldg_field_free`]. Every fallible function
//! returns an [`LdgStatus`]; on failure a description is kept per thread and
//! can be copied out with [`ldg_last_error_message`]. Panics never cross the
//! boundary and are reported as `LDG_STATUS_PANIC`.

use std::cell::RefCell;
use std::ffi::{c_char, CStr};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::path::PathBuf;
use std::sync::Arc;

use ldg_colloid::defects::{locate_defects, DefectKind, Orientability};
use ldg_colloid::energy::total_energy;
use ldg_colloid::experiment::{read_checkpoint, write_checkpoint};
use ldg_colloid::grid::{build_grid, FieldArray, Grading, GridSpec};
use ldg_colloid::seeds::{comparison_energy, comparison_seed, constant_seed, hyperbolic_seed, HyperbolicAnsatz};
use ldg_colloid::solver::{phase_difference, relax_in_place, remainder, Scheme, SolveOptions};
use ldg_colloid::Error;

/// Result codes.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LdgStatus {
    Ok = 0,
    InvalidInput = 1,
    SolverFailure = 2,
    NumericFailure = 3,
    Format = 4,
    UnsupportedVersion = 5,
    Config = 6,
    Io = 7,
    NotApplicable = 8,
    Resolution = 9,
    ProjectionUndefined = 10,
    BadLoop = 11,
    NullPointer = 12,
    BufferTooSmall = 13,
    Panic = 14,
}

impl From<&Error> for LdgStatus {
    fn from(e: &Error) -> Self {
        match e {
            Error::InvalidInput(_) => LdgStatus::InvalidInput,
            Error::ProjectionUndefined { .. } => LdgStatus::ProjectionUndefined,
            Error::SolverFailure { .. } => LdgStatus::SolverFailure,
            Error::NumericFailure(_) => LdgStatus::NumericFailure,
            Error::BadLoop { .. } => LdgStatus::BadLoop,
            Error::Resolution(_) => LdgStatus::Resolution,
            Error::NotApplicable(_) => LdgStatus::NotApplicable,
            Error::Format { .. } => LdgStatus::Format,
            Error::UnsupportedVersion { .. } => LdgStatus::UnsupportedVersion,
            Error::Config(_) => LdgStatus::Config,
            Error::Io(_) => LdgStatus::Io,
        }
    }
}

/// Initial configuration of a new field.
#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LdgSeed {
    /// Uniform far-field alignment.
    Constant = 0,
    /// Director with a hyperbolic point defect below the particle.
    Hyperbolic = 1,
    /// Explicit comparison configuration for the given ξ.
    Comparison = 2,
}

/// Parameters of a new field. With `graded_h_min > 0` the node counts are
/// derived from a grading around the particle and `n_rho`, `n_z` are ignored.
#[repr(C)]
#[derive(Debug, Clone, Copy)]
pub struct LdgGridParams {
    pub rho_max: f64,
    pub z_max: f64,
    pub n_rho: u32,
    pub n_z: u32,
    pub half_plane: bool,
    pub graded_h_min: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct LdgEnergy {
    pub e_grad: f64,
    pub e_phi: f64,
    pub e_pot: f64,
    pub total: f64,
    /// `total − π ln(1/ξ) − π ln ln(1/ξ)`.
    pub remainder: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct LdgSolveReport {
    pub steps: u64,
    pub rejected: u64,
    pub final_residual: f64,
    pub converged: bool,
}

/// One defect cluster. `orientability` is 1 orientable, 0 nonorientable,
/// −1 unknown; `axis_point` is true for a cluster on the symmetry axis.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default)]
pub struct LdgDefect {
    pub rho: f64,
    pub z: f64,
    pub radius: f64,
    pub mass: f64,
    pub orientability: i32,
    pub axis_point: bool,
}

/// Opaque field handle.
pub struct LdgField {
    field: FieldArray,
}

thread_local! {
    static LAST_ERROR: RefCell<String> = const { RefCell::new(String::new()) };
}

fn set_error(msg: String) {
    LAST_ERROR.with(|e| *e.borrow_mut() = msg);
}

fn guard(f: impl FnOnce() -> Result<(), (LdgStatus, String)>) -> LdgStatus {
    set_error(String::new());
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => LdgStatus::Ok,
        Ok(Err((s, msg))) => {
            set_error(msg);
            s
        }
        Err(p) => {
            let msg = p
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| p.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "panic".into());
            set_error(format!("internal panic: {msg}"));
            LdgStatus::Panic
        }
    }
}

fn lift(e: Error) -> (LdgStatus, String) {
    (LdgStatus::from(&e), e.to_string())
}

fn null(what: &str) -> (LdgStatus, String) {
    (LdgStatus::NullPointer, format!("{what} is null"))
}

unsafe fn path_arg(p: *const c_char) -> Result<PathBuf, (LdgStatus, String)> {
    if p.is_null() {
        return Err(null("path"));
    }
    let s = CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (LdgStatus::InvalidInput, "path is not valid UTF-8".to_string()))?;
    Ok(PathBuf::from(s))
}

unsafe fn field_ref<'a>(h: *const LdgField) -> Result<&'a LdgField, (LdgStatus, String)> {
    h.as_ref().ok_or_else(|| null("field handle"))
}

unsafe fn out<'a, T>(p: *mut T, what: &str) -> Result<&'a mut T, (LdgStatus, String)> {
    p.as_mut().ok_or_else(|| null(what))
}

fn boxed(field: FieldArray) -> *mut LdgField {
    Box::into_raw(Box::new(LdgField { field }))
}

/// Copies the last error message of this thread into `buf` (NUL-terminated,
/// truncated to `len`). Returns the full message length without the NUL.
///
/// # Safety
/// `buf` must be null or valid for `len` bytes.
#[no_mangle]
pub unsafe extern "C" fn ldg_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| {
        let e = e.borrow();
        if !buf.is_null() && len > 0 {
            let n = e.len().min(len - 1);
            std::ptr::copy_nonoverlapping(e.as_ptr() as *const c_char, buf, n);
            *buf.add(n) = 0;
        }
        e.len()
    })
}

/// Builds a grid and seeds a field on it. `seed` takes an `LdgSeed` value;
/// `xi` is used by the comparison seed only.
///
/// # Safety
/// `out_field` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ldg_field_new(
    params: LdgGridParams,
    seed: u32,
    xi: f64,
    out_field: *mut *mut LdgField,
) -> LdgStatus {
    guard(|| {
        let out_field = out(out_field, "out_field")?;
        let spec = if params.graded_h_min > 0.0 {
            let gr = if params.half_plane {
                Grading::equatorial(params.graded_h_min)
            } else {
                Grading::dipolar(params.graded_h_min)
            };
            GridSpec::graded(params.rho_max, params.z_max, gr, params.half_plane)
        } else {
            GridSpec::uniform(params.rho_max, params.z_max, params.n_rho as usize, params.n_z as usize, params.half_plane)
        };
        let grid = Arc::new(build_grid(&spec).map_err(lift)?);
        let field = match seed {
            s if s == LdgSeed::Constant as u32 => constant_seed(&grid),
            s if s == LdgSeed::Hyperbolic as u32 => hyperbolic_seed(&grid, &HyperbolicAnsatz::default()).map_err(lift)?,
            s if s == LdgSeed::Comparison as u32 => comparison_seed(&grid, xi).map_err(lift)?,
            s => return Err((LdgStatus::InvalidInput, format!("unknown seed {s}"))),
        };
        *out_field = boxed(field);
        Ok(())
    })
}

/// Reads a checkpoint into a new field; its ξ goes to `out_xi` if non-null.
///
/// # Safety
/// `path` must be a NUL-terminated string and `out_field` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ldg_field_read_checkpoint(
    path: *const c_char,
    out_field: *mut *mut LdgField,
    out_xi: *mut f64,
) -> LdgStatus {
    guard(|| {
        let path = path_arg(path)?;
        let out_field = out(out_field, "out_field")?;
        let (f, xi) = read_checkpoint(&path).map_err(lift)?;
        if let Some(x) = out_xi.as_mut() {
            *x = xi;
        }
        *out_field = boxed(f);
        Ok(())
    })
}

/// # Safety
/// `field` must be a live handle and `path` a NUL-terminated string.
#[no_mangle]
pub unsafe extern "C" fn ldg_field_write_checkpoint(field: *const LdgField, xi: f64, path: *const c_char) -> LdgStatus {
    guard(|| {
        let f = field_ref(field)?;
        let path = path_arg(path)?;
        write_checkpoint(&f.field, xi, &path).map_err(lift)
    })
}

/// Releases a handle; null is ignored.
///
/// # Safety
/// `field` must be null or a handle not yet freed.
#[no_mangle]
pub unsafe extern "C" fn ldg_field_free(field: *mut LdgField) {
    if !field.is_null() {
        drop(Box::from_raw(field));
    }
}

/// # Safety
/// `field` must be a live handle; outputs must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ldg_field_dims(field: *const LdgField, n_rho: *mut u32, n_z: *mut u32) -> LdgStatus {
    guard(|| {
        let f = field_ref(field)?;
        *out(n_rho, "n_rho")? = f.field.grid.n_rho() as u32;
        *out(n_z, "n_z")? = f.field.grid.n_z() as u32;
        Ok(())
    })
}

/// Copies node coordinates and the five components of every node, z outer and
/// ρ inner. `rho_z` receives 2 values per node and `values` 5; either may be
/// null. `len` is the node capacity of both buffers.
///
/// # Safety
/// Non-null buffers must be valid for the stated number of `f64`.
#[no_mangle]
pub unsafe extern "C" fn ldg_field_copy(field: *const LdgField, rho_z: *mut f64, values: *mut f64, len: usize) -> LdgStatus {
    guard(|| {
        let f = &field_ref(field)?.field;
        let n = f.grid.len();
        if len < n {
            return Err((LdgStatus::BufferTooSmall, format!("buffer holds {len} nodes, field has {n}")));
        }
        if !rho_z.is_null() {
            let dst = std::slice::from_raw_parts_mut(rho_z, 2 * n);
            for k in 0..n {
                let (r, z) = f.grid.position(k);
                dst[2 * k] = r;
                dst[2 * k + 1] = z;
            }
        }
        if !values.is_null() {
            let dst = std::slice::from_raw_parts_mut(values, 5 * n);
            for (k, q) in f.values.iter().enumerate() {
                dst[5 * k..5 * k + 5].copy_from_slice(&q.0);
            }
        }
        Ok(())
    })
}

/// Relaxes the field in place with the implicit scheme. On solver failure the
/// field keeps its last accepted state.
///
/// # Safety
/// `field` must be a live handle; `report` null or valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ldg_relax(
    field: *mut LdgField,
    xi: f64,
    max_steps: u64,
    tol_residual: f64,
    report: *mut LdgSolveReport,
) -> LdgStatus {
    guard(|| {
        let f = field.as_mut().ok_or_else(|| null("field handle"))?;
        let opts = SolveOptions {
            scheme: Scheme::Implicit,
            max_steps: max_steps as usize,
            tol_residual,
            ..Default::default()
        };
        let rep = relax_in_place(&mut f.field, xi, &opts, &mut |_, _| {}).map_err(lift)?;
        if let Some(r) = report.as_mut() {
            *r = LdgSolveReport {
                steps: rep.steps as u64,
                rejected: rep.rejected as u64,
                final_residual: rep.final_residual,
                converged: rep.converged,
            };
        }
        Ok(())
    })
}

/// # Safety
/// `field` must be a live handle and `energy` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ldg_energy(field: *const LdgField, xi: f64, energy: *mut LdgEnergy) -> LdgStatus {
    guard(|| {
        let f = field_ref(field)?;
        let dst = out(energy, "energy")?;
        let e = total_energy(&f.field, xi).map_err(lift)?;
        *dst = LdgEnergy { e_grad: e.e_grad, e_phi: e.e_phi, e_pot: e.e_pot, total: e.total, remainder: remainder(e.total, xi) };
        Ok(())
    })
}

/// Locates defect clusters, most massive first. Writes up to `cap` entries
/// and the total count to `count`; a short buffer yields
/// `LDG_STATUS_BUFFER_TOO_SMALL` with `count` still set.
///
/// # Safety
/// `field` must be a live handle, `out_defects` valid for `cap` entries (or
/// null with `cap` 0) and `count` valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ldg_locate_defects(
    field: *const LdgField,
    xi: f64,
    eta: f64,
    r0: f64,
    out_defects: *mut LdgDefect,
    cap: usize,
    count: *mut usize,
) -> LdgStatus {
    guard(|| {
        let f = field_ref(field)?;
        let count = out(count, "count")?;
        let clusters = locate_defects(&f.field, xi, eta, r0).map_err(lift)?;
        *count = clusters.len();
        if cap > 0 && out_defects.is_null() {
            return Err(null("out_defects"));
        }
        for (k, c) in clusters.iter().take(cap).enumerate() {
            *out_defects.add(k) = LdgDefect {
                rho: c.center.0,
                z: c.center.1,
                radius: c.radius,
                mass: c.mass,
                orientability: match c.orientability {
                    Orientability::Orientable => 1,
                    Orientability::Nonorientable => 0,
                    Orientability::Unknown => -1,
                },
                axis_point: c.kind == DefectKind::AxisPoint,
            };
        }
        if clusters.len() > cap {
            return Err((LdgStatus::BufferTooSmall, format!("{} clusters, room for {cap}", clusters.len())));
        }
        Ok(())
    })
}

/// Energy of the explicit comparison configuration. Energies and remainder
/// refer to the quarter plane ρ > 0, z > 0, whose leading terms are
/// `(π/2) ln(1/ξ) + (π/2) ln ln(1/ξ)`.
///
/// # Safety
/// `energy` must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ldg_comparison_energy(xi: f64, energy: *mut LdgEnergy) -> LdgStatus {
    guard(|| {
        let dst = out(energy, "energy")?;
        let c = comparison_energy(xi).map_err(lift)?;
        let b = c.breakdown;
        *dst = LdgEnergy { e_grad: b.e_grad, e_phi: b.e_phi, e_pot: b.e_pot, total: b.total, remainder: c.remainder };
        Ok(())
    })
}

/// Minimal phase energies for both ring charges outside a disc of radius
/// `delta`, and their difference.
///
/// # Safety
/// Outputs must be valid for writes.
#[no_mangle]
pub unsafe extern "C" fn ldg_phase_difference(
    delta: f64,
    r_out: f64,
    refine: f64,
    e_plus: *mut f64,
    e_minus: *mut f64,
    diff: *mut f64,
) -> LdgStatus {
    guard(|| {
        let (p, m, d) = phase_difference(delta, r_out, refine).map_err(lift)?;
        *out(e_plus, "e_plus")? = p;
        *out(e_minus, "e_minus")? = m;
        *out(diff, "diff")? = d;
        Ok(())
    })
}
