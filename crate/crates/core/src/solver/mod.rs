//! Gradient-flow relaxation of the discrete energy.
//!
//! The flow is the L² gradient flow `w ∂a/∂t = −∂E/∂a` on the free nodal
//! components. Three time discretizations are available; the default
//! `Implicit` scheme is a pseudo-transient backward Euler step solved by a
//! sparse Cholesky factorization, which reaches Newton steps once `dt` is
//! large.

mod continuation;
mod implicit;
mod imex;
pub mod phase;

use std::time::Instant;

pub use continuation::{analyze, continuation_sweep, record, remainder, AnalysisOptions, BranchRecord, ClusterSummary, Sweep};
pub use phase::{phase_difference, phase_minimize, PhaseField, PhaseNode, PhaseOptions};

use crate::energy::{check_xi, energy_unchecked, l2_gradient, residual_inf};
use crate::error::{Error, Result};
use crate::grid::{FieldArray, NodeClass};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Scheme {
    ExplicitEuler,
    Imex,
    Implicit,
}

impl std::str::FromStr for Scheme {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "explicit_euler" | "explicit" => Ok(Scheme::ExplicitEuler),
            "imex" => Ok(Scheme::Imex),
            "implicit" => Ok(Scheme::Implicit),
            _ => Err(Error::Config(format!("unknown scheme '{s}'"))),
        }
    }
}

impl std::fmt::Display for Scheme {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Scheme::ExplicitEuler => "explicit_euler",
            Scheme::Imex => "imex",
            Scheme::Implicit => "implicit",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOptions {
    pub dt_initial: f64,
    pub dt_max: f64,
    pub scheme: Scheme,
    /// Convergence threshold on the ∞-norm of the L² gradient.
    pub tol_residual: f64,
    pub max_steps: usize,
    /// Calls the checkpoint observer every this many accepted steps; 0 disables.
    pub checkpoint_every: usize,
}

impl Default for SolveOptions {
    fn default() -> Self {
        SolveOptions {
            dt_initial: 1e-4,
            dt_max: 1e8,
            scheme: Scheme::Implicit,
            tol_residual: 1e-7,
            max_steps: 400,
            checkpoint_every: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct SolveReport {
    pub steps: usize,
    pub rejected: usize,
    pub final_residual: f64,
    /// Energy after every `history_stride`-th accepted step, starting with the
    /// initial energy.
    pub energy_history: Vec<f64>,
    pub history_stride: usize,
    pub wall_time: f64,
    pub converged: bool,
    pub final_dt: f64,
}

/// Relative energy increase tolerated for an accepted step.
pub(crate) const MONOTONE_TOL: f64 = 1e-11;

/// Smallest time step before the flow is declared divergent.
const DT_FLOOR: f64 = 1e-16;

/// Stable explicit step bound `min(h²/8, ξ²/20)`.
pub fn explicit_dt_limit(field: &FieldArray, xi: f64) -> f64 {
    let h = field.grid.h_min();
    (h * h / 8.0).min(xi * xi / 20.0)
}

pub(crate) fn accept(e_new: f64, e_old: f64) -> bool {
    e_new.is_finite() && e_new <= e_old + MONOTONE_TOL * e_old.abs().max(1e-300)
}

/// Relaxes a copy of `field`.
pub fn relax(field: &FieldArray, xi: f64, opts: &SolveOptions) -> Result<(FieldArray, SolveReport)> {
    let mut f = field.clone();
    let report = relax_in_place(&mut f, xi, opts, &mut |_, _| {})?;
    Ok((f, report))
}

/// Relaxes `field` in place. On failure the field holds the last accepted
/// state. `observer` receives the field every `checkpoint_every` steps.
pub fn relax_in_place(
    field: &mut FieldArray,
    xi: f64,
    opts: &SolveOptions,
    observer: &mut dyn FnMut(&FieldArray, usize),
) -> Result<SolveReport> {
    check_xi(xi)?;
    field.grid.check_resolution(xi)?;
    if !(opts.dt_initial > 0.0 && opts.dt_max >= opts.dt_initial && opts.tol_residual > 0.0) {
        return Err(Error::invalid("solver options need 0 < dt_initial <= dt_max and tol_residual > 0"));
    }
    if field.values.iter().any(|q| !q.is_finite()) {
        return Err(Error::invalid("field contains non-finite values"));
    }
    let mut opts = opts.clone();
    if opts.scheme != Scheme::Implicit {
        let limit = match opts.scheme {
            Scheme::ExplicitEuler => explicit_dt_limit(field, xi),
            _ => xi * xi / 20.0,
        };
        if opts.dt_initial > limit * (1.0 + 1e-12) {
            return Err(Error::invalid(format!(
                "dt_initial {:.3e} exceeds the stability bound {limit:.3e} of the {} scheme",
                opts.dt_initial, opts.scheme
            )));
        }
        opts.dt_max = opts.dt_max.min(limit);
    }
    let start = Instant::now();
    let mut report = match opts.scheme {
        Scheme::Implicit => implicit::run(field, xi, &opts, observer),
        Scheme::Imex => imex::run(field, xi, &opts, observer, imex::Split::Imex),
        Scheme::ExplicitEuler => imex::run(field, xi, &opts, observer, imex::Split::Explicit),
    }?;
    report.wall_time = start.elapsed().as_secs_f64();
    Ok(report)
}

/// Shared bookkeeping of the time-stepping loops.
pub(crate) struct Tracker {
    pub report: SolveReport,
    pub energy: f64,
}

impl Tracker {
    pub fn new(field: &FieldArray, xi: f64, opts: &SolveOptions) -> Self {
        let energy = energy_unchecked(field, xi).total;
        let stride = (opts.max_steps / 2000).max(1);
        Tracker {
            report: SolveReport {
                energy_history: vec![energy],
                history_stride: stride,
                final_dt: opts.dt_initial,
                ..Default::default()
            },
            energy,
        }
    }

    pub fn accepted(&mut self, energy: f64) {
        self.energy = energy;
        self.report.steps += 1;
        if self.report.steps % self.report.history_stride == 0 {
            self.report.energy_history.push(energy);
        }
    }

    pub fn failure(&self, reason: &str, dt: f64) -> Error {
        Error::SolverFailure {
            reason: reason.to_string(),
            steps: self.report.steps,
            residual: self.report.final_residual,
            dt,
        }
    }
}

/// Residual of the current field.
pub fn residual(field: &FieldArray, xi: f64) -> f64 {
    residual_inf(&l2_gradient(field, xi))
}

/// Free components as a flat list of `(node, component)` with a reverse map.
pub(crate) struct Dofs {
    pub list: Vec<(usize, usize)>,
    pub index: Vec<[usize; 5]>,
}

pub(crate) const NO_DOF: usize = usize::MAX;

impl Dofs {
    pub fn new(class: &[NodeClass]) -> Self {
        let mut list = Vec::new();
        let mut index = vec![[NO_DOF; 5]; class.len()];
        for (k, c) in class.iter().enumerate() {
            let free = c.free_components();
            for q in 0..5 {
                if free[q] {
                    index[k][q] = list.len();
                    list.push((k, q));
                }
            }
        }
        Dofs { list, index }
    }

    pub fn len(&self) -> usize {
        self.list.len()
    }
}
