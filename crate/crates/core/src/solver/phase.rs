//! Scalar phase problem outside a small disc about the ring.
//!
//! With `n = (cos φ, 0, sin φ)` the reduced energy is
//! `F(φ) = ∫ (|∇φ|² + cos²φ/ρ²) ρ dρ dz` on `{r > δ} ∩ {z > 0, ρ > 0, |x| > 1}`
//! truncated at `r = R_out`, with `r` the distance to (1, 0). Boundary data:
//! `τπ/2` on the plane and on `r = R_out`, the polar angle of `x` on the
//! particle, and `τπ/2 − λθ` on `r = δ`. The axis carries no condition.

use std::f64::consts::{FRAC_PI_2, PI};

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, SymbolicLlt};
use faer::sparse::{Pair, SparseColMat, SymbolicSparseColMat};
use faer::{Mat, Side};

use crate::error::{Error, Result};
use crate::grid::{graded_nodes, Grading};
use crate::seeds::theta0;

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseOptions {
    pub delta: f64,
    pub tau: i8,
    pub r_out: f64,
    /// Spacing at (1, 0).
    pub h_min: f64,
    /// Spacing growth per unit distance from (1, 0).
    pub growth: f64,
    pub h_max: f64,
    /// Threshold on the pointwise Euler–Lagrange residual.
    pub tol: f64,
    pub max_iter: usize,
}

impl PhaseOptions {
    pub fn new(delta: f64, tau: i8) -> Self {
        PhaseOptions {
            delta,
            tau,
            r_out: 4.0,
            h_min: delta / 16.0,
            growth: 0.05,
            h_max: 0.08,
            tol: 1e-9,
            max_iter: 200,
        }
    }

    /// Same problem with every spacing parameter divided by `factor`.
    pub fn refined(&self, factor: f64) -> Self {
        PhaseOptions {
            h_min: self.h_min / factor,
            growth: self.growth / factor,
            h_max: self.h_max / factor,
            ..self.clone()
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.delta > 0.0 && self.delta < 0.5) {
            return Err(Error::invalid(format!("delta must lie in (0, 0.5), got {}", self.delta)));
        }
        if !(self.r_out > 0.5 && self.r_out.is_finite()) {
            return Err(Error::invalid(format!("R_out must exceed 0.5, got {}", self.r_out)));
        }
        if self.tau != 1 && self.tau != -1 {
            return Err(Error::invalid(format!("tau must be +1 or -1, got {}", self.tau)));
        }
        if !(self.h_min > 0.0 && self.h_max >= self.h_min && self.growth >= 0.0) {
            return Err(Error::invalid("phase grid spacing parameters are inconsistent"));
        }
        Ok(())
    }
}

/// Role of a node of the phase grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum PhaseNode {
    Unknown,
    Dirichlet,
    /// Not part of the problem (axis, or beyond the data).
    Masked,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PhaseField {
    pub options: PhaseOptions,
    pub rho: Vec<f64>,
    pub z: Vec<f64>,
    pub kind: Vec<PhaseNode>,
    pub phi: Vec<f64>,
    /// Discrete `F` of the minimizer.
    pub energy: f64,
    /// `F` after each Newton iteration, starting with the initial guess.
    pub history: Vec<f64>,
    /// ∞-norm of `Δφ + ρ⁻¹∂_ρφ + sin(2φ)/(2ρ²)` over the unknowns.
    pub el_residual: f64,
    pub iterations: usize,
}

/// `τπ/2 − λ(r)θ`, the boundary phase on `|x − (1,0)| = r`.
pub fn boundary_phase(tau: i8, r: f64, theta: f64) -> f64 {
    let t0 = theta0(r.min(std::f64::consts::SQRT_2));
    let t1 = 2.0 * t0 - PI;
    let top = tau as f64 * FRAC_PI_2;
    top - (top - t1) / t0 * theta
}

struct Problem {
    rho: Vec<f64>,
    z: Vec<f64>,
    kind: Vec<PhaseNode>,
    /// Node weight `∫ρ` over the dual cell, divided by `ρ²`.
    pot_w: Vec<f64>,
    /// Node weight `∫ρ` over the dual cell.
    w: Vec<f64>,
    edges: Vec<(usize, usize, f64)>,
    dof: Vec<usize>,
    n_dof: usize,
}

const NONE: usize = usize::MAX;

fn dual(x: &[f64], k: usize) -> (f64, f64) {
    let lo = if k == 0 { x[0] } else { 0.5 * (x[k - 1] + x[k]) };
    let hi = if k + 1 == x.len() { x[k] } else { 0.5 * (x[k] + x[k + 1]) };
    (lo, hi)
}

fn setup(o: &PhaseOptions) -> (Problem, Vec<f64>) {
    let g = Grading {
        h_min: o.h_min,
        ratio: 1.0 + o.growth,
        h_max: o.h_max,
        rho_bands: vec![(1.0, 1.0)],
        z_bands: vec![(0.0, 0.0)],
    };
    let rho = graded_nodes(0.0, 1.0 + o.r_out, &g, &g.rho_bands);
    let z = graded_nodes(0.0, o.r_out, &g, &g.z_bands);
    let (nr, nz) = (rho.len(), z.len());
    let mut kind = vec![PhaseNode::Masked; nr * nz];
    let mut phi = vec![0.0; nr * nz];
    let top = o.tau as f64 * FRAC_PI_2;
    for j in 0..nz {
        for i in 0..nr {
            let k = j * nr + i;
            let (x, y) = (rho[i], z[j]);
            let r = (x - 1.0).hypot(y);
            let th = y.atan2(x - 1.0);
            if i == 0 {
                continue;
            }
            if r >= o.r_out {
                kind[k] = PhaseNode::Dirichlet;
                phi[k] = top;
            } else if r <= o.delta {
                kind[k] = PhaseNode::Dirichlet;
                phi[k] = boundary_phase(o.tau, o.delta, th.min(theta0(o.delta)));
            } else if x * x + y * y <= 1.0 {
                kind[k] = PhaseNode::Dirichlet;
                phi[k] = y.atan2(x);
            } else if j == 0 {
                kind[k] = PhaseNode::Dirichlet;
                phi[k] = top;
            } else {
                kind[k] = PhaseNode::Unknown;
                // straight-line interpolation of the data towards the outer circle
                let inner = boundary_phase(o.tau, r, th.min(theta0(r.min(std::f64::consts::SQRT_2))));
                let s = ((o.r_out - r) / (o.r_out - o.delta)).clamp(0.0, 1.0);
                phi[k] = top + (inner - top) * s;
            }
        }
    }
    // Dirichlet nodes not adjacent to an unknown are irrelevant
    let mut dof = vec![NONE; nr * nz];
    let mut n_dof = 0;
    for k in 0..nr * nz {
        if kind[k] == PhaseNode::Unknown {
            dof[k] = n_dof;
            n_dof += 1;
        }
    }
    let mut w = vec![0.0; nr * nz];
    let mut pot_w = vec![0.0; nr * nz];
    let mut edges = Vec::new();
    for j in 0..nz {
        let (zl, zh) = dual(&z, j);
        for i in 0..nr {
            let k = j * nr + i;
            let (rl, rh) = dual(&rho, i);
            w[k] = 0.5 * (rh * rh - rl * rl) * (zh - zl);
            if rho[i] > 0.0 {
                pot_w[k] = w[k] / (rho[i] * rho[i]);
            }
            let live = |m: usize| kind[m] != PhaseNode::Masked;
            if i + 1 < nr {
                let m = k + 1;
                if live(k) && live(m) && (dof[k] != NONE || dof[m] != NONE) {
                    let rm = 0.5 * (rho[i] + rho[i + 1]);
                    edges.push((k, m, rm * (zh - zl) / (rho[i + 1] - rho[i])));
                }
            }
            if j + 1 < nz {
                let m = k + nr;
                if live(k) && live(m) && (dof[k] != NONE || dof[m] != NONE) {
                    edges.push((k, m, 0.5 * (rh * rh - rl * rl) / (z[j + 1] - z[j])));
                }
            }
        }
    }
    (Problem { rho, z, kind, pot_w, w, edges, dof, n_dof }, phi)
}

impl Problem {
    fn energy(&self, phi: &[f64]) -> f64 {
        let grad: f64 = self.edges.iter().map(|&(a, b, c)| c * (phi[a] - phi[b]).powi(2)).sum();
        let pot: f64 = (0..phi.len())
            .filter(|&k| self.dof[k] != NONE)
            .map(|k| self.pot_w[k] * phi[k].cos().powi(2))
            .sum();
        grad + pot
    }

    fn gradient(&self, phi: &[f64]) -> Vec<f64> {
        let mut g = vec![0.0; self.n_dof];
        for &(a, b, c) in &self.edges {
            let d = 2.0 * c * (phi[a] - phi[b]);
            if self.dof[a] != NONE {
                g[self.dof[a]] += d;
            }
            if self.dof[b] != NONE {
                g[self.dof[b]] -= d;
            }
        }
        for k in 0..phi.len() {
            if self.dof[k] != NONE {
                g[self.dof[k]] -= self.pot_w[k] * (2.0 * phi[k]).sin();
            }
        }
        g
    }

    fn el_residual(&self, g: &[f64]) -> f64 {
        (0..self.dof.len())
            .filter(|&k| self.dof[k] != NONE)
            .map(|k| (g[self.dof[k]] / (2.0 * self.w[k])).abs())
            .fold(0.0, f64::max)
    }
}

/// Minimizes the discrete `F` by Newton's method with an Armijo line search;
/// the potential curvature is clipped at zero when the true Hessian is not
/// positive definite.
pub fn phase_minimize(opts: &PhaseOptions) -> Result<PhaseField> {
    opts.validate()?;
    let (pb, mut phi) = setup(opts);
    let n = pb.n_dof;
    let mut pairs = Vec::with_capacity(n + pb.edges.len());
    for i in 0..n {
        pairs.push(Pair { row: i, col: i });
    }
    for &(a, b, _) in &pb.edges {
        let (da, db) = (pb.dof[a], pb.dof[b]);
        if da != NONE && db != NONE {
            pairs.push(Pair { row: da.max(db), col: da.min(db) });
        }
    }
    let fail = |what: &str, e: String| Error::NumericFailure(format!("{what}: {e}"));
    let (symbolic, argsort) =
        SymbolicSparseColMat::try_new_from_indices(n, n, &pairs).map_err(|e| fail("phase pattern", format!("{e:?}")))?;
    let symllt = SymbolicLlt::try_new(symbolic.as_ref(), Side::Lower).map_err(|e| fail("phase symbolic", format!("{e:?}")))?;

    let mut energy = pb.energy(&phi);
    let mut history = vec![energy];
    let mut iterations = 0;
    let mut g = pb.gradient(&phi);
    let mut res = pb.el_residual(&g);
    let mut vals = vec![0.0; pairs.len()];
    while res > opts.tol {
        if iterations >= opts.max_iter {
            return Err(Error::SolverFailure {
                reason: "phase problem did not converge".into(),
                steps: iterations,
                residual: res,
                dt: 0.0,
            });
        }
        let mut llt = None;
        for clip in [false, true] {
            vals.iter_mut().for_each(|v| *v = 0.0);
            for k in 0..phi.len() {
                let d = pb.dof[k];
                if d != NONE {
                    let c = -2.0 * pb.pot_w[k] * (2.0 * phi[k]).cos();
                    vals[d] = if clip { c.max(0.0) } else { c };
                }
            }
            let mut e = n;
            for &(a, b, c) in &pb.edges {
                let (da, db) = (pb.dof[a], pb.dof[b]);
                if da != NONE {
                    vals[da] += 2.0 * c;
                }
                if db != NONE {
                    vals[db] += 2.0 * c;
                }
                if da != NONE && db != NONE {
                    vals[e] = -2.0 * c;
                    e += 1;
                }
            }
            let mat = SparseColMat::new_from_argsort(symbolic.clone(), &argsort, &vals)
                .map_err(|e| fail("phase assembly", format!("{e:?}")))?;
            if let Ok(f) = Llt::try_new_with_symbolic(symllt.clone(), mat.as_ref(), Side::Lower) {
                llt = Some(f);
                break;
            }
        }
        let llt = llt.ok_or_else(|| fail("phase factorization", "matrix not positive definite".into()))?;
        let mut step = Mat::<f64>::zeros(n, 1);
        for i in 0..n {
            step[(i, 0)] = -g[i];
        }
        llt.solve_in_place(step.as_mut());
        let slope: f64 = (0..n).map(|i| g[i] * step[(i, 0)]).sum();
        let mut t = 1.0;
        let base = phi.clone();
        loop {
            for k in 0..phi.len() {
                let d = pb.dof[k];
                if d != NONE {
                    phi[k] = base[k] + t * step[(d, 0)];
                }
            }
            let e = pb.energy(&phi);
            // once the predicted decrease is at round-off level the energy
            // cannot arbitrate and the Newton step is taken as is
            if e <= energy + 1e-4 * t * slope || -slope <= 1e-11 * energy.abs() {
                energy = e;
                break;
            }
            t *= 0.5;
            if t < 1e-12 {
                return Err(Error::SolverFailure {
                    reason: "phase line search stalled".into(),
                    steps: iterations,
                    residual: res,
                    dt: t,
                });
            }
        }
        iterations += 1;
        history.push(energy);
        g = pb.gradient(&phi);
        res = pb.el_residual(&g);
    }
    Ok(PhaseField {
        options: opts.clone(),
        rho: pb.rho,
        z: pb.z,
        kind: pb.kind,
        phi,
        energy,
        history,
        el_residual: res,
        iterations,
    })
}

impl PhaseField {
    pub fn n_rho(&self) -> usize {
        self.rho.len()
    }

    pub fn at(&self, i: usize, j: usize) -> f64 {
        self.phi[j * self.rho.len() + i]
    }
}

/// `E⁺[δ] − E⁻[δ]` together with both energies.
pub fn phase_difference(delta: f64, r_out: f64, refine: f64) -> Result<(f64, f64, f64)> {
    let run = |tau| {
        let o = PhaseOptions { r_out, ..PhaseOptions::new(delta, tau) }.refined(refine);
        phase_minimize(&o).map(|p| p.energy)
    };
    let plus = run(1)?;
    let minus = run(-1)?;
    Ok((plus, minus, plus - minus))
}
