//! Explicit Euler and IMEX time stepping.
//!
//! IMEX treats the gradient and azimuthal terms (both linear) implicitly and
//! the bulk potential explicitly; the implicit system is solved by conjugate
//! gradients with a diagonal preconditioner. Per-node sums group the `z−` and
//! `z+` neighbours symmetrically, so a mirror-symmetric state on a mirrored
//! grid stays exactly symmetric.

use super::{accept, SolveOptions, SolveReport, Tracker, DT_FLOOR};
use crate::energy::{energy_unchecked, inv_rho2, partials};
use crate::error::Result;
use crate::grid::{FieldArray, Grid};
use crate::qtensor::{QComponents, XI_COEFFS};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub(super) enum Split {
    Explicit,
    Imex,
}

struct LinearPart<'a> {
    grid: &'a Grid,
    free: Vec<[bool; 5]>,
    diag: Vec<[f64; 5]>,
}

impl<'a> LinearPart<'a> {
    fn new(grid: &'a Grid, dt: f64) -> Self {
        let free: Vec<[bool; 5]> = grid.class.iter().map(|c| c.free_components()).collect();
        let diag = (0..grid.len())
            .map(|k| {
                let w = grid.weight[k];
                let s = w * inv_rho2(grid.rho[k % grid.n_rho()]);
                let c = &grid.coupling[k];
                let lap = 2.0 * ((c[0] + c[1]) + (c[2] + c[3]));
                std::array::from_fn(|q| if free[k][q] { w / dt + lap + 2.0 * XI_COEFFS[q] * s } else { 1.0 })
            })
            .collect();
        LinearPart { grid, free, diag }
    }

    fn apply(&self, x: &[QComponents], y: &mut [QComponents]) {
        let g = self.grid;
        for k in 0..g.len() {
            let nb = g.neighbours(k);
            let c = &g.coupling[k];
            let f = &self.free[k];
            let get = |d: usize, q: usize| match nb[d] {
                Some(m) if c[d] != 0.0 && self.free[m][q] => c[d] * x[m].0[q],
                _ => 0.0,
            };
            y[k] = QComponents(std::array::from_fn(|q| {
                if !f[q] {
                    return 0.0;
                }
                self.diag[k][q] * x[k].0[q] - 2.0 * ((get(0, q) + get(1, q)) + (get(2, q) + get(3, q)))
            }));
        }
    }
}

fn dot(a: &[QComponents], b: &[QComponents]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x.dot(y)).sum()
}

/// Preconditioned conjugate gradients for `A x = b`, starting from zero.
fn cg(op: &LinearPart, b: &[QComponents]) -> Vec<QComponents> {
    let n = b.len();
    let mut x = vec![QComponents::ZERO; n];
    let mut r = b.to_vec();
    let precond = |r: &[QComponents]| -> Vec<QComponents> {
        r.iter()
            .zip(&op.diag)
            .map(|(v, d)| QComponents(std::array::from_fn(|q| v.0[q] / d[q])))
            .collect()
    };
    let mut z = precond(&r);
    let mut p = z.clone();
    let mut rz = dot(&r, &z);
    let b_norm = dot(b, b).sqrt();
    let mut ap = vec![QComponents::ZERO; n];
    for _ in 0..5000 {
        if dot(&r, &r).sqrt() <= 1e-13 * b_norm || b_norm == 0.0 {
            break;
        }
        op.apply(&p, &mut ap);
        let alpha = rz / dot(&p, &ap);
        for k in 0..n {
            x[k] = x[k] + alpha * p[k];
            r[k] = r[k] - alpha * ap[k];
        }
        z = precond(&r);
        let rz_new = dot(&r, &z);
        let beta = rz_new / rz;
        rz = rz_new;
        for k in 0..n {
            p[k] = z[k] + beta * p[k];
        }
    }
    x
}

pub(super) fn run(
    field: &mut FieldArray,
    xi: f64,
    opts: &SolveOptions,
    observer: &mut dyn FnMut(&FieldArray, usize),
    split: Split,
) -> Result<SolveReport> {
    let grid = std::sync::Arc::clone(&field.grid);
    let g = &*grid;
    let free: Vec<[bool; 5]> = g.class.iter().map(|c| c.free_components()).collect();
    let mut tr = Tracker::new(field, xi, opts);
    let mut dt = opts.dt_initial;
    let mut op = (split == Split::Imex).then(|| LinearPart::new(g, dt));
    loop {
        let mut p = partials(field, xi);
        for (k, q) in p.iter_mut().enumerate() {
            for c in 0..5 {
                if !free[k][c] {
                    q.0[c] = 0.0;
                }
            }
        }
        let res = p
            .iter()
            .enumerate()
            .flat_map(|(k, q)| q.0.iter().map(move |x| (x / g.weight[k]).abs()))
            .fold(0.0, f64::max);
        tr.report.final_residual = res;
        tr.report.final_dt = dt;
        if !res.is_finite() {
            return Err(tr.failure("non-finite gradient", dt));
        }
        if res <= opts.tol_residual {
            tr.report.converged = true;
            break;
        }
        if tr.report.steps >= opts.max_steps {
            break;
        }
        loop {
            let delta: Vec<QComponents> = match split {
                Split::Explicit => p
                    .iter()
                    .enumerate()
                    .map(|(k, q)| (-dt / g.weight[k]) * *q)
                    .collect(),
                Split::Imex => {
                    let rhs: Vec<QComponents> = p.iter().map(|q| -*q).collect();
                    cg(op.as_ref().expect("imex operator"), &rhs)
                }
            };
            let old = field.values.clone();
            for (v, d) in field.values.iter_mut().zip(&delta) {
                *v = *v + *d;
            }
            let e = energy_unchecked(field, xi).total;
            if accept(e, tr.energy) {
                tr.accepted(e);
                break;
            }
            field.values = old;
            tr.report.rejected += 1;
            dt *= 0.5;
            if dt < DT_FLOOR {
                return Err(tr.failure("energy increase persists as dt underflows", dt));
            }
            if split == Split::Imex {
                op = Some(LinearPart::new(g, dt));
            }
        }
        if opts.checkpoint_every > 0 && tr.report.steps % opts.checkpoint_every == 0 {
            observer(field, tr.report.steps);
        }
    }
    Ok(tr.report)
}
