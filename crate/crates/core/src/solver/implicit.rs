//! Pseudo-transient backward Euler: `(W/dt + H) δ = −∇E`, with `dt` doubled
//! after every accepted step and quartered after a rejected one.

use faer::linalg::solvers::Solve;
use faer::sparse::linalg::solvers::{Llt, SymbolicLlt};
use faer::sparse::{Pair, SparseColMat, SymbolicSparseColMat};
use faer::{Mat, Side};

use super::{accept, Dofs, SolveOptions, SolveReport, Tracker, DT_FLOOR};
use crate::energy::{energy_unchecked, inv_rho2, partials};
use crate::error::{Error, Result};
use crate::grid::FieldArray;
use crate::qtensor::{potential_hessian, XI_COEFFS};

/// Sparsity pattern of the Newton matrix, lower triangle only.
struct Pattern {
    symbolic: SymbolicSparseColMat<usize>,
    argsort: faer::sparse::Argsort<usize>,
    llt: SymbolicLlt<usize>,
    /// Free component lists per node with at least one free component.
    blocks: Vec<(usize, Vec<usize>)>,
    /// Edges as (node, neighbour, coupling) with same-component couplings.
    edges: Vec<(usize, usize, f64)>,
}

fn build_pattern(field: &FieldArray, dofs: &Dofs) -> Result<Pattern> {
    let g = &*field.grid;
    let mut pairs = Vec::new();
    let mut blocks = Vec::new();
    for k in 0..g.len() {
        let free: Vec<usize> = (0..5).filter(|&q| dofs.index[k][q] != super::NO_DOF).collect();
        if free.is_empty() {
            continue;
        }
        for (a, &p) in free.iter().enumerate() {
            for &q in &free[..=a] {
                pairs.push(Pair { row: dofs.index[k][p], col: dofs.index[k][q] });
            }
        }
        blocks.push((k, free));
    }
    let mut edges = Vec::new();
    for k in 0..g.len() {
        let nb = g.neighbours(k);
        for d in [1, 3] {
            let (Some(m), w) = (nb[d], g.coupling[k][d]) else { continue };
            if w == 0.0 {
                continue;
            }
            let mut any = false;
            for c in 0..5 {
                let (a, b) = (dofs.index[k][c], dofs.index[m][c]);
                if a != super::NO_DOF && b != super::NO_DOF {
                    pairs.push(Pair { row: a.max(b), col: a.min(b) });
                    any = true;
                }
            }
            if any {
                edges.push((k, m, w));
            }
        }
    }
    let n = dofs.len();
    let (symbolic, argsort) = SymbolicSparseColMat::try_new_from_indices(n, n, &pairs)
        .map_err(|e| Error::NumericFailure(format!("sparse pattern: {e:?}")))?;
    let llt = SymbolicLlt::try_new(symbolic.as_ref(), Side::Lower)
        .map_err(|e| Error::NumericFailure(format!("symbolic factorization: {e:?}")))?;
    Ok(Pattern { symbolic, argsort, llt, blocks, edges })
}

/// Eigen-decomposition of a symmetric 5×5 matrix by cyclic Jacobi sweeps;
/// returns eigenvalues and eigenvectors as columns of `v`.
fn jacobi5(mut a: [[f64; 5]; 5]) -> ([f64; 5], [[f64; 5]; 5]) {
    let mut v = [[0.0; 5]; 5];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = 1.0;
    }
    for _ in 0..60 {
        let mut off = 0.0;
        let mut diag = 0.0;
        for i in 0..5 {
            diag += a[i][i].abs();
            for j in (i + 1)..5 {
                off += a[i][j].abs();
            }
        }
        if off <= 1e-15 * diag || off < 1e-300 {
            break;
        }
        for p in 0..5 {
            for q in (p + 1)..5 {
                if a[p][q] == 0.0 {
                    continue;
                }
                let theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q]);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for k in 0..5 {
                    let (akp, akq) = (a[k][p], a[k][q]);
                    a[k][p] = c * akp - s * akq;
                    a[k][q] = s * akp + c * akq;
                }
                for k in 0..5 {
                    let (apk, aqk) = (a[p][k], a[q][k]);
                    a[p][k] = c * apk - s * aqk;
                    a[q][k] = s * apk + c * aqk;
                }
                for row in v.iter_mut() {
                    let (vp, vq) = (row[p], row[q]);
                    row[p] = c * vp - s * vq;
                    row[q] = s * vp + c * vq;
                }
            }
        }
    }
    (std::array::from_fn(|i| a[i][i]), v)
}

/// Projects a symmetric matrix onto the positive semidefinite cone.
pub(crate) fn clamp_psd(h: [[f64; 5]; 5]) -> [[f64; 5]; 5] {
    let (vals, v) = jacobi5(h);
    if vals.iter().all(|&x| x >= 0.0) {
        return h;
    }
    let mut out = [[0.0; 5]; 5];
    for (k, &lam) in vals.iter().enumerate() {
        if lam <= 0.0 {
            continue;
        }
        for i in 0..5 {
            for j in 0..5 {
                out[i][j] += lam * v[i][k] * v[j][k];
            }
        }
    }
    out
}

fn fill_values(field: &FieldArray, pat: &Pattern, xi: f64, dt: f64, clamp: bool, vals: &mut Vec<f64>) {
    let g = &*field.grid;
    let inv_xi2 = 1.0 / (xi * xi);
    vals.clear();
    for (k, free) in &pat.blocks {
        let k = *k;
        let w = g.weight[k];
        let s = w * inv_rho2(g.rho[k % g.n_rho()]);
        let lap: f64 = 2.0 * g.coupling[k].iter().sum::<f64>();
        let mut h = potential_hessian(&field.values[k]);
        if clamp {
            h = clamp_psd(h);
        }
        for (a, &p) in free.iter().enumerate() {
            for &q in &free[..=a] {
                let mut v = inv_xi2 * w * h[p][q];
                if p == q {
                    v += w / dt + lap + 2.0 * XI_COEFFS[p] * s;
                }
                vals.push(v);
            }
        }
    }
    let dofs_free = |k: usize| g.class[k].free_components();
    for &(k, m, w) in &pat.edges {
        let (fk, fm) = (dofs_free(k), dofs_free(m));
        for c in 0..5 {
            if fk[c] && fm[c] {
                vals.push(-2.0 * w);
            }
        }
    }
}

pub(super) fn run(
    field: &mut FieldArray,
    xi: f64,
    opts: &SolveOptions,
    observer: &mut dyn FnMut(&FieldArray, usize),
) -> Result<SolveReport> {
    let g = std::sync::Arc::clone(&field.grid);
    let dofs = Dofs::new(&g.class);
    let mut tr = Tracker::new(field, xi, opts);
    if dofs.len() == 0 {
        tr.report.converged = true;
        return Ok(tr.report);
    }
    let pat = build_pattern(field, &dofs)?;
    let mut dt = opts.dt_initial;
    let mut vals = Vec::new();
    let mut rhs = Mat::<f64>::zeros(dofs.len(), 1);
    loop {
        let p = partials(field, xi);
        let res = dofs.list.iter().map(|&(k, q)| (p[k].0[q] / g.weight[k]).abs()).fold(0.0, f64::max);
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
            let mut llt = None;
            for clamp in [false, true] {
                fill_values(field, &pat, xi, dt, clamp, &mut vals);
                let mat = SparseColMat::new_from_argsort(pat.symbolic.clone(), &pat.argsort, &vals)
                    .map_err(|e| Error::NumericFailure(format!("matrix assembly: {e:?}")))?;
                if let Ok(f) = Llt::try_new_with_symbolic(pat.llt.clone(), mat.as_ref(), Side::Lower) {
                    llt = Some(f);
                    break;
                }
            }
            let Some(llt) = llt else {
                return Err(tr.failure("Cholesky factorization failed", dt));
            };
            for (i, &(k, q)) in dofs.list.iter().enumerate() {
                rhs[(i, 0)] = -p[k].0[q];
            }
            llt.solve_in_place(rhs.as_mut());
            let old: Vec<_> = dofs.list.iter().map(|&(k, q)| field.values[k].0[q]).collect();
            for (i, &(k, q)) in dofs.list.iter().enumerate() {
                field.values[k].0[q] += rhs[(i, 0)];
            }
            let e = energy_unchecked(field, xi).total;
            if accept(e, tr.energy) {
                tr.accepted(e);
                dt = (2.0 * dt).min(opts.dt_max);
                break;
            }
            for (i, &(k, q)) in dofs.list.iter().enumerate() {
                field.values[k].0[q] = old[i];
            }
            tr.report.rejected += 1;
            dt *= 0.25;
            if dt < DT_FLOOR {
                return Err(tr.failure("energy increase persists as dt underflows", dt));
            }
        }
        log::debug!(
            "implicit step {} E = {:.12} residual = {res:.3e} dt = {dt:.3e}",
            tr.report.steps,
            tr.energy
        );
        if opts.checkpoint_every > 0 && tr.report.steps % opts.checkpoint_every == 0 {
            observer(field, tr.report.steps);
        }
    }
    Ok(tr.report)
}
