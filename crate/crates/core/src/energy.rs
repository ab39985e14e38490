//! Discrete cylindrical energy and its gradient.
//!
//! The gradient term is a sum over grid edges of `ω |a_i − a_j|²`, the
//! azimuthal and bulk terms are lumped at nodes with the dual-cell weight
//! `∫ρ dρ dz`. Gradients are exact derivatives of this discrete energy.

use crate::error::{Error, Result};
use crate::grid::{FieldArray, Grid, NodeClass};
use crate::qtensor::{potential_c, potential_grad, xi_penalty, QComponents, POTENTIAL_C, XI_COEFFS};

/// Energy contributions over the full cross-section.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct EnergyBreakdown {
    pub e_grad: f64,
    pub e_phi: f64,
    pub e_pot: f64,
    pub total: f64,
}

impl EnergyBreakdown {
    pub fn new(e_grad: f64, e_phi: f64, e_pot: f64) -> Self {
        EnergyBreakdown { e_grad, e_phi, e_pot, total: e_grad + e_phi + e_pot }
    }

    pub fn scaled(&self, s: f64) -> Self {
        EnergyBreakdown::new(s * self.e_grad, s * self.e_phi, s * self.e_pot)
    }
}

pub(crate) fn check_xi(xi: f64) -> Result<()> {
    if !(xi > 0.0 && xi.is_finite()) {
        return Err(Error::invalid(format!("correlation length must be positive, got {xi}")));
    }
    Ok(())
}

/// `1/ρ²` weight of the azimuthal term, zero on the axis.
#[inline]
pub(crate) fn inv_rho2(rho: f64) -> f64 {
    if rho > 0.0 {
        1.0 / (rho * rho)
    } else {
        0.0
    }
}

fn diff2(a: &QComponents, b: &QComponents) -> f64 {
    (0..5).map(|c| (a.0[c] - b.0[c]).powi(2)).sum()
}

/// Evaluates the energy of `field` at correlation length `xi`.
pub fn total_energy(field: &FieldArray, xi: f64) -> Result<EnergyBreakdown> {
    check_xi(xi)?;
    Ok(energy_unchecked(field, xi))
}

pub(crate) fn energy_unchecked(field: &FieldArray, xi: f64) -> EnergyBreakdown {
    let g = &*field.grid;
    let v = &field.values;
    let nr = g.n_rho();
    let inv_xi2 = 1.0 / (xi * xi);
    let (mut eg, mut ep, mut ef) = (0.0, 0.0, 0.0);
    for j in 0..g.n_z() {
        let (mut rg, mut rp, mut rf) = (0.0, 0.0, 0.0);
        for i in 0..nr {
            let k = j * nr + i;
            let c = &g.coupling[k];
            if c[1] != 0.0 {
                rg += c[1] * diff2(&v[k], &v[k + 1]);
            }
            if c[3] != 0.0 {
                rg += c[3] * diff2(&v[k], &v[k + nr]);
            }
            if g.class[k].carries_energy() {
                let w = g.weight[k];
                rp += w * inv_rho2(g.rho[i]) * xi_penalty(&v[k]);
                rf += w * potential_c(&v[k], POTENTIAL_C);
            }
        }
        eg += rg;
        ep += rp;
        ef += rf;
    }
    EnergyBreakdown::new(eg, ep, inv_xi2 * ef).scaled(g.multiplier())
}

/// Partial derivatives of the computed (unmultiplied) energy with respect to
/// every nodal component, including fixed ones.
pub(crate) fn partials(field: &FieldArray, xi: f64) -> Vec<QComponents> {
    let g = &*field.grid;
    let v = &field.values;
    let inv_xi2 = 1.0 / (xi * xi);
    let mut out = vec![QComponents::ZERO; g.len()];
    for (k, o) in out.iter_mut().enumerate() {
        let class = g.class[k];
        if class == NodeClass::Solid {
            continue;
        }
        let nb = g.neighbours(k);
        let c = &g.coupling[k];
        let a = &v[k];
        let term = |d: usize| -> [f64; 5] {
            match nb[d] {
                Some(m) if c[d] != 0.0 => std::array::from_fn(|q| c[d] * (a.0[q] - v[m].0[q])),
                _ => [0.0; 5],
            }
        };
        let (l, r, dn, up) = (term(0), term(1), term(2), term(3));
        let mut res: [f64; 5] = std::array::from_fn(|q| 2.0 * ((l[q] + r[q]) + (dn[q] + up[q])));
        if class.carries_energy() {
            let (rho, _) = g.position(k);
            let w = g.weight[k];
            let s = w * inv_rho2(rho);
            let pg = potential_grad(a);
            for q in 0..5 {
                res[q] += 2.0 * XI_COEFFS[q] * s * a.0[q] + inv_xi2 * w * pg.0[q];
            }
        }
        *o = QComponents(res);
    }
    out
}

/// L² gradient of the energy: nodal partials divided by the dual-cell weight.
///
/// Fixed components (Dirichlet nodes and the constrained components on the axis
/// and mirror line) get zero.
pub fn energy_gradient(field: &FieldArray, xi: f64) -> Result<Vec<QComponents>> {
    check_xi(xi)?;
    Ok(l2_gradient(field, xi))
}

pub(crate) fn l2_gradient(field: &FieldArray, xi: f64) -> Vec<QComponents> {
    let g = &*field.grid;
    let mut p = partials(field, xi);
    for (k, q) in p.iter_mut().enumerate() {
        let free = g.class[k].free_components();
        let w = g.weight[k];
        for c in 0..5 {
            q.0[c] = if free[c] { q.0[c] / w } else { 0.0 };
        }
    }
    p
}

/// `⟨g, v⟩ = m Σ w g·v`, the inner product in which `energy_gradient` is the
/// gradient of `total_energy`.
pub fn weighted_inner(grid: &Grid, g: &[QComponents], v: &[QComponents]) -> f64 {
    let s: f64 = grid.weight.iter().zip(g.iter().zip(v.iter())).map(|(w, (a, b))| w * a.dot(b)).sum();
    grid.multiplier() * s
}

/// Largest absolute gradient component.
pub fn residual_inf(g: &[QComponents]) -> f64 {
    g.iter().flat_map(|q| q.0.iter()).fold(0.0_f64, |m, x| m.max(x.abs()))
}

/// Pointwise bulk potential, used for field dumps and the bad set.
pub fn potential_field(field: &FieldArray) -> Vec<f64> {
    field.values.iter().map(|q| potential_c(q, POTENTIAL_C)).collect()
}
