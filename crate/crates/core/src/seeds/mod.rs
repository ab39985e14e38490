//! Initial conditions and the analytic comparison map.

mod comparison;

use std::sync::Arc;

pub use comparison::{comparison_energy, theta0, xi_upper_limit, ComparisonEnergy, ComparisonMap, Region};

use crate::error::{Error, Result};
use crate::grid::{FieldArray, Grid};
use crate::qtensor::{uniaxial, QComponents, Q_INF};

/// Far-field alignment `e3⊗e3 − I/3` in the bulk, boundary data applied.
pub fn constant_seed(grid: &Arc<Grid>) -> FieldArray {
    let mut f = FieldArray::filled(Arc::clone(grid), Q_INF);
    f.fill_solid();
    f.apply_bc();
    f
}

/// How the angle ψ of the hyperbolic ansatz is turned into a director.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PsiConvention {
    /// ψ is the angle from `e3`: `n = (sin ψ, 0, cos ψ)`. Radial on the
    /// particle, vertical on the axis and at infinity.
    #[default]
    PolarFromAxis,
    /// `n = (cos ψ, 0, sin ψ)`, horizontal far away.
    FromPlane,
}

/// Point defect at `(0, −z0)` with its image at `(0, −1/z0)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HyperbolicAnsatz {
    pub z0: f64,
    pub convention: PsiConvention,
}

impl Default for HyperbolicAnsatz {
    fn default() -> Self {
        HyperbolicAnsatz { z0: 1.3, convention: PsiConvention::default() }
    }
}

impl HyperbolicAnsatz {
    pub fn new(z0: f64) -> Result<Self> {
        if !(z0 > 1.0 && z0.is_finite()) {
            return Err(Error::invalid(format!("hyperbolic defect offset must exceed 1, got {z0}")));
        }
        Ok(HyperbolicAnsatz { z0, convention: PsiConvention::default() })
    }

    /// ψ with every arctangent on the branch `atan2(ρ, ·) ∈ [0, π]`.
    pub fn psi(&self, rho: f64, z: f64) -> f64 {
        let rho = rho.abs();
        2.0 * rho.atan2(z) - rho.atan2(z + self.z0) - rho.atan2(z + 1.0 / self.z0)
    }

    pub fn director(&self, rho: f64, z: f64) -> [f64; 3] {
        let (s, c) = self.psi(rho, z).sin_cos();
        match self.convention {
            PsiConvention::PolarFromAxis => [s, 0.0, c],
            PsiConvention::FromPlane => [c, 0.0, s],
        }
    }

    pub fn value(&self, rho: f64, z: f64) -> QComponents {
        uniaxial(self.director(rho, z))
    }
}

/// Dipolar initial condition; full-plane grids only.
pub fn hyperbolic_seed(grid: &Arc<Grid>, ansatz: &HyperbolicAnsatz) -> Result<FieldArray> {
    if grid.spec.half_plane {
        return Err(Error::invalid("the hyperbolic seed is not mirror symmetric and needs a full-plane grid"));
    }
    HyperbolicAnsatz::new(ansatz.z0)?;
    let mut f = FieldArray::from_fn(Arc::clone(grid), |r, z| ansatz.value(r, z));
    f.fill_solid();
    f.apply_bc();
    Ok(f)
}

/// Samples the comparison map at every node and applies the boundary data.
pub fn comparison_seed(grid: &Arc<Grid>, xi: f64) -> Result<FieldArray> {
    let map = ComparisonMap::new(xi)?;
    let mut f = FieldArray::from_fn(Arc::clone(grid), |r, z| map.value(r, z));
    f.apply_bc();
    Ok(f)
}
