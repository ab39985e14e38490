//! Continuation in ξ and the per-run defect summary.

use std::f64::consts::PI;

use super::{relax_in_place, SolveOptions};
use crate::defects::{locate_defects, ring_charge, DefectCluster, DefectKind, Orientability, DEFAULT_ETA};
use crate::energy::{total_energy, EnergyBreakdown};
use crate::error::{Error, Result};
use crate::grid::FieldArray;

/// Parameters of the defect analysis attached to every converged field.
#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisOptions {
    pub eta: f64,
    /// Merging radius in units of ξ.
    pub r0_factor: f64,
    /// Radius of the loop about (1, 0) used for the ring charge.
    pub tau_delta: f64,
}

impl Default for AnalysisOptions {
    fn default() -> Self {
        AnalysisOptions { eta: DEFAULT_ETA, r0_factor: 4.0, tau_delta: 0.25 }
    }
}

/// Condensed defect information of one converged field.
#[derive(Debug, Clone, PartialEq)]
pub struct ClusterSummary {
    pub n_clusters: usize,
    /// Centre of the most massive cluster.
    pub primary: Option<(f64, f64)>,
    pub primary_kind: Option<DefectKind>,
    pub orientability: Option<Orientability>,
}

impl ClusterSummary {
    pub fn from_clusters(clusters: &[DefectCluster]) -> Self {
        let p = clusters.first();
        ClusterSummary {
            n_clusters: clusters.len(),
            primary: p.map(|c| c.center),
            primary_kind: p.map(|c| c.kind),
            orientability: p.map(|c| c.orientability),
        }
    }

    /// Whether the primary cluster sits next to the equator of the particle.
    pub fn is_equatorial(&self) -> bool {
        matches!(self.primary, Some((r, z)) if z.abs() < 0.3 && r > 0.9 && r < 1.6)
    }
}

/// One point of a ξ-sweep.
#[derive(Debug, Clone, PartialEq)]
pub struct BranchRecord {
    pub branch: String,
    pub seed: String,
    pub xi: f64,
    pub energy: EnergyBreakdown,
    /// `total − π ln(1/ξ) − π ln ln(1/ξ)` of the full cross-section energy.
    pub remainder: f64,
    pub clusters: ClusterSummary,
    pub tau: Option<i8>,
    pub steps: usize,
    pub wall_s: f64,
    pub converged: bool,
}

/// `E − π ln(1/ξ) − π ln ln(1/ξ)`; needs `ξ < 1/e`.
pub fn remainder(total: f64, xi: f64) -> f64 {
    let l = (1.0 / xi).ln();
    total - PI * l - PI * l.ln()
}

/// Defect clusters, their summary and the ring charge when the primary
/// cluster is an equatorial ring.
pub fn analyze(field: &FieldArray, xi: f64, a: &AnalysisOptions) -> Result<(Vec<DefectCluster>, ClusterSummary, Option<i8>)> {
    let clusters = locate_defects(field, xi, a.eta, a.r0_factor * xi)?;
    let summary = ClusterSummary::from_clusters(&clusters);
    let tau = if summary.is_equatorial() {
        match ring_charge(field, a.tau_delta) {
            Ok(t) => Some(t),
            Err(e) => {
                log::warn!("ring charge unavailable: {e}");
                None
            }
        }
    } else {
        None
    };
    Ok((clusters, summary, tau))
}

/// Builds the record of an already relaxed field.
pub fn record(
    branch: &str,
    seed: &str,
    field: &FieldArray,
    xi: f64,
    steps: usize,
    wall_s: f64,
    converged: bool,
    a: &AnalysisOptions,
) -> Result<BranchRecord> {
    let energy = total_energy(field, xi)?;
    let (_, clusters, tau) = analyze(field, xi, a)?;
    Ok(BranchRecord {
        branch: branch.to_string(),
        seed: seed.to_string(),
        xi,
        remainder: remainder(energy.total, xi),
        energy,
        clusters,
        tau,
        steps,
        wall_s,
        converged,
    })
}

/// Result of a sweep; on failure the records before the failing ξ are kept.
#[derive(Debug)]
pub struct Sweep {
    pub records: Vec<BranchRecord>,
    /// Last accepted field (converged at the last recorded ξ unless failed).
    pub field: FieldArray,
    pub failure: Option<(f64, Error)>,
}

/// Relaxes at every ξ of the descending list, each run warm-started from the
/// previous one.
pub fn continuation_sweep(
    xi_list: &[f64],
    seed: &FieldArray,
    xi0: f64,
    opts: &SolveOptions,
    branch: &str,
    seed_name: &str,
    analysis: &AnalysisOptions,
) -> Result<Sweep> {
    if xi_list.is_empty() {
        return Err(Error::invalid("empty xi list"));
    }
    if xi_list.windows(2).any(|w| !(w[1] < w[0])) {
        return Err(Error::invalid("xi list must be strictly descending"));
    }
    if !(xi0 >= xi_list[0]) {
        return Err(Error::invalid(format!("seed xi {xi0} is below the first sweep value {}", xi_list[0])));
    }
    let mut field = seed.clone();
    let mut records = Vec::with_capacity(xi_list.len());
    for &xi in xi_list {
        match relax_in_place(&mut field, xi, opts, &mut |_, _| {}) {
            Ok(rep) => {
                log::info!(
                    "{branch}: xi = {xi:.6} steps {} residual {:.2e} energy {:.6}",
                    rep.steps,
                    rep.final_residual,
                    rep.energy_history.last().copied().unwrap_or(f64::NAN)
                );
                records.push(record(branch, seed_name, &field, xi, rep.steps, rep.wall_time, rep.converged, analysis)?);
            }
            Err(e @ Error::SolverFailure { .. }) => {
                log::error!("{branch}: relaxation failed at xi = {xi}: {e}");
                return Ok(Sweep { records, field, failure: Some((xi, e)) });
            }
            Err(e) => return Err(e),
        }
    }
    Ok(Sweep { records, field, failure: None })
}
