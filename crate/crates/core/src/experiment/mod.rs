//! Experiment orchestration behind the command-line front end.
//!
//! Every `cmd_*` function returns a process exit status: 0 on success, 2 when
//! a solver or quadrature fails, 3 for configuration and input errors and 4
//! for unreadable checkpoints. Inputs are validated before anything is
//! written, so a rejected configuration leaves no artifacts behind.

pub mod checkpoint;
pub mod config;
pub mod report;

use std::path::{Path, PathBuf};
use std::sync::Arc;

pub use checkpoint::{read_checkpoint, write_checkpoint};
pub use config::{GradingMode, RunConfig, SeedKind};

use crate::defects::DefectCluster;
use crate::error::{Error, Result};
use crate::grid::{build_grid, FieldArray};
use crate::seeds::{comparison_energy, ComparisonEnergy, comparison_seed, constant_seed, hyperbolic_seed};
use crate::solver::{analyze, continuation_sweep, phase_difference, record, relax_in_place, BranchRecord};
use report::{append_rows, phase_row, results_row, ubound_row, write_field_csv};

pub const RESULTS_FILE: &str = "results.csv";
pub const UBOUND_FILE: &str = "ubound.csv";
pub const PHASE_FILE: &str = "phase.csv";

/// Paths written by a relaxation.
#[derive(Debug, Clone)]
pub struct Artifacts {
    pub results: PathBuf,
    pub field: PathBuf,
    pub checkpoint: PathBuf,
}

fn artifacts(out: &Path, tag: &str) -> Artifacts {
    Artifacts {
        results: out.join(RESULTS_FILE),
        field: out.join(format!("field_{tag}.csv")),
        checkpoint: out.join(format!("checkpoint_{tag}.ldgq")),
    }
}

fn default_tag(branch: &str, xi: f64) -> String {
    format!("{branch}_xi{xi:.6}")
}

/// Builds the initial field of `seed`; checkpoints bring their own grid and ξ.
pub fn build_seed(cfg: &RunConfig, seed: &SeedKind, xi_min: f64) -> Result<(FieldArray, Option<f64>)> {
    if let SeedKind::Checkpoint(p) = seed {
        let (f, xi) = read_checkpoint(p)?;
        return Ok((f, Some(xi)));
    }
    let grid = Arc::new(build_grid(&cfg.grid_spec(xi_min))?);
    grid.check_resolution(xi_min)?;
    let f = match seed {
        SeedKind::Constant => constant_seed(&grid),
        SeedKind::Hyperbolic => hyperbolic_seed(&grid, &cfg.ansatz()?)?,
        SeedKind::Comparison => comparison_seed(&grid, xi_min)?,
        SeedKind::Checkpoint(_) => unreachable!(),
    };
    Ok((f, None))
}

fn first_seed(cfg: &RunConfig) -> Result<&SeedKind> {
    cfg.seeds.first().ok_or_else(|| Error::Config("no seed given".into()))
}

fn create_out(cfg: &RunConfig) -> Result<()> {
    std::fs::create_dir_all(&cfg.out_dir)?;
    Ok(())
}

fn exit_status<T>(r: Result<T>) -> i32 {
    match r {
        Ok(_) => 0,
        Err(e) => {
            log::error!("{e}");
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

/// Outcome of a single relaxation.
#[derive(Debug)]
pub struct RelaxOutcome {
    pub record: BranchRecord,
    pub field: FieldArray,
    pub clusters: Vec<DefectCluster>,
    pub artifacts: Artifacts,
}

/// Seed, relax and analyse at one ξ, writing a checkpoint, a results row and
/// a field dump. After a solver failure the last accepted state is still
/// checkpointed.
pub fn run_relax(cfg: &RunConfig) -> Result<RelaxOutcome> {
    let seed = first_seed(cfg)?;
    let (mut field, xi) = match (seed, cfg.require_xi()) {
        (SeedKind::Checkpoint(_), Err(_)) => match build_seed(cfg, seed, 0.0)? {
            (f, Some(x)) => (f, x),
            _ => unreachable!(),
        },
        (_, xi) => {
            let xi = xi?;
            (build_seed(cfg, seed, xi)?.0, xi)
        }
    };
    field.grid.check_resolution(xi)?;
    let branch = seed.branch();
    let tag = cfg.tag.clone().unwrap_or_else(|| default_tag(branch, xi));
    create_out(cfg)?;
    let art = artifacts(&cfg.out_dir, &tag);

    let ck = art.checkpoint.clone();
    let mut observer = |f: &FieldArray, step: usize| match write_checkpoint(f, xi, &ck) {
        Ok(()) => log::debug!("checkpoint at step {step}"),
        Err(e) => log::warn!("checkpoint at step {step} failed: {e}"),
    };
    let rep = match relax_in_place(&mut field, xi, &cfg.solve, &mut observer) {
        Ok(r) => r,
        Err(e) => {
            if matches!(e, Error::SolverFailure { .. }) {
                write_checkpoint(&field, xi, &art.checkpoint)?;
            }
            return Err(e);
        }
    };
    if !rep.converged {
        log::warn!("not converged after {} steps (residual {:.3e})", rep.steps, rep.final_residual);
    }
    write_checkpoint(&field, xi, &art.checkpoint)?;
    let rec = record(branch, &seed.name(), &field, xi, rep.steps, rep.wall_time, rep.converged, &cfg.analysis)?;
    let (clusters, _, _) = analyze(&field, xi, &cfg.analysis)?;
    append_rows(&art.results, report::RESULTS_HEADER, &[results_row(&rec)])?;
    write_field_csv(&field, &art.field)?;
    Ok(RelaxOutcome { record: rec, field, clusters, artifacts: art })
}

pub fn cmd_relax(cfg: &RunConfig) -> i32 {
    exit_status(run_relax(cfg))
}

/// Records of every branch; the error is the first failure met, reported
/// after all branches ran.
pub fn run_sweep(cfg: &RunConfig) -> (Vec<BranchRecord>, Result<()>) {
    let prepared = (|| {
        let xs = cfg.sweep_values();
        if xs.is_empty() {
            return Err(Error::Config("xi_list is empty".into()));
        }
        if xs.windows(2).any(|w| !(w[1] < w[0])) {
            return Err(Error::Config("xi_list must be strictly descending".into()));
        }
        let xi_min = *xs.last().expect("non-empty");
        let seeds = cfg
            .seeds
            .iter()
            .map(|s| build_seed(cfg, s, xi_min).map(|(f, _)| (s, f)))
            .collect::<Result<Vec<_>>>()?;
        for (_, f) in &seeds {
            f.grid.check_resolution(xi_min)?;
        }
        create_out(cfg)?;
        Ok((xs, seeds))
    })();
    let (xs, seeds) = match prepared {
        Ok(p) => p,
        Err(e) => return (Vec::new(), Err(e)),
    };
    let mut all = Vec::new();
    let mut first_err = None;
    for (seed, field) in seeds {
        let branch = seed.branch();
        let tag = match &cfg.tag {
            Some(t) => format!("{t}_{branch}"),
            None => format!("{branch}_sweep"),
        };
        let art = artifacts(&cfg.out_dir, &tag);
        let outcome = continuation_sweep(&xs, &field, xs[0], &cfg.solve, branch, &seed.name(), &cfg.analysis)
            .and_then(|sw| {
                let rows: Vec<String> = sw.records.iter().map(results_row).collect();
                append_rows(&art.results, report::RESULTS_HEADER, &rows)?;
                let last_xi = sw.failure.as_ref().map(|(x, _)| *x).or(sw.records.last().map(|r| r.xi)).unwrap_or(xs[0]);
                write_checkpoint(&sw.field, last_xi, &art.checkpoint)?;
                write_field_csv(&sw.field, &art.field)?;
                all.extend(sw.records);
                match sw.failure {
                    Some((_, e)) => Err(e),
                    None => Ok(()),
                }
            });
        if let Err(e) = outcome {
            log::error!("branch {branch}: {e}");
            first_err.get_or_insert(e);
        }
    }
    (all, first_err.map_or(Ok(()), Err))
}

pub fn cmd_sweep(cfg: &RunConfig) -> i32 {
    exit_status(run_sweep(cfg).1)
}

/// Exit status of a table whose failed rows were flagged: the most severe
/// row error, 0 when every row succeeded.
fn table_status<T>(rows: &[(f64, Result<T>)]) -> i32 {
    rows.iter().filter_map(|(_, r)| r.as_ref().err()).map(Error::exit_code).max().unwrap_or(0)
}

fn flagged<T: Clone>(r: &Result<T>) -> std::result::Result<T, String> {
    r.as_ref().map(T::clone).map_err(|e| e.to_string())
}

/// One comparison-map evaluation per ξ; failures are flagged in their row
/// and the remaining rows proceed.
pub fn run_ubound(cfg: &RunConfig) -> Result<Vec<(f64, Result<ComparisonEnergy>)>> {
    let xs = cfg.sweep_values();
    if xs.is_empty() {
        return Err(Error::Config("xi_list is empty".into()));
    }
    create_out(cfg)?;
    let out: Vec<_> = xs.iter().map(|&xi| (xi, comparison_energy(xi))).collect();
    let rows: Vec<String> = out.iter().map(|(xi, e)| ubound_row(*xi, &flagged(e))).collect();
    append_rows(&cfg.out_dir.join(UBOUND_FILE), report::UBOUND_HEADER, &rows)?;
    Ok(out)
}

pub fn cmd_ubound(cfg: &RunConfig) -> i32 {
    match run_ubound(cfg) {
        Ok(rows) => table_status(&rows),
        Err(e) => exit_status::<()>(Err(e)),
    }
}

/// `(δ, (E⁺, E⁻, E⁺ − E⁻))` per requested δ, written to `phase.csv`.
pub fn run_phase_compare(cfg: &RunConfig) -> Result<Vec<(f64, Result<(f64, f64, f64)>)>> {
    if cfg.delta_list.is_empty() {
        return Err(Error::Config("delta_list is empty".into()));
    }
    create_out(cfg)?;
    let out: Vec<_> = cfg.delta_list.iter().map(|&d| (d, phase_difference(d, cfg.r_out, cfg.phase_refine))).collect();
    let rows: Vec<String> = out.iter().map(|(d, r)| phase_row(*d, cfg.r_out, cfg.phase_refine, &flagged(r))).collect();
    append_rows(&cfg.out_dir.join(PHASE_FILE), report::PHASE_HEADER, &rows)?;
    Ok(out)
}

pub fn cmd_phase_compare(cfg: &RunConfig) -> i32 {
    match run_phase_compare(cfg) {
        Ok(rows) => table_status(&rows),
        Err(e) => exit_status::<()>(Err(e)),
    }
}

/// Defect report of a stored field, as text.
pub fn analyze_checkpoint(path: &Path, cfg: &RunConfig) -> Result<String> {
    let (field, xi) = read_checkpoint(path)?;
    let (clusters, summary, tau) = analyze(&field, xi, &cfg.analysis)?;
    let e = crate::energy::total_energy(&field, xi)?;
    let mut s = format!(
        "checkpoint {}\nxi {xi}\ngrid {}x{}{}\nenergy {:.12} (grad {:.12}, phi {:.12}, pot {:.12})\nremainder {:.12}\n",
        path.display(),
        field.grid.n_rho(),
        field.grid.n_z(),
        if field.grid.spec.half_plane { " half-plane" } else { "" },
        e.total,
        e.e_grad,
        e.e_phi,
        e.e_pot,
        crate::solver::remainder(e.total, xi),
    );
    s.push_str(&format!("clusters {}\n", summary.n_clusters));
    s.push_str("rho,z,radius,mass,nodes,kind,orientability\n");
    for c in &clusters {
        s.push_str(&format!(
            "{:.6},{:.6},{:.6},{:.6e},{},{:?},{}\n",
            c.center.0,
            c.center.1,
            c.radius,
            c.mass,
            c.nodes,
            c.kind,
            c.orientability.as_str()
        ));
    }
    if let Some(t) = tau {
        s.push_str(&format!("tau {t:+}\n"));
    }
    Ok(s)
}

pub fn cmd_analyze(cfg: &RunConfig) -> i32 {
    let path = match cfg.seeds.first() {
        Some(SeedKind::Checkpoint(p)) => p.clone(),
        _ => return exit_status::<()>(Err(Error::Config("analyze needs a checkpoint seed".into()))),
    };
    exit_status(analyze_checkpoint(&path, cfg).map(|s| print!("{s}")))
}
