//! CSV outputs.

use std::fs::OpenOptions;
use std::io::Write;
use std::path::Path;

use crate::defects::Orientability;
use crate::error::Result;
use crate::grid::FieldArray;
use crate::qtensor::{potential_c, POTENTIAL_C};
use crate::seeds::ComparisonEnergy;
use crate::solver::BranchRecord;

pub const RESULTS_HEADER: &str =
    "branch,xi,e_total,e_grad,e_phi,e_pot,remainder,n_clusters,ring_rho,ring_z,orientable,tau,steps,wall_s";
pub const UBOUND_HEADER: &str = "xi,sigma,e_total,e_grad,e_phi,e_pot,d1,d2,d4,d5,d6,remainder,status";
pub const PHASE_HEADER: &str = "delta,r_out,refine,e_plus,e_minus,diff,status";
pub const FIELD_HEADER: &str = "rho,z,a0,a1,a2,a3,a4,f_value";

/// Twelve significant digits, scientific notation.
pub fn num(x: f64) -> String {
    format!("{x:.11e}")
}

fn opt<T>(v: Option<T>, f: impl Fn(T) -> String) -> String {
    v.map(f).unwrap_or_default()
}

pub fn results_row(r: &BranchRecord) -> String {
    let c = &r.clusters;
    let orientable = match c.orientability {
        Some(Orientability::Orientable) => "true",
        Some(Orientability::Nonorientable) => "false",
        _ => "",
    };
    [
        r.branch.clone(),
        num(r.xi),
        num(r.energy.total),
        num(r.energy.e_grad),
        num(r.energy.e_phi),
        num(r.energy.e_pot),
        num(r.remainder),
        c.n_clusters.to_string(),
        opt(c.primary, |p| num(p.0)),
        opt(c.primary, |p| num(p.1)),
        orientable.to_string(),
        opt(r.tau, |t| t.to_string()),
        r.steps.to_string(),
        format!("{:.3}", r.wall_s),
    ]
    .join(",")
}

pub fn ubound_row(xi: f64, e: &std::result::Result<ComparisonEnergy, String>) -> String {
    match e {
        Ok(e) => {
            let mut cols = vec![num(xi), num(e.sigma), num(e.breakdown.total), num(e.breakdown.e_grad)];
            cols.push(num(e.breakdown.e_phi));
            cols.push(num(e.breakdown.e_pot));
            cols.extend(e.regions.iter().map(|&v| num(v)));
            cols.push(num(e.remainder));
            cols.push("ok".into());
            cols.join(",")
        }
        Err(msg) => format!("{},,,,,,,,,,,,{}", num(xi), quote(msg)),
    }
}

pub fn phase_row(delta: f64, r_out: f64, refine: f64, res: &std::result::Result<(f64, f64, f64), String>) -> String {
    match res {
        Ok((p, m, d)) => format!("{},{},{},{},{},{},ok", num(delta), num(r_out), num(refine), num(*p), num(*m), num(*d)),
        Err(msg) => format!("{},{},{},,,,{}", num(delta), num(r_out), num(refine), quote(msg)),
    }
}

fn quote(s: &str) -> String {
    format!("\"{}\"", s.replace('"', "'"))
}

/// Writes `rows` under `header`, creating the file or appending to it.
pub fn append_rows(path: &Path, header: &str, rows: &[String]) -> Result<()> {
    let fresh = !path.exists() || std::fs::metadata(path)?.len() == 0;
    let mut f = OpenOptions::new().create(true).append(true).open(path)?;
    if fresh {
        writeln!(f, "{header}")?;
    }
    for r in rows {
        writeln!(f, "{r}")?;
    }
    Ok(())
}

pub fn write_field_csv(field: &FieldArray, path: &Path) -> Result<()> {
    let mut out = String::with_capacity(field.values.len() * 120);
    out.push_str(FIELD_HEADER);
    out.push('\n');
    for (k, q) in field.values.iter().enumerate() {
        let (r, z) = field.grid.position(k);
        let cols: Vec<String> = [r, z].into_iter().chain(q.0).chain([potential_c(q, POTENTIAL_C)]).map(num).collect();
        out.push_str(&cols.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}
