//! Flat `key = value` run configuration.

use std::path::PathBuf;

use crate::defects::DEFAULT_ETA;
use crate::error::{Error, Result};
use crate::grid::{Grading, GridSpec};
use crate::seeds::HyperbolicAnsatz;
use crate::solver::{AnalysisOptions, Scheme, SolveOptions};

#[derive(Debug, Clone, PartialEq)]
pub enum SeedKind {
    Constant,
    Hyperbolic,
    Comparison,
    Checkpoint(PathBuf),
}

impl SeedKind {
    pub fn parse(s: &str) -> Result<Self> {
        match s {
            "constant" => Ok(SeedKind::Constant),
            "hyperbolic" => Ok(SeedKind::Hyperbolic),
            "comparison" => Ok(SeedKind::Comparison),
            _ => match s.strip_prefix("checkpoint:") {
                Some(p) if !p.is_empty() => Ok(SeedKind::Checkpoint(PathBuf::from(p))),
                _ => Err(Error::Config(format!("unknown seed '{s}'"))),
            },
        }
    }

    pub fn name(&self) -> String {
        match self {
            SeedKind::Constant => "constant".into(),
            SeedKind::Hyperbolic => "hyperbolic".into(),
            SeedKind::Comparison => "comparison".into(),
            SeedKind::Checkpoint(p) => format!("checkpoint:{}", p.display()),
        }
    }

    /// Branch label used in result tables.
    pub fn branch(&self) -> &'static str {
        match self {
            SeedKind::Constant | SeedKind::Comparison => "saturn",
            SeedKind::Hyperbolic => "dipolar",
            SeedKind::Checkpoint(_) => "checkpoint",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GradingMode {
    None,
    Auto,
    Equatorial,
    Dipolar,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub rho_max: f64,
    pub z_max: f64,
    pub n_rho: usize,
    pub n_z: usize,
    pub grading: GradingMode,
    /// Spacing near (1, 0); defaults to half the smallest ξ.
    pub h_min: Option<f64>,
    pub half_plane: bool,
    pub xi: Option<f64>,
    pub xi_list: Vec<f64>,
    pub seeds: Vec<SeedKind>,
    pub z0: f64,
    pub analysis: AnalysisOptions,
    pub solve: SolveOptions,
    pub delta_list: Vec<f64>,
    pub r_out: f64,
    pub phase_refine: f64,
    pub out_dir: PathBuf,
    pub tag: Option<String>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            rho_max: 8.0,
            z_max: 8.0,
            n_rho: 81,
            n_z: 81,
            grading: GradingMode::Auto,
            h_min: None,
            half_plane: true,
            xi: None,
            xi_list: Vec::new(),
            seeds: vec![SeedKind::Constant],
            z0: HyperbolicAnsatz::default().z0,
            analysis: AnalysisOptions { eta: DEFAULT_ETA, ..Default::default() },
            solve: SolveOptions::default(),
            delta_list: vec![0.05],
            r_out: 4.0,
            phase_refine: 1.0,
            out_dir: PathBuf::from("."),
            tag: None,
        }
    }
}

pub const KEYS: &[&str] = &[
    "rho_max",
    "z_max",
    "n_rho",
    "n_z",
    "grading",
    "h_min",
    "half_plane",
    "xi",
    "xi_list",
    "seed",
    "z0",
    "eta",
    "r0_factor",
    "tau_delta",
    "scheme",
    "dt_initial",
    "dt_max",
    "tol_residual",
    "max_steps",
    "checkpoint_every",
    "delta_list",
    "r_out",
    "phase_refine",
    "out_dir",
    "tag",
];

fn num(key: &str, v: &str) -> Result<f64> {
    let x: f64 = v.parse().map_err(|_| Error::Config(format!("{key}: '{v}' is not a number")))?;
    if !x.is_finite() {
        return Err(Error::Config(format!("{key}: value must be finite")));
    }
    Ok(x)
}

fn count(key: &str, v: &str) -> Result<usize> {
    v.parse().map_err(|_| Error::Config(format!("{key}: '{v}' is not a non-negative integer")))
}

/// Numbers separated by commas or whitespace; `1/70` style fractions allowed.
fn list(key: &str, v: &str) -> Result<Vec<f64>> {
    v.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|s| !s.is_empty())
        .map(|s| match s.split_once('/') {
            Some((a, b)) => Ok(num(key, a)? / num(key, b)?),
            None => num(key, s),
        })
        .collect()
}

fn flag(key: &str, v: &str) -> Result<bool> {
    match v {
        "true" | "yes" | "1" => Ok(true),
        "false" | "no" | "0" => Ok(false),
        _ => Err(Error::Config(format!("{key}: '{v}' is not a boolean"))),
    }
}

impl RunConfig {
    /// Parses the text of a configuration file.
    pub fn parse(text: &str) -> Result<Self> {
        let mut c = RunConfig::default();
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line
                .split_once('=')
                .ok_or_else(|| Error::Config(format!("line {}: expected key = value", n + 1)))?;
            c.set(k.trim(), v.trim())?;
        }
        Ok(c)
    }

    pub fn set(&mut self, key: &str, v: &str) -> Result<()> {
        match key {
            "rho_max" => self.rho_max = num(key, v)?,
            "z_max" => self.z_max = num(key, v)?,
            "n_rho" => self.n_rho = count(key, v)?,
            "n_z" => self.n_z = count(key, v)?,
            "grading" => {
                self.grading = match v {
                    "none" => GradingMode::None,
                    "auto" => GradingMode::Auto,
                    "equatorial" => GradingMode::Equatorial,
                    "dipolar" => GradingMode::Dipolar,
                    _ => return Err(Error::Config(format!("grading: unknown mode '{v}'"))),
                }
            }
            "h_min" => self.h_min = Some(num(key, v)?),
            "half_plane" => self.half_plane = flag(key, v)?,
            "xi" => self.xi = Some(list(key, v)?.first().copied().ok_or_else(|| Error::Config("xi: empty".into()))?),
            "xi_list" => self.xi_list = list(key, v)?,
            "seed" => self.seeds = v.split(',').map(|s| SeedKind::parse(s.trim())).collect::<Result<_>>()?,
            "z0" => self.z0 = num(key, v)?,
            "eta" => self.analysis.eta = num(key, v)?,
            "r0_factor" => self.analysis.r0_factor = num(key, v)?,
            "tau_delta" => self.analysis.tau_delta = num(key, v)?,
            "scheme" => self.solve.scheme = v.parse::<Scheme>()?,
            "dt_initial" => self.solve.dt_initial = num(key, v)?,
            "dt_max" => self.solve.dt_max = num(key, v)?,
            "tol_residual" => self.solve.tol_residual = num(key, v)?,
            "max_steps" => self.solve.max_steps = count(key, v)?,
            "checkpoint_every" => self.solve.checkpoint_every = count(key, v)?,
            "delta_list" => self.delta_list = list(key, v)?,
            "r_out" => self.r_out = num(key, v)?,
            "phase_refine" => self.phase_refine = num(key, v)?,
            "out_dir" => self.out_dir = PathBuf::from(v),
            "tag" => self.tag = Some(v.to_string()),
            _ => return Err(Error::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    /// The ξ values of a sweep: `xi_list`, or the single `xi`.
    pub fn sweep_values(&self) -> Vec<f64> {
        if self.xi_list.is_empty() {
            self.xi.into_iter().collect()
        } else {
            self.xi_list.clone()
        }
    }

    pub fn require_xi(&self) -> Result<f64> {
        self.xi
            .or_else(|| self.xi_list.first().copied())
            .ok_or_else(|| Error::Config("xi is required".into()))
    }

    /// Grid for runs down to correlation length `xi_min`.
    pub fn grid_spec(&self, xi_min: f64) -> GridSpec {
        let h = self.h_min.unwrap_or(0.5 * xi_min);
        let grading = match self.grading {
            GradingMode::None => None,
            GradingMode::Equatorial => Some(Grading::equatorial(h)),
            GradingMode::Dipolar => Some(Grading::dipolar(h)),
            GradingMode::Auto if self.half_plane => Some(Grading::equatorial(h)),
            GradingMode::Auto => Some(Grading::dipolar(h)),
        };
        GridSpec { rho_max: self.rho_max, z_max: self.z_max, n_rho: self.n_rho, n_z: self.n_z, grading, half_plane: self.half_plane }
    }

    pub fn ansatz(&self) -> Result<HyperbolicAnsatz> {
        HyperbolicAnsatz::new(self.z0).map_err(|e| Error::Config(e.to_string()))
    }
}
