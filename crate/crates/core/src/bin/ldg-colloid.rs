use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use ldg_colloid::experiment::{self, RunConfig, SeedKind};
use ldg_colloid::Error;

/// Axisymmetric Landau-de Gennes simulator for a nematic around a spherical colloid.
///
/// Exit status: 0 success, 2 solver or quadrature failure, 3 configuration
/// error, 4 unreadable checkpoint.
#[derive(Parser)]
#[command(name = "ldg-colloid", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Seed, relax and analyse at a single xi.
    Relax(Common),
    /// Continuation over a descending xi_list, one branch per seed.
    Sweep(Common),
    /// Energy of the comparison map for every xi of xi_list.
    Ubound(Common),
    /// Charge comparison of the phase problem for every delta of delta_list.
    PhaseCompare(Common),
    /// Defect report of a checkpoint.
    Analyze(Common),
}

#[derive(Args)]
struct Common {
    /// Flat key = value configuration file.
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory; overrides out_dir.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads. The solver runs on one thread; larger values are accepted and logged.
    #[arg(long, default_value_t = 1)]
    threads: usize,
    /// Start from (or analyse) this checkpoint; overrides seed.
    #[arg(long)]
    seed_checkpoint: Option<PathBuf>,
    /// Extra configuration entries, applied after the file.
    #[arg(long = "set", value_name = "KEY=VALUE")]
    set: Vec<String>,
}

fn load(c: &Common) -> Result<RunConfig, Error> {
    let mut cfg = match &c.config {
        Some(p) => {
            let text = std::fs::read_to_string(p)
                .map_err(|e| Error::Config(format!("cannot read {}: {e}", p.display())))?;
            RunConfig::parse(&text)?
        }
        None => RunConfig::default(),
    };
    for kv in &c.set {
        let (k, v) = kv.split_once('=').ok_or_else(|| Error::Config(format!("--set expects KEY=VALUE, got '{kv}'")))?;
        cfg.set(k.trim(), v.trim())?;
    }
    if let Some(o) = &c.out {
        cfg.out_dir = o.clone();
    }
    if let Some(p) = &c.seed_checkpoint {
        cfg.seeds = vec![SeedKind::Checkpoint(p.clone())];
    }
    if c.threads == 0 {
        return Err(Error::Config("--threads must be at least 1".into()));
    }
    if c.threads > 1 {
        log::info!("--threads {} requested; running single-threaded", c.threads);
    }
    Ok(cfg)
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    // Usage errors count as configuration errors, not clap's default status 2.
    let cli = match Cli::try_parse() {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { 3 } else { 0 });
        }
    };
    let (common, run): (&Common, fn(&RunConfig) -> i32) = match &cli.command {
        Command::Relax(c) => (c, experiment::cmd_relax),
        Command::Sweep(c) => (c, experiment::cmd_sweep),
        Command::Ubound(c) => (c, experiment::cmd_ubound),
        Command::PhaseCompare(c) => (c, experiment::cmd_phase_compare),
        Command::Analyze(c) => (c, experiment::cmd_analyze),
    };
    let code = match load(common) {
        Ok(cfg) => run(&cfg),
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    };
    ExitCode::from(code as u8)
}
