use std::path::Path;
use std::process::{Command, Output};

const BIN: &str = env!("CARGO_BIN_EXE_ldg-colloid");

const SMALL: &str = "\
# coarse uniform grid, quick to relax
rho_max = 4
z_max = 4
n_rho = 41
n_z = 41
grading = none
xi = 0.25
seed = constant
";

fn run(args: &[&str]) -> Output {
    Command::new(BIN).args(args).env("RUST_LOG", "warn").output().expect("binary runs")
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

fn write_config(dir: &Path, extra: &str) -> String {
    let p = dir.join("run.cfg");
    std::fs::write(&p, format!("{SMALL}{extra}")).unwrap();
    p.to_str().unwrap().to_string()
}

fn rows(path: &Path) -> Vec<Vec<String>> {
    std::fs::read_to_string(path)
        .unwrap()
        .lines()
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect()
}

#[test]
fn unknown_key_is_a_config_error_without_artifacts() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "colour = blue\n");
    let out = dir.path().join("out");
    let o = run(&["relax", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(String::from_utf8_lossy(&o.stderr).contains("colour"));
    assert!(!out.exists());
}

#[test]
fn empty_sweep_list_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("out");
    let o = run(&["sweep", "--set", "xi_list=", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    assert!(!out.exists());
}

#[test]
fn ascending_sweep_list_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["sweep", "--set", "xi_list=1/70,1/40", "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(code(&o), 3);
}

#[test]
fn usage_errors_and_help() {
    assert_eq!(code(&run(&[])), 3);
    assert_eq!(code(&run(&["relax", "--bogus"])), 3);
    assert_eq!(code(&run(&["relax", "--threads", "0"])), 3);
    let h = run(&["--help"]);
    assert_eq!(code(&h), 0);
    assert!(String::from_utf8_lossy(&h.stdout).contains("phase-compare"));
}

#[test]
fn corrupt_checkpoint_exits_with_format_status() {
    let dir = tempfile::tempdir().unwrap();
    let bad = dir.path().join("bad.ldgq");
    std::fs::write(&bad, b"not a checkpoint at all").unwrap();
    let o = run(&["relax", "--seed-checkpoint", bad.to_str().unwrap(), "--out", dir.path().join("o").to_str().unwrap()]);
    assert_eq!(code(&o), 4);
    let o = run(&["analyze", "--seed-checkpoint", bad.to_str().unwrap()]);
    assert_eq!(code(&o), 4);
}

#[test]
fn relax_writes_artifacts_and_restarts_at_a_fixed_point() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "tag = first\n");
    let out = dir.path().join("out");
    let o = run(&["relax", "--config", &cfg, "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));

    let ck = out.join("checkpoint_first.ldgq");
    assert!(ck.exists());
    assert!(out.join("field_first.csv").exists());
    let table = rows(&out.join("results.csv"));
    assert_eq!(
        table[0].join(","),
        "branch,xi,e_total,e_grad,e_phi,e_pot,remainder,n_clusters,ring_rho,ring_z,orientable,tau,steps,wall_s"
    );
    assert_eq!(table.len(), 2);
    assert_eq!(table[1][0], "saturn");

    let o = run(&["relax", "--seed-checkpoint", ck.to_str().unwrap(), "--set", "tag=second", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = rows(&out.join("results.csv"));
    assert_eq!(table.len(), 3);
    let (a, b) = (&table[1], &table[2]);
    assert_eq!(b[0], "checkpoint");
    assert_eq!(b[12], "0", "restart from a converged field takes no steps");
    for col in 2..6 {
        let (x, y): (f64, f64) = (a[col].parse().unwrap(), b[col].parse().unwrap());
        assert!((x - y).abs() <= 1e-12 * x.abs().max(1.0), "column {col}: {x} vs {y}");
    }

    let o = run(&["analyze", "--seed-checkpoint", ck.to_str().unwrap()]);
    assert_eq!(code(&o), 0);
    assert!(String::from_utf8_lossy(&o.stdout).contains("tau"));
}

#[test]
fn ubound_flags_bad_rows_and_keeps_the_rest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = run(&["ubound", "--set", "xi_list=1e-3,0.1", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 3);
    let table = rows(&out.join("ubound.csv"));
    assert_eq!(table.len(), 3);
    assert_eq!(table[1].last().unwrap(), "ok");
    assert_ne!(table[2].last().unwrap(), "ok");
}

#[test]
fn phase_compare_writes_one_row_per_delta() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("o");
    let o = run(&["phase-compare", "--set", "delta_list=0.05", "--out", out.to_str().unwrap()]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let table = rows(&out.join("phase.csv"));
    assert_eq!(table[0].join(","), "delta,r_out,refine,e_plus,e_minus,diff,status");
    let diff: f64 = table[1][5].parse().unwrap();
    assert!(diff < 0.0);
}
