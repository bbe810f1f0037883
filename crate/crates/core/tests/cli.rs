//! End-to-end runs of the compiled binary.

use std::fs;
use std::process::Command;

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_damped-ns"))
}

#[test]
fn run_writes_csv_with_fixed_columns() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("run.ini");
    fs::write(
        &cfg,
        format!(
            "[physics]\nmu = 0.1\nalpha = 0.5\nbeta = 2\n[grid]\nn = 8\nl = 2pi\n\
             [initial]\nkind = random\nseed = 9\nenergy = 1\n\
             [scheme]\nadaptive = false\ndt = 0.02\n\
             [run]\nt_end = 0.4\ndiag_stride = 2\noutput_dir = {}\nrun_id = e2e\n",
            dir.path().display()
        ),
    )
    .unwrap();
    let out = bin().args(["run", "-c"]).arg(&cfg).output().unwrap();
    assert!(
        out.status.success(),
        "{}",
        String::from_utf8_lossy(&out.stderr)
    );

    let csv = fs::read_to_string(dir.path().join("e2e/diagnostics.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(lines.next(), Some("t,E,V2,Lbp,A2,P_f,P_damp,dEdt,umax"));
    let rows: Vec<Vec<f64>> = lines
        .map(|l| l.split(',').map(|v| v.parse().unwrap()).collect())
        .collect();
    assert_eq!(rows.len(), 11);
    assert!(rows.iter().all(|r| r.len() == 9));
    // Unforced and damped: energy never grows.
    assert!(rows.windows(2).all(|w| w[1][1] <= w[0][1]));
    assert!(!dir.path().join("e2e/diagnostics.csv.partial").exists());
    assert!(dir.path().join("e2e/final.bin").exists());
}

#[test]
fn invalid_damping_is_a_config_error() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("bad.ini");
    fs::write(
        &cfg,
        "[physics]\nmu = 0.1\nalpha = 0.5\nbeta = 0.9\n[grid]\nn = 8\nl = 1\n",
    )
    .unwrap();
    let out = bin().args(["run", "-c"]).arg(&cfg).output().unwrap();
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("beta"));
}

#[test]
fn presets_subcommand_lists_every_preset() {
    let out = bin().arg("presets").output().unwrap();
    assert!(out.status.success());
    let text = String::from_utf8(out.stdout).unwrap();
    for (name, _) in damped_ns::cli_io::presets() {
        assert!(text.contains(&name), "{name} missing from {text}");
    }
}
