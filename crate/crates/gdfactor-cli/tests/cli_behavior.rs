//! Black-box tests of the `gdfactor` binary: exit codes, error messages,
//! artifact layout, the self-describing CSV contract, and byte-level
//! determinism of outputs across repeated runs and parallelism levels.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn gdfactor() -> Command {
    Command::new(env!("CARGO_BIN_EXE_gdfactor"))
}

fn run(args: &[&str]) -> Output {
    gdfactor().args(args).output().expect("binary launches")
}

fn write_config(dir: &Path, body: &str) -> String {
    let path = dir.join("config.txt");
    fs::write(&path, body).unwrap();
    path.to_string_lossy().into_owned()
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("terminated by exit, not signal")
}

#[test]
fn schedule_prints_the_plan_and_writes_the_report_file() {
    let tmp = tempfile::tempdir().unwrap();
    let out_dir = tmp.path().join("out");
    let out = run(&["schedule", "--out", out_dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_of(&out));
    let stdout = stdout_of(&out);
    assert!(
        stdout.contains("kappa_r = 3"),
        "stdout missing the condition number: {stdout}"
    );
    assert!(
        stdout.contains("T0 <= T holds"),
        "stdout missing the window check: {stdout}"
    );
    let report = fs::read_to_string(out_dir.join("schedule.txt")).unwrap();
    assert_eq!(report, stdout, "schedule.txt must mirror the printed plan");
}

#[test]
fn schedule_rejects_a_stepsize_above_the_cap() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "eta = 0.1\n");
    let out = run(&["schedule", "--config", &cfg]);
    assert_eq!(code(&out), 2);
    let err = stderr_of(&out);
    assert!(
        err.contains("stepsize cap"),
        "stderr must name the stepsize cap: {err}"
    );
}

#[test]
fn schedule_rejects_a_spectrum_without_a_gap() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "sigma = [1.0, 1.0]\nrank = 1\n");
    let out = run(&["schedule", "--config", &cfg]);
    assert_eq!(code(&out), 2);
    let err = stderr_of(&out);
    assert!(
        err.contains("no relative spectral gap"),
        "stderr must explain the missing gap: {err}"
    );
}

#[test]
fn psd_toy_artifacts_are_byte_identical_across_runs() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "contraction_trials = 200\n");
    let mut outputs = Vec::new();
    for name in ["a", "b"] {
        let dir = tmp.path().join(name);
        let out = run(&["psd-toy", "--config", &cfg, "--out", dir.to_str().unwrap()]);
        assert_eq!(code(&out), 0, "stderr: {}", stderr_of(&out));
        outputs.push((
            fs::read(dir.join("psd_toy.csv")).unwrap(),
            fs::read(dir.join("psd_toy.svg")).unwrap(),
        ));
    }
    assert_eq!(outputs[0].0, outputs[1].0, "CSV must be deterministic");
    assert_eq!(outputs[0].1, outputs[1].1, "SVG must be deterministic");
}

#[test]
fn csv_documents_every_column_it_ships() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "contraction_trials = 200\n");
    let dir = tmp.path().join("out");
    let out = run(&["psd-toy", "--config", &cfg, "--out", dir.to_str().unwrap()]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_of(&out));

    let csv = fs::read_to_string(dir.join("psd_toy.csv")).unwrap();
    let doc_lines = csv.lines().filter(|l| l.starts_with("# col ")).count();
    let header = csv
        .lines()
        .find(|l| !l.starts_with('#'))
        .expect("header row present");
    assert_eq!(
        doc_lines,
        header.split(',').count(),
        "one `# col` doc line per header column"
    );
    assert!(csv.lines().any(|l| l.starts_with("# tool: gdfactor")));
    assert!(csv.lines().any(|l| l.starts_with("# subcommand: psd-toy")));
    assert!(csv.lines().any(|l| l.starts_with("# master_seed:")));
}

#[test]
fn sweep_output_is_invariant_under_parallelism() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "dim = 24\nk = 4\niters = 120\ntrials = 3\nrho_list = [1e-4, 1e-6, 1e-8]\n",
    );
    let mut outputs = Vec::new();
    for (name, parallel) in [("p1", "1"), ("p4", "4")] {
        let dir = tmp.path().join(name);
        let out = run(&[
            "sweep-rho",
            "--config",
            &cfg,
            "--out",
            dir.to_str().unwrap(),
            "--parallel",
            parallel,
        ]);
        assert_eq!(code(&out), 0, "stderr: {}", stderr_of(&out));
        outputs.push((
            fs::read(dir.join("sweep_rho.csv")).unwrap(),
            fs::read(dir.join("sweep_rho.svg")).unwrap(),
        ));
    }
    assert_eq!(outputs[0].0, outputs[1].0, "CSV differs across --parallel");
    assert_eq!(outputs[0].1, outputs[1].1, "SVG differs across --parallel");
}

#[test]
fn overfit_demo_clean_variant_writes_its_artifacts() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(
        tmp.path(),
        "variant = clean\nm = 40\nn = 32\nk = 8\niters = 1500\nrecord_every = 10\n",
    );
    let dir = tmp.path().join("out");
    let out = run(&[
        "overfit-demo",
        "--config",
        &cfg,
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_of(&out));
    for file in [
        "overfit_clean.csv",
        "overfit_clean_errors.svg",
        "overfit_clean_singulars.svg",
    ] {
        assert!(dir.join(file).is_file(), "missing artifact {file}");
    }
    let svg = fs::read_to_string(dir.join("overfit_clean_errors.svg")).unwrap();
    assert!(svg.contains(r#"width="800""#) && svg.contains(r#"height="600""#));
    assert!(!svg.contains("<script"), "plots must not embed scripts");
    assert!(
        !svg.contains("http://") || svg.contains("http://www.w3.org"),
        "plots must be self-contained (namespace URIs aside)"
    );
}

#[test]
fn init_compare_runs_at_reduced_scale() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "m = 40\nn = 32\nk = 8\niters = 2500\n");
    let dir = tmp.path().join("out");
    let out = run(&[
        "init-compare",
        "--config",
        &cfg,
        "--out",
        dir.to_str().unwrap(),
    ]);
    assert_eq!(code(&out), 0, "stderr: {}", stderr_of(&out));
    assert!(dir.join("init_compare.csv").is_file());
    assert!(dir.join("init_compare.svg").is_file());
    let stdout = stdout_of(&out);
    assert!(
        stdout.contains("small"),
        "summary should report the small-initialization run: {stdout}"
    );
}

#[test]
fn unknown_config_key_is_named_in_the_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "variant = clean\nbogus_knob = 1\n");
    let out = run(&["overfit-demo", "--config", &cfg]);
    assert_eq!(code(&out), 2);
    let err = stderr_of(&out);
    assert!(err.contains("bogus_knob"), "stderr must name the key: {err}");
}

#[test]
fn malformed_numeric_value_is_a_config_error() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "eta = banana\n");
    let out = run(&["schedule", "--config", &cfg]);
    assert_eq!(code(&out), 2);
    let err = stderr_of(&out);
    assert!(err.contains("eta"), "stderr must name the key: {err}");
}

#[test]
fn unwritable_output_directory_is_a_config_error() {
    let out = run(&["schedule", "--out", "/proc/definitely/not/writable"]);
    assert_eq!(code(&out), 2);
}

#[test]
fn unknown_variant_is_rejected() {
    let tmp = tempfile::tempdir().unwrap();
    let cfg = write_config(tmp.path(), "variant = sideways\n");
    let out = run(&["overfit-demo", "--config", &cfg]);
    assert_eq!(code(&out), 2);
    let err = stderr_of(&out);
    assert!(err.contains("sideways"), "stderr must echo the value: {err}");
}

#[test]
fn missing_config_file_is_a_config_error() {
    let out = run(&["psd-toy", "--config", "/nonexistent/config.txt"]);
    assert_eq!(code(&out), 2);
    assert!(stderr_of(&out).contains("/nonexistent/config.txt"));
}
