//! End-to-end tests of the binary: subcommands, exit codes, file outputs,
//! and byte-level determinism.

use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_consensus-lab"))
}

fn run_ok(args: &[&str]) -> Output {
    let out = bin().args(args).output().expect("binary runs");
    assert!(
        out.status.success(),
        "command {:?} failed:\n{}",
        args,
        String::from_utf8_lossy(&out.stderr)
    );
    out
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

#[test]
fn list_names_every_builtin() {
    let out = run_ok(&["list"]);
    let text = stdout(&out);
    for name in [
        "cs-ct2-static",
        "cs-dt2",
        "cs-ct2-dynamic-fail",
        "cs-ct2-dynamic-pass",
        "opinion-ct-fail",
        "opinion-ct-pass",
        "opinion-dt-fail",
        "opinion-dt-pass",
        "opinion-dt-linear",
        "rendezvous-ct",
        "rendezvous-dt",
    ] {
        assert!(text.contains(name), "missing {name}");
    }
}

#[test]
fn run_writes_deterministic_outputs() {
    let dir = tempfile::tempdir().unwrap();
    let out_a = dir.path().join("a");
    let out_b = dir.path().join("b");
    for out in [&out_a, &out_b] {
        run_ok(&["run", "opinion-dt-pass", "--output", out.to_str().unwrap()]);
    }
    let csv_a = std::fs::read(out_a.join("trajectory.csv")).unwrap();
    let csv_b = std::fs::read(out_b.join("trajectory.csv")).unwrap();
    assert_eq!(csv_a, csv_b, "trajectories differ between identical runs");
    let sum_a = std::fs::read(out_a.join("summary.txt")).unwrap();
    let sum_b = std::fs::read(out_b.join("summary.txt")).unwrap();
    assert_eq!(sum_a, sum_b, "summaries differ between identical runs");

    let summary = String::from_utf8(sum_a).unwrap();
    assert!(
        summary.contains("verdict: consensus (average)"),
        "{summary}"
    );
    // time + 15 scalar opinions + two monitor columns.
    let csv = String::from_utf8(csv_a).unwrap();
    let header = csv.lines().next().unwrap();
    assert_eq!(header.split(',').count(), 1 + 15 + 2);
    assert!(header.starts_with("time,x0_0,"));
    assert!(header.ends_with("W_staircase,max_pairwise_dist"));
}

#[test]
fn run_exit_is_zero_for_non_consensus_verdicts() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_ok(&[
        "run",
        "opinion-ct-fail",
        "--output",
        dir.path().to_str().unwrap(),
    ]);
    assert!(stdout(&out).contains("verdict: clustered"));
}

#[test]
fn unknown_scenario_exits_nonzero() {
    let out = bin()
        .args(["run", "no-such-scenario"])
        .output()
        .expect("binary runs");
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("no-such-scenario"));
}

#[test]
fn malformed_config_file_exits_nonzero() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("broken.toml");
    std::fs::write(&path, "name = \"broken\"\nthis is not toml").unwrap();
    let out = bin()
        .args(["run", path.to_str().unwrap()])
        .output()
        .expect("binary runs");
    assert!(!out.status.success());
}

#[test]
fn single_agent_scenario_reaches_immediate_consensus() {
    let dir = tempfile::tempdir().unwrap();
    let config = r#"
name = "solo"
sample_every = 1
staircase_r = 0.0
monitors = ["max_pairwise_dist"]
conditions = []

[horizon]
steps = 5

[graph]
kind = "complete"

[weight]
family = "constant"
c = 1.0

[protocol]
law = "dt1-fixed"
h = 0.25

[initial]
kind = "explicit"
n = 1
m = 2
x = [4.0, -1.0]
"#;
    let path = dir.path().join("solo.toml");
    std::fs::write(&path, config).unwrap();
    let out = run_ok(&[
        "run",
        path.to_str().unwrap(),
        "--output",
        dir.path().join("out").to_str().unwrap(),
    ]);
    assert!(stdout(&out).contains("verdict: consensus"));
}

#[test]
fn check_reports_grid_width_flip() {
    let out = run_ok(&[
        "check",
        "opinion-dt-linear",
        "--criteria",
        "THM11",
        "--staircase-r",
        "0",
        "--staircase-r",
        "1.8",
    ]);
    let text = stdout(&out);
    let mut lines = text.lines();
    let at_zero = lines.next().unwrap();
    let at_coarse = lines.next().unwrap();
    assert!(at_zero.contains("holds=false") && at_zero.contains("staircase_r=0"));
    assert!(at_coarse.contains("holds=true") && at_coarse.contains("staircase_r=1.8"));
}

#[test]
fn check_lists_incompatible_criteria_without_failing() {
    // A first-order scenario has no velocities, so the second-order bound
    // is reported as an error line, not a process failure.
    let out = run_ok(&["check", "opinion-dt-pass", "--criteria", "COR1,THM11"]);
    let text = stdout(&out);
    assert!(text
        .lines()
        .any(|l| l.contains("COR1") && l.contains("error=")));
    assert!(text
        .lines()
        .any(|l| l.contains("THM11") && l.contains("holds=true")));
}

#[test]
fn check_initial_state_bound_on_strong_coupling_twin() {
    let out = run_ok(&["check", "cs-ct2-dynamic-pass", "--criteria", "COR1"]);
    assert!(stdout(&out).contains("criterion=COR1"));
    assert!(stdout(&out).contains("holds=true"));
}

#[test]
fn check_divergent_weight_integral_is_vacuously_true() {
    // beta = 1 makes the weight integral diverge, so the bound holds for
    // every initial state and the report says so.
    let out = run_ok(&["check", "cs-dt2", "--criteria", "COR1"]);
    let text = stdout(&out);
    assert!(text.contains("holds=true"));
    assert!(text.contains("vacuously"), "{text}");
}

#[test]
fn check_gain_criterion_on_builtin() {
    let out = run_ok(&["check", "rendezvous-dt", "--criteria", "GAIN"]);
    let text = stdout(&out);
    assert!(text.contains("criterion=GAIN"));
    assert!(text.contains("holds=true"));
    assert!(
        text.contains("1.500000000000e-1"),
        "bound 0.15 printed: {text}"
    );
}

#[test]
fn sweep_spacing_flips_condition_and_verdict() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_ok(&[
        "sweep",
        "opinion-dt-pass",
        "--parameter",
        "d",
        "--values",
        "0.35,0.08",
        "--output",
        dir.path().to_str().unwrap(),
    ]);
    let text = stdout(&out);
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(text, csv, "stdout mirrors sweep.csv");
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "value,GAIN,THM11,verdict");
    // Rows come back ordered by value: 0.08 first.
    let tight: Vec<&str> = lines[1].splitn(4, ',').collect();
    assert_eq!(tight[0].parse::<f64>().unwrap(), 0.08);
    assert_eq!(&tight[1..], &["holds", "holds", "consensus (average)"]);
    let wide: Vec<&str> = lines[2].splitn(4, ',').collect();
    assert_eq!(wide[0].parse::<f64>().unwrap(), 0.35);
    assert_eq!(&wide[1..3], &["holds", "fails"]);
    assert!(!wide[3].contains("consensus"));
}

#[test]
fn sweep_coupling_strength_flips_initial_state_bound() {
    let dir = tempfile::tempdir().unwrap();
    let out = run_ok(&[
        "sweep",
        "cs-ct2-dynamic-pass",
        "--parameter",
        "H",
        "--values",
        "1,150",
        "--output",
        dir.path().to_str().unwrap(),
    ]);
    drop(out);
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "value,COR1,verdict");
    assert!(
        lines[1].contains(",fails,"),
        "weak coupling row: {}",
        lines[1]
    );
    assert!(!lines[1].contains("consensus"));
    assert!(
        lines[2].contains(",holds,"),
        "strong coupling row: {}",
        lines[2]
    );
    assert!(lines[2].contains("consensus"));
}

#[test]
fn sweep_rejects_inapplicable_parameter() {
    let out = bin()
        .args([
            "sweep",
            "opinion-ct-pass",
            "--parameter",
            "h",
            "--values",
            "0.1",
        ])
        .output()
        .expect("binary runs");
    assert!(!out.status.success());
    assert!(String::from_utf8_lossy(&out.stderr).contains("does not apply"));
}

#[test]
fn sweep_with_empty_values_writes_header_only() {
    let dir = tempfile::tempdir().unwrap();
    run_ok(&[
        "sweep",
        "opinion-dt-pass",
        "--parameter",
        "staircase-r",
        "--output",
        dir.path().to_str().unwrap(),
    ]);
    let csv = std::fs::read_to_string(dir.path().join("sweep.csv")).unwrap();
    assert_eq!(csv, "value,GAIN,THM11,verdict\n");
}

#[test]
fn output_env_var_is_honored() {
    let dir = tempfile::tempdir().unwrap();
    let out_dir = dir.path().join("from-env");
    let out = bin()
        .args(["run", "opinion-dt-pass"])
        .env("CONSENSUS_LAB_OUTPUT", &out_dir)
        .output()
        .expect("binary runs");
    assert!(out.status.success());
    assert!(Path::new(&out_dir.join("trajectory.csv")).exists());
}
