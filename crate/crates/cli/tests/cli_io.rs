//! End-to-end tests of the `aoe-chain` binary: process exit codes, file
//! outputs, and the plot pipeline, all exercised through real subprocesses
//! in temporary directories.

use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;

fn aoe_chain(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aoe-chain"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("spawn aoe-chain")
}

fn stderr_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8_lossy(&out.stdout).into_owned()
}

/// A fast scenario: tiny state space, short simulations.
const QUICK_SCENARIO: &str = r#"
id = "quick"
policies = ["greedy", "wur"]

[params]
p_gen = 0.6
p_swap = 0.9
vis12 = [[0.3, 0.7], [0.3, 0.7]]
vis23 = [[0.3, 0.7], [0.3, 0.7]]
cutoff = 2
aoe_cap = 6

[sim]
horizon = 2000
warmup = 100
replications = 3

[sweep]
parameter = "p_gen"
values = [0.4, 0.8]
"#;

fn write_quick(dir: &Path) -> std::path::PathBuf {
    let path = dir.join("quick.toml");
    fs::write(&path, QUICK_SCENARIO).unwrap();
    path
}

#[test]
fn sweep_writes_csv_and_exits_zero() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_quick(tmp.path());
    let out = aoe_chain(
        &["sweep", "--config", cfg.to_str().unwrap(), "--out-dir", "results"],
        tmp.path(),
    );
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let csv = fs::read_to_string(tmp.path().join("results/quick.csv")).unwrap();
    assert!(csv.starts_with("# aoe-chain v1\n"));
    // 2 sweep values x 2 policies plus version and header lines.
    assert_eq!(csv.lines().count(), 2 + 4);
}

#[test]
fn plot_renders_svg_and_dat_from_csv() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_quick(tmp.path());
    let out = aoe_chain(&["sweep", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));

    let out = aoe_chain(&["plot", "quick.csv"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let svg = fs::read_to_string(tmp.path().join("quick.svg")).unwrap();
    assert!(svg.starts_with("<svg "));
    assert!(svg.contains("<polyline"));
    let dat = fs::read_to_string(tmp.path().join("quick.dat")).unwrap();
    assert!(dat.contains("# series: greedy"));
    assert!(dat.contains("# series: wur"));
}

#[test]
fn scenario_names_resolve_from_a_local_scenarios_directory() {
    let tmp = TempDir::new().unwrap();
    fs::create_dir(tmp.path().join("scenarios")).unwrap();
    fs::write(tmp.path().join("scenarios/quick.toml"), QUICK_SCENARIO).unwrap();
    let out = aoe_chain(&["sweep", "quick"], tmp.path());
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    assert!(tmp.path().join("quick.csv").exists());
}

#[test]
fn evaluate_prints_one_line_per_policy() {
    let tmp = TempDir::new().unwrap();
    let cfg = write_quick(tmp.path());
    let out = aoe_chain(&["evaluate", "--config", cfg.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("greedy"), "{text}");
    assert!(text.contains("wur"), "{text}");
}

#[test]
fn unknown_scenario_exits_two() {
    let tmp = TempDir::new().unwrap();
    let out = aoe_chain(&["sweep", "no-such-scenario"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("no-such-scenario"));
}

#[test]
fn malformed_config_exits_two_with_a_reason() {
    let tmp = TempDir::new().unwrap();
    let path = tmp.path().join("bad.toml");
    fs::write(&path, "id = \"bad\"\n[params]\np_gen = 1.5\n").unwrap();
    let out = aoe_chain(&["solve", "--config", path.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(2), "stderr: {}", stderr_of(&out));
    assert!(!stderr_of(&out).is_empty());
}

#[test]
fn unknown_figure_exits_two() {
    let tmp = TempDir::new().unwrap();
    let out = aoe_chain(&["reproduce", "fig9"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("fig9"));
}

#[test]
fn usage_errors_exit_two_and_help_exits_zero() {
    let tmp = TempDir::new().unwrap();
    let out = aoe_chain(&["--no-such-flag"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    let out = aoe_chain(&["--help"], tmp.path());
    assert_eq!(out.status.code(), Some(0));
    assert!(stdout_of(&out).contains("sweep"));
}

#[test]
fn plotting_a_malformed_csv_exits_two_naming_the_line() {
    let tmp = TempDir::new().unwrap();
    let path = tmp.path().join("broken.csv");
    fs::write(
        &path,
        "# aoe-chain v1\nscenario_id,sweep_param,sweep_value,policy,avg_aoe_exact,avg_aoe_mc,mc_stderr,rvi_iterations,bellman_residual,wall_time_ms\noops\n",
    )
    .unwrap();
    let out = aoe_chain(&["plot", "broken.csv"], tmp.path());
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr_of(&out).contains("line 3"), "stderr: {}", stderr_of(&out));
}

#[test]
fn solve_prints_gain_and_cross_check() {
    let tmp = TempDir::new().unwrap();
    let mut scenario = String::from(QUICK_SCENARIO);
    scenario = scenario.replace("policies = [\"greedy\", \"wur\"]", "policies = [\"rvi\"]");
    let path = tmp.path().join("quick.toml");
    fs::write(&path, scenario).unwrap();
    let out = aoe_chain(&["solve", "--config", path.to_str().unwrap()], tmp.path());
    assert_eq!(out.status.code(), Some(0), "stderr: {}", stderr_of(&out));
    let text = stdout_of(&out);
    assert!(text.contains("gain"), "{text}");
    assert!(text.contains("cross-check gain"), "{text}");
    assert!(text.contains("converged             true"), "{text}");
}

#[test]
fn seeded_runs_are_byte_identical_and_seeds_matter() {
    let tmp_a = TempDir::new().unwrap();
    let tmp_b = TempDir::new().unwrap();
    let tmp_c = TempDir::new().unwrap();
    for tmp in [&tmp_a, &tmp_b, &tmp_c] {
        write_quick(tmp.path());
    }
    let seed_a = ["sweep", "--config", "quick.toml", "--seed", "11"];
    let seed_c = ["sweep", "--config", "quick.toml", "--seed", "12"];
    assert_eq!(aoe_chain(&seed_a, tmp_a.path()).status.code(), Some(0));
    assert_eq!(aoe_chain(&seed_a, tmp_b.path()).status.code(), Some(0));
    assert_eq!(aoe_chain(&seed_c, tmp_c.path()).status.code(), Some(0));
    let a = fs::read(tmp_a.path().join("quick.csv")).unwrap();
    let b = fs::read(tmp_b.path().join("quick.csv")).unwrap();
    let c = fs::read(tmp_c.path().join("quick.csv")).unwrap();
    assert_eq!(a, b, "same seed must reproduce the same bytes");
    assert_ne!(a, c, "different seeds must move Monte Carlo columns");
}
