use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn evoter(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_evoter")).args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

#[test]
fn run_prints_a_json_summary() {
    let o = evoter(&["run", "--n", "30", "--beta", "0.5", "--seed", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    assert_eq!(v["n"], 30);
    assert_eq!(v["seed"], 3);
    assert_eq!(v["variant"], "rewire-random/direct");
    // Same seed, same output.
    assert_eq!(stdout(&evoter(&["run", "--n", "30", "--beta", "0.5", "--seed", "3"])), stdout(&o));
}

#[test]
fn invalid_config_exits_2_and_names_the_key() {
    let o = evoter(&["run", "--beta", "-1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("model.beta"), "{}", stderr(&o));

    let o = evoter(&["run", "--set", "model.bogus=1"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("bogus"), "{}", stderr(&o));

    let o = evoter(&["run", "--variant", "sideways"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn censored_run_exits_3_when_absorption_required() {
    let o = evoter(&["run", "--n", "50", "--beta", "1", "--set", "run.max_steps=10", "--require-absorption"]);
    assert_eq!(o.status.code(), Some(3), "{}", stderr(&o));
    let o = evoter(&["run", "--n", "50", "--beta", "1", "--set", "run.max_steps=10"]);
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn help_lists_every_config_key() {
    let help = stdout(&evoter(&["--help"]));
    for key in ["model.n", "model.beta", "run.snapshot", "stop.eps14", "sweep.n_list", "duality.tv_mode", "output.dir"] {
        assert!(help.contains(key), "{key} missing from --help");
    }
    assert!(help.contains("Exit codes"));
}

#[test]
fn config_round_trips_through_a_file() {
    let dir = tempfile::tempdir().unwrap();
    let o = evoter(&["config", "--n", "77", "--beta", "0.25", "--set", "stop.c1=50"]);
    assert_eq!(o.status.code(), Some(0));
    let path = dir.path().join("cfg.toml");
    fs::write(&path, stdout(&o)).unwrap();
    let again = evoter(&["config", "-c", path.to_str().unwrap()]);
    assert_eq!(stdout(&again), stdout(&o));
    assert!(stdout(&o).contains("n = 77"));
}

fn absorbed_snapshot(dir: &Path) -> String {
    let out = dir.join("run");
    let o = evoter(&["run", "--n", "20", "--beta", "0.5", "--seed", "1", "-o", out.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let run: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("run.json")).unwrap()).unwrap();
    assert_eq!(run["censored"], false);
    out.join("final.snap").to_str().unwrap().to_string()
}

#[test]
fn observe_on_an_absorbed_snapshot_emits_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let snap = absorbed_snapshot(dir.path());
    let o = evoter(&["observe", "--n", "20", "--beta", "0.5", "--set", &format!("run.snapshot=\"{snap}\"")]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = stdout(&o);
    let lines: Vec<&str> = csv.lines().collect();
    assert_eq!(lines[0], "t,lambda,h_upper,dmax,dmin,M,L_sampled");
    assert_eq!(lines.len(), 2, "{csv}");
}

#[test]
fn observe_with_stride_beyond_horizon_emits_one_row() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("obs");
    let o = evoter(&[
        "observe",
        "--n",
        "40",
        "--beta",
        "2",
        "--set",
        "monitor.stride=1000",
        "--set",
        "monitor.max_steps=500",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let csv = fs::read_to_string(out.join("observe.csv")).unwrap();
    assert_eq!(csv.lines().count(), 2);
    let report: serde_json::Value = serde_json::from_str(&fs::read_to_string(out.join("monitor.json")).unwrap()).unwrap();
    assert_eq!(report["monitor"]["observations"], 1);
}

#[test]
fn sweep_prints_a_summary_and_writes_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("sweep");
    let o = evoter(&[
        "sweep",
        "--set",
        "sweep.n_list=[10, 16]",
        "--set",
        "sweep.seeds=3",
        "-o",
        out.to_str().unwrap(),
    ]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    assert_eq!(stdout(&o).lines().count(), 3);
    assert_eq!(fs::read_to_string(out.join("runs.jsonl")).unwrap().lines().count(), 6);
    assert!(out.join("summary.csv").exists());
}

#[test]
fn duality_reports_tv_and_collisions() {
    let o = evoter(&["duality", "--n", "40", "--beta", "8", "--set", "duality.disagreement=false"]);
    assert_eq!(o.status.code(), Some(0), "{}", stderr(&o));
    let v: serde_json::Value = serde_json::from_str(&stdout(&o)).unwrap();
    let tv = v["tv"].as_array().unwrap();
    assert_eq!(tv.len(), 4);
    assert!(tv[3]["tv"].as_f64().unwrap() < tv[0]["tv"].as_f64().unwrap());
    assert!(v["disagreement"].is_null());
}

#[test]
fn selftest_passes_and_detects_an_injected_fault() {
    let o = evoter(&["selftest", "--ks-runs", "200"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    assert_eq!(stdout(&o).lines().filter(|l| l.starts_with("PASS")).count(), 5);

    let o = evoter(&["selftest", "--ks-runs", "50", "--inject-fault"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("FAIL audit"));
    assert!(stderr(&o).contains("audit"));
}
