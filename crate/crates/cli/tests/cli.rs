use std::fs;
use std::path::Path;
use std::process::{Command, Output};

fn fiberplan(args: &[&str], dir: &Path) -> Output {
    Command::new(env!("CARGO_BIN_EXE_fiberplan"))
        .args(args)
        .current_dir(dir)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn plan_hypercube_writes_identical_solutions() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("hypercube100.json"),
        r#"{"environment":"hypercube","n":100,"planner":"qrrt","seed":7}"#,
    )
    .unwrap();
    let mut files = Vec::new();
    for name in ["a.json", "b.json"] {
        let o = fiberplan(
            &["plan", "--config", "hypercube100.json", "--out", name, "--plot"],
            dir.path(),
        );
        assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
        assert!(stdout(&o).contains("solved"));
        files.push(fs::read(dir.path().join(name)).unwrap());
    }
    assert_eq!(files[0], files[1]);
    let v: serde_json::Value = serde_json::from_slice(&files[0]).unwrap();
    assert_eq!(v["status"], "solved");
    assert_eq!(v["path"][0].as_array().unwrap().len(), 100);
    assert!(dir.path().join("a.svg").exists());
}

#[test]
fn plan_narrow_wall_is_infeasible() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("wall.json"),
        r#"{"environment":"wall_gap","gap_width":0.8,"planner":"qrrt","infeasibility_window":1000}"#,
    )
    .unwrap();
    let o = fiberplan(&["plan", "--config", "wall.json"], dir.path());
    assert_eq!(o.status.code(), Some(2));
    let line = stdout(&o);
    assert!(line.contains("infeasible (confidence 0.999)"), "{line}");
    let v: serde_json::Value =
        serde_json::from_slice(&fs::read(dir.path().join("solution.json")).unwrap()).unwrap();
    assert_eq!(v["status"], "infeasible");
    assert_eq!(v["confidence"], 0.999);
}

#[test]
fn plan_timeout_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("cube.json"),
        r#"{"environment":"hypercube","n":12,"planner":"rrt"}"#,
    )
    .unwrap();
    let o = fiberplan(
        &["plan", "--config", "cube.json", "--time-limit", "0.2"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(3));
    assert!(stdout(&o).contains("timed out"));
}

#[test]
fn config_and_usage_errors_exit_one() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(dir.path().join("bad.json"), r#"{"planner":"xyz"}"#).unwrap();
    let o = fiberplan(&["plan", "--config", "bad.json"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    assert!(String::from_utf8_lossy(&o.stderr).contains("planner"));
    let o = fiberplan(&["fly"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let o = fiberplan(&["plan", "--config", "missing.json"], dir.path());
    assert_eq!(o.status.code(), Some(1));
    let o = fiberplan(&["--help"], dir.path());
    assert_eq!(o.status.code(), Some(0));
}

#[test]
fn bench_writes_rows_per_cell() {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("suite.json"),
        r#"{"experiments":[{"problem":{"environment":"hypercube","n":4},
            "planners":[{"planner":"qrrt"},{"planner":"qmp"}]}]}"#,
    )
    .unwrap();
    let o = fiberplan(
        &[
            "bench", "--config", "suite.json", "--runs", "10", "--time-limit", "60", "--out",
            "out/bench.csv", "--plot", "--parallel", "2",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("out/bench.csv")).unwrap();
    let mut lines = csv.lines();
    assert_eq!(
        lines.next().unwrap(),
        "planner,environment,params_hash,run,seed,time_s,status,cost,vertices_per_level"
    );
    let rows: Vec<&str> = lines.collect();
    assert_eq!(rows.len(), 20);
    assert_eq!(rows.iter().filter(|r| r.starts_with("qrrt,")).count(), 10);
    assert!(dir.path().join("out/bench.summary.csv").exists());
    assert!(dir.path().join("out/bench.svg").exists());
}

#[test]
fn scaling_reports_fit() {
    let dir = tempfile::tempdir().unwrap();
    let o = fiberplan(
        &[
            "scaling", "--planner", "qrrt", "--n", "3,4,5,6", "--runs", "2", "--fit", "log-time",
            "--plot",
        ],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("cubic fit"));
    let csv = fs::read_to_string(dir.path().join("scaling.csv")).unwrap();
    assert_eq!(csv.lines().count(), 5);
    assert!(dir.path().join("scaling.svg").exists());
    assert!(dir.path().join("scaling.runs.csv").exists());
}

#[test]
fn meta_ratios_have_unit_minimum() {
    let dir = tempfile::tempdir().unwrap();
    let o = fiberplan(
        &["meta", "--planner", "qrrt", "--runs", "1", "--time-limit", "5"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let csv = fs::read_to_string(dir.path().join("meta.csv")).unwrap();
    let rows: Vec<Vec<String>> = csv
        .lines()
        .skip(1)
        .map(|l| l.split(',').map(str::to_string).collect())
        .collect();
    assert_eq!(rows.len(), 10);
    for axis in ["metric", "importance", "sampling", "find_section"] {
        let ratios: Vec<f64> = rows
            .iter()
            .filter(|r| r[1] == axis)
            .map(|r| r[4].parse().unwrap())
            .collect();
        assert!(ratios.len() >= 2);
        assert!(ratios.contains(&1.0));
        assert!(ratios.iter().all(|&r| r >= 1.0));
    }
}

#[test]
fn shipped_configs_run() {
    let configs = Path::new(env!("CARGO_MANIFEST_DIR")).join("../../configs");
    let dir = tempfile::tempdir().unwrap();
    let expected = [
        ("hypercube100.json", 0),
        ("wall_infeasible.json", 2),
        ("wall_anytime.json", 0),
    ];
    for (name, code) in expected {
        let path = configs.join(name);
        let o = fiberplan(
            &["plan", "--config", path.to_str().unwrap(), "--out", "s.json"],
            dir.path(),
        );
        assert_eq!(o.status.code(), Some(code), "{name}: {}", String::from_utf8_lossy(&o.stderr));
    }
    let suite = configs.join("suite.json");
    let o = fiberplan(
        &["bench", "--config", suite.to_str().unwrap(), "--runs", "1", "--out", "b.csv"],
        dir.path(),
    );
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rows = fs::read_to_string(dir.path().join("b.csv")).unwrap().lines().count();
    assert_eq!(rows, 1 + 5);
}
