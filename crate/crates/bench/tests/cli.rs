use std::path::{Path, PathBuf};
use std::process::{Command, Output};

fn aoplan(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_aoplan")).args(args).output().unwrap()
}

fn scenario(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR"))
        .join("../../scenarios")
        .join(name)
        .to_string_lossy()
        .into_owned()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).trim().to_string()
}

fn s(p: &Path) -> &str {
    p.to_str().unwrap()
}

#[test]
fn radius_subcommand() {
    let prm = aoplan(&[
        "radius", "--rule", "prm-star", "--d", "2", "--n", "1000", "--safety", "1",
    ]);
    assert_eq!(stdout(&prm), "0.114860092198");
    let k = aoplan(&["radius", "--rule", "k-prm-star", "--d", "2", "--n", "1000"]);
    assert_eq!(stdout(&k), "29");
    let rgg = aoplan(&["radius", "--rule", "rgg", "--d", "2", "--n", "1000"]);
    assert_eq!(stdout(&rgg), "0.0468914362825");
    let bad = aoplan(&["radius", "--rule", "nope", "--d", "2", "--n", "1000"]);
    assert_eq!(bad.status.code(), Some(2));
    assert_eq!(
        aoplan(&["radius", "--rule", "prm-star", "--d", "2"]).status.code(),
        Some(2)
    );
}

#[test]
fn dispersion_subcommand() {
    let o = aoplan(&[
        "dispersion",
        "--sampler",
        "halton",
        "--d",
        "2",
        "--n",
        "64",
        "--grid",
        "0.001953125",
    ]);
    assert!(o.status.success());
    let fields: Vec<f64> = stdout(&o).split(',').map(|f| f.parse().unwrap()).collect();
    assert_eq!(fields[0], 64.0);
    assert!((fields[1] - 0.17531952629335296).abs() < 1e-12);
    let u = aoplan(&[
        "dispersion",
        "--sampler",
        "uniform",
        "--d",
        "3",
        "--n",
        "50",
        "--seed",
        "4",
        "--grid",
        "0.05",
    ]);
    assert!(u.status.success());
    assert_eq!(
        aoplan(&["dispersion", "--sampler", "sobol", "--d", "2", "--n", "5"])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn oracle_subcommand() {
    let o = aoplan(&["oracle", "--scenario", &scenario("empty_square.json")]);
    assert_eq!(stdout(&o), "1.13137085");
    let b = aoplan(&["oracle", "--scenario", &scenario("box_scene.json")]);
    assert!(stdout(&b).starts_with("0.83245"));
    assert_eq!(
        aoplan(&["oracle", "--scenario", &scenario("walled_start.json")])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        aoplan(&["oracle", "--scenario", "/no/such/file.json"]).status.code(),
        Some(3)
    );
}

#[test]
fn plan_subcommand() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("path.json");
    let o = aoplan(&[
        "plan",
        "--scenario",
        &scenario("box_scene.json"),
        "--planner",
        "rrt-star",
        "--n",
        "2000",
        "--seed",
        "3",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(doc["cost"].as_f64().unwrap() > 0.8);
    assert!(doc["waypoints"].as_array().unwrap().len() >= 2);
    assert!(doc["counters"]["collision_checks"].as_u64().unwrap() > 0);
    assert!(doc.get("segments").is_none());

    let o = aoplan(&[
        "plan",
        "--scenario",
        &scenario("empty_square.json"),
        "--planner",
        "sst",
        "--system",
        "car",
        "--shrink",
        "--n",
        "10000",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    let segments = doc["segments"].as_array().unwrap();
    let total: f64 = segments.iter().map(|g| g["duration"].as_f64().unwrap()).sum();
    assert!((total - doc["cost"].as_f64().unwrap()).abs() < 1e-9);
    assert_eq!(segments[0]["control"].as_array().unwrap().len(), 2);

    let o = aoplan(&[
        "plan",
        "--scenario",
        &scenario("corner_swap.json"),
        "--planner",
        "drrt-star",
        "--n-roadmap",
        "200",
        "--n",
        "3000",
        "--out",
        s(&out),
    ]);
    assert!(o.status.success());
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert_eq!(doc["robots"].as_array().unwrap().len(), 2);

    let no_path = aoplan(&[
        "plan",
        "--scenario",
        &scenario("walled_start.json"),
        "--planner",
        "rrt",
        "--n",
        "300",
        "--out",
        s(&out),
    ]);
    assert_eq!(no_path.status.code(), Some(1));
    let doc: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(&out).unwrap()).unwrap();
    assert!(doc["cost"].is_null());

    let usage = aoplan(&[
        "plan",
        "--scenario",
        &scenario("box_scene.json"),
        "--planner",
        "rrt",
        "--beta",
        "0.1",
        "--n",
        "10",
        "--out",
        s(&out),
    ]);
    assert_eq!(usage.status.code(), Some(2));
    let unknown = aoplan(&[
        "plan",
        "--scenario",
        &scenario("box_scene.json"),
        "--planner",
        "bit-star",
        "--n",
        "10",
        "--out",
        s(&out),
    ]);
    assert_eq!(unknown.status.code(), Some(2));
    let io = aoplan(&[
        "plan",
        "--scenario",
        &scenario("box_scene.json"),
        "--planner",
        "rrt",
        "--n",
        "10",
        "--out",
        "/no/such/dir/x.json",
    ]);
    assert_eq!(io.status.code(), Some(3));
}

#[test]
fn bad_scenario_documents() {
    let dir = tempfile::tempdir().unwrap();
    let doc = dir.path().join("bad.json");
    let out = dir.path().join("out.json");
    std::fs::write(&doc, r#"{"dimension": 2, "domain": {"min": [0, 0], "max": [1, 1]}, "start": [0.1], "goal": {"center": [0.9, 0.9], "radius": 0.1}}"#).unwrap();
    let o = aoplan(&[
        "plan",
        "--scenario",
        s(&doc),
        "--planner",
        "rrt",
        "--n",
        "10",
        "--out",
        s(&out),
    ]);
    assert_eq!(o.status.code(), Some(2));
    std::fs::write(&doc, "{ not json").unwrap();
    assert_eq!(aoplan(&["oracle", "--scenario", s(&doc)]).status.code(), Some(2));
}

#[test]
fn benchmark_then_report() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("results.csv");
    let run = |out: &Path, workers: &str| {
        aoplan(&[
            "benchmark",
            "--scenario",
            &scenario("empty_square.json"),
            "--planner",
            "rrt-star",
            "--trials",
            "4",
            "--seed",
            "5",
            "--checkpoints",
            "100,400,1600",
            "--workers",
            workers,
            "--out",
            s(out),
        ])
    };
    assert!(run(&csv, "1").status.success());
    let again = dir.path().join("again.csv");
    assert!(run(&again, "3").status.success());
    let text = std::fs::read_to_string(&csv).unwrap();
    assert_eq!(text, std::fs::read_to_string(&again).unwrap());
    assert_eq!(text.lines().count(), 1 + 4 * 3);

    let svg = dir.path().join("report.svg");
    let summary = dir.path().join("summary.csv");
    let o = aoplan(&[
        "report",
        "--in",
        s(&csv),
        "--optimal",
        "1.1313708498984760",
        "--out",
        s(&svg),
        "--summary",
        s(&summary),
    ]);
    assert!(o.status.success());
    assert!(std::fs::read_to_string(&svg).unwrap().starts_with("<svg"));
    assert_eq!(std::fs::read_to_string(&summary).unwrap().lines().count(), 4);

    let bad = aoplan(&[
        "benchmark",
        "--scenario",
        &scenario("empty_square.json"),
        "--planner",
        "rrt",
        "--checkpoints",
        "10,5",
        "--out",
        s(&csv),
    ]);
    assert_eq!(bad.status.code(), Some(2));
    let empty = dir.path().join("empty.csv");
    std::fs::write(
        &empty,
        "scenario,planner,seed,checkpoint_n,best_cost,success,time_ms,nodes,edges,collision_checks\n",
    )
    .unwrap();
    assert_eq!(
        aoplan(&["report", "--in", s(&empty), "--out", s(&svg)]).status.code(),
        Some(2)
    );
    assert_eq!(
        aoplan(&["report", "--in", "/no/such.csv", "--out", s(&svg)])
            .status
            .code(),
        Some(3)
    );
}
