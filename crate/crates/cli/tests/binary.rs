use std::process::{Command, Output};

use serde_json::Value;

fn triramsey(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_triramsey"))
        .arg("--no-cache")
        .args(args)
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(args: &[&str]) -> Value {
    let mut all = vec!["--json"];
    all.extend_from_slice(args);
    let o = triramsey(&all);
    assert_eq!(
        o.status.code(),
        Some(0),
        "stderr: {}",
        String::from_utf8_lossy(&o.stderr)
    );
    serde_json::from_slice(&o.stdout).expect("valid JSON on stdout")
}

#[test]
fn bracket_values() {
    for (n, k, want) in [("4", "3", "41"), ("3", "2", "10"), ("0", "0", "1")] {
        let o = triramsey(&["bracket", n, k]);
        assert_eq!(o.status.code(), Some(0));
        assert_eq!(stdout(&o).trim(), want);
    }
    assert_eq!(json(&["bracket", "4", "3"])["value"], "41");
    assert_eq!(triramsey(&["bracket", "2", "5"]).status.code(), Some(2));
}

#[test]
fn bracket_log2_matches_exact() {
    let v = json(&["bracket", "40", "3", "--log2"]);
    let exact: f64 = json(&["bracket", "40", "3"])["value"]
        .as_str()
        .unwrap()
        .parse()
        .unwrap();
    assert!((v["log2"].as_f64().unwrap() - exact.log2()).abs() < 1e-9);
}

#[test]
fn enumerate_lists_sub_triangles_in_order() {
    let v = json(&["enumerate", "3", "2"]);
    let sets: Vec<Vec<u64>> = serde_json::from_value(v).unwrap();
    assert_eq!(sets.len(), 10);
    assert_eq!(sets[0], [1, 2, 3]);
    let mut sorted = sets.clone();
    sorted.sort();
    assert_eq!(sets, sorted);
}

#[test]
fn r1_small_values() {
    let o = triramsey(&["r1", "--p", "3", "--q", "3", "--k", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert_eq!(stdout(&o).trim(), "5");
    let v = json(&["r1", "--p", "2", "--q", "3", "--k", "1"]);
    assert_eq!(
        (v["status"].as_str(), v["value"].as_u64()),
        (Some("exact"), Some(4))
    );
}

#[test]
fn draw_search_reports_a_verified_witness() {
    let v = json(&[
        "draw-search",
        "--m",
        "4",
        "--p",
        "3",
        "--q",
        "3",
        "--k",
        "1",
    ]);
    assert_eq!(v["result"], "drawFound");
    let v = json(&[
        "draw-search",
        "--m",
        "5",
        "--p",
        "3",
        "--q",
        "3",
        "--k",
        "1",
        "--strategy",
        "exhaustive",
    ]);
    assert_eq!(v["result"], "noDrawExists");
    let v = json(&[
        "draw-search",
        "--m",
        "5",
        "--p",
        "3",
        "--q",
        "3",
        "--k",
        "2",
        "--strategy",
        "randomized",
        "--seed",
        "7",
        "--budget",
        "1000",
    ]);
    assert_eq!(v["result"], "drawFound");
}

#[test]
fn solve_mines3() {
    let v = json(&[
        "solve",
        "--m",
        "3",
        "--p",
        "2",
        "--q",
        "2",
        "--k",
        "1",
        "--variant",
        "directional",
    ]);
    assert_eq!(v["outcome"], "FirstPlayerWin");
    let o = triramsey(&["solve", "--m", "2", "--p", "2", "--q", "2", "--k", "1"]);
    assert_eq!(o.status.code(), Some(0));
    assert!(stdout(&o).contains("DrawValue"), "{}", stdout(&o));
}

#[test]
fn bounds_for_one_triple() {
    let v = json(&["bounds", "--p", "3", "--q", "3", "--k", "2"]);
    assert_eq!(v["lower"], 6);
    assert_eq!(v["upperExpr"], "R^{15}(3,2)");
}

#[test]
fn usage_errors_exit_with_two() {
    for args in [
        &["bogus"][..],
        &["bracket"],
        &["bracket", "x", "1"],
        &["solve", "--m", "3", "--p", "4", "--q", "2", "--k", "1"],
        &[
            "draw-search",
            "--m",
            "3",
            "--p",
            "2",
            "--q",
            "2",
            "--k",
            "0",
        ],
        &[
            "draw-search",
            "--m",
            "3",
            "--p",
            "2",
            "--q",
            "2",
            "--k",
            "1",
            "--budget",
            "0",
        ],
        &["bounds", "--p", "3"],
        &["bounds", "--table", "--p", "3"],
    ] {
        let o = triramsey(args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?}");
    }
}

#[test]
fn solver_budget_exhaustion_is_a_failure() {
    let o = triramsey(&[
        "solve", "--m", "5", "--p", "3", "--q", "3", "--k", "1", "--budget", "10",
    ]);
    assert_eq!(o.status.code(), Some(1));
}

#[test]
fn cache_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("cache.json");
    let path = path.to_str().unwrap();
    let run = |args: &[&str]| {
        Command::new(env!("CARGO_BIN_EXE_triramsey"))
            .args(["--cache", path])
            .args(args)
            .output()
            .unwrap()
    };
    assert_eq!(
        stdout(&run(&["r1", "--p", "3", "--q", "3", "--k", "1"])).trim(),
        "5"
    );
    assert_eq!(stdout(&run(&["bracket", "4", "3"])).trim(), "41");
    let file: Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    assert_eq!(file["schemaVersion"], 1);
    assert_eq!(file["r1Results"][0]["value"], 5);
    assert_eq!(file["brackets"][0]["value"], "41");
    // served from the cache the second time
    assert_eq!(
        stdout(&run(&["r1", "--p", "3", "--q", "3", "--k", "1"])).trim(),
        "5"
    );
}

#[test]
fn quick_verify_passes_except_table_conflicts() {
    let o = triramsey(&["--json", "verify", "--quick"]);
    let report: Value = serde_json::from_slice(&o.stdout).unwrap();
    let failed: Vec<&str> = report["checks"]
        .as_array()
        .unwrap()
        .iter()
        .filter(|c| c["passed"] == false)
        .map(|c| c["name"].as_str().unwrap())
        .collect();
    // two rows of the reference table disagree with the sweep; see the README
    assert_eq!(
        failed,
        ["first-moment lower bounds match the reference table"]
    );
    assert_eq!(o.status.code(), Some(1));
}
