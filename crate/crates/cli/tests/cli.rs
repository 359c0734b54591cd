use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn lcnorm(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lcnorm"))
        .args(args)
        .env("RUST_LOG", "error")
        .output()
        .expect("run lcnorm")
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap_or_else(|e| panic!("bad JSON ({e}): {}", stdout(o)))
}

fn code(o: &Output) -> i32 {
    o.status.code().expect("exit code")
}

/// Parses CSV output into header-keyed rows.
fn csv_rows(text: &str) -> Vec<std::collections::HashMap<String, String>> {
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().expect("header").split(',').collect();
    lines
        .map(|l| {
            header
                .iter()
                .map(|h| h.to_string())
                .zip(l.split(',').map(String::from))
                .collect()
        })
        .collect()
}

fn num(v: &str) -> f64 {
    v.parse().unwrap_or_else(|_| panic!("not a number: {v}"))
}

#[test]
fn constants_rows() {
    let o = lcnorm(&["constants", "--alpha", "1,2", "--n", "2"]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    assert!(text.contains("4.13273135412"), "{text}");
    assert!(text.contains("1.41421356237"), "{text}");
    assert!(text.contains("5.43656365692"), "{text}");
    assert!(text.contains("17.0794684453"), "{text}");
    assert!(text.contains("2.61242583706"), "{text}");

    let o = lcnorm(&["constants", "--alpha", "2", "--n", "2", "--out", "json"]);
    let v = json(&o);
    assert!((v["alpha"][0]["c_alpha"].as_f64().unwrap() - 4.1327313541).abs() < 1e-10);
    assert!((v["alpha"][0]["d_alpha"].as_f64().unwrap() - std::f64::consts::SQRT_2).abs() < 1e-10);
    assert!((v["dimension"][0]["c_n"].as_f64().unwrap() - 17.0794684453).abs() < 1e-9);
    assert!((v["dimension"][0]["d_n"].as_f64().unwrap() - 2.6124258371).abs() < 1e-9);
}

#[test]
fn constants_reject_dimension_one() {
    assert_eq!(code(&lcnorm(&["constants", "--n", "1"])), 1);
}

#[test]
fn eval_gaussian_l2() {
    let o = lcnorm(&["eval", "gaussian(0,1)", "--lp", "2"]);
    assert_eq!(code(&o), 0);
    let v = json(&o);
    let value = v["values"][0]["value"].as_f64().unwrap();
    assert!((value - 0.5311259661).abs() < 1e-10);
    assert_eq!(v["manifest"]["command"], "eval");
    assert_eq!(v["manifest"]["schema_version"], 1);

    // the key=value shorthand and inline JSON name the same density
    for spec in [
        "gaussian:mean=0,sd=1",
        r#"{"family":"gaussian","params":{"mean":0,"sd":1}}"#,
    ] {
        let w = json(&lcnorm(&["eval", spec, "--lp", "2"]));
        assert_eq!(w["params_digest"], v["params_digest"]);
    }
}

#[test]
fn eval_uniform_entropy_is_zero() {
    let v = json(&lcnorm(&["eval", "uniform(0,1)", "--entropy"]));
    assert_eq!(v["values"][0]["value"].as_f64().unwrap(), 0.0);
}

#[test]
fn eval_pll_laplace_supnorm() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("laplace.json");
    std::fs::write(
        &path,
        r#"{"pll": {"knots": [0], "log_values": [0], "left_slope": 1, "right_slope": -1}}"#,
    )
    .unwrap();
    let v = json(&lcnorm(&["eval", path.to_str().unwrap(), "--supnorm"]));
    assert!((v["values"][0]["value"].as_f64().unwrap() - 0.5).abs() < 1e-12);
    assert!((v["log_normalization"].as_f64().unwrap() - 2f64.ln()).abs() < 1e-12);
}

#[test]
fn eval_methods_agree() {
    let mut values = Vec::new();
    for method in ["auto", "adaptive", "riemann"] {
        let v = json(&lcnorm(&[
            "eval",
            "logistic(0.5,2)",
            "--lp",
            "1.5",
            "--sigma",
            "3",
            "--entropy",
            "--method",
            method,
        ]));
        let row: Vec<f64> = v["values"]
            .as_array()
            .unwrap()
            .iter()
            .map(|x| x["value"].as_f64().unwrap())
            .collect();
        values.push(row);
    }
    for other in &values[1..] {
        for (a, b) in values[0].iter().zip(other) {
            assert!((a - b).abs() <= 1e-6 * a.abs().max(1.0), "{a} vs {b}");
        }
    }
}

#[test]
fn eval_needs_something_to_compute() {
    assert_eq!(code(&lcnorm(&["eval", "gaussian(0,1)"])), 1);
}

#[test]
fn bad_input_exits_one() {
    assert_eq!(code(&lcnorm(&["frobnicate"])), 1);
    assert_eq!(code(&lcnorm(&["eval", "no-such-file.json", "--lp", "2"])), 1);
    assert_eq!(code(&lcnorm(&["eval", "gaussian(0,-1)", "--lp", "2"])), 1);
    assert_eq!(code(&lcnorm(&["eval", r#"{"pll": {"knots": [0]}"#, "--lp", "2"])), 1);
    assert_eq!(code(&lcnorm(&["check", "--catalog", "--claims", "lemma99"])), 1);
    assert_eq!(code(&lcnorm(&["--help"])), 0);
}

#[test]
fn check_random_sweep_holds() {
    let o = lcnorm(&["check", "--random", "1000", "--seed", "42", "--claims", "all-1d"]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&stdout(&o));
    assert!(rows.len() > 100_000);
    assert!(rows.iter().all(|r| r["holds"] == "true"));
}

#[test]
fn check_csv_column_order() {
    let o = lcnorm(&["check", "gaussian(0,1)", "--claims", "lemma3", "--p", "2"]);
    let header = stdout(&o).lines().next().unwrap().to_string();
    assert_eq!(
        header,
        "claim_id,family,params_digest,p,q,alpha,lhs,rhs,margin,tightness,holds"
    );
}

#[test]
fn check_exponential_tightened_lemma5_is_equality() {
    let o = lcnorm(&[
        "check",
        "exponential(1)",
        "--claims",
        "lemma5",
        "--alpha",
        "2",
        "--tightened",
    ]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 1);
    assert!(num(&rows[0]["margin"]).abs() <= 1e-9);
}

#[test]
fn check_gaussian_nd_theorem2() {
    let o = lcnorm(&[
        "check",
        "--claims",
        "theorem2",
        "--family",
        "gaussian-nd",
        "--n",
        "2",
        "3",
    ]);
    assert_eq!(code(&o), 0, "{}", String::from_utf8_lossy(&o.stderr));
    let rows = csv_rows(&stdout(&o));
    assert!(!rows.is_empty());
    assert!(rows
        .iter()
        .all(|r| r["claim_id"] == "theorem2" && r["family"] == "gaussian-nd"));
    assert!(rows.iter().any(|r| r["n"] == "2") && rows.iter().any(|r| r["n"] == "3"));
}

#[test]
fn check_violation_exits_two() {
    // a tolerance below zero turns exact equalities into failures
    let o = lcnorm(&["check", "gaussian(0,1)", "--claims", "corollary2-upper", "--tol=-1e-3"]);
    assert_eq!(code(&o), 2);
}

#[test]
fn check_manifest_replay_reproduces_table() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("run.json");
    let m = manifest.to_str().unwrap();
    let first = lcnorm(&[
        "check",
        "--random",
        "40",
        "--seed",
        "7",
        "--catalog",
        "laplace(1,2)",
        "--claims",
        "all-1d",
        "--manifest",
        m,
    ]);
    assert_eq!(code(&first), 0);
    let again = lcnorm(&["check", "--replay", m]);
    assert_eq!(code(&again), 0);
    assert_eq!(stdout(&first), stdout(&again));

    let nd = dir.path().join("nd.json");
    let first = lcnorm(&[
        "check",
        "--family",
        "product",
        "--n",
        "2",
        "--seed",
        "3",
        "--manifest",
        nd.to_str().unwrap(),
    ]);
    let again = lcnorm(&["check", "--replay", nd.to_str().unwrap()]);
    assert_eq!(code(&first), 0);
    assert_eq!(stdout(&first), stdout(&again));
}

#[test]
fn replay_rejects_foreign_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let manifest = dir.path().join("scan.json");
    let m = manifest.to_str().unwrap();
    assert_eq!(code(&lcnorm(&["scan", "lemma3", "gaussian(0,1)", "--manifest", m])), 0);
    assert_eq!(code(&lcnorm(&["check", "--replay", m])), 1);
}

#[test]
fn check_json_embeds_manifest() {
    let v = json(&lcnorm(&[
        "check",
        "uniform(0,2)",
        "--claims",
        "lemma4",
        "--out",
        "json",
        "--seed",
        "9",
    ]));
    assert_eq!(v["manifest"]["seed"], 9);
    assert_eq!(v["manifest"]["inputs"]["claims"][0], "lemma4");
    assert_eq!(v["verdicts"], 1);
    assert_eq!(v["violations"], 0);
}

#[test]
fn search_lemma4_pll3_nearly_tight() {
    let v = json(&lcnorm(&["search", "lemma4", "--family", "pll3", "--out", "json"]));
    assert!(v["outcome"]["best_ratio"].as_f64().unwrap() >= 0.999);
}

#[test]
fn search_corollary2_upper_gaussian_is_tight() {
    let v = json(&lcnorm(&[
        "search",
        "corollary2-upper",
        "--family",
        "gaussian",
        "--out",
        "json",
    ]));
    assert!((v["outcome"]["best_ratio"].as_f64().unwrap() - 1.0).abs() <= 1e-8);
}

#[test]
fn search_theorem1_catalog_reports_champion() {
    let dir = tempfile::tempdir().unwrap();
    let witness = dir.path().join("best.json");
    let o = lcnorm(&[
        "search",
        "theorem1",
        "--p",
        "2",
        "--q",
        "inf",
        "--alpha",
        "2",
        "--family",
        "catalog",
        "--witness",
        witness.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 0);
    let text = stdout(&o);
    let ratio: f64 = text
        .lines()
        .find_map(|l| l.strip_prefix("best ratio"))
        .map(|s| num(s.trim()))
        .expect("ratio line");
    assert!(ratio <= 1.0 && ratio > 0.0);
    let family = text
        .lines()
        .find_map(|l| l.strip_prefix("family"))
        .unwrap()
        .trim()
        .to_string();
    assert!(["exponential", "gaussian", "laplace", "logistic", "uniform", "gamma"].contains(&family.as_str()));
    let spec: Value = serde_json::from_str(&std::fs::read_to_string(&witness).unwrap()).unwrap();
    assert_eq!(spec["family"].as_str(), Some(family.as_str()));
}

#[test]
fn search_is_deterministic_and_replays() {
    let dir = tempfile::tempdir().unwrap();
    let m = dir.path().join("search.json");
    let args = [
        "search", "lemma5", "--family", "gamma", "--seed", "11", "--budget", "400", "--out", "csv",
    ];
    let first = lcnorm(&[&args[..], &["--manifest", m.to_str().unwrap()]].concat());
    let again = lcnorm(&["search", "--replay", m.to_str().unwrap(), "--out", "csv"]);
    assert_eq!(code(&first), 0);
    assert_eq!(stdout(&first), stdout(&again));
}

#[test]
fn search_counterexample_exits_four_with_witness() {
    // a negative tolerance makes any tight point count as a counterexample
    let dir = tempfile::tempdir().unwrap();
    let witness = dir.path().join("w.json");
    let o = lcnorm(&[
        "search",
        "corollary2-upper",
        "--family",
        "gaussian",
        "--tol=-0.5",
        "--witness",
        witness.to_str().unwrap(),
    ]);
    assert_eq!(code(&o), 4);
    assert!(Path::new(&witness).is_file());
    let w: Value = serde_json::from_str(&std::fs::read_to_string(&witness).unwrap()).unwrap();
    assert!(w.is_object());
}

#[test]
fn scan_theorem1_gaussian_grid() {
    let o = lcnorm(&[
        "scan",
        "theorem1",
        "gaussian(0,1)",
        "--p",
        "1,2,inf",
        "--q",
        "1,2,inf",
        "--alpha",
        "2",
    ]);
    assert_eq!(code(&o), 0);
    let rows = csv_rows(&stdout(&o));
    assert_eq!(rows.len(), 9);
    assert!(rows.iter().all(|r| num(&r["tightness"]) <= 1.0 + 1e-9));
    let p1q1 = rows.iter().find(|r| r["p"] == "1" && r["q"] == "1").unwrap();
    assert!((num(&p1q1["tightness"]) - 1.0).abs() < 1e-12);
}
