use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use serde_json::Value;

fn mcount(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_mcount"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn ok(args: &[&str]) -> String {
    let out = mcount(args);
    assert!(
        out.status.success(),
        "{args:?} failed: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn code(args: &[&str]) -> i32 {
    mcount(args).status.code().expect("exited normally")
}

fn json(path: &Path) -> Value {
    serde_json::from_str(&fs::read_to_string(path).unwrap()).unwrap()
}

fn column(table: &str, name: &str) -> Vec<String> {
    let mut lines = table.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    let i = header.iter().position(|h| *h == name).unwrap();
    lines
        .map(|l| l.split(',').nth(i).unwrap().to_string())
        .collect()
}

#[test]
fn count_reports_values_and_residues() {
    let csv = ok(&[
        "count",
        "--builtin",
        "equivalence",
        "--n",
        "1..5",
        "--mod",
        "2",
        "--format",
        "csv",
    ]);
    assert_eq!(column(&csv, "count"), ["1", "2", "5", "15", "52"]);
    assert_eq!(column(&csv, "residue"), ["1", "0", "1", "1", "0"]);
    let text = ok(&["count", "--builtin", "equivalence", "--n", "3"]);
    assert!(text.lines().next().unwrap().contains("count"));
}

#[test]
fn count_writes_output_and_timing_files() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("bell.json");
    ok(&[
        "count",
        "--builtin",
        "equivalence",
        "--n",
        "0..3",
        "--format",
        "json",
        "--out",
        out.to_str().unwrap(),
    ]);
    let rows = json(&out);
    assert_eq!(rows.as_array().unwrap().len(), 4);
    assert_eq!(rows[3]["count"], "5");
    assert!(dir.path().join("bell.json.timing.json").exists());
}

#[test]
fn worker_count_does_not_change_output() {
    let args = |w: &'static str| {
        [
            "count",
            "--builtin",
            "evenDegreeGraph",
            "--n",
            "1..5",
            "--mod",
            "2",
            "--workers",
            w,
        ]
    };
    assert_eq!(ok(&args("1")), ok(&args("8")));
}

#[test]
fn user_errors_exit_with_one() {
    assert_eq!(
        code(&["count", "--spec", "/nonexistent/class.sexp", "--n", "1"]),
        1
    );
    assert_eq!(code(&["count", "--builtin", "noSuchClass", "--n", "1"]), 1);
    assert_eq!(
        code(&["oracle", "--name", "iteratedMatchings:4", "--n", "1..3"]),
        1
    );
}

#[test]
fn budget_errors_exit_with_two() {
    assert_eq!(
        code(&[
            "count",
            "--builtin",
            "equivalence",
            "--n",
            "6",
            "--budget",
            "30"
        ]),
        2
    );
}

#[test]
fn eliminate_verifies_and_writes_a_manifest() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("many");
    ok(&[
        "eliminate",
        "--builtin",
        "restrictedBell:1",
        "--verify",
        "0..3",
        "--out",
        out.to_str().unwrap(),
    ]);
    let manifest = json(&out.join("manifest.json"));
    assert_eq!(manifest["verification"]["verified"], true);
    assert_eq!(manifest["mode"], "many-one");
    let text = fs::read_to_string(out.join("output.sexp")).unwrap();
    let spec = mcount_core::text::parse_class_spec(&text).unwrap();
    assert_eq!(spec.vocab().num_constants, 0);

    let sum = dir.path().join("sum");
    ok(&[
        "eliminate",
        "--builtin",
        "restrictedBell:1",
        "--mode",
        "sum",
        "--out",
        sum.to_str().unwrap(),
    ]);
    assert!(sum.join("output-0.sexp").exists() && sum.join("output-1.sexp").exists());
    assert!(!sum.join("output-2.sexp").exists());
}

#[test]
fn eliminate_needs_a_constant() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("e");
    let out = out.to_str().unwrap();
    assert_eq!(
        code(&["eliminate", "--builtin", "equivalence", "--out", out]),
        1
    );
    ok(&[
        "eliminate",
        "--builtin",
        "equivalence",
        "--allow-noop",
        "--out",
        out,
    ]);
}

#[test]
fn witness_writes_the_pipeline() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("w");
    ok(&["witness", "--out", out.to_str().unwrap()]);
    for s in [8, 6, 4, 3, 2, 1] {
        let text = fs::read_to_string(out.join(format!("stage-{s}.sexp"))).unwrap();
        mcount_core::text::parse_class_spec(&text).unwrap();
    }
    let csv = fs::read_to_string(out.join("counts.csv")).unwrap();
    assert!(csv.starts_with("universeSize,count,countMod2\n"));
    let parity = column(&csv, "countMod2");
    let odd: Vec<usize> = (1..=16).filter(|&n| parity[n - 1] == "1").collect();
    assert_eq!(odd, [1, 2, 4, 8, 16]);

    let p3 = dir.path().join("w3");
    ok(&[
        "witness",
        "--p",
        "3",
        "--max-n",
        "9",
        "--out",
        p3.to_str().unwrap(),
    ]);
    let counts = column(&fs::read_to_string(p3.join("counts.csv")).unwrap(), "count");
    let nonzero: Vec<usize> = (1..=9).filter(|&n| counts[n - 1] != "0").collect();
    assert_eq!(nonzero, [1, 3, 9]);

    assert_eq!(
        code(&[
            "witness",
            "--p",
            "4",
            "--out",
            dir.path().join("w4").to_str().unwrap()
        ]),
        1
    );
}

#[test]
fn analyze_reports_periods_and_recurrences() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("fib.json");
    ok(&[
        "analyze",
        "--oracle",
        "fibonacci",
        "--n",
        "0..20",
        "--mod",
        "2",
        "--out",
        out.to_str().unwrap(),
    ]);
    let v = json(&out);
    assert_eq!(v["kind"], "periodic");
    assert_eq!(v["period"], 3);
    assert_eq!(v["recurrence"]["coefficients"], serde_json::json!([1, 1]));

    let parity: Value = serde_json::from_str(&ok(&[
        "analyze",
        "--oracle",
        "iteratedMatchings:2",
        "--n",
        "1..16",
        "--mod",
        "2",
    ]))
    .unwrap();
    assert_eq!(parity["kind"], "inconclusive");
    assert_eq!(parity["recurrence"], Value::Null);
}

#[test]
fn analyze_reads_csv_input() {
    let dir = tempfile::tempdir().unwrap();
    let csv = dir.path().join("seq.csv");
    let rows: String = (0..12).map(|n| format!("{n},{}\n", n % 3)).collect();
    fs::write(&csv, format!("n,residue\n{rows}")).unwrap();
    let v: Value = serde_json::from_str(&ok(&[
        "analyze",
        "--csv",
        csv.to_str().unwrap(),
        "--mod",
        "3",
    ]))
    .unwrap();
    assert_eq!(v["period"], 3);

    fs::write(&csv, "n,residue\n0,1\n1,0\n").unwrap();
    assert_eq!(
        code(&["analyze", "--csv", csv.to_str().unwrap(), "--mod", "2"]),
        1
    );
}

#[test]
fn list_names_every_registry() {
    let text = ok(&["list"]);
    for name in [
        "exhaustive",
        "pruned",
        "sum",
        "many-one",
        "higher-arity",
        "equivalence",
        "fibonacci",
        "bell",
    ] {
        assert!(text.contains(name), "{name} missing from list");
    }
}
