use std::path::{Path, PathBuf};
use std::process::Command;

use cpm_cli::execute;
use serde_json::{json, Value};
use tempfile::TempDir;

struct Workspace {
    dir: TempDir,
}

impl Workspace {
    fn new() -> Self {
        Self { dir: TempDir::new().unwrap() }
    }

    fn file(&self, name: &str, content: &Value) -> PathBuf {
        let path = self.dir.path().join(name);
        std::fs::write(&path, serde_json::to_string(content).unwrap()).unwrap();
        path
    }

    fn raw(&self, name: &str, content: &str) -> PathBuf {
        let path = self.dir.path().join(name);
        std::fs::write(&path, content).unwrap();
        path
    }
}

fn run(args: &[&str]) -> (i32, String, String) {
    let mut full = vec!["cpm"];
    full.extend_from_slice(args);
    let e = execute(full);
    (e.code, e.stdout, e.stderr)
}

fn report(args: &[&str]) -> (i32, Value) {
    let (code, out, err) = run(args);
    assert!(!out.is_empty(), "no output (code {code}): {err}");
    (code, serde_json::from_str(&out).unwrap())
}

fn p(path: &Path) -> &str {
    path.to_str().unwrap()
}

fn pair() -> Value {
    json!({"n": 2, "matrices": {"1": [[1, 0], [0, 0]], "2": [[1, 1], [0, 0]]}})
}

fn axes() -> Value {
    json!({"n": 2, "matrices": {"x": [[1, 0], [0, 0]], "y": [[0, 0], [0, 1]]}})
}

fn lines_0_45() -> Value {
    json!({"n": 2, "matrices": {"a": [[1, 0], [0, 0]], "b": [[0.5, 0.5], [0.5, 0.5]]}})
}

#[test]
fn analyze_two_idempotent_pair() {
    let ws = Workspace::new();
    let fam = ws.file("pair.json", &pair());
    let (code, r) = report(&["analyze", p(&fam)]);
    assert_eq!(code, 0);
    let r = &r["result"];
    assert_eq!(r["lcp"]["status"], "CertifiedYes");
    assert_eq!(r["rcp"]["status"], "CertifiedNo");
    assert_eq!(r["rcp"]["witness"]["word"], "1,2");
    assert_eq!(r["transversality_table"]["zero_transversal"], false);
    assert_eq!(r["transversality_table"]["full_transversal"], true);
    assert_eq!(r["cp"]["status"], "CertifiedNo");
}

#[test]
fn analyze_axis_projections_and_expectations() {
    let ws = Workspace::new();
    let fam = ws.file("axes.json", &axes());
    let (code, r) = report(&["analyze", p(&fam), "--expect", "cp"]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["cp"]["status"], "CertifiedYes");
    let pair = ws.file("pair.json", &pair());
    let (code, r) = report(&["analyze", p(&pair), "--expect", "lcp", "--expect", "rcp"]);
    assert_eq!(code, 1);
    assert_eq!(r["result"]["expectations_refuted"], json!(["rcp"]));
}

#[test]
fn invalid_inputs_exit_two() {
    let ws = Workspace::new();
    let bad_row = ws.file("bad.json", &json!({"n": 2, "matrices": {"1": [[1, 0, 0], [0, 0]]}}));
    assert_eq!(run(&["analyze", p(&bad_row)]).0, 2);
    let not_json = ws.raw("junk.json", "{ nope");
    assert_eq!(run(&["analyze", p(&not_json)]).0, 2);
    assert_eq!(run(&["analyze", "/nonexistent/family.json"]).0, 2);
    assert_eq!(run(&["analyze"]).0, 2);
    let fam = ws.file("pair.json", &pair());
    assert_eq!(run(&["analyze", p(&fam), "--conv-tol", "-1"]).0, 2);
    let spec = ws.file("spec.json", &json!({"kind": "five_block"}));
    assert_eq!(run(&["gadget", p(&spec)]).0, 2);
    let sched = ws.file("s.json", &json!({"points": [[0, 1, "3"]]}));
    assert_eq!(run(&["product", p(&fam), "--schedule", p(&sched)]).0, 2);
}

#[test]
fn finite_products() {
    let ws = Workspace::new();
    let fam = ws.file("pair.json", &pair());
    let s = ws.file("s.json", &json!({"points": [[1, 10, "1"], [1, 2, "2"]]}));
    let (code, r) = report(&["product", p(&fam), "--schedule", p(&s)]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["matrix"], json!([[1.0, 1.0], [0.0, 0.0]]));
    let empty = ws.file("e.json", &json!({"points": []}));
    let (_, r) = report(&["product", p(&fam), "--schedule", p(&empty)]);
    assert_eq!(r["result"]["matrix"], json!([[1.0, 0.0], [0.0, 1.0]]));
}

#[test]
fn generator_products() {
    let ws = Workspace::new();
    let fam = ws.file("axes.json", &axes());
    let g = ws.file("g.json", &json!({"kind": "dyadic", "pattern": ["x", "y"], "infinitely_complete": true}));
    let (code, r) = report(&["product", p(&fam), "--generator", p(&g)]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["mode"], "projection");
    let m: Vec<Vec<f64>> = serde_json::from_value(r["result"]["matrix"].clone()).unwrap();
    assert!(m.iter().flatten().all(|x| x.abs() < 1e-12));

    let lines = ws.file("lines.json", &lines_0_45());
    let g = ws.file("alt.json", &json!({"kind": "alternating", "pattern": ["a", "b"], "points_per_level": 2, "growth": "left"}));
    let (code, csv, _) = run(&["product", p(&lines), "--generator", p(&g), "--output", "csv"]);
    assert_eq!(code, 0);
    assert!(csv.starts_with("level,residual,complete_intervals\n"));

    let pair = ws.file("pair.json", &pair());
    let right = ws.file("right.json", &json!({"kind": "alternating", "pattern": ["1", "2"], "points_per_level": 1, "growth": "right"}));
    assert_eq!(run(&["product", p(&pair), "--generator", p(&right)]).0, 1);
    let (code, r) = report(&["product", p(&pair), "--generator", p(&right), "--allow-refuted", "--max-level", "12"]);
    assert_eq!(code, 3);
    assert_eq!(r["result"]["converged"], false);
}

#[test]
fn insertions() {
    let ws = Workspace::new();
    let fam = ws.file("lines.json", &lines_0_45());
    let steps: Vec<Value> = (0..100).map(|i| json!([i, if i % 2 == 0 { "a" } else { "b" }])).collect();
    let s = ws.file("steps.json", &json!({ "steps": steps }));
    let trace = ws.dir.path().join("trace.csv");
    let (code, r) = report(&["insert", p(&fam), "--steps", p(&s), "--trace", p(&trace)]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["steps"], 100);
    assert_eq!(r["result"]["converged"], true);
    let csv = std::fs::read_to_string(&trace).unwrap();
    assert!(csv.starts_with("snapshot,steps,step_norm,cumulative_variation\n"));
    assert_eq!(csv.lines().count(), 101);

    let (code, csv, _) = run(&["insert", p(&fam), "--random", "8", "--length", "100", "--seed", "3", "--output", "csv"]);
    assert_eq!(code, 0);
    assert!(csv.starts_with("sequence_id,length,variation,converged\n"));
    assert_eq!(csv.lines().count(), 9);

    let batches = ws.file("b.json", &json!({"batches": [[[0, "a"]], [[0, "b"], [2, "a"]]]}));
    let (_, r) = report(&["insert", p(&fam), "--steps", p(&batches)]);
    assert_eq!(r["result"]["snapshots"], 2);
    let bad = ws.file("bad.json", &json!({"steps": [[5, "a"]]}));
    assert_eq!(run(&["insert", p(&fam), "--steps", p(&bad)]).0, 2);
}

#[test]
fn integrals() {
    let ws = Workspace::new();
    let fam = ws.file("lines.json", &lines_0_45());
    let d = ws.file("c.json", &json!({"points": [[0, 1, "a"], [1, 2, "b"], [1, 1, "a"]], "f": {"builtin": "constant", "value": [1.0, -2.0]}}));
    let (code, r) = report(&["integrate", p(&fam), p(&d)]);
    assert_eq!(code, 0);
    let m_df: Vec<f64> = serde_json::from_value(r["result"]["m_df"].clone()).unwrap();
    assert!(m_df.iter().all(|x| x.abs() < 1e-15));
    let traj = r["result"]["trajectory"].as_array().unwrap();
    assert_eq!(traj.len(), 3);

    let g = ws.file(
        "g.json",
        &json!({"generator": {"kind": "pattern_fill", "pattern": ["a", "b"]}, "f": {"builtin": "step", "at": [1, 2], "before": [1, 0], "after": [0, 2]}}),
    );
    let (code, r) = report(&["integrate", p(&fam), p(&g)]);
    assert_eq!(code, 0, "{r}");
    assert_eq!(r["result"]["converged"], true);

    let table = ws.file("t.json", &json!({"points": [[0, 1, "a"], [1, 1, "b"]], "f": [[0, 1, [1.0, 0.0]]]}));
    assert_eq!(run(&["integrate", p(&fam), p(&table)]).0, 2);
}

#[test]
fn gadgets() {
    let ws = Workspace::new();
    let spec = ws.file("tb.json", &json!({"kind": "three_block", "M1": [[0.5]], "M2": [[1.5]], "M3": [[0.1]]}));
    let emitted = ws.dir.path().join("family.json");
    let (code, r) = report(&["gadget", p(&spec), "--emit-family", p(&emitted)]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["consistency"], "pass");
    let (code, r) = report(&["analyze", p(&emitted)]);
    assert_eq!(code, 0);
    assert_ne!(r["result"]["cp"]["status"], "CertifiedNo");

    let spec = ws.file("p2.json", &json!({"kind": "idempotent_pair"}));
    let (code, r) = report(&["gadget", p(&spec)]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["consistency"], "pass");
    assert_eq!(r["result"]["analysis"]["rcp"]["status"], "CertifiedNo");

    let spec = ws.file("lines.json", &json!({"kind": "projection_lines", "angles": [0.0, 1.0, 2.0]}));
    let (code, r) = report(&["gadget", p(&spec)]);
    assert_eq!(code, 0);
    assert_eq!(r["result"]["analysis"]["cp"]["status"], "CertifiedYes");

    let boundary = ws.file("edge.json", &json!({"kind": "three_block", "M1": 1.0, "M2": 1.0, "M3": 0.5}));
    assert_eq!(run(&["gadget", p(&boundary)]).0, 2);
    let angle = ws.file("angle.json", &json!({"kind": "projection_lines", "angles": [4.0]}));
    assert_eq!(run(&["gadget", p(&angle)]).0, 2);
}

#[test]
fn witnesses_round_trip() {
    let ws = Workspace::new();
    let families = [
        pair(),
        json!({"n": 2, "matrices": {"r": [[0, -1], [1, 0]]}}),
        json!({"n": 1, "matrices": {"s": [[1.2]], "h": [[0.5]]}}),
        json!({"n": 2, "matrices": {"shear": [[1, 1], [0, 1]], "p": [[1, 0], [0, 0]]}}),
    ];
    let mut replayed = 0;
    for (i, f) in families.iter().enumerate() {
        let fam = ws.file(&format!("f{i}.json"), f);
        let (_, out, _) = run(&["analyze", p(&fam)]);
        let rep = ws.raw(&format!("r{i}.json"), &out);
        let (code, r) = report(&["replay", p(&fam), p(&rep)]);
        assert_eq!(code, 0, "{r}");
        assert_eq!(r["result"]["all_reproduced"], true);
        replayed += r["result"]["witnesses"].as_u64().unwrap();
    }
    assert!(replayed >= 4);

    let spec = ws.file("u.json", &json!({"kind": "three_block", "M1": 0.5, "M2": 2.4, "M3": 0.1}));
    let fam = ws.dir.path().join("u_family.json");
    let (code, out, _) = run(&["gadget", p(&spec), "--emit-family", p(&fam)]);
    assert_eq!(code, 0);
    let rep = ws.raw("u_report.json", &out);
    assert_eq!(run(&["replay", p(&fam), p(&rep)]).0, 2, "gadget reports without an analysis block are rejected");
    let (_, out, _) = run(&["analyze", p(&fam)]);
    let rep = ws.raw("u_analysis.json", &out);
    assert_eq!(report(&["replay", p(&fam), p(&rep)]).1["result"]["all_reproduced"], true);

    // A witness for a different family is not reproduced.
    let (_, out, _) = run(&["analyze", p(&ws.file("pp.json", &pair()))]);
    let rep = ws.raw("pp_report.json", &out);
    let axes = ws.file("axes.json", &json!({"n": 2, "matrices": {"1": [[1, 0], [0, 0]], "2": [[0, 0], [0, 1]]}}));
    assert_eq!(run(&["replay", p(&axes), p(&rep)]).0, 1);
}

fn strip_timing(mut v: Value) -> Value {
    v.as_object_mut().unwrap().remove("elapsed_ms");
    v
}

#[test]
fn reports_are_deterministic() {
    let ws = Workspace::new();
    let fam = ws.file("lines.json", &lines_0_45());
    let pair = ws.file("pair.json", &pair());
    let commands: Vec<Vec<&str>> = vec![
        vec!["analyze", p(&pair), "--seed", "11"],
        vec!["insert", p(&fam), "--random", "16", "--length", "60", "--seed", "5"],
    ];
    for args in commands {
        let (_, a) = report(&args);
        let (_, b) = report(&args);
        assert_eq!(strip_timing(a), strip_timing(b));
    }
}

#[test]
fn binary_exit_codes() {
    let ws = Workspace::new();
    let fam = ws.file("pair.json", &pair());
    let bin = env!("CARGO_BIN_EXE_cpm");
    let ok = Command::new(bin).args(["analyze", p(&fam)]).output().unwrap();
    assert_eq!(ok.status.code(), Some(0));
    let v: Value = serde_json::from_slice(&ok.stdout).unwrap();
    assert_eq!(v["command"], "analyze");
    let refuted = Command::new(bin).args(["analyze", p(&fam), "--expect", "cp"]).output().unwrap();
    assert_eq!(refuted.status.code(), Some(1));
    let bad = Command::new(bin).args(["analyze", "/missing.json"]).output().unwrap();
    assert_eq!(bad.status.code(), Some(2));
    assert!(!bad.stderr.is_empty());
    let help = Command::new(bin).arg("--help").output().unwrap();
    assert_eq!(help.status.code(), Some(0));
}
