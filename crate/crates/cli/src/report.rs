//! JSON rendering of analysis results. Labels appear by name, keys as `"n/d"`.

use cpm_core::family::{CpReport, ProductSide, Status, SubsetReport, TransversalityDefect, TransversalityReport, Witness};
use cpm_core::{JsrBounds, Matrix, MatrixFamily, ToleranceConfig, Verdict, Vector};
use serde_json::{json, Value};

pub fn status(s: Status) -> &'static str {
    match s {
        Status::CertifiedYes => "CertifiedYes",
        Status::CertifiedNo => "CertifiedNo",
        Status::Unknown => "Unknown",
    }
}

pub fn opt_status(s: Option<Status>) -> Value {
    s.map_or(Value::Null, |s| json!(status(s)))
}

pub fn side(s: ProductSide) -> &'static str {
    match s {
        ProductSide::Left => "left",
        ProductSide::Right => "right",
    }
}

pub fn matrix(m: &Matrix) -> Value {
    json!(m.to_rows())
}

pub fn vector(v: &Vector) -> Value {
    json!(v.to_vec())
}

pub fn labels(fam: &MatrixFamily, word: &[usize]) -> Value {
    json!(word.iter().map(|&j| fam.label(j)).collect::<Vec<_>>())
}

pub fn tolerances(tol: &ToleranceConfig) -> Value {
    json!({ "rank_tol": tol.rank_tol, "conv_tol": tol.conv_tol, "eig_tol": tol.eig_tol })
}

/// `side` is the product side on which a word witness diverges.
pub fn witness(fam: &MatrixFamily, w: &Witness<f64>, word_side: ProductSide) -> Value {
    match w {
        Witness::Subset { subset, dim_n, dim_r, dim_intersection, dim_sum, defect } => json!({
            "kind": "subset",
            "subset": labels(fam, subset),
            "dim_n": dim_n,
            "dim_r": dim_r,
            "dim_intersection": dim_intersection,
            "dim_sum": dim_sum,
            "defect": match defect {
                TransversalityDefect::Intersection => "intersection",
                TransversalityDefect::Sum => "sum",
            },
        }),
        Witness::Word { prefix, period } => json!({
            "kind": "word",
            "side": side(word_side),
            "prefix": labels(fam, prefix),
            "period": labels(fam, period),
            "word": fam.format_word(period),
        }),
        Witness::Product { word, matrix: m, spectral_radius } => json!({
            "kind": "product",
            "word": labels(fam, word),
            "spectral_radius": spectral_radius,
            "matrix": matrix(m),
        }),
    }
}

pub fn verdict(fam: &MatrixFamily, v: &Verdict, word_side: ProductSide) -> Value {
    json!({
        "status": status(v.status),
        "rule": v.rule,
        "witness": v.witness.as_ref().map_or(Value::Null, |w| witness(fam, w, word_side)),
        "supporting": v.supporting.iter().map(|w| witness(fam, w, word_side)).collect::<Vec<_>>(),
        "evidence": v.evidence,
    })
}

fn subset_row(fam: &MatrixFamily, s: &SubsetReport) -> Value {
    json!({
        "subset": labels(fam, &s.subset),
        "dim_n": s.dim_n,
        "dim_r": s.dim_r,
        "dim_intersection": s.dim_intersection,
        "dim_sum": s.dim_sum,
        "zero_transversal": s.zero_transversal,
        "full_transversal": s.full_transversal,
    })
}

pub fn transversality_table(fam: &MatrixFamily, r: &TransversalityReport) -> Value {
    json!({
        "ambient_dim": r.ambient_dim,
        "zero_transversal": r.zero_transversal,
        "full_transversal": r.full_transversal,
        "subsets": r.subsets.iter().map(|s| subset_row(fam, s)).collect::<Vec<_>>(),
    })
}

pub fn cp(fam: &MatrixFamily, r: &CpReport<f64>) -> Value {
    json!({
        "cp": verdict(fam, &r.cp, if r.cp.rule.starts_with("rcp") { ProductSide::Right } else { ProductSide::Left }),
        "lcp": verdict(fam, &r.lcp, ProductSide::Left),
        "rcp": verdict(fam, &r.rcp, ProductSide::Right),
        "transversality": verdict(fam, &r.transversality, ProductSide::Left),
        "transversality_table": r.transversality_report.as_ref().map_or(Value::Null, |t| transversality_table(fam, t)),
    })
}

pub fn jsr(fam: &MatrixFamily, b: &JsrBounds) -> Value {
    json!({
        "lower": b.lower,
        "upper": b.upper,
        "depth_reached": b.depth_reached,
        "witness_word": labels(fam, &b.witness_word),
        "budget_exhausted": b.budget_exhausted,
        "nodes": b.nodes,
    })
}

/// CSV rows of the transversality table.
pub fn transversality_csv(fam: &MatrixFamily, r: &TransversalityReport) -> anyhow::Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["subset", "dim_n", "dim_r", "dim_intersection", "dim_sum", "zero_transversal", "full_transversal"])?;
    for s in &r.subsets {
        w.write_record([
            fam.format_word(&s.subset),
            s.dim_n.to_string(),
            s.dim_r.to_string(),
            s.dim_intersection.to_string(),
            s.dim_sum.to_string(),
            s.zero_transversal.to_string(),
            s.full_transversal.to_string(),
        ])?;
    }
    finish(w)
}

pub fn finish(w: csv::Writer<Vec<u8>>) -> anyhow::Result<String> {
    Ok(String::from_utf8(w.into_inner().map_err(|e| anyhow::anyhow!("{e}"))?)?)
}
