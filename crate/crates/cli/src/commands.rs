use std::time::Instant;

use anyhow::{anyhow, bail, Context, Result};
use cpm_core::contprod::{evaluate_finite, limit_product, LimitOptions, ProductResult};
use cpm_core::family::{check_subsets, cp_verdict, replay_word_witness, ProductSide, Status};
use cpm_core::gadgets::{gadget_cross_check, psi_family, CrossCheckOptions, GadgetSpec};
use cpm_core::insertion::{random_insertion_experiment, run_batch_insertions, InsertionStats, InsertionTrace};
use cpm_core::integral::{integral_f_dm, trajectory, DrivenSchedule, IndexSource, IntegralOptions, IntegralResult};
use cpm_core::jsr::jsr_bounds_with_budget;
use cpm_core::linalg::{is_power_convergent, spectral_radius};
use cpm_core::{Error, MatrixFamily, ToleranceConfig};
use serde::Serialize;
use serde_json::{json, Value};

use crate::input::{self, DrivenSource, GadgetFile, GeneratorFile, ScheduleFile, StepsFile};
use crate::report;
use crate::{
    AnalyzeArgs, Command, Execution, GadgetArgs, InsertArgs, IntegrateArgs, OutputFormat, ProductArgs, Property, ReplayArgs,
};

/// Result of a subcommand before rendering.
struct Outcome {
    result: Value,
    csv: Option<String>,
    code: i32,
}

impl Outcome {
    fn ok(result: Value, csv: Option<String>) -> Self {
        Self { result, csv, code: 0 }
    }
}

fn exit_code(err: &anyhow::Error) -> i32 {
    match err.downcast_ref::<Error>() {
        Some(Error::Refused { .. }) => 1,
        Some(Error::NonConvergence { .. } | Error::EigenNoConvergence { .. } | Error::Indeterminate { .. }) => 3,
        _ => 2,
    }
}

pub fn run(command: &Command) -> Execution {
    let start = Instant::now();
    let (name, args, out, outcome) = match command {
        Command::Analyze(a) => ("analyze", echo(a), &a.out, analyze(a)),
        Command::Product(a) => ("product", echo(a), &a.out, product(a)),
        Command::Insert(a) => ("insert", echo(a), &a.out, insert(a)),
        Command::Integrate(a) => ("integrate", echo(a), &a.out, integrate(a)),
        Command::Gadget(a) => ("gadget", echo(a), &a.out, gadget(a)),
        Command::Replay(a) => ("replay", echo(a), &a.out, replay(a)),
    };
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            let code = exit_code(&e);
            return Execution { stdout: String::new(), stderr: format!("error: {e:#}\n"), code };
        }
    };
    if let (Some(path), Some(csv)) = (&out.trace, &outcome.csv) {
        if let Err(e) = std::fs::write(path, csv) {
            return Execution { stdout: String::new(), stderr: format!("error: cannot write {}: {e}\n", path.display()), code: 2 };
        }
    }
    let stdout = match out.output {
        OutputFormat::Csv => match outcome.csv {
            Some(csv) => csv,
            None => return Execution { stdout: String::new(), stderr: format!("error: {name} has no CSV output\n"), code: 2 },
        },
        OutputFormat::Json => {
            let doc = json!({
                "command": name,
                "arguments": args,
                "result": outcome.result,
                "elapsed_ms": start.elapsed().as_secs_f64() * 1e3,
            });
            serde_json::to_string_pretty(&doc).expect("report is serializable") + "\n"
        }
    };
    Execution { stdout, stderr: String::new(), code: outcome.code }
}

fn echo<A: Serialize>(a: &A) -> Value {
    serde_json::to_value(a).unwrap_or(Value::Null)
}

fn property_status(r: &cpm_core::family::CpReport<f64>, p: Property) -> Status {
    match p {
        Property::Cp => r.cp.status,
        Property::Lcp => r.lcp.status,
        Property::Rcp => r.rcp.status,
        Property::Tr => r.transversality.status,
    }
}

fn analyze(a: &AnalyzeArgs) -> Result<Outcome> {
    let tol = a.tol.config()?;
    let fam = input::load_family(&a.family)?;
    let budget = a.budget.budget();
    let cp = cp_verdict(&fam, &budget, &tol)?;
    let bounds = jsr_bounds_with_budget(&fam, budget.depth, budget.node_budget);
    let refuted: Vec<Value> = a
        .expect
        .iter()
        .filter(|p| property_status(&cp, **p) == Status::CertifiedNo)
        .map(|p| json!(p))
        .collect();
    let mut result = json!({
        "family": { "n": fam.dim(), "labels": fam.labels() },
        "tolerances": report::tolerances(&tol),
        "budget": budget,
    });
    let body = report::cp(&fam, &cp);
    merge(&mut result, body);
    result["jsr"] = report::jsr(&fam, &bounds);
    result["expectations_refuted"] = json!(refuted);
    let csv = cp.transversality_report.as_ref().map(|t| report::transversality_csv(&fam, t)).transpose()?;
    Ok(Outcome { code: if refuted.is_empty() { 0 } else { 1 }, result, csv })
}

fn merge(target: &mut Value, extra: Value) {
    if let (Value::Object(t), Value::Object(e)) = (target, extra) {
        t.extend(e);
    }
}

fn residual_csv(residuals: &[f64], complete: Option<&[usize]>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    if complete.is_some() {
        w.write_record(["level", "residual", "complete_intervals"])?;
    } else {
        w.write_record(["level", "residual"])?;
    }
    for (i, r) in residuals.iter().enumerate() {
        let level = (i + 1).to_string();
        match complete {
            Some(c) => w.write_record([level, format!("{r:e}"), c.get(i + 1).map_or(String::new(), |x| x.to_string())])?,
            None => w.write_record([level, format!("{r:e}")])?,
        }
    }
    report::finish(w)
}

fn non_convergence(err: anyhow::Error) -> Result<Outcome> {
    match err.downcast_ref::<Error>() {
        Some(Error::NonConvergence { levels, last, residuals }) => Ok(Outcome {
            result: json!({ "converged": false, "levels": levels, "last_residual": last, "residuals": residuals }),
            csv: Some(residual_csv(residuals, None)?),
            code: 3,
        }),
        _ => Err(err),
    }
}

fn product_json(fam: &MatrixFamily, r: &ProductResult<f64>) -> Value {
    json!({
        "converged": true,
        "mode": format!("{:?}", r.mode).to_lowercase(),
        "matrix": report::matrix(&r.matrix),
        "levels_used": r.levels_used,
        "converged_at": r.converged_at,
        "residual": r.residual,
        "residuals": r.residuals,
        "complete_counts": r.complete_counts,
        "active_labels": report::labels(fam, &r.active_labels),
        "cp_status": report::opt_status(r.cp_status),
        "warnings": r.warnings,
    })
}

fn product(a: &ProductArgs) -> Result<Outcome> {
    let tol = a.tol.config()?;
    let fam = input::load_family(&a.family)?;
    let result = if let Some(path) = &a.schedule {
        let file: ScheduleFile = input::read_json(path)?;
        let s = file.build(&fam).with_context(|| format!("invalid schedule {}", path.display()))?;
        evaluate_finite(&s, &fam)
    } else {
        let path = a.generator.as_ref().ok_or_else(|| anyhow!("give --schedule or --generator"))?;
        let file: GeneratorFile = input::read_json(path)?;
        let g = file.build(&fam).with_context(|| format!("invalid generator {}", path.display()))?;
        let opts = LimitOptions { max_level: a.max_level, max_points: a.max_points, gate: a.gate.gate(a.budget.budget()) };
        limit_product(g.as_ref(), &fam, &tol, &opts)
    };
    match result {
        Ok(r) => {
            let csv = residual_csv(&r.residuals.to_vec(), Some(&r.complete_counts))?;
            Ok(Outcome::ok(product_json(&fam, &r), Some(csv)))
        }
        Err(e) => non_convergence(e.into()),
    }
}

fn trace_json(fam: &MatrixFamily, t: &InsertionTrace<f64>) -> Value {
    json!({
        "steps": t.labels.len(),
        "snapshots": t.products.len(),
        "keys": t.keys.iter().map(|k| k.to_string()).collect::<Vec<_>>(),
        "labels": report::labels(fam, &t.labels),
        "step_norms": t.step_norms,
        "total_variation": t.total_variation,
        "converged": t.converged,
        "window_residual": t.window_residual,
        "final_product": t.products.last().map_or(Value::Null, report::matrix),
        "limit": t.limit.as_ref().map_or(Value::Null, report::matrix),
        "cp_status": report::opt_status(t.cp_status),
        "warnings": t.warnings,
    })
}

fn trace_csv(t: &InsertionTrace<f64>) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["snapshot", "steps", "step_norm", "cumulative_variation"])?;
    let mut total = 0.0;
    for (i, &steps) in t.snapshot_steps.iter().enumerate() {
        let norm = if i == 0 { 0.0 } else { t.step_norms[i - 1] };
        total += norm;
        w.write_record([i.to_string(), steps.to_string(), format!("{norm:e}"), format!("{total:e}")])?;
    }
    report::finish(w)
}

fn stats_json(s: &InsertionStats, length: usize) -> Value {
    json!({
        "sequences": s.sequences.len(),
        "length": length,
        "max_variation": s.max_variation,
        "mean_variation": s.mean_variation,
        "std_variation": s.std_variation,
        "max_variation_half_length": s.max_variation_at(length / 2),
        "all_converged": s.all_converged,
        "per_sequence": s.sequences,
        "cp_status": report::opt_status(s.cp_status),
        "warnings": s.warnings,
    })
}

fn stats_csv(s: &InsertionStats) -> Result<String> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["sequence_id", "length", "variation", "converged"])?;
    for q in &s.sequences {
        w.write_record([q.sequence_id.to_string(), q.length.to_string(), format!("{:e}", q.variation), q.converged.to_string()])?;
    }
    report::finish(w)
}

fn insert(a: &InsertArgs) -> Result<Outcome> {
    let tol = a.tol.config()?;
    let fam = input::load_family(&a.family)?;
    let gate = a.gate.gate(a.budget.budget());
    if let Some(path) = &a.steps {
        let file: StepsFile = input::read_json(path)?;
        let batches = file.batches(&fam).with_context(|| format!("invalid steps file {}", path.display()))?;
        let t = run_batch_insertions(&fam, &batches, &tol, &gate)?;
        return Ok(Outcome::ok(trace_json(&fam, &t), Some(trace_csv(&t)?)));
    }
    let (count, length) = (a.random.unwrap_or(0), a.length.unwrap_or(0));
    if count == 0 || length == 0 {
        bail!("--random and --length must be positive");
    }
    let s = random_insertion_experiment(&fam, count, length, a.budget.seed, &tol, &gate)?;
    Ok(Outcome::ok(stats_json(&s, length), Some(stats_csv(&s)?)))
}

fn integral_json(r: &IntegralResult<f64>) -> Value {
    json!({
        "converged": true,
        "f_dm": report::vector(&r.value),
        "m_df": report::vector(&(&r.boundary - &r.value)),
        "boundary": report::vector(&r.boundary),
        "partitions_used": r.partitions_used,
        "converged_at": r.converged_at,
        "residual": r.residual,
        "residuals": r.residuals,
        "cp_status": report::opt_status(r.cp_status),
        "warnings": r.warnings,
    })
}

fn integrate(a: &IntegrateArgs) -> Result<Outcome> {
    let tol = a.tol.config()?;
    let fam = input::load_family(&a.family)?;
    let file: input::DrivenFile = input::read_json(&a.driven)?;
    let driver = file.driver()?;
    let source = file.source(&fam).with_context(|| format!("invalid driven schedule {}", a.driven.display()))?;
    let opts = IntegralOptions { max_level: a.max_level, gate: a.gate.gate(a.budget.budget()) };
    match source {
        DrivenSource::Finite(s) => {
            let d = DrivenSchedule { source: IndexSource::Finite(s.clone()), driver: driver.clone() };
            let r = match integral_f_dm(&fam, &d, &tol, &opts) {
                Ok(r) => r,
                Err(e) => return non_convergence(e.into()),
            };
            let keys = file.trajectory_keys()?.unwrap_or_else(|| s.keys().cloned().collect());
            let path = trajectory(&fam, &s, &driver, &keys)?;
            let mut result = integral_json(&r);
            result["trajectory"] =
                json!(path.iter().map(|(k, x)| json!({ "key": k.to_string(), "x": report::vector(x) })).collect::<Vec<_>>());
            let mut w = csv::Writer::from_writer(Vec::new());
            let mut header = vec!["key".to_string()];
            header.extend((1..=fam.dim()).map(|i| format!("x{i}")));
            w.write_record(&header)?;
            for (k, x) in &path {
                let mut row = vec![k.to_string()];
                row.extend(x.iter().map(|v| format!("{v:e}")));
                w.write_record(&row)?;
            }
            Ok(Outcome::ok(result, Some(report::finish(w)?)))
        }
        DrivenSource::Generator(g) => {
            let d = DrivenSchedule { source: IndexSource::Generator(g), driver };
            match integral_f_dm(&fam, &d, &tol, &opts) {
                Ok(r) => Ok(Outcome::ok(integral_json(&r), Some(residual_csv(&r.residuals, None)?))),
                Err(e) => non_convergence(e.into()),
            }
        }
    }
}

fn gadget(a: &GadgetArgs) -> Result<Outcome> {
    let tol = a.tol.config()?;
    let file: GadgetFile = input::read_json(&a.spec)?;
    let spec = file.spec().with_context(|| format!("invalid gadget spec {}", a.spec.display()))?;
    let fam = spec.build()?;
    if let Some(path) = &a.emit_family {
        std::fs::write(path, serde_json::to_string_pretty(&input::family_to_json(&fam))?)
            .with_context(|| format!("cannot write {}", path.display()))?;
    }
    let budget = a.budget.budget();
    let mut result = json!({ "family": input::family_to_json(&fam) });
    let mut code = 0;
    match &spec {
        GadgetSpec::ThreeBlock { m1, m2, m3 } => {
            let opts = CrossCheckOptions { budget, margin: a.margin, sequences: a.sequences, length: a.length, seed: budget.seed, ..Default::default() };
            let check = gadget_cross_check(m1, m2, m3, &opts, &tol)?;
            result["kind"] = json!("three_block");
            result["psi"] = input::family_to_json(&psi_family(m1, m2, m3)?);
            result["consistency"] = json!(if check.agreement { "pass" } else { "fail" });
            result["cross_check"] = serde_json::to_value(&check)?;
            if !check.agreement {
                code = 1;
            }
        }
        GadgetSpec::IdempotentPair | GadgetSpec::ProjectionLines { .. } => {
            let cp = cp_verdict(&fam, &budget, &tol)?;
            let expected = match spec {
                GadgetSpec::IdempotentPair => {
                    let t = cp.transversality_report.as_ref();
                    cp.lcp.status == Status::CertifiedYes
                        && cp.rcp.status == Status::CertifiedNo
                        && t.is_some_and(|t| !t.zero_transversal && t.full_transversal)
                }
                _ => cp.cp.status == Status::CertifiedYes,
            };
            result["kind"] = json!(if matches!(spec, GadgetSpec::IdempotentPair) { "idempotent_pair" } else { "projection_lines" });
            result["analysis"] = report::cp(&fam, &cp);
            result["consistency"] = json!(if expected { "pass" } else { "fail" });
            if !expected {
                code = 1;
            }
        }
    }
    Ok(Outcome { result, csv: None, code })
}

/// Verdict objects of an `analyze` or `gadget` report.
fn report_verdicts(doc: &Value) -> Result<Vec<(String, &Value)>> {
    let result = doc.get("result").ok_or_else(|| anyhow!("report has no \"result\""))?;
    let holder = result.get("analysis").unwrap_or(result);
    let verdicts: Vec<(String, &Value)> = ["cp", "lcp", "rcp", "transversality"]
        .iter()
        .filter_map(|k| holder.get(*k).map(|v| (k.to_string(), v)))
        .collect();
    if verdicts.is_empty() {
        bail!("report contains no verdicts");
    }
    Ok(verdicts)
}

fn label_list(fam: &MatrixFamily, v: &Value, field: &str) -> Result<Vec<usize>> {
    let names: Vec<String> = serde_json::from_value(v.get(field).cloned().unwrap_or(Value::Null))
        .with_context(|| format!("witness field {field:?} must be a list of labels"))?;
    Ok(fam.indices_of(&names)?)
}

fn replay_one(fam: &MatrixFamily, w: &Value, tol: &ToleranceConfig) -> Result<(bool, Value)> {
    let kind = w.get("kind").and_then(Value::as_str).ok_or_else(|| anyhow!("witness without kind"))?;
    match kind {
        "word" => {
            let side = match w.get("side").and_then(Value::as_str) {
                Some("right") => ProductSide::Right,
                Some("left") => ProductSide::Left,
                other => bail!("word witness has invalid side {other:?}"),
            };
            let r = replay_word_witness(fam, &label_list(fam, w, "prefix")?, &label_list(fam, w, "period")?, side, tol)?;
            Ok((r.reproduced, serde_json::to_value(&r)?))
        }
        "subset" => {
            let subset = label_list(fam, w, "subset")?;
            let r = check_subsets(fam, vec![subset], tol)?;
            let row = &r.subsets[0];
            let reproduced = match w.get("defect").and_then(Value::as_str) {
                Some("intersection") => !row.zero_transversal,
                Some("sum") => !row.full_transversal,
                other => bail!("subset witness has invalid defect {other:?}"),
            };
            Ok((reproduced, json!({ "dim_intersection": row.dim_intersection, "dim_sum": row.dim_sum, "ambient_dim": r.ambient_dim })))
        }
        "product" => {
            let word = label_list(fam, w, "word")?;
            let m = fam.product(&word);
            let rho = spectral_radius(&m)?;
            let convergent = is_power_convergent(&m, tol).ok();
            let reproduced = rho > 1.0 + tol.eig_tol || convergent == Some(false);
            Ok((reproduced, json!({ "spectral_radius": rho, "power_convergent": convergent })))
        }
        other => bail!("unknown witness kind {other:?}"),
    }
}

fn replay(a: &ReplayArgs) -> Result<Outcome> {
    let tol = a.tol.config()?;
    let fam = input::load_family(&a.family)?;
    let doc: Value = input::read_json(&a.report)?;
    let mut rows = Vec::new();
    let mut all = true;
    for (name, v) in report_verdicts(&doc)? {
        if v.get("status").and_then(Value::as_str) != Some("CertifiedNo") {
            continue;
        }
        let witnesses = v.get("witness").into_iter().filter(|w| !w.is_null()).chain(v.get("supporting").and_then(Value::as_array).into_iter().flatten());
        for w in witnesses {
            let (reproduced, detail) = replay_one(&fam, w, &tol)?;
            all &= reproduced;
            rows.push(json!({ "verdict": name, "witness": w, "reproduced": reproduced, "detail": detail }));
        }
    }
    let result = json!({ "witnesses": rows.len(), "all_reproduced": all, "replays": rows });
    Ok(Outcome { result, csv: None, code: if all { 0 } else { 1 } })
}
