//! JSON input formats.

use std::collections::{BTreeMap, HashSet};
use std::fmt;
use std::path::Path;
use std::sync::Arc;

use anyhow::{anyhow, bail, Context, Result};
use cpm_core::contprod::{
    Alternating, Dyadic, FiniteSchedule, Growth, InfinitelyComplete, OrderKey, PatternFill, ScheduleGenerator,
};
use cpm_core::gadgets::GadgetSpec;
use cpm_core::insertion::InsertionStep;
use cpm_core::integral::Driver;
use cpm_core::{Matrix, MatrixFamily, Vector};
use serde::de::{self, MapAccess, Visitor};
use serde::{Deserialize, Deserializer};
use serde_json::Value;

pub fn read_json<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T> {
    let text = std::fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    serde_json::from_str(&text).with_context(|| format!("invalid JSON in {}", path.display()))
}

/// Object entries in file order; duplicate keys are rejected.
#[derive(Debug)]
struct OrderedEntries(Vec<(String, Value)>);

impl<'de> Deserialize<'de> for OrderedEntries {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl<'de> Visitor<'de> for V {
            type Value = OrderedEntries;
            fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
                f.write_str("an object mapping labels to matrices")
            }
            fn visit_map<A: MapAccess<'de>>(self, mut map: A) -> std::result::Result<Self::Value, A::Error> {
                let mut seen = HashSet::new();
                let mut out = Vec::new();
                while let Some((k, v)) = map.next_entry::<String, Value>()? {
                    if !seen.insert(k.clone()) {
                        return Err(de::Error::custom(format!("duplicate label {k:?}")));
                    }
                    out.push((k, v));
                }
                Ok(OrderedEntries(out))
            }
        }
        d.deserialize_map(V)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct FamilyFile {
    n: usize,
    matrices: OrderedEntries,
}

fn matrix_from_rows(rows: &[Vec<f64>], n: usize, what: &str) -> Result<Matrix> {
    if rows.len() != n {
        bail!("{what}: expected {n} rows, found {}", rows.len());
    }
    for (i, row) in rows.iter().enumerate() {
        if row.len() != n {
            bail!("{what}: row {i} has {} entries, expected {n}", row.len());
        }
    }
    Ok(Matrix::from_rows(rows)?)
}

fn square_rows(value: &Value, what: &str) -> Result<Vec<Vec<f64>>> {
    serde_json::from_value(value.clone()).with_context(|| format!("{what}: expected an array of numeric rows"))
}

/// `{"n": 2, "matrices": {"1": [[1,0],[0,0]], ...}}`, labels in file order.
pub fn parse_family(value: Value) -> Result<MatrixFamily> {
    let file: FamilyFile = serde_json::from_value(value)?;
    if file.n == 0 {
        bail!("n must be positive");
    }
    let mut labels = Vec::new();
    let mut matrices = Vec::new();
    for (label, rows) in file.matrices.0 {
        let rows = square_rows(&rows, &format!("matrix {label:?}"))?;
        matrices.push(matrix_from_rows(&rows, file.n, &format!("matrix {label:?}"))?);
        labels.push(label);
    }
    Ok(MatrixFamily::new(labels, matrices)?)
}

pub fn load_family(path: &Path) -> Result<MatrixFamily> {
    parse_family(read_json(path)?).with_context(|| format!("invalid family file {}", path.display()))
}

pub fn family_to_json(fam: &MatrixFamily) -> Value {
    let matrices: serde_json::Map<String, Value> =
        fam.labels().iter().zip(fam.matrices()).map(|(l, m)| (l.clone(), serde_json::json!(m.to_rows()))).collect();
    serde_json::json!({ "n": fam.dim(), "matrices": matrices })
}

/// `[num, den]` with a nonzero denominator.
#[derive(Clone, Debug, Deserialize)]
pub struct KeyPair(i64, i64);

impl KeyPair {
    pub fn key(&self) -> Result<OrderKey> {
        Ok(OrderKey::new(self.0, self.1)?)
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScheduleFile {
    points: Vec<(i64, i64, String)>,
}

impl ScheduleFile {
    pub fn build(&self, fam: &MatrixFamily) -> Result<FiniteSchedule> {
        let entries = self
            .points
            .iter()
            .map(|(n, d, label)| Ok((OrderKey::new(*n, *d)?, fam.index_of(label)?)))
            .collect::<Result<Vec<_>>>()?;
        let count = entries.len();
        let s = FiniteSchedule::from_unsorted(entries)?;
        if s.len() != count {
            bail!("schedule keys must be distinct");
        }
        Ok(s)
    }
}

#[derive(Clone, Copy, Debug, Deserialize)]
#[serde(rename_all = "lowercase")]
enum GrowthSpec {
    Left,
    Right,
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum GeneratorKind {
    Alternating {
        pattern: Vec<String>,
        points_per_level: usize,
        growth: GrowthSpec,
        #[serde(default)]
        infinitely_complete: bool,
    },
    Dyadic {
        pattern: Vec<String>,
        #[serde(default)]
        infinitely_complete: bool,
    },
    PatternFill {
        pattern: Vec<String>,
        #[serde(default)]
        infinitely_complete: bool,
    },
}

/// Directive object describing a nested refinement generator.
#[derive(Debug, Deserialize)]
#[serde(transparent)]
pub struct GeneratorFile(GeneratorKind);

fn wrap<G: ScheduleGenerator + 'static>(g: G, complete: bool) -> Arc<dyn ScheduleGenerator> {
    if complete {
        Arc::new(InfinitelyComplete(g))
    } else {
        Arc::new(g)
    }
}

impl GeneratorFile {
    pub fn build(&self, fam: &MatrixFamily) -> Result<Arc<dyn ScheduleGenerator>> {
        Ok(match &self.0 {
            GeneratorKind::Alternating { pattern, points_per_level, growth, infinitely_complete } => {
                let growth = match growth {
                    GrowthSpec::Left => Growth::Left,
                    GrowthSpec::Right => Growth::Right,
                };
                wrap(Alternating::new(fam.indices_of(pattern)?, *points_per_level, growth)?, *infinitely_complete)
            }
            GeneratorKind::Dyadic { pattern, infinitely_complete } => wrap(Dyadic::new(fam.indices_of(pattern)?)?, *infinitely_complete),
            GeneratorKind::PatternFill { pattern, infinitely_complete } => {
                wrap(PatternFill::new(fam.indices_of(pattern)?)?, *infinitely_complete)
            }
        })
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct StepsFile {
    #[serde(default)]
    steps: Vec<(usize, String)>,
    #[serde(default)]
    batches: Vec<Vec<(usize, String)>>,
}

impl StepsFile {
    /// One batch per step, or the explicit batches.
    pub fn batches(&self, fam: &MatrixFamily) -> Result<Vec<Vec<InsertionStep>>> {
        let step = |(position, label): &(usize, String)| Ok(InsertionStep { position: *position, label: fam.index_of(label)? });
        match (self.steps.is_empty(), self.batches.is_empty()) {
            (false, true) => self.steps.iter().map(|s| Ok(vec![step(s)?])).collect(),
            (true, false) => self.batches.iter().map(|b| b.iter().map(step).collect()).collect(),
            (true, true) => bail!("steps file has neither \"steps\" nor \"batches\""),
            (false, false) => bail!("give either \"steps\" or \"batches\", not both"),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "builtin", rename_all = "snake_case", deny_unknown_fields)]
enum BuiltinDriver {
    Constant { value: Vec<f64> },
    Ramp { offset: Vec<f64>, slope: Vec<f64> },
    Step { at: KeyPair, before: Vec<f64>, after: Vec<f64> },
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
enum DriverFile {
    Table(Vec<(i64, i64, Vec<f64>)>),
    Builtin(BuiltinDriver),
}

fn vector(values: &[f64]) -> Result<Vector> {
    Ok(Vector::new(values.to_vec())?)
}

impl DriverFile {
    fn build(&self) -> Result<Driver<f64>> {
        Ok(match self {
            DriverFile::Table(rows) => {
                let mut table = BTreeMap::new();
                for (n, d, v) in rows {
                    if table.insert(OrderKey::new(*n, *d)?, vector(v)?).is_some() {
                        bail!("f table repeats key {n}/{d}");
                    }
                }
                Driver::Table(table)
            }
            DriverFile::Builtin(BuiltinDriver::Constant { value }) => Driver::Constant(vector(value)?),
            DriverFile::Builtin(BuiltinDriver::Ramp { offset, slope }) => Driver::Ramp { offset: vector(offset)?, slope: vector(slope)? },
            DriverFile::Builtin(BuiltinDriver::Step { at, before, after }) => {
                Driver::Step { at: at.key()?, before: vector(before)?, after: vector(after)? }
            }
        })
    }
}

/// Finite points or a generator, plus the driving function `f`.
#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DrivenFile {
    #[serde(default)]
    points: Option<Vec<(i64, i64, String)>>,
    #[serde(default)]
    generator: Option<GeneratorFile>,
    f: DriverFile,
    /// Keys at which to report the trajectory (finite schedules only).
    #[serde(default)]
    trajectory: Option<Vec<KeyPair>>,
}

pub enum DrivenSource {
    Finite(FiniteSchedule),
    Generator(Arc<dyn ScheduleGenerator>),
}

impl DrivenFile {
    pub fn source(&self, fam: &MatrixFamily) -> Result<DrivenSource> {
        match (&self.points, &self.generator) {
            (Some(points), None) => Ok(DrivenSource::Finite(ScheduleFile { points: points.clone() }.build(fam)?)),
            (None, Some(g)) => Ok(DrivenSource::Generator(g.build(fam)?)),
            _ => Err(anyhow!("driven schedule needs exactly one of \"points\" and \"generator\"")),
        }
    }

    pub fn driver(&self) -> Result<Driver<f64>> {
        self.f.build()
    }

    pub fn trajectory_keys(&self) -> Result<Option<Vec<OrderKey>>> {
        self.trajectory.as_ref().map(|ks| ks.iter().map(KeyPair::key).collect()).transpose()
    }
}

#[derive(Debug, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case", deny_unknown_fields)]
enum GadgetKind {
    #[serde(rename = "idempotent_pair")]
    IdempotentPair,
    ProjectionLines {
        angles: Vec<f64>,
    },
    ThreeBlock {
        #[serde(rename = "M1")]
        m1: Value,
        #[serde(rename = "M2")]
        m2: Value,
        #[serde(rename = "M3")]
        m3: Value,
    },
}

#[derive(Debug, Deserialize)]
#[serde(transparent)]
pub struct GadgetFile(GadgetKind);

fn block(value: &Value, name: &str) -> Result<Matrix> {
    // A bare number is a 1x1 block.
    if let Some(x) = value.as_f64() {
        return Ok(Matrix::from_f64_rows(&[&[x]]));
    }
    let rows = square_rows(value, name)?;
    matrix_from_rows(&rows, rows.len(), name)
}

impl GadgetFile {
    pub fn spec(&self) -> Result<GadgetSpec<f64>> {
        Ok(match &self.0 {
            GadgetKind::IdempotentPair => GadgetSpec::IdempotentPair,
            GadgetKind::ProjectionLines { angles } => GadgetSpec::ProjectionLines { angles: angles.clone() },
            GadgetKind::ThreeBlock { m1, m2, m3 } => GadgetSpec::ThreeBlock { m1: block(m1, "M1")?, m2: block(m2, "M2")?, m3: block(m3, "M3")? },
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn family_keeps_file_order_and_validates() {
        let fam = parse_family(json!({"n": 2, "matrices": {"b": [[1, 0], [0, 0]], "a": [[1, 1], [0, 0]]}})).unwrap();
        assert_eq!(fam.labels(), &["b".to_string(), "a".to_string()]);
        assert!(parse_family(json!({"n": 2, "matrices": {"1": [[1, 0, 0], [0, 0]]}})).is_err());
        assert!(parse_family(json!({"n": 2, "matrices": {}})).is_err());
        assert!(serde_json::from_str::<FamilyFile>(r#"{"n": 1, "matrices": {"x": [[1]], "x": [[2]]}}"#).is_err());
        let back = parse_family(family_to_json(&fam)).unwrap();
        assert_eq!(back.matrices(), fam.matrices());
    }

    #[test]
    fn schedules_sort_and_reject_duplicates() {
        let fam = parse_family(json!({"n": 1, "matrices": {"1": [[0.5]], "2": [[0.25]]}})).unwrap();
        let s: ScheduleFile = serde_json::from_value(json!({"points": [[2, 1, "1"], [1, 2, "2"]]})).unwrap();
        assert_eq!(s.build(&fam).unwrap().labels(), vec![1, 0]);
        let s: ScheduleFile = serde_json::from_value(json!({"points": [[1, 2, "1"], [2, 4, "2"]]})).unwrap();
        assert!(s.build(&fam).is_err());
        let s: ScheduleFile = serde_json::from_value(json!({"points": [[1, 0, "1"]]})).unwrap();
        assert!(s.build(&fam).is_err());
    }

    #[test]
    fn drivers_and_gadgets_parse() {
        let d: DrivenFile = serde_json::from_value(json!({"points": [[0, 1, "1"]], "f": {"builtin": "ramp", "offset": [1], "slope": [2]}})).unwrap();
        assert!(matches!(d.driver().unwrap(), Driver::Ramp { .. }));
        let d: DrivenFile = serde_json::from_value(json!({"points": [[0, 1, "1"]], "f": [[0, 1, [1.0]]]})).unwrap();
        assert!(matches!(d.driver().unwrap(), Driver::Table(_)));
        let g: GadgetFile = serde_json::from_value(json!({"kind": "three_block", "M1": 0.5, "M2": [[1.5]], "M3": 0.1})).unwrap();
        assert!(matches!(g.spec().unwrap(), GadgetSpec::ThreeBlock { .. }));
        assert!(serde_json::from_value::<GadgetFile>(json!({"kind": "mystery"})).is_err());
    }
}
