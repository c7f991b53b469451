//! Stieltjes-type integrals against the prefix product `M(r) = M({s ≤ r})`.
//!
//! `H(F) = Σ (M(r_{i+1}) − M(r_i)) f(r_i)` over a partition `F` that contains both
//! endpoints; `∫ f dM` is the limit of `H` under refinement and `∫ M df` follows
//! from the by-parts identity.

use std::collections::BTreeMap;
use std::sync::Arc;

use crate::contprod::{FiniteSchedule, OrderKey, ScheduleGenerator};
use crate::error::{Error, Result};
use crate::family::{MatrixFamily, Status};
use crate::gate::CpGate;
use crate::linalg::{Matrix, ToleranceConfig, Vector};
use crate::scalar::Scalar;

/// Consecutive sub-tolerance increments required to accept a limit.
const STABLE_RUN: usize = 3;

/// Driving function `f`, sampled only at schedule keys.
#[derive(Clone)]
pub enum Driver<T> {
    Constant(Vector<T>),
    /// `offset + r · slope`.
    Ramp { offset: Vector<T>, slope: Vector<T> },
    /// `before` for keys below `at`, `after` from `at` on.
    Step { at: OrderKey, before: Vector<T>, after: Vector<T> },
    Table(BTreeMap<OrderKey, Vector<T>>),
    Custom(Arc<dyn Fn(&OrderKey) -> Option<Vector<T>> + Send + Sync>),
}

impl<T: Scalar> Driver<T> {
    pub fn sample(&self, key: &OrderKey) -> Result<Vector<T>> {
        match self {
            Driver::Constant(c) => Ok(c.clone()),
            Driver::Ramp { offset, slope } => Ok(offset + &slope.scale(T::lit(key.to_f64()))),
            Driver::Step { at, before, after } => Ok(if key < at { before.clone() } else { after.clone() }),
            Driver::Table(table) => table.get(key).cloned().ok_or(Error::UndefinedSample),
            Driver::Custom(f) => f(key).ok_or(Error::UndefinedSample),
        }
    }

    /// Dimension of the values, when it can be read off without sampling.
    fn dim(&self) -> Option<usize> {
        match self {
            Driver::Constant(c) => Some(c.dim()),
            Driver::Ramp { offset, .. } => Some(offset.dim()),
            Driver::Step { before, .. } => Some(before.dim()),
            Driver::Table(t) => t.values().next().map(Vector::dim),
            Driver::Custom(_) => None,
        }
    }
}

/// Index set of the integral.
#[derive(Clone)]
pub enum IndexSource {
    Finite(FiniteSchedule),
    Generator(Arc<dyn ScheduleGenerator>),
}

#[derive(Clone)]
pub struct DrivenSchedule<T> {
    pub source: IndexSource,
    pub driver: Driver<T>,
}

#[derive(Clone, Debug)]
pub struct IntegralResult<T> {
    pub value: Vector<T>,
    /// `M(r₊) f(r₊) − M(r₋) f(r₋)` at the final partition.
    pub boundary: Vector<T>,
    pub partitions_used: usize,
    pub converged_at: Option<usize>,
    pub residual: T,
    pub residuals: Vec<T>,
    pub cp_status: Option<Status>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Copy, Debug)]
pub struct IntegralOptions {
    pub max_level: usize,
    pub gate: CpGate,
}

impl Default for IntegralOptions {
    fn default() -> Self {
        Self { max_level: 16, gate: CpGate::default() }
    }
}

/// `M(r_i)` for every key of the schedule.
pub fn prefix_products<T: Scalar>(s: &FiniteSchedule, fam: &MatrixFamily<T>) -> Result<Vec<Matrix<T>>> {
    let labels = s.labels();
    fam.check_word(&labels)?;
    let mut acc = Matrix::identity(fam.dim());
    Ok(labels
        .iter()
        .map(|&j| {
            acc = &acc * fam.matrix(j);
            acc.clone()
        })
        .collect())
}

fn check_driver<T: Scalar>(driver: &Driver<T>, fam: &MatrixFamily<T>) -> Result<()> {
    match driver.dim() {
        Some(d) if d != fam.dim() => Err(Error::DimensionMismatch { expected: format!("values of dimension {}", fam.dim()), found: d.to_string() }),
        _ => Ok(()),
    }
}

fn sample_checked<T: Scalar>(driver: &Driver<T>, key: &OrderKey, dim: usize) -> Result<Vector<T>> {
    let v = driver.sample(key)?;
    if v.dim() != dim {
        return Err(Error::DimensionMismatch { expected: format!("values of dimension {dim}"), found: v.dim().to_string() });
    }
    Ok(v)
}

/// `H(F)` with `M` taken over the whole schedule. `partition` must be a strictly
/// increasing list of schedule keys containing both endpoints.
pub fn stieltjes_sum<T: Scalar>(
    fam: &MatrixFamily<T>,
    s: &FiniteSchedule,
    driver: &Driver<T>,
    partition: &[OrderKey],
) -> Result<Vector<T>> {
    check_driver(driver, fam)?;
    let entries = s.entries();
    let (Some(first), Some(last)) = (entries.first(), entries.last()) else {
        return Err(Error::EmptySchedule);
    };
    if partition.first() != Some(&first.0) || partition.last() != Some(&last.0) {
        return Err(Error::MissingEndpoint);
    }
    if let Some(i) = partition.windows(2).position(|w| w[0] >= w[1]) {
        return Err(Error::UnorderedKeys { index: i + 1 });
    }
    let prefixes = prefix_products(s, fam)?;
    let positions = partition
        .iter()
        .map(|k| entries.binary_search_by(|(e, _)| e.cmp(k)).map_err(|_| Error::ForeignKey))
        .collect::<Result<Vec<usize>>>()?;
    let mut h = Vector::zeros(fam.dim());
    for w in positions.windows(2) {
        let f = sample_checked(driver, &entries[w[0]].0, fam.dim())?;
        h = &h + &(&(&prefixes[w[1]] - &prefixes[w[0]]) * &f);
    }
    Ok(h)
}

/// `H` over every key of the schedule, with the boundary term.
fn full_partition_sum<T: Scalar>(fam: &MatrixFamily<T>, s: &FiniteSchedule, driver: &Driver<T>) -> Result<(Vector<T>, Vector<T>)> {
    let keys: Vec<OrderKey> = s.keys().cloned().collect();
    if keys.is_empty() {
        return Err(Error::EmptySchedule);
    }
    let h = stieltjes_sum(fam, s, driver, &keys)?;
    let prefixes = prefix_products(s, fam)?;
    let lo = sample_checked(driver, &keys[0], fam.dim())?;
    let hi = sample_checked(driver, keys.last().expect("nonempty"), fam.dim())?;
    let boundary = &(&prefixes[prefixes.len() - 1] * &hi) - &(&prefixes[0] * &lo);
    Ok((h, boundary))
}

/// `∫ f dM`: exact for a finite index set, otherwise the limit over generator
/// levels (each level must keep the same endpoints).
pub fn integral_f_dm<T: Scalar>(
    fam: &MatrixFamily<T>,
    d: &DrivenSchedule<T>,
    tol: &ToleranceConfig<T>,
    opts: &IntegralOptions,
) -> Result<IntegralResult<T>> {
    check_driver(&d.driver, fam)?;
    let gate = opts.gate.check(fam, tol)?;
    let generator = match &d.source {
        IndexSource::Finite(s) => {
            let (value, boundary) = full_partition_sum(fam, s, &d.driver)?;
            return Ok(IntegralResult {
                value,
                boundary,
                partitions_used: 1,
                converged_at: Some(0),
                residual: T::zero(),
                residuals: Vec::new(),
                cp_status: gate.status,
                warnings: gate.warnings,
            });
        }
        IndexSource::Generator(g) => g,
    };
    let base = generator.schedule(0);
    let endpoints = |s: &FiniteSchedule| (s.entries().first().map(|e| e.0.clone()), s.entries().last().map(|e| e.0.clone()));
    let expected = endpoints(&base);
    let (mut value, _) = full_partition_sum(fam, &base, &d.driver)?;
    let mut residuals = Vec::new();
    let mut run = 0;
    for level in 1..=opts.max_level {
        let s = generator.schedule(level);
        if endpoints(&s) != expected {
            return Err(Error::MissingEndpoint);
        }
        let (next, next_boundary) = full_partition_sum(fam, &s, &d.driver)?;
        let residual = (&next - &value).norm();
        residuals.push(residual);
        value = next;
        run = if residual <= tol.conv_tol { run + 1 } else { 0 };
        if run == STABLE_RUN {
            return Ok(IntegralResult {
                value,
                boundary: next_boundary,
                partitions_used: level + 1,
                converged_at: Some(level + 1 - STABLE_RUN),
                residual,
                residuals,
                cp_status: gate.status,
                warnings: gate.warnings,
            });
        }
    }
    Err(Error::NonConvergence {
        levels: residuals.len(),
        last: residuals.last().map_or(f64::NAN, |r| r.as_f64()),
        residuals: residuals.iter().map(|r| r.as_f64()).collect(),
    })
}

/// `∫ M df = M(r₊) f(r₊) − M(r₋) f(r₋) − ∫ f dM`.
pub fn integral_m_df<T: Scalar>(
    fam: &MatrixFamily<T>,
    d: &DrivenSchedule<T>,
    tol: &ToleranceConfig<T>,
    opts: &IntegralOptions,
) -> Result<IntegralResult<T>> {
    let mut r = integral_f_dm(fam, d, tol, opts)?;
    r.value = &r.boundary - &r.value;
    Ok(r)
}

/// `x(r) = ∫_{s ≤ r} M(s) df(s)` at each sample key, with `M` over the whole
/// schedule. `x(r₋) = 0`.
pub fn trajectory<T: Scalar>(
    fam: &MatrixFamily<T>,
    s: &FiniteSchedule,
    driver: &Driver<T>,
    samples: &[OrderKey],
) -> Result<Vec<(OrderKey, Vector<T>)>> {
    check_driver(driver, fam)?;
    let entries = s.entries();
    let start = &entries.first().ok_or(Error::EmptySchedule)?.0;
    let prefixes = prefix_products(s, fam)?;
    let values = entries.iter().map(|(k, _)| sample_checked(driver, k, fam.dim())).collect::<Result<Vec<_>>>()?;
    // h[i] = H over the first i + 1 keys.
    let mut h = Vec::with_capacity(entries.len());
    h.push(Vector::zeros(fam.dim()));
    for i in 1..entries.len() {
        let step = &(&prefixes[i] - &prefixes[i - 1]) * &values[i - 1];
        h.push(&h[i - 1] + &step);
    }
    let origin = &prefixes[0] * &values[0];
    samples
        .iter()
        .map(|key| {
            if key < start {
                return Err(Error::SampleBelowStart);
            }
            let i = entries.binary_search_by(|(e, _)| e.cmp(key)).map_err(|_| Error::ForeignKey)?;
            let x = &(&(&prefixes[i] * &values[i]) - &origin) - &h[i];
            Ok((key.clone(), x))
        })
        .collect()
}
