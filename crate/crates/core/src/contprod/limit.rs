use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::{oblique_projection, MatrixFamily, Status};
use crate::gate::CpGate;
use crate::linalg::{Matrix, ToleranceConfig};
use crate::scalar::Scalar;

use super::generator::ScheduleGenerator;
use super::partition::complete_interval_count;
use super::schedule::finite_product;

/// Level at which a declared-complete generator is sampled for its active labels.
const PROBE_LEVEL: usize = 6;
/// Consecutive sub-tolerance increments required to accept a limit.
const STABLE_RUN: usize = 3;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum ProductMode {
    Finite,
    Limit,
    Projection,
}

#[derive(Clone, Debug)]
pub struct ProductResult<T> {
    pub matrix: Matrix<T>,
    pub mode: ProductMode,
    /// Highest level evaluated.
    pub levels_used: usize,
    /// First level of the final run of sub-tolerance increments.
    pub converged_at: Option<usize>,
    /// Last increment `‖M_k − M_{k−1}‖`.
    pub residual: T,
    pub residuals: Vec<T>,
    pub complete_counts: Vec<usize>,
    /// Labels whose projection was used in projection mode.
    pub active_labels: Vec<usize>,
    pub cp_status: Option<Status>,
    pub warnings: Vec<String>,
}

#[derive(Clone, Copy, Debug)]
pub struct LimitOptions {
    pub max_level: usize,
    /// Levels with more points than this end the run unconverged.
    pub max_points: usize,
    pub gate: CpGate,
}

impl Default for LimitOptions {
    fn default() -> Self {
        Self { max_level: 64, max_points: 1 << 20, gate: CpGate::default() }
    }
}

/// Net limit of `M(schedule(k))`, or the projection `P_J` for a generator
/// declared infinitely complete.
pub fn limit_product<T: Scalar>(
    g: &dyn ScheduleGenerator,
    fam: &MatrixFamily<T>,
    tol: &ToleranceConfig<T>,
    opts: &LimitOptions,
) -> Result<ProductResult<T>> {
    let gate = opts.gate.check(fam, tol)?;
    let mut warnings = gate.warnings;

    if g.declared_infinitely_complete() {
        let probe = g.schedule(opts.max_level.min(PROBE_LEVEL));
        let active: Vec<usize> = probe.label_set().into_iter().collect();
        if active.is_empty() {
            return Err(Error::EmptySchedule);
        }
        fam.check_word(&active)?;
        if active.len() < fam.len() {
            warnings.push(format!("only {} of {} labels occur; projecting onto the active subfamily", active.len(), fam.len()));
        }
        return Ok(ProductResult {
            matrix: oblique_projection(fam, &active, tol)?,
            mode: ProductMode::Projection,
            levels_used: 0,
            converged_at: None,
            residual: T::zero(),
            residuals: Vec::new(),
            complete_counts: vec![complete_interval_count(&probe, fam)],
            active_labels: active,
            cp_status: gate.status,
            warnings,
        });
    }

    let mut schedule = g.schedule(0);
    let mut current = finite_product(&schedule, fam)?;
    let mut residuals = Vec::new();
    let mut complete_counts = vec![complete_interval_count(&schedule, fam)];
    let mut run = 0;
    let mut warned = false;
    for level in 1..=opts.max_level {
        let next_schedule = g.schedule(level);
        if next_schedule.len() > opts.max_points {
            warnings.push(format!("level {level} exceeds {} points", opts.max_points));
            break;
        }
        if !schedule.is_subset_of(&next_schedule) {
            return Err(Error::Invalid(format!("generator is not nested between levels {} and {level}", level - 1)));
        }
        let next = finite_product(&next_schedule, fam)?;
        let residual = (&next - &current).operator_norm();
        residuals.push(residual);
        complete_counts.push(complete_interval_count(&next_schedule, fam));
        if !warned && growing_completeness(&complete_counts) {
            warnings.push("complete-interval count keeps growing; the schedule may be infinitely complete".into());
            warned = true;
        }
        current = next;
        schedule = next_schedule;
        run = if residual <= tol.conv_tol { run + 1 } else { 0 };
        if run == STABLE_RUN {
            return Ok(ProductResult {
                matrix: current,
                mode: ProductMode::Limit,
                levels_used: level,
                converged_at: Some(level + 1 - STABLE_RUN),
                residual,
                residuals,
                complete_counts,
                active_labels: schedule.label_set().into_iter().collect(),
                cp_status: gate.status,
                warnings,
            });
        }
    }
    Err(Error::NonConvergence {
        levels: residuals.len(),
        last: residuals.last().map_or(f64::NAN, |r| r.as_f64()),
        residuals: residuals.iter().map(|r| r.as_f64()).collect(),
    })
}

/// Strictly increasing over the last three levels and already large.
fn growing_completeness(counts: &[usize]) -> bool {
    counts.len() >= 4 && counts[counts.len() - 1] >= 8 && counts[counts.len() - 4..].windows(2).all(|w| w[0] < w[1])
}

/// Exact product of a finite schedule wrapped as a result.
pub fn evaluate_finite<T: Scalar>(s: &super::FiniteSchedule, fam: &MatrixFamily<T>) -> Result<ProductResult<T>> {
    Ok(ProductResult {
        matrix: finite_product(s, fam)?,
        mode: ProductMode::Finite,
        levels_used: 0,
        converged_at: None,
        residual: T::zero(),
        residuals: Vec::new(),
        complete_counts: vec![complete_interval_count(s, fam)],
        active_labels: s.label_set().into_iter().collect(),
        cp_status: None,
        warnings: Vec::new(),
    })
}
