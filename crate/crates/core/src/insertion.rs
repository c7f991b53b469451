//! Products grown by inserting factors at arbitrary positions.
//!
//! Every inserted factor receives an exact rational key strictly between its
//! neighbours, so the product after each step is the finite product of the
//! accumulated schedule. Front-only insertion reproduces left products,
//! back-only insertion right products.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::contprod::{finite_product, FiniteSchedule, OrderKey};
use crate::error::{Error, Result};
use crate::family::{MatrixFamily, Status};
use crate::gate::CpGate;
use crate::linalg::{Matrix, ToleranceConfig};
use crate::scalar::Scalar;

/// Number of trailing increments that must fall below `conv_tol`.
pub const CONVERGENCE_WINDOW: usize = 10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct InsertionStep {
    /// Slot in `0..=len`; `0` is the front, `len` the back.
    pub position: usize,
    pub label: usize,
}

#[derive(Clone, Debug)]
pub struct InsertionTrace<T> {
    /// Key assigned at each step, in step order.
    pub keys: Vec<OrderKey>,
    pub labels: Vec<usize>,
    /// Product after each snapshot (each step, or each batch).
    pub products: Vec<Matrix<T>>,
    /// Number of steps applied when each snapshot was taken.
    pub snapshot_steps: Vec<usize>,
    pub step_norms: Vec<T>,
    pub total_variation: T,
    pub converged: bool,
    /// Largest increment within the trailing window.
    pub window_residual: T,
    pub limit: Option<Matrix<T>>,
    pub cp_status: Option<Status>,
    pub warnings: Vec<String>,
}

impl<T: Scalar> InsertionTrace<T> {
    /// Schedule formed by the first `steps` insertions.
    pub fn schedule_after(&self, steps: usize) -> FiniteSchedule {
        let entries = self.keys[..steps].iter().cloned().zip(self.labels[..steps].iter().copied()).collect();
        FiniteSchedule::from_unsorted(entries).expect("insertion keys are distinct")
    }
}

/// Ordered product under construction.
#[derive(Default)]
struct Inserter {
    entries: Vec<(OrderKey, usize)>,
}

impl Inserter {
    fn insert(&mut self, step: InsertionStep, labels: usize) -> Result<OrderKey> {
        let len = self.entries.len();
        if step.position > len {
            return Err(Error::InvalidPosition { position: step.position, len });
        }
        if step.label >= labels {
            return Err(Error::LabelIndex { index: step.label, size: labels });
        }
        let key = match (step.position.checked_sub(1).map(|p| &self.entries[p].0), self.entries.get(step.position).map(|e| &e.0)) {
            (None, None) => OrderKey::zero(),
            (Some(left), None) => left.plus_one(),
            (None, Some(right)) => right.minus_one(),
            (Some(left), Some(right)) => left.midpoint(right),
        };
        self.entries.insert(step.position, (key.clone(), step.label));
        Ok(key)
    }

    fn schedule(&self) -> FiniteSchedule {
        FiniteSchedule::new(self.entries.clone()).expect("midpoint keys stay ordered")
    }
}

fn window_stats<T: Scalar>(step_norms: &[T], tol: &ToleranceConfig<T>) -> (bool, T) {
    let from = step_norms.len().saturating_sub(CONVERGENCE_WINDOW);
    let residual = step_norms[from..].iter().fold(T::zero(), |m, &s| m.max(s));
    (step_norms.len() >= CONVERGENCE_WINDOW && residual <= tol.conv_tol, residual)
}

/// Applies the batches in order, recomputing the full product after each batch.
pub fn run_batch_insertions<T: Scalar>(
    fam: &MatrixFamily<T>,
    batches: &[Vec<InsertionStep>],
    tol: &ToleranceConfig<T>,
    gate: &CpGate,
) -> Result<InsertionTrace<T>> {
    let report = gate.check(fam, tol)?;
    let mut inserter = Inserter::default();
    let mut keys = Vec::new();
    let mut labels = Vec::new();
    let mut products = Vec::with_capacity(batches.len());
    let mut snapshot_steps = Vec::with_capacity(batches.len());
    for batch in batches {
        for &step in batch {
            keys.push(inserter.insert(step, fam.len())?);
            labels.push(step.label);
        }
        products.push(finite_product(&inserter.schedule(), fam)?);
        snapshot_steps.push(keys.len());
    }
    let step_norms: Vec<T> = products.windows(2).map(|w| (&w[1] - &w[0]).operator_norm()).collect();
    let (converged, window_residual) = window_stats(&step_norms, tol);
    Ok(InsertionTrace {
        keys,
        labels,
        limit: converged.then(|| products.last().cloned()).flatten(),
        products,
        snapshot_steps,
        total_variation: step_norms.iter().copied().sum(),
        step_norms,
        converged,
        window_residual,
        cp_status: report.status,
        warnings: report.warnings,
    })
}

/// One snapshot per step.
pub fn run_insertions<T: Scalar>(
    fam: &MatrixFamily<T>,
    steps: &[InsertionStep],
    tol: &ToleranceConfig<T>,
    gate: &CpGate,
) -> Result<InsertionTrace<T>> {
    let batches: Vec<Vec<InsertionStep>> = steps.iter().map(|&s| vec![s]).collect();
    run_batch_insertions(fam, &batches, tol, gate)
}

/// Uniformly random steps for sequence `sequence_id`. Each sequence draws from its
/// own ChaCha stream, so a shorter run is a prefix of a longer one.
pub fn random_steps(labels: usize, length: usize, seed: u64, sequence_id: u64) -> Vec<InsertionStep> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(sequence_id);
    (0..length).map(|i| InsertionStep { position: rng.random_range(0..=i), label: rng.random_range(0..labels) }).collect()
}

/// Final left-to-right slot of every step.
fn final_slots(steps: &[InsertionStep]) -> Vec<usize> {
    let mut order: Vec<usize> = Vec::with_capacity(steps.len());
    for (i, s) in steps.iter().enumerate() {
        order.insert(s.position, i);
    }
    let mut slots = vec![0; steps.len()];
    for (slot, &i) in order.iter().enumerate() {
        slots[i] = slot;
    }
    slots
}

/// Product over slots that are filled one at a time; empty slots act as `I`.
struct SegmentProduct<T> {
    size: usize,
    tree: Vec<Matrix<T>>,
}

impl<T: Scalar> SegmentProduct<T> {
    fn new(slots: usize, dim: usize) -> Self {
        let size = slots.next_power_of_two().max(1);
        Self { size, tree: vec![Matrix::identity(dim); 2 * size] }
    }

    fn set(&mut self, slot: usize, m: &Matrix<T>) {
        let mut node = self.size + slot;
        self.tree[node] = m.clone();
        while node > 1 {
            node /= 2;
            self.tree[node] = &self.tree[2 * node] * &self.tree[2 * node + 1];
        }
    }

    fn product(&self) -> &Matrix<T> {
        &self.tree[1]
    }
}

/// Step norms of the products produced by `steps`, via a segment tree over the
/// final slot order.
pub fn insertion_increments<T: Scalar>(fam: &MatrixFamily<T>, steps: &[InsertionStep]) -> Result<(Vec<T>, Matrix<T>)> {
    for (i, s) in steps.iter().enumerate() {
        if s.position > i {
            return Err(Error::InvalidPosition { position: s.position, len: i });
        }
        if s.label >= fam.len() {
            return Err(Error::LabelIndex { index: s.label, size: fam.len() });
        }
    }
    let slots = final_slots(steps);
    let mut tree = SegmentProduct::new(steps.len(), fam.dim());
    let mut norms = Vec::with_capacity(steps.len().saturating_sub(1));
    let mut prev: Option<Matrix<T>> = None;
    for (s, &slot) in steps.iter().zip(&slots) {
        tree.set(slot, fam.matrix(s.label));
        let current = tree.product().clone();
        if let Some(p) = &prev {
            norms.push((&current - p).operator_norm());
        }
        prev = Some(current);
    }
    Ok((norms, prev.unwrap_or_else(|| Matrix::identity(fam.dim()))))
}

#[derive(Clone, Debug, Serialize)]
pub struct SequenceStat {
    pub sequence_id: usize,
    pub length: usize,
    pub variation: f64,
    pub converged: bool,
    pub window_residual: f64,
    /// `cumulative[i]` is the variation after `i + 2` steps.
    #[serde(skip)]
    pub cumulative: Vec<f64>,
}

impl SequenceStat {
    /// Variation of the first `steps` products.
    pub fn variation_at(&self, steps: usize) -> f64 {
        if steps < 2 {
            0.0
        } else {
            self.cumulative[(steps - 2).min(self.cumulative.len() - 1)]
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct InsertionStats {
    pub sequences: Vec<SequenceStat>,
    pub max_variation: f64,
    pub mean_variation: f64,
    pub std_variation: f64,
    pub all_converged: bool,
    pub cp_status: Option<Status>,
    pub warnings: Vec<String>,
}

impl InsertionStats {
    pub fn max_variation_at(&self, steps: usize) -> f64 {
        self.sequences.iter().map(|s| s.variation_at(steps)).fold(0.0, f64::max)
    }
}

/// Variation statistics over independent uniformly random insertion sequences.
pub fn random_insertion_experiment<T: Scalar>(
    fam: &MatrixFamily<T>,
    num_sequences: usize,
    length: usize,
    seed: u64,
    tol: &ToleranceConfig<T>,
    gate: &CpGate,
) -> Result<InsertionStats> {
    let report = gate.check(fam, tol)?;
    let sequences = (0..num_sequences)
        .into_par_iter()
        .map(|id| {
            let steps = random_steps(fam.len(), length, seed, id as u64);
            let (norms, _) = insertion_increments(fam, &steps)?;
            let (converged, residual) = window_stats(&norms, tol);
            let cumulative: Vec<f64> = norms
                .iter()
                .scan(0.0f64, |acc, n| {
                    *acc += n.as_f64();
                    Some(*acc)
                })
                .collect();
            Ok(SequenceStat {
                sequence_id: id,
                length,
                variation: cumulative.last().copied().unwrap_or(0.0),
                converged,
                window_residual: residual.as_f64(),
                cumulative,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let count = sequences.len().max(1) as f64;
    let mean = sequences.iter().map(|s| s.variation).sum::<f64>() / count;
    let var = sequences.iter().map(|s| (s.variation - mean).powi(2)).sum::<f64>() / count;
    Ok(InsertionStats {
        max_variation: sequences.iter().map(|s| s.variation).fold(0.0, f64::max),
        mean_variation: mean,
        std_variation: var.sqrt(),
        all_converged: sequences.iter().all(|s| s.converged),
        sequences,
        cp_status: report.status,
        warnings: report.warnings,
    })
}
