use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::MatrixFamily;
use crate::linalg::Matrix;
use crate::scalar::Scalar;

use super::key::OrderKey;

/// Finite subset of an ordered index set with a label at every point.
#[derive(Clone, Debug, PartialEq, Eq, Default)]
pub struct FiniteSchedule {
    entries: Vec<(OrderKey, usize)>,
}

impl FiniteSchedule {
    /// Entries must have strictly increasing keys.
    pub fn new(entries: Vec<(OrderKey, usize)>) -> Result<Self> {
        if let Some(i) = entries.windows(2).position(|w| w[0].0 >= w[1].0) {
            return Err(Error::UnorderedKeys { index: i + 1 });
        }
        Ok(Self { entries })
    }

    /// Sorts by key first; duplicate keys are rejected.
    pub fn from_unsorted(mut entries: Vec<(OrderKey, usize)>) -> Result<Self> {
        entries.sort_by(|a, b| a.0.cmp(&b.0));
        Self::new(entries)
    }

    /// Schedule whose labels are checked against `fam`.
    pub fn for_family<T: Scalar>(fam: &MatrixFamily<T>, entries: Vec<(OrderKey, usize)>) -> Result<Self> {
        let s = Self::new(entries)?;
        fam.check_word(&s.labels())?;
        Ok(s)
    }

    /// Keys `0, 1, 2, ...` carrying the given labels.
    pub fn from_word(word: &[usize]) -> Self {
        Self { entries: word.iter().enumerate().map(|(i, &j)| (OrderKey::integer(i as i64), j)).collect() }
    }

    pub fn empty() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn entries(&self) -> &[(OrderKey, usize)] {
        &self.entries
    }

    pub fn keys(&self) -> impl Iterator<Item = &OrderKey> {
        self.entries.iter().map(|(k, _)| k)
    }

    pub fn labels(&self) -> Vec<usize> {
        self.entries.iter().map(|&(_, j)| j).collect()
    }

    pub fn label_set(&self) -> BTreeSet<usize> {
        self.entries.iter().map(|&(_, j)| j).collect()
    }

    /// Points with key `< at` and points with key `>= at`.
    pub fn split_at_key(&self, at: &OrderKey) -> (Self, Self) {
        let cut = self.entries.partition_point(|(k, _)| k < at);
        (Self { entries: self.entries[..cut].to_vec() }, Self { entries: self.entries[cut..].to_vec() })
    }

    /// Union of two schedules on disjoint key sets.
    pub fn union(&self, other: &Self) -> Result<Self> {
        let mut entries = self.entries.clone();
        entries.extend(other.entries.iter().cloned());
        Self::from_unsorted(entries)
    }

    /// Whether every entry of `self` also occurs in `other` with the same label.
    pub fn is_subset_of(&self, other: &Self) -> bool {
        let mut it = other.entries.iter().peekable();
        'outer: for (k, j) in &self.entries {
            while let Some((k2, j2)) = it.next() {
                if k2 == k {
                    if j2 == j {
                        continue 'outer;
                    }
                    return false;
                }
                if k2 > k {
                    return false;
                }
            }
            return false;
        }
        true
    }

    /// Order-reversed copy (keys negated).
    pub fn reversed(&self) -> Self {
        Self { entries: self.entries.iter().rev().map(|(k, j)| (k.neg(), *j)).collect() }
    }
}

/// `M(S) = A(s_1) ... A(s_k)` with the smallest key leftmost; the empty schedule gives `I`.
pub fn finite_product<T: Scalar>(s: &FiniteSchedule, fam: &MatrixFamily<T>) -> Result<Matrix<T>> {
    let word = s.labels();
    fam.check_word(&word)?;
    Ok(fam.product(&word))
}

/// `M(S_1) M(S_2)` for `S_1` entirely below `S_2`.
pub fn concat_product<T: Scalar>(s1: &FiniteSchedule, s2: &FiniteSchedule, fam: &MatrixFamily<T>) -> Result<Matrix<T>> {
    if let (Some((last, _)), Some((first, _))) = (s1.entries.last(), s2.entries.first()) {
        if last >= first {
            return Err(Error::InterleavedKeys);
        }
    }
    Ok(&finite_product(s1, fam)? * &finite_product(s2, fam)?)
}

/// Which of the four prefix/suffix sets is attached to a point `r`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub enum PrefixMode {
    /// `{p ≤ r}`
    AtMost,
    /// `{p < r}`
    Below,
    /// `{p ≥ r}`
    AtLeast,
    /// `{p > r}`
    Above,
}

/// `Σ ‖M(S(r_{i+1})) − M(S(r_i))‖` over consecutive keys, with the per-step norms.
pub fn prefix_variation<T: Scalar>(s: &FiniteSchedule, fam: &MatrixFamily<T>, mode: PrefixMode) -> Result<(T, Vec<T>)> {
    let word = s.labels();
    fam.check_word(&word)?;
    let n = word.len();
    if n < 2 {
        return Ok((T::zero(), Vec::new()));
    }
    // partial[i] is the product attached to the i-th key.
    let mut partial = Vec::with_capacity(n);
    match mode {
        PrefixMode::AtMost | PrefixMode::Below => {
            let mut acc = Matrix::identity(fam.dim());
            for &j in &word {
                let next = &acc * fam.matrix(j);
                partial.push(if mode == PrefixMode::AtMost { next.clone() } else { acc });
                acc = next;
            }
        }
        PrefixMode::AtLeast | PrefixMode::Above => {
            let mut acc = Matrix::identity(fam.dim());
            for &j in word.iter().rev() {
                let next = fam.matrix(j) * &acc;
                partial.push(if mode == PrefixMode::AtLeast { next.clone() } else { acc });
                acc = next;
            }
            partial.reverse();
        }
    }
    let steps: Vec<T> = partial.windows(2).map(|w| (&w[1] - &w[0]).operator_norm()).collect();
    Ok((steps.iter().copied().sum(), steps))
}

/// One point of a reindexed schedule: the image key and the product over its fiber.
#[derive(Clone, Debug)]
pub struct QuotientPoint<T> {
    pub key: OrderKey,
    pub matrix: Matrix<T>,
    /// Positions `[start, end)` of the original schedule mapped to `key`.
    pub fiber: (usize, usize),
}

#[derive(Clone, Debug)]
pub struct QuotientSchedule<T> {
    pub points: Vec<QuotientPoint<T>>,
    dim: usize,
}

impl<T: Scalar> QuotientSchedule<T> {
    /// Product over the points at the given (sorted, distinct) positions.
    pub fn product_of(&self, positions: &[usize]) -> Result<Matrix<T>> {
        if let Some(i) = positions.windows(2).position(|w| w[0] >= w[1]) {
            return Err(Error::UnorderedKeys { index: i + 1 });
        }
        let mut acc = Matrix::identity(self.dim);
        for &p in positions {
            let point = self.points.get(p).ok_or(Error::LabelIndex { index: p, size: self.points.len() })?;
            acc = &acc * &point.matrix;
        }
        Ok(acc)
    }

    pub fn product(&self) -> Matrix<T> {
        self.points.iter().fold(Matrix::identity(self.dim), |acc, p| &acc * &p.matrix)
    }
}

/// Pushes the schedule forward along an order-preserving key map; keys with a
/// common image merge into one point carrying the product of their fiber.
pub fn monotone_reindex<T: Scalar>(
    s: &FiniteSchedule,
    map: impl Fn(&OrderKey) -> OrderKey,
    fam: &MatrixFamily<T>,
) -> Result<QuotientSchedule<T>> {
    fam.check_word(&s.labels())?;
    let images: Vec<OrderKey> = s.keys().map(&map).collect();
    if let Some(i) = images.windows(2).position(|w| w[0] > w[1]) {
        return Err(Error::NonMonotone { index: i });
    }
    let mut points: Vec<QuotientPoint<T>> = Vec::new();
    for (i, (image, &(_, j))) in images.into_iter().zip(s.entries()).enumerate() {
        match points.last_mut() {
            Some(last) if last.key == image => {
                last.matrix = &last.matrix * fam.matrix(j);
                last.fiber.1 = i + 1;
            }
            _ => points.push(QuotientPoint { key: image, matrix: fam.matrix(j).clone(), fiber: (i, i + 1) }),
        }
    }
    Ok(QuotientSchedule { points, dim: fam.dim() })
}
