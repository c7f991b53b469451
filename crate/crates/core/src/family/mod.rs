//! Finite matrix families and their convergence properties.
//!
//! Words are sequences of label indices. `product(w)` multiplies in reading
//! order (`A_{w_1} A_{w_2} ...`), `left_product(w)` in switching order
//! (`... A_{w_2} A_{w_1}`), the latter being the state of a discrete linear
//! inclusion after applying `w`.

mod closure;
mod path;
mod transversality;
mod verdict;

pub use closure::{semigroup_closure, ClosureElement, SemigroupClosure};
pub use path::{simulate_path, PathTrace};
pub use transversality::{
    check_subsets, check_transversality, n_subspace, oblique_projection, r_subspace, transversality_verdict, SubsetReport,
    TransversalityReport, MAX_ENUMERATED_LABELS,
};
pub use verdict::{
    cp_verdict, lcp_verdict, periodic_left_behaviour, rcp_verdict, replay_word_witness, rho_one_structure_check, Budget, ProductSide,
    CpReport, PeriodicBehaviour, RhoOneReport, Status, TransversalityDefect, Verdict, Witness, WitnessReplay,
};

use std::collections::HashSet;

use crate::error::{Error, Result};
use crate::linalg::Matrix;
use crate::scalar::Scalar;

/// Labeled finite set of square matrices of a common size.
#[derive(Clone, Debug)]
pub struct MatrixFamily<T> {
    dim: usize,
    labels: Vec<String>,
    matrices: Vec<Matrix<T>>,
}

impl<T: Scalar> MatrixFamily<T> {
    pub fn new(labels: Vec<String>, matrices: Vec<Matrix<T>>) -> Result<Self> {
        if matrices.is_empty() {
            return Err(Error::EmptyFamily);
        }
        if labels.len() != matrices.len() {
            return Err(Error::Invalid(format!("{} labels for {} matrices", labels.len(), matrices.len())));
        }
        let mut seen = HashSet::new();
        if let Some(dup) = labels.iter().find(|l| !seen.insert(l.as_str())) {
            return Err(Error::DuplicateLabel(dup.clone()));
        }
        let dim = matrices[0].rows();
        for m in &matrices {
            if !m.is_square() || m.rows() != dim {
                return Err(Error::DimensionMismatch {
                    expected: format!("{dim}x{dim}"),
                    found: format!("{}x{}", m.rows(), m.cols()),
                });
            }
        }
        Ok(Self { dim, labels, matrices })
    }

    /// Family labelled `1..=k` in the given order.
    pub fn numbered(matrices: Vec<Matrix<T>>) -> Result<Self> {
        let labels = (1..=matrices.len()).map(|k| k.to_string()).collect();
        Self::new(labels, matrices)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.matrices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.matrices.is_empty()
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn matrices(&self) -> &[Matrix<T>] {
        &self.matrices
    }

    pub fn matrix(&self, index: usize) -> &Matrix<T> {
        &self.matrices[index]
    }

    pub fn label(&self, index: usize) -> &str {
        &self.labels[index]
    }

    pub fn index_of(&self, label: &str) -> Result<usize> {
        self.labels.iter().position(|l| l == label).ok_or_else(|| Error::UnknownLabel(label.to_string()))
    }

    pub fn indices_of<S: AsRef<str>>(&self, labels: &[S]) -> Result<Vec<usize>> {
        labels.iter().map(|l| self.index_of(l.as_ref())).collect()
    }

    pub fn check_word(&self, word: &[usize]) -> Result<()> {
        match word.iter().find(|&&j| j >= self.len()) {
            Some(&index) => Err(Error::LabelIndex { index, size: self.len() }),
            None => Ok(()),
        }
    }

    /// Normalizes a subset: sorted, deduplicated, nonempty, in range.
    pub fn check_subset(&self, subset: &[usize]) -> Result<Vec<usize>> {
        self.check_word(subset)?;
        let mut s = subset.to_vec();
        s.sort_unstable();
        s.dedup();
        if s.is_empty() {
            return Err(Error::EmptySubset);
        }
        Ok(s)
    }

    pub fn format_word(&self, word: &[usize]) -> String {
        word.iter().map(|&j| self.labels[j].as_str()).collect::<Vec<_>>().join(",")
    }

    /// `A_{w_1} A_{w_2} ... A_{w_m}`; identity for the empty word.
    pub fn product(&self, word: &[usize]) -> Matrix<T> {
        word.iter().fold(Matrix::identity(self.dim), |acc, &j| &acc * &self.matrices[j])
    }

    /// `A_{w_m} ... A_{w_1}`.
    pub fn left_product(&self, word: &[usize]) -> Matrix<T> {
        word.iter().fold(Matrix::identity(self.dim), |acc, &j| &self.matrices[j] * &acc)
    }

    /// The dual family `{A_jᵀ}` with the same labels.
    pub fn transpose(&self) -> Self {
        Self { dim: self.dim, labels: self.labels.clone(), matrices: self.matrices.iter().map(Matrix::transpose).collect() }
    }

    pub fn scaled(&self, c: T) -> Self {
        Self { dim: self.dim, labels: self.labels.clone(), matrices: self.matrices.iter().map(|m| m.scale(c)).collect() }
    }

    /// The subfamily on `subset` (indices into this family).
    pub fn subfamily(&self, subset: &[usize]) -> Result<Self> {
        let subset = self.check_subset(subset)?;
        Self::new(
            subset.iter().map(|&j| self.labels[j].clone()).collect(),
            subset.iter().map(|&j| self.matrices[j].clone()).collect(),
        )
    }
}

/// Rotates and shortens an eventually periodic word `prefix · period^∞` to
/// canonical form: the prefix is as short as possible and the period is primitive.
pub fn canonical_periodic(prefix: &[usize], period: &[usize]) -> (Vec<usize>, Vec<usize>) {
    let mut prefix = prefix.to_vec();
    let mut period = minimal_period(period);
    while let (Some(&p), Some(&q)) = (prefix.last(), period.last()) {
        if p != q {
            break;
        }
        prefix.pop();
        period.rotate_right(1);
    }
    (prefix, period)
}

/// Shortest `u` with `word = u^k`.
pub fn minimal_period(word: &[usize]) -> Vec<usize> {
    let n = word.len();
    (1..=n)
        .find(|&p| n % p == 0 && (p..n).all(|i| word[i] == word[i - p]))
        .map_or_else(Vec::new, |p| word[..p].to_vec())
}

/// Pre-necklace and Lyndon tests in one pass.
pub(crate) fn lyndon_status(word: &[usize]) -> (bool, bool) {
    let mut p = 1;
    for i in 1..word.len() {
        if word[i] < word[i - p] {
            return (false, false);
        }
        if word[i] > word[i - p] {
            p = i + 1;
        }
    }
    (true, p == word.len())
}

/// All nonempty subsets of `0..k` in increasing bitmask order.
pub(crate) fn nonempty_subsets(k: usize) -> impl Iterator<Item = Vec<usize>> {
    (1u64..(1u64 << k)).map(move |mask| (0..k).filter(|&j| mask >> j & 1 == 1).collect())
}
