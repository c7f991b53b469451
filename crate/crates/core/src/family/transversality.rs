use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{self, Matrix, Subspace, ToleranceConfig};
use crate::scalar::Scalar;

use super::verdict::{Status, TransversalityDefect, Verdict, Witness};
use super::{nonempty_subsets, MatrixFamily};

/// Subset enumeration is exponential; beyond this many labels callers list subsets.
pub const MAX_ENUMERATED_LABELS: usize = 20;

/// Common fixed subspace `N_{J'} = ∩ N(I - A_j)` over the subset.
pub fn n_subspace<T: Scalar>(fam: &MatrixFamily<T>, subset: &[usize], tol: &ToleranceConfig<T>) -> Result<Subspace<T>> {
    let subset = fam.check_subset(subset)?;
    let mut acc = Subspace::full(fam.dim(), tol.rank_tol);
    for &j in &subset {
        let fixed = linalg::nullspace(&displacement(fam, j), tol)?;
        acc = acc.intersection(&fixed)?;
    }
    Ok(acc)
}

/// Displacement span `R_{J'} = span R(I - A_j)` over the subset.
pub fn r_subspace<T: Scalar>(fam: &MatrixFamily<T>, subset: &[usize], tol: &ToleranceConfig<T>) -> Result<Subspace<T>> {
    let subset = fam.check_subset(subset)?;
    let mut acc = Subspace::zero(fam.dim(), tol.rank_tol);
    for &j in &subset {
        acc = acc.sum(&linalg::range(&displacement(fam, j), tol)?)?;
    }
    Ok(acc)
}

fn displacement<T: Scalar>(fam: &MatrixFamily<T>, j: usize) -> Matrix<T> {
    &Matrix::identity(fam.dim()) - fam.matrix(j)
}

#[derive(Clone, Debug, Serialize)]
pub struct SubsetReport {
    pub subset: Vec<usize>,
    pub dim_n: usize,
    pub dim_r: usize,
    pub dim_intersection: usize,
    pub dim_sum: usize,
    pub zero_transversal: bool,
    pub full_transversal: bool,
}

impl SubsetReport {
    pub fn transversal(&self) -> bool {
        self.zero_transversal && self.full_transversal
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct TransversalityReport {
    pub ambient_dim: usize,
    pub subsets: Vec<SubsetReport>,
    pub zero_transversal: bool,
    pub full_transversal: bool,
}

impl TransversalityReport {
    pub fn transversal(&self) -> bool {
        self.zero_transversal && self.full_transversal
    }

    /// First subset where `N ∩ R ≠ 0`.
    pub fn zero_failure(&self) -> Option<&SubsetReport> {
        self.subsets.iter().find(|s| !s.zero_transversal)
    }

    /// First subset where `N + R ≠ R^n`.
    pub fn full_failure(&self) -> Option<&SubsetReport> {
        self.subsets.iter().find(|s| !s.full_transversal)
    }
}

fn subset_report<T: Scalar>(fam: &MatrixFamily<T>, subset: Vec<usize>, tol: &ToleranceConfig<T>) -> Result<SubsetReport> {
    let n = n_subspace(fam, &subset, tol)?;
    let r = r_subspace(fam, &subset, tol)?;
    let cap = n.intersection(&r)?;
    let cup = n.sum(&r)?;
    Ok(SubsetReport {
        subset,
        dim_n: n.dim(),
        dim_r: r.dim(),
        dim_intersection: cap.dim(),
        dim_sum: cup.dim(),
        zero_transversal: cap.is_zero(),
        full_transversal: cup.is_full(),
    })
}

/// Checks `N_{J'} ⊕ R_{J'} = R^n` for every nonempty subset.
pub fn check_transversality<T: Scalar>(fam: &MatrixFamily<T>, tol: &ToleranceConfig<T>) -> Result<TransversalityReport> {
    if fam.len() > MAX_ENUMERATED_LABELS {
        return Err(Error::TooManyLabels { labels: fam.len(), limit: MAX_ENUMERATED_LABELS });
    }
    check_subsets(fam, nonempty_subsets(fam.len()), tol)
}

/// Transversality restricted to caller-supplied subsets.
pub fn check_subsets<T: Scalar>(
    fam: &MatrixFamily<T>,
    subsets: impl IntoIterator<Item = Vec<usize>>,
    tol: &ToleranceConfig<T>,
) -> Result<TransversalityReport> {
    let subsets = subsets.into_iter().map(|s| subset_report(fam, s, tol)).collect::<Result<Vec<_>>>()?;
    Ok(TransversalityReport {
        ambient_dim: fam.dim(),
        zero_transversal: subsets.iter().all(|s| s.zero_transversal),
        full_transversal: subsets.iter().all(|s| s.full_transversal),
        subsets,
    })
}

/// Exact three-valued transversality verdict; `Unknown` only when the family is too
/// large to enumerate.
pub fn transversality_verdict<T: Scalar>(fam: &MatrixFamily<T>, tol: &ToleranceConfig<T>) -> Result<(Verdict<T>, Option<TransversalityReport>)> {
    let report = match check_transversality(fam, tol) {
        Ok(r) => r,
        Err(Error::TooManyLabels { .. }) => {
            return Ok((Verdict::unknown("too_many_labels"), None));
        }
        Err(e) => return Err(e),
    };
    let verdict = if report.transversal() {
        Verdict::yes("subset_enumeration")
    } else {
        let (entry, defect) = match report.zero_failure() {
            Some(s) => (s, TransversalityDefect::Intersection),
            None => (report.full_failure().expect("some subset fails"), TransversalityDefect::Sum),
        };
        Verdict::no("subset_enumeration", Witness::subset(entry, defect))
    };
    debug_assert!(verdict.status != Status::CertifiedNo || verdict.witness.is_some());
    Ok((verdict, Some(report)))
}

/// Projection onto `N_{J'}` along `R_{J'}`.
pub fn oblique_projection<T: Scalar>(fam: &MatrixFamily<T>, subset: &[usize], tol: &ToleranceConfig<T>) -> Result<Matrix<T>> {
    let n = n_subspace(fam, subset, tol)?;
    let r = r_subspace(fam, subset, tol)?;
    linalg::oblique_projector(&n, &r)
}
