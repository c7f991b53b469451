use crate::linalg::{Matrix, ToleranceConfig};
use crate::scalar::Scalar;

use super::MatrixFamily;

#[derive(Clone, Debug)]
pub struct ClosureElement<T> {
    pub matrix: Matrix<T>,
    /// Shortest word (in reading order) producing the element.
    pub word: Vec<usize>,
}

/// Breadth-first approximation of the multiplicative semigroup `L(Σ)`.
#[derive(Clone, Debug)]
pub struct SemigroupClosure<T> {
    /// `elements[0]` is the identity (empty word).
    pub elements: Vec<ClosureElement<T>>,
    pub closed: bool,
    pub size_bound_hit: bool,
    tol: T,
}

impl<T: Scalar> SemigroupClosure<T> {
    /// Index of the element within `conv_tol` of `m` (2-norm), if any.
    pub fn find(&self, m: &Matrix<T>) -> Option<usize> {
        self.elements.iter().position(|e| e.matrix.within(m, self.tol))
    }

    /// Number of distinct non-identity products found.
    pub fn size(&self) -> usize {
        self.elements.len() - 1
    }
}

/// Closes `Σ` under right multiplication by generators, deduplicating within
/// `conv_tol`. Stops with `size_bound_hit` once more than `max_size`
/// non-identity elements are known.
pub fn semigroup_closure<T: Scalar>(fam: &MatrixFamily<T>, max_size: usize, tol: &ToleranceConfig<T>) -> SemigroupClosure<T> {
    let mut closure = SemigroupClosure {
        elements: vec![ClosureElement { matrix: Matrix::identity(fam.dim()), word: Vec::new() }],
        closed: false,
        size_bound_hit: false,
        tol: tol.conv_tol,
    };
    let mut cursor = 0;
    while cursor < closure.elements.len() {
        for (j, a) in fam.matrices().iter().enumerate() {
            let next = &closure.elements[cursor].matrix * a;
            if closure.find(&next).is_some() {
                continue;
            }
            if closure.size() >= max_size {
                closure.size_bound_hit = true;
                return closure;
            }
            let mut word = closure.elements[cursor].word.clone();
            word.push(j);
            closure.elements.push(ClosureElement { matrix: next, word });
        }
        cursor += 1;
    }
    closure.closed = true;
    closure
}
