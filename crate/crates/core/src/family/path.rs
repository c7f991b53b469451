use crate::error::{Error, Result};
use crate::linalg::Vector;
use crate::scalar::Scalar;

use super::MatrixFamily;

/// A finite path `x_i = A_{j_i} x_{i-1}` of the discrete linear inclusion.
#[derive(Clone, Debug)]
pub struct PathTrace<T> {
    pub start: Vector<T>,
    pub labels: Vec<usize>,
    /// `points[0]` is the start; `points[i]` follows the `i`-th switch.
    pub points: Vec<Vector<T>>,
    pub step_norms: Vec<T>,
    pub total_variation: T,
}

impl<T: Scalar> PathTrace<T> {
    pub fn last(&self) -> &Vector<T> {
        self.points.last().expect("trace holds the start point")
    }

    /// Largest step over the final `window` switches.
    pub fn tail_step(&self, window: usize) -> T {
        let from = self.step_norms.len().saturating_sub(window);
        self.step_norms[from..].iter().fold(T::zero(), |m, &s| m.max(s))
    }
}

pub fn simulate_path<T: Scalar>(fam: &MatrixFamily<T>, word: &[usize], x0: &Vector<T>) -> Result<PathTrace<T>> {
    fam.check_word(word)?;
    if x0.dim() != fam.dim() {
        return Err(Error::DimensionMismatch { expected: format!("start of dimension {}", fam.dim()), found: format!("{}", x0.dim()) });
    }
    let mut points = Vec::with_capacity(word.len() + 1);
    let mut step_norms = Vec::with_capacity(word.len());
    points.push(x0.clone());
    for &j in word {
        let prev = points.last().expect("nonempty");
        let next = fam.matrix(j) * prev;
        step_norms.push((&next - prev).norm());
        points.push(next);
    }
    let total_variation = step_norms.iter().copied().sum();
    Ok(PathTrace { start: x0.clone(), labels: word.to_vec(), points, step_norms, total_variation })
}
