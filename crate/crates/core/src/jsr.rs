//! Joint spectral radius bounds by exhaustive product-tree search.
//!
//! The lower bound is `max ρ(P)^{1/m}` over products of length `m ≤ depth`,
//! evaluated on Lyndon words only (rotations and powers of a word share the
//! normalized spectral radius). The upper bound walks the same tree, closing a
//! branch as soon as `‖P‖^{1/m}` drops strictly below the lower bound; the
//! leaves of any such tree form a complete prefix code, so the largest leaf
//! value bounds `ρ(Σ)`. Truncating the tree at each `m ≤ depth` gives one
//! bound per level and the smallest is reported.

use rayon::prelude::*;
use serde::Serialize;

use crate::family::{lyndon_status, MatrixFamily, Status, Verdict, Witness};
use crate::linalg::{spectral_radius, Matrix, ToleranceConfig};
use crate::scalar::Scalar;

pub const DEFAULT_NODE_BUDGET: usize = 1_000_000;

#[derive(Clone, Debug, Serialize)]
pub struct JsrBounds<T> {
    pub lower: T,
    pub upper: T,
    pub depth_reached: usize,
    /// Word (reading order) whose normalized spectral radius equals `lower`.
    pub witness_word: Vec<usize>,
    pub budget_exhausted: bool,
    pub nodes: usize,
}

#[derive(Clone, Debug)]
pub struct LowerBound<T> {
    pub value: T,
    pub word: Vec<usize>,
    pub depth_reached: usize,
    pub budget_exhausted: bool,
}

/// Deepest level whose full tree fits in the node budget.
fn effective_depth(labels: usize, depth: usize, node_budget: usize) -> usize {
    let mut total = 0usize;
    let mut level = 1usize;
    for m in 1..=depth {
        level = level.saturating_mul(labels);
        total = total.saturating_add(level);
        if total > node_budget {
            return m - 1;
        }
    }
    depth
}

#[derive(Clone)]
struct Best<T> {
    value: T,
    word: Vec<usize>,
}

impl<T: Scalar> Best<T> {
    /// Larger value wins, then the shorter word; otherwise the incumbent stays.
    fn offer(&mut self, value: T, word: &[usize]) {
        if value > self.value || (value == self.value && word.len() < self.word.len()) {
            self.value = value;
            self.word = word.to_vec();
        }
    }

    fn merge(mut self, other: Self) -> Self {
        if !other.word.is_empty() {
            self.offer(other.value, &other.word);
        }
        self
    }
}

fn lower_subtree<T: Scalar>(fam: &MatrixFamily<T>, word: &mut Vec<usize>, product: &Matrix<T>, depth: usize, best: &mut Best<T>) {
    let (prenecklace, lyndon) = lyndon_status(word);
    if !prenecklace {
        return;
    }
    if lyndon {
        if let Ok(rho) = spectral_radius(product) {
            let m = T::from_usize(word.len()).unwrap();
            best.offer(rho.powf(T::one() / m), word);
        }
    }
    if word.len() == depth {
        return;
    }
    for (j, a) in fam.matrices().iter().enumerate() {
        word.push(j);
        lower_subtree(fam, word, &(product * a), depth, best);
        word.pop();
    }
}

pub fn jsr_lower_bound<T: Scalar>(fam: &MatrixFamily<T>, depth: usize) -> LowerBound<T> {
    jsr_lower_bound_with_budget(fam, depth, DEFAULT_NODE_BUDGET)
}

pub fn jsr_lower_bound_with_budget<T: Scalar>(fam: &MatrixFamily<T>, depth: usize, node_budget: usize) -> LowerBound<T> {
    let depth = depth.max(1);
    let reach = effective_depth(fam.len(), depth, node_budget).max(1);
    let best = (0..fam.len())
        .into_par_iter()
        .map(|j| {
            let mut best = Best { value: T::zero(), word: Vec::new() };
            lower_subtree(fam, &mut vec![j], fam.matrix(j), reach, &mut best);
            best
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(Best { value: T::zero(), word: Vec::new() }, Best::merge);
    let word = if best.word.is_empty() { vec![0] } else { best.word };
    LowerBound { value: best.value, word, depth_reached: reach, budget_exhausted: reach < depth }
}

#[derive(Clone)]
struct LevelMaxima<T> {
    closed: Vec<T>,
    open: Vec<Option<T>>,
    nodes: usize,
}

impl<T: Scalar> LevelMaxima<T> {
    fn new(depth: usize) -> Self {
        Self { closed: vec![T::zero(); depth + 1], open: vec![None; depth + 1], nodes: 0 }
    }

    fn merge(mut self, other: Self) -> Self {
        for (a, b) in self.closed.iter_mut().zip(other.closed) {
            *a = a.max(b);
        }
        for (a, b) in self.open.iter_mut().zip(other.open) {
            *a = match (*a, b) {
                (Some(x), Some(y)) => Some(x.max(y)),
                (x, y) => x.or(y),
            };
        }
        self.nodes += other.nodes;
        self
    }
}

fn upper_subtree<T: Scalar>(fam: &MatrixFamily<T>, len: usize, product: &Matrix<T>, depth: usize, threshold: T, acc: &mut LevelMaxima<T>) {
    acc.nodes += 1;
    let value = product.operator_norm().powf(T::one() / T::from_usize(len).unwrap());
    if value < threshold {
        acc.closed[len] = acc.closed[len].max(value);
        return;
    }
    acc.open[len] = Some(acc.open[len].map_or(value, |v| v.max(value)));
    if len == depth {
        return;
    }
    for a in fam.matrices() {
        upper_subtree(fam, len + 1, &(product * a), depth, threshold, acc);
    }
}

/// Upper bound with branches closed below `threshold`; returns the bound and node count.
pub fn jsr_upper_bound_pruned<T: Scalar>(fam: &MatrixFamily<T>, depth: usize, threshold: T, node_budget: usize) -> (T, usize, bool) {
    let depth = depth.max(1);
    let reach = effective_depth(fam.len(), depth, node_budget).max(1);
    let levels = (0..fam.len())
        .into_par_iter()
        .map(|j| {
            let mut acc = LevelMaxima::new(reach);
            upper_subtree(fam, 1, fam.matrix(j), reach, threshold, &mut acc);
            acc
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(LevelMaxima::new(reach), LevelMaxima::merge);
    let mut closed_so_far = T::zero();
    let mut best = T::infinity();
    for m in 1..=reach {
        closed_so_far = closed_so_far.max(levels.closed[m]);
        let bound = levels.open[m].map_or(closed_so_far, |v| v.max(closed_so_far));
        best = best.min(bound);
    }
    (best, levels.nodes, reach < depth)
}

pub fn jsr_upper_bound<T: Scalar>(fam: &MatrixFamily<T>, depth: usize) -> T {
    jsr_bounds(fam, depth).upper
}

pub fn jsr_bounds<T: Scalar>(fam: &MatrixFamily<T>, depth: usize) -> JsrBounds<T> {
    jsr_bounds_with_budget(fam, depth, DEFAULT_NODE_BUDGET)
}

pub fn jsr_bounds_with_budget<T: Scalar>(fam: &MatrixFamily<T>, depth: usize, node_budget: usize) -> JsrBounds<T> {
    let lower = jsr_lower_bound_with_budget(fam, depth, node_budget);
    let (upper, nodes, exhausted) = jsr_upper_bound_pruned(fam, depth, lower.value, node_budget);
    JsrBounds {
        lower: lower.value,
        upper: upper.max(lower.value),
        depth_reached: lower.depth_reached,
        witness_word: lower.word,
        budget_exhausted: exhausted || lower.budget_exhausted,
        nodes,
    }
}

/// `ρ(Σ) < 1` certified by the upper bound, refuted by the lower bound.
pub fn is_asymptotically_stable<T: Scalar>(fam: &MatrixFamily<T>, depth: usize, tol: &ToleranceConfig<T>) -> Verdict<T> {
    let bounds = jsr_bounds(fam, depth);
    let mut verdict = if bounds.upper < T::one() {
        Verdict::yes("jsr_upper_below_one")
    } else if bounds.lower >= T::one() + tol.eig_tol {
        let product = fam.product(&bounds.witness_word);
        let rho = spectral_radius(&product).unwrap_or(T::nan());
        Verdict::no("jsr_lower_above_one", Witness::Product { word: bounds.witness_word.clone(), matrix: product, spectral_radius: rho })
    } else {
        Verdict::unknown("jsr_brackets_one")
    };
    verdict.record("jsr_lower", bounds.lower);
    verdict.record("jsr_upper", bounds.upper);
    debug_assert!(verdict.status != Status::CertifiedNo || verdict.witness.is_some());
    verdict
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    type M = Matrix<f64>;

    fn golden_pair() -> MatrixFamily<f64> {
        MatrixFamily::numbered(vec![
            M::from_f64_rows(&[&[1.0, 1.0], &[0.0, 1.0]]),
            M::from_f64_rows(&[&[1.0, 0.0], &[1.0, 1.0]]),
        ])
        .unwrap()
    }

    fn idempotent_pair() -> MatrixFamily<f64> {
        MatrixFamily::numbered(vec![
            M::from_f64_rows(&[&[1.0, 0.0], &[0.0, 0.0]]),
            M::from_f64_rows(&[&[1.0, 1.0], &[0.0, 0.0]]),
        ])
        .unwrap()
    }

    fn scalars(xs: &[f64]) -> MatrixFamily<f64> {
        MatrixFamily::numbered(xs.iter().map(|&x| M::from_f64_rows(&[&[x]])).collect()).unwrap()
    }

    /// Brute force over every word of every length, no pruning, no Lyndon filter.
    fn brute_force(fam: &MatrixFamily<f64>, depth: usize) -> (f64, f64) {
        let mut lower = 0.0f64;
        let mut upper = f64::INFINITY;
        let mut level: Vec<M> = vec![M::identity(fam.dim())];
        for m in 1..=depth {
            level = level.iter().flat_map(|p| fam.matrices().iter().map(move |a| p * a)).collect();
            let e = 1.0 / m as f64;
            lower = level.iter().fold(lower, |acc, p| acc.max(spectral_radius(p).unwrap().powf(e)));
            upper = upper.min(level.iter().fold(0.0f64, |acc, p| acc.max(p.operator_norm().powf(e))));
        }
        (lower, upper)
    }

    #[test]
    fn golden_pair_lower_bound_at_depth_two() {
        let lb = jsr_lower_bound(&golden_pair(), 2);
        let oracle = ((3.0 + 5f64.sqrt()) / 2.0).sqrt();
        assert!((lb.value - oracle).abs() < 1e-9);
        assert!((oracle - 1.6180).abs() < 1e-4);
        assert_eq!(lb.word, vec![0, 1]);
    }

    #[test]
    fn golden_pair_upper_bound_matches_sweep() {
        let b = jsr_bounds(&golden_pair(), 10);
        let (_, sweep_upper) = brute_force(&golden_pair(), 10);
        assert!(b.upper <= sweep_upper + 1e-12);
        assert!((b.upper - 1.6180).abs() < 0.05);
        assert!(b.lower <= b.upper);
    }

    #[test]
    fn scalar_and_pair_examples() {
        let half = jsr_bounds(&scalars(&[0.5]), 3);
        assert!((half.lower - 0.5).abs() < 1e-15 && (half.upper - 0.5).abs() < 1e-15);
        let pair = jsr_bounds(&idempotent_pair(), 4);
        assert!((pair.lower - 1.0).abs() < 1e-12);
        assert_eq!(pair.witness_word, vec![0]);
        assert!(pair.upper >= 1.0 && pair.upper <= 1.2, "{}", pair.upper);
    }

    #[test]
    fn matches_brute_force_lower_bound() {
        let fam = MatrixFamily::numbered(vec![
            M::from_f64_rows(&[&[0.3, -0.9], &[0.7, 0.2]]),
            M::from_f64_rows(&[&[0.8, 0.1], &[-0.4, 0.6]]),
            M::from_f64_rows(&[&[-0.5, 0.5], &[0.2, 0.9]]),
        ])
        .unwrap();
        for depth in 1..=5 {
            let (lower, upper) = brute_force(&fam, depth);
            let b = jsr_bounds(&fam, depth);
            assert!((b.lower - lower).abs() < 1e-12, "depth {depth}");
            assert!(b.upper <= upper + 1e-12, "depth {depth}");
        }
    }

    #[test]
    fn stability_examples() {
        let tol = ToleranceConfig::default();
        assert_eq!(is_asymptotically_stable(&scalars(&[0.5, 0.3]), 4, &tol).status, Status::CertifiedYes);
        let v = is_asymptotically_stable(&scalars(&[1.2]), 4, &tol);
        assert_eq!(v.status, Status::CertifiedNo);
        assert!(matches!(v.witness, Some(Witness::Product { .. })));
        for depth in [1, 3, 6] {
            assert_eq!(is_asymptotically_stable(&idempotent_pair(), depth, &tol).status, Status::Unknown);
        }
    }

    #[test]
    fn budget_limits_depth() {
        let b = jsr_bounds_with_budget(&golden_pair(), 10, 30);
        assert!(b.budget_exhausted);
        assert_eq!(b.depth_reached, 4);
    }

    fn family(n: usize, k: usize) -> impl Strategy<Value = MatrixFamily<f64>> {
        proptest::collection::vec(proptest::collection::vec(-1.0f64..1.0, n * n), k)
            .prop_map(move |ms| MatrixFamily::numbered(ms.into_iter().map(|d| M::new(n, n, d).unwrap()).collect()).unwrap())
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn bounds_are_ordered_and_monotone(fam in family(2, 2)) {
            let mut prev: Option<JsrBounds<f64>> = None;
            for depth in 1..=5 {
                let b = jsr_bounds(&fam, depth);
                prop_assert!(b.lower <= b.upper);
                if let Some(p) = &prev {
                    prop_assert!(b.lower >= p.lower);
                    prop_assert!(b.upper <= p.upper);
                }
                let replay = spectral_radius(&fam.product(&b.witness_word)).unwrap().powf(1.0 / b.witness_word.len() as f64);
                prop_assert!((replay - b.lower).abs() <= 1e-9);
                prev = Some(b);
            }
        }

        #[test]
        fn bounds_scale_linearly(fam in family(3, 2), c in 0.1f64..3.0) {
            let b = jsr_bounds(&fam, 4);
            let s = jsr_bounds(&fam.scaled(c), 4);
            prop_assert!((s.lower - c * b.lower).abs() <= 1e-9 * c.max(1.0) * (1.0 + b.lower));
            prop_assert!((s.upper - c * b.upper).abs() <= 1e-9 * c.max(1.0) * (1.0 + b.upper));
        }
    }
}
