//! Built-in families: the two-idempotent LCP-but-not-RCP pair, orthogonal
//! projection families, the three-block reduction to a pair of `p×p` products,
//! and the analysis corpus used by the statistical checks.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::family::{cp_verdict, Budget, MatrixFamily, Status};
use crate::gate::CpGate;
use crate::insertion::random_insertion_experiment;
use crate::jsr::jsr_bounds_with_budget;
use crate::linalg::{spectral_radius, Matrix, Subspace, ToleranceConfig, Vector};
use crate::scalar::Scalar;

/// Declarative description of a built-in family.
#[derive(Clone, Debug)]
pub enum GadgetSpec<T> {
    IdempotentPair,
    ProjectionLines { angles: Vec<T> },
    ThreeBlock { m1: Matrix<T>, m2: Matrix<T>, m3: Matrix<T> },
}

impl<T: Scalar> GadgetSpec<T> {
    pub fn build(&self) -> Result<MatrixFamily<T>> {
        match self {
            GadgetSpec::IdempotentPair => Ok(idempotent_pair()),
            GadgetSpec::ProjectionLines { angles } => projection_family(angles),
            GadgetSpec::ThreeBlock { m1, m2, m3 } => three_block_family(m1, m2, m3),
        }
    }
}

/// `A₁ = [[1,0],[0,0]]`, `A₂ = [[1,1],[0,0]]`: `A₁A₂ = A₂`, `A₂A₁ = A₁`.
pub fn idempotent_pair<T: Scalar>() -> MatrixFamily<T> {
    let m = |rows: &[&[f64]]| Matrix::from_f64_rows(rows);
    MatrixFamily::numbered(vec![m(&[&[1.0, 0.0], &[0.0, 0.0]]), m(&[&[1.0, 1.0], &[0.0, 0.0]])]).expect("two 2x2 matrices")
}

/// Orthogonal projection onto the line at angle `theta`.
pub fn line_projection<T: Scalar>(theta: T) -> Matrix<T> {
    let (s, c) = theta.sin_cos();
    Matrix::from_rows(&[vec![c * c, s * c], vec![s * c, s * s]]).expect("2x2")
}

/// Line projections in `R^2`; every angle must lie in `[0, π)`.
pub fn projection_family<T: Scalar>(angles: &[T]) -> Result<MatrixFamily<T>> {
    if angles.is_empty() {
        return Err(Error::EmptyFamily);
    }
    if let Some(bad) = angles.iter().find(|a| !a.is_finite() || **a < T::zero() || **a >= T::PI()) {
        return Err(Error::Invalid(format!("angle {bad} outside [0, pi)")));
    }
    MatrixFamily::numbered(angles.iter().map(|&a| line_projection(a)).collect())
}

/// Orthogonal projection onto the span of `vectors`.
pub fn subspace_projection<T: Scalar>(dim: usize, vectors: &[Vector<T>], tol: &ToleranceConfig<T>) -> Result<Matrix<T>> {
    Ok(Subspace::span(dim, vectors, tol.rank_tol)?.projector())
}

fn check_blocks<T: Scalar>(m1: &Matrix<T>, m2: &Matrix<T>, m3: &Matrix<T>) -> Result<usize> {
    let p = m1.rows();
    for m in [m1, m2, m3] {
        if !m.is_square() {
            return Err(Error::NotSquare { rows: m.rows(), cols: m.cols() });
        }
        if m.rows() != p {
            return Err(Error::DimensionMismatch { expected: format!("{p}x{p} blocks"), found: format!("{0}x{0}", m.rows()) });
        }
    }
    if p == 0 {
        return Err(Error::Invalid("blocks must be nonempty".into()));
    }
    Ok(p)
}

/// `A = [[E,0,0],[M₁,0,0],[M₁,0,0]]`, `B = [[0,M₂,0],[0,E,0],[0,0,0]]`,
/// `C = [[0,0,M₃],[0,0,0],[0,0,E]]`, labelled `A`, `B`, `C`.
pub fn three_block_family<T: Scalar>(m1: &Matrix<T>, m2: &Matrix<T>, m3: &Matrix<T>) -> Result<MatrixFamily<T>> {
    let p = check_blocks(m1, m2, m3)?;
    let e = Matrix::identity(p);
    let mut a = Matrix::zeros(3 * p, 3 * p);
    a.set_block(0, 0, &e);
    a.set_block(p, 0, m1);
    a.set_block(2 * p, 0, m1);
    let mut b = Matrix::zeros(3 * p, 3 * p);
    b.set_block(0, p, m2);
    b.set_block(p, p, &e);
    let mut c = Matrix::zeros(3 * p, 3 * p);
    c.set_block(0, 2 * p, m3);
    c.set_block(2 * p, 2 * p, &e);
    MatrixFamily::new(vec!["A".into(), "B".into(), "C".into()], vec![a, b, c])
}

/// The reduced pair `{M₂M₁, M₃M₁}`.
pub fn psi_family<T: Scalar>(m1: &Matrix<T>, m2: &Matrix<T>, m3: &Matrix<T>) -> Result<MatrixFamily<T>> {
    check_blocks(m1, m2, m3)?;
    MatrixFamily::new(vec!["M2M1".into(), "M3M1".into()], vec![m2 * m1, m3 * m1])
}

#[derive(Clone, Debug)]
pub struct CrossCheckOptions {
    pub budget: Budget,
    /// Required distance of the reduced-pair radius bounds from 1.
    pub margin: f64,
    pub sequences: usize,
    pub length: usize,
    pub seed: u64,
    /// Relative growth of the maximal variation from `length/2` to `length`
    /// above which the variation counts as unbounded.
    pub growth_threshold: f64,
}

impl Default for CrossCheckOptions {
    fn default() -> Self {
        Self { budget: Budget::default(), margin: 0.05, sequences: 20, length: 200, seed: 0, growth_threshold: 0.05 }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct CrossCheckReport {
    pub psi_lower: f64,
    pub psi_upper: f64,
    pub psi_stable: bool,
    pub cp_status: Status,
    pub cp_rule: String,
    pub lcp_status: Status,
    pub rcp_status: Status,
    pub transversality_status: Status,
    /// Normalized JSR lower bound of the three-block family and its word.
    pub family_jsr_lower: f64,
    pub family_witness: Vec<String>,
    /// Unnormalized spectral radius of the witness product.
    pub witness_product_radius: f64,
    pub insertions_converged: Option<bool>,
    pub variation_half: Option<f64>,
    pub variation_full: Option<f64>,
    pub agreement: bool,
}

/// Checks that the three-block family is CP exactly when the reduced pair is
/// stable. Stable: CP is not refuted and insertion experiments converge.
/// Unstable: CP is refuted or the insertion variation keeps growing.
pub fn gadget_cross_check<T: Scalar>(
    m1: &Matrix<T>,
    m2: &Matrix<T>,
    m3: &Matrix<T>,
    opts: &CrossCheckOptions,
    tol: &ToleranceConfig<T>,
) -> Result<CrossCheckReport> {
    let psi = psi_family(m1, m2, m3)?;
    let fam = three_block_family(m1, m2, m3)?;
    let bounds = jsr_bounds_with_budget(&psi, opts.budget.depth, opts.budget.node_budget);
    let (lower, upper) = (bounds.lower.as_f64(), bounds.upper.as_f64());
    let psi_stable = if upper <= 1.0 - opts.margin {
        true
    } else if lower >= 1.0 + opts.margin {
        false
    } else {
        return Err(Error::BoundaryCase { lower, upper, margin: opts.margin });
    };

    let report = cp_verdict(&fam, &opts.budget, tol)?;
    let own = jsr_bounds_with_budget(&fam, opts.budget.depth.min(4), opts.budget.node_budget);
    let witness_product_radius = spectral_radius(&fam.product(&own.witness_word))?.as_f64();
    let refuted = report.cp.status == Status::CertifiedNo;

    let mut insertions_converged = None;
    let mut variation_half = None;
    let mut variation_full = None;
    let grows = |half: f64, full: f64| full > half * (1.0 + opts.growth_threshold);
    if psi_stable || !refuted {
        let stats = random_insertion_experiment(&fam, opts.sequences, opts.length, opts.seed, tol, &CpGate::allowing_refuted())?;
        insertions_converged = Some(stats.all_converged);
        variation_half = Some(stats.max_variation_at(opts.length / 2));
        variation_full = Some(stats.max_variation_at(opts.length));
    }
    let agreement = match (psi_stable, insertions_converged, variation_half.zip(variation_full)) {
        (true, Some(converged), Some((half, full))) => !refuted && converged && !grows(half, full),
        (false, _, _) if refuted => true,
        (false, Some(converged), Some((half, full))) => !converged || grows(half, full),
        _ => false,
    };

    Ok(CrossCheckReport {
        psi_lower: lower,
        psi_upper: upper,
        psi_stable,
        cp_status: report.cp.status,
        cp_rule: report.cp.rule.clone(),
        lcp_status: report.lcp.status,
        rcp_status: report.rcp.status,
        transversality_status: report.transversality.status,
        family_jsr_lower: own.lower.as_f64(),
        family_witness: own.witness_word.iter().map(|&j| fam.label(j).to_string()).collect(),
        witness_product_radius,
        insertions_converged,
        variation_half,
        variation_full,
        agreement,
    })
}

/// A named corpus family with its known CP status.
#[derive(Clone, Debug)]
pub struct CorpusEntry<T> {
    pub name: String,
    pub family: MatrixFamily<T>,
    pub cp: bool,
}

fn entry<T>(name: &str, family: MatrixFamily<T>, cp: bool) -> CorpusEntry<T> {
    CorpusEntry { name: name.to_string(), family, cp }
}

fn scaled_rotation<T: Scalar>(scale: f64, degrees: f64) -> Matrix<T> {
    let (s, c) = degrees.to_radians().sin_cos();
    Matrix::from_f64_rows(&[&[scale * c, -scale * s], &[scale * s, scale * c]])
}

fn scalars<T: Scalar>(xs: &[f64]) -> Matrix<T> {
    Matrix::from_f64_rows(&[xs])
}

/// Matrix with uniform entries rescaled to operator norm `norm`.
pub fn random_contraction<T: Scalar>(dim: usize, norm: f64, rng: &mut ChaCha8Rng) -> Matrix<T> {
    let m: Matrix<T> = Matrix::from_fn(dim, dim, |_, _| T::lit(rng.random_range(-1.0..1.0)));
    let current = m.operator_norm();
    m.scale(T::lit(norm) / current)
}

fn r3_projection<T: Scalar>(vectors: &[[f64; 3]]) -> Matrix<T> {
    let vs: Vec<Vector<T>> = vectors.iter().map(|v| Vector::from_f64(v)).collect();
    subspace_projection(3, &vs, &ToleranceConfig::default()).expect("well-conditioned spans")
}

fn plane<T: Scalar>(normal: [f64; 3]) -> Matrix<T> {
    let n: Matrix<T> = Matrix::from_f64_rows(&[&normal]);
    let len = normal.iter().map(|x| x * x).sum::<f64>();
    &Matrix::identity(3) - &(&n.transpose() * &n).scale(T::lit(1.0 / len))
}

fn degrees<T: Scalar>(ds: &[f64]) -> MatrixFamily<T> {
    projection_family(&ds.iter().map(|d| T::lit(d.to_radians())).collect::<Vec<_>>()).expect("angles in range")
}

fn numbered<T: Scalar>(ms: Vec<Matrix<T>>) -> MatrixFamily<T> {
    MatrixFamily::numbered(ms).expect("consistent sizes")
}

fn blocks<T: Scalar>(m1: f64, m2: f64, m3: f64) -> MatrixFamily<T> {
    three_block_family(&scalars(&[m1]), &scalars(&[m2]), &scalars(&[m3])).expect("1x1 blocks")
}

/// Families of dimension at most 6 and at most 4 labels whose CP status is
/// known: projection families, scaled rotations, random contractions and
/// three-block gadgets, plus refuted families including the two-idempotent pair.
pub fn builtin_corpus<T: Scalar>() -> Vec<CorpusEntry<T>> {
    let mut out = vec![
        entry("lines 0/45", degrees(&[0.0, 45.0]), true),
        entry("lines 0/60/120", degrees(&[0.0, 60.0, 120.0]), true),
        entry("lines 0/30", degrees(&[0.0, 30.0]), true),
        entry("lines 0/90", degrees(&[0.0, 90.0]), true),
        entry("lines 15/75", degrees(&[15.0, 75.0]), true),
        entry("lines 0/45/90/135", degrees(&[0.0, 45.0, 90.0, 135.0]), true),
        entry("lines 10/100/170", degrees(&[10.0, 100.0, 170.0]), true),
        entry("line 30", degrees(&[30.0]), true),
        entry("planes x+y, y+z", numbered(vec![plane([1.0, 1.0, 0.0]), plane([0.0, 1.0, 1.0])]), true),
        entry("planes x, y, x+y+z", numbered(vec![plane([1.0, 0.0, 0.0]), plane([0.0, 1.0, 0.0]), plane([1.0, 1.0, 1.0])]), true),
        entry("lines in R3", numbered(vec![r3_projection(&[[1.0, 0.0, 0.0]]), r3_projection(&[[1.0, 1.0, 0.0]]), r3_projection(&[[0.0, 1.0, 1.0]])]), true),
        entry("plane and line in R3", numbered(vec![plane([0.0, 0.0, 1.0]), r3_projection(&[[1.0, 2.0, 2.0]])]), true),
        entry("planes sharing an axis", numbered(vec![plane([1.0, 1.0, 0.0]), plane([1.0, -2.0, 0.0])]), true),
        entry("identity and plane", numbered(vec![Matrix::identity(3), plane([1.0, 2.0, 3.0])]), true),
        entry("rotations 0.7/30 0.6/100", numbered(vec![scaled_rotation(0.7, 30.0), scaled_rotation(0.6, 100.0)]), true),
        entry("rotation 0.5/90", numbered(vec![scaled_rotation(0.5, 90.0)]), true),
        entry("rotations 0.8/45 0.3/10", numbered(vec![scaled_rotation(0.8, 45.0), scaled_rotation(0.3, 10.0)]), true),
        entry(
            "rotation 0.9/60 and diagonal",
            numbered(vec![scaled_rotation(0.9, 60.0), Matrix::from_f64_rows(&[&[0.5, 0.0], &[0.0, 0.2]])]),
            true,
        ),
        entry("scalars 1, 0.5", numbered(vec![scalars(&[1.0]), scalars(&[0.5])]), true),
        entry("blocks 0.5/1.5/0.1", blocks(0.5, 1.5, 0.1), true),
        entry("blocks 0/0/0", blocks(0.0, 0.0, 0.0), true),
        entry("blocks 0.8/0.9/-1", blocks(0.8, 0.9, -1.0), true),
        entry("two-idempotent pair", idempotent_pair(), false),
        entry("blocks 0.5/2.4/0.1", blocks(0.5, 2.4, 0.1), false),
        entry("blocks 1/1.5/0.2", blocks(1.0, 1.5, 0.2), false),
        entry("rotation 90", numbered(vec![scaled_rotation(1.0, 90.0)]), false),
        entry("reflection", numbered(vec![Matrix::from_f64_rows(&[&[1.0, 0.0], &[0.0, -1.0]])]), false),
        entry("scalar 1.2", numbered(vec![scalars(&[1.2])]), false),
        entry("shear and projection", numbered(vec![Matrix::from_f64_rows(&[&[1.0, 1.0], &[0.0, 1.0]]), degrees::<T>(&[0.0]).matrix(0).clone()]), false),
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for (i, (dim, count)) in [(2, 2), (3, 2), (3, 3), (4, 2), (2, 4), (4, 3)].into_iter().enumerate() {
        let ms = (0..count).map(|_| random_contraction(dim, 0.8, &mut rng)).collect();
        out.push(entry(&format!("contractions #{i} ({dim}x{dim}, {count})"), numbered(ms), true));
    }
    let m1 = Matrix::from_f64_rows(&[&[0.5, 0.1], &[0.0, 0.4]]);
    let m2 = Matrix::from_f64_rows(&[&[0.6, -0.8], &[0.8, 0.6]]);
    let m3 = Matrix::from_f64_rows(&[&[0.9, 0.0], &[0.3, -0.7]]);
    out.push(entry("blocks 2x2 stable", three_block_family(&m1, &m2, &m3).expect("2x2 blocks"), true));
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::family::lcp_verdict;
    use crate::jsr::jsr_lower_bound;

    type M = Matrix<f64>;

    fn tol() -> ToleranceConfig<f64> {
        ToleranceConfig::default()
    }

    fn s(x: f64) -> M {
        M::from_f64_rows(&[&[x]])
    }

    #[test]
    fn two_idempotent_pair_relations() {
        let fam = idempotent_pair::<f64>();
        let (a1, a2) = (fam.matrix(0), fam.matrix(1));
        assert_eq!(&(a1 * a2), a2);
        assert_eq!(&(a2 * a1), a1);
        assert!(a1.is_idempotent(0.0) && a2.is_idempotent(0.0));
    }

    #[test]
    fn projection_family_examples() {
        let fam = projection_family(&[0.0, std::f64::consts::FRAC_PI_4]).unwrap();
        assert_eq!(fam.matrix(0), &M::from_f64_rows(&[&[1.0, 0.0], &[0.0, 0.0]]));
        assert!(fam.matrix(1).within(&M::from_f64_rows(&[&[0.5, 0.5], &[0.5, 0.5]]), 1e-15));
        assert!(projection_family::<f64>(&[]).is_err());
        assert!(projection_family(&[std::f64::consts::PI]).is_err());
        assert!(projection_family(&[-0.1]).is_err());
    }

    #[test]
    fn three_block_examples() {
        let fam = three_block_family(&s(0.5), &s(1.5), &s(0.1)).unwrap();
        assert_eq!(fam.dim(), 3);
        let ba = fam.product(&[1, 0]);
        assert_eq!(ba[(0, 0)], 0.75);
        assert!((spectral_radius(&ba).unwrap() - 0.75).abs() < 1e-12);
        let unstable = three_block_family(&s(0.5), &s(2.4), &s(0.1)).unwrap();
        assert!((spectral_radius(&unstable.product(&[1, 0])).unwrap() - 1.2).abs() < 1e-12);
        let zero = psi_family(&s(0.0), &s(0.0), &s(0.0)).unwrap();
        assert_eq!(jsr_lower_bound(&zero, 3).value, 0.0);
        assert!(three_block_family(&s(0.5), &M::identity(2), &s(0.1)).is_err());
    }

    #[test]
    fn psi_examples() {
        let psi = psi_family(&s(0.5), &s(1.5), &s(0.1)).unwrap();
        assert_eq!(psi.matrix(0), &s(0.75));
        assert!((psi.matrix(1)[(0, 0)] - 0.05).abs() < 1e-15);
        let m2 = M::from_f64_rows(&[&[0.1, 0.2], &[0.3, 0.4]]);
        let m3 = M::from_f64_rows(&[&[0.0, 1.0], &[1.0, 0.0]]);
        let psi = psi_family(&M::identity(2), &m2, &m3).unwrap();
        assert_eq!(psi.matrix(0), &m2);
        assert_eq!(psi.matrix(1), &m3);
    }

    #[test]
    fn cross_check_examples() {
        let opts = CrossCheckOptions::default();
        let stable = gadget_cross_check(&s(0.5), &s(1.5), &s(0.1), &opts, &tol()).unwrap();
        assert!(stable.psi_stable && stable.agreement, "{stable:?}");
        assert_ne!(stable.cp_status, Status::CertifiedNo);

        let unstable = gadget_cross_check(&s(0.5), &s(2.4), &s(0.1), &opts, &tol()).unwrap();
        assert!(!unstable.psi_stable && unstable.agreement, "{unstable:?}");
        assert_eq!(unstable.cp_status, Status::CertifiedNo);
        assert!(unstable.witness_product_radius >= 1.2 - 1e-12);
        assert!((unstable.family_jsr_lower - 1.2f64.sqrt()).abs() < 1e-9);

        assert!(gadget_cross_check(&s(0.0), &s(0.0), &s(0.0), &opts, &tol()).unwrap().agreement);
        assert!(matches!(gadget_cross_check(&s(1.0), &s(1.0), &s(0.5), &opts, &tol()), Err(Error::BoundaryCase { .. })));
    }

    #[test]
    fn unstable_gadget_refutes_left_convergence() {
        let fam = three_block_family(&s(0.5), &s(2.4), &s(0.1)).unwrap();
        assert_eq!(lcp_verdict(&fam, &Budget::default(), &tol()).status, Status::CertifiedNo);
    }

    #[test]
    fn corpus_is_large_and_small_scale() {
        let corpus = builtin_corpus::<f64>();
        assert!(corpus.len() >= 30);
        assert!(corpus.iter().all(|e| e.family.dim() <= 6 && e.family.len() <= 4));
        assert!(corpus.iter().any(|e| !e.cp));
        let f32_corpus = builtin_corpus::<f32>();
        assert_eq!(f32_corpus.len(), corpus.len());
    }

    #[test]
    fn corpus_verdicts_match_known_status() {
        for e in builtin_corpus::<f64>() {
            let r = cp_verdict(&e.family, &Budget::default(), &tol()).unwrap();
            if e.cp {
                assert_ne!(r.cp.status, Status::CertifiedNo, "{}: {}", e.name, r.cp.rule);
            } else {
                assert_ne!(r.cp.status, Status::CertifiedYes, "{}: {}", e.name, r.cp.rule);
            }
        }
    }

    #[test]
    fn projections_are_orthogonal_and_idempotent() {
        for e in builtin_corpus::<f64>().into_iter().filter(|e| e.name.starts_with("line") || e.name.starts_with("plane")) {
            for m in e.family.matrices() {
                assert!(m.is_symmetric(1e-12) && m.is_idempotent(1e-12), "{}", e.name);
            }
        }
    }
}
