//! Dense real linear algebra with explicit tolerances.
//!
//! Everything here works for any [`Scalar`]; norms are induced 2-norms and
//! numerical rank uses the relative cutoff `rank_tol * max(sigma_max, 1)`.

mod decomp;
mod matrix;
mod subspace;
mod tolerance;
mod vector;

pub use decomp::{eigenvalues, singular_values, solve, svd, Svd};
pub use matrix::Matrix;
pub use subspace::Subspace;
pub use tolerance::ToleranceConfig;
pub use vector::Vector;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

pub fn mat_mul<T: Scalar>(a: &Matrix<T>, b: &Matrix<T>) -> Result<Matrix<T>> {
    a.try_mul(b)
}

pub fn operator_norm<T: Scalar>(m: &Matrix<T>) -> T {
    m.operator_norm()
}

/// Largest eigenvalue modulus.
pub fn spectral_radius<T: Scalar>(m: &Matrix<T>) -> Result<T> {
    Ok(eigenvalues(m)?.iter().fold(T::zero(), |r, z| r.max(z.norm())))
}

fn require_square<T: Scalar>(m: &Matrix<T>) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(Error::NotSquare { rows: m.rows(), cols: m.cols() })
    }
}

pub fn nullspace<T: Scalar>(m: &Matrix<T>, tol: &ToleranceConfig<T>) -> Result<Subspace<T>> {
    require_square(m)?;
    Ok(subspace::right_nullspace(m, tol.rank_tol))
}

pub fn range<T: Scalar>(m: &Matrix<T>, tol: &ToleranceConfig<T>) -> Result<Subspace<T>> {
    require_square(m)?;
    Ok(subspace::column_space(m, tol.rank_tol))
}

pub fn subspace_sum<T: Scalar>(u: &Subspace<T>, v: &Subspace<T>) -> Result<Subspace<T>> {
    u.sum(v)
}

pub fn subspace_intersection<T: Scalar>(u: &Subspace<T>, v: &Subspace<T>) -> Result<Subspace<T>> {
    u.intersection(v)
}

pub fn rank<T: Scalar>(m: &Matrix<T>, tol: &ToleranceConfig<T>) -> usize {
    subspace::rank(m, tol.rank_tol)
}

/// Whether `m^k` converges as `k` grows.
///
/// Eigenvalues inside `|λ| < 1 - eig_tol` are harmless and any eigenvalue with
/// `|λ| > 1 + eig_tol` rules convergence out. On the unit-circle band an
/// eigenvalue within `eig_tol` of 1 requires the eigenvalue 1 to be semisimple
/// (`rank(I-m) == rank((I-m)^2)`); one farther than `sqrt(eig_tol)` from 1 rules
/// convergence out; anything in between is reported as indeterminate.
pub fn is_power_convergent<T: Scalar>(m: &Matrix<T>, tol: &ToleranceConfig<T>) -> Result<bool> {
    require_square(m)?;
    let one = T::one();
    let ambiguity = tol.eig_tol.sqrt();
    let mut has_one = false;
    let mut ambiguous = None;
    for z in eigenvalues(m)? {
        let modulus = z.norm();
        let dist_to_one = (z - one).norm();
        if dist_to_one <= tol.eig_tol {
            has_one = true;
        } else if modulus < one - tol.eig_tol {
            continue;
        } else if modulus > one + tol.eig_tol || dist_to_one > ambiguity {
            return Ok(false);
        } else {
            ambiguous.get_or_insert(z);
        }
    }
    if let Some(z) = ambiguous {
        return Err(Error::Indeterminate { re: z.re.as_f64(), im: z.im.as_f64() });
    }
    if !has_one {
        return Ok(true);
    }
    let k = &Matrix::identity(m.rows()) - m;
    Ok(rank(&k, tol) == rank(&(&k * &k), tol))
}

/// `lim m^k`, realized as the projection onto `N(I-m)` along `R(I-m)`.
pub fn power_limit<T: Scalar>(m: &Matrix<T>, tol: &ToleranceConfig<T>) -> Result<Matrix<T>> {
    if !is_power_convergent(m, tol)? {
        return Err(Error::NotPowerConvergent);
    }
    let k = &Matrix::identity(m.rows()) - m;
    oblique_projector(&nullspace(&k, tol)?, &range(&k, tol)?)
}

/// Projection onto `onto` along `along`; the two must be complementary.
pub fn oblique_projector<T: Scalar>(onto: &Subspace<T>, along: &Subspace<T>) -> Result<Matrix<T>> {
    let n = onto.ambient_dim();
    let sum = onto.sum(along)?;
    let not_transversal = || Error::NotTransversal { dim_n: onto.dim(), dim_r: along.dim(), dim_sum: sum.dim(), ambient: n };
    if onto.dim() + along.dim() != n || !sum.is_full() {
        return Err(not_transversal());
    }
    if onto.is_zero() {
        return Ok(Matrix::zeros(n, n));
    }
    if along.is_zero() {
        return Ok(Matrix::identity(n));
    }
    let columns: Vec<Vector<T>> = onto.basis().iter().chain(along.basis()).cloned().collect();
    let frame = Matrix::from_columns(n, &columns);
    let coords = solve(&frame, &Matrix::identity(n), T::epsilon() * T::lit(16.0)).ok_or_else(not_transversal)?;
    let p = onto.dim();
    Ok(&onto.basis_matrix() * &coords.block(0, 0, p, n))
}
