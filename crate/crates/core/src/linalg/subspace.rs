use crate::error::{Error, Result};
use crate::scalar::Scalar;

use super::decomp::svd;
use super::matrix::Matrix;
use super::tolerance::ToleranceConfig;
use super::vector::Vector;

/// Linear subspace of `R^n` held as an orthonormal basis.
#[derive(Clone, Debug)]
pub struct Subspace<T> {
    ambient_dim: usize,
    basis: Vec<Vector<T>>,
    tol: T,
}

impl<T: Scalar> Subspace<T> {
    pub fn zero(ambient_dim: usize, tol: T) -> Self {
        Self { ambient_dim, basis: Vec::new(), tol }
    }

    pub fn full(ambient_dim: usize, tol: T) -> Self {
        Self { ambient_dim, basis: (0..ambient_dim).map(|k| Vector::basis(ambient_dim, k)).collect(), tol }
    }

    /// Orthonormal basis of the span of `vectors` at numerical rank `rank_tol`.
    pub fn span(ambient_dim: usize, vectors: &[Vector<T>], rank_tol: T) -> Result<Self> {
        if let Some(v) = vectors.iter().find(|v| v.dim() != ambient_dim) {
            return Err(Error::DimensionMismatch {
                expected: format!("vectors of dimension {ambient_dim}"),
                found: format!("dimension {}", v.dim()),
            });
        }
        if vectors.is_empty() {
            return Ok(Self::zero(ambient_dim, rank_tol));
        }
        Ok(column_space(&Matrix::from_columns(ambient_dim, vectors), rank_tol))
    }

    pub(crate) fn from_orthonormal(ambient_dim: usize, basis: Vec<Vector<T>>, tol: T) -> Self {
        Self { ambient_dim, basis, tol }
    }

    pub fn ambient_dim(&self) -> usize {
        self.ambient_dim
    }

    pub fn dim(&self) -> usize {
        self.basis.len()
    }

    pub fn is_zero(&self) -> bool {
        self.basis.is_empty()
    }

    pub fn is_full(&self) -> bool {
        self.basis.len() == self.ambient_dim
    }

    pub fn basis(&self) -> &[Vector<T>] {
        &self.basis
    }

    pub fn tol(&self) -> T {
        self.tol
    }

    /// `n x k` matrix with the basis as columns.
    pub fn basis_matrix(&self) -> Matrix<T> {
        Matrix::from_columns(self.ambient_dim, &self.basis)
    }

    /// Orthogonal projector onto the subspace.
    pub fn projector(&self) -> Matrix<T> {
        if self.is_zero() {
            return Matrix::zeros(self.ambient_dim, self.ambient_dim);
        }
        let b = self.basis_matrix();
        &b * &b.transpose()
    }

    /// Distance from `x` to the subspace.
    pub fn residual(&self, x: &Vector<T>) -> T {
        let p = &self.projector() * x;
        (x - &p).norm()
    }

    pub fn orthogonal_complement(&self) -> Self {
        if self.is_zero() {
            return Self::full(self.ambient_dim, self.tol);
        }
        if self.is_full() {
            return Self::zero(self.ambient_dim, self.tol);
        }
        right_nullspace(&self.basis_matrix().transpose(), self.tol)
    }

    pub fn sum(&self, other: &Self) -> Result<Self> {
        self.check_ambient(other)?;
        let vectors: Vec<Vector<T>> = self.basis.iter().chain(&other.basis).cloned().collect();
        Self::span(self.ambient_dim, &vectors, self.tol.max(other.tol))
    }

    pub fn intersection(&self, other: &Self) -> Result<Self> {
        self.check_ambient(other)?;
        if self.is_zero() || other.is_zero() {
            return Ok(Self::zero(self.ambient_dim, self.tol.max(other.tol)));
        }
        if self.is_full() {
            return Ok(other.clone());
        }
        if other.is_full() {
            return Ok(self.clone());
        }
        let outside = self.orthogonal_complement().sum(&other.orthogonal_complement())?;
        Ok(outside.orthogonal_complement())
    }

    /// Both subspaces contain each other's basis vectors within `tol`.
    pub fn approx_eq(&self, other: &Self, tol: T) -> bool {
        self.ambient_dim == other.ambient_dim
            && self.dim() == other.dim()
            && self.basis.iter().all(|v| other.residual(v) <= tol)
            && other.basis.iter().all(|v| self.residual(v) <= tol)
    }

    fn check_ambient(&self, other: &Self) -> Result<()> {
        if self.ambient_dim != other.ambient_dim {
            return Err(Error::DimensionMismatch {
                expected: format!("ambient dimension {}", self.ambient_dim),
                found: format!("ambient dimension {}", other.ambient_dim),
            });
        }
        Ok(())
    }
}

/// Left singular vectors above the rank cutoff.
pub(crate) fn column_space<T: Scalar>(m: &Matrix<T>, rank_tol: T) -> Subspace<T> {
    let tol = ToleranceConfig { rank_tol, conv_tol: rank_tol, eig_tol: rank_tol };
    let d = svd(m);
    let cutoff = tol.rank_cutoff(d.s.first().copied().unwrap_or_else(T::zero));
    let basis = d.s.iter().enumerate().filter(|(_, &s)| s > cutoff).map(|(k, _)| d.u.column(k)).collect();
    Subspace::from_orthonormal(m.rows(), basis, rank_tol)
}

/// Right singular vectors at or below the rank cutoff.
pub(crate) fn right_nullspace<T: Scalar>(m: &Matrix<T>, rank_tol: T) -> Subspace<T> {
    let tol = ToleranceConfig { rank_tol, conv_tol: rank_tol, eig_tol: rank_tol };
    let d = svd(m);
    let cutoff = tol.rank_cutoff(d.s.first().copied().unwrap_or_else(T::zero));
    let basis = d.s.iter().enumerate().filter(|(_, &s)| s <= cutoff).map(|(k, _)| d.v.column(k)).collect();
    Subspace::from_orthonormal(m.cols(), basis, rank_tol)
}

/// Numerical rank at the given relative cutoff.
pub(crate) fn rank<T: Scalar>(m: &Matrix<T>, rank_tol: T) -> usize {
    let s = super::decomp::singular_values(m);
    let cutoff = rank_tol * s.first().copied().unwrap_or_else(T::zero).max(T::one());
    s.iter().filter(|&&x| x > cutoff).count()
}
