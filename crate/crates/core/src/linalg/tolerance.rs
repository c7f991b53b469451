use serde::Serialize;

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Numerical thresholds used throughout the analysis.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct ToleranceConfig<T> {
    /// Relative singular-value cutoff for numerical rank.
    pub rank_tol: T,
    /// Cauchy / limit detection threshold.
    pub conv_tol: T,
    /// Width of the unit-circle band used to classify eigenvalues.
    pub eig_tol: T,
}

impl<T: Scalar> Default for ToleranceConfig<T> {
    /// `1e-9 / 1e-10 / 1e-8` in double precision; single precision is floored
    /// at small multiples of machine epsilon.
    fn default() -> Self {
        let eps = T::epsilon();
        Self {
            rank_tol: T::lit(1e-9).max(eps * T::lit(64.0)),
            conv_tol: T::lit(1e-10).max(eps * T::lit(64.0)),
            eig_tol: T::lit(1e-8).max(eps * T::lit(256.0)),
        }
    }
}

impl<T: Scalar> ToleranceConfig<T> {
    pub fn new(rank_tol: T, conv_tol: T, eig_tol: T) -> Result<Self> {
        let tol = Self { rank_tol, conv_tol, eig_tol };
        tol.validate()?;
        Ok(tol)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = |x: T| x.is_finite() && x > T::zero();
        if !(ok(self.rank_tol) && ok(self.conv_tol) && ok(self.eig_tol)) {
            return Err(Error::BadTolerance("all tolerances must be positive and finite".into()));
        }
        if self.rank_tol > T::one() {
            return Err(Error::BadTolerance("rank_tol must not exceed 1".into()));
        }
        Ok(())
    }

    /// Singular values at or below this cutoff count as zero.
    pub fn rank_cutoff(&self, sigma_max: T) -> T {
        self.rank_tol * sigma_max.max(T::one())
    }
}
