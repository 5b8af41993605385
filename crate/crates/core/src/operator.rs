use crate::error::{Error, Result};
use crate::linalg::{CMatrix, CVector, C64};
use crate::norm::{operator_norm, NormOptions};
use crate::toeplitz::Toeplitz;

/// A bounded operator on a model's ambient space.
///
/// Circle models keep multiplication operators as Toeplitz coefficient
/// tables; everything else is a dense matrix in the ambient basis.
#[derive(Clone, Debug, PartialEq)]
pub enum Operator {
    Dense(CMatrix),
    Toeplitz(Toeplitz),
}

impl Operator {
    pub fn identity(dim: usize) -> Self {
        Operator::Dense(CMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        match self {
            Operator::Dense(m) => m.nrows(),
            Operator::Toeplitz(t) => t.size(),
        }
    }

    pub fn to_dense(&self) -> CMatrix {
        match self {
            Operator::Dense(m) => m.clone(),
            Operator::Toeplitz(t) => t.to_dense(),
        }
    }

    pub fn adjoint(&self) -> Self {
        match self {
            Operator::Dense(m) => Operator::Dense(m.adjoint()),
            Operator::Toeplitz(t) => Operator::Toeplitz(t.adjoint()),
        }
    }

    pub fn norm(&self, opts: &NormOptions) -> Result<f64> {
        match self {
            Operator::Dense(m) => operator_norm(m, opts),
            Operator::Toeplitz(t) => t.norm(opts),
        }
    }

    pub fn apply(&self, x: &CVector) -> CVector {
        match self {
            Operator::Dense(m) => m * x,
            Operator::Toeplitz(t) => CVector::from_vec(t.apply(x.as_slice())),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        match self {
            Operator::Dense(m) => Operator::Dense(m * s),
            Operator::Toeplitz(t) => Operator::Toeplitz(t.map_coeffs(|_, c| c * s)),
        }
    }

    /// `self − other`, staying Toeplitz when both sides are.
    pub fn sub(&self, other: &Operator) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(match (self, other) {
            (Operator::Toeplitz(a), Operator::Toeplitz(b)) => {
                Operator::Toeplitz(a.map_coeffs(|k, c| c - b.coeff(k)))
            }
            _ => Operator::Dense(self.to_dense() - other.to_dense()),
        })
    }

    pub fn mul(&self, other: &Operator) -> Result<Self> {
        if self.dim() != other.dim() {
            return Err(Error::DimensionMismatch { expected: self.dim(), found: other.dim() });
        }
        Ok(Operator::Dense(self.to_dense() * other.to_dense()))
    }

    pub fn as_toeplitz(&self) -> Option<&Toeplitz> {
        match self {
            Operator::Toeplitz(t) => Some(t),
            Operator::Dense(_) => None,
        }
    }
}

impl From<CMatrix> for Operator {
    fn from(m: CMatrix) -> Self {
        Operator::Dense(m)
    }
}

impl From<Toeplitz> for Operator {
    fn from(t: Toeplitz) -> Self {
        Operator::Toeplitz(t)
    }
}
