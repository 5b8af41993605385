//! Dense complex helpers shared by every module.

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;
pub type CVector = DVector<C64>;

pub const ZERO: C64 = C64::new(0.0, 0.0);
pub const ONE: C64 = C64::new(1.0, 0.0);
pub const I: C64 = C64::new(0.0, 1.0);

/// Residual contract for every eigenpair: ‖Dv − λv‖ ≤ EIGEN_RESIDUAL·‖D‖.
pub const EIGEN_RESIDUAL: f64 = 1e-10;

/// Largest entrywise modulus.
pub fn max_abs(m: &CMatrix) -> f64 {
    m.iter().fold(0.0, |acc, z| acc.max(z.norm()))
}

/// `xy − yx`.
pub fn commutator(x: &CMatrix, y: &CMatrix) -> CMatrix {
    x * y - y * x
}

/// Inner product linear in the first argument: ⟨x, y⟩ = Σ x_i conj(y_i).
pub fn inner(x: &CVector, y: &CVector) -> C64 {
    x.iter().zip(y.iter()).map(|(a, b)| a * b.conj()).sum()
}

/// Exact largest singular value through a dense SVD.
pub fn spectral_norm_dense(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.singular_values().iter().cloned().fold(0.0, f64::max)
}

/// Hermitian eigendecomposition with eigenvalues sorted ascending.
///
/// Every returned pair satisfies the [`EIGEN_RESIDUAL`] contract or the call fails.
pub fn hermitian_eigen(m: &CMatrix) -> Result<(Vec<f64>, CMatrix)> {
    let n = m.nrows();
    if n == 0 {
        return Ok((Vec::new(), CMatrix::zeros(0, 0)));
    }
    let eig = SymmetricEigen::try_new(m.clone(), f64::EPSILON, 100_000)
        .ok_or_else(|| Error::numerical("Hermitian eigensolver did not converge"))?;

    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    let values: Vec<f64> = order.iter().map(|&j| eig.eigenvalues[j]).collect();
    let vectors = CMatrix::from_fn(n, n, |i, j| eig.eigenvectors[(i, order[j])]);

    let scale = spectral_norm_dense(m).max(f64::MIN_POSITIVE);
    for (j, &lambda) in values.iter().enumerate() {
        let v = vectors.column(j);
        let residual = (m * v - v * C64::from(lambda)).norm();
        if residual > EIGEN_RESIDUAL * scale {
            return Err(Error::numerical(format!(
                "eigenpair {j} residual {residual:.3e} exceeds {:.1e}·‖D‖",
                EIGEN_RESIDUAL
            )));
        }
    }
    Ok((values, vectors))
}

/// Diagonal complex matrix from real entries.
pub fn real_diagonal(values: &[f64]) -> CMatrix {
    CMatrix::from_diagonal(&CVector::from_iterator(
        values.len(),
        values.iter().map(|&v| C64::from(v)),
    ))
}

/// Rebuilds `V diag(values) V*`.
pub fn from_spectrum(values: &[f64], vectors: &CMatrix) -> CMatrix {
    let scaled = CMatrix::from_fn(vectors.nrows(), vectors.ncols(), |i, j| {
        vectors[(i, j)] * values[j]
    });
    let h = &scaled * vectors.adjoint();
    // Force exact Hermitian symmetry.
    (&h + h.adjoint()) * C64::from(0.5)
}
