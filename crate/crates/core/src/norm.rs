//! Operator-norm estimation for dense and structured operators.
//!
//! The largest singular value is the square root of the top eigenvalue of
//! `y*y`. Small operators go through a dense SVD. Everything else runs a
//! Lanczos iteration on `y*y` (the Krylov-accelerated form of power
//! iteration) with full reorthogonalisation and a seeded start vector, so
//! repeated runs are bit-identical.

use nalgebra::{DVectorView, DVectorViewMut};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::{spectral_norm_dense, CMatrix, C64, ONE, ZERO};

/// Matrix-free access to an operator `C^ncols → C^nrows`.
pub trait LinearOperator: Sync {
    fn nrows(&self) -> usize;
    fn ncols(&self) -> usize;

    /// `out = A x`
    fn apply(&self, x: &[C64], out: &mut [C64]);

    /// `out = A* x`
    fn apply_adjoint(&self, x: &[C64], out: &mut [C64]);

    fn to_dense(&self) -> CMatrix {
        let (m, n) = (self.nrows(), self.ncols());
        let mut dense = CMatrix::zeros(m, n);
        let mut unit = vec![ZERO; n];
        let mut col = vec![ZERO; m];
        for j in 0..n {
            unit[j] = ONE;
            self.apply(&unit, &mut col);
            dense.column_mut(j).copy_from_slice(&col);
            unit[j] = ZERO;
        }
        dense
    }
}

impl LinearOperator for CMatrix {
    fn nrows(&self) -> usize {
        self.shape().0
    }

    fn ncols(&self) -> usize {
        self.shape().1
    }

    fn apply(&self, x: &[C64], out: &mut [C64]) {
        let xv = DVectorView::from_slice(x, x.len());
        let mut ov = DVectorViewMut::from_slice(out, self.shape().0);
        ov.gemv(ONE, self, &xv, ZERO);
    }

    fn apply_adjoint(&self, x: &[C64], out: &mut [C64]) {
        let xv = DVectorView::from_slice(x, x.len());
        let mut ov = DVectorViewMut::from_slice(out, self.shape().1);
        ov.gemv_ad(ONE, self, &xv, ZERO);
    }

    fn to_dense(&self) -> CMatrix {
        self.clone()
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct NormOptions {
    /// Relative accuracy target for the largest singular value.
    pub rel_tol: f64,
    /// Iteration cap for the Krylov solver.
    pub max_iter: usize,
    /// Operators with `min(nrows, ncols)` at or below this size use a dense SVD.
    pub dense_cutoff: usize,
    /// Dense fallback limit when the Krylov solver hits its cap.
    pub fallback_max_dim: usize,
    pub seed: u64,
}

impl Default for NormOptions {
    fn default() -> Self {
        Self {
            rel_tol: 1e-9,
            max_iter: 10_000,
            dense_cutoff: 32,
            fallback_max_dim: 512,
            seed: 0x5eed_0f_d1ff,
        }
    }
}

/// Largest singular value of `op`.
pub fn operator_norm<A: LinearOperator + ?Sized>(op: &A, opts: &NormOptions) -> Result<f64> {
    let (m, n) = (op.nrows(), op.ncols());
    if m == 0 || n == 0 {
        return Ok(0.0);
    }
    if m.min(n) <= opts.dense_cutoff {
        return Ok(spectral_norm_dense(&op.to_dense()));
    }
    match lanczos_top_eigenvalue(op, opts) {
        Some(lambda) => Ok(lambda.max(0.0).sqrt()),
        None if m.max(n) <= opts.fallback_max_dim => Ok(spectral_norm_dense(&op.to_dense())),
        None => Err(Error::numerical(format!(
            "norm iteration did not reach relative tolerance {:.1e} within {} steps",
            opts.rel_tol, opts.max_iter
        ))),
    }
}

fn dot(x: &[C64], y: &[C64]) -> C64 {
    // ⟨x, y⟩ with conjugation on y
    x.iter().zip(y).map(|(a, b)| a * b.conj()).sum()
}

fn norm2(x: &[C64]) -> f64 {
    x.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt()
}

/// Top eigenvalue of `A*A`, or `None` if the cap is reached first.
fn lanczos_top_eigenvalue<A: LinearOperator + ?Sized>(op: &A, opts: &NormOptions) -> Option<f64> {
    let n = op.ncols();
    let steps = n.min(opts.max_iter.max(1));

    let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
    let mut q: Vec<C64> = (0..n)
        .map(|_| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
        .collect();
    let q_norm = norm2(&q);
    q.iter_mut().for_each(|z| *z /= q_norm);

    let mut basis: Vec<Vec<C64>> = Vec::with_capacity(steps.min(512));
    let mut alpha: Vec<f64> = Vec::new();
    let mut beta: Vec<f64> = Vec::new();
    let mut ay = vec![C64::default(); op.nrows()];
    let mut w = vec![C64::default(); n];

    for j in 0..steps {
        op.apply(&q, &mut ay);
        op.apply_adjoint(&ay, &mut w);
        let a_j = dot(&w, &q).re;
        basis.push(q.clone());
        alpha.push(a_j);

        // Two passes of classical Gram-Schmidt against the whole basis.
        for _ in 0..2 {
            for v in &basis {
                let h = dot(&w, v);
                w.iter_mut().zip(v).for_each(|(wi, vi)| *wi -= h * vi);
            }
        }
        let b_j = norm2(&w);

        let theta = tridiagonal_top_eigenvalue(&alpha, &beta);
        let scale = theta.abs().max(alpha.iter().cloned().fold(0.0, f64::max));
        if scale == 0.0 && b_j == 0.0 {
            return Some(0.0);
        }
        // Krylov space became invariant: the Ritz value is exact.
        if b_j <= 1e-14 * scale.max(f64::MIN_POSITIVE) || j + 1 == n {
            return Some(theta);
        }
        // The residual bounds |λ − θ|; the relative error in σ = √λ is half that in λ.
        let residual = b_j * tridiagonal_eigvec_last(&alpha, &beta, theta);
        if residual <= 2.0 * opts.rel_tol * theta {
            return Some(theta);
        }

        beta.push(b_j);
        q.iter_mut().zip(&w).for_each(|(qi, wi)| *qi = wi / b_j);
    }
    None
}

/// Number of eigenvalues of the symmetric tridiagonal matrix strictly below `x`.
fn sturm_count(alpha: &[f64], beta: &[f64], x: f64) -> usize {
    let mut count = 0;
    let mut d = 1.0;
    for i in 0..alpha.len() {
        let off = if i == 0 { 0.0 } else { beta[i - 1] * beta[i - 1] };
        d = alpha[i] - x - if i == 0 { 0.0 } else { off / d };
        if d == 0.0 {
            d = -f64::EPSILON * (alpha[i].abs() + x.abs()).max(f64::MIN_POSITIVE);
        }
        if d < 0.0 {
            count += 1;
        }
    }
    count
}

/// Largest eigenvalue of the tridiagonal matrix (diagonal `alpha`, off-diagonal `beta`) by bisection.
fn tridiagonal_top_eigenvalue(alpha: &[f64], beta: &[f64]) -> f64 {
    let k = alpha.len();
    let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
    for i in 0..k {
        let r = if i > 0 { beta[i - 1].abs() } else { 0.0 }
            + if i < beta.len() { beta[i].abs() } else { 0.0 };
        lo = lo.min(alpha[i] - r);
        hi = hi.max(alpha[i] + r);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if sturm_count(alpha, beta, mid) < k {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    hi
}

/// |last component| of the unit eigenvector for `theta`, by two steps of inverse iteration.
fn tridiagonal_eigvec_last(alpha: &[f64], beta: &[f64], theta: f64) -> f64 {
    let k = alpha.len();
    if k == 1 {
        return 1.0;
    }
    let shift = theta + 1e-13 * theta.abs().max(1e-300);
    let tiny = 1e-300_f64.max(f64::EPSILON * theta.abs() * 1e-3);
    let mut y = vec![1.0; k];
    for _ in 0..2 {
        // Thomas algorithm on (T − shift·I) x = y
        let mut c = vec![0.0; k];
        let mut d = vec![0.0; k];
        let mut piv = alpha[0] - shift;
        if piv.abs() < tiny {
            piv = tiny;
        }
        c[0] = beta[0] / piv;
        d[0] = y[0] / piv;
        for i in 1..k {
            let sub = beta[i - 1];
            piv = alpha[i] - shift - sub * c[i - 1];
            if piv.abs() < tiny {
                piv = tiny;
            }
            c[i] = if i < k - 1 { beta[i] / piv } else { 0.0 };
            d[i] = (y[i] - sub * d[i - 1]) / piv;
        }
        for i in (0..k - 1).rev() {
            d[i] -= c[i] * d[i + 1];
        }
        let nrm = d.iter().map(|v| v * v).sum::<f64>().sqrt();
        if !nrm.is_finite() || nrm == 0.0 {
            return 1.0;
        }
        y = d.iter().map(|v| v / nrm).collect();
    }
    y[k - 1].abs()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::CMatrix;

    fn random_matrix(rows: usize, cols: usize, seed: u64) -> CMatrix {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        CMatrix::from_fn(rows, cols, |_, _| C64::new(rng.gen::<f64>() - 0.5, rng.gen::<f64>() - 0.5))
    }

    #[test]
    fn krylov_matches_dense_svd() {
        let opts = NormOptions { dense_cutoff: 0, ..Default::default() };
        for (seed, (r, c)) in [(1, (60, 60)), (2, (80, 45)), (3, (40, 90))].into_iter() {
            let m = random_matrix(r, c, seed);
            let exact = spectral_norm_dense(&m);
            let est = operator_norm(&m, &opts).unwrap();
            assert!((est - exact).abs() <= 1e-8 * exact, "{est} vs {exact}");
        }
    }

    #[test]
    fn clustered_spectrum_converges() {
        // Singular values 1 − j·1e-4: a tight cluster at the top.
        let n = 200;
        let d: Vec<f64> = (0..n).map(|j| 1.0 - j as f64 * 1e-4).collect();
        let m = crate::linalg::real_diagonal(&d);
        let opts = NormOptions { dense_cutoff: 0, ..Default::default() };
        let est = operator_norm(&m, &opts).unwrap();
        assert!((est - 1.0).abs() < 1e-8, "{est}");
    }

    #[test]
    fn zero_operator_has_zero_norm() {
        let m = CMatrix::zeros(50, 50);
        let opts = NormOptions { dense_cutoff: 0, ..Default::default() };
        assert_eq!(operator_norm(&m, &opts).unwrap(), 0.0);
    }

    #[test]
    fn rank_one_operator() {
        let u = random_matrix(70, 1, 9);
        let v = random_matrix(70, 1, 10);
        let m = &u * v.adjoint();
        let exact = u.norm() * v.norm();
        let opts = NormOptions { dense_cutoff: 0, ..Default::default() };
        let est = operator_norm(&m, &opts).unwrap();
        assert!((est - exact).abs() < 1e-9 * exact);
    }

    #[test]
    fn bisection_finds_top_eigenvalue() {
        // [[2,1],[1,2]] has eigenvalues 1 and 3.
        let top = tridiagonal_top_eigenvalue(&[2.0, 2.0], &[1.0]);
        assert!((top - 3.0).abs() < 1e-13);
        let last = tridiagonal_eigvec_last(&[2.0, 2.0], &[1.0], top);
        assert!((last - 0.5f64.sqrt()).abs() < 1e-8);
    }

    #[test]
    fn deterministic_across_runs() {
        let m = random_matrix(100, 100, 4);
        let opts = NormOptions { dense_cutoff: 0, ..Default::default() };
        let a = operator_norm(&m, &opts).unwrap();
        let b = operator_norm(&m, &opts).unwrap();
        assert_eq!(a.to_bits(), b.to_bits());
    }
}
