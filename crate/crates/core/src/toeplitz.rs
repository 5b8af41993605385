//! Finite Toeplitz matrices `T_{rc} = c(r − c)` with FFT-backed products.
//!
//! A window of consecutive Fourier modes sees a multiplication operator as a
//! Toeplitz matrix, and the matrix only depends on the window length, not on
//! where the window sits. Products use the usual circulant embedding of
//! length `2^⌈log2(2n−1)⌉`.

use std::sync::Arc;

use rustfft::{Fft, FftPlanner};

use crate::error::Result;
use crate::linalg::{CMatrix, C64, ZERO};
use crate::norm::{operator_norm, LinearOperator, NormOptions};

#[derive(Clone, Debug, PartialEq)]
pub struct Toeplitz {
    size: usize,
    /// `coeffs[k + size − 1] = c(k)` for `k ∈ [1 − size, size − 1]`.
    coeffs: Vec<C64>,
}

impl Toeplitz {
    pub fn from_fn(size: usize, coeff: impl Fn(i64) -> C64) -> Self {
        let span = size as i64 - 1;
        let coeffs = if size == 0 {
            Vec::new()
        } else {
            (-span..=span).map(coeff).collect()
        };
        Self { size, coeffs }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// `c(k)`; zero outside the stored diagonal range.
    pub fn coeff(&self, k: i64) -> C64 {
        let span = self.size as i64 - 1;
        if self.size == 0 || k.abs() > span {
            ZERO
        } else {
            self.coeffs[(k + span) as usize]
        }
    }

    /// Iterator over `(k, c(k))`.
    pub fn diagonals(&self) -> impl Iterator<Item = (i64, C64)> + '_ {
        let span = self.size as i64 - 1;
        self.coeffs.iter().enumerate().map(move |(i, &c)| (i as i64 - span, c))
    }

    pub fn entry(&self, r: usize, c: usize) -> C64 {
        self.coeff(r as i64 - c as i64)
    }

    pub fn to_dense(&self) -> CMatrix {
        CMatrix::from_fn(self.size, self.size, |r, c| self.entry(r, c))
    }

    /// Leading principal block of the given size (any window of that length).
    pub fn compress(&self, size: usize) -> Toeplitz {
        assert!(size <= self.size, "cannot compress {} to {}", self.size, size);
        Toeplitz::from_fn(size, |k| self.coeff(k))
    }

    pub fn map_coeffs(&self, f: impl Fn(i64, C64) -> C64) -> Toeplitz {
        Toeplitz::from_fn(self.size, |k| f(k, self.coeff(k)))
    }

    pub fn adjoint(&self) -> Toeplitz {
        self.map_coeffs(|k, _| self.coeff(-k).conj())
    }

    pub fn is_hermitian(&self) -> bool {
        self.diagonals().all(|(k, c)| c == self.coeff(-k).conj())
    }

    pub fn fft(&self) -> ToeplitzFft {
        ToeplitzFft::new(self)
    }

    pub fn norm(&self, opts: &NormOptions) -> Result<f64> {
        if self.size <= opts.dense_cutoff {
            return operator_norm(&self.to_dense(), opts);
        }
        operator_norm(&self.fft(), opts)
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        let mut out = vec![ZERO; self.size];
        self.fft().apply(x, &mut out);
        out
    }
}

/// Precomputed circulant spectra for `T` and `T*`.
pub struct ToeplitzFft {
    size: usize,
    len: usize,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
    spectrum: Vec<C64>,
    adjoint_spectrum: Vec<C64>,
}

impl ToeplitzFft {
    fn new(t: &Toeplitz) -> Self {
        let size = t.size.max(1);
        let len = (2 * size - 1).next_power_of_two();
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(len);
        let inverse = planner.plan_fft_inverse(len);

        let embed = |coeff: &dyn Fn(i64) -> C64| {
            let mut col = vec![ZERO; len];
            for j in 0..t.size {
                col[j] = coeff(j as i64);
                if j > 0 {
                    col[len - j] = coeff(-(j as i64));
                }
            }
            forward.process(&mut col);
            col
        };
        let spectrum = embed(&|k| t.coeff(k));
        let adjoint_spectrum = embed(&|k| t.coeff(-k).conj());
        Self { size: t.size, len, forward, inverse, spectrum, adjoint_spectrum }
    }

    fn convolve(&self, spectrum: &[C64], x: &[C64], out: &mut [C64]) {
        let mut buf = vec![ZERO; self.len];
        buf[..self.size].copy_from_slice(&x[..self.size]);
        self.forward.process(&mut buf);
        buf.iter_mut().zip(spectrum).for_each(|(b, s)| *b *= s);
        self.inverse.process(&mut buf);
        let scale = 1.0 / self.len as f64;
        out.iter_mut().zip(&buf).for_each(|(o, b)| *o = b * scale);
    }
}

impl LinearOperator for ToeplitzFft {
    fn nrows(&self) -> usize {
        self.size
    }

    fn ncols(&self) -> usize {
        self.size
    }

    fn apply(&self, x: &[C64], out: &mut [C64]) {
        self.convolve(&self.spectrum, x, out);
    }

    fn apply_adjoint(&self, x: &[C64], out: &mut [C64]) {
        self.convolve(&self.adjoint_spectrum, x, out);
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, spectral_norm_dense, CVector};

    fn sample(size: usize) -> Toeplitz {
        Toeplitz::from_fn(size, |k| C64::new(1.0 / (1.0 + k.abs() as f64), 0.3 * k as f64 / (1 + k * k) as f64))
    }

    #[test]
    fn fft_product_matches_dense() {
        for size in [1, 2, 7, 64, 100] {
            let t = sample(size);
            let x: Vec<C64> = (0..size).map(|j| C64::new(j as f64 * 0.1, 1.0 - j as f64 * 0.05)).collect();
            let dense = t.to_dense() * CVector::from_vec(x.clone());
            let fast = t.apply(&x);
            let diff = dense.iter().zip(&fast).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(diff < 1e-12, "size {size}: {diff}");

            let mut adj = vec![ZERO; size];
            t.fft().apply_adjoint(&x, &mut adj);
            let dense_adj = t.to_dense().adjoint() * CVector::from_vec(x);
            let diff = dense_adj.iter().zip(&adj).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            assert!(diff < 1e-12);
        }
    }

    #[test]
    fn compress_is_leading_block() {
        let t = sample(10);
        let c = t.compress(4);
        assert!(max_abs(&(c.to_dense() - t.to_dense().view((0, 0), (4, 4)))) == 0.0);
    }

    #[test]
    fn norm_matches_dense_svd() {
        let t = sample(150);
        let opts = NormOptions::default();
        let exact = spectral_norm_dense(&t.to_dense());
        assert!((t.norm(&opts).unwrap() - exact).abs() < 1e-8 * exact);
    }

    #[test]
    fn adjoint_conjugates_flipped_coefficients() {
        let t = sample(5);
        assert!(t.is_hermitian());
        let u = Toeplitz::from_fn(5, |k| C64::new(k as f64, 1.0));
        assert!(max_abs(&(u.adjoint().to_dense() - u.to_dense().adjoint())) == 0.0);
        assert!(!u.is_hermitian());
    }
}
