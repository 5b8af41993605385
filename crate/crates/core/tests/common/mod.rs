#![allow(dead_code)]

use opderiv::linalg::{CMatrix, C64};
use opderiv::SelfAdjointModel;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_matrix(rng: &mut ChaCha8Rng, n: usize) -> CMatrix {
    CMatrix::from_fn(n, n, |_, _| C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)))
}

/// Hermitian with spectrum spread over several bands.
pub fn random_hermitian(rng: &mut ChaCha8Rng, n: usize, scale: f64) -> CMatrix {
    let m = random_matrix(rng, n);
    (&m + m.adjoint()) * C64::from(scale / 2.0)
}

pub fn random_model(rng: &mut ChaCha8Rng, n: usize) -> (SelfAdjointModel, CMatrix) {
    let d = random_hermitian(rng, n, 3.0);
    (SelfAdjointModel::hermitian(d.clone()).unwrap(), d)
}

pub fn svd_norm(m: &CMatrix) -> f64 {
    m.clone().singular_values().max()
}

pub fn loglog_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let lx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
    let ly: Vec<f64> = ys.iter().map(|y| y.ln()).collect();
    let (mx, my) = (lx.iter().sum::<f64>() / n, ly.iter().sum::<f64>() / n);
    let sxy: f64 = lx.iter().zip(&ly).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = lx.iter().map(|x| (x - mx).powi(2)).sum();
    sxy / sxx
}
