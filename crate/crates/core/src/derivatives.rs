//! Weak derivatives `wD(a)`, their iterates, boundedness verdicts from
//! truncation sweeps, and the norms `|||a|||_n` and `‖a‖_wncg^n`.
//!
//! Boundedness of a block matrix cannot be decided from finitely many
//! windows. Truncated models therefore produce a curve `n ↦ ‖π_n(y)‖` and a
//! tri-state verdict from the log-log slope of its upper half; genuinely
//! finite-dimensional models skip the sweep, since there `wD(a) = Da − aD`.

use std::sync::Arc;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::blockspace::{commutator_with_d, embed_operator, truncate};
use crate::error::{Error, Result};
use crate::linalg::{commutator, CMatrix};
use crate::norm::{operator_norm, NormOptions};
use crate::operator::Operator;
use crate::spectral::{abs_operator, band_decompose, ModelKind, SelfAdjointModel};

/// Largest order accepted by [`n_norm`]; `1/k!` makes later terms irrelevant.
pub const MAX_NORM_ORDER: usize = 20;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum BoundednessStatus {
    Bounded,
    Unbounded,
    Inconclusive,
}

impl BoundednessStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            BoundednessStatus::Bounded => "Bounded",
            BoundednessStatus::Unbounded => "Unbounded",
            BoundednessStatus::Inconclusive => "Inconclusive",
        }
    }
}

/// Slope thresholds for [`classify_growth`].
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct GrowthThresholds {
    /// Slopes below this are Bounded.
    pub bounded_below: f64,
    /// Slopes above this are Unbounded.
    pub unbounded_above: f64,
}

impl Default for GrowthThresholds {
    fn default() -> Self {
        Self { bounded_below: 0.02, unbounded_above: 0.10 }
    }
}

impl GrowthThresholds {
    pub fn validate(&self) -> Result<()> {
        if !(self.bounded_below > 0.0 && self.unbounded_above >= self.bounded_below) {
            return Err(Error::invalid("growth thresholds must satisfy 0 < bounded ≤ unbounded"));
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct BoundednessVerdict {
    pub status: BoundednessStatus,
    /// Last curve value; meaningful when Bounded.
    pub norm_estimate: f64,
    /// Least-squares slope of `log y` against `log x` over the upper half of the curve.
    pub growth_exponent: f64,
    pub curve: Vec<(f64, f64)>,
    /// Some window ran past the edge of a truncated model.
    pub leaked: bool,
}

impl BoundednessVerdict {
    pub fn is_bounded(&self) -> bool {
        self.status == BoundednessStatus::Bounded
    }
}

/// Least-squares slope of `ln y` on `ln x`.
pub fn loglog_slope(points: &[(f64, f64)]) -> f64 {
    let n = points.len() as f64;
    let (xs, ys): (Vec<f64>, Vec<f64>) = points.iter().map(|&(x, y)| (x.ln(), y.ln())).unzip();
    let (mx, my) = (xs.iter().sum::<f64>() / n, ys.iter().sum::<f64>() / n);
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Tri-state growth classification of a curve `(x, y)` with `x` increasing.
pub fn classify_growth(curve: &[(f64, f64)], thresholds: &GrowthThresholds) -> Result<BoundednessVerdict> {
    thresholds.validate()?;
    if curve.len() < 4 {
        return Err(Error::TooFewPoints { needed: 4, got: curve.len() });
    }
    if curve.iter().any(|&(x, y)| !(x > 0.0) || !y.is_finite() || y < 0.0) {
        return Err(Error::invalid("curve needs positive abscissae and finite non-negative values"));
    }
    if curve.windows(2).any(|w| w[1].0 <= w[0].0) {
        return Err(Error::invalid("curve abscissae must be strictly increasing"));
    }

    let last = curve[curve.len() - 1].1;
    let upper: Vec<(f64, f64)> = curve[curve.len() / 2..].iter().copied().filter(|p| p.1 > 0.0).collect();
    let (status, slope) = if last == 0.0 {
        (BoundednessStatus::Bounded, 0.0)
    } else if upper.len() < 2 {
        (BoundednessStatus::Inconclusive, 0.0)
    } else {
        let slope = loglog_slope(&upper);
        let status = if slope < thresholds.bounded_below {
            BoundednessStatus::Bounded
        } else if slope > thresholds.unbounded_above {
            BoundednessStatus::Unbounded
        } else {
            BoundednessStatus::Inconclusive
        };
        (status, slope)
    };
    Ok(BoundednessVerdict {
        status,
        norm_estimate: last,
        growth_exponent: slope,
        curve: curve.to_vec(),
        leaked: false,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DerivativeOptions {
    pub thresholds: GrowthThresholds,
    pub norm: NormOptions,
}

impl Default for DerivativeOptions {
    fn default() -> Self {
        Self { thresholds: GrowthThresholds::default(), norm: NormOptions::default() }
    }
}

#[derive(Clone, Debug)]
pub struct WeakDerivative {
    pub verdict: BoundednessVerdict,
    /// `π_n([m(D), m(a)])` at the largest window, as an ambient operator; set when Bounded.
    pub derivative: Option<Operator>,
    pub window: i64,
}

/// Windows `⌈W/32⌉, ⌈W/16⌉, …, W` up to the full window `W` of a truncated
/// model; the single full window otherwise.
pub fn default_sweep(model: &SelfAdjointModel) -> Vec<i64> {
    let full = band_decompose(model).full_window();
    if !model.is_truncated() {
        return vec![full];
    }
    let mut sweep: Vec<i64> = (0..=5).rev().map(|k| (full + (1 << k) - 1) >> k).collect();
    sweep.dedup();
    if sweep.len() < 4 {
        sweep = (1..=full).collect();
    }
    sweep
}

fn validate_sweep(sweep: &[i64]) -> Result<()> {
    if sweep.is_empty() {
        return Err(Error::invalid("sweep is empty"));
    }
    if sweep[0] < 1 || sweep.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::invalid("sweep must be strictly increasing windows ≥ 1"));
    }
    Ok(())
}

/// Number of circle modes in the window `(−n, n]` of a bandlimit-`L` model.
fn circle_window_size(n: i64, bandlimit: usize) -> usize {
    let l = bandlimit as i64;
    (n.min(l) - (1 - n).max(-l) + 1) as usize
}

/// Raw curves of compressions are nondecreasing; the envelope removes rounding-level dips.
fn monotone_envelope(curve: &mut [(f64, f64)]) {
    let mut best = 0.0f64;
    for p in curve.iter_mut() {
        best = best.max(p.1);
        p.1 = best;
    }
}

/// Classify `[m(D), m(a)]` and, when bounded, materialise `wD(a)`.
pub fn weak_derivative(
    model: &SelfAdjointModel,
    a: &Operator,
    sweep: &[i64],
    opts: &DerivativeOptions,
) -> Result<WeakDerivative> {
    validate_sweep(sweep)?;
    model.check_operator_dim(a.dim())?;

    if !model.is_truncated() {
        let wd = finite_commutator(model, &a.to_dense());
        let norm = operator_norm(&wd, &opts.norm)?;
        let window = band_decompose(model).full_window();
        let verdict = BoundednessVerdict {
            status: BoundednessStatus::Bounded,
            norm_estimate: norm,
            growth_exponent: 0.0,
            curve: vec![(window as f64, norm)],
            leaked: false,
        };
        return Ok(WeakDerivative { verdict, derivative: Some(Operator::Dense(wd)), window });
    }

    let n_max = *sweep.last().expect("validated non-empty");
    let (mut curve, leaked, derivative) = match (model.kind(), a, model.bandlimit()) {
        (ModelKind::Circle, Operator::Toeplitz(t), Some(l)) => {
            // [D, M_f]_{rc} = (r − c) f̂(r − c): still Toeplitz.
            let y = t.map_coeffs(|k, c| c * k as f64);
            let norms = sweep
                .par_iter()
                .map(|&n| y.compress(circle_window_size(n, l)).norm(&opts.norm))
                .collect::<Result<Vec<f64>>>()?;
            let curve: Vec<(f64, f64)> = sweep.iter().map(|&n| n as f64).zip(norms).collect();
            let leaked = n_max > l as i64;
            let size = circle_window_size(n_max, l);
            let materialized = if size == y.size() {
                Operator::Toeplitz(y)
            } else {
                let lo = (1 - n_max + l as i64) as usize;
                let mut m = CMatrix::zeros(y.size(), y.size());
                m.view_mut((lo, lo), (size, size)).copy_from(&y.compress(size).to_dense());
                Operator::Dense(m)
            };
            (curve, leaked, materialized)
        }
        _ => {
            let bd = Arc::new(band_decompose(model));
            let y = commutator_with_d(&embed_operator(&a.to_dense(), &bd)?);
            let truncations = sweep.iter().map(|&n| truncate(&y, n)).collect::<Result<Vec<_>>>()?;
            let norms = truncations
                .par_iter()
                .map(|t| operator_norm(&t.matrix, &opts.norm))
                .collect::<Result<Vec<f64>>>()?;
            let curve: Vec<(f64, f64)> = sweep.iter().map(|&n| n as f64).zip(norms).collect();
            let leaked = truncations.iter().any(|t| t.window.leaked);
            let last = truncations.last().expect("validated non-empty");
            (curve, leaked, Operator::Dense(last.to_ambient(&bd)))
        }
    };

    monotone_envelope(&mut curve);
    let mut verdict = if curve.len() >= 4 {
        classify_growth(&curve, &opts.thresholds)?
    } else {
        return Err(Error::TooFewPoints { needed: 4, got: curve.len() });
    };
    verdict.leaked = leaked;
    let derivative = verdict.is_bounded().then_some(derivative);
    Ok(WeakDerivative { verdict, derivative, window: n_max })
}

/// `Da − aD` for a finite model, entrywise when `D` is diagonal.
pub fn finite_commutator(model: &SelfAdjointModel, a: &CMatrix) -> CMatrix {
    match model.eigenbasis() {
        Some(_) => commutator(&model.to_dense(), a),
        None => {
            let lambda = model.eigenvalues();
            CMatrix::from_fn(a.nrows(), a.ncols(), |i, j| a[(i, j)] * (lambda[i] - lambda[j]))
        }
    }
}

/// `a, wD(a), …, wD^k(a)` with one verdict per derivative order.
#[derive(Clone, Debug)]
pub struct DerivativeChain {
    pub order: usize,
    pub terms: Vec<Operator>,
    pub verdicts: Vec<BoundednessVerdict>,
}

impl DerivativeChain {
    pub fn is_fully_bounded(&self) -> bool {
        self.verdicts.len() == self.order && self.verdicts.iter().all(|v| v.is_bounded())
    }

    /// First order (1-based) that failed to classify Bounded.
    pub fn first_unbounded_order(&self) -> Option<usize> {
        self.verdicts
            .iter()
            .position(|v| !v.is_bounded())
            .map(|i| i + 1)
            .or_else(|| (self.verdicts.len() < self.order).then_some(self.verdicts.len() + 1))
    }
}

/// Iterates [`weak_derivative`], stopping at the first order that is not Bounded.
pub fn higher_derivative(
    model: &SelfAdjointModel,
    a: &Operator,
    k: usize,
    sweep: &[i64],
    opts: &DerivativeOptions,
) -> Result<DerivativeChain> {
    if k == 0 {
        return Err(Error::invalid("derivative order must be at least 1"));
    }
    let mut terms = vec![a.clone()];
    let mut verdicts = Vec::with_capacity(k);
    for _ in 0..k {
        let wd = weak_derivative(model, terms.last().expect("non-empty"), sweep, opts)?;
        verdicts.push(wd.verdict);
        match wd.derivative {
            Some(d) => terms.push(d),
            None => break,
        }
    }
    Ok(DerivativeChain { order: k, terms, verdicts })
}

/// `|||a|||_n = Σ_{k=0}^{n} ‖wD^k(a)‖ / k!`.
pub fn n_norm(chain: &DerivativeChain, opts: &NormOptions) -> Result<f64> {
    if chain.order > MAX_NORM_ORDER {
        return Err(Error::invalid(format!("order {} exceeds {MAX_NORM_ORDER}", chain.order)));
    }
    if let Some(order) = chain.first_unbounded_order() {
        return Err(Error::NotBounded { order });
    }
    let mut factorial = 1.0;
    let mut total = 0.0;
    for (k, term) in chain.terms.iter().enumerate() {
        if k > 0 {
            factorial *= k as f64;
        }
        total += term.norm(opts)? / factorial;
    }
    Ok(total)
}

/// `‖a‖_wncg^n = ‖wD(a)‖ + |||a|||_n` with the chain taken for `|D|`.
pub fn wncg_norm(
    model: &SelfAdjointModel,
    a: &Operator,
    n: usize,
    sweep: &[i64],
    opts: &DerivativeOptions,
) -> Result<f64> {
    let wd = weak_derivative(model, a, sweep, opts)?;
    let first = match &wd.derivative {
        Some(d) => d.norm(&opts.norm)?,
        None => return Err(Error::NotBounded { order: 1 }),
    };
    let abs = abs_operator(model);
    let abs_sweep = if model.is_truncated() { default_sweep(&abs) } else { sweep.to_vec() };
    let chain_norm = if n == 0 {
        a.norm(&opts.norm)?
    } else {
        n_norm(&higher_derivative(&abs, a, n, &abs_sweep, opts)?, &opts.norm)?
    };
    Ok(first + chain_norm)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn th() -> GrowthThresholds {
        GrowthThresholds::default()
    }

    #[test]
    fn constant_curve_is_bounded() {
        let v = classify_growth(&[(5.0, 1.0), (10.0, 1.0), (20.0, 1.0), (40.0, 1.0)], &th()).unwrap();
        assert_eq!(v.status, BoundednessStatus::Bounded);
        assert_eq!(v.norm_estimate, 1.0);
        assert_eq!(v.growth_exponent, 0.0);
    }

    #[test]
    fn quarter_power_law_is_unbounded() {
        let curve: Vec<(f64, f64)> = [8.0, 16.0, 32.0, 64.0, 128.0].iter().map(|&n: &f64| (n, 3.0 * n.powf(0.25))).collect();
        let v = classify_growth(&curve, &th()).unwrap();
        assert_eq!(v.status, BoundednessStatus::Unbounded);
        assert!((v.growth_exponent - 0.25).abs() < 1e-12);
    }

    #[test]
    fn saturating_curve_is_bounded() {
        let curve: Vec<(f64, f64)> = [100.0, 200.0, 400.0, 800.0].iter().map(|&n: &f64| (n, 1.0 - 1.0 / n)).collect();
        assert_eq!(classify_growth(&curve, &th()).unwrap().status, BoundednessStatus::Bounded);
    }

    #[test]
    fn middle_band_is_inconclusive() {
        let curve: Vec<(f64, f64)> = [8.0, 16.0, 32.0, 64.0].iter().map(|&n: &f64| (n, n.powf(0.05))).collect();
        assert_eq!(classify_growth(&curve, &th()).unwrap().status, BoundednessStatus::Inconclusive);
    }

    #[test]
    fn growth_rejects_short_or_malformed_curves() {
        assert!(matches!(
            classify_growth(&[(1.0, 1.0), (2.0, 1.0), (3.0, 1.0)], &th()),
            Err(Error::TooFewPoints { needed: 4, got: 3 })
        ));
        assert!(classify_growth(&[(1.0, 1.0), (1.0, 1.0), (3.0, 1.0), (4.0, 1.0)], &th()).is_err());
        let bad = GrowthThresholds { bounded_below: 0.2, unbounded_above: 0.1 };
        assert!(classify_growth(&[(1.0, 1.0), (2.0, 1.0), (3.0, 1.0), (4.0, 1.0)], &bad).is_err());
    }

    #[test]
    fn zero_curve_is_bounded_at_zero() {
        let v = classify_growth(&[(1.0, 0.0), (2.0, 0.0), (3.0, 0.0), (4.0, 0.0)], &th()).unwrap();
        assert_eq!(v.status, BoundednessStatus::Bounded);
        assert_eq!(v.norm_estimate, 0.0);
    }

    #[test]
    fn default_sweeps() {
        let circle = SelfAdjointModel::circle(512).unwrap();
        assert_eq!(default_sweep(&circle), vec![17, 33, 65, 129, 257, 513]);
        let small = SelfAdjointModel::circle(3).unwrap();
        assert_eq!(default_sweep(&small), vec![1, 2, 3, 4]);
        let finite = SelfAdjointModel::diagonal(vec![0.5, 2.5]).unwrap();
        assert_eq!(default_sweep(&finite), vec![3]);
    }

    #[test]
    fn empty_sweep_is_an_error() {
        let m = SelfAdjointModel::diagonal(vec![1.0, 2.0]).unwrap();
        assert!(weak_derivative(&m, &Operator::identity(2), &[], &DerivativeOptions::default()).is_err());
        assert!(weak_derivative(&m, &Operator::identity(2), &[3, 2], &DerivativeOptions::default()).is_err());
    }

    #[test]
    fn circle_window_sizes() {
        assert_eq!(circle_window_size(1, 4), 2);
        assert_eq!(circle_window_size(4, 4), 8);
        assert_eq!(circle_window_size(5, 4), 9);
        assert_eq!(circle_window_size(9, 4), 9);
    }
}
