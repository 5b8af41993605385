//! The group `α_t(a) = e^{itD} a e^{−itD}` and everything measured along it:
//! Lipschitz ratios, the continuity modulus of `t ↦ α_t(b)`, matrix-element
//! difference quotients, vector domain probes and the final
//! Strong / WeakOnly / NotWeak / Inconclusive classification.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::derivatives::{
    classify_growth, default_sweep, higher_derivative, weak_derivative, BoundednessStatus, BoundednessVerdict,
    DerivativeChain, DerivativeOptions, GrowthThresholds,
};
use crate::error::{Error, Result};
use crate::linalg::{inner, CMatrix, CVector, C64, I};
use crate::norm::NormOptions;
use crate::operator::Operator;
use crate::spectral::{ModelKind, SelfAdjointModel};

/// `e^{itD} a e^{−itD}`.
pub fn alpha(model: &SelfAdjointModel, a: &Operator, t: f64) -> Result<Operator> {
    model.check_operator_dim(a.dim())?;
    if let (ModelKind::Circle, Operator::Toeplitz(tp)) = (model.kind(), a) {
        // Translation of the symbol: f̂(k) ↦ e^{ikt} f̂(k).
        return Ok(Operator::Toeplitz(tp.map_coeffs(|k, c| c * C64::from_polar(1.0, k as f64 * t))));
    }
    let lambda = model.eigenvalues();
    let m = model.matrix_to_eigen(&a.to_dense());
    let conj = CMatrix::from_fn(m.nrows(), m.ncols(), |i, j| {
        m[(i, j)] * C64::from_polar(1.0, t * (lambda[i] - lambda[j]))
    });
    Ok(Operator::Dense(model.matrix_from_eigen(&conj)))
}

/// `α_t(a) − a`, kept Toeplitz on the circle.
pub fn alpha_difference(model: &SelfAdjointModel, a: &Operator, t: f64) -> Result<Operator> {
    alpha(model, a, t)?.sub(a)
}

/// Log-spaced time grids coupled to the model's truncation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TimeGridConfig {
    /// Truncated models only trust `t ≥ c/L`.
    pub floor_coefficient: f64,
    pub points_per_decade: usize,
    pub decades: usize,
    /// Finite models start at `finite_floor / max(‖D‖, 1)`.
    pub finite_floor: f64,
    /// Decades used by vector domain probes.
    pub probe_decades: usize,
}

impl Default for TimeGridConfig {
    fn default() -> Self {
        Self { floor_coefficient: 10.0, points_per_decade: 24, decades: 3, finite_floor: 1e-4, probe_decades: 2 }
    }
}

impl TimeGridConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.floor_coefficient > 0.0 && self.finite_floor > 0.0) {
            return Err(Error::invalid("time-grid floors must be positive"));
        }
        if self.points_per_decade == 0 || self.decades == 0 || self.probe_decades == 0 {
            return Err(Error::invalid("time grids need at least one point per decade and one decade"));
        }
        Ok(())
    }

    /// Smallest admissible `t` for the model.
    pub fn floor(&self, model: &SelfAdjointModel) -> f64 {
        match model.bandlimit() {
            Some(l) => self.floor_coefficient / l as f64,
            None => self.finite_floor / model.spectral_radius().max(1.0),
        }
    }

    pub fn grid(&self, model: &SelfAdjointModel) -> Vec<f64> {
        log_grid(self.floor(model), self.points_per_decade, self.decades)
    }

    pub fn probe_grid(&self, model: &SelfAdjointModel) -> Vec<f64> {
        log_grid(self.floor(model), self.points_per_decade, self.probe_decades)
    }
}

/// `floor · 10^{j/ppd}` for `j = 0..=ppd·decades`, ascending.
pub fn log_grid(floor: f64, points_per_decade: usize, decades: usize) -> Vec<f64> {
    (0..=points_per_decade * decades)
        .map(|j| floor * 10f64.powf(j as f64 / points_per_decade as f64))
        .collect()
}

fn checked_grid(grid: &[f64], floor: f64) -> Result<Vec<f64>> {
    let mut g: Vec<f64> = grid.iter().copied().filter(|&t| t.is_finite() && t > 0.0 && t >= floor).collect();
    g.sort_by(f64::total_cmp);
    g.dedup();
    if g.is_empty() {
        return Err(Error::invalid("time grid is empty after applying the floor"));
    }
    Ok(g)
}

#[derive(Clone, Debug, PartialEq)]
pub struct LipschitzReport {
    pub t_grid: Vec<f64>,
    pub ratios: Vec<f64>,
    pub sup_ratio: f64,
    /// Ratio at the smallest admitted `t`.
    pub limit_estimate: f64,
    pub valid_floor: f64,
}

/// `‖α_t(a) − a‖ / t` over the admitted part of `t_grid`.
pub fn lipschitz_estimate(
    model: &SelfAdjointModel,
    a: &Operator,
    t_grid: &[f64],
    valid_floor: f64,
    opts: &NormOptions,
) -> Result<LipschitzReport> {
    let t_grid = checked_grid(t_grid, valid_floor)?;
    let ratios = t_grid
        .par_iter()
        .map(|&t| Ok(alpha_difference(model, a, t)?.norm(opts)? / t))
        .collect::<Result<Vec<f64>>>()?;
    let sup_ratio = ratios.iter().copied().fold(0.0, f64::max);
    let limit_estimate = ratios[0];
    Ok(LipschitzReport { t_grid, ratios, sup_ratio, limit_estimate, valid_floor })
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContinuityModulus {
    /// Decreasing.
    pub delta_grid: Vec<f64>,
    pub omega: Vec<f64>,
}

impl ContinuityModulus {
    /// `ω` at the smallest `δ`.
    pub fn omega_min(&self) -> f64 {
        *self.omega.last().unwrap_or(&0.0)
    }

    pub fn delta_min(&self) -> f64 {
        *self.delta_grid.last().unwrap_or(&0.0)
    }
}

/// `ω(δ) = max_{t ∈ grid, t ≤ δ} ‖α_t(b) − b‖`; `‖α_{−t}(b) − b‖ = ‖α_t(b) − b‖`,
/// so positive `t` suffice.
pub fn continuity_modulus(
    model: &SelfAdjointModel,
    b: &Operator,
    delta_grid: &[f64],
    opts: &NormOptions,
) -> Result<ContinuityModulus> {
    let ascending = checked_grid(delta_grid, 0.0)?;
    let diffs = ascending
        .par_iter()
        .map(|&t| alpha_difference(model, b, t)?.norm(opts))
        .collect::<Result<Vec<f64>>>()?;
    let mut running = 0.0f64;
    let omega_up: Vec<f64> = diffs
        .iter()
        .map(|&d| {
            running = running.max(d);
            running
        })
        .collect();
    Ok(ContinuityModulus {
        delta_grid: ascending.into_iter().rev().collect(),
        omega: omega_up.into_iter().rev().collect(),
    })
}

/// `⟨(α_t(a) − a)μ, ν⟩ / (it)` for each `t`.
pub fn matrix_element_quotient(
    model: &SelfAdjointModel,
    a: &Operator,
    mu: &CVector,
    nu: &CVector,
    t_grid: &[f64],
) -> Result<Vec<C64>> {
    model.check_operator_dim(mu.len())?;
    model.check_operator_dim(nu.len())?;
    t_grid
        .iter()
        .map(|&t| {
            let diff = alpha_difference(model, a, t)?;
            Ok(inner(&diff.apply(mu), nu) / (I * t))
        })
        .collect()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum DomainVerdict {
    InDomain,
    NotInDomain,
    Inconclusive,
}

impl DomainVerdict {
    pub fn as_str(self) -> &'static str {
        match self {
            DomainVerdict::InDomain => "InDomain",
            DomainVerdict::NotInDomain => "NotInDomain",
            DomainVerdict::Inconclusive => "Inconclusive",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct DomainProbe {
    pub s_grid: Vec<f64>,
    /// `‖(e^{isD}ξ − ξ)/s‖`, aligned with `s_grid`.
    pub quotients: Vec<f64>,
    pub sup: f64,
    /// Slope of `log q` against `log(1/s)` at the small-`s` end.
    pub growth_exponent: f64,
    pub verdict: DomainVerdict,
    /// Extrapolated `‖Dξ‖` when InDomain.
    pub limit_estimate: Option<f64>,
}

/// Probes `ξ ∈ dom(D)` through `‖(e^{isD}ξ − ξ)/s‖` as `s ↓ 0`.
pub fn vector_domain_probe(
    model: &SelfAdjointModel,
    xi: &CVector,
    s_grid: &[f64],
    thresholds: &GrowthThresholds,
) -> Result<DomainProbe> {
    model.check_operator_dim(xi.len())?;
    let s_grid = checked_grid(s_grid, 0.0)?;
    let coords = model.to_eigen(xi);
    let lambda = model.eigenvalues();
    let quotients: Vec<f64> = s_grid
        .par_iter()
        .map(|&s| {
            let sq: f64 = coords
                .iter()
                .zip(&lambda)
                .map(|(z, &l)| (z * (C64::from_polar(1.0, s * l) - 1.0)).norm_sqr())
                .sum();
            sq.sqrt() / s
        })
        .collect();

    // Abscissa 1/s increases as s shrinks.
    let curve: Vec<(f64, f64)> = s_grid.iter().zip(&quotients).rev().map(|(&s, &q)| (1.0 / s, q)).collect();
    let verdict = classify_growth(&curve, thresholds)?;
    let status = match verdict.status {
        BoundednessStatus::Bounded => DomainVerdict::InDomain,
        BoundednessStatus::Unbounded => DomainVerdict::NotInDomain,
        BoundednessStatus::Inconclusive => DomainVerdict::Inconclusive,
    };
    let limit_estimate = (status == DomainVerdict::InDomain).then(|| richardson_limit(&s_grid, &quotients));
    Ok(DomainProbe {
        sup: quotients.iter().copied().fold(0.0, f64::max),
        growth_exponent: verdict.growth_exponent,
        s_grid,
        quotients,
        verdict: status,
        limit_estimate,
    })
}

/// `q(s)² = ‖Dξ‖² − c s² + O(s⁴)`: fit a quadratic in `s²` through the three
/// smallest grid points and read off its value at 0.
fn richardson_limit(s: &[f64], q: &[f64]) -> f64 {
    if s.len() < 3 {
        return q[0];
    }
    let x: Vec<f64> = s[..3].iter().map(|v| v * v).collect();
    let y: Vec<f64> = q[..3].iter().map(|v| v * v).collect();
    // Lagrange interpolation at 0.
    let mut value = 0.0;
    for i in 0..3 {
        let mut w = 1.0;
        for j in 0..3 {
            if i != j {
                w *= x[j] / (x[j] - x[i]);
            }
        }
        value += w * y[i];
    }
    value.max(0.0).sqrt()
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum Classification {
    Strong,
    WeakOnly,
    NotWeak,
    Inconclusive,
}

impl Classification {
    pub fn as_str(self) -> &'static str {
        match self {
            Classification::Strong => "Strong",
            Classification::WeakOnly => "WeakOnly",
            Classification::NotWeak => "NotWeak",
            Classification::Inconclusive => "Inconclusive",
        }
    }
}

/// Relative thresholds on `ω(δ_min) / ‖b‖`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ContinuityThresholds {
    pub continuous_at_most: f64,
    pub discontinuous_at_least: f64,
}

impl Default for ContinuityThresholds {
    fn default() -> Self {
        Self { continuous_at_most: 0.1, discontinuous_at_least: 0.5 }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ClassifyConfig {
    /// Windows for truncated models; `None` picks [`default_sweep`].
    pub sweep: Option<Vec<i64>>,
    pub time_grid: TimeGridConfig,
    pub growth: GrowthThresholds,
    pub continuity: ContinuityThresholds,
    /// Allowed relative gap between `sup_ratio` and `‖wD(a)‖`.
    pub lipschitz_agreement: f64,
    pub norm: NormOptions,
    /// Derivative order; orders ≥ 2 add a chain to the report.
    pub order: usize,
}

impl Default for ClassifyConfig {
    fn default() -> Self {
        Self {
            sweep: None,
            time_grid: TimeGridConfig::default(),
            growth: GrowthThresholds::default(),
            continuity: ContinuityThresholds::default(),
            lipschitz_agreement: 0.05,
            norm: NormOptions::default(),
            order: 1,
        }
    }
}

impl ClassifyConfig {
    pub fn validate(&self) -> Result<()> {
        self.time_grid.validate()?;
        self.growth.validate()?;
        let c = &self.continuity;
        if !(c.continuous_at_most > 0.0 && c.discontinuous_at_least >= c.continuous_at_most) {
            return Err(Error::invalid("continuity thresholds must satisfy 0 < continuous ≤ discontinuous"));
        }
        if !(self.lipschitz_agreement > 0.0) {
            return Err(Error::invalid("lipschitz_agreement must be positive"));
        }
        if self.order == 0 {
            return Err(Error::invalid("order must be at least 1"));
        }
        if let Some(s) = &self.sweep {
            if s.is_empty() || s[0] < 1 || s.windows(2).any(|w| w[1] <= w[0]) {
                return Err(Error::invalid("sweep must be strictly increasing windows ≥ 1"));
            }
        }
        Ok(())
    }

    pub fn derivative_options(&self) -> DerivativeOptions {
        DerivativeOptions { thresholds: self.growth, norm: self.norm.clone() }
    }

    pub fn sweep_for(&self, model: &SelfAdjointModel) -> Vec<i64> {
        self.sweep.clone().unwrap_or_else(|| default_sweep(model))
    }
}

#[derive(Clone, Debug)]
pub struct DiffReport {
    pub classification: Classification,
    pub weak_verdict: BoundednessVerdict,
    /// `‖wD(a)‖` when Bounded.
    pub derivative_norm: Option<f64>,
    pub lipschitz: LipschitzReport,
    /// Of `t ↦ α_t(wD(a))`; present when Bounded.
    pub continuity: Option<ContinuityModulus>,
    pub chain: Option<DerivativeChain>,
    /// The Lipschitz sup agreed with `‖wD(a)‖`.
    pub lipschitz_consistent: Option<bool>,
}

pub fn classify(model: &SelfAdjointModel, a: &Operator, config: &ClassifyConfig) -> Result<DiffReport> {
    config.validate()?;
    let sweep = config.sweep_for(model);
    let dopts = config.derivative_options();
    let t_grid = config.time_grid.grid(model);
    let floor = config.time_grid.floor(model);

    let weak = weak_derivative(model, a, &sweep, &dopts)?;
    let lipschitz = lipschitz_estimate(model, a, &t_grid, floor, &config.norm)?;
    let chain = if config.order >= 2 && weak.verdict.is_bounded() {
        Some(higher_derivative(model, a, config.order, &sweep, &dopts)?)
    } else {
        None
    };

    let (classification, derivative_norm, continuity, consistent) = match (&weak.verdict.status, &weak.derivative) {
        (BoundednessStatus::Bounded, Some(b)) => {
            let b_norm = b.norm(&config.norm)?;
            let continuity = continuity_modulus(model, b, &t_grid, &config.norm)?;
            let consistent = (lipschitz.sup_ratio - b_norm).abs() <= config.lipschitz_agreement * b_norm + 1e-8;
            let omega = continuity.omega_min();
            let class = if !consistent {
                Classification::Inconclusive
            } else if omega <= config.continuity.continuous_at_most * b_norm {
                Classification::Strong
            } else if omega >= config.continuity.discontinuous_at_least * b_norm {
                Classification::WeakOnly
            } else {
                Classification::Inconclusive
            };
            (class, Some(b_norm), Some(continuity), Some(consistent))
        }
        (BoundednessStatus::Unbounded, _) => (Classification::NotWeak, None, None, None),
        _ => (Classification::Inconclusive, None, None, None),
    };

    Ok(DiffReport {
        classification,
        weak_verdict: weak.verdict,
        derivative_norm,
        lipschitz,
        continuity,
        chain,
        lipschitz_consistent: consistent,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::linalg::{max_abs, spectral_norm_dense};
    use crate::toeplitz::Toeplitz;

    fn finite() -> SelfAdjointModel {
        SelfAdjointModel::diagonal(vec![0.5, 1.5]).unwrap()
    }

    fn swap() -> Operator {
        Operator::Dense(CMatrix::from_row_slice(2, 2, &[C64::from(0.0), C64::from(1.0), C64::from(1.0), C64::from(0.0)]))
    }

    #[test]
    fn alpha_at_zero_is_identity_map() {
        let a = swap();
        assert!(max_abs(&(alpha(&finite(), &a, 0.0).unwrap().to_dense() - a.to_dense())) < 1e-15);
    }

    #[test]
    fn circle_alpha_modulates_coefficients() {
        let model = SelfAdjointModel::circle(4).unwrap();
        let t = Toeplitz::from_fn(9, |k| C64::new(1.0 / (1 + k.abs()) as f64, 0.0));
        let fast = alpha(&model, &Operator::Toeplitz(t.clone()), 0.3).unwrap().to_dense();
        let slow = alpha(&model, &Operator::Dense(t.to_dense()), 0.3).unwrap().to_dense();
        assert!(max_abs(&(fast - slow)) < 1e-14);
    }

    #[test]
    fn grids() {
        let g = log_grid(1.0, 24, 3);
        assert_eq!(g.len(), 73);
        assert!((g[72] - 1000.0).abs() < 1e-9);
        let cfg = TimeGridConfig::default();
        assert!((cfg.floor(&SelfAdjointModel::circle(512).unwrap()) - 10.0 / 512.0).abs() < 1e-15);
        assert!((cfg.floor(&SelfAdjointModel::diagonal(vec![-4.0, 2.0]).unwrap()) - 2.5e-5).abs() < 1e-18);
        assert!(checked_grid(&[0.001], 0.01).is_err());
    }

    #[test]
    fn two_by_two_lipschitz_tends_to_commutator_norm() {
        let cfg = TimeGridConfig::default();
        let model = finite();
        let r = lipschitz_estimate(&model, &swap(), &cfg.grid(&model), cfg.floor(&model), &NormOptions::default()).unwrap();
        assert!(r.ratios.iter().all(|&q| q <= 1.0 + 1e-8));
        assert!((r.limit_estimate - 1.0).abs() < 1e-8);
        assert_eq!(r.sup_ratio, r.ratios.iter().copied().fold(0.0, f64::max));
    }

    #[test]
    fn identity_has_zero_modulus() {
        let m = continuity_modulus(&finite(), &Operator::identity(2), &[0.1, 0.01, 1.0], &NormOptions::default()).unwrap();
        assert_eq!(m.delta_grid, vec![1.0, 0.1, 0.01]);
        assert!(m.omega.iter().all(|&w| w < 1e-15));
    }

    #[test]
    fn richardson_recovers_eigenvalue() {
        let s = log_grid(0.01, 24, 1);
        let q: Vec<f64> = s.iter().map(|&s| 2.0 * (1.5 * s).sin().abs() / s).collect();
        assert!((richardson_limit(&s, &q) - 3.0).abs() < 1e-9);
    }

    #[test]
    fn finite_two_by_two_is_strong() {
        let r = classify(&finite(), &swap(), &ClassifyConfig::default()).unwrap();
        assert_eq!(r.classification, Classification::Strong);
        assert!((r.derivative_norm.unwrap() - 1.0).abs() < 1e-12);
        let wd = CMatrix::from_row_slice(2, 2, &[C64::from(0.0), C64::from(-1.0), C64::from(1.0), C64::from(0.0)]);
        assert!((spectral_norm_dense(&wd) - r.derivative_norm.unwrap()).abs() < 1e-12);
    }

    #[test]
    fn quotient_of_commuting_operator_vanishes() {
        let model = finite();
        let a = Operator::Dense(CMatrix::from_diagonal(&CVector::from_vec(vec![C64::from(2.0), C64::from(-1.0)])));
        let mu = CVector::from_vec(vec![C64::from(1.0), C64::new(0.0, 1.0)]);
        let q = matrix_element_quotient(&model, &a, &mu, &mu, &[1e-3, 1e-2]).unwrap();
        assert!(q.iter().all(|z| z.norm() < 1e-12));
    }
}
