//! The circle `T` with `D = (1/i) d/dθ` on the modes `u_n(θ) = e^{inθ}`,
//! `|n| ≤ L`. Multiplication operators `M_f` become Toeplitz matrices
//! `a_{rc} = f̂(r − c)`; all symbols are given by closed-form coefficients.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::derivatives::GrowthThresholds;
use crate::dynamics::{vector_domain_probe, DomainProbe, DomainVerdict};
use crate::error::{Error, Result};
use crate::linalg::{CVector, C64, I, ZERO};
use crate::spectral::SelfAdjointModel;
use crate::toeplitz::Toeplitz;

/// `ζ(5/4)`, for the sup norm of the power-law symbol.
const ZETA_5_4: f64 = 4.595_111_825_842_94;

/// `f̂(n)` of `|x|` on `(−π, π]`.
pub fn coeffs_absx(n: i64) -> C64 {
    if n == 0 {
        C64::from(PI / 2.0)
    } else if n % 2 != 0 {
        C64::from(-2.0 / (PI * (n * n) as f64))
    } else {
        ZERO
    }
}

/// `f̂(n)` of `sign(x)`.
pub fn coeffs_sign(n: i64) -> C64 {
    if n % 2 != 0 {
        C64::new(0.0, -2.0 / (PI * n as f64))
    } else {
        ZERO
    }
}

/// `|n|^{−5/4}` off zero: summable, but `n·f̂(n)` is not square-summable.
pub fn coeffs_powerlaw(n: i64) -> C64 {
    if n == 0 {
        ZERO
    } else {
        C64::from((n.abs() as f64).powf(-1.25))
    }
}

/// `−2/(iπn³)` for odd `n`: an antiderivative of `|x| − π/2`.
pub fn coeffs_antiderivative(n: i64) -> C64 {
    if n % 2 != 0 {
        C64::new(0.0, 2.0 / (PI * (n * n * n) as f64))
    } else {
        ZERO
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Builtin {
    Absx,
    Sign,
    PowerlawUnbounded,
    AntiderivativeSmooth,
    One,
}

impl Builtin {
    pub fn name(self) -> &'static str {
        match self {
            Builtin::Absx => "absx",
            Builtin::Sign => "sign",
            Builtin::PowerlawUnbounded => "powerlaw_unbounded",
            Builtin::AntiderivativeSmooth => "antiderivative_smooth",
            Builtin::One => "one",
        }
    }

    pub fn coeff(self, n: i64) -> C64 {
        match self {
            Builtin::Absx => coeffs_absx(n),
            Builtin::Sign => coeffs_sign(n),
            Builtin::PowerlawUnbounded => coeffs_powerlaw(n),
            Builtin::AntiderivativeSmooth => coeffs_antiderivative(n),
            Builtin::One => {
                if n == 0 {
                    C64::from(1.0)
                } else {
                    ZERO
                }
            }
        }
    }

    /// `‖f‖_∞`.
    pub fn sup_norm(self) -> f64 {
        match self {
            Builtin::Absx => PI,
            Builtin::Sign | Builtin::One => 1.0,
            Builtin::PowerlawUnbounded => 2.0 * ZETA_5_4,
            // Σ_{odd n} 2/(πn³)·2 evaluated at θ = π/2.
            Builtin::AntiderivativeSmooth => PI * PI / 8.0,
        }
    }
}

impl FromStr for Builtin {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "absx" => Builtin::Absx,
            "sign" => Builtin::Sign,
            "powerlaw_unbounded" | "powerlaw" => Builtin::PowerlawUnbounded,
            "antiderivative_smooth" | "antideriv" => Builtin::AntiderivativeSmooth,
            "one" | "identity" => Builtin::One,
            other => return Err(Error::invalid(format!("unknown builtin symbol {other:?}"))),
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum CoeffSource {
    Builtin(Builtin),
    /// Explicit `n ↦ f̂(n)`; absent modes are zero.
    Table(BTreeMap<i64, C64>),
}

/// A symbol on the circle, known through its Fourier coefficients.
#[derive(Clone, Debug, PartialEq)]
pub struct FourierFunction {
    pub name: String,
    pub source: CoeffSource,
    /// Largest `|n|` carrying a coefficient; `None` for infinite series.
    pub bandlimit: Option<usize>,
    pub sup_norm_hint: Option<f64>,
}

impl FourierFunction {
    pub fn builtin(b: Builtin) -> Self {
        Self {
            name: b.name().to_owned(),
            source: CoeffSource::Builtin(b),
            bandlimit: None,
            sup_norm_hint: Some(b.sup_norm()),
        }
    }

    pub fn table(name: impl Into<String>, coeffs: BTreeMap<i64, C64>) -> Result<Self> {
        if coeffs.values().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::validation("coefficient table has non-finite entries"));
        }
        let bandlimit = coeffs.keys().map(|n| n.unsigned_abs() as usize).max().unwrap_or(0);
        Ok(Self { name: name.into(), source: CoeffSource::Table(coeffs), bandlimit: Some(bandlimit), sup_norm_hint: None })
    }

    pub fn coeff(&self, n: i64) -> C64 {
        match &self.source {
            CoeffSource::Builtin(b) => b.coeff(n),
            CoeffSource::Table(t) => t.get(&n).copied().unwrap_or(ZERO),
        }
    }

    /// `c_{−n} = conj(c_n)` on `|n| ≤ up_to`.
    pub fn is_real_valued(&self, up_to: usize) -> bool {
        (0..=up_to as i64).all(|n| self.coeff(-n) == self.coeff(n).conj())
    }
}

/// `M_f` compressed to `span{u_{−L}, …, u_L}`.
pub fn toeplitz(f: &FourierFunction, bandlimit: usize) -> Toeplitz {
    Toeplitz::from_fn(2 * bandlimit + 1, |k| f.coeff(k))
}

/// `D = (1/i) d/dθ` on modes `−L..L`.
pub fn torus_d(bandlimit: usize) -> Result<SelfAdjointModel> {
    SelfAdjointModel::circle(bandlimit)
}

/// `u_n` in the ambient basis (index `j ↔ mode j − L`).
pub fn mode_vector(n: i64, bandlimit: usize) -> Result<CVector> {
    let l = bandlimit as i64;
    if n.abs() > l {
        return Err(Error::invalid(format!("mode {n} lies outside bandlimit {bandlimit}")));
    }
    let mut v = CVector::zeros(2 * bandlimit + 1);
    v[(n + l) as usize] = C64::from(1.0);
    Ok(v)
}

/// Unit vector with `ξ̂(n) ∝ 1/|n|`, `n ≠ 0`.
pub fn inverse_linear_vector(bandlimit: usize) -> CVector {
    let l = bandlimit as i64;
    let v = CVector::from_iterator(
        2 * bandlimit + 1,
        (-l..=l).map(|n| if n == 0 { ZERO } else { C64::from(1.0 / n.abs() as f64) }),
    );
    let norm = v.norm();
    if norm > 0.0 {
        v / C64::from(norm)
    } else {
        v
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CounterexampleKind {
    PowerlawUnbounded,
    AntiderivativeSmooth,
    InverseLinearVector,
}

impl FromStr for CounterexampleKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Ok(match s {
            "powerlaw_unbounded" => CounterexampleKind::PowerlawUnbounded,
            "antiderivative_smooth" => CounterexampleKind::AntiderivativeSmooth,
            "inverse_linear_vector" => CounterexampleKind::InverseLinearVector,
            other => return Err(Error::invalid(format!("unknown counterexample {other:?}"))),
        })
    }
}

impl fmt::Display for CounterexampleKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CounterexampleKind::PowerlawUnbounded => "powerlaw_unbounded",
            CounterexampleKind::AntiderivativeSmooth => "antiderivative_smooth",
            CounterexampleKind::InverseLinearVector => "inverse_linear_vector",
        })
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum Counterexample {
    Function(FourierFunction),
    Vector(CVector),
}

pub fn make_counterexample(kind: CounterexampleKind, bandlimit: usize) -> Counterexample {
    match kind {
        CounterexampleKind::PowerlawUnbounded => Counterexample::Function(FourierFunction::builtin(Builtin::PowerlawUnbounded)),
        CounterexampleKind::AntiderivativeSmooth => {
            Counterexample::Function(FourierFunction::builtin(Builtin::AntiderivativeSmooth))
        }
        CounterexampleKind::InverseLinearVector => Counterexample::Vector(inverse_linear_vector(bandlimit)),
    }
}

/// Checks that `M_f` keeps `ξ` inside `dom(D)` by probing `M_f ξ`.
pub fn domain_invariance_probe(
    f: &FourierFunction,
    xi: &CVector,
    bandlimit: usize,
    s_grid: &[f64],
    thresholds: &GrowthThresholds,
) -> Result<DomainProbe> {
    let model = torus_d(bandlimit)?;
    let before = vector_domain_probe(&model, xi, s_grid, thresholds)?;
    if before.verdict != DomainVerdict::InDomain {
        return Err(Error::invalid("input vector is not classified InDomain"));
    }
    let image = CVector::from_vec(toeplitz(f, bandlimit).apply(xi.as_slice()));
    vector_domain_probe(&model, &image, s_grid, thresholds)
}

/// `max_k |k·ĉ_{|x|}(k) − (1/i)ĉ_sign(k)|` over all diagonals of the bandlimit-`L` matrices.
pub fn absx_identity_defect(bandlimit: usize) -> f64 {
    let abs = toeplitz(&FourierFunction::builtin(Builtin::Absx), bandlimit).map_coeffs(|k, c| c * k as f64);
    let sign = toeplitz(&FourierFunction::builtin(Builtin::Sign), bandlimit).map_coeffs(|_, c| c / I);
    abs.diagonals().map(|(k, c)| (c - sign.coeff(k)).norm()).fold(0.0, f64::max)
}

/// `(L, Σ_{|n| ≤ L} |f̂(n)|)`.
pub fn partial_sum_curve(f: &FourierFunction, bandlimits: &[usize]) -> Vec<(f64, f64)> {
    bandlimits
        .iter()
        .map(|&l| {
            let l = l as i64;
            (l as f64, (-l..=l).map(|n| f.coeff(n).norm()).sum())
        })
        .collect()
}

/// `Σ n²|ξ̂(n)|²` for an ambient vector of the bandlimit-`L` model.
pub fn dirichlet_energy(xi: &CVector, bandlimit: usize) -> f64 {
    let l = bandlimit as i64;
    xi.iter().zip(-l..=l).map(|(z, n)| (n * n) as f64 * z.norm_sqr()).sum()
}
