//! Circle-model behaviour at bandlimit 512, pinned against dense-SVD brute force.

mod common;

use std::f64::consts::PI;

use common::loglog_slope;
use opderiv::derivatives::{classify_growth, default_sweep, BoundednessStatus, GrowthThresholds};
use opderiv::dynamics::{
    continuity_modulus, lipschitz_estimate, log_grid, matrix_element_quotient, vector_domain_probe, DomainVerdict,
    TimeGridConfig,
};
use opderiv::torus::{
    absx_identity_defect, domain_invariance_probe, inverse_linear_vector, mode_vector, partial_sum_curve, toeplitz,
    torus_d, Builtin, FourierFunction,
};
use opderiv::{
    classify, higher_derivative, weak_derivative, wncg_norm, Classification, ClassifyConfig, DerivativeOptions,
    NormOptions, Operator, SelfAdjointModel,
};

const L: usize = 512;

fn model() -> SelfAdjointModel {
    torus_d(L).unwrap()
}

fn symbol(b: Builtin) -> Operator {
    Operator::Toeplitz(toeplitz(&FourierFunction::builtin(b), L))
}

fn opts() -> DerivativeOptions {
    DerivativeOptions::default()
}

#[test]
fn truncated_absx_norm_matches_brute_force() {
    let n = symbol(Builtin::Absx).norm(&NormOptions::default()).unwrap();
    assert!((n - 3.139_334_421_907_621_6).abs() < 1e-8, "{n}");
    assert!(n <= PI);
}

#[test]
fn compression_norms_increase_with_bandlimit() {
    let f = FourierFunction::builtin(Builtin::Sign);
    let norms: Vec<f64> = [8, 16, 32, 64]
        .iter()
        .map(|&l| toeplitz(&f, l).norm(&NormOptions::default()).unwrap())
        .collect();
    // Slack is the norm backend's relative tolerance.
    let tol = NormOptions::default().rel_tol;
    assert!(norms.windows(2).all(|w| w[1] >= w[0] * (1.0 - tol)), "{norms:?}");
    assert!(norms.iter().all(|&x| x <= 1.0 + tol));
}

#[test]
fn absx_derivative_is_minus_i_sign_at_every_window() {
    let m = model();
    let res = weak_derivative(&m, &symbol(Builtin::Absx), &default_sweep(&m), &opts()).unwrap();
    assert_eq!(res.verdict.status, BoundednessStatus::Bounded);
    let wd = res.derivative.unwrap();
    let target = toeplitz(&FourierFunction::builtin(Builtin::Sign), L).map_coeffs(|_, c| c * opderiv::C64::new(0.0, -1.0));
    let got = wd.as_toeplitz().expect("full window keeps Toeplitz form");
    let defect = got.diagonals().map(|(k, c)| (c - target.coeff(k)).norm()).fold(0.0, f64::max);
    assert!(defect <= 1e-15);
    assert!(absx_identity_defect(L) <= 1e-15);
    // Truncated ‖M_sign‖ is 1 to rounding.
    assert!((res.verdict.norm_estimate - 1.0).abs() < 1e-9);
}

#[test]
fn absx_lipschitz_ratios_are_one() {
    let m = model();
    let grid: Vec<f64> = TimeGridConfig::default().grid(&m).into_iter().filter(|&t| t <= 1.0).collect();
    let rep = lipschitz_estimate(&m, &symbol(Builtin::Absx), &grid, 10.0 / L as f64, &NormOptions::default()).unwrap();
    for (&t, &q) in rep.t_grid.iter().zip(&rep.ratios) {
        assert!((1.0 - 1e-6..=1.0 + 1e-6).contains(&q), "t = {t}: {q}");
    }
}

#[test]
fn sign_modulus_stays_near_two() {
    let m = model();
    let grid = TimeGridConfig::default().grid(&m);
    let c = continuity_modulus(&m, &symbol(Builtin::Sign), &grid, &NormOptions::default()).unwrap();
    for (&d, &w) in c.delta_grid.iter().zip(&c.omega) {
        if d >= 0.05 {
            assert!(w >= 1.8, "δ = {d}: {w}");
        }
    }
    assert!((c.omega_min() - 1.998_716_624_042_866_9).abs() < 1e-6);
}

#[test]
fn absx_is_weak_but_not_strong() {
    let rep = classify(&model(), &symbol(Builtin::Absx), &ClassifyConfig::default()).unwrap();
    assert_eq!(rep.classification, Classification::WeakOnly);
    assert_eq!(rep.lipschitz_consistent, Some(true));
}

#[test]
fn powerlaw_commutator_grows_like_three_quarters() {
    let m = model();
    let res = weak_derivative(&m, &symbol(Builtin::PowerlawUnbounded), &[64, 128, 256, 512], &opts()).unwrap();
    let expected = [32.302_640_52, 54.335_030_51, 91.384_635_32, 153.692_222_18];
    for ((_, got), want) in res.verdict.curve.iter().zip(expected) {
        assert!((got - want).abs() < 1e-6 * want, "{got} vs {want}");
    }
    assert_eq!(res.verdict.status, BoundednessStatus::Unbounded);
    assert!((res.verdict.growth_exponent - 0.75).abs() < 0.01);
    let rep = classify(&m, &symbol(Builtin::PowerlawUnbounded), &ClassifyConfig::default()).unwrap();
    assert_eq!(rep.classification, Classification::NotWeak);
}

#[test]
fn powerlaw_partial_sums_flatten_slowly() {
    let f = FourierFunction::builtin(Builtin::PowerlawUnbounded);
    let curve = partial_sum_curve(&f, &[64, 128, 256, 512]);
    let expected = [6.367_302_82, 6.814_128_31, 7.191_199_42, 7.508_841_25];
    for ((_, got), want) in curve.iter().zip(expected) {
        assert!((got - want).abs() < 1e-7);
    }
    let v = classify_growth(&curve, &GrowthThresholds::default()).unwrap();
    assert!((v.growth_exponent - 0.062_357_872_906_947).abs() < 1e-9);
    assert!(curve.iter().all(|&(_, s)| s < f.sup_norm_hint.unwrap()));
}

#[test]
fn absx_second_commutator_grows_linearly() {
    let m = model();
    let chain = higher_derivative(&m, &symbol(Builtin::Absx), 2, &[32, 64, 128, 256], &opts()).unwrap();
    // Top window 256 < L + 1: the first derivative comes back zero-padded.
    assert_eq!(chain.verdicts[0].status, BoundednessStatus::Bounded);
    let v = &chain.verdicts[1];
    assert_eq!(v.status, BoundednessStatus::Unbounded);
    let expected = [20.371_832_72, 40.743_665_43, 81.487_330_86, 162.974_661_73];
    for ((_, got), want) in v.curve.iter().zip(expected) {
        assert!((got - want).abs() < 1e-6 * want, "{got} vs {want}");
    }
    assert!((v.growth_exponent - 1.0).abs() < 1e-6);
    assert!(!chain.is_fully_bounded());
}

#[test]
fn antiderivative_is_twice_differentiable_and_strong() {
    let m = model();
    let mut cfg = ClassifyConfig::default();
    cfg.order = 2;
    let rep = classify(&m, &symbol(Builtin::AntiderivativeSmooth), &cfg).unwrap();
    let chain = rep.chain.as_ref().unwrap();
    assert!(chain.is_fully_bounded());
    assert!((chain.verdicts[1].norm_estimate - 1.0).abs() < 1e-9);
    assert!((rep.derivative_norm.unwrap() - 1.568_538_095_112_726_8).abs() < 1e-8);
    assert_eq!(rep.classification, Classification::Strong);
    let c = rep.continuity.unwrap();
    for (&d, &w) in c.delta_grid.iter().zip(&c.omega) {
        assert!(w <= 1.1 * d, "δ = {d}: {w}");
    }
}

#[test]
fn absx_abs_d_commutator_is_bounded() {
    let m = torus_d(128).unwrap();
    let a = Operator::Toeplitz(toeplitz(&FourierFunction::builtin(Builtin::Absx), 128));
    let w = wncg_norm(&m, &a, 1, &default_sweep(&m), &opts()).unwrap();
    // ‖wD‖ + ‖M_{|x|}‖ + ‖[|D|, M_{|x|}]‖ from dense SVD: 1 + 3.1325961509737920 + 1.2912317685636427.
    assert!((w - 5.423_827_919_537_435).abs() < 1e-8, "{w}");
}

#[test]
fn mode_vectors_are_in_the_domain() {
    let m = model();
    let grid = TimeGridConfig::default().probe_grid(&m);
    for n in [3i64, -5, 1] {
        let p = vector_domain_probe(&m, &mode_vector(n, L).unwrap(), &grid, &GrowthThresholds::default()).unwrap();
        assert_eq!(p.verdict, DomainVerdict::InDomain, "u_{n}");
        assert!((p.limit_estimate.unwrap() - n.abs() as f64).abs() < 1e-6, "u_{n}: {:?}", p.limit_estimate);
    }
    let p = vector_domain_probe(&m, &mode_vector(3, L).unwrap(), &grid, &GrowthThresholds::default()).unwrap();
    assert!((p.growth_exponent - 0.004_883_732_704_714_995_6).abs() < 1e-9);
}

#[test]
fn high_modes_need_a_finer_grid() {
    // ns reaches 2 at the coarse end of the fitted half; the curve has not settled.
    let m = model();
    let grid = TimeGridConfig::default().probe_grid(&m);
    let p = vector_domain_probe(&m, &mode_vector(10, L).unwrap(), &grid, &GrowthThresholds::default()).unwrap();
    assert!((p.growth_exponent - 0.055_468_094_345_250_84).abs() < 1e-9);
    assert_eq!(p.verdict, DomainVerdict::Inconclusive);
}

#[test]
fn inverse_linear_vector_is_not_in_the_domain() {
    let m = model();
    let grid = TimeGridConfig::default().probe_grid(&m);
    let p = vector_domain_probe(&m, &inverse_linear_vector(L), &grid, &GrowthThresholds::default()).unwrap();
    assert_eq!(p.verdict, DomainVerdict::NotInDomain);
    assert!((p.growth_exponent - 0.494_141_792_010_549).abs() < 1e-9);
    assert!((p.quotients[0] - 9.570_910_780_342_931).abs() < 1e-9);
}

#[test]
fn domain_invariance_separates_absx_from_powerlaw() {
    let grid = TimeGridConfig::default().probe_grid(&model());
    let u0 = mode_vector(0, L).unwrap();
    let th = GrowthThresholds::default();
    let absx = domain_invariance_probe(&FourierFunction::builtin(Builtin::Absx), &u0, L, &grid, &th).unwrap();
    assert_eq!(absx.verdict, DomainVerdict::InDomain);
    assert!((absx.growth_exponent - 0.007_690_508_208_135_422).abs() < 1e-9);
    let pl = domain_invariance_probe(&FourierFunction::builtin(Builtin::PowerlawUnbounded), &u0, L, &grid, &th).unwrap();
    assert_eq!(pl.verdict, DomainVerdict::NotInDomain);
    assert!((pl.growth_exponent - 0.279_676_505_328_225_7).abs() < 1e-9);
    let one = domain_invariance_probe(&FourierFunction::builtin(Builtin::One), &u0, L, &grid, &th).unwrap();
    assert_eq!(one.verdict, DomainVerdict::InDomain);
}

#[test]
fn absx_matrix_element_at_zero_mode_vanishes() {
    let m = model();
    let u0 = mode_vector(0, L).unwrap();
    let q = matrix_element_quotient(&m, &symbol(Builtin::Absx), &u0, &u0, &log_grid(1e-3, 4, 2)).unwrap();
    assert!(q.iter().all(|z| z.norm() < 1e-12));
}

#[test]
fn translation_matches_dense_conjugation() {
    let m = torus_d(16).unwrap();
    let f = FourierFunction::builtin(Builtin::Absx);
    let t = 0.37;
    let fast = opderiv::alpha(&m, &Operator::Toeplitz(toeplitz(&f, 16)), t).unwrap().to_dense();
    let slow = opderiv::alpha(&m, &Operator::Dense(toeplitz(&f, 16).to_dense()), t).unwrap().to_dense();
    assert!((fast - slow).iter().map(|z| z.norm()).fold(0.0, f64::max) < 1e-10);
}

#[test]
fn loglog_helper_agrees_with_classifier() {
    let xs = [64.0, 128.0, 256.0, 512.0];
    let ys = [1.0, 2.0, 4.0, 8.0];
    assert!((loglog_slope(&xs, &ys) - 1.0).abs() < 1e-12);
}
