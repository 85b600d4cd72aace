use std::f64::consts::LN_2;

use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use gaugeproj::gauge::{
    check_integral_condition, check_limit_condition, check_rate_condition, codoubling_exponent, default_t_grid,
    doubling_exponent, rate_inner_bound, GaugeFunction, RadiusGrid, VerdictStatus,
};
use gaugeproj::Error;

fn exponent_form_violations(f: &GaugeFunction, pairs: usize, seed: u64) -> usize {
    let grid = RadiusGrid::standard();
    let fit = doubling_exponent(f, &grid).unwrap();
    let c = fit.constant;
    let s = c.log2();
    let lr = grid.log_radii();
    let (lo, hi) =
        (lr.iter().cloned().fold(f64::INFINITY, f64::min), lr.iter().cloned().fold(f64::NEG_INFINITY, f64::max));
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut bad = 0;
    for _ in 0..pairs {
        let log_r = rng.gen_range(lo..=hi);
        let log_lambda = rng.gen_range((lo - log_r)..=0.0);
        let lhs = f.evaluate_log(log_r + log_lambda).unwrap();
        let rhs = -c.ln() + s * log_lambda + f.evaluate_log(log_r).unwrap();
        if lhs < rhs - 1e-9 * rhs.abs().max(1.0) {
            bad += 1;
        }
    }
    bad
}

#[test]
fn power_fits_are_exact() {
    for s in [0.1, 0.25, 0.5, 0.8, 1.0, 1.5] {
        let f = GaugeFunction::power(s).unwrap();
        let d = doubling_exponent(&f, &RadiusGrid::standard()).unwrap();
        assert!((d.exponent - s).abs() < 1e-12 && (d.kappa - 1.0).abs() < 1e-12, "{d:?}");
        assert!((d.implied_constant() - 2f64.powf(s)).abs() < 1e-12);
        let c = codoubling_exponent(&f, &RadiusGrid::standard()).unwrap();
        assert!((c.exponent - s).abs() < 1e-12 && (c.kappa - 1.0).abs() < 1e-12, "{c:?}");
    }
}

#[test]
fn doubling_constant_round_trip() {
    let gauges = [
        GaugeFunction::power(0.5).unwrap(),
        GaugeFunction::log_power(1.0).unwrap(),
        GaugeFunction::log_power(3.0).unwrap(),
        GaugeFunction::power_log(0.5, 1.0, 1.0).unwrap(),
        GaugeFunction::power_log(0.3, -0.5, 1.0).unwrap(),
    ];
    for (i, f) in gauges.iter().enumerate() {
        assert_eq!(exponent_form_violations(f, 10_000, i as u64), 0, "{}", f.label());
    }
}

#[test]
fn log_power_is_barely_doubling() {
    let f = GaugeFunction::log_power(2.0).unwrap();
    let d = doubling_exponent(&f, &RadiusGrid::standard()).unwrap();
    assert!(d.exponent.abs() < 1e-9, "{d:?}");
    // f(2r)/f(r) -> 1 as r -> 0
    let deep = |u: f64| (f.evaluate_log(-u + LN_2).unwrap() - f.evaluate_log(-u).unwrap()).exp();
    assert!(deep(10.0) > deep(1e3) && deep(1e3) > deep(1e6));
    assert!((deep(1e6) - 1.0).abs() < 1e-5);
    assert!(matches!(codoubling_exponent(&f, &RadiusGrid::standard()), Err(Error::NoExponent { .. })));
}

#[test]
fn integral_condition_closed_forms() {
    let p = |s| GaugeFunction::power(s).unwrap();
    let v = check_integral_condition(&p(0.5), &p(0.25)).unwrap();
    assert_eq!(v.status, VerdictStatus::Finite);
    // sg / (sf - sg)
    assert!((v.value - 0.25 / 0.25).abs() < 1e-6, "{}", v.value);
    let v = check_integral_condition(&p(0.9), &p(0.3)).unwrap();
    assert!((v.value - 0.3 / 0.6).abs() < 1e-6, "{}", v.value);

    let l = |s| GaugeFunction::log_power(s).unwrap();
    let v = check_integral_condition(&l(2.0), &l(1.0)).unwrap();
    assert!((v.value - 1.0 / LN_2).abs() < 1e-4, "{}", v.value);

    assert_eq!(check_integral_condition(&p(0.5), &p(0.5)).unwrap().status, VerdictStatus::Divergent);
    let tau = 6.0;
    let f2 = GaugeFunction::f_delta_s(0.5, 2.0, tau).unwrap();
    let f25 = GaugeFunction::f_delta_s(0.5, 2.5, tau).unwrap();
    assert_eq!(check_integral_condition(&f2, &f25).unwrap().status, VerdictStatus::Divergent);
}

#[test]
fn rate_condition_examples() {
    let l = |s| GaugeFunction::log_power(s).unwrap();
    let b = rate_inner_bound(&l(2.0), &l(1.0), &default_t_grid()).unwrap();
    // 2^{s1} s2 (s2 - s1) / (log 2)^{s2 - s1} with s1 = 1, s2 = 2
    let want = 4.0 / LN_2;
    assert!((b - want).abs() < 0.05 * want, "{b} vs {want}");
    let p = |s| GaugeFunction::power(s).unwrap();
    assert_eq!(check_rate_condition(&p(0.5), &p(0.25), &default_t_grid()).unwrap().status, VerdictStatus::Finite);
    assert_eq!(check_rate_condition(&l(2.0), &l(1.0), &default_t_grid()).unwrap().status, VerdictStatus::Finite);
}

#[test]
fn limit_zero_without_integral() {
    let f = GaugeFunction::power_log(0.5, 0.0, 1.0).unwrap();
    let g = GaugeFunction::power_log(0.5, 0.5, 1.0).unwrap();
    let lim = check_limit_condition(&f, &g).unwrap();
    assert_eq!(lim.status, VerdictStatus::Finite);
    assert_eq!(lim.value, 0.0);
    assert_eq!(check_integral_condition(&f, &g).unwrap().status, VerdictStatus::Divergent);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn finite_integral_implies_limit_zero(sf in 0.2f64..1.0, gap in 0.05f64..0.8) {
        let sg = sf * (1.0 - gap);
        let f = GaugeFunction::power(sf).unwrap();
        let g = GaugeFunction::power(sg).unwrap();
        let v = check_integral_condition(&f, &g).unwrap();
        if v.status == VerdictStatus::Finite {
            prop_assert_eq!(check_limit_condition(&f, &g).unwrap().status, VerdictStatus::Finite);
            prop_assert!((v.value - sg / (sf - sg)).abs() <= 1e-5 * (sg / (sf - sg)).max(1.0));
        }
    }

    #[test]
    fn log_space_matches_linear(s in 0.05f64..2.0, log_r in -600.0f64..-0.01) {
        let f = GaugeFunction::power(s).unwrap();
        let lf = f.evaluate_log(log_r).unwrap();
        prop_assert!((lf - s * log_r).abs() <= 1e-12 * lf.abs().max(1.0));
        let g = GaugeFunction::log_power(s).unwrap();
        let lg = g.evaluate_log(log_r).unwrap();
        let want = -s * (-log_r.min(-LN_2)).ln();
        prop_assert!((lg - want).abs() <= 1e-12 * want.abs().max(1.0));
    }

    #[test]
    fn gauges_are_nondecreasing(delta in 0.1f64..1.0, s in -1.0f64..3.0, a in -500.0f64..-1e-3, b in -500.0f64..-1e-3) {
        let f = GaugeFunction::power_log(delta, s, 1.0).unwrap();
        let (lo, hi) = if a < b { (a, b) } else { (b, a) };
        prop_assert!(f.evaluate_log(lo).unwrap() <= f.evaluate_log(hi).unwrap() + 1e-12);
    }
}
