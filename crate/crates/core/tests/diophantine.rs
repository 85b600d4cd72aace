use gaugeproj::diophantine::{
    classify_series, closed_form_verdict, default_gap_s_values, gap_band, gap_report, ApproxFunction, GapBand,
};
use gaugeproj::gauge::{GaugeFunction, VerdictStatus};

const S: [f64; 4] = [0.5, 0.9, 1.1, 2.0];
const TAU: [f64; 3] = [1.0, 2.0, 3.0];

fn expected(converges: bool) -> VerdictStatus {
    if converges {
        VerdictStatus::Finite
    } else {
        VerdictStatus::Divergent
    }
}

#[test]
fn log_power_against_exp_power() {
    for &s in &S {
        for &tau in &TAU {
            for k in 1..=2u32 {
                let f = GaugeFunction::log_power(s).unwrap();
                let psi = ApproxFunction::exp_power(tau).unwrap();
                let v = classify_series(&f, &psi, k).unwrap();
                let s0 = (k as f64 + 1.0) / tau;
                assert_eq!(v.verdict.status, expected(s > s0), "s={s} tau={tau} k={k}: {}", v.verdict.diagnostics);
                assert_eq!(closed_form_verdict(&f, &psi, k), Some(expected(s > s0)));
                let want = k as f64 - tau * s;
                assert!(
                    (v.fitted_exponent - want).abs() <= 0.01 * want.abs().max(1e-9),
                    "{} vs {want}",
                    v.fitted_exponent
                );
            }
        }
    }
}

#[test]
fn power_log_against_power_log_power() {
    for &s in &S {
        for &tau in &TAU {
            for k in 1..=2u32 {
                let delta = (k as f64 + 1.0) / tau;
                let f = GaugeFunction::power_log(delta, s, 1.0 / tau).unwrap();
                let psi = ApproxFunction::power_log_power(tau).unwrap();
                let v = classify_series(&f, &psi, k).unwrap();
                assert_eq!(
                    v.verdict.status,
                    expected(s < k as f64),
                    "s={s} tau={tau} k={k}: {}",
                    v.verdict.diagnostics
                );
                assert_eq!(closed_form_verdict(&f, &psi, k), Some(expected(s < k as f64)));
            }
        }
    }
}

#[test]
fn gap_bands_are_exhaustive_and_consistent() {
    for k in 1..=2u32 {
        let r = gap_report(0.5, k, &default_gap_s_values(k)).unwrap();
        for row in &r.rows {
            assert!(row.consistent, "{row:?}");
        }
        let kf = k as f64;
        assert_eq!(gap_band(kf, k), GapBand::ZeroForAll);
        assert_eq!(gap_band(kf + 1e-9, k), GapBand::Gap);
        assert_eq!(gap_band(kf + 1.0, k), GapBand::Gap);
        assert_eq!(gap_band(kf + 1.0 + 1e-9, k), GapBand::InfiniteAe);
    }
    let r = gap_report(0.5, 2, &[1.5, 2.5, 3.5]).unwrap();
    let d: Vec<&str> = r.rows.iter().map(|x| x.description).collect();
    assert_eq!(d, vec!["zero for all theta", "gap of uncertainty", "infinite a.e."]);
    let m: Vec<&str> = r.rows.iter().map(|x| x.projected_measure).collect();
    assert_eq!(m, vec!["zero", "unknown", "infinite"]);
}
