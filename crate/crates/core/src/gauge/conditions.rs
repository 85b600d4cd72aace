//! Integral, limit, rate and series conditions on gauge pairs.
//!
//! Integrals over `(0, 1]` are taken in `u = -log r` and split at the dyadic
//! shells `u in [n log 2, (n+1) log 2]`. Each shell is integrated in log space
//! and the resulting series is classified by [`ShellRule`].

use std::f64::consts::LN_2;

use super::verdict::{ls_slope, ConditionVerdict, ShellRule, VerdictStatus};
use super::{GaugeFunction, RadiusGrid};
use crate::error::{Error, Result};
use crate::quad::{integrate_log, QuadOptions};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ShellOptions {
    pub rule: ShellRule,
    pub quad: QuadOptions,
}

impl Default for ShellOptions {
    fn default() -> Self {
        ShellOptions { rule: ShellRule::default(), quad: QuadOptions { rel_tol: 1e-10, ..QuadOptions::default() } }
    }
}

fn ln_or_neg_inf(x: f64) -> f64 {
    if x > 0.0 {
        x.ln()
    } else {
        f64::NEG_INFINITY
    }
}

fn shell_integral<H: FnMut(f64) -> f64>(h: H, n: usize, quad: QuadOptions) -> Result<f64> {
    let a = n as f64 * LN_2;
    integrate_log(h, a, a + LN_2, quad)
}

fn require_strictly_increasing(g: &GaugeFunction) -> Result<()> {
    let grid = RadiusGrid::standard();
    let lr = grid.log_radii();
    // radii are decreasing, so log g must not increase along the grid and
    // must strictly decrease over the deeper half (a capped plateau near the
    // top is allowed)
    let half = lr.len() / 2;
    for (i, w) in lr.windows(2).enumerate() {
        let hi = g.log_value(w[0]);
        let lo = g.log_value(w[1]);
        if !(lo < hi || (i < half && lo == hi)) {
            return Err(Error::Domain(format!("{} is not strictly increasing near r = exp({:.3})", g.label(), w[1])));
        }
    }
    Ok(())
}

/// `-∫_0^1 f(r) d(1/g(r)) = ∫_0^∞ (f/g)(e^{-u}) e_g(e^{-u}) du`, where `e_g`
/// is the local exponent of `g`.
pub fn check_integral_condition(f: &GaugeFunction, g: &GaugeFunction) -> Result<ConditionVerdict> {
    check_integral_condition_with(f, g, &ShellOptions::default())
}

pub fn check_integral_condition_with(
    f: &GaugeFunction,
    g: &GaugeFunction,
    opts: &ShellOptions,
) -> Result<ConditionVerdict> {
    require_strictly_increasing(g)?;
    let h = |u: f64| f.log_value(-u) - g.log_value(-u) + ln_or_neg_inf(g.elasticity(-u));
    opts.rule.evaluate(|n| shell_integral(h, n, opts.quad), "integral condition")
}

/// Whether `f(r)/g(r) -> 0`, sampled at `r = 2^{-n}`, `n = 2^j`.
pub fn check_limit_condition(f: &GaugeFunction, g: &GaugeFunction) -> Result<ConditionVerdict> {
    const TOL: f64 = 1e-6;
    let mut log_u = Vec::new();
    let mut log_ratio = Vec::new();
    for j in 0..=40 {
        let u = (1u64 << j) as f64 * LN_2;
        log_u.push(u.ln());
        log_ratio.push(f.log_value(-u) - g.log_value(-u));
    }
    let k = log_u.len();
    let tail = 10;
    let b = ls_slope(&log_u[k - tail..], &log_ratio[k - tail..]);
    let last = log_ratio[k - 1].exp();
    let shell_sums: Vec<f64> = log_ratio.iter().map(|x| x.exp()).collect();
    let diagnostics = format!(
        "limit condition: f/g at r = 2^-(2^j), j = 0..40; final ratio {last:.3e}, decay exponent in log(1/r) {b:.4}"
    );
    let (status, value) = if last < TOL || b <= -0.05 {
        (VerdictStatus::Finite, 0.0)
    } else if b >= -0.005 {
        (VerdictStatus::Divergent, last)
    } else {
        (VerdictStatus::Inconclusive, last)
    };
    Ok(ConditionVerdict { status, value, shell_sums, log_shell_sums: log_ratio, tail_exponent: Some(b), diagnostics })
}

/// Default `t` grid for the rate condition: `t = 2^{-2^j}`, `j = 1..24`,
/// given as `log t`.
pub fn default_t_grid() -> Vec<f64> {
    (1..=24).map(|j| -((1u64 << j) as f64) * LN_2).collect()
}

fn rate_at(f: &GaugeFunction, g: &GaugeFunction, lt: f64, opts: &ShellOptions) -> Result<ConditionVerdict> {
    let glt = g.log_value(lt);
    let h = |u: f64| {
        let inner = lt - u;
        f.log_value(-u) - g.log_value(inner) + glt + ln_or_neg_inf(g.elasticity(inner))
    };
    opts.rule.evaluate(|n| shell_integral(h, n, opts.quad), "rate condition inner integral")
}

/// `R(t) = g(t) (-∫_0^1 f(r) d(1/g(tr)))` along `log_t_grid` (values of
/// `log t`, decreasing). Finite when `R` stays bounded, with value `max R`.
pub fn check_rate_condition(f: &GaugeFunction, g: &GaugeFunction, log_t_grid: &[f64]) -> Result<ConditionVerdict> {
    check_rate_condition_with(f, g, log_t_grid, &ShellOptions::default())
}

pub fn check_rate_condition_with(
    f: &GaugeFunction,
    g: &GaugeFunction,
    log_t_grid: &[f64],
    opts: &ShellOptions,
) -> Result<ConditionVerdict> {
    if log_t_grid.len() < 4 {
        return Err(Error::Precondition("rate condition needs at least 4 values of t".into()));
    }
    if log_t_grid.iter().any(|x| !(x.is_finite() && *x < 0.0)) {
        return Err(Error::Domain("t grid must lie in (0, 1)".into()));
    }
    if log_t_grid.windows(2).any(|w| w[1] >= w[0]) {
        return Err(Error::Precondition("t grid must be strictly decreasing".into()));
    }
    require_strictly_increasing(g)?;
    let mut log_r = Vec::with_capacity(log_t_grid.len());
    for &lt in log_t_grid {
        let inner = rate_at(f, g, lt, opts)?;
        match inner.status {
            VerdictStatus::Finite => log_r.push(inner.value.ln()),
            VerdictStatus::Divergent => {
                let mut v = ConditionVerdict::bare(
                    VerdictStatus::Divergent,
                    f64::INFINITY,
                    format!("rate condition: inner integral diverges at log t = {lt:.4e}; {}", inner.diagnostics),
                );
                v.shell_sums = log_r.iter().map(|x: &f64| x.exp()).collect();
                v.log_shell_sums = log_r;
                return Ok(v);
            }
            VerdictStatus::Inconclusive => {
                return Ok(ConditionVerdict::bare(
                    VerdictStatus::Inconclusive,
                    f64::NAN,
                    format!("rate condition: inner integral undecided at log t = {lt:.4e}; {}", inner.diagnostics),
                ));
            }
        }
    }
    let xs: Vec<f64> = log_t_grid.iter().map(|lt| (-lt).ln()).collect();
    let half = xs.len() / 2;
    let growth = ls_slope(&xs[half..], &log_r[half..]);
    let max_log = log_r.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let diagnostics = format!(
        "rate condition: {} values of t down to log t = {:.4e}; growth exponent of R in log(1/t) {growth:.4}",
        xs.len(),
        log_t_grid[log_t_grid.len() - 1]
    );
    let status = if growth <= 0.02 {
        VerdictStatus::Finite
    } else if growth >= 0.1 {
        VerdictStatus::Divergent
    } else {
        VerdictStatus::Inconclusive
    };
    let value = match status {
        VerdictStatus::Finite => max_log.exp(),
        VerdictStatus::Divergent => f64::INFINITY,
        VerdictStatus::Inconclusive => f64::NAN,
    };
    Ok(ConditionVerdict {
        status,
        value,
        shell_sums: log_r.iter().map(|x| x.exp()).collect(),
        log_shell_sums: log_r,
        tail_exponent: Some(growth),
        diagnostics,
    })
}

/// Bound on the inner piece of `R(t)`:
/// `sup_{r <= t} g(r)/g(tr) * ∫_0^1 df/g`, maximised over the `t` grid.
pub fn rate_inner_bound(f: &GaugeFunction, g: &GaugeFunction, log_t_grid: &[f64]) -> Result<f64> {
    let opts = ShellOptions::default();
    let h = |u: f64| f.log_value(-u) - g.log_value(-u) + ln_or_neg_inf(f.elasticity(-u));
    let df_over_g = opts.rule.evaluate(|n| shell_integral(h, n, opts.quad), "df/g")?;
    if !df_over_g.is_finite() {
        return Err(Error::Precondition(format!("∫ df/g is not finite: {}", df_over_g.diagnostics)));
    }
    let mut sup = f64::NEG_INFINITY;
    for &lt in log_t_grid {
        // r = t^{1+x}, x >= 0
        for i in 0..=400 {
            let x = if i == 0 { 0.0 } else { 10f64.powf(-4.0 + 8.0 * (i - 1) as f64 / 399.0) };
            let lr = lt * (1.0 + x);
            sup = sup.max(g.log_value(lr) - g.log_value(lt + lr));
        }
    }
    Ok(sup.exp() * df_over_g.value)
}

/// `∫_0^1 r^{-2} f(r) dr`; finite values predict positive-length projections.
pub fn check_length_criterion(f: &GaugeFunction) -> Result<ConditionVerdict> {
    for &lr in RadiusGrid::standard().log_radii() {
        let e = f.elasticity(lr);
        if e > 2.0 + 1e-12 {
            return Err(Error::Precondition(format!(
                "f(r)/r^2 is not decreasing: local exponent {e} > 2 at log r = {lr:.3}"
            )));
        }
    }
    let opts = ShellOptions::default();
    let h = |u: f64| f.log_value(-u) + u;
    let mut v = opts.rule.evaluate(|n| shell_integral(h, n, opts.quad), "length criterion")?;
    if v.is_finite() {
        v.diagnostics.push_str("; a.e. projection has positive length predicted");
    }
    Ok(v)
}

/// Stieltjes sums `Σ (f(2^-n) - f(2^-(n+1))) / g(ξ_n)` for `∫_0^1 df/g`,
/// `ξ_n` the log-midpoint of the shell.
pub fn check_divergence_of_df_over_g(f: &GaugeFunction, g: &GaugeFunction) -> Result<ConditionVerdict> {
    let rule = ShellRule::default();
    rule.evaluate(
        |n| {
            let a = f.log_value(-(n as f64) * LN_2);
            let b = f.log_value(-((n + 1) as f64) * LN_2);
            let diff = if a == f64::NEG_INFINITY || b >= a { f64::NEG_INFINITY } else { a + (-(b - a).exp()).ln_1p() };
            Ok(diff - g.log_value(-(n as f64 + 0.5) * LN_2))
        },
        "df/g Stieltjes sums",
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    fn p(s: f64) -> GaugeFunction {
        GaugeFunction::power(s).unwrap()
    }
    fn lp(s: f64) -> GaugeFunction {
        GaugeFunction::log_power(s).unwrap()
    }

    #[test]
    fn integral_power_pair() {
        let v = check_integral_condition(&p(0.5), &p(0.25)).unwrap();
        assert_eq!(v.status, VerdictStatus::Finite);
        // s1/(s2-s1) with the roles of the exponents as in the closed form
        assert!((v.value - 1.0).abs() < 1e-6, "{}", v.value);
    }

    #[test]
    fn integral_equal_pair_diverges() {
        assert_eq!(check_integral_condition(&p(0.5), &p(0.5)).unwrap().status, VerdictStatus::Divergent);
    }

    #[test]
    fn integral_log_pair() {
        let v = check_integral_condition(&lp(2.0), &lp(1.0)).unwrap();
        assert_eq!(v.status, VerdictStatus::Finite);
        assert!((v.value - 1.0 / LN_2).abs() < 1e-6, "{}", v.value);
    }

    #[test]
    fn integral_requires_increasing_g() {
        let flat = GaugeFunction::table(&[[-100.0, -10.0], [-50.0, -5.0], [-1.0, -5.0]]).unwrap();
        assert!(matches!(check_integral_condition(&p(0.5), &flat), Err(Error::Domain(_))));
    }

    #[test]
    fn limit_examples() {
        assert!(check_limit_condition(&p(0.5), &p(0.25)).unwrap().is_finite());
        assert!(check_limit_condition(&p(1.0), &p(1.0)).unwrap().is_divergent());
    }

    #[test]
    fn rate_examples() {
        let grid = default_t_grid();
        assert!(check_rate_condition(&p(0.5), &p(0.25), &grid).unwrap().is_finite());
        assert!(check_rate_condition(&p(0.5), &p(0.5), &grid).unwrap().is_divergent());
        let v = check_rate_condition(&lp(2.0), &lp(1.0), &grid).unwrap();
        assert!(v.is_finite(), "{}", v.diagnostics);
    }

    #[test]
    fn length_examples() {
        let v = check_length_criterion(&p(1.5)).unwrap();
        assert!(v.is_finite());
        assert!((v.value - 2.0).abs() < 1e-6, "{}", v.value);
        assert!(check_length_criterion(&p(1.0)).unwrap().is_divergent());
        assert!(check_length_criterion(&p(0.5)).unwrap().is_divergent());
        assert!(matches!(check_length_criterion(&p(2.5)), Err(Error::Precondition(_))));
    }

    #[test]
    fn df_over_g_diverges_for_log_growth_partner() {
        let f = p(0.5);
        let g = f.log_growth_partner().unwrap();
        assert!(check_divergence_of_df_over_g(&f, &g).unwrap().is_divergent());
    }
}
