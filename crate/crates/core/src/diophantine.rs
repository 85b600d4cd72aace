//! Series criteria for sets of ψ-approximable points and the gap table for
//! projections of `W_k(ψ)`.

use std::f64::consts::LN_2;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge::{
    check_integral_condition, log_add, ls_slope, ConditionVerdict, GaugeFamily, GaugeFunction, ShellRule, VerdictStatus,
};
use crate::quad::{integrate_log, QuadOptions};

/// Decreasing approximation function `ψ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum ApproxFunction {
    /// `exp(-q^τ)`
    ExpPower { tau: f64 },
    /// `q^{-τ} (log q)^{-τ}`
    PowerLogPower { tau: f64 },
    /// `q^{-τ}`
    PurePower { tau: f64 },
}

impl ApproxFunction {
    pub fn exp_power(tau: f64) -> Result<Self> {
        check_tau(tau).map(|tau| ApproxFunction::ExpPower { tau })
    }

    pub fn power_log_power(tau: f64) -> Result<Self> {
        check_tau(tau).map(|tau| ApproxFunction::PowerLogPower { tau })
    }

    pub fn pure_power(tau: f64) -> Result<Self> {
        check_tau(tau).map(|tau| ApproxFunction::PurePower { tau })
    }

    pub fn tau(&self) -> f64 {
        match *self {
            ApproxFunction::ExpPower { tau }
            | ApproxFunction::PowerLogPower { tau }
            | ApproxFunction::PurePower { tau } => tau,
        }
    }

    /// `log(-log ψ(q))` from `x = log q`; finite for every `q >= 2`.
    pub fn log_neg_log(&self, x: f64) -> f64 {
        match *self {
            ApproxFunction::ExpPower { tau } => tau * x,
            ApproxFunction::PowerLogPower { tau } => tau.ln() + (x + x.ln()).ln(),
            ApproxFunction::PurePower { tau } => tau.ln() + x.ln(),
        }
    }

    pub fn label(&self) -> String {
        match *self {
            ApproxFunction::ExpPower { tau } => format!("exp_power(tau={tau})"),
            ApproxFunction::PowerLogPower { tau } => format!("power_log_power(tau={tau})"),
            ApproxFunction::PurePower { tau } => format!("pure_power(tau={tau})"),
        }
    }
}

fn check_tau(tau: f64) -> Result<f64> {
    if tau.is_finite() && tau > 0.0 {
        Ok(tau)
    } else {
        Err(Error::Domain(format!("tau must be finite and > 0, got {tau}")))
    }
}

/// `log(q^k f(ψ(q)))` given `x = log q`.
fn log_term_at(f: &GaugeFunction, psi: &ApproxFunction, k: u32, x: f64) -> f64 {
    k as f64 * x + f.evaluate_log_deep(psi.log_neg_log(x))
}

/// `log(q^k f(ψ(q)))`.
pub fn series_term(f: &GaugeFunction, psi: &ApproxFunction, k: u32, q: u64) -> Result<f64> {
    if q < 2 {
        return Err(Error::Domain(format!("series starts at q = 2, got {q}")));
    }
    Ok(log_term_at(f, psi, k, (q as f64).ln()))
}

/// Blocks `[2^n, 2^{n+1})` up to this `n` are summed term by term.
const EXACT_BLOCKS: usize = 16;
/// Monotonicity of `r^{-k} f(r)` is checked for `q >= 2^MONO_FROM`.
const MONO_FROM: f64 = 8.0;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesVerdict {
    pub f: String,
    pub psi: String,
    pub k: u32,
    /// `Finite` means the series converges.
    pub verdict: ConditionVerdict,
    /// Implied value of `H^f(W_k(ψ))`.
    pub measure: String,
    /// Slope of `log term` against `log q` over `q in [2^10, 2^40]`.
    pub fitted_exponent: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesOptions {
    pub rule: ShellRule,
    pub quad: QuadOptions,
}

impl Default for SeriesOptions {
    fn default() -> Self {
        SeriesOptions { rule: ShellRule::default(), quad: QuadOptions { rel_tol: 1e-10, ..QuadOptions::default() } }
    }
}

fn require_monotone(f: &GaugeFunction, psi: &ApproxFunction, k: u32) -> Result<()> {
    // r^{-k} f(r) is monotone iff the local exponent of f stays on one side of k
    let mut sign = 0i8;
    let mut x = MONO_FROM * LN_2;
    while x < 1e6 {
        let ell = psi.log_neg_log(x);
        let log_r = -ell.exp();
        let d = f.elasticity(log_r.max(-f64::MAX)) - k as f64;
        let s = if d > 1e-12 {
            1
        } else if d < -1e-12 {
            -1
        } else {
            0
        };
        if s != 0 {
            if sign != 0 && s != sign {
                return Err(Error::Precondition(format!(
                    "r^-{k} f(r) is not monotone for {} along {}",
                    f.label(),
                    psi.label()
                )));
            }
            sign = s;
        }
        x *= 1.25;
    }
    Ok(())
}

fn log_block(f: &GaugeFunction, psi: &ApproxFunction, k: u32, n: usize, quad: QuadOptions) -> Result<f64> {
    if n <= EXACT_BLOCKS {
        let lo = 1u64 << n;
        let lo = lo.max(2);
        let mut acc = f64::NEG_INFINITY;
        for q in lo..(1u64 << (n + 1)) {
            acc = log_add(acc, log_term_at(f, psi, k, (q as f64).ln()));
        }
        Ok(acc)
    } else {
        let a = n as f64 * LN_2;
        // Σ_q h(q) ≈ ∫ h(q) dq = ∫ h(e^x) e^x dx
        integrate_log(|x| x + log_term_at(f, psi, k, x), a, a + LN_2, quad)
    }
}

/// Classifies `Σ_{q>=2} q^k f(ψ(q))` by dyadic condensation.
pub fn classify_series(f: &GaugeFunction, psi: &ApproxFunction, k: u32) -> Result<SeriesVerdict> {
    classify_series_with(f, psi, k, &SeriesOptions::default())
}

pub fn classify_series_with(
    f: &GaugeFunction,
    psi: &ApproxFunction,
    k: u32,
    opts: &SeriesOptions,
) -> Result<SeriesVerdict> {
    if k == 0 {
        return Err(Error::Domain("ambient dimension k must be >= 1".into()));
    }
    require_monotone(f, psi, k)?;
    // block 0 is [1, 2) and holds no terms
    let verdict = opts.rule.evaluate(
        |n| {
            if n == 0 {
                Ok(f64::NEG_INFINITY)
            } else {
                log_block(f, psi, k, n, opts.quad)
            }
        },
        "series condensation",
    );
    let mut verdict = verdict?;
    verdict.diagnostics = verdict.diagnostics.replacen("dyadic shells", "blocks q in [2^n, 2^(n+1))", 1);
    let measure = match verdict.status {
        VerdictStatus::Finite => "H^f(W_k(psi)) = 0".to_string(),
        VerdictStatus::Divergent => "H^f(W_k(psi)) = H^f(I^k)".to_string(),
        VerdictStatus::Inconclusive => "undetermined".to_string(),
    };
    let xs: Vec<f64> = (10..=40).map(|j| j as f64 * LN_2).collect();
    let ys: Vec<f64> = xs.iter().map(|&x| log_term_at(f, psi, k, x)).collect();
    Ok(SeriesVerdict { f: f.label(), psi: psi.label(), k, verdict, measure, fitted_exponent: ls_slope(&xs, &ys) })
}

/// Closed-form convergence verdict for the built-in pairings; `None` when
/// the pair has no closed form here.
pub fn closed_form_verdict(f: &GaugeFunction, psi: &ApproxFunction, k: u32) -> Option<VerdictStatus> {
    let kf = k as f64;
    let conv = |c: bool| Some(if c { VerdictStatus::Finite } else { VerdictStatus::Divergent });
    match (f.family(), psi) {
        (GaugeFamily::LogPower { s }, ApproxFunction::ExpPower { tau }) => conv(tau * s - kf > 1.0),
        (GaugeFamily::Power { s }, ApproxFunction::PurePower { tau }) => conv(tau * s - kf > 1.0),
        (GaugeFamily::PowerLog { delta, s, beta }, ApproxFunction::PowerLogPower { tau })
            if ((delta * tau) - (kf + 1.0)).abs() < 1e-12 && (beta * tau - 1.0).abs() < 1e-12 =>
        {
            conv(*s < kf)
        }
        _ => None,
    }
}

/// Logarithmic dimension `(k+1)/τ` of `W_k(exp(-q^τ))`.
pub fn w_log_dimension(tau: f64, k: u32) -> Result<f64> {
    let tau = check_tau(tau)?;
    Ok((k as f64 + 1.0) / tau)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum GapBand {
    /// `s <= k`: projections have zero measure in every direction.
    ZeroForAll,
    /// `k < s <= k + 1`: neither bound applies.
    Gap,
    /// `s > k + 1`: infinite measure for almost every direction.
    InfiniteAe,
}

impl GapBand {
    pub fn describe(&self) -> &'static str {
        match self {
            GapBand::ZeroForAll => "zero for all theta",
            GapBand::Gap => "gap of uncertainty",
            GapBand::InfiniteAe => "infinite a.e.",
        }
    }

    /// The projected measure in this band: "zero", "infinite" or "unknown".
    pub fn projected_measure(&self) -> &'static str {
        match self {
            GapBand::ZeroForAll => "zero",
            GapBand::Gap => "unknown",
            GapBand::InfiniteAe => "infinite",
        }
    }
}

pub fn gap_band(s: f64, k: u32) -> GapBand {
    let kf = k as f64;
    if s <= kf {
        GapBand::ZeroForAll
    } else if s <= kf + 1.0 {
        GapBand::Gap
    } else {
        GapBand::InfiniteAe
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GapRow {
    pub s: f64,
    pub band: GapBand,
    pub description: &'static str,
    pub projected_measure: &'static str,
    /// Integral condition on `(f_{δ,k}, f_{δ,s})`.
    pub integral: VerdictStatus,
    /// The integral converges exactly in the `InfiniteAe` band.
    pub consistent: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RegimeReport {
    pub delta: f64,
    pub k: u32,
    pub tau: f64,
    pub rows: Vec<GapRow>,
}

/// Default `s` values for the gap table: `0.25, 0.5, ..., k + 2.5`.
pub fn default_gap_s_values(k: u32) -> Vec<f64> {
    let top = ((k as f64 + 2.5) * 4.0).round() as usize;
    (1..=top).map(|i| i as f64 * 0.25).collect()
}

/// Bands of the family `f_{δ,s}` with `τ = (k+1)/δ`, each cross-checked
/// against the integral condition.
pub fn gap_report(delta: f64, k: u32, s_values: &[f64]) -> Result<RegimeReport> {
    if !(delta > 0.0 && delta < 1.0) {
        return Err(Error::Precondition(format!("gap report needs 0 < delta < 1, got {delta}")));
    }
    if k == 0 {
        return Err(Error::Domain("k must be >= 1".into()));
    }
    let tau = (k as f64 + 1.0) / delta;
    let f = GaugeFunction::f_delta_s(delta, k as f64, tau)?;
    let rows: Result<Vec<GapRow>> = s_values
        .par_iter()
        .map(|&s| {
            if !(s > 0.0) {
                return Err(Error::Domain(format!("s must be > 0, got {s}")));
            }
            let g = GaugeFunction::f_delta_s(delta, s, tau)?;
            let integral = check_integral_condition(&f, &g)?.status;
            let band = gap_band(s, k);
            let consistent = match integral {
                VerdictStatus::Finite => band == GapBand::InfiniteAe,
                VerdictStatus::Divergent => band != GapBand::InfiniteAe,
                VerdictStatus::Inconclusive => false,
            };
            Ok(GapRow {
                s,
                band,
                description: band.describe(),
                projected_measure: band.projected_measure(),
                integral,
                consistent,
            })
        })
        .collect();
    Ok(RegimeReport { delta, k, tau, rows: rows? })
}
