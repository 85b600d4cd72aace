//! Dimension (gauge) functions and the analytic conditions imposed on them.
//!
//! Every gauge is evaluated in log space: `evaluate_log(log r) = log f(r)`.
//! Radii deep inside the nested-disc construction are far below the smallest
//! positive `f64`, so the linear-domain [`GaugeFunction::evaluate`] is only a
//! convenience wrapper.

mod conditions;
mod verdict;

pub use conditions::{
    check_divergence_of_df_over_g, check_integral_condition, check_integral_condition_with, check_length_criterion,
    check_limit_condition, check_rate_condition, check_rate_condition_with, default_t_grid, rate_inner_bound,
    ShellOptions,
};
pub(crate) use verdict::{log_add, ls_slope};
pub use verdict::{ConditionVerdict, ShellRule, VerdictStatus};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// `log(1/2)`: `log*` is frozen at this value for `r >= 1/2`.
pub const LOG_STAR_CUTOFF: f64 = -std::f64::consts::LN_2;

/// `log* r` evaluated from `log r`.
#[inline]
pub fn log_star(log_r: f64) -> f64 {
    log_r.min(LOG_STAR_CUTOFF)
}

/// Monotone piecewise log-linear table of `(log r, log f)` samples.
#[derive(Debug, Clone, PartialEq)]
pub struct LogTable {
    log_r: Vec<f64>,
    log_f: Vec<f64>,
}

impl LogTable {
    pub fn new(points: &[[f64; 2]]) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidGauge("table needs at least two samples".into()));
        }
        let mut pts = points.to_vec();
        pts.sort_by(|a, b| a[0].total_cmp(&b[0]));
        for w in pts.windows(2) {
            if !(w[0][0].is_finite() && w[0][1].is_finite() && w[1][0].is_finite() && w[1][1].is_finite()) {
                return Err(Error::InvalidGauge("table entries must be finite".into()));
            }
            if w[1][0] <= w[0][0] {
                return Err(Error::InvalidGauge(format!("duplicate table abscissa log_r = {}", w[0][0])));
            }
            if w[1][1] < w[0][1] {
                return Err(Error::InvalidGauge(format!(
                    "table is not monotone between log_r = {} and {}",
                    w[0][0], w[1][0]
                )));
            }
        }
        if pts[1][1] <= pts[0][1] {
            return Err(Error::InvalidGauge(
                "first table segment must be strictly increasing so that f(r) -> 0".into(),
            ));
        }
        Ok(LogTable { log_r: pts.iter().map(|p| p[0]).collect(), log_f: pts.iter().map(|p| p[1]).collect() })
    }

    pub fn points(&self) -> Vec<[f64; 2]> {
        self.log_r.iter().zip(&self.log_f).map(|(&a, &b)| [a, b]).collect()
    }

    fn segment(&self, log_r: f64) -> Option<usize> {
        let n = self.log_r.len();
        if log_r >= self.log_r[n - 1] {
            return None;
        }
        if log_r < self.log_r[0] {
            return Some(0);
        }
        let idx = self.log_r.partition_point(|&x| x <= log_r);
        Some(idx - 1)
    }

    fn slope(&self, i: usize) -> f64 {
        (self.log_f[i + 1] - self.log_f[i]) / (self.log_r[i + 1] - self.log_r[i])
    }

    fn eval(&self, log_r: f64) -> f64 {
        match self.segment(log_r) {
            None => *self.log_f.last().unwrap(),
            Some(i) => self.log_f[i] + self.slope(i) * (log_r - self.log_r[i]),
        }
    }

    fn elasticity(&self, log_r: f64) -> f64 {
        match self.segment(log_r) {
            None => 0.0,
            Some(i) => self.slope(i),
        }
    }
}

/// Built-in gauge families.
#[derive(Debug, Clone, PartialEq)]
pub enum GaugeFamily {
    /// `r^s`
    Power { s: f64 },
    /// `(-log* r)^{-s}`
    LogPower { s: f64 },
    /// `r^delta (-beta log* r)^s`, frozen above its last increasing point.
    PowerLog { delta: f64, s: f64, beta: f64 },
    /// Log-linear interpolation of `(log r, log f)` samples.
    Table(LogTable),
}

/// An evaluable dimension function.
///
/// `PowerLog` with `s > 0` is not monotone on all of `(0, 1]`: its log
/// derivative `delta + s / log r` turns negative once `-log r < s / delta`.
/// The family is therefore held constant above `log r = -s/delta` whenever
/// that point lies below `log*`'s cutoff, which changes nothing near `r = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct GaugeFunction {
    family: GaugeFamily,
    /// Largest log-radius at which the raw formula is used; constant above.
    log_r_cap: f64,
}

impl GaugeFunction {
    pub fn power(s: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidGauge(format!("power exponent must be > 0, got {s}")));
        }
        Ok(GaugeFunction { family: GaugeFamily::Power { s }, log_r_cap: 0.0 })
    }

    pub fn log_power(s: f64) -> Result<Self> {
        if !(s.is_finite() && s > 0.0) {
            return Err(Error::InvalidGauge(format!("logpower exponent must be > 0, got {s}")));
        }
        Ok(GaugeFunction { family: GaugeFamily::LogPower { s }, log_r_cap: 0.0 })
    }

    pub fn power_log(delta: f64, s: f64, beta: f64) -> Result<Self> {
        if !(delta.is_finite() && s.is_finite() && beta.is_finite()) {
            return Err(Error::InvalidGauge("powerlog parameters must be finite".into()));
        }
        if beta <= 0.0 {
            return Err(Error::InvalidGauge(format!("powerlog scale beta must be > 0, got {beta}")));
        }
        if delta < 0.0 || (delta == 0.0 && s >= 0.0) {
            return Err(Error::InvalidGauge(format!(
                "powerlog with delta = {delta}, s = {s} does not tend to 0 at r = 0"
            )));
        }
        let mut log_r_cap = 0.0;
        if s > 0.0 {
            let turn = -s / delta;
            if turn < LOG_STAR_CUTOFF {
                log_r_cap = turn;
            }
        }
        Ok(GaugeFunction { family: GaugeFamily::PowerLog { delta, s, beta }, log_r_cap })
    }

    pub fn table(points: &[[f64; 2]]) -> Result<Self> {
        Ok(GaugeFunction { family: GaugeFamily::Table(LogTable::new(points)?), log_r_cap: 0.0 })
    }

    /// `f_{delta,s}(r) = r^delta (-(1/tau) log* r)^s`.
    pub fn f_delta_s(delta: f64, s: f64, tau: f64) -> Result<Self> {
        if !(tau > 0.0) {
            return Err(Error::InvalidGauge(format!("tau must be > 0, got {tau}")));
        }
        Self::power_log(delta, s, 1.0 / tau)
    }

    /// A gauge `g(r) = f(r log(1/r))`, the extreme case of the growth
    /// relation `g(r) <= M f(r log(1/r))` with `M = 1`.
    ///
    /// Exact for power gauges; otherwise tabulated at 64 points per decade.
    pub fn log_growth_partner(&self) -> Result<Self> {
        if let GaugeFamily::Power { s } = self.family {
            return Self::power_log(s, s, 1.0);
        }
        // r log(1/r) < r* requires log r well below -1; tabulate there.
        let per_decade = 64.0;
        let step = std::f64::consts::LN_10 / per_decade;
        let hi = -2.0f64;
        let lo = -700.0f64;
        let n = ((hi - lo) / step).ceil() as usize;
        let mut pts = Vec::with_capacity(n + 1);
        for i in 0..=n {
            let lr = lo + step * i as f64;
            let shifted = lr + (-lr).ln();
            pts.push([lr, self.evaluate_log(shifted.min(0.0))?]);
        }
        // Monotone clean-up against rounding at the frozen top end.
        for i in 1..pts.len() {
            if pts[i][1] < pts[i - 1][1] {
                pts[i][1] = pts[i - 1][1];
            }
        }
        Self::table(&pts)
    }

    pub fn family(&self) -> &GaugeFamily {
        &self.family
    }

    /// Log-radius above which the gauge is held constant (0 if never).
    pub fn log_r_cap(&self) -> f64 {
        self.log_r_cap
    }

    pub fn label(&self) -> String {
        match &self.family {
            GaugeFamily::Power { s } => format!("power(s={s})"),
            GaugeFamily::LogPower { s } => format!("logpower(s={s})"),
            GaugeFamily::PowerLog { delta, s, beta } => {
                format!("powerlog(delta={delta},s={s},beta={beta})")
            }
            GaugeFamily::Table(t) => format!("table({} samples)", t.log_r.len()),
        }
    }

    fn check_log_r(log_r: f64) -> Result<()> {
        if log_r.is_nan() || log_r > 0.0 {
            return Err(Error::Domain(format!("log r must be <= 0, got {log_r}")));
        }
        Ok(())
    }

    /// `f(r)` for `0 < r <= 1`.
    pub fn evaluate(&self, r: f64) -> Result<f64> {
        if !(r > 0.0 && r <= 1.0) {
            return Err(Error::Domain(format!("radius must lie in (0, 1], got {r}")));
        }
        let lf = self.evaluate_log(r.ln())?;
        let v = lf.exp();
        if v == 0.0 && lf.is_finite() {
            return Err(Error::Domain(format!("f({r}) underflows (log f = {lf}); use evaluate_log")));
        }
        Ok(v)
    }

    /// `log f(e^{log_r})` without forming `e^{log_r}`.
    pub fn evaluate_log(&self, log_r: f64) -> Result<f64> {
        Self::check_log_r(log_r)?;
        Ok(self.log_value(log_r))
    }

    /// Unchecked log evaluation for internal loops; `log_r <= 0`.
    #[inline]
    pub(crate) fn log_value(&self, log_r: f64) -> f64 {
        let lr = log_r.min(self.log_r_cap);
        match &self.family {
            GaugeFamily::Power { s } => s * lr,
            GaugeFamily::LogPower { s } => -s * (-log_star(lr)).ln(),
            GaugeFamily::PowerLog { delta, s, beta } => {
                let logf = if *s == 0.0 { 0.0 } else { s * (-beta * log_star(lr)).ln() };
                delta * lr + logf
            }
            GaugeFamily::Table(t) => t.eval(lr),
        }
    }

    /// `log f(r)` given `ell = log(-log r)`, for radii too small for `log r`
    /// itself to be carried accurately (`log r = -e^{ell}`).
    pub fn evaluate_log_deep(&self, ell: f64) -> f64 {
        let u = ell.exp();
        let lr = -u;
        if lr >= self.log_r_cap || (lr >= LOG_STAR_CUTOFF && !matches!(self.family, GaugeFamily::Power { .. })) {
            return self.log_value(lr.max(-f64::MAX));
        }
        match &self.family {
            GaugeFamily::Power { s } => -s * u,
            GaugeFamily::LogPower { s } => -s * ell,
            GaugeFamily::PowerLog { delta, s, beta } => {
                let logf = if *s == 0.0 { 0.0 } else { s * (beta.ln() + ell) };
                -delta * u + logf
            }
            GaugeFamily::Table(_) => self.log_value(lr.max(-f64::MAX)),
        }
    }

    /// `d log f / d log r` at `log_r` (the local exponent).
    pub fn elasticity(&self, log_r: f64) -> f64 {
        if log_r > self.log_r_cap {
            return 0.0;
        }
        match &self.family {
            GaugeFamily::Power { s } => *s,
            GaugeFamily::LogPower { s } => {
                if log_r < LOG_STAR_CUTOFF {
                    s / (-log_r)
                } else {
                    0.0
                }
            }
            GaugeFamily::PowerLog { delta, s, .. } => {
                if log_r < LOG_STAR_CUTOFF {
                    delta + s / log_r
                } else {
                    *delta
                }
            }
            GaugeFamily::Table(t) => t.elasticity(log_r),
        }
    }

    pub fn to_spec(&self) -> GaugeSpec {
        match &self.family {
            GaugeFamily::Power { s } => GaugeSpec { family: FamilyTag::Power, s: Some(*s), ..Default::default() },
            GaugeFamily::LogPower { s } => GaugeSpec { family: FamilyTag::Logpower, s: Some(*s), ..Default::default() },
            GaugeFamily::PowerLog { delta, s, beta } => GaugeSpec {
                family: FamilyTag::Powerlog,
                s: Some(*s),
                delta: Some(*delta),
                beta: Some(*beta),
                table: None,
            },
            GaugeFamily::Table(t) => {
                GaugeSpec { family: FamilyTag::Table, table: Some(t.points()), ..Default::default() }
            }
        }
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let de = &mut serde_json::Deserializer::from_str(text);
        let spec: GaugeSpec = serde_path_to_error::deserialize(de)
            .map_err(|e| Error::ConfigParse { path: e.path().to_string(), message: e.inner().to_string() })?;
        spec.build()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum FamilyTag {
    #[default]
    Power,
    Logpower,
    Powerlog,
    Table,
}

/// JSON form of a gauge: `{"family": "power"|"logpower"|"powerlog"|"table", ...}`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GaugeSpec {
    pub family: FamilyTag,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub s: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub delta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub beta: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub table: Option<Vec<[f64; 2]>>,
}

impl GaugeSpec {
    pub fn build(&self) -> Result<GaugeFunction> {
        let need = |v: Option<f64>, name: &str| {
            v.ok_or_else(|| Error::InvalidGauge(format!("family {:?} requires `{name}`", self.family)))
        };
        match self.family {
            FamilyTag::Power => GaugeFunction::power(need(self.s, "s")?),
            FamilyTag::Logpower => GaugeFunction::log_power(need(self.s, "s")?),
            FamilyTag::Powerlog => {
                GaugeFunction::power_log(need(self.delta, "delta")?, need(self.s, "s")?, self.beta.unwrap_or(1.0))
            }
            FamilyTag::Table => match &self.table {
                Some(t) => GaugeFunction::table(t),
                None => Err(Error::InvalidGauge("family table requires `table`".into())),
            },
        }
    }
}

impl Serialize for GaugeFunction {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_spec().serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for GaugeFunction {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        let spec = GaugeSpec::deserialize(deserializer)?;
        spec.build().map_err(serde::de::Error::custom)
    }
}

/// Sampling grid of radii, carried as log-radii in decreasing order.
#[derive(Debug, Clone, PartialEq)]
pub struct RadiusGrid {
    log_r: Vec<f64>,
}

impl RadiusGrid {
    pub const POINTS_PER_DECADE: usize = 64;

    pub fn from_radii(radii: &[f64]) -> Result<Self> {
        let mut log_r = Vec::with_capacity(radii.len());
        for &r in radii {
            if !(r > 0.0 && r <= 1.0) {
                return Err(Error::Domain(format!("grid radius must lie in (0, 1], got {r}")));
            }
            log_r.push(r.ln());
        }
        Self::from_log_radii(log_r)
    }

    pub fn from_log_radii(mut log_r: Vec<f64>) -> Result<Self> {
        if log_r.iter().any(|x| !x.is_finite() || *x > 0.0) {
            return Err(Error::Domain("grid log-radii must be finite and <= 0".into()));
        }
        log_r.sort_by(|a, b| b.total_cmp(a));
        log_r.dedup();
        Ok(RadiusGrid { log_r })
    }

    /// `decades` decades below `log_r1`, 64 points per decade.
    pub fn log_spaced(log_r1: f64, decades: f64) -> Result<Self> {
        let n = (decades * Self::POINTS_PER_DECADE as f64).round() as usize;
        let step = std::f64::consts::LN_10 / Self::POINTS_PER_DECADE as f64;
        Self::from_log_radii((0..=n).map(|i| log_r1 - step * i as f64).collect())
    }

    /// The default fitting grid: 12 decades below `r = 1e-3`.
    pub fn standard() -> Self {
        Self::log_spaced(1e-3f64.ln(), 12.0).expect("static grid")
    }

    pub fn log_radii(&self) -> &[f64] {
        &self.log_r
    }

    pub fn len(&self) -> usize {
        self.log_r.len()
    }

    pub fn is_empty(&self) -> bool {
        self.log_r.is_empty()
    }

    fn decades(&self) -> f64 {
        match (self.log_r.first(), self.log_r.last()) {
            (Some(a), Some(b)) => (a - b) / std::f64::consts::LN_10,
            _ => 0.0,
        }
    }

    fn require_fit_span(&self) -> Result<()> {
        if self.log_r.len() < 16 || self.decades() < 6.0 - 1e-9 {
            return Err(Error::Precondition(format!(
                "exponent fitting needs >= 16 points over >= 6 decades, got {} points over {:.2} decades",
                self.log_r.len(),
                self.decades()
            )));
        }
        Ok(())
    }
}

/// Result of fitting `f(lambda r) >= kappa lambda^s f(r)` (doubling) or its
/// reverse (codoubling) on a grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ExponentFit {
    /// Asymptotic exponent `s`.
    pub exponent: f64,
    /// Constant making the inequality hold on every sampled pair.
    pub kappa: f64,
    /// Extreme of `f(2r)/f(r)` on the grid (max for doubling, min for codoubling).
    pub constant: f64,
}

impl ExponentFit {
    /// The doubling constant implied by the exponent, `c = 2^s`.
    pub fn implied_constant(&self) -> f64 {
        self.exponent.exp2()
    }
}

const MAX_DOUBLING_EXPONENT: f64 = 16.0;
const MIN_CODOUBLING_EXPONENT: f64 = 1e-3;

/// Least-squares fit `e(u) = e_inf + b/u` of the local exponents against
/// `u = -log r`; `e_inf` is the exponent in the limit `r -> 0`.
fn asymptotic_exponent(f: &GaugeFunction, grid: &RadiusGrid) -> Result<f64> {
    let samples: Vec<(f64, f64)> =
        grid.log_radii().iter().filter(|&&lr| lr < 0.0).map(|&lr| (1.0 / (-lr), f.elasticity(lr))).collect();
    if samples.iter().any(|(_, e)| !e.is_finite()) {
        return Err(Error::NoExponent { what: "exponent", detail: "non-finite local exponent".into() });
    }
    let first = samples[0].1;
    if samples.iter().all(|(_, e)| *e == first) {
        return Ok(first);
    }
    let n = samples.len() as f64;
    let mx = samples.iter().map(|p| p.0).sum::<f64>() / n;
    let my = samples.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = samples.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = samples.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let b = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    Ok(my - b * mx)
}

fn log_values(f: &GaugeFunction, grid: &RadiusGrid) -> Vec<f64> {
    grid.log_radii().iter().map(|&lr| f.log_value(lr)).collect()
}

fn doubling_ratio_extremes(f: &GaugeFunction, grid: &RadiusGrid) -> (f64, f64) {
    let ln2 = std::f64::consts::LN_2;
    let mut lo = f64::INFINITY;
    let mut hi = f64::NEG_INFINITY;
    for &lr in grid.log_radii() {
        if lr + ln2 > 0.0 {
            continue;
        }
        let d = f.log_value(lr + ln2) - f.log_value(lr);
        lo = lo.min(d);
        hi = hi.max(d);
    }
    (lo.exp(), hi.exp())
}

/// Doubling exponent: the asymptotic local exponent `s` together with the
/// largest `kappa <= 1` for which `f(lambda r) >= kappa lambda^s f(r)` holds
/// on every grid pair. Power gauges return `(s, 1)` exactly.
pub fn doubling_exponent(f: &GaugeFunction, grid: &RadiusGrid) -> Result<ExponentFit> {
    grid.require_fit_span()?;
    let s = asymptotic_exponent(f, grid)?.max(0.0);
    if !(s <= MAX_DOUBLING_EXPONENT) {
        return Err(Error::NoExponent {
            what: "doubling",
            detail: format!("fitted exponent {s} exceeds {MAX_DOUBLING_EXPONENT}"),
        });
    }
    // F(L) = log f - s L; need F(deeper) - F(shallower) >= log kappa.
    let lf = log_values(f, grid);
    let mut best_prev = f64::NEG_INFINITY;
    let mut min_diff = 0.0f64;
    for (lr, v) in grid.log_radii().iter().zip(&lf) {
        let big_f = v - s * lr;
        if best_prev.is_finite() {
            min_diff = min_diff.min(big_f - best_prev);
        }
        best_prev = best_prev.max(big_f);
    }
    let kappa = min_diff.exp().min(1.0);
    let (_, c) = doubling_ratio_extremes(f, grid);
    if !(kappa > 0.0 && c.is_finite()) {
        return Err(Error::NoExponent { what: "doubling", detail: "degenerate ratios".into() });
    }
    Ok(ExponentFit { exponent: s, kappa, constant: c })
}

/// Codoubling exponent: the asymptotic local exponent `s` with the smallest
/// `kappa >= 1` for which `f(lambda r) <= kappa lambda^s f(r)` on the grid.
/// Fails when the exponent tends to zero, as for logarithmic gauges.
pub fn codoubling_exponent(f: &GaugeFunction, grid: &RadiusGrid) -> Result<ExponentFit> {
    grid.require_fit_span()?;
    let s = asymptotic_exponent(f, grid)?;
    if !(s > MIN_CODOUBLING_EXPONENT) {
        return Err(Error::NoExponent {
            what: "codoubling",
            detail: format!("local exponents tend to {s:.3e}; f decays slower than every power"),
        });
    }
    let lf = log_values(f, grid);
    let mut least_prev = f64::INFINITY;
    let mut max_diff = 0.0f64;
    for (lr, v) in grid.log_radii().iter().zip(&lf) {
        let big_f = v - s * lr;
        if least_prev.is_finite() {
            max_diff = max_diff.max(big_f - least_prev);
        }
        least_prev = least_prev.min(big_f);
    }
    let (c, _) = doubling_ratio_extremes(f, grid);
    Ok(ExponentFit { exponent: s, kappa: max_diff.exp().max(1.0), constant: c })
}
