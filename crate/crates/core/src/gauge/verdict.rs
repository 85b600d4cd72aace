use serde::Serialize;

use crate::error::Result;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VerdictStatus {
    Finite,
    Divergent,
    Inconclusive,
}

impl std::fmt::Display for VerdictStatus {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let s = match self {
            VerdictStatus::Finite => "finite",
            VerdictStatus::Divergent => "divergent",
            VerdictStatus::Inconclusive => "inconclusive",
        };
        f.write_str(s)
    }
}

/// Numerical verdict on an integral, limit or supremum.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConditionVerdict {
    pub status: VerdictStatus,
    /// The computed quantity; meaningful when `status` is `Finite`.
    pub value: f64,
    /// Per-shell contributions (may underflow to 0, see `log_shell_sums`).
    pub shell_sums: Vec<f64>,
    pub log_shell_sums: Vec<f64>,
    /// Fitted exponent `p` in `shell_n ~ (n+1)^p` over the final window.
    pub tail_exponent: Option<f64>,
    pub diagnostics: String,
}

impl ConditionVerdict {
    pub fn is_finite(&self) -> bool {
        self.status == VerdictStatus::Finite
    }

    pub fn is_divergent(&self) -> bool {
        self.status == VerdictStatus::Divergent
    }

    pub(crate) fn bare(status: VerdictStatus, value: f64, diagnostics: String) -> Self {
        ConditionVerdict {
            status,
            value,
            shell_sums: Vec::new(),
            log_shell_sums: Vec::new(),
            tail_exponent: None,
            diagnostics,
        }
    }
}

/// Decision rule for a series of non-negative shell contributions.
///
/// The shells are fitted as `(n+1)^p` on the last `window` entries. A series
/// with `p <= finite_slope` is summable, one with `p > divergent_slope` is
/// not (harmonic or slower), and the band in between is left undecided.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct ShellRule {
    pub finite_slope: f64,
    pub divergent_slope: f64,
    pub window: usize,
    pub max_shells: usize,
    pub min_shells: usize,
}

impl Default for ShellRule {
    fn default() -> Self {
        ShellRule { finite_slope: -1.1, divergent_slope: -1.05, window: 20, max_shells: 4096, min_shells: 64 }
    }
}

/// `log(exp(a) + exp(b))`.
pub(crate) fn log_add(a: f64, b: f64) -> f64 {
    if a == f64::NEG_INFINITY {
        return b;
    }
    if b == f64::NEG_INFINITY {
        return a;
    }
    let (hi, lo) = if a > b { (a, b) } else { (b, a) };
    hi + (lo - hi).exp().ln_1p()
}

/// Least-squares slope of `ys` against `xs`.
pub(crate) fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for (x, y) in xs.iter().zip(ys) {
        sxx += (x - mx) * (x - mx);
        sxy += (x - mx) * (y - my);
    }
    if sxx == 0.0 {
        0.0
    } else {
        sxy / sxx
    }
}

/// Slope of `log shell` against `log(n+1)` over `[start, end)`; `None` if the
/// window contains a vanishing shell.
fn window_slope(log_shells: &[f64], start: usize, end: usize) -> Option<f64> {
    let ys = &log_shells[start..end];
    if ys.iter().any(|y| !y.is_finite()) {
        return None;
    }
    let xs: Vec<f64> = (start..end).map(|n| ((n + 1) as f64).ln()).collect();
    Some(ls_slope(&xs, ys))
}

impl ShellRule {
    /// Sums shells `0, 1, 2, ...` produced by `log_shell(n)` (log of the
    /// n-th contribution) and classifies the series.
    pub fn evaluate<F>(&self, mut log_shell: F, what: &str) -> Result<ConditionVerdict>
    where
        F: FnMut(usize) -> Result<f64>,
    {
        let w = self.window.max(4);
        let mut logs: Vec<f64> = Vec::new();
        let mut log_total = f64::NEG_INFINITY;
        let mut stop_reason = "shell budget exhausted";
        while logs.len() < self.max_shells {
            let n = logs.len();
            let v = log_shell(n)?;
            let v = if v.is_nan() { f64::NEG_INFINITY } else { v };
            logs.push(v);
            log_total = log_add(log_total, v);
            let len = logs.len();
            if len < self.min_shells.max(w) {
                continue;
            }
            let tail = &logs[len - w..];
            if tail.iter().all(|x| *x == f64::NEG_INFINITY) {
                stop_reason = "tail vanished";
                break;
            }
            if tail.iter().all(|x| *x < log_total - 45.0) {
                if let Some(p) = window_slope(&logs, len - w, len) {
                    if p <= self.finite_slope {
                        stop_reason = "tail negligible";
                        break;
                    }
                }
            }
            if len >= 512 && len.is_power_of_two() {
                let short = window_slope(&logs, len - w, len);
                let long = window_slope(&logs, len / 2, len);
                if let (Some(a), Some(b)) = (short, long) {
                    if a > -0.9 && b > -0.9 {
                        stop_reason = "shells not decaying";
                        break;
                    }
                }
            }
        }
        Ok(self.classify(logs, log_total, stop_reason, what))
    }

    fn classify(&self, logs: Vec<f64>, log_total: f64, stop_reason: &str, what: &str) -> ConditionVerdict {
        let w = self.window.max(4).min(logs.len());
        let len = logs.len();
        let shell_sums: Vec<f64> = logs.iter().map(|x| x.exp()).collect();
        let tail = &logs[len - w..];
        let mut diagnostics = format!(
            "{what}: {len} dyadic shells, stop: {stop_reason}, window {w}, rule p<={} finite, p>{} divergent",
            self.finite_slope, self.divergent_slope
        );
        if tail.iter().all(|x| *x == f64::NEG_INFINITY) {
            diagnostics.push_str(", tail identically zero");
            return ConditionVerdict {
                status: VerdictStatus::Finite,
                value: log_total.exp(),
                shell_sums,
                log_shell_sums: logs,
                tail_exponent: None,
                diagnostics,
            };
        }
        let slope = window_slope(&logs, len - w, len);
        let (status, value) = match slope {
            None => (VerdictStatus::Inconclusive, f64::NAN),
            Some(p) if p <= self.finite_slope => {
                let s_n = logs[len - 1];
                let s_prev = logs[len - 2];
                let q = (s_n - s_prev).exp();
                let log_tail = if q < 0.95 {
                    s_n + (q / (1.0 - q)).ln()
                } else {
                    let nn = len as f64;
                    s_n - p * nn.ln() + (p + 1.0) * (nn + 0.5).ln() - (-p - 1.0).ln()
                };
                diagnostics.push_str(&format!(", tail estimate {:.3e}", log_tail.exp()));
                (VerdictStatus::Finite, log_add(log_total, log_tail).exp())
            }
            Some(p) if p > self.divergent_slope => (VerdictStatus::Divergent, f64::INFINITY),
            Some(_) => (VerdictStatus::Inconclusive, f64::NAN),
        };
        if let Some(p) = slope {
            diagnostics.push_str(&format!(", tail exponent {p:.4}"));
        }
        ConditionVerdict { status, value, shell_sums, log_shell_sums: logs, tail_exponent: slope, diagnostics }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn geometric_series_is_finite() {
        let v = ShellRule::default().evaluate(|n| Ok(-(n as f64) * 0.5f64.ln().abs()), "geo").unwrap();
        assert_eq!(v.status, VerdictStatus::Finite);
        assert!((v.value - 2.0).abs() < 1e-12, "{}", v.value);
    }

    #[test]
    fn p_series() {
        let rule = ShellRule::default();
        let v = rule.evaluate(|n| Ok(-2.0 * ((n + 1) as f64).ln()), "p2").unwrap();
        assert_eq!(v.status, VerdictStatus::Finite);
        let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
        assert!((v.value - zeta2).abs() < 1e-6, "{}", v.value);
        let h = rule.evaluate(|n| Ok(-((n + 1) as f64).ln()), "harmonic").unwrap();
        assert_eq!(h.status, VerdictStatus::Divergent);
        let slow = rule.evaluate(|n| Ok(-0.5 * ((n + 1) as f64).ln()), "slow").unwrap();
        assert_eq!(slow.status, VerdictStatus::Divergent);
        let border = rule.evaluate(|n| Ok(-1.07 * ((n + 1) as f64).ln()), "border").unwrap();
        assert_eq!(border.status, VerdictStatus::Inconclusive);
    }

    #[test]
    fn growing_shells_diverge() {
        let v = ShellRule::default().evaluate(|n| Ok(0.01 * n as f64), "grow").unwrap();
        assert_eq!(v.status, VerdictStatus::Divergent);
        assert!(v.shell_sums.len() < 4096);
    }

    #[test]
    fn log_add_is_stable() {
        assert_eq!(log_add(f64::NEG_INFINITY, 3.0), 3.0);
        assert!((log_add(-1000.0, -1000.0) - (-1000.0 + 2f64.ln())).abs() < 1e-12);
    }
}
