//! Nested-disc construction with equally spaced children on rotating diameters.
//!
//! Radii live in log space. Positions are carried in units of the root radius
//! `r_0` and every level stores only the offsets of the children relative to
//! their parent's center; all parents at a level are translates of each
//! other, so level-wide geometry never needs to be materialized.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gauge::{doubling_exponent, GaugeFunction, RadiusGrid};

/// `log r'_k` for `r'_k = (k log k log log k)^{-k}`; requires `k >= 3`.
pub fn prime_log_radius(k: usize) -> f64 {
    let kf = k as f64;
    -kf * (kf * kf.ln() * kf.ln().ln()).ln()
}

/// First index with `k log k log log k > 1`.
pub const FIRST_INDEX: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RadiusSchedule {
    /// `log r_k`, `k = 0..=depth`, strictly decreasing.
    pub log_r: Vec<f64>,
    /// Offset into the `r'` sequence (`r_k = r'_{k + k1}`); 0 for hand-built schedules.
    pub k1: usize,
}

impl RadiusSchedule {
    pub fn from_log_radii(log_r: Vec<f64>) -> Result<Self> {
        if log_r.is_empty() {
            return Err(Error::Schedule("schedule needs at least r_0".into()));
        }
        if log_r.iter().any(|x| !(x.is_finite() && *x <= 0.0)) {
            return Err(Error::Schedule("log radii must be finite and <= 0".into()));
        }
        if log_r.windows(2).any(|w| w[1] >= w[0]) {
            return Err(Error::Schedule("radii must be strictly decreasing".into()));
        }
        Ok(RadiusSchedule { log_r, k1: 0 })
    }

    pub fn depth(&self) -> usize {
        self.log_r.len() - 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScheduleOptions {
    /// Smallest index at which the scan for `k1` starts.
    pub min_k1: usize,
    /// Largest `k1` tried.
    pub max_k1: usize,
}

impl Default for ScheduleOptions {
    fn default() -> Self {
        ScheduleOptions { min_k1: FIRST_INDEX, max_k1: 1_000_000 }
    }
}

fn mass_ratio_ok(f: &GaugeFunction, lr_k: f64, lr_next: f64) -> bool {
    let fk = f.log_value(lr_k);
    let fn_ = f.log_value(lr_next);
    let quarter = fn_ - fk < -(4f64.ln());
    let ratio = (fn_ - lr_next) - (fk - lr_k) > 3f64.ln();
    quarter && ratio
}

/// Radius schedule `r_k = r'_{k + k1}`, `k = 0..=depth`, with the least `k1`
/// for which `f(r_{k+1}) < f(r_k)/4` and `f(r_{k+1})/r_{k+1} > 3 f(r_k)/r_k`
/// hold on every step.
pub fn derive_radius_schedule(f: &GaugeFunction, depth: usize) -> Result<RadiusSchedule> {
    derive_radius_schedule_with(f, depth, ScheduleOptions::default())
}

pub fn derive_radius_schedule_with(f: &GaugeFunction, depth: usize, opts: ScheduleOptions) -> Result<RadiusSchedule> {
    if depth == 0 {
        return Err(Error::Schedule("depth must be >= 1".into()));
    }
    let fit = doubling_exponent(f, &RadiusGrid::standard())?;
    if fit.exponent > 1.0 {
        return Err(Error::Precondition(format!(
            "{} has doubling exponent {} > 1; the construction needs exponent <= 1",
            f.label(),
            fit.exponent
        )));
    }
    let start = opts.min_k1.max(FIRST_INDEX);
    let mut run = 0usize;
    let mut k = start;
    // `run` counts consecutive good steps ending at k.
    while k <= opts.max_k1 + depth {
        if mass_ratio_ok(f, prime_log_radius(k), prime_log_radius(k + 1)) {
            run += 1;
            if run == depth {
                let k1 = k + 1 - depth;
                let log_r = (k1..=k1 + depth).map(prime_log_radius).collect();
                return Ok(RadiusSchedule { log_r, k1 });
            }
        } else {
            run = 0;
        }
        k += 1;
    }
    Err(Error::Schedule(format!(
        "no k1 in [{start}, {}] satisfies the radius inequalities for {} steps; {} is likely not doubling with exponent <= 1 on this range",
        opts.max_k1,
        depth,
        f.label()
    )))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Branching {
    /// `a = f(r_0)`.
    pub a: f64,
    pub log_a: f64,
    pub n: Vec<u64>,
}

/// Smallest admissible `N_{k+1}` in `[a/(N_1..N_k f(r_{k+1})), 2a/(N_1..N_k f(r_{k+1}))]`.
pub fn choose_branching(f: &GaugeFunction, schedule: &RadiusSchedule) -> Result<Branching> {
    let log_a = f.log_value(schedule.log_r[0]);
    let mut log_prod = 0.0;
    let mut n = Vec::with_capacity(schedule.depth());
    for k in 0..schedule.depth() {
        let log_lo = log_a - log_prod - f.log_value(schedule.log_r[k + 1]);
        let lo = log_lo.exp();
        if !(lo > 2.0) {
            return Err(Error::Branching(format!(
                "level {}: admissible interval [{lo:.4}, {:.4}] is too short to contain an integer >= 2",
                k + 1,
                2.0 * lo
            )));
        }
        if lo > 1e15 {
            return Err(Error::Branching(format!("level {}: branching number {lo:.3e} is too large", k + 1)));
        }
        let mut nk = lo.ceil();
        // log-space rounding guard: the lower end must really be met
        if (nk.ln() + log_prod + f.log_value(schedule.log_r[k + 1])) < log_a {
            nk += 1.0;
        }
        n.push(nk as u64);
        log_prod += nk.ln();
    }
    Ok(Branching { a: log_a.exp(), log_a, n })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HierarchyOptions {
    /// Refuse to build when the number of deepest discs exceeds this.
    pub disc_cap: u128,
}

impl Default for HierarchyOptions {
    fn default() -> Self {
        HierarchyOptions { disc_cap: 10_000_000 }
    }
}

/// One level of the construction; level 0 is the root disc.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Level {
    pub n: u64,
    pub log_r: f64,
    /// Radius in units of `r_0`.
    pub rho: f64,
    pub theta: f64,
    /// Cumulative direction `d_k` in `[0, pi)`.
    pub direction: f64,
    /// Center-to-center distance of adjacent siblings, units of `r_0`.
    pub spacing: f64,
}

impl Level {
    fn unit(&self) -> [f64; 2] {
        [self.direction.cos(), self.direction.sin()]
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct DiscHierarchy {
    gauge: GaugeFunction,
    schedule: RadiusSchedule,
    a: f64,
    log_a: f64,
    levels: Vec<Level>,
    units: Vec<[f64; 2]>,
    opts: HierarchyOptions,
}

fn wrap_pi(x: f64) -> f64 {
    let p = std::f64::consts::PI;
    let y = x.rem_euclid(p);
    if y >= p {
        0.0
    } else {
        y
    }
}

/// Builds the construction. `theta = None` selects `theta_{k+1} = r_{k+1}/r_k`.
pub fn build_hierarchy(
    f: &GaugeFunction,
    schedule: &RadiusSchedule,
    branching: &Branching,
    theta: Option<&[f64]>,
    opts: HierarchyOptions,
) -> Result<DiscHierarchy> {
    DiscHierarchy::from_parts(f.clone(), schedule.clone(), branching.n.clone(), theta, opts)
}

impl DiscHierarchy {
    /// Assembles a hierarchy from explicit parameters without checking the
    /// inequalities; see [`validate_hierarchy`].
    pub fn from_parts(
        gauge: GaugeFunction,
        schedule: RadiusSchedule,
        n: Vec<u64>,
        theta: Option<&[f64]>,
        opts: HierarchyOptions,
    ) -> Result<Self> {
        let depth = schedule.depth();
        if n.len() != depth {
            return Err(Error::Branching(format!("{} branching numbers for depth {depth}", n.len())));
        }
        if n.iter().any(|&x| x < 2) {
            return Err(Error::Branching("every N_k must be >= 2".into()));
        }
        let theta: Vec<f64> = match theta {
            Some(t) => {
                if t.len() != depth || t.iter().any(|x| !x.is_finite()) {
                    return Err(Error::Branching(format!("need {depth} finite angle increments")));
                }
                t.to_vec()
            }
            None => (0..depth).map(|k| (schedule.log_r[k + 1] - schedule.log_r[k]).exp()).collect(),
        };
        let mut count: u128 = 1;
        for &x in &n {
            count = count.saturating_mul(x as u128);
        }
        if count > opts.disc_cap {
            return Err(Error::DiscCap { count, cap: opts.disc_cap });
        }
        let log_r0 = schedule.log_r[0];
        let mut levels = vec![Level { n: 1, log_r: log_r0, rho: 1.0, theta: 0.0, direction: 0.0, spacing: 0.0 }];
        let mut dir = 0.0;
        for k in 1..=depth {
            let rho = (schedule.log_r[k] - log_r0).exp();
            let parent_rho = levels[k - 1].rho;
            dir = wrap_pi(dir + theta[k - 1]);
            let nk = n[k - 1];
            levels.push(Level {
                n: nk,
                log_r: schedule.log_r[k],
                rho,
                theta: theta[k - 1],
                direction: dir,
                spacing: 2.0 * (parent_rho - rho) / (nk - 1) as f64,
            });
        }
        let units = levels.iter().map(|l| l.unit()).collect();
        let log_a = gauge.log_value(log_r0);
        Ok(DiscHierarchy { gauge, schedule, a: log_a.exp(), log_a, levels, units, opts })
    }

    pub fn gauge(&self) -> &GaugeFunction {
        &self.gauge
    }

    pub fn schedule(&self) -> &RadiusSchedule {
        &self.schedule
    }

    pub fn depth(&self) -> usize {
        self.levels.len() - 1
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn log_a(&self) -> f64 {
        self.log_a
    }

    pub fn level(&self, k: usize) -> &Level {
        &self.levels[k]
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn options(&self) -> HierarchyOptions {
        self.opts
    }

    /// `log r_0`; physical coordinates are internal coordinates times `r_0`.
    pub fn log_unit(&self) -> f64 {
        self.schedule.log_r[0]
    }

    pub fn branching(&self) -> Vec<u64> {
        self.levels[1..].iter().map(|l| l.n).collect()
    }

    /// `N_1 ... N_k`.
    pub fn disc_count(&self, k: usize) -> u128 {
        self.levels[1..=k].iter().fold(1u128, |acc, l| acc.saturating_mul(l.n as u128))
    }

    /// `log(N_1 ... N_k)`.
    pub fn log_count(&self, k: usize) -> f64 {
        self.levels[1..=k].iter().map(|l| (l.n as f64).ln()).sum()
    }

    /// Offset of child `i` (0-based) at level `k >= 1` from its parent's center.
    #[inline]
    pub fn child_offset(&self, k: usize, i: u64) -> [f64; 2] {
        let l = &self.levels[k];
        let t = (i as f64 - (l.n - 1) as f64 / 2.0) * l.spacing;
        let u = self.units[k];
        [t * u[0], t * u[1]]
    }

    /// Scalar position of child `i` along the level-`k` diameter.
    #[inline]
    pub fn child_position(&self, k: usize, i: u64) -> f64 {
        let l = &self.levels[k];
        (i as f64 - (l.n - 1) as f64 / 2.0) * l.spacing
    }

    pub fn unit(&self, k: usize) -> [f64; 2] {
        self.units[k]
    }

    /// Gap between adjacent siblings at level `k`, units of `r_0`.
    pub fn gap_width(&self, k: usize) -> f64 {
        let l = &self.levels[k];
        (2.0 * self.levels[k - 1].rho - 2.0 * l.n as f64 * l.rho) / (l.n - 1) as f64
    }

    /// Center of the disc with index path `path` (0-based), units of `r_0`.
    pub fn center_of(&self, path: &[u64]) -> [f64; 2] {
        let mut c = [0.0, 0.0];
        for (j, &i) in path.iter().enumerate().rev() {
            let o = self.child_offset(j + 1, i);
            c[0] += o[0];
            c[1] += o[1];
        }
        c
    }

    /// All level-`k` centers in lexicographic path order, units of `r_0`.
    pub fn centers(&self, k: usize) -> Result<Vec<[f64; 2]>> {
        self.centers_capped(k, self.opts.disc_cap)
    }

    pub fn centers_capped(&self, k: usize, cap: u128) -> Result<Vec<[f64; 2]>> {
        let count = self.disc_count(k);
        if count > cap {
            return Err(Error::DiscCap { count, cap });
        }
        let mut cur = vec![[0.0f64, 0.0f64]];
        for j in 1..=k {
            let n = self.levels[j].n;
            let offs: Vec<[f64; 2]> = (0..n).map(|i| self.child_offset(j, i)).collect();
            let mut next = Vec::with_capacity(cur.len() * n as usize);
            for c in &cur {
                for o in &offs {
                    next.push([c[0] + o[0], c[1] + o[1]]);
                }
            }
            cur = next;
        }
        Ok(cur)
    }

    /// Index path of the `idx`-th level-`k` disc in lexicographic order.
    pub fn path_of(&self, k: usize, mut idx: u128) -> Vec<u64> {
        let mut path = vec![0u64; k];
        for j in (1..=k).rev() {
            let n = self.levels[j].n as u128;
            path[j - 1] = (idx % n) as u64;
            idx /= n;
        }
        path
    }

    /// JSON view with centers for every level holding at most `max_discs`
    /// discs in total (shallowest levels first).
    pub fn to_json(&self, max_discs: u128) -> serde_json::Value {
        let mut levels = Vec::new();
        let mut used: u128 = 0;
        for k in 0..=self.depth() {
            let c = self.disc_count(k);
            if used + c > max_discs {
                break;
            }
            used += c;
            levels.push(self.centers_capped(k, max_discs).unwrap_or_default());
        }
        serde_json::json!({
            "schedule": self.schedule,
            "a": self.a,
            "N": self.branching(),
            "theta": self.levels[1..].iter().map(|l| l.theta).collect::<Vec<_>>(),
            "directions": self.levels[1..].iter().map(|l| l.direction).collect::<Vec<_>>(),
            "log_unit": self.log_unit(),
            "levels_materialized": levels.len(),
            "levels": levels,
        })
    }
}

/// One inequality check at one level.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckResult {
    pub anchor: &'static str,
    pub name: &'static str,
    pub level: usize,
    pub pass: bool,
    /// Slack of the inequality (positive when it holds), in log units for
    /// multiplicative inequalities and in units of `r_0` otherwise.
    pub margin: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidationReport {
    pub checks: Vec<CheckResult>,
    pub notes: Vec<String>,
}

impl ValidationReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.pass)
    }

    pub fn failures(&self) -> Vec<&CheckResult> {
        self.checks.iter().filter(|c| !c.pass).collect()
    }

    pub fn count(&self, anchor: &str) -> usize {
        self.checks.iter().filter(|c| c.anchor == anchor).count()
    }
}

/// Tolerance for log-space comparisons of quantities that hold with equality
/// by construction.
const LOG_TOL: f64 = 1e-12;

/// Levels with at most this many discs are also checked for pairwise
/// disjointness across the whole level.
pub const GLOBAL_DISJOINT_CAP: u128 = 2_000_000;

fn push(
    checks: &mut Vec<CheckResult>,
    anchor: &'static str,
    name: &'static str,
    level: usize,
    margin: f64,
    strict: bool,
) {
    let pass = if strict { margin > 0.0 } else { margin >= -LOG_TOL };
    checks.push(CheckResult { anchor, name, level, pass, margin });
}

/// Checks every inequality of the construction at every built level.
pub fn validate_hierarchy(h: &DiscHierarchy) -> ValidationReport {
    let f = &h.gauge;
    let lr = &h.schedule.log_r;
    let ln2 = std::f64::consts::LN_2;
    let mut checks = Vec::new();
    let mut notes = Vec::new();
    for k in 0..=h.depth() {
        let mass = h.log_count(k) + f.log_value(lr[k]);
        push(&mut checks, "Eq20", "mass_lower", k, mass - h.log_a, false);
        push(&mut checks, "Eq20", "mass_upper", k, h.log_a + ln2 - mass, false);
    }
    for k in 0..h.depth() {
        let (f0, f1) = (f.log_value(lr[k]), f.log_value(lr[k + 1]));
        let child = &h.levels[k + 1];
        let nk = (child.n as f64).ln();
        push(&mut checks, "Eq21", "quarter_decay", k, -(4f64.ln()) - (f1 - f0), true);
        push(&mut checks, "Eq22", "ratio_growth", k, (f1 - lr[k + 1]) - (f0 - lr[k]) - 3f64.ln(), true);
        push(&mut checks, "Eq23", "children_fit", k, lr[k] - (nk + lr[k + 1]), true);
        push(&mut checks, "Eq25", "count_by_mass", k, ln2 + f0 - f1 - nk, false);
        push(&mut checks, "Eq25", "count_by_radius", k, (2.0f64 / 3.0).ln() + lr[k] - lr[k + 1] - nk, true);
        let gap = h.gap_width(k + 1);
        let rebuilt = 2.0 * child.n as f64 * child.rho + (child.n - 1) as f64 * gap - 2.0 * h.levels[k].rho;
        push(&mut checks, "Eq32", "gap_identity", k + 1, -rebuilt.abs() + 1e-12 * h.levels[k].rho, false);
        push(&mut checks, "Eq33", "gap_exceeds_radius", k + 1, (gap / child.rho).ln(), true);
        // siblings: exact pairwise distances of the relative offsets
        let n = child.n;
        let mut min_gap = f64::INFINITY;
        if n <= 4096 {
            for i in 0..n {
                let a = h.child_offset(k + 1, i);
                for j in i + 1..n {
                    let b = h.child_offset(k + 1, j);
                    let d = ((a[0] - b[0]).powi(2) + (a[1] - b[1]).powi(2)).sqrt();
                    min_gap = min_gap.min(d - 2.0 * child.rho);
                }
            }
        } else {
            for i in 0..n - 1 {
                let d = h.child_position(k + 1, i + 1) - h.child_position(k + 1, i);
                min_gap = min_gap.min(d - 2.0 * child.rho);
            }
        }
        push(&mut checks, "Eq32", "siblings_disjoint", k + 1, min_gap, true);
        let reach = (0..n)
            .map(|i| {
                let o = h.child_offset(k + 1, i);
                (o[0] * o[0] + o[1] * o[1]).sqrt()
            })
            .fold(0.0, f64::max);
        let parent = h.levels[k].rho;
        push(&mut checks, "Eq32", "child_inside_parent", k + 1, parent * (1.0 + 1e-12) - (reach + child.rho), false);
    }
    for k in 1..=h.depth() {
        if h.disc_count(k) <= GLOBAL_DISJOINT_CAP {
            let centers = h.centers_capped(k, GLOBAL_DISJOINT_CAP).expect("count checked");
            let margin = min_separation(&centers) - 2.0 * h.levels[k].rho;
            push(&mut checks, "Eq32", "level_disjoint", k, margin, true);
        } else {
            notes.push(format!(
                "level {k}: {} discs, whole-level disjointness follows from the sibling and containment checks",
                h.disc_count(k)
            ));
        }
    }
    notes.push(format!(
        "radius inequalities verified for k < {}; the tail beyond the built depth is assumed",
        h.depth()
    ));
    ValidationReport { checks, notes }
}

/// Smallest pairwise distance between points (sweep over x).
fn min_separation(points: &[[f64; 2]]) -> f64 {
    if points.len() < 2 {
        return f64::INFINITY;
    }
    let mut pts = points.to_vec();
    pts.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
    let mut best = f64::INFINITY;
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let dx = pts[j][0] - pts[i][0];
            if dx >= best {
                break;
            }
            let d = (dx * dx + (pts[j][1] - pts[i][1]).powi(2)).sqrt();
            best = best.min(d);
        }
    }
    best
}
