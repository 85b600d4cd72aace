//! Projections onto lines, interval covers and their gauge costs.

use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gauge::{doubling_exponent, log_add, ls_slope, GaugeFunction, RadiusGrid, VerdictStatus};
use crate::hierarchy::DiscHierarchy;
use crate::measure::{log_gauge_ext, AtomSampler, EnergyEstimate};
use crate::quad::cosine_power_integral;

/// Sorted, pairwise disjoint closed intervals on the line `L_theta`.
///
/// Coordinates are in units of `exp(log_unit)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct IntervalCover {
    pub theta: f64,
    pub log_unit: f64,
    pub intervals: Vec<[f64; 2]>,
    /// Largest interval length, same units as the intervals.
    pub rho: f64,
}

impl IntervalCover {
    /// Sweep-line union of `raw`.
    pub fn from_raw(raw: &[[f64; 2]], theta: f64, log_unit: f64) -> Self {
        let mut v: Vec<[f64; 2]> = raw.iter().map(|i| [i[0].min(i[1]), i[0].max(i[1])]).collect();
        v.sort_by(|a, b| a[0].total_cmp(&b[0]).then(a[1].total_cmp(&b[1])));
        let mut out: Vec<[f64; 2]> = Vec::with_capacity(v.len());
        for iv in v {
            match out.last_mut() {
                Some(last) if iv[0] <= last[1] => last[1] = last[1].max(iv[1]),
                _ => out.push(iv),
            }
        }
        let rho = out.iter().map(|i| i[1] - i[0]).fold(0.0, f64::max);
        IntervalCover { theta, log_unit, intervals: out, rho }
    }

    pub fn total_length(&self) -> f64 {
        self.intervals.iter().map(|i| i[1] - i[0]).sum()
    }

    pub fn len(&self) -> usize {
        self.intervals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.intervals.is_empty()
    }

    pub fn is_canonical(&self) -> bool {
        self.intervals.windows(2).all(|w| w[0][1] < w[1][0])
            && self.intervals.iter().all(|i| i[0] <= i[1])
            && self.rho == self.intervals.iter().map(|i| i[1] - i[0]).fold(0.0, f64::max)
    }
}

/// Union of raw intervals as a cover on `L_0` in physical units.
pub fn merge_intervals(raw: &[[f64; 2]]) -> IntervalCover {
    IntervalCover::from_raw(raw, 0.0, 0.0)
}

/// `[c·e_theta - r, c·e_theta + r]`.
pub fn project_disc(center: [f64; 2], log_r: f64, theta: f64) -> [f64; 2] {
    let t = center[0] * theta.cos() + center[1] * theta.sin();
    let r = log_r.exp();
    [t - r, t + r]
}

/// `log Σ g(|I|)` over a list of lengths in units of `exp(log_unit)`.
pub fn log_cost_of_lengths(g: &GaugeFunction, lengths: impl Iterator<Item = f64>, log_unit: f64) -> f64 {
    lengths.fold(
        f64::NEG_INFINITY,
        |acc, len| {
            if len > 0.0 {
                log_add(acc, log_gauge_ext(g, len.ln() + log_unit))
            } else {
                acc
            }
        },
    )
}

/// `(Σ g(|I_i|), ρ)` with `ρ` in physical units.
pub fn cover_cost(g: &GaugeFunction, cover: &IntervalCover) -> (f64, f64) {
    let lc = log_cost_of_lengths(g, cover.intervals.iter().map(|i| i[1] - i[0]), cover.log_unit);
    (lc.exp(), cover.rho * cover.log_unit.exp())
}

/// `d_theta = theta + pi/2 (mod pi)`, the direction of projection.
pub fn projection_direction(theta: f64) -> f64 {
    (theta + PI / 2.0).rem_euclid(PI)
}

/// Whether `d_theta` lies on the arc swept counterclockwise from `d_k` to
/// `d_{k+1}` (length `theta_{k+1}`).
pub fn qualifies(h: &DiscHierarchy, theta: f64, k: usize) -> bool {
    if k >= h.depth() {
        return false;
    }
    let d_k = h.level(k).direction;
    let step = h.level(k + 1).theta;
    if step >= PI {
        return true;
    }
    (projection_direction(theta) - d_k).rem_euclid(PI) <= step
}

/// Projection of one level of a hierarchy.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectedLevel {
    pub theta: f64,
    pub level: usize,
    /// Merged projections of every disc at `level`; `None` above the cap.
    pub cover: Option<IntervalCover>,
    /// Length of the projection of the children of one level-`(level-1)`
    /// parent, units of `r_0`.
    pub parent_span: f64,
}

/// Levels with more discs than this are projected per parent only.
pub const PROJECTION_CAP: u128 = 1 << 20;

fn child_intervals(h: &DiscHierarchy, theta: f64, level: usize) -> Vec<[f64; 2]> {
    let e = [theta.cos(), theta.sin()];
    let rho = h.level(level).rho;
    (0..h.level(level).n)
        .map(|i| {
            let o = h.child_offset(level, i);
            let t = o[0] * e[0] + o[1] * e[1];
            [t - rho, t + rho]
        })
        .collect()
}

fn parent_span(h: &DiscHierarchy, theta: f64, level: usize) -> f64 {
    let iv = child_intervals(h, theta, level);
    let lo = iv.iter().map(|i| i[0]).fold(f64::INFINITY, f64::min);
    let hi = iv.iter().map(|i| i[1]).fold(f64::NEG_INFINITY, f64::max);
    hi - lo
}

fn level_projections(h: &DiscHierarchy, theta: f64, level: usize) -> Result<Vec<[f64; 2]>> {
    let e = [theta.cos(), theta.sin()];
    let rho = h.level(level).rho;
    Ok(h.centers_capped(level, PROJECTION_CAP)?
        .into_iter()
        .map(|c| {
            let t = c[0] * e[0] + c[1] * e[1];
            [t - rho, t + rho]
        })
        .collect())
}

pub fn project_hierarchy(h: &DiscHierarchy, theta: f64, level: usize) -> Result<ProjectedLevel> {
    if level > h.depth() {
        return Err(Error::Precondition(format!("level {level} exceeds depth {}", h.depth())));
    }
    let cover = if h.disc_count(level) <= PROJECTION_CAP {
        Some(IntervalCover::from_raw(&level_projections(h, theta, level)?, theta, h.log_unit()))
    } else {
        None
    };
    let span = if level == 0 { 2.0 } else { parent_span(h, theta, level) };
    Ok(ProjectedLevel { theta, level, cover, parent_span: span })
}

/// Covers a sorted disjoint interval union by the fewest pieces of length
/// at most `rho` (greedy from the left); returns each piece's length,
/// trimmed to the first and last covered points inside it.
pub fn greedy_pieces(union: &[[f64; 2]], rho: f64) -> Vec<f64> {
    let mut pieces = Vec::new();
    let mut i = 0;
    let mut pos = match union.first() {
        Some(iv) => iv[0],
        None => return pieces,
    };
    while i < union.len() {
        let end = pos + rho;
        let mut covered_to = pos;
        while i < union.len() && union[i][0] <= end {
            covered_to = union[i][1].min(end);
            if union[i][1] > end {
                break;
            }
            i += 1;
        }
        pieces.push(covered_to - pos);
        if i < union.len() {
            pos = if union[i][0] > end { union[i][0] } else { end };
        }
    }
    pieces
}

/// One row of a direction sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub theta: f64,
    pub k: usize,
    pub cost: f64,
    pub bound: f64,
    /// `log(bound / cost)`.
    pub margin: f64,
    pub pass: bool,
    /// Whether the cover was built from the whole merged level (`true`) or
    /// parent by parent.
    pub merged: bool,
    pub pieces: u128,
}

/// Cover of the level-`(k+1)` projection by pieces of length `r_{k+1}` and
/// the bound `8 a g(r_{k+1}) / f(r_k)`.
pub fn level_cover(h: &DiscHierarchy, g: &GaugeFunction, theta: f64, k: usize) -> Result<SweepRow> {
    let level = k + 1;
    if level > h.depth() {
        return Err(Error::Precondition(format!("level {level} exceeds depth {}", h.depth())));
    }
    let rho = h.level(level).rho;
    let (log_cost, pieces, merged) = if h.disc_count(level) <= PROJECTION_CAP {
        let cover = IntervalCover::from_raw(&level_projections(h, theta, level)?, theta, h.log_unit());
        let p = greedy_pieces(&cover.intervals, rho);
        (log_cost_of_lengths(g, p.iter().copied(), h.log_unit()), p.len() as u128, true)
    } else {
        let cover = IntervalCover::from_raw(&child_intervals(h, theta, level), theta, h.log_unit());
        let p = greedy_pieces(&cover.intervals, rho);
        let per = log_cost_of_lengths(g, p.iter().copied(), h.log_unit());
        (per + h.log_count(k), p.len() as u128 * h.disc_count(k), false)
    };
    let f = h.gauge();
    let log_bound = 8f64.ln() + h.log_a() + g.log_value(h.level(level).log_r) - f.log_value(h.level(k).log_r);
    let margin = log_bound - log_cost;
    Ok(SweepRow {
        theta,
        k,
        cost: log_cost.exp(),
        bound: log_bound.exp(),
        margin,
        pass: margin >= -(1e-9f64).ln_1p(),
        merged,
        pieces,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepTable {
    pub rows: Vec<SweepRow>,
    pub angles: usize,
}

impl SweepTable {
    pub fn violations(&self) -> usize {
        self.rows.iter().filter(|r| !r.pass).count()
    }
}

/// `n` midpoint angles in `[0, pi)`.
pub fn uniform_angles(n: usize) -> Vec<f64> {
    (0..n).map(|i| (i as f64 + 0.5) * PI / n as f64).collect()
}

/// `n` angles of which `per_level` fall inside each arc `[d_k, d_{k+1}]`
/// (as projection directions) and the rest are uniform; sorted.
pub fn targeted_angles(h: &DiscHierarchy, n: usize, per_level: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(n);
    for k in 0..h.depth() {
        let d_k = h.level(k).direction;
        let step = h.level(k + 1).theta.min(PI);
        for j in 0..per_level {
            if out.len() >= n {
                break;
            }
            let d = d_k + step * (j as f64 + 0.5) / per_level as f64;
            out.push((d - PI / 2.0).rem_euclid(PI));
        }
    }
    let rest = n.saturating_sub(out.len());
    out.extend(uniform_angles(rest));
    out.sort_by(f64::total_cmp);
    out
}

/// For every angle and every qualifying `k` with `k + 1 <= max_level`,
/// measures the level cover against its bound.
pub fn sweep_directions(h: &DiscHierarchy, g: &GaugeFunction, thetas: &[f64], max_level: usize) -> Result<SweepTable> {
    if thetas.len() < 32 {
        return Err(Error::Precondition(format!("sweep needs at least 32 angles, got {}", thetas.len())));
    }
    let top = max_level.min(h.depth());
    let rows: Vec<Result<Vec<SweepRow>>> = thetas
        .par_iter()
        .map(|&theta| (0..top).filter(|&k| qualifies(h, theta, k)).map(|k| level_cover(h, g, theta, k)).collect())
        .collect();
    let mut out = Vec::new();
    for r in rows {
        out.extend(r?);
    }
    Ok(SweepTable { rows: out, angles: thetas.len() })
}

/// Pushforward of weighted atoms to `L_theta`; coordinates equal after
/// rounding to 1e-14 are coalesced.
pub fn project_measure(atoms: &[([f64; 2], f64)], theta: f64) -> Vec<(f64, f64)> {
    let (c, s) = (theta.cos(), theta.sin());
    let mut pts: Vec<(f64, f64)> = atoms
        .iter()
        .map(|(p, m)| {
            let t = p[0] * c + p[1] * s;
            ((t * 1e14).round() / 1e14, *m)
        })
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut out: Vec<(f64, f64)> = Vec::with_capacity(pts.len());
    for (t, m) in pts {
        match out.last_mut() {
            Some(last) if last.0 == t => last.1 += m,
            _ => out.push((t, m)),
        }
    }
    out
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ProjectedEnergy {
    /// `∫_0^pi I_g(μ_theta) dθ`, as `pi` times the grid average.
    pub avg: f64,
    /// `κ^{-1} B(s) I_g(μ)`.
    pub bound: f64,
    pub b_s: f64,
    pub s: f64,
    pub kappa: f64,
    pub planar: EnergyEstimate,
    pub projected_stderr: f64,
}

/// Averages projected g-energies over an angle grid with common random
/// pairs and compares against `κ^{-1} B(s) I_g(μ)`.
///
/// The grid is rotated by an independent uniform offset in `[0, pi/n)` for
/// every pair, so for a uniform grid the estimate is unbiased.
pub fn averaged_projected_energy<M: AtomSampler>(
    m: &M,
    g: &GaugeFunction,
    thetas: &[f64],
    pairs: u64,
    seed: u64,
) -> Result<ProjectedEnergy> {
    let fit = doubling_exponent(g, &RadiusGrid::standard())?;
    if fit.exponent >= 1.0 {
        return Err(Error::Precondition(format!("need doubling exponent s < 1, got {}", fit.exponent)));
    }
    if thetas.is_empty() || pairs == 0 {
        return Err(Error::Precondition("need angles and pairs".into()));
    }
    let q = m.coincidence_mass();
    if q > 0.5 {
        return Err(Error::MonteCarlo(format!("coincident pairs have probability {q:.3} > 0.5")));
    }
    let b_s = cosine_power_integral(fit.exponent)?;
    let dirs: Vec<[f64; 2]> = thetas.iter().map(|t| [t.cos(), t.sin()]).collect();
    // each pair sees the grid rotated by a uniform offset in [0, pi/n)
    let width = PI / dirs.len() as f64;
    const CHUNK: u64 = 1024;
    let chunks = pairs.div_ceil(CHUNK);
    let parts: Vec<Result<[f64; 5]>> = (0..chunks)
        .into_par_iter()
        .map(|b| {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            rng.set_stream(b);
            let count = CHUNK.min(pairs - b * CHUNK);
            let mut acc = [0.0; 5];
            for _ in 0..count {
                let (la, v) = loop {
                    let x = m.sample(&mut rng);
                    let y = m.sample(&mut rng);
                    if let Some(v) = m.unit_displacement(&x, &y) {
                        break v;
                    }
                };
                let planar = (-log_gauge_ext(g, la)).exp();
                let w: f64 = rng.gen::<f64>() * width;
                let (c, s) = (w.cos(), w.sin());
                let v = [c * v[0] + s * v[1], c * v[1] - s * v[0]];
                let mut proj = 0.0;
                for e in &dirs {
                    let t = (v[0] * e[0] + v[1] * e[1]).abs();
                    if t == 0.0 {
                        return Err(Error::MonteCarlo("projected pair collapsed to a point".into()));
                    }
                    proj += (-log_gauge_ext(g, la + t.ln())).exp();
                }
                proj *= PI / dirs.len() as f64;
                acc[0] += planar;
                acc[1] += planar * planar;
                acc[2] += proj;
                acc[3] += proj * proj;
                acc[4] += 1.0;
            }
            Ok(acc)
        })
        .collect();
    let mut tot = [0.0; 5];
    for p in parts {
        let p = p?;
        for i in 0..5 {
            tot[i] += p[i];
        }
    }
    let n = tot[4];
    let scale = 1.0 - q;
    let mean_p = tot[0] / n;
    let mean_j = tot[2] / n;
    let se = |s1: f64, s2: f64| (((s2 / n - (s1 / n).powi(2)) * n / (n - 1.0).max(1.0)).max(0.0) / n).sqrt();
    let planar = EnergyEstimate {
        mean: scale * mean_p,
        stderr: scale * se(tot[0], tot[1]),
        pairs_used: n as u64,
        collisions_rejected: 0,
    };
    Ok(ProjectedEnergy {
        avg: scale * mean_j,
        bound: b_s / fit.kappa * planar.mean,
        b_s,
        s: fit.exponent,
        kappa: fit.kappa,
        planar,
        projected_stderr: scale * se(tot[2], tot[3]),
    })
}

/// Cover-cost trends for a grid of exponents `s` of the gauges
/// `(-log* r)^{-s}` at shrinking scales `ρ`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CostSchedule {
    pub s_values: Vec<f64>,
    /// `log ρ`, decreasing.
    pub log_rho: Vec<f64>,
    /// `log_costs[i][j]`: log cover cost for `s_values[i]` at `log_rho[j]`.
    pub log_costs: Vec<Vec<f64>>,
}

impl CostSchedule {
    /// Builds the schedule from covers given as log interval lengths per scale.
    pub fn from_covers(s_values: &[f64], covers: &[(f64, Vec<f64>)]) -> Result<Self> {
        let mut log_costs = Vec::with_capacity(s_values.len());
        for &s in s_values {
            let g = GaugeFunction::log_power(s)?;
            log_costs.push(
                covers
                    .iter()
                    .map(|(_, lens)| {
                        lens.iter().fold(f64::NEG_INFINITY, |acc, &ll| log_add(acc, g.log_value(ll.min(0.0))))
                    })
                    .collect(),
            );
        }
        Ok(CostSchedule { s_values: s_values.to_vec(), log_rho: covers.iter().map(|c| c.0).collect(), log_costs })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LogDimensionEstimate {
    pub status: VerdictStatus,
    /// Critical exponent; `+inf` when every trend grows.
    pub value: f64,
    /// Fitted slope of `log cost` against `log(-log ρ)` for each `s`.
    pub slopes: Vec<f64>,
}

/// Trend threshold separating decay from growth.
const TREND_TOL: f64 = 1e-3;

/// Critical `s` between decaying and growing cover-cost trends.
pub fn estimate_log_dimension(schedule: &CostSchedule) -> Result<LogDimensionEstimate> {
    let m = schedule.log_rho.len();
    if m < 3 || schedule.s_values.is_empty() {
        return Err(Error::Precondition("need >= 3 scales and at least one s".into()));
    }
    if schedule.s_values.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Precondition("s values must increase".into()));
    }
    let xs: Vec<f64> = schedule.log_rho.iter().map(|l| (-l).ln()).collect();
    let slopes: Vec<f64> = schedule.log_costs.iter().map(|c| ls_slope(&xs, c)).collect();
    let grows: Vec<bool> = slopes.iter().map(|&p| p > TREND_TOL).collect();
    let decays: Vec<bool> = slopes.iter().map(|&p| p < -TREND_TOL).collect();
    let inconclusive =
        |slopes: Vec<f64>| Ok(LogDimensionEstimate { status: VerdictStatus::Inconclusive, value: f64::NAN, slopes });
    if decays.iter().all(|&d| d) {
        return Ok(LogDimensionEstimate { status: VerdictStatus::Finite, value: 0.0, slopes });
    }
    if grows.iter().all(|&g| g) {
        return Ok(LogDimensionEstimate { status: VerdictStatus::Divergent, value: f64::INFINITY, slopes });
    }
    // growth must give way to decay exactly once as s increases
    let first_decay = match decays.iter().position(|&d| d) {
        Some(i) => i,
        None => return inconclusive(slopes),
    };
    if !decays[first_decay..].iter().all(|&d| d) || first_decay == 0 {
        return inconclusive(slopes);
    }
    let i = first_decay - 1;
    let (s0, s1) = (schedule.s_values[i], schedule.s_values[first_decay]);
    let (p0, p1) = (slopes[i], slopes[first_decay]);
    let value = if p0 <= 0.0 { s0 } else { s0 + (s1 - s0) * p0 / (p0 - p1) };
    Ok(LogDimensionEstimate { status: VerdictStatus::Finite, value, slopes })
}

/// Projects a planar disc cover and merges it; returns
/// `(projected cost, planar cost)` with planar cost `Σ g(2 r_i)`.
pub fn lipschitz_transfer(g: &GaugeFunction, discs: &[([f64; 2], f64)], theta: f64) -> (f64, f64) {
    let raw: Vec<[f64; 2]> = discs.iter().map(|(c, r)| project_disc(*c, r.ln(), theta)).collect();
    let cover = IntervalCover::from_raw(&raw, theta, 0.0);
    let planar = log_cost_of_lengths(g, discs.iter().map(|d| 2.0 * d.1), 0.0).exp();
    (cover_cost(g, &cover).0, planar)
}

/// Random disc cover helper: `count` discs with centers in the unit square
/// and radii log-uniform in `[r_min, r_max]`.
pub fn random_disc_cover<R: Rng>(rng: &mut R, count: usize, r_min: f64, r_max: f64) -> Vec<([f64; 2], f64)> {
    (0..count)
        .map(|_| {
            let c = [rng.gen::<f64>(), rng.gen::<f64>()];
            let lr = r_min.ln() + (r_max.ln() - r_min.ln()) * rng.gen::<f64>();
            (c, lr.exp())
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hierarchy::{
        build_hierarchy, choose_branching, derive_radius_schedule, HierarchyOptions, RadiusSchedule,
    };

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn project_disc_examples() {
        let a = project_disc([3.0, 4.0], 0.0, 0.0);
        assert!(close(a[0], 2.0, 1e-15) && close(a[1], 4.0, 1e-15));
        let b = project_disc([3.0, 4.0], 0.0, PI / 2.0);
        assert!(close(b[0], 3.0, 1e-15) && close(b[1], 5.0, 1e-15));
        let c = project_disc([1.0, 1.0], 0.5f64.ln(), PI / 4.0);
        let r2 = 2f64.sqrt();
        assert!(close(c[0], r2 - 0.5, 1e-15) && close(c[1], r2 + 0.5, 1e-15));
    }

    #[test]
    fn merge_examples() {
        let m = merge_intervals(&[[0.0, 1.0], [0.5, 2.0]]);
        assert_eq!(m.intervals, vec![[0.0, 2.0]]);
        assert_eq!(m.total_length(), 2.0);
        let d = merge_intervals(&[[3.0, 4.0], [0.0, 1.0]]);
        assert_eq!(d.intervals, vec![[0.0, 1.0], [3.0, 4.0]]);
        assert_eq!(d.total_length(), 2.0);
        assert!(d.is_canonical());
    }

    #[test]
    fn cover_cost_examples() {
        let p1 = GaugeFunction::power(1.0).unwrap();
        let (c, rho) = cover_cost(&p1, &merge_intervals(&[[0.0, 0.5], [1.0, 1.5]]));
        assert!(close(c, 1.0, 1e-15) && close(rho, 0.5, 1e-15));
        let (c, _) = cover_cost(&GaugeFunction::power(0.5).unwrap(), &merge_intervals(&[[0.0, 0.25]]));
        assert!(close(c, 0.5, 1e-15));
    }

    #[test]
    fn greedy_piece_counts() {
        assert_eq!(greedy_pieces(&[[0.0, 1.0]], 0.25).len(), 4);
        let p = greedy_pieces(&[[0.0, 0.1], [0.15, 0.2], [0.5, 0.55]], 0.25);
        assert_eq!(p.len(), 2);
        assert!(close(p[0], 0.2, 1e-15) && close(p[1], 0.05, 1e-15));
    }

    fn manual(n: u64, r1: f64, theta: f64) -> DiscHierarchy {
        let f = GaugeFunction::power(0.5).unwrap();
        let s = RadiusSchedule::from_log_radii(vec![0.0, r1.ln()]).unwrap();
        DiscHierarchy::from_parts(f, s, vec![n], Some(&[theta]), HierarchyOptions::default()).unwrap()
    }

    #[test]
    fn parent_spans() {
        let h = manual(5, 0.1, 0.3);
        let d1 = h.level(1).direction;
        let across = project_hierarchy(&h, d1 + PI / 2.0, 1).unwrap();
        assert!(close(across.parent_span, 0.2, 1e-12));
        let along = project_hierarchy(&h, d1, 1).unwrap();
        assert!(close(along.parent_span, 2.0, 1e-12));
    }

    #[test]
    fn qualifying_spans_are_short() {
        let f = GaugeFunction::power(0.5).unwrap();
        let s = derive_radius_schedule(&f, 4).unwrap();
        let b = choose_branching(&f, &s).unwrap();
        let h = build_hierarchy(&f, &s, &b, None, HierarchyOptions::default()).unwrap();
        let g = f.log_growth_partner().unwrap();
        let thetas = targeted_angles(&h, 64, 8);
        let mut seen = 0;
        for &t in &thetas {
            for k in 0..4 {
                if qualifies(&h, t, k) {
                    seen += 1;
                    let p = project_hierarchy(&h, t, k + 1).unwrap();
                    assert!(p.parent_span <= 4.0 * h.level(k + 1).rho);
                }
            }
        }
        assert!(seen >= 32);
        let table = sweep_directions(&h, &g, &thetas, 4).unwrap();
        assert_eq!(table.violations(), 0);
    }

    #[test]
    fn projected_measure_merges_collisions() {
        let atoms = [([1.0, 0.0], 0.5), ([-1.0, 0.0], 0.5)];
        let p = project_measure(&atoms, 0.0);
        assert_eq!(p, vec![(-1.0, 0.5), (1.0, 0.5)]);
        let q = project_measure(&atoms, PI / 2.0);
        assert_eq!(q.len(), 1);
        assert!(close(q[0].1, 1.0, 1e-15));
    }

    #[test]
    fn two_atom_angle_average() {
        use crate::measure::WeightedAtoms;
        use statrs::function::gamma::gamma;
        let w = WeightedAtoms::new(&[([0.0, 0.0], 0.5), ([0.3, 0.1], 0.5)]).unwrap();
        let g = GaugeFunction::power(0.5).unwrap();
        let e = averaged_projected_energy(&w, &g, &uniform_angles(4096), 64, 1).unwrap();
        let b = PI.sqrt() * gamma(0.25) / gamma(0.75);
        let exact = 0.5 * b * 0.3f64.hypot(0.1).powf(-0.5);
        assert!((e.avg - exact).abs() / exact < 0.01, "{} vs {exact}", e.avg);
    }

    #[test]
    fn log_dimension_examples() {
        let s_values: Vec<f64> = (1..=20).map(|i| i as f64 * 0.1).collect();
        let log_rho: Vec<f64> = (1..=12).map(|j| -(2f64.powi(j))).collect();
        // a single point: one interval of length ρ
        let point: Vec<(f64, Vec<f64>)> = log_rho.iter().map(|&l| (l, vec![l])).collect();
        let est = estimate_log_dimension(&CostSchedule::from_covers(&s_values, &point).unwrap()).unwrap();
        assert_eq!(est.value, 0.0);
        // synthetic trend (-log ρ)^{s0 - s}
        let s0 = 0.75;
        let synthetic = CostSchedule {
            s_values: s_values.clone(),
            log_rho: log_rho.clone(),
            log_costs: s_values.iter().map(|s| log_rho.iter().map(|l| (s0 - s) * (-l).ln()).collect()).collect(),
        };
        let est = estimate_log_dimension(&synthetic).unwrap();
        assert!((est.value - s0).abs() <= 0.1, "{}", est.value);
    }
}
