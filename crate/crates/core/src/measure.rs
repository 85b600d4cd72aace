//! The equal-split measure on a disc hierarchy and f-energy estimates.
//!
//! Atoms sit at the centers of the depth-`k` discs and are addressed by index
//! path. Distances between atoms are formed from the offsets below their
//! common ancestor, so they keep full relative precision at any depth.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::gauge::{doubling_exponent, GaugeFunction, RadiusGrid};
use crate::hierarchy::DiscHierarchy;

/// `log f(d)` for any `d > 0`: power gauges keep their formula above 1,
/// the other families are already constant there.
pub(crate) fn log_gauge_ext(f: &GaugeFunction, log_d: f64) -> f64 {
    match f.family() {
        crate::gauge::GaugeFamily::Power { s } => s * log_d,
        _ => f.log_value(log_d.min(0.0)),
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct NaturalMeasure {
    h: DiscHierarchy,
    depth: usize,
    mass_scale: f64,
    log_atom_mass: f64,
    reach: Vec<f64>,
}

impl NaturalMeasure {
    pub fn new(h: &DiscHierarchy, depth: usize) -> Result<Self> {
        if depth > h.depth() {
            return Err(Error::Precondition(format!("measure depth {depth} exceeds hierarchy depth {}", h.depth())));
        }
        let rho_k = h.level(depth).rho;
        // furthest an atom can sit from the center of its level-j ancestor
        let reach = (0..=depth).map(|j| (h.level(j).rho - rho_k).max(0.0)).collect();
        Ok(NaturalMeasure { h: h.clone(), depth, mass_scale: 1.0, log_atom_mass: -h.log_count(depth), reach })
    }

    /// Multiplies every atom mass by `scale` (used for negative controls).
    pub fn with_mass_scale(mut self, scale: f64) -> Self {
        self.mass_scale = scale;
        self.log_atom_mass = -self.h.log_count(self.depth) + scale.ln();
        self
    }

    pub fn hierarchy(&self) -> &DiscHierarchy {
        &self.h
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn atom_count(&self) -> u128 {
        self.h.disc_count(self.depth)
    }

    pub fn log_atom_mass(&self) -> f64 {
        self.log_atom_mass
    }

    /// `log μ(C_path)` for a disc path of length `<= depth`.
    pub fn log_disc_mass(&self, path: &[u64]) -> f64 {
        let j = path.len();
        self.log_atom_mass + self.h.log_count(self.depth) - self.h.log_count(j)
    }

    /// Total mass as a log-sum over the children of every level, root down.
    pub fn log_total_mass(&self) -> f64 {
        let mut log_mass = self.log_atom_mass;
        for j in (1..=self.depth).rev() {
            let n = self.h.level(j).n;
            let mut acc = f64::NEG_INFINITY;
            for _ in 0..n {
                acc = crate::gauge::log_add(acc, log_mass);
            }
            log_mass = acc;
        }
        log_mass
    }

    pub fn sample_path<R: Rng>(&self, rng: &mut R) -> Vec<u64> {
        (1..=self.depth).map(|j| rng.gen_range(0..self.h.level(j).n)).collect()
    }

    /// `y - x` in units of `r_0`.
    pub fn displacement(&self, x: &[u64], y: &[u64]) -> [f64; 2] {
        let p = x.iter().zip(y).take_while(|(a, b)| a == b).count();
        let mut d = [0.0, 0.0];
        for j in (p + 1..=self.depth).rev() {
            let a = self.h.child_offset(j, x[j - 1]);
            let b = self.h.child_offset(j, y[j - 1]);
            d[0] += b[0] - a[0];
            d[1] += b[1] - a[1];
        }
        d
    }

    /// Physical `log |x - y|` for two atoms; `-inf` if they coincide.
    pub fn log_distance(&self, x: &[u64], y: &[u64]) -> f64 {
        if x == y {
            return f64::NEG_INFINITY;
        }
        let d = self.displacement(x, y);
        d[0].hypot(d[1]).ln() + self.h.log_unit()
    }

    /// All atoms as `(center, mass)` in physical coordinates.
    pub fn atoms(&self, cap: u128) -> Result<Vec<([f64; 2], f64)>> {
        let unit = self.h.log_unit().exp();
        let m = self.log_atom_mass.exp();
        Ok(self.h.centers_capped(self.depth, cap)?.into_iter().map(|c| ([c[0] * unit, c[1] * unit], m)).collect())
    }

    fn full_mass_below(&self, j: usize) -> f64 {
        (self.log_atom_mass + self.h.log_count(self.depth) - self.h.log_count(j)).exp()
    }

    fn descend(&self, j: usize, rel: [f64; 2], r: f64) -> f64 {
        let d = rel[0].hypot(rel[1]);
        let reach = self.reach[j];
        if d + reach <= r {
            return self.full_mass_below(j);
        }
        if d - reach > r || j == self.depth {
            return 0.0;
        }
        let mut total = 0.0;
        for i in 0..self.h.level(j + 1).n {
            let o = self.h.child_offset(j + 1, i);
            total += self.descend(j + 1, [rel[0] + o[0], rel[1] + o[1]], r);
        }
        total
    }

    /// Mass of the closed ball of physical radius `r` about the physical point `x`.
    pub fn ball_mass(&self, x: [f64; 2], r: f64) -> f64 {
        if !(r >= 0.0) {
            return 0.0;
        }
        let unit = self.h.log_unit().exp();
        let xi = [x[0] / unit, x[1] / unit];
        self.descend(0, [-xi[0], -xi[1]], r / unit)
    }

    /// Mass of the closed ball of physical log-radius `log_r` about an atom.
    pub fn ball_mass_at_atom(&self, path: &[u64], log_r: f64) -> f64 {
        let r = (log_r - self.h.log_unit()).exp();
        // suffix[j] = position of the atom relative to its level-j ancestor
        let mut suffix = vec![[0.0f64, 0.0f64]; self.depth + 1];
        for j in (0..self.depth).rev() {
            let o = self.h.child_offset(j + 1, path[j]);
            suffix[j] = [suffix[j + 1][0] + o[0], suffix[j + 1][1] + o[1]];
        }
        let mut total = 0.0;
        for j in 0..=self.depth {
            // the ancestor at level j, excluding the part inside level j+1
            let rel = [-suffix[j][0], -suffix[j][1]];
            if j == self.depth {
                total += self.descend(j, rel, r);
                break;
            }
            let d = rel[0].hypot(rel[1]);
            if d + self.reach[j] <= r {
                return total + self.full_mass_below(j);
            }
            if d - self.reach[j] > r {
                // cannot happen for j = 0 as the atom lies inside every ancestor
                break;
            }
            let own = path[j];
            let o_own = self.h.child_offset(j + 1, own);
            for i in 0..self.h.level(j + 1).n {
                if i == own {
                    continue;
                }
                let o = self.h.child_offset(j + 1, i);
                let child = [o[0] - o_own[0] - suffix[j + 1][0], o[1] - o_own[1] - suffix[j + 1][1]];
                total += self.descend(j + 1, child, r);
            }
        }
        total
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FrostmanReport {
    /// Largest sampled `μ(B(x,r)) / f(r)`.
    pub c_emp: f64,
    /// `max{8/(a κ), 1/a}`.
    pub c_bound: f64,
    pub kappa: f64,
    pub violations: usize,
    pub samples: usize,
}

const BATCH: usize = 4096;

fn batch_rng(seed: u64, batch: usize) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(batch as u64);
    rng
}

/// Samples atoms `x` and radii with `log r` uniform on `[log r_depth, log r_0]`
/// and compares ball masses against `C f(r)`.
pub fn frostman_scan(m: &NaturalMeasure, f: &GaugeFunction, samples: usize, seed: u64) -> Result<FrostmanReport> {
    let kappa = doubling_exponent(f, &RadiusGrid::standard())?.kappa;
    let h = m.hierarchy();
    let log_a = h.log_a();
    let log_bound = (8f64.ln() - log_a - kappa.ln()).max(-log_a);
    let lo = h.level(m.depth()).log_r;
    let hi = h.log_unit();
    let batches = samples.div_ceil(BATCH);
    let results: Vec<(f64, usize)> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = batch_rng(seed, b);
            let count = BATCH.min(samples - b * BATCH);
            let mut worst = f64::NEG_INFINITY;
            let mut bad = 0;
            for _ in 0..count {
                let path = m.sample_path(&mut rng);
                let log_r = lo + (hi - lo) * rng.gen::<f64>();
                let mass = m.ball_mass_at_atom(&path, log_r);
                let ratio = mass.ln() - f.log_value(log_r);
                worst = worst.max(ratio);
                if ratio > log_bound + 1e-12 {
                    bad += 1;
                }
            }
            (worst, bad)
        })
        .collect();
    let worst = results.iter().map(|r| r.0).fold(f64::NEG_INFINITY, f64::max);
    Ok(FrostmanReport {
        c_emp: worst.exp(),
        c_bound: log_bound.exp(),
        kappa,
        violations: results.iter().map(|r| r.1).sum(),
        samples,
    })
}

/// Off-diagonal discrete energy `Σ_{i≠j} m_i m_j / f(|x_i - x_j|)`; pairs at
/// identical locations are skipped.
pub fn discrete_energy(f: &GaugeFunction, atoms: &[([f64; 2], f64)]) -> Result<f64> {
    let mut total = 0.0;
    let mut any = false;
    for (i, (x, mx)) in atoms.iter().enumerate() {
        let mut row = 0.0;
        for (y, my) in &atoms[i + 1..] {
            let d = (x[0] - y[0]).hypot(x[1] - y[1]);
            if d == 0.0 {
                continue;
            }
            any = true;
            row += my * (-log_gauge_ext(f, d.ln())).exp();
        }
        total += 2.0 * mx * row;
    }
    if !any {
        return Err(Error::Precondition("energy needs at least two distinct atom locations".into()));
    }
    Ok(total)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyEstimate {
    pub mean: f64,
    pub stderr: f64,
    pub pairs_used: u64,
    pub collisions_rejected: u64,
}

/// A measure that can be sampled atom by atom.
pub trait AtomSampler: Sync {
    type Atom: Send;
    fn sample<R: Rng>(&self, rng: &mut R) -> Self::Atom;
    /// Physical `log` distance; `-inf` for coincident atoms.
    fn log_distance(&self, a: &Self::Atom, b: &Self::Atom) -> f64;
    fn log_distance_to(&self, x: [f64; 2], a: &Self::Atom) -> f64;
    /// `(log |b - a|, (b - a)/|b - a|)`; `None` for coincident atoms.
    fn unit_displacement(&self, a: &Self::Atom, b: &Self::Atom) -> Option<(f64, [f64; 2])>;
    /// `Σ μ({p})^2` over locations `p`: the chance that two samples coincide.
    fn coincidence_mass(&self) -> f64;
    /// `μ({x})`.
    fn point_mass(&self, x: [f64; 2]) -> f64;
}

impl AtomSampler for NaturalMeasure {
    type Atom = Vec<u64>;

    fn sample<R: Rng>(&self, rng: &mut R) -> Vec<u64> {
        self.sample_path(rng)
    }

    fn log_distance(&self, a: &Vec<u64>, b: &Vec<u64>) -> f64 {
        NaturalMeasure::log_distance(self, a, b)
    }

    fn log_distance_to(&self, x: [f64; 2], a: &Vec<u64>) -> f64 {
        let unit = self.h.log_unit().exp();
        let c = self.h.center_of(a);
        let d = (c[0] - x[0] / unit).hypot(c[1] - x[1] / unit);
        if d == 0.0 {
            f64::NEG_INFINITY
        } else {
            d.ln() + self.h.log_unit()
        }
    }

    fn unit_displacement(&self, a: &Vec<u64>, b: &Vec<u64>) -> Option<(f64, [f64; 2])> {
        if a == b {
            return None;
        }
        unit_of(self.displacement(a, b), self.h.log_unit())
    }

    fn coincidence_mass(&self) -> f64 {
        (2.0 * self.log_atom_mass + self.h.log_count(self.depth)).exp()
    }

    fn point_mass(&self, x: [f64; 2]) -> f64 {
        self.ball_mass(x, 0.0)
    }
}

fn unit_of(d: [f64; 2], log_unit: f64) -> Option<(f64, [f64; 2])> {
    let len = d[0].hypot(d[1]);
    if len == 0.0 {
        None
    } else {
        Some((len.ln() + log_unit, [d[0] / len, d[1] / len]))
    }
}

/// An explicit weighted point list sampled by mass.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedAtoms {
    points: Vec<[f64; 2]>,
    cumulative: Vec<f64>,
    coincidence: f64,
}

impl WeightedAtoms {
    pub fn new(atoms: &[([f64; 2], f64)]) -> Result<Self> {
        if atoms.is_empty() || atoms.iter().any(|(p, m)| !(*m >= 0.0) || !p[0].is_finite() || !p[1].is_finite()) {
            return Err(Error::Precondition("atoms need finite positions and non-negative masses".into()));
        }
        let total: f64 = atoms.iter().map(|a| a.1).sum();
        if !(total > 0.0) {
            return Err(Error::Precondition("total atom mass must be positive".into()));
        }
        let mut acc = 0.0;
        let mut cumulative = Vec::with_capacity(atoms.len());
        for a in atoms {
            acc += a.1 / total;
            cumulative.push(acc);
        }
        let mut sorted: Vec<([f64; 2], f64)> = atoms.iter().map(|(p, m)| (*p, m / total)).collect();
        sorted.sort_by(|a, b| a.0[0].total_cmp(&b.0[0]).then(a.0[1].total_cmp(&b.0[1])));
        let mut coincidence = 0.0;
        let mut i = 0;
        while i < sorted.len() {
            let mut group = sorted[i].1;
            let mut j = i + 1;
            while j < sorted.len() && sorted[j].0 == sorted[i].0 {
                group += sorted[j].1;
                j += 1;
            }
            coincidence += group * group;
            i = j;
        }
        Ok(WeightedAtoms { points: atoms.iter().map(|a| a.0).collect(), cumulative, coincidence })
    }
}

impl AtomSampler for WeightedAtoms {
    type Atom = usize;

    fn sample<R: Rng>(&self, rng: &mut R) -> usize {
        let u: f64 = rng.gen();
        self.cumulative.partition_point(|&c| c <= u).min(self.points.len() - 1)
    }

    fn log_distance(&self, a: &usize, b: &usize) -> f64 {
        let (p, q) = (self.points[*a], self.points[*b]);
        let d = (p[0] - q[0]).hypot(p[1] - q[1]);
        if d == 0.0 {
            f64::NEG_INFINITY
        } else {
            d.ln()
        }
    }

    fn log_distance_to(&self, x: [f64; 2], a: &usize) -> f64 {
        let p = self.points[*a];
        let d = (p[0] - x[0]).hypot(p[1] - x[1]);
        if d == 0.0 {
            f64::NEG_INFINITY
        } else {
            d.ln()
        }
    }

    fn unit_displacement(&self, a: &usize, b: &usize) -> Option<(f64, [f64; 2])> {
        let (p, q) = (self.points[*a], self.points[*b]);
        unit_of([q[0] - p[0], q[1] - p[1]], 0.0)
    }

    fn coincidence_mass(&self) -> f64 {
        self.coincidence
    }

    fn point_mass(&self, x: [f64; 2]) -> f64 {
        let mut prev = 0.0;
        let mut m = 0.0;
        for (p, c) in self.points.iter().zip(&self.cumulative) {
            if *p == x {
                m += c - prev;
            }
            prev = *c;
        }
        m
    }
}

/// Mean and sample variance accumulators merged in batch order.
#[derive(Default, Clone, Copy)]
struct Moments {
    n: u64,
    sum: f64,
    sum_sq: f64,
    rejected: u64,
}

const MAX_REJECTIONS_PER_DRAW: u32 = 10_000;

fn run_batches<F>(samples: u64, seed: u64, draw: F) -> Result<Moments>
where
    F: Fn(&mut ChaCha8Rng) -> (Option<f64>, u64) + Sync,
{
    let batches = samples.div_ceil(BATCH as u64) as usize;
    let parts: Vec<Result<Moments>> = (0..batches)
        .into_par_iter()
        .map(|b| {
            let mut rng = batch_rng(seed, b);
            let count = (BATCH as u64).min(samples - (b * BATCH) as u64);
            let mut m = Moments::default();
            for _ in 0..count {
                let (v, rej) = draw(&mut rng);
                m.rejected += rej;
                let v = v.ok_or_else(|| Error::MonteCarlo("could not draw a non-coincident pair".into()))?;
                m.n += 1;
                m.sum += v;
                m.sum_sq += v * v;
            }
            Ok(m)
        })
        .collect();
    let mut total = Moments::default();
    for p in parts {
        let p = p?;
        total.n += p.n;
        total.sum += p.sum;
        total.sum_sq += p.sum_sq;
        total.rejected += p.rejected;
    }
    Ok(total)
}

fn estimate(m: Moments, scale: f64) -> EnergyEstimate {
    let n = m.n as f64;
    let mean = m.sum / n;
    let var = ((m.sum_sq / n - mean * mean) * n / (n - 1.0).max(1.0)).max(0.0);
    EnergyEstimate {
        mean: scale * mean,
        stderr: scale * (var / n).sqrt(),
        pairs_used: m.n,
        collisions_rejected: m.rejected,
    }
}

/// Monte Carlo off-diagonal f-energy: mass-proportional pairs, coincident
/// pairs redrawn, rescaled by the probability `1 - Σ μ({p})^2` of a distinct pair.
pub fn mc_energy<M: AtomSampler>(f: &GaugeFunction, m: &M, pairs: u64, seed: u64) -> Result<EnergyEstimate> {
    if pairs < 1000 {
        return Err(Error::Precondition(format!("mc_energy needs at least 1000 pairs, got {pairs}")));
    }
    let q = m.coincidence_mass();
    if q > 0.5 {
        return Err(Error::MonteCarlo(format!(
            "coincident pairs have probability {q:.3} > 0.5; the measure is too atomic at this depth"
        )));
    }
    let moments = run_batches(pairs, seed, |rng| {
        let mut rejected = 0;
        for _ in 0..MAX_REJECTIONS_PER_DRAW {
            let a = m.sample(rng);
            let b = m.sample(rng);
            let ld = m.log_distance(&a, &b);
            if ld == f64::NEG_INFINITY {
                rejected += 1;
                continue;
            }
            return (Some((-log_gauge_ext(f, ld)).exp()), rejected);
        }
        (None, rejected)
    })?;
    Ok(estimate(moments, 1.0 - q))
}

/// Monte Carlo `φ_f(x) = ∫ dμ(y) / f(|x - y|)` over atoms away from `x`.
pub fn potential<M: AtomSampler>(
    f: &GaugeFunction,
    m: &M,
    x: [f64; 2],
    pairs: u64,
    seed: u64,
) -> Result<EnergyEstimate> {
    let px = m.point_mass(x);
    if px > 0.5 {
        return Err(Error::MonteCarlo(format!("point mass {px:.3} at x exceeds 0.5")));
    }
    if pairs == 0 {
        return Err(Error::Precondition("potential needs at least one sample".into()));
    }
    let moments = run_batches(pairs, seed, |rng| {
        let mut rejected = 0;
        for _ in 0..MAX_REJECTIONS_PER_DRAW {
            let a = m.sample(rng);
            let ld = m.log_distance_to(x, &a);
            if ld == f64::NEG_INFINITY {
                rejected += 1;
                continue;
            }
            return (Some((-log_gauge_ext(f, ld)).exp()), rejected);
        }
        (None, rejected)
    })?;
    Ok(estimate(moments, 1.0 - px))
}

/// Potential at an atom of a natural measure, with exact relative distances.
pub fn potential_at_atom(
    f: &GaugeFunction,
    m: &NaturalMeasure,
    path: &[u64],
    pairs: u64,
    seed: u64,
) -> Result<EnergyEstimate> {
    let px = m.log_atom_mass().exp();
    if px > 0.5 {
        return Err(Error::MonteCarlo(format!("atom mass {px:.3} exceeds 0.5")));
    }
    let moments = run_batches(pairs, seed, |rng| {
        let mut rejected = 0;
        for _ in 0..MAX_REJECTIONS_PER_DRAW {
            let a = m.sample_path(rng);
            let ld = m.log_distance(path, &a);
            if ld == f64::NEG_INFINITY {
                rejected += 1;
                continue;
            }
            return (Some((-log_gauge_ext(f, ld)).exp()), rejected);
        }
        (None, rejected)
    })?;
    Ok(estimate(moments, 1.0 - px))
}

/// `1 / I_f(μ)`, a lower bound for the f-capacity of the support.
pub fn capacity_lower_bound<M: AtomSampler>(f: &GaugeFunction, m: &M, pairs: u64, seed: u64) -> Result<f64> {
    Ok(1.0 / mc_energy(f, m, pairs, seed)?.mean)
}
