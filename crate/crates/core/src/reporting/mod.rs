//! Configuration, the end-to-end pipeline and report emission.

mod config;
pub mod svg;

use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

pub use config::{parse_config, AngleMode, Emit, RunConfig, SCHEMA_VERSION};

use crate::error::{Error, Result};
use crate::gauge::{
    check_integral_condition, check_limit_condition, doubling_exponent, ConditionVerdict, ExponentFit, GaugeFunction,
    RadiusGrid,
};
use crate::hierarchy::{
    build_hierarchy, choose_branching, derive_radius_schedule_with, validate_hierarchy, DiscHierarchy,
    HierarchyOptions, ScheduleOptions,
};
use crate::measure::{frostman_scan, mc_energy, NaturalMeasure};
use crate::projection::{averaged_projected_energy, sweep_directions, targeted_angles, uniform_angles, SweepTable};

/// Slack allowed on the averaged projected energy bound.
pub const ENERGY_SLACK: f64 = 1.05;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum StageStatus {
    Ok,
    Failed,
    Skipped,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StageRecord {
    pub stage: &'static str,
    pub status: StageStatus,
    pub detail: String,
}

/// One checked inequality.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct InequalityRow {
    pub anchor: String,
    pub check: String,
    pub level: Option<usize>,
    pub theta: Option<f64>,
    /// Positive when the inequality holds.
    pub margin: f64,
    pub pass: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerdictRow {
    pub anchor: String,
    pub name: String,
    pub status: String,
    pub value: f64,
    pub detail: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Default)]
pub struct Counts {
    pub pass: usize,
    pub fail: usize,
}

/// Bound sequence `8 a g(r_{k+1}) / f(r_k)` over the computed levels.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundTrend {
    pub bounds: Vec<f64>,
    pub strictly_decreasing: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Summary {
    pub schema_version: u32,
    pub config: RunConfig,
    pub stages: Vec<StageRecord>,
    pub inequalities: Counts,
    pub by_anchor: BTreeMap<String, Counts>,
    /// Smallest margin per anchor.
    pub min_margin: BTreeMap<String, f64>,
    pub verdicts: Vec<VerdictRow>,
    pub trend: Option<BoundTrend>,
    pub doubling_f: Option<ExponentFit>,
    pub doubling_g: Option<ExponentFit>,
}

/// Everything one pipeline run produced.
#[derive(Debug, Clone)]
pub struct Bundle {
    pub summary: Summary,
    pub rows: Vec<InequalityRow>,
    pub sweep: Option<SweepTable>,
    pub hierarchy: Option<DiscHierarchy>,
    pub shells: Vec<(String, ConditionVerdict)>,
}

impl Bundle {
    pub fn all_inequalities_pass(&self) -> bool {
        self.summary.inequalities.fail == 0
    }

    /// 0 when every inequality holds, 1 otherwise.
    pub fn exit_code(&self) -> i32 {
        if self.all_inequalities_pass() {
            0
        } else {
            1
        }
    }
}

struct Run {
    stages: Vec<StageRecord>,
    rows: Vec<InequalityRow>,
    verdicts: Vec<VerdictRow>,
    shells: Vec<(String, ConditionVerdict)>,
}

impl Run {
    fn ok(&mut self, stage: &'static str, detail: String) {
        self.stages.push(StageRecord { stage, status: StageStatus::Ok, detail });
    }

    fn fail(&mut self, stage: &'static str, e: &Error) {
        self.stages.push(StageRecord { stage, status: StageStatus::Failed, detail: e.to_string() });
    }

    fn skip(&mut self, stage: &'static str, why: &str) {
        self.stages.push(StageRecord { stage, status: StageStatus::Skipped, detail: why.to_string() });
    }

    fn verdict(&mut self, anchor: &str, name: &str, v: Result<ConditionVerdict>) {
        match v {
            Ok(v) => {
                self.verdicts.push(VerdictRow {
                    anchor: anchor.into(),
                    name: name.into(),
                    status: v.status.to_string(),
                    value: v.value,
                    detail: v.diagnostics.clone(),
                });
                self.shells.push((name.to_string(), v));
            }
            Err(e) => self.verdicts.push(VerdictRow {
                anchor: anchor.into(),
                name: name.into(),
                status: "error".into(),
                value: f64::NAN,
                detail: e.to_string(),
            }),
        }
    }
}

const LATER: [&str; 7] = ["schedule", "branching", "hierarchy", "validate", "frostman", "energy", "sweep"];

fn skip_rest(run: &mut Run, from: usize, why: &str) {
    for s in &LATER[from..] {
        run.skip(s, why);
    }
}

/// The angle grid a config asks for.
pub fn config_angles(cfg: &RunConfig, h: &DiscHierarchy) -> Vec<f64> {
    match cfg.angle_mode {
        AngleMode::Uniform => uniform_angles(cfg.angles),
        AngleMode::Targeted => targeted_angles(h, cfg.angles, cfg.angles_per_level),
    }
}

/// Runs schedule → branching → hierarchy → validation → measure scans →
/// sweeps → verdicts. Stage failures are recorded and later stages skipped.
pub fn run_pipeline(cfg: &RunConfig) -> Result<Bundle> {
    cfg.validate()?;
    let mut run = Run { stages: Vec::new(), rows: Vec::new(), verdicts: Vec::new(), shells: Vec::new() };
    let f = cfg.f.build()?;
    let g = match &cfg.g {
        Some(spec) => spec.build()?,
        None => f.log_growth_partner()?,
    };
    let grid = RadiusGrid::standard();
    let doubling_f = doubling_exponent(&f, &grid).ok();
    let doubling_g = doubling_exponent(&g, &grid).ok();
    run.verdict("Eq4", "integral_condition(f,g)", check_integral_condition(&f, &g));
    run.verdict("Eq6", "limit_condition(f,g)", check_limit_condition(&f, &g));
    run.ok("gauge", format!("f = {}, g = {}", f.label(), g.label()));

    let mut hierarchy = None;
    let mut sweep = None;
    let mut trend = None;
    let opts = ScheduleOptions { min_k1: cfg.min_k1, ..ScheduleOptions::default() };
    'stages: {
        let schedule = match derive_radius_schedule_with(&f, cfg.depth, opts) {
            Ok(s) => s,
            Err(e) => {
                run.fail("schedule", &e);
                skip_rest(&mut run, 1, "schedule stage failed");
                break 'stages;
            }
        };
        run.ok("schedule", format!("k1 = {}, depth = {}", schedule.k1, schedule.depth()));
        let branching = match choose_branching(&f, &schedule) {
            Ok(b) => b,
            Err(e) => {
                run.fail("branching", &e);
                skip_rest(&mut run, 2, "branching stage failed");
                break 'stages;
            }
        };
        run.ok("branching", format!("N = {:?}", branching.n));
        let hopts = HierarchyOptions { disc_cap: cfg.disc_cap as u128 };
        let h = match build_hierarchy(&f, &schedule, &branching, None, hopts) {
            Ok(h) => h,
            Err(e) => {
                run.fail("hierarchy", &e);
                skip_rest(&mut run, 3, "hierarchy stage failed");
                break 'stages;
            }
        };
        run.ok("hierarchy", format!("{} deepest discs", h.disc_count(h.depth())));

        let report = validate_hierarchy(&h);
        for c in &report.checks {
            run.rows.push(InequalityRow {
                anchor: c.anchor.into(),
                check: c.name.into(),
                level: Some(c.level),
                theta: None,
                margin: c.margin,
                pass: c.pass,
            });
        }
        run.ok(
            "validate",
            format!(
                "{} checks, {} failures; {}",
                report.checks.len(),
                report.failures().len(),
                report.notes.join("; ")
            ),
        );

        let measure = NaturalMeasure::new(&h, h.depth());
        match measure.as_ref().map_err(Clone::clone).and_then(|m| frostman_scan(m, &f, cfg.frostman_samples, cfg.seed))
        {
            Ok(fr) => {
                run.rows.push(InequalityRow {
                    anchor: "Eq34".into(),
                    check: "frostman_ball_mass".into(),
                    level: None,
                    theta: None,
                    margin: (fr.c_bound / fr.c_emp).ln(),
                    pass: fr.violations == 0,
                });
                run.ok(
                    "frostman",
                    format!(
                        "empirical C_emp = {:.6e}, construction C = {:.6e}, violations = {}",
                        fr.c_emp, fr.c_bound, fr.violations
                    ),
                );
            }
            Err(e) => run.fail("frostman", &e),
        }

        match &measure {
            Ok(m) => {
                let planar = mc_energy(&g, m, cfg.energy_pairs, cfg.seed.wrapping_add(1));
                let projected = averaged_projected_energy(
                    m,
                    &g,
                    &uniform_angles(cfg.angles),
                    cfg.projected_pairs,
                    cfg.seed.wrapping_add(2),
                );
                match (planar, projected) {
                    (Ok(pe), Ok(pr)) => {
                        run.verdicts.push(VerdictRow {
                            anchor: "Eq4".into(),
                            name: "energy I_g(mu)".into(),
                            status: "finite".into(),
                            value: pe.mean,
                            detail: format!("{} pairs, stderr {:.3e}", pe.pairs_used, pe.stderr),
                        });
                        run.rows.push(InequalityRow {
                            anchor: "Eq9".into(),
                            check: "averaged_projected_energy".into(),
                            level: None,
                            theta: None,
                            margin: (ENERGY_SLACK * pr.bound / pr.avg).ln(),
                            pass: pr.avg <= ENERGY_SLACK * pr.bound,
                        });
                        run.ok(
                            "energy",
                            format!(
                                "avg = {:.6e}, bound = {:.6e}, s = {}, kappa = {}",
                                pr.avg, pr.bound, pr.s, pr.kappa
                            ),
                        );
                    }
                    (Err(e), _) | (_, Err(e)) => run.fail("energy", &e),
                }
            }
            Err(_) => run.skip("energy", "measure unavailable"),
        }

        let levels = cfg.sweep_levels.unwrap_or(h.depth());
        let thetas = config_angles(cfg, &h);
        match sweep_directions(&h, &g, &thetas, levels) {
            Ok(t) => {
                for r in &t.rows {
                    run.rows.push(InequalityRow {
                        anchor: "Eq35".into(),
                        check: "projected_cover_cost".into(),
                        level: Some(r.k),
                        theta: Some(r.theta),
                        margin: r.margin,
                        pass: r.pass,
                    });
                }
                run.ok("sweep", format!("{} angles, {} qualifying rows", t.angles, t.rows.len()));
                trend = Some(bound_trend(&h, &g, levels));
                sweep = Some(t);
            }
            Err(e) => run.fail("sweep", &e),
        }
        hierarchy = Some(h);
    }

    let mut by_anchor: BTreeMap<String, Counts> = BTreeMap::new();
    let mut min_margin: BTreeMap<String, f64> = BTreeMap::new();
    let mut total = Counts::default();
    for r in &run.rows {
        let c = by_anchor.entry(r.anchor.clone()).or_default();
        if r.pass {
            c.pass += 1;
            total.pass += 1;
        } else {
            c.fail += 1;
            total.fail += 1;
        }
        let m = min_margin.entry(r.anchor.clone()).or_insert(f64::INFINITY);
        *m = m.min(r.margin);
    }
    let summary = Summary {
        schema_version: SCHEMA_VERSION,
        config: cfg.clone(),
        stages: run.stages,
        inequalities: total,
        by_anchor,
        min_margin,
        verdicts: run.verdicts,
        trend,
        doubling_f,
        doubling_g,
    };
    Ok(Bundle { summary, rows: run.rows, sweep, hierarchy, shells: run.shells })
}

/// `8 a g(r_{k+1}) / f(r_k)` for `k < levels`.
pub fn bound_trend(h: &DiscHierarchy, g: &GaugeFunction, levels: usize) -> BoundTrend {
    let f = h.gauge();
    let top = levels.min(h.depth());
    let logs: Vec<f64> = (0..top)
        .map(|k| 8f64.ln() + h.log_a() + g.log_value(h.level(k + 1).log_r) - f.log_value(h.level(k).log_r))
        .collect();
    BoundTrend {
        strictly_decreasing: logs.windows(2).all(|w| w[1] < w[0]),
        bounds: logs.iter().map(|l| l.exp()).collect(),
    }
}

fn io_err(path: &Path, e: std::io::Error) -> Error {
    Error::Io(format!("{}: {e}", path.display()))
}

fn write_file(path: &Path, data: &[u8]) -> Result<()> {
    fs::write(path, data).map_err(|e| io_err(path, e))
}

pub fn inequalities_csv(rows: &[InequalityRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["anchor", "check", "level", "theta", "margin", "pass"])?;
    for r in rows {
        w.write_record([
            r.anchor.clone(),
            r.check.clone(),
            r.level.map(|l| l.to_string()).unwrap_or_default(),
            r.theta.map(|t| t.to_string()).unwrap_or_default(),
            r.margin.to_string(),
            r.pass.to_string(),
        ])?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

/// Columns `theta,k,cost,bound,margin,anchor`.
pub fn sweep_csv(t: &SweepTable) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["theta", "k", "cost", "bound", "margin", "anchor"])?;
    for r in &t.rows {
        w.write_record([
            r.theta.to_string(),
            r.k.to_string(),
            r.cost.to_string(),
            r.bound.to_string(),
            r.margin.to_string(),
            "Eq35".to_string(),
        ])?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

pub fn verdicts_csv(rows: &[VerdictRow]) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["anchor", "name", "status", "value", "detail"])?;
    for r in rows {
        w.write_record([r.anchor.clone(), r.name.clone(), r.status.clone(), r.value.to_string(), r.detail.clone()])?;
    }
    w.into_inner().map_err(|e| Error::Io(e.to_string()))
}

pub fn to_json_bytes<T: Serialize>(v: &T) -> Result<Vec<u8>> {
    let mut out = serde_json::to_vec_pretty(v).map_err(|e| Error::Io(e.to_string()))?;
    out.push(b'\n');
    Ok(out)
}

/// Writes the bundle's files under `dir`; returns the paths written.
pub fn write_bundle(bundle: &Bundle, dir: &Path, emit: Emit) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))?;
    let mut written = Vec::new();
    let mut put = |name: &str, data: Vec<u8>| -> Result<()> {
        let p = dir.join(name);
        write_file(&p, &data)?;
        written.push(p);
        Ok(())
    };
    if emit.json {
        put("summary.json", to_json_bytes(&bundle.summary)?)?;
        put("inequalities.json", to_json_bytes(&bundle.rows)?)?;
    }
    if emit.csv {
        put("inequalities.csv", inequalities_csv(&bundle.rows)?)?;
        put("verdicts.csv", verdicts_csv(&bundle.summary.verdicts)?)?;
        if let Some(t) = &bundle.sweep {
            put("sweep.csv", sweep_csv(t)?)?;
        }
    }
    if emit.svg {
        if let Some(h) = &bundle.hierarchy {
            put("hierarchy.svg", svg::render_hierarchy(h, svg::MAX_CIRCLES).into_bytes())?;
        }
        let empty = SweepTable { rows: Vec::new(), angles: 0 };
        put("sweep.svg", svg::render_sweep(bundle.sweep.as_ref().unwrap_or(&empty)).into_bytes())?;
        put("shells.svg", svg::render_shells(&bundle.shells).into_bytes())?;
    }
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gauge::GaugeSpec;

    fn small(f: GaugeSpec) -> RunConfig {
        let mut c = RunConfig::for_gauge(f);
        c.depth = 3;
        c.angles = 64;
        c.frostman_samples = 2000;
        c.energy_pairs = 5000;
        c.projected_pairs = 2000;
        c
    }

    #[test]
    fn power_half_passes() {
        let f = GaugeFunction::power(0.5).unwrap().to_spec();
        let b = run_pipeline(&small(f)).unwrap();
        assert!(b.all_inequalities_pass(), "{:?}", b.rows.iter().filter(|r| !r.pass).collect::<Vec<_>>());
        assert!(b.summary.stages.iter().all(|s| s.status == StageStatus::Ok), "{:?}", b.summary.stages);
        assert_eq!(b.exit_code(), 0);
        assert!(b.summary.by_anchor.contains_key("Eq35"));
    }

    #[test]
    fn steep_gauge_fails_at_schedule() {
        let f = GaugeFunction::power(1.5).unwrap().to_spec();
        let b = run_pipeline(&small(f)).unwrap();
        let s = b.summary.stages.iter().find(|s| s.stage == "schedule").unwrap();
        assert_eq!(s.status, StageStatus::Failed);
        assert!(s.detail.contains("doubling"), "{}", s.detail);
        assert!(b.summary.stages.iter().filter(|s| s.status == StageStatus::Skipped).count() >= 6);
    }
}
