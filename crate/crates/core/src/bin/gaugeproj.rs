use std::fs;
use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use serde_json::json;

use gaugeproj::diophantine::{classify_series, closed_form_verdict, default_gap_s_values, gap_report, ApproxFunction};
use gaugeproj::gauge::{
    check_integral_condition, check_length_criterion, check_limit_condition, codoubling_exponent, doubling_exponent,
    GaugeFunction, GaugeSpec, RadiusGrid,
};
use gaugeproj::hierarchy::{
    build_hierarchy, choose_branching, derive_radius_schedule_with, validate_hierarchy, DiscHierarchy,
    HierarchyOptions, ScheduleOptions,
};
use gaugeproj::measure::{mc_energy, NaturalMeasure};
use gaugeproj::projection::{averaged_projected_energy, sweep_directions, uniform_angles};
use gaugeproj::reporting::{
    config_angles, parse_config, run_pipeline, svg, sweep_csv, to_json_bytes, write_bundle, Emit, RunConfig,
};
use gaugeproj::{Error, Result};

#[derive(Parser)]
#[command(name = "gaugeproj", version, about = "Gauge-function projection experiments")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Args, Clone)]
struct Common {
    /// JSON run configuration.
    #[arg(long)]
    config: Option<PathBuf>,
    #[arg(long)]
    seed: Option<u64>,
    /// Output directory.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Comma separated subset of csv,json,svg.
    #[arg(long)]
    emit: Option<String>,
    #[arg(long)]
    depth: Option<usize>,
    #[arg(long)]
    angles: Option<usize>,
    /// Gauge `f` as inline JSON, e.g. '{"family":"power","s":0.5}'.
    #[arg(long)]
    f: Option<String>,
    /// Gauge `g` as inline JSON.
    #[arg(long)]
    g: Option<String>,
}

#[derive(Subcommand)]
enum Cmd {
    /// Doubling fits and integral/limit conditions for f and g.
    GaugeCheck(Common),
    /// Build and validate the nested-disc hierarchy.
    Construct(Common),
    /// Projected cover costs over an angle grid.
    Sweep(Common),
    /// Planar and angle-averaged projected energies.
    Energy(Common),
    /// Series criterion for W_k(psi).
    Classify {
        #[command(flatten)]
        common: Common,
        /// Approximation function as JSON, e.g. '{"family":"exp_power","tau":3}'.
        #[arg(long)]
        psi: String,
        #[arg(long, default_value_t = 2)]
        k: u32,
    },
    /// Bands of the f_{delta,s} family.
    GapReport {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 2)]
        k: u32,
    },
    /// Full pipeline; exits nonzero when an inequality fails.
    Run(Common),
}

fn spec(text: &str, what: &str) -> Result<GaugeSpec> {
    let de = &mut serde_json::Deserializer::from_str(text);
    serde_path_to_error::deserialize(de)
        .map_err(|e| Error::ConfigParse { path: format!("{what}.{}", e.path()), message: e.inner().to_string() })
}

fn load(c: &Common) -> Result<RunConfig> {
    let mut cfg = match &c.config {
        Some(p) => parse_config(&fs::read_to_string(p).map_err(|e| Error::Io(format!("{}: {e}", p.display())))?)?,
        None => RunConfig::for_gauge(GaugeFunction::power(0.5)?.to_spec()),
    };
    if let Some(f) = &c.f {
        cfg.f = spec(f, "f")?;
    }
    if let Some(g) = &c.g {
        cfg.g = Some(spec(g, "g")?);
    }
    if let Some(s) = c.seed {
        cfg.seed = s;
    }
    if let Some(o) = &c.out {
        cfg.out = o.display().to_string();
    }
    if let Some(e) = &c.emit {
        cfg.emit = Emit::parse_list(e)?;
    }
    if let Some(d) = c.depth {
        cfg.depth = d;
    }
    if let Some(a) = c.angles {
        cfg.angles = a;
    }
    cfg.validate()?;
    Ok(cfg)
}

fn gauges(cfg: &RunConfig) -> Result<(GaugeFunction, GaugeFunction)> {
    let f = cfg.f.build()?;
    let g = match &cfg.g {
        Some(s) => s.build()?,
        None => f.log_growth_partner()?,
    };
    Ok((f, g))
}

fn hierarchy(cfg: &RunConfig, f: &GaugeFunction) -> Result<DiscHierarchy> {
    let opts = ScheduleOptions { min_k1: cfg.min_k1, ..ScheduleOptions::default() };
    let s = derive_radius_schedule_with(f, cfg.depth, opts)?;
    let b = choose_branching(f, &s)?;
    build_hierarchy(f, &s, &b, None, HierarchyOptions { disc_cap: cfg.disc_cap as u128 })
}

fn write(cfg: &RunConfig, name: &str, data: &[u8]) -> Result<()> {
    let dir = PathBuf::from(&cfg.out);
    fs::create_dir_all(&dir).map_err(|e| Error::Io(format!("{}: {e}", dir.display())))?;
    let p = dir.join(name);
    fs::write(&p, data).map_err(|e| Error::Io(format!("{}: {e}", p.display())))
}

fn print(v: &serde_json::Value) {
    let _ = writeln!(std::io::stdout().lock(), "{}", serde_json::to_string_pretty(v).expect("json"));
}

fn verdict_json(v: Result<gaugeproj::gauge::ConditionVerdict>) -> serde_json::Value {
    match v {
        Ok(v) => {
            json!({"status": v.status.to_string(), "value": v.value, "tail_exponent": v.tail_exponent, "diagnostics": v.diagnostics})
        }
        Err(e) => json!({"status": "error", "error": e.to_string()}),
    }
}

fn execute(cmd: Cmd) -> Result<i32> {
    match cmd {
        Cmd::GaugeCheck(c) => {
            let cfg = load(&c)?;
            let (f, g) = gauges(&cfg)?;
            let grid = RadiusGrid::standard();
            let fit = |r: Result<gaugeproj::gauge::ExponentFit>| match r {
                Ok(x) => json!(x),
                Err(e) => json!({"error": e.to_string()}),
            };
            let out = json!({
                "f": f.label(),
                "g": g.label(),
                "doubling_f": fit(doubling_exponent(&f, &grid)),
                "codoubling_f": fit(codoubling_exponent(&f, &grid)),
                "doubling_g": fit(doubling_exponent(&g, &grid)),
                "integral_condition": verdict_json(check_integral_condition(&f, &g)),
                "limit_condition": verdict_json(check_limit_condition(&f, &g)),
                "length_criterion_f": verdict_json(check_length_criterion(&f)),
            });
            if cfg.emit.json {
                write(&cfg, "gauge_check.json", &to_json_bytes(&out)?)?;
            }
            print(&out);
            Ok(0)
        }
        Cmd::Construct(c) => {
            let cfg = load(&c)?;
            let f = cfg.f.build()?;
            let h = hierarchy(&cfg, &f)?;
            let report = validate_hierarchy(&h);
            if cfg.emit.json {
                write(&cfg, "hierarchy.json", &to_json_bytes(&h.to_json(100_000))?)?;
                write(&cfg, "validation.json", &to_json_bytes(&report)?)?;
            }
            if cfg.emit.svg {
                write(&cfg, "hierarchy.svg", svg::render_hierarchy(&h, svg::MAX_CIRCLES).as_bytes())?;
            }
            print(&json!({
                "f": f.label(),
                "k1": h.schedule().k1,
                "N": h.branching(),
                "log_r": h.schedule().log_r,
                "checks": report.checks.len(),
                "failures": report.failures(),
            }));
            Ok(if report.all_pass() { 0 } else { 1 })
        }
        Cmd::Sweep(c) => {
            let cfg = load(&c)?;
            let (f, g) = gauges(&cfg)?;
            let h = hierarchy(&cfg, &f)?;
            let t = sweep_directions(&h, &g, &config_angles(&cfg, &h), cfg.sweep_levels.unwrap_or(h.depth()))?;
            if cfg.emit.csv {
                write(&cfg, "sweep.csv", &sweep_csv(&t)?)?;
            }
            if cfg.emit.json {
                write(&cfg, "sweep.json", &to_json_bytes(&t)?)?;
            }
            if cfg.emit.svg {
                write(&cfg, "sweep.svg", svg::render_sweep(&t).as_bytes())?;
            }
            print(&json!({"angles": t.angles, "rows": t.rows.len(), "violations": t.violations()}));
            Ok(if t.violations() == 0 { 0 } else { 1 })
        }
        Cmd::Energy(c) => {
            let cfg = load(&c)?;
            let (f, g) = gauges(&cfg)?;
            let h = hierarchy(&cfg, &f)?;
            let m = NaturalMeasure::new(&h, h.depth())?;
            let planar = mc_energy(&g, &m, cfg.energy_pairs, cfg.seed.wrapping_add(1))?;
            let proj = averaged_projected_energy(
                &m,
                &g,
                &uniform_angles(cfg.angles),
                cfg.projected_pairs,
                cfg.seed.wrapping_add(2),
            )?;
            let out = json!({"g": g.label(), "energy": planar, "averaged_projected": proj});
            if cfg.emit.json {
                write(&cfg, "energy.json", &to_json_bytes(&out)?)?;
            }
            print(&out);
            Ok(0)
        }
        Cmd::Classify { common, psi, k } => {
            let cfg = load(&common)?;
            let f = cfg.f.build()?;
            let de = &mut serde_json::Deserializer::from_str(&psi);
            let psi: ApproxFunction = serde_path_to_error::deserialize(de).map_err(|e| Error::ConfigParse {
                path: format!("psi.{}", e.path()),
                message: e.inner().to_string(),
            })?;
            let v = classify_series(&f, &psi, k)?;
            let closed = closed_form_verdict(&f, &psi, k).map(|s| s.to_string());
            if cfg.emit.csv {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["f", "psi", "k", "verdict", "fitted_exponent"])?;
                w.write_record([
                    v.f.clone(),
                    v.psi.clone(),
                    k.to_string(),
                    v.verdict.status.to_string(),
                    v.fitted_exponent.to_string(),
                ])?;
                write(&cfg, "classify.csv", &w.into_inner().map_err(|e| Error::Io(e.to_string()))?)?;
            }
            print(&json!({
                "f": v.f, "psi": v.psi, "k": k,
                "verdict": v.verdict.status.to_string(),
                "measure": v.measure,
                "closed_form": closed,
                "fitted_exponent": v.fitted_exponent,
                "diagnostics": v.verdict.diagnostics,
            }));
            Ok(0)
        }
        Cmd::GapReport { common, delta, k } => {
            let cfg = load(&common)?;
            let r = gap_report(delta, k, &default_gap_s_values(k))?;
            if cfg.emit.csv {
                let mut w = csv::Writer::from_writer(Vec::new());
                w.write_record(["delta", "k", "tau", "s", "band", "projected_measure", "integral", "consistent"])?;
                for row in &r.rows {
                    w.write_record([
                        delta.to_string(),
                        k.to_string(),
                        r.tau.to_string(),
                        row.s.to_string(),
                        row.description.to_string(),
                        row.projected_measure.to_string(),
                        row.integral.to_string(),
                        row.consistent.to_string(),
                    ])?;
                }
                write(&cfg, "gap_report.csv", &w.into_inner().map_err(|e| Error::Io(e.to_string()))?)?;
            }
            print(&serde_json::to_value(&r).expect("json"));
            Ok(0)
        }
        Cmd::Run(c) => {
            let cfg = load(&c)?;
            let b = run_pipeline(&cfg)?;
            write_bundle(&b, &PathBuf::from(&cfg.out), cfg.emit)?;
            print(&json!({
                "inequalities": b.summary.inequalities,
                "by_anchor": b.summary.by_anchor,
                "stages": b.summary.stages,
            }));
            Ok(b.exit_code())
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(cli.cmd) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
