use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::gauge::GaugeSpec;

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AngleMode {
    /// Midpoint grid on `[0, pi)`.
    Uniform,
    /// Part of the grid placed inside each arc `[d_k, d_{k+1}]`.
    Targeted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Emit {
    pub csv: bool,
    pub json: bool,
    pub svg: bool,
}

impl Default for Emit {
    fn default() -> Self {
        Emit { csv: true, json: true, svg: false }
    }
}

impl Emit {
    /// Parses `csv,json,svg` style lists.
    pub fn parse_list(s: &str) -> Result<Self> {
        let mut e = Emit { csv: false, json: false, svg: false };
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            match part {
                "csv" => e.csv = true,
                "json" => e.json = true,
                "svg" => e.svg = true,
                other => return Err(Error::ConfigInvalid(vec![format!("emit: unknown format `{other}`")])),
            }
        }
        Ok(e)
    }
}

/// Full pipeline configuration. `f` must be given; everything else has a
/// default.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "d_schema")]
    pub schema_version: u32,
    #[serde(default)]
    pub f: GaugeSpec,
    /// Projection gauge; defaults to `g(r) = f(r log(1/r))`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub g: Option<GaugeSpec>,
    #[serde(default = "d_depth")]
    pub depth: usize,
    #[serde(default = "d_disc_cap")]
    pub disc_cap: u64,
    #[serde(default = "d_min_k1")]
    pub min_k1: usize,
    #[serde(default = "d_angles")]
    pub angles: usize,
    #[serde(default = "d_angle_mode")]
    pub angle_mode: AngleMode,
    #[serde(default = "d_per_level")]
    pub angles_per_level: usize,
    /// Deepest level `k + 1` swept; defaults to `depth`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_levels: Option<usize>,
    #[serde(default = "d_frostman")]
    pub frostman_samples: usize,
    #[serde(default = "d_pairs")]
    pub energy_pairs: u64,
    #[serde(default = "d_proj_pairs")]
    pub projected_pairs: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "d_out")]
    pub out: String,
    #[serde(default)]
    pub emit: Emit,
}

fn d_schema() -> u32 {
    SCHEMA_VERSION
}
fn d_depth() -> usize {
    4
}
fn d_disc_cap() -> u64 {
    10_000_000
}
fn d_min_k1() -> usize {
    crate::hierarchy::FIRST_INDEX
}
fn d_angles() -> usize {
    256
}
fn d_angle_mode() -> AngleMode {
    AngleMode::Targeted
}
fn d_per_level() -> usize {
    16
}
fn d_frostman() -> usize {
    10_000
}
fn d_pairs() -> u64 {
    100_000
}
fn d_proj_pairs() -> u64 {
    20_000
}
fn d_out() -> String {
    "out".into()
}

impl RunConfig {
    /// Defaults around a given `f`.
    pub fn for_gauge(f: GaugeSpec) -> Self {
        RunConfig {
            schema_version: SCHEMA_VERSION,
            f,
            g: None,
            depth: d_depth(),
            disc_cap: d_disc_cap(),
            min_k1: d_min_k1(),
            angles: d_angles(),
            angle_mode: d_angle_mode(),
            angles_per_level: d_per_level(),
            sweep_levels: None,
            frostman_samples: d_frostman(),
            energy_pairs: d_pairs(),
            projected_pairs: d_proj_pairs(),
            seed: 0,
            out: d_out(),
            emit: Emit::default(),
        }
    }

    /// Every violated constraint, in field order.
    pub fn violations(&self) -> Vec<String> {
        let mut v = Vec::new();
        if self.schema_version != SCHEMA_VERSION {
            v.push(format!("schema_version: expected {SCHEMA_VERSION}, got {}", self.schema_version));
        }
        if let Err(e) = self.f.build() {
            v.push(format!("f: {e}"));
        }
        if let Some(g) = &self.g {
            if let Err(e) = g.build() {
                v.push(format!("g: {e}"));
            }
        }
        if self.depth < 1 {
            v.push(format!("depth: must be >= 1, got {}", self.depth));
        }
        if self.disc_cap < 1 {
            v.push("disc_cap: must be >= 1".into());
        }
        if self.min_k1 < crate::hierarchy::FIRST_INDEX {
            v.push(format!("min_k1: must be >= {}, got {}", crate::hierarchy::FIRST_INDEX, self.min_k1));
        }
        if self.angles < 2 {
            v.push(format!("angles: must be >= 2, got {}", self.angles));
        }
        if self.angles_per_level < 1 {
            v.push("angles_per_level: must be >= 1".into());
        }
        if let Some(l) = self.sweep_levels {
            if l < 1 || l > self.depth {
                v.push(format!("sweep_levels: must lie in 1..={}, got {l}", self.depth));
            }
        }
        if self.frostman_samples < 1 {
            v.push("frostman_samples: must be >= 1".into());
        }
        if self.energy_pairs < 1000 {
            v.push(format!("energy_pairs: must be >= 1000, got {}", self.energy_pairs));
        }
        if self.projected_pairs < 1 {
            v.push("projected_pairs: must be >= 1".into());
        }
        if self.out.is_empty() {
            v.push("out: must not be empty".into());
        }
        v
    }

    pub fn validate(&self) -> Result<()> {
        let v = self.violations();
        if v.is_empty() {
            Ok(())
        } else {
            Err(Error::ConfigInvalid(v))
        }
    }

    /// Canonical JSON form (all defaults spelled out).
    pub fn to_canonical_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }
}

/// Parses and validates a JSON configuration.
pub fn parse_config(document: &str) -> Result<RunConfig> {
    let de = &mut serde_json::Deserializer::from_str(document);
    let cfg: RunConfig = serde_path_to_error::deserialize(de)
        .map_err(|e| Error::ConfigParse { path: e.path().to_string(), message: e.inner().to_string() })?;
    cfg.validate()?;
    Ok(cfg)
}
