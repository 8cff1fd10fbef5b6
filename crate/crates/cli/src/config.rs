//! Run configuration: a TOML file with one table per concern. Command-line
//! flags override file values; the hash is taken over the resolved config.

use anyhow::{Context, Result};
use compwave::Params;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};
use std::path::Path;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ParamSection {
    pub a: f64,
    pub b: f64,
    pub d: f64,
    pub r: f64,
}

impl Default for ParamSection {
    fn default() -> Self {
        ParamSection {
            a: 0.5,
            b: 1.5,
            d: 1.0,
            r: 1.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WaveSection {
    pub tol: f64,
    /// Solve at this speed instead of searching for the minimal one.
    pub c: Option<f64>,
    pub half_length: f64,
    pub n: usize,
}

impl Default for WaveSection {
    fn default() -> Self {
        WaveSection {
            tol: 1e-3,
            c: None,
            half_length: 60.0,
            n: 6001,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
pub enum ScenarioName {
    A,
    B,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimSection {
    pub scenario: ScenarioName,
    pub t_end: f64,
    pub h: f64,
    /// Defaults to the solver's choice for the parameters.
    pub dt: Option<f64>,
    pub half_width: f64,
    pub level: f64,
    /// Keep full fields every this many unit-time snapshots.
    pub field_stride: usize,
}

impl Default for SimSection {
    fn default() -> Self {
        SimSection {
            scenario: ScenarioName::A,
            t_end: 200.0,
            h: 0.1,
            dt: None,
            half_width: 5.0,
            level: 0.5,
            field_stride: 10,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackSection {
    /// Speed-fit window as fractions of `t_end`.
    pub window: (f64, f64),
    /// Start of the logarithmic-drift window.
    pub drift_from: f64,
}

impl Default for TrackSection {
    fn default() -> Self {
        TrackSection {
            window: (0.5, 1.0),
            drift_from: 50.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct VerifySection {
    /// Decay-rate multiplier for the sub/super-solution search.
    pub mu_factor: f64,
    /// Sandwich snapshots before this time are ignored.
    pub t_min: f64,
    /// Lift of `u0` for the ordered pair of the comparison check.
    pub lift: f64,
}

impl Default for VerifySection {
    fn default() -> Self {
        VerifySection {
            mu_factor: 1.0,
            t_min: 0.0,
            lift: 0.1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum SweepKind {
    Classify,
    Wave,
    Simulate,
    Track,
    Verify,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SweepSection {
    pub a: Vec<f64>,
    pub b: Vec<f64>,
    pub d: Vec<f64>,
    pub r: Vec<f64>,
    pub kind: SweepKind,
    /// Worker threads; 0 uses all cores.
    pub jobs: usize,
}

impl Default for SweepSection {
    fn default() -> Self {
        SweepSection {
            a: vec![0.5],
            b: vec![1.5],
            d: vec![1.0],
            r: vec![1.0],
            kind: SweepKind::Wave,
            jobs: 0,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(default, deny_unknown_fields)]
pub struct Config {
    pub params: ParamSection,
    pub wave: WaveSection,
    pub sim: SimSection,
    pub track: TrackSection,
    pub verify: VerifySection,
    pub sweep: SweepSection,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("parsing {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        Ok(toml::from_str(text)?)
    }

    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Unvalidated parameter set; commands check (H1) themselves.
    pub fn params(&self) -> Result<Params> {
        let p = &self.params;
        Ok(Params::new(p.a, p.b, p.d, p.r)?)
    }

    /// SHA-256 of the canonical TOML rendering, prefixed by the command.
    pub fn hash(&self, command: &str) -> String {
        let mut h = Sha256::new();
        h.update(command.as_bytes());
        h.update([0]);
        h.update(self.to_toml().as_bytes());
        hex::encode(h.finalize())
    }
}
