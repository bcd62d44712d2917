//! Experiment configuration in TOML.
//!
//! Every field is optional; missing fields take the apparatus defaults.
//!
//! ```toml
//! analysis_frequency_hz = 2e6
//!
//! [nopo]
//! eta = 0.90
//! excess_phase_noise = 0.051
//!
//! [mz1]
//! delta_l_m = 48.0
//!
//! [sweep]
//! variable = "detuning"
//! start = 0.0
//! stop = 5e6
//! points = 101
//! spacing = "linear"
//!
//! [oracle]
//! enabled = false
//! seed = 1
//!
//! [output]
//! directory = "out"
//! format = "csv"
//! ```
//!
//! The Gaussian linewidth appears under both `[nopo]` and `[coherence]`;
//! setting either sets both, and setting both to different values is an
//! error.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::coherence::CoherenceParams;
use crate::error::{Error, Result};
use crate::interferometer::MzConfig;
use crate::nopo::NopoParams;
use crate::oracle::{OracleSettings, MIN_SAMPLES};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Spacing {
    Linear,
    Log,
    /// Logarithmic in |d| away from a linear core of half-width
    /// [`SYMLOG_CORE_HZ`], through zero.
    Symlog,
}

pub const SYMLOG_CORE_HZ: f64 = 1e6;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    #[serde(default = "default_variable")]
    pub variable: String,
    pub start: f64,
    pub stop: f64,
    pub points: usize,
    #[serde(default = "default_spacing")]
    pub spacing: Spacing,
}

fn default_variable() -> String {
    "detuning".into()
}

fn default_spacing() -> Spacing {
    Spacing::Linear
}

impl SweepConfig {
    /// 0 to 5 MHz in 101 points.
    pub fn visibility_default() -> Self {
        Self {
            variable: default_variable(),
            start: 0.0,
            stop: 5e6,
            points: 101,
            spacing: Spacing::Linear,
        }
    }

    /// −300 GHz to 1.2 THz, log-spaced on both sides of zero so that the
    /// MHz-scale coherence region and both phase-matching edges are covered.
    pub fn correlation_default() -> Self {
        Self {
            variable: default_variable(),
            start: -300e9,
            stop: 1.2e12,
            points: 241,
            spacing: Spacing::Symlog,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.variable != "detuning" {
            return Err(Error::param(
                "sweep.variable",
                format!(
                    "unsupported sweep variable `{}` (only `detuning`)",
                    self.variable
                ),
            ));
        }
        if !(self.start.is_finite() && self.stop.is_finite() && self.start < self.stop) {
            return Err(Error::param(
                "sweep.start",
                format!(
                    "bounds must be finite with start < stop (got {} .. {})",
                    self.start, self.stop
                ),
            ));
        }
        if self.points < 2 {
            return Err(Error::param(
                "sweep.points",
                format!("{} must be >= 2", self.points),
            ));
        }
        if self.spacing == Spacing::Log && self.start <= 0.0 {
            return Err(Error::param(
                "sweep.start",
                format!("log spacing needs start > 0 (got {})", self.start),
            ));
        }
        Ok(())
    }

    /// Grid points, ascending, endpoints exact.
    pub fn grid(&self) -> Vec<f64> {
        let n = self.points;
        let lerp = |a: f64, b: f64, k: usize| a + (b - a) * k as f64 / (n - 1) as f64;
        let mut g: Vec<f64> = match self.spacing {
            Spacing::Linear => (0..n).map(|k| lerp(self.start, self.stop, k)).collect(),
            Spacing::Log => {
                let (a, b) = (self.start.ln(), self.stop.ln());
                (0..n).map(|k| lerp(a, b, k).exp()).collect()
            }
            Spacing::Symlog => {
                let fwd = |d: f64| d.signum() * (d.abs() / SYMLOG_CORE_HZ).ln_1p();
                let inv = |s: f64| s.signum() * s.abs().exp_m1() * SYMLOG_CORE_HZ;
                let (a, b) = (fwd(self.start), fwd(self.stop));
                (0..n).map(|k| inv(lerp(a, b, k))).collect()
            }
        };
        g[0] = self.start;
        g[n - 1] = self.stop;
        g
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OracleConfig {
    pub enabled: bool,
    pub seed: u64,
    pub n_samples: usize,
    pub sample_rate_hz: f64,
    pub rbw_hz: f64,
    pub band_hz: f64,
}

impl Default for OracleConfig {
    fn default() -> Self {
        let s = OracleSettings::default();
        Self {
            enabled: false,
            seed: 1,
            n_samples: s.n_samples,
            sample_rate_hz: s.sample_rate_hz,
            rbw_hz: s.rbw_hz,
            band_hz: s.band_hz,
        }
    }
}

impl OracleConfig {
    pub fn settings(&self) -> OracleSettings {
        OracleSettings {
            n_samples: self.n_samples,
            sample_rate_hz: self.sample_rate_hz,
            rbw_hz: self.rbw_hz,
            band_hz: self.band_hz,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    Csv,
    /// CSV plus a whitespace-separated `.dat` file with `#` comments.
    Gnuplot,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct OutputConfig {
    pub directory: PathBuf,
    pub format: OutputFormat,
}

impl Default for OutputConfig {
    fn default() -> Self {
        Self {
            directory: PathBuf::from("out"),
            format: OutputFormat::Csv,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ExperimentConfig {
    pub analysis_frequency_hz: f64,
    pub nopo: NopoParams,
    pub mz1: MzConfig,
    pub mz2: MzConfig,
    pub coherence: CoherenceParams,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepConfig>,
    pub oracle: OracleConfig,
    pub output: OutputConfig,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        Self {
            analysis_frequency_hz: 2e6,
            nopo: NopoParams::default(),
            mz1: MzConfig::default(),
            mz2: MzConfig::default(),
            coherence: CoherenceParams::default(),
            sweep: None,
            oracle: OracleConfig::default(),
            output: OutputConfig::default(),
        }
    }
}

fn scoped<T>(section: &str, r: Result<T>) -> Result<T> {
    r.map_err(|e| match e {
        Error::InvalidParameter { name, reason } => Error::InvalidParameter {
            name: format!("{section}.{name}"),
            reason,
        },
        other => other,
    })
}

impl ExperimentConfig {
    pub fn validate(&self) -> Result<()> {
        let f = self.analysis_frequency_hz;
        if !(f.is_finite() && f > 0.0) {
            return Err(Error::param(
                "analysis_frequency_hz",
                format!("{f} must be > 0"),
            ));
        }
        scoped("nopo", self.nopo.validate())?;
        scoped("mz1", self.mz1.validate())?;
        scoped("mz2", self.mz2.validate())?;
        scoped("coherence", self.coherence.validate())?;
        if self.coherence.linewidth_hz != self.nopo.linewidth_hz {
            return Err(Error::param(
                "coherence.linewidth_hz",
                format!(
                    "{} differs from nopo.linewidth_hz = {}",
                    self.coherence.linewidth_hz, self.nopo.linewidth_hz
                ),
            ));
        }
        if let Some(s) = &self.sweep {
            s.validate()?;
        }
        let o = &self.oracle;
        if !o.n_samples.is_power_of_two() || o.n_samples < MIN_SAMPLES {
            return Err(Error::param(
                "oracle.n_samples",
                format!("{} must be a power of two >= {MIN_SAMPLES}", o.n_samples),
            ));
        }
        if !(o.sample_rate_hz > 4.0 * self.nopo.bandwidth_hz) {
            return Err(Error::param(
                "oracle.sample_rate_hz",
                format!(
                    "{} must exceed 4 × nopo.bandwidth_hz = {}",
                    o.sample_rate_hz,
                    4.0 * self.nopo.bandwidth_hz
                ),
            ));
        }
        scoped("oracle", o.settings().validate())?;
        Ok(())
    }

    /// Parse TOML text, reconcile the shared linewidth, validate.
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let mut table: toml::Table = text
            .parse()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        share_linewidth(&mut table)?;
        let cfg: ExperimentConfig = table
            .try_into()
            .map_err(|e: toml::de::Error| Error::Config(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// The resolved configuration as TOML, fields in declaration order.
    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Config(e.to_string()))
    }

    pub fn sweep_or(&self, default: SweepConfig) -> SweepConfig {
        self.sweep.clone().unwrap_or(default)
    }
}

fn share_linewidth(table: &mut toml::Table) -> Result<()> {
    const KEY: &str = "linewidth_hz";
    let get = |t: &toml::Table, s: &str| t.get(s).and_then(|v| v.get(KEY)).cloned();
    let (n, c) = (get(table, "nopo"), get(table, "coherence"));
    let value = match (n, c) {
        (Some(a), Some(b)) if a != b => {
            return Err(Error::param(
                "coherence.linewidth_hz",
                format!("{b} differs from nopo.linewidth_hz = {a}"),
            ))
        }
        (Some(v), _) | (None, Some(v)) => v,
        (None, None) => return Ok(()),
    };
    for section in ["nopo", "coherence"] {
        let entry = table
            .entry(section)
            .or_insert_with(|| toml::Value::Table(Default::default()));
        match entry {
            toml::Value::Table(t) => {
                t.insert(KEY.into(), value.clone());
            }
            _ => return Err(Error::Config(format!("`{section}` must be a table"))),
        }
    }
    Ok(())
}

pub fn load_config(path: &Path) -> Result<ExperimentConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    ExperimentConfig::from_toml_str(&text).map_err(|e| match e {
        Error::Config(msg) => Error::Config(format!("{}: {msg}", path.display())),
        other => other,
    })
}
