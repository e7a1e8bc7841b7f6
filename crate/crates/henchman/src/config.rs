//! JSON experiment configs. Every record rejects unknown fields so typos
//! surface as schema errors.

use std::path::Path;

use henchman_core::region::SweepVar;
use henchman_core::subproblem::TauFamily;
use henchman_core::{Channel, Distribution, DistortionMatrix};
use serde::Deserialize;

use crate::error::CliError;

/// `{"bernoulli": p}` or an explicit probability vector.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum SourceSpec {
    Bernoulli { bernoulli: f64 },
    Probabilities(Vec<f64>),
}

impl SourceSpec {
    pub fn build(&self, field: &str) -> Result<Distribution, CliError> {
        let d = match self {
            SourceSpec::Bernoulli { bernoulli } => Distribution::bernoulli(*bernoulli),
            SourceSpec::Probabilities(p) => Distribution::new(p.clone()),
        };
        d.map_err(|e| CliError::Config(format!("{field}: {e}")))
    }
}

/// `"hamming"` (square, sized by the source) or an explicit matrix.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum DistortionSpec {
    Named(String),
    Matrix(Vec<Vec<f64>>),
}

impl DistortionSpec {
    pub fn build(&self, alphabet: usize, field: &str) -> Result<DistortionMatrix, CliError> {
        let d = match self {
            DistortionSpec::Named(name) if name == "hamming" => DistortionMatrix::hamming(alphabet),
            DistortionSpec::Named(name) => {
                return Err(CliError::Config(format!("{field}: unknown distortion {name:?}")))
            }
            DistortionSpec::Matrix(rows) => DistortionMatrix::from_rows(rows.clone()),
        };
        d.map_err(|e| CliError::Config(format!("{field}: {e}")))
    }
}

pub fn build_channel(rows: &[Vec<f64>], field: &str) -> Result<Channel, CliError> {
    Channel::from_rows(rows.to_vec()).map_err(|e| CliError::Config(format!("{field}: {e}")))
}

/// An explicit list or an inclusive `start..=stop` range.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum GridSpec {
    List(Vec<f64>),
    Range { start: f64, stop: f64, step: f64 },
}

impl GridSpec {
    pub fn values(&self, field: &str) -> Result<Vec<f64>, CliError> {
        let out = match self {
            GridSpec::List(v) => v.clone(),
            GridSpec::Range { start, stop, step } => {
                if !(*step > 0.0) || stop < start {
                    return Err(CliError::Config(format!("{field}: need step > 0 and stop >= start")));
                }
                let count = ((stop - start) / step + 1e-9).floor() as usize;
                (0..=count).map(|i| start + i as f64 * step).collect()
            }
        };
        if out.is_empty() {
            return Err(CliError::Config(format!("{field}: empty grid")));
        }
        if out.iter().any(|v| !v.is_finite()) {
            return Err(CliError::Config(format!("{field}: non-finite value")));
        }
        Ok(out)
    }
}

/// A seed count (consecutive from the base seed) or an explicit list.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(untagged)]
pub enum SeedSpec {
    Count(u64),
    List(Vec<u64>),
}

impl SeedSpec {
    pub fn seeds(&self, base: u64) -> Vec<u64> {
        match self {
            SeedSpec::Count(c) => (0..*c).map(|i| base.wrapping_add(i)).collect(),
            SeedSpec::List(v) => v.iter().map(|s| s.wrapping_add(base)).collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RegionMode {
    Lossless,
    Lossy,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SweepName {
    ListRate,
    KeyRate,
    BobDistortion,
}

impl SweepName {
    pub fn var(self) -> SweepVar {
        match self {
            SweepName::ListRate => SweepVar::ListRate,
            SweepName::KeyRate => SweepVar::KeyRate,
            SweepName::BobDistortion => SweepVar::BobDistortion,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            SweepName::ListRate => "list_rate",
            SweepName::KeyRate => "key_rate",
            SweepName::BobDistortion => "bob_distortion",
        }
    }
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub var: SweepName,
    pub grid: GridSpec,
}

fn hamming() -> DistortionSpec {
    DistortionSpec::Named("hamming".into())
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RegionConfig {
    pub mode: RegionMode,
    pub source: SourceSpec,
    #[serde(default = "hamming")]
    pub d_e: DistortionSpec,
    /// Bob's distortion measure; lossy mode only.
    #[serde(default)]
    pub d_b: Option<DistortionSpec>,
    pub rate: f64,
    #[serde(default)]
    pub key_rate: f64,
    #[serde(default)]
    pub list_rate: f64,
    #[serde(default)]
    pub bob_distortion: f64,
    pub sweep: SweepSpec,
    /// Row entries of `P_{Y|X}` are multiples of `1/channel_divisions`.
    #[serde(default)]
    pub channel_divisions: Option<u32>,
    #[serde(default = "yes")]
    pub refine: bool,
}

fn yes() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulateConfig {
    pub source: SourceSpec,
    #[serde(default = "hamming")]
    pub d_e: DistortionSpec,
    pub n: usize,
    pub rate: f64,
    pub key_rate: f64,
    pub list_rate: f64,
    #[serde(default = "default_seeds")]
    pub seeds: SeedSpec,
    #[serde(default = "default_trials")]
    pub trials: usize,
    /// Added to `D(R_L)` when counting p2p successes.
    #[serde(default = "default_margin")]
    pub margin: f64,
}

fn default_seeds() -> SeedSpec {
    SeedSpec::Count(10)
}

fn default_trials() -> usize {
    200
}

fn default_margin() -> f64 {
    0.05
}

#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum TauSpec {
    Polynomial { scale: f64, power: f64 },
    SubExpRoot { scale: f64 },
}

impl TauSpec {
    pub fn family(&self) -> TauFamily {
        match *self {
            TauSpec::Polynomial { scale, power } => TauFamily::Polynomial { scale, power },
            TauSpec::SubExpRoot { scale } => TauFamily::SubExpRoot { scale },
        }
    }
}

fn default_tau() -> TauSpec {
    TauSpec::Polynomial { scale: 1.0, power: 1.0 }
}

fn default_delta() -> f64 {
    henchman_core::subproblem::DEFAULT_DELTA
}

fn default_exhaustive() -> f64 {
    1e6
}

/// Parameters of a codebook-compression decay run.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecayConfig {
    /// Codeword distribution (`P_X`, or `P_Y` with `noise`).
    pub generator: SourceSpec,
    /// Rows of `P_{X|Y}`.
    #[serde(default)]
    pub noise: Option<Vec<Vec<f64>>>,
    #[serde(default = "hamming")]
    pub d: DistortionSpec,
    pub codebook_rate: f64,
    pub rate: f64,
    pub level: f64,
    pub n_grid: Vec<usize>,
    #[serde(default = "default_seeds")]
    pub seeds: SeedSpec,
    #[serde(default = "default_tau")]
    pub tau: TauSpec,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_exhaustive")]
    pub exhaustive_limit: f64,
}

fn default_verify_source() -> SourceSpec {
    SourceSpec::Bernoulli { bernoulli: 0.5 }
}

fn default_levels() -> Vec<f64> {
    vec![0.1, 0.2]
}

fn default_verify_n() -> Vec<usize> {
    vec![2, 4, 6]
}

fn default_chernoff_points() -> usize {
    200
}

fn default_bounded_points() -> usize {
    20
}

fn default_mc_samples() -> usize {
    20_000
}

fn default_verify_decay() -> Option<DecayConfig> {
    Some(DecayConfig {
        generator: SourceSpec::Bernoulli { bernoulli: 0.5 },
        noise: None,
        d: hamming(),
        codebook_rate: 1.0,
        rate: 0.2,
        level: 0.15,
        n_grid: vec![4, 6, 8, 10],
        seeds: SeedSpec::Count(5),
        tau: default_tau(),
        delta: default_delta(),
        exhaustive_limit: default_exhaustive(),
    })
}

/// Bound suites; every field has a default so `{}` is a valid config.
#[derive(Debug, Clone, PartialEq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_verify_source")]
    pub source: SourceSpec,
    #[serde(default = "hamming")]
    pub d: DistortionSpec,
    /// Distortion levels for the exponential-bound suite.
    #[serde(default = "default_levels")]
    pub levels: Vec<f64>,
    /// Blocklengths for the exponential-bound and soft-covering suites.
    #[serde(default = "default_verify_n")]
    pub n_grid: Vec<usize>,
    #[serde(default = "default_delta")]
    pub delta: f64,
    #[serde(default = "default_seeds")]
    pub seeds: SeedSpec,
    #[serde(default = "default_chernoff_points")]
    pub chernoff_points: usize,
    #[serde(default = "default_bounded_points")]
    pub bounded_points: usize,
    #[serde(default = "default_mc_samples")]
    pub mc_samples: usize,
    #[serde(default = "default_verify_decay")]
    pub decay: Option<DecayConfig>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("defaults")
    }
}

/// Reads and parses a config, mapping every failure to a schema error.
pub fn load<T: for<'de> Deserialize<'de>>(path: &Path) -> Result<T, CliError> {
    let text = std::fs::read_to_string(path)
        .map_err(|e| CliError::Config(format!("cannot read {}: {e}", path.display())))?;
    parse(&text)
}

pub fn parse<T: for<'de> Deserialize<'de>>(text: &str) -> Result<T, CliError> {
    serde_json::from_str(text).map_err(|e| CliError::Config(format!("schema: {e}")))
}
