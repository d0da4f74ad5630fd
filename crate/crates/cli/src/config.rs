//! Run configuration: one strict TOML file shared by every subcommand.

use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use magsweep::bench::{Benchmark1Config, Benchmark2Config, Cleaner, Detector, PipelineConfig};
use magsweep::scenario::ScenarioParams;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    /// Scenario seed for `simulate`, base seed for the benchmarks.
    pub seed: u64,
    /// 0 = one per core.
    pub workers: usize,
    pub out: Option<PathBuf>,
    pub scenario: ScenarioParams,
    pub pipeline: PipelineConfig,
    pub simulate: SimulateSection,
    pub clean: CleanSection,
    pub detect: DetectSection,
    pub bench1: Bench1Section,
    pub bench2: Bench2Section,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Layout {
    /// Benchmark-1 style random placement.
    #[default]
    Random,
    /// The four benchmark-2 corner mines.
    Corner,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulateSection {
    pub layout: Layout,
    /// Random layout only; drawn from 3..=6 when absent.
    pub n_mines: Option<usize>,
    /// m; overrides `scenario.altitude`.
    pub altitude: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CleanSection {
    pub input: Option<PathBuf>,
    pub method: Cleaner,
}

impl Default for CleanSection {
    fn default() -> Self {
        Self {
            input: None,
            method: Cleaner::WaicUp,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct DetectSection {
    pub input: Option<PathBuf>,
    pub method: Cleaner,
    pub detector: Detector,
    /// Confidence for RUDE (default 0.7), nT for thresholding (default 50).
    pub threshold: Option<f64>,
    /// Scenario JSON written by `simulate`; enables scoring.
    pub truth: Option<PathBuf>,
}

impl Default for DetectSection {
    fn default() -> Self {
        Self {
            input: None,
            method: Cleaner::WaicUp,
            detector: Detector::Rude,
            threshold: None,
            truth: None,
        }
    }
}

impl DetectSection {
    pub fn threshold(&self) -> f64 {
        self.threshold.unwrap_or(match self.detector {
            Detector::Rude => 0.7,
            Detector::Threshold => 50.0,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Bench1Section {
    pub n_sims: usize,
    pub min_mines: usize,
    pub max_mines: usize,
    pub rude_threshold: f64,
    /// nT
    pub threshold_limit: f64,
}

impl Default for Bench1Section {
    fn default() -> Self {
        let d = Benchmark1Config::default();
        Self {
            n_sims: d.n_sims,
            min_mines: d.min_mines,
            max_mines: d.max_mines,
            rude_threshold: d.rude_threshold,
            threshold_limit: d.threshold_limit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Bench2Section {
    /// m
    pub altitudes: Vec<f64>,
    pub sims_per_altitude: usize,
    pub rude_threshold: f64,
    /// nT
    pub threshold_limit: f64,
}

impl Default for Bench2Section {
    fn default() -> Self {
        let d = Benchmark2Config::default();
        Self {
            altitudes: d.altitudes,
            sims_per_altitude: d.sims_per_altitude,
            rude_threshold: d.rude_threshold,
            threshold_limit: d.threshold_limit,
        }
    }
}

impl RunConfig {
    pub fn load(path: Option<&Path>) -> Result<Self> {
        let Some(path) = path else {
            return Ok(Self::default());
        };
        let text = std::fs::read_to_string(path).with_context(|| format!("reading config {}", path.display()))?;
        Self::parse(&text).with_context(|| format!("in config {}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self> {
        let cfg: Self = toml::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        self.scenario.validate()?;
        self.pipeline.validate()?;
        if let Some(a) = self.simulate.altitude {
            if !(a > 0.0 && a.is_finite()) {
                bail!("invalid parameter `simulate.altitude`: must be positive");
            }
        }
        if self.simulate.layout == Layout::Corner && self.simulate.n_mines.is_some() {
            bail!("invalid parameter `simulate.n_mines`: the corner layout always has four mines");
        }
        if let Some(t) = self.detect.threshold {
            if !(t > 0.0 && t.is_finite()) {
                bail!("invalid parameter `detect.threshold`: must be positive");
            }
        }
        self.benchmark1().validate()?;
        self.benchmark2().validate()?;
        Ok(())
    }

    pub fn benchmark1(&self) -> Benchmark1Config {
        let b = &self.bench1;
        Benchmark1Config {
            n_sims: b.n_sims,
            base_seed: self.seed,
            min_mines: b.min_mines,
            max_mines: b.max_mines,
            rude_threshold: b.rude_threshold,
            threshold_limit: b.threshold_limit,
            scenario: self.scenario.clone(),
            pipeline: self.pipeline.clone(),
        }
    }

    pub fn benchmark2(&self) -> Benchmark2Config {
        let b = &self.bench2;
        Benchmark2Config {
            altitudes: b.altitudes.clone(),
            sims_per_altitude: b.sims_per_altitude,
            base_seed: self.seed,
            rude_threshold: b.rude_threshold,
            threshold_limit: b.threshold_limit,
            scenario: self.scenario.clone(),
            pipeline: self.pipeline.clone(),
        }
    }

    /// SHA-256 of the resolved config. Worker count and output directory do
    /// not change results, so they are left out.
    pub fn hash(&self) -> String {
        let mut c = self.clone();
        c.workers = 0;
        c.out = None;
        let text = toml::to_string(&c).expect("config serializes");
        Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
    }
}
