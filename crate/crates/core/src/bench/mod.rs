//! Monte Carlo benchmarks over the {WAIC-UP, low-pass} × {RUDE, threshold} matrix.
//!
//! Every simulation is seeded on its own and results are gathered in
//! simulation order, so output does not depend on the worker count.

mod pipeline;

use std::io::Write;

use rand::Rng;
use rand_chacha::rand_core::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::localize::ConfusionCounts;
use crate::metrics::MetricsReport;
use crate::scenario::{fixed_corner_scenario, generate_random_scenario, simulate, Scenario, ScenarioParams};

pub use pipeline::{
    clean_record, detect, detection_signal, magnitude, magnitude_rho, run_combos, Cleaner, ComboOutcome, Detection, Detector, MethodCombo, PipelineConfig,
};

/// Benchmark 1: random placements.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Benchmark1Config {
    pub n_sims: usize,
    pub base_seed: u64,
    pub min_mines: usize,
    pub max_mines: usize,
    pub rude_threshold: f64,
    /// nT
    pub threshold_limit: f64,
    pub scenario: ScenarioParams,
    pub pipeline: PipelineConfig,
}

impl Default for Benchmark1Config {
    fn default() -> Self {
        Self {
            n_sims: 50,
            base_seed: 0,
            min_mines: 3,
            max_mines: 6,
            rude_threshold: 0.7,
            threshold_limit: 50.0,
            scenario: ScenarioParams::default(),
            pipeline: PipelineConfig::default(),
        }
    }
}

impl Benchmark1Config {
    pub fn validate(&self) -> Result<()> {
        if self.n_sims == 0 {
            return Err(invalid("n_sims", "must be at least 1"));
        }
        if self.min_mines > self.max_mines {
            return Err(invalid("min_mines", "must not exceed max_mines"));
        }
        self.scenario.validate()?;
        self.pipeline.validate()?;
        MethodCombo::matrix(self.rude_threshold, self.threshold_limit).map(|_| ())
    }
}

/// Benchmark 2: fixed corner mines over an altitude sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Benchmark2Config {
    /// m
    pub altitudes: Vec<f64>,
    pub sims_per_altitude: usize,
    pub base_seed: u64,
    pub rude_threshold: f64,
    /// nT
    pub threshold_limit: f64,
    pub scenario: ScenarioParams,
    pub pipeline: PipelineConfig,
}

impl Default for Benchmark2Config {
    fn default() -> Self {
        Self {
            altitudes: (0..=10).map(|i| 0.5 + 0.25 * f64::from(i)).collect(),
            sims_per_altitude: 5,
            base_seed: 0,
            rude_threshold: 0.7,
            threshold_limit: 25.0,
            scenario: ScenarioParams::default(),
            pipeline: PipelineConfig::default(),
        }
    }
}

impl Benchmark2Config {
    pub fn validate(&self) -> Result<()> {
        if self.altitudes.is_empty() {
            return Err(invalid("altitudes", "at least one altitude is required"));
        }
        if self.sims_per_altitude == 0 {
            return Err(invalid("sims_per_altitude", "must be at least 1"));
        }
        self.scenario.validate()?;
        self.pipeline.validate()?;
        MethodCombo::matrix(self.rude_threshold, self.threshold_limit).map(|_| ())
    }
}

/// One combo on one simulation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimRow {
    pub sim: usize,
    pub seed: u64,
    /// m
    pub altitude: f64,
    pub n_mines: usize,
    pub combo: MethodCombo,
    pub counts: ConfusionCounts,
    pub rho: Option<f64>,
    /// m, one per true positive
    pub errors: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkResult {
    pub combos: Vec<MethodCombo>,
    /// Ordered by simulation, then combo.
    pub rows: Vec<SimRow>,
}

/// Pooled metrics for one combo at one altitude.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AltitudeRow {
    pub altitude: f64,
    pub combo: String,
    pub report: MetricsReport,
}

impl BenchmarkResult {
    fn pool<'a>(rows: impl Iterator<Item = &'a SimRow>) -> MetricsReport {
        let mut counts = ConfusionCounts::default();
        let mut rhos = Vec::new();
        let mut errors = Vec::new();
        for r in rows {
            counts = counts + r.counts;
            rhos.extend(r.rho);
            errors.extend_from_slice(&r.errors);
        }
        MetricsReport::from_parts(counts, &rhos, errors)
    }

    /// Counts summed over simulations, ρ averaged per simulation.
    pub fn pooled(&self, combo: &MethodCombo) -> MetricsReport {
        Self::pool(self.rows.iter().filter(|r| r.combo == *combo))
    }

    /// Pooled report per combo, labelled, in combo order.
    pub fn summary(&self) -> Vec<(String, MetricsReport)> {
        self.combos.iter().map(|c| (c.to_string(), self.pooled(c))).collect()
    }

    /// Distinct altitudes in order of first appearance.
    pub fn altitudes(&self) -> Vec<f64> {
        let mut out: Vec<f64> = Vec::new();
        for r in &self.rows {
            if !out.contains(&r.altitude) {
                out.push(r.altitude);
            }
        }
        out
    }

    pub fn altitude_sweep(&self) -> Vec<AltitudeRow> {
        let mut out = Vec::new();
        for alt in self.altitudes() {
            for c in &self.combos {
                out.push(AltitudeRow {
                    altitude: alt,
                    combo: c.to_string(),
                    report: Self::pool(self.rows.iter().filter(|r| r.combo == *c && r.altitude == alt)),
                });
            }
        }
        out
    }

    pub fn write_results_csv<W: Write>(&self, mut out: W, comments: &[String]) -> Result<()> {
        for c in comments {
            writeln!(out, "# {c}")?;
        }
        writeln!(out, "sim,seed,altitude,n_mines,combo,tp,fp,fn,rho,errors")?;
        for r in &self.rows {
            let errors: Vec<String> = r.errors.iter().map(f64::to_string).collect();
            writeln!(
                out,
                "{},{},{},{},{},{},{},{},{},{}",
                r.sim,
                r.seed,
                r.altitude,
                r.n_mines,
                r.combo,
                r.counts.tp,
                r.counts.fp,
                r.counts.fn_,
                r.rho.map_or(String::new(), |v| v.to_string()),
                errors.join(";")
            )?;
        }
        Ok(())
    }

    pub fn write_altitude_csv<W: Write>(&self, mut out: W, comments: &[String]) -> Result<()> {
        for c in comments {
            writeln!(out, "# {c}")?;
        }
        writeln!(out, "altitude,combo,tp,fp,fn,precision,recall,f1,threat_score,pearson_rho")?;
        for row in self.altitude_sweep() {
            let r = &row.report;
            writeln!(
                out,
                "{},{},{},{},{},{:.4},{:.4},{:.4},{:.4},{}",
                row.altitude,
                row.combo,
                r.counts.tp,
                r.counts.fp,
                r.counts.fn_,
                r.precision,
                r.recall,
                r.f1,
                r.threat_score,
                r.pearson_rho.map_or(String::new(), |v| format!("{v:.4}"))
            )?;
        }
        Ok(())
    }
}

fn pool_with(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| invalid("workers", e.to_string()))
}

/// Mine count for a benchmark-1 simulation, drawn on its own stream of the seed.
pub fn draw_mine_count(seed: u64, min: usize, max: usize) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(2);
    rng.gen_range(min..=max)
}

fn run_one(sim: usize, scenario: &Scenario, combos: &[MethodCombo], cfg: &PipelineConfig) -> Result<Vec<SimRow>> {
    let record = simulate(scenario)?;
    let outcomes = run_combos(&record, &scenario.mines, combos, cfg)?;
    Ok(outcomes
        .into_iter()
        .map(|o| SimRow {
            sim,
            seed: scenario.seed,
            altitude: scenario.path.altitude,
            n_mines: scenario.mines.len(),
            combo: o.combo,
            counts: o.scoring.counts,
            rho: o.rho,
            errors: o.scoring.errors,
        })
        .collect())
}

fn run_jobs<F>(n_jobs: usize, workers: usize, combos: Vec<MethodCombo>, job: F) -> Result<BenchmarkResult>
where
    F: Fn(usize) -> (u64, Result<Vec<SimRow>>) + Sync,
{
    let per_sim: Vec<Vec<SimRow>> = pool_with(workers)?.install(|| {
        (0..n_jobs)
            .into_par_iter()
            .map(|i| {
                let (seed, res) = job(i);
                res.map_err(|e| Error::Simulation { seed, source: Box::new(e) })
            })
            .collect::<Result<_>>()
    })?;
    Ok(BenchmarkResult {
        combos,
        rows: per_sim.into_iter().flatten().collect(),
    })
}

/// `workers = 0` uses one thread per core.
pub fn run_benchmark1(cfg: &Benchmark1Config, workers: usize) -> Result<BenchmarkResult> {
    cfg.validate()?;
    let combos = MethodCombo::matrix(cfg.rude_threshold, cfg.threshold_limit)?;
    run_jobs(cfg.n_sims, workers, combos.clone(), |i| {
        let seed = cfg.base_seed + i as u64;
        let res = (|| {
            let n_mines = draw_mine_count(seed, cfg.min_mines, cfg.max_mines);
            let scenario = generate_random_scenario(seed, n_mines, &cfg.scenario)?;
            run_one(i, &scenario, &combos, &cfg.pipeline)
        })();
        (seed, res)
    })
}

/// Every altitude reuses the same seed list, so only the path height changes.
pub fn run_benchmark2(cfg: &Benchmark2Config, workers: usize) -> Result<BenchmarkResult> {
    cfg.validate()?;
    let combos = MethodCombo::matrix(cfg.rude_threshold, cfg.threshold_limit)?;
    let per_alt = cfg.sims_per_altitude;
    run_jobs(cfg.altitudes.len() * per_alt, workers, combos.clone(), |i| {
        let seed = cfg.base_seed + (i % per_alt) as u64;
        let altitude = cfg.altitudes[i / per_alt];
        let res = fixed_corner_scenario(seed, altitude, &cfg.scenario).and_then(|s| run_one(i, &s, &combos, &cfg.pipeline));
        (seed, res)
    })
}
