mod config;
mod plot;

use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{anyhow, bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};
use magsweep::bench::{self, BenchmarkResult, Cleaner, Detector, MethodCombo};
use magsweep::localize::{median, score_detections, write_detections_csv};
use magsweep::metrics::{write_table1_csv, MetricsReport};
use magsweep::scenario::{self, Scenario, SurveyRecord};
use serde::Serialize;
use serde_json::json;

use config::{Layout, RunConfig};

#[derive(Parser)]
#[command(
    name = "magsweep",
    version,
    about = "Simulate dual-magnetometer UAV surveys, cancel motor interference and locate landmines"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Args, Clone)]
struct Common {
    /// TOML run configuration; defaults apply when omitted
    #[arg(long)]
    config: Option<PathBuf>,
    /// Output directory [default: out]
    #[arg(long)]
    out: Option<PathBuf>,
    /// Scenario seed, or base seed for the benchmarks
    #[arg(long)]
    seed: Option<u64>,
    /// Worker threads; 0 uses every core
    #[arg(long)]
    workers: Option<usize>,
    /// Also write SVG plots
    #[arg(long)]
    plot: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum MethodArg {
    Waicup,
    Lowpass,
}

impl From<MethodArg> for Cleaner {
    fn from(m: MethodArg) -> Self {
        match m {
            MethodArg::Waicup => Cleaner::WaicUp,
            MethodArg::Lowpass => Cleaner::LowPass,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DetectorArg {
    Rude,
    Threshold,
}

impl From<DetectorArg> for Detector {
    fn from(d: DetectorArg) -> Self {
        match d {
            DetectorArg::Rude => Detector::Rude,
            DetectorArg::Threshold => Detector::Threshold,
        }
    }
}

#[derive(Subcommand)]
enum Command {
    /// Simulate one survey: survey.csv and scenario.json
    Simulate(Common),
    /// Remove interference from a survey: cleaned.csv
    Clean {
        #[command(flatten)]
        common: Common,
        /// Survey CSV written by `simulate`
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
    },
    /// Clean, detect and cluster: detections.csv
    Detect {
        #[command(flatten)]
        common: Common,
        #[arg(long)]
        input: Option<PathBuf>,
        #[arg(long, value_enum)]
        method: Option<MethodArg>,
        #[arg(long, value_enum)]
        detector: Option<DetectorArg>,
        /// RUDE confidence or nT limit
        #[arg(long)]
        threshold: Option<f64>,
        /// scenario.json from `simulate`, for scoring
        #[arg(long)]
        truth: Option<PathBuf>,
    },
    /// Benchmark 1: random placements, Table 1 metrics
    Bench1(Common),
    /// Benchmark 2: fixed mines over an altitude sweep
    Bench2(Common),
}

/// Resolved config plus where and how to write.
struct Run {
    cfg: RunConfig,
    out: PathBuf,
    plot: bool,
}

impl Run {
    fn new(common: &Common, edit: impl FnOnce(&mut RunConfig)) -> Result<Self> {
        let mut cfg = RunConfig::load(common.config.as_deref())?;
        if let Some(s) = common.seed {
            cfg.seed = s;
        }
        if let Some(w) = common.workers {
            cfg.workers = w;
        }
        if let Some(o) = &common.out {
            cfg.out = Some(o.clone());
        }
        edit(&mut cfg);
        cfg.validate()?;
        if cfg.workers > 0 {
            // ignore the error if a pool already exists
            let _ = rayon_global(cfg.workers);
        }
        let out = cfg.out.clone().unwrap_or_else(|| PathBuf::from("out"));
        fs::create_dir_all(&out).with_context(|| format!("creating {}", out.display()))?;
        Ok(Self { cfg, out, plot: common.plot })
    }

    fn header(&self, command: &str, seeds: &str) -> Header {
        Header {
            tool: "magsweep",
            version: env!("CARGO_PKG_VERSION"),
            command: command.to_string(),
            config_sha256: self.cfg.hash(),
            seeds: seeds.to_string(),
        }
    }

    fn write(&self, name: &str, bytes: impl AsRef<[u8]>) -> Result<PathBuf> {
        let path = self.out.join(name);
        fs::write(&path, bytes).with_context(|| format!("writing {}", path.display()))?;
        Ok(path)
    }
}

/// Sizes the pool used by RUDE outside the benchmarks, which build their own.
fn rayon_global(workers: usize) -> Result<()> {
    rayon::ThreadPoolBuilder::new().num_threads(workers).build_global().map_err(|e| anyhow!(e))
}

/// Provenance stamped on every output file.
#[derive(Serialize)]
struct Header {
    tool: &'static str,
    version: &'static str,
    command: String,
    config_sha256: String,
    seeds: String,
}

impl Header {
    fn line(&self) -> String {
        format!(
            "tool={} version={} command={} config_sha256={} seeds={}",
            self.tool, self.version, self.command, self.config_sha256, self.seeds
        )
    }

    fn csv(&self) -> String {
        format!("# {}\n", self.line())
    }
}

fn pretty_json(value: &serde_json::Value) -> Result<String> {
    Ok(serde_json::to_string_pretty(value)? + "\n")
}

/// `seeds=` token from the first comment line of an input file, if any.
fn input_seeds(text: &str) -> String {
    text.lines()
        .take_while(|l| l.starts_with('#'))
        .flat_map(|l| l.split_whitespace())
        .find_map(|t| t.strip_prefix("seeds="))
        .unwrap_or("unknown")
        .to_string()
}

fn read_survey(path: Option<&Path>) -> Result<(SurveyRecord, String)> {
    let path = path.ok_or_else(|| anyhow!("no input survey: pass --input or set `input` in the config"))?;
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let record = SurveyRecord::read_csv(text.as_bytes()).with_context(|| format!("parsing {}", path.display()))?;
    if record.len() < 2 {
        bail!("{} holds fewer than two samples", path.display());
    }
    Ok((record, input_seeds(&text)))
}

fn centred(v: &[f64]) -> Vec<f64> {
    let m = median(v).unwrap_or(0.0);
    v.iter().map(|x| x - m).collect()
}

fn cmd_simulate(run: &Run) -> Result<()> {
    let cfg = &run.cfg;
    let mut params = cfg.scenario.clone();
    if let Some(a) = cfg.simulate.altitude {
        params.altitude = a;
    }
    let s = match cfg.simulate.layout {
        Layout::Random => {
            let n = cfg.simulate.n_mines.unwrap_or_else(|| bench::draw_mine_count(cfg.seed, 3, 6));
            scenario::generate_random_scenario(cfg.seed, n, &params)?
        }
        Layout::Corner => scenario::fixed_corner_scenario(cfg.seed, params.altitude, &params)?,
    };
    let record = scenario::simulate(&s)?;
    let header = run.header("simulate", &cfg.seed.to_string());

    let mut csv = Vec::new();
    record.write_csv(&mut csv, &[header.line()])?;
    let p = run.write("survey.csv", csv)?;
    run.write("scenario.json", pretty_json(&json!({ "meta": header, "scenario": s }))?)?;
    println!("{}: {} samples, {} mines", p.display(), record.len(), s.mines.len());

    if run.plot {
        let panels = [
            ("|B1| - median (nT)", centred(&SurveyRecord::magnitude(&record.b1))),
            ("|B2| - median (nT)", centred(&SurveyRecord::magnitude(&record.b2))),
            ("|truth| - median (nT)", centred(&SurveyRecord::magnitude(&record.truth1))),
        ];
        let refs: Vec<(&str, &[f64])> = panels.iter().map(|(l, v)| (*l, v.as_slice())).collect();
        run.write(
            "survey.svg",
            plot::stacked_series(&header.line(), "Simulated survey", &record.times, "t (s)", &refs),
        )?;
    }
    Ok(())
}

fn cmd_clean(run: &Run) -> Result<()> {
    let cfg = &run.cfg;
    let (record, seeds) = read_survey(cfg.clean.input.as_deref())?;
    let method = cfg.clean.method;
    let cleaned = bench::clean_record(&record, method, &cfg.pipeline)?;
    let mag = bench::magnitude(&cleaned);
    let header = run.header("clean", &seeds);

    let mut csv = header.csv();
    csv.push_str("t,x,y,bx,by,bz,magnitude\n");
    for i in 0..record.len() {
        let p = record.positions1[i];
        csv.push_str(&format!(
            "{},{},{},{},{},{},{}\n",
            record.times[i], p.x, p.y, cleaned[0][i], cleaned[1][i], cleaned[2][i], mag[i]
        ));
    }
    let p = run.write("cleaned.csv", csv)?;
    let label = match method {
        Cleaner::WaicUp => "WAIC-UP",
        Cleaner::LowPass => "low-pass",
    };
    match bench::magnitude_rho(&cleaned, &record)? {
        Some(r) => println!("{}: {label}, rho vs truth {r:.4}", p.display()),
        None => println!("{}: {label}, rho undefined (constant truth)", p.display()),
    }

    if run.plot {
        let raw = centred(&SurveyRecord::magnitude(&record.b1));
        let clean = centred(&mag);
        let truth = centred(&SurveyRecord::magnitude(&record.truth1));
        let panels: [(&str, &[f64]); 3] = [("raw |B1| (nT)", &raw), ("cleaned (nT)", &clean), ("truth (nT)", &truth)];
        let title = format!("Raw, {label} cleaned and true field magnitude");
        run.write("clean.svg", plot::stacked_series(&header.line(), &title, &record.times, "t (s)", &panels))?;
    }
    Ok(())
}

fn load_truth(path: &Path) -> Result<Scenario> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    let mut v: serde_json::Value = serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))?;
    let s = v
        .get_mut("scenario")
        .map(serde_json::Value::take)
        .ok_or_else(|| anyhow!("{} has no `scenario` object", path.display()))?;
    let s: Scenario = serde_json::from_value(s).with_context(|| format!("parsing {}", path.display()))?;
    s.validate()?;
    Ok(s)
}

fn cmd_detect(run: &Run) -> Result<()> {
    let cfg = &run.cfg;
    let d = &cfg.detect;
    let (record, seeds) = read_survey(d.input.as_deref())?;
    let truth = d.truth.as_deref().map(load_truth).transpose()?;
    let combo = MethodCombo::new(d.method, d.detector, d.threshold())?;
    let cleaned = bench::clean_record(&record, d.method, &cfg.pipeline)?;
    let signal = bench::detection_signal(&cleaned);
    let det = bench::detect(&record, &signal, &combo, &cfg.pipeline)?;
    let header = run.header("detect", &seeds);

    let mines = truth.as_ref().map_or(&[][..], |s| &s.mines[..]);
    let scoring = truth
        .as_ref()
        .map(|_| score_detections(&det.clusters, mines, cfg.pipeline.match_radius))
        .transpose()?;
    let mut csv = header.csv().into_bytes();
    write_detections_csv(&mut csv, &det.clusters, scoring.as_ref(), mines)?;
    let p = run.write("detections.csv", csv)?;
    if let Some(c) = &det.confidence {
        let mut csv = header.csv().into_bytes();
        c.write_csv(&mut csv, record.sample_rate())?;
        run.write("confidence.csv", csv)?;
    }
    println!("{}: {combo}, {} clusters", p.display(), det.clusters.len());
    if let Some(s) = &scoring {
        let r = MetricsReport::from_parts(s.counts, &[], s.errors.clone());
        println!(
            "tp {} fp {} fn {}  precision {:.3} recall {:.3} f1 {:.3}",
            s.counts.tp, s.counts.fp, s.counts.fn_, r.precision, r.recall, r.f1
        );
    }

    if run.plot {
        let flags: Vec<f64> = match &det.confidence {
            Some(c) => c.scores.clone(),
            None => det.flags.iter().map(|f| f64::from(u8::from(*f))).collect(),
        };
        let second = if det.confidence.is_some() { "RUDE confidence" } else { "flag" };
        let panels: [(&str, &[f64]); 2] = [("detection signal (nT)", &signal), (second, &flags)];
        run.write(
            "detect.svg",
            plot::stacked_series(&header.line(), &format!("Detection, {combo}"), &record.times, "t (s)", &panels),
        )?;
    }
    Ok(())
}

fn combo_json(r: &BenchmarkResult) -> serde_json::Value {
    r.combos
        .iter()
        .map(|c| {
            let m = r.pooled(c);
            json!({ "name": c.to_string(), "combo": c, "median_error_m": m.median_error(), "metrics": m })
        })
        .collect()
}

fn write_bench_common(run: &Run, r: &BenchmarkResult, header: &Header) -> Result<()> {
    let mut csv = Vec::new();
    r.write_results_csv(&mut csv, &[header.line()])?;
    run.write("results.csv", csv)?;
    Ok(())
}

fn print_table(r: &BenchmarkResult) {
    println!(
        "{:<18} {:>5} {:>5} {:>5} {:>6} {:>6} {:>6} {:>6} {:>7} {:>8}",
        "method", "tp", "fp", "fn", "P", "R", "F1", "TS", "rho", "median"
    );
    for (name, m) in r.summary() {
        let opt = |v: Option<f64>| v.map_or("-".to_string(), |v| format!("{v:.3}"));
        println!(
            "{name:<18} {:>5} {:>5} {:>5} {:>6.3} {:>6.3} {:>6.3} {:>6.3} {:>7} {:>8}",
            m.counts.tp,
            m.counts.fp,
            m.counts.fn_,
            m.precision,
            m.recall,
            m.f1,
            m.threat_score,
            opt(m.pearson_rho),
            opt(m.median_error())
        );
    }
}

fn cmd_bench1(run: &Run) -> Result<()> {
    let b = run.cfg.benchmark1();
    let seeds = format!("{}..={}", b.base_seed, b.base_seed + b.n_sims as u64 - 1);
    let header = run.header("bench1", &seeds);
    let r = bench::run_benchmark1(&b, run.cfg.workers)?;

    write_bench_common(run, &r, &header)?;
    let mut csv = header.csv().into_bytes();
    write_table1_csv(&mut csv, &r.summary())?;
    run.write("table1.csv", csv)?;
    run.write("summary.json", pretty_json(&json!({ "meta": header, "combos": combo_json(&r) }))?)?;
    print_table(&r);

    if run.plot {
        let groups: Vec<(String, Vec<f64>)> = r.summary().into_iter().map(|(n, m)| (n, m.localization_errors)).collect();
        run.write(
            "fig4_errors.svg",
            plot::box_plot(&header.line(), "Localization error of true positives", "error (m)", &groups),
        )?;
    }
    println!("wrote {}", run.out.display());
    Ok(())
}

fn cmd_bench2(run: &Run) -> Result<()> {
    let b = run.cfg.benchmark2();
    let seeds = format!("{}..={}", b.base_seed, b.base_seed + b.sims_per_altitude as u64 - 1);
    let header = run.header("bench2", &seeds);
    let r = bench::run_benchmark2(&b, run.cfg.workers)?;

    write_bench_common(run, &r, &header)?;
    let mut csv = Vec::new();
    r.write_altitude_csv(&mut csv, &[header.line()])?;
    run.write("altitude_sweep.csv", csv)?;
    let sweep = r.altitude_sweep();
    run.write(
        "summary.json",
        pretty_json(&json!({ "meta": header, "combos": combo_json(&r), "altitude_sweep": sweep }))?,
    )?;
    print_table(&r);

    if run.plot {
        let series = |pick: fn(&MetricsReport) -> Option<f64>, combos: &[MethodCombo]| -> plot::Series {
            combos
                .iter()
                .map(|c| {
                    let name = c.to_string();
                    let pts = sweep
                        .iter()
                        .filter(|s| s.combo == name)
                        .map(|s| (s.altitude, pick(&s.report).unwrap_or(f64::NAN)))
                        .collect();
                    (name, pts)
                })
                .collect()
        };
        // ρ depends only on the cleaner
        let rho_combos: Vec<MethodCombo> = r.combos.iter().filter(|c| c.detector == Detector::Rude).copied().collect();
        let panels = [("F1", series(|m| Some(m.f1), &r.combos)), ("mean rho", series(|m| m.pearson_rho, &rho_combos))];
        run.write(
            "fig5_altitude.svg",
            plot::line_panels(&header.line(), "F1 and correlation against altitude", "altitude (m)", &panels),
        )?;
    }
    println!("wrote {}", run.out.display());
    Ok(())
}

fn dispatch(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(c) => cmd_simulate(&Run::new(&c, |_| {})?),
        Command::Clean { common, input, method } => cmd_clean(&Run::new(&common, |cfg| {
            if input.is_some() {
                cfg.clean.input = input;
            }
            if let Some(m) = method {
                cfg.clean.method = m.into();
            }
        })?),
        Command::Detect {
            common,
            input,
            method,
            detector,
            threshold,
            truth,
        } => cmd_detect(&Run::new(&common, |cfg| {
            let d = &mut cfg.detect;
            if input.is_some() {
                d.input = input;
            }
            if let Some(m) = method {
                d.method = m.into();
            }
            if let Some(x) = detector {
                d.detector = x.into();
            }
            if threshold.is_some() {
                d.threshold = threshold;
            }
            if truth.is_some() {
                d.truth = truth;
            }
        })?),
        Command::Bench1(c) => cmd_bench1(&Run::new(&c, |_| {})?),
        Command::Bench2(c) => cmd_bench2(&Run::new(&c, |_| {})?),
    }
}

fn main() -> ExitCode {
    match dispatch(Cli::parse()) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::FAILURE
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeds_come_from_the_first_comment_block() {
        assert_eq!(input_seeds("# tool=magsweep seeds=42\n# other\nt,x\n"), "42");
        assert_eq!(input_seeds("t,x\n# seeds=9\n"), "unknown");
    }

    #[test]
    fn cli_parses() {
        use clap::CommandFactory;
        Cli::command().debug_assert();
        let c = Cli::try_parse_from(["magsweep", "detect", "--input", "a.csv", "--detector", "threshold", "--threshold", "25"]).unwrap();
        assert!(matches!(c.command, Command::Detect { threshold: Some(t), .. } if t == 25.0));
    }
}
