use crate::Loaded;
use anaconda_core::analysis::BoundReport;
use anaconda_core::scenario::{
    AlgorithmSummary, CoverageStats, EvaluationAudit, Experiment, ExperimentResult, ScenarioConfig, TrialResult,
};
use serde::Serialize;
use sha2::{Digest, Sha256};
use std::fs;
use std::io;
use std::path::Path;
use std::time::Instant;

pub const SCHEMA_VERSION: u32 = 1;
pub const SERIES_COLUMNS: [&str; 6] = ["trial", "round", "sim_time_s", "f_value", "coverage_pct", "beta_running"];

/// sha256 of the resolved experiment in canonical JSON.
pub fn config_digest(e: &Experiment) -> String {
    let canonical = serde_json::to_vec(e).expect("experiments serialize");
    hex::encode(Sha256::digest(&canonical))
}

/// Directory name for a variant label.
fn dir_name(label: &str) -> String {
    label
        .chars()
        .map(|c| match c {
            'a'..='z' | 'A'..='Z' | '0'..='9' | '.' | '-' | '=' => c,
            _ => '_',
        })
        .collect()
}

fn write_series(path: &Path, t: &TrialResult) -> io::Result<()> {
    let mut buf = format!("#schema_version={SCHEMA_VERSION}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(SERIES_COLUMNS)?;
        for r in &t.series {
            w.write_record([
                t.trial.to_string(),
                r.round.to_string(),
                r.sim_time.to_string(),
                r.f_value.to_string(),
                r.coverage_pct.to_string(),
                r.beta_running.to_string(),
            ])?;
        }
        w.flush()?;
    }
    fs::write(path, buf)
}

fn write_curve(path: &Path, s: &AlgorithmSummary) -> io::Result<()> {
    let mut buf = format!("#schema_version={SCHEMA_VERSION}\n").into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut buf);
        w.write_record(["round", "sim_time_mean_s", "coverage_mean_pct", "coverage_std_pct", "trials"])?;
        for p in &s.curve {
            w.write_record([
                p.round.to_string(),
                p.sim_time_mean.to_string(),
                p.coverage_mean.to_string(),
                p.coverage_std.to_string(),
                p.trials.to_string(),
            ])?;
        }
        w.flush()?;
    }
    fs::write(path, buf)
}

#[derive(Serialize)]
struct TrialBrief<'a> {
    trial: u32,
    summary: Option<CoverageStats>,
    last_quarter_mean: Option<f64>,
    rounds_completed: u64,
    round_seconds: f64,
    rejections: u32,
    audit: Option<EvaluationAudit>,
    bounds: Option<&'a BoundReport>,
    final_actions: &'a [usize],
    neighborhoods: &'a [Vec<usize>],
}

#[derive(Serialize)]
struct AlgorithmOut<'a> {
    algorithm: &'static str,
    #[serde(flatten)]
    summary: &'a AlgorithmSummary,
    trial_results: Vec<TrialBrief<'a>>,
}

#[derive(Serialize)]
struct VariantOut<'a> {
    label: &'a str,
    directory: String,
    config: &'a ScenarioConfig,
    algorithms: Vec<AlgorithmOut<'a>>,
}

#[derive(Serialize)]
struct SummaryOut<'a> {
    schema_version: u32,
    name: &'a str,
    seed: u64,
    trials: u32,
    variants: Vec<VariantOut<'a>>,
}

#[derive(Serialize)]
struct Manifest<'a> {
    schema_version: u32,
    tool_version: &'static str,
    source: &'a str,
    overrides: &'a [String],
    config_digest: String,
    seed: u64,
    experiment: &'a Experiment,
    summary: &'static str,
    trial_outputs: Vec<String>,
    wall_clock_seconds: f64,
}

/// Writes every output file; returns how many.
pub fn write_all(out: &Path, loaded: &Loaded, result: &ExperimentResult, started: Instant) -> io::Result<usize> {
    fs::create_dir_all(out)?;
    let mut trial_outputs = Vec::new();
    let mut curves = 0;
    let mut variants = Vec::new();
    for v in &result.variants {
        let vdir = dir_name(&v.label);
        let mut algorithms = Vec::new();
        for a in &v.algorithms {
            let rel = format!("{vdir}/{}", a.algorithm.name());
            let dir = out.join(&rel);
            fs::create_dir_all(&dir)?;
            for t in &a.trials {
                let name = format!("{rel}/trial_{:03}.csv", t.trial);
                write_series(&out.join(&name), t)?;
                trial_outputs.push(name);
            }
            write_curve(&dir.join("curve.csv"), &a.summary)?;
            curves += 1;
            algorithms.push(AlgorithmOut {
                algorithm: a.algorithm.name(),
                summary: &a.summary,
                trial_results: a
                    .trials
                    .iter()
                    .map(|t| TrialBrief {
                        trial: t.trial,
                        summary: t.summary,
                        last_quarter_mean: t.last_quarter_mean(),
                        rounds_completed: t.rounds_completed,
                        round_seconds: t.round_seconds,
                        rejections: t.rejections,
                        audit: t.audit,
                        bounds: t.bounds.as_ref(),
                        final_actions: &t.final_actions,
                        neighborhoods: &t.neighborhoods,
                    })
                    .collect(),
            });
        }
        variants.push(VariantOut {
            label: &v.label,
            directory: vdir,
            config: &v.config,
            algorithms,
        });
    }
    let summary = SummaryOut {
        schema_version: SCHEMA_VERSION,
        name: &result.name,
        seed: result.seed,
        trials: result.trials,
        variants,
    };
    fs::write(out.join("summary.json"), to_json(&summary)?)?;
    let files = trial_outputs.len() + curves + 2;
    let manifest = Manifest {
        schema_version: SCHEMA_VERSION,
        tool_version: env!("CARGO_PKG_VERSION"),
        source: &loaded.source,
        overrides: &loaded.overrides,
        config_digest: config_digest(&loaded.experiment),
        seed: result.seed,
        experiment: &loaded.experiment,
        summary: "summary.json",
        trial_outputs,
        wall_clock_seconds: started.elapsed().as_secs_f64(),
    };
    fs::write(out.join("manifest.json"), to_json(&manifest)?)?;
    Ok(files)
}

fn to_json<T: Serialize>(v: &T) -> io::Result<Vec<u8>> {
    let mut s = serde_json::to_vec_pretty(v).map_err(io::Error::other)?;
    s.push(b'\n');
    Ok(s)
}

/// One line per variant and algorithm on stdout.
pub fn print_table(result: &ExperimentResult) {
    println!(
        "{:<36} {:<9} {:>16} {:>8} {:>10} {:>8}",
        "variant", "algorithm", "mean+-std (%)", "max (%)", "last 1/4", "rounds"
    );
    for v in &result.variants {
        for a in &v.algorithms {
            let s = &a.summary;
            let rounds = s.rounds_completed.iter().sum::<u64>() as f64 / s.rounds_completed.len().max(1) as f64;
            println!(
                "{:<36} {:<9} {:>16} {:>8.2} {:>10.2} {:>8.0}",
                v.label,
                a.algorithm.name(),
                s.curve_stats
                    .map_or("-".to_string(), |c| format!("{:.2} +- {:.2}", c.mean, c.std)),
                s.best_max,
                s.last_quarter_mean.mean,
                rounds
            );
        }
    }
}
