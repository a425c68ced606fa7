use super::build::{build_instance, Instance};
use super::config::{Algorithm, Experiment, ScenarioConfig};
use crate::analysis::{evaluate_window_bounds, optimum_feasible, BoundReport, BoundScope};
use crate::benchmarks::{dfs_sg_run, nearest_neighbors, CommGraph, DfsBsg, SgTiming};
use crate::coordination::{AgentSetup, Anaconda, NeighborPolicy, RoundRecord};
use crate::error::{Error, Result};
use crate::objective::Objective;
use crate::rng::stream;
use crate::timing::{anaconda_round_time_heterogeneous, budget_to_rounds};
use rand::seq::SliceRandom;
use serde::Serialize;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SeriesRow {
    pub round: u64,
    pub sim_time: f64,
    pub f_value: f64,
    pub coverage_pct: f64,
    /// `sum_t sum_i f(a_i | N_i) / sum_t f(A_t)` over rounds so far.
    pub beta_running: f64,
}

/// Whole-series statistics of a coverage curve. Indices are round numbers;
/// ties go to the earliest round.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CoverageStats {
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub argmin: u64,
    pub max: f64,
    pub argmax: u64,
}

impl CoverageStats {
    /// `None` for an empty series. Population standard deviation.
    pub fn from_values(values: &[f64]) -> Option<Self> {
        if values.is_empty() {
            return None;
        }
        let ms = MeanStd::of(values);
        let (mut argmin, mut argmax) = (0, 0);
        for (k, &v) in values.iter().enumerate() {
            if v < values[argmin] {
                argmin = k;
            }
            if v > values[argmax] {
                argmax = k;
            }
        }
        Some(CoverageStats {
            mean: ms.mean,
            std: ms.std,
            min: values[argmin],
            argmin: argmin as u64,
            max: values[argmax],
            argmax: argmax as u64,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct MeanStd {
    pub mean: f64,
    pub std: f64,
}

impl MeanStd {
    /// Zeros for an empty slice.
    pub fn of(values: &[f64]) -> Self {
        if values.is_empty() {
            return MeanStd::default();
        }
        let n = values.len() as f64;
        // shifted by the first value so a constant series has exactly zero spread
        let k = values[0];
        let mean = k + values.iter().map(|v| v - k).sum::<f64>() / n;
        let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
        MeanStd { mean, std: var.sqrt() }
    }
}

/// Oracle calls made against those charged to the clock.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct EvaluationAudit {
    pub agent_rounds: u64,
    pub actual: u64,
    pub charged: u64,
    /// Agent-rounds whose actual count differs from the charged count.
    pub mismatches: u64,
}

impl EvaluationAudit {
    pub fn exact(&self) -> bool {
        self.mismatches == 0
    }

    fn add_record(&mut self, r: &RoundRecord, active: &[bool]) {
        for (i, (&a, &c)) in r.evaluations.iter().zip(&r.charged_evaluations).enumerate() {
            if !active[i] {
                continue;
            }
            self.agent_rounds += 1;
            self.actual += a as u64;
            self.charged += c as u64;
            self.mismatches += (a != c) as u64;
        }
    }

    fn merge(&mut self, other: &EvaluationAudit) {
        self.agent_rounds += other.agent_rounds;
        self.actual += other.actual;
        self.charged += other.charged;
        self.mismatches += other.mismatches;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TrialResult {
    pub algorithm: Algorithm,
    pub trial: u32,
    pub series: Vec<SeriesRow>,
    pub summary: Option<CoverageStats>,
    /// Listened-to agents per agent in the final round.
    pub neighborhoods: Vec<Vec<usize>>,
    pub final_actions: Vec<usize>,
    pub positions: Vec<[f64; 2]>,
    pub rounds_completed: u64,
    pub round_seconds: f64,
    pub rejections: u32,
    /// Absent for DFS-SG, which has no per-round accounting.
    pub audit: Option<EvaluationAudit>,
    pub bounds: Option<BoundReport>,
    #[serde(skip)]
    pub records: Option<Vec<RoundRecord>>,
}

impl TrialResult {
    pub fn coverage(&self) -> Vec<f64> {
        self.series.iter().map(|r| r.coverage_pct).collect()
    }

    /// Mean coverage over the last quarter of the rounds.
    pub fn last_quarter_mean(&self) -> Option<f64> {
        let c = self.coverage();
        let w = crate::analysis::last_quarter(&c);
        (!w.is_empty()).then(|| w.iter().sum::<f64>() / w.len() as f64)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrialOptions {
    /// Evaluate bound reports for the simultaneous algorithms.
    pub bounds: bool,
    /// Keep every RoundRecord in the result.
    pub keep_records: bool,
    /// Visit agents in a fresh random order every round, drawn from this seed.
    pub shuffle_seed: Option<u64>,
}

struct Tracker {
    interest_area: f64,
    series: Vec<SeriesRow>,
    marginal_sum: f64,
    f_sum: f64,
    audit: EvaluationAudit,
    window_start: u64,
    window: Vec<RoundRecord>,
    records: Option<Vec<RoundRecord>>,
}

impl Tracker {
    fn new(inst: &Instance, horizon: u64, options: &TrialOptions) -> Self {
        Tracker {
            interest_area: inst.interest_area(),
            series: Vec::with_capacity(horizon as usize),
            marginal_sum: 0.0,
            f_sum: 0.0,
            audit: EvaluationAudit::default(),
            window_start: horizon * 3 / 4,
            window: Vec::new(),
            records: options.keep_records.then(Vec::new),
        }
    }

    fn push(&mut self, r: RoundRecord, active: &[bool], want_window: bool) {
        self.marginal_sum += r.marginals.iter().sum::<f64>();
        self.f_sum += r.f_value;
        self.audit.add_record(&r, active);
        self.series.push(SeriesRow {
            round: r.round,
            sim_time: r.sim_time,
            f_value: r.f_value,
            coverage_pct: 100.0 * r.f_value / self.interest_area,
            beta_running: if self.f_sum > 0.0 { self.marginal_sum / self.f_sum } else { 0.0 },
        });
        if want_window && r.round >= self.window_start {
            self.window.push(r.clone());
        }
        if let Some(all) = &mut self.records {
            all.push(r);
        }
    }
}

fn horizon_for(config: &ScenarioConfig, per_round: f64) -> Result<u64> {
    match (config.horizon.rounds, config.horizon.budget_seconds) {
        (Some(t), _) => Ok(t),
        (None, Some(b)) => budget_to_rounds(b, per_round),
        (None, None) => Err(Error::config("horizon", "set exactly one of rounds and budget_seconds")),
    }
}

fn bounds_for(inst: &Instance, window: &[RoundRecord]) -> Result<Option<BoundReport>> {
    if window.is_empty() {
        return Ok(None);
    }
    let windows = [window];
    let run = |exhaustive| {
        evaluate_window_bounds(&inst.objective, &windows, &inst.coordination, &inst.alphas, BoundScope { exhaustive })
    };
    let report = if optimum_feasible(&inst.objective) {
        match run(true) {
            Err(Error::Capacity { .. }) => run(false)?,
            other => other?,
        }
    } else {
        run(false)?
    };
    Ok(Some(report))
}

/// One trial of one algorithm. Deterministic in `(config, algorithm, trial)`.
pub fn run_trial(config: &ScenarioConfig, algorithm: Algorithm, trial: u32, options: &TrialOptions) -> Result<TrialResult> {
    let inst = build_instance(config, trial)?;
    let delays = config.delay_model()?;
    let obj = &inst.objective;
    let n = obj.agent_count();
    let positions = inst.positions();

    let base = TrialResult {
        algorithm,
        trial,
        series: Vec::new(),
        summary: None,
        neighborhoods: vec![Vec::new(); n],
        final_actions: Vec::new(),
        positions: positions.clone(),
        rounds_completed: 0,
        round_seconds: 0.0,
        rejections: inst.rejections,
        audit: None,
        bounds: None,
        records: None,
    };

    match algorithm {
        Algorithm::Anaconda | Algorithm::Nearest | Algorithm::Random => {
            let setups: Vec<AgentSetup> = (0..n)
                .map(|i| AgentSetup {
                    action_count: obj.action_count(i),
                    coordination: inst.coordination[i].clone(),
                    alpha: inst.alphas[i],
                    policy: match algorithm {
                        Algorithm::Anaconda => NeighborPolicy::Learned,
                        Algorithm::Nearest => NeighborPolicy::Fixed(nearest_neighbors(
                            &positions,
                            i,
                            &inst.coordination[i],
                            inst.alphas[i],
                        )),
                        _ => NeighborPolicy::Random,
                    },
                })
                .collect();
            let per_round = anaconda_round_time_heterogeneous(&inst.alphas, delays);
            let horizon = horizon_for(config, per_round)?;
            let mut team = Anaconda::new(obj, &setups, horizon.max(1), delays, config.seed, trial as u64)?;
            let mut tracker = Tracker::new(&inst, horizon, options);
            let mut shuffler = options.shuffle_seed.map(|s| stream(s, &[trial as u64]));
            let mut order: Vec<usize> = (0..n).collect();
            let mut last = None;
            for t in 0..horizon {
                for e in config.events.iter().filter(|e| e.round == t) {
                    team.set_active(e.agent, e.active)?;
                }
                let record = match &mut shuffler {
                    Some(rng) => {
                        order.shuffle(rng);
                        team.step_in_order(obj, &order)?
                    }
                    None => team.step(obj)?,
                };
                record.check_constraints(&inst.alphas, &inst.coordination)?;
                let active: Vec<bool> = team.agents().iter().map(|a| a.is_active()).collect();
                last = Some((record.neighborhoods.clone(), record.actions.clone()));
                tracker.push(record, &active, options.bounds);
            }
            let bounds = if options.bounds { bounds_for(&inst, &tracker.window)? } else { None };
            let (neighborhoods, final_actions) = match last {
                Some((nb, a)) => (nb, (0..n).filter_map(|i| a.action_of(i)).collect()),
                None => (base.neighborhoods.clone(), Vec::new()),
            };
            Ok(TrialResult {
                summary: CoverageStats::from_values(&tracker.series.iter().map(|r| r.coverage_pct).collect::<Vec<_>>()),
                series: tracker.series,
                neighborhoods,
                final_actions,
                rounds_completed: horizon,
                round_seconds: per_round,
                audit: Some(tracker.audit),
                bounds,
                records: tracker.records,
                ..base
            })
        }
        Algorithm::DfsSg => {
            let graph = CommGraph::from_coordination(&inst.coordination)?;
            let out = dfs_sg_run(
                obj,
                &graph,
                SgTiming {
                    delays,
                    count_computation: config.benchmarks.sg_count_computation,
                },
            )?;
            let mut neighborhoods = vec![Vec::new(); n];
            for (k, &i) in out.order.order.iter().enumerate() {
                let mut prefix = out.order.order[..k].to_vec();
                prefix.sort_unstable();
                neighborhoods[i] = prefix;
            }
            let row = SeriesRow {
                round: 0,
                sim_time: out.duration,
                f_value: out.f_value,
                coverage_pct: 100.0 * out.f_value / inst.interest_area(),
                // prefix marginals telescope to f
                beta_running: if out.f_value > 0.0 { 1.0 } else { 0.0 },
            };
            Ok(TrialResult {
                summary: CoverageStats::from_values(&[row.coverage_pct]),
                series: vec![row],
                neighborhoods,
                final_actions: (0..n).filter_map(|i| out.assignment.action_of(i)).collect(),
                rounds_completed: 1,
                round_seconds: out.duration,
                ..base
            })
        }
        Algorithm::DfsBsg => {
            let graph = CommGraph::from_coordination(&inst.coordination)?;
            let evals = config
                .benchmarks
                .bsg_computation_evaluations
                .unwrap_or_else(|| DfsBsg::default_computation_evaluations(obj));
            let per_round = DfsBsg::new(obj, &graph, 1, delays, evals, config.seed, trial as u64)?.round_time();
            let horizon = horizon_for(config, per_round)?;
            let mut bsg = DfsBsg::new(obj, &graph, horizon.max(1), delays, evals, config.seed, trial as u64)?;
            let mut tracker = Tracker::new(&inst, horizon, options);
            let active = vec![true; n];
            let mut last = None;
            for _ in 0..horizon {
                let record = bsg.step(obj)?;
                last = Some((record.neighborhoods.clone(), record.actions.clone()));
                tracker.push(record, &active, false);
            }
            let (neighborhoods, final_actions) = match last {
                Some((nb, a)) => (nb, (0..n).filter_map(|i| a.action_of(i)).collect()),
                None => (base.neighborhoods.clone(), Vec::new()),
            };
            Ok(TrialResult {
                summary: CoverageStats::from_values(&tracker.series.iter().map(|r| r.coverage_pct).collect::<Vec<_>>()),
                series: tracker.series,
                neighborhoods,
                final_actions,
                rounds_completed: horizon,
                round_seconds: per_round,
                audit: Some(tracker.audit),
                records: tracker.records,
                ..base
            })
        }
    }
}

/// One point of a trial-averaged curve.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CurvePoint {
    pub round: u64,
    pub sim_time_mean: f64,
    pub coverage_mean: f64,
    pub coverage_std: f64,
    /// Trials that reached this round.
    pub trials: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize)]
pub struct BoundSummary {
    pub reports: usize,
    pub kappa_f: MeanStd,
    pub beta_hat: MeanStd,
    pub aposteriori_lb: MeanStd,
    pub asymptotic_lb: MeanStd,
    /// Reports with a known optimum, and how many of them satisfied the
    /// asymptotic bound.
    pub checked: usize,
    pub held: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgorithmSummary {
    pub trials: usize,
    /// Statistics of the trial-averaged coverage curve.
    pub curve_stats: Option<CoverageStats>,
    /// Whole-run mean coverage, across trials.
    pub trial_mean: MeanStd,
    pub last_quarter_mean: MeanStd,
    /// Best round of each trial, across trials.
    pub trial_max: MeanStd,
    pub best_max: f64,
    pub rounds_completed: Vec<u64>,
    pub round_seconds: MeanStd,
    pub rejections: u32,
    pub audit: Option<EvaluationAudit>,
    pub bounds: BoundSummary,
    /// Trial-averaged coverage by round, with the mean simulated time.
    #[serde(skip)]
    pub curve: Vec<CurvePoint>,
}

impl AlgorithmSummary {
    pub fn from_trials(trials: &[TrialResult]) -> Self {
        let longest = trials.iter().map(|t| t.series.len()).max().unwrap_or(0);
        let mut curve = Vec::with_capacity(longest);
        for k in 0..longest {
            let rows: Vec<&SeriesRow> = trials.iter().filter_map(|t| t.series.get(k)).collect();
            let cov: Vec<f64> = rows.iter().map(|r| r.coverage_pct).collect();
            let ms = MeanStd::of(&cov);
            curve.push(CurvePoint {
                round: k as u64,
                sim_time_mean: rows.iter().map(|r| r.sim_time).sum::<f64>() / rows.len() as f64,
                coverage_mean: ms.mean,
                coverage_std: ms.std,
                trials: rows.len(),
            });
        }
        let averaged: Vec<f64> = curve.iter().map(|p| p.coverage_mean).collect();
        let ran: Vec<&TrialResult> = trials.iter().filter(|t| t.summary.is_some()).collect();
        let maxes: Vec<f64> = ran.iter().map(|t| t.summary.unwrap().max).collect();

        let reports: Vec<&BoundReport> = trials.iter().filter_map(|t| t.bounds.as_ref()).collect();
        let field = |f: fn(&BoundReport) -> f64| MeanStd::of(&reports.iter().map(|r| f(r)).collect::<Vec<_>>());
        let bounds = BoundSummary {
            reports: reports.len(),
            kappa_f: field(|r| r.kappa_f),
            beta_hat: field(|r| r.beta_hat),
            aposteriori_lb: field(|r| r.aposteriori_lb),
            asymptotic_lb: field(|r| r.asymptotic_lb),
            checked: reports.iter().filter(|r| r.holds.is_some()).count(),
            held: reports.iter().filter(|r| r.holds == Some(true)).count(),
        };
        let audit = trials.iter().filter_map(|t| t.audit).fold(None, |acc: Option<EvaluationAudit>, a| {
            let mut s = acc.unwrap_or_default();
            s.merge(&a);
            Some(s)
        });

        AlgorithmSummary {
            trials: trials.len(),
            curve_stats: CoverageStats::from_values(&averaged),
            trial_mean: MeanStd::of(&ran.iter().map(|t| t.summary.unwrap().mean).collect::<Vec<_>>()),
            last_quarter_mean: MeanStd::of(&trials.iter().filter_map(|t| t.last_quarter_mean()).collect::<Vec<_>>()),
            trial_max: MeanStd::of(&maxes),
            best_max: maxes.iter().copied().fold(0.0, f64::max),
            rounds_completed: trials.iter().map(|t| t.rounds_completed).collect(),
            round_seconds: MeanStd::of(&trials.iter().map(|t| t.round_seconds).collect::<Vec<_>>()),
            rejections: trials.iter().map(|t| t.rejections).sum(),
            audit,
            bounds,
            curve,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlgorithmResult {
    pub algorithm: Algorithm,
    pub summary: AlgorithmSummary,
    #[serde(skip)]
    pub trials: Vec<TrialResult>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VariantResult {
    pub label: String,
    pub config: ScenarioConfig,
    pub algorithms: Vec<AlgorithmResult>,
}

impl VariantResult {
    pub fn algorithm(&self, a: Algorithm) -> Option<&AlgorithmResult> {
        self.algorithms.iter().find(|r| r.algorithm == a)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentResult {
    pub name: String,
    pub seed: u64,
    pub trials: u32,
    pub variants: Vec<VariantResult>,
}

impl ExperimentResult {
    pub fn variant(&self, label: &str) -> Option<&VariantResult> {
        self.variants.iter().find(|v| v.label == label)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ExperimentOptions {
    /// Worker threads; 0 uses every core.
    pub jobs: usize,
    pub trial: TrialOptions,
}

impl Default for ExperimentOptions {
    fn default() -> Self {
        ExperimentOptions {
            jobs: 0,
            trial: TrialOptions {
                bounds: true,
                ..TrialOptions::default()
            },
        }
    }
}

#[cfg(feature = "parallel")]
fn map_jobs<T: Sync, R: Send>(jobs: usize, items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Result<Vec<R>> {
    use rayon::prelude::*;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| Error::invalid(format!("thread pool: {e}")))?;
    Ok(pool.install(|| items.par_iter().map(&f).collect()))
}

#[cfg(not(feature = "parallel"))]
fn map_jobs<T: Sync, R: Send>(_jobs: usize, items: &[T], f: impl Fn(&T) -> R + Sync + Send) -> Result<Vec<R>> {
    Ok(items.iter().map(f).collect())
}

/// Runs every (variant, algorithm, trial) job. Trials run in parallel but
/// results are assembled in job order, so the output does not depend on
/// the thread count.
pub fn run_experiment(experiment: &Experiment, options: &ExperimentOptions) -> Result<ExperimentResult> {
    let mut jobs = Vec::new();
    for (v, variant) in experiment.variants.iter().enumerate() {
        for &a in &variant.config.algorithms {
            for t in 0..variant.config.trials {
                jobs.push((v, a, t));
            }
        }
    }
    let results = map_jobs(options.jobs, &jobs, |&(v, a, t)| {
        let r = run_trial(&experiment.variants[v].config, a, t, &options.trial);
        log::debug!("{} {} trial {t} done", experiment.variants[v].label, a.name());
        r
    })?;
    let mut results = results.into_iter();
    let mut variants = Vec::new();
    for variant in &experiment.variants {
        let mut algorithms = Vec::new();
        for &a in &variant.config.algorithms {
            let trials = (0..variant.config.trials)
                .map(|_| results.next().expect("one result per job"))
                .collect::<Result<Vec<_>>>()?;
            algorithms.push(AlgorithmResult {
                algorithm: a,
                summary: AlgorithmSummary::from_trials(&trials),
                trials,
            });
        }
        variants.push(VariantResult {
            label: variant.label.clone(),
            config: variant.config.clone(),
            algorithms,
        });
    }
    Ok(ExperimentResult {
        name: experiment.name.clone(),
        seed: experiment.seed(),
        trials: experiment.trials(),
        variants,
    })
}
