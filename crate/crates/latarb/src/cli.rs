//! Command-line surface: `analyze`, `simulate`, `calibrate`, `ingest`.
//!
//! Every command is deterministic given its inputs and seed; JSON reports
//! have a fixed field order so identical runs are byte-identical. Exit
//! codes: 0 success, 1 scenario/semantic error, 2 parse error.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use crate::analytics::{
    self, choose_execution_time, expected_cost, foc_residual, gamma_star,
    optimal_delay_closed_form, optimal_delay_numeric, outcome_probs_gaussian, sim_bound_timed,
    sim_prob_timed_exact,
};
use crate::engine::{run_monte_carlo, run_monte_carlo_with_trace, OrderKind, SimReport, TrialOutcome};
use crate::latency::{self, SamplingMode};
use crate::scenario::{self, DeltaChoice, Scenario, ScenarioError, Strategy, TimedChoice};

/// Calibration constants: Albany -> {NYC, Chicago}, H = 4 ms, and the
/// CME/NYSE relative excess cost of 1.6.
pub const ALBANY_FIXTURE: &str = include_str!("../fixtures/albany.json");

#[derive(Debug, Parser)]
#[command(name = "latarb", version, about = "Two-exchange latency-arbitrage simulator")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Closed-form analysis of a Gaussian-latency scenario.
    Analyze(AnalyzeArgs),
    /// Monte Carlo simulation of a scenario.
    Simulate(SimulateArgs),
    /// Reproduce the published Albany calibration table.
    Calibrate(CalibrateArgs),
    /// Validate a latency catalog CSV and print per-entry statistics.
    Ingest(IngestArgs),
}

#[derive(Debug, Args)]
pub struct AnalyzeArgs {
    /// Scenario JSON file.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum StrategyArg {
    Immediate,
    Delayed,
    Timed,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SamplingArg {
    Physical,
    AllowNegative,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    /// Scenario JSON file.
    #[arg(long)]
    pub scenario: PathBuf,
    /// Override the scenario strategy.
    #[arg(long)]
    pub strategy: Option<StrategyArg>,
    /// Delay in ms, or "optimal" (with --strategy delayed).
    #[arg(long)]
    pub delta: Option<String>,
    /// Execution time T in ms (with --strategy timed).
    #[arg(long)]
    pub t_exec: Option<f64>,
    /// Target simultaneity probability (with --strategy timed).
    #[arg(long)]
    pub target: Option<f64>,
    /// Number of replications.
    #[arg(short = 'n', long = "replications")]
    pub replications: Option<u64>,
    /// Master seed.
    #[arg(long)]
    pub seed: Option<u64>,
    /// Exchange clock jitter bound in ms.
    #[arg(long)]
    pub jitter: Option<f64>,
    /// Gaussian sampling mode.
    #[arg(long)]
    pub sampling: Option<SamplingArg>,
    /// Write a per-trial CSV trace here.
    #[arg(long)]
    pub trace: Option<PathBuf>,
    /// Cap the number of worker threads.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CalibrateArgs {
    /// Replications per Monte Carlo row.
    #[arg(short = 'n', long = "replications", default_value_t = 1_000_000)]
    pub replications: u64,
    /// Master seed.
    #[arg(long, default_value_t = 7)]
    pub seed: u64,
    /// Cap the number of worker threads.
    #[arg(long)]
    pub threads: Option<usize>,
    /// Write the JSON report here instead of stdout.
    #[arg(long)]
    pub json: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    /// Latency catalog CSV.
    pub path: PathBuf,
}

// ---------------------------------------------------------------------------
// report types

#[derive(Debug, Serialize)]
pub struct ProbsJson {
    pub pi_sim: f64,
    pub pi_l: f64,
    pub pi_s: f64,
}

#[derive(Debug, Serialize)]
pub struct CostsJson {
    pub e_sim: f64,
    pub e_l: f64,
    pub e_s: f64,
    pub ratio: f64,
}

#[derive(Debug, Serialize)]
pub struct AnalysisReport {
    pub scenario: String,
    pub h_ms: f64,
    pub costs: CostsJson,
    pub immediate: StrategyAnalysis,
    pub optimal_delay: OptimalDelayAnalysis,
    pub timed: TimedAnalysis,
}

#[derive(Debug, Serialize)]
pub struct StrategyAnalysis {
    pub delta_ms: f64,
    pub probabilities: ProbsJson,
    pub expected_cost: f64,
}

#[derive(Debug, Serialize)]
pub struct OptimalDelayAnalysis {
    pub delta_closed_form_ms: f64,
    pub gamma_star_ms: f64,
    pub delta_numeric_ms: f64,
    pub numeric_interior: bool,
    pub probabilities: ProbsJson,
    pub expected_cost: f64,
    pub foc_residual_normalized: f64,
    pub derivative_signs: DerivativesJson,
}

#[derive(Debug, Serialize)]
pub struct DerivativesJson {
    pub dpi_sim: f64,
    pub dpi_l: f64,
    pub dpi_s: f64,
}

#[derive(Debug, Serialize)]
pub struct TimedAnalysis {
    pub bound_curve: Vec<BoundPoint>,
    /// Smallest T whose simultaneity bound reaches 0.99, when finite.
    pub t_exec_for_99: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct BoundPoint {
    pub t_exec_ms: f64,
    pub bound: f64,
    pub exact: f64,
}

#[derive(Debug, Serialize)]
pub struct SimulationReport {
    pub scenario: String,
    pub strategy: String,
    pub replications: u64,
    pub master_seed: u64,
    pub sampling: SamplingMode,
    pub clock_jitter_ms: f64,
    pub hft_enabled: bool,
    pub resolved_delta_ms: Option<f64>,
    pub resolved_t_exec_ms: Option<f64>,
    pub frequencies: FreqJson,
    pub standard_errors: FreqJson,
    pub mean_cost: f64,
    pub closed_form: Option<ClosedFormComparison>,
}

#[derive(Debug, Serialize)]
pub struct FreqJson {
    pub sim: f64,
    pub l: f64,
    pub s: f64,
}

#[derive(Debug, Serialize)]
pub struct ClosedFormComparison {
    /// Closed-form probabilities (for timed orders, the exact pi_sim with
    /// the reveal split left unreported).
    pub pi_sim: f64,
    pub pi_l: Option<f64>,
    pub pi_s: Option<f64>,
    pub expected_cost: Option<f64>,
    /// Timed-order lower bound, when applicable.
    pub sim_bound: Option<f64>,
    /// All available frequencies within 4 binomial standard errors.
    pub within_4se: bool,
}

#[derive(Debug, Serialize)]
pub struct CalibrationReport {
    pub replications: u64,
    pub master_seed: u64,
    pub rows: Vec<CalibrationRow>,
    pub notes: Vec<String>,
}

#[derive(Debug, Serialize)]
pub struct CalibrationRow {
    pub label: String,
    pub delta_ms: Option<f64>,
    pub gamma_star_ms: Option<f64>,
    pub t_exec_ms: Option<f64>,
    pub closed_form: CalProbs,
    pub monte_carlo: CalProbs,
    pub published: CalProbs,
    pub within_4se: bool,
    pub matches_published_rounding: bool,
    pub flag: Option<String>,
}

/// Calibration probabilities; timed rows report only `pi_sim`.
#[derive(Debug, Serialize)]
pub struct CalProbs {
    pub pi_sim: f64,
    pub pi_l: Option<f64>,
    pub pi_s: Option<f64>,
}

// ---------------------------------------------------------------------------
// dispatch

pub fn run(cli: Cli) -> Result<(), ScenarioError> {
    match cli.command {
        Command::Analyze(args) => cmd_analyze(args),
        Command::Simulate(args) => cmd_simulate(args),
        Command::Calibrate(args) => cmd_calibrate(args),
        Command::Ingest(args) => cmd_ingest(args),
    }
}

fn emit_json<T: Serialize>(report: &T, out: Option<&Path>) -> Result<(), ScenarioError> {
    let text = serde_json::to_string_pretty(report)
        .map_err(|e| ScenarioError::Semantic(format!("serialization failed: {e}")))?;
    match out {
        Some(path) => fs::write(path, text.as_bytes())
            .map_err(|e| ScenarioError::Semantic(format!("cannot write {}: {e}", path.display()))),
        None => {
            println!("{text}");
            Ok(())
        }
    }
}

fn probs_json(p: &analytics::OutcomeProbabilities<f64>) -> ProbsJson {
    ProbsJson { pi_sim: p.pi_sim, pi_l: p.pi_l, pi_s: p.pi_s }
}

// ---------------------------------------------------------------------------
// analyze

pub fn cmd_analyze(args: AnalyzeArgs) -> Result<(), ScenarioError> {
    let scenario = scenario::load_scenario(&args.scenario)?;
    let report = analyze_scenario(&scenario)?;
    emit_json(&report, args.json.as_deref())
}

pub fn analyze_scenario(scenario: &Scenario) -> Result<AnalysisReport, ScenarioError> {
    let pair = &scenario.pair;
    let costs = &scenario.costs;
    if pair.both_gaussian().is_none() {
        return Err(ScenarioError::Semantic(
            "analyze needs Gaussian latency legs; run `latarb simulate` for empirical data".into(),
        ));
    }
    let semantic = |e: analytics::AnalyticsError| ScenarioError::Semantic(e.to_string());

    let p0 = outcome_probs_gaussian(pair, 0.0).map_err(semantic)?;
    let d_star = optimal_delay_closed_form(pair, costs).map_err(semantic)?;
    let g_star = gamma_star(pair, costs).map_err(semantic)?;
    let numeric = optimal_delay_numeric(pair, costs, None).map_err(semantic)?;
    let p_star = outcome_probs_gaussian(pair, d_star).map_err(semantic)?;
    let residual = foc_residual(pair, costs, d_star).map_err(semantic)?
        / (costs.e_s - costs.e_sim);
    let derivs = analytics::derivative_signs_at_optimum(pair, costs).map_err(semantic)?;

    // Bound curve out to where the bound reaches 0.999.
    let t_hi = choose_execution_time(pair, 0.999).map_err(semantic)?;
    let points = 13usize;
    let bound_curve = (0..points)
        .map(|i| {
            let t = t_hi * i as f64 / (points - 1) as f64;
            BoundPoint {
                t_exec_ms: t,
                bound: sim_bound_timed(pair, t),
                exact: sim_prob_timed_exact(pair, t),
            }
        })
        .collect();
    let t99 = choose_execution_time(pair, 0.99).ok();

    Ok(AnalysisReport {
        scenario: scenario.name.clone(),
        h_ms: pair.h,
        costs: CostsJson { e_sim: costs.e_sim, e_l: costs.e_l, e_s: costs.e_s, ratio: costs.ratio },
        immediate: StrategyAnalysis {
            delta_ms: 0.0,
            probabilities: probs_json(&p0),
            expected_cost: expected_cost(&p0, costs),
        },
        optimal_delay: OptimalDelayAnalysis {
            delta_closed_form_ms: d_star,
            gamma_star_ms: g_star,
            delta_numeric_ms: numeric.delta,
            numeric_interior: numeric.interior,
            probabilities: probs_json(&p_star),
            expected_cost: expected_cost(&p_star, costs),
            foc_residual_normalized: residual,
            derivative_signs: DerivativesJson {
                dpi_sim: derivs.dpi_sim,
                dpi_l: derivs.dpi_l,
                dpi_s: derivs.dpi_s,
            },
        },
        timed: TimedAnalysis { bound_curve, t_exec_for_99: t99 },
    })
}

// ---------------------------------------------------------------------------
// simulate

pub fn cmd_simulate(args: SimulateArgs) -> Result<(), ScenarioError> {
    let mut scenario = scenario::load_scenario(&args.scenario)?;
    apply_overrides(&mut scenario, &args)?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads.unwrap_or(0))
        .build()
        .map_err(|e| ScenarioError::Semantic(format!("thread pool: {e}")))?;
    let (report, trace) = pool.install(|| simulate_scenario(&scenario, args.trace.is_some()))?;
    if let (Some(path), Some(trials)) = (&args.trace, &trace) {
        write_trace(path, trials)?;
    }
    emit_json(&report, args.json.as_deref())
}

fn apply_overrides(scenario: &mut Scenario, args: &SimulateArgs) -> Result<(), ScenarioError> {
    if let Some(strategy) = args.strategy {
        scenario.strategy = match strategy {
            StrategyArg::Immediate => Strategy::Immediate,
            StrategyArg::Delayed => {
                let delta = args.delta.as_deref().unwrap_or("optimal");
                if delta == "optimal" {
                    Strategy::Delayed(DeltaChoice::Optimal)
                } else {
                    let d: f64 = delta.parse().map_err(|_| {
                        ScenarioError::Semantic(format!(
                            "--delta must be a number of ms or 'optimal', got '{delta}'"
                        ))
                    })?;
                    Strategy::Delayed(DeltaChoice::Fixed(d))
                }
            }
            StrategyArg::Timed => match (args.t_exec, args.target) {
                (Some(t), None) => Strategy::Timed(TimedChoice::Fixed(t)),
                (None, Some(p)) => Strategy::Timed(TimedChoice::Target(p)),
                _ => {
                    return Err(ScenarioError::Semantic(
                        "timed strategy needs exactly one of --t-exec or --target".into(),
                    ))
                }
            },
        };
    } else if args.delta.is_some() || args.t_exec.is_some() || args.target.is_some() {
        return Err(ScenarioError::Semantic(
            "--delta/--t-exec/--target require --strategy".into(),
        ));
    }
    if let Some(n) = args.replications {
        if n == 0 {
            return Err(ScenarioError::Semantic("replications must be >= 1".into()));
        }
        scenario.sim.replications = n;
    }
    if let Some(seed) = args.seed {
        scenario.sim.master_seed = seed;
    }
    if let Some(j) = args.jitter {
        if j < 0.0 {
            return Err(ScenarioError::Semantic("jitter must be >= 0".into()));
        }
        scenario.sim.clock_jitter = j;
    }
    if let Some(mode) = args.sampling {
        scenario.sim.sampling_mode = match mode {
            SamplingArg::Physical => SamplingMode::Physical,
            SamplingArg::AllowNegative => SamplingMode::AllowNegative,
        };
    }
    Ok(())
}

/// Resolves the strategy into per-leg order kinds and runs the Monte Carlo.
pub fn simulate_scenario(
    scenario: &Scenario,
    with_trace: bool,
) -> Result<(SimulationReport, Option<Vec<TrialOutcome>>), ScenarioError> {
    let pair = &scenario.pair;
    let costs = &scenario.costs;
    let semantic = |e: analytics::AnalyticsError| ScenarioError::Semantic(e.to_string());

    let (kind_s, kind_l, delta, t_exec) = match scenario.strategy {
        Strategy::Immediate => (OrderKind::Immediate, OrderKind::Immediate, None, None),
        Strategy::Delayed(DeltaChoice::Fixed(d)) => {
            let (s, l) = OrderKind::delayed_pair(d);
            (s, l, Some(d), None)
        }
        Strategy::Delayed(DeltaChoice::Optimal) => {
            let d = if pair.both_gaussian().is_some() {
                optimal_delay_closed_form(pair, costs).map_err(semantic)?
            } else {
                optimal_delay_numeric(pair, costs, None).map_err(semantic)?.delta
            };
            let (s, l) = OrderKind::delayed_pair(d);
            (s, l, Some(d), None)
        }
        Strategy::Timed(TimedChoice::Fixed(t)) => {
            if t < 0.0 {
                return Err(ScenarioError::Semantic("t_exec must be >= 0".into()));
            }
            (OrderKind::TimedExecution(t), OrderKind::TimedExecution(t), None, Some(t))
        }
        Strategy::Timed(TimedChoice::Target(p)) => {
            let t = choose_execution_time(pair, p).map_err(semantic)?;
            (OrderKind::TimedExecution(t), OrderKind::TimedExecution(t), None, Some(t))
        }
    };

    let triple = crate::market::ExpenditureTriple {
        e_sim: costs.e_sim,
        e_l: costs.e_l,
        e_s: costs.e_s,
    };
    let (mc, trace) = if with_trace {
        let (r, t) = run_monte_carlo_with_trace(&triple, pair, kind_s, kind_l, &scenario.sim);
        (r, Some(t))
    } else {
        (run_monte_carlo(&triple, pair, kind_s, kind_l, &scenario.sim), None)
    };

    let closed_form = closed_form_comparison(scenario, delta, t_exec, &mc);
    let report = SimulationReport {
        scenario: scenario.name.clone(),
        strategy: scenario.strategy.describe(),
        replications: scenario.sim.replications,
        master_seed: scenario.sim.master_seed,
        sampling: scenario.sim.sampling_mode,
        clock_jitter_ms: scenario.sim.clock_jitter,
        hft_enabled: scenario.sim.hft_enabled,
        resolved_delta_ms: delta,
        resolved_t_exec_ms: t_exec,
        frequencies: FreqJson { sim: mc.freq_sim, l: mc.freq_l, s: mc.freq_s },
        standard_errors: FreqJson { sim: mc.se_sim, l: mc.se_l, s: mc.se_s },
        mean_cost: mc.mean_cost,
        closed_form,
    };
    Ok((report, trace))
}

/// Binomial 4-standard-error agreement check at the closed-form probability.
fn within_4se(freq: f64, p: f64, n: u64) -> bool {
    let se = (p * (1.0 - p) / n as f64).sqrt();
    (freq - p).abs() <= 4.0 * se.max(f64::EPSILON)
}

fn closed_form_comparison(
    scenario: &Scenario,
    delta: Option<f64>,
    t_exec: Option<f64>,
    mc: &SimReport,
) -> Option<ClosedFormComparison> {
    let pair = &scenario.pair;
    let costs = &scenario.costs;
    let n = scenario.sim.replications;
    if !scenario.sim.hft_enabled {
        return None;
    }
    match (t_exec, pair.both_gaussian().is_some()) {
        // Immediate / delayed with Gaussian legs: the full triple.
        (None, true) => {
            let p = outcome_probs_gaussian(pair, delta.unwrap_or(0.0)).ok()?;
            let ok = within_4se(mc.freq_sim, p.pi_sim, n)
                && within_4se(mc.freq_l, p.pi_l, n)
                && within_4se(mc.freq_s, p.pi_s, n);
            Some(ClosedFormComparison {
                pi_sim: p.pi_sim,
                pi_l: Some(p.pi_l),
                pi_s: Some(p.pi_s),
                expected_cost: Some(expected_cost(&p, costs)),
                sim_bound: None,
                within_4se: ok,
            })
        }
        // Timed orders: exact pi_sim plus the analytic lower bound.
        (Some(t), _) => {
            let exact = sim_prob_timed_exact(pair, t);
            let bound = sim_bound_timed(pair, t);
            Some(ClosedFormComparison {
                pi_sim: exact,
                pi_l: None,
                pi_s: None,
                expected_cost: None,
                sim_bound: Some(bound),
                within_4se: within_4se(mc.freq_sim, exact, n),
            })
        }
        _ => None,
    }
}

fn write_trace(path: &Path, trials: &[TrialOutcome]) -> Result<(), ScenarioError> {
    let mut out = std::io::BufWriter::new(fs::File::create(path).map_err(|e| {
        ScenarioError::Semantic(format!("cannot write {}: {e}", path.display()))
    })?);
    let io_err = |e: std::io::Error| ScenarioError::Semantic(format!("trace write failed: {e}"));
    writeln!(out, "trial,send_s,send_l,arrival_s,arrival_l,exec_s,exec_l,classification")
        .map_err(io_err)?;
    for t in trials {
        let class = match t.classification {
            crate::engine::Classification::Simultaneous => "simultaneous",
            crate::engine::Classification::RevealedL => "revealed_l",
            crate::engine::Classification::RevealedS => "revealed_s",
        };
        writeln!(
            out,
            "{},{},{},{},{},{},{},{}",
            t.trial, t.send_s, t.send_l, t.arrival_s, t.arrival_l, t.exec_s, t.exec_l, class
        )
        .map_err(io_err)?;
    }
    Ok(())
}

// ---------------------------------------------------------------------------
// calibrate

/// Published Albany calibration probabilities, in (sim, l, s) order.
const PUBLISHED_IMMEDIATE: (f64, f64, f64) = (0.04, 0.07, 0.89);
const PUBLISHED_DELAYED: (f64, f64, f64) = (0.01, 0.98, 0.01);
const PUBLISHED_GAMMA_STAR: f64 = 84.8;
const PUBLISHED_TIMED_PI_SIM: f64 = 0.99;
const CALIBRATION_T_EXEC: f64 = 150.0;

pub fn cmd_calibrate(args: CalibrateArgs) -> Result<(), ScenarioError> {
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.threads.unwrap_or(0))
        .build()
        .map_err(|e| ScenarioError::Semantic(format!("thread pool: {e}")))?;
    let report = pool.install(|| calibration_report(args.replications, args.seed))?;

    println!("Albany calibration: H = 4 ms, cost ratio 1.6");
    println!("{:-<100}", "");
    println!(
        "{:<24} {:>24} {:>24} {:>18} {:>6}",
        "strategy", "closed form (sim/L/S)", "monte carlo (sim/L/S)", "published (sim/L/S)", "ok"
    );
    let part = |v: Option<f64>, prec: usize| match v {
        Some(x) => format!("{x:.prec$}"),
        None => "-".into(),
    };
    for row in &report.rows {
        let fmt = |p: &CalProbs| {
            format!("{:.4}/{}/{}", p.pi_sim, part(p.pi_l, 4), part(p.pi_s, 4))
        };
        let fmt_published = |p: &CalProbs| {
            format!("{:.2}/{}/{}", p.pi_sim, part(p.pi_l, 2), part(p.pi_s, 2))
        };
        let ok = if row.within_4se && row.matches_published_rounding { "yes" } else { "FLAG" };
        println!(
            "{:<24} {:>24} {:>24} {:>18} {:>6}",
            row.label,
            fmt(&row.closed_form),
            fmt(&row.monte_carlo),
            fmt_published(&row.published),
            ok
        );
        if let Some(flag) = &row.flag {
            println!("    note: {flag}");
        }
    }
    for note in &report.notes {
        println!("note: {note}");
    }
    if let Some(path) = &args.json {
        emit_json(&report, Some(path))?;
    }
    Ok(())
}

pub fn calibration_report(replications: u64, seed: u64) -> Result<CalibrationReport, ScenarioError> {
    let mut scenario = scenario::from_json_str(ALBANY_FIXTURE, Path::new("."))?;
    scenario.sim.replications = replications;
    scenario.sim.master_seed = seed;
    scenario.sim.sampling_mode = SamplingMode::AllowNegative;
    let pair = scenario.pair.clone();
    let costs = scenario.costs;
    let semantic = |e: analytics::AnalyticsError| ScenarioError::Semantic(e.to_string());

    let tol = 0.01; // one unit in the second published decimal
    let mut rows = Vec::new();

    // Row 1: orders dispatched simultaneously.
    let p0 = outcome_probs_gaussian(&pair, 0.0).map_err(semantic)?;
    scenario.strategy = Strategy::Immediate;
    let (mc0, _) = simulate_scenario(&scenario, false)?;
    rows.push(CalibrationRow {
        label: "immediate".into(),
        delta_ms: Some(0.0),
        gamma_star_ms: None,
        t_exec_ms: None,
        closed_form: cal_probs(p0.pi_sim, Some(p0.pi_l), Some(p0.pi_s)),
        monte_carlo: cal_probs(mc0.frequencies.sim, Some(mc0.frequencies.l), Some(mc0.frequencies.s)),
        published: cal_probs(PUBLISHED_IMMEDIATE.0, Some(PUBLISHED_IMMEDIATE.1), Some(PUBLISHED_IMMEDIATE.2)),
        within_4se: mc0.closed_form.as_ref().map(|c| c.within_4se).unwrap_or(false),
        matches_published_rounding: (p0.pi_sim - PUBLISHED_IMMEDIATE.0).abs() <= tol
            && (p0.pi_l - PUBLISHED_IMMEDIATE.1).abs() <= tol
            && (p0.pi_s - PUBLISHED_IMMEDIATE.2).abs() <= tol,
        flag: None,
    });

    // Row 2: optimal strategic delay.
    let d_star = optimal_delay_closed_form(&pair, &costs).map_err(semantic)?;
    let g_star = gamma_star(&pair, &costs).map_err(semantic)?;
    let p_star = outcome_probs_gaussian(&pair, d_star).map_err(semantic)?;
    scenario.strategy = Strategy::Delayed(DeltaChoice::Optimal);
    let (mc1, _) = simulate_scenario(&scenario, false)?;
    rows.push(CalibrationRow {
        label: "optimal delay".into(),
        delta_ms: Some(d_star),
        gamma_star_ms: Some(g_star),
        t_exec_ms: None,
        closed_form: cal_probs(p_star.pi_sim, Some(p_star.pi_l), Some(p_star.pi_s)),
        monte_carlo: cal_probs(mc1.frequencies.sim, Some(mc1.frequencies.l), Some(mc1.frequencies.s)),
        published: cal_probs(PUBLISHED_DELAYED.0, Some(PUBLISHED_DELAYED.1), Some(PUBLISHED_DELAYED.2)),
        within_4se: mc1.closed_form.as_ref().map(|c| c.within_4se).unwrap_or(false),
        matches_published_rounding: (p_star.pi_sim - PUBLISHED_DELAYED.0).abs() <= tol
            && (p_star.pi_l - PUBLISHED_DELAYED.1).abs() <= tol
            && (p_star.pi_s - PUBLISHED_DELAYED.2).abs() <= tol
            && (g_star - PUBLISHED_GAMMA_STAR).abs() <= 0.1,
        flag: None,
    });

    // Row 3: timed execution at T = 150 ms.
    let bound = sim_bound_timed(&pair, CALIBRATION_T_EXEC);
    let exact = sim_prob_timed_exact(&pair, CALIBRATION_T_EXEC);
    scenario.strategy = Strategy::Timed(TimedChoice::Fixed(CALIBRATION_T_EXEC));
    let (mc2, _) = simulate_scenario(&scenario, false)?;
    // The published arithmetic uses denominators 5.2 and 5 where the
    // stated sigmas are 25.7 and 28; reproduce it literally for comparison.
    let published_literal: f64 = crate::math::normal_cdf(103.0 / 5.2)
        * crate::math::normal_cdf(51.0 / 5.0)
        + 0.04 * (1.0 - 0.99);
    let published_literal = published_literal.min(1.0);
    rows.push(CalibrationRow {
        label: format!("timed (T = {CALIBRATION_T_EXEC} ms)"),
        delta_ms: None,
        gamma_star_ms: None,
        t_exec_ms: Some(CALIBRATION_T_EXEC),
        closed_form: cal_probs(exact, None, None),
        monte_carlo: cal_probs(mc2.frequencies.sim, Some(mc2.frequencies.l), Some(mc2.frequencies.s)),
        published: cal_probs(PUBLISHED_TIMED_PI_SIM, None, None),
        within_4se: mc2.closed_form.as_ref().map(|c| c.within_4se).unwrap_or(false)
            && mc2.frequencies.sim >= bound - 4.0 * mc2.standard_errors.sim,
        matches_published_rounding: false,
        flag: Some(format!(
            "bound at T=150 from the stated sigmas (28, 25.7) is {bound:.4} (exact pi_sim {exact:.4}), \
             not the published 0.99; that figure only follows from the literal \
             Phi(103/5.2)*Phi(51/5) arithmetic, which evaluates to {published_literal:.4}"
        )),
    });

    Ok(CalibrationReport {
        replications,
        master_seed: seed,
        rows,
        notes: vec![
            "monte carlo uses allow_negative sampling so the estimand matches the closed forms"
                .into(),
            "published columns show the values as originally rounded".into(),
        ],
    })
}

fn cal_probs(pi_sim: f64, pi_l: Option<f64>, pi_s: Option<f64>) -> CalProbs {
    CalProbs { pi_sim, pi_l, pi_s }
}

// ---------------------------------------------------------------------------
// ingest

pub fn cmd_ingest(args: IngestArgs) -> Result<(), ScenarioError> {
    let catalog = latency::load_latency_csv(&args.path)?;
    println!("{:<20} {:>10} {:>10} {:>10} {:>12}", "name", "kind", "mean", "sd", "max");
    for (name, model) in &catalog {
        let kind = if model.is_gaussian() { "gaussian" } else { "empirical" };
        let max = model
            .max_support()
            .map(|m| format!("{m:.1}"))
            .unwrap_or_else(|| "unbounded".into());
        println!(
            "{:<20} {:>10} {:>10.2} {:>10.2} {:>12}",
            name,
            kind,
            model.mean(),
            model.std_dev(),
            max
        );
    }
    println!("{} entries ok", catalog.len());
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn albany_fixture_parses() {
        let s = scenario::from_json_str(ALBANY_FIXTURE, Path::new(".")).unwrap();
        assert_eq!(s.costs.ratio, 1.6);
        let (gs, gl) = s.pair.both_gaussian().unwrap();
        assert_eq!((gs.mu, gs.sigma), (51.0, 28.0));
        assert_eq!((gl.mu, gl.sigma), (103.0, 25.7));
        assert_eq!(s.pair.h, 4.0);
    }

    #[test]
    fn calibration_rows_reproduce_published_table() {
        let report = calibration_report(200_000, 7).unwrap();
        assert_eq!(report.rows.len(), 3);
        assert!(report.rows[0].within_4se && report.rows[0].matches_published_rounding);
        assert!(report.rows[1].within_4se && report.rows[1].matches_published_rounding);
        // Row 3 carries the documented timed-row discrepancy.
        assert!(report.rows[2].within_4se);
        assert!(!report.rows[2].matches_published_rounding);
        assert!(report.rows[2].flag.is_some());
    }
}
