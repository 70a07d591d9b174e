//! Discrete-event Monte Carlo simulator: order dispatch, exchange
//! receive/hold/execute semantics, HFT front-running, and outcome
//! aggregation. This is the brute-force oracle the closed forms are
//! validated against.
//!
//! Determinism contract: trial `i` draws from a ChaCha stream derived from
//! `(master_seed, i)`, and aggregation uses integer counts only, so serial
//! and parallel runs produce bitwise-identical reports.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::latency::{LatencyPair, SamplingMode};
use crate::market::ExpenditureTriple;

/// How one leg of the trade is scheduled.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum OrderKind {
    /// Dispatched at t = 0, executed on arrival.
    Immediate,
    /// Dispatched after the given delay (ms >= 0), executed on arrival.
    Delayed(f64),
    /// Dispatched at t = 0, held by the exchange and executed at
    /// `max(t_exec, arrival)`. The receipt is never published before
    /// execution, so the HFT observes executions only.
    TimedExecution(f64),
}

impl OrderKind {
    /// Leg pair for a sender-side delay of the S-order relative to the
    /// L-order; negative values delay the L-order by `|delta|`.
    pub fn delayed_pair(delta: f64) -> (OrderKind, OrderKind) {
        if delta >= 0.0 {
            (OrderKind::Delayed(delta), OrderKind::Immediate)
        } else {
            (OrderKind::Immediate, OrderKind::Delayed(-delta))
        }
    }

    fn send_time(&self) -> f64 {
        match *self {
            OrderKind::Immediate | OrderKind::TimedExecution(_) => 0.0,
            OrderKind::Delayed(d) => {
                debug_assert!(d >= 0.0, "per-leg delay must be nonnegative");
                d
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Classification {
    Simultaneous,
    RevealedL,
    RevealedS,
}

/// One replication's event record.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TrialOutcome {
    pub trial: u64,
    pub send_s: f64,
    pub send_l: f64,
    pub arrival_s: f64,
    pub arrival_l: f64,
    pub exec_s: f64,
    pub exec_l: f64,
    pub classification: Classification,
    pub realized_cost: f64,
}

#[derive(Debug, Clone, Copy)]
pub struct SimConfig {
    pub replications: u64,
    pub master_seed: u64,
    pub sampling_mode: SamplingMode,
    /// Max absolute exchange-clock error applied to timed executions (ms).
    pub clock_jitter: f64,
    pub hft_enabled: bool,
}

impl SimConfig {
    pub fn new(replications: u64, master_seed: u64) -> Self {
        Self {
            replications,
            master_seed,
            sampling_mode: SamplingMode::Physical,
            clock_jitter: 0.0,
            hft_enabled: true,
        }
    }
}

/// Aggregated Monte Carlo statistics.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SimReport {
    pub replications: u64,
    pub freq_sim: f64,
    pub freq_l: f64,
    pub freq_s: f64,
    pub mean_cost: f64,
    pub se_sim: f64,
    pub se_l: f64,
    pub se_s: f64,
}

/// Outcome classification from the execution-time gap: the HFT front-runs
/// iff one venue executes more than H before the other. A gap of exactly H
/// is simultaneous; the HFT must be strictly faster to get a fill.
pub fn classify(exec_s: f64, exec_l: f64, h: f64) -> Classification {
    if exec_s - exec_l > h {
        Classification::RevealedL
    } else if exec_l - exec_s > h {
        Classification::RevealedS
    } else {
        Classification::Simultaneous
    }
}

fn trial_rng(master_seed: u64, trial_index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(trial_index);
    rng
}

/// Simulates one replication end to end: dispatch, network transit,
/// exchange execution, and (if enabled) the HFT race.
pub fn run_trial(
    market: &ExpenditureTriple<f64>,
    pair: &LatencyPair<f64>,
    kind_s: OrderKind,
    kind_l: OrderKind,
    config: &SimConfig,
    trial_index: u64,
) -> TrialOutcome {
    let mut rng = trial_rng(config.master_seed, trial_index);

    let send_s = kind_s.send_time();
    let send_l = kind_l.send_time();
    let arrival_s = send_s + pair.dist_s.sample(&mut rng, config.sampling_mode);
    let arrival_l = send_l + pair.dist_l.sample(&mut rng, config.sampling_mode);

    let jitter = |rng: &mut ChaCha8Rng| {
        if config.clock_jitter > 0.0 {
            rng.random_range(-config.clock_jitter..=config.clock_jitter)
        } else {
            0.0
        }
    };
    let exec_s = match kind_s {
        OrderKind::TimedExecution(t) => (t + jitter(&mut rng)).max(arrival_s),
        _ => arrival_s,
    };
    let exec_l = match kind_l {
        OrderKind::TimedExecution(t) => (t + jitter(&mut rng)).max(arrival_l),
        _ => arrival_l,
    };

    let classification = if config.hft_enabled {
        // Event-level HFT race: the HFT observes each execution at the
        // executing venue instantly and its cross-venue order lands H later.
        // It fills only if it lands strictly before the investor's other leg.
        if exec_s < exec_l && exec_s + pair.h < exec_l {
            Classification::RevealedS
        } else if exec_l < exec_s && exec_l + pair.h < exec_s {
            Classification::RevealedL
        } else {
            Classification::Simultaneous
        }
    } else {
        classify(exec_s, exec_l, pair.h)
    };
    debug_assert_eq!(classification, classify(exec_s, exec_l, pair.h));

    let realized_cost = if !config.hft_enabled {
        market.e_sim
    } else {
        match classification {
            Classification::Simultaneous => market.e_sim,
            Classification::RevealedL => market.e_l,
            Classification::RevealedS => market.e_s,
        }
    };

    TrialOutcome {
        trial: trial_index,
        send_s,
        send_l,
        arrival_s,
        arrival_l,
        exec_s,
        exec_l,
        classification,
        realized_cost,
    }
}

#[derive(Debug, Default, Clone, Copy)]
struct Counts {
    sim: u64,
    l: u64,
    s: u64,
}

impl Counts {
    fn add(mut self, c: Classification) -> Self {
        match c {
            Classification::Simultaneous => self.sim += 1,
            Classification::RevealedL => self.l += 1,
            Classification::RevealedS => self.s += 1,
        }
        self
    }

    fn merge(self, other: Self) -> Self {
        Counts { sim: self.sim + other.sim, l: self.l + other.l, s: self.s + other.s }
    }

    fn report(&self, market: &ExpenditureTriple<f64>, config: &SimConfig) -> SimReport {
        let n = (self.sim + self.l + self.s) as f64;
        let freq_sim = self.sim as f64 / n;
        let freq_l = self.l as f64 / n;
        let freq_s = self.s as f64 / n;
        // Realized cost is a function of the classification, so the mean is
        // exactly the count-weighted average (order-independent).
        let mean_cost = if config.hft_enabled {
            (self.sim as f64 * market.e_sim
                + self.l as f64 * market.e_l
                + self.s as f64 * market.e_s)
                / n
        } else {
            market.e_sim
        };
        let se = |p: f64| (p * (1.0 - p) / n).sqrt();
        SimReport {
            replications: config.replications,
            freq_sim,
            freq_l,
            freq_s,
            mean_cost,
            se_sim: se(freq_sim),
            se_l: se(freq_l),
            se_s: se(freq_s),
        }
    }
}

/// Runs `config.replications` independent trials in parallel and aggregates
/// outcome frequencies, binomial standard errors, and mean realized cost.
pub fn run_monte_carlo(
    market: &ExpenditureTriple<f64>,
    pair: &LatencyPair<f64>,
    kind_s: OrderKind,
    kind_l: OrderKind,
    config: &SimConfig,
) -> SimReport {
    assert!(config.replications >= 1, "need at least one replication");
    let counts = (0..config.replications)
        .into_par_iter()
        .fold(Counts::default, |acc, i| {
            acc.add(run_trial(market, pair, kind_s, kind_l, config, i).classification)
        })
        .reduce(Counts::default, Counts::merge);
    counts.report(market, config)
}

/// As [`run_monte_carlo`], but also returns every per-trial event record in
/// trial order.
pub fn run_monte_carlo_with_trace(
    market: &ExpenditureTriple<f64>,
    pair: &LatencyPair<f64>,
    kind_s: OrderKind,
    kind_l: OrderKind,
    config: &SimConfig,
) -> (SimReport, Vec<TrialOutcome>) {
    assert!(config.replications >= 1, "need at least one replication");
    let trials: Vec<TrialOutcome> = (0..config.replications)
        .into_par_iter()
        .map(|i| run_trial(market, pair, kind_s, kind_l, config, i))
        .collect();
    let counts = trials
        .iter()
        .fold(Counts::default(), |acc, t| acc.add(t.classification));
    (counts.report(market, config), trials)
}
