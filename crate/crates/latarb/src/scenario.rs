//! Scenario files: JSON descriptions of a market, a latency pair, a trading
//! strategy, and Monte Carlo settings, resolved against latency catalogs.

use std::fs;
use std::path::{Path, PathBuf};

use serde::Deserialize;
use thiserror::Error;

use crate::analytics::CostProfile;
use crate::engine::SimConfig;
use crate::latency::{self, LatencyModel, LatencyPair, SamplingMode};
use crate::market::{expenditures, solve_equilibrium, split_order, LinearMarketPair};

/// Scenario-level failures, split by CLI exit code: `Parse` exits 2,
/// `Semantic` exits 1.
#[derive(Debug, Error)]
pub enum ScenarioError {
    #[error("parse error: {0}")]
    Parse(String),
    #[error("{0}")]
    Semantic(String),
}

impl From<latency::LatencyError> for ScenarioError {
    fn from(e: latency::LatencyError) -> Self {
        match e {
            latency::LatencyError::Parse { .. } => ScenarioError::Parse(e.to_string()),
            other => ScenarioError::Semantic(other.to_string()),
        }
    }
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioFile {
    pub name: Option<String>,
    /// Free-form data provenance note (kept for fixture documentation).
    pub provenance: Option<String>,
    pub market: MarketSpec,
    pub latency: LatencySpec,
    pub strategy: StrategySpec,
    #[serde(default)]
    pub sim: SimSpec,
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum MarketSpec {
    /// Linear demand system plus the order size to price through it.
    Linear { a: f64, b: f64, c: f64, d: f64, x_bar: f64, order_size: f64 },
    /// Expenditure triple given directly.
    Costs { e_sim: f64, e_l: f64, e_s: f64 },
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LatencySpec {
    /// Catalog CSV (relative to the scenario file) for named legs.
    pub catalog: Option<String>,
    pub s: LegSpec,
    pub l: LegSpec,
    pub h: f64,
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum LegSpec {
    /// Name looked up in the catalog.
    Name(String),
    Inline(DistSpec),
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum DistSpec {
    Gaussian { mu: f64, sigma: f64 },
    Empirical { samples: Option<Vec<f64>>, path: Option<String> },
}

#[derive(Debug, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum StrategySpec {
    Immediate,
    Delayed { delta: DeltaSpec },
    Timed { t_exec: Option<f64>, target: Option<f64> },
}

#[derive(Debug, Deserialize)]
#[serde(untagged)]
pub enum DeltaSpec {
    Millis(f64),
    Keyword(String),
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSpec {
    #[serde(default = "default_replications")]
    pub replications: u64,
    #[serde(default = "default_seed")]
    pub master_seed: u64,
    #[serde(default)]
    pub sampling: SamplingMode,
    #[serde(default)]
    pub clock_jitter: f64,
    #[serde(default = "default_true")]
    pub hft_enabled: bool,
}

fn default_replications() -> u64 {
    1_000_000
}

fn default_seed() -> u64 {
    1
}

fn default_true() -> bool {
    true
}

impl Default for SimSpec {
    fn default() -> Self {
        Self {
            replications: default_replications(),
            master_seed: default_seed(),
            sampling: SamplingMode::default(),
            clock_jitter: 0.0,
            hft_enabled: true,
        }
    }
}

/// A fully resolved scenario, ready for analysis or simulation.
#[derive(Debug, Clone)]
pub struct Scenario {
    pub name: String,
    pub costs: CostProfile<f64>,
    pub pair: LatencyPair<f64>,
    pub strategy: Strategy,
    pub sim: SimConfig,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Strategy {
    Immediate,
    Delayed(DeltaChoice),
    Timed(TimedChoice),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum DeltaChoice {
    Fixed(f64),
    Optimal,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum TimedChoice {
    Fixed(f64),
    Target(f64),
}

impl Strategy {
    pub fn describe(&self) -> String {
        match self {
            Strategy::Immediate => "immediate".into(),
            Strategy::Delayed(DeltaChoice::Fixed(d)) => format!("delayed (delta = {d} ms)"),
            Strategy::Delayed(DeltaChoice::Optimal) => "delayed (optimal delta)".into(),
            Strategy::Timed(TimedChoice::Fixed(t)) => format!("timed (T = {t} ms)"),
            Strategy::Timed(TimedChoice::Target(p)) => format!("timed (target pi_sim = {p})"),
        }
    }
}

/// Loads and resolves a scenario file.
pub fn load_scenario(path: &Path) -> Result<Scenario, ScenarioError> {
    let text = fs::read_to_string(path)
        .map_err(|e| ScenarioError::Semantic(format!("cannot read {}: {e}", path.display())))?;
    let dir = path.parent().unwrap_or_else(|| Path::new(".")).to_path_buf();
    let file: ScenarioFile = serde_json::from_str(&text)
        .map_err(|e| ScenarioError::Parse(format!("{}: {e}", path.display())))?;
    resolve(file, &dir, path)
}

/// Resolves an already-parsed scenario (used for embedded fixtures).
pub fn resolve(
    file: ScenarioFile,
    base_dir: &Path,
    origin: &Path,
) -> Result<Scenario, ScenarioError> {
    let name = file
        .name
        .unwrap_or_else(|| origin.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default());

    let costs = match file.market {
        MarketSpec::Costs { e_sim, e_l, e_s } => CostProfile::new(e_sim, e_l, e_s)
            .map_err(|e| ScenarioError::Semantic(e.to_string()))?,
        MarketSpec::Linear { a, b, c, d, x_bar, order_size } => {
            let pair = LinearMarketPair::new(a, b, c, d, x_bar)
                .map_err(|e| ScenarioError::Semantic(e.to_string()))?;
            let eq = solve_equilibrium(&pair).map_err(|e| ScenarioError::Semantic(e.to_string()))?;
            let split = split_order(&pair, &eq, order_size)
                .map_err(|e| ScenarioError::Semantic(e.to_string()))?;
            let triple = expenditures(&pair, &eq, split.p_star)
                .map_err(|e| ScenarioError::Semantic(e.to_string()))?;
            CostProfile::try_from(triple).map_err(|e| ScenarioError::Semantic(e.to_string()))?
        }
    };

    let catalog = match &file.latency.catalog {
        Some(rel) => Some(latency::load_latency_csv(&base_dir.join(rel))?),
        None => None,
    };
    let resolve_leg = |leg: &LegSpec| -> Result<LatencyModel<f64>, ScenarioError> {
        match leg {
            LegSpec::Name(name) => catalog
                .as_ref()
                .ok_or_else(|| {
                    ScenarioError::Semantic(format!(
                        "leg '{name}' is a catalog name but the scenario has no catalog"
                    ))
                })?
                .get(name)
                .cloned()
                .ok_or_else(|| ScenarioError::Semantic(format!("unknown catalog entry '{name}'"))),
            LegSpec::Inline(DistSpec::Gaussian { mu, sigma }) => {
                LatencyModel::gaussian(*mu, *sigma).map_err(|e| ScenarioError::Semantic(e.to_string()))
            }
            LegSpec::Inline(DistSpec::Empirical { samples, path }) => {
                let values = match (samples, path) {
                    (Some(v), None) => v.clone(),
                    (None, Some(p)) => latency::load_sample_csv(&base_dir.join(p))?,
                    _ => {
                        return Err(ScenarioError::Semantic(
                            "empirical leg needs exactly one of 'samples' or 'path'".into(),
                        ))
                    }
                };
                LatencyModel::empirical(values).map_err(|e| ScenarioError::Semantic(e.to_string()))
            }
        }
    };
    let dist_s = resolve_leg(&file.latency.s)?;
    let dist_l = resolve_leg(&file.latency.l)?;
    let pair = LatencyPair::new(dist_s, dist_l, file.latency.h)
        .map_err(|e| ScenarioError::Semantic(e.to_string()))?;

    let strategy = match file.strategy {
        StrategySpec::Immediate => Strategy::Immediate,
        StrategySpec::Delayed { delta } => Strategy::Delayed(match delta {
            DeltaSpec::Millis(d) => DeltaChoice::Fixed(d),
            DeltaSpec::Keyword(k) if k == "optimal" => DeltaChoice::Optimal,
            DeltaSpec::Keyword(k) => {
                return Err(ScenarioError::Semantic(format!(
                    "delta must be a number of ms or \"optimal\", got \"{k}\""
                )))
            }
        }),
        StrategySpec::Timed { t_exec, target } => Strategy::Timed(match (t_exec, target) {
            (Some(t), None) => TimedChoice::Fixed(t),
            (None, Some(p)) => TimedChoice::Target(p),
            _ => {
                return Err(ScenarioError::Semantic(
                    "timed strategy needs exactly one of 't_exec' or 'target'".into(),
                ))
            }
        }),
    };

    if file.sim.replications == 0 {
        return Err(ScenarioError::Semantic("replications must be >= 1".into()));
    }
    if file.sim.clock_jitter < 0.0 {
        return Err(ScenarioError::Semantic("clock_jitter must be >= 0".into()));
    }
    let sim = SimConfig {
        replications: file.sim.replications,
        master_seed: file.sim.master_seed,
        sampling_mode: file.sim.sampling,
        clock_jitter: file.sim.clock_jitter,
        hft_enabled: file.sim.hft_enabled,
    };

    Ok(Scenario { name, costs, pair, strategy, sim })
}

/// Convenience for tests and embedded fixtures: resolve from a JSON string.
pub fn from_json_str(json: &str, base_dir: &Path) -> Result<Scenario, ScenarioError> {
    let file: ScenarioFile =
        serde_json::from_str(json).map_err(|e| ScenarioError::Parse(e.to_string()))?;
    resolve(file, base_dir, &PathBuf::from("embedded.json"))
}

#[cfg(test)]
mod tests {
    use super::*;

    const ALBANY: &str = r#"{
        "name": "albany",
        "market": {"costs": {"e_sim": 0.0, "e_l": 2.5, "e_s": 4.0}},
        "latency": {
            "s": {"gaussian": {"mu": 51.0, "sigma": 28.0}},
            "l": {"gaussian": {"mu": 103.0, "sigma": 25.7}},
            "h": 4.0
        },
        "strategy": {"delayed": {"delta": "optimal"}},
        "sim": {"replications": 1000, "master_seed": 7, "sampling": "allow_negative"}
    }"#;

    #[test]
    fn inline_scenario_resolves() {
        let s = from_json_str(ALBANY, Path::new(".")).unwrap();
        assert_eq!(s.name, "albany");
        assert_eq!(s.costs.ratio, 1.6);
        assert!(s.pair.both_gaussian().is_some());
        assert_eq!(s.strategy, Strategy::Delayed(DeltaChoice::Optimal));
        assert_eq!(s.sim.replications, 1000);
        assert_eq!(s.sim.sampling_mode, SamplingMode::AllowNegative);
    }

    #[test]
    fn linear_market_produces_cost_profile() {
        let json = r#"{
            "market": {"linear": {"a": 110.0, "b": 0.2, "c": 110.0, "d": 0.125, "x_bar": 100.0, "order_size": 13.0}},
            "latency": {"s": {"gaussian": {"mu": 51, "sigma": 28}}, "l": {"gaussian": {"mu": 103, "sigma": 25.7}}, "h": 4.0},
            "strategy": "immediate"
        }"#;
        let s = from_json_str(json, Path::new(".")).unwrap();
        assert!((s.costs.ratio - 1.6).abs() < 1e-12);
        assert!((s.costs.e_l - s.costs.e_sim - 2.5).abs() < 1e-12);
    }

    #[test]
    fn bad_json_is_parse_error() {
        let r = from_json_str("{not json", Path::new("."));
        assert!(matches!(r, Err(ScenarioError::Parse(_))));
    }

    #[test]
    fn zero_replications_rejected() {
        let json = ALBANY.replace("\"replications\": 1000", "\"replications\": 0");
        let r = from_json_str(&json, Path::new("."));
        assert!(matches!(r, Err(ScenarioError::Semantic(_))));
    }

    #[test]
    fn unknown_catalog_name_rejected() {
        let json = r#"{
            "market": {"costs": {"e_sim": 0.0, "e_l": 2.5, "e_s": 4.0}},
            "latency": {"s": "nowhere", "l": {"gaussian": {"mu": 103, "sigma": 25.7}}, "h": 4.0},
            "strategy": "immediate"
        }"#;
        let r = from_json_str(json, Path::new("."));
        assert!(matches!(r, Err(ScenarioError::Semantic(_))));
    }
}
