//! Closed-form outcome probabilities, the optimal-delay program, and
//! execution-time selection for timed orders.
//!
//! Conventions: `delta` is the dispatch offset of the S-order relative to the
//! L-order (negative values delay the L-order instead), and the latency gap
//! is `x = l_S - l_L` with mean `gamma = mu_S - mu_L + delta` and precision
//! `alpha = 1 / (sigma_S^2 + sigma_L^2)`. The three outcomes are
//! simultaneous execution (gap within H), reveal-on-L (gap > H), and
//! reveal-on-S (gap < -H).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::latency::{LatencyModel, LatencyPair, SamplingMode};
use crate::market::ExpenditureTriple;
use crate::math::{
    adaptive_simpson, bisect_first_at_least, grid_then_golden, normal_cdf, normal_pdf,
};
use crate::scalar::Real;

/// Refinement tolerance for the numeric delay optimizer (ms).
pub const DELAY_XTOL: f64 = 0.01;
/// Bisection tolerance for execution-time selection (ms).
pub const EXEC_TIME_XTOL: f64 = 0.01;
/// Finite-difference step for probability derivatives (ms).
pub const FD_STEP: f64 = 0.01;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticsError {
    #[error("closed forms need Gaussian legs; use the Monte Carlo engine for empirical latency")]
    WrongDistributionKind,
    #[error("invalid cost ratio: requires e_sim < e_l <= e_s (got e_sim = {e_sim}, e_l = {e_l}, e_s = {e_s})")]
    InvalidRatio { e_sim: f64, e_l: f64, e_s: f64 },
    #[error("target probability 1 is unreachable with unbounded latency support")]
    UnreachableTarget,
    #[error("target probability must lie in (0, 1]")]
    InvalidTarget,
}

/// Mean/precision view of the latency gap for a given delay.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelayAnalytics<F = f64> {
    pub gamma: F,
    pub alpha: F,
    pub delta: F,
}

impl<F: Real> DelayAnalytics<F> {
    pub fn new(pair: &LatencyPair<F>, delta: F) -> Result<Self, AnalyticsError> {
        let (s, l) = pair.both_gaussian().ok_or(AnalyticsError::WrongDistributionKind)?;
        let var = s.sigma * s.sigma + l.sigma * l.sigma;
        Ok(Self { gamma: s.mu - l.mu + delta, alpha: F::one() / var, delta })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OutcomeProbabilities<F = f64> {
    pub pi_sim: F,
    pub pi_l: F,
    pub pi_s: F,
}

/// Expenditure triple plus its relative excess cost.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CostProfile<F = f64> {
    pub e_sim: F,
    pub e_l: F,
    pub e_s: F,
    /// `(e_s - e_sim) / (e_l - e_sim)`, >= 1.
    pub ratio: F,
}

impl<F: Real> CostProfile<F> {
    pub fn new(e_sim: F, e_l: F, e_s: F) -> Result<Self, AnalyticsError> {
        if !(e_l > e_sim) || !(e_s >= e_l) {
            return Err(AnalyticsError::InvalidRatio {
                e_sim: e_sim.to_f64_lossy(),
                e_l: e_l.to_f64_lossy(),
                e_s: e_s.to_f64_lossy(),
            });
        }
        let ratio = (e_s - e_sim) / (e_l - e_sim);
        Ok(Self { e_sim, e_l, e_s, ratio })
    }
}

impl<F: Real> TryFrom<ExpenditureTriple<F>> for CostProfile<F> {
    type Error = AnalyticsError;

    fn try_from(t: ExpenditureTriple<F>) -> Result<Self, AnalyticsError> {
        Self::new(t.e_sim, t.e_l, t.e_s)
    }
}

/// Outcome probabilities under Gaussian legs:
/// `pi_L = 1 - Phi(sqrt(alpha)(-gamma + H))`,
/// `pi_S = Phi(sqrt(alpha)(-gamma - H))`,
/// `pi_sim = 1 - pi_L - pi_S`.
pub fn outcome_probs_gaussian<F: Real>(
    pair: &LatencyPair<F>,
    delta: F,
) -> Result<OutcomeProbabilities<F>, AnalyticsError> {
    let da = DelayAnalytics::new(pair, delta)?;
    let sqrt_alpha = da.alpha.sqrt();
    let pi_l = F::one() - normal_cdf(sqrt_alpha * (-da.gamma + pair.h));
    let pi_s = normal_cdf(sqrt_alpha * (-da.gamma - pair.h));
    let pi_sim = (F::one() - pi_l - pi_s).max(F::zero()).min(F::one());
    Ok(OutcomeProbabilities {
        pi_sim,
        pi_l: pi_l.max(F::zero()).min(F::one()),
        pi_s: pi_s.max(F::zero()).min(F::one()),
    })
}

/// Expected expenditure of a strategy given its outcome probabilities.
pub fn expected_cost<F: Real>(probs: &OutcomeProbabilities<F>, costs: &CostProfile<F>) -> F {
    probs.pi_sim * costs.e_sim + probs.pi_l * costs.e_l + probs.pi_s * costs.e_s
}

/// Optimal S-order delay under Gaussian legs:
/// `delta* = mu_L - mu_S + (sigma_S^2 + sigma_L^2) / (2H) * ln(ratio)`.
pub fn optimal_delay_closed_form<F: Real>(
    pair: &LatencyPair<F>,
    costs: &CostProfile<F>,
) -> Result<F, AnalyticsError> {
    let (s, l) = pair.both_gaussian().ok_or(AnalyticsError::WrongDistributionKind)?;
    let var = s.sigma * s.sigma + l.sigma * l.sigma;
    Ok(l.mu - s.mu + var / (F::c(2.0) * pair.h) * costs.ratio.ln())
}

/// The optimal mean latency gap implied by the closed form; positive
/// whenever `ratio > 1`.
pub fn gamma_star<F: Real>(pair: &LatencyPair<F>, costs: &CostProfile<F>) -> Result<F, AnalyticsError> {
    let (s, l) = pair.both_gaussian().ok_or(AnalyticsError::WrongDistributionKind)?;
    let var = s.sigma * s.sigma + l.sigma * l.sigma;
    Ok(var / (F::c(2.0) * pair.h) * costs.ratio.ln())
}

/// Result of the numeric delay optimizer.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DelaySolution<F = f64> {
    pub delta: F,
    pub expected_cost: F,
    /// False when the minimizer sits on the search-interval boundary.
    pub interior: bool,
}

/// Monte Carlo settings for the empirical-leg objective (common random
/// numbers across delay candidates).
#[derive(Debug, Clone, Copy)]
pub struct McSettings {
    pub samples: usize,
    pub seed: u64,
}

impl Default for McSettings {
    fn default() -> Self {
        Self { samples: 200_000, seed: 0x1a7a_4b }
    }
}

/// Minimizes expected cost over the delay by coarse 1 ms grid search plus
/// golden-section refinement to 0.01 ms. Gaussian legs use the closed-form
/// objective; anything else is estimated by Monte Carlo with common random
/// numbers (`mc`, defaulted when absent).
pub fn optimal_delay_numeric<F: Real>(
    pair: &LatencyPair<F>,
    costs: &CostProfile<F>,
    mc: Option<McSettings>,
) -> Result<DelaySolution<F>, AnalyticsError> {
    // Base interval from the six-sigma envelope of the L leg, widened so a
    // large closed-form delay (flat legs, small H) stays interior.
    let envelope = pair.dist_l.mean() + F::c(6.0) * pair.dist_l.std_dev();
    let radius = if pair.both_gaussian().is_some() {
        let d_star = optimal_delay_closed_form(pair, costs)?;
        envelope.max(d_star.abs() + F::c(10.0))
    } else {
        let env_s = pair.dist_s.mean() + F::c(6.0) * pair.dist_s.std_dev();
        envelope.max(env_s) + F::c(10.0)
    };
    let step = F::one();
    let xtol = F::c(DELAY_XTOL);

    if pair.both_gaussian().is_some() {
        let objective = |delta: F| {
            let probs = outcome_probs_gaussian(pair, delta).expect("gaussian legs");
            expected_cost(&probs, costs)
        };
        let (delta, cost, interior) = grid_then_golden(&objective, -radius, radius, step, xtol);
        return Ok(DelaySolution { delta, expected_cost: cost, interior });
    }

    // Pre-sample the latency gaps once so the objective is a deterministic
    // function of delta (common random numbers).
    let mc = mc.unwrap_or_default();
    let mut rng = ChaCha8Rng::seed_from_u64(mc.seed);
    let gaps: Vec<F> = (0..mc.samples)
        .map(|_| {
            let l_s = pair.dist_s.sample(&mut rng, SamplingMode::AllowNegative);
            let l_l = pair.dist_l.sample(&mut rng, SamplingMode::AllowNegative);
            l_s - l_l
        })
        .collect();
    let n = F::from_usize(gaps.len()).unwrap();
    let objective = move |delta: F| {
        let mut total = F::zero();
        for &x in &gaps {
            let gap = x + delta;
            total = total
                + if gap > pair.h {
                    costs.e_l
                } else if gap < -pair.h {
                    costs.e_s
                } else {
                    costs.e_sim
                };
        }
        total / n
    };
    let (delta, cost, interior) = grid_then_golden(&objective, -radius, radius, step, xtol);
    Ok(DelaySolution { delta, expected_cost: cost, interior })
}

/// First-order-condition residual at a given delay:
/// `phi(sqrt(a)(-g + H)) (E_L - E_sim) - phi(sqrt(a)(-g - H)) (E_S - E_sim)`.
/// Zero exactly at the optimal delay.
pub fn foc_residual<F: Real>(
    pair: &LatencyPair<F>,
    costs: &CostProfile<F>,
    delta: F,
) -> Result<F, AnalyticsError> {
    let da = DelayAnalytics::new(pair, delta)?;
    let sqrt_alpha = da.alpha.sqrt();
    let lhs = normal_pdf(sqrt_alpha * (-da.gamma + pair.h)) * (costs.e_l - costs.e_sim);
    let rhs = normal_pdf(sqrt_alpha * (-da.gamma - pair.h)) * (costs.e_s - costs.e_sim);
    Ok(lhs - rhs)
}

/// Per-ms sensitivities of the three outcome probabilities.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ProbDerivatives<F = f64> {
    pub dpi_sim: F,
    pub dpi_l: F,
    pub dpi_s: F,
}

/// Central finite differences of the outcome probabilities at `delta`.
pub fn outcome_prob_derivatives<F: Real>(
    pair: &LatencyPair<F>,
    delta: F,
) -> Result<ProbDerivatives<F>, AnalyticsError> {
    let h = F::c(FD_STEP);
    let plus = outcome_probs_gaussian(pair, delta + h)?;
    let minus = outcome_probs_gaussian(pair, delta - h)?;
    let two_h = F::c(2.0) * h;
    Ok(ProbDerivatives {
        dpi_sim: (plus.pi_sim - minus.pi_sim) / two_h,
        dpi_l: (plus.pi_l - minus.pi_l) / two_h,
        dpi_s: (plus.pi_s - minus.pi_s) / two_h,
    })
}

/// Probability sensitivities at the closed-form optimal delay. With
/// `ratio > 1` the contract is `dpi_sim < 0`, `dpi_l > 0`, `dpi_s < 0`, and
/// `|dpi_l| > |dpi_s|`: the optimum leans executions toward the liquid
/// exchange rather than maximizing simultaneity.
pub fn derivative_signs_at_optimum<F: Real>(
    pair: &LatencyPair<F>,
    costs: &CostProfile<F>,
) -> Result<ProbDerivatives<F>, AnalyticsError> {
    let d_star = optimal_delay_closed_form(pair, costs)?;
    outcome_prob_derivatives(pair, d_star)
}

/// `P(|l_S - l_L| <= h)` for simultaneously dispatched orders.
pub fn prob_gap_within_h<F: Real>(pair: &LatencyPair<F>) -> F {
    match (&pair.dist_s, &pair.dist_l) {
        (LatencyModel::Gaussian(_), LatencyModel::Gaussian(_)) => {
            outcome_probs_gaussian(pair, F::zero()).expect("gaussian legs").pi_sim
        }
        (LatencyModel::Empirical(es), LatencyModel::Empirical(el)) => {
            let mut hits = 0usize;
            for &s in es.samples() {
                for &l in el.samples() {
                    if (s - l).abs() <= pair.h {
                        hits += 1;
                    }
                }
            }
            F::from_usize(hits).unwrap()
                / F::from_usize(es.samples().len() * el.samples().len()).unwrap()
        }
        (LatencyModel::Empirical(es), l) => {
            average(es.samples(), |s| l.cdf(s + pair.h) - l.cdf(s - pair.h))
        }
        (s, LatencyModel::Empirical(el)) => {
            average(el.samples(), |l| s.cdf(l + pair.h) - s.cdf(l - pair.h))
        }
    }
}

fn average<F: Real>(xs: &[F], f: impl Fn(F) -> F) -> F {
    xs.iter().map(|&x| f(x)).sum::<F>() / F::from_usize(xs.len()).unwrap()
}

/// Reference estimate of the simultaneous-execution probability of timed
/// orders dispatched at t = 0 with execution time `t_exec`:
/// `P(l_S <= T+H) P(l_L <= T+H) + P(|l_S - l_L| <= H) (1 - product)`.
/// Nondecreasing in `t_exec` and converging to 1. The first term alone is a
/// true lower bound; the composite treats {both arrive by T+H} and
/// {gap <= H} as independent, so it can overshoot the exact probability
/// (see [`sim_prob_timed_exact`]) by up to the correlation of those events.
pub fn sim_bound_timed<F: Real>(pair: &LatencyPair<F>, t_exec: F) -> F {
    let p = pair.dist_s.cdf(t_exec + pair.h) * pair.dist_l.cdf(t_exec + pair.h);
    let q = prob_gap_within_h(pair);
    (p + q * (F::one() - p)).min(F::one())
}

/// Exact simultaneous-execution probability of timed orders (execution at
/// `max(t_exec, arrival)`, no clock jitter). Exact for empirical S legs;
/// Gaussian S legs integrate the conditional probability by quadrature.
pub fn sim_prob_timed_exact<F: Real>(pair: &LatencyPair<F>, t_exec: F) -> F {
    let t = t_exec;
    let h = pair.h;
    let dist_l = &pair.dist_l;
    // P(|max(t, l_s') - max(t, l_L)| <= h) conditional on l_S = l_s.
    let inner = |l_s: F| {
        let t_s = t.max(l_s);
        let early = if t_s - t <= h { dist_l.cdf(t) } else { F::zero() };
        early + dist_l.cdf(t_s + h) - dist_l.cdf(t.max(t_s - h))
    };
    match &pair.dist_s {
        LatencyModel::Empirical(es) => average(es.samples(), inner),
        LatencyModel::Gaussian(g) => {
            let tol = F::c(1e-10);
            let head = pair.dist_s.cdf(t) * inner(t);
            let upper = (t + h).max(g.mu) + F::c(12.0) * g.sigma;
            let density = |x: F| normal_pdf((x - g.mu) / g.sigma) / g.sigma;
            // inner() has a kink at t + h; integrate the two pieces apart.
            let mid = adaptive_simpson(&|x| density(x) * inner(x), t, t + h, tol, 40);
            let tail = adaptive_simpson(&|x| density(x) * inner(x), t + h, upper, tol, 40);
            (head + mid + tail).min(F::one())
        }
    }
}

/// Smallest execution time whose simultaneity bound reaches `target`
/// (bisection to 0.01 ms). `target = 1` requires both legs to have finite
/// support and returns the larger maximum latency.
pub fn choose_execution_time<F: Real>(
    pair: &LatencyPair<F>,
    target: F,
) -> Result<F, AnalyticsError> {
    if !(target > F::zero()) || target > F::one() {
        return Err(AnalyticsError::InvalidTarget);
    }
    if target == F::one() {
        return match (pair.dist_s.max_support(), pair.dist_l.max_support()) {
            (Some(ms), Some(ml)) => Ok(ms.max(ml)),
            _ => Err(AnalyticsError::UnreachableTarget),
        };
    }
    let g = |t: F| sim_bound_timed(pair, t);
    let mut hi = F::one();
    while g(hi) < target {
        hi = hi * F::c(2.0);
        if hi > F::c(1e9) {
            // The bound converges to 1, so this is unreachable in practice.
            return Err(AnalyticsError::UnreachableTarget);
        }
    }
    Ok(bisect_first_at_least(&g, F::zero(), hi, target, F::c(EXEC_TIME_XTOL)))
}
