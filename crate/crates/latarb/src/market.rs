//! Two-exchange asset market: linear demand curves, equilibrium, optimal
//! order splitting, and the three expenditure outcomes an investor faces
//! when a fast arbitrageur may front-run one leg.
//!
//! The large exchange L is more liquid than the small exchange S: the offered
//! share density satisfies `f_L(P) > f_S(P)` at every price, which in the
//! linear parametrization means slope `d < b`. All operations here are pure.

use thiserror::Error;

use crate::math::adaptive_simpson;
use crate::scalar::Real;

/// Absolute quadrature tolerance for the general-density expenditure path.
pub const QUADRATURE_TOL: f64 = 1e-10;
/// Maximum recursion depth for the adaptive quadrature.
pub const QUADRATURE_MAX_DEPTH: u32 = 40;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum MarketError {
    #[error("inadmissible parameters: {0}")]
    InadmissibleParameters(String),
    #[error("order too large: target price {p_star} exceeds curve domain (max {p_max})")]
    OrderTooLarge { p_star: f64, p_max: f64 },
    #[error("liquidity dominance violated at price {price}: f_L = {f_l} <= f_S = {f_s}")]
    DominanceViolated { price: f64, f_l: f64, f_s: f64 },
    #[error("target price {p_star} is below the equilibrium price {p0}")]
    PriceBelowEquilibrium { p_star: f64, p0: f64 },
}

/// Linear demand system: `P_S = a - b X_S`, `P_L = c - d X_L`,
/// `X_S + X_L = x_bar`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinearMarketPair<F = f64> {
    /// Price intercept of the small exchange S.
    pub a: F,
    /// Price slope of S (price units per share).
    pub b: F,
    /// Price intercept of the large exchange L.
    pub c: F,
    /// Price slope of L.
    pub d: F,
    /// Total outstanding quantity.
    pub x_bar: F,
}

impl<F: Real> LinearMarketPair<F> {
    /// Validates positivity, liquidity dominance (`b > d`), and that the
    /// implied equilibrium quantities are strictly positive.
    pub fn new(a: F, b: F, c: F, d: F, x_bar: F) -> Result<Self, MarketError> {
        let zero = F::zero();
        if !(a > zero && b > zero && c > zero && d > zero && x_bar > zero) {
            return Err(MarketError::InadmissibleParameters(
                "a, b, c, d, x_bar must all be strictly positive".into(),
            ));
        }
        if !(b > d) {
            return Err(MarketError::InadmissibleParameters(format!(
                "liquidity dominance requires b > d (got b = {}, d = {})",
                b.to_f64_lossy(),
                d.to_f64_lossy()
            )));
        }
        let pair = Self { a, b, c, d, x_bar };
        solve_equilibrium(&pair)?;
        Ok(pair)
    }
}

/// Market-clearing state: common price and per-venue holdings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EquilibriumState<F = f64> {
    pub p0: F,
    pub x_s: F,
    pub x_l: F,
}

/// How a buy order of size `x_tilde` splits across the venues so that the
/// post-trade prices coincide.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OrderSplit<F = f64> {
    /// Common post-trade price on both venues.
    pub p_star: F,
    /// Quantity bought on L.
    pub x_l_buy: F,
    /// Quantity bought on S.
    pub x_s_buy: F,
}

/// The three total expenditures an investor can face for one trade.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExpenditureTriple<F = f64> {
    /// Cost under simultaneous execution.
    pub e_sim: F,
    /// Cost when the trade is revealed on L first (front-run on S).
    pub e_l: F,
    /// Cost when the trade is revealed on S first (front-run on L).
    pub e_s: F,
}

impl<F: Real> ExpenditureTriple<F> {
    /// Relative excess cost `(E_S - E_sim) / (E_L - E_sim)`; equals `b/d`
    /// in the linear model and exceeds 1 under liquidity dominance.
    pub fn excess_ratio(&self) -> F {
        (self.e_s - self.e_sim) / (self.e_l - self.e_sim)
    }
}

/// A continuous limit-order-book density `f(P)` on a price interval.
pub struct DemandDensity<F = f64> {
    density: Box<dyn Fn(F) -> F + Send + Sync>,
    pub p_lo: F,
    pub p_hi: F,
}

impl<F: Real> DemandDensity<F> {
    pub fn new(p_lo: F, p_hi: F, density: impl Fn(F) -> F + Send + Sync + 'static) -> Self {
        Self { density: Box::new(density), p_lo, p_hi }
    }

    #[inline]
    pub fn eval(&self, p: F) -> F {
        (self.density)(p)
    }
}

/// Closed-form equilibrium of the linear system:
/// `X_S = (a + d x_bar - c) / (b + d)`, `X_L = (-a + b x_bar + c) / (b + d)`.
pub fn solve_equilibrium<F: Real>(
    pair: &LinearMarketPair<F>,
) -> Result<EquilibriumState<F>, MarketError> {
    let denom = pair.b + pair.d;
    let x_s = (pair.a + pair.d * pair.x_bar - pair.c) / denom;
    let x_l = (-pair.a + pair.b * pair.x_bar + pair.c) / denom;
    if !(x_s > F::zero()) || !(x_l > F::zero()) {
        return Err(MarketError::InadmissibleParameters(format!(
            "equilibrium quantities must be positive (X_S = {}, X_L = {})",
            x_s.to_f64_lossy(),
            x_l.to_f64_lossy()
        )));
    }
    let p_s = pair.a - pair.b * x_s;
    let p_l = pair.c - pair.d * x_l;
    debug_assert!(
        (p_s - p_l).abs() <= F::c(1e-12) * p_s.abs().max(F::one()),
        "curve prices disagree: {p_s} vs {p_l}"
    );
    Ok(EquilibriumState { p0: p_s, x_s, x_l })
}

/// Splits a buy order of `x_tilde` shares so the post-trade prices on both
/// venues are equal: `x_tilde = (P* - P0)(1/b + 1/d)`, bought quantities
/// `(P* - P0)/d` on L and `(P* - P0)/b` on S.
pub fn split_order<F: Real>(
    pair: &LinearMarketPair<F>,
    eq: &EquilibriumState<F>,
    x_tilde: F,
) -> Result<OrderSplit<F>, MarketError> {
    if x_tilde < F::zero() {
        return Err(MarketError::InadmissibleParameters(
            "order size must be nonnegative".into(),
        ));
    }
    let slope_sum = F::one() / pair.b + F::one() / pair.d;
    let p_star = eq.p0 + x_tilde / slope_sum;
    // Prices above min(a, c) would walk a book past its last share.
    let p_max = pair.a.min(pair.c);
    if p_star > p_max {
        return Err(MarketError::OrderTooLarge {
            p_star: p_star.to_f64_lossy(),
            p_max: p_max.to_f64_lossy(),
        });
    }
    Ok(OrderSplit {
        p_star,
        x_l_buy: (p_star - eq.p0) / pair.d,
        x_s_buy: (p_star - eq.p0) / pair.b,
    })
}

/// Expenditure triple of the linear model, in closed form:
/// `E_sim = (P*^2 - P0^2)(1/b + 1/d)/2`, `E_L - E_sim = (P* - P0)^2 / 2b`,
/// `E_S - E_sim = (P* - P0)^2 / 2d`.
pub fn expenditures<F: Real>(
    pair: &LinearMarketPair<F>,
    eq: &EquilibriumState<F>,
    p_star: F,
) -> Result<ExpenditureTriple<F>, MarketError> {
    if p_star < eq.p0 {
        return Err(MarketError::PriceBelowEquilibrium {
            p_star: p_star.to_f64_lossy(),
            p0: eq.p0.to_f64_lossy(),
        });
    }
    let half = F::c(0.5);
    let dp = p_star - eq.p0;
    let e_sim = half * (p_star * p_star - eq.p0 * eq.p0) * (F::one() / pair.b + F::one() / pair.d);
    let e_l = e_sim + dp * dp / (F::c(2.0) * pair.b);
    let e_s = e_sim + dp * dp / (F::c(2.0) * pair.d);
    Ok(ExpenditureTriple { e_sim, e_l, e_s })
}

/// Expenditure triple for arbitrary book densities, by quadrature over
/// `[p0, p_star]`:
/// `E_sim = ∫P f_L + ∫P f_S`, `E_L = ∫P f_L + P* X_S`, `E_S = P* X_L + ∫P f_S`.
pub fn expenditures_general<F: Real>(
    f_l: &DemandDensity<F>,
    f_s: &DemandDensity<F>,
    p0: F,
    p_star: F,
) -> Result<ExpenditureTriple<F>, MarketError> {
    if p_star < p0 {
        return Err(MarketError::PriceBelowEquilibrium {
            p_star: p_star.to_f64_lossy(),
            p0: p0.to_f64_lossy(),
        });
    }
    // Dominance check on an evaluation grid over the integration range.
    let nodes = 256;
    for i in 0..=nodes {
        let t = F::from_usize(i).unwrap() / F::from_usize(nodes).unwrap();
        let p = p0 + (p_star - p0) * t;
        let vl = f_l.eval(p);
        let vs = f_s.eval(p);
        if vl <= vs {
            return Err(MarketError::DominanceViolated {
                price: p.to_f64_lossy(),
                f_l: vl.to_f64_lossy(),
                f_s: vs.to_f64_lossy(),
            });
        }
    }
    let tol = F::c(QUADRATURE_TOL);
    let pf_l = adaptive_simpson(&|p| p * f_l.eval(p), p0, p_star, tol, QUADRATURE_MAX_DEPTH);
    let pf_s = adaptive_simpson(&|p| p * f_s.eval(p), p0, p_star, tol, QUADRATURE_MAX_DEPTH);
    let x_l = adaptive_simpson(&|p| f_l.eval(p), p0, p_star, tol, QUADRATURE_MAX_DEPTH);
    let x_s = adaptive_simpson(&|p| f_s.eval(p), p0, p_star, tol, QUADRATURE_MAX_DEPTH);
    Ok(ExpenditureTriple {
        e_sim: pf_l + pf_s,
        e_l: pf_l + p_star * x_s,
        e_s: p_star * x_l + pf_s,
    })
}
