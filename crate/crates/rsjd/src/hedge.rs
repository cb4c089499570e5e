//! Budget-constrained VaR-minimizing put hedges, the efficient frontier, and
//! the dual minimum-cost problem.
//!
//! A position hedged with `h` puts of strike `K` bought at premium `Π(K)`
//! under budget `h·Π(K) = C` has value-at-risk
//!
//! ```text
//! VaR_α(L^{h,K}) = VaR_α(Lᵘ) + h·Π(K) − e^{−rT} h (K − q_α)⁺,
//! ```
//!
//! with `q_α` the lower `α`-quantile of `S_T` under `P`.  Substituting
//! `h = C/Π(K)` and minimizing over `K` yields the first-order condition
//!
//! ```text
//! Π(K*) = (K* − q_α) · ∂Π/∂K |_{K*}    ⟺    E^Q[S_T | S_T ≤ K*] = q_α,
//! ```
//!
//! which pins the optimal strike independently of the budget.  A solution
//! exists iff `q_α < S₀e^{rT}` (the quantile sits below the forward); the
//! optimal fraction is `h* = C/Π(K*)`, capped at full coverage.  Since the
//! strike does not move with `C`, the frontier `C ↦ VaR*` is affine with
//! negative slope `(Π(K*) − e^{−rT}(K* − q_α))/Π(K*)`, and the minimum cost
//! of reaching a target VaR follows by inverting that line.

use crate::error::{Error, Result};
use crate::model::{MarketSetup, RegimeModel};
use crate::quad::QuadratureSpec;
use crate::risk::quantile;
use crate::root::{brent, BrentCfg};
use crate::transform::{put_price, put_strike_derivative};

/// Which constraint of the hedging program binds at the optimum.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Boundary {
    /// The budget constraint alone binds: `h* = C/Π(K*) ≤ 1`.
    Interior,
    /// The coverage cap binds: `h = 1` and the budget is spent by moving the
    /// strike up until `Π(K) = C`.
    FractionCapped,
    /// No strike satisfies the optimality condition because the quantile
    /// sits at or above the forward; the position stays unhedged.
    Infeasible,
}

/// Solved hedging program: strategy, its risk figures, and the binding regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HedgeSolution {
    /// Optimal put strike; `None` when the program is infeasible.
    pub strike: Option<f64>,
    /// Hedge fraction `h* ∈ [0, 1]` (zero for a zero budget or infeasibility).
    pub fraction: f64,
    /// Premium of one put at the solved strike; `None` when infeasible.
    pub put0: Option<f64>,
    /// Lower `α`-quantile of `S_T` under `P` used by the program.
    pub quantile: f64,
    /// Value-at-risk without hedging.
    pub unhedged_var: f64,
    /// Value-at-risk of the hedged position.
    pub hedged_var: f64,
    /// Risk reduction `R = 1 − VaR*/VaRᵘ`.
    pub reduction: f64,
    /// Binding regime of the solution.
    pub boundary: Boundary,
}

/// One point of the efficient frontier `C ↦ VaR*`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontierPoint {
    /// Hedging budget spent.
    pub budget: f64,
    /// Value-at-risk attained with that budget.
    pub hedged_var: f64,
    /// Optimal hedge fraction at that budget.
    pub fraction: f64,
}

/// Closed-form affine frontier `VaR*(C) = intercept + slope·C`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FrontierLine {
    /// Unhedged value-at-risk (`C = 0` endpoint).
    pub intercept: f64,
    /// Marginal VaR reduction per unit of budget; negative in the interior
    /// regime: `(Π(K*) − e^{−rT}(K* − q_α))/Π(K*)`.
    pub slope: f64,
}

/// Solution of the dual problem: cheapest hedge attaining a target VaR.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MinCostSolution {
    /// Minimum budget `C*`.
    pub cost: f64,
    /// Optimal strike (identical to the primal `K*`).
    pub strike: f64,
    /// Hedge fraction `h* = C*/Π(K*)`.
    pub fraction: f64,
}

/// Strike search never looks beyond this multiple of spot.
const STRIKE_CAP_MULT: f64 = 1e3;
/// Geometric growth factor for strike brackets.
const GROWTH: f64 = 1.6;
/// Relative slack when comparing the quantile against the forward.
const FORWARD_SLACK: f64 = 1e-12;

fn strike_root_cfg(s0: f64) -> BrentCfg {
    BrentCfg {
        x_tol: 1e-11 * s0.max(1.0),
        f_tol: 1e-10 * s0.max(1.0),
        max_iter: 200,
    }
}

/// Optimal put strike `K*` for hedging the `α`-tail at quantile `q_alpha`.
///
/// Solves the first-order condition `F(K) = Π(K) − (K − q)·∂Π/∂K = 0` by a
/// bracketed Brent search on `[q(1+1e−9), K_hi]`, growing `K_hi`
/// geometrically until `F` changes sign.  `F(q⁺) = Π(q) > 0` and `F` turns
/// negative once the truncated mean catches up with `q`, so the bracket is
/// guaranteed whenever the existence condition `q < S₀e^{rT}` holds; if the
/// search passes `10³·S₀` without a sign change the condition is treated as
/// numerically violated.
pub fn optimal_strike(
    q_alpha: f64,
    t: f64,
    q_model: &RegimeModel,
    s0: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    q_model.ensure_valid()?;
    let rate = q_model.require_risk_neutral("optimal_strike")?;
    if !(q_alpha > 0.0) || !q_alpha.is_finite() {
        return Err(Error::arg(format!(
            "quantile must be positive, got {q_alpha}"
        )));
    }
    if !(s0 > 0.0) || !s0.is_finite() {
        return Err(Error::arg(format!("s0 must be positive, got {s0}")));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::arg(format!("horizon must be positive, got {t}")));
    }
    let forward = s0 * (rate * t).exp();
    if q_alpha >= forward * (1.0 - FORWARD_SLACK) {
        return Err(Error::Infeasible {
            quantile: q_alpha,
            forward,
        });
    }

    let foc = |k: f64| -> Result<f64> {
        let pi = put_price(k, t, q_model, s0, quad)?;
        let slope = put_strike_derivative(k, t, q_model, s0, quad)?;
        Ok(pi - (k - q_alpha) * slope)
    };

    let cap = STRIKE_CAP_MULT * s0;
    let mut lo = q_alpha * (1.0 + 1e-9);
    let f_lo = foc(lo)?;
    if f_lo < 0.0 {
        // Π(q) is zero to machine precision only when q is far outside the
        // support; the optimum is then indistinguishable from q itself.
        return Ok(lo);
    }
    let mut hi = (lo * GROWTH).max(s0.min(cap));
    loop {
        let f_hi = foc(hi)?;
        if f_hi < 0.0 {
            break;
        }
        if f_hi == 0.0 {
            return Ok(hi);
        }
        lo = hi;
        if hi >= cap {
            // Existence re-check: the quantile is so close to the forward
            // that the optimal strike escapes any reasonable search range.
            return Err(Error::Infeasible {
                quantile: q_alpha,
                forward,
            });
        }
        hi = (hi * GROWTH).min(cap);
    }
    brent(foc, lo, hi, &strike_root_cfg(s0))
}

/// Solves the budget-constrained VaR-minimization program.
///
/// Pipeline: `q = quantile(α, P)`; infeasible if `q ≥ S₀e^{rT}` (unhedged
/// figures are reported); otherwise `K* = optimal_strike`, `h* = C/Π(K*)`.
/// When `h* ≤ 1` the solution is interior; otherwise the coverage cap binds
/// and the budget is spent at full coverage by solving `Π(K) = C` for the
/// strike, which is unique by monotonicity of the put premium.
pub fn solve_hedge(
    setup: &MarketSetup,
    p_model: &RegimeModel,
    q_model: &RegimeModel,
    quad: &QuadratureSpec,
) -> Result<HedgeSolution> {
    setup.ensure_valid()?;
    q_model.ensure_valid()?;
    let q_rate = q_model.require_risk_neutral("solve_hedge")?;
    if (q_rate - setup.rate).abs() > 1e-12 * setup.rate.abs().max(1.0) {
        return Err(Error::arg(format!(
            "risk-neutral model rate {q_rate} disagrees with setup rate {}",
            setup.rate
        )));
    }

    let t = setup.horizon;
    let s0 = setup.spot;
    let disc = setup.discount();
    let q = quantile(setup.confidence, t, p_model, s0, quad)?;
    let unhedged = s0 - disc * q;
    let forward = setup.forward();

    if q >= forward * (1.0 - FORWARD_SLACK) {
        return Ok(HedgeSolution {
            strike: None,
            fraction: 0.0,
            put0: None,
            quantile: q,
            unhedged_var: unhedged,
            hedged_var: unhedged,
            reduction: 0.0,
            boundary: Boundary::Infeasible,
        });
    }

    let k_star = optimal_strike(q, t, q_model, s0, quad)?;
    let premium = put_price(k_star, t, q_model, s0, quad)?;
    let budget = setup.budget;

    if budget == 0.0 || premium <= 0.0 {
        return Ok(HedgeSolution {
            strike: Some(k_star),
            fraction: 0.0,
            put0: Some(premium),
            quantile: q,
            unhedged_var: unhedged,
            hedged_var: unhedged,
            reduction: 0.0,
            boundary: Boundary::Interior,
        });
    }

    let fraction = budget / premium;
    if fraction <= 1.0 {
        let hedged = unhedged + fraction * premium - disc * fraction * (k_star - q).max(0.0);
        return Ok(HedgeSolution {
            strike: Some(k_star),
            fraction,
            put0: Some(premium),
            quantile: q,
            unhedged_var: unhedged,
            hedged_var: hedged,
            reduction: 1.0 - hedged / unhedged,
            boundary: Boundary::Interior,
        });
    }

    // Coverage cap binds: h = 1, spend the budget by raising the strike.
    let cap = STRIKE_CAP_MULT * s0;
    let max_premium = put_price(cap, t, q_model, s0, quad)?;
    if budget > max_premium {
        return Err(Error::BudgetTooLarge { budget });
    }
    let k_cap = brent(
        |k| Ok(put_price(k, t, q_model, s0, quad)? - budget),
        k_star,
        cap,
        &strike_root_cfg(s0),
    )?;
    let hedged = unhedged + budget - disc * (k_cap - q).max(0.0);
    Ok(HedgeSolution {
        strike: Some(k_cap),
        fraction: 1.0,
        put0: Some(budget),
        quantile: q,
        unhedged_var: unhedged,
        hedged_var: hedged,
        reduction: 1.0 - hedged / unhedged,
        boundary: Boundary::FractionCapped,
    })
}

/// Evaluates the efficient frontier `C ↦ VaR*` on an ascending budget grid.
///
/// Each budget is solved independently through [`solve_hedge`]; the affine
/// closed form implied by the C-free optimal strike is returned alongside so
/// callers can detect drift between pointwise solves and the line.  All
/// budgets must land in the interior regime.
pub fn efficient_frontier(
    setup: &MarketSetup,
    p_model: &RegimeModel,
    q_model: &RegimeModel,
    budgets: &[f64],
    quad: &QuadratureSpec,
) -> Result<(Vec<FrontierPoint>, FrontierLine)> {
    if budgets.is_empty() {
        return Err(Error::arg("budget grid must be non-empty"));
    }
    for pair in budgets.windows(2) {
        if !(pair[1] >= pair[0]) {
            return Err(Error::arg("budget grid must be ascending"));
        }
    }
    if !(budgets[0] >= 0.0) || budgets.iter().any(|c| !c.is_finite()) {
        return Err(Error::arg("budgets must be finite and non-negative"));
    }

    let mut points = Vec::with_capacity(budgets.len());
    let mut reference: Option<HedgeSolution> = None;
    for &budget in budgets {
        let mut scenario = *setup;
        scenario.budget = budget;
        let sol = solve_hedge(&scenario, p_model, q_model, quad)?;
        match sol.boundary {
            Boundary::Interior => {}
            Boundary::FractionCapped => {
                return Err(Error::NotInterior {
                    budget,
                    fraction: sol.fraction,
                });
            }
            Boundary::Infeasible => {
                return Err(Error::Infeasible {
                    quantile: sol.quantile,
                    forward: setup.forward(),
                });
            }
        }
        points.push(FrontierPoint {
            budget,
            hedged_var: sol.hedged_var,
            fraction: sol.fraction,
        });
        reference.get_or_insert(sol);
    }

    let sol = reference.expect("non-empty grid produced at least one solution");
    let premium = sol.put0.expect("interior solution carries a premium");
    let k_star = sol.strike.expect("interior solution carries a strike");
    let disc = setup.discount();
    let line = FrontierLine {
        intercept: sol.unhedged_var,
        slope: (premium - disc * (k_star - sol.quantile)) / premium,
    };
    Ok((points, line))
}

/// Cheapest budget whose optimal hedge attains the target value-at-risk.
///
/// Because the frontier is affine with the C-free strike `K*`, the dual
/// problem inverts the line: `C* = (v − VaRᵘ)·Π(K*)/(Π(K*) − e^{−rT}(K* −
/// q_α))`, with `h* = C*/Π(K*)`.  Targets above the unhedged VaR are
/// rejected; targets below the full-coverage floor are unattainable with
/// puts struck at `K*`.
pub fn min_cost_for_target(
    setup: &MarketSetup,
    p_model: &RegimeModel,
    q_model: &RegimeModel,
    target: f64,
    quad: &QuadratureSpec,
) -> Result<MinCostSolution> {
    setup.ensure_valid()?;
    if !target.is_finite() {
        return Err(Error::arg(format!("target VaR must be finite, got {target}")));
    }
    let q_rate = q_model.require_risk_neutral("min_cost_for_target")?;
    if (q_rate - setup.rate).abs() > 1e-12 * setup.rate.abs().max(1.0) {
        return Err(Error::arg(format!(
            "risk-neutral model rate {q_rate} disagrees with setup rate {}",
            setup.rate
        )));
    }
    let t = setup.horizon;
    let s0 = setup.spot;
    let disc = setup.discount();
    let q = quantile(setup.confidence, t, p_model, s0, quad)?;
    let unhedged = s0 - disc * q;
    let forward = setup.forward();
    if q >= forward * (1.0 - FORWARD_SLACK) {
        return Err(Error::Infeasible {
            quantile: q,
            forward,
        });
    }

    let slack = 1e-9 * s0;
    if target > unhedged + slack {
        return Err(Error::arg(format!(
            "target VaR {target} exceeds the unhedged VaR {unhedged}; no hedge is needed"
        )));
    }

    let k_star = optimal_strike(q, t, q_model, s0, quad)?;
    let premium = put_price(k_star, t, q_model, s0, quad)?;
    let slope = (premium - disc * (k_star - q)) / premium;
    let floor = unhedged + slope * premium;
    if target < floor - slack {
        return Err(Error::TargetUnattainable { target, floor });
    }

    let cost = ((target - unhedged) / slope).max(0.0);
    Ok(MinCostSolution {
        cost,
        strike: k_star,
        fraction: (cost / premium).clamp(0.0, 1.0),
    })
}
