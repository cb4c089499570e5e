//! Quantiles, unhedged value-at-risk, and the hedged-loss distribution.
//!
//! The discounted loss of an unhedged position is `Lᵘ = S₀ − e^{−rT} S_T`,
//! so its `α`-tail value-at-risk is
//!
//! ```text
//! VaR_α(Lᵘ) = S₀ − e^{−rT} q_α(S_T),        P{S_T < q_α} = α,
//! ```
//!
//! the discounted distance from spot to the lower `α`-quantile of the
//! terminal price.  [`quantile`] recovers `q_α` by solving
//! `tail_prob(q) = α` with a bracketed root search; the bracket is seeded
//! from the mean and standard deviation of `X_T = ln(S_T/S₀)` obtained by
//! differentiating the characteristic function at the origin, and widened
//! geometrically if the root escapes.
//!
//! A static put hedge `h · (K − S_T)⁺` financed at premium `put0` maps the
//! unhedged loss through the concave piecewise-linear transform
//!
//! ```text
//! g(u) = u − h (u − K̄)⁺ + h·put0,        K̄ = S₀ − e^{−rT} K,
//! ```
//!
//! so the hedged loss is `L^{h,K} = g(Lᵘ)` pathwise.  Because `g` is
//! non-decreasing (strictly increasing for `h < 1`), quantiles of the hedged
//! loss are images of quantiles of the unhedged loss; [`hedged_var`] and
//! [`hedged_loss_tail_prob`] exploit this monotone coupling instead of ever
//! discretising the hedged-loss density.

use crate::error::{Error, Result};
use crate::model::{MarketSetup, RegimeModel};
use crate::quad::QuadratureSpec;
use crate::root::{brent, BrentCfg};
use crate::transform::tail_prob;

/// Static put-hedge position descriptor for loss-distribution queries.
///
/// Describes the hedged loss `L^{h,K} = g(Lᵘ)`.  The fraction `h` lies in
/// `[0, 1]`: `h = 0` is the degenerate no-hedge probe and `h = 1` the full
/// hedge, whose flat `g` segment is inverted with the infimum convention.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LossSpec {
    /// Market data (spot, rate, horizon, tail level, budget).
    pub setup: MarketSetup,
    /// Hedge fraction `h ∈ [0, 1]` of the position covered by puts.
    pub fraction: f64,
    /// Put strike `K > 0`.
    pub strike: f64,
    /// Time-0 premium of one put with strike `K` and maturity `T`.
    pub put0: f64,
}

impl LossSpec {
    /// Loss level `K̄ = S₀ − e^{−rT} K` at which the hedge kink activates.
    pub fn strike_loss_level(&self) -> f64 {
        self.setup.spot - self.setup.discount() * self.strike
    }

    pub(crate) fn ensure_valid(&self) -> Result<()> {
        self.setup.ensure_valid()?;
        if !(self.fraction >= 0.0 && self.fraction <= 1.0) || !self.fraction.is_finite() {
            return Err(Error::arg(format!(
                "hedge fraction must lie in [0, 1], got {}",
                self.fraction
            )));
        }
        if !(self.strike > 0.0) || !self.strike.is_finite() {
            return Err(Error::arg(format!(
                "strike must be positive, got {}",
                self.strike
            )));
        }
        if !(self.put0 >= 0.0) || !self.put0.is_finite() {
            return Err(Error::arg(format!(
                "put premium must be non-negative, got {}",
                self.put0
            )));
        }
        Ok(())
    }
}

/// Widest bracket considered before declaring the model corrupt.
const BRACKET_FLOOR: f64 = 1e-8;
const BRACKET_CEIL: f64 = 1e8;

/// Residual target on `tail_prob(q) − α`; the root-finder contract is 1e−10.
const QUANTILE_F_TOL: f64 = 1e-11;

/// `α`-quantile of the terminal price: the unique `q` with `P{S_T < q} = α`.
///
/// The initial bracket is `[S₀ e^{m−8s}, S₀ e^{m+8s}]` with `(m, s)` the mean
/// and standard deviation of `X_T`; the half-width doubles until the root is
/// straddled, clamped to `[S₀·1e−8, S₀·1e8]`.  A Brent iteration (bisection-
/// safeguarded secant / inverse quadratic steps, so the expensive CDF is
/// evaluated as few times as possible) then polishes to residual `< 1e−10`.
pub fn quantile(
    alpha: f64,
    t: f64,
    p_model: &RegimeModel,
    s0: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    p_model.ensure_valid()?;
    p_model.require_historical("quantile")?;
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::arg(format!(
            "quantile level must lie in (0, 1), got {alpha}"
        )));
    }
    if !(s0 > 0.0) || !s0.is_finite() {
        return Err(Error::arg(format!("s0 must be positive, got {s0}")));
    }
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::arg(format!("horizon must be positive, got {t}")));
    }

    let (m, s) = p_model.log_moments(t)?;
    let spread = s.max(1e-6);
    let log_s0 = s0.ln();
    let lo_bound = s0 * BRACKET_FLOOR;
    let hi_bound = s0 * BRACKET_CEIL;

    let cdf = |q: f64| tail_prob(q, t, p_model, s0, quad);

    let mut width = 8.0 * spread;
    let mut lo = (log_s0 + m - width).exp().clamp(lo_bound, hi_bound);
    let mut hi = (log_s0 + m + width).exp().clamp(lo_bound, hi_bound);
    let mut f_lo = cdf(lo)? - alpha;
    let mut f_hi = cdf(hi)? - alpha;
    while f_lo > 0.0 || f_hi < 0.0 {
        width *= 2.0;
        let mut grew = false;
        if f_lo > 0.0 {
            let next = (log_s0 + m - width).exp().clamp(lo_bound, hi_bound);
            if next < lo {
                lo = next;
                f_lo = cdf(lo)? - alpha;
                grew = true;
            }
        }
        if f_hi < 0.0 {
            let next = (log_s0 + m + width).exp().clamp(lo_bound, hi_bound);
            if next > hi {
                hi = next;
                f_hi = cdf(hi)? - alpha;
                grew = true;
            }
        }
        if !grew {
            return Err(Error::BracketFailure(format!(
                "terminal CDF does not straddle {alpha} on [{lo:.6e}, {hi:.6e}]; \
                 the model is numerically corrupt"
            )));
        }
    }

    let cfg = BrentCfg {
        x_tol: 1e-13 * s0.max(1.0),
        f_tol: QUANTILE_F_TOL,
        max_iter: 200,
    };
    brent(|q| Ok(cdf(q)? - alpha), lo, hi, &cfg)
}

/// Value-at-risk of the unhedged discounted loss at the setup's tail level.
///
/// Returns `S₀ − e^{−rT} q_α(S_T)` where `q_α` is the lower `α`-quantile of
/// the terminal price under `P` — equivalently the `(1−α)`-exceedance
/// quantile of the loss itself.
pub fn var_unhedged(
    setup: &MarketSetup,
    p_model: &RegimeModel,
    quad: &QuadratureSpec,
) -> Result<f64> {
    setup.ensure_valid()?;
    let q = quantile(setup.confidence, setup.horizon, p_model, setup.spot, quad)?;
    Ok(setup.spot - setup.discount() * q)
}

/// Concave hedge transform `g(u) = u − h (u − K̄)⁺ + h·put0`.
pub fn g_transform(u: f64, loss: &LossSpec) -> f64 {
    let kink = loss.strike_loss_level();
    u - loss.fraction * (u - kink).max(0.0) + loss.fraction * loss.put0
}

/// Inverse of [`g_transform`] in `u`; `+∞` above the `h = 1` loss cap.
///
/// For `h < 1` the transform is a strictly increasing piecewise-linear map
/// and the inverse is exact.  For `h = 1` the graph is flat above the kink:
/// values on the flat level `K̄ + put0` invert to the infimum `K̄ + put0 − put0
/// = v − put0` branch, and values strictly above it are never attained, so the
/// inverse is `+∞` (no loss level reaches them).
pub fn g_inverse(v: f64, loss: &LossSpec) -> f64 {
    let kink = loss.strike_loss_level();
    let base = v - loss.fraction * loss.put0;
    if base <= kink {
        base
    } else if loss.fraction < 1.0 {
        kink + (base - kink) / (1.0 - loss.fraction)
    } else {
        f64::INFINITY
    }
}

/// Value-at-risk of the hedged loss, given the `α`-quantile of `S_T`.
///
/// `quantile_alpha` must be the lower `α`-quantile of the terminal price
/// under `P` at the setup's tail level, so that `S₀ − e^{−rT}·quantile_alpha`
/// is the unhedged VaR.  Monotonicity of `g` gives
///
/// ```text
/// VaR_α(L^{h,K}) = VaR_α(Lᵘ) + h·put0 − e^{−rT} h (K − q_α)⁺ = g(VaR_α(Lᵘ)),
/// ```
///
/// which is below the unhedged VaR exactly when the strike exceeds the
/// quantile by more than the future value of the premium.
pub fn hedged_var(loss: &LossSpec, quantile_alpha: f64) -> f64 {
    let disc = loss.setup.discount();
    let var_u = loss.setup.spot - disc * quantile_alpha;
    var_u + loss.fraction * loss.put0
        - disc * loss.fraction * (loss.strike - quantile_alpha).max(0.0)
}

/// Exceedance probability `P{L^{h,K} ≥ v}` of the hedged loss under `P`.
///
/// Uses the monotone coupling `L^{h,K} = g(Lᵘ)`:
///
/// ```text
/// P{L^{h,K} ≥ v} = P{Lᵘ ≥ g⁻¹(v)} = P{S_T ≤ e^{rT}(S₀ − g⁻¹(v))},
/// ```
///
/// evaluated with a single Fourier tail probability.  Levels above the
/// `h = 1` loss cap have probability zero; levels below every attainable
/// loss give one.
pub fn hedged_loss_tail_prob(
    v: f64,
    loss: &LossSpec,
    p_model: &RegimeModel,
    quad: &QuadratureSpec,
) -> Result<f64> {
    loss.ensure_valid()?;
    p_model.ensure_valid()?;
    p_model.require_historical("hedged_loss_tail_prob")?;
    let u = g_inverse(v, loss);
    if u == f64::INFINITY {
        return Ok(0.0);
    }
    let level = (loss.setup.rate * loss.setup.horizon).exp() * (loss.setup.spot - u);
    if level <= 0.0 {
        // The required unhedged loss exceeds the spot, i.e. S_T ≤ 0: impossible.
        return Ok(0.0);
    }
    tail_prob(level, loss.setup.horizon, p_model, loss.setup.spot, quad)
}
