//! European put prices and loss-tail probabilities by contour inversion of
//! the generalized Fourier transform.
//!
//! Both quantities are damped-transform integrals along `z = u + iν` in the
//! regularity strip of `φ = φ_{X_T}` (Carr–Madan style).  With `k = ln K`
//! and `ν > 1`:
//!
//! ```text
//! put(K) = e^{−rT} (e^{νk} S₀^{1−ν} / π) ·
//!          Re ∫₀^∞ e^{−iu(k − ln S₀)} φ(u + i(ν−1))
//!                   / (ν² − ν − u² + iu(1 − 2ν)) du,
//! ```
//!
//! and for the lower tail of the terminal price, with `κ = ln(v/S₀)` and
//! `ν > 0`:
//!
//! ```text
//! P{S_T < v} = ((v/S₀)^ν / π) · Re ∫₀^∞ e^{−iuκ} φ(u + iν) / (ν − iu) du.
//! ```
//!
//! For far upper-tail levels the prefactor `(v/S₀)^ν` amplifies quadrature
//! noise; there the contour is mirrored below the real axis, which crosses
//! the pole of `φ(z)/z` at the origin and picks up its residue, turning the
//! same integral into a correction on `1` instead.
//!
//! The quadrature envelope comes from the diffusion part of the transform:
//! `|φ(u + iν)| ≤ |φ(iν)| e^{−½σ²_min T u²}`, with σ_min the smallest
//! regime volatility.

use crate::charfun::gft;
use crate::error::{Error, Result};
use crate::model::RegimeModel;
use crate::quad::{integrate_halfline, Decay, QuadratureSpec};
use crate::Complex;

const I: Complex = Complex::new(0.0, 1.0);

fn ci(re: f64) -> Complex {
    Complex::new(re, 0.0)
}

/// Slack allowed before an out-of-range probability is treated as a contour
/// failure rather than harmless roundoff.
const PROB_SLACK: f64 = 1e-6;

/// Log-prefactor size above which the tail integral flips to the mirrored
/// contour (prefactor beyond ~e⁷ ≈ 10³ would amplify absolute error).
const FLIP_THRESHOLD: f64 = 7.0;

fn gaussian_envelope(model: &RegimeModel, t: f64, scale: f64, osc_freq: f64) -> Decay {
    let sigma_min = model
        .regimes
        .iter()
        .map(|rg| rg.sigma)
        .fold(f64::INFINITY, f64::min);
    Decay::gaussian(scale, 0.5 * sigma_min * sigma_min * t, osc_freq)
}

/// Present value of the European put with strike `K` and maturity `T` under
/// the risk-neutral model.
pub fn put_price(
    strike: f64,
    t: f64,
    q_model: &RegimeModel,
    s0: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    q_model.ensure_valid()?;
    let rate = q_model.require_risk_neutral("put_price")?;
    check_positive(strike, "strike")?;
    check_positive(s0, "s0")?;
    check_positive(t, "t")?;
    let nu = quad.price_nu;
    if !(nu > 1.0) || !nu.is_finite() {
        return Err(Error::InvalidContour {
            nu,
            requirement: "price integrals need nu > 1",
        });
    }
    let k = strike.ln();
    let log_moneyness = k - s0.ln();
    let contour = Complex::new(0.0, nu - 1.0);
    let denom = |u: f64| {
        let z = Complex::new(u, 0.0);
        ci(nu * nu - nu) - z * z + I * z * ci(1.0 - 2.0 * nu)
    };
    let integrand = |u: f64| -> Result<f64> {
        let phi = gft(Complex::new(u, 0.0) + contour, t, q_model)?;
        let osc = (-I * ci(u * log_moneyness)).exp();
        Ok((osc * phi / denom(u)).re)
    };
    let at_zero = (gft(contour, t, q_model)?/ denom(0.0)).norm();
    let envelope = gaussian_envelope(q_model, t, at_zero.max(1e-12), log_moneyness.abs());
    let prefactor = (-rate * t).exp() * (nu * log_moneyness).exp() * s0 / std::f64::consts::PI;
    let inner_spec = quad.with_abs_tol(quad.abs_tol / prefactor.max(1e-300));
    let integral = integrate_halfline(integrand, &inner_spec, &envelope)?;
    let price = prefactor * integral;
    let upper = (-rate * t).exp() * strike;
    if price < -PROB_SLACK * upper.max(1.0) || price > upper * (1.0 + PROB_SLACK) + PROB_SLACK {
        return Err(Error::ProbabilityOutOfRange { value: price });
    }
    Ok(price.clamp(0.0, upper))
}

/// European call by put–call parity: `call = put + S₀ − e^{−rT}K`.
pub fn call_price(
    strike: f64,
    t: f64,
    q_model: &RegimeModel,
    s0: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let rate = q_model.require_risk_neutral("call_price")?;
    let put = put_price(strike, t, q_model, s0, quad)?;
    Ok((put + s0 - (-rate * t).exp() * strike).max(0.0))
}

/// Lower-tail probability `P{S_T < v}` under the model's own measure.
pub fn tail_prob(
    level: f64,
    t: f64,
    model: &RegimeModel,
    s0: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    model.ensure_valid()?;
    check_positive(level, "level")?;
    check_positive(s0, "s0")?;
    check_positive(t, "t")?;
    let nu = quad.prob_nu;
    if !(nu > 0.0) || !nu.is_finite() {
        return Err(Error::InvalidContour {
            nu,
            requirement: "probability integrals need nu > 0",
        });
    }
    let log_level = (level / s0).ln();
    // Deep in the upper tail the damped integral computes a number of size
    // e^{−ν·κ} against an O(1) oscillating integrand; run on the mirrored
    // contour instead, where Cauchy's theorem contributes the residue 1 at
    // the origin and the integral becomes a small correction.
    let (signed_nu, base) = if nu * log_level > FLIP_THRESHOLD {
        (-nu, 1.0)
    } else {
        (nu, 0.0)
    };
    let raw = tail_integral(log_level, signed_nu, t, model, quad)?;
    let p = base + raw;
    if !(-PROB_SLACK..=1.0 + PROB_SLACK).contains(&p) {
        return Err(Error::ProbabilityOutOfRange { value: p });
    }
    Ok(p.clamp(0.0, 1.0))
}

/// The damped tail integral `((v/S₀)^ν/π)·Re ∫ e^{−iuκ} φ(u+iν)/(ν−iu) du`
/// for a signed contour height `ν ≠ 0`.
fn tail_integral(
    log_level: f64,
    nu: f64,
    t: f64,
    model: &RegimeModel,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let contour = Complex::new(0.0, nu);
    let integrand = |u: f64| -> Result<f64> {
        let phi = gft(Complex::new(u, 0.0) + contour, t, model)?;
        let osc = (-I * ci(u * log_level)).exp();
        Ok((osc * phi / (ci(nu) - I * ci(u))).re)
    };
    let at_zero = (gft(contour, t, model)? / ci(nu)).norm();
    let envelope = gaussian_envelope(model, t, at_zero.max(1e-12), log_level.abs());
    let prefactor = (nu * log_level).exp() / std::f64::consts::PI;
    let inner_spec = quad.with_abs_tol(quad.abs_tol / prefactor.max(1e-300));
    let integral = integrate_halfline(integrand, &inner_spec, &envelope)?;
    Ok(prefactor * integral)
}

/// Strike derivative of the put premium.
///
/// Differentiating the discounted expectation under the (atomless) terminal
/// law gives `∂Π/∂K = e^{−rT} P^Q{S_T ≤ K}`, so the derivative is a tail
/// probability under the pricing measure.
pub fn put_strike_derivative(
    strike: f64,
    t: f64,
    q_model: &RegimeModel,
    s0: f64,
    quad: &QuadratureSpec,
) -> Result<f64> {
    let rate = q_model.require_risk_neutral("put_strike_derivative")?;
    let p = tail_prob(strike, t, q_model, s0, quad)?;
    Ok((-rate * t).exp() * p)
}

fn check_positive(x: f64, name: &str) -> Result<()> {
    if x > 0.0 && x.is_finite() {
        Ok(())
    } else {
        Err(Error::arg(format!("{name} = {x} must be positive")))
    }
}
