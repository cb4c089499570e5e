//! Generalized Fourier transforms (GFTs) of the terminal log-return `X_T`.
//!
//! Conditional on the regime path, `X_T` is Gaussian-plus-compound-Poisson;
//! integrating the chain out gives the occupation-time representation
//!
//! ```text
//! φ_T(z) = E[e^{izX_T}] = 1′ · exp( (Q′ + i·diag(ϑ_1(z), …, ϑ_M(z))) T ) · e_{α₀},
//! ```
//!
//! where `Q′` is the transposed chain generator and the per-regime exponents
//! are
//!
//! ```text
//! ϑ_j(z) = z ξ(j) + ½ i z² σ_j² − i λ_j (φ^Y_j(z) − 1),
//! φ^Y_j(z) = exp(i z a_j − ½ z² b_j²).
//! ```
//!
//! All functions accept complex `z`, which is what lets the inversion layer
//! run along damped contours `z = u + iν`.  The transform is evaluated three
//! ways: a scalar closed form for one regime, an explicit eigenvalue closed
//! form for two regimes (the workhorse of the numerical experiments), and
//! the matrix exponential for the general case.  The two-regime form follows
//! from the quadratic characteristic polynomial of `Q′ + iθE₁₁`; its roots
//! collide for exceptional parameter combinations, where a confluent limit
//! takes over.

use ndarray::Array2;

use crate::error::{Error, Result};
use crate::expm::expm;
use crate::model::{JumpLaw, RegimeModel};
use crate::Complex;

fn ci(re: f64) -> Complex {
    Complex::new(re, 0.0)
}

const I: Complex = Complex::new(0.0, 1.0);

/// GFT of a single Gaussian log-jump: `E[e^{izY}] = exp(iza − ½z²b²)`.
pub fn jump_gft(jump: &JumpLaw, z: Complex) -> Complex {
    (I * z * ci(jump.mean) - z * z * ci(0.5 * jump.std * jump.std)).exp()
}

/// Per-regime Lévy exponents `ϑ_j(z)` under the model's own measure.
pub fn regime_exponents(z: Complex, model: &RegimeModel) -> Vec<Complex> {
    (0..model.state_count())
        .map(|j| {
            let rg = &model.regimes[j];
            z * ci(model.xi(j)) + ci(0.5) * I * z * z * ci(rg.sigma * rg.sigma)
                - I * ci(rg.lambda) * (jump_gft(&rg.jump, z) - ci(1.0))
        })
        .collect()
}

/// GFT of `X_T` through the matrix exponential; valid for any state count.
pub fn gft_matrix(z: Complex, t: f64, model: &RegimeModel) -> Result<Complex> {
    let m = model.state_count();
    let theta = regime_exponents(z, model);
    let mut a: Array2<Complex> = Array2::zeros((m, m));
    for i in 0..m {
        for j in 0..m {
            // Transposed generator, then the regime exponents down the diagonal.
            a[(i, j)] = ci(model.generator[(j, i)] * t);
        }
        a[(i, i)] += I * theta[i] * ci(t);
    }
    let e = expm(&a)?;
    let s0 = model.initial_state - 1;
    let mut phi = Complex::new(0.0, 0.0);
    for i in 0..m {
        phi += e[(i, s0)];
    }
    ensure_finite(phi, z)
}

/// Closed form for a single regime: `φ(z) = exp(iϑ₁(z)T)`.
pub fn gft_single(z: Complex, t: f64, model: &RegimeModel) -> Result<Complex> {
    let theta = regime_exponents(z, model);
    ensure_finite((I * theta[0] * ci(t)).exp(), z)
}

/// Occupation-time transforms `(q₁ᵀ, q₂ᵀ)` of the two-state chain.
///
/// With `θ = ϑ₁ − ϑ₂`, `q₁ = q₁₂`, `q₂ = q₂₁`, the matrix `Q′ + iθE₁₁` has
/// characteristic polynomial `y² + (q₁ + q₂ − iθ)y − iθq₂`; with roots
/// `y₁, y₂` the column sums of its exponential are
///
/// ```text
/// q₁ᵀ = [e^{y₁T}(y₁ + q₁ + q₂) − e^{y₂T}(y₂ + q₁ + q₂)] / (y₁ − y₂),
/// q₂ᵀ = [e^{y₁T}(y₁ + q₁ + q₂ − iθ) − e^{y₂T}(y₂ + q₁ + q₂ − iθ)] / (y₁ − y₂).
/// ```
///
/// When the roots (nearly) collide the divided difference degenerates; the
/// limit `y₁ = y₂ = y` gives `q₁ᵀ = e^{yT}(1 + T(y + q₁ + q₂))` and
/// `q₂ᵀ = e^{yT}(1 + T(y + q₁ + q₂ − iθ))`, entered when the discriminant
/// is negligible against the squared coefficient scale.
fn occupation_cf(theta: Complex, q1: f64, q2: f64, t: f64) -> (Complex, Complex) {
    let qsum = ci(q1 + q2);
    let b = qsum - I * theta;
    let c = -I * theta * ci(q2);
    let disc = b * b - ci(4.0) * c;
    // Cancellation-aware scale: |b| can be tiny through q₁+q₂ ≈ iθ even
    // when both terms are large.
    let scale = ((q1 + q2).abs() + theta.norm()).powi(2).max(4.0 * c.norm());
    if disc.norm() <= 1e-12 * scale.max(1e-300) {
        let y = -b * ci(0.5);
        let growth = (y * ci(t)).exp();
        let q1t = growth * (ci(1.0) + ci(t) * (y + qsum));
        let q2t = growth * (ci(1.0) + ci(t) * (y + qsum - I * theta));
        return (q1t, q2t);
    }
    let sq = disc.sqrt();
    // Pick the root that avoids cancellation against b, recover the other
    // from the product y₁y₂ = c.
    let s = if (b.conj() * sq).re >= 0.0 { sq } else { -sq };
    let y_big = -(b + s) * ci(0.5);
    let y_small = if y_big.norm() > 0.0 { c / y_big } else { y_big };
    let (y1, y2) = (y_big, y_small);
    let e1 = (y1 * ci(t)).exp();
    let e2 = (y2 * ci(t)).exp();
    let denom = y1 - y2;
    let q1t = (e1 * (y1 + qsum) - e2 * (y2 + qsum)) / denom;
    let q2t = (e1 * (y1 + qsum - I * theta) - e2 * (y2 + qsum - I * theta)) / denom;
    (q1t, q2t)
}

/// GFT of `X_T` for exactly two regimes via the eigenvalue closed form:
/// `φ(z) = e^{iϑ₂(z)T} q_{α₀}ᵀ(ϑ₁(z) − ϑ₂(z))`.
pub fn gft_two_state(z: Complex, t: f64, model: &RegimeModel) -> Result<Complex> {
    if model.state_count() != 2 {
        return Err(Error::Dimension(format!(
            "two-state transform called on a {}-state model",
            model.state_count()
        )));
    }
    let exps = regime_exponents(z, model);
    let theta = exps[0] - exps[1];
    let q1 = model.generator[(0, 1)];
    let q2 = model.generator[(1, 0)];
    let (q1t, q2t) = occupation_cf(theta, q1, q2, t);
    let base = (I * exps[1] * ci(t)).exp();
    let occ = if model.initial_state == 1 { q1t } else { q2t };
    ensure_finite(base * occ, z)
}

/// GFT of `X_T`, dispatching to the cheapest evaluation for the state count.
pub fn gft(z: Complex, t: f64, model: &RegimeModel) -> Result<Complex> {
    match model.state_count() {
        1 => gft_single(z, t, model),
        2 => gft_two_state(z, t, model),
        _ => gft_matrix(z, t, model),
    }
}

fn ensure_finite(phi: Complex, z: Complex) -> Result<Complex> {
    if phi.re.is_finite() && phi.im.is_finite() {
        Ok(phi)
    } else {
        Err(Error::NonFiniteCharfun { re: z.re, im: z.im })
    }
}

impl RegimeModel {
    /// Generalized Fourier transform `E[e^{izX_T}]` of the log-return.
    pub fn charfun(&self, z: Complex, t: f64) -> Result<Complex> {
        gft(z, t, self)
    }

    /// Mean and standard deviation of `X_T`, from central differences of the
    /// transform at the origin.
    ///
    /// Used for bracketing quantile searches; accurate to `O(h²)` which is
    /// far more than bracketing needs.
    pub fn log_moments(&self, t: f64) -> Result<(f64, f64)> {
        let h = 5e-3;
        let plus = gft(ci(h), t, self)?;
        let minus = gft(ci(-h), t, self)?;
        let mean = (plus.im - minus.im) / (2.0 * h);
        let second = (2.0 - plus.re - minus.re) / (h * h);
        let var = (second - mean * mean).max(1e-12);
        Ok((mean, var.sqrt()))
    }
}
