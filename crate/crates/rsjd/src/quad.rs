//! Adaptive Gauss–Lobatto quadrature on the half-line `[0, ∞)`.
//!
//! The inversion integrands are damped oscillators: smooth, oscillating at a
//! known dominant frequency, with an analytically known decay envelope
//! (Gaussian from the diffusion part of the transform, or exponential for
//! test integrands).  The half-line is truncated at the point `U` where the
//! envelope falls below the truncation tolerance, seeded with panels no
//! wider than about one oscillation period, and each panel is refined by the
//! Gander–Gautschi pair: a 7-point Kronrod extension checked against the
//! embedded 4-point Lobatto rule, splitting at the Kronrod nodes until the
//! discrepancy prorated by panel width meets the tolerance.

use crate::error::{Error, Result};

/// Tolerances and budget for one inversion integral.
#[derive(Debug, Clone, Copy)]
pub struct QuadratureSpec {
    /// Damping contour for price integrals; must exceed 1.
    pub price_nu: f64,
    /// Damping contour for probability integrals; must be positive.
    pub prob_nu: f64,
    /// Relative tolerance on the integral value.
    pub rel_tol: f64,
    /// Absolute tolerance on the integral value.
    pub abs_tol: f64,
    /// Envelope level at which the half-line is truncated.
    pub truncation_tol: f64,
    /// Hard cap on the number of panels examined.
    pub max_intervals: usize,
}

impl Default for QuadratureSpec {
    fn default() -> Self {
        QuadratureSpec {
            price_nu: 1.5,
            prob_nu: 1.0,
            rel_tol: 1e-9,
            abs_tol: 1e-12,
            truncation_tol: 1e-14,
            max_intervals: 10_000,
        }
    }
}

impl QuadratureSpec {
    /// Copy of the spec with the absolute tolerance replaced.
    ///
    /// Used by callers that divide a prefactor out of their integrand and
    /// need the integral's absolute error measured in the original units.
    pub fn with_abs_tol(mut self, abs_tol: f64) -> Self {
        self.abs_tol = abs_tol;
        self
    }
}

/// Decay envelope of an integrand on the half-line, used to pick the
/// truncation point and the initial panel layout.
#[derive(Debug, Clone, Copy)]
pub struct Decay {
    /// Bound on `|f|` near the origin.
    pub scale: f64,
    /// Decay coefficient: `|f(u)| ≲ scale·e^{−rate·u²}` (Gaussian) or
    /// `scale·e^{−rate·u}` (exponential).
    pub rate: f64,
    /// Whether the envelope is Gaussian (`true`) or exponential (`false`).
    pub gaussian: bool,
    /// Dominant angular frequency of the oscillation, `≥ 0`.
    pub osc_freq: f64,
}

impl Decay {
    /// Gaussian envelope `scale·e^{−rate·u²}`.
    pub fn gaussian(scale: f64, rate: f64, osc_freq: f64) -> Self {
        Decay { scale, rate, gaussian: true, osc_freq }
    }

    /// Exponential envelope `scale·e^{−rate·u}`.
    pub fn exponential(scale: f64, rate: f64, osc_freq: f64) -> Self {
        Decay { scale, rate, gaussian: false, osc_freq }
    }

    /// Point beyond which the envelope stays below `tol`.
    fn truncation_point(&self, tol: f64) -> Result<f64> {
        if !(self.rate > 0.0) || !self.rate.is_finite() {
            return Err(Error::arg(format!(
                "decay rate = {} must be positive for half-line truncation",
                self.rate
            )));
        }
        let ratio = (self.scale.abs().max(1e-300) / tol).max(std::f64::consts::E);
        let log_ratio = ratio.ln();
        let base = if self.gaussian {
            (log_ratio / self.rate).sqrt()
        } else {
            log_ratio / self.rate
        };
        Ok((1.1 * base).max(2.0))
    }
}

/// Kronrod node offsets: `±1, ±√(2/3), ±1/√5, 0` in half-width units.
const NODE_A: f64 = 0.816496580927726; // √(2/3)
const NODE_B: f64 = 0.447213595499958; // 1/√5

/// 7-point Kronrod weights for `[−1, 1]`, outermost to centre.
const W7: [f64; 4] = [
    77.0 / 1470.0,
    432.0 / 1470.0,
    625.0 / 1470.0,
    672.0 / 1470.0,
];

/// 4-point Lobatto weights for `[−1, 1]`: endpoints and `±1/√5`.
const W4_END: f64 = 1.0 / 6.0;
const W4_MID: f64 = 5.0 / 6.0;

struct Panel {
    a: f64,
    b: f64,
    fa: f64,
    fb: f64,
}

struct Rules {
    /// 7-point Kronrod estimate.
    i7: f64,
    /// Embedded 4-point Lobatto estimate.
    i4: f64,
    /// Interior node positions (between the endpoints).
    x: [f64; 5],
    /// Integrand values at the interior nodes.
    f: [f64; 5],
}

fn eval_panel<F: FnMut(f64) -> Result<f64>>(f: &mut F, p: &Panel) -> Result<Rules> {
    let h = 0.5 * (p.b - p.a);
    let m = 0.5 * (p.a + p.b);
    let x = [
        m - NODE_A * h,
        m - NODE_B * h,
        m,
        m + NODE_B * h,
        m + NODE_A * h,
    ];
    let mut v = [0.0; 5];
    for (vi, xi) in v.iter_mut().zip(x.iter()) {
        *vi = f(*xi)?;
    }
    let i7 = h
        * (W7[0] * (p.fa + p.fb)
            + W7[1] * (v[0] + v[4])
            + W7[2] * (v[1] + v[3])
            + W7[3] * v[2]);
    let i4 = h * (W4_END * (p.fa + p.fb) + W4_MID * (v[1] + v[3]));
    Ok(Rules { i7, i4, x, f: v })
}

/// Integrates `f` over `[0, ∞)`, truncating according to the decay envelope.
///
/// The result satisfies (up to the usual reliability of embedded error
/// estimates) `|error| ≤ max(abs_tol, rel_tol · |I|)` plus the truncated
/// envelope mass.  Fails with [`Error::QuadratureNonConvergence`] when the
/// panel budget is exhausted first.
pub fn integrate_halfline<F: FnMut(f64) -> Result<f64>>(
    mut f: F,
    spec: &QuadratureSpec,
    decay: &Decay,
) -> Result<f64> {
    let upper = decay.truncation_point(spec.truncation_tol)?;

    // Seed with panels no wider than ~one oscillation period so that the
    // error estimate never aliases a whole period away.
    let period_limit = if decay.osc_freq > 0.0 {
        (upper * decay.osc_freq / (2.0 * std::f64::consts::PI)).ceil() as usize
    } else {
        0
    };
    let n0 = period_limit.clamp(8, 2048);
    let n0 = n0.min(spec.max_intervals.max(1));

    let mut stack: Vec<Panel> = Vec::with_capacity(64);
    let mut prev_x = 0.0;
    let mut prev_f = f(0.0)?;
    let mut first_pass: Vec<(Panel, Rules)> = Vec::with_capacity(n0);
    for k in 1..=n0 {
        let x = upper * k as f64 / n0 as f64;
        let fx = f(x)?;
        let p = Panel { a: prev_x, b: x, fa: prev_f, fb: fx };
        let r = eval_panel(&mut f, &p)?;
        first_pass.push((p, r));
        prev_x = x;
        prev_f = fx;
    }
    let estimate: f64 = first_pass.iter().map(|(_, r)| r.i7).sum();
    if !estimate.is_finite() {
        return Err(Error::QuadratureNonConvergence {
            max_intervals: spec.max_intervals,
        });
    }
    let tol = spec.abs_tol.max(spec.rel_tol * estimate.abs());

    let mut total = 0.0;
    let mut examined = n0;
    let min_width = 1e-13 * upper;

    // Work through panels depth-first; each either passes the embedded
    // error test (prorated by its share of the interval) or splits at the
    // Kronrod nodes, reusing every endpoint evaluation.
    let process = |p: Panel, r: Rules, stack: &mut Vec<Panel>, total: &mut f64| {
        let width = p.b - p.a;
        let err = (r.i7 - r.i4).abs();
        if err <= tol * (width / upper) || width <= min_width {
            *total += r.i7;
        } else {
            let xs = [p.a, r.x[0], r.x[1], r.x[2], r.x[3], r.x[4], p.b];
            let fs = [p.fa, r.f[0], r.f[1], r.f[2], r.f[3], r.f[4], p.fb];
            for k in (0..6).rev() {
                stack.push(Panel {
                    a: xs[k],
                    b: xs[k + 1],
                    fa: fs[k],
                    fb: fs[k + 1],
                });
            }
        }
    };

    for (p, r) in first_pass {
        process(p, r, &mut stack, &mut total);
    }
    while let Some(p) = stack.pop() {
        examined += 1;
        if examined > spec.max_intervals {
            return Err(Error::QuadratureNonConvergence {
                max_intervals: spec.max_intervals,
            });
        }
        let r = eval_panel(&mut f, &p)?;
        process(p, r, &mut stack, &mut total);
    }
    if !total.is_finite() {
        return Err(Error::QuadratureNonConvergence {
            max_intervals: spec.max_intervals,
        });
    }
    Ok(total)
}
