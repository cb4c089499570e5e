//! Model types for the regime-switching jump-diffusion and the change of
//! measure between the historical world `P` and a risk-neutral world `Q`.
//!
//! A model consists of a conservative generator `Q = (q_ij)` for the regime
//! chain, one [`RegimeParams`] block per state, the initial state, and a
//! [`MeasureTag`] saying which measure the parameters live under.  Under the
//! historical measure the log-return drift in state `i` is
//! `ξ(i) = μ_i − σ_i²/2`; under a risk-neutral measure with short rate `r`
//! it is the compensated drift
//!
//! ```text
//! ξ(i) = r − σ_i²/2 − λ_i κ(i),        κ(i) = E[e^Y − 1] = e^{a_i + b_i²/2} − 1,
//! ```
//!
//! which is always recomputed from `r` rather than read from the stored `μ`
//! so that discounted-martingale consistency cannot drift out of sync with
//! the tag.
//!
//! The measure change is parameterized in the usual Girsanov/Esscher style:
//! per-regime intensity multipliers `ψ_i > 0`, replacement jump laws under
//! `Q`, a positive matrix `Φ` rescaling the off-diagonal generator entries,
//! and the diffusion shift `θ_i` implied by the martingale condition.

use ndarray::Array2;

use crate::error::{Error, Result};

/// Gaussian law of a single log-jump `Y ~ N(mean, std²)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JumpLaw {
    /// Mean `a` of the log-jump.
    pub mean: f64,
    /// Standard deviation `b ≥ 0` of the log-jump.
    pub std: f64,
}

impl JumpLaw {
    /// Expected relative price jump `κ = E[e^Y] − 1 = e^{a + b²/2} − 1`.
    ///
    /// Computed through `exp_m1` so that small jumps do not lose precision
    /// to cancellation.
    pub fn kappa(&self) -> f64 {
        (self.mean + 0.5 * self.std * self.std).exp_m1()
    }
}

/// Parameters of one regime.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RegimeParams {
    /// Arithmetic drift `μ_i` of the price in this regime (historical
    /// measure).  Ignored for drift purposes under a risk-neutral tag.
    pub mu: f64,
    /// Diffusive volatility `σ_i > 0`.
    pub sigma: f64,
    /// Jump intensity `λ_i ≥ 0`.
    pub lambda: f64,
    /// Law of the Gaussian log-jumps in this regime.
    pub jump: JumpLaw,
}

/// Which probability measure the parameter set lives under.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MeasureTag {
    /// Historical (statistical) measure; drifts come from `μ_i`.
    Historical,
    /// Risk-neutral measure with continuously compounded short rate `r`;
    /// drifts are the compensated `r − σ²/2 − λκ`.
    RiskNeutral {
        /// Short rate `r`.
        rate: f64,
    },
}

/// Full regime-switching jump-diffusion specification.
#[derive(Debug, Clone, PartialEq)]
pub struct RegimeModel {
    /// Conservative generator of the regime chain; rows sum to zero and
    /// off-diagonal entries are non-negative.
    pub generator: Array2<f64>,
    /// Per-regime parameters, one entry per state.
    pub regimes: Vec<RegimeParams>,
    /// Initial chain state, 1-based as in the model document format.
    pub initial_state: usize,
    /// Measure the parameters are expressed under.
    pub measure: MeasureTag,
}

/// Relative tolerance on generator row sums.
const ROW_SUM_TOL: f64 = 1e-10;

impl RegimeModel {
    /// Number of regimes `M`.
    pub fn state_count(&self) -> usize {
        self.regimes.len()
    }

    /// Short rate if the model is risk-neutral.
    pub fn rate(&self) -> Option<f64> {
        match self.measure {
            MeasureTag::Historical => None,
            MeasureTag::RiskNeutral { rate } => Some(rate),
        }
    }

    /// Log-return drift `ξ(j)` for the 0-based regime index `j`, under the
    /// model's own measure.
    pub fn xi(&self, j: usize) -> f64 {
        let rg = &self.regimes[j];
        match self.measure {
            MeasureTag::Historical => rg.mu - 0.5 * rg.sigma * rg.sigma,
            MeasureTag::RiskNeutral { rate } => {
                rate - 0.5 * rg.sigma * rg.sigma - rg.lambda * rg.jump.kappa()
            }
        }
    }

    /// Collects every violated model condition; an empty list means valid.
    ///
    /// Conditions are reported with 1-based regime and row indices to match
    /// the document format.
    pub fn validate(&self) -> Vec<String> {
        let mut findings = Vec::new();
        let m = self.state_count();
        if m == 0 {
            findings.push("model must have at least one regime".to_string());
            return findings;
        }
        if self.generator.nrows() != m || self.generator.ncols() != m {
            findings.push(format!(
                "generator must be {m}x{m} to match the {m} regimes, got {}x{}",
                self.generator.nrows(),
                self.generator.ncols()
            ));
            return findings;
        }
        let scale = self
            .generator
            .iter()
            .fold(1.0_f64, |acc, q| acc.max(q.abs()));
        for i in 0..m {
            let mut row_sum = 0.0;
            for j in 0..m {
                let q = self.generator[(i, j)];
                if !q.is_finite() {
                    findings.push(format!("generator[{}][{}] is not finite", i + 1, j + 1));
                }
                if i != j && q < 0.0 {
                    findings.push(format!(
                        "generator[{}][{}] = {q} must be non-negative off the diagonal",
                        i + 1,
                        j + 1
                    ));
                }
                row_sum += q;
            }
            if row_sum.abs() > ROW_SUM_TOL * scale {
                findings.push(format!("generator row {} sums to {row_sum:e}, not zero", i + 1));
            }
        }
        for (j, rg) in self.regimes.iter().enumerate() {
            let label = format!("regime {}", j + 1);
            if !rg.mu.is_finite() {
                findings.push(format!("{label}: mu is not finite"));
            }
            if !(rg.sigma > 0.0) || !rg.sigma.is_finite() {
                findings.push(format!("{label}: sigma = {} must be positive", rg.sigma));
            }
            if !(rg.lambda >= 0.0) || !rg.lambda.is_finite() {
                findings.push(format!(
                    "{label}: lambda = {} must be non-negative",
                    rg.lambda
                ));
            }
            if !rg.jump.mean.is_finite() {
                findings.push(format!("{label}: jump mean is not finite"));
            }
            if !(rg.jump.std >= 0.0) || !rg.jump.std.is_finite() {
                findings.push(format!(
                    "{label}: jump std = {} must be non-negative",
                    rg.jump.std
                ));
            }
        }
        if self.initial_state < 1 || self.initial_state > m {
            findings.push(format!(
                "initial_state = {} must lie in 1..={m}",
                self.initial_state
            ));
        }
        if let MeasureTag::RiskNeutral { rate } = self.measure {
            if !rate.is_finite() {
                findings.push(format!("risk-neutral rate = {rate} is not finite"));
            }
        }
        findings
    }

    /// Errors with the full findings list unless the model is valid.
    pub fn ensure_valid(&self) -> Result<()> {
        let findings = self.validate();
        if findings.is_empty() {
            Ok(())
        } else {
            Err(Error::InvalidModel(findings))
        }
    }

    /// Errors unless the model carries the historical tag.
    pub fn require_historical(&self, context: &'static str) -> Result<()> {
        match self.measure {
            MeasureTag::Historical => Ok(()),
            MeasureTag::RiskNeutral { .. } => Err(Error::ExpectedHistorical { context }),
        }
    }

    /// Errors unless the model carries the risk-neutral tag; returns the rate.
    pub fn require_risk_neutral(&self, context: &'static str) -> Result<f64> {
        match self.measure {
            MeasureTag::Historical => Err(Error::ExpectedRiskNeutral { context }),
            MeasureTag::RiskNeutral { rate } => Ok(rate),
        }
    }
}

/// Market-level data shared by the risk and hedging layers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MarketSetup {
    /// Spot price `S_0 > 0`.
    pub spot: f64,
    /// Continuously compounded short rate `r`.
    pub rate: f64,
    /// Horizon `T > 0` in years.
    pub horizon: f64,
    /// Tail level `α ∈ (0, 1)` of the value-at-risk (e.g. `0.01`).
    pub confidence: f64,
    /// Hedging budget `C ≥ 0` in currency units.
    pub budget: f64,
}

impl MarketSetup {
    /// Errors unless every field lies in its domain.
    pub fn ensure_valid(&self) -> Result<()> {
        if !(self.spot > 0.0) || !self.spot.is_finite() {
            return Err(Error::arg(format!("spot = {} must be positive", self.spot)));
        }
        if !self.rate.is_finite() {
            return Err(Error::arg(format!("rate = {} must be finite", self.rate)));
        }
        if !(self.horizon > 0.0) || !self.horizon.is_finite() {
            return Err(Error::arg(format!(
                "horizon = {} must be positive",
                self.horizon
            )));
        }
        if !(self.confidence > 0.0 && self.confidence < 1.0) {
            return Err(Error::arg(format!(
                "confidence = {} must lie in (0, 1)",
                self.confidence
            )));
        }
        if !(self.budget >= 0.0) || !self.budget.is_finite() {
            return Err(Error::arg(format!(
                "budget = {} must be non-negative",
                self.budget
            )));
        }
        Ok(())
    }

    /// Discount factor `e^{−rT}` over the horizon.
    pub fn discount(&self) -> f64 {
        (-self.rate * self.horizon).exp()
    }

    /// Forward spot `S_0 e^{rT}`.
    pub fn forward(&self) -> f64 {
        self.spot * (self.rate * self.horizon).exp()
    }
}

/// Parameters of the change of measure from `P` to `Q`.
///
/// The Radon–Nikodym kernel acts regime by regime: intensities are scaled by
/// `ψ_i`, the log-jump law in regime `i` is tilted into `q_jump[i]`, the
/// off-diagonal generator entries are rescaled by `Φ(i, j) > 0`, and the
/// Brownian shift is whatever the martingale condition then requires.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasureChangeSpec {
    /// Jump-intensity multipliers `ψ_i > 0`, so `λ_i^Q = ψ_i λ_i`.
    pub psi: Vec<f64>,
    /// Target jump laws under `Q`, one per regime.
    pub q_jump: Vec<JumpLaw>,
    /// Positive multipliers for the off-diagonal generator entries; the
    /// diagonal of this matrix is ignored.
    pub phi: Array2<f64>,
}

impl MeasureChangeSpec {
    /// The trivial change: intensities, jump laws, and generator unchanged.
    pub fn identity(model: &RegimeModel) -> Self {
        let m = model.state_count();
        MeasureChangeSpec {
            psi: vec![1.0; m],
            q_jump: model.regimes.iter().map(|rg| rg.jump).collect(),
            phi: Array2::ones((m, m)),
        }
    }

    fn ensure_matches(&self, model: &RegimeModel) -> Result<()> {
        let m = model.state_count();
        if self.psi.len() != m {
            return Err(Error::Dimension(format!(
                "psi has {} entries for {m} regimes",
                self.psi.len()
            )));
        }
        if self.q_jump.len() != m {
            return Err(Error::Dimension(format!(
                "q_jump has {} entries for {m} regimes",
                self.q_jump.len()
            )));
        }
        if self.phi.nrows() != m || self.phi.ncols() != m {
            return Err(Error::Dimension(format!(
                "phi is {}x{} for {m} regimes",
                self.phi.nrows(),
                self.phi.ncols()
            )));
        }
        for (i, &p) in self.psi.iter().enumerate() {
            if !(p > 0.0) || !p.is_finite() {
                return Err(Error::arg(format!(
                    "psi[{}] = {p} must be positive",
                    i + 1
                )));
            }
        }
        for (i, law) in self.q_jump.iter().enumerate() {
            if !law.mean.is_finite() || !(law.std >= 0.0) || !law.std.is_finite() {
                return Err(Error::arg(format!("q_jump[{}] is not a valid law", i + 1)));
            }
        }
        for i in 0..m {
            for j in 0..m {
                if i != j && (!(self.phi[(i, j)] > 0.0) || !self.phi[(i, j)].is_finite()) {
                    return Err(Error::arg(format!(
                        "phi[{}][{}] = {} must be positive",
                        i + 1,
                        j + 1,
                        self.phi[(i, j)]
                    )));
                }
            }
        }
        Ok(())
    }
}

/// Applies the measure change to a historical model and returns the
/// risk-neutral model with short rate `rate`.
///
/// Under `Q` the regime `i` carries intensity `ψ_i λ_i` and jump law
/// `q_jump[i]`; the chain generator becomes `q_ij^Q = Φ(i, j) q_ij` off the
/// diagonal with the diagonal rebalanced so rows still sum to zero.  The
/// stored `μ` of each regime is set to the drift the risk-neutral dynamics
/// imply (`r − λ^Q κ^Q` for the price), purely for display purposes — the
/// pricing layer recomputes drifts from the tag.
pub fn apply_measure_change(
    p_model: &RegimeModel,
    spec: &MeasureChangeSpec,
    rate: f64,
) -> Result<RegimeModel> {
    p_model.ensure_valid()?;
    p_model.require_historical("apply_measure_change")?;
    spec.ensure_matches(p_model)?;
    if !rate.is_finite() {
        return Err(Error::arg(format!("rate = {rate} must be finite")));
    }
    let m = p_model.state_count();
    let mut generator = Array2::zeros((m, m));
    for i in 0..m {
        let mut off_sum = 0.0;
        for j in 0..m {
            if i != j {
                let q = spec.phi[(i, j)] * p_model.generator[(i, j)];
                generator[(i, j)] = q;
                off_sum += q;
            }
        }
        generator[(i, i)] = -off_sum;
    }
    let regimes = p_model
        .regimes
        .iter()
        .zip(spec.psi.iter().zip(spec.q_jump.iter()))
        .map(|(rg, (&psi, &jump))| {
            let lambda = psi * rg.lambda;
            RegimeParams {
                mu: rate - lambda * jump.kappa(),
                sigma: rg.sigma,
                lambda,
                jump,
            }
        })
        .collect();
    let q_model = RegimeModel {
        generator,
        regimes,
        initial_state: p_model.initial_state,
        measure: MeasureTag::RiskNeutral { rate },
    };
    q_model.ensure_valid()?;
    Ok(q_model)
}

fn check_regime_index(model: &RegimeModel, regime: usize) -> Result<usize> {
    let m = model.state_count();
    if regime < 1 || regime > m {
        return Err(Error::arg(format!(
            "regime = {regime} must lie in 1..={m}"
        )));
    }
    Ok(regime - 1)
}

/// Brownian drift shift `θ_i` of the measure change in the given regime
/// (1-based), fixed by the martingale condition:
///
/// ```text
/// θ_i = (r − μ_i − ψ_i λ_i κ_i^Q) / σ_i.
/// ```
pub fn girsanov_shift(
    p_model: &RegimeModel,
    spec: &MeasureChangeSpec,
    rate: f64,
    regime: usize,
) -> Result<f64> {
    p_model.ensure_valid()?;
    p_model.require_historical("girsanov_shift")?;
    spec.ensure_matches(p_model)?;
    let i = check_regime_index(p_model, regime)?;
    let rg = &p_model.regimes[i];
    let kappa_q = spec.q_jump[i].kappa();
    Ok((rate - rg.mu - spec.psi[i] * rg.lambda * kappa_q) / rg.sigma)
}

/// Instantaneous market price of risk `ρ_i` in the given regime (1-based):
/// the expected excess return of the asset over the short rate,
///
/// ```text
/// ρ_i = λ_i (κ_i − ψ_i κ_i^Q) − σ_i θ_i  =  μ_i + λ_i κ_i − r,
/// ```
///
/// where the jump term is the compensator gap between the two measures and
/// the diffusion term is the Girsanov shift priced at `σ_i`.  The two sides
/// of the identity are computed independently in the test suite; the
/// measure-change parameters cancel, so the result depends only on the
/// historical dynamics and the rate.
pub fn market_price_of_risk(
    p_model: &RegimeModel,
    spec: &MeasureChangeSpec,
    rate: f64,
    regime: usize,
) -> Result<f64> {
    let theta = girsanov_shift(p_model, spec, rate, regime)?;
    let i = regime - 1;
    let rg = &p_model.regimes[i];
    let kappa_q = spec.q_jump[i].kappa();
    Ok(rg.lambda * (rg.jump.kappa() - spec.psi[i] * kappa_q) - rg.sigma * theta)
}
