//! Closed-form bounds, small-threshold asymptotics, outage probability and
//! the massive-MIMO limits of the average minimal power.
//!
//! With `x = ρ_th²` the lower bound on `E[P_min]` is
//!
//! ```text
//! P̃_lo = γ1(1+γ2) / ((M-1)β1) + γ2 / β2 · I(x, M) / (1-x)^(M-1)
//!      = γ1(1+γ2) / ((M-1)β1) + γ2 / ((M-1)β2 x) · F(1, 1; M; 1 - 1/x)
//! ```
//!
//! and the upper bound is `P̃_lo · (1 + min(β2/β1, γ2/γ1))`.

use crate::channel::SystemParams;
use crate::error::{Error, Result};
use crate::special::{self, EULER_GAMMA};

/// Above this squared threshold the small-threshold expansion is flagged.
pub const ASYMPTOTIC_VALID_MAX: f64 = 0.1;

/// Cap on `(M-1)ρ_th²` for a valid expansion. The neglected remainder grows
/// with this product: about 10% relative error at 0.2, and the expansion
/// turns negative near 0.7.
pub const ASYMPTOTIC_SPREAD_MAX: f64 = 0.2;

/// Bracket width at or below which `P̃_lo` is reported as the estimate of
/// `E[P_min]`.
pub const TIGHT_BRACKET: f64 = 0.2;

fn strong_user_term(params: &SystemParams) -> f64 {
    params.gamma1 * (1.0 + params.gamma2) / ((params.m - 1) as f64 * params.beta1)
}

fn require_threshold(params: &SystemParams) -> Result<f64> {
    params.validate()?;
    let x = params.rho_th_sq;
    if x <= 0.0 {
        return Err(Error::domain(
            "threshold must be positive for finite average power",
        ));
    }
    Ok(x)
}

/// `P̃_lo` through the threshold integral.
pub fn p_tilde_lo_integral(params: &SystemParams) -> Result<f64> {
    let x = require_threshold(params)?;
    let normalized = special::threshold_integral_normalized(x, params.m)?;
    Ok(strong_user_term(params) + params.gamma2 / params.beta2 * normalized)
}

/// `P̃_lo` through the hypergeometric function.
pub fn p_tilde_lo_hypergeometric(params: &SystemParams) -> Result<f64> {
    let x = require_threshold(params)?;
    let f = special::hyp2f1_11m(params.m, 1.0 - 1.0 / x)?;
    Ok(strong_user_term(params)
        + params.gamma2 / ((params.m - 1) as f64 * params.beta2 * x) * f)
}

/// Lower bound on the average minimal power (tight when the strong user
/// dominates).
///
/// Debug builds also evaluate the hypergeometric form and assert that the two
/// agree to `1e-8`.
pub fn p_tilde_lo(params: &SystemParams) -> Result<f64> {
    let value = p_tilde_lo_integral(params)?;
    #[cfg(debug_assertions)]
    {
        let other = p_tilde_lo_hypergeometric(params)?;
        debug_assert!(
            ((value - other) / value).abs() <= 1e-8,
            "closed forms disagree: integral {value} vs hypergeometric {other} for {params:?}"
        );
    }
    Ok(value)
}

/// `min(β2/β1, γ2/γ1)`, the relative width of the bound bracket.
pub fn bracket_ratio(params: &SystemParams) -> f64 {
    let gains = params.beta2 / params.beta1;
    let targets = if params.gamma1 > 0.0 {
        params.gamma2 / params.gamma1
    } else {
        f64::INFINITY
    };
    gains.min(targets)
}

pub fn p_upper(params: &SystemParams) -> Result<f64> {
    Ok(p_tilde_lo(params)? * (1.0 + bracket_ratio(params)))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Asymptotic {
    pub value: f64,
    /// False when `ρ_th² > 0.1` or `(M-1)ρ_th² > 0.2`, where the expansion
    /// is no longer tight.
    pub valid: bool,
}

/// Small-threshold expansion
/// `γ1(1+γ2)/((M-1)β1) - γ2/β2 · (ln ρ_th² + ψ(M-1) + C) / (1-ρ_th²)^(M-1)`.
pub fn p_asymptotic_small_rho(params: &SystemParams) -> Result<Asymptotic> {
    params.validate()?;
    let x = params.rho_th_sq;
    if !(x > 0.0 && x < 1.0) {
        return Err(Error::domain(format!(
            "small-threshold expansion needs 0 < rho_th^2 < 1, got {x}"
        )));
    }
    let m1 = (params.m - 1) as f64;
    let bracket = x.ln() + special::digamma(m1)? + EULER_GAMMA;
    let transmit = (m1 * (-x).ln_1p()).exp();
    Ok(Asymptotic {
        value: strong_user_term(params) - params.gamma2 / params.beta2 * bracket / transmit,
        valid: x <= ASYMPTOTIC_VALID_MAX && m1 * x <= ASYMPTOTIC_SPREAD_MAX,
    })
}

/// `P_out = 1 - (1 - ρ_th²)^(M-1)` for the unsquared threshold.
pub fn outage_probability(m: u32, rho_th: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&rho_th) {
        return Err(Error::domain(format!("rho_th must lie in [0, 1], got {rho_th}")));
    }
    outage_probability_sq(m, rho_th * rho_th)
}

/// [`outage_probability`] taking `ρ_th²` directly.
pub fn outage_probability_sq(m: u32, rho_th_sq: f64) -> Result<f64> {
    if m < 2 {
        return Err(Error::domain(format!("M must be at least 2, got {m}")));
    }
    if !(0.0..=1.0).contains(&rho_th_sq) {
        return Err(Error::domain(format!(
            "rho_th^2 must lie in [0, 1], got {rho_th_sq}"
        )));
    }
    Ok(-((m - 1) as f64 * (-rho_th_sq).ln_1p()).exp_m1())
}

#[derive(Debug, Clone, PartialEq)]
pub struct BoundReport {
    pub p_tilde_lo: f64,
    pub p_upper: f64,
    /// `None` at `ρ_th² = 1`, where the expansion is undefined.
    pub p_asymptotic: Option<f64>,
    pub asymptotic_valid: bool,
    pub p_out: f64,
    /// `P̃_lo` when the bracket is narrow enough to stand for `E[P_min]`.
    pub headline: Option<f64>,
}

pub fn bound_report(params: &SystemParams) -> Result<BoundReport> {
    let lo = p_tilde_lo(params)?;
    let ratio = bracket_ratio(params);
    let (p_asymptotic, asymptotic_valid) = match p_asymptotic_small_rho(params) {
        Ok(a) => (Some(a.value), a.valid),
        Err(Error::Domain(_)) => (None, false),
        Err(e) => return Err(e),
    };
    Ok(BoundReport {
        p_tilde_lo: lo,
        p_upper: lo * (1.0 + ratio),
        p_asymptotic,
        asymptotic_valid,
        p_out: outage_probability_sq(params.m, params.rho_th_sq)?,
        headline: (ratio <= TIGHT_BRACKET).then_some(lo),
    })
}

/// Threshold design `ρ_th²(M) = λ / M^τ`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ThresholdSchedule {
    pub tau: f64,
    pub lambda: f64,
}

impl ThresholdSchedule {
    pub fn new(tau: f64, lambda: f64) -> Result<Self> {
        if !(tau > 0.0 && tau.is_finite()) {
            return Err(Error::domain(format!("tau must be positive, got {tau}")));
        }
        if !(lambda > 0.0 && lambda.is_finite()) {
            return Err(Error::domain(format!("lambda must be positive, got {lambda}")));
        }
        Ok(ThresholdSchedule { tau, lambda })
    }

    pub fn rho_th_sq(&self, m: u32) -> Result<f64> {
        let x = self.lambda / (m as f64).powf(self.tau);
        if !(x > 0.0 && x < 1.0) {
            return Err(Error::domain(format!(
                "schedule gives rho_th^2 = {x} at M = {m}, outside (0, 1)"
            )));
        }
        Ok(x)
    }

    pub fn params_at(&self, base: &SystemParams, m: u32) -> Result<SystemParams> {
        SystemParams::new(m, base.beta1, base.beta2, base.gamma1, base.gamma2, self.rho_th_sq(m)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    /// τ > 1: outage vanishes, power grows without bound.
    PowerDiverges,
    /// τ < 1: outage saturates at 1, power vanishes.
    OutageSaturates,
    /// τ = 1: both limits are finite and non-trivial.
    Balanced,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LimitReport {
    pub regime: Regime,
    pub p_out_limit: f64,
    /// `+∞` for [`Regime::PowerDiverges`].
    pub p_limit: f64,
}

/// `e^λ E1(λ)`, evaluated without overflowing for large λ.
fn scaled_e1(lambda: f64) -> Result<f64> {
    if lambda > 700.0 {
        // e^λ E1(λ) ~ (1/λ) Σ (-1)^k k! / λ^k
        let mut acc = 0.0;
        let mut term = 1.0;
        for k in 1..=12 {
            acc += term;
            term *= -(k as f64) / lambda;
        }
        return Ok(acc / lambda);
    }
    Ok(lambda.exp() * special::exp_integral_e1(lambda)?)
}

/// Limits of `P_out` and `P̃_lo` as `M → ∞` under `ρ_th² = λ/M^τ`.
///
/// Only the weak user's `γ2/β2` enters; the strong user's term decays like
/// `1/M` in every regime.
pub fn limit_classification(schedule: &ThresholdSchedule, params: &SystemParams) -> Result<LimitReport> {
    let ThresholdSchedule { tau, lambda } = ThresholdSchedule::new(schedule.tau, schedule.lambda)?;
    let report = if (tau - 1.0).abs() <= 1e-12 {
        LimitReport {
            regime: Regime::Balanced,
            p_out_limit: -(-lambda).exp_m1(),
            p_limit: params.gamma2 / params.beta2 * scaled_e1(lambda)?,
        }
    } else if tau > 1.0 {
        LimitReport {
            regime: Regime::PowerDiverges,
            p_out_limit: 0.0,
            p_limit: f64::INFINITY,
        }
    } else {
        LimitReport {
            regime: Regime::OutageSaturates,
            p_out_limit: 1.0,
            p_limit: 0.0,
        }
    };
    Ok(report)
}

/// A point on the `τ = 1` power–outage frontier.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TradeoffPoint {
    pub lambda: f64,
    pub p_out_limit: f64,
    pub p_limit: f64,
}

/// The `τ = 1` frontier over a sorted grid of positive λ.
pub fn tradeoff_curve(params: &SystemParams, lambda_grid: &[f64]) -> Result<Vec<TradeoffPoint>> {
    if let Some(bad) = lambda_grid.iter().find(|l| !(**l > 0.0 && l.is_finite())) {
        return Err(Error::domain(format!("lambda must be positive, got {bad}")));
    }
    if lambda_grid.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::domain("lambda grid must be strictly increasing"));
    }
    lambda_grid
        .iter()
        .map(|&lambda| {
            let lim = limit_classification(&ThresholdSchedule { tau: 1.0, lambda }, params)?;
            Ok(TradeoffPoint {
                lambda,
                p_out_limit: lim.p_out_limit,
                p_limit: lim.p_limit,
            })
        })
        .collect()
}

/// Natural logs of the three sides of the pointwise squeeze
/// `(1-y²/M²)^M e^{-y}/y ≤ (1-y/M)^M/y ≤ e^{-y/2}/y`, valid for `0 < y < M`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Squeeze {
    pub ln_lower: f64,
    pub ln_middle: f64,
    pub ln_upper: f64,
}

impl Squeeze {
    pub fn holds(&self) -> bool {
        self.ln_lower <= self.ln_middle && self.ln_middle <= self.ln_upper
    }
}

pub fn squeeze_bounds(y: f64, m: f64) -> Result<Squeeze> {
    if !(y > 0.0 && y < m) {
        return Err(Error::domain(format!("squeeze needs 0 < y < M, got y = {y}, M = {m}")));
    }
    let ln_y = y.ln();
    let r = y / m;
    Ok(Squeeze {
        ln_lower: m * (-r * r).ln_1p() - y - ln_y,
        ln_middle: m * (-r).ln_1p() - ln_y,
        ln_upper: -0.5 * y - ln_y,
    })
}
