//! Per-realization CB-NOMA logic: correlation gating, matched-filter SINRs,
//! minimal total power and the power split that attains it.
//!
//! The beamformer is `b = h1/‖h1‖`, so the effective gains are
//! `|bᴴh1|² = ‖h1‖²` and `|bᴴh2|² = ‖h2‖² ρ²`. User 2's symbol is decoded by
//! both users treating user 1's symbol as noise; user 1 then cancels it and
//! decodes its own symbol interference-free.

use crate::channel::{ChannelStats, SystemParams};
use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GateDecision {
    pub transmit: bool,
    pub rho_sq: f64,
    pub rho_th_sq: f64,
}

/// The base station transmits iff `ρ² ≥ ρ_th²`. Equality transmits.
pub fn gate(stats: &ChannelStats, params: &SystemParams) -> GateDecision {
    GateDecision {
        transmit: stats.rho_sq >= params.rho_th_sq,
        rho_sq: stats.rho_sq,
        rho_th_sq: params.rho_th_sq,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum User {
    One,
    Two,
}

/// The user that performs SIC. The decoding order is fixed by the
/// large-scale gains alone and never by the channel realization.
pub fn sic_user(params: &SystemParams) -> User {
    if params.beta1 >= params.beta2 {
        User::One
    } else {
        User::Two
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sinrs {
    /// User 1 decoding its own symbol after SIC.
    pub user1_s1: f64,
    /// User 1 decoding user 2's symbol.
    pub user1_s2: f64,
    /// User 2 decoding its own symbol.
    pub user2_s2: f64,
}

impl Sinrs {
    pub fn min_s2(&self) -> f64 {
        self.user1_s2.min(self.user2_s2)
    }
}

/// Effective channel gains `(β1‖h1‖², β2‖h2‖²ρ²)` seen through the MF beam.
fn effective_gains(stats: &ChannelStats, params: &SystemParams) -> (f64, f64) {
    (
        params.beta1 * stats.g1_sq,
        params.beta2 * stats.g2_sq * stats.rho_sq,
    )
}

/// SINRs under matched-filter beamforming for the split `(p1, p2)`.
///
/// User k receives both symbols through its own effective gain
/// `βk |bᴴhk|²`, so `SINR_{k,s2} = p2 c_k / (1 + p1 c_k)`.
pub fn sinr_mf(stats: &ChannelStats, params: &SystemParams, p1: f64, p2: f64) -> Sinrs {
    let (c1, c2) = effective_gains(stats, params);
    Sinrs {
        user1_s1: p1 * c1,
        user1_s2: p2 * c1 / (1.0 + p1 * c1),
        user2_s2: p2 * c2 / (1.0 + p1 * c2),
    }
}

/// Minimal total power, or a marker that no finite power serves both users.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum MinPower {
    Finite(f64),
    Unreachable,
}

impl MinPower {
    /// The power as a float, `+∞` when unreachable.
    pub fn value(self) -> f64 {
        match self {
            MinPower::Finite(p) => p,
            MinPower::Unreachable => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, MinPower::Finite(_))
    }
}

/// `P_min = γ1(1+γ2)/(β1‖h1‖²) + γ2 / min(β1‖h1‖², β2‖h2‖²ρ²)`.
pub fn p_min(stats: &ChannelStats, params: &SystemParams) -> MinPower {
    let (c1, c2) = effective_gains(stats, params);
    let weakest = c1.min(c2);
    let own = if params.gamma1 == 0.0 {
        0.0
    } else if c1 > 0.0 {
        params.gamma1 * (1.0 + params.gamma2) / c1
    } else {
        return MinPower::Unreachable;
    };
    let shared = if params.gamma2 == 0.0 {
        0.0
    } else if weakest > 0.0 {
        params.gamma2 / weakest
    } else {
        return MinPower::Unreachable;
    };
    let total = own + shared;
    if total.is_finite() {
        MinPower::Finite(total)
    } else {
        MinPower::Unreachable
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PowerSolution {
    pub p_min: f64,
    pub p1: f64,
    pub p2: f64,
    pub sinr: Sinrs,
}

/// The split of `P_min` that meets both targets with equality:
/// `p2 = γ2/(1+γ2) · (1/min(c1, c2) + P_min)`, `p1 = P_min - p2`.
pub fn optimal_split(stats: &ChannelStats, params: &SystemParams) -> Result<PowerSolution> {
    let MinPower::Finite(total) = p_min(stats, params) else {
        return Err(Error::Unreachable);
    };
    let (c1, c2) = effective_gains(stats, params);
    let p2 = if params.gamma2 == 0.0 {
        0.0
    } else {
        params.gamma2 / (1.0 + params.gamma2) * (1.0 / c1.min(c2) + total)
    };
    let p1 = total - p2;
    Ok(PowerSolution {
        p_min: total,
        p1,
        p2,
        sinr: sinr_mf(stats, params, p1, p2),
    })
}

/// Whether any split of `total` on a uniform grid of `p2 ∈ [0, total]`
/// meets both SINR targets.
pub fn split_exists_on_grid(
    stats: &ChannelStats,
    params: &SystemParams,
    total: f64,
    grid_points: usize,
) -> bool {
    let steps = grid_points.max(2) - 1;
    (0..=steps).any(|i| {
        let p2 = total * i as f64 / steps as f64;
        let s = sinr_mf(stats, params, total - p2, p2);
        s.user1_s1 >= params.gamma1 && s.min_s2() >= params.gamma2
    })
}
