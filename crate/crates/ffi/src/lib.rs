//! C ABI over `cbnoma`.
//!
//! Every entry point returns a [`CbnomaStatus`] and writes results through
//! out-pointers. On failure a message is kept per thread and can be read
//! with [`cbnoma_last_error_message`]. Panics never cross the boundary.
//!
//! Scenario parameters live behind the opaque [`CbnomaParams`] handle,
//! created with [`cbnoma_params_new`] and released with
//! [`cbnoma_params_free`].

use std::cell::RefCell;
use std::ffi::{CString, c_char};
use std::panic::{AssertUnwindSafe, catch_unwind};

use cbnoma::analysis::{self, Regime, ThresholdSchedule};
use cbnoma::montecarlo::{self, SamplingPath, SimulationConfig};
use cbnoma::noma::{self, MinPower};
use cbnoma::{ChannelStats, Error, SystemParams, special};

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CbnomaStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidParams = 2,
    Domain = 3,
    NonConvergence = 4,
    Unreachable = 5,
    DegenerateChannel = 6,
    UnsupportedConfidence = 7,
    Panic = 8,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CbnomaRegime {
    PowerDiverges = 0,
    OutageSaturates = 1,
    Balanced = 2,
}

/// Opaque scenario handle.
pub struct CbnomaParams(SystemParams);

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CbnomaChannelStats {
    pub g1_sq: f64,
    pub g2_sq: f64,
    pub rho_sq: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CbnomaPowerSplit {
    pub p_min: f64,
    pub p1: f64,
    pub p2: f64,
    pub sinr_user1_s1: f64,
    pub sinr_user1_s2: f64,
    pub sinr_user2_s2: f64,
}

/// Optional values are NaN when absent.
#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CbnomaBoundReport {
    pub p_tilde_lo: f64,
    pub p_upper: f64,
    pub p_asymptotic: f64,
    pub asymptotic_valid: bool,
    pub p_out: f64,
    pub headline: f64,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CbnomaSimConfig {
    pub trials: u64,
    pub seed: u64,
    /// Sample full channel vectors instead of their statistics.
    pub vector_path: bool,
    /// 0.95 or 0.99.
    pub confidence: f64,
    /// Worker cap, 0 for the default pool.
    pub threads: u32,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CbnomaSimResult {
    pub trials: u64,
    pub mean_p_min: f64,
    pub ci_half_width: f64,
    pub empirical_outage: f64,
    pub n_transmit: u64,
    pub n_silent: u64,
    pub n_unreachable: u64,
    pub diverged: bool,
}

#[repr(C)]
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CbnomaLimit {
    pub regime: CbnomaRegime,
    pub p_out_limit: f64,
    pub p_limit: f64,
}

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

struct Failure {
    status: CbnomaStatus,
    message: String,
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let status = match e {
            Error::Domain(_) => CbnomaStatus::Domain,
            Error::InvalidParams(_) => CbnomaStatus::InvalidParams,
            Error::NonConvergence { .. } => CbnomaStatus::NonConvergence,
            Error::DegenerateChannel => CbnomaStatus::DegenerateChannel,
            Error::Unreachable => CbnomaStatus::Unreachable,
            Error::UnsupportedConfidence(_) => CbnomaStatus::UnsupportedConfidence,
        };
        Failure {
            status,
            message: e.to_string(),
        }
    }
}

fn null(what: &str) -> Failure {
    Failure {
        status: CbnomaStatus::NullPointer,
        message: format!("{what} is null"),
    }
}

fn set_last_error(message: String) {
    let c = CString::new(message.replace('\0', " ")).unwrap_or_default();
    LAST_ERROR.with(|slot| *slot.borrow_mut() = Some(c));
}

fn guard<F: FnOnce() -> Result<(), Failure>>(f: F) -> CbnomaStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => CbnomaStatus::Ok,
        Ok(Err(fail)) => {
            set_last_error(fail.message);
            fail.status
        }
        Err(payload) => {
            let msg = payload
                .downcast_ref::<&str>()
                .map(|s| s.to_string())
                .or_else(|| payload.downcast_ref::<String>().cloned())
                .unwrap_or_else(|| "unknown panic".into());
            set_last_error(format!("internal panic: {msg}"));
            CbnomaStatus::Panic
        }
    }
}

unsafe fn writable<'a, T>(out: *mut T) -> Result<&'a mut T, Failure> {
    unsafe { out.as_mut() }.ok_or_else(|| null("output pointer"))
}

unsafe fn params<'a>(p: *const CbnomaParams) -> Result<&'a SystemParams, Failure> {
    unsafe { p.as_ref() }.map(|h| &h.0).ok_or_else(|| null("params handle"))
}

fn nan_if_none(v: Option<f64>) -> f64 {
    v.unwrap_or(f64::NAN)
}

/// Library version as a static NUL-terminated string. Do not free.
#[unsafe(no_mangle)]
pub extern "C" fn cbnoma_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr().cast()
}

/// Message of the last failed call on this thread, or null if none.
/// The pointer stays valid until the next failing call on the same thread.
#[unsafe(no_mangle)]
pub extern "C" fn cbnoma_last_error_message() -> *const c_char {
    LAST_ERROR.with(|slot| slot.borrow().as_ref().map_or(std::ptr::null(), |c| c.as_ptr()))
}

/// Creates a scenario. All inputs are linear; `rho_th_sq` is the squared
/// correlation threshold.
///
/// # Safety
/// `out` must be a valid pointer to writable storage for one handle.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn cbnoma_params_new(
    m: u32,
    beta1: f64,
    beta2: f64,
    gamma1: f64,
    gamma2: f64,
    rho_th_sq: f64,
    out: *mut *mut CbnomaParams,
) -> CbnomaStatus {
    guard(|| {
        let out = unsafe { writable(out)? };
        let p = SystemParams::new(m, beta1, beta2, gamma1, gamma2, rho_th_sq)?;
        *out = Box::into_raw(Box::new(CbnomaParams(p)));
        Ok(())
    })
}

/// Releases a handle. Null is ignored.
///
/// # Safety
/// `p` must be null or a handle from [`cbnoma_params_new`] not yet freed.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn cbnoma_params_free(p: *mut CbnomaParams) {
    if !p.is_null() {
        drop(unsafe { Box::from_raw(p) });
    }
}

/// # Safety
/// `p` must be a live handle.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn cbnoma_params_set_rho_th_sq(p: *mut CbnomaParams, rho_th_sq: f64) -> CbnomaStatus {
    guard(|| {
        let h = unsafe { p.as_mut() }.ok_or_else(|| null("params handle"))?;
        h.0 = h.0.with_rho_th_sq(rho_th_sq)?;
        Ok(())
    })
}

/// # Safety
/// `p` must be a live handle.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn cbnoma_params_set_m(p: *mut CbnomaParams, m: u32) -> CbnomaStatus {
    guard(|| {
        let h = unsafe { p.as_mut() }.ok_or_else(|| null("params handle"))?;
        h.0 = h.0.with_m(m)?;
        Ok(())
    })
}

/// Lower bound on the average minimal power.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn cbnoma_p_tilde_lo(p: *const CbnomaParams, out: *mut f64) -> CbnomaStatus {
    guard(|| {
        let out = unsafe { writable(out)? };
        *out = unsafe { analysis::p_tilde_lo(params(p)?)? };
        Ok(())
    })
}

/// # Safety
/// `p` must be a live handle and `out` writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn cbnoma_p_upper(p: *const CbnomaParams, out: *mut f64) -> CbnomaStatus {
    guard(|| {
        let out = unsafe { writable(out)? };
        *out = unsafe { analysis::p_upper(params(p)?)? };
        Ok(())
    })
}

/// Small-threshold expansion and its validity flag.
///
/// # Safety
/// `p` must be a live handle; `out` and `valid` writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn cbnoma_p_asymptotic(p: *const CbnomaParams, out: *mut f64, valid: *mut bool) -> CbnomaStatus {
    guard(|| {
        let (out, valid) = unsafe { (writable(out)?, writable(valid)?) };
        let a = analysis::p_asymptotic_small_rho(unsafe { params(p)? })?;
        *out = a.value;
        *valid = a.valid;
        Ok(())
    })
}

/// # Safety
/// `p` must be a live handle and `out` writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn cbnoma_bound_report(p: *const CbnomaParams, out: *mut CbnomaBoundReport) -> CbnomaStatus {
    guard(|| {
        let out = unsafe { writable(out)? };
        let r = analysis::bound_report(unsafe { params(p)? })?;
        *out = CbnomaBoundReport {
            p_tilde_lo: r.p_tilde_lo,
            p_upper: r.p_upper,
            p_asymptotic: nan_if_none(r.p_asymptotic),
            asymptotic_valid: r.asymptotic_valid,
            p_out: r.p_out,
            headline: nan_if_none(r.headline),
        };
        Ok(())
    })
}

/// Outage probability `1 - (1 - rho_th_sq)^(m-1)`.
///
/// # Safety
/// `out` must be writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn cbnoma_outage_probability(m: u32, rho_th_sq: f64, out: *mut f64) -> CbnomaStatus {
    guard(|| {
        let out = unsafe { writable(out)? };
        *out = analysis::outage_probability_sq(m, rho_th_sq)?;
        Ok(())
    })
}

/// Density-quadrature value of the lower bound.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn cbnoma_lower_bound_oracle(p: *const CbnomaParams, out: *mut f64) -> CbnomaStatus {
    guard(|| {
        let out = unsafe { writable(out)? };
        *out = unsafe { montecarlo::lower_bound_oracle(params(p)?)?.total };
        Ok(())
    })
}

fn stats_in(s: *const CbnomaChannelStats) -> Result<ChannelStats, Failure> {
    let s = unsafe { s.as_ref() }.ok_or_else(|| null("channel stats"))?;
    Ok(ChannelStats {
        g1_sq: s.g1_sq,
        g2_sq: s.g2_sq,
        rho_sq: s.rho_sq,
    })
}

/// Minimal power for one realization; `CBNOMA_STATUS_UNREACHABLE` if no
/// finite power serves the weak user.
///
/// # Safety
/// `p` must be a live handle, `stats` readable and `out` writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn cbnoma_p_min(
    p: *const CbnomaParams,
    stats: *const CbnomaChannelStats,
    out: *mut f64,
) -> CbnomaStatus {
    guard(|| {
        let (params, out) = unsafe { (params(p)?, writable(out)?) };
        match noma::p_min(&stats_in(stats)?, params) {
            MinPower::Finite(v) => {
                *out = v;
                Ok(())
            }
            MinPower::Unreachable => Err(Error::Unreachable.into()),
        }
    })
}

/// # Safety
/// `p` must be a live handle, `stats` readable and `out` writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn cbnoma_optimal_split(
    p: *const CbnomaParams,
    stats: *const CbnomaChannelStats,
    out: *mut CbnomaPowerSplit,
) -> CbnomaStatus {
    guard(|| {
        let (params, out) = unsafe { (params(p)?, writable(out)?) };
        let s = noma::optimal_split(&stats_in(stats)?, params)?;
        *out = CbnomaPowerSplit {
            p_min: s.p_min,
            p1: s.p1,
            p2: s.p2,
            sinr_user1_s1: s.sinr.user1_s1,
            sinr_user1_s2: s.sinr.user1_s2,
            sinr_user2_s2: s.sinr.user2_s2,
        };
        Ok(())
    })
}

/// Monte Carlo estimate. Results depend only on the scenario, `trials`,
/// `seed` and the sampling path.
///
/// # Safety
/// `p` must be a live handle, `config` readable and `out` writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn cbnoma_simulate(
    p: *const CbnomaParams,
    config: *const CbnomaSimConfig,
    out: *mut CbnomaSimResult,
) -> CbnomaStatus {
    guard(|| {
        let (params, out) = unsafe { (params(p)?, writable(out)?) };
        let c = unsafe { config.as_ref() }.ok_or_else(|| null("simulation config"))?;
        let cfg = SimulationConfig {
            trials: c.trials,
            seed: c.seed,
            path: if c.vector_path {
                SamplingPath::VectorExact
            } else {
                SamplingPath::Distributional
            },
            confidence: c.confidence,
            threads: (c.threads > 0).then_some(c.threads as usize),
        };
        let r = montecarlo::estimate(params, &cfg)?;
        *out = CbnomaSimResult {
            trials: r.trials,
            mean_p_min: r.mean_p_min,
            ci_half_width: r.ci_half_width,
            empirical_outage: r.empirical_outage,
            n_transmit: r.n_transmit,
            n_silent: r.n_silent,
            n_unreachable: r.n_unreachable,
            diverged: r.diverged,
        };
        Ok(())
    })
}

/// Large-array limits under the schedule `rho_th_sq = lambda / M^tau`.
///
/// # Safety
/// `p` must be a live handle and `out` writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn cbnoma_limit(
    p: *const CbnomaParams,
    tau: f64,
    lambda: f64,
    out: *mut CbnomaLimit,
) -> CbnomaStatus {
    guard(|| {
        let (params, out) = unsafe { (params(p)?, writable(out)?) };
        let r = analysis::limit_classification(&ThresholdSchedule::new(tau, lambda)?, params)?;
        let regime = match r.regime {
            Regime::PowerDiverges => CbnomaRegime::PowerDiverges,
            Regime::OutageSaturates => CbnomaRegime::OutageSaturates,
            Regime::Balanced => CbnomaRegime::Balanced,
        };
        *out = CbnomaLimit {
            regime,
            p_out_limit: r.p_out_limit,
            p_limit: r.p_limit,
        };
        Ok(())
    })
}

/// `∫_x^1 (1-t)^(m-2) / t dt` for `0 < x <= 1`.
///
/// # Safety
/// `out` must be writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn cbnoma_threshold_integral(x: f64, m: u32, out: *mut f64) -> CbnomaStatus {
    guard(|| {
        let out = unsafe { writable(out)? };
        *out = special::threshold_integral_sum(x, m)?;
        Ok(())
    })
}

/// `2F1(1, 1; m; z)` for `z <= 0`.
///
/// # Safety
/// `out` must be writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn cbnoma_hyp2f1_11m(m: u32, z: f64, out: *mut f64) -> CbnomaStatus {
    guard(|| {
        let out = unsafe { writable(out)? };
        *out = special::hyp2f1_11m(m, z)?;
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn cbnoma_digamma(x: f64, out: *mut f64) -> CbnomaStatus {
    guard(|| {
        let out = unsafe { writable(out)? };
        *out = special::digamma(x)?;
        Ok(())
    })
}

/// # Safety
/// `out` must be writable.
#[unsafe(no_mangle)]
pub unsafe extern "C" fn cbnoma_exp_integral_e1(x: f64, out: *mut f64) -> CbnomaStatus {
    guard(|| {
        let out = unsafe { writable(out)? };
        *out = special::exp_integral_e1(x)?;
        Ok(())
    })
}
