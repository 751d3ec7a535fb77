use std::ffi::CStr;
use std::ptr;

use cbnoma_ffi::*;

struct Handle(*mut CbnomaParams);

impl Handle {
    fn new(m: u32, rho_th_sq: f64) -> Self {
        let mut p = ptr::null_mut();
        let s = unsafe { cbnoma_params_new(m, 1.0, 0.1, 10.0, 1.0, rho_th_sq, &mut p) };
        assert_eq!(s, CbnomaStatus::Ok);
        Handle(p)
    }
}

impl Drop for Handle {
    fn drop(&mut self) {
        unsafe { cbnoma_params_free(self.0) };
    }
}

fn last_error() -> String {
    let p = cbnoma_last_error_message();
    assert!(!p.is_null());
    unsafe { CStr::from_ptr(p) }.to_string_lossy().into_owned()
}

#[test]
fn version_string() {
    let v = unsafe { CStr::from_ptr(cbnoma_version()) };
    assert_eq!(v.to_str().unwrap(), env!("CARGO_PKG_VERSION"));
}

#[test]
fn bounds_match_library() {
    let h = Handle::new(8, 0.02);
    let mut lo = 0.0;
    let mut up = 0.0;
    unsafe {
        assert_eq!(cbnoma_p_tilde_lo(h.0, &mut lo), CbnomaStatus::Ok);
        assert_eq!(cbnoma_p_upper(h.0, &mut up), CbnomaStatus::Ok);
    }
    let p = cbnoma::SystemParams::new(8, 1.0, 0.1, 10.0, 1.0, 0.02).unwrap();
    assert_eq!(lo, cbnoma::analysis::p_tilde_lo(&p).unwrap());
    assert!((up / lo - 1.1).abs() < 1e-12);

    let mut report = CbnomaBoundReport::default();
    assert_eq!(unsafe { cbnoma_bound_report(h.0, &mut report) }, CbnomaStatus::Ok);
    assert_eq!(report.p_tilde_lo, lo);
    assert!(report.asymptotic_valid);

    let mut oracle = 0.0;
    assert_eq!(unsafe { cbnoma_lower_bound_oracle(h.0, &mut oracle) }, CbnomaStatus::Ok);
    assert!((oracle / lo - 1.0).abs() < 1e-6);
}

#[test]
fn closed_threshold_report_has_nan_asymptotic() {
    let h = Handle::new(8, 1.0);
    let mut report = CbnomaBoundReport::default();
    assert_eq!(unsafe { cbnoma_bound_report(h.0, &mut report) }, CbnomaStatus::Ok);
    assert!(report.p_asymptotic.is_nan());
    assert_eq!(report.p_out, 1.0);
}

#[test]
fn errors_set_status_and_message() {
    let mut p = ptr::null_mut();
    let s = unsafe { cbnoma_params_new(1, 1.0, 0.1, 10.0, 1.0, 0.02, &mut p) };
    assert_eq!(s, CbnomaStatus::InvalidParams);
    assert!(p.is_null());
    assert!(last_error().contains("M must be at least 2"));

    let h = Handle::new(8, 0.02);
    assert_eq!(unsafe { cbnoma_params_set_rho_th_sq(h.0, 0.0) }, CbnomaStatus::Ok);
    let mut v = 0.0;
    assert_eq!(unsafe { cbnoma_p_tilde_lo(h.0, &mut v) }, CbnomaStatus::Domain);
    assert!(last_error().contains("threshold must be positive"));

    assert_eq!(unsafe { cbnoma_p_tilde_lo(h.0, ptr::null_mut()) }, CbnomaStatus::NullPointer);
    assert_eq!(unsafe { cbnoma_p_tilde_lo(ptr::null(), &mut v) }, CbnomaStatus::NullPointer);
    assert_eq!(unsafe { cbnoma_params_set_m(h.0, 0) }, CbnomaStatus::InvalidParams);
}

#[test]
fn split_and_unreachable() {
    let h = Handle::new(8, 0.0);
    let stats = CbnomaChannelStats {
        g1_sq: 2.0,
        g2_sq: 10.0,
        rho_sq: 0.5,
    };
    let mut split = CbnomaPowerSplit::default();
    assert_eq!(unsafe { cbnoma_optimal_split(h.0, &stats, &mut split) }, CbnomaStatus::Ok);
    assert!((split.p_min - 12.0).abs() < 1e-12);
    assert!((split.p2 - 7.0).abs() < 1e-12);
    assert!((split.sinr_user1_s1 - 10.0).abs() < 1e-9);

    let dead = CbnomaChannelStats { rho_sq: 0.0, ..stats };
    let mut v = 0.0;
    assert_eq!(unsafe { cbnoma_p_min(h.0, &dead, &mut v) }, CbnomaStatus::Unreachable);
}

#[test]
fn simulation_is_thread_invariant() {
    let h = Handle::new(8, 0.02);
    let run = |threads| {
        let cfg = CbnomaSimConfig {
            trials: 150_000,
            seed: 3,
            vector_path: false,
            confidence: 0.99,
            threads,
        };
        let mut r = CbnomaSimResult::default();
        assert_eq!(unsafe { cbnoma_simulate(h.0, &cfg, &mut r) }, CbnomaStatus::Ok);
        r
    };
    assert_eq!(run(1), run(4));
    let bad = CbnomaSimConfig {
        trials: 10,
        seed: 1,
        vector_path: true,
        confidence: 0.9,
        threads: 0,
    };
    let mut r = CbnomaSimResult::default();
    assert_eq!(unsafe { cbnoma_simulate(h.0, &bad, &mut r) }, CbnomaStatus::UnsupportedConfidence);
}

#[test]
fn limits_and_special_functions() {
    let h = Handle::new(64, 0.02);
    let mut lim = CbnomaLimit {
        regime: CbnomaRegime::PowerDiverges,
        p_out_limit: 0.0,
        p_limit: 0.0,
    };
    assert_eq!(unsafe { cbnoma_limit(h.0, 1.0, 1.0, &mut lim) }, CbnomaStatus::Ok);
    assert_eq!(lim.regime, CbnomaRegime::Balanced);
    assert!((lim.p_limit - 5.963_473_623_231_941).abs() < 1e-10);

    let mut v = 0.0;
    unsafe {
        assert_eq!(cbnoma_digamma(1.0, &mut v), CbnomaStatus::Ok);
        assert!((v + 0.577_215_664_901_532_9).abs() < 1e-14);
        assert_eq!(cbnoma_hyp2f1_11m(2, -3.0, &mut v), CbnomaStatus::Ok);
        assert!((v - 0.462_098_120_373_296_9).abs() < 1e-14);
        assert_eq!(cbnoma_threshold_integral(0.02, 8, &mut v), CbnomaStatus::Ok);
        assert!((v - 1.579_075_742_590_812_7).abs() < 1e-13);
        assert_eq!(cbnoma_hyp2f1_11m(8, 0.5, &mut v), CbnomaStatus::Domain);
        let mut d = 0.0;
        assert_eq!(cbnoma_outage_probability(8, 0.02, &mut d), CbnomaStatus::Ok);
        assert!((d - 0.131_874_466_753_28).abs() < 1e-12);
    }
}
