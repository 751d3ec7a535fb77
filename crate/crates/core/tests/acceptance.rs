//! Acceptance suite. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any criterion fails.

use std::process::Command;
use std::time::Instant;

use cbnoma::analysis::{self, ThresholdSchedule};
use cbnoma::channel::{sample_vectors, stats_from_vectors};
use cbnoma::montecarlo::{self, SimulationConfig, SimulationResult};
use cbnoma::quadrature::{self, Tolerance};
use cbnoma::{Result, SystemParams, noma};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

const CONFIDENCE: f64 = 0.99;

/// β1 = 0 dB, β2 = -10 dB, γ1 = 10 dB, γ2 = 0 dB.
fn figure_params(m: u32, rho_th_sq: f64) -> SystemParams {
    SystemParams::new(m, 1.0, 0.1, 10.0, 1.0, rho_th_sq).unwrap()
}

fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    (0..n)
        .map(|i| (a.ln() + (b.ln() - a.ln()) * i as f64 / (n - 1) as f64).exp())
        .collect()
}

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Result<Verdict> {
    Ok(Verdict { pass, detail })
}

struct GridRun {
    params: SystemParams,
    result: SimulationResult,
}

fn sandwich_grid() -> Result<(Vec<GridRun>, f64)> {
    let start = Instant::now();
    let mut runs = Vec::new();
    for (k, m) in [4, 8, 16].into_iter().enumerate() {
        for (j, x) in [0.005, 0.02, 0.1].into_iter().enumerate() {
            let params = figure_params(m, x);
            let config = SimulationConfig::new(1_000_000, 1000 + (3 * k + j) as u64);
            runs.push(GridRun {
                params,
                result: montecarlo::estimate(&params, &config)?,
            });
        }
    }
    Ok((runs, start.elapsed().as_secs_f64()))
}

fn criterion_1(runs: &[GridRun], secs: f64) -> Result<Verdict> {
    let mut misses = Vec::new();
    for run in runs {
        let lo = analysis::p_tilde_lo(&run.params)?;
        let up = analysis::p_upper(&run.params)?;
        let r = &run.result;
        let (a, b) = (r.mean_p_min - r.ci_half_width, r.mean_p_min + r.ci_half_width);
        if a < lo || b > up {
            misses.push(format!(
                "M={} x={}: CI [{a:.4}, {b:.4}] vs [{lo:.4}, {up:.4}]",
                run.params.m, run.params.rho_th_sq
            ));
        }
    }
    let inside = runs.len() - misses.len();
    verdict(
        misses.is_empty() && secs < 120.0,
        format!(
            "{inside}/{} CIs inside [P_lo, 1.1 P_lo] in {secs:.1}s{}{}",
            runs.len(),
            if misses.is_empty() { "" } else { "; " },
            misses.join("; ")
        ),
    )
}

fn criterion_2() -> Result<Verdict> {
    let mut worst_dual = 0.0_f64;
    let xs: Vec<f64> = log_grid(1e-4, 1.0, 61);
    for m in 2..=64 {
        for &x in &xs {
            let p = figure_params(m, x);
            let a = analysis::p_tilde_lo_hypergeometric(&p)?;
            let b = analysis::p_tilde_lo_integral(&p)?;
            worst_dual = worst_dual.max((a / b - 1.0).abs());
        }
    }
    let mut worst_oracle = 0.0_f64;
    for m in [2, 3, 4, 6, 8, 12, 16, 24, 32, 48, 64] {
        for x in log_grid(1e-4, 1.0, 13) {
            let p = figure_params(m, x);
            let oracle = montecarlo::lower_bound_oracle(&p)?.total;
            worst_oracle = worst_oracle.max((oracle / analysis::p_tilde_lo(&p)? - 1.0).abs());
        }
    }
    verdict(
        worst_dual <= 1e-8 && worst_oracle <= 1e-6,
        format!("closed forms differ by {worst_dual:.2e} (<= 1e-8), density oracle by {worst_oracle:.2e} (<= 1e-6)"),
    )
}

fn criterion_3() -> Result<Verdict> {
    let mut gaps = Vec::new();
    let mut tight = true;
    for x in [0.005, 0.01] {
        for m in [8, 16] {
            let p = figure_params(m, x);
            let lo = analysis::p_tilde_lo(&p)?;
            let gap = (analysis::p_asymptotic_small_rho(&p)?.value - lo).abs() / lo;
            tight &= gap <= 0.02;
            gaps.push(format!("M={m} x={x}: {:.2}%", 100.0 * gap));
        }
    }

    // Least squares of P_lo on ln(1/x) over a log-spaced grid; the grid
    // midpoint in the regression variable is the geometric midpoint.
    let m = 8;
    let xs = log_grid(1e-4, 1e-2, 21);
    let pts: Vec<(f64, f64)> = xs
        .iter()
        .map(|&x| Ok(((1.0 / x).ln(), analysis::p_tilde_lo(&figure_params(m, x))?)))
        .collect::<Result<_>>()?;
    let n = pts.len() as f64;
    let (mx, my) = (
        pts.iter().map(|p| p.0).sum::<f64>() / n,
        pts.iter().map(|p| p.1).sum::<f64>() / n,
    );
    let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>()
        / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
    let x_mid = (1e-4f64 * 1e-2).sqrt();
    let expected = 1.0 / (0.1 * (1.0 - x_mid).powi(m as i32 - 1));
    let slope_err = (slope / expected - 1.0).abs();

    verdict(
        tight && slope_err <= 0.05,
        format!(
            "expansion gaps {} (<= 2%); log-law slope {slope:.4} vs {expected:.4} ({:.2}%, <= 5%)",
            gaps.join(", "),
            100.0 * slope_err
        ),
    )
}

fn criterion_4(runs: &[GridRun]) -> Result<Verdict> {
    let mut worst = 0.0_f64;
    let mut misses = 0;
    for run in runs {
        let p_out = analysis::outage_probability_sq(run.params.m, run.params.rho_th_sq)?;
        let hw = montecarlo::binomial_half_width(p_out, run.result.trials, CONFIDENCE)?;
        let z = (run.result.empirical_outage - p_out).abs() / hw;
        worst = worst.max(z);
        if z > 1.0 {
            misses += 1;
        }
    }
    verdict(
        misses == 0,
        format!(
            "{}/{} silent fractions inside the 99% binomial CI (largest deviation {worst:.2} half-widths)",
            runs.len() - misses,
            runs.len()
        ),
    )
}

fn criterion_5() -> Result<Verdict> {
    let e1 = quadrature::integrate_to_infinity(|t| (-t).exp() / t, 1.0, Tolerance::relative(1e-13))?.value;
    let limit = 10.0 * std::f64::consts::E * e1;
    let base = figure_params(8, 0.02);
    let at = |tau: f64, m: u32| ThresholdSchedule::new(tau, 1.0)?.params_at(&base, m);

    let p = at(1.0, 4096)?;
    let balanced_gap = analysis::p_tilde_lo(&p)? / limit - 1.0;
    let out_gap = analysis::outage_probability_sq(4096, p.rho_th_sq)? - (1.0 - (-1.0f64).exp());

    let growth: Vec<f64> = [64, 128, 256, 512, 1024]
        .into_iter()
        .map(|m| analysis::p_tilde_lo(&at(2.0, m)?))
        .collect::<Result<_>>()?;
    let increasing = growth.windows(2).all(|w| w[1] > w[0]);

    let sat = at(0.5, 1024)?;
    let sat_power = analysis::p_tilde_lo(&sat)?;
    let sat_out = analysis::outage_probability_sq(1024, sat.rho_th_sq)?;

    let parts = [
        balanced_gap.abs() <= 0.02,
        out_gap.abs() <= 1e-3,
        increasing,
        sat_power < 0.05 && sat_out > 0.99,
    ];
    verdict(
        parts.iter().all(|&b| b),
        format!(
            "tau=1: power {:+.3}% vs 10eE1(1)={limit:.5} [{}], outage {out_gap:+.2e} [{}]; \
             tau=2 increasing {:?} [{}]; tau=0.5 at M=1024: power {sat_power:.4} (< 0.05), outage {sat_out:.6} [{}]",
            100.0 * balanced_gap,
            ok(parts[0]),
            ok(parts[1]),
            growth.iter().map(|v| (v * 100.0).round() / 100.0).collect::<Vec<_>>(),
            ok(parts[2]),
            ok(parts[3]),
        ),
    )
}

fn ok(b: bool) -> &'static str {
    if b { "ok" } else { "FAIL" }
}

fn criterion_6() -> Result<Verdict> {
    let p = figure_params(8, 0.0);
    let mut rng = ChaCha8Rng::seed_from_u64(6);
    let n = 10_000;
    let mut worst = 0.0_f64;
    let mut infeasible = 0;
    for _ in 0..n {
        let stats = stats_from_vectors(&sample_vectors(8, &mut rng))?;
        let sol = noma::optimal_split(&stats, &p)?;
        worst = worst
            .max((sol.sinr.user1_s1 / p.gamma1 - 1.0).abs())
            .max((sol.sinr.min_s2() / p.gamma2 - 1.0).abs());
        if !noma::split_exists_on_grid(&stats, &p, 0.99 * sol.p_min, 10_000) {
            infeasible += 1;
        }
    }
    let frac = infeasible as f64 / n as f64;
    verdict(
        worst <= 1e-9 && frac >= 0.999,
        format!(
            "max relative SINR error {worst:.2e} (<= 1e-9); {infeasible}/{n} infeasible at 99% power (>= 99.9%)"
        ),
    )
}

fn criterion_7() -> Result<Verdict> {
    let p = figure_params(8, 0.0);
    let config = SimulationConfig::new(1, 7);
    let runs = montecarlo::running_estimates(&p, &config, &[10_000, 100_000, 1_000_000])?;
    let mut steps = Vec::new();
    let mut all_jump = true;
    for w in runs.windows(2) {
        let rise = (w[1].mean_p_min - w[0].mean_p_min) / w[0].ci_half_width;
        all_jump &= rise > 3.0;
        steps.push(format!("{}->{}: {rise:+.2}", w[0].trials, w[1].trials));
    }
    let last = runs.last().unwrap();
    let flag = last.diverged;
    verdict(
        all_jump && flag,
        format!(
            "running-mean rise in half-widths {} (> 3 each); divergence flag {} (tail growth {:?})",
            steps.join(", "),
            flag,
            last.tail_growth.map(|g| [(g[0] * 10.0).round() / 10.0, (g[1] * 10.0).round() / 10.0])
        ),
    )
}

fn criterion_8() -> Result<Verdict> {
    let mut total = 0;
    let mut bad = 0;
    for m in [8.0, 64.0, 512.0] {
        for y in log_grid(1e-6 * m, m * (1.0 - 1e-9), 3334) {
            total += 1;
            if !analysis::squeeze_bounds(y, m)?.holds() {
                bad += 1;
            }
        }
    }
    verdict(bad == 0, format!("{}/{total} grid points satisfy the squeeze", total - bad))
}

fn figure_csv(threads: &str) -> std::result::Result<Vec<u8>, String> {
    let out = Command::new(env!("CARGO_BIN_EXE_cbnoma"))
        .args(["figure", "1", "--seed", "42", "--trials", "100000"])
        .env("NOMA_SIM_THREADS", threads)
        .output()
        .map_err(|e| e.to_string())?;
    if !out.status.success() {
        return Err(String::from_utf8_lossy(&out.stderr).into_owned());
    }
    Ok(out.stdout)
}

fn criterion_9() -> Result<Verdict> {
    let runs: Vec<_> = ["1", "4", "4"].into_iter().map(figure_csv).collect();
    match (&runs[0], &runs[1], &runs[2]) {
        (Ok(a), Ok(b), Ok(c)) => verdict(
            a == b && b == c && !a.is_empty(),
            format!(
                "figure 1 CSV ({} bytes) identical across reruns and NOMA_SIM_THREADS 1/4: {}",
                a.len(),
                a == b && b == c
            ),
        ),
        _ => verdict(false, format!("figure command failed: {runs:?}")),
    }
}

fn main() {
    let mut failed = 0;
    let mut report = |n: u32, v: Result<Verdict>| {
        let (pass, detail) = match v {
            Ok(v) => (v.pass, v.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        if !pass {
            failed += 1;
        }
        println!("criterion {n}: {} {detail}", if pass { "PASS" } else { "FAIL" });
    };

    match sandwich_grid() {
        Ok((runs, secs)) => {
            report(1, criterion_1(&runs, secs));
            report(4, criterion_4(&runs));
        }
        Err(e) => {
            report(1, Err(e.clone()));
            report(4, Err(e));
        }
    }
    report(2, criterion_2());
    report(3, criterion_3());
    report(5, criterion_5());
    report(6, criterion_6());
    report(7, criterion_7());
    report(8, criterion_8());
    report(9, criterion_9());

    println!("acceptance: {} of 9 criteria failed", failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
