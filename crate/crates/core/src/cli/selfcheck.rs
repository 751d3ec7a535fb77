use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::commands::log_grid;
use super::scenario::{ScenarioArgs, SimArgs, db_to_linear, linear_to_db};
use super::table::{Cell, Table};
use super::{CliError, Outcome};
use crate::analysis::{self, ThresholdSchedule};
use crate::channel::StatsSampler;
use crate::error::Result;
use crate::montecarlo;
use crate::noma;
use crate::special;

const SCHEMA: &str = "cbnoma-selfcheck/1";

struct Check {
    name: &'static str,
    passed: bool,
    detail: String,
}

fn check(name: &'static str, passed: bool, detail: String) -> Check {
    Check { name, passed, detail }
}

fn db_round_trip() -> Check {
    let worst = (-600..=600)
        .map(|k| {
            let db = k as f64 * 0.1;
            (linear_to_db(db_to_linear(db)) - db).abs()
        })
        .fold(0.0, f64::max);
    check("db_round_trip", worst <= 1e-12, format!("max error {worst:.3e} dB"))
}

fn closed_form_dual_path(s: &ScenarioArgs) -> Result<Check, CliError> {
    let mut worst = 0.0_f64;
    for m in 2..=64 {
        for x in log_grid(1e-4, 1.0, 25) {
            let p = s.params(m, x)?;
            let a = analysis::p_tilde_lo_hypergeometric(&p)?;
            let b = analysis::p_tilde_lo_integral(&p)?;
            worst = worst.max((a / b - 1.0).abs());
        }
    }
    Ok(check("closed_form_dual_path", worst <= 1e-8, format!("max relative gap {worst:.3e}")))
}

fn density_oracle(s: &ScenarioArgs) -> Result<Check, CliError> {
    let mut worst = 0.0_f64;
    for m in [2, 4, 8, 16, 32, 64] {
        for x in [1e-4, 1e-3, 0.01, 0.1, 0.5, 1.0] {
            let p = s.params(m, x)?;
            let oracle = montecarlo::lower_bound_oracle(&p)?.total;
            worst = worst.max((oracle / analysis::p_tilde_lo(&p)? - 1.0).abs());
        }
    }
    Ok(check("density_oracle", worst <= 1e-6, format!("max relative gap {worst:.3e}")))
}

fn optimal_split(s: &ScenarioArgs, seed: u64) -> Result<[Check; 2], CliError> {
    let p = s.params(8, 0.0)?;
    let sampler = StatsSampler::new(8)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut worst = 0.0_f64;
    let mut infeasible = 0;
    let (n_equal, n_grid) = (10_000, 1_000);
    for i in 0..n_equal {
        let stats = sampler.sample(&mut rng);
        let sol = noma::optimal_split(&stats, &p)?;
        worst = worst
            .max((sol.sinr.user1_s1 / p.gamma1 - 1.0).abs())
            .max((sol.sinr.min_s2() / p.gamma2 - 1.0).abs());
        if i < n_grid && !noma::split_exists_on_grid(&stats, &p, 0.99 * sol.p_min, 10_000) {
            infeasible += 1;
        }
    }
    let frac = infeasible as f64 / n_grid as f64;
    Ok([
        check("optimal_split_equality", worst <= 1e-9, format!("max relative SINR error {worst:.3e}")),
        check(
            "reduced_power_infeasible",
            frac >= 0.999,
            format!("{infeasible}/{n_grid} realizations infeasible at 99% power"),
        ),
    ])
}

fn monte_carlo_grid(s: &ScenarioArgs, sim: &SimArgs, threads: Option<usize>) -> Result<[Check; 2], CliError> {
    let mut bracket_miss = Vec::new();
    let mut outage_miss = Vec::new();
    let mut k = 0;
    for m in [4, 8, 16] {
        for x in [0.005, 0.02, 0.1] {
            let p = s.params(m, x)?;
            let config = sim.config(sim.seed.wrapping_add(k), threads);
            k += 1;
            let r = montecarlo::estimate(&p, &config)?;
            let b = analysis::bound_report(&p)?;
            if r.mean_p_min + r.ci_half_width < b.p_tilde_lo || r.mean_p_min - r.ci_half_width > b.p_upper {
                bracket_miss.push(format!("M={m} x={x}"));
            }
            let hw = montecarlo::binomial_half_width(b.p_out, r.trials, config.confidence)?;
            if (r.empirical_outage - b.p_out).abs() > hw {
                outage_miss.push(format!("M={m} x={x}"));
            }
        }
    }
    let summary = |v: &[String]| {
        if v.is_empty() {
            "9/9 grid points consistent".to_string()
        } else {
            format!("inconsistent at {}", v.join("; "))
        }
    };
    Ok([
        check("bracket_consistency", bracket_miss.is_empty(), summary(&bracket_miss)),
        check("outage_within_ci", outage_miss.is_empty(), summary(&outage_miss)),
    ])
}

fn t1_bound(s: &ScenarioArgs, sim: &SimArgs, threads: Option<usize>) -> Result<Check, CliError> {
    let r = montecarlo::t1_bound_check(&s.params(8, 0.02)?, &sim.config(sim.seed, threads))?;
    Ok(check(
        "t1_bound",
        r.pass,
        format!("estimate {:.6e} vs bound {:.6e}", r.t1_estimate, r.bound),
    ))
}

fn squeeze() -> Result<Check> {
    let mut failures = 0;
    let mut total = 0;
    for m in [8.0, 64.0, 512.0] {
        for y in log_grid(1e-6 * m, m * (1.0 - 1e-9), 3334) {
            total += 1;
            if !analysis::squeeze_bounds(y, m)?.holds() {
                failures += 1;
            }
        }
    }
    Ok(check("squeeze", failures == 0, format!("{failures}/{total} points violate")))
}

fn balanced_limit(s: &ScenarioArgs) -> Result<Check, CliError> {
    let m = 4096;
    let p = ThresholdSchedule::new(1.0, 1.0)?.params_at(&s.params(m, 1.0)?, m)?;
    let limit = p.gamma2 / p.beta2 * std::f64::consts::E * special::exp_integral_e1(1.0)?;
    let rel = analysis::p_tilde_lo(&p)? / limit - 1.0;
    let out_gap = analysis::outage_probability_sq(m, p.rho_th_sq)? - (1.0 - (-1.0f64).exp());
    Ok(check(
        "balanced_limit",
        rel.abs() <= 0.02 && out_gap.abs() <= 1e-3,
        format!("power {rel:+.3e} relative, outage {out_gap:+.3e} absolute at M={m}"),
    ))
}

/// Runs the invariant suite and reports one row per check.
pub fn selfcheck(scenario: &ScenarioArgs, sim: &SimArgs, threads: Option<usize>) -> Result<Outcome, CliError> {
    let mut checks = vec![
        db_round_trip(),
        closed_form_dual_path(scenario)?,
        density_oracle(scenario)?,
    ];
    checks.extend(optimal_split(scenario, sim.seed)?);
    checks.extend(monte_carlo_grid(scenario, sim, threads)?);
    checks.push(t1_bound(scenario, sim, threads)?);
    checks.push(squeeze()?);
    checks.push(balanced_limit(scenario)?);

    let mut table = Table::new(SCHEMA, &["check", "passed", "detail"]);
    let mut notes = Vec::new();
    for c in &checks {
        notes.push(format!("{} {}: {}", if c.passed { "PASS" } else { "FAIL" }, c.name, c.detail));
        table.push(vec![Cell::text(c.name), Cell::Bool(c.passed), Cell::text(c.detail.clone())]);
    }
    Ok(Outcome {
        table,
        notes,
        violations: checks.iter().filter(|c| !c.passed).count(),
    })
}
