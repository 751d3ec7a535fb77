use std::time::Instant;

use super::scenario::{ScenarioArgs, SimArgs};
use super::table::{Cell, Table};
use super::{CliError, Outcome};
use crate::analysis::{self, ThresholdSchedule};
use crate::channel::SystemParams;
use crate::montecarlo;

const ANALYZE_SCHEMA: &str = "cbnoma-analyze/1";
const SIMULATE_SCHEMA: &str = "cbnoma-simulate/1";
const FIGURE_SCHEMA: &str = "cbnoma-figure/1";
const TRADEOFF_SCHEMA: &str = "cbnoma-tradeoff/1";

const DEFAULT_M: [u32; 1] = [8];
const TRADEOFF_GRID: [f64; 5] = [0.25, 0.5, 1.0, 2.0, 4.0];

fn schedule_cells(s: Option<ThresholdSchedule>) -> [Cell; 2] {
    [
        Cell::opt(s.map(|s| s.tau)),
        Cell::opt(s.map(|s| s.lambda)),
    ]
}

pub fn analyze(scenario: &ScenarioArgs) -> Result<Table, CliError> {
    let mut table = Table::new(
        ANALYZE_SCHEMA,
        &[
            "m",
            "beta1",
            "beta2",
            "gamma1",
            "gamma2",
            "rho_th_sq",
            "tau",
            "lambda",
            "p_tilde_lo",
            "p_upper",
            "bracket_ratio",
            "p_asymptotic",
            "asymptotic_valid",
            "p_out",
        ],
    );
    for point in scenario.points(&DEFAULT_M)? {
        let p = point.params;
        let report = analysis::bound_report(&p)?;
        let [tau, lambda] = schedule_cells(point.schedule);
        table.push(vec![
            Cell::Int(p.m.into()),
            Cell::Float(p.beta1),
            Cell::Float(p.beta2),
            Cell::Float(p.gamma1),
            Cell::Float(p.gamma2),
            Cell::Float(p.rho_th_sq),
            tau,
            lambda,
            Cell::Float(report.p_tilde_lo),
            Cell::Float(report.p_upper),
            Cell::Float(analysis::bracket_ratio(&p)),
            Cell::opt(report.p_asymptotic),
            Cell::Bool(report.asymptotic_valid),
            Cell::Float(report.p_out),
        ]);
    }
    Ok(table)
}

pub fn simulate(scenario: &ScenarioArgs, sim: &SimArgs, threads: Option<usize>) -> Result<Outcome, CliError> {
    let mut table = Table::new(
        SIMULATE_SCHEMA,
        &[
            "m",
            "rho_th_sq",
            "tau",
            "lambda",
            "trials",
            "seed",
            "path",
            "mean_p_min",
            "ci_half_width",
            "n_transmit",
            "n_silent",
            "n_unreachable",
            "empirical_outage",
            "p_out",
            "outage_ci",
            "outage_within_ci",
            "p_tilde_lo",
            "p_upper",
            "diverged",
        ],
    );
    let mut notes = Vec::new();
    for (k, point) in scenario.points(&DEFAULT_M)?.into_iter().enumerate() {
        let p = point.params;
        let seed = sim.seed.wrapping_add(k as u64);
        let config = sim.config(seed, threads);
        let start = Instant::now();
        let r = montecarlo::estimate(&p, &config)?;
        notes.push(format!(
            "simulate: M={} rho_th_sq={} trials={} wall_clock={:.3}s",
            p.m,
            p.rho_th_sq,
            r.trials,
            start.elapsed().as_secs_f64()
        ));
        let p_out = analysis::outage_probability_sq(p.m, p.rho_th_sq)?;
        let outage_ci = montecarlo::binomial_half_width(p_out, r.trials, config.confidence)?;
        let bounds = analysis::bound_report(&p).ok();
        let [tau, lambda] = schedule_cells(point.schedule);
        table.push(vec![
            Cell::Int(p.m.into()),
            Cell::Float(p.rho_th_sq),
            tau,
            lambda,
            Cell::Int(r.trials),
            Cell::Int(seed),
            Cell::text(sim.path.name()),
            Cell::Float(r.mean_p_min),
            Cell::Float(r.ci_half_width),
            Cell::Int(r.n_transmit),
            Cell::Int(r.n_silent),
            Cell::Int(r.n_unreachable),
            Cell::Float(r.empirical_outage),
            Cell::Float(p_out),
            Cell::Float(outage_ci),
            Cell::Bool((r.empirical_outage - p_out).abs() <= outage_ci),
            Cell::opt(bounds.as_ref().map(|b| b.p_tilde_lo)),
            Cell::opt(bounds.as_ref().map(|b| b.p_upper)),
            Cell::Bool(r.diverged),
        ]);
    }
    Ok(Outcome {
        table,
        notes,
        violations: 0,
    })
}

/// `n` log-spaced points over `[a, b]` with exact endpoints.
pub fn log_grid(a: f64, b: f64, n: usize) -> Vec<f64> {
    assert!(n >= 2 && a > 0.0 && b > a);
    let (la, lb) = (a.ln(), b.ln());
    (0..n)
        .map(|i| match i {
            0 => a,
            i if i == n - 1 => b,
            i => (la + (lb - la) * i as f64 / (n - 1) as f64).exp(),
        })
        .collect()
}

struct FigurePoint {
    series: String,
    x: f64,
    params: SystemParams,
}

fn figure_points(id: u8, scenario: &ScenarioArgs) -> Result<Vec<FigurePoint>, CliError> {
    let mut out = Vec::new();
    match id {
        1 | 2 => {
            if !scenario.tau.is_empty() {
                return Err(CliError::usage(format!("figure {id} sweeps fixed thresholds; drop --tau")));
            }
        }
        _ => {
            if !scenario.rho_th_sq.is_empty() {
                return Err(CliError::usage("figure 3 sweeps threshold schedules; use --tau/--lambda"));
            }
        }
    }
    match id {
        1 => {
            let xs = if scenario.rho_th_sq.is_empty() {
                log_grid(1e-3, 0.5, 25)
            } else {
                scenario.rho_th_sq.clone()
            };
            for m in scenario.antennas(&[8, 16]) {
                for &x in &xs {
                    out.push(FigurePoint {
                        series: format!("M={m}"),
                        x,
                        params: scenario.params(m, x)?,
                    });
                }
            }
        }
        2 => {
            let xs = if scenario.rho_th_sq.is_empty() {
                vec![0.02, 0.005]
            } else {
                scenario.rho_th_sq.clone()
            };
            let ms: Vec<u32> = (1..=32).map(|k| 2 * k).collect();
            for &x in &xs {
                for m in scenario.antennas(&ms) {
                    out.push(FigurePoint {
                        series: format!("rho_th_sq={x}"),
                        x: m as f64,
                        params: scenario.params(m, x)?,
                    });
                }
            }
        }
        3 => {
            let taus = if scenario.tau.is_empty() { vec![0.5, 1.0, 2.0] } else { scenario.tau.clone() };
            let lambdas = if scenario.lambda.is_empty() { vec![1.0] } else { scenario.lambda.clone() };
            let ms: Vec<u32> = (2..=10).map(|k| 1 << k).collect();
            for &tau in &taus {
                for &lambda in &lambdas {
                    let schedule = ThresholdSchedule::new(tau, lambda)?;
                    let series = if lambda == 1.0 {
                        format!("tau={tau}")
                    } else {
                        format!("tau={tau},lambda={lambda}")
                    };
                    for m in scenario.antennas(&ms) {
                        out.push(FigurePoint {
                            series: series.clone(),
                            x: m as f64,
                            params: schedule.params_at(&scenario.params(m, 1.0)?, m)?,
                        });
                    }
                }
            }
        }
        _ => return Err(CliError::usage(format!("unknown figure {id}; expected 1, 2 or 3"))),
    }
    Ok(out)
}

/// Long-format figure dataset. Rows whose Monte Carlo interval misses the
/// analytic bracket are reported in the notes; at 99% confidence over dozens
/// of heavy-tailed points an occasional miss is expected, so the hard gate
/// is `selfcheck`.
pub fn figure(id: u8, scenario: &ScenarioArgs, sim: &SimArgs, threads: Option<usize>) -> Result<Outcome, CliError> {
    let mut table = Table::new(
        FIGURE_SCHEMA,
        &["figure", "series", "x", "mc_mean", "ci", "p_tilde_lo", "p_upper", "p_asymptotic", "p_out"],
    );
    let mut notes = Vec::new();
    for (k, point) in figure_points(id, scenario)?.into_iter().enumerate() {
        let config = sim.config(sim.seed.wrapping_add(k as u64), threads);
        let r = montecarlo::estimate(&point.params, &config)?;
        let b = analysis::bound_report(&point.params)?;
        let (mean, ci) = (r.mean_p_min, r.ci_half_width);
        if mean.is_finite() && ci.is_finite() && (mean + ci < b.p_tilde_lo || mean - ci > b.p_upper) {
            notes.push(format!(
                "warning: figure {id} {} x={}: Monte Carlo interval [{}, {}] misses [{}, {}]",
                point.series,
                point.x,
                mean - ci,
                mean + ci,
                b.p_tilde_lo,
                b.p_upper
            ));
        }
        table.push(vec![
            Cell::Int(id.into()),
            Cell::Text(point.series),
            Cell::Float(point.x),
            Cell::Float(mean),
            Cell::Float(ci),
            Cell::Float(b.p_tilde_lo),
            Cell::Float(b.p_upper),
            Cell::opt(b.p_asymptotic.filter(|_| b.asymptotic_valid)),
            Cell::Float(b.p_out),
        ]);
    }
    Ok(Outcome {
        table,
        notes,
        violations: 0,
    })
}

/// The `τ = 1` frontier, optionally joined with finite-M values at
/// `ρ_th² = λ/M` for each `--m`.
pub fn tradeoff(scenario: &ScenarioArgs) -> Result<Table, CliError> {
    let mut grid = if scenario.lambda.is_empty() {
        TRADEOFF_GRID.to_vec()
    } else {
        scenario.lambda.clone()
    };
    grid.sort_by(f64::total_cmp);
    let gains = scenario.params(2, 1.0)?;
    let curve = analysis::tradeoff_curve(&gains, &grid)?;

    let mut table = Table::new(
        TRADEOFF_SCHEMA,
        &["lambda", "p_out_limit", "p_limit", "m", "p_out_m", "p_tilde_lo_m"],
    );
    for point in curve {
        let head = [
            Cell::Float(point.lambda),
            Cell::Float(point.p_out_limit),
            Cell::Float(point.p_limit),
        ];
        if scenario.m.is_empty() {
            table.push(head.into_iter().chain([Cell::Empty, Cell::Empty, Cell::Empty]).collect());
            continue;
        }
        for &m in &scenario.m {
            let p = scenario.params(m, point.lambda / m as f64)?;
            table.push(
                head.iter()
                    .cloned()
                    .chain([
                        Cell::Int(m.into()),
                        Cell::Float(analysis::outage_probability_sq(m, p.rho_th_sq)?),
                        Cell::Float(analysis::p_tilde_lo(&p)?),
                    ])
                    .collect(),
            );
        }
    }
    Ok(table)
}
