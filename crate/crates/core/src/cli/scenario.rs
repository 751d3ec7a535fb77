use clap::{Args, ValueEnum};

use super::CliError;
use crate::analysis::ThresholdSchedule;
use crate::channel::SystemParams;
use crate::montecarlo::{SamplingPath, SimulationConfig};

pub fn db_to_linear(db: f64) -> f64 {
    10f64.powf(db / 10.0)
}

pub fn linear_to_db(x: f64) -> f64 {
    10.0 * x.log10()
}

/// Scenario flags shared by every subcommand. List-valued flags take
/// comma-separated values and form a Cartesian grid.
#[derive(Args, Debug, Clone, Default)]
pub struct ScenarioArgs {
    /// Antenna counts
    #[arg(long = "m", value_delimiter = ',')]
    pub m: Vec<u32>,
    /// Large-scale gain of the strong user [dB]
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub beta1_db: f64,
    /// Large-scale gain of the weak user [dB]
    #[arg(long, default_value_t = -10.0, allow_negative_numbers = true)]
    pub beta2_db: f64,
    /// SINR target of the strong user [dB]
    #[arg(long, default_value_t = 10.0, allow_negative_numbers = true)]
    pub gamma1_db: f64,
    /// SINR target of the weak user [dB]
    #[arg(long, default_value_t = 0.0, allow_negative_numbers = true)]
    pub gamma2_db: f64,
    /// Squared correlation thresholds
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub rho_th_sq: Vec<f64>,
    /// Threshold schedule exponents, rho_th^2 = lambda / M^tau
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub tau: Vec<f64>,
    /// Schedule scale (also the tradeoff grid)
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub lambda: Vec<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Threshold {
    Fixed(f64),
    Schedule(ThresholdSchedule),
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScenarioPoint {
    pub params: SystemParams,
    pub schedule: Option<ThresholdSchedule>,
}

impl ScenarioArgs {
    pub fn params(&self, m: u32, rho_th_sq: f64) -> Result<SystemParams, CliError> {
        Ok(SystemParams::new(
            m,
            db_to_linear(self.beta1_db),
            db_to_linear(self.beta2_db),
            db_to_linear(self.gamma1_db),
            db_to_linear(self.gamma2_db),
            rho_th_sq,
        )?)
    }

    pub fn antennas(&self, default: &[u32]) -> Vec<u32> {
        if self.m.is_empty() {
            default.to_vec()
        } else {
            self.m.clone()
        }
    }

    pub fn thresholds(&self) -> Result<Vec<Threshold>, CliError> {
        match (self.rho_th_sq.is_empty(), self.tau.is_empty()) {
            (false, false) => Err(CliError::usage("use either --rho-th-sq or --tau, not both")),
            (true, true) => Err(CliError::usage("one of --rho-th-sq or --tau is required")),
            (false, true) => Ok(self.rho_th_sq.iter().map(|&x| Threshold::Fixed(x)).collect()),
            (true, false) => {
                let lambdas = if self.lambda.is_empty() { vec![1.0] } else { self.lambda.clone() };
                let mut out = Vec::new();
                for &tau in &self.tau {
                    for &lambda in &lambdas {
                        out.push(Threshold::Schedule(ThresholdSchedule::new(tau, lambda)?));
                    }
                }
                Ok(out)
            }
        }
    }

    /// The `M × threshold` grid.
    pub fn points(&self, default_m: &[u32]) -> Result<Vec<ScenarioPoint>, CliError> {
        let thresholds = self.thresholds()?;
        let mut out = Vec::new();
        for m in self.antennas(default_m) {
            for t in &thresholds {
                let (x, schedule) = match *t {
                    Threshold::Fixed(x) => (x, None),
                    Threshold::Schedule(s) => (s.rho_th_sq(m)?, Some(s)),
                };
                out.push(ScenarioPoint {
                    params: self.params(m, x)?,
                    schedule,
                });
            }
        }
        Ok(out)
    }
}

#[derive(ValueEnum, Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PathArg {
    /// Sample channel vectors
    Vector,
    /// Sample sufficient statistics
    #[default]
    Dist,
}

impl PathArg {
    pub fn name(self) -> &'static str {
        match self {
            PathArg::Vector => "vector",
            PathArg::Dist => "dist",
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct SimArgs {
    /// Monte Carlo trials per scenario point
    #[arg(long, default_value_t = 100_000)]
    pub trials: u64,
    #[arg(long, default_value_t = 42)]
    pub seed: u64,
    #[arg(long, value_enum, default_value_t = PathArg::Dist)]
    pub path: PathArg,
}

impl SimArgs {
    pub fn config(&self, seed: u64, threads: Option<usize>) -> SimulationConfig {
        let path = match self.path {
            PathArg::Vector => SamplingPath::VectorExact,
            PathArg::Dist => SamplingPath::Distributional,
        };
        SimulationConfig::new(self.trials, seed)
            .with_path(path)
            .with_threads(threads)
    }
}
