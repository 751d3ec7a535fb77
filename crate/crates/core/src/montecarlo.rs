//! Monte Carlo estimation of the average minimal power and the outage rate.
//!
//! Trials are grouped into fixed chunks of [`CHUNK_TRIALS`]. Chunk `c` draws
//! from ChaCha8 seeded with the run seed on stream `c`, so a run is a pure
//! function of `(seed, trials, path)` regardless of how many workers execute
//! it, and a shorter run is an exact prefix of a longer one.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::analysis;
use crate::channel::{self, ChannelStats, StatsSampler, SystemParams};
use crate::error::{Error, Result};
use crate::noma::{self, MinPower};
use crate::quadrature::{self, Tolerance};

pub const CHUNK_TRIALS: u64 = 65_536;

/// Number of equal blocks the heavy-tail detector splits a run into.
const TAIL_BLOCKS: u64 = 1000;
/// Per-decade growth of the median block variance that signals an
/// infinite-variance (and here infinite-mean) tail. Finite variance gives ~1.
const TAIL_GROWTH: f64 = 3.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SamplingPath {
    /// Draw the channel vectors and compute their statistics.
    VectorExact,
    /// Draw `(‖h1‖², ‖h2‖², ρ²)` from their Gamma/Beta laws.
    Distributional,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationConfig {
    pub trials: u64,
    pub seed: u64,
    pub path: SamplingPath,
    /// Two-sided confidence level, 0.95 or 0.99.
    pub confidence: f64,
    /// Worker cap; `None` uses the global rayon pool. Never changes results.
    pub threads: Option<usize>,
}

impl SimulationConfig {
    pub fn new(trials: u64, seed: u64) -> Self {
        SimulationConfig {
            trials,
            seed,
            path: SamplingPath::Distributional,
            confidence: 0.99,
            threads: None,
        }
    }

    pub fn with_path(self, path: SamplingPath) -> Self {
        SimulationConfig { path, ..self }
    }

    pub fn with_threads(self, threads: Option<usize>) -> Self {
        SimulationConfig { threads, ..self }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::invalid("at least one trial is required"));
        }
        if self.threads == Some(0) {
            return Err(Error::invalid("thread count must be positive"));
        }
        z_score(self.confidence).map(|_| ())
    }
}

/// Two-sided normal quantile for the supported confidence levels.
pub fn z_score(confidence: f64) -> Result<f64> {
    if (confidence - 0.95).abs() < 1e-12 {
        Ok(1.959_963_984_540_054)
    } else if (confidence - 0.99).abs() < 1e-12 {
        Ok(2.575_829_303_548_900_4)
    } else {
        Err(Error::UnsupportedConfidence(confidence))
    }
}

/// Streaming count / mean / sum of squared deviations.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&self, other: &Moments) -> Moments {
        if self.n == 0 {
            return *other;
        }
        if other.n == 0 {
            return *self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let w = other.n as f64 / n as f64;
        Moments {
            n,
            mean: self.mean + delta * w,
            m2: self.m2 + other.m2 + delta * delta * self.n as f64 * w,
        }
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            f64::NAN
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }
}

fn pairwise(parts: &[Moments]) -> Moments {
    match parts.len() {
        0 => Moments::default(),
        1 => parts[0],
        n => pairwise(&parts[..n / 2]).merge(&pairwise(&parts[n / 2..])),
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SimulationResult {
    pub trials: u64,
    /// Mean of `P_min` over transmitting trials (`+∞` if any was unreachable).
    pub mean_p_min: f64,
    pub ci_half_width: f64,
    pub empirical_outage: f64,
    pub n_transmit: u64,
    pub n_silent: u64,
    /// Transmitting trials whose weak user could not be served.
    pub n_unreachable: u64,
    /// Heavy-tail flag; only ever set when `ρ_th = 0`.
    pub diverged: bool,
    /// Median block-variance growth over the two trial-count decades, when
    /// the detector ran.
    pub tail_growth: Option<[f64; 2]>,
}

enum Observation {
    Silent,
    Value(f64),
    Unreachable,
}

#[derive(Debug, Default)]
struct ChunkOutcome {
    moments: Moments,
    silent: u64,
    unreachable: u64,
    /// `(block index, partial moments)` for blocks overlapping this chunk.
    blocks: Vec<(u64, Moments)>,
}

enum Sampler {
    Vector(usize),
    Stats(StatsSampler),
}

impl Sampler {
    fn new(params: &SystemParams, path: SamplingPath) -> Result<Self> {
        Ok(match path {
            SamplingPath::VectorExact => Sampler::Vector(params.m as usize),
            SamplingPath::Distributional => Sampler::Stats(StatsSampler::new(params.m)?),
        })
    }

    fn draw(&self, rng: &mut ChaCha8Rng) -> Result<ChannelStats> {
        match self {
            Sampler::Vector(m) => channel::stats_from_vectors(&channel::sample_vectors(*m, rng)),
            Sampler::Stats(s) => Ok(s.sample(rng)),
        }
    }
}

fn run_chunk<F>(
    sampler: &Sampler,
    config: &SimulationConfig,
    chunk: u64,
    block_size: Option<u64>,
    observe: &F,
) -> Result<ChunkOutcome>
where
    F: Fn(&ChannelStats) -> Observation,
{
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(chunk);
    let start = chunk * CHUNK_TRIALS;
    let end = (start + CHUNK_TRIALS).min(config.trials);
    let mut out = ChunkOutcome::default();
    for i in start..end {
        let stats = sampler.draw(&mut rng)?;
        let value = match observe(&stats) {
            Observation::Silent => {
                out.silent += 1;
                continue;
            }
            Observation::Unreachable => {
                out.unreachable += 1;
                continue;
            }
            Observation::Value(v) => v,
        };
        out.moments.push(value);
        if let Some(b) = block_size {
            let block = i / b;
            if block < TAIL_BLOCKS {
                match out.blocks.last_mut() {
                    Some((idx, m)) if *idx == block => m.push(value),
                    _ => {
                        let mut m = Moments::default();
                        m.push(value);
                        out.blocks.push((block, m));
                    }
                }
            }
        }
    }
    Ok(out)
}

fn run<F>(
    params: &SystemParams,
    config: &SimulationConfig,
    block_size: Option<u64>,
    observe: F,
) -> Result<Vec<ChunkOutcome>>
where
    F: Fn(&ChannelStats) -> Observation + Sync,
{
    params.validate()?;
    config.validate()?;
    let sampler = Sampler::new(params, config.path)?;
    let chunks = config.trials.div_ceil(CHUNK_TRIALS);
    let work = || {
        (0..chunks)
            .into_par_iter()
            .map(|c| run_chunk(&sampler, config, c, block_size, &observe))
            .collect::<Result<Vec<_>>>()
    };
    match config.threads {
        None => work(),
        Some(n) => rayon::ThreadPoolBuilder::new()
            .num_threads(n)
            .build()
            .map_err(|e| Error::invalid(format!("thread pool: {e}")))?
            .install(work),
    }
}

fn median(mut v: Vec<f64>) -> f64 {
    v.retain(|x| x.is_finite());
    if v.is_empty() {
        return f64::NAN;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    }
}

/// Growth of the median block variance from blocks of `b` to `10b` trials
/// and from `10b` to `100b`.
fn block_variance_growth(blocks: &[Moments]) -> [f64; 2] {
    let coarsen = |v: &[Moments]| -> Vec<Moments> { v.chunks(10).map(pairwise).collect() };
    let fine = blocks.to_vec();
    let mid = coarsen(&fine);
    let coarse = coarsen(&mid);
    let med = |v: &[Moments]| median(v.iter().map(Moments::variance).collect());
    let (v0, v1, v2) = (med(&fine), med(&mid), med(&coarse));
    [v1 / v0, v2 / v1]
}

/// Estimates `E[P_min]` conditional on transmission, plus the empirical
/// outage rate.
pub fn estimate(params: &SystemParams, config: &SimulationConfig) -> Result<SimulationResult> {
    let detect = params.rho_th_sq == 0.0 && config.trials >= 10 * TAIL_BLOCKS;
    let block_size = detect.then_some(config.trials / TAIL_BLOCKS);
    let p = *params;
    let chunks = run(params, config, block_size, move |stats| {
        if !noma::gate(stats, &p).transmit {
            return Observation::Silent;
        }
        match noma::p_min(stats, &p) {
            MinPower::Finite(v) => Observation::Value(v),
            MinPower::Unreachable => Observation::Unreachable,
        }
    })?;

    let moments = pairwise(&chunks.iter().map(|c| c.moments).collect::<Vec<_>>());
    let n_silent: u64 = chunks.iter().map(|c| c.silent).sum();
    let n_unreachable: u64 = chunks.iter().map(|c| c.unreachable).sum();

    let tail_growth = block_size.map(|_| {
        let mut blocks = vec![Moments::default(); TAIL_BLOCKS as usize];
        for chunk in &chunks {
            for (idx, m) in &chunk.blocks {
                let slot = &mut blocks[*idx as usize];
                *slot = slot.merge(m);
            }
        }
        block_variance_growth(&blocks)
    });
    let diverged = params.rho_th_sq == 0.0
        && (n_unreachable > 0 || tail_growth.is_some_and(|g| g.iter().all(|&r| r > TAIL_GROWTH)));

    let z = z_score(config.confidence)?;
    let (mean_p_min, ci_half_width) = if n_unreachable > 0 {
        (f64::INFINITY, f64::INFINITY)
    } else if moments.n == 0 {
        (f64::NAN, f64::NAN)
    } else {
        (moments.mean, z * (moments.variance() / moments.n as f64).sqrt())
    };

    Ok(SimulationResult {
        trials: config.trials,
        mean_p_min,
        ci_half_width,
        empirical_outage: n_silent as f64 / config.trials as f64,
        n_transmit: moments.n + n_unreachable,
        n_silent,
        n_unreachable,
        diverged,
        tail_growth,
    })
}

/// Estimates at increasing trial counts. Each run is a prefix of the next,
/// so these are running means of one stream.
pub fn running_estimates(
    params: &SystemParams,
    config: &SimulationConfig,
    checkpoints: &[u64],
) -> Result<Vec<SimulationResult>> {
    checkpoints
        .iter()
        .map(|&trials| estimate(params, &SimulationConfig { trials, ..*config }))
        .collect()
}

/// Half-width of the normal-approximation binomial interval around `p`.
pub fn binomial_half_width(p: f64, trials: u64, confidence: f64) -> Result<f64> {
    Ok(z_score(confidence)? * (p * (1.0 - p) / trials as f64).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct T1Report {
    /// Mass of `γ2/(β1‖h1‖²)` on the region where user 1 is the weaker
    /// effective channel.
    pub t1_estimate: f64,
    pub ci_half_width: f64,
    /// `min(β2/β1, γ2/γ1) · P̃_lo`
    pub bound: f64,
    pub p_tilde_lo: f64,
    /// `t1_estimate / bound`
    pub tightness: f64,
    /// The estimate is not significantly above the bound.
    pub pass: bool,
}

/// Monte Carlo check that the correction term from the region
/// `β1‖h1‖² < β2‖h2‖²ρ²` stays below `min(β2/β1, γ2/γ1) · P̃_lo`.
pub fn t1_bound_check(params: &SystemParams, config: &SimulationConfig) -> Result<T1Report> {
    let lo = analysis::p_tilde_lo(params)?;
    let bound = analysis::bracket_ratio(params) * lo;
    let p = *params;
    let chunks = run(params, config, None, move |s| {
        if !noma::gate(s, &p).transmit {
            return Observation::Silent;
        }
        let c1 = p.beta1 * s.g1_sq;
        let c2 = p.beta2 * s.g2_sq * s.rho_sq;
        Observation::Value(if c1 < c2 { p.gamma2 / c1 } else { 0.0 })
    })?;
    let m = pairwise(&chunks.iter().map(|c| c.moments).collect::<Vec<_>>());
    let hw = z_score(config.confidence)? * (m.variance() / m.n as f64).sqrt();
    let hw = if hw.is_finite() { hw } else { 0.0 };
    Ok(T1Report {
        t1_estimate: m.mean,
        ci_half_width: hw,
        bound,
        p_tilde_lo: lo,
        tightness: m.mean / bound,
        pass: m.mean - hw <= bound,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct OracleBreakdown {
    /// `E[1/‖h‖²]` from the Gamma(M, 1) density.
    pub inverse_norm_mean: f64,
    /// `P(ρ² ≥ ρ_th²)` from the Beta(1, M-1) density.
    pub transmit_probability: f64,
    /// `E[1/ρ² | ρ² ≥ ρ_th²]`.
    pub conditional_inverse_rho_mean: f64,
    /// Strong-user term `γ1(1+γ2)/β1 · E[1/‖h1‖²]`.
    pub t0: f64,
    /// Weak-user term before conditioning on transmission (zero at `ρ_th = 1`).
    pub t_raw: f64,
    /// `E[P_lo | transmit]`.
    pub total: f64,
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// Expected per-realization lower bound `P_lo` by one-dimensional
/// quadratures over the Gamma and Beta densities, using their independence.
pub fn lower_bound_oracle(params: &SystemParams) -> Result<OracleBreakdown> {
    params.validate()?;
    let x = params.rho_th_sq;
    if x <= 0.0 {
        return Err(Error::domain(
            "threshold must be positive for finite average power",
        ));
    }
    let tol = Tolerance::relative(1e-12);
    let mf = params.m as f64;
    let ln_gamma_m = ln_factorial(params.m - 1);

    // ∫ f_Gamma(t) / t dt
    let gamma_over_t = |t: f64| ((mf - 2.0) * t.ln() - t - ln_gamma_m).exp();
    let split = mf - 1.0;
    let inverse_norm_mean = quadrature::integrate(gamma_over_t, 0.0, split, tol)?.value
        + quadrature::integrate_to_infinity(gamma_over_t, split, tol)?.value;

    let beta_density = |z: f64| (mf - 1.0) * ((mf - 2.0) * (-z).ln_1p()).exp();
    let mid = (2.0 * x).min(1.0);
    let over_z = |z: f64| beta_density(z) / z;
    let raw_beta = quadrature::integrate(over_z, x, mid, tol)?.value
        + quadrature::integrate(over_z, mid, 1.0, tol)?.value;
    let transmit_probability = quadrature::integrate(beta_density, x, mid, tol)?.value
        + quadrature::integrate(beta_density, mid, 1.0, tol)?.value;
    let conditional_inverse_rho_mean = if x == 1.0 {
        1.0
    } else {
        raw_beta / transmit_probability
    };

    let weak = params.gamma2 / params.beta2 * inverse_norm_mean;
    let t0 = params.gamma1 * (1.0 + params.gamma2) / params.beta1 * inverse_norm_mean;
    Ok(OracleBreakdown {
        inverse_norm_mean,
        transmit_probability,
        conditional_inverse_rho_mean,
        t0,
        t_raw: weak * raw_beta,
        total: t0 + weak * conditional_inverse_rho_mean,
    })
}
