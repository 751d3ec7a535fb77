//! Two-user i.i.d. Rayleigh channels and their sufficient statistics.
//!
//! A realization is summarized by `(‖h1‖², ‖h2‖², ρ²)`. Under i.i.d.
//! `CN(0, I_M)` fading these are mutually independent with
//! `‖hk‖² ~ Gamma(M, 1)` and `ρ² ~ Beta(1, M-1)`, so large-M experiments can
//! skip the vectors entirely via [`StatsSampler`].

use num_complex::Complex64;
use rand::Rng;
use rand_distr::{Distribution, Gamma, Open01, StandardNormal};

use crate::error::{Error, Result};

/// One scenario: antenna count, large-scale gains, SINR targets and the
/// squared correlation threshold. All quantities are linear.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SystemParams {
    pub m: u32,
    pub beta1: f64,
    pub beta2: f64,
    pub gamma1: f64,
    pub gamma2: f64,
    /// Squared correlation threshold `ρ_th²`.
    pub rho_th_sq: f64,
}

impl SystemParams {
    pub fn new(
        m: u32,
        beta1: f64,
        beta2: f64,
        gamma1: f64,
        gamma2: f64,
        rho_th_sq: f64,
    ) -> Result<Self> {
        let p = SystemParams {
            m,
            beta1,
            beta2,
            gamma1,
            gamma2,
            rho_th_sq,
        };
        p.validate()?;
        Ok(p)
    }

    /// Same as [`SystemParams::new`] but takes the unsquared threshold `ρ_th`.
    pub fn with_rho_th(
        m: u32,
        beta1: f64,
        beta2: f64,
        gamma1: f64,
        gamma2: f64,
        rho_th: f64,
    ) -> Result<Self> {
        if !(0.0..=1.0).contains(&rho_th) {
            return Err(Error::invalid(format!("rho_th must lie in [0, 1], got {rho_th}")));
        }
        Self::new(m, beta1, beta2, gamma1, gamma2, rho_th * rho_th)
    }

    pub fn validate(&self) -> Result<()> {
        if self.m < 2 {
            return Err(Error::invalid(format!("M must be at least 2, got {}", self.m)));
        }
        if !(self.beta1 > 0.0 && self.beta2 > 0.0) || !self.beta1.is_finite() {
            return Err(Error::invalid("large-scale gains must be positive and finite"));
        }
        if self.beta1 < self.beta2 {
            return Err(Error::invalid(format!(
                "user 1 must be the stronger user (beta1 = {} < beta2 = {})",
                self.beta1, self.beta2
            )));
        }
        if !(self.gamma1 >= 0.0 && self.gamma2 >= 0.0)
            || !self.gamma1.is_finite()
            || !self.gamma2.is_finite()
        {
            return Err(Error::invalid("SINR targets must be non-negative and finite"));
        }
        if !(0.0..=1.0).contains(&self.rho_th_sq) {
            return Err(Error::invalid(format!(
                "squared threshold must lie in [0, 1], got {}",
                self.rho_th_sq
            )));
        }
        Ok(())
    }

    pub fn rho_th(&self) -> f64 {
        self.rho_th_sq.sqrt()
    }

    pub fn with_rho_th_sq(self, rho_th_sq: f64) -> Result<Self> {
        Self::new(self.m, self.beta1, self.beta2, self.gamma1, self.gamma2, rho_th_sq)
    }

    pub fn with_m(self, m: u32) -> Result<Self> {
        Self::new(m, self.beta1, self.beta2, self.gamma1, self.gamma2, self.rho_th_sq)
    }
}

/// Small-scale fading vectors of both users.
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelVectors {
    pub h1: Vec<Complex64>,
    pub h2: Vec<Complex64>,
}

/// Sufficient statistics of one realization.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelStats {
    /// `‖h1‖²`
    pub g1_sq: f64,
    /// `‖h2‖²`
    pub g2_sq: f64,
    /// `ρ² = |h1ᴴh2|² / (‖h1‖²‖h2‖²)`
    pub rho_sq: f64,
}

fn complex_normal<R: Rng + ?Sized>(rng: &mut R) -> Complex64 {
    let re: f64 = StandardNormal.sample(rng);
    let im: f64 = StandardNormal.sample(rng);
    Complex64::new(re, im) * std::f64::consts::FRAC_1_SQRT_2
}

/// Draws `h1, h2` with i.i.d. `CN(0, 1)` entries.
pub fn sample_vectors<R: Rng + ?Sized>(m: usize, rng: &mut R) -> ChannelVectors {
    let h1 = (0..m).map(|_| complex_normal(rng)).collect();
    let h2 = (0..m).map(|_| complex_normal(rng)).collect();
    ChannelVectors { h1, h2 }
}

pub fn stats_from_vectors(v: &ChannelVectors) -> Result<ChannelStats> {
    if v.h1.len() != v.h2.len() {
        return Err(Error::invalid("channel vectors differ in length"));
    }
    let g1_sq: f64 = v.h1.iter().map(|c| c.norm_sqr()).sum();
    let g2_sq: f64 = v.h2.iter().map(|c| c.norm_sqr()).sum();
    if g1_sq == 0.0 || g2_sq == 0.0 {
        return Err(Error::DegenerateChannel);
    }
    let inner: Complex64 = v.h1.iter().zip(&v.h2).map(|(a, b)| a.conj() * b).sum();
    let rho_sq = (inner.norm_sqr() / (g1_sq * g2_sq)).clamp(0.0, 1.0);
    Ok(ChannelStats {
        g1_sq,
        g2_sq,
        rho_sq,
    })
}

/// Samples sufficient statistics directly from their joint law.
#[derive(Debug, Clone, Copy)]
pub struct StatsSampler {
    norm: Gamma<f64>,
    inv_dof: f64,
}

impl StatsSampler {
    pub fn new(m: u32) -> Result<Self> {
        if m < 2 {
            return Err(Error::invalid(format!("M must be at least 2, got {m}")));
        }
        let norm = Gamma::new(m as f64, 1.0)
            .map_err(|e| Error::invalid(format!("gamma distribution: {e}")))?;
        Ok(StatsSampler {
            norm,
            inv_dof: 1.0 / (m - 1) as f64,
        })
    }

    pub fn sample<R: Rng + ?Sized>(&self, rng: &mut R) -> ChannelStats {
        let g1_sq = self.norm.sample(rng);
        let g2_sq = self.norm.sample(rng);
        let u: f64 = Open01.sample(rng);
        // Beta(1, M-1) by inversion: 1 - U^{1/(M-1)}
        let rho_sq = -(u.ln() * self.inv_dof).exp_m1();
        ChannelStats {
            g1_sq,
            g2_sq,
            rho_sq,
        }
    }
}

/// One-shot convenience wrapper around [`StatsSampler`].
pub fn sample_stats<R: Rng + ?Sized>(m: u32, rng: &mut R) -> Result<ChannelStats> {
    Ok(StatsSampler::new(m)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn fig1(rho_th_sq: f64) -> SystemParams {
        SystemParams::new(8, 1.0, 0.1, 10.0, 1.0, rho_th_sq).unwrap()
    }

    #[test]
    fn params_validation() {
        assert!(fig1(0.02).validate().is_ok());
        assert!(SystemParams::new(1, 1.0, 0.1, 10.0, 1.0, 0.02).is_err());
        assert!(SystemParams::new(8, 0.1, 1.0, 10.0, 1.0, 0.02).is_err());
        assert!(SystemParams::new(8, 1.0, 0.0, 10.0, 1.0, 0.02).is_err());
        assert!(SystemParams::new(8, 1.0, 0.1, -1.0, 1.0, 0.02).is_err());
        assert!(SystemParams::new(8, 1.0, 0.1, 10.0, 1.0, 1.2).is_err());
        // tie allowed
        assert!(SystemParams::new(8, 1.0, 1.0, 10.0, 1.0, 0.02).is_ok());
        let p = SystemParams::with_rho_th(8, 1.0, 0.1, 10.0, 1.0, 0.5).unwrap();
        assert_eq!(p.rho_th_sq, 0.25);
    }

    #[test]
    fn collinear_and_orthogonal() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let v = sample_vectors(6, &mut rng);
        let c = Complex64::new(-0.3, 2.1);
        let collinear = ChannelVectors {
            h1: v.h1.clone(),
            h2: v.h1.iter().map(|x| x * c).collect(),
        };
        assert_relative_eq!(stats_from_vectors(&collinear).unwrap().rho_sq, 1.0, epsilon = 1e-12);

        let orth = ChannelVectors {
            h1: vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            h2: vec![Complex64::new(0.0, 0.0), Complex64::new(0.0, 3.0)],
        };
        assert_eq!(stats_from_vectors(&orth).unwrap().rho_sq, 0.0);

        let s = std::f64::consts::FRAC_1_SQRT_2;
        let half = ChannelVectors {
            h1: vec![Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)],
            h2: vec![Complex64::new(s, 0.0), Complex64::new(s, 0.0)],
        };
        assert_relative_eq!(stats_from_vectors(&half).unwrap().rho_sq, 0.5, epsilon = 1e-15);
    }

    #[test]
    fn zero_norm_is_degenerate() {
        let v = ChannelVectors {
            h1: vec![Complex64::new(0.0, 0.0); 3],
            h2: vec![Complex64::new(1.0, 0.0); 3],
        };
        assert_eq!(stats_from_vectors(&v), Err(Error::DegenerateChannel));
    }

    #[test]
    fn fixed_seed_reproduces_stream() {
        let draw = |seed| {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let s = StatsSampler::new(8).unwrap();
            (0..100).map(|_| s.sample(&mut rng)).collect::<Vec<_>>()
        };
        let a = draw(11);
        let b = draw(11);
        assert!(a.iter().zip(&b).all(|(x, y)| {
            x.g1_sq.to_bits() == y.g1_sq.to_bits() && x.rho_sq.to_bits() == y.rho_sq.to_bits()
        }));
        assert_ne!(a, draw(12));
    }

    #[test]
    fn sampled_stats_in_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let s = StatsSampler::new(2).unwrap();
        for _ in 0..10_000 {
            let c = s.sample(&mut rng);
            assert!((0.0..=1.0).contains(&c.rho_sq));
            assert!(c.g1_sq > 0.0 && c.g2_sq > 0.0);
        }
    }
}
