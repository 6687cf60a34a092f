//! Multiplicative judgment-error laws.

use rand::Rng;
use rand_distr::{Distribution, Gamma, LogNormal, Normal};
use serde::{Deserialize, Serialize};
use statrs::distribution::{Continuous, ContinuousCDF};

use crate::error::{Error, Result};

/// Interval on which small perturbation factors are expected to live.
pub const SMALL_ERROR_SUPPORT: (f64, f64) = (0.5, 1.5);
/// Minimum probability of [`SMALL_ERROR_SUPPORT`] for unbounded laws.
pub const MIN_SUPPORT_MASS: f64 = 0.98;

/// Law of a small perturbation factor `eps_ij` with expected value 1.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "distribution", rename_all = "lowercase")]
pub enum ErrorModel {
    Gamma { shape: f64, scale: f64 },
    LogNormal { mu: f64, sigma: f64 },
    TruncNormal { mean: f64, sd: f64, lo: f64, hi: f64 },
    Uniform { lo: f64, hi: f64 },
}

impl ErrorModel {
    pub fn gamma() -> Self {
        ErrorModel::Gamma { shape: 50.0, scale: 1.0 / 50.0 }
    }

    pub fn log_normal() -> Self {
        let sigma = 0.15;
        ErrorModel::LogNormal { mu: -sigma * sigma / 2.0, sigma }
    }

    pub fn trunc_normal() -> Self {
        let (lo, hi) = SMALL_ERROR_SUPPORT;
        ErrorModel::TruncNormal { mean: 1.0, sd: 0.25, lo, hi }
    }

    pub fn uniform() -> Self {
        let (lo, hi) = SMALL_ERROR_SUPPORT;
        ErrorModel::Uniform { lo, hi }
    }

    /// A factor that is always exactly 1.
    pub fn none() -> Self {
        ErrorModel::Uniform { lo: 1.0, hi: 1.0 }
    }

    /// Gamma, log-normal, truncated normal and uniform, in that order.
    pub fn standard_set() -> Vec<Self> {
        vec![Self::gamma(), Self::log_normal(), Self::trunc_normal(), Self::uniform()]
    }

    /// Short tag used in databases and on the command line.
    pub fn tag(&self) -> &'static str {
        match self {
            ErrorModel::Gamma { .. } => "gamma",
            ErrorModel::LogNormal { .. } => "lognormal",
            ErrorModel::TruncNormal { .. } => "truncnormal",
            ErrorModel::Uniform { .. } => "uniform",
        }
    }

    /// Default model for a tag.
    pub fn from_tag(tag: &str) -> Result<Self> {
        match tag.trim().to_ascii_lowercase().as_str() {
            "gamma" => Ok(Self::gamma()),
            "lognormal" | "log-normal" => Ok(Self::log_normal()),
            "truncnormal" | "truncated-normal" | "truncated_normal" => Ok(Self::trunc_normal()),
            "uniform" => Ok(Self::uniform()),
            other => Err(Error::InvalidArgument(format!("unknown error distribution {other:?}"))),
        }
    }

    /// Analytic expected value.
    pub fn mean(&self) -> Result<f64> {
        Ok(match *self {
            ErrorModel::Gamma { shape, scale } => shape * scale,
            ErrorModel::LogNormal { mu, sigma } => (mu + sigma * sigma / 2.0).exp(),
            ErrorModel::TruncNormal { mean, sd, lo, hi } => {
                let z = std_normal();
                let (a, b) = ((lo - mean) / sd, (hi - mean) / sd);
                mean + sd * (z.pdf(a) - z.pdf(b)) / (z.cdf(b) - z.cdf(a))
            }
            ErrorModel::Uniform { lo, hi } => (lo + hi) / 2.0,
        })
    }

    /// Probability of the interval `[lo, hi]`.
    pub fn mass_on(&self, lo: f64, hi: f64) -> Result<f64> {
        let bad = |e: &dyn std::fmt::Display| Error::ErrorModel(e.to_string());
        Ok(match *self {
            ErrorModel::Gamma { shape, scale } => {
                let g = statrs::distribution::Gamma::new(shape, 1.0 / scale).map_err(|e| bad(&e))?;
                g.cdf(hi) - g.cdf(lo)
            }
            ErrorModel::LogNormal { mu, sigma } => {
                let g = statrs::distribution::LogNormal::new(mu, sigma).map_err(|e| bad(&e))?;
                g.cdf(hi) - g.cdf(lo)
            }
            ErrorModel::TruncNormal { mean, sd, lo: a, hi: b } => {
                let z = std_normal();
                let cdf = |x: f64| z.cdf((x.clamp(a, b) - mean) / sd);
                (cdf(hi) - cdf(lo)) / (cdf(b) - cdf(a))
            }
            ErrorModel::Uniform { lo: a, hi: b } => {
                if a == b {
                    if (lo..=hi).contains(&a) {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    ((b.min(hi) - a.max(lo)) / (b - a)).max(0.0)
                }
            }
        })
    }

    /// Checks unit mean (1e-3) and the support-mass requirement, failing
    /// with a descriptive error otherwise.
    pub fn verify(&self) -> Result<()> {
        let m = self.mean()?;
        if (m - 1.0).abs() > 1e-3 {
            return Err(Error::ErrorModel(format!("{} has mean {m}, expected 1", self.tag())));
        }
        let (lo, hi) = SMALL_ERROR_SUPPORT;
        let mass = self.mass_on(lo, hi)?;
        let need = match self {
            ErrorModel::Gamma { .. } | ErrorModel::LogNormal { .. } => MIN_SUPPORT_MASS,
            _ => 1.0,
        };
        if mass < need - 1e-12 {
            return Err(Error::ErrorModel(format!(
                "{} puts mass {mass:.4} on [{lo}, {hi}], need at least {need}",
                self.tag()
            )));
        }
        Ok(())
    }

    /// Prepared sampler.
    pub fn sampler(&self) -> Result<Sampler> {
        let bad = |e: &dyn std::fmt::Display| Error::ErrorModel(format!("{}: {e}", self.tag()));
        Ok(match *self {
            ErrorModel::Gamma { shape, scale } => Sampler::Gamma(Gamma::new(shape, scale).map_err(|e| bad(&e))?),
            ErrorModel::LogNormal { mu, sigma } => Sampler::LogNormal(LogNormal::new(mu, sigma).map_err(|e| bad(&e))?),
            ErrorModel::TruncNormal { mean, sd, lo, hi } => {
                if lo.is_nan() || hi.is_nan() || lo >= hi || !(lo..=hi).contains(&mean) {
                    return Err(Error::ErrorModel(format!("bad truncation [{lo}, {hi}] for mean {mean}")));
                }
                Sampler::TruncNormal(Normal::new(mean, sd).map_err(|e| bad(&e))?, lo, hi)
            }
            ErrorModel::Uniform { lo, hi } => {
                if !(lo > 0.0 && lo <= hi) {
                    return Err(Error::ErrorModel(format!("bad uniform range [{lo}, {hi}]")));
                }
                Sampler::Uniform(lo, hi)
            }
        })
    }
}

fn std_normal() -> statrs::distribution::Normal {
    statrs::distribution::Normal::new(0.0, 1.0).expect("standard normal")
}

/// A ready-to-draw form of an [`ErrorModel`].
#[derive(Debug, Clone, Copy)]
pub enum Sampler {
    Gamma(Gamma<f64>),
    LogNormal(LogNormal<f64>),
    TruncNormal(Normal<f64>, f64, f64),
    Uniform(f64, f64),
}

impl Sampler {
    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        match self {
            Sampler::Gamma(g) => g.sample(rng),
            Sampler::LogNormal(g) => g.sample(rng),
            Sampler::TruncNormal(g, lo, hi) => loop {
                let x = g.sample(rng);
                if x >= *lo && x <= *hi {
                    break x;
                }
            },
            Sampler::Uniform(lo, hi) => {
                if lo == hi {
                    *lo
                } else {
                    rng.random_range(*lo..=*hi)
                }
            }
        }
    }
}

/// The optional single large error.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BigErrorModel {
    pub lo: f64,
    pub hi: f64,
    /// Fraction of records that receive a big error.
    pub apply_probability: f64,
}

impl Default for BigErrorModel {
    fn default() -> Self {
        Self { lo: 2.0, hi: 4.0, apply_probability: 0.75 }
    }
}

impl BigErrorModel {
    pub fn disabled() -> Self {
        Self { apply_probability: 0.0, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.apply_probability) {
            return Err(Error::InvalidArgument(format!(
                "big-error probability {} outside [0, 1]",
                self.apply_probability
            )));
        }
        if !(self.lo > 0.0 && self.lo <= self.hi) {
            return Err(Error::InvalidArgument(format!("bad big-error range [{}, {}]", self.lo, self.hi)));
        }
        Ok(())
    }

    pub fn draw<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.lo == self.hi {
            self.lo
        } else {
            rng.random_range(self.lo..=self.hi)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn default_models_pass_their_checks() {
        for m in ErrorModel::standard_set() {
            m.verify().unwrap();
            assert_eq!(ErrorModel::from_tag(m.tag()).unwrap(), m);
        }
        ErrorModel::none().verify().unwrap();
    }

    #[test]
    fn support_mass_of_unbounded_laws() {
        assert!(ErrorModel::gamma().mass_on(0.5, 1.5).unwrap() > 0.99);
        assert!(ErrorModel::log_normal().mass_on(0.5, 1.5).unwrap() > 0.99);
    }

    #[test]
    fn violations_fail_loudly() {
        let wide = ErrorModel::LogNormal { mu: -0.5, sigma: 1.0 };
        assert!(matches!(wide.verify(), Err(Error::ErrorModel(_))));
        let biased = ErrorModel::Uniform { lo: 0.5, hi: 1.7 };
        assert!(biased.verify().is_err());
        assert!(ErrorModel::from_tag("cauchy").is_err());
    }

    #[test]
    fn draws_respect_supports() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let tn = ErrorModel::trunc_normal().sampler().unwrap();
        let un = ErrorModel::uniform().sampler().unwrap();
        for _ in 0..10_000 {
            let a = tn.draw(&mut rng);
            let b = un.draw(&mut rng);
            assert!((0.5..=1.5).contains(&a) && (0.5..=1.5).contains(&b));
        }
        assert_eq!(ErrorModel::none().sampler().unwrap().draw(&mut rng), 1.0);
        let big = BigErrorModel::default();
        for _ in 0..1000 {
            assert!((2.0..=4.0).contains(&big.draw(&mut rng)));
        }
    }
}
