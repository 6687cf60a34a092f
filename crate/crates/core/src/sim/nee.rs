use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{evaluate, random_pv, summarize_sweeps, unit_rng, with_threads, CorrelationSummary, Stream, Sweep};
use crate::error::{Error, Result};
use crate::pcm::{mpr_from_pv, Pcm};

/// Number-of-equal-errors sweep settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NeeConfig {
    pub n: usize,
    /// Number of random true vectors.
    pub n_r: usize,
    /// Random permutations (setups) per vector.
    pub n_p: usize,
    pub seed: u64,
    pub eps_range: (f64, f64),
    pub threads: usize,
}

impl NeeConfig {
    pub fn new(n: usize, n_r: usize, n_p: usize, seed: u64) -> Self {
        Self { n, n_r, n_p, seed, eps_range: (1.1, 1.8), threads: 0 }
    }
}

/// Runs the number-of-equal-errors framework over `n_r * n_p` setups.
pub fn run_nee_sf(config: &NeeConfig) -> Result<CorrelationSummary> {
    if config.n < 4 {
        return Err(Error::InvalidArgument(format!("NEE needs n >= 4, got {}", config.n)));
    }
    if config.n_r == 0 || config.n_p == 0 {
        return Err(Error::InvalidArgument("n_r and n_p must be positive".into()));
    }
    let setups = (config.n_r * config.n_p) as u64;
    let sweeps =
        with_threads(config.threads, || (0..setups).into_par_iter().map(|s| nee_setup(config, s)).collect::<Vec<_>>())?;
    summarize_sweeps("nee", config.n, sweeps)
}

fn nee_setup(config: &NeeConfig, setup: u64) -> Result<Sweep> {
    let vector_id = setup / config.n_p as u64;
    let (_, mut vrng) = unit_rng(config.seed, Stream::Vector, vector_id);
    let v = random_pv(config.n, &mut vrng)?;
    let (_, mut rng) = unit_rng(config.seed, Stream::Setup, setup);
    let mut positions = Pcm::upper_positions(config.n);
    positions.shuffle(&mut rng);
    let (lo, hi) = config.eps_range;
    let eps: f64 = rng.random_range(lo..=hi);
    let mut m = mpr_from_pv(&v);
    let mut driver = Vec::with_capacity(positions.len());
    let mut steps = Vec::with_capacity(positions.len());
    for (count, &(i, j)) in positions.iter().enumerate() {
        m.perturb_in_place(i, j, eps);
        driver.push((count + 1) as f64);
        steps.push(evaluate(&m, &v)?);
    }
    Ok(Sweep { driver, steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{IndexKind, Quantity};

    #[test]
    fn setups_are_counted_and_seeded() {
        let cfg = NeeConfig::new(4, 3, 2, 7);
        let a = run_nee_sf(&cfg).unwrap();
        let b = run_nee_sf(&NeeConfig { threads: 1, ..cfg }).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.runs, 6);
        let ati = a.spearman(Quantity::Index(IndexKind::Ati), Quantity::Driver);
        assert!((-1.0..=1.0).contains(&ati));
    }
}
