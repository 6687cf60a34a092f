use rand::seq::IndexedRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{evaluate, random_pv, summarize_sweeps, unit_rng, with_threads, CorrelationSummary, Stream, Sweep};
use crate::error::{Error, Result};
use crate::pcm::{mpr_from_pv, Pcm};

/// Single-error magnitude sweep settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MseConfig {
    pub n: usize,
    pub runs: usize,
    /// Number of error increments `k = 1..=n_e`.
    pub n_e: usize,
    pub seed: u64,
    /// Range of the base error `eps`.
    pub eps_range: (f64, f64),
    /// Worker threads, 0 for the default pool.
    pub threads: usize,
}

impl MseConfig {
    pub fn new(n: usize, runs: usize, n_e: usize, seed: u64) -> Self {
        Self { n, runs, n_e, seed, eps_range: (1.01, 1.075), threads: 0 }
    }
}

/// Runs the magnitude-of-a-single-error framework.
pub fn run_mse_sf(config: &MseConfig) -> Result<CorrelationSummary> {
    if config.n < 4 {
        return Err(Error::InvalidArgument(format!("MSE needs n >= 4, got {}", config.n)));
    }
    if config.n_e < 2 {
        return Err(Error::InvalidArgument(format!("MSE needs n_e >= 2, got {}", config.n_e)));
    }
    if config.runs == 0 {
        return Err(Error::InvalidArgument("run count must be positive".into()));
    }
    let sweeps = with_threads(config.threads, || {
        (0..config.runs as u64).into_par_iter().map(|r| mse_run(config, r)).collect::<Vec<_>>()
    })?;
    summarize_sweeps("mse", config.n, sweeps)
}

fn mse_run(config: &MseConfig, run: u64) -> Result<Sweep> {
    let (_, mut rng) = unit_rng(config.seed, Stream::Run, run);
    let v = random_pv(config.n, &mut rng)?;
    let base = mpr_from_pv(&v);
    let positions = Pcm::upper_positions(config.n);
    let &(i, j) = positions.choose(&mut rng).expect("n >= 4");
    let (lo, hi) = config.eps_range;
    let eps: f64 = rng.random_range(lo..=hi);
    let mut driver = Vec::with_capacity(config.n_e);
    let mut steps = Vec::with_capacity(config.n_e);
    for k in 1..=config.n_e {
        let factor = eps.powi(k as i32);
        let mut m = base.clone();
        m.set_pair(i, j, base.get(i, j) * factor);
        driver.push(factor);
        steps.push(evaluate(&m, &v)?);
    }
    Ok(Sweep { driver, steps })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{IndexKind, Quantity};

    #[test]
    fn small_sweep_is_perfectly_ranked() {
        let s = run_mse_sf(&MseConfig::new(5, 20, 10, 3)).unwrap();
        assert_eq!(s.runs, 20);
        assert_eq!(s.skipped, 0);
        for k in IndexKind::ALL {
            let c = s.cell(Quantity::Index(k), Quantity::Driver).unwrap();
            assert_eq!(c.min_spearman, 1.0, "{k:?}");
            assert_eq!(c.defined_runs, 20);
        }
    }

    #[test]
    fn rejects_bad_parameters() {
        assert!(run_mse_sf(&MseConfig::new(3, 5, 5, 0)).is_err());
        assert!(run_mse_sf(&MseConfig::new(4, 5, 1, 0)).is_err());
        assert!(run_mse_sf(&MseConfig::new(4, 0, 5, 0)).is_err());
    }
}
