use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{evaluate, random_pv, unit_rng, with_threads, BigErrorModel, ErrorModel, Sampler, SimRecord, Stream};
use crate::error::{Error, Result};
use crate::pcm::{mpr_from_pv, Pcm, SaatyScale};

/// How records map onto true vectors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "layout", rename_all = "lowercase")]
pub enum Layout {
    /// A fresh true vector for every record.
    Flat,
    /// `per_vector` consecutive records share one true vector.
    Nested { per_vector: usize },
}

/// Many-small-plus-one-big-error framework settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MsobeConfig {
    pub n: usize,
    pub total: usize,
    /// Rounding scale; `None` skips rounding.
    #[serde(skip)]
    pub scale: Option<SaatyScale>,
    /// Small-error laws, each used for an equal consecutive share of records.
    pub models: Vec<ErrorModel>,
    pub big: BigErrorModel,
    pub seed: u64,
    pub layout: Layout,
    pub threads: usize,
}

impl MsobeConfig {
    /// Saaty rounding, the four standard laws, big error with probability 0.75.
    pub fn new(n: usize, total: usize, seed: u64) -> Self {
        Self {
            n,
            total,
            scale: Some(SaatyScale::standard()),
            models: ErrorModel::standard_set(),
            big: BigErrorModel::default(),
            seed,
            layout: Layout::Flat,
            threads: 0,
        }
    }

    /// Error law used for record `index`.
    pub fn model_for(&self, index: usize) -> &ErrorModel {
        let share = self.total / self.models.len();
        &self.models[(index / share).min(self.models.len() - 1)]
    }

    fn validate(&self) -> Result<()> {
        if self.n < 4 {
            return Err(Error::InvalidArgument(format!("MSOBE needs n >= 4, got {}", self.n)));
        }
        if self.models.is_empty() {
            return Err(Error::InvalidArgument("at least one error model is required".into()));
        }
        if self.total == 0 || !self.total.is_multiple_of(self.models.len()) {
            return Err(Error::InvalidArgument(format!(
                "total {} must be a positive multiple of the number of error models ({})",
                self.total,
                self.models.len()
            )));
        }
        if let Layout::Nested { per_vector: 0 } = self.layout {
            return Err(Error::InvalidArgument("per_vector must be positive".into()));
        }
        self.big.validate()?;
        for m in &self.models {
            m.verify()?;
        }
        Ok(())
    }
}

/// Records plus the indices of records dropped for non-convergence.
#[derive(Debug, Clone, PartialEq)]
pub struct MsobeOutput {
    pub records: Vec<SimRecord>,
    pub skipped: Vec<usize>,
}

/// Generates the record database.
pub fn run_msobe_sf(config: &MsobeConfig) -> Result<MsobeOutput> {
    config.validate()?;
    let samplers = config.models.iter().map(ErrorModel::sampler).collect::<Result<Vec<_>>>()?;
    let results = with_threads(config.threads, || {
        (0..config.total).into_par_iter().map(|idx| msobe_record(config, &samplers, idx)).collect::<Vec<_>>()
    })?;
    let mut records = Vec::with_capacity(config.total);
    let mut skipped = Vec::new();
    for (idx, r) in results.into_iter().enumerate() {
        match r {
            Ok(rec) => records.push(rec),
            Err(Error::NonConvergence { .. }) => skipped.push(idx),
            Err(e) => return Err(e),
        }
    }
    Ok(MsobeOutput { records, skipped })
}

fn msobe_record(config: &MsobeConfig, samplers: &[Sampler], idx: usize) -> Result<SimRecord> {
    let share = config.total / config.models.len();
    let model_idx = (idx / share).min(samplers.len() - 1);
    let sampler = &samplers[model_idx];
    let (seed, mut rng) = unit_rng(config.seed, Stream::Record, idx as u64);
    let (vector_id, perturbation_id, v) = match config.layout {
        Layout::Flat => (idx as u64, 0, random_pv(config.n, &mut rng)?),
        Layout::Nested { per_vector } => {
            let vid = (idx / per_vector) as u64;
            let (_, mut vrng) = unit_rng(config.seed, Stream::Vector, vid);
            (vid, (idx % per_vector) as u64, random_pv(config.n, &mut vrng)?)
        }
    };
    let mpr = mpr_from_pv(&v);
    let positions = Pcm::upper_positions(config.n);
    let big_error = rng.random_bool(config.big.apply_probability);
    let big_at = if big_error { Some((rng.random_range(0..positions.len()), config.big.draw(&mut rng))) } else { None };
    let disturbed: Vec<f64> = positions
        .iter()
        .enumerate()
        .map(|(p, &(i, j))| {
            let factor = match big_at {
                Some((q, eps_b)) if q == p => eps_b,
                _ => sampler.draw(&mut rng),
            };
            mpr.get(i, j) * factor
        })
        .collect();
    let raw = Pcm::from_upper(config.n, |i, j| disturbed[upper_slot(config.n, i, j)])?;
    let pcm = match &config.scale {
        Some(s) => raw.round_to(s),
        None => raw,
    };
    let e = evaluate(&pcm, &v)?;
    Ok(SimRecord {
        n: config.n,
        vector_id,
        perturbation_id,
        distribution: config.models[model_idx].tag().to_string(),
        big_error,
        si: e.si,
        gi: e.gi,
        ki: e.ki,
        ati: e.ati,
        ae_rev: e.rev.ae,
        re_rev: e.rev.re,
        ae_gm: e.gm.ae,
        re_gm: e.gm.re,
        seed,
    })
}

/// Position of `(i, j)`, `i < j`, in row-major upper-triangle order.
fn upper_slot(n: usize, i: usize, j: usize) -> usize {
    i * (2 * n - i - 1) / 2 + (j - i - 1)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn upper_slot_matches_enumeration() {
        for n in 3..9 {
            for (slot, (i, j)) in Pcm::upper_positions(n).into_iter().enumerate() {
                assert_eq!(upper_slot(n, i, j), slot);
            }
        }
    }

    #[test]
    fn error_free_pipeline_is_exact() {
        let cfg = MsobeConfig {
            scale: None,
            models: vec![ErrorModel::none()],
            big: BigErrorModel::disabled(),
            ..MsobeConfig::new(5, 40, 1)
        };
        let out = run_msobe_sf(&cfg).unwrap();
        assert_eq!(out.records.len(), 40);
        for r in &out.records {
            assert!(!r.big_error);
            for x in [r.si, r.gi, r.ki, r.ati, r.ae_rev, r.re_rev, r.ae_gm, r.re_gm] {
                assert!(x.abs() < 1e-9, "{r:?}");
            }
        }
    }

    #[test]
    fn distribution_quarters_and_layout() {
        let mut cfg = MsobeConfig::new(4, 16, 5);
        cfg.layout = Layout::Nested { per_vector: 3 };
        let out = run_msobe_sf(&cfg).unwrap();
        let tags: Vec<&str> = out.records.iter().map(|r| r.distribution.as_str()).collect();
        assert_eq!(&tags[0..4], ["gamma"; 4]);
        assert_eq!(&tags[12..16], ["uniform"; 4]);
        assert_eq!(out.records[4].vector_id, 1);
        assert_eq!(out.records[4].perturbation_id, 1);
        assert!(out.records.iter().all(|r| r.ati <= r.ki + 1e-15));
    }

    #[test]
    fn invalid_configs() {
        assert!(run_msobe_sf(&MsobeConfig::new(4, 10, 0)).is_err());
        assert!(run_msobe_sf(&MsobeConfig::new(3, 8, 0)).is_err());
        let mut cfg = MsobeConfig::new(4, 8, 0);
        cfg.big.apply_probability = 1.5;
        assert!(run_msobe_sf(&cfg).is_err());
        let mut cfg = MsobeConfig::new(4, 8, 0);
        cfg.models = vec![ErrorModel::LogNormal { mu: 0.0, sigma: 1.0 }];
        assert!(matches!(run_msobe_sf(&cfg), Err(Error::ErrorModel(_))));
    }
}
