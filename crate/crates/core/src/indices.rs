//! Inconsistency indices: Saaty's SI and CR, the geometric index GI,
//! Koczkodaj's triad-based KI, and the average triad inconsistency ATI.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pcm::{Pcm, SaatyScale};
use crate::prioritization::{gm_estimate, rev, RevResult};

/// Three entries `(alpha, beta, chi) = (a_ik, a_ij, a_kj)` for `i < k < j`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Triad {
    pub alpha: f64,
    pub beta: f64,
    pub chi: f64,
    /// Zero-based `(i, k, j)`.
    pub positions: (usize, usize, usize),
}

impl Triad {
    pub fn inconsistency(&self) -> f64 {
        triad_inconsistency(self.alpha, self.beta, self.chi)
    }
}

/// `min(|1 - beta/(alpha chi)|, |1 - alpha chi/beta|)`.
#[inline]
pub fn triad_inconsistency(alpha: f64, beta: f64, chi: f64) -> f64 {
    let ac = alpha * chi;
    (1.0 - beta / ac).abs().min((1.0 - ac / beta).abs())
}

/// All `C(n, 3)` upper-triangle triads.
pub fn enumerate_triads(pcm: &Pcm) -> Vec<Triad> {
    let n = pcm.order();
    let mut out = Vec::with_capacity(n * (n - 1) * (n - 2) / 6);
    for i in 0..n {
        for k in (i + 1)..n {
            for j in (k + 1)..n {
                out.push(Triad { alpha: pcm.get(i, k), beta: pcm.get(i, j), chi: pcm.get(k, j), positions: (i, k, j) });
            }
        }
    }
    out
}

/// `(KI, ATI)`: max and mean triad inconsistency in one pass.
pub fn compute_ki_ati(pcm: &Pcm) -> (f64, f64) {
    let n = pcm.order();
    let mut max = 0.0f64;
    let mut sum = 0.0;
    let mut count = 0usize;
    for i in 0..n {
        for k in (i + 1)..n {
            let alpha = pcm.get(i, k);
            for j in (k + 1)..n {
                let t = triad_inconsistency(alpha, pcm.get(i, j), pcm.get(k, j));
                max = max.max(t);
                sum += t;
                count += 1;
            }
        }
    }
    (max, sum / count as f64)
}

/// Koczkodaj's index: the largest triad inconsistency.
pub fn compute_ki(pcm: &Pcm) -> f64 {
    compute_ki_ati(pcm).0
}

/// Average triad inconsistency over every upper-triangle triad.
pub fn compute_ati(pcm: &Pcm) -> f64 {
    compute_ki_ati(pcm).1
}

/// `(lambda_max - n) / (n - 1)` from an already computed eigen-solution.
pub fn si_from_lambda(lambda_max: f64, n: usize) -> f64 {
    (lambda_max - n as f64) / (n as f64 - 1.0)
}

/// Saaty's index from the principal eigenvalue.
pub fn compute_si(pcm: &Pcm) -> Result<f64> {
    Ok(si_from_lambda(rev(pcm)?.lambda_max, pcm.order()))
}

/// `SI / ASI`.
pub fn compute_cr(pcm: &Pcm, asi: f64) -> Result<f64> {
    cr_from_si(compute_si(pcm)?, asi)
}

pub fn cr_from_si(si: f64, asi: f64) -> Result<f64> {
    if !(asi.is_finite() && asi > 0.0) {
        return Err(Error::InvalidArgument(format!("ASI must be positive, got {asi}")));
    }
    Ok(si / asi)
}

/// Geometric consistency index from given weights (natural logarithm).
pub fn gi_with_weights(pcm: &Pcm, w: &[f64]) -> f64 {
    let n = pcm.order();
    let mut sum = 0.0;
    for i in 0..n {
        for j in (i + 1)..n {
            let e = (pcm.get(i, j) * w[j] / w[i]).ln();
            sum += e * e;
        }
    }
    2.0 * sum / ((n - 1) * (n - 2)) as f64
}

/// Geometric consistency index on the row-geometric-mean weights.
pub fn compute_gi(pcm: &Pcm) -> f64 {
    gi_with_weights(pcm, gm_estimate(pcm).as_slice())
}

/// Mean SI over `sample_size` random reciprocal matrices whose upper-triangle
/// entries are uniform over the Saaty scale.
pub fn estimate_asi(n: usize, sample_size: usize, seed: u64) -> Result<f64> {
    let scale = SaatyScale::standard();
    let values: Vec<f64> = scale.values().iter().map(|s| s.value()).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    estimate_asi_with(n, sample_size, |_| Pcm::from_upper(n, |_, _| values[rng.random_range(0..values.len())]))
}

/// ASI over matrices produced by `generate(sample_index)`.
pub fn estimate_asi_with(n: usize, sample_size: usize, mut generate: impl FnMut(usize) -> Result<Pcm>) -> Result<f64> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("ASI needs n >= 3, got {n}")));
    }
    if sample_size == 0 {
        return Err(Error::InvalidArgument("ASI sample size must be positive".into()));
    }
    let mut total = 0.0;
    for s in 0..sample_size {
        let m = generate(s)?;
        if m.order() != n {
            return Err(Error::DimensionMismatch { expected: n, found: m.order() });
        }
        total += compute_si(&m)?;
    }
    Ok(total / sample_size as f64)
}

/// The five index values for one matrix. `cr` is informational and only
/// present when an ASI was supplied.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IndexReport {
    pub si: f64,
    #[serde(skip_serializing_if = "Option::is_none", default)]
    pub cr: Option<f64>,
    pub gi: f64,
    pub ki: f64,
    pub ati: f64,
}

impl IndexReport {
    /// Computes all indices of a reciprocal matrix. `asi` enables CR.
    pub fn compute(pcm: &Pcm, asi: Option<f64>) -> Result<Self> {
        let eig = rev(pcm)?;
        Self::from_parts(pcm, &eig, asi)
    }

    /// Same as [`Self::compute`] but reusing an eigen-solution.
    pub fn from_parts(pcm: &Pcm, eig: &RevResult, asi: Option<f64>) -> Result<Self> {
        // Perron: lambda_max >= n for reciprocal input, so negatives are rounding.
        let si = si_from_lambda(eig.lambda_max, pcm.order()).max(0.0);
        let cr = asi.map(|a| cr_from_si(si, a)).transpose()?;
        let (ki, ati) = compute_ki_ati(pcm);
        Ok(Self { si, cr, gi: compute_gi(pcm), ki, ati })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pcm::{mpr_from_pv, PriorityVector};

    #[test]
    fn triad_values() {
        assert_eq!(triad_inconsistency(2.0, 4.0, 2.0), 0.0);
        assert_eq!(triad_inconsistency(1.0, 2.0, 1.0), 0.5);
        assert!((triad_inconsistency(3.0, 2.0, 1.0) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn triad_counts() {
        for (n, c) in [(3, 1), (4, 4), (7, 35)] {
            let t = enumerate_triads(&Pcm::identity(n).unwrap());
            assert_eq!(t.len(), c);
            assert!(t.iter().all(|t| t.positions.0 < t.positions.1 && t.positions.1 < t.positions.2));
        }
    }

    #[test]
    fn consistent_matrix_has_zero_indices() {
        let v = PriorityVector::new(vec![0.1, 0.4, 0.2, 0.3]).unwrap();
        let r = IndexReport::compute(&mpr_from_pv(&v), Some(0.9)).unwrap();
        assert!(r.si.abs() < 1e-12 && r.gi < 1e-24 && r.ki < 1e-15 && r.ati < 1e-15);
        assert!(r.cr.unwrap().abs() < 1e-12);
    }

    #[test]
    fn cr_quotients() {
        assert!((cr_from_si(0.058, 0.90).unwrap() - 0.0644).abs() < 1e-4);
        assert_eq!(cr_from_si(0.3, 0.3).unwrap(), 1.0);
        assert!(cr_from_si(0.1, 0.0).is_err());
        assert!(cr_from_si(0.1, -1.0).is_err());
    }

    #[test]
    fn asi_with_consistent_sample_is_zero() {
        let v = PriorityVector::new(vec![0.5, 0.3, 0.2]).unwrap();
        let asi = estimate_asi_with(3, 20, |_| Ok(mpr_from_pv(&v))).unwrap();
        assert!(asi.abs() < 1e-12);
        assert!(estimate_asi(2, 10, 0).is_err());
        assert!(estimate_asi(4, 0, 0).is_err());
    }

    #[test]
    fn asi_is_seed_deterministic() {
        assert_eq!(estimate_asi(4, 50, 11).unwrap(), estimate_asi(4, 50, 11).unwrap());
    }

    #[test]
    fn index_report_json_keys() {
        let r = IndexReport { si: 0.1, cr: Some(0.2), gi: 0.3, ki: 0.4, ati: 0.25 };
        let v: serde_json::Value = serde_json::to_value(r).unwrap();
        let mut keys: Vec<_> = v.as_object().unwrap().keys().cloned().collect();
        keys.sort();
        assert_eq!(keys, ["ati", "cr", "gi", "ki", "si"]);
    }
}
