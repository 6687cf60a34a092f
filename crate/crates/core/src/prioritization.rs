//! Priority-vector estimators: principal right eigenvector (REV) and row
//! geometric mean (GM).

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::pcm::{Pcm, PriorityVector};

/// Default convergence tolerance for [`rev_estimate`].
pub const REV_TOL: f64 = 1e-12;
/// Default iteration cap for [`rev_estimate`].
pub const REV_MAX_ITER: usize = 10_000;

/// Prioritization method selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Rev,
    Gm,
}

impl Method {
    pub fn label(self) -> &'static str {
        match self {
            Method::Rev => "REV",
            Method::Gm => "GM",
        }
    }
}

impl std::fmt::Display for Method {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.label())
    }
}

impl std::str::FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "rev" => Ok(Method::Rev),
            "gm" => Ok(Method::Gm),
            other => Err(Error::InvalidArgument(format!("unknown method {other:?}"))),
        }
    }
}

/// Outcome of the power iteration.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RevResult {
    pub weights: PriorityVector,
    pub lambda_max: f64,
    pub iterations: usize,
    /// `max_i |(A w)_i - lambda_max w_i|` at the returned iterate.
    pub residual: f64,
}

/// Power iteration from the all-ones vector, renormalized to unit sum each
/// step. The eigenvalue is taken as the mean of `(A w)_i / w_i`; iteration
/// stops once `max_i |(A w)_i - lambda w_i| <= tol`.
pub fn rev_estimate(pcm: &Pcm, tol: f64, max_iter: usize) -> Result<RevResult> {
    if tol.is_nan() || tol <= 0.0 {
        return Err(Error::InvalidArgument(format!("tolerance {tol} must be positive")));
    }
    let n = pcm.order();
    let mut w = vec![1.0 / n as f64; n];
    let mut y = vec![0.0; n];
    let mut residual = f64::INFINITY;
    for iteration in 0..=max_iter {
        multiply(pcm, &w, &mut y);
        let lambda = y.iter().zip(&w).map(|(yi, wi)| yi / wi).sum::<f64>() / n as f64;
        residual = y.iter().zip(&w).map(|(yi, wi)| (yi - lambda * wi).abs()).fold(0.0, f64::max);
        if residual <= tol {
            return Ok(RevResult {
                weights: PriorityVector::new(w)?,
                lambda_max: lambda,
                iterations: iteration,
                residual,
            });
        }
        let sum: f64 = y.iter().sum();
        for (wi, yi) in w.iter_mut().zip(&y) {
            *wi = yi / sum;
        }
    }
    Err(Error::NonConvergence { iterations: max_iter, residual, last_iterate: w })
}

/// [`rev_estimate`] with the default tolerance and iteration cap.
pub fn rev(pcm: &Pcm) -> Result<RevResult> {
    rev_estimate(pcm, REV_TOL, REV_MAX_ITER)
}

fn multiply(pcm: &Pcm, w: &[f64], out: &mut [f64]) {
    for (o, row) in out.iter_mut().zip(pcm.rows()) {
        *o = row.iter().zip(w).map(|(a, x)| a * x).sum();
    }
}

/// Row geometric means normalized to unit sum.
pub fn gm_estimate(pcm: &Pcm) -> PriorityVector {
    let n = pcm.order() as f64;
    let g: Vec<f64> = pcm.rows().map(|row| (row.iter().map(|a| a.ln()).sum::<f64>() / n).exp()).collect();
    PriorityVector::normalized(g).expect("geometric means of a positive matrix are positive")
}

/// Estimate with either method (REV at default settings).
pub fn estimate(pcm: &Pcm, method: Method) -> Result<PriorityVector> {
    match method {
        Method::Rev => rev(pcm).map(|r| r.weights),
        Method::Gm => Ok(gm_estimate(pcm)),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::pcm::{mpr_from_pv, SaatyScale};

    fn close(a: &[f64], b: &[f64], tol: f64) -> bool {
        a.iter().zip(b).all(|(x, y)| (x - y).abs() <= tol)
    }

    #[test]
    fn consistent_matrix_returns_generating_vector() {
        let v = PriorityVector::new(vec![0.1, 0.2, 0.3, 0.15, 0.25]).unwrap();
        let m = mpr_from_pv(&v);
        let r = rev(&m).unwrap();
        assert!(close(r.weights.as_slice(), v.as_slice(), 1e-12));
        assert!((r.lambda_max - 5.0).abs() < 1e-12);
        assert!(r.residual <= REV_TOL);
        assert!(close(gm_estimate(&m).as_slice(), v.as_slice(), 1e-12));
    }

    #[test]
    fn identity_gives_uniform_weights() {
        let m = Pcm::identity(4).unwrap();
        assert!(close(rev(&m).unwrap().weights.as_slice(), &[0.25; 4], 1e-15));
        assert!(close(gm_estimate(&m).as_slice(), &[0.25; 4], 1e-15));
    }

    #[test]
    fn iteration_cap_reports_last_iterate() {
        let m = Pcm::parse_csv("1,3,1/5\n1/3,1,7\n5,1/7,1").unwrap();
        match rev_estimate(&m, 1e-15, 2) {
            Err(Error::NonConvergence { iterations: 2, last_iterate, residual }) => {
                assert_eq!(last_iterate.len(), 3);
                assert!(residual > 1e-15);
            }
            other => panic!("expected non-convergence, got {other:?}"),
        }
        assert!(rev_estimate(&m, 0.0, 10).is_err());
    }

    #[test]
    fn lambda_max_is_at_least_n_for_rounded_matrices() {
        let s = SaatyScale::standard();
        let v = PriorityVector::new(vec![0.46, 0.25, 0.19, 0.10]).unwrap();
        let m = mpr_from_pv(&v).perturb_entry(0, 3, 3.0).unwrap().round_to(&s);
        let r = rev(&m).unwrap();
        assert!(r.lambda_max >= 4.0 - 1e-9);
    }

    #[test]
    fn method_parsing() {
        assert_eq!("REV".parse::<Method>().unwrap(), Method::Rev);
        assert_eq!("gm".parse::<Method>().unwrap(), Method::Gm);
        assert!("lls".parse::<Method>().is_err());
    }
}
