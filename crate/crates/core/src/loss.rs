//! Estimation-error loss functions between a true vector and an estimate.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Both losses for one estimate. `re` is a fraction, not a percentage.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorPair {
    pub ae: f64,
    pub re: f64,
}

impl ErrorPair {
    pub fn between(truth: &[f64], estimate: &[f64]) -> Result<Self> {
        Ok(Self { ae: avg_absolute_error(truth, estimate)?, re: avg_relative_error(truth, estimate)? })
    }
}

fn check_dims(truth: &[f64], estimate: &[f64]) -> Result<()> {
    if truth.len() != estimate.len() {
        return Err(Error::DimensionMismatch { expected: truth.len(), found: estimate.len() });
    }
    if truth.is_empty() {
        return Err(Error::InvalidArgument("empty vectors".into()));
    }
    Ok(())
}

/// Mean of `|v_i - w_i|`.
pub fn avg_absolute_error(truth: &[f64], estimate: &[f64]) -> Result<f64> {
    check_dims(truth, estimate)?;
    let s: f64 = truth.iter().zip(estimate).map(|(v, w)| (v - w).abs()).sum();
    Ok(s / truth.len() as f64)
}

/// Mean of `|v_i - w_i| / v_i`; the denominator is always the true vector.
pub fn avg_relative_error(truth: &[f64], estimate: &[f64]) -> Result<f64> {
    check_dims(truth, estimate)?;
    if let Some(bad) = truth.iter().find(|v| v.is_nan() || **v <= 0.0) {
        return Err(Error::InvalidArgument(format!("true weight {bad} is not positive")));
    }
    let s: f64 = truth.iter().zip(estimate).map(|(v, w)| (v - w).abs() / v).sum();
    Ok(s / truth.len() as f64)
}
