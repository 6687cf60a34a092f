//! Pairwise comparison matrices (PCMs) for the analytic hierarchy process:
//! priority estimation, inconsistency indices, estimation-error metrics,
//! Monte Carlo studies of how well indices track estimation error, and an
//! acceptance rule based on the average triad inconsistency (ATI).
//!
//! ```
//! use pcmkit::{compute_ati, mpr_from_pv, rev, PriorityVector};
//!
//! let v = PriorityVector::new(vec![0.5, 0.25, 0.15, 0.1]).unwrap();
//! let m = mpr_from_pv(&v);
//! assert!(compute_ati(&m) < 1e-12);
//! let w = rev(&m).unwrap().weights;
//! assert!((w.get(0) - 0.5).abs() < 1e-9);
//! ```

pub mod acceptance;
pub mod error;
pub mod format;
pub mod indices;
pub mod loss;
pub mod pcm;
pub mod prioritization;
pub mod sim;
pub mod stats;

pub use acceptance::{
    assess_pcm, builtin_table, builtin_tables, AcceptanceVerdict, QuantileChoice, QuantileRow, QuantileTable,
};
pub use error::{Error, Result};
pub use indices::{
    compute_ati, compute_cr, compute_gi, compute_ki, compute_ki_ati, compute_si, enumerate_triads, estimate_asi,
    triad_inconsistency, IndexReport, Triad,
};
pub use loss::{avg_absolute_error, avg_relative_error, ErrorPair};
pub use pcm::{mpr_from_pv, round_pcm, round_to_scale, Pcm, PriorityVector, SaatyScale, ScaleValue};
pub use prioritization::{estimate, gm_estimate, rev, rev_estimate, Method, RevResult};
pub use stats::{
    class_correlations, make_partition, pearson, quantile, spearman, summarize_classes, summarize_pairs,
    Characteristic, ClassCorrelation, ClassPartition, ClassSummary,
};
