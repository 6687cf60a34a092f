//! Correlation coefficients, empirical quantiles, and the quantile-based
//! class partition used to summarize error distributions per index range.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{ErrorKind, IndexKind, SimRecord};

/// Pearson product-moment correlation.
pub fn pearson(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    if x.len() < 2 {
        return Err(Error::InvalidArgument("correlation needs at least two points".into()));
    }
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let (mut sxy, mut sxx, mut syy) = (0.0, 0.0, 0.0);
    for (a, b) in x.iter().zip(y) {
        let (dx, dy) = (a - mx, b - my);
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    if sxx == 0.0 || syy == 0.0 {
        return Err(Error::UndefinedCorrelation("zero variance"));
    }
    // One square root keeps identical rank vectors at exactly 1.
    Ok((sxy / (sxx * syy).sqrt()).clamp(-1.0, 1.0))
}

/// Ranks starting at 1; tied values share the average of their positions.
pub fn average_ranks(x: &[f64]) -> Vec<f64> {
    let mut order: Vec<usize> = (0..x.len()).collect();
    order.sort_by(|&a, &b| x[a].total_cmp(&x[b]));
    let mut ranks = vec![0.0; x.len()];
    let mut start = 0;
    while start < order.len() {
        let mut end = start + 1;
        while end < order.len() && x[order[end]] == x[order[start]] {
            end += 1;
        }
        // positions start+1 ..= end
        let avg = (start + 1 + end) as f64 / 2.0;
        for &idx in &order[start..end] {
            ranks[idx] = avg;
        }
        start = end;
    }
    ranks
}

/// Spearman's rho: Pearson correlation of average ranks.
pub fn spearman(x: &[f64], y: &[f64]) -> Result<f64> {
    if x.len() != y.len() {
        return Err(Error::DimensionMismatch { expected: x.len(), found: y.len() });
    }
    pearson(&average_ranks(x), &average_ranks(y))
}

/// Linear-interpolation quantile on the sorted sample with plotting position
/// `h = (N - 1) p` (zero-based), i.e. the common "type 7" estimator.
pub fn quantile(sample: &[f64], p: f64) -> Result<f64> {
    if sample.is_empty() {
        return Err(Error::InvalidArgument("quantile of an empty sample".into()));
    }
    let mut sorted = sample.to_vec();
    sorted.sort_by(f64::total_cmp);
    quantile_sorted(&sorted, p)
}

/// [`quantile`] on data that is already sorted ascending.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> Result<f64> {
    if sorted.is_empty() {
        return Err(Error::InvalidArgument("quantile of an empty sample".into()));
    }
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::InvalidArgument(format!("quantile order {p} outside [0, 1]")));
    }
    let h = (sorted.len() - 1) as f64 * p;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    Ok(sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo]))
}

fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}

/// Class cut points `0 = b_0 < b_1 < ... < b_{N_C - 1} < b_{N_C} = inf`.
///
/// `b_1` and `b_{N_C - 1}` are the sample quantiles of order `1/N_C` and
/// `1 - 1/N_C`; the classes between them share one width. Class `i` is the
/// half-open interval `[b_i, b_{i+1})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassPartition {
    boundaries: Vec<f64>,
}

impl ClassPartition {
    pub fn n_classes(&self) -> usize {
        self.boundaries.len() - 1
    }

    pub fn boundaries(&self) -> &[f64] {
        &self.boundaries
    }

    pub fn bounds(&self, class: usize) -> (f64, f64) {
        (self.boundaries[class], self.boundaries[class + 1])
    }

    /// Zero-based class containing `x`. Values below zero fall into class 0.
    pub fn class_of(&self, x: f64) -> usize {
        let inner = &self.boundaries[1..self.boundaries.len() - 1];
        inner.partition_point(|&b| b <= x)
    }
}

/// Builds the quantile-anchored partition of `index_values`.
pub fn make_partition(index_values: &[f64], n_classes: usize) -> Result<ClassPartition> {
    if n_classes < 3 {
        return Err(Error::InvalidArgument(format!("need at least 3 classes, got {n_classes}")));
    }
    if index_values.len() < n_classes {
        return Err(Error::InvalidArgument(format!("{} values cannot fill {n_classes} classes", index_values.len())));
    }
    let mut sorted = index_values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let nc = n_classes as f64;
    let lower = quantile_sorted(&sorted, 1.0 / nc)?;
    let upper = quantile_sorted(&sorted, 1.0 - 1.0 / nc)?;
    if !(lower > 0.0 && lower < upper) {
        return Err(Error::DegeneratePartition { lower, upper });
    }
    let inner = n_classes - 2;
    let width = (upper - lower) / inner as f64;
    let mut boundaries = Vec::with_capacity(n_classes + 1);
    boundaries.push(0.0);
    boundaries.extend((0..inner).map(|k| lower + k as f64 * width));
    boundaries.push(upper);
    boundaries.push(f64::INFINITY);
    Ok(ClassPartition { boundaries })
}

/// Error statistics for the records whose index value falls in one class.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClassSummary {
    /// One-based class number.
    pub class_index: usize,
    pub lower: f64,
    pub upper: f64,
    pub count: usize,
    pub mean_index_value: Option<f64>,
    pub q10: Option<f64>,
    pub median: Option<f64>,
    pub q90: Option<f64>,
    pub mean_error: Option<f64>,
}

/// Partitions `(index, error)` pairs by index value and summarizes errors per class.
pub fn summarize_pairs(index: &[f64], error: &[f64], n_classes: usize) -> Result<Vec<ClassSummary>> {
    if index.len() != error.len() {
        return Err(Error::DimensionMismatch { expected: index.len(), found: error.len() });
    }
    let partition = make_partition(index, n_classes)?;
    let mut idx_by_class = vec![Vec::new(); n_classes];
    let mut err_by_class = vec![Vec::new(); n_classes];
    for (&x, &e) in index.iter().zip(error) {
        let c = partition.class_of(x);
        idx_by_class[c].push(x);
        err_by_class[c].push(e);
    }
    let mut out = Vec::with_capacity(n_classes);
    for (c, (xs, mut es)) in idx_by_class.into_iter().zip(err_by_class).enumerate() {
        let (lower, upper) = partition.bounds(c);
        let mut summary = ClassSummary {
            class_index: c + 1,
            lower,
            upper,
            count: xs.len(),
            mean_index_value: None,
            q10: None,
            median: None,
            q90: None,
            mean_error: None,
        };
        if !xs.is_empty() {
            es.sort_by(f64::total_cmp);
            summary.mean_index_value = Some(mean(&xs));
            summary.q10 = Some(quantile_sorted(&es, 0.1)?);
            summary.median = Some(quantile_sorted(&es, 0.5)?);
            summary.q90 = Some(quantile_sorted(&es, 0.9)?);
            summary.mean_error = Some(mean(&es));
        }
        out.push(summary);
    }
    Ok(out)
}

/// Class summaries of one error column against one index column.
pub fn summarize_classes(
    records: &[SimRecord],
    index: IndexKind,
    error: ErrorKind,
    n_classes: usize,
) -> Result<Vec<ClassSummary>> {
    if records.is_empty() {
        return Err(Error::InvalidArgument("no records to summarize".into()));
    }
    let xs: Vec<f64> = records.iter().map(|r| r.index(index)).collect();
    let es: Vec<f64> = records.iter().map(|r| r.error(error)).collect();
    summarize_pairs(&xs, &es, n_classes)
}

/// Per-class statistic correlated against the class mean index value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Characteristic {
    Mean,
    Q10,
    Median,
    Q90,
}

impl Characteristic {
    pub const ALL: [Characteristic; 4] =
        [Characteristic::Mean, Characteristic::Q10, Characteristic::Median, Characteristic::Q90];

    pub fn name(self) -> &'static str {
        match self {
            Characteristic::Mean => "mean",
            Characteristic::Q10 => "q10",
            Characteristic::Median => "median",
            Characteristic::Q90 => "q90",
        }
    }

    fn pick(self, s: &ClassSummary) -> Option<f64> {
        match self {
            Characteristic::Mean => s.mean_error,
            Characteristic::Q10 => s.q10,
            Characteristic::Median => s.median,
            Characteristic::Q90 => s.q90,
        }
    }
}

/// Rank and linear correlation of one characteristic with class mean index.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ClassCorrelation {
    pub characteristic: Characteristic,
    pub spearman: Option<f64>,
    pub pearson: Option<f64>,
}

/// Correlations between class mean index values and each error
/// characteristic, over the populated classes only.
pub fn class_correlations(summaries: &[ClassSummary]) -> Vec<ClassCorrelation> {
    let populated: Vec<&ClassSummary> = summaries.iter().filter(|s| s.count > 0).collect();
    let xs: Vec<f64> = populated.iter().filter_map(|s| s.mean_index_value).collect();
    Characteristic::ALL
        .iter()
        .map(|&c| {
            let ys: Vec<f64> = populated.iter().filter_map(|s| c.pick(s)).collect();
            ClassCorrelation { characteristic: c, spearman: spearman(&xs, &ys).ok(), pearson: pearson(&xs, &ys).ok() }
        })
        .collect()
}
