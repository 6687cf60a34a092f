//! Pairwise comparison matrices, priority vectors and the Saaty judgment scale.
//!
//! A [`Pcm`] is a dense `n x n` matrix of positive judged ratios `a_ij ~ w_i / w_j`.
//! Construction only enforces positivity and a unit diagonal; reciprocity and
//! consistency are separate predicates because simulation code routinely
//! builds matrices that are neither until the final reciprocation step.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Smallest order supported anywhere in the toolkit (triads need three items).
pub const MIN_ORDER: usize = 3;

/// Default tolerance for reciprocity and consistency checks.
pub const DEFAULT_TOL: f64 = 1e-9;

const DIAGONAL_TOL: f64 = 1e-12;
const SUM_TOL: f64 = 1e-9;

/// Normalized positive weights, the true vector `v` or an estimate `w`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct PriorityVector(Vec<f64>);

impl PriorityVector {
    /// Validates an already-normalized vector.
    pub fn new(weights: Vec<f64>) -> Result<Self> {
        if weights.len() < MIN_ORDER {
            return Err(Error::InvalidVector(format!("need at least {MIN_ORDER} weights, got {}", weights.len())));
        }
        if let Some(bad) = weights.iter().find(|w| !(w.is_finite() && **w > 0.0)) {
            return Err(Error::InvalidVector(format!("weight {bad} is not positive")));
        }
        let sum: f64 = weights.iter().sum();
        if (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidVector(format!("weights sum to {sum}, not 1")));
        }
        Ok(Self(weights))
    }

    /// Scales positive weights so they sum to one.
    pub fn normalized(weights: Vec<f64>) -> Result<Self> {
        let sum: f64 = weights.iter().sum();
        if !(sum.is_finite() && sum > 0.0) {
            return Err(Error::InvalidVector(format!("cannot normalize weights summing to {sum}")));
        }
        Self::new(weights.into_iter().map(|w| w / sum).collect())
    }

    pub fn uniform(n: usize) -> Result<Self> {
        Self::normalized(vec![1.0; n])
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    /// Reorders components so that `out[k] = self[perm[k]]`.
    pub fn permuted(&self, perm: &[usize]) -> Self {
        Self(perm.iter().map(|&p| self.0[p]).collect())
    }
}

impl TryFrom<Vec<f64>> for PriorityVector {
    type Error = Error;

    fn try_from(value: Vec<f64>) -> Result<Self> {
        Self::new(value)
    }
}

impl From<PriorityVector> for Vec<f64> {
    fn from(value: PriorityVector) -> Self {
        value.0
    }
}

/// A pairwise comparison matrix stored row-major.
#[derive(Debug, Clone, PartialEq)]
pub struct Pcm {
    n: usize,
    entries: Vec<f64>,
}

impl Pcm {
    /// Builds a matrix from row-major entries.
    pub fn new(n: usize, entries: Vec<f64>) -> Result<Self> {
        if n < MIN_ORDER {
            return Err(Error::InvalidMatrix(format!("order {n} is below {MIN_ORDER}")));
        }
        if entries.len() != n * n {
            return Err(Error::InvalidMatrix(format!(
                "expected {} entries for order {n}, got {}",
                n * n,
                entries.len()
            )));
        }
        for (idx, &a) in entries.iter().enumerate() {
            if !(a.is_finite() && a > 0.0) {
                return Err(Error::InvalidMatrix(format!(
                    "entry ({}, {}) = {a} is not a positive finite number",
                    idx / n + 1,
                    idx % n + 1
                )));
            }
        }
        for i in 0..n {
            let d = entries[i * n + i];
            if (d - 1.0).abs() > DIAGONAL_TOL {
                return Err(Error::InvalidMatrix(format!("diagonal entry ({}, {}) = {d} is not 1", i + 1, i + 1)));
            }
        }
        Ok(Self { n, entries })
    }

    pub fn from_rows(rows: Vec<Vec<f64>>) -> Result<Self> {
        let n = rows.len();
        if let Some(bad) = rows.iter().position(|r| r.len() != n) {
            return Err(Error::InvalidMatrix(format!(
                "matrix is not square: row {} has {} entries, expected {n}",
                bad + 1,
                rows[bad].len()
            )));
        }
        Self::new(n, rows.into_iter().flatten().collect())
    }

    /// Builds a reciprocal matrix from a function giving the upper-triangle
    /// entries (`i < j`); the lower triangle holds exact reciprocals.
    pub fn from_upper(n: usize, mut upper: impl FnMut(usize, usize) -> f64) -> Result<Self> {
        let mut entries = vec![1.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let a = upper(i, j);
                entries[i * n + j] = a;
                entries[j * n + i] = 1.0 / a;
            }
        }
        Self::new(n, entries)
    }

    /// The all-ones matrix.
    pub fn identity(n: usize) -> Result<Self> {
        Self::new(n, vec![1.0; n * n])
    }

    pub fn order(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.entries[i * self.n + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.entries[i * self.n..(i + 1) * self.n]
    }

    pub fn entries(&self) -> &[f64] {
        &self.entries
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.entries.chunks_exact(self.n)
    }

    /// Upper-triangle positions `(i, j)` with `i < j`, row by row.
    pub fn upper_positions(n: usize) -> Vec<(usize, usize)> {
        (0..n).flat_map(|i| ((i + 1)..n).map(move |j| (i, j))).collect()
    }

    /// Simultaneous row/column relabelling: `out[k][l] = self[perm[k]][perm[l]]`.
    pub fn permuted(&self, perm: &[usize]) -> Result<Self> {
        let n = self.n;
        if perm.len() != n {
            return Err(Error::DimensionMismatch { expected: n, found: perm.len() });
        }
        let mut seen = vec![false; n];
        for &p in perm {
            if p >= n || std::mem::replace(&mut seen[p], true) {
                return Err(Error::InvalidArgument(format!("{perm:?} is not a permutation")));
            }
        }
        let entries = (0..n * n).map(|idx| self.get(perm[idx / n], perm[idx % n])).collect();
        Ok(Self { n, entries })
    }

    /// First `(i, j)` (zero-based) where `|a_ij a_ji - 1| > tol`.
    pub fn first_non_reciprocal(&self, tol: f64) -> Option<(usize, usize)> {
        let n = self.n;
        (0..n)
            .flat_map(|i| (i..n).map(move |j| (i, j)))
            .find(|&(i, j)| (self.get(i, j) * self.get(j, i) - 1.0).abs() > tol)
    }

    /// `|a_ij a_ji - 1| <= tol` for every pair.
    pub fn is_reciprocal(&self, tol: f64) -> bool {
        self.first_non_reciprocal(tol).is_none()
    }

    /// Errors with the offending position when the matrix is not reciprocal.
    pub fn require_reciprocal(&self, tol: f64) -> Result<()> {
        match self.first_non_reciprocal(tol) {
            None => Ok(()),
            Some((row, col)) => Err(Error::NotReciprocal {
                row: row + 1,
                col: col + 1,
                product: self.get(row, col) * self.get(col, row),
            }),
        }
    }

    /// Cardinal transitivity `|a_ij a_jk - a_ik| <= tol` over all triples.
    pub fn is_consistent(&self, tol: f64) -> bool {
        let n = self.n;
        if !self.is_reciprocal(tol) {
            return false;
        }
        for i in 0..n {
            for j in 0..n {
                let aij = self.get(i, j);
                for k in 0..n {
                    if (aij * self.get(j, k) - self.get(i, k)).abs() > tol {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Returns a copy with `a_ij` multiplied by `factor` and `a_ji` set to the
    /// exact reciprocal of the new `a_ij`.
    pub fn perturb_entry(&self, i: usize, j: usize, factor: f64) -> Result<Self> {
        if i >= j || j >= self.n {
            return Err(Error::InvalidArgument(format!(
                "perturbed position ({i}, {j}) must satisfy i < j < {}",
                self.n
            )));
        }
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::InvalidArgument(format!("factor {factor} must be positive")));
        }
        let mut out = self.clone();
        out.perturb_in_place(i, j, factor);
        Ok(out)
    }

    /// Unchecked in-place variant used by the simulation loops.
    pub(crate) fn perturb_in_place(&mut self, i: usize, j: usize, factor: f64) {
        let n = self.n;
        let a = self.entries[i * n + j] * factor;
        self.entries[i * n + j] = a;
        self.entries[j * n + i] = 1.0 / a;
    }

    /// Sets `a_ij = value` and `a_ji = 1 / value`.
    pub(crate) fn set_pair(&mut self, i: usize, j: usize, value: f64) {
        let n = self.n;
        self.entries[i * n + j] = value;
        self.entries[j * n + i] = 1.0 / value;
    }

    /// Rounds the upper triangle onto `scale` and rebuilds the lower triangle
    /// from exact reciprocals. The lower triangle of `self` is ignored.
    pub fn round_to(&self, scale: &SaatyScale) -> Pcm {
        let n = self.n;
        let mut entries = vec![1.0; n * n];
        for i in 0..n {
            for j in (i + 1)..n {
                let s = scale.nearest(self.get(i, j));
                entries[i * n + j] = s.value();
                entries[j * n + i] = s.reciprocal().value();
            }
        }
        Pcm { n, entries }
    }

    /// Parses the CSV text format: `n` lines of `n` comma-separated tokens,
    /// each a decimal literal or an integer fraction `p/q`. Blank lines and
    /// lines starting with `#` are skipped.
    pub fn parse_csv(text: &str) -> Result<Self> {
        let mut rows = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let row = line
                .split(',')
                .map(|tok| parse_token(tok.trim()).map_err(|message| Error::Parse { line: lineno + 1, message }))
                .collect::<Result<Vec<f64>>>()?;
            rows.push(row);
        }
        if rows.is_empty() {
            return Err(Error::Parse { line: 0, message: "no matrix rows found".into() });
        }
        Self::from_rows(rows)
    }

    /// Renders the CSV text format. Entries equal to a Saaty scale value are
    /// written as exact fractions, everything else in shortest round-trip form.
    pub fn to_csv(&self) -> String {
        let scale = SaatyScale::standard();
        let mut out = String::new();
        for row in self.rows() {
            let line: Vec<String> = row
                .iter()
                .map(|&a| match scale.exact_match(a) {
                    Some(s) => s.to_string(),
                    None => a.to_string(),
                })
                .collect();
            out.push_str(&line.join(","));
            out.push('\n');
        }
        out
    }
}

impl FromStr for Pcm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::parse_csv(s)
    }
}

impl fmt::Display for Pcm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_csv())
    }
}

fn parse_token(tok: &str) -> std::result::Result<f64, String> {
    if tok.is_empty() {
        return Err("empty token".into());
    }
    if let Some((p, q)) = tok.split_once('/') {
        let p: i64 = p.trim().parse().map_err(|_| format!("bad numerator in {tok:?}"))?;
        let q: i64 = q.trim().parse().map_err(|_| format!("bad denominator in {tok:?}"))?;
        if q == 0 {
            return Err(format!("zero denominator in {tok:?}"));
        }
        return Ok(p as f64 / q as f64);
    }
    tok.parse::<f64>().map_err(|_| format!("cannot parse {tok:?} as a number"))
}

/// Consistent matrix of true priority ratios, `m_ij = v_i / v_j`.
pub fn mpr_from_pv(v: &PriorityVector) -> Pcm {
    let w = v.as_slice();
    let n = w.len();
    let mut entries = Vec::with_capacity(n * n);
    for i in 0..n {
        for j in 0..n {
            entries.push(if i == j { 1.0 } else { w[i] / w[j] });
        }
    }
    Pcm { n, entries }
}

/// One value of a judgment scale, kept as an exact integer fraction.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct ScaleValue {
    pub num: u32,
    pub den: u32,
}

impl ScaleValue {
    pub fn value(self) -> f64 {
        self.num as f64 / self.den as f64
    }

    pub fn reciprocal(self) -> Self {
        Self { num: self.den, den: self.num }
    }
}

impl fmt::Display for ScaleValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.den == 1 {
            write!(f, "{}", self.num)
        } else {
            write!(f, "{}/{}", self.num, self.den)
        }
    }
}

/// An ordered catalogue of admissible judgment values.
#[derive(Debug, Clone, PartialEq)]
pub struct SaatyScale {
    values: Vec<ScaleValue>,
}

impl Default for SaatyScale {
    fn default() -> Self {
        Self::standard()
    }
}

impl SaatyScale {
    /// `{1/9, 1/8, ..., 1/2, 1, 2, ..., 9}`.
    pub fn standard() -> Self {
        let values = (2..=9)
            .rev()
            .map(|d| ScaleValue { num: 1, den: d })
            .chain((1..=9).map(|k| ScaleValue { num: k, den: 1 }))
            .collect();
        Self { values }
    }

    pub fn values(&self) -> &[ScaleValue] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    /// The scale value closest to `x` in absolute difference; exact midpoints
    /// go to the larger neighbour. Differences that agree to within a relative
    /// 1e-12 count as midpoints, so `0.15 / 0.2` rounds like `0.75`.
    pub fn nearest(&self, x: f64) -> ScaleValue {
        let tie = 1e-12 * x.abs().max(1.0);
        let mut best = self.values[0];
        let mut best_d = (x - best.value()).abs();
        for &s in &self.values[1..] {
            let d = (x - s.value()).abs();
            if d <= best_d + tie {
                best = s;
                best_d = d.min(best_d);
            }
        }
        best
    }

    /// [`Self::nearest`] as a plain number.
    pub fn round(&self, x: f64) -> f64 {
        self.nearest(x).value()
    }

    /// The scale value equal to `x` up to a relative 1e-12, if any.
    pub fn exact_match(&self, x: f64) -> Option<ScaleValue> {
        self.values.iter().copied().find(|s| (s.value() - x).abs() <= 1e-12 * x.abs())
    }
}

/// Free-function form of [`SaatyScale::round`].
pub fn round_to_scale(x: f64, scale: &SaatyScale) -> f64 {
    scale.round(x)
}

/// Free-function form of [`Pcm::round_to`].
pub fn round_pcm(pcm: &Pcm, scale: &SaatyScale) -> Pcm {
    pcm.round_to(scale)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn example1_v() -> PriorityVector {
        PriorityVector::new(vec![0.46, 0.25, 0.19, 0.10]).unwrap()
    }

    fn example2_v() -> PriorityVector {
        PriorityVector::new(vec![0.35, 0.3, 0.2, 0.15]).unwrap()
    }

    #[test]
    fn priority_vector_rejects_bad_input() {
        assert!(PriorityVector::new(vec![0.5, 0.5]).is_err());
        assert!(PriorityVector::new(vec![0.5, 0.5, 0.0]).is_err());
        assert!(PriorityVector::new(vec![0.5, 0.3, 0.3]).is_err());
        assert!(PriorityVector::new(vec![0.5, 0.3, f64::NAN]).is_err());
        assert!(PriorityVector::normalized(vec![2.0, 1.0, 1.0]).is_ok());
    }

    #[test]
    fn pcm_rejects_malformed_matrices() {
        assert!(Pcm::from_rows(vec![vec![1.0, 2.0], vec![0.5, 1.0]]).is_err());
        assert!(Pcm::from_rows(vec![vec![1.0, 2.0, 1.0], vec![0.5, 1.0, 1.0]]).is_err());
        let neg = vec![vec![1.0, -2.0, 1.0], vec![0.5, 1.0, 1.0], vec![1.0, 1.0, 1.0]];
        assert!(Pcm::from_rows(neg).is_err());
        let diag = vec![vec![2.0, 1.0, 1.0], vec![1.0, 1.0, 1.0], vec![1.0, 1.0, 1.0]];
        assert!(Pcm::from_rows(diag).is_err());
    }

    #[test]
    fn reciprocity() {
        assert!(Pcm::identity(5).unwrap().is_reciprocal(DEFAULT_TOL));
        let bad = Pcm::from_rows(vec![vec![1.0, 2.0, 1.0], vec![1.0, 1.0, 1.0], vec![1.0, 1.0, 1.0]]).unwrap();
        assert!(!bad.is_reciprocal(DEFAULT_TOL));
        assert_eq!(bad.first_non_reciprocal(DEFAULT_TOL), Some((0, 1)));
        match bad.require_reciprocal(DEFAULT_TOL) {
            Err(Error::NotReciprocal { row: 1, col: 2, .. }) => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn mpr_matches_displayed_ratios() {
        let m = mpr_from_pv(&example1_v());
        assert!((m.get(0, 1) - 1.84).abs() < 1e-12);
        assert!((m.get(0, 2) - 2.421).abs() < 5e-4);
        assert!((m.get(0, 3) - 4.6).abs() < 1e-12);
        assert!(m.is_consistent(DEFAULT_TOL));

        let m2 = mpr_from_pv(&example2_v());
        assert!((m2.get(0, 1) - 7.0 / 6.0).abs() < 1e-12);
        assert!((m2.get(0, 3) - 7.0 / 3.0).abs() < 1e-12);

        let u = mpr_from_pv(&PriorityVector::uniform(6).unwrap());
        assert!(u.entries().iter().all(|&a| (a - 1.0).abs() < 1e-15));
    }

    #[test]
    fn scale_is_ordered_and_closed_under_reciprocals() {
        let s = SaatyScale::standard();
        assert_eq!(s.len(), 17);
        for w in s.values().windows(2) {
            assert!(w[0].value() < w[1].value());
        }
        for v in s.values() {
            assert!(s.values().contains(&v.reciprocal()));
        }
    }

    #[test]
    fn rounding_examples() {
        let s = SaatyScale::standard();
        assert_eq!(s.round(2.5), 3.0);
        assert_eq!(s.round(0.75), 1.0);
        assert_eq!(s.round(0.15 / 0.2), 1.0);
        assert_eq!(s.round(1.84), 2.0);
        assert_eq!(s.round(1.5), 2.0);
        assert_eq!(s.round(9.7), 9.0);
        assert_eq!(s.round(1e6), 9.0);
        assert_eq!(s.round(1e-6), 1.0 / 9.0);
        // Below the 1/2..1 midpoint the absolute-difference rule picks 1/2.
        assert_eq!(s.round(0.74), 0.5);
        assert_eq!(s.round(0.76), 1.0);
    }

    #[test]
    fn rounding_clamps_at_scale_ends() {
        let s = SaatyScale::standard();
        let low_mid = (1.0 / 9.0 + 1.0 / 8.0) / 2.0;
        for x in [1e-9, 0.01, 0.1, low_mid * (1.0 - 1e-9)] {
            assert_eq!(s.round(x), 1.0 / 9.0, "x = {x}");
        }
        for x in [9.5, 10.0, 1e3] {
            assert_eq!(s.round(x), 9.0);
        }
    }

    #[test]
    fn round_pcm_reproduces_rmpr() {
        let s = SaatyScale::standard();
        let r1 = mpr_from_pv(&example1_v()).round_to(&s);
        let want1 = Pcm::parse_csv("1,2,2,5\n1/2,1,1,3\n1/2,1,1,2\n1/5,1/3,1/2,1").unwrap();
        assert_eq!(r1, want1);

        let r2 = mpr_from_pv(&example2_v()).round_to(&s);
        let want2 = Pcm::parse_csv("1,1,2,2\n1,1,2,2\n1/2,1/2,1,1\n1/2,1/2,1,1").unwrap();
        assert_eq!(r2, want2);
        assert!(r2.is_consistent(1e-12));
    }

    #[test]
    fn round_pcm_is_reciprocal_even_for_non_reciprocal_input() {
        let m = Pcm::from_rows(vec![vec![1.0, 2.3, 7.7], vec![5.0, 1.0, 0.3], vec![0.9, 0.01, 1.0]]).unwrap();
        let r = m.round_to(&SaatyScale::standard());
        assert!(r.is_reciprocal(1e-12));
        assert_eq!(r.get(0, 1), 2.0);
        assert_eq!(r.get(0, 2), 8.0);
        assert!((r.get(1, 2) - 1.0 / 3.0).abs() < 1e-15);
    }

    #[test]
    fn perturb_entry_contract() {
        let m = mpr_from_pv(&example1_v());
        assert_eq!(m.perturb_entry(0, 2, 1.0).unwrap(), m);
        let p = m.perturb_entry(1, 3, 1.7).unwrap();
        assert!((p.get(1, 3) - m.get(1, 3) * 1.7).abs() < 1e-12);
        assert_eq!(p.get(3, 1), 1.0 / p.get(1, 3));
        let back = p.perturb_entry(1, 3, 1.0 / 1.7).unwrap();
        for (a, b) in back.entries().iter().zip(m.entries()) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(m.perturb_entry(2, 1, 2.0).is_err());
        assert!(m.perturb_entry(1, 1, 2.0).is_err());
        assert!(m.perturb_entry(0, 1, 0.0).is_err());
    }

    #[test]
    fn csv_round_trip_and_errors() {
        let text = " 1, 3 ,1/2\n1/3,1,0.25\n2, 4, 1\n";
        let m = Pcm::parse_csv(text).unwrap();
        assert_eq!(m.get(0, 2), 0.5);
        assert_eq!(m.to_csv(), "1,3,1/2\n1/3,1,1/4\n2,4,1\n");
        assert_eq!(Pcm::parse_csv(&m.to_csv()).unwrap(), m);

        let odd = Pcm::parse_csv("1,2.4211789\n").unwrap_err();
        assert!(matches!(odd, Error::InvalidMatrix(_)));
        let odd = Pcm::from_upper(3, |_, _| 2.4211789).unwrap();
        assert!(odd.to_csv().starts_with("1,2.4211789,2.4211789\n"));
        assert_eq!(Pcm::parse_csv(&odd.to_csv()).unwrap(), odd);
        assert!(matches!(Pcm::parse_csv("1,x,1\n1,1,1\n1,1,1"), Err(Error::Parse { line: 1, .. })));
        assert!(matches!(Pcm::parse_csv("1,1/0,1\n1,1,1\n1,1,1"), Err(Error::Parse { .. })));
        assert!(matches!(Pcm::parse_csv(""), Err(Error::Parse { .. })));
    }

    #[test]
    fn permutation_relabels_rows_and_columns() {
        let m = mpr_from_pv(&example1_v());
        let p = m.permuted(&[3, 1, 0, 2]).unwrap();
        assert_eq!(p.get(0, 2), m.get(3, 0));
        assert!(m.permuted(&[0, 0, 1, 2]).is_err());
        assert!(m.permuted(&[0, 1, 2]).is_err());
    }
}
