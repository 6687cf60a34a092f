//! ATI-based acceptance of a PCM.
//!
//! An ATI value is mapped to a class of a [`QuantileTable`], whose row holds
//! quantiles of the estimation error observed for simulated matrices in that
//! class. The matrix is accepted when the chosen quantile does not exceed a
//! user threshold. Built-in tables for `n = 4..=7` ship with the crate.

use std::sync::OnceLock;

use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};
use crate::indices::compute_ati;
use crate::pcm::Pcm;
use crate::prioritization::Method;
use crate::sim::LossKind;
use crate::stats::ClassSummary;

/// Header of the table file format.
pub const TABLE_HEADER: &str = "n,method,class_lo,class_hi,mean_ati,q10,median,q90,mean_err";

const BUILTIN_DATA: &str = include_str!("../data/appendix_tables.csv");
const BUILTIN_SHA256: &str = "8ca8ca88288dad18030c56cc55525b259889e3d360f85c8c1b3ddf06ed46a9cd";

/// Built-in cells known to be misprinted: `(n, method, class)`. Their mean
/// column is kept but flagged.
const SUSPECT_ROWS: [(usize, Method, usize); 1] = [(7, Method::Gm, 1)];

/// Which error quantile the acceptance threshold applies to.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuantileChoice {
    Q10,
    Median,
    /// Conservative default: guards against accepting a bad matrix.
    #[default]
    Q90,
}

impl QuantileChoice {
    pub fn name(self) -> &'static str {
        match self {
            QuantileChoice::Q10 => "q10",
            QuantileChoice::Median => "median",
            QuantileChoice::Q90 => "q90",
        }
    }

    pub fn pick(self, row: &QuantileRow) -> f64 {
        match self {
            QuantileChoice::Q10 => row.q10,
            QuantileChoice::Median => row.median,
            QuantileChoice::Q90 => row.q90,
        }
    }
}

impl std::str::FromStr for QuantileChoice {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "q10" | "p10" => Ok(QuantileChoice::Q10),
            "median" | "q50" => Ok(QuantileChoice::Median),
            "q90" | "p90" => Ok(QuantileChoice::Q90),
            _ => Err(Error::InvalidArgument(format!("unknown quantile {s:?} (q10, median, q90)"))),
        }
    }
}

/// One class row: `[class_lo, class_hi)` and the error statistics inside it.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct QuantileRow {
    pub class_lo: f64,
    pub class_hi: f64,
    pub mean_ati: f64,
    pub q10: f64,
    pub median: f64,
    pub q90: f64,
    pub mean_err: f64,
    /// The mean column is known to be unreliable for this row.
    #[serde(default)]
    pub suspect: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct QuantileTable {
    pub n: usize,
    pub method: Method,
    /// Loss of the tabled errors; not carried by the file format.
    pub loss: Option<LossKind>,
    pub rows: Vec<QuantileRow>,
}

impl QuantileTable {
    /// Checks bounds (start at 0, contiguous, increasing, last unbounded) and
    /// `q10 <= median <= q90` within each row.
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InvalidArgument(format!("table n={} {}: {msg}", self.n, self.method)));
        if self.rows.is_empty() {
            return bad("no rows".into());
        }
        if self.rows[0].class_lo != 0.0 {
            return bad(format!("first class starts at {}", self.rows[0].class_lo));
        }
        if self.rows.last().is_some_and(|r| r.class_hi != f64::INFINITY) {
            return bad("last class is bounded".into());
        }
        for (k, r) in self.rows.iter().enumerate() {
            if r.class_lo.partial_cmp(&r.class_hi) != Some(std::cmp::Ordering::Less) {
                return bad(format!("class {} has bounds {} and {}", k + 1, r.class_lo, r.class_hi));
            }
            if let Some(next) = self.rows.get(k + 1) {
                if next.class_lo != r.class_hi {
                    return bad(format!("classes {} and {} are not contiguous", k + 1, k + 2));
                }
            }
            if !(r.q10 <= r.median && r.median <= r.q90) {
                return bad(format!("class {} quantiles are out of order", k + 1));
            }
        }
        Ok(())
    }

    /// One-based class whose half-open interval contains `ati`.
    pub fn locate_class(&self, ati: f64) -> Result<usize> {
        if ati.is_nan() || ati < 0.0 {
            return Err(Error::InvalidArgument(format!("ATI must be non-negative, got {ati}")));
        }
        let inner = self.rows.iter().skip(1).take_while(|r| r.class_lo <= ati).count();
        Ok(inner + 1)
    }

    /// Row of one-based class `class`.
    pub fn row(&self, class: usize) -> Option<&QuantileRow> {
        class.checked_sub(1).and_then(|c| self.rows.get(c))
    }

    /// One-based classes where `choice` drops below the previous class.
    pub fn monotonicity_breaks(&self, choice: QuantileChoice) -> Vec<usize> {
        self.rows
            .windows(2)
            .enumerate()
            .filter(|(_, w)| choice.pick(&w[1]) < choice.pick(&w[0]))
            .map(|(k, _)| k + 2)
            .collect()
    }

    /// Builds a table from class summaries. Every class must be populated.
    pub fn from_summaries(
        n: usize,
        method: Method,
        loss: Option<LossKind>,
        summaries: &[ClassSummary],
    ) -> Result<Self> {
        let rows = summaries
            .iter()
            .map(|s| match (s.mean_index_value, s.q10, s.median, s.q90, s.mean_error) {
                (Some(mean_ati), Some(q10), Some(median), Some(q90), Some(mean_err)) => Ok(QuantileRow {
                    class_lo: s.lower,
                    class_hi: s.upper,
                    mean_ati,
                    q10,
                    median,
                    q90,
                    mean_err,
                    suspect: false,
                }),
                _ => Err(Error::InvalidArgument(format!(
                    "class {} is empty; simulate more records or use fewer classes",
                    s.class_index
                ))),
            })
            .collect::<Result<Vec<_>>>()?;
        let table = Self { n, method, loss, rows };
        table.validate()?;
        Ok(table)
    }

    /// Rows in the table file format, without the header.
    pub fn csv_rows(&self) -> String {
        let method = match self.method {
            Method::Rev => "rev",
            Method::Gm => "gm",
        };
        let mut out = String::new();
        for r in &self.rows {
            let hi = if r.class_hi.is_infinite() { "inf".to_string() } else { r.class_hi.to_string() };
            out.push_str(&format!(
                "{},{method},{},{hi},{},{},{},{},{}\n",
                self.n, r.class_lo, r.mean_ati, r.q10, r.median, r.q90, r.mean_err
            ));
        }
        out
    }

    /// Header plus rows.
    pub fn to_csv(&self) -> String {
        format!("{TABLE_HEADER}\n{}", self.csv_rows())
    }

    /// Parses a file holding exactly one table.
    pub fn from_csv(text: &str) -> Result<Self> {
        let mut tables = parse_tables(text)?;
        match tables.len() {
            1 => Ok(tables.remove(0)),
            k => Err(Error::InvalidArgument(format!("expected one table, found {k}"))),
        }
    }
}

/// Parses one or more tables, grouped by consecutive `(n, method)` runs.
pub fn parse_tables(text: &str) -> Result<Vec<QuantileTable>> {
    let mut tables: Vec<QuantileTable> = Vec::new();
    let mut saw_header = false;
    for (k, line) in text.lines().enumerate() {
        let line_no = k + 1;
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if !saw_header {
            if line.replace(' ', "") != TABLE_HEADER {
                return Err(Error::Parse { line: line_no, message: format!("expected header {TABLE_HEADER:?}") });
            }
            saw_header = true;
            continue;
        }
        let f: Vec<&str> = line.split(',').map(str::trim).collect();
        if f.len() != 9 {
            return Err(Error::Parse { line: line_no, message: format!("expected 9 fields, found {}", f.len()) });
        }
        let parse_err = |what: &str, v: &str| Error::Parse { line: line_no, message: format!("invalid {what} {v:?}") };
        let n: usize = f[0].parse().map_err(|_| parse_err("n", f[0]))?;
        let method: Method = f[1].parse().map_err(|_| parse_err("method", f[1]))?;
        let mut num = [0.0; 7];
        for (slot, (v, name)) in num.iter_mut().zip(f[2..].iter().zip(TABLE_HEADER.split(',').skip(2))) {
            *slot = if name == "class_hi" && v.eq_ignore_ascii_case("inf") {
                f64::INFINITY
            } else {
                v.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| parse_err(name, v))?
            };
        }
        let row = QuantileRow {
            class_lo: num[0],
            class_hi: num[1],
            mean_ati: num[2],
            q10: num[3],
            median: num[4],
            q90: num[5],
            mean_err: num[6],
            suspect: false,
        };
        match tables.last_mut() {
            Some(t) if t.n == n && t.method == method => t.rows.push(row),
            _ => tables.push(QuantileTable { n, method, loss: None, rows: vec![row] }),
        }
    }
    if !saw_header {
        return Err(Error::Parse { line: 0, message: "empty table file".into() });
    }
    for t in &tables {
        t.validate()?;
    }
    Ok(tables)
}

fn sha256_hex(data: &[u8]) -> String {
    Sha256::digest(data).iter().map(|b| format!("{b:02x}")).collect()
}

/// The embedded relative-error tables for `n = 4..=7`, REV and GM.
pub fn builtin_tables() -> Result<&'static [QuantileTable]> {
    static TABLES: OnceLock<Vec<QuantileTable>> = OnceLock::new();
    if let Some(t) = TABLES.get() {
        return Ok(t);
    }
    let loaded = load_builtin()?;
    Ok(TABLES.get_or_init(|| loaded))
}

fn load_builtin() -> Result<Vec<QuantileTable>> {
    let actual = sha256_hex(BUILTIN_DATA.as_bytes());
    if actual != BUILTIN_SHA256 {
        return Err(Error::ChecksumMismatch { expected: BUILTIN_SHA256.into(), actual });
    }
    let mut tables = parse_tables(BUILTIN_DATA)?;
    for t in &mut tables {
        t.loss = Some(LossKind::Re);
        for &(n, method, class) in &SUSPECT_ROWS {
            if t.n == n && t.method == method {
                t.rows[class - 1].suspect = true;
            }
        }
    }
    Ok(tables)
}

/// Built-in table for order `n` and `method`.
pub fn builtin_table(n: usize, method: Method) -> Result<&'static QuantileTable> {
    builtin_tables()?.iter().find(|t| t.n == n && t.method == method).ok_or(Error::UnsupportedOrder { n })
}

/// Outcome of [`assess_pcm`], carrying the full class row.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptanceVerdict {
    pub ati: f64,
    pub class_index: usize,
    pub class_lo: f64,
    pub class_hi: f64,
    pub estimated_q10: f64,
    pub estimated_median: f64,
    pub estimated_q90: f64,
    /// `None` when the table's mean for this class is flagged suspect.
    pub estimated_mean: Option<f64>,
    pub threshold: f64,
    pub quantile_choice: QuantileChoice,
    pub accepted: bool,
}

/// Accepts `pcm` iff the chosen error quantile of its ATI class is at most
/// `threshold`. The mean column never enters the decision.
pub fn assess_pcm(
    pcm: &Pcm,
    method: Method,
    threshold: f64,
    quantile_choice: QuantileChoice,
    table: &QuantileTable,
) -> Result<AcceptanceVerdict> {
    if table.n != pcm.order() {
        return Err(Error::InvalidArgument(format!("table is for n = {}, matrix has order {}", table.n, pcm.order())));
    }
    if table.method != method {
        return Err(Error::InvalidArgument(format!("table is for {}, requested {method}", table.method)));
    }
    if !(threshold.is_finite() && threshold >= 0.0) {
        return Err(Error::InvalidArgument(format!("threshold must be non-negative, got {threshold}")));
    }
    pcm.require_reciprocal(crate::pcm::DEFAULT_TOL)?;
    let ati = compute_ati(pcm);
    let class_index = table.locate_class(ati)?;
    let row = table.row(class_index).expect("located class exists");
    Ok(AcceptanceVerdict {
        ati,
        class_index,
        class_lo: row.class_lo,
        class_hi: row.class_hi,
        estimated_q10: row.q10,
        estimated_median: row.median,
        estimated_q90: row.q90,
        estimated_mean: (!row.suspect).then_some(row.mean_err),
        threshold,
        quantile_choice,
        accepted: quantile_choice.pick(row) <= threshold,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn all_eight_tables_load() {
        let t = builtin_tables().unwrap();
        assert_eq!(t.len(), 8);
        assert!(t.iter().all(|t| t.rows.len() == 15 && t.loss == Some(LossKind::Re)));
        assert!(builtin_table(3, Method::Rev).is_err());
        assert!(matches!(builtin_table(8, Method::Gm), Err(Error::UnsupportedOrder { n: 8 })));
    }

    #[test]
    fn checksum_covers_data() {
        assert_eq!(sha256_hex(BUILTIN_DATA.as_bytes()), BUILTIN_SHA256);
        assert_ne!(sha256_hex(BUILTIN_DATA.replace("0.3918", "0.3919").as_bytes()), BUILTIN_SHA256);
    }

    #[test]
    fn locate_edges() {
        let t = builtin_table(4, Method::Rev).unwrap();
        assert_eq!(t.locate_class(0.0).unwrap(), 1);
        assert_eq!(t.locate_class(0.173).unwrap(), 2);
        assert_eq!(t.locate_class(0.40).unwrap(), 8);
        assert_eq!(t.locate_class(10.0).unwrap(), 15);
        assert!(t.locate_class(-0.1).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let t = builtin_table(5, Method::Gm).unwrap();
        let back = QuantileTable::from_csv(&t.to_csv()).unwrap();
        assert_eq!(back.rows, t.rows);
        assert_eq!(back.loss, None);
    }

    #[test]
    fn rejects_broken_tables() {
        let mut t = builtin_table(4, Method::Rev).unwrap().clone();
        t.rows[3].median = 1.0;
        assert!(t.validate().is_err());
        let mut t = builtin_table(4, Method::Rev).unwrap().clone();
        t.rows[14].class_hi = 2.0;
        assert!(t.validate().is_err());
        assert!(parse_tables("n,method\n").is_err());
    }

    #[test]
    fn quantile_names() {
        for q in [QuantileChoice::Q10, QuantileChoice::Median, QuantileChoice::Q90] {
            assert_eq!(q.name().parse::<QuantileChoice>().unwrap(), q);
        }
        assert_eq!(QuantileChoice::default(), QuantileChoice::Q90);
    }
}
