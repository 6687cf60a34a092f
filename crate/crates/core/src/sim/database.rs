use std::io::{BufRead, Write};

use serde::{Deserialize, Serialize};

use super::SimRecord;
use crate::error::{Error, Result};
use crate::format::sig_digits;

/// Column order of the CSV database.
pub const CSV_HEADER: &str =
    "n,vector_id,perturbation_id,distribution,big_error,si,gi,ki,ati,ae_rev,re_rev,ae_gm,re_gm,seed";

const REAL_DIGITS: usize = 8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum DatabaseFormat {
    Csv,
    Jsonl,
}

impl std::str::FromStr for DatabaseFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "csv" => Ok(DatabaseFormat::Csv),
            "jsonl" => Ok(DatabaseFormat::Jsonl),
            _ => Err(Error::InvalidArgument(format!("unknown database format {s:?} (csv, jsonl)"))),
        }
    }
}

/// Copy of a record with reals cut to 8 significant digits, so both
/// formats carry the same numbers.
#[derive(Serialize)]
struct RecordOut<'a> {
    n: usize,
    vector_id: u64,
    perturbation_id: u64,
    distribution: &'a str,
    big_error: bool,
    si: f64,
    gi: f64,
    ki: f64,
    ati: f64,
    ae_rev: f64,
    re_rev: f64,
    ae_gm: f64,
    re_gm: f64,
    seed: u64,
}

fn cut(x: f64) -> f64 {
    sig_digits(x, REAL_DIGITS).parse().unwrap_or(x)
}

/// Writes records in order. Reals carry 8 significant digits.
pub fn write_database<W: Write>(out: W, records: &[SimRecord], format: DatabaseFormat) -> Result<()> {
    let mut out = std::io::BufWriter::new(out);
    match format {
        DatabaseFormat::Csv => {
            writeln!(out, "{CSV_HEADER}")?;
            for r in records {
                let reals =
                    [r.si, r.gi, r.ki, r.ati, r.ae_rev, r.re_rev, r.ae_gm, r.re_gm].map(|x| sig_digits(x, REAL_DIGITS));
                writeln!(
                    out,
                    "{},{},{},{},{},{},{}",
                    r.n,
                    r.vector_id,
                    r.perturbation_id,
                    r.distribution,
                    r.big_error,
                    reals.join(","),
                    r.seed
                )?;
            }
        }
        DatabaseFormat::Jsonl => {
            for r in records {
                let row = RecordOut {
                    n: r.n,
                    vector_id: r.vector_id,
                    perturbation_id: r.perturbation_id,
                    distribution: &r.distribution,
                    big_error: r.big_error,
                    si: cut(r.si),
                    gi: cut(r.gi),
                    ki: cut(r.ki),
                    ati: cut(r.ati),
                    ae_rev: cut(r.ae_rev),
                    re_rev: cut(r.re_rev),
                    ae_gm: cut(r.ae_gm),
                    re_gm: cut(r.re_gm),
                    seed: r.seed,
                };
                serde_json::to_writer(&mut out, &row)
                    .map_err(|e| Error::InvalidArgument(format!("cannot encode record: {e}")))?;
                out.write_all(b"\n")?;
            }
        }
    }
    out.flush()?;
    Ok(())
}

/// Reads a database in either format; the format is detected from the
/// first non-blank line.
pub fn read_database<R: BufRead>(input: R) -> Result<Vec<SimRecord>> {
    let mut records = Vec::new();
    let mut format = None;
    for (k, line) in input.lines().enumerate() {
        let line = line?;
        let line_no = k + 1;
        let text = line.trim();
        if text.is_empty() {
            continue;
        }
        let fmt =
            *format.get_or_insert_with(
                || {
                    if text.starts_with('{') {
                        DatabaseFormat::Jsonl
                    } else {
                        DatabaseFormat::Csv
                    }
                },
            );
        match fmt {
            DatabaseFormat::Jsonl => {
                let r: SimRecord =
                    serde_json::from_str(text).map_err(|e| Error::Parse { line: line_no, message: e.to_string() })?;
                records.push(r);
            }
            DatabaseFormat::Csv => {
                if text == CSV_HEADER {
                    continue;
                }
                records.push(parse_csv_record(text, line_no)?);
            }
        }
    }
    Ok(records)
}

fn parse_csv_record(text: &str, line: usize) -> Result<SimRecord> {
    let fields: Vec<&str> = text.split(',').map(str::trim).collect();
    if fields.len() != 14 {
        return Err(Error::Parse { line, message: format!("expected 14 fields, found {}", fields.len()) });
    }
    let bad = |name: &str, v: &str| Error::Parse { line, message: format!("invalid {name} {v:?}") };
    let int = |k: usize, name: &str| fields[k].parse::<u64>().map_err(|_| bad(name, fields[k]));
    let real = |k: usize, name: &str| {
        fields[k].parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| bad(name, fields[k]))
    };
    let big_error = match fields[4] {
        "true" | "1" => true,
        "false" | "0" => false,
        other => return Err(bad("big_error", other)),
    };
    Ok(SimRecord {
        n: int(0, "n")? as usize,
        vector_id: int(1, "vector_id")?,
        perturbation_id: int(2, "perturbation_id")?,
        distribution: fields[3].to_string(),
        big_error,
        si: real(5, "si")?,
        gi: real(6, "gi")?,
        ki: real(7, "ki")?,
        ati: real(8, "ati")?,
        ae_rev: real(9, "ae_rev")?,
        re_rev: real(10, "re_rev")?,
        ae_gm: real(11, "ae_gm")?,
        re_gm: real(12, "re_gm")?,
        seed: int(13, "seed")?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample() -> SimRecord {
        SimRecord {
            n: 4,
            vector_id: 3,
            perturbation_id: 0,
            distribution: "gamma".into(),
            big_error: true,
            si: 0.123456789,
            gi: 0.5,
            ki: 2.0 / 3.0,
            ati: 0.25,
            ae_rev: 0.0322,
            re_rev: 0.1565,
            ae_gm: 1e-9,
            re_gm: 0.0,
            seed: u64::MAX,
        }
    }

    #[test]
    fn csv_layout() {
        let mut buf = Vec::new();
        write_database(&mut buf, &[sample()], DatabaseFormat::Csv).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        assert_eq!(lines.next(), Some(CSV_HEADER));
        assert_eq!(
            lines.next(),
            Some("4,3,0,gamma,true,0.12345679,0.5,0.66666667,0.25,0.0322,0.1565,0.000000001,0,18446744073709551615")
        );
    }

    #[test]
    fn both_formats_read_back_identically() {
        let recs = vec![sample(), SimRecord { big_error: false, ..sample() }];
        let mut csv = Vec::new();
        let mut jsonl = Vec::new();
        write_database(&mut csv, &recs, DatabaseFormat::Csv).unwrap();
        write_database(&mut jsonl, &recs, DatabaseFormat::Jsonl).unwrap();
        let a = read_database(csv.as_slice()).unwrap();
        let b = read_database(jsonl.as_slice()).unwrap();
        assert_eq!(a, b);
        assert_eq!(a[0].ki, 0.66666667);
        assert!(!a[1].big_error);
    }

    #[test]
    fn malformed_rows_name_the_line() {
        let text = format!("{CSV_HEADER}\n4,0,0,gamma,maybe,0,0,0,0,0,0,0,0,1\n");
        match read_database(text.as_bytes()) {
            Err(Error::Parse { line, .. }) => assert_eq!(line, 2),
            other => panic!("{other:?}"),
        }
        assert!(read_database("4,0,0\n".as_bytes()).is_err());
    }
}
