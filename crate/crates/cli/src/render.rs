//! Text renderings: aligned tables for the terminal and small CSV helpers.

use pcmkit::format::sig_digits;

/// Column-aligned text table. The first column is left aligned, the rest
/// right aligned.
pub struct TextTable {
    header: Vec<String>,
    rows: Vec<Vec<String>>,
}

impl TextTable {
    pub fn new<S: Into<String>>(header: impl IntoIterator<Item = S>) -> Self {
        Self { header: header.into_iter().map(Into::into).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        self.rows.push(row);
    }

    pub fn render(&self) -> String {
        let cols = self.header.len();
        let mut width = vec![0; cols];
        for row in std::iter::once(&self.header).chain(&self.rows) {
            for (w, cell) in width.iter_mut().zip(row) {
                *w = (*w).max(cell.chars().count());
            }
        }
        let mut out = String::new();
        for (k, row) in std::iter::once(&self.header).chain(&self.rows).enumerate() {
            let cells: Vec<String> = row
                .iter()
                .zip(&width)
                .enumerate()
                .map(|(c, (cell, &w))| if c == 0 { format!("{cell:<w$}") } else { format!("{cell:>w$}") })
                .collect();
            out.push_str(cells.join("  ").trim_end());
            out.push('\n');
            if k == 0 {
                let rule: usize = width.iter().sum::<usize>() + 2 * (cols.saturating_sub(1));
                out.push_str(&"-".repeat(rule));
                out.push('\n');
            }
        }
        out
    }
}

/// Six significant digits, for human-facing output.
pub fn num(x: f64) -> String {
    if x.is_nan() {
        "-".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        sig_digits(x, 6)
    }
}

pub fn opt_num(x: Option<f64>) -> String {
    x.map_or_else(|| "-".into(), num)
}

/// Relative errors are shown as a fraction followed by a percentage.
pub fn fraction_and_percent(x: f64) -> String {
    format!("{} ({}%)", num(x), sig_digits(100.0 * x, 4))
}

/// CSV cell: eight significant digits, blank when missing or undefined.
pub fn csv_num(x: Option<f64>) -> String {
    match x {
        Some(v) if v.is_finite() => sig_digits(v, 8),
        Some(v) if v == f64::INFINITY => "inf".into(),
        _ => String::new(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn table_alignment() {
        let mut t = TextTable::new(["k", "value"]);
        t.push(vec!["alpha".into(), "1".into()]);
        t.push(vec!["b".into(), "22.5".into()]);
        assert_eq!(t.render(), "k      value\n------------\nalpha      1\nb       22.5\n");
    }

    #[test]
    fn number_cells() {
        assert_eq!(num(f64::NAN), "-");
        assert_eq!(csv_num(None), "");
        assert_eq!(csv_num(Some(f64::NAN)), "");
        assert_eq!(csv_num(Some(f64::INFINITY)), "inf");
        assert_eq!(fraction_and_percent(0.1565), "0.1565 (15.65%)");
    }
}
