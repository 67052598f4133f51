//! Rendering. Every subcommand produces one [`Document`]: a single table
//! plus optional headline notes. CSV emits only the table (stable goldens);
//! text adds the title and notes. Probabilities print with fixed six
//! decimals, rates and log quantities in round-trip scientific notation.
//!
//! The log base is applied here, at the formatting boundary: `Rate` cells
//! and rate-like note values are divided by log(2) under `--log-base 2`.
//! Probabilities, counts, and family parameters are never rescaled.

use std::f64::consts::LN_2;
use std::fs;
use std::io::Write as _;
use std::path::Path;

use crate::CliError;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LogBase {
    E,
    Two,
}

impl LogBase {
    fn scale(self, x: f64) -> f64 {
        match self {
            LogBase::E => x,
            LogBase::Two => x / LN_2,
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Csv,
    Text,
}

/// One table cell. The variant fixes the formatting rule, so every row of
/// a column renders identically regardless of value.
#[derive(Clone, Debug)]
pub enum Cell {
    /// Integer (sample sizes, counts, indices).
    Int(u64),
    /// Probability, fixed 6 decimals.
    Prob(f64),
    /// Rate or log quantity, scientific notation, log-base scaled.
    Rate(f64),
    /// Rate that may be absent (e.g. no predicted limit).
    OptRate(Option<f64>),
    /// Unit-free number (family parameters, residuals): scientific
    /// notation, never log-base scaled.
    Num(f64),
    Text(String),
}

impl Cell {
    fn render(&self, base: LogBase) -> String {
        match self {
            Cell::Int(v) => v.to_string(),
            Cell::Prob(p) => format!("{p:.6}"),
            Cell::Rate(r) => format!("{:e}", base.scale(*r)),
            Cell::OptRate(None) => String::new(),
            Cell::OptRate(Some(r)) => format!("{:e}", base.scale(*r)),
            Cell::Num(v) => format!("{v:e}"),
            Cell::Text(s) => s.clone(),
        }
    }
}

/// A rendered run: headline notes plus one table.
#[derive(Debug, Default)]
pub struct Document {
    pub title: String,
    pub notes: Vec<(String, Cell)>,
    pub header: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Document {
    pub fn new(title: &str, header: &[&str]) -> Document {
        Document {
            title: title.to_string(),
            notes: Vec::new(),
            header: header.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn note(&mut self, key: &str, value: Cell) {
        self.notes.push((key.to_string(), value));
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.header.len());
        self.rows.push(row);
    }

    pub fn render(&self, format: Format, base: LogBase) -> String {
        match format {
            Format::Csv => self.render_csv(base),
            Format::Text => self.render_text(base),
        }
    }

    fn render_csv(&self, base: LogBase) -> String {
        let mut out = String::new();
        out.push_str(&self.header.join(","));
        out.push('\n');
        for row in &self.rows {
            let cells: Vec<String> = row.iter().map(|c| c.render(base)).collect();
            out.push_str(&cells.join(","));
            out.push('\n');
        }
        out
    }

    fn render_text(&self, base: LogBase) -> String {
        let mut out = String::new();
        out.push_str(&self.title);
        out.push('\n');
        for (key, value) in &self.notes {
            out.push_str(&format!("  {key}: {}\n", value.render(base)));
        }
        if !self.notes.is_empty() {
            out.push('\n');
        }
        // Column widths over header and all rendered cells.
        let rendered: Vec<Vec<String>> =
            self.rows.iter().map(|r| r.iter().map(|c| c.render(base)).collect()).collect();
        let mut widths: Vec<usize> = self.header.iter().map(|h| h.len()).collect();
        for row in &rendered {
            for (w, cell) in widths.iter_mut().zip(row) {
                *w = (*w).max(cell.len());
            }
        }
        let line = |cells: &[String]| -> String {
            let padded: Vec<String> = cells
                .iter()
                .zip(&widths)
                .map(|(c, w)| format!("{c:>w$}", w = w))
                .collect();
            let mut s = padded.join("  ");
            while s.ends_with(' ') {
                s.pop();
            }
            s
        };
        out.push_str(&line(&self.header));
        out.push('\n');
        for row in &rendered {
            out.push_str(&line(row));
            out.push('\n');
        }
        out
    }
}

/// Write to the path, or stdout when absent. Output always ends in a
/// newline, so files compare byte-for-byte across runs.
pub fn emit(rendered: &str, out: Option<&Path>) -> Result<(), CliError> {
    match out {
        Some(path) => fs::write(path, rendered).map_err(|e| {
            CliError::computation(format!("cannot write {}: {e}", path.display()))
        }),
        None => {
            let stdout = std::io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(rendered.as_bytes())
                .and_then(|()| lock.flush())
                .map_err(|e| CliError::computation(format!("cannot write stdout: {e}")))
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc() -> Document {
        let mut d = Document::new("demo", &["n", "probability", "rate", "limit"]);
        d.note("note_rate", Cell::Rate(LN_2));
        d.push(vec![Cell::Int(10), Cell::Prob(0.25), Cell::Rate(-LN_2), Cell::OptRate(None)]);
        d.push(vec![
            Cell::Int(200),
            Cell::Prob(1.0),
            Cell::Rate(2.0 * LN_2),
            Cell::OptRate(Some(LN_2)),
        ]);
        d
    }

    #[test]
    fn csv_is_a_bare_table_with_trailing_newline() {
        let s = doc().render(Format::Csv, LogBase::E);
        assert_eq!(
            s,
            format!(
                "n,probability,rate,limit\n10,0.250000,{},\n200,1.000000,{},{}\n",
                format_args!("{:e}", -LN_2),
                format_args!("{:e}", 2.0 * LN_2),
                format_args!("{:e}", LN_2),
            )
        );
    }

    #[test]
    fn log_base_two_divides_rate_cells_only() {
        let s = doc().render(Format::Csv, LogBase::Two);
        assert_eq!(s, "n,probability,rate,limit\n10,0.250000,-1e0,\n200,1.000000,2e0,1e0\n");
        // Num cells keep their natural-base value.
        assert_eq!(Cell::Num(LN_2).render(LogBase::Two), format!("{:e}", LN_2));
        assert_eq!(Cell::Prob(0.5).render(LogBase::Two), "0.500000");
    }

    #[test]
    fn text_renders_title_notes_and_aligned_columns() {
        let s = doc().render(Format::Text, LogBase::Two);
        let lines: Vec<&str> = s.lines().collect();
        assert_eq!(lines[0], "demo");
        assert_eq!(lines[1], "  note_rate: 1e0");
        assert_eq!(lines[2], "");
        // Header and rows align on column boundaries, no trailing spaces.
        assert!(lines[3].contains("n  probability"));
        assert!(lines.iter().all(|l| !l.ends_with(' ')));
        assert!(s.ends_with('\n'));
    }

    #[test]
    fn round_trip_formatting_is_lossless() {
        for x in [1.0 / 3.0, f64::MIN_POSITIVE, 0.1 + 0.2, -1.809885629310044e0] {
            let printed = Cell::Rate(x).render(LogBase::E);
            assert_eq!(printed.parse::<f64>().unwrap(), x);
        }
    }
}
