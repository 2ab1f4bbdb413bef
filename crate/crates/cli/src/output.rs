//! Rendering of command reports as aligned tables, CSV, or JSON.

use std::fmt::Write as _;

use collapse_core::linalg::ComplexMatrix;
use serde_json::Value;

use crate::args::Format;
use crate::error::{CmdResult, Failure};

/// Decimals shown in human-readable tables; CSV and JSON keep full precision.
const TABLE_DECIMALS: usize = 10;

#[derive(Clone, Debug, PartialEq)]
pub enum Cell {
    Num(f64),
    Int(u64),
    Bool(bool),
    Text(String),
}

impl Cell {
    fn exact(&self) -> String {
        match self {
            Cell::Num(x) => format_exact(*x),
            Cell::Int(n) => n.to_string(),
            Cell::Bool(b) => b.to_string(),
            Cell::Text(s) => s.clone(),
        }
    }

    fn display(&self) -> String {
        match self {
            Cell::Num(x) if x.is_finite() => format!("{x:.TABLE_DECIMALS$}"),
            other => other.exact(),
        }
    }
}

impl From<f64> for Cell {
    fn from(x: f64) -> Self {
        Cell::Num(x)
    }
}

impl From<u64> for Cell {
    fn from(n: u64) -> Self {
        Cell::Int(n)
    }
}

impl From<usize> for Cell {
    fn from(n: usize) -> Self {
        Cell::Int(n as u64)
    }
}

impl From<bool> for Cell {
    fn from(b: bool) -> Self {
        Cell::Bool(b)
    }
}

impl From<&str> for Cell {
    fn from(s: &str) -> Self {
        Cell::Text(s.to_string())
    }
}

impl From<Option<f64>> for Cell {
    fn from(x: Option<f64>) -> Self {
        x.map_or(Cell::Text(String::new()), Cell::Num)
    }
}

/// Shortest decimal that round-trips; non-finite values spelled out.
fn format_exact(x: f64) -> String {
    if x.is_nan() {
        "nan".into()
    } else if x.is_infinite() {
        if x > 0.0 {
            "inf".into()
        } else {
            "-inf".into()
        }
    } else {
        format!("{x:?}")
    }
}

#[derive(Clone, Debug, Default)]
pub struct Table {
    pub headers: Vec<String>,
    pub rows: Vec<Vec<Cell>>,
}

impl Table {
    pub fn new(headers: &[&str]) -> Self {
        Self {
            headers: headers.iter().map(|h| h.to_string()).collect(),
            rows: Vec::new(),
        }
    }

    pub fn push(&mut self, row: Vec<Cell>) {
        debug_assert_eq!(row.len(), self.headers.len());
        self.rows.push(row);
    }

    /// A two-column `quantity,value` table.
    pub fn key_value(pairs: Vec<(&str, Cell)>) -> Self {
        let mut t = Self::new(&["quantity", "value"]);
        for (k, v) in pairs {
            t.push(vec![Cell::Text(k.to_string()), v]);
        }
        t
    }
}

/// Everything a command produces. `status` is the exit code on success
/// (0, or 3 for a degenerate-input notice).
#[derive(Clone, Debug)]
pub struct Report {
    pub table: Table,
    pub json: Value,
    /// Extra sections shown only in table output, e.g. matrices.
    pub sections: Vec<(String, ComplexMatrix)>,
    /// Diagnostics printed to stderr.
    pub notes: Vec<String>,
    /// Comment lines placed before CSV or table data.
    pub preamble: Vec<String>,
    pub status: u8,
}

impl Report {
    pub fn new(table: Table, json: Value) -> Self {
        Self {
            table,
            json,
            sections: Vec::new(),
            notes: Vec::new(),
            preamble: Vec::new(),
            status: 0,
        }
    }

    pub fn render(&self, format: Format) -> CmdResult<String> {
        match format {
            Format::Json => {
                let mut s = serde_json::to_string_pretty(&self.json)
                    .map_err(|e| Failure::Invariant(format!("cannot serialize report: {e}")))?;
                s.push('\n');
                Ok(s)
            }
            Format::Csv => {
                let mut out = self.preamble_text();
                let mut w = csv::Writer::from_writer(Vec::new());
                let io = |e: csv::Error| Failure::Invariant(format!("cannot write CSV: {e}"));
                w.write_record(&self.table.headers).map_err(io)?;
                for row in &self.table.rows {
                    w.write_record(row.iter().map(Cell::exact)).map_err(io)?;
                }
                let bytes = w
                    .into_inner()
                    .map_err(|e| Failure::Invariant(format!("cannot write CSV: {e}")))?;
                out.push_str(&String::from_utf8(bytes).expect("CSV output is UTF-8"));
                Ok(out)
            }
            Format::Table => {
                let mut out = self.preamble_text();
                out.push_str(&aligned(&self.table));
                for (title, m) in &self.sections {
                    out.push('\n');
                    out.push_str(&matrix_block(title, m));
                }
                Ok(out)
            }
        }
    }

    fn preamble_text(&self) -> String {
        self.preamble.iter().map(|l| format!("# {l}\n")).collect()
    }
}

fn aligned(table: &Table) -> String {
    let cells: Vec<Vec<String>> = table
        .rows
        .iter()
        .map(|r| r.iter().map(Cell::display).collect())
        .collect();
    let widths: Vec<usize> = (0..table.headers.len())
        .map(|j| {
            cells
                .iter()
                .map(|r| r[j].chars().count())
                .chain(std::iter::once(table.headers[j].chars().count()))
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    let line = |out: &mut String, items: &[String]| {
        let padded: Vec<String> = items.iter().zip(&widths).map(|(s, &w)| format!("{s:>w$}")).collect();
        out.push_str(padded.join("  ").trim_end());
        out.push('\n');
    };
    line(&mut out, &table.headers);
    let rule: Vec<String> = widths.iter().map(|&w| "-".repeat(w)).collect();
    line(&mut out, &rule);
    for r in &cells {
        line(&mut out, r);
    }
    out
}

fn matrix_block(title: &str, m: &ComplexMatrix) -> String {
    let mut out = format!("{title}:\n");
    for i in 0..m.rows() {
        let row: Vec<String> = (0..m.cols())
            .map(|j| {
                let z = m[(i, j)];
                let sign = if z.im < 0.0 { '-' } else { '+' };
                format!("{:>9.6} {sign} {:.6}i", z.re, z.im.abs())
            })
            .collect();
        let _ = writeln!(out, "  [{}]", row.join(", "));
    }
    out
}

/// Wire-format JSON of a square matrix.
pub fn matrix_json(m: &ComplexMatrix) -> Value {
    serde_json::to_value(collapse_core::model::WireMatrix::from(m)).expect("matrix serialization is infallible")
}
