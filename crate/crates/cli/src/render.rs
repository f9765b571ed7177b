//! Text rendering of weighted states and paths. Rendering only formats
//! numbers the library computed; it does no arithmetic of its own.

use std::cmp::Ordering;
use std::fmt::Write as _;

use num_complex::Complex64;
use qtm_core::{format_real, Configuration, MachineDescription, WeightKind, WeightedState};

/// Significant digits in human-readable tables.
pub const TABLE_DIGITS: usize = 12;
/// Significant digits in `records` output; enough to round-trip an `f64`.
pub const RECORD_DIGITS: usize = 17;
/// Header of the `records` format. The field order is frozen.
pub const RECORDS_HEADER: &str = "state\thead\ttape\tre\tim\tprob";

/// One row of a distribution or amplitude printout.
#[derive(Debug, Clone, PartialEq)]
pub struct OutputRecord<'a> {
    pub config: &'a Configuration,
    pub weight: Complex64,
    pub prob: f64,
}

/// Rows sorted by descending probability; ties keep canonical
/// configuration order.
pub fn records(ws: &WeightedState) -> Vec<OutputRecord<'_>> {
    let mut rows: Vec<OutputRecord> = ws
        .iter()
        .map(|(config, weight)| OutputRecord { config, weight, prob: ws.probability(config) })
        .collect();
    rows.sort_by(|a, b| b.prob.partial_cmp(&a.prob).unwrap_or(Ordering::Equal));
    rows
}

/// Tab-separated records with a fixed header, LF line endings.
pub fn records_text(m: &MachineDescription, ws: &WeightedState) -> String {
    let mut out = String::new();
    out.push_str(RECORDS_HEADER);
    out.push('\n');
    for r in records(ws) {
        let _ = writeln!(
            out,
            "{}\t{}\t{}\t{}\t{}\t{}",
            m.state_name(r.config.state()),
            r.config.head(),
            m.tape_string(r.config),
            real(r.weight.re, RECORD_DIGITS),
            real(r.weight.im, RECORD_DIGITS),
            real(r.prob, RECORD_DIGITS),
        );
    }
    out
}

// Negative zero prints as "0".
fn real(x: f64, digits: usize) -> String {
    format_real(x + 0.0, digits)
}

/// `a+bi` form with the given significant digits.
pub fn format_complex(c: Complex64, digits: usize) -> String {
    let re = real(c.re, digits);
    let im = real(c.im.abs(), digits);
    let sign = if c.im.is_sign_negative() && c.im != 0.0 { '-' } else { '+' };
    format!("{re}{sign}{im}i")
}

pub fn format_weight(kind: WeightKind, c: Complex64, digits: usize) -> String {
    match kind {
        WeightKind::Probability => real(c.re, digits),
        WeightKind::Amplitude => format_complex(c, digits),
    }
}

/// Left-aligned columns separated by two spaces.
pub fn table(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut widths: Vec<usize> = header.iter().map(|h| h.len()).collect();
    for row in rows {
        for (w, cell) in widths.iter_mut().zip(row) {
            *w = (*w).max(cell.len());
        }
    }
    let mut out = String::new();
    let mut line = |cells: &mut dyn Iterator<Item = &str>| {
        let mut s = String::new();
        for (i, (cell, w)) in cells.zip(&widths).enumerate() {
            if i > 0 {
                s.push_str("  ");
            }
            let _ = write!(s, "{cell:<w$}");
        }
        out.push_str(s.trim_end());
        out.push('\n');
    };
    line(&mut header.iter().copied());
    for row in rows {
        line(&mut row.iter().map(String::as_str));
    }
    out
}

pub fn state_table(m: &MachineDescription, ws: &WeightedState) -> String {
    let rows: Vec<Vec<String>> = records(ws)
        .into_iter()
        .map(|r| {
            let (start, window) = m.tape_window(r.config);
            vec![
                m.state_name(r.config.state()).to_string(),
                r.config.head().to_string(),
                start.to_string(),
                window,
                format_weight(ws.kind(), r.weight, TABLE_DIGITS),
                real(r.prob, TABLE_DIGITS),
            ]
        })
        .collect();
    table(&["state", "head", "from", "tape", "weight", "prob"], &rows)
}
