//! Text formats: sequence family files, M-matrix files, and the CSV/JSON
//! payloads of a run bundle.

use std::fmt::Write as _;

use pseudophase_core::analysis::{MPresence, ModeMatrix, PeriodReport, SuperpositionState};
use pseudophase_core::detection::{branch_traces, CorrelationTable};
use pseudophase_core::field::{ModeId, OpticalField};
use pseudophase_core::sequence::PhaseSequence;
use serde::Serialize;
use serde_json::json;

use crate::diag::{col_of, strip_comment, tokens, Diagnostic};

/// Parses a family file: one sequence per line as comma-separated quarter
/// turns (`0`–`3`); ids follow line order starting at 0.
pub fn parse_family(text: &str) -> Result<Vec<PhaseSequence>, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let mut family: Vec<PhaseSequence> = Vec::new();
    let mut first_len: Option<(usize, usize)> = None;
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let body = strip_comment(raw);
        if body.trim().is_empty() {
            continue;
        }
        let mut codes = Vec::new();
        let mut offset = 0;
        let mut bad = None;
        for part in body.split(',') {
            let lead = part.len() - part.trim_start().len();
            let col = col_of(body, offset + lead);
            match part.trim().parse::<u8>() {
                Ok(q) if q <= 3 => codes.push(q),
                _ => {
                    bad = Some(Diagnostic::error(
                        lineno,
                        col,
                        format!("expected a quarter-turn code 0-3, found `{}`", part.trim()),
                    ));
                    break;
                }
            }
            offset += part.len() + 1;
        }
        if let Some(d) = bad {
            diags.push(d);
            continue;
        }
        match first_len {
            None => first_len = Some((codes.len(), lineno)),
            Some((n, l)) if n != codes.len() => {
                diags.push(Diagnostic::error(
                    lineno,
                    1,
                    format!("sequence has {} slots but line {} has {}", codes.len(), l, n),
                ));
                continue;
            }
            _ => {}
        }
        if family.len() > usize::from(u8::MAX) {
            diags.push(Diagnostic::error(lineno, 1, "too many sequences (at most 256)"));
            break;
        }
        let id = family.len() as u8;
        family.push(PhaseSequence::from_quarter_turns(id, &codes).expect("codes checked"));
    }
    if family.is_empty() && diags.is_empty() {
        diags.push(Diagnostic::error(1, 1, "family file contains no sequences"));
    }
    if diags.is_empty() {
        Ok(family)
    } else {
        Err(diags)
    }
}

/// An M matrix as read from a file, with the optional column ids and row
/// labels from its `# sequences:` and `# rows:` header comments.
#[derive(Debug, Clone, PartialEq)]
pub struct MFile {
    pub sequence_ids: Option<Vec<u8>>,
    pub row_labels: Option<Vec<String>>,
    pub rows: Vec<Vec<MPresence>>,
}

impl MFile {
    /// Builds the matrix, numbering unlabeled columns from 1 and rows `E1`….
    pub fn to_matrix(&self) -> ModeMatrix {
        let n_cols = self.rows.first().map_or(0, Vec::len);
        let cols = self
            .sequence_ids
            .clone()
            .unwrap_or_else(|| (1..=n_cols).map(|j| j as u8).collect());
        let rows = self
            .row_labels
            .clone()
            .unwrap_or_else(|| (1..=self.rows.len()).map(|i| format!("E{}", i)).collect());
        ModeMatrix::from_rows(rows, cols, self.rows.clone()).expect("shape checked at parse")
    }
}

fn header_value<'a>(comment: &'a str, key: &str) -> Option<&'a str> {
    comment.trim_start().strip_prefix(key)?.trim_start().strip_prefix(':')
}

pub fn parse_mfile(text: &str) -> Result<MFile, Vec<Diagnostic>> {
    let mut diags = Vec::new();
    let mut sequence_ids: Option<(usize, Vec<u8>)> = None;
    let mut row_labels: Option<(usize, Vec<String>)> = None;
    let mut rows: Vec<Vec<MPresence>> = Vec::new();
    let mut width: Option<(usize, usize)> = None;

    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        if let Some(hash) = raw.find('#') {
            let comment = &raw[hash + 1..];
            if let Some(v) = header_value(comment, "sequences") {
                let start = raw.len() - v.len();
                let mut ids = Vec::new();
                for (col, tok) in tokens(v) {
                    match tok.parse::<u8>() {
                        Ok(id) if !ids.contains(&id) => ids.push(id),
                        _ => {
                            diags.push(Diagnostic::error(
                                lineno,
                                col_of(raw, start) + col - 1,
                                format!("invalid or repeated sequence id `{}`", tok),
                            ));
                            break;
                        }
                    }
                }
                sequence_ids = Some((lineno, ids));
            } else if let Some(v) = header_value(comment, "rows") {
                row_labels = Some((lineno, tokens(v).into_iter().map(|(_, t)| t.to_string()).collect()));
            }
        }
        let toks = tokens(strip_comment(raw));
        if toks.is_empty() {
            continue;
        }
        let mut row = Vec::with_capacity(toks.len());
        for &(col, tok) in &toks {
            match MPresence::from_notation(tok) {
                Some(p) => row.push(p),
                None => {
                    diags.push(Diagnostic::error(
                        lineno,
                        col,
                        format!("expected `0`, `(1,0)`, `(0,1)` or `(1,1)`, found `{}`", tok),
                    ));
                    break;
                }
            }
        }
        if row.len() != toks.len() {
            continue;
        }
        match width {
            None => width = Some((row.len(), lineno)),
            Some((w, l)) if w != row.len() => {
                diags.push(Diagnostic::error(
                    lineno,
                    1,
                    format!("row has {} entries but line {} has {}", row.len(), l, w),
                ));
                continue;
            }
            _ => {}
        }
        rows.push(row);
    }

    if diags.is_empty() {
        if rows.is_empty() {
            diags.push(Diagnostic::error(1, 1, "M file contains no rows"));
        }
        let w = width.map_or(0, |(w, _)| w);
        if let Some((l, ids)) = &sequence_ids {
            if ids.len() != w {
                diags.push(Diagnostic::error(
                    *l,
                    1,
                    format!("header lists {} sequences but rows have {} entries", ids.len(), w),
                ));
            }
        }
        if let Some((l, labels)) = &row_labels {
            if labels.len() != rows.len() {
                diags.push(Diagnostic::error(
                    *l,
                    1,
                    format!("header lists {} row labels but there are {} rows", labels.len(), rows.len()),
                ));
            }
        }
    }
    if !diags.is_empty() {
        return Err(diags);
    }
    Ok(MFile {
        sequence_ids: sequence_ids.map(|(_, v)| v),
        row_labels: row_labels.map(|(_, v)| v),
        rows,
    })
}

fn join<T: std::fmt::Display>(items: &[T]) -> String {
    items.iter().map(ToString::to_string).collect::<Vec<_>>().join(" ")
}

/// Aligned rendering, readable back by [`parse_mfile`].
pub fn render_m(m: &ModeMatrix) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "# sequences: {}", join(m.col_ids()));
    let _ = writeln!(out, "# rows: {}", join(m.row_labels()));
    for i in 0..m.n_rows() {
        let cells: Vec<String> = m.row(i).iter().map(|p| format!("{:<5}", p.notation())).collect();
        let _ = writeln!(out, "{}", cells.join(" ").trim_end());
    }
    out
}

/// Entry-by-entry differences, or a shape note when shapes differ.
pub fn render_m_diff(expected: &ModeMatrix, actual: &ModeMatrix) -> String {
    let mut out = String::new();
    match expected.mismatches(actual) {
        None => {
            let _ = writeln!(
                out,
                "shape mismatch: expected {}x{}, got {}x{}",
                expected.n_rows(),
                expected.n_cols(),
                actual.n_rows(),
                actual.n_cols()
            );
        }
        Some(v) => {
            for (i, j) in v {
                let _ = writeln!(
                    out,
                    "row {} ({}), sequence {}: expected {}, got {}",
                    i + 1,
                    actual.row_labels()[i],
                    actual.col_ids()[j],
                    expected.get(i, j),
                    actual.get(i, j)
                );
            }
        }
    }
    out.push_str("--- expected\n");
    out.push_str(&render_m(expected));
    out.push_str("+++ actual\n");
    out.push_str(&render_m(actual));
    out
}

pub fn m_json(m: &ModeMatrix) -> serde_json::Value {
    let entries: Vec<Vec<&str>> = (0..m.n_rows())
        .map(|i| m.row(i).iter().map(|p| p.notation()).collect())
        .collect();
    json!({ "rows": m.row_labels(), "sequences": m.col_ids(), "entries": entries })
}

/// `field,slot,mode,re,im`, one row per (field, slot, mode).
pub fn fields_csv(fields: &[OpticalField]) -> String {
    let mut out = String::from("field,slot,mode,re,im\n");
    for f in fields {
        for (k, s) in f.slots().iter().enumerate() {
            for mode in ModeId::ALL {
                let p = s[mode.index()];
                let _ = writeln!(out, "{},{},{},{},{}", f.label(), k, mode, p.re, p.im);
            }
        }
    }
    out
}

/// Photocurrents for every (field, mode, LO), each slot sampled
/// `samples_per_slot` times at the sample midpoints.
pub fn traces_csv(
    fields: &[OpticalField],
    lo_family: &[PhaseSequence],
    mu: f64,
    tau_slot: f64,
    samples_per_slot: usize,
) -> pseudophase_core::Result<String> {
    let mut out = String::from("field,mode,lo,slot,sample,t,i1,i2\n");
    for f in fields {
        for mode in ModeId::ALL {
            for lo in lo_family {
                let (t1, t2) = branch_traces(f, mode, lo, mu)?;
                for (k, (a, b)) in t1.samples().iter().zip(t2.samples()).enumerate() {
                    for j in 0..samples_per_slot {
                        let t = (k as f64 + (j as f64 + 0.5) / samples_per_slot as f64) * tau_slot;
                        let _ = writeln!(out, "{},{},{},{},{},{},{},{}", f.label(), mode, lo.id(), k, j, t, a, b);
                    }
                }
            }
        }
    }
    Ok(out)
}

#[derive(Serialize)]
struct CorrelationLine<'a> {
    field: &'a str,
    mode: &'a str,
    lo: u8,
    value: f64,
}

/// `field,mode,lo,value` CSV and the same records as JSON lines.
pub fn correlation_outputs(table: &CorrelationTable) -> (String, String) {
    let mut csv = String::from("field,mode,lo,value\n");
    let mut jsonl = String::new();
    for r in table.records() {
        let _ = writeln!(csv, "{},{},{},{}", r.field_label, r.mode, r.lo_sequence, r.value);
        let line = CorrelationLine {
            field: &r.field_label,
            mode: r.mode.as_str(),
            lo: r.lo_sequence,
            value: r.value,
        };
        jsonl.push_str(&serde_json::to_string(&line).expect("plain record"));
        jsonl.push('\n');
    }
    (csv, jsonl)
}

/// One line per term: bits, then the witnessing sequence per field.
pub fn render_state(s: &SuperpositionState) -> String {
    let mut out = String::new();
    for t in s.terms() {
        match &t.witness {
            Some(w) => {
                let _ = writeln!(out, "{}  sequences: {}", t.bitstring(), join(w));
            }
            None => {
                let _ = writeln!(out, "{}", t.bitstring());
            }
        }
    }
    out
}

pub fn state_json(s: &SuperpositionState) -> serde_json::Value {
    let terms: Vec<serde_json::Value> = s
        .terms()
        .iter()
        .map(|t| json!({ "bits": t.bitstring(), "sequences": t.witness }))
        .collect();
    json!({
        "count": s.len(),
        "terms": terms,
        "candidate_counts": s.candidate_counts,
    })
}

pub fn period_json(p: &PeriodReport) -> serde_json::Value {
    let groups: Vec<serde_json::Value> = p
        .groups
        .iter()
        .map(|(f, xs)| json!({ "f": f, "x": xs }))
        .collect();
    json!({ "r": p.r, "f_values": p.f_values(), "groups": groups })
}

pub fn render_period(p: &PeriodReport) -> String {
    let mut out = format!("r = {}\n", p.r);
    for (f, xs) in &p.groups {
        let xs: Vec<u64> = xs.iter().copied().collect();
        let _ = writeln!(out, "  f = {:>3}: x = {}", f, join(&xs));
    }
    out
}

/// Pretty JSON with a trailing newline.
pub fn to_json_text(v: &serde_json::Value) -> String {
    let mut s = serde_json::to_string_pretty(v).expect("json value");
    s.push('\n');
    s
}
