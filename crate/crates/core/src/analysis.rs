//! From correlation tables to M matrices, reconstructed basis patterns and
//! periods.
//!
//! Each (field, mode) branch of a correlation scan is discriminated on its
//! normalized contrast: a branch whose values are flat carries no sequence,
//! otherwise the sequences above the midpoint threshold are present. The two
//! branch results combine into one [`MPresence`] per (field, sequence).
//!
//! Reconstruction reads a bit pattern off the matrix by letting every field
//! contribute one mode through one sequence, with all fields using pairwise
//! distinct sequences (a system of distinct representatives).

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use crate::detection::CorrelationTable;
use crate::field::ModeId;
use crate::{Error, Result};

/// Discrimination thresholds.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Thresholds {
    epsilon_flat: f64,
    theta: f64,
}

impl Default for Thresholds {
    fn default() -> Self {
        Thresholds {
            epsilon_flat: 0.05,
            theta: 0.5,
        }
    }
}

impl Thresholds {
    /// Both values must lie in the open interval (0, 1).
    pub fn new(epsilon_flat: f64, theta: f64) -> Result<Self> {
        let open = |v: f64| v > 0.0 && v < 1.0;
        if !open(epsilon_flat) {
            return Err(Error::InvalidParameter {
                name: "epsilon_flat",
                value: epsilon_flat,
            });
        }
        if !open(theta) {
            return Err(Error::InvalidParameter {
                name: "theta",
                value: theta,
            });
        }
        Ok(Thresholds { epsilon_flat, theta })
    }

    pub fn epsilon_flat(&self) -> f64 {
        self.epsilon_flat
    }

    pub fn theta(&self) -> f64 {
        self.theta
    }
}

/// Indices of the values that stand out in one branch.
///
/// Returns the empty set when the branch is flat, i.e. `max ≤ 0` or
/// `(max − min)/max < ε_flat`. Otherwise index `n` is present when
/// `(v[n] − min)/(max − min) > θ`.
pub fn classify_branch(values: &[f64], thresholds: &Thresholds) -> BTreeSet<usize> {
    let Some(max) = values.iter().copied().reduce(f64::max) else {
        return BTreeSet::new();
    };
    let min = values.iter().copied().fold(f64::INFINITY, f64::min);
    if max <= 0.0 || (max - min) / max < thresholds.epsilon_flat {
        return BTreeSet::new();
    }
    let span = max - min;
    values
        .iter()
        .enumerate()
        .filter(|(_, &v)| (v - min) / span > thresholds.theta)
        .map(|(i, _)| i)
        .collect()
}

/// Which modes of a field carry a given sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum MPresence {
    None,
    UpOnly,
    RightOnly,
    Both,
}

impl MPresence {
    pub fn from_flags(up: bool, right: bool) -> MPresence {
        match (up, right) {
            (false, false) => MPresence::None,
            (true, false) => MPresence::UpOnly,
            (false, true) => MPresence::RightOnly,
            (true, true) => MPresence::Both,
        }
    }

    pub fn has(self, mode: ModeId) -> bool {
        match mode {
            ModeId::Up => matches!(self, MPresence::UpOnly | MPresence::Both),
            ModeId::Right => matches!(self, MPresence::RightOnly | MPresence::Both),
        }
    }

    /// Whether the entry can supply qubit value `bit` (0 via UP, 1 via RIGHT).
    pub fn covers(self, bit: u8) -> bool {
        match bit {
            0 => self.has(ModeId::Up),
            1 => self.has(ModeId::Right),
            _ => false,
        }
    }

    pub fn notation(self) -> &'static str {
        match self {
            MPresence::None => "0",
            MPresence::UpOnly => "(1,0)",
            MPresence::RightOnly => "(0,1)",
            MPresence::Both => "(1,1)",
        }
    }

    pub fn from_notation(s: &str) -> Option<MPresence> {
        match s {
            "0" => Some(MPresence::None),
            "(1,0)" => Some(MPresence::UpOnly),
            "(0,1)" => Some(MPresence::RightOnly),
            "(1,1)" => Some(MPresence::Both),
            _ => None,
        }
    }
}

impl fmt::Display for MPresence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.notation())
    }
}

/// Rows are fields, columns are sequence ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeMatrix {
    rows: Vec<String>,
    cols: Vec<u8>,
    entries: Vec<MPresence>,
}

impl ModeMatrix {
    pub fn new(rows: Vec<String>, cols: Vec<u8>, entries: Vec<MPresence>) -> Result<Self> {
        if entries.len() != rows.len() * cols.len() {
            return Err(Error::LengthMismatch {
                left: rows.len() * cols.len(),
                right: entries.len(),
            });
        }
        Ok(ModeMatrix { rows, cols, entries })
    }

    /// Builds from nested rows; every row must have one entry per column.
    pub fn from_rows(rows: Vec<String>, cols: Vec<u8>, data: Vec<Vec<MPresence>>) -> Result<Self> {
        if data.len() != rows.len() {
            return Err(Error::LengthMismatch {
                left: rows.len(),
                right: data.len(),
            });
        }
        let mut entries = Vec::with_capacity(rows.len() * cols.len());
        for r in data {
            if r.len() != cols.len() {
                return Err(Error::LengthMismatch {
                    left: cols.len(),
                    right: r.len(),
                });
            }
            entries.extend(r);
        }
        Ok(ModeMatrix { rows, cols, entries })
    }

    pub fn row_labels(&self) -> &[String] {
        &self.rows
    }

    pub fn col_ids(&self) -> &[u8] {
        &self.cols
    }

    pub fn n_rows(&self) -> usize {
        self.rows.len()
    }

    pub fn n_cols(&self) -> usize {
        self.cols.len()
    }

    pub fn get(&self, row: usize, col: usize) -> MPresence {
        self.entries[row * self.cols.len() + col]
    }

    pub fn row(&self, row: usize) -> &[MPresence] {
        let n = self.cols.len();
        &self.entries[row * n..(row + 1) * n]
    }

    pub fn with_row_labels(mut self, rows: Vec<String>) -> Result<Self> {
        if rows.len() != self.rows.len() {
            return Err(Error::LengthMismatch {
                left: self.rows.len(),
                right: rows.len(),
            });
        }
        self.rows = rows;
        Ok(self)
    }

    /// Positions where entries differ, ignoring labels. `None` when the
    /// shapes differ.
    pub fn mismatches(&self, other: &ModeMatrix) -> Option<Vec<(usize, usize)>> {
        if self.n_rows() != other.n_rows() || self.n_cols() != other.n_cols() {
            return None;
        }
        let mut out = Vec::new();
        for i in 0..self.n_rows() {
            for j in 0..self.n_cols() {
                if self.get(i, j) != other.get(i, j) {
                    out.push((i, j));
                }
            }
        }
        Some(out)
    }

    /// Same shape and entries, labels aside.
    pub fn same_entries(&self, other: &ModeMatrix) -> bool {
        matches!(self.mismatches(other), Some(v) if v.is_empty())
    }

    /// Number of `(bit, column)` choices available to each row.
    pub fn candidate_counts(&self) -> Vec<usize> {
        (0..self.n_rows())
            .map(|i| {
                self.row(i)
                    .iter()
                    .map(|e| usize::from(e.covers(0)) + usize::from(e.covers(1)))
                    .sum()
            })
            .collect()
    }
}

/// Binarizes a correlation table.
pub fn extract_m_matrix(table: &CorrelationTable, thresholds: &Thresholds) -> ModeMatrix {
    let rows: Vec<String> = table.field_labels().to_vec();
    let cols: Vec<u8> = table.sequence_ids().to_vec();
    let mut entries = Vec::with_capacity(rows.len() * cols.len());
    for i in 0..rows.len() {
        let up = classify_branch(table.branch(i, ModeId::Up), thresholds);
        let right = classify_branch(table.branch(i, ModeId::Right), thresholds);
        for j in 0..cols.len() {
            entries.push(MPresence::from_flags(up.contains(&j), right.contains(&j)));
        }
    }
    ModeMatrix { rows, cols, entries }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum BitOrder {
    /// The first field of a register is its most significant bit.
    #[default]
    MsbFirst,
    LsbFirst,
}

impl BitOrder {
    pub fn as_str(self) -> &'static str {
        match self {
            BitOrder::MsbFirst => "msb",
            BitOrder::LsbFirst => "lsb",
        }
    }
}

/// Which fields form the argument register `x` and the value register `f`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RegisterSplit {
    pub x_fields: Vec<usize>,
    pub f_fields: Vec<usize>,
}

impl RegisterSplit {
    /// First `x_width` fields are `x`, the rest up to `total` are `f`.
    pub fn leading(x_width: usize, total: usize) -> Self {
        RegisterSplit {
            x_fields: (0..x_width).collect(),
            f_fields: (x_width..total).collect(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StateTerm {
    /// One qubit value per field.
    pub bits: Vec<u8>,
    /// Sequence id assigned to each field, when the term came from
    /// reconstruction.
    pub witness: Option<Vec<u8>>,
}

impl StateTerm {
    pub fn bitstring(&self) -> String {
        self.bits.iter().map(|&b| if b == 0 { '0' } else { '1' }).collect()
    }

    /// Integer value of the listed fields.
    pub fn register_value(&self, fields: &[usize], order: BitOrder) -> Result<u64> {
        let mut v = 0u64;
        let iter: alloc::boxed::Box<dyn Iterator<Item = &usize>> = match order {
            BitOrder::MsbFirst => alloc::boxed::Box::new(fields.iter()),
            BitOrder::LsbFirst => alloc::boxed::Box::new(fields.iter().rev()),
        };
        for &i in iter {
            let b = *self.bits.get(i).ok_or(Error::RegisterOutOfRange {
                field: i,
                width: self.bits.len(),
            })?;
            v = (v << 1) | u64::from(b);
        }
        Ok(v)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SuperpositionState {
    terms: Vec<StateTerm>,
    pub register_split: Option<RegisterSplit>,
    pub bit_order: BitOrder,
    /// Per-field number of `(bit, sequence)` choices, for diagnostics.
    pub candidate_counts: Vec<usize>,
}

impl SuperpositionState {
    /// Deduplicates on bits and sorts lexicographically.
    pub fn new(terms: Vec<StateTerm>) -> Self {
        let mut map: BTreeMap<Vec<u8>, Option<Vec<u8>>> = BTreeMap::new();
        for t in terms {
            map.entry(t.bits).or_insert(t.witness);
        }
        SuperpositionState {
            terms: map
                .into_iter()
                .map(|(bits, witness)| StateTerm { bits, witness })
                .collect(),
            register_split: None,
            bit_order: BitOrder::MsbFirst,
            candidate_counts: Vec::new(),
        }
    }

    /// Parses `0`/`1` strings, one per term.
    pub fn from_bitstrings<'a>(patterns: impl IntoIterator<Item = &'a str>) -> Result<Self> {
        let mut terms = Vec::new();
        for p in patterns {
            let bits = p
                .chars()
                .map(|c| match c {
                    '0' => Ok(0),
                    '1' => Ok(1),
                    _ => Err(Error::Other(alloc::format!("invalid bit `{}` in `{}`", c, p))),
                })
                .collect::<Result<Vec<u8>>>()?;
            terms.push(StateTerm { bits, witness: None });
        }
        Ok(Self::new(terms))
    }

    pub fn with_register(mut self, split: RegisterSplit, order: BitOrder) -> Self {
        self.register_split = Some(split);
        self.bit_order = order;
        self
    }

    pub fn terms(&self) -> &[StateTerm] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    /// `(x, f)` per term under the register split.
    pub fn register_pairs(&self) -> Result<Vec<(u64, u64)>> {
        let split = self.register_split.as_ref().ok_or(Error::MissingRegisterSplit)?;
        self.terms
            .iter()
            .map(|t| {
                Ok((
                    t.register_value(&split.x_fields, self.bit_order)?,
                    t.register_value(&split.f_fields, self.bit_order)?,
                ))
            })
            .collect()
    }
}

/// Checks that a term's witness uses distinct sequences that cover its bits.
pub fn verify_witness(m: &ModeMatrix, term: &StateTerm) -> bool {
    let Some(w) = &term.witness else {
        return false;
    };
    if w.len() != m.n_rows() || term.bits.len() != m.n_rows() {
        return false;
    }
    let mut seen = BTreeSet::new();
    for (i, (&id, &bit)) in w.iter().zip(&term.bits).enumerate() {
        let Some(j) = m.col_ids().iter().position(|&c| c == id) else {
            return false;
        };
        if !seen.insert(id) || !m.get(i, j).covers(bit) {
            return false;
        }
    }
    true
}

/// Every bit pattern admitting a distinct-sequence witness, by exhaustive
/// backtracking. The first witness found for each pattern is kept; an
/// unsatisfiable matrix gives an empty state.
pub fn reconstruct_terms(m: &ModeMatrix) -> SuperpositionState {
    struct Search<'a> {
        m: &'a ModeMatrix,
        used: Vec<bool>,
        bits: Vec<u8>,
        witness: Vec<u8>,
        found: BTreeMap<Vec<u8>, Vec<u8>>,
    }

    impl Search<'_> {
        fn run(&mut self, row: usize) {
            if row == self.m.n_rows() {
                self.found
                    .entry(self.bits.clone())
                    .or_insert_with(|| self.witness.clone());
                return;
            }
            for j in 0..self.m.n_cols() {
                if self.used[j] {
                    continue;
                }
                let e = self.m.get(row, j);
                for bit in 0..2u8 {
                    if !e.covers(bit) {
                        continue;
                    }
                    self.used[j] = true;
                    self.bits.push(bit);
                    self.witness.push(self.m.col_ids()[j]);
                    self.run(row + 1);
                    self.witness.pop();
                    self.bits.pop();
                    self.used[j] = false;
                }
            }
        }
    }

    let mut s = Search {
        m,
        used: alloc::vec![false; m.n_cols()],
        bits: Vec::with_capacity(m.n_rows()),
        witness: Vec::with_capacity(m.n_rows()),
        found: BTreeMap::new(),
    };
    if m.n_rows() > 0 {
        s.run(0);
    }
    let mut state = SuperpositionState::new(
        s.found
            .into_iter()
            .map(|(bits, w)| StateTerm {
                bits,
                witness: Some(w),
            })
            .collect(),
    );
    state.candidate_counts = m.candidate_counts();
    state
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct PeriodReport {
    /// Number of distinct values in the `f` register.
    pub r: usize,
    /// `x` values grouped by their `f` value.
    pub groups: BTreeMap<u64, BTreeSet<u64>>,
}

impl PeriodReport {
    pub fn f_values(&self) -> BTreeSet<u64> {
        self.groups.keys().copied().collect()
    }
}

/// Groups the terms by their `f` register; the period is the number of
/// distinct `f` values.
pub fn extract_period(s: &SuperpositionState) -> Result<PeriodReport> {
    if s.is_empty() {
        return Err(Error::EmptyState);
    }
    let mut groups: BTreeMap<u64, BTreeSet<u64>> = BTreeMap::new();
    for (x, f) in s.register_pairs()? {
        groups.entry(f).or_default().insert(x);
    }
    Ok(PeriodReport {
        r: groups.len(),
        groups,
    })
}
