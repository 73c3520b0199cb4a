//! The four multi-field states: product, GHZ, W and the Shor-15
//! modular-exponentiation result state.
//!
//! Each builder writes the fields directly from their phasor expressions and
//! carries the M matrix a correlation scan is expected to produce.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;
use core::str::FromStr;

use num_complex::Complex64;

use crate::analysis::{BitOrder, MPresence, ModeMatrix, RegisterSplit, StateTerm, SuperpositionState};
use crate::field::{make_source, modulate, superpose, Amplitude, ModeId, OpticalField};
use crate::sequence::{self, PhaseSequence, BUILTIN_LENGTH};
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScenarioName {
    Product,
    Ghz,
    W,
    Shor15,
}

impl ScenarioName {
    pub const ALL: [ScenarioName; 4] = [
        ScenarioName::Product,
        ScenarioName::Ghz,
        ScenarioName::W,
        ScenarioName::Shor15,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            ScenarioName::Product => "product",
            ScenarioName::Ghz => "ghz",
            ScenarioName::W => "w",
            ScenarioName::Shor15 => "shor15",
        }
    }
}

impl fmt::Display for ScenarioName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for ScenarioName {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .iter()
            .copied()
            .find(|n| n.as_str() == s)
            .ok_or_else(|| Error::Other(alloc::format!("unknown scenario `{}`", s)))
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Scenario {
    pub name: ScenarioName,
    pub fields: Vec<OpticalField>,
    /// LO sequences to scan, in M-matrix column order.
    pub lo_family: Vec<PhaseSequence>,
    pub expected_m: Option<ModeMatrix>,
    pub register_split: Option<RegisterSplit>,
}

impl Scenario {
    pub fn sequence_ids(&self) -> Vec<u8> {
        self.lo_family.iter().map(PhaseSequence::id).collect()
    }
}

fn field_labels(n: usize) -> Vec<String> {
    (1..=n).map(|i| alloc::format!("E{}", i)).collect()
}

fn resolve_distinct(family: &[PhaseSequence], ids: &[u8]) -> Result<Vec<PhaseSequence>> {
    for (i, id) in ids.iter().enumerate() {
        if ids[..i].contains(id) {
            return Err(Error::DuplicateSequence(*id));
        }
    }
    ids.iter().map(|&id| sequence::resolve(family, id)).collect()
}

fn seq_len(family: &[PhaseSequence]) -> Result<usize> {
    family
        .first()
        .map(PhaseSequence::len)
        .ok_or(Error::EmptyInput("sequence family"))
}

/// Unit-amplitude term on `mode` carrying `seq`.
fn term(seq: &PhaseSequence, mode: ModeId) -> Result<OpticalField> {
    let (up, right) = match mode {
        ModeId::Up => (Amplitude::ONE, Amplitude::ZERO),
        ModeId::Right => (Amplitude::ZERO, Amplitude::ONE),
    };
    modulate(&make_source(up, right, seq.len(), "")?, seq)
}

/// Sum of unit terms: `up` sequences on UP, `right` sequences on RIGHT.
fn field_from_terms(
    label: &str,
    len: usize,
    up: &[&PhaseSequence],
    right: &[&PhaseSequence],
) -> Result<OpticalField> {
    let mut acc = OpticalField::dark(len, label)?;
    for s in up {
        acc = superpose(&acc, &term(s, ModeId::Up)?)?;
    }
    for s in right {
        acc = superpose(&acc, &term(s, ModeId::Right)?)?;
    }
    Ok(acc.with_label(label))
}

/// Three fields, each an equal-amplitude (`1/√2`) mode superposition tagged
/// by its own sequence.
pub fn build_product(family: &[PhaseSequence], ids: [u8; 3]) -> Result<Scenario> {
    let seqs = resolve_distinct(family, &ids)?;
    let len = seq_len(family)?;
    let a = Amplitude::new(core::f64::consts::FRAC_1_SQRT_2)?;
    let labels = field_labels(3);
    let fields = seqs
        .iter()
        .zip(&labels)
        .map(|(s, l)| modulate(&make_source(a, a, len, l.as_str())?, s))
        .collect::<Result<Vec<_>>>()?;
    let expected = ModeMatrix::from_rows(
        labels,
        ids.to_vec(),
        (0..3)
            .map(|i| {
                (0..3)
                    .map(|j| if i == j { MPresence::Both } else { MPresence::None })
                    .collect()
            })
            .collect(),
    )?;
    Ok(Scenario {
        name: ScenarioName::Product,
        fields,
        lo_family: seqs,
        expected_m: Some(expected),
        register_split: None,
    })
}

/// Cyclic mode exchange: field `i` carries sequence `i` on UP and sequence
/// `i+1` on RIGHT.
pub fn build_ghz(family: &[PhaseSequence], ids: [u8; 3]) -> Result<Scenario> {
    let seqs = resolve_distinct(family, &ids)?;
    let len = seq_len(family)?;
    let labels = field_labels(3);
    let fields = (0..3)
        .map(|i| field_from_terms(&labels[i], len, &[&seqs[i]], &[&seqs[(i + 1) % 3]]))
        .collect::<Result<Vec<_>>>()?;
    use MPresence::{None as Z, RightOnly as R, UpOnly as U};
    let expected = ModeMatrix::from_rows(
        labels,
        ids.to_vec(),
        alloc::vec![
            alloc::vec![U, R, Z],
            alloc::vec![Z, U, R],
            alloc::vec![R, Z, U],
        ],
    )?;
    Ok(Scenario {
        name: ScenarioName::Ghz,
        fields,
        lo_family: seqs,
        expected_m: Some(expected),
        register_split: None,
    })
}

/// Three identical fields: first sequence on UP, second and third on RIGHT.
pub fn build_w(family: &[PhaseSequence], ids: [u8; 3]) -> Result<Scenario> {
    let seqs = resolve_distinct(family, &ids)?;
    let len = seq_len(family)?;
    let labels = field_labels(3);
    let fields = labels
        .iter()
        .map(|l| field_from_terms(l, len, &[&seqs[0]], &[&seqs[1], &seqs[2]]))
        .collect::<Result<Vec<_>>>()?;
    use MPresence::{RightOnly as R, UpOnly as U};
    let expected = ModeMatrix::from_rows(labels, ids.to_vec(), alloc::vec![alloc::vec![U, R, R]; 3])?;
    Ok(Scenario {
        name: ScenarioName::W,
        fields,
        lo_family: seqs,
        expected_m: Some(expected),
        register_split: None,
    })
}

/// Sequence ids on (UP, RIGHT) for each of the eight result-state fields.
/// Id 8 is the all-zero sequence.
pub const SHOR15_TERMS: [(&[u8], &[u8]); 8] = [
    (&[1, 2, 3, 4], &[1, 2, 3, 4]),
    (&[2, 3, 4, 5], &[2, 3, 4, 5]),
    (&[3, 4], &[5, 6]),
    (&[4, 6], &[5, 7]),
    (&[5, 6, 7], &[8]),
    (&[6], &[7, 8, 1]),
    (&[7, 1, 2], &[8]),
    (&[8, 2], &[1, 3]),
];

/// Expected M matrix for the Shor-15 state, columns λ⁽¹⁾…λ⁽⁸⁾.
pub fn shor15_expected_rows() -> Vec<Vec<MPresence>> {
    use MPresence::{Both as B, None as Z, RightOnly as R, UpOnly as U};
    alloc::vec![
        alloc::vec![B, B, B, B, Z, Z, Z, Z],
        alloc::vec![Z, B, B, B, B, Z, Z, Z],
        alloc::vec![Z, Z, U, U, R, R, Z, Z],
        alloc::vec![Z, Z, Z, U, R, U, R, Z],
        alloc::vec![Z, Z, Z, Z, U, U, U, R],
        alloc::vec![R, Z, Z, Z, Z, U, R, R],
        alloc::vec![U, U, Z, Z, Z, Z, U, R],
        alloc::vec![R, U, R, Z, Z, Z, Z, U],
    ]
}

/// The eight-field modular-exponentiation result state for `7ˣ mod 15`,
/// with unit coefficients on every listed term.
pub fn build_shor15(family: &[PhaseSequence]) -> Result<Scenario> {
    let len = seq_len(family)?;
    let ids: Vec<u8> = (1..=8).collect();
    let seqs = ids
        .iter()
        .map(|&id| sequence::resolve(family, id))
        .collect::<Result<Vec<_>>>()?;
    let by_id = |id: u8| &seqs[usize::from(id) - 1];
    let labels = field_labels(8);
    let fields = SHOR15_TERMS
        .iter()
        .zip(&labels)
        .map(|((up, right), l)| {
            let up: Vec<&PhaseSequence> = up.iter().map(|&i| by_id(i)).collect();
            let right: Vec<&PhaseSequence> = right.iter().map(|&i| by_id(i)).collect();
            field_from_terms(l, len, &up, &right)
        })
        .collect::<Result<Vec<_>>>()?;
    let expected = ModeMatrix::from_rows(labels, ids, shor15_expected_rows())?;
    Ok(Scenario {
        name: ScenarioName::Shor15,
        fields,
        lo_family: seqs,
        expected_m: Some(expected),
        register_split: Some(RegisterSplit::leading(4, 8)),
    })
}

/// Builds a scenario by name. `ids` selects the three sequences for the
/// three-field states and is ignored for Shor-15.
pub fn build(name: ScenarioName, family: &[PhaseSequence], ids: [u8; 3]) -> Result<Scenario> {
    match name {
        ScenarioName::Product => build_product(family, ids),
        ScenarioName::Ghz => build_ghz(family, ids),
        ScenarioName::W => build_w(family, ids),
        ScenarioName::Shor15 => build_shor15(family),
    }
}

/// Published result state: `f` value and the four `x` values sharing it.
pub const REFERENCE_RESULT_GROUPS: [(u64, [u64; 4]); 4] = [
    (1, [0, 4, 8, 12]),
    (7, [1, 5, 9, 13]),
    (4, [2, 6, 10, 14]),
    (13, [3, 7, 11, 15]),
];

/// The 16-term reference state `Σₓ |x⟩|f(x)⟩` as 8-bit patterns, MSB first,
/// split four and four.
pub fn reference_result_state() -> SuperpositionState {
    let mut terms = Vec::new();
    for (f, xs) in REFERENCE_RESULT_GROUPS {
        for x in xs {
            let v = (x << 4) | f;
            let bits = (0..8).rev().map(|k| ((v >> k) & 1) as u8).collect();
            terms.push(StateTerm { bits, witness: None });
        }
    }
    SuperpositionState::new(terms).with_register(RegisterSplit::leading(4, 8), BitOrder::MsbFirst)
}

/// Checks whether `actual` is `expected` scaled by a single positive real
/// factor, to a relative tolerance. Returns the factor.
pub fn positive_scale_factor(expected: &OpticalField, actual: &OpticalField, tol: f64) -> Option<f64> {
    if expected.len() != actual.len() {
        return None;
    }
    let (ee, ea) = (expected.energy(), actual.energy());
    if ee == 0.0 || ea == 0.0 {
        return (ee == ea).then_some(1.0);
    }
    let k = libm::sqrt(ea / ee);
    let scaled = crate::field::scale(expected, Complex64::new(k, 0.0));
    let diff = scaled.max_abs_diff(actual).ok()?;
    (diff <= tol * libm::sqrt(ea)).then_some(k)
}

/// Default three sequence ids, λ⁽¹⁾ λ⁽²⁾ λ⁽³⁾.
pub const DEFAULT_IDS: [u8; 3] = [1, 2, 3];

/// Slot count of the built-in family.
pub const DEFAULT_LENGTH: usize = BUILTIN_LENGTH;
