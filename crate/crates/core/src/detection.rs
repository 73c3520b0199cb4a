//! Balanced coherent detection and correlation.
//!
//! A signal branch and a local oscillator (LO) on the same polarization mode
//! meet in the 50/50 coupler; two photodetectors read the coupler outputs
//! and the correlation is the slot-integrated product of the two photocurrents.
//! For unit amplitudes the photocurrents are `μ[1 ∓ sin(λ_S − λ_L)]`, so the
//! product is `μ² cos²(λ_S − λ_L)`.

use alloc::string::String;
use alloc::vec::Vec;

use crate::field::{make_source, mode_project, modulate, Amplitude, ModeId, OpticalField};
use crate::optics::coupler2;
use crate::sequence::PhaseSequence;
use crate::{Error, Result};

/// Per-slot photocurrent samples, in units of `μ·A²`.
#[derive(Debug, Clone, PartialEq)]
pub struct DetectorTrace {
    samples: Vec<f64>,
    mu: f64,
}

impl DetectorTrace {
    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn from_samples(samples: Vec<f64>, mu: f64) -> Self {
        DetectorTrace { samples, mu }
    }
}

fn positive(name: &'static str, value: f64) -> Result<()> {
    if !(value.is_finite() && value > 0.0) {
        return Err(Error::InvalidParameter { name, value });
    }
    Ok(())
}

/// `sample[k] = μ · Σₘ |phasor[k][m]|²`.
pub fn photodetect(f: &OpticalField, mu: f64) -> Result<DetectorTrace> {
    positive("mu", mu)?;
    let samples = f
        .slots()
        .iter()
        .map(|s| mu * (s[0].norm_sqr() + s[1].norm_sqr()))
        .collect();
    Ok(DetectorTrace { samples, mu })
}

fn single_mode(f: &OpticalField) -> Result<Option<ModeId>> {
    match (f.occupies(ModeId::Up), f.occupies(ModeId::Right)) {
        (true, true) => Err(Error::ModeMismatch),
        (true, false) => Ok(Some(ModeId::Up)),
        (false, true) => Ok(Some(ModeId::Right)),
        (false, false) => Ok(None),
    }
}

/// Couples `signal` with `lo` and detects both outputs.
///
/// Both fields must sit on one common mode (a dark field matches any mode).
pub fn balanced_pair(
    signal: &OpticalField,
    lo: &OpticalField,
    mu: f64,
) -> Result<(DetectorTrace, DetectorTrace)> {
    positive("mu", mu)?;
    if let (Some(a), Some(b)) = (single_mode(signal)?, single_mode(lo)?) {
        if a != b {
            return Err(Error::ModeMismatch);
        }
    }
    let (o1, o2) = coupler2(signal, lo)?;
    Ok((photodetect(&o1, mu)?, photodetect(&o2, mu)?))
}

/// `Σₖ t1[k]·t2[k]·τ`.
pub fn correlate(t1: &DetectorTrace, t2: &DetectorTrace, tau_slot: f64) -> Result<f64> {
    positive("tau_slot", tau_slot)?;
    if t1.len() != t2.len() {
        return Err(Error::LengthMismatch {
            left: t1.len(),
            right: t2.len(),
        });
    }
    Ok(t1
        .samples
        .iter()
        .zip(&t2.samples)
        .map(|(a, b)| a * b * tau_slot)
        .sum())
}

/// Unit-amplitude LO on `mode`, modulated with `seq`.
pub fn lo_field(seq: &PhaseSequence, mode: ModeId) -> Result<OpticalField> {
    let (up, right) = match mode {
        ModeId::Up => (Amplitude::ONE, Amplitude::ZERO),
        ModeId::Right => (Amplitude::ZERO, Amplitude::ONE),
    };
    let src = make_source(up, right, seq.len(), "lo")?;
    modulate(&src, seq)
}

/// Detector traces for one (field, mode, LO) combination.
pub fn branch_traces(
    field: &OpticalField,
    mode: ModeId,
    lo_seq: &PhaseSequence,
    mu: f64,
) -> Result<(DetectorTrace, DetectorTrace)> {
    let branch = mode_project(field, mode);
    let lo = lo_field(lo_seq, mode)?;
    balanced_pair(&branch, &lo, mu)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationRecord {
    pub field_label: String,
    pub mode: ModeId,
    pub lo_sequence: u8,
    pub value: f64,
}

/// Dense correlation values over (field × mode × LO sequence).
#[derive(Debug, Clone, PartialEq)]
pub struct CorrelationTable {
    field_labels: Vec<String>,
    sequence_ids: Vec<u8>,
    values: Vec<f64>,
    mu: f64,
    tau_slot: f64,
}

impl CorrelationTable {
    pub fn field_labels(&self) -> &[String] {
        &self.field_labels
    }

    pub fn sequence_ids(&self) -> &[u8] {
        &self.sequence_ids
    }

    pub fn mu(&self) -> f64 {
        self.mu
    }

    pub fn tau_slot(&self) -> f64 {
        self.tau_slot
    }

    fn offset(&self, field: usize, mode: ModeId) -> usize {
        (field * 2 + mode.index()) * self.sequence_ids.len()
    }

    /// Values for one field branch, one per LO sequence.
    pub fn branch(&self, field: usize, mode: ModeId) -> &[f64] {
        let o = self.offset(field, mode);
        &self.values[o..o + self.sequence_ids.len()]
    }

    pub fn value(&self, field: usize, mode: ModeId, seq_index: usize) -> f64 {
        self.branch(field, mode)[seq_index]
    }

    /// Records in canonical order: field, then mode (up, right), then LO.
    pub fn records(&self) -> Vec<CorrelationRecord> {
        let mut out = Vec::with_capacity(self.values.len());
        for (i, label) in self.field_labels.iter().enumerate() {
            for mode in ModeId::ALL {
                for (j, &id) in self.sequence_ids.iter().enumerate() {
                    out.push(CorrelationRecord {
                        field_label: label.clone(),
                        mode,
                        lo_sequence: id,
                        value: self.value(i, mode, j),
                    });
                }
            }
        }
        out
    }
}

/// Splits every field into its two mode branches and correlates each branch
/// against a unit LO for every sequence of `lo_family`.
pub fn correlation_scan(
    fields: &[OpticalField],
    lo_family: &[PhaseSequence],
    mu: f64,
    tau_slot: f64,
) -> Result<CorrelationTable> {
    if fields.is_empty() {
        return Err(Error::EmptyInput("fields"));
    }
    if lo_family.is_empty() {
        return Err(Error::EmptyInput("LO family"));
    }
    positive("mu", mu)?;
    positive("tau_slot", tau_slot)?;
    let len = fields[0].len();
    for l in fields.iter().map(OpticalField::len).chain(lo_family.iter().map(PhaseSequence::len)) {
        if l != len {
            return Err(Error::LengthMismatch { left: len, right: l });
        }
    }

    let mut los = Vec::with_capacity(lo_family.len() * 2);
    for mode in ModeId::ALL {
        for s in lo_family {
            los.push(lo_field(s, mode)?);
        }
    }

    let mut values = Vec::with_capacity(fields.len() * 2 * lo_family.len());
    for f in fields {
        for mode in ModeId::ALL {
            let branch = mode_project(f, mode);
            for j in 0..lo_family.len() {
                let lo = &los[mode.index() * lo_family.len() + j];
                let (t1, t2) = balanced_pair(&branch, lo, mu)?;
                values.push(correlate(&t1, &t2, tau_slot)?);
            }
        }
    }

    Ok(CorrelationTable {
        field_labels: fields.iter().map(|f| String::from(f.label())).collect(),
        sequence_ids: lo_family.iter().map(PhaseSequence::id).collect(),
        values,
        mu,
        tau_slot,
    })
}
