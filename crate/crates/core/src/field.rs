//! Two-mode baseband fields.

use alloc::string::String;
use alloc::vec::Vec;
use core::fmt;

use num_complex::Complex64;

use crate::sequence::PhaseSequence;
use crate::{Error, Result};

/// Polarization mode. `Up` encodes qubit value 0, `Right` encodes 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ModeId {
    Up,
    Right,
}

impl ModeId {
    pub const ALL: [ModeId; 2] = [ModeId::Up, ModeId::Right];

    pub fn index(self) -> usize {
        match self {
            ModeId::Up => 0,
            ModeId::Right => 1,
        }
    }

    pub fn other(self) -> ModeId {
        match self {
            ModeId::Up => ModeId::Right,
            ModeId::Right => ModeId::Up,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            ModeId::Up => "up",
            ModeId::Right => "right",
        }
    }
}

impl fmt::Display for ModeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Nonnegative, finite field amplitude.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default)]
pub struct Amplitude(f64);

impl Amplitude {
    pub const ZERO: Amplitude = Amplitude(0.0);
    pub const ONE: Amplitude = Amplitude(1.0);

    pub fn new(value: f64) -> Result<Self> {
        if !value.is_finite() || value < 0.0 {
            return Err(Error::InvalidParameter {
                name: "amplitude",
                value,
            });
        }
        Ok(Amplitude(value))
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Phasors for one slot, indexed by [`ModeId::index`].
pub type SlotPhasors = [Complex64; 2];

#[derive(Debug, Clone, PartialEq)]
pub struct OpticalField {
    label: String,
    slots: Vec<SlotPhasors>,
}

impl OpticalField {
    /// Wraps raw slot phasors. Rejects empty or non-finite data.
    pub fn from_slots(label: impl Into<String>, slots: Vec<SlotPhasors>) -> Result<Self> {
        if slots.is_empty() {
            return Err(Error::ZeroLength);
        }
        for p in slots.iter().flatten() {
            if !(p.re.is_finite() && p.im.is_finite()) {
                return Err(Error::InvalidParameter {
                    name: "phasor",
                    value: if p.re.is_finite() { p.im } else { p.re },
                });
            }
        }
        Ok(OpticalField {
            label: label.into(),
            slots,
        })
    }

    pub fn dark(len: usize, label: impl Into<String>) -> Result<Self> {
        make_source(Amplitude::ZERO, Amplitude::ZERO, len, label)
    }

    pub fn label(&self) -> &str {
        &self.label
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.label = label.into();
        self
    }

    pub fn len(&self) -> usize {
        self.slots.len()
    }

    pub fn is_empty(&self) -> bool {
        self.slots.is_empty()
    }

    pub fn slots(&self) -> &[SlotPhasors] {
        &self.slots
    }

    pub fn phasor(&self, slot: usize, mode: ModeId) -> Complex64 {
        self.slots[slot][mode.index()]
    }

    /// `Σₖ Σₘ |phasor|²`.
    pub fn energy(&self) -> f64 {
        self.slots.iter().flatten().map(|p| p.norm_sqr()).sum()
    }

    /// Whether any slot carries a nonzero phasor on `mode`.
    pub fn occupies(&self, mode: ModeId) -> bool {
        self.slots.iter().any(|s| s[mode.index()] != Complex64::new(0.0, 0.0))
    }

    pub(crate) fn map(&self, f: impl Fn(SlotPhasors) -> SlotPhasors) -> OpticalField {
        OpticalField {
            label: self.label.clone(),
            slots: self.slots.iter().map(|&s| f(s)).collect(),
        }
    }

    pub(crate) fn zip_map(
        &self,
        other: &OpticalField,
        f: impl Fn(SlotPhasors, SlotPhasors) -> SlotPhasors,
    ) -> Result<OpticalField> {
        check_lengths(self, other)?;
        Ok(OpticalField {
            label: self.label.clone(),
            slots: self
                .slots
                .iter()
                .zip(&other.slots)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    /// Largest per-component difference from `other`.
    pub fn max_abs_diff(&self, other: &OpticalField) -> Result<f64> {
        check_lengths(self, other)?;
        Ok(self
            .slots
            .iter()
            .flatten()
            .zip(other.slots.iter().flatten())
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max))
    }
}

pub(crate) fn check_lengths(a: &OpticalField, b: &OpticalField) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

/// Constant field with real amplitudes on each mode and zero phase.
pub fn make_source(
    amp_up: Amplitude,
    amp_right: Amplitude,
    len: usize,
    label: impl Into<String>,
) -> Result<OpticalField> {
    if len == 0 {
        return Err(Error::ZeroLength);
    }
    let slot = [
        Complex64::new(amp_up.value(), 0.0),
        Complex64::new(amp_right.value(), 0.0),
    ];
    Ok(OpticalField {
        label: label.into(),
        slots: alloc::vec![slot; len],
    })
}

/// Multiplies slot `k` of both modes by `e^{-i·sₖ}`.
pub fn modulate(f: &OpticalField, s: &PhaseSequence) -> Result<OpticalField> {
    if f.len() != s.len() {
        return Err(Error::LengthMismatch {
            left: f.len(),
            right: s.len(),
        });
    }
    Ok(OpticalField {
        label: f.label.clone(),
        slots: f
            .slots
            .iter()
            .zip(s.codes())
            .map(|(slot, code)| {
                let p = code.phasor();
                [slot[0] * p, slot[1] * p]
            })
            .collect(),
    })
}

/// Slotwise, modewise sum. Keeps `a`'s label.
pub fn superpose(a: &OpticalField, b: &OpticalField) -> Result<OpticalField> {
    a.zip_map(b, |x, y| [x[0] + y[0], x[1] + y[1]])
}

pub fn scale(f: &OpticalField, factor: Complex64) -> OpticalField {
    f.map(|s| [s[0] * factor, s[1] * factor])
}

/// Keeps mode `m` and zeroes the other.
pub fn mode_project(f: &OpticalField, m: ModeId) -> OpticalField {
    let keep = m.index();
    f.map(|s| {
        let mut out = [Complex64::new(0.0, 0.0); 2];
        out[keep] = s[keep];
        out
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sequence::builtin_table;
    use proptest::prelude::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    fn up_source() -> OpticalField {
        make_source(Amplitude::ONE, Amplitude::ZERO, 8, "up").unwrap()
    }

    #[test]
    fn source_examples() {
        let f = up_source();
        assert!(f.slots().iter().all(|s| s[0] == c(1.0, 0.0) && s[1] == c(0.0, 0.0)));
        let d = make_source(Amplitude::ZERO, Amplitude::ZERO, 8, "d").unwrap();
        assert_eq!(d.energy(), 0.0);
        let both = make_source(Amplitude::ONE, Amplitude::ONE, 8, "b").unwrap();
        assert!(both.slots().iter().all(|s| s[0] == s[1]));
        assert_eq!(make_source(Amplitude::ONE, Amplitude::ONE, 0, "z").unwrap_err(), Error::ZeroLength);
    }

    #[test]
    fn amplitude_must_be_nonnegative() {
        assert!(Amplitude::new(-0.1).is_err());
        assert!(Amplitude::new(f64::NAN).is_err());
        assert_eq!(Amplitude::new(0.5).unwrap().value(), 0.5);
    }

    #[test]
    fn from_slots_rejects_nan() {
        let bad = alloc::vec![[c(f64::NAN, 0.0), c(0.0, 0.0)]];
        assert!(OpticalField::from_slots("x", bad).is_err());
        assert_eq!(OpticalField::from_slots("x", Vec::new()).unwrap_err(), Error::ZeroLength);
    }

    #[test]
    fn modulate_examples() {
        let t = builtin_table();
        let f = up_source();
        assert_eq!(modulate(&f, &t[0]).unwrap(), f);
        // λ⁽¹⁾ slot 0 is π/2: 1 → −i
        let m = modulate(&f, &t[1]).unwrap();
        assert_eq!(m.phasor(0, ModeId::Up), c(0.0, -1.0));
        assert_eq!(m.phasor(1, ModeId::Up), c(1.0, 0.0));
        let short = make_source(Amplitude::ONE, Amplitude::ZERO, 3, "s").unwrap();
        assert_eq!(
            modulate(&short, &t[1]).unwrap_err(),
            Error::LengthMismatch { left: 3, right: 8 }
        );
    }

    #[test]
    fn superpose_and_scale_examples() {
        let t = builtin_table();
        let f = modulate(&up_source(), &t[2]).unwrap();
        let dark = OpticalField::dark(8, "d").unwrap();
        assert_eq!(superpose(&f, &dark).unwrap(), f);
        let zero = superpose(&f, &scale(&f, c(-1.0, 0.0))).unwrap();
        assert_eq!(zero.energy(), 0.0);
        assert_eq!(scale(&f, c(1.0, 0.0)), f);
        assert_eq!(scale(&f, c(0.0, 0.0)).energy(), 0.0);
        let third = scale(&f, c(1.0 / libm::sqrt(3.0), 0.0));
        for (a, b) in third.slots().iter().flatten().zip(f.slots().iter().flatten()) {
            assert!((a.norm_sqr() - b.norm_sqr() / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn ghz_first_field_by_superposition() {
        let t = builtin_table();
        let up = up_source();
        let right = make_source(Amplitude::ZERO, Amplitude::ONE, 8, "r").unwrap();
        let e1 = superpose(&modulate(&up, &t[1]).unwrap(), &modulate(&right, &t[2]).unwrap()).unwrap();
        for k in 0..8 {
            assert_eq!(e1.phasor(k, ModeId::Up), t[1].codes()[k].phasor());
            assert_eq!(e1.phasor(k, ModeId::Right), t[2].codes()[k].phasor());
        }
    }

    #[test]
    fn projection_examples() {
        let up = up_source();
        assert_eq!(mode_project(&up, ModeId::Up), up);
        assert_eq!(mode_project(&up, ModeId::Right).energy(), 0.0);
        let t = builtin_table();
        let both = modulate(&make_source(Amplitude::ONE, Amplitude::new(0.3).unwrap(), 8, "b").unwrap(), &t[4]).unwrap();
        let back = superpose(&mode_project(&both, ModeId::Up), &mode_project(&both, ModeId::Right)).unwrap();
        assert_eq!(back, both);
    }

    fn arb_field(len: usize) -> impl Strategy<Value = OpticalField> {
        proptest::collection::vec((-2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0, -2.0f64..2.0), len)
            .prop_map(|v| {
                let slots = v.into_iter().map(|(a, b, x, y)| [c(a, b), c(x, y)]).collect();
                OpticalField::from_slots("p", slots).unwrap()
            })
    }

    proptest! {
        #[test]
        fn modulate_composes_mod4(
            f in arb_field(8),
            a in proptest::collection::vec(0u8..4, 8),
            b in proptest::collection::vec(0u8..4, 8),
        ) {
            let a = PhaseSequence::from_quarter_turns(0, &a).unwrap();
            let b = PhaseSequence::from_quarter_turns(1, &b).unwrap();
            let twice = modulate(&modulate(&f, &a).unwrap(), &b).unwrap();
            let once = modulate(&f, &a.add_mod4(&b).unwrap()).unwrap();
            prop_assert!(twice.max_abs_diff(&once).unwrap() < 1e-12);
            prop_assert!((twice.energy() - f.energy()).abs() < 1e-9);
        }

        #[test]
        fn superpose_commutative_associative(a in arb_field(8), b in arb_field(8), c3 in arb_field(8)) {
            let ab = superpose(&a, &b).unwrap();
            let ba = superpose(&b, &a).unwrap();
            prop_assert!(ab.max_abs_diff(&ba).unwrap() < 1e-12);
            let l = superpose(&ab, &c3).unwrap();
            let r = superpose(&a, &superpose(&b, &c3).unwrap()).unwrap();
            prop_assert!(l.max_abs_diff(&r).unwrap() < 1e-12);
        }

        #[test]
        fn scale_energy(f in arb_field(8), re in -3.0f64..3.0, im in -3.0f64..3.0) {
            let k = c(re, im);
            let e = scale(&f, k).energy();
            prop_assert!((e - k.norm_sqr() * f.energy()).abs() <= 1e-9 * (1.0 + e));
        }
    }
}
