//! Pseudorandom phase sequences.
//!
//! A sequence is a fixed-length vector of phase codes, each a whole number
//! of quarter turns. The built-in family has eight members of length 8 over
//! GF(2) (codes 0 and π/2). It forms a linear code under slotwise XOR, every
//! nonzero member is balanced, and any two distinct members agree on exactly
//! half of the slots.

use alloc::vec::Vec;
use core::f64::consts::FRAC_PI_2;

use num_complex::Complex64;

use crate::{Error, Result};

/// Phase code stored as a number of quarter turns (`0..=3`).
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct PhaseCode(u8);

impl PhaseCode {
    pub const ZERO: PhaseCode = PhaseCode(0);
    pub const QUARTER: PhaseCode = PhaseCode(1);

    pub fn new(quarter_turns: u8) -> Result<Self> {
        if quarter_turns > 3 {
            return Err(Error::InvalidCode(quarter_turns));
        }
        Ok(PhaseCode(quarter_turns))
    }

    pub fn quarter_turns(self) -> u8 {
        self.0
    }

    pub fn radians(self) -> f64 {
        f64::from(self.0) * FRAC_PI_2
    }

    pub fn is_gf2(self) -> bool {
        self.0 < 2
    }

    /// Sum of two codes modulo a full turn.
    pub fn wrapping_add(self, other: PhaseCode) -> PhaseCode {
        PhaseCode((self.0 + other.0) % 4)
    }

    /// `e^{-i·phase}` evaluated exactly.
    pub fn phasor(self) -> Complex64 {
        match self.0 {
            0 => Complex64::new(1.0, 0.0),
            1 => Complex64::new(0.0, -1.0),
            2 => Complex64::new(-1.0, 0.0),
            _ => Complex64::new(0.0, 1.0),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct PhaseSequence {
    id: u8,
    codes: Vec<PhaseCode>,
}

impl PhaseSequence {
    pub fn new(id: u8, codes: Vec<PhaseCode>) -> Self {
        PhaseSequence { id, codes }
    }

    /// Builds a sequence from raw quarter-turn counts.
    pub fn from_quarter_turns(id: u8, quarter_turns: &[u8]) -> Result<Self> {
        let codes = quarter_turns
            .iter()
            .map(|&q| PhaseCode::new(q))
            .collect::<Result<Vec<_>>>()?;
        Ok(PhaseSequence { id, codes })
    }

    pub fn id(&self) -> u8 {
        self.id
    }

    pub fn codes(&self) -> &[PhaseCode] {
        &self.codes
    }

    pub fn len(&self) -> usize {
        self.codes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.codes.is_empty()
    }

    pub fn is_gf2(&self) -> bool {
        self.codes.iter().all(|c| c.is_gf2())
    }

    /// Same codes under a different label.
    pub fn relabeled(&self, id: u8) -> Self {
        PhaseSequence {
            id,
            codes: self.codes.clone(),
        }
    }

    pub fn zero_count(&self) -> usize {
        self.codes.iter().filter(|c| c.0 == 0).count()
    }

    /// Equal numbers of zero and nonzero codes.
    pub fn is_balanced(&self) -> bool {
        self.zero_count() * 2 == self.len()
    }

    /// Slotwise sum modulo a full turn. Applying two modulations in turn is
    /// the same as applying their `add_mod4`.
    pub fn add_mod4(&self, other: &PhaseSequence) -> Result<PhaseSequence> {
        check_lengths(self, other)?;
        let codes = self
            .codes
            .iter()
            .zip(&other.codes)
            .map(|(a, b)| a.wrapping_add(*b))
            .collect();
        Ok(PhaseSequence { id: self.id, codes })
    }
}

const BUILTIN_ROWS: [[u8; 8]; 8] = [
    [0, 0, 0, 0, 0, 0, 0, 0],
    [1, 0, 0, 1, 0, 1, 1, 0],
    [1, 1, 0, 0, 1, 0, 1, 0],
    [1, 1, 1, 0, 0, 1, 0, 0],
    [0, 1, 1, 1, 0, 0, 1, 0],
    [1, 0, 1, 1, 1, 0, 0, 0],
    [0, 1, 0, 1, 1, 1, 0, 0],
    [0, 0, 1, 0, 1, 1, 1, 0],
];

/// Length of every built-in sequence.
pub const BUILTIN_LENGTH: usize = 8;

/// The built-in family λ⁽⁰⁾…λ⁽⁷⁾, ids 0 through 7.
pub fn builtin_table() -> Vec<PhaseSequence> {
    BUILTIN_ROWS
        .iter()
        .enumerate()
        .map(|(id, row)| PhaseSequence {
            id: id as u8,
            codes: row.iter().map(|&q| PhaseCode(q)).collect(),
        })
        .collect()
}

/// Looks a sequence up by id. The id one past the last member wraps to the
/// all-zero member, so in the built-in family λ⁽⁸⁾ is λ⁽⁰⁾ relabeled as 8.
pub fn resolve(family: &[PhaseSequence], id: u8) -> Result<PhaseSequence> {
    if let Some(s) = family.iter().find(|s| s.id == id) {
        return Ok(s.clone());
    }
    if usize::from(id) == family.len() {
        if let Some(zero) = family.iter().find(|s| s.id == 0) {
            return Ok(zero.relabeled(id));
        }
    }
    Err(Error::UnknownSequence(id))
}

fn check_lengths(a: &PhaseSequence, b: &PhaseSequence) -> Result<()> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    Ok(())
}

/// Number of slots on which two sequences carry the same code.
pub fn agreement_count(a: &PhaseSequence, b: &PhaseSequence) -> Result<usize> {
    check_lengths(a, b)?;
    Ok(a.codes.iter().zip(&b.codes).filter(|(x, y)| x == y).count())
}

/// Slotwise GF(2) addition. The result keeps `a`'s id; use
/// [`PhaseSequence::relabeled`] or [`find_codes`] to name it.
pub fn xor_compose(a: &PhaseSequence, b: &PhaseSequence) -> Result<PhaseSequence> {
    check_lengths(a, b)?;
    for s in [a, b] {
        if let Some(slot) = s.codes.iter().position(|c| !c.is_gf2()) {
            return Err(Error::NotGf2 { sequence: s.id, slot });
        }
    }
    let codes = a
        .codes
        .iter()
        .zip(&b.codes)
        .map(|(x, y)| PhaseCode(x.0 ^ y.0))
        .collect();
    Ok(PhaseSequence { id: a.id, codes })
}

/// The family member whose codes equal `codes`, if any.
pub fn find_codes<'a>(family: &'a [PhaseSequence], codes: &[PhaseCode]) -> Option<&'a PhaseSequence> {
    family.iter().find(|s| s.codes == codes)
}

/// Closed-form correlation `½ Σₖ [1 + cos 2(aₖ − bₖ)]` for unit amplitudes,
/// unit detector sensitivity and unit slot time.
///
/// The same-sequence value is `L` and, for the built-in family, any other
/// pair gives `L/2`: 8 versus 4.
pub fn analytic_correlation(a: &PhaseSequence, b: &PhaseSequence) -> Result<f64> {
    check_lengths(a, b)?;
    let sum: f64 = a
        .codes
        .iter()
        .zip(&b.codes)
        .map(|(x, y)| {
            // 2(aₖ − bₖ) is a whole number of half turns, so the cosine is ±1.
            let half_turns = (i16::from(x.0) - i16::from(y.0)).rem_euclid(2);
            1.0 + if half_turns == 0 { 1.0 } else { -1.0 }
        })
        .sum();
    Ok(sum / 2.0)
}

/// [`analytic_correlation`] in physical units: scales by `μ²A⁴τ`.
pub fn analytic_correlation_scaled(
    a: &PhaseSequence,
    b: &PhaseSequence,
    mu: f64,
    amplitude: f64,
    tau_slot: f64,
) -> Result<f64> {
    let a2 = amplitude * amplitude;
    Ok(analytic_correlation(a, b)? * mu * mu * a2 * a2 * tau_slot)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FamilyReport {
    pub ids: Vec<u8>,
    pub balanced: Vec<bool>,
    /// `pairwise_agreements[i][j]` = agreement count of members `i` and `j`.
    pub pairwise_agreements: Vec<Vec<usize>>,
    pub closed_under_xor: bool,
}

impl FamilyReport {
    /// Every member except all-zero ones is balanced.
    pub fn nonzero_balanced(&self, family: &[PhaseSequence]) -> bool {
        family
            .iter()
            .zip(&self.balanced)
            .all(|(s, &b)| b || s.zero_count() == s.len())
    }

    /// The common off-diagonal agreement count, if all pairs share one.
    pub fn uniform_cross_agreement(&self) -> Option<usize> {
        let mut value = None;
        for (i, row) in self.pairwise_agreements.iter().enumerate() {
            for (j, &a) in row.iter().enumerate() {
                if i == j {
                    continue;
                }
                match value {
                    None => value = Some(a),
                    Some(v) if v != a => return None,
                    _ => {}
                }
            }
        }
        value
    }

    pub fn all_passed(&self, family: &[PhaseSequence]) -> bool {
        self.nonzero_balanced(family)
            && self.closed_under_xor
            && (family.len() < 2 || self.uniform_cross_agreement().is_some())
    }
}

/// Checks balance, pairwise agreement and XOR closure over a family.
///
/// Families with unequal lengths or non-GF(2) codes report
/// `closed_under_xor = false`; agreement entries for mismatched pairs are 0.
pub fn verify_family(seqs: &[PhaseSequence]) -> FamilyReport {
    let balanced = seqs.iter().map(PhaseSequence::is_balanced).collect();
    let pairwise_agreements = seqs
        .iter()
        .map(|a| {
            seqs.iter()
                .map(|b| agreement_count(a, b).unwrap_or(0))
                .collect()
        })
        .collect();
    let closed_under_xor = !seqs.is_empty()
        && seqs.iter().all(|a| {
            seqs.iter().all(|b| match xor_compose(a, b) {
                Ok(c) => find_codes(seqs, &c.codes).is_some(),
                Err(_) => false,
            })
        });
    FamilyReport {
        ids: seqs.iter().map(PhaseSequence::id).collect(),
        balanced,
        pairwise_agreements,
        closed_under_xor,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;
    use core::f64::consts::PI;

    // Radian transcription of the published table; independent of BUILTIN_ROWS.
    const H: f64 = PI / 2.0;
    const PUBLISHED: [[f64; 8]; 7] = [
        [H, 0.0, 0.0, H, 0.0, H, H, 0.0],
        [H, H, 0.0, 0.0, H, 0.0, H, 0.0],
        [H, H, H, 0.0, 0.0, H, 0.0, 0.0],
        [0.0, H, H, H, 0.0, 0.0, H, 0.0],
        [H, 0.0, H, H, H, 0.0, 0.0, 0.0],
        [0.0, H, 0.0, H, H, H, 0.0, 0.0],
        [0.0, 0.0, H, 0.0, H, H, H, 0.0],
    ];

    #[test]
    fn table_matches_published_rows() {
        let t = builtin_table();
        assert_eq!(t.len(), 8);
        assert!(t[0].codes().iter().all(|c| c.radians() == 0.0));
        for (j, row) in PUBLISHED.iter().enumerate() {
            let s = &t[j + 1];
            assert_eq!(s.id() as usize, j + 1);
            let radians: Vec<f64> = s.codes().iter().map(|c| c.radians()).collect();
            assert_eq!(radians.as_slice(), row.as_slice(), "row {}", j + 1);
        }
    }

    #[test]
    fn agreement_examples() {
        let t = builtin_table();
        assert_eq!(agreement_count(&t[1], &t[1]).unwrap(), 8);
        assert_eq!(agreement_count(&t[1], &t[2]).unwrap(), 4);
        assert_eq!(agreement_count(&t[0], &t[5]).unwrap(), 4);
    }

    #[test]
    fn agreement_length_mismatch_names_both() {
        let a = PhaseSequence::from_quarter_turns(0, &[0, 1, 0]).unwrap();
        let b = PhaseSequence::from_quarter_turns(1, &[0, 1]).unwrap();
        let err = agreement_count(&a, &b).unwrap_err();
        assert_eq!(err, Error::LengthMismatch { left: 3, right: 2 });
        let msg = alloc::format!("{}", err);
        assert!(msg.contains('3') && msg.contains('2'));
    }

    #[test]
    fn xor_examples() {
        let t = builtin_table();
        assert_eq!(xor_compose(&t[1], &t[1]).unwrap().codes(), t[0].codes());
        assert_eq!(xor_compose(&t[0], &t[3]).unwrap().codes(), t[3].codes());
        assert_eq!(xor_compose(&t[1], &t[2]).unwrap().codes(), t[6].codes());
    }

    #[test]
    fn xor_rejects_gf4() {
        let a = PhaseSequence::from_quarter_turns(9, &[0, 2, 1]).unwrap();
        let b = PhaseSequence::from_quarter_turns(1, &[0, 0, 1]).unwrap();
        assert_eq!(
            xor_compose(&a, &b).unwrap_err(),
            Error::NotGf2 { sequence: 9, slot: 1 }
        );
    }

    #[test]
    fn invalid_code_rejected() {
        assert_eq!(PhaseCode::new(4).unwrap_err(), Error::InvalidCode(4));
    }

    #[test]
    fn builtin_family_report() {
        let t = builtin_table();
        let r = verify_family(&t);
        assert!(r.closed_under_xor);
        assert!(!r.balanced[0]);
        assert!(r.balanced[1..].iter().all(|&b| b));
        for i in 0..8 {
            assert_eq!(r.pairwise_agreements[i][i], 8);
            for j in 0..8 {
                assert_eq!(r.pairwise_agreements[i][j], r.pairwise_agreements[j][i]);
                if i != j {
                    assert_eq!(r.pairwise_agreements[i][j], 4);
                }
            }
        }
        assert_eq!(r.uniform_cross_agreement(), Some(4));
        assert!(r.all_passed(&t));
    }

    #[test]
    fn flipped_code_breaks_family() {
        let mut t = builtin_table();
        let mut codes = t[3].codes().to_vec();
        codes[0] = PhaseCode::ZERO;
        t[3] = PhaseSequence::new(3, codes);
        let r = verify_family(&t);
        assert!(!r.balanced[3]);
        assert!(!r.closed_under_xor);
        assert!(!r.all_passed(&t));
    }

    #[test]
    fn analytic_two_levels() {
        let t = builtin_table();
        assert_eq!(analytic_correlation(&t[1], &t[1]).unwrap(), 8.0);
        assert_eq!(analytic_correlation(&t[1], &t[5]).unwrap(), 4.0);
        assert_eq!(analytic_correlation(&t[0], &t[0]).unwrap(), 8.0);
    }

    #[test]
    fn analytic_matches_cosine_form() {
        // Direct evaluation with floating cosines as an independent route.
        let t = builtin_table();
        for a in &t {
            for b in &t {
                let direct: f64 = a
                    .codes()
                    .iter()
                    .zip(b.codes())
                    .map(|(x, y)| 1.0 + libm::cos(2.0 * (x.radians() - y.radians())))
                    .sum::<f64>()
                    / 2.0;
                let v = analytic_correlation(a, b).unwrap();
                assert!((v - direct).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn analytic_gf4_half_turn_counts_as_agreement() {
        let a = PhaseSequence::from_quarter_turns(0, &[0, 2, 1, 3]).unwrap();
        let b = PhaseSequence::from_quarter_turns(1, &[0, 0, 0, 0]).unwrap();
        // cos 2Δ: Δ = 0 → 1, π → 1, π/2 → −1, 3π/2 → −1
        assert_eq!(analytic_correlation(&a, &b).unwrap(), 2.0);
    }

    #[test]
    fn lambda8_aliases_zero() {
        let t = builtin_table();
        let l8 = resolve(&t, 8).unwrap();
        assert_eq!(l8.id(), 8);
        assert_eq!(l8.codes(), t[0].codes());
        assert_eq!(resolve(&t, 9).unwrap_err(), Error::UnknownSequence(9));
        for s in &t[1..] {
            assert_eq!(agreement_count(&l8, s).unwrap(), 4);
        }
    }

    #[test]
    fn phasor_is_exact() {
        for q in 0..4u8 {
            let p = PhaseCode::new(q).unwrap().phasor();
            let th = -f64::from(q) * H;
            assert!((p.re - libm::cos(th)).abs() < 1e-15);
            assert!((p.im - libm::sin(th)).abs() < 1e-15);
        }
    }

    #[test]
    fn add_mod4_wraps() {
        let a = PhaseSequence::from_quarter_turns(0, &[3, 2, 1]).unwrap();
        let b = PhaseSequence::from_quarter_turns(1, &[1, 3, 0]).unwrap();
        let c = a.add_mod4(&b).unwrap();
        let q: Vec<u8> = c.codes().iter().map(|c| c.quarter_turns()).collect();
        assert_eq!(q, vec![0, 1, 1]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn xor_commutative_associative(i in 0usize..8, j in 0usize..8, k in 0usize..8) {
                let t = builtin_table();
                let ij = xor_compose(&t[i], &t[j]).unwrap();
                let ji = xor_compose(&t[j], &t[i]).unwrap();
                prop_assert_eq!(ij.codes(), ji.codes());
                let left = xor_compose(&ij, &t[k]).unwrap();
                let jk = xor_compose(&t[j], &t[k]).unwrap();
                let right = xor_compose(&t[i], &jk).unwrap();
                prop_assert_eq!(left.codes(), right.codes());
            }

            #[test]
            fn correlation_increases_with_agreement(
                a in proptest::collection::vec(0u8..2, 8),
                b in proptest::collection::vec(0u8..2, 8),
                c in proptest::collection::vec(0u8..2, 8),
            ) {
                let a = PhaseSequence::from_quarter_turns(0, &a).unwrap();
                let b = PhaseSequence::from_quarter_turns(1, &b).unwrap();
                let c = PhaseSequence::from_quarter_turns(2, &c).unwrap();
                let (ab, ac) = (agreement_count(&a, &b).unwrap(), agreement_count(&a, &c).unwrap());
                let (cab, cac) = (analytic_correlation(&a, &b).unwrap(), analytic_correlation(&a, &c).unwrap());
                // For GF(2) codes the correlation equals the agreement count.
                prop_assert_eq!(cab, ab as f64);
                prop_assert_eq!(ab.cmp(&ac), cab.partial_cmp(&cac).unwrap());
            }
        }
    }
}
