//! Linear optical components acting on [`OpticalField`]s.
//!
//! All components are complex-linear. The coupler, PBS, rotator, splitter and
//! combiner conserve energy (the combiner only on inputs it could have come
//! from a splitter); mode filters dissipate.

use alloc::vec::Vec;
use core::f64::consts::FRAC_1_SQRT_2;

use num_complex::Complex64;

use crate::field::{check_lengths, OpticalField};
use crate::{Error, Result};

/// Transfer matrix of the balanced coupler, `(1, i; i, 1)/√2`.
pub fn coupler_matrix() -> [[Complex64; 2]; 2] {
    let r = Complex64::new(FRAC_1_SQRT_2, 0.0);
    let t = Complex64::new(0.0, FRAC_1_SQRT_2);
    [[r, t], [t, r]]
}

/// 50/50 coupler: `out₁ = (a + i·b)/√2`, `out₂ = (i·a + b)/√2`, per slot and
/// mode.
pub fn coupler2(a: &OpticalField, b: &OpticalField) -> Result<(OpticalField, OpticalField)> {
    let m = coupler_matrix();
    let o1 = a.zip_map(b, |x, y| {
        [m[0][0] * x[0] + m[0][1] * y[0], m[0][0] * x[1] + m[0][1] * y[1]]
    })?;
    let o2 = b.zip_map(a, |y, x| {
        [m[1][0] * x[0] + m[1][1] * y[0], m[1][0] * x[1] + m[1][1] * y[1]]
    })?;
    Ok((o1, o2))
}

/// Polarization beam splitter: UP passes straight, RIGHT exchanges ports.
pub fn pbs(a: &OpticalField, b: &OpticalField) -> Result<(OpticalField, OpticalField)> {
    let o1 = a.zip_map(b, |x, y| [x[0], y[1]])?;
    let o2 = b.zip_map(a, |y, x| [y[0], x[1]])?;
    Ok((o1, o2))
}

/// `(cos θ, sin θ)` for an angle in degrees, exact at multiples of 45°.
pub fn cos_sin_deg(angle_deg: f64) -> (f64, f64) {
    let mut r = libm::fmod(angle_deg, 360.0);
    if r < 0.0 {
        r += 360.0;
    }
    let eighths = r / 45.0;
    if eighths == libm::round(eighths) {
        const S: f64 = FRAC_1_SQRT_2;
        return match eighths as u32 % 8 {
            0 => (1.0, 0.0),
            1 => (S, S),
            2 => (0.0, 1.0),
            3 => (-S, S),
            4 => (-1.0, 0.0),
            5 => (-S, -S),
            6 => (0.0, -1.0),
            _ => (S, -S),
        };
    }
    let th = r.to_radians();
    (libm::cos(th), libm::sin(th))
}

/// Polarization rotator: `(UP', RIGHT') = (cos θ·UP − sin θ·RIGHT,
/// sin θ·UP + cos θ·RIGHT)`. 45° takes pure UP to `(UP + RIGHT)/√2`.
pub fn rotator(f: &OpticalField, angle_deg: f64) -> OpticalField {
    let (c, s) = cos_sin_deg(angle_deg);
    f.map(|p| [p[0] * c - p[1] * s, p[0] * s + p[1] * c])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ModeFilter {
    All,
    UpOnly,
    RightOnly,
}

impl ModeFilter {
    pub fn as_str(self) -> &'static str {
        match self {
            ModeFilter::All => "all",
            ModeFilter::UpOnly => "up",
            ModeFilter::RightOnly => "right",
        }
    }

    pub fn parse(s: &str) -> Option<ModeFilter> {
        match s {
            "all" => Some(ModeFilter::All),
            "up" => Some(ModeFilter::UpOnly),
            "right" => Some(ModeFilter::RightOnly),
            _ => None,
        }
    }
}

pub fn mode_filter(f: &OpticalField, pass: ModeFilter) -> OpticalField {
    let zero = Complex64::new(0.0, 0.0);
    match pass {
        ModeFilter::All => f.clone(),
        ModeFilter::UpOnly => f.map(|p| [p[0], zero]),
        ModeFilter::RightOnly => f.map(|p| [zero, p[1]]),
    }
}

/// Equal `n`-way split; each output is `f/√n`.
pub fn splitter(f: &OpticalField, n: usize) -> Result<Vec<OpticalField>> {
    if n < 2 {
        return Err(Error::InvalidParameter {
            name: "n",
            value: n as f64,
        });
    }
    let k = 1.0 / libm::sqrt(n as f64);
    let out = f.map(|p| [p[0] * k, p[1] * k]);
    Ok(alloc::vec![out; n])
}

/// Adjoint of [`splitter`]: `Σ inputs / √n`. Keeps the first input's label.
pub fn combine(inputs: &[&OpticalField]) -> Result<OpticalField> {
    let n = inputs.len();
    if n < 2 {
        return Err(Error::InvalidParameter {
            name: "n",
            value: n as f64,
        });
    }
    let first = inputs[0];
    for other in &inputs[1..] {
        check_lengths(first, other)?;
    }
    let k = 1.0 / libm::sqrt(n as f64);
    let mut slots: Vec<[Complex64; 2]> = first.slots().to_vec();
    for other in &inputs[1..] {
        for (acc, p) in slots.iter_mut().zip(other.slots()) {
            acc[0] += p[0];
            acc[1] += p[1];
        }
    }
    for s in &mut slots {
        s[0] *= k;
        s[1] *= k;
    }
    OpticalField::from_slots(first.label(), slots)
}
