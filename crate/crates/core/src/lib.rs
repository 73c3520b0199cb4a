//! Simulation core for classical optical fields tagged with pseudorandom
//! phase sequences.
//!
//! Fields are carried as baseband phasors: one complex amplitude per
//! sequence slot for each of two orthogonal polarization modes. The optical
//! carrier is common to every field derived from one source and never
//! appears at runtime.
//!
//! The pipeline is:
//!
//! 1. [`sequence`] — the 8-slot GF(2) phase-sequence family and its
//!    algebraic checks.
//! 2. [`field`] and [`optics`] — field construction and linear optical
//!    components; [`network`] wires components into an evaluable DAG.
//! 3. [`detection`] — balanced coherent detection and correlation scans.
//! 4. [`analysis`] — M-matrix extraction, distinct-sequence reconstruction
//!    and period extraction.
//! 5. [`scenario`] — the product, GHZ, W and Shor-15 multi-field states.
//!
//! The crate is `no_std` and needs only `alloc`.

#![no_std]
#![deny(unsafe_code)]

extern crate alloc;

#[cfg(test)]
extern crate std;

pub mod analysis;
pub mod detection;
mod error;
pub mod field;
pub mod network;
pub mod optics;
pub mod scenario;
pub mod sequence;

pub use error::{Error, Result};

pub use num_complex::Complex64;
