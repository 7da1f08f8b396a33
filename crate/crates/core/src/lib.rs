//! Qutrit circuit and noisy tensor-network simulator for spin-1 chains.
//!
//! The crate is organized around a small circuit IR over three-level sites
//! ([`circuit::QuditCircuit`]) that every engine consumes:
//!
//! - [`statevector`] — exact dense amplitudes for small site counts,
//! - [`noise`] — Kraus channels for transmon qutrits and a matrix-product-operator
//!   density-matrix engine for noisy evolution at larger sizes,
//! - [`aklt`] — spin-1 AKLT Hamiltonians (open, periodic, locally twisted),
//!   an exact-diagonalization oracle, and the bond-dimension-2 ground-state MPS,
//! - [`compile`] — isometry-to-circuit synthesis over CNOT structures with
//!   single-site gates optimized by environment tensors,
//! - [`berry`] — ladder-ansatz state preparation with post-selection, the
//!   discretized Berry phase, and a generalized Hadamard test that tolerates
//!   post-selected inputs,
//! - [`readout`] — ternary outcome reconstruction from a binary discriminator.
//!
//! Everything is deterministic for a fixed seed; nothing here talks to hardware.

pub mod aklt;
pub mod berry;
pub mod circuit;
pub mod compile;
pub mod error;
pub mod experiments;
pub mod gates;
pub mod noise;
pub mod readout;
pub mod statevector;

pub use error::{Error, Result};

/// Shorthand used throughout: double-precision complex scalar.
pub type C64 = num_complex::Complex64;

/// 3^n, the Hilbert-space dimension of `n` qutrit sites.
pub fn dim(n_sites: usize) -> usize {
    3usize.pow(n_sites as u32)
}
