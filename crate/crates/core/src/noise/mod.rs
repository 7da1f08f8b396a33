//! Transmon-qutrit noise model and noisy circuit evolution.
//!
//! The model composes amplitude damping and dephasing per thermal exposure,
//! with exposure durations set by a layered gate schedule. Two engines share
//! those semantics: a matrix-product-operator engine for real runs and a
//! dense density-matrix oracle for cross-checks at small size.
//!
//! Qubit-encoded circuits need no special-cased channels: states confined to
//! the 0–1 manifold never populate level 2, on which the 1–2 channel factors
//! act trivially, so the same thermal channel restricts itself.

mod channels;
mod dense;
mod fidelity;
mod mpo;
mod params;
mod schedule;

pub use channels::{
    amp_damp_channel, dephasing_channel, t2_echo_probability, t2_echo_simulated, thermal_channel,
    NoiseChannel,
};
pub use dense::{embed_sites, run_noisy_dense, DenseDensity};
pub use fidelity::{
    fidelities_dense, fidelity_per_site, hellinger_fidelity, quantum_fidelity, two_norm_fidelity,
    Fidelities,
};
pub use mpo::{
    permute_matrix_digits, run_noisy, DensityMPO, RoutedRun, SimpleMps, SiteTensor,
    DEFAULT_MAX_BOND, DEFAULT_TRUNC_TOL,
};
pub use params::{ChannelProbs, NoiseParams};
pub use schedule::{
    channel_superop, layer_wire_channel, promote_superop, schedule_circuit, schedule_duration_ns,
    unitary_superop, Layer,
};
