//! Ladder-ansatz state preparation, the discretized Berry phase, and the
//! post-selection-compatible Hadamard test.

mod hadamard;
mod ladder;
mod phase;

pub use hadamard::{
    hadamard_circuit, hadamard_overlap, hadamard_overlap_noisy, normalized_overlap,
    HadamardLayout, OverlapEstimate, ShotSampling,
};
pub use ladder::{
    branch_f2, branch_probabilities, branch_projectors, branch_target_mps, exact_v_block,
    exact_v_unitary, ladder_prep_circuit, obc_ladder_circuit, obc_target_mps, postselected_f2,
    prepare_noiseless, target_mps, Encoding, LadderPrep, PreparedState,
};
pub use phase::{
    accumulate_phase, berry_phase_exact, berry_phase_ladder, ed_node_states, gauge_fix,
    ladder_node_states, wrap_phase, BerryRun,
};

use crate::circuit::QuditCircuit;
use crate::error::Result;
use crate::noise::NoiseParams;

/// Berry phase with every overlap estimated by the generalized Hadamard test
/// under the given noise model (exact probabilities unless `shots` is set).
///
/// Reported link magnitudes are those of the raw (unnormalized) post-selected
/// overlaps.
pub fn berry_phase_hadamard(
    n: usize,
    n_partitions: usize,
    encoding: Encoding,
    v_block: &QuditCircuit,
    np: &NoiseParams,
    max_bond: usize,
    trunc_tol: f64,
    shots: Option<ShotSampling>,
) -> Result<BerryRun> {
    let preps: Vec<LadderPrep> = (0..n_partitions)
        .map(|j| {
            let theta = std::f64::consts::TAU * j as f64 / n_partitions as f64;
            ladder_prep_circuit(n, theta, encoding, v_block)
        })
        .collect::<Result<_>>()?;
    let mut partial_sums = Vec::with_capacity(n_partitions);
    let mut mags = Vec::with_capacity(n_partitions);
    let mut acc = 0.0f64;
    for j in 0..n_partitions {
        let prep_psi = &preps[j];
        let prep_phi = &preps[(j + 1) % n_partitions];
        let est = if np.noise_rate == 0.0 {
            hadamard_overlap(prep_phi, prep_psi)?
        } else {
            let shot_j = shots.map(|s| ShotSampling { shots: s.shots, seed: s.seed.wrapping_add(j as u64) });
            hadamard_overlap_noisy(prep_phi, prep_psi, np, max_bond, trunc_tol, shot_j)?
        };
        if est.raw.norm() < 1e-12 {
            return Err(crate::Error::IllConditionedOverlap { link: j, magnitude: est.raw.norm() });
        }
        acc -= est.raw.arg();
        partial_sums.push(acc);
        mags.push(est.raw.norm());
    }
    let gamma = wrap_phase(acc);
    let dq = {
        let d0 = gamma.abs();
        let dpi = (gamma.abs() - std::f64::consts::PI).abs();
        d0.min(dpi)
    };
    Ok(BerryRun {
        n,
        n_partitions,
        encoding: match encoding {
            Encoding::Qutrit => "qutrit".into(),
            Encoding::Qubit => "qubit".into(),
        },
        noise_rate: np.noise_rate,
        partial_sums,
        gamma,
        quantization_distance: dq,
        link_overlap_magnitudes: mags,
    })
}
