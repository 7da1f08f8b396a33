//! Bond-dimension-2 matrix product form of the AKLT ground states.
//!
//! Site tensors (identical on every site):
//!
//! ```text
//! A[0] = −√(2/3) τ⁻,   A[1] = −√(1/3) τᶻ,   A[2] = √(2/3) τ⁺
//! ```
//!
//! with τ± the ladder halves ((τˣ ± iτʸ)/2, unit entries) and τᶻ = diag(1, −1).
//! Open chains contract against boundary vectors b_l, b_r; periodic chains
//! close with a trace. The four (b_l, b_r) ∈ {e₀, e₁}² choices span the
//! degenerate open-boundary ground space.

use crate::error::{Error, Result};
use crate::statevector::StateVector;
use crate::{dim, C64};
use nalgebra::{Matrix2, Vector2};

/// Boundary handling of the tensor train.
#[derive(Debug, Clone, PartialEq)]
pub enum Closure {
    Obc { left: Vector2<C64>, right: Vector2<C64> },
    Pbc,
}

impl Closure {
    /// Open boundary with basis boundary vectors e_l, e_r (l, r ∈ {0, 1}).
    pub fn obc_basis(l: usize, r: usize) -> Self {
        let e = |k: usize| {
            let mut v = Vector2::new(C64::new(0., 0.), C64::new(0., 0.));
            v[k] = C64::new(1., 0.);
            v
        };
        Closure::Obc { left: e(l), right: e(r) }
    }
}

/// Tensor train with one 2×2 matrix per physical level and a closure.
#[derive(Debug, Clone)]
pub struct MpsState {
    pub n: usize,
    pub tensors: [Matrix2<C64>; 3],
    pub closure: Closure,
}

/// The AKLT tensors shared by every site.
pub fn aklt_tensors() -> [Matrix2<C64>; 3] {
    let z = C64::new(0., 0.);
    let s23 = (2f64 / 3f64).sqrt();
    let s13 = (1f64 / 3f64).sqrt();
    let a0 = Matrix2::new(z, z, C64::new(-s23, 0.), z); // −√(2/3) τ⁻
    let a1 = Matrix2::new(C64::new(-s13, 0.), z, z, C64::new(s13, 0.)); // −√(1/3) τᶻ
    let a2 = Matrix2::new(z, C64::new(s23, 0.), z, z); // √(2/3) τ⁺
    [a0, a1, a2]
}

/// AKLT ground-state MPS of length `n` with the requested closure.
pub fn aklt_mps(n: usize, closure: Closure) -> Result<MpsState> {
    if n < 2 {
        return Err(Error::BadSpec("MPS length must be at least 2".into()));
    }
    Ok(MpsState { n, tensors: aklt_tensors(), closure })
}

/// Contract the tensor train into a normalized dense statevector.
///
/// Amplitude of ∣σ₁…σₙ⟩ is b_lᵀ A[σ₁]…A[σₙ] b_r (open) or
/// Tr A[σ₁]…A[σₙ] (periodic), normalized at the end.
pub fn mps_to_statevector(m: &MpsState) -> Result<StateVector> {
    let d = dim(m.n);
    let mut amps = vec![C64::new(0., 0.); d];
    let mut digits = vec![0usize; m.n];
    for (idx, amp) in amps.iter_mut().enumerate() {
        let mut rem = idx;
        for k in (0..m.n).rev() {
            digits[k] = rem % 3;
            rem /= 3;
        }
        let mut prod = Matrix2::<C64>::identity();
        for &s in &digits {
            prod *= m.tensors[s];
        }
        *amp = match &m.closure {
            Closure::Pbc => prod.trace(),
            Closure::Obc { left, right } => (left.transpose() * prod * right)[(0, 0)],
        };
    }
    StateVector::from_amplitudes_normalized(m.n, amps).map_err(|e| match e {
        Error::ZeroNorm => Error::ZeroNorm,
        other => other,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aklt::{energy_expectation, ground_state_ed, low_spectrum, Boundary, HamiltonianSpec};
    use crate::statevector::basis_index;

    #[test]
    fn pbc_n2_component_ratios() {
        // Tr[A[σ]A[σ']] gives −2/3, +2/3, −2/3 on 02, 11, 20
        let m = aklt_mps(2, Closure::Pbc).unwrap();
        let sv = mps_to_statevector(&m).unwrap();
        let amp = sv.amplitudes();
        let s = 1.0 / 3f64.sqrt();
        assert!((amp[basis_index(&[0, 2])].norm() - s).abs() < 1e-12);
        assert!((amp[basis_index(&[1, 1])].norm() - s).abs() < 1e-12);
        assert!((amp[basis_index(&[2, 0])].norm() - s).abs() < 1e-12);
        let a02 = amp[basis_index(&[0, 2])];
        let a11 = amp[basis_index(&[1, 1])];
        assert!((a02 + a11).norm() < 1e-12);
    }

    #[test]
    fn pbc_n3_all_zero_string_vanishes() {
        // τ⁻ is nilpotent, so Tr (A[0])³ = 0
        let m = aklt_mps(3, Closure::Pbc).unwrap();
        let sv = mps_to_statevector(&m).unwrap();
        assert!(sv.amplitudes()[0].norm() < 1e-14);
    }

    #[test]
    fn pbc_matches_ed_ground_state() {
        for n in 2..=6usize {
            let eps = if n == 2 { 1e-3 } else { 0.0 };
            let spec = HamiltonianSpec::new(n, Boundary::Pbc).with_epsilon(eps);
            let gs = ground_state_ed(&spec).unwrap();
            let m = aklt_mps(n, Closure::Pbc).unwrap();
            let sv = mps_to_statevector(&m).unwrap();
            let ov = gs.state.inner(&sv).norm();
            assert!(ov >= 1.0 - 1e-10, "n={n} overlap={ov}");
        }
    }

    #[test]
    fn obc_boundary_choices_are_independent_ground_states() {
        let n = 2;
        let spec = HamiltonianSpec::new(n, Boundary::Obc);
        let (evals, _) = low_spectrum(&spec, 2).unwrap();
        let e0 = evals[0];
        let mut states = Vec::new();
        for l in 0..2 {
            for r in 0..2 {
                let m = aklt_mps(n, Closure::obc_basis(l, r)).unwrap();
                let sv = mps_to_statevector(&m).unwrap();
                let e = energy_expectation(&spec, &sv).unwrap();
                assert!((e - e0).abs() < 1e-10, "(l,r)=({l},{r})");
                states.push(sv);
            }
        }
        // linear independence via the Gram matrix
        let k = states.len();
        let mut gram = nalgebra::DMatrix::<C64>::zeros(k, k);
        for i in 0..k {
            for j in 0..k {
                gram[(i, j)] = states[i].inner(&states[j]);
            }
        }
        let det = gram.determinant().norm();
        assert!(det > 1e-6, "Gram determinant {det}");
    }

    #[test]
    fn obc_n2_single_boundary_state() {
        // b_l = b_r = e0: amplitudes ∝ (A[σ₁]A[σ₂])₀₀ → (1/√5)(∣11⟩ − 2∣20⟩)
        let m = aklt_mps(2, Closure::obc_basis(0, 0)).unwrap();
        let sv = mps_to_statevector(&m).unwrap();
        let amp = sv.amplitudes();
        let r5 = 5f64.sqrt();
        assert!((amp[basis_index(&[1, 1])].norm() - 1.0 / r5).abs() < 1e-12);
        assert!((amp[basis_index(&[2, 0])].norm() - 2.0 / r5).abs() < 1e-12);
        let ratio = amp[basis_index(&[2, 0])] / amp[basis_index(&[1, 1])];
        assert!((ratio - C64::new(-2.0, 0.)).norm() < 1e-12);
    }

    #[test]
    fn short_chain_rejected() {
        assert!(aklt_mps(1, Closure::Pbc).is_err());
    }
}
