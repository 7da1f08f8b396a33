//! Spin-1 AKLT chains: Hamiltonians, exact diagonalization, and the
//! bond-dimension-2 matrix product form of the ground states.
//!
//! Basis convention: qutrit levels map to spin projections as
//! ∣0⟩ ↔ m = +1, ∣1⟩ ↔ m = 0, ∣2⟩ ↔ m = −1, so MPS physical indices and
//! circuit site labels coincide.

mod ed;
mod hamiltonian;
mod mps;
mod spin;

pub use ed::{energy_expectation, ground_state_ed, low_spectrum, GroundState, DEGENERACY_GAP};
pub use hamiltonian::{build_hamiltonian, bond_terms, apply_hamiltonian, BondTerm, Boundary, HamiltonianSpec};
pub use mps::{aklt_mps, mps_to_statevector, Closure, MpsState};
pub use spin::Spin1Ops;
