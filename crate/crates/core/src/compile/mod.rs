//! Isometry-to-circuit synthesis.
//!
//! Targets are specified by their action on a handful of input basis states
//! (multi-state preparation rather than full unitary compilation). The ansatz
//! is a sequence of CNOTs, each dressed with parametrized single-site gates;
//! structures are searched in order of CNOT count and the dressing gates are
//! optimized with environment-tensor updates (polar projection), falling back
//! to gradient descent when a sweep stalls. Accepted solutions are decomposed
//! to the pulse alphabet {RZ01, RZ12, √X01, √X12} (plus the entangler) and
//! re-verified phase-sensitively.

mod ansatz;
mod decompose;
mod search;
mod target;

pub use ansatz::{AnsatzStructure, DressedAnsatz};
pub use decompose::{decompose_single_site, decompose_to_circuit, PulseSeq};
pub use search::{compile_isometry, CompileOptions, CompiledIsometry};
pub use target::{ladder_v_target, GateSet, IsometryTarget};
