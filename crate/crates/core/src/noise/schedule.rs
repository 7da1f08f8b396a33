//! Layered gate schedule and superoperator promotion.
//!
//! Circuits are packed greedily into layers of wire-disjoint ops. A layer
//! lasts as long as its slowest member; every wire then accumulates one
//! thermal exposure of that duration, with the dynamical-decoupling
//! T2 adjustment applied only to wires idle in that layer. Layers made of
//! virtual gates have zero duration and contribute no noise.

use super::channels::{thermal_channel, NoiseChannel};
use super::params::NoiseParams;
use crate::circuit::{Op, QuditCircuit};
use crate::error::Result;
use crate::gates::Gate;
use crate::C64;
use nalgebra::DMatrix;

/// One layer of simultaneously applied ops.
#[derive(Debug, Clone)]
pub struct Layer {
    pub ops: Vec<Op>,
    pub duration_ns: f64,
    /// Wires touched by some op in this layer.
    pub active: Vec<bool>,
}

/// Greedy wire-disjoint packing preserving op order.
pub fn schedule_circuit(circuit: &QuditCircuit, np: &NoiseParams) -> Vec<Layer> {
    let n = circuit.n_sites;
    let mut layers: Vec<Layer> = Vec::new();
    let mut current = Layer { ops: vec![], duration_ns: 0.0, active: vec![false; n] };
    for op in &circuit.ops {
        let wires = op.wires();
        let clash = wires.iter().any(|&w| current.active[w]);
        if clash {
            layers.push(std::mem::replace(
                &mut current,
                Layer { ops: vec![], duration_ns: 0.0, active: vec![false; n] },
            ));
        }
        for &w in &wires {
            current.active[w] = true;
        }
        current.duration_ns = current.duration_ns.max(np.op_duration_ns(op));
        current.ops.push(op.clone());
    }
    if !current.ops.is_empty() {
        layers.push(current);
    }
    layers
}

/// Total wall-clock duration of the schedule (ns).
pub fn schedule_duration_ns(layers: &[Layer]) -> f64 {
    layers.iter().map(|l| l.duration_ns).sum()
}

/// Thermal channel for one wire of a layer.
pub fn layer_wire_channel(np: &NoiseParams, layer: &Layer, wire: usize) -> Result<NoiseChannel> {
    let idle = !layer.active[wire];
    let probs = np.probs(layer.duration_ns, idle);
    thermal_channel(&probs)
}

/// Superoperator of a gate followed by its own thermal exposure, as a matrix
/// on vectorized density operators (vec(ρ)[r·d + c] = ρ_{rc}):
/// Λ = (Σᵢ Kᵢ ⊗ Kᵢ*) · (V ⊗ V*), with the Kraus set built from the gate's
/// duration (per-wire thermal channels on both wires of an entangler).
pub fn promote_superop(gate: &Gate, np: &NoiseParams) -> Result<DMatrix<C64>> {
    let d = gate.matrix.nrows();
    let mut lam = unitary_superop(&gate.matrix);
    let duration = if gate.is_virtual {
        0.0
    } else if gate.arity >= 2 {
        np.gate_time_2q_ns
    } else {
        np.gate_time_1q_ns
    };
    let probs = np.probs(duration, false);
    if !probs.is_zero() {
        let site = thermal_channel(&probs)?;
        let kraus: Vec<DMatrix<C64>> = if gate.arity == 1 {
            site.kraus.iter().map(|k| DMatrix::from_fn(3, 3, |i, j| k[(i, j)])).collect()
        } else {
            let mut out = Vec::with_capacity(site.kraus.len() * site.kraus.len());
            for ka in &site.kraus {
                for kb in &site.kraus {
                    let mut m = DMatrix::<C64>::zeros(9, 9);
                    for i1 in 0..3 {
                        for j1 in 0..3 {
                            for i2 in 0..3 {
                                for j2 in 0..3 {
                                    m[(3 * i1 + i2, 3 * j1 + j2)] = ka[(i1, j1)] * kb[(i2, j2)];
                                }
                            }
                        }
                    }
                    out.push(m);
                }
            }
            out
        };
        let mut noise = DMatrix::<C64>::zeros(d * d, d * d);
        for k in &kraus {
            noise += kron_conj(k);
        }
        lam = noise * lam;
    }
    Ok(lam)
}

/// V ⊗ V* in the row-major pair index.
pub fn unitary_superop(v: &DMatrix<C64>) -> DMatrix<C64> {
    kron_conj(v)
}

fn kron_conj(k: &DMatrix<C64>) -> DMatrix<C64> {
    let d = k.nrows();
    let mut out = DMatrix::<C64>::zeros(d * d, d * d);
    for r1 in 0..d {
        for c1 in 0..d {
            for r2 in 0..d {
                for c2 in 0..d {
                    out[(r1 * d + r2, c1 * d + c2)] = k[(r1, c1)] * k[(r2, c2)].conj();
                }
            }
        }
    }
    out
}

/// 9×9 single-site channel superoperator Σ K ⊗ K*.
pub fn channel_superop(ch: &NoiseChannel) -> DMatrix<C64> {
    let mut out = DMatrix::<C64>::zeros(9, 9);
    for k in &ch.kraus {
        let kd = DMatrix::from_fn(3, 3, |i, j| k[(i, j)]);
        out += kron_conj(&kd);
    }
    out
}
