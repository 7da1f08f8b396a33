//! Dense density-matrix evolution — the small-system oracle for the MPO
//! engine. Same layer semantics, naive 3^n × 3^n algebra.

use super::channels::NoiseChannel;
use super::params::NoiseParams;
use super::schedule::{layer_wire_channel, schedule_circuit};
use crate::circuit::{Op, QuditCircuit};
use crate::error::Result;
use crate::statevector::controlled_matrix;
use crate::{dim, C64};
use nalgebra::DMatrix;

#[derive(Debug, Clone)]
pub struct DenseDensity {
    pub n_sites: usize,
    pub rho: DMatrix<C64>,
}

impl DenseDensity {
    pub fn zero(n_sites: usize) -> Self {
        let d = dim(n_sites);
        let mut rho = DMatrix::<C64>::zeros(d, d);
        rho[(0, 0)] = C64::new(1., 0.);
        DenseDensity { n_sites, rho }
    }

    pub fn trace(&self) -> f64 {
        (0..self.rho.nrows()).map(|i| self.rho[(i, i)].re).sum()
    }

    pub fn purity(&self) -> f64 {
        (&self.rho * &self.rho).trace().re
    }

    /// Embed a k-site operator into the full register.
    pub fn embed_operator(&self, m: &DMatrix<C64>, sites: &[usize]) -> DMatrix<C64> {
        embed_sites(m, sites, self.n_sites)
    }

    pub fn apply_unitary(&mut self, m: &DMatrix<C64>, sites: &[usize]) {
        let f = self.embed_operator(m, sites);
        self.rho = &f * &self.rho * f.adjoint();
    }

    pub fn apply_op(&mut self, op: &Op) {
        if op.controls.is_empty() {
            self.apply_unitary(&op.gate.matrix, &op.sites);
        } else {
            let m = controlled_matrix(&op.gate.matrix, op.controls.len());
            self.apply_unitary(&m, &op.wires());
        }
    }

    pub fn apply_channel(&mut self, ch: &NoiseChannel, site: usize) {
        let mut out = DMatrix::<C64>::zeros(self.rho.nrows(), self.rho.ncols());
        for k in &ch.kraus {
            let kd = DMatrix::from_fn(3, 3, |i, j| k[(i, j)]);
            let kf = self.embed_operator(&kd, &[site]);
            out += &kf * &self.rho * kf.adjoint();
        }
        self.rho = out;
    }

    /// Diagonal of ρ in the computational basis.
    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.rho.nrows()).map(|i| self.rho[(i, i)].re).collect()
    }

    /// tr(ρ · O₁⊗…⊗Oₙ) for per-site 3×3 operators.
    pub fn expectation_product(&self, ops: &[DMatrix<C64>]) -> C64 {
        let mut full = DMatrix::<C64>::identity(1, 1);
        for o in ops {
            full = kron(&full, o);
        }
        (&self.rho * full).trace()
    }
}

fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    let (ar, ac) = (a.nrows(), a.ncols());
    let (br, bc) = (b.nrows(), b.ncols());
    let mut out = DMatrix::<C64>::zeros(ar * br, ac * bc);
    for i in 0..ar {
        for j in 0..ac {
            for k in 0..br {
                for l in 0..bc {
                    out[(i * br + k, j * bc + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    out
}

/// Full-register embedding of a k-site operator (sites in the matrix's
/// digit order, most significant first).
pub fn embed_sites(m: &DMatrix<C64>, sites: &[usize], n: usize) -> DMatrix<C64> {
    let d = dim(n);
    let k = sites.len();
    let dk = 3usize.pow(k as u32);
    assert_eq!(m.nrows(), dk);
    let strides: Vec<usize> = sites.iter().map(|&s| 3usize.pow((n - 1 - s) as u32)).collect();
    let rest: Vec<usize> = (0..n).filter(|s| !sites.contains(s)).collect();
    let rest_strides: Vec<usize> = rest.iter().map(|&s| 3usize.pow((n - 1 - s) as u32)).collect();
    let mut offsets = vec![0usize; dk];
    for idx in 0..dk {
        let mut rem = idx;
        let mut off = 0;
        for j in (0..k).rev() {
            off += (rem % 3) * strides[j];
            rem /= 3;
        }
        offsets[idx] = off;
    }
    let mut out = DMatrix::<C64>::zeros(d, d);
    let n_rest = dim(rest.len());
    for r in 0..n_rest {
        let mut base = 0usize;
        let mut rem = r;
        for j in (0..rest.len()).rev() {
            base += (rem % 3) * rest_strides[j];
            rem /= 3;
        }
        for a in 0..dk {
            for b in 0..dk {
                out[(base + offsets[a], base + offsets[b])] = m[(a, b)];
            }
        }
    }
    out
}

/// Dense noisy evolution with the layered schedule (oracle path, n ≤ 5).
pub fn run_noisy_dense(circuit: &QuditCircuit, np: &NoiseParams) -> Result<DenseDensity> {
    np.validate()?;
    let mut state = DenseDensity::zero(circuit.n_sites);
    let layers = schedule_circuit(circuit, np);
    for layer in &layers {
        for op in &layer.ops {
            state.apply_op(op);
        }
        if layer.duration_ns > 0.0 && np.noise_rate > 0.0 {
            for w in 0..circuit.n_sites {
                let ch = layer_wire_channel(np, layer, w)?;
                state.apply_channel(&ch, w);
            }
        }
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::Gate;

    #[test]
    fn noiseless_run_matches_statevector() {
        let mut c = QuditCircuit::new(2);
        c.push(Gate::h01(), &[0]).unwrap();
        c.push(Gate::cnot(), &[0, 1]).unwrap();
        c.push(Gate::x12(), &[1]).unwrap();
        let rho = run_noisy_dense(&c, &NoiseParams::noiseless()).unwrap();
        let sv = crate::statevector::run_from_zero(&c).unwrap();
        for i in 0..9 {
            for j in 0..9 {
                let want = sv.amplitudes()[i] * sv.amplitudes()[j].conj();
                assert!((rho.rho[(i, j)] - want).norm() < 1e-13);
            }
        }
    }

    #[test]
    fn trace_preserved_under_noise() {
        let mut c = QuditCircuit::new(2);
        c.push(Gate::h01(), &[0]).unwrap();
        c.push(Gate::cnot(), &[0, 1]).unwrap();
        c.push(Gate::x12(), &[0]).unwrap();
        c.push(Gate::cnot(), &[1, 0]).unwrap();
        let rho = run_noisy_dense(&c, &NoiseParams::device()).unwrap();
        assert!((rho.trace() - 1.0).abs() < 1e-10);
        assert!(rho.purity() < 1.0);
    }
}
