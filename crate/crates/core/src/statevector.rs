//! Exact dense statevector engine for small numbers of qutrits.
//!
//! Amplitudes are stored over the 3^n computational basis with site 0 most
//! significant, i.e. the basis state ∣σ₁σ₂…σₙ⟩ lives at index
//! Σ σ_k · 3^(n−k). Intended for n ≲ 12; larger systems belong to the MPO
//! engine.

use crate::circuit::{Op, QuditCircuit};
use crate::error::{Error, Result};
use crate::gates::Gate;
use crate::{dim, C64};
use nalgebra::DMatrix;

pub const NORM_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    n_sites: usize,
    amps: Vec<C64>,
}

impl StateVector {
    /// ∣0…0⟩ on `n_sites` qutrits.
    pub fn zero(n_sites: usize) -> Self {
        let mut amps = vec![C64::new(0., 0.); dim(n_sites)];
        amps[0] = C64::new(1., 0.);
        StateVector { n_sites, amps }
    }

    /// Basis state from ternary digits (site 0 first).
    pub fn basis(digits: &[usize]) -> Self {
        let mut idx = 0usize;
        for &d in digits {
            assert!(d < 3);
            idx = idx * 3 + d;
        }
        let mut amps = vec![C64::new(0., 0.); dim(digits.len())];
        amps[idx] = C64::new(1., 0.);
        StateVector { n_sites: digits.len(), amps }
    }

    /// Wrap raw amplitudes; must have length 3^n and unit norm within 1e-10.
    pub fn from_amplitudes(n_sites: usize, amps: Vec<C64>) -> Result<Self> {
        if amps.len() != dim(n_sites) {
            return Err(Error::BadSpec(format!("expected {} amplitudes, got {}", dim(n_sites), amps.len())));
        }
        let state = StateVector { n_sites, amps };
        let dev = (state.norm() - 1.0).abs();
        if dev > NORM_TOL {
            return Err(Error::NotNormalized { dev });
        }
        Ok(state)
    }

    /// Wrap and normalize raw amplitudes.
    pub fn from_amplitudes_normalized(n_sites: usize, mut amps: Vec<C64>) -> Result<Self> {
        if amps.len() != dim(n_sites) {
            return Err(Error::BadSpec(format!("expected {} amplitudes, got {}", dim(n_sites), amps.len())));
        }
        let norm = amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt();
        if norm <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        for a in amps.iter_mut() {
            *a /= norm;
        }
        Ok(StateVector { n_sites, amps })
    }

    pub fn n_sites(&self) -> usize {
        self.n_sites
    }

    pub fn amplitudes(&self) -> &[C64] {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.iter().map(|a| a.norm_sqr()).sum::<f64>().sqrt()
    }

    /// ⟨self∣other⟩.
    pub fn inner(&self, other: &StateVector) -> C64 {
        assert_eq!(self.n_sites, other.n_sites);
        self.amps.iter().zip(&other.amps).map(|(a, b)| a.conj() * b).sum()
    }

    /// Entrywise ∣amplitude∣²; sums to 1 for a normalized state.
    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Apply a gate to the named sites (most significant site first).
    pub fn apply_gate(&mut self, gate: &Gate, sites: &[usize]) -> Result<()> {
        if gate.arity != sites.len() {
            return Err(Error::ArityMismatch { arity: gate.arity, got: sites.len() });
        }
        self.apply_matrix(&gate.matrix, sites)
    }

    /// Apply an arbitrary d^k × d^k unitary to `k` distinct sites.
    pub fn apply_matrix(&mut self, matrix: &DMatrix<C64>, sites: &[usize]) -> Result<()> {
        let k = sites.len();
        let dk = 3usize.pow(k as u32);
        if matrix.nrows() != dk || matrix.ncols() != dk {
            return Err(Error::ArityMismatch { arity: k, got: matrix.nrows() });
        }
        for (i, &s) in sites.iter().enumerate() {
            if s >= self.n_sites {
                return Err(Error::SiteOutOfRange { site: s, n_sites: self.n_sites });
            }
            if sites[..i].contains(&s) {
                return Err(Error::RepeatedSite { site: s });
            }
        }
        // strides: site s carries weight 3^(n-1-s)
        let strides: Vec<usize> = sites.iter().map(|&s| 3usize.pow((self.n_sites - 1 - s) as u32)).collect();
        let mut offsets = vec![0usize; dk];
        for m in 0..dk {
            let mut rem = m;
            let mut off = 0;
            for j in (0..k).rev() {
                off += (rem % 3) * strides[j];
                rem /= 3;
            }
            offsets[m] = off;
        }
        let rest: Vec<usize> = (0..self.n_sites).filter(|s| !sites.contains(s)).collect();
        let rest_strides: Vec<usize> = rest.iter().map(|&s| 3usize.pow((self.n_sites - 1 - s) as u32)).collect();
        let n_rest = dim(rest.len());
        let mut gathered = vec![C64::new(0., 0.); dk];
        for r in 0..n_rest {
            let mut base = 0usize;
            let mut rem = r;
            for j in (0..rest.len()).rev() {
                base += (rem % 3) * rest_strides[j];
                rem /= 3;
            }
            for m in 0..dk {
                gathered[m] = self.amps[base + offsets[m]];
            }
            for row in 0..dk {
                let mut acc = C64::new(0., 0.);
                for col in 0..dk {
                    acc += matrix[(row, col)] * gathered[col];
                }
                self.amps[base + offsets[row]] = acc;
            }
        }
        Ok(())
    }

    /// Apply one circuit op, expanding controls into a block unitary.
    pub fn apply_op(&mut self, op: &Op) -> Result<()> {
        if op.controls.is_empty() {
            self.apply_gate(&op.gate, &op.sites)
        } else {
            let m = controlled_matrix(&op.gate.matrix, op.controls.len());
            self.apply_matrix(&m, &op.wires())
        }
    }

    /// Run a circuit in order. Measurement records are ignored here; use the
    /// post-selection helpers to extract branches.
    pub fn run_circuit(&mut self, circuit: &QuditCircuit) -> Result<()> {
        if circuit.n_sites > self.n_sites {
            return Err(Error::SiteOutOfRange { site: circuit.n_sites - 1, n_sites: self.n_sites });
        }
        for op in &circuit.ops {
            self.apply_op(op)?;
        }
        Ok(())
    }

    /// Marginal probability that the listed sites read the given outcomes.
    pub fn outcome_probability(&self, sites: &[usize], outcomes: &[usize]) -> f64 {
        assert_eq!(sites.len(), outcomes.len());
        let mut p = 0.0;
        for (idx, a) in self.amps.iter().enumerate() {
            if sites.iter().zip(outcomes).all(|(&s, &o)| self.digit(idx, s) == o) {
                p += a.norm_sqr();
            }
        }
        p
    }

    /// Unnormalized branch ⟨outcomes∣ψ⟩ on the remaining sites.
    pub fn project(&self, sites: &[usize], outcomes: &[usize]) -> StateVector {
        assert_eq!(sites.len(), outcomes.len());
        let rest: Vec<usize> = (0..self.n_sites).filter(|s| !sites.contains(s)).collect();
        let mut amps = vec![C64::new(0., 0.); dim(rest.len())];
        for (idx, a) in self.amps.iter().enumerate() {
            if sites.iter().zip(outcomes).all(|(&s, &o)| self.digit(idx, s) == o) {
                let mut out = 0usize;
                for &r in &rest {
                    out = out * 3 + self.digit(idx, r);
                }
                amps[out] = *a;
            }
        }
        StateVector { n_sites: rest.len(), amps }
    }

    /// Rotate the global phase so the largest-magnitude amplitude is
    /// real-positive (ties broken by lowest index).
    pub fn fix_phase(&mut self) {
        let mut best = 0usize;
        let mut mag = -1.0f64;
        for (i, a) in self.amps.iter().enumerate() {
            let m = a.norm();
            if m > mag + 1e-15 {
                mag = m;
                best = i;
            }
        }
        if mag <= 0.0 {
            return;
        }
        let phase = self.amps[best] / C64::new(mag, 0.);
        let rot = phase.conj();
        for a in self.amps.iter_mut() {
            *a *= rot;
        }
    }

    pub fn scale(&mut self, z: C64) {
        for a in self.amps.iter_mut() {
            *a *= z;
        }
    }

    fn digit(&self, idx: usize, site: usize) -> usize {
        (idx / 3usize.pow((self.n_sites - 1 - site) as u32)) % 3
    }
}

/// Basis index of the ternary string `digits` (site 0 first).
pub fn basis_index(digits: &[usize]) -> usize {
    digits.iter().fold(0, |acc, &d| acc * 3 + d)
}

/// Block unitary ∣1…1⟩⟨1…1∣ ⊗ U + (rest) ⊗ I for qutrit controls on ∣1⟩.
pub fn controlled_matrix(u: &DMatrix<C64>, n_controls: usize) -> DMatrix<C64> {
    let du = u.nrows();
    let dc = 3usize.pow(n_controls as u32);
    let mut m = DMatrix::<C64>::identity(dc * du, dc * du);
    // control pattern "all ones" sits at block index Σ 1·3^j
    let mut active = 0usize;
    for _ in 0..n_controls {
        active = active * 3 + 1;
    }
    let base = active * du;
    for i in 0..du {
        for j in 0..du {
            m[(base + i, base + j)] = u[(i, j)];
        }
    }
    m
}

/// Convenience: run `circuit` from ∣0…0⟩.
pub fn run_from_zero(circuit: &QuditCircuit) -> Result<StateVector> {
    let mut sv = StateVector::zero(circuit.n_sites);
    sv.run_circuit(circuit)?;
    Ok(sv)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::Gate;

    const EPS: f64 = 1e-12;

    fn assert_close(a: C64, b: C64) {
        assert!((a - b).norm() < EPS, "{a} vs {b}");
    }

    #[test]
    fn empty_circuit_is_identity() {
        let c = QuditCircuit::new(2);
        let sv = run_from_zero(&c).unwrap();
        assert_close(sv.amplitudes()[0], C64::new(1., 0.));
    }

    #[test]
    fn x01_twice_gives_global_minus() {
        let mut sv = StateVector::zero(1);
        sv.apply_gate(&Gate::x01(), &[0]).unwrap();
        sv.apply_gate(&Gate::x01(), &[0]).unwrap();
        assert_close(sv.amplitudes()[0], C64::new(-1., 0.));
    }

    #[test]
    fn sx01_twice_equals_x01() {
        let mut sv = StateVector::zero(1);
        sv.apply_gate(&Gate::sx01(), &[0]).unwrap();
        sv.apply_gate(&Gate::sx01(), &[0]).unwrap();
        // ∣0⟩ ↦ −i∣1⟩
        assert_close(sv.amplitudes()[1], C64::new(0., -1.));
    }

    #[test]
    fn cnot_on_12_adds_phase() {
        // ∣1⟩⊗∣2⟩ ↦ i∣12⟩
        let mut sv = StateVector::basis(&[1, 2]);
        sv.apply_gate(&Gate::cnot(), &[0, 1]).unwrap();
        assert_close(sv.amplitudes()[basis_index(&[1, 2])], C64::new(0., 1.));
    }

    #[test]
    fn cnot_control_two_block() {
        let mut sv = StateVector::basis(&[2, 0]);
        sv.apply_gate(&Gate::cnot(), &[0, 1]).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_close(sv.amplitudes()[basis_index(&[2, 0])], C64::new(s, 0.));
        assert_close(sv.amplitudes()[basis_index(&[2, 1])], C64::new(-s, 0.));
    }

    #[test]
    fn bell_state_from_h_and_cnot() {
        let mut c = QuditCircuit::new(2);
        c.push(Gate::h01(), &[0]).unwrap();
        c.push(Gate::cnot(), &[0, 1]).unwrap();
        let sv = run_from_zero(&c).unwrap();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        assert_close(sv.amplitudes()[basis_index(&[0, 0])], C64::new(s, 0.));
        assert_close(sv.amplitudes()[basis_index(&[1, 1])], C64::new(s, 0.));
        assert!((sv.norm() - 1.0).abs() < EPS);
    }

    #[test]
    fn gate_on_noncontiguous_sites() {
        // CNOT on (2, 0) of a 3-site register against kron-built oracle
        let mut sv = StateVector::basis(&[0, 1, 1]);
        sv.apply_gate(&Gate::x01(), &[0]).unwrap(); // site 0 -> -i∣1⟩: now -i∣111⟩... control site 2 is ∣1⟩
        sv.apply_gate(&Gate::cnot(), &[2, 0]).unwrap();
        // control = site 2 (∣1⟩), target = site 0 (∣1⟩) ↦ ∣0⟩ per truth table ∣11⟩→∣10⟩
        assert_close(sv.amplitudes()[basis_index(&[0, 1, 1])], C64::new(0., -1.));
    }

    #[test]
    fn projection_and_marginals() {
        let mut c = QuditCircuit::new(2);
        c.push(Gate::h01(), &[0]).unwrap();
        c.push(Gate::cnot(), &[0, 1]).unwrap();
        let sv = run_from_zero(&c).unwrap();
        assert!((sv.outcome_probability(&[0], &[0]) - 0.5).abs() < EPS);
        let branch = sv.project(&[0], &[1]);
        assert_eq!(branch.n_sites(), 1);
        assert_close(branch.amplitudes()[1], C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.));
    }

    #[test]
    fn measure_probabilities_sum_to_one() {
        let mut c = QuditCircuit::new(3);
        c.push(Gate::h01(), &[0]).unwrap();
        c.push(Gate::sx12(), &[1]).unwrap();
        c.push(Gate::cnot(), &[0, 2]).unwrap();
        c.push(Gate::u01(1.1, 0.2, -0.7), &[2]).unwrap();
        let sv = run_from_zero(&c).unwrap();
        let p: f64 = sv.probabilities().iter().sum();
        assert!((p - 1.0).abs() < NORM_TOL);
    }

    #[test]
    fn uniform_qutrit_superposition_probabilities() {
        // (∣0⟩+∣1⟩+∣2⟩)/√3
        let s = 1.0 / 3f64.sqrt();
        let sv = StateVector::from_amplitudes(1, vec![C64::new(s, 0.); 3]).unwrap();
        for v in sv.probabilities() {
            assert!((v - 1.0 / 3.0).abs() < EPS);
        }
    }

    #[test]
    fn controlled_matrix_identity_off_block() {
        let cm = controlled_matrix(&Gate::x01().matrix, 1);
        // control ∣0⟩ and ∣2⟩ blocks are identity
        for i in 0..3 {
            assert_close(cm[(i, i)], C64::new(1., 0.));
            assert_close(cm[(6 + i, 6 + i)], C64::new(1., 0.));
        }
        assert_close(cm[(3, 4)], C64::new(0., -1.));
    }
}
