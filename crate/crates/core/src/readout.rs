//! Ternary outcome reconstruction from a binary (0 vs not-0) discriminator.
//!
//! A binary readout reports ∣1⟩ and ∣2⟩ identically, so the full ternary
//! distribution of an n-site circuit is rebuilt recursively from the 2^n
//! circuit variants that append X01 to subsets of the wires:
//!
//! - P(…, c = 0) comes from the plain circuit's c = 0 binary branch,
//! - P(…, c = 1) from the X01-appended circuit's c = 0 branch (X01 maps
//!   ∣1⟩ population onto ∣0⟩),
//! - P(…, c = 2) is the plain circuit's c = 1 branch minus the c = 1 value,
//!
//! with joint (not conditional) branch probabilities throughout, so the
//! reconstructed vector sums to one. The base case is a single wire.
//!
//! Exact mode uses simulator probabilities directly; sampled mode draws a
//! multinomial per variant first, clips small negative reconstructions at
//! −3σ, and renormalizes.

use crate::circuit::QuditCircuit;
use crate::error::{Error, Result};
use crate::gates::Gate;
use crate::statevector::run_from_zero;
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::collections::BTreeMap;

/// Readout model: optional symmetric assignment error on the binary bit and
/// optional shot sampling.
#[derive(Debug, Clone, Copy, Default)]
pub struct BinaryReadoutModel {
    /// Probability that a binary outcome is reported flipped.
    pub assignment_error: f64,
    /// Draw this many shots per circuit variant instead of exact values.
    pub shots: Option<u64>,
    pub seed: u64,
}

/// Reconstructed ternary distribution plus bookkeeping.
#[derive(Debug, Clone)]
pub struct TernaryDistribution {
    /// Probability per ternary string (site 0 most significant).
    pub probs: Vec<f64>,
    pub n_sites: usize,
    /// Number of distinct circuit variants that were simulated (2^n).
    pub circuits_used: usize,
}

impl TernaryDistribution {
    /// Probability of one ternary string.
    pub fn prob(&self, digits: &[usize]) -> f64 {
        self.probs[crate::statevector::basis_index(digits)]
    }

    /// Map keyed by ternary strings, for export.
    pub fn as_map(&self) -> BTreeMap<String, f64> {
        let mut map = BTreeMap::new();
        for (idx, &p) in self.probs.iter().enumerate() {
            let mut s = String::with_capacity(self.n_sites);
            let mut rem = idx;
            let mut digits = vec![0u8; self.n_sites];
            for k in (0..self.n_sites).rev() {
                digits[k] = (rem % 3) as u8;
                rem /= 3;
            }
            for d in digits {
                s.push(char::from(b'0' + d));
            }
            map.insert(s, p);
        }
        map
    }
}

/// Reconstruct the ternary distribution of `circuit` using only binary
/// readout. Issues exactly 2^n circuit variants.
pub fn reconstruct_ternary(circuit: &QuditCircuit, model: &BinaryReadoutModel) -> Result<TernaryDistribution> {
    let n = circuit.n_sites;
    let n_variants = 1usize << n;
    // binary joint distribution for every X01-appended wire subset
    let mut binary: Vec<Vec<f64>> = Vec::with_capacity(n_variants);
    let mut rng = ChaCha8Rng::seed_from_u64(model.seed);
    for subset in 0..n_variants {
        let mut variant = circuit.clone();
        for w in 0..n {
            if subset & (1 << w) != 0 {
                variant.push(Gate::x01(), &[w])?;
            }
        }
        let sv = run_from_zero(&variant)?;
        let ternary = sv.probabilities();
        let mut bin = vec![0.0f64; 1 << n];
        for (idx, &p) in ternary.iter().enumerate() {
            let mut b = 0usize;
            let mut rem = idx;
            for k in (0..n).rev() {
                let digit = rem % 3;
                rem /= 3;
                if digit != 0 {
                    b |= 1 << (n - 1 - k);
                }
            }
            bin[b] += p;
        }
        if model.assignment_error > 0.0 {
            bin = apply_assignment_error(&bin, n, model.assignment_error);
        }
        if let Some(shots) = model.shots {
            bin = sample_counts(&bin, shots, &mut rng);
        }
        binary.push(bin);
    }
    // bit order in `bin`: wire 0 is the most significant bit
    let probs = reconstruct(&binary, n, n, 0, &mut Vec::new());
    let mut dist = TernaryDistribution { probs, n_sites: n, circuits_used: n_variants };
    let sigma = model
        .shots
        .map(|s| 3.0 / (s as f64).sqrt())
        .unwrap_or(1e-12);
    let mut total = 0.0;
    for p in dist.probs.iter_mut() {
        if *p < 0.0 {
            if *p < -sigma {
                return Err(Error::NegativeProbability { value: *p });
            }
            *p = 0.0;
        }
        total += *p;
    }
    if model.shots.is_some() || model.assignment_error > 0.0 {
        if total > 0.0 {
            for p in dist.probs.iter_mut() {
                *p /= total;
            }
        }
    } else if (total - 1.0).abs() > 1e-8 {
        return Err(Error::BadProbability(total));
    }
    Ok(dist)
}

/// Recursive reconstruction over `remaining` trailing wires. `subset` holds
/// the X01-appended wires and `bits` the binary outcomes post-selected so
/// far (both over wires with index < n − remaining handled upstream by
/// recursion on the last wire).
fn reconstruct(binary: &[Vec<f64>], n: usize, remaining: usize, subset: usize, bits: &mut Vec<(usize, usize)>) -> Vec<f64> {
    if remaining == 0 {
        // probability of the recorded binary outcomes in this variant
        let bin = &binary[subset];
        let mut total = 0.0;
        'outer: for (b, &p) in bin.iter().enumerate() {
            for &(wire, want) in bits.iter() {
                let bit = (b >> (n - 1 - wire)) & 1;
                if bit != want {
                    continue 'outer;
                }
            }
            total += p;
        }
        return vec![total];
    }
    let wire = remaining - 1; // recurse on the last unresolved wire
    // c = 0: plain variant, binary 0 branch
    bits.push((wire, 0));
    let p0 = reconstruct(binary, n, remaining - 1, subset, bits);
    bits.pop();
    // c = 1: X01 on this wire, binary 0 branch
    bits.push((wire, 0));
    let p1 = reconstruct(binary, n, remaining - 1, subset | (1 << wire), bits);
    bits.pop();
    // c = 2: plain variant, binary 1 branch, minus the c = 1 values
    bits.push((wire, 1));
    let p12 = reconstruct(binary, n, remaining - 1, subset, bits);
    bits.pop();
    let base = 3usize.pow((remaining - 1) as u32);
    let mut out = vec![0.0f64; base * 3];
    for i in 0..base {
        out[i * 3] = p0[i];
        out[i * 3 + 1] = p1[i];
        out[i * 3 + 2] = p12[i] - p1[i];
    }
    out
}

fn apply_assignment_error(bin: &[f64], n: usize, eps: f64) -> Vec<f64> {
    let mut out = vec![0.0f64; bin.len()];
    for (b, &p) in bin.iter().enumerate() {
        if p == 0.0 {
            continue;
        }
        for target in 0..bin.len() {
            let flips = (b ^ target).count_ones() as usize;
            let stay = n - flips;
            out[target] += p * eps.powi(flips as i32) * (1.0 - eps).powi(stay as i32);
        }
    }
    out
}

fn sample_counts(bin: &[f64], shots: u64, rng: &mut ChaCha8Rng) -> Vec<f64> {
    let mut counts = vec![0u64; bin.len()];
    // cumulative inverse sampling
    let mut cdf = Vec::with_capacity(bin.len());
    let mut acc = 0.0;
    for &p in bin {
        acc += p.max(0.0);
        cdf.push(acc);
    }
    let total = acc.max(1e-300);
    for _ in 0..shots {
        let u: f64 = rng.gen_range(0.0..total);
        let idx = cdf.partition_point(|&c| c < u).min(bin.len() - 1);
        counts[idx] += 1;
    }
    counts.iter().map(|&c| c as f64 / shots as f64).collect()
}

/// Hellinger fidelity between two ternary distributions.
pub fn hellinger_score(p: &TernaryDistribution, q: &TernaryDistribution) -> Result<f64> {
    if p.n_sites != q.n_sites {
        return Err(Error::BadSpec("distribution supports differ".into()));
    }
    crate::noise::hellinger_fidelity(&p.probs, &q.probs)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::statevector::basis_index;
    use rand::Rng;

    fn exact() -> BinaryReadoutModel {
        BinaryReadoutModel::default()
    }

    #[test]
    fn single_qutrit_uniform_superposition() {
        // prepare (∣0⟩+∣1⟩+∣2⟩)-weighted state via H01 then rotations; simpler:
        // verify against the simulator's own ternary probabilities
        let mut c = QuditCircuit::new(1);
        c.push(Gate::h01(), &[0]).unwrap();
        c.push(Gate::sx12(), &[0]).unwrap();
        let direct = run_from_zero(&c).unwrap().probabilities();
        let rec = reconstruct_ternary(&c, &exact()).unwrap();
        for (a, b) in rec.probs.iter().zip(&direct) {
            assert!((a - b).abs() < 1e-12);
        }
        assert_eq!(rec.circuits_used, 2);
    }

    #[test]
    fn matches_direct_probabilities_on_random_circuits() {
        let mut rng = ChaCha8Rng::seed_from_u64(31);
        for n in 1..=3usize {
            for _ in 0..4 {
                let mut c = QuditCircuit::new(n);
                for _ in 0..6 {
                    match rng.gen_range(0..4) {
                        0 => c.push(Gate::h01(), &[rng.gen_range(0..n)]).unwrap(),
                        1 => c.push(Gate::sx12(), &[rng.gen_range(0..n)]).unwrap(),
                        2 => c.push(Gate::u01(rng.gen_range(0.0..3.0), 0.3, -0.8), &[rng.gen_range(0..n)]).unwrap(),
                        _ => {
                            if n >= 2 {
                                let a = rng.gen_range(0..n);
                                let mut b = rng.gen_range(0..n);
                                while b == a {
                                    b = rng.gen_range(0..n);
                                }
                                c.push(Gate::cnot(), &[a, b]).unwrap();
                            }
                        }
                    }
                }
                let direct = run_from_zero(&c).unwrap().probabilities();
                let rec = reconstruct_ternary(&c, &exact()).unwrap();
                assert_eq!(rec.circuits_used, 1 << n);
                for (a, b) in rec.probs.iter().zip(&direct) {
                    assert!((a - b).abs() < 1e-10);
                }
            }
        }
    }

    #[test]
    fn manifold_confined_state_has_no_twos() {
        let mut c = QuditCircuit::new(2);
        c.push(Gate::h01(), &[0]).unwrap();
        c.push(Gate::cnot(), &[0, 1]).unwrap();
        let rec = reconstruct_ternary(&c, &exact()).unwrap();
        for s1 in 0..3 {
            for s2 in 0..3 {
                if s1 == 2 || s2 == 2 {
                    assert!(rec.prob(&[s1, s2]).abs() < 1e-12);
                }
            }
        }
    }

    #[test]
    fn sampled_mode_approximates_exact() {
        let mut c = QuditCircuit::new(2);
        c.push(Gate::h01(), &[0]).unwrap();
        c.push(Gate::x12(), &[1]).unwrap();
        c.push(Gate::cnot(), &[0, 1]).unwrap();
        let exact_dist = reconstruct_ternary(&c, &exact()).unwrap();
        let sampled = reconstruct_ternary(
            &c,
            &BinaryReadoutModel { assignment_error: 0.0, shots: Some(200_000), seed: 1 },
        )
        .unwrap();
        let h = hellinger_score(&exact_dist, &sampled).unwrap();
        assert!(h > 0.99, "hellinger {h}");
        let total: f64 = sampled.probs.iter().sum();
        assert!((total - 1.0).abs() < 1e-12);
    }

    #[test]
    fn assignment_error_keeps_valid_distribution() {
        let mut c = QuditCircuit::new(2);
        c.push(Gate::sx01(), &[0]).unwrap();
        c.push(Gate::sx12(), &[1]).unwrap();
        let rec = reconstruct_ternary(
            &c,
            &BinaryReadoutModel { assignment_error: 0.02, shots: None, seed: 0 },
        )
        .unwrap();
        let total: f64 = rec.probs.iter().sum();
        assert!((total - 1.0).abs() < 1e-9);
        assert!(rec.probs.iter().all(|&p| p >= 0.0));
    }

    #[test]
    fn hellinger_identity_and_disjoint() {
        let mut c = QuditCircuit::new(1);
        c.push(Gate::h01(), &[0]).unwrap();
        let a = reconstruct_ternary(&c, &exact()).unwrap();
        assert!((hellinger_score(&a, &a).unwrap() - 1.0).abs() < 1e-12);
        let mut c2 = QuditCircuit::new(1);
        c2.push(Gate::x01(), &[0]).unwrap();
        c2.push(Gate::x12(), &[0]).unwrap();
        let b = reconstruct_ternary(&c2, &exact()).unwrap();
        // a lives on {0,1}, b on {2}
        assert!(hellinger_score(&a, &b).unwrap() < 1e-12);
    }

    #[test]
    fn pair_state_reconstruction() {
        // (∣02⟩ − ∣20⟩)/√2 prepared with one entangler
        let mut c = QuditCircuit::new(2);
        c.push(Gate::h01(), &[0]).unwrap();
        c.push(Gate::rz01(std::f64::consts::PI), &[0]).unwrap();
        c.push(Gate::cnot(), &[0, 1]).unwrap();
        c.push(Gate::x01(), &[0]).unwrap();
        c.push(Gate::x12(), &[0]).unwrap();
        c.push(Gate::x12(), &[1]).unwrap();
        let rec = reconstruct_ternary(&c, &exact()).unwrap();
        assert!((rec.prob(&[0, 2]) - 0.5).abs() < 1e-12);
        assert!((rec.prob(&[2, 0]) - 0.5).abs() < 1e-12);
        let idx02 = basis_index(&[0, 2]);
        let idx20 = basis_index(&[2, 0]);
        let rest: f64 = rec
            .probs
            .iter()
            .enumerate()
            .filter(|(i, _)| *i != idx02 && *i != idx20)
            .map(|(_, &p)| p)
            .sum();
        assert!(rest < 1e-12);
    }
}
