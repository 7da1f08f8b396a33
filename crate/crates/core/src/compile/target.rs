//! Compilation targets: partial isometries given by input/output state pairs.

use crate::error::{Error, Result};
use crate::C64;
use serde::{Deserialize, Serialize};

/// Native gate set to compile into.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum GateSet {
    /// All wires are qutrits; entangler is the device CNOT.
    #[serde(rename = "qutrit")]
    Qutrit,
    /// All wires are qubits; entangler is the plain CNOT.
    #[serde(rename = "qubit")]
    Qubit,
}

impl GateSet {
    pub fn wire_dim(self) -> usize {
        match self {
            GateSet::Qutrit => 3,
            GateSet::Qubit => 2,
        }
    }
}

/// The actions V∣j⟩ that constrain the compilation.
#[derive(Debug, Clone)]
pub struct IsometryTarget {
    pub wire_dims: Vec<usize>,
    /// Input basis states, as digit strings over the wires.
    pub inputs: Vec<Vec<usize>>,
    /// Output states V∣j⟩ as dense vectors over the wire space.
    pub targets: Vec<Vec<C64>>,
}

impl IsometryTarget {
    pub fn new(wire_dims: Vec<usize>, inputs: Vec<Vec<usize>>, targets: Vec<Vec<C64>>) -> Result<Self> {
        let t = IsometryTarget { wire_dims, inputs, targets };
        t.validate()?;
        Ok(t)
    }

    pub fn dim(&self) -> usize {
        self.wire_dims.iter().product()
    }

    pub fn n_wires(&self) -> usize {
        self.wire_dims.len()
    }

    /// Basis index of a digit string over these wire dimensions.
    pub fn index_of(&self, digits: &[usize]) -> usize {
        digits
            .iter()
            .zip(&self.wire_dims)
            .fold(0usize, |acc, (&d, &dim)| acc * dim + d)
    }

    /// Dense vector for input j.
    pub fn input_vector(&self, j: usize) -> Vec<C64> {
        let mut v = vec![C64::new(0., 0.); self.dim()];
        v[self.index_of(&self.inputs[j])] = C64::new(1., 0.);
        v
    }

    /// Orthonormality of the target states (the isometry condition) to 1e-10,
    /// plus dimension checks.
    pub fn validate(&self) -> Result<()> {
        let d = self.dim();
        if self.inputs.len() != self.targets.len() || self.inputs.is_empty() {
            return Err(Error::BadSpec("target needs matching, non-empty input/output lists".into()));
        }
        for inp in &self.inputs {
            if inp.len() != self.n_wires() || inp.iter().zip(&self.wire_dims).any(|(&x, &dim)| x >= dim) {
                return Err(Error::BadSpec(format!("bad input digits {inp:?}")));
            }
        }
        for (j, t) in self.targets.iter().enumerate() {
            if t.len() != d {
                return Err(Error::BadSpec(format!("target {j} has dimension {} != {d}", t.len())));
            }
        }
        for i in 0..self.targets.len() {
            for j in i..self.targets.len() {
                let dot: C64 = self.targets[i].iter().zip(&self.targets[j]).map(|(a, b)| a.conj() * b).sum();
                let want = if i == j { 1.0 } else { 0.0 };
                if (dot.norm() - want).abs() > 1e-10 {
                    return Err(Error::BadSpec(format!(
                        "targets {i},{j} violate the isometry condition (⟨i|j⟩ = {dot})"
                    )));
                }
            }
        }
        // inputs must be distinct basis states
        for i in 0..self.inputs.len() {
            for j in i + 1..self.inputs.len() {
                if self.inputs[i] == self.inputs[j] {
                    return Err(Error::BadSpec("duplicate input state".into()));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(&TargetDoc::from(self))?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: TargetDoc = serde_json::from_str(text)?;
        doc.build()
    }
}

/// Serialized form: amplitudes as (re, im) pairs.
#[derive(Serialize, Deserialize)]
struct TargetDoc {
    wire_dims: Vec<usize>,
    actions: Vec<ActionDoc>,
}

#[derive(Serialize, Deserialize)]
struct ActionDoc {
    input: Vec<usize>,
    target: Vec<(f64, f64)>,
}

impl From<&IsometryTarget> for TargetDoc {
    fn from(t: &IsometryTarget) -> Self {
        TargetDoc {
            wire_dims: t.wire_dims.clone(),
            actions: t
                .inputs
                .iter()
                .zip(&t.targets)
                .map(|(i, tv)| ActionDoc { input: i.clone(), target: tv.iter().map(|c| (c.re, c.im)).collect() })
                .collect(),
        }
    }
}

impl TargetDoc {
    fn build(self) -> Result<IsometryTarget> {
        let inputs = self.actions.iter().map(|a| a.input.clone()).collect();
        let targets = self
            .actions
            .iter()
            .map(|a| a.target.iter().map(|&(re, im)| C64::new(re, im)).collect())
            .collect();
        IsometryTarget::new(self.wire_dims, inputs, targets)
    }
}

/// Qubit-pair encoding of a qutrit level: ∣0⟩→00, ∣1⟩→01, ∣2⟩→10.
pub fn qubit_encoding(level: usize) -> [usize; 2] {
    match level {
        0 => [0, 0],
        1 => [0, 1],
        2 => [1, 0],
        _ => panic!("qutrit level out of range"),
    }
}

/// The entangling block of the ladder ansatz:
///
/// ```text
/// V∣00⟩ = −√(1/3) ∣01⟩ − √(2/3) ∣12⟩
/// V∣01⟩ =  √(2/3) ∣00⟩ + √(1/3) ∣11⟩
/// ```
///
/// expressed over two qutrit wires, or over four qubit wires under the
/// pair encoding.
pub fn ladder_v_target(gate_set: GateSet) -> IsometryTarget {
    let s13 = (1f64 / 3.).sqrt();
    let s23 = (2f64 / 3.).sqrt();
    let pairs: [(usize, usize, Vec<(f64, usize, usize)>); 2] = [
        (0, 0, vec![(-s13, 0, 1), (-s23, 1, 2)]),
        (0, 1, vec![(s23, 0, 0), (s13, 1, 1)]),
    ];
    match gate_set {
        GateSet::Qutrit => {
            let wire_dims = vec![3, 3];
            let mut inputs = Vec::new();
            let mut targets = Vec::new();
            for (i1, i2, terms) in &pairs {
                inputs.push(vec![*i1, *i2]);
                let mut v = vec![C64::new(0., 0.); 9];
                for &(amp, a, b) in terms {
                    v[3 * a + b] = C64::new(amp, 0.);
                }
                targets.push(v);
            }
            IsometryTarget::new(wire_dims, inputs, targets).expect("valid by construction")
        }
        GateSet::Qubit => {
            let wire_dims = vec![2, 2, 2, 2];
            let enc_idx = |a: usize, b: usize| -> usize {
                let ea = qubit_encoding(a);
                let eb = qubit_encoding(b);
                (((ea[0] * 2 + ea[1]) * 2 + eb[0]) * 2) + eb[1]
            };
            let mut inputs = Vec::new();
            let mut targets = Vec::new();
            for (i1, i2, terms) in &pairs {
                let ea = qubit_encoding(*i1);
                let eb = qubit_encoding(*i2);
                inputs.push(vec![ea[0], ea[1], eb[0], eb[1]]);
                let mut v = vec![C64::new(0., 0.); 16];
                for &(amp, a, b) in terms {
                    v[enc_idx(a, b)] = C64::new(amp, 0.);
                }
                targets.push(v);
            }
            IsometryTarget::new(wire_dims, inputs, targets).expect("valid by construction")
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ladder_targets_validate() {
        ladder_v_target(GateSet::Qutrit).validate().unwrap();
        ladder_v_target(GateSet::Qubit).validate().unwrap();
    }

    #[test]
    fn non_orthonormal_rejected() {
        let t = IsometryTarget::new(
            vec![3],
            vec![vec![0], vec![1]],
            vec![
                vec![C64::new(1., 0.), C64::new(0., 0.), C64::new(0., 0.)],
                vec![C64::new(1., 0.), C64::new(0., 0.), C64::new(0., 0.)],
            ],
        );
        assert!(t.is_err());
    }

    #[test]
    fn json_round_trip() {
        let t = ladder_v_target(GateSet::Qutrit);
        let text = t.to_json().unwrap();
        let back = IsometryTarget::from_json(&text).unwrap();
        assert_eq!(back.wire_dims, t.wire_dims);
        assert_eq!(back.inputs, t.inputs);
        for (a, b) in back.targets.iter().flatten().zip(t.targets.iter().flatten()) {
            assert!((a - b).norm() < 1e-15);
        }
    }
}
