//! Circuit IR over three-level sites.
//!
//! A [`QuditCircuit`] is an ordered list of gate applications plus optional
//! terminal measurements. It is the single representation consumed by the
//! statevector engine, the noisy MPO engine, and the dense density-matrix
//! oracle. Controlled applications (used by the generalized Hadamard test)
//! carry their control sites separately so the underlying gate matrix stays
//! small.
//!
//! Serialization: `{n_sites, ops: [{gate, params, sites}]}` with the gate
//! labels `"X01","X12","SX01","SX12","RZ01","RZ12","U01","H01","H12","CNOT"`.

use crate::error::{Error, Result};
use crate::gates::Gate;
use serde::{Deserialize, Serialize};

/// One gate application: `controls` (if any) gate the unitary on ∣1⟩.
#[derive(Debug, Clone, PartialEq)]
pub struct Op {
    pub gate: Gate,
    pub sites: Vec<usize>,
    pub controls: Vec<usize>,
}

impl Op {
    pub fn new(gate: Gate, sites: Vec<usize>) -> Self {
        Op { gate, sites, controls: vec![] }
    }

    pub fn controlled(gate: Gate, controls: Vec<usize>, sites: Vec<usize>) -> Self {
        Op { gate, sites, controls }
    }

    /// All wires the op touches, controls first.
    pub fn wires(&self) -> Vec<usize> {
        self.controls.iter().chain(self.sites.iter()).copied().collect()
    }
}

/// Ordered gate list over `n_sites` qutrits with optional measurements
/// (site, classical bit).
#[derive(Debug, Clone, Default, PartialEq)]
pub struct QuditCircuit {
    pub n_sites: usize,
    pub ops: Vec<Op>,
    pub measurements: Vec<(usize, usize)>,
}

impl QuditCircuit {
    pub fn new(n_sites: usize) -> Self {
        QuditCircuit { n_sites, ops: vec![], measurements: vec![] }
    }

    /// Append a gate; validates arity and site indices.
    pub fn push(&mut self, gate: Gate, sites: &[usize]) -> Result<()> {
        self.push_op(Op::new(gate, sites.to_vec()))
    }

    /// Append a controlled gate application.
    pub fn push_controlled(&mut self, gate: Gate, controls: &[usize], sites: &[usize]) -> Result<()> {
        self.push_op(Op::controlled(gate, controls.to_vec(), sites.to_vec()))
    }

    pub fn push_op(&mut self, op: Op) -> Result<()> {
        if op.gate.arity != op.sites.len() {
            return Err(Error::ArityMismatch { arity: op.gate.arity, got: op.sites.len() });
        }
        let wires = op.wires();
        for (i, &w) in wires.iter().enumerate() {
            if w >= self.n_sites {
                return Err(Error::SiteOutOfRange { site: w, n_sites: self.n_sites });
            }
            if wires[..i].contains(&w) {
                return Err(Error::RepeatedSite { site: w });
            }
        }
        self.ops.push(op);
        Ok(())
    }

    pub fn measure(&mut self, site: usize, bit: usize) -> Result<()> {
        if site >= self.n_sites {
            return Err(Error::SiteOutOfRange { site, n_sites: self.n_sites });
        }
        self.measurements.push((site, bit));
        Ok(())
    }

    /// Sites with terminal measurements, in classical-bit order.
    pub fn measured_sites(&self) -> Vec<usize> {
        let mut m = self.measurements.clone();
        m.sort_by_key(|&(_, bit)| bit);
        m.into_iter().map(|(site, _)| site).collect()
    }

    /// Concatenate another circuit acting on the same register.
    pub fn extend(&mut self, other: &QuditCircuit) -> Result<()> {
        for op in &other.ops {
            self.push_op(op.clone())?;
        }
        Ok(())
    }

    /// The same circuit with every op conjugated and the order reversed.
    pub fn dagger(&self) -> QuditCircuit {
        let mut out = QuditCircuit::new(self.n_sites);
        for op in self.ops.iter().rev() {
            out.ops.push(Op { gate: op.gate.dagger(), sites: op.sites.clone(), controls: op.controls.clone() });
        }
        out
    }

    /// Number of non-virtual entangling gates.
    pub fn two_site_count(&self) -> usize {
        self.ops.iter().filter(|op| op.wires().len() >= 2).count()
    }

    pub fn to_json(&self) -> Result<String> {
        let doc = CircuitDoc::from(self);
        Ok(serde_json::to_string_pretty(&doc)?)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let doc: CircuitDoc = serde_json::from_str(text)?;
        doc.build()
    }
}

#[derive(Serialize, Deserialize)]
struct OpDoc {
    gate: String,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    params: Vec<f64>,
    sites: Vec<usize>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    controls: Vec<usize>,
}

#[derive(Serialize, Deserialize)]
struct CircuitDoc {
    n_sites: usize,
    ops: Vec<OpDoc>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    measurements: Vec<(usize, usize)>,
}

impl From<&QuditCircuit> for CircuitDoc {
    fn from(c: &QuditCircuit) -> Self {
        CircuitDoc {
            n_sites: c.n_sites,
            ops: c
                .ops
                .iter()
                .map(|op| OpDoc {
                    gate: op.gate.label.clone(),
                    params: op.gate.params.clone(),
                    sites: op.sites.clone(),
                    controls: op.controls.clone(),
                })
                .collect(),
            measurements: c.measurements.clone(),
        }
    }
}

impl CircuitDoc {
    fn build(self) -> Result<QuditCircuit> {
        let mut c = QuditCircuit::new(self.n_sites);
        for op in self.ops {
            let gate = Gate::from_label(&op.gate, &op.params)?;
            c.push_op(Op { gate, sites: op.sites, controls: op.controls })?;
        }
        for (site, bit) in self.measurements {
            c.measure(site, bit)?;
        }
        Ok(c)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sites() {
        let mut c = QuditCircuit::new(2);
        assert!(matches!(c.push(Gate::x01(), &[2]), Err(Error::SiteOutOfRange { .. })));
        assert!(matches!(c.push(Gate::cnot(), &[0, 0]), Err(Error::RepeatedSite { .. })));
        assert!(matches!(c.push(Gate::cnot(), &[0]), Err(Error::ArityMismatch { .. })));
    }

    #[test]
    fn json_round_trip() {
        let mut c = QuditCircuit::new(3);
        c.push(Gate::h01(), &[0]).unwrap();
        c.push(Gate::rz01(0.75), &[1]).unwrap();
        c.push(Gate::cnot(), &[0, 1]).unwrap();
        c.push(Gate::u01(0.4, -0.3, 2.2), &[2]).unwrap();
        c.measure(0, 0).unwrap();
        c.measure(2, 1).unwrap();
        let text = c.to_json().unwrap();
        let back = QuditCircuit::from_json(&text).unwrap();
        assert_eq!(back, c);
    }

    #[test]
    fn json_labels_are_exact() {
        let mut c = QuditCircuit::new(2);
        c.push(Gate::sx12(), &[1]).unwrap();
        c.push(Gate::cnot(), &[1, 0]).unwrap();
        let text = c.to_json().unwrap();
        assert!(text.contains("\"SX12\""));
        assert!(text.contains("\"CNOT\""));
    }
}
