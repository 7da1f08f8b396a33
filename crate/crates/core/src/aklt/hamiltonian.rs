//! AKLT chain Hamiltonians with an optional local spin twist.
//!
//! Every bond contributes S⃗ᵢ·S⃗ᵢ₊₁ + (1/3 − ε)(S⃗ᵢ·S⃗ᵢ₊₁)². On the designated
//! perturbed bond the bilinear is replaced by the twisted form
//! e^{iθ} Sᵢ⁺Sⱼ⁻/2 + e^{−iθ} Sᵢ⁻Sⱼ⁺/2 + SᵢᶻSⱼᶻ, which reduces to the plain
//! bilinear at θ = 0 and is periodic in θ with period 2π. With
//! `twist_quartic` set (the default), the bilinear inside the quartic term is
//! twisted as well, so the perturbed bond term is a conjugation of the
//! unperturbed one and time-reversal symmetry holds at every θ.

use super::spin::Spin1Ops;
use crate::error::{Error, Result};
use crate::{dim, C64};
use nalgebra::{DMatrix, Matrix3};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Boundary {
    #[serde(rename = "obc")]
    Obc,
    #[serde(rename = "pbc")]
    Pbc,
}

/// Parameters of one chain Hamiltonian.
#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct HamiltonianSpec {
    pub n: usize,
    pub boundary: Boundary,
    /// Twist angle on the perturbed bond, in radians.
    #[serde(default)]
    pub theta: f64,
    /// Bond index j, meaning the bond (j, j+1 mod n). For PBC the default is
    /// the closure bond (n−1, 0).
    #[serde(default)]
    pub perturbed_bond: Option<usize>,
    /// Quartic coefficient becomes 1/3 − ε.
    #[serde(default)]
    pub epsilon: f64,
    /// Twist the bilinear inside the quartic term too.
    #[serde(default = "default_true")]
    pub twist_quartic: bool,
}

fn default_true() -> bool {
    true
}

impl HamiltonianSpec {
    pub fn new(n: usize, boundary: Boundary) -> Self {
        HamiltonianSpec { n, boundary, theta: 0.0, perturbed_bond: None, epsilon: 0.0, twist_quartic: true }
    }

    pub fn with_theta(mut self, theta: f64) -> Self {
        self.theta = theta;
        self
    }

    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        self.epsilon = epsilon;
        self
    }

    /// Bonds as ordered site pairs; the closure bond (n−1, 0) comes last.
    pub fn bonds(&self) -> Vec<(usize, usize)> {
        let mut b: Vec<(usize, usize)> = (0..self.n - 1).map(|i| (i, i + 1)).collect();
        if self.boundary == Boundary::Pbc {
            b.push((self.n - 1, 0));
        }
        b
    }

    /// Index into `bonds()` of the perturbed bond.
    pub fn perturbed_index(&self) -> Option<usize> {
        match self.boundary {
            Boundary::Pbc => Some(self.perturbed_bond.unwrap_or(self.n - 1)),
            Boundary::Obc => self.perturbed_bond,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::BadSpec("chain length must be at least 2".into()));
        }
        if self.epsilon < 0.0 {
            return Err(Error::BadSpec("epsilon must be non-negative".into()));
        }
        if let Some(j) = self.perturbed_bond {
            let max = match self.boundary {
                Boundary::Pbc => self.n - 1,
                Boundary::Obc => self.n.saturating_sub(2),
            };
            if j > max {
                return Err(Error::BadSpec(format!("perturbed bond {j} invalid for boundary type")));
            }
        }
        Ok(())
    }
}

/// One bond's 9×9 operator together with the site pair it acts on.
#[derive(Debug, Clone)]
pub struct BondTerm {
    pub sites: (usize, usize),
    pub matrix: DMatrix<C64>,
}

fn kron3(a: &Matrix3<C64>, b: &Matrix3<C64>) -> DMatrix<C64> {
    let mut m = DMatrix::<C64>::zeros(9, 9);
    for i in 0..3 {
        for j in 0..3 {
            for k in 0..3 {
                for l in 0..3 {
                    m[(3 * i + k, 3 * j + l)] = a[(i, j)] * b[(k, l)];
                }
            }
        }
    }
    m
}

/// Twisted bilinear on one bond as a 9×9 matrix (first site most significant).
fn twisted_bilinear(theta: f64) -> DMatrix<C64> {
    let s = Spin1Ops::new();
    let half = C64::new(0.5, 0.);
    kron3(&s.sp, &s.sm) * half * C64::from_polar(1., theta)
        + kron3(&s.sm, &s.sp) * half * C64::from_polar(1., -theta)
        + kron3(&s.sz, &s.sz)
}

/// Per-bond 9×9 terms of the Hamiltonian.
pub fn bond_terms(spec: &HamiltonianSpec) -> Result<Vec<BondTerm>> {
    spec.validate()?;
    let coeff = C64::new(1.0 / 3.0 - spec.epsilon, 0.);
    let plain = twisted_bilinear(0.0);
    let pert = spec.perturbed_index();
    let mut terms = Vec::new();
    for (k, sites) in spec.bonds().into_iter().enumerate() {
        let is_pert = Some(k) == pert;
        let b = if is_pert { twisted_bilinear(spec.theta) } else { plain.clone() };
        let inner = if is_pert && !spec.twist_quartic { &plain } else { &b };
        let term = &b + (inner * inner) * coeff;
        terms.push(BondTerm { sites, matrix: term });
    }
    Ok(terms)
}

/// Dense 3^n × 3^n Hamiltonian. Intended for n ≤ 8 (ED oracle and tests).
pub fn build_hamiltonian(spec: &HamiltonianSpec) -> Result<DMatrix<C64>> {
    let d = dim(spec.n);
    let mut h = DMatrix::<C64>::zeros(d, d);
    for term in bond_terms(spec)? {
        add_two_site(&mut h, spec.n, &term);
    }
    Ok(h)
}

fn add_two_site(h: &mut DMatrix<C64>, n: usize, term: &BondTerm) {
    let (si, sj) = term.sites;
    let stride_i = 3usize.pow((n - 1 - si) as u32);
    let stride_j = 3usize.pow((n - 1 - sj) as u32);
    let rest: Vec<usize> = (0..n).filter(|&s| s != si && s != sj).collect();
    let rest_strides: Vec<usize> = rest.iter().map(|&s| 3usize.pow((n - 1 - s) as u32)).collect();
    let n_rest = dim(rest.len());
    for r in 0..n_rest {
        let mut base = 0usize;
        let mut rem = r;
        for k in (0..rest.len()).rev() {
            base += (rem % 3) * rest_strides[k];
            rem /= 3;
        }
        for a in 0..9usize {
            let ia = base + (a / 3) * stride_i + (a % 3) * stride_j;
            for b in 0..9usize {
                let ib = base + (b / 3) * stride_i + (b % 3) * stride_j;
                h[(ia, ib)] += term.matrix[(a, b)];
            }
        }
    }
}

/// y += H x without materializing H.
pub fn apply_hamiltonian(terms: &[BondTerm], n: usize, x: &[C64], y: &mut [C64]) {
    let d = dim(n);
    assert_eq!(x.len(), d);
    assert_eq!(y.len(), d);
    for term in terms {
        let (si, sj) = term.sites;
        let stride_i = 3usize.pow((n - 1 - si) as u32);
        let stride_j = 3usize.pow((n - 1 - sj) as u32);
        let rest: Vec<usize> = (0..n).filter(|&s| s != si && s != sj).collect();
        let rest_strides: Vec<usize> = rest.iter().map(|&s| 3usize.pow((n - 1 - s) as u32)).collect();
        let n_rest = dim(rest.len());
        let mut idx = [0usize; 9];
        for r in 0..n_rest {
            let mut base = 0usize;
            let mut rem = r;
            for k in (0..rest.len()).rev() {
                base += (rem % 3) * rest_strides[k];
                rem /= 3;
            }
            for (a, slot) in idx.iter_mut().enumerate() {
                *slot = base + (a / 3) * stride_i + (a % 3) * stride_j;
            }
            for a in 0..9 {
                let mut acc = C64::new(0., 0.);
                for b in 0..9 {
                    acc += term.matrix[(a, b)] * x[idx[b]];
                }
                y[idx[a]] += acc;
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn hermiticity_dev(h: &DMatrix<C64>) -> f64 {
        let d = h.nrows();
        let mut dev: f64 = 0.0;
        for i in 0..d {
            for j in 0..d {
                dev = dev.max((h[(i, j)] - h[(j, i)].conj()).norm());
            }
        }
        dev
    }

    #[test]
    fn hermitian_for_various_specs() {
        for &(n, boundary, theta, eps) in &[
            (2, Boundary::Pbc, 0.0, 1e-3),
            (3, Boundary::Pbc, 1.3, 0.0),
            (4, Boundary::Obc, 0.0, 0.0),
            (3, Boundary::Pbc, 5.0, 2e-3),
        ] {
            let spec = HamiltonianSpec { n, boundary, theta, perturbed_bond: None, epsilon: eps, twist_quartic: true };
            let h = build_hamiltonian(&spec).unwrap();
            assert!(hermiticity_dev(&h) < 1e-12, "n={n} theta={theta}");
        }
    }

    #[test]
    fn theta_two_pi_periodicity() {
        let a = build_hamiltonian(&HamiltonianSpec::new(3, Boundary::Pbc).with_theta(0.0)).unwrap();
        let b = build_hamiltonian(&HamiltonianSpec::new(3, Boundary::Pbc).with_theta(2.0 * std::f64::consts::PI)).unwrap();
        let dev = (&a - &b).iter().map(|c| c.norm()).fold(0.0, f64::max);
        assert!(dev < 1e-12);
    }

    #[test]
    fn time_reversal_symmetry() {
        // Θ = (⊗ e^{−iπSy}) ∘ K commutes with H(θ): R H* Rᵀ = H, with the
        // single-site rotation sending ∣0⟩ ↦ ∣2⟩, ∣1⟩ ↦ −∣1⟩, ∣2⟩ ↦ ∣0⟩.
        let z = C64::new(0., 0.);
        let one = C64::new(1., 0.);
        let r1 = Matrix3::new(z, z, one, z, -one, z, one, z, z);
        for theta in [0.7, 2.9] {
            for n in [2usize, 3] {
                let h = build_hamiltonian(&HamiltonianSpec::new(n, Boundary::Pbc).with_theta(theta)).unwrap();
                let d = dim(n);
                let mut r = DMatrix::<C64>::identity(1, 1);
                for _ in 0..n {
                    let mut next = DMatrix::<C64>::zeros(r.nrows() * 3, r.ncols() * 3);
                    for i in 0..r.nrows() {
                        for j in 0..r.ncols() {
                            for a in 0..3 {
                                for b in 0..3 {
                                    next[(3 * i + a, 3 * j + b)] = r[(i, j)] * r1[(a, b)];
                                }
                            }
                        }
                    }
                    r = next;
                }
                let hc = h.map(|c| c.conj());
                let rot = &r * hc * r.transpose();
                let mut dev: f64 = 0.0;
                for i in 0..d {
                    for j in 0..d {
                        dev = dev.max((rot[(i, j)] - h[(i, j)]).norm());
                    }
                }
                assert!(dev < 1e-12, "n={n} theta={theta} dev={dev}");
            }
        }
    }

    #[test]
    fn matvec_matches_dense() {
        let spec = HamiltonianSpec::new(3, Boundary::Pbc).with_theta(0.9).with_epsilon(1e-3);
        let h = build_hamiltonian(&spec).unwrap();
        let terms = bond_terms(&spec).unwrap();
        let d = dim(3);
        let x: Vec<C64> = (0..d).map(|i| C64::new((i as f64 * 0.37).sin(), (i as f64 * 0.11).cos())).collect();
        let mut y = vec![C64::new(0., 0.); d];
        apply_hamiltonian(&terms, 3, &x, &mut y);
        let xv = nalgebra::DVector::from_vec(x.clone());
        let want = &h * &xv;
        for i in 0..d {
            assert!((y[i] - want[i]).norm() < 1e-10);
        }
    }

    #[test]
    fn invalid_specs_rejected() {
        assert!(HamiltonianSpec::new(1, Boundary::Pbc).validate().is_err());
        let mut s = HamiltonianSpec::new(3, Boundary::Obc);
        s.perturbed_bond = Some(2); // only bonds 0,1 exist for OBC n=3
        assert!(s.validate().is_err());
        let mut s = HamiltonianSpec::new(3, Boundary::Pbc);
        s.epsilon = -0.1;
        assert!(s.validate().is_err());
    }
}
