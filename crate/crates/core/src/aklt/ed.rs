//! Exact-diagonalization oracle for the chain Hamiltonians.
//!
//! Small Hilbert spaces (n ≤ 6) get a dense Hermitian eigendecomposition;
//! larger ones use Lanczos with full reorthogonalization on the bond-term
//! matvec. Either way the two lowest eigenvalues are resolved so degeneracy
//! can be detected, and the returned eigenvector gets a deterministic phase
//! (largest-magnitude amplitude real-positive).

use super::hamiltonian::{apply_hamiltonian, bond_terms, build_hamiltonian, HamiltonianSpec};
use crate::error::{Error, Result};
use crate::statevector::StateVector;
use crate::{dim, C64};
use nalgebra::{DMatrix, DVector};

/// Gap below which the ground space is treated as degenerate.
pub const DEGENERACY_GAP: f64 = 1e-9;

const DENSE_LIMIT: usize = 730; // up to n = 6

#[derive(Debug, Clone)]
pub struct GroundState {
    pub energy: f64,
    pub gap: f64,
    pub state: StateVector,
}

/// Lowest eigenpair plus the spectral gap.
///
/// Errors with [`Error::DegenerateGroundState`] when the gap is below 1e-9;
/// split the degeneracy with ε > 0 in the spec.
pub fn ground_state_ed(spec: &HamiltonianSpec) -> Result<GroundState> {
    let (evals, ground) = low_spectrum(spec, 2)?;
    let gap = evals[1] - evals[0];
    if gap < DEGENERACY_GAP {
        return Err(Error::DegenerateGroundState { gap });
    }
    let mut state = StateVector::from_amplitudes_normalized(spec.n, ground)?;
    state.fix_phase();
    Ok(GroundState { energy: evals[0], gap, state })
}

/// The `k` lowest eigenvalues and the ground eigenvector.
pub fn low_spectrum(spec: &HamiltonianSpec, k: usize) -> Result<(Vec<f64>, Vec<C64>)> {
    spec.validate()?;
    let d = dim(spec.n);
    if d <= DENSE_LIMIT {
        dense_low_spectrum(spec, k)
    } else {
        lanczos_low_spectrum(spec, k)
    }
}

fn dense_low_spectrum(spec: &HamiltonianSpec, k: usize) -> Result<(Vec<f64>, Vec<C64>)> {
    let h = build_hamiltonian(spec)?;
    let d = h.nrows();
    let eig = h.symmetric_eigen();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
    let evals: Vec<f64> = order.iter().take(k.max(2)).map(|&i| eig.eigenvalues[i]).collect();
    let g = order[0];
    let ground: Vec<C64> = (0..d).map(|i| eig.eigenvectors[(i, g)]).collect();
    Ok((evals, ground))
}

fn lanczos_low_spectrum(spec: &HamiltonianSpec, k: usize) -> Result<(Vec<f64>, Vec<C64>)> {
    let terms = bond_terms(spec)?;
    let n = spec.n;
    let d = dim(n);
    let matvec = |x: &[C64], y: &mut [C64]| {
        y.iter_mut().for_each(|v| *v = C64::new(0., 0.));
        apply_hamiltonian(&terms, n, x, y);
    };
    // deterministic start vector with no special symmetry
    let mut v0: Vec<C64> = (0..d)
        .map(|i| {
            let t = i as f64;
            C64::new((0.7 * t + 0.3).sin() + 0.05, (1.3 * t + 1.1).cos())
        })
        .collect();
    normalize(&mut v0);
    let (evals, ground) = lanczos(&matvec, v0, d, k.max(2), 1e-13, 420)?;
    Ok((evals, ground))
}

fn normalize(v: &mut [C64]) {
    let n = v.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
    v.iter_mut().for_each(|c| *c /= n);
}

fn dot(a: &[C64], b: &[C64]) -> C64 {
    a.iter().zip(b).map(|(x, y)| x.conj() * y).sum()
}

/// Lanczos with full reorthogonalization; restarts on the ground Ritz vector
/// until its residual is below `tol`.
fn lanczos(
    matvec: &dyn Fn(&[C64], &mut [C64]),
    start: Vec<C64>,
    d: usize,
    k: usize,
    tol: f64,
    max_krylov: usize,
) -> Result<(Vec<f64>, Vec<C64>)> {
    let mut q = start;
    let mut best: Option<(Vec<f64>, Vec<C64>, f64)> = None;
    for _restart in 0..6 {
        let m = max_krylov.min(d);
        let mut basis: Vec<Vec<C64>> = Vec::with_capacity(m);
        let mut alpha: Vec<f64> = Vec::with_capacity(m);
        let mut beta: Vec<f64> = Vec::with_capacity(m);
        basis.push(q.clone());
        let mut w = vec![C64::new(0., 0.); d];
        for j in 0..m {
            matvec(&basis[j], &mut w);
            let a = dot(&basis[j], &w).re;
            alpha.push(a);
            // w -= a q_j + b_{j-1} q_{j-1}, then full reorthogonalization
            for (wi, qi) in w.iter_mut().zip(&basis[j]) {
                *wi -= C64::new(a, 0.) * qi;
            }
            if j > 0 {
                let b = beta[j - 1];
                for (wi, qi) in w.iter_mut().zip(&basis[j - 1]) {
                    *wi -= C64::new(b, 0.) * qi;
                }
            }
            for qprev in &basis {
                let overlap = dot(qprev, &w);
                for (wi, qi) in w.iter_mut().zip(qprev) {
                    *wi -= overlap * qi;
                }
            }
            let b = w.iter().map(|c| c.norm_sqr()).sum::<f64>().sqrt();
            if j + 1 == m || b < 1e-14 {
                break;
            }
            beta.push(b);
            let mut next = w.clone();
            next.iter_mut().for_each(|c| *c /= b);
            basis.push(next);
        }
        let steps = alpha.len();
        // tridiagonal Ritz problem
        let mut t = DMatrix::<f64>::zeros(steps, steps);
        for i in 0..steps {
            t[(i, i)] = alpha[i];
            if i + 1 < steps {
                t[(i, i + 1)] = beta[i];
                t[(i + 1, i)] = beta[i];
            }
        }
        let eig = t.symmetric_eigen();
        let mut order: Vec<usize> = (0..steps).collect();
        order.sort_by(|&a, &b| eig.eigenvalues[a].partial_cmp(&eig.eigenvalues[b]).unwrap());
        let evals: Vec<f64> = order.iter().take(k).map(|&i| eig.eigenvalues[i]).collect();
        let gcol = order[0];
        let mut ground = vec![C64::new(0., 0.); d];
        for (j, qj) in basis.iter().enumerate() {
            let coeff = eig.eigenvectors[(j, gcol)];
            for (gi, qi) in ground.iter_mut().zip(qj) {
                *gi += C64::new(coeff, 0.) * qi;
            }
        }
        normalize(&mut ground);
        // residual ‖H g − λ g‖
        let mut hg = vec![C64::new(0., 0.); d];
        matvec(&ground, &mut hg);
        let lambda = evals[0];
        let res = hg
            .iter()
            .zip(&ground)
            .map(|(h, g)| (h - C64::new(lambda, 0.) * g).norm_sqr())
            .sum::<f64>()
            .sqrt();
        if res < tol {
            return Ok((evals, ground));
        }
        match &best {
            Some((_, _, r)) if *r <= res => {}
            _ => best = Some((evals.clone(), ground.clone(), res)),
        }
        q = ground;
    }
    let (evals, ground, res) = best.unwrap();
    if res < 1e-9 {
        Ok((evals, ground))
    } else {
        Err(Error::EigenNoConvergence { residual: res })
    }
}

/// Expectation value ⟨ψ∣H∣ψ⟩ from the bond terms.
pub fn energy_expectation(spec: &HamiltonianSpec, psi: &StateVector) -> Result<f64> {
    let terms = bond_terms(spec)?;
    let d = dim(spec.n);
    let mut hx = vec![C64::new(0., 0.); d];
    apply_hamiltonian(&terms, spec.n, psi.amplitudes(), &mut hx);
    Ok(psi
        .amplitudes()
        .iter()
        .zip(&hx)
        .map(|(a, b)| (a.conj() * b).re)
        .sum())
}

#[allow(dead_code)]
fn as_dvector(v: &[C64]) -> DVector<C64> {
    DVector::from_column_slice(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::aklt::hamiltonian::Boundary;
    use crate::statevector::basis_index;

    #[test]
    fn n2_pbc_singlet_at_theta_zero() {
        let spec = HamiltonianSpec::new(2, Boundary::Pbc).with_epsilon(1e-3);
        let gs = ground_state_ed(&spec).unwrap();
        let amp = gs.state.amplitudes();
        let s = 1.0 / 3f64.sqrt();
        // (1/√3)(∣02⟩ − ∣11⟩ + ∣20⟩) up to the fixed global phase
        let a02 = amp[basis_index(&[0, 2])];
        let a11 = amp[basis_index(&[1, 1])];
        let a20 = amp[basis_index(&[2, 0])];
        assert!((a02.norm() - s).abs() < 1e-8);
        assert!((a11.norm() - s).abs() < 1e-8);
        assert!((a20.norm() - s).abs() < 1e-8);
        // relative signs: a02 = −a11 = a20
        assert!((a02 + a11).norm() < 1e-8);
        assert!((a02 - a20).norm() < 1e-8);
    }

    #[test]
    fn n2_pbc_theta_pi_pair_state() {
        let spec = HamiltonianSpec::new(2, Boundary::Pbc).with_theta(std::f64::consts::PI).with_epsilon(1e-3);
        let gs = ground_state_ed(&spec).unwrap();
        let amp = gs.state.amplitudes();
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let a02 = amp[basis_index(&[0, 2])];
        let a11 = amp[basis_index(&[1, 1])];
        let a20 = amp[basis_index(&[2, 0])];
        assert!((a02.norm() - s).abs() < 1e-8);
        assert!(a11.norm() < 1e-8);
        assert!((a20.norm() - s).abs() < 1e-8);
        assert!((a02 + a20).norm() < 1e-8); // ∣02⟩ − ∣20⟩ relative sign
    }

    #[test]
    fn n2_alpha_gamma_magnitudes_match() {
        for j in 0..13 {
            let theta = 2.0 * std::f64::consts::PI * j as f64 / 13.0;
            let eps = if j == 0 { 1e-3 } else { 0.0 };
            let spec = HamiltonianSpec::new(2, Boundary::Pbc).with_theta(theta).with_epsilon(eps);
            let gs = ground_state_ed(&spec).unwrap();
            let amp = gs.state.amplitudes();
            let alpha = amp[basis_index(&[0, 2])].norm();
            let gamma = amp[basis_index(&[2, 0])].norm();
            assert!((alpha - gamma).abs() < 1e-10, "theta={theta}");
        }
    }

    #[test]
    fn degenerate_without_epsilon() {
        let spec = HamiltonianSpec::new(2, Boundary::Pbc);
        match ground_state_ed(&spec) {
            Err(Error::DegenerateGroundState { .. }) => {}
            other => panic!("expected degeneracy error, got {other:?}"),
        }
    }

    #[test]
    fn obc_ground_energy_minus_two_thirds_per_bond() {
        let spec = HamiltonianSpec::new(4, Boundary::Obc);
        let (evals, _) = low_spectrum(&spec, 2).unwrap();
        assert!((evals[0] - (-2.0)).abs() < 1e-9);
    }

    #[test]
    fn lanczos_agrees_with_dense() {
        // force the Lanczos path by comparing on a spec the dense path also handles
        let spec = HamiltonianSpec::new(5, Boundary::Pbc).with_theta(1.1);
        let (dense, dground) = dense_low_spectrum(&spec, 2).unwrap();
        let (lz, lground) = lanczos_low_spectrum(&spec, 2).unwrap();
        assert!((dense[0] - lz[0]).abs() < 1e-9);
        assert!((dense[1] - lz[1]).abs() < 1e-7);
        let ov: C64 = dground.iter().zip(&lground).map(|(a, b)| a.conj() * b).sum();
        assert!((ov.norm() - 1.0).abs() < 1e-9);
    }
}
