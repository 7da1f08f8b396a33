//! Fidelity measures between outcome distributions and density matrices.

use crate::error::{Error, Result};
use crate::C64;
use nalgebra::DMatrix;

/// Hellinger fidelity of two probability vectors: (Σ √(p·q))².
pub fn hellinger_fidelity(p: &[f64], q: &[f64]) -> Result<f64> {
    if p.len() != q.len() {
        return Err(Error::BadSpec(format!("distribution sizes differ: {} vs {}", p.len(), q.len())));
    }
    for (s, name) in [(p, "p"), (q, "q")] {
        let tot: f64 = s.iter().sum();
        if (tot - 1.0).abs() > 1e-6 {
            return Err(Error::BadSpec(format!("distribution {name} sums to {tot}")));
        }
    }
    let bc: f64 = p.iter().zip(q).map(|(&a, &b)| (a.max(0.0) * b.max(0.0)).sqrt()).sum();
    Ok(bc * bc)
}

/// Two-norm fidelity tr(ρσ); exact and cheap for any representation.
pub fn two_norm_fidelity(rho: &DMatrix<C64>, sigma: &DMatrix<C64>) -> Result<f64> {
    if rho.nrows() != sigma.nrows() {
        return Err(Error::BadSpec("dimension mismatch".into()));
    }
    Ok((rho * sigma).trace().re)
}

/// Quantum (Uhlmann) fidelity (tr √(√ρ σ √ρ))². Dense eigensolves; intended
/// for small registers (n ≤ 6).
pub fn quantum_fidelity(rho: &DMatrix<C64>, sigma: &DMatrix<C64>) -> Result<f64> {
    if rho.nrows() != sigma.nrows() {
        return Err(Error::BadSpec("dimension mismatch".into()));
    }
    let sqrt_rho = psd_sqrt(rho);
    let inner = &sqrt_rho * sigma * &sqrt_rho;
    let eig = inner.symmetric_eigen();
    // eigenvalues at round-off scale would otherwise inflate the trace after
    // the square root
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let cut = 1e-13 * lmax.max(1e-300);
    let tr: f64 = eig.eigenvalues.iter().filter(|&&v| v > cut).map(|&v| v.sqrt()).sum();
    Ok(tr * tr)
}

fn psd_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    let d = m.nrows();
    let eig = m.clone().symmetric_eigen();
    let lmax = eig.eigenvalues.iter().cloned().fold(0.0, f64::max);
    let cut = 1e-13 * lmax.max(1e-300);
    let mut out = DMatrix::<C64>::zeros(d, d);
    for k in 0..d {
        if eig.eigenvalues[k] <= cut {
            continue;
        }
        let s = eig.eigenvalues[k].sqrt();
        for i in 0..d {
            for j in 0..d {
                out[(i, j)] += C64::new(s, 0.) * eig.eigenvectors[(i, k)] * eig.eigenvectors[(j, k)].conj();
            }
        }
    }
    out
}

/// Per-site figure of merit: the n-th root of the two-norm fidelity.
pub fn fidelity_per_site(f2: f64, n: usize) -> f64 {
    assert!(n >= 1);
    f2.max(0.0).powf(1.0 / n as f64)
}

/// All three measures at once, Hellinger taken on the basis diagonals.
#[derive(Debug, Clone, Copy)]
pub struct Fidelities {
    pub hellinger: f64,
    pub quantum: Option<f64>,
    pub two_norm: f64,
}

pub fn fidelities_dense(rho: &DMatrix<C64>, sigma: &DMatrix<C64>) -> Result<Fidelities> {
    let p: Vec<f64> = (0..rho.nrows()).map(|i| rho[(i, i)].re).collect();
    let q: Vec<f64> = (0..sigma.nrows()).map(|i| sigma[(i, i)].re).collect();
    let quantum = if rho.nrows() <= 729 { Some(quantum_fidelity(rho, sigma)?) } else { None };
    Ok(Fidelities {
        hellinger: hellinger_fidelity(&p, &q)?,
        quantum,
        two_norm: two_norm_fidelity(rho, sigma)?,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pure(v: &[C64]) -> DMatrix<C64> {
        let d = v.len();
        DMatrix::from_fn(d, d, |i, j| v[i] * v[j].conj())
    }

    #[test]
    fn identical_pure_states_score_one() {
        let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.);
        let v = vec![s, C64::new(0., 0.), s];
        let rho = pure(&v);
        let f = fidelities_dense(&rho, &rho).unwrap();
        assert!((f.hellinger - 1.0).abs() < 1e-12);
        assert!((f.quantum.unwrap() - 1.0).abs() < 1e-9);
        assert!((f.two_norm - 1.0).abs() < 1e-12);
    }

    #[test]
    fn orthogonal_basis_states_score_zero() {
        let z = C64::new(0., 0.);
        let one = C64::new(1., 0.);
        let a = pure(&[one, z, z]);
        let b = pure(&[z, one, z]);
        let f = fidelities_dense(&a, &b).unwrap();
        assert!(f.hellinger.abs() < 1e-12);
        assert!(f.quantum.unwrap().abs() < 1e-9);
        assert!(f.two_norm.abs() < 1e-12);
    }

    #[test]
    fn f2_is_symmetric() {
        let z = C64::new(0., 0.);
        let one = C64::new(1., 0.);
        let a = pure(&[one, z, z]);
        let mut b = pure(&[C64::new(0.6, 0.), C64::new(0.8, 0.), z]);
        // mix b slightly
        b = b.scale(0.9) + DMatrix::identity(3, 3).scale(0.1 / 3.0);
        let ab = two_norm_fidelity(&a, &b).unwrap();
        let ba = two_norm_fidelity(&b, &a).unwrap();
        assert_eq!(ab, ba);
    }

    #[test]
    fn near_pure_f_approximates_f2() {
        // ρ, σ almost pure with purity (1−ε)²: ∣F − F₂∣ = O(√ε)
        let z = C64::new(0., 0.);
        let one = C64::new(1., 0.);
        let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.);
        let psi = pure(&[one, z, z]);
        let phi = pure(&[s, s, z]);
        for eps in [1e-3, 1e-4, 1e-5] {
            let mix = DMatrix::identity(3, 3).scale(eps / 3.0);
            let rho = psi.scale(1.0 - eps) + mix.clone();
            let sigma = phi.scale(1.0 - eps) + mix;
            let f = quantum_fidelity(&rho, &sigma).unwrap();
            let f2 = two_norm_fidelity(&rho, &sigma).unwrap();
            assert!((f - f2).abs() < 4.0 * eps.sqrt(), "eps={eps}: {f} vs {f2}");
        }
    }

    #[test]
    fn per_site_root() {
        assert!((fidelity_per_site(0.81, 2) - 0.9).abs() < 1e-12);
        assert!((fidelity_per_site(1.0, 7) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn hellinger_rejects_unnormalized() {
        assert!(hellinger_fidelity(&[0.5, 0.2], &[0.5, 0.5]).is_err());
    }
}
