//! Kraus channels for thermalizing transmon qutrits.
//!
//! Amplitude damping captures spontaneous 1→0 and 2→1 decay (the two-photon
//! 2→0 path is neglected); dephasing suppresses off-diagonals through
//! probabilistic Z01/Z12 flips. The composed thermal channel applies damping
//! first, then dephasing, giving 3 × 3 = 9 Kraus operators.
//!
//! Note on the damping operator K₂: trace preservation Σ K†K = I forces its
//! nonzero entry to be √p_Δ(1−2), the 2→1 decay probability.

use crate::error::{Error, Result};
use crate::C64;
use nalgebra::Matrix3;

use super::params::ChannelProbs;

/// A completely positive trace-preserving map as explicit Kraus operators.
#[derive(Debug, Clone)]
pub struct NoiseChannel {
    pub kraus: Vec<Matrix3<C64>>,
}

impl NoiseChannel {
    pub fn identity() -> Self {
        NoiseChannel { kraus: vec![Matrix3::identity()] }
    }

    /// ‖Σ K†K − I‖_max.
    pub fn completeness_deviation(&self) -> f64 {
        let mut sum = Matrix3::<C64>::zeros();
        for k in &self.kraus {
            sum += k.adjoint() * k;
        }
        let mut dev: f64 = 0.0;
        for i in 0..3 {
            for j in 0..3 {
                let target = if i == j { C64::new(1., 0.) } else { C64::new(0., 0.) };
                dev = dev.max((sum[(i, j)] - target).norm());
            }
        }
        dev
    }

    pub fn check_complete(&self) -> Result<()> {
        let dev = self.completeness_deviation();
        if dev > 1e-12 {
            return Err(Error::BadSpec(format!("channel violates trace preservation by {dev:.3e}")));
        }
        Ok(())
    }

    /// ρ ↦ Σ K ρ K†.
    pub fn apply(&self, rho: &Matrix3<C64>) -> Matrix3<C64> {
        let mut out = Matrix3::<C64>::zeros();
        for k in &self.kraus {
            out += k * rho * k.adjoint();
        }
        out
    }

    /// Composition: self ∘ first (apply `first`, then `self`).
    pub fn after(&self, first: &NoiseChannel) -> NoiseChannel {
        let mut kraus = Vec::with_capacity(self.kraus.len() * first.kraus.len());
        for a in &self.kraus {
            for b in &first.kraus {
                kraus.push(a * b);
            }
        }
        NoiseChannel { kraus }
    }
}

/// Amplitude damping with 1→0 probability `p01` and 2→1 probability `p12`.
pub fn amp_damp_channel(p01: f64, p12: f64) -> Result<NoiseChannel> {
    for p in [p01, p12] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::BadProbability(p));
        }
    }
    let z = C64::new(0., 0.);
    let k0 = Matrix3::from_diagonal(&nalgebra::Vector3::new(
        C64::new(1., 0.),
        C64::new((1.0 - p01).sqrt(), 0.),
        C64::new((1.0 - p12).sqrt(), 0.),
    ));
    let mut k1 = Matrix3::from_element(z);
    k1[(0, 1)] = C64::new(p01.sqrt(), 0.);
    let mut k2 = Matrix3::from_element(z);
    k2[(1, 2)] = C64::new(p12.sqrt(), 0.);
    Ok(NoiseChannel { kraus: vec![k0, k1, k2] })
}

/// Dephasing: Z01 with probability `p01`, Z12 with `p12`, identity otherwise.
pub fn dephasing_channel(p01: f64, p12: f64) -> Result<NoiseChannel> {
    for p in [p01, p12] {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::BadProbability(p));
        }
    }
    if p01 + p12 > 1.0 {
        return Err(Error::BadProbability(p01 + p12));
    }
    let diag = |a: f64, b: f64, c: f64, scale: f64| {
        Matrix3::from_diagonal(&nalgebra::Vector3::new(
            C64::new(a * scale, 0.),
            C64::new(b * scale, 0.),
            C64::new(c * scale, 0.),
        ))
    };
    Ok(NoiseChannel {
        kraus: vec![
            diag(1., -1., 1., p01.sqrt()),
            diag(1., 1., -1., p12.sqrt()),
            diag(1., 1., 1., (1.0 - p01 - p12).sqrt()),
        ],
    })
}

/// The thermal channel for one exposure: dephasing after amplitude damping.
pub fn thermal_channel(probs: &ChannelProbs) -> Result<NoiseChannel> {
    let ad = amp_damp_channel(probs.p_amp_01, probs.p_amp_12)?;
    let d = dephasing_channel(probs.p_deph_01, probs.p_deph_12)?;
    Ok(d.after(&ad))
}

/// Analytic echo survival probability: after √X01, k noise steps, X01,
/// k noise steps, √X01, the probability of reading ∣0⟩ is
/// (1 + (1−2p01)^{2k} (1−p_Δ01)^k) / 2.
pub fn t2_echo_probability(p01: f64, p_amp01: f64, k: u32) -> f64 {
    0.5 * (1.0 + (1.0 - 2.0 * p01).powi(2 * k as i32) * (1.0 - p_amp01).powi(k as i32))
}

/// The same echo protocol run through the explicit channels (the
/// cross-check for [`t2_echo_probability`]).
pub fn t2_echo_simulated(p01: f64, p_amp01: f64, k: u32) -> Result<f64> {
    let noise = {
        let ad = amp_damp_channel(p_amp01, 0.0)?;
        let d = dephasing_channel(p01, 0.0)?;
        d.after(&ad)
    };
    let sx = crate::gates::Gate::sx01().matrix;
    let x = crate::gates::Gate::x01().matrix;
    let as3 = |m: &nalgebra::DMatrix<C64>| Matrix3::from_fn(|i, j| m[(i, j)]);
    let (sx, x) = (as3(&sx), as3(&x));
    let mut rho = Matrix3::<C64>::zeros();
    rho[(0, 0)] = C64::new(1., 0.);
    rho = sx * rho * sx.adjoint();
    for _ in 0..k {
        rho = noise.apply(&rho);
    }
    rho = x * rho * x.adjoint();
    for _ in 0..k {
        rho = noise.apply(&rho);
    }
    rho = sx * rho * sx.adjoint();
    Ok(rho[(0, 0)].re)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn zero_probability_channels_are_identity_like() {
        let ad = amp_damp_channel(0.0, 0.0).unwrap();
        let deph = dephasing_channel(0.0, 0.0).unwrap();
        let mut rho = Matrix3::<C64>::zeros();
        rho[(0, 1)] = C64::new(0.3, 0.1);
        rho[(1, 0)] = C64::new(0.3, -0.1);
        rho[(0, 0)] = C64::new(0.5, 0.);
        rho[(1, 1)] = C64::new(0.5, 0.);
        for ch in [&ad, &deph] {
            let out = ch.apply(&rho);
            for i in 0..3 {
                for j in 0..3 {
                    assert!((out[(i, j)] - rho[(i, j)]).norm() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn amp_damp_moves_population_down() {
        // ρ = ∣1⟩⟨1∣, p01 = 0.3 → 0.3 ∣0⟩⟨0∣ + 0.7 ∣1⟩⟨1∣
        let ch = amp_damp_channel(0.3, 0.0).unwrap();
        let mut rho = Matrix3::<C64>::zeros();
        rho[(1, 1)] = C64::new(1., 0.);
        let out = ch.apply(&rho);
        assert!((out[(0, 0)].re - 0.3).abs() < 1e-15);
        assert!((out[(1, 1)].re - 0.7).abs() < 1e-15);
        assert!(out[(2, 2)].norm() < 1e-15);
    }

    #[test]
    fn completeness_for_random_parameters() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        for _ in 0..100 {
            let (a, b): (f64, f64) = (rng.gen_range(0.0..1.0), rng.gen_range(0.0..1.0));
            assert!(amp_damp_channel(a, b).unwrap().completeness_deviation() < 1e-12);
            let (c, d) = (rng.gen_range(0.0..0.5), rng.gen_range(0.0..0.5));
            assert!(dephasing_channel(c, d).unwrap().completeness_deviation() < 1e-12);
        }
    }

    #[test]
    fn dephasing_preserves_diagonal_scales_offdiagonal() {
        let ch = dephasing_channel(0.2, 0.0).unwrap();
        let mut rho = Matrix3::<C64>::from_element(C64::new(0., 0.));
        rho[(0, 0)] = C64::new(0.4, 0.);
        rho[(1, 1)] = C64::new(0.6, 0.);
        rho[(0, 1)] = C64::new(0.25, 0.05);
        rho[(1, 0)] = rho[(0, 1)].conj();
        let out = ch.apply(&rho);
        assert!((out[(0, 0)] - rho[(0, 0)]).norm() < 1e-15);
        assert!((out[(1, 1)] - rho[(1, 1)]).norm() < 1e-15);
        // (1 − 2p) scaling on the 0-1 coherence
        assert!((out[(0, 1)] - rho[(0, 1)] * C64::new(0.6, 0.)).norm() < 1e-15);
    }

    #[test]
    fn composed_thermal_channel_has_nine_kraus() {
        let probs = crate::noise::NoiseParams::device().probs(500.0, false);
        let ch = thermal_channel(&probs).unwrap();
        assert_eq!(ch.kraus.len(), 9);
        assert!(ch.completeness_deviation() < 1e-12);
    }

    #[test]
    fn echo_formula_matches_channel_simulation() {
        let mut rng = ChaCha8Rng::seed_from_u64(9);
        for _ in 0..20 {
            let p01 = rng.gen_range(0.0..0.4);
            let pa = rng.gen_range(0.0..0.4);
            for k in 0..=5u32 {
                let f = t2_echo_probability(p01, pa, k);
                let s = t2_echo_simulated(p01, pa, k).unwrap();
                assert!((f - s).abs() < 1e-12, "p01={p01} pa={pa} k={k}: {f} vs {s}");
            }
        }
    }

    #[test]
    fn echo_trivial_cases() {
        assert!((t2_echo_probability(0.0, 0.0, 7) - 1.0).abs() < 1e-15);
        assert!((t2_echo_probability(0.31, 0.17, 0) - 1.0).abs() < 1e-15);
    }

    #[test]
    fn out_of_range_rejected() {
        assert!(amp_damp_channel(-0.1, 0.0).is_err());
        assert!(dephasing_channel(0.7, 0.7).is_err());
    }

    #[test]
    fn purity_never_increases_under_thermal_channel() {
        let mut rng = ChaCha8Rng::seed_from_u64(77);
        let probs = crate::noise::NoiseParams::device().probs(800.0, false);
        let ch = thermal_channel(&probs).unwrap();
        for _ in 0..25 {
            // random density matrix from a random pure-ish mixture
            let mut rho = Matrix3::<C64>::zeros();
            for _ in 0..3 {
                let v = nalgebra::Vector3::new(
                    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                    C64::new(rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)),
                );
                let w: f64 = rng.gen_range(0.1..1.0);
                rho += (v.clone() * v.adjoint()).scale(w / v.norm_squared());
            }
            let tr: f64 = (0..3).map(|i| rho[(i, i)].re).sum();
            rho.scale_mut(1.0 / tr);
            let purity = |m: &Matrix3<C64>| (m * m).trace().re;
            let before = purity(&rho);
            let after = purity(&ch.apply(&rho));
            assert!(after <= before + 1e-12);
        }
    }
}
