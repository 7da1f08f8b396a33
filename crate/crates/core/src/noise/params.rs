//! Transmon noise parameters and their conversion to channel probabilities.

use crate::circuit::Op;
use serde::{Deserialize, Serialize};

/// Relaxation/coherence times per manifold (µs), gate durations (ns), a
/// dimensionless rate scaling both 1/T1 and 1/T2, and the dynamical
/// decoupling strength applied to idle wires.
#[derive(Debug, Clone, Copy, Serialize, Deserialize, PartialEq)]
pub struct NoiseParams {
    pub t1_01_us: f64,
    pub t1_12_us: f64,
    pub t2_01_us: f64,
    pub t2_12_us: f64,
    pub gate_time_1q_ns: f64,
    pub gate_time_2q_ns: f64,
    /// 1.0 reproduces the device times; r scales both decay rates by r.
    pub noise_rate: f64,
    /// 0 = none, 1 = perfect decoupling (effective T2 = 2·T1) on idle wires.
    pub dd_strength: f64,
}

impl NoiseParams {
    /// Typical transmon values: T1 = 100 µs, T2 = 75 µs in both manifolds,
    /// 40 ns single-site pulses, 500 ns entanglers.
    pub fn device() -> Self {
        NoiseParams {
            t1_01_us: 100.0,
            t1_12_us: 100.0,
            t2_01_us: 75.0,
            t2_12_us: 75.0,
            gate_time_1q_ns: 40.0,
            gate_time_2q_ns: 500.0,
            noise_rate: 1.0,
            dd_strength: 0.0,
        }
    }

    pub fn noiseless() -> Self {
        NoiseParams { noise_rate: 0.0, ..Self::device() }
    }

    pub fn with_rate(mut self, rate: f64) -> Self {
        self.noise_rate = rate;
        self
    }

    pub fn with_dd(mut self, dd: f64) -> Self {
        self.dd_strength = dd;
        self
    }

    /// Effective T2 after decoupling: linear interpolation toward 2·T1,
    /// clamped so T2_eff ≤ 2·T1 always holds.
    pub fn t2_eff_us(&self, manifold12: bool, decoupled: bool) -> f64 {
        let (t1, t2) = if manifold12 { (self.t1_12_us, self.t2_12_us) } else { (self.t1_01_us, self.t2_01_us) };
        let s = if decoupled { self.dd_strength.clamp(0.0, 1.0) } else { 0.0 };
        (t2 + s * (2.0 * t1 - t2)).min(2.0 * t1)
    }

    /// Channel probabilities for an exposure of `duration_ns`:
    /// (p_Δ01, p_Δ12, p01, p12) from 1 − p_Δ = e^{−T/T1} and
    /// 1 − 2p = e^{−T/T2_eff}, with the rate scaling both exponents.
    pub fn probs(&self, duration_ns: f64, decoupled: bool) -> ChannelProbs {
        let t_us = duration_ns.max(0.0) * 1e-3 * self.noise_rate;
        let p_amp = |t1: f64| 1.0 - (-t_us / t1).exp();
        let p_deph = |t2: f64| 0.5 * (1.0 - (-t_us / t2).exp());
        ChannelProbs {
            p_amp_01: p_amp(self.t1_01_us),
            p_amp_12: p_amp(self.t1_12_us),
            p_deph_01: p_deph(self.t2_eff_us(false, decoupled)),
            p_deph_12: p_deph(self.t2_eff_us(true, decoupled)),
        }
    }

    /// Duration of one circuit op: virtual gates are free, single-site pulses
    /// take the 1q time, anything touching two or more wires the 2q time.
    pub fn op_duration_ns(&self, op: &Op) -> f64 {
        if op.gate.is_virtual && op.controls.is_empty() {
            0.0
        } else if op.wires().len() >= 2 {
            self.gate_time_2q_ns
        } else {
            self.gate_time_1q_ns
        }
    }

    pub fn validate(&self) -> crate::Result<()> {
        let ts = [self.t1_01_us, self.t1_12_us, self.t2_01_us, self.t2_12_us];
        if ts.iter().any(|&t| t <= 0.0) {
            return Err(crate::Error::BadSpec("coherence times must be positive".into()));
        }
        if self.noise_rate < 0.0 || !(0.0..=1.0).contains(&self.dd_strength) {
            return Err(crate::Error::BadSpec("noise_rate must be ≥ 0 and dd_strength in [0,1]".into()));
        }
        Ok(())
    }
}

/// Probabilities parameterizing one thermal exposure.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ChannelProbs {
    pub p_amp_01: f64,
    pub p_amp_12: f64,
    pub p_deph_01: f64,
    pub p_deph_12: f64,
}

impl ChannelProbs {
    pub fn is_zero(&self) -> bool {
        self.p_amp_01 == 0.0 && self.p_amp_12 == 0.0 && self.p_deph_01 == 0.0 && self.p_deph_12 == 0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_duration_means_no_noise() {
        let p = NoiseParams::device().probs(0.0, false);
        assert!(p.is_zero());
    }

    #[test]
    fn amp_damp_probability_from_t1() {
        // 500 ns against T1 = 100 µs at rate 1: p_Δ = 1 − e^{−0.005}
        let p = NoiseParams::device().probs(500.0, false);
        assert!((p.p_amp_01 - (1.0 - (-0.005f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn perfect_dd_doubles_t1() {
        let np = NoiseParams::device().with_dd(1.0);
        assert!((np.t2_eff_us(false, true) - 200.0).abs() < 1e-12);
        // active wires keep the bare T2
        assert!((np.t2_eff_us(false, false) - 75.0).abs() < 1e-12);
    }

    #[test]
    fn t2_eff_capped_at_twice_t1() {
        let mut np = NoiseParams::device();
        np.t2_01_us = 500.0; // unphysical input gets clamped
        assert!(np.t2_eff_us(false, false) <= 2.0 * np.t1_01_us + 1e-12);
    }

    #[test]
    fn rate_scales_exponent() {
        let slow = NoiseParams::device().with_rate(0.01).probs(500.0, false);
        let fast = NoiseParams::device().with_rate(1.0).probs(500.0, false);
        let ratio = (1.0 - slow.p_amp_01).ln() / (1.0 - fast.p_amp_01).ln();
        assert!((ratio - 0.01).abs() < 1e-10);
    }
}
