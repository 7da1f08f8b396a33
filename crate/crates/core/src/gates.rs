//! The three-level gate algebra.
//!
//! Single-qutrit gates act on a two-level manifold (0–1 or 1–2) and leave the
//! remaining level untouched; the full SU(3) matrix representation is kept so
//! that phases such as the −i carried by `X01` are tracked exactly. The
//! two-qutrit entangler is the device CNOT, defined by its truth table on the
//! nine basis states with the block on a control in ∣2⟩ parametrized by
//! (a, b, c, δ).

use crate::error::{Error, Result};
use crate::C64;
use nalgebra::DMatrix;
use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

/// Tolerance for the unitarity check ‖U†U − I‖_max.
pub const UNITARITY_TOL: f64 = 1e-12;

/// CNOT block parameters (a, b, c, δ) used for simulation.
pub const CNOT_A: f64 = FRAC_1_SQRT_2;
pub const CNOT_B: f64 = -FRAC_1_SQRT_2;
pub const CNOT_C: f64 = -FRAC_1_SQRT_2;
pub const CNOT_DELTA: f64 = -FRAC_PI_2;

/// A gate instance: symbolic label, parameters, and its dense matrix.
///
/// `matrix` is 3×3 for arity 1 and 9×9 for arity 2, in the basis
/// ∣c t⟩ ↦ 3c + t for two-site gates (first listed site most significant).
/// `is_virtual` marks zero-duration software gates (the RZ family), which
/// acquire no noise in noisy simulation.
#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub label: String,
    pub params: Vec<f64>,
    pub arity: usize,
    pub matrix: DMatrix<C64>,
    pub is_virtual: bool,
}

fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

impl Gate {
    fn new(label: &str, params: Vec<f64>, arity: usize, matrix: DMatrix<C64>, is_virtual: bool) -> Self {
        Gate { label: label.to_string(), params, arity, matrix, is_virtual }
    }

    /// π pulse in the 0–1 manifold: ∣0⟩ ↦ −i∣1⟩, ∣1⟩ ↦ −i∣0⟩.
    pub fn x01() -> Self {
        let m = DMatrix::from_row_slice(3, 3, &[
            c(0., 0.), c(0., -1.), c(0., 0.),
            c(0., -1.), c(0., 0.), c(0., 0.),
            c(0., 0.), c(0., 0.), c(1., 0.),
        ]);
        Self::new("X01", vec![], 1, m, false)
    }

    /// π pulse in the 1–2 manifold.
    pub fn x12() -> Self {
        let m = DMatrix::from_row_slice(3, 3, &[
            c(1., 0.), c(0., 0.), c(0., 0.),
            c(0., 0.), c(0., 0.), c(0., -1.),
            c(0., 0.), c(0., -1.), c(0., 0.),
        ]);
        Self::new("X12", vec![], 1, m, false)
    }

    /// π/2 pulse in the 0–1 manifold; squares to `X01`.
    pub fn sx01() -> Self {
        let s = FRAC_1_SQRT_2;
        let m = DMatrix::from_row_slice(3, 3, &[
            c(s, 0.), c(0., -s), c(0., 0.),
            c(0., -s), c(s, 0.), c(0., 0.),
            c(0., 0.), c(0., 0.), c(1., 0.),
        ]);
        Self::new("SX01", vec![], 1, m, false)
    }

    /// π/2 pulse in the 1–2 manifold; squares to `X12`.
    pub fn sx12() -> Self {
        let s = FRAC_1_SQRT_2;
        let m = DMatrix::from_row_slice(3, 3, &[
            c(1., 0.), c(0., 0.), c(0., 0.),
            c(0., 0.), c(s, 0.), c(0., -s),
            c(0., 0.), c(0., -s), c(s, 0.),
        ]);
        Self::new("SX12", vec![], 1, m, false)
    }

    /// Virtual Z rotation in the 0–1 manifold: diag(1, e^{iφ}, 1).
    pub fn rz01(phi: f64) -> Self {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(1., 0.),
            C64::from_polar(1., phi),
            c(1., 0.),
        ]));
        Self::new("RZ01", vec![phi], 1, m, true)
    }

    /// Virtual Z rotation in the 1–2 manifold: diag(1, 1, e^{iφ}).
    pub fn rz12(phi: f64) -> Self {
        let m = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(vec![
            c(1., 0.),
            c(1., 0.),
            C64::from_polar(1., phi),
        ]));
        Self::new("RZ12", vec![phi], 1, m, true)
    }

    /// General 0–1 manifold rotation U(θ, φ, λ), identity on ∣2⟩.
    pub fn u01(theta: f64, phi: f64, lambda: f64) -> Self {
        let (ct, st) = ((theta / 2.).cos(), (theta / 2.).sin());
        let m = DMatrix::from_row_slice(3, 3, &[
            c(ct, 0.), -C64::from_polar(st, lambda), c(0., 0.),
            C64::from_polar(st, phi), C64::from_polar(ct, phi + lambda), c(0., 0.),
            c(0., 0.), c(0., 0.), c(1., 0.),
        ]);
        Self::new("U01", vec![theta, phi, lambda], 1, m, false)
    }

    /// Hadamard on the 0–1 manifold, identity on ∣2⟩.
    pub fn h01() -> Self {
        let s = FRAC_1_SQRT_2;
        let m = DMatrix::from_row_slice(3, 3, &[
            c(s, 0.), c(s, 0.), c(0., 0.),
            c(s, 0.), c(-s, 0.), c(0., 0.),
            c(0., 0.), c(0., 0.), c(1., 0.),
        ]);
        Self::new("H01", vec![], 1, m, false)
    }

    /// Hadamard on the 1–2 manifold, identity on ∣0⟩.
    pub fn h12() -> Self {
        let s = FRAC_1_SQRT_2;
        let m = DMatrix::from_row_slice(3, 3, &[
            c(1., 0.), c(0., 0.), c(0., 0.),
            c(0., 0.), c(s, 0.), c(s, 0.),
            c(0., 0.), c(s, 0.), c(-s, 0.),
        ]);
        Self::new("H12", vec![], 1, m, false)
    }

    /// Device CNOT on a qutrit pair (control first).
    ///
    /// Truth table: ∣0t⟩ fixed; ∣10⟩ ↔ ∣11⟩, ∣12⟩ ↦ i∣12⟩; the control-∣2⟩
    /// block mixes ∣20⟩, ∣21⟩ through (a, b, c) and ∣22⟩ ↦ e^{iδ}∣22⟩.
    pub fn cnot() -> Self {
        let mut m = DMatrix::<C64>::zeros(9, 9);
        m[(0, 0)] = c(1., 0.);
        m[(1, 1)] = c(1., 0.);
        m[(2, 2)] = c(1., 0.);
        m[(4, 3)] = c(1., 0.); // ∣10⟩ → ∣11⟩
        m[(3, 4)] = c(1., 0.); // ∣11⟩ → ∣10⟩
        m[(5, 5)] = c(0., 1.); // ∣12⟩ → i∣12⟩
        m[(6, 6)] = c(CNOT_A, 0.);
        m[(7, 6)] = c(CNOT_B, 0.);
        m[(6, 7)] = c(CNOT_B, 0.); // b is real here, so b* = b
        m[(7, 7)] = c(CNOT_C, 0.);
        m[(8, 8)] = C64::from_polar(1., CNOT_DELTA);
        Self::new("CNOT", vec![], 2, m, false)
    }

    /// Plain two-level CNOT embedded in qutrit wires (for the qubit-encoded
    /// comparison path): ∣10⟩ ↔ ∣11⟩ with no phase, identity elsewhere.
    pub fn cnot2() -> Self {
        let mut m = DMatrix::<C64>::identity(9, 9);
        m[(3, 3)] = c(0., 0.);
        m[(4, 4)] = c(0., 0.);
        m[(4, 3)] = c(1., 0.);
        m[(3, 4)] = c(1., 0.);
        Self::new("CNOT2", vec![], 2, m, false)
    }

    /// A gate from an explicit matrix. Used for compiled isometry embeddings
    /// and test fixtures; unitarity is enforced.
    pub fn custom(label: &str, matrix: DMatrix<C64>) -> Result<Self> {
        let arity = match matrix.nrows() {
            3 => 1,
            9 => 2,
            _ => return Err(Error::BadSpec(format!("gate matrix must be 3x3 or 9x9, got {}x{}", matrix.nrows(), matrix.ncols()))),
        };
        let g = Self::new(label, vec![], arity, matrix, false);
        g.check_unitary()?;
        Ok(g)
    }

    /// Rebuild a gate from its IR label and parameters.
    pub fn from_label(label: &str, params: &[f64]) -> Result<Self> {
        let need = |n: usize| -> Result<()> {
            if params.len() == n {
                Ok(())
            } else {
                Err(Error::BadSpec(format!("gate {label} expects {n} params, got {}", params.len())))
            }
        };
        match label {
            "X01" => { need(0)?; Ok(Self::x01()) }
            "X12" => { need(0)?; Ok(Self::x12()) }
            "SX01" => { need(0)?; Ok(Self::sx01()) }
            "SX12" => { need(0)?; Ok(Self::sx12()) }
            "RZ01" => { need(1)?; Ok(Self::rz01(params[0])) }
            "RZ12" => { need(1)?; Ok(Self::rz12(params[0])) }
            "U01" => { need(3)?; Ok(Self::u01(params[0], params[1], params[2])) }
            "H01" => { need(0)?; Ok(Self::h01()) }
            "H12" => { need(0)?; Ok(Self::h12()) }
            "CNOT" => { need(0)?; Ok(Self::cnot()) }
            "CNOT2" => { need(0)?; Ok(Self::cnot2()) }
            _ => Err(Error::BadSpec(format!("unknown gate label {label}"))),
        }
    }

    /// ‖U†U − I‖_max ≤ 1e-12, and virtual gates must be diagonal.
    pub fn check_unitary(&self) -> Result<()> {
        let dev = unitarity_deviation(&self.matrix);
        if dev > UNITARITY_TOL {
            return Err(Error::NotUnitary { max_dev: dev });
        }
        if self.is_virtual {
            for i in 0..self.matrix.nrows() {
                for j in 0..self.matrix.ncols() {
                    if i != j && self.matrix[(i, j)].norm() > 0.0 {
                        return Err(Error::BadSpec(format!("virtual gate {} is not diagonal", self.label)));
                    }
                }
            }
        }
        Ok(())
    }

    pub fn dagger(&self) -> Self {
        let mut g = self.clone();
        g.matrix = self.matrix.adjoint();
        g.label = format!("{}†", self.label);
        g
    }
}

/// ‖U†U − I‖_max.
pub fn unitarity_deviation(m: &DMatrix<C64>) -> f64 {
    let p = m.adjoint() * m;
    let n = m.nrows();
    let mut dev: f64 = 0.0;
    for i in 0..n {
        for j in 0..n {
            let target = if i == j { C64::new(1., 0.) } else { C64::new(0., 0.) };
            dev = dev.max((p[(i, j)] - target).norm());
        }
    }
    dev
}

/// The native gate catalog (parametrized members instantiated at zero angles).
pub fn standard_gates() -> Vec<Gate> {
    vec![
        Gate::x01(),
        Gate::x12(),
        Gate::sx01(),
        Gate::sx12(),
        Gate::rz01(0.0),
        Gate::rz12(0.0),
        Gate::u01(0.0, 0.0, 0.0),
        Gate::h01(),
        Gate::h12(),
        Gate::cnot(),
    ]
}
