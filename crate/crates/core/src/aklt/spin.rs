//! Spin-1 operators in the {m = +1, 0, −1} ↔ {∣0⟩, ∣1⟩, ∣2⟩} basis.

use crate::C64;
use nalgebra::Matrix3;

/// The spin-1 operator triple and ladder combinations S± = Sx ± iSy.
#[derive(Debug, Clone)]
pub struct Spin1Ops {
    pub sx: Matrix3<C64>,
    pub sy: Matrix3<C64>,
    pub sz: Matrix3<C64>,
    pub sp: Matrix3<C64>,
    pub sm: Matrix3<C64>,
}

impl Spin1Ops {
    pub fn new() -> Self {
        let z = C64::new(0., 0.);
        let r2 = C64::new(2f64.sqrt(), 0.);
        // S+ raises m: S+∣m⟩ = √2 ∣m+1⟩ for m ∈ {0, −1}
        let sp = Matrix3::new(z, r2, z, z, z, r2, z, z, z);
        let sm = sp.adjoint();
        let sx = (sp + sm).scale(0.5);
        let sy = (sp - sm) * C64::new(0., -0.5);
        let sz = Matrix3::new(
            C64::new(1., 0.), z, z,
            z, z, z,
            z, z, C64::new(-1., 0.),
        );
        Spin1Ops { sx, sy, sz, sp, sm }
    }
}

impl Default for Spin1Ops {
    fn default() -> Self {
        Self::new()
    }
}
