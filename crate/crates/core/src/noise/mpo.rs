//! Matrix-product-operator density matrix engine.
//!
//! Site tensors carry (left bond, physical row, physical column, right bond)
//! with three-level physical legs. Gates are applied by merging the involved
//! sites into a block, conjugating by the gate unitary, and splitting back
//! with SVD truncation; distant sites are brought together with exact
//! (truncation-bounded) adjacent swaps and restored afterwards. Noise enters
//! as single-site channel superoperators, so an evolution step is
//! unitary-block-then-thermal-exposure per the layer schedule.

use super::channels::NoiseChannel;
use super::params::NoiseParams;
use super::schedule::{layer_wire_channel, schedule_circuit};
use crate::circuit::{Op, QuditCircuit};
use crate::error::{Error, Result};
use crate::statevector::controlled_matrix;
use crate::{dim, C64};
use nalgebra::DMatrix;

/// One MPO site: dense (l, 3, 3, r) tensor.
#[derive(Debug, Clone)]
pub struct SiteTensor {
    pub data: Vec<C64>,
    pub l: usize,
    pub r: usize,
}

impl SiteTensor {
    fn zeros(l: usize, r: usize) -> Self {
        SiteTensor { data: vec![C64::new(0., 0.); l * 9 * r], l, r }
    }

    #[inline]
    fn idx(&self, l: usize, pr: usize, pc: usize, r: usize) -> usize {
        ((l * 3 + pr) * 3 + pc) * self.r + r
    }

    pub fn get(&self, l: usize, pr: usize, pc: usize, r: usize) -> C64 {
        self.data[self.idx(l, pr, pc, r)]
    }

    pub fn set(&mut self, l: usize, pr: usize, pc: usize, r: usize, v: C64) {
        let i = self.idx(l, pr, pc, r);
        self.data[i] = v;
    }
}

/// Pure-state matrix product state with three-level sites, used for targets
/// and sandwich contractions against the MPO.
#[derive(Debug, Clone)]
pub struct SimpleMps {
    /// Per-site (l, 3, r) tensors, boundary bonds of dimension 1.
    pub tensors: Vec<(Vec<C64>, usize, usize)>,
}

impl SimpleMps {
    /// Product state from per-site amplitudes.
    pub fn product(site_vectors: &[[C64; 3]]) -> Self {
        SimpleMps {
            tensors: site_vectors.iter().map(|v| (v.to_vec(), 1usize, 1usize)).collect(),
        }
    }

    pub fn n_sites(&self) -> usize {
        self.tensors.len()
    }

    /// Tensor entry (l, p, r).
    pub fn get(&self, site: usize, l: usize, p: usize, r: usize) -> C64 {
        let (data, _, rd) = &self.tensors[site];
        data[(l * 3 + p) * rd + r]
    }

    /// ⟨self∣self⟩ by transfer contraction.
    pub fn norm_sqr(&self) -> f64 {
        // environment over (bra bond, ket bond)
        let mut e = vec![C64::new(1., 0.)];
        for site in 0..self.n_sites() {
            let (_, l, r) = self.tensors[site];
            let mut next = vec![C64::new(0., 0.); r * r];
            for a in 0..l {
                for b in 0..l {
                    let eab = e[a * l + b];
                    if eab.norm_sqr() == 0.0 {
                        continue;
                    }
                    for p in 0..3 {
                        for ra in 0..r {
                            let ta = self.get(site, a, p, ra).conj();
                            if ta.norm_sqr() == 0.0 {
                                continue;
                            }
                            for rb in 0..r {
                                next[ra * r + rb] += eab * ta * self.get(site, b, p, rb);
                            }
                        }
                    }
                }
            }
            e = next;
        }
        e[0].re
    }

    /// Scale the state by 1/√(norm²) so ⟨ψ∣ψ⟩ = 1 (scaling the first site).
    pub fn normalize(&mut self) -> Result<()> {
        let n2 = self.norm_sqr();
        if n2 <= 0.0 {
            return Err(Error::ZeroNorm);
        }
        let s = C64::new(1.0 / n2.sqrt(), 0.);
        for v in self.tensors[0].0.iter_mut() {
            *v *= s;
        }
        Ok(())
    }

    /// Dense amplitudes (small n only).
    pub fn to_statevector(&self) -> Result<crate::statevector::StateVector> {
        let n = self.n_sites();
        let d = dim(n);
        let mut amps = vec![C64::new(0., 0.); d];
        let mut digits = vec![0usize; n];
        for (idx, amp) in amps.iter_mut().enumerate() {
            let mut rem = idx;
            for k in (0..n).rev() {
                digits[k] = rem % 3;
                rem /= 3;
            }
            // running row vector over the bond
            let mut v = vec![C64::new(1., 0.)];
            for (site, &p) in digits.iter().enumerate() {
                let (_, l, r) = self.tensors[site];
                let mut next = vec![C64::new(0., 0.); r];
                for a in 0..l {
                    if v[a].norm_sqr() == 0.0 {
                        continue;
                    }
                    for b in 0..r {
                        next[b] += v[a] * self.get(site, a, p, b);
                    }
                }
                v = next;
            }
            *amp = v[0];
        }
        crate::statevector::StateVector::from_amplitudes_normalized(n, amps)
    }
}

/// Density matrix in MPO form with bounded bond dimension.
#[derive(Debug, Clone)]
pub struct DensityMPO {
    pub tensors: Vec<SiteTensor>,
    pub max_bond: usize,
    pub trunc_tol: f64,
    /// Largest bond dimension reached during the evolution.
    pub max_bond_hit: usize,
    /// Cumulative squared singular-value weight discarded by truncation.
    pub discarded_weight: f64,
}

pub const DEFAULT_MAX_BOND: usize = 64;
pub const DEFAULT_TRUNC_TOL: f64 = 1e-10;

impl DensityMPO {
    /// ∣0…0⟩⟨0…0∣.
    pub fn zero(n_sites: usize, max_bond: usize, trunc_tol: f64) -> Self {
        let mut tensors = Vec::with_capacity(n_sites);
        for _ in 0..n_sites {
            let mut t = SiteTensor::zeros(1, 1);
            t.set(0, 0, 0, 0, C64::new(1., 0.));
            tensors.push(t);
        }
        DensityMPO { tensors, max_bond, trunc_tol, max_bond_hit: 1, discarded_weight: 0.0 }
    }

    pub fn n_sites(&self) -> usize {
        self.tensors.len()
    }

    /// Apply a 9×9 channel superoperator on one site.
    pub fn apply_superop_site(&mut self, site: usize, s: &DMatrix<C64>) {
        let t = &self.tensors[site];
        let mut out = SiteTensor::zeros(t.l, t.r);
        for l in 0..t.l {
            for r in 0..t.r {
                for pr_new in 0..3 {
                    for pc_new in 0..3 {
                        let mut acc = C64::new(0., 0.);
                        for pr in 0..3 {
                            for pc in 0..3 {
                                let w = s[(pr_new * 3 + pc_new, pr * 3 + pc)];
                                if w.norm_sqr() == 0.0 {
                                    continue;
                                }
                                acc += w * t.get(l, pr, pc, r);
                            }
                        }
                        out.set(l, pr_new, pc_new, r, acc);
                    }
                }
            }
        }
        self.tensors[site] = out;
    }

    /// Apply a channel (as Kraus operators) to one site.
    pub fn apply_channel(&mut self, site: usize, ch: &NoiseChannel) {
        self.apply_superop_site(site, &super::schedule::channel_superop(ch));
    }

    /// Conjugate a window of `k` adjacent sites starting at `start` by a
    /// 3^k-dimensional unitary.
    pub fn apply_unitary_window(&mut self, start: usize, u: &DMatrix<C64>) -> Result<()> {
        let dk = u.nrows();
        let k = (dk as f64).log(3.0).round() as usize;
        debug_assert_eq!(3usize.pow(k as u32), dk);
        let mut block = self.merge(start, k);
        block.conjugate(u);
        self.split(start, block)?;
        Ok(())
    }

    /// Apply one circuit op (controls expanded, distant sites swapped in).
    pub fn apply_op(&mut self, op: &Op) -> Result<()> {
        let mut wires = op.wires();
        let mut matrix = if op.controls.is_empty() {
            op.gate.matrix.clone()
        } else {
            controlled_matrix(&op.gate.matrix, op.controls.len())
        };
        // sort wires ascending, permuting the matrix digit slots to match
        let mut order: Vec<usize> = (0..wires.len()).collect();
        order.sort_by_key(|&i| wires[i]);
        if order.iter().enumerate().any(|(a, &b)| a != b) {
            matrix = permute_matrix_digits(&matrix, &order);
            wires = order.iter().map(|&i| wires[i]).collect();
        }
        // bubble distant sites adjacent to wires[0]
        let base = wires[0];
        let mut swaps: Vec<usize> = Vec::new();
        for (j, &w) in wires.iter().enumerate().skip(1) {
            let target = base + j;
            let mut pos = w;
            while pos > target {
                self.swap_adjacent(pos - 1)?;
                swaps.push(pos - 1);
                pos -= 1;
            }
        }
        self.apply_unitary_window(base, &matrix)?;
        for &s in swaps.iter().rev() {
            self.swap_adjacent(s)?;
        }
        Ok(())
    }

    /// Exchange sites i and i+1.
    pub fn swap_adjacent(&mut self, i: usize) -> Result<()> {
        let mut block = self.merge(i, 2);
        block.swap_two();
        self.split(i, block)?;
        Ok(())
    }

    /// Apply an op under a logical-to-physical wire map, moving wires
    /// together without swapping them back (the map is updated). Keeping the
    /// control wire wherever the last gate left it makes staircase circuits
    /// cheap to route.
    pub fn apply_op_routed(&mut self, op: &Op, perm: &mut [usize]) -> Result<()> {
        let logical = op.wires();
        let mut matrix = if op.controls.is_empty() {
            op.gate.matrix.clone()
        } else {
            controlled_matrix(&op.gate.matrix, op.controls.len())
        };
        let mut phys: Vec<usize> = logical.iter().map(|&w| perm[w]).collect();
        // sort by physical position, permuting matrix digit slots to match
        let mut order: Vec<usize> = (0..phys.len()).collect();
        order.sort_by_key(|&i| phys[i]);
        if order.iter().enumerate().any(|(a, &b)| a != b) {
            matrix = permute_matrix_digits(&matrix, &order);
            phys = order.iter().map(|&i| phys[i]).collect();
        }
        // bubble later wires down next to the first, leaving them there
        let base = phys[0];
        for (j, &p) in phys.iter().enumerate().skip(1) {
            let target = base + j;
            let mut pos = p;
            while pos > target {
                self.swap_adjacent(pos - 1)?;
                for q in perm.iter_mut() {
                    if *q == pos {
                        *q = pos - 1;
                    } else if *q == pos - 1 {
                        *q = pos;
                    }
                }
                pos -= 1;
            }
        }
        self.apply_unitary_window(base, &matrix)?;
        Ok(())
    }

    fn merge(&self, start: usize, k: usize) -> Block {
        let mut cur = Block::from_site(&self.tensors[start]);
        for j in 1..k {
            cur = cur.absorb(&self.tensors[start + j]);
        }
        cur
    }

    fn split(&mut self, start: usize, block: Block) -> Result<()> {
        let k = block.k;
        let mut rest = block;
        for j in 0..k - 1 {
            let (site, next) = rest.split_leftmost(self.trunc_tol, self.max_bond, &mut self.discarded_weight)?;
            self.max_bond_hit = self.max_bond_hit.max(site.r);
            self.tensors[start + j] = site;
            rest = next;
        }
        self.tensors[start + k - 1] = rest.into_site();
        Ok(())
    }

    /// tr ρ.
    pub fn trace(&self) -> C64 {
        let ops: Vec<DMatrix<C64>> = (0..self.n_sites()).map(|_| DMatrix::identity(3, 3)).collect();
        self.expectation_product(&ops)
    }

    /// tr(ρ · O₁⊗…⊗Oₙ).
    pub fn expectation_product(&self, ops: &[DMatrix<C64>]) -> C64 {
        debug_assert_eq!(ops.len(), self.n_sites());
        let mut v = vec![C64::new(1., 0.)];
        for (site, o) in self.tensors.iter().zip(ops) {
            let mut next = vec![C64::new(0., 0.); site.r];
            for l in 0..site.l {
                if v[l].norm_sqr() == 0.0 {
                    continue;
                }
                for pr in 0..3 {
                    for pc in 0..3 {
                        let w = o[(pc, pr)];
                        if w.norm_sqr() == 0.0 {
                            continue;
                        }
                        for r in 0..site.r {
                            next[r] += v[l] * w * site.get(l, pr, pc, r);
                        }
                    }
                }
            }
            v = next;
        }
        v[0]
    }

    /// ⟨bra∣ρ∣ket⟩ for matrix product states over the same register.
    pub fn sandwich(&self, bra: &SimpleMps, ket: &SimpleMps) -> C64 {
        let n = self.n_sites();
        debug_assert_eq!(bra.n_sites(), n);
        debug_assert_eq!(ket.n_sites(), n);
        // environment over (rho bond, bra bond, ket bond)
        let mut env = vec![C64::new(1., 0.)];
        let (mut dl, mut bl, mut kl) = (1usize, 1usize, 1usize);
        for site in 0..n {
            let t = &self.tensors[site];
            let (_, bld, brd) = bra.tensors[site];
            let (_, kld, krd) = ket.tensors[site];
            debug_assert_eq!(t.l, dl);
            debug_assert_eq!(bld, bl);
            debug_assert_eq!(kld, kl);
            let mut next = vec![C64::new(0., 0.); t.r * brd * krd];
            for a in 0..t.l {
                for b in 0..bl {
                    for c in 0..kl {
                        let e = env[(a * bl + b) * kl + c];
                        if e.norm_sqr() == 0.0 {
                            continue;
                        }
                        for pr in 0..3 {
                            for pc in 0..3 {
                                for ra in 0..t.r {
                                    let tv = t.get(a, pr, pc, ra);
                                    if tv.norm_sqr() == 0.0 {
                                        continue;
                                    }
                                    for rb in 0..brd {
                                        let bv = bra.get(site, b, pr, rb).conj();
                                        if bv.norm_sqr() == 0.0 {
                                            continue;
                                        }
                                        for rc in 0..krd {
                                            let kv = ket.get(site, c, pc, rc);
                                            next[(ra * brd + rb) * krd + rc] += e * tv * bv * kv;
                                        }
                                    }
                                }
                            }
                        }
                    }
                }
            }
            env = next;
            dl = t.r;
            bl = brd;
            kl = krd;
        }
        env[0]
    }

    /// tr(ρ σ) for two MPOs on the same register.
    pub fn overlap_mpo(&self, other: &DensityMPO) -> C64 {
        let n = self.n_sites();
        let mut env = vec![C64::new(1., 0.)];
        let (mut al, mut bl) = (1usize, 1usize);
        for site in 0..n {
            let ta = &self.tensors[site];
            let tb = &other.tensors[site];
            let mut next = vec![C64::new(0., 0.); ta.r * tb.r];
            for a in 0..al {
                for b in 0..bl {
                    let e = env[a * bl + b];
                    if e.norm_sqr() == 0.0 {
                        continue;
                    }
                    for pr in 0..3 {
                        for pc in 0..3 {
                            for ra in 0..ta.r {
                                let va = ta.get(a, pr, pc, ra);
                                if va.norm_sqr() == 0.0 {
                                    continue;
                                }
                                for rb in 0..tb.r {
                                    // tr(ρσ) pairs ρ_{pr,pc} with σ_{pc,pr}
                                    next[ra * tb.r + rb] += e * va * tb.get(b, pc, pr, rb);
                                }
                            }
                        }
                    }
                }
            }
            env = next;
            al = ta.r;
            bl = tb.r;
        }
        env[0]
    }

    /// tr ρ².
    pub fn purity(&self) -> f64 {
        self.overlap_mpo(self).re
    }

    /// Dense matrix (small registers only).
    pub fn to_dense(&self) -> DMatrix<C64> {
        let n = self.n_sites();
        let d = dim(n);
        let mut rho = DMatrix::<C64>::zeros(d, d);
        let mut rdig = vec![0usize; n];
        let mut cdig = vec![0usize; n];
        for i in 0..d {
            let mut rem = i;
            for k in (0..n).rev() {
                rdig[k] = rem % 3;
                rem /= 3;
            }
            for j in 0..d {
                let mut rem = j;
                for k in (0..n).rev() {
                    cdig[k] = rem % 3;
                    rem /= 3;
                }
                let mut v = vec![C64::new(1., 0.)];
                for site in 0..n {
                    let t = &self.tensors[site];
                    let mut next = vec![C64::new(0., 0.); t.r];
                    for a in 0..t.l {
                        if v[a].norm_sqr() == 0.0 {
                            continue;
                        }
                        for b in 0..t.r {
                            next[b] += v[a] * t.get(a, rdig[site], cdig[site], b);
                        }
                    }
                    v = next;
                }
                rho[(i, j)] = v[0];
            }
        }
        rho
    }

    /// Diagonal probabilities (small registers).
    pub fn probabilities(&self) -> Vec<f64> {
        let n = self.n_sites();
        let d = dim(n);
        let mut out = vec![0.0; d];
        let mut dig = vec![0usize; n];
        for (i, o) in out.iter_mut().enumerate() {
            let mut rem = i;
            for k in (0..n).rev() {
                dig[k] = rem % 3;
                rem /= 3;
            }
            let mut v = vec![C64::new(1., 0.)];
            for site in 0..n {
                let t = &self.tensors[site];
                let mut next = vec![C64::new(0., 0.); t.r];
                for a in 0..t.l {
                    for b in 0..t.r {
                        next[b] += v[a] * t.get(a, dig[site], dig[site], b);
                    }
                }
                v = next;
            }
            *o = v[0].re;
        }
        out
    }
}

/// Contiguous block of k sites: (l, R, C, r) with R, C ∈ 3^k.
struct Block {
    data: Vec<C64>,
    l: usize,
    r: usize,
    k: usize,
}

impl Block {
    fn dk(&self) -> usize {
        3usize.pow(self.k as u32)
    }

    #[inline]
    fn idx(&self, l: usize, rr: usize, cc: usize, r: usize) -> usize {
        ((l * self.dk() + rr) * self.dk() + cc) * self.r + r
    }

    fn from_site(t: &SiteTensor) -> Self {
        Block { data: t.data.clone(), l: t.l, r: t.r, k: 1 }
    }

    fn into_site(self) -> SiteTensor {
        debug_assert_eq!(self.k, 1);
        SiteTensor { data: self.data, l: self.l, r: self.r }
    }

    fn absorb(self, t: &SiteTensor) -> Block {
        let dk = self.dk();
        let nk = dk * 3;
        let mut out = Block { data: vec![C64::new(0., 0.); self.l * nk * nk * t.r], l: self.l, r: t.r, k: self.k + 1 };
        for l in 0..self.l {
            for rr in 0..dk {
                for cc in 0..dk {
                    for m in 0..self.r {
                        let v = self.data[self.idx(l, rr, cc, m)];
                        if v.norm_sqr() == 0.0 {
                            continue;
                        }
                        for pr in 0..3 {
                            for pc in 0..3 {
                                for r2 in 0..t.r {
                                    let w = t.get(m, pr, pc, r2);
                                    if w.norm_sqr() == 0.0 {
                                        continue;
                                    }
                                    let i = out.idx(l, rr * 3 + pr, cc * 3 + pc, r2);
                                    out.data[i] += v * w;
                                }
                            }
                        }
                    }
                }
            }
        }
        out
    }

    /// ρ_block ↦ U ρ_block U†.
    fn conjugate(&mut self, u: &DMatrix<C64>) {
        let dk = self.dk();
        debug_assert_eq!(u.nrows(), dk);
        // rows: data[l, R', C, r] = Σ_R U[R',R] data[l,R,C,r]
        let mut tmp = vec![C64::new(0., 0.); self.data.len()];
        for l in 0..self.l {
            for cc in 0..dk {
                for r in 0..self.r {
                    for rnew in 0..dk {
                        let mut acc = C64::new(0., 0.);
                        for rold in 0..dk {
                            let w = u[(rnew, rold)];
                            if w.norm_sqr() == 0.0 {
                                continue;
                            }
                            acc += w * self.data[self.idx(l, rold, cc, r)];
                        }
                        tmp[self.idx(l, rnew, cc, r)] = acc;
                    }
                }
            }
        }
        // cols: data[l, R, C', r] = Σ_C conj(U[C',C]) tmp[l,R,C,r]
        for l in 0..self.l {
            for rr in 0..dk {
                for r in 0..self.r {
                    for cnew in 0..dk {
                        let mut acc = C64::new(0., 0.);
                        for cold in 0..dk {
                            let w = u[(cnew, cold)].conj();
                            if w.norm_sqr() == 0.0 {
                                continue;
                            }
                            acc += w * tmp[self.idx(l, rr, cold, r)];
                        }
                        let i = self.idx(l, rr, cnew, r);
                        self.data[i] = acc;
                    }
                }
            }
        }
    }

    /// Exchange the two sites of a k = 2 block.
    fn swap_two(&mut self) {
        debug_assert_eq!(self.k, 2);
        let mut out = vec![C64::new(0., 0.); self.data.len()];
        for l in 0..self.l {
            for r1 in 0..3 {
                for r2 in 0..3 {
                    for c1 in 0..3 {
                        for c2 in 0..3 {
                            for r in 0..self.r {
                                out[self.idx(l, r2 * 3 + r1, c2 * 3 + c1, r)] =
                                    self.data[self.idx(l, r1 * 3 + r2, c1 * 3 + c2, r)];
                            }
                        }
                    }
                }
            }
        }
        self.data = out;
    }

    /// Split off the leftmost site by SVD with truncation.
    fn split_leftmost(
        self,
        trunc_tol: f64,
        max_bond: usize,
        discarded: &mut f64,
    ) -> Result<(SiteTensor, Block)> {
        let dk = self.dk();
        let drest = dk / 3;
        // M[(l, pr1, pc1), (Rrest, Crest, r)]
        let rows = self.l * 9;
        let cols = drest * drest * self.r;
        let mut m = DMatrix::<C64>::zeros(rows, cols);
        for l in 0..self.l {
            for rr in 0..dk {
                let (p1, rrest) = (rr / drest, rr % drest);
                for cc in 0..dk {
                    let (q1, crest) = (cc / drest, cc % drest);
                    for r in 0..self.r {
                        m[(l * 9 + p1 * 3 + q1, (rrest * drest + crest) * self.r + r)] =
                            self.data[self.idx(l, rr, cc, r)];
                    }
                }
            }
        }
        let svd = m.svd(true, true);
        let u = svd.u.as_ref().expect("svd u");
        let vt = svd.v_t.as_ref().expect("svd v_t");
        let s = &svd.singular_values;
        let smax = s.iter().cloned().fold(0.0, f64::max);
        let full_rank = s.len();
        let mut keep = 0usize;
        for i in 0..full_rank {
            if smax > 0.0 && s[i] >= trunc_tol * smax {
                keep = i + 1;
            }
        }
        let keep_needed = keep.max(1);
        if keep_needed > max_bond {
            return Err(Error::BondOverflow { needed: keep_needed, max_bond });
        }
        let keep = keep_needed;
        for i in keep..full_rank {
            *discarded += s[i] * s[i];
        }
        let mut site = SiteTensor::zeros(self.l, keep);
        for l in 0..self.l {
            for p1 in 0..3 {
                for q1 in 0..3 {
                    for b in 0..keep {
                        site.set(l, p1, q1, b, u[(l * 9 + p1 * 3 + q1, b)]);
                    }
                }
            }
        }
        let mut rest = Block {
            data: vec![C64::new(0., 0.); keep * drest * drest * self.r],
            l: keep,
            r: self.r,
            k: self.k - 1,
        };
        for b in 0..keep {
            let sb = C64::new(s[b], 0.);
            for rrest in 0..drest {
                for crest in 0..drest {
                    for r in 0..self.r {
                        let i = rest.idx(b, rrest, crest, r);
                        rest.data[i] = sb * vt[(b, (rrest * drest + crest) * self.r + r)];
                    }
                }
            }
        }
        Ok((site, rest))
    }
}

/// Digit-slot permutation of a multi-site gate matrix: `order[k]` names which
/// original slot lands at position k.
pub fn permute_matrix_digits(m: &DMatrix<C64>, order: &[usize]) -> DMatrix<C64> {
    let k = order.len();
    let dk = 3usize.pow(k as u32);
    debug_assert_eq!(m.nrows(), dk);
    let remap = |idx: usize| -> usize {
        let mut digits = vec![0usize; k];
        let mut rem = idx;
        for j in (0..k).rev() {
            digits[j] = rem % 3;
            rem /= 3;
        }
        let mut out = 0usize;
        for j in 0..k {
            out = out * 3 + digits[order[j]];
        }
        out
    };
    let mut out = DMatrix::<C64>::zeros(dk, dk);
    for i in 0..dk {
        for j in 0..dk {
            out[(remap(i), remap(j))] = m[(i, j)];
        }
    }
    out
}

/// A density matrix whose sites have been re-ordered by lazy gate routing.
#[derive(Debug, Clone)]
pub struct RoutedRun {
    pub rho: DensityMPO,
    /// perm[logical wire] = current physical site.
    pub perm: Vec<usize>,
}

impl RoutedRun {
    pub fn zero(n_sites: usize, max_bond: usize, trunc_tol: f64) -> Self {
        RoutedRun { rho: DensityMPO::zero(n_sites, max_bond, trunc_tol), perm: (0..n_sites).collect() }
    }

    /// tr(ρ · O₁⊗…⊗Oₙ) with per-logical-wire operators.
    pub fn expectation_product(&self, ops: &[DMatrix<C64>]) -> C64 {
        let mut phys: Vec<DMatrix<C64>> = (0..ops.len()).map(|_| DMatrix::identity(3, 3)).collect();
        for (w, op) in ops.iter().enumerate() {
            phys[self.perm[w]] = op.clone();
        }
        self.rho.expectation_product(&phys)
    }

    /// Evolve through a circuit with the layer schedule, leaving wires where
    /// routing put them.
    pub fn evolve(&mut self, circuit: &QuditCircuit, np: &NoiseParams) -> Result<()> {
        let layers = schedule_circuit(circuit, np);
        for layer in &layers {
            for op in &layer.ops {
                self.rho.apply_op_routed(op, &mut self.perm)?;
            }
            if layer.duration_ns > 0.0 && np.noise_rate > 0.0 {
                for w in 0..circuit.n_sites {
                    let ch = layer_wire_channel(np, layer, w)?;
                    self.rho.apply_channel(self.perm[w], &ch);
                }
            }
        }
        Ok(())
    }
}

/// Noisy evolution of a circuit under the layered schedule.
pub fn run_noisy(
    circuit: &QuditCircuit,
    np: &NoiseParams,
    max_bond: usize,
    trunc_tol: f64,
) -> Result<DensityMPO> {
    np.validate()?;
    let mut rho = DensityMPO::zero(circuit.n_sites, max_bond, trunc_tol);
    let layers = schedule_circuit(circuit, np);
    for layer in &layers {
        for op in &layer.ops {
            rho.apply_op(op)?;
        }
        if layer.duration_ns > 0.0 && np.noise_rate > 0.0 {
            for w in 0..circuit.n_sites {
                let ch = layer_wire_channel(np, layer, w)?;
                rho.apply_channel(w, &ch);
            }
        }
    }
    Ok(rho)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gates::Gate;
    use crate::noise::dense::run_noisy_dense;

    fn max_entry_diff(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
        let mut dev: f64 = 0.0;
        for i in 0..a.nrows() {
            for j in 0..a.ncols() {
                dev = dev.max((a[(i, j)] - b[(i, j)]).norm());
            }
        }
        dev
    }

    #[test]
    fn noiseless_pure_state_round_trip() {
        let mut c = QuditCircuit::new(3);
        c.push(Gate::h01(), &[0]).unwrap();
        c.push(Gate::cnot(), &[0, 1]).unwrap();
        c.push(Gate::x12(), &[2]).unwrap();
        let rho = run_noisy(&c, &NoiseParams::noiseless(), 16, 1e-12).unwrap();
        let sv = crate::statevector::run_from_zero(&c).unwrap();
        let dense = rho.to_dense();
        for i in 0..27 {
            for j in 0..27 {
                let want = sv.amplitudes()[i] * sv.amplitudes()[j].conj();
                assert!((dense[(i, j)] - want).norm() < 1e-12);
            }
        }
        assert!((rho.trace().re - 1.0).abs() < 1e-12);
    }

    #[test]
    fn noisy_matches_dense_oracle() {
        let mut c = QuditCircuit::new(3);
        c.push(Gate::h01(), &[0]).unwrap();
        c.push(Gate::cnot(), &[0, 1]).unwrap();
        c.push(Gate::sx12(), &[1]).unwrap();
        c.push(Gate::cnot(), &[1, 2]).unwrap();
        c.push(Gate::rz01(0.7), &[0]).unwrap();
        c.push(Gate::cnot(), &[2, 0]).unwrap(); // distant pair exercises swaps
        let np = NoiseParams::device();
        let mpo = run_noisy(&c, &np, 64, 1e-12).unwrap();
        let dense = run_noisy_dense(&c, &np).unwrap();
        assert!(max_entry_diff(&mpo.to_dense(), &dense.rho) < 1e-10);
        assert!((mpo.trace().re - 1.0).abs() < 1e-8);
    }

    #[test]
    fn swap_round_trip_is_identity() {
        let mut c = QuditCircuit::new(2);
        c.push(Gate::h01(), &[0]).unwrap();
        c.push(Gate::cnot(), &[0, 1]).unwrap();
        let mut rho = run_noisy(&c, &NoiseParams::noiseless(), 16, 1e-12).unwrap();
        let before = rho.to_dense();
        rho.swap_adjacent(0).unwrap();
        rho.swap_adjacent(0).unwrap();
        assert!(max_entry_diff(&rho.to_dense(), &before) < 1e-12);
    }

    #[test]
    fn bond_overflow_reported() {
        let mut c = QuditCircuit::new(4);
        for i in 0..3 {
            c.push(Gate::h01(), &[i]).unwrap();
            c.push(Gate::cnot(), &[i, i + 1]).unwrap();
            c.push(Gate::sx12(), &[i + 1]).unwrap();
            c.push(Gate::cnot(), &[i + 1, i]).unwrap();
        }
        match run_noisy(&c, &NoiseParams::device(), 2, 1e-12) {
            Err(Error::BondOverflow { .. }) => {}
            other => panic!("expected bond overflow, got {other:?}"),
        }
    }

    #[test]
    fn sandwich_matches_dense_expectation() {
        let mut c = QuditCircuit::new(2);
        c.push(Gate::h01(), &[0]).unwrap();
        c.push(Gate::cnot(), &[0, 1]).unwrap();
        let np = NoiseParams::device();
        let rho = run_noisy(&c, &np, 16, 1e-12).unwrap();
        let dense = run_noisy_dense(&c, &np).unwrap();
        // ⟨ψ∣ρ∣ψ⟩ against the Bell-like target
        let s = C64::new(std::f64::consts::FRAC_1_SQRT_2, 0.);
        let z = C64::new(0., 0.);
        let bell = SimpleMps {
            tensors: vec![
                (vec![s, z, z, z, s, z], 1, 2),      // (l=1,p,r=2): p=0→(1,0)·s? laid out (l*3+p)*r+rr
                (vec![C64::new(1., 0.), z, z, z, C64::new(1., 0.), z], 2, 1),
            ],
        };
        let got = rho.sandwich(&bell, &bell).re;
        let psi: Vec<C64> = {
            let sv = bell.to_statevector().unwrap();
            sv.amplitudes().to_vec()
        };
        let mut want = C64::new(0., 0.);
        for i in 0..9 {
            for j in 0..9 {
                want += psi[i].conj() * dense.rho[(i, j)] * psi[j];
            }
        }
        assert!((got - want.re).abs() < 1e-10);
    }
}
