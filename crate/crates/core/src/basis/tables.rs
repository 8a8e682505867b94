//! Sparse 1D transfer operators between hierarchical families.
//!
//! A [`Transfer1D`] stores, for every pair of nodes `(src, tgt)` whose block is not
//! identically zero, a dense `src_size x tgt_size` block (row-major, source index
//! first). Blocks are split by level: pairs with `level(src) < level(tgt)` are listed
//! per target (the lower part), the rest per source (the upper part). The tensor
//! product transform consumes the two parts separately.

use super::{AlpertBasis, Hierarchical1D, InterpBasis, Node1D};
use crate::poly::Side;
use crate::quadrature::GaussRule;

/// Which node pairs an operator may couple.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Coupling {
    /// Only nested supports (ancestor, descendant or equal).
    Nested,
    /// Any pair of closed supports that intersect, including through the periodic wrap.
    Touching,
}

#[derive(Clone, Debug)]
pub struct Transfer1D {
    max_level: u32,
    src_size: usize,
    tgt_size: usize,
    coupling: Coupling,
    blocks: Vec<f64>,
    lower_offsets: Vec<usize>,
    lower: Vec<(u32, u32)>,
    upper_offsets: Vec<usize>,
    upper: Vec<(u32, u32)>,
}

impl Transfer1D {
    /// Tabulates `block(src, tgt, out)` over all candidate pairs, dropping zero blocks.
    pub fn build(
        max_level: u32,
        src_size: usize,
        tgt_size: usize,
        coupling: Coupling,
        mut block: impl FnMut(Node1D, Node1D, &mut [f64]),
    ) -> Self {
        let n = Node1D::count(max_level);
        let bs = src_size * tgt_size;
        let mut blocks = Vec::new();
        let mut pairs: Vec<(u32, u32, u32)> = Vec::new();
        let mut scratch = vec![0.0; bs];
        for tid in 0..n {
            let tgt = Node1D::from_id(tid);
            for src in candidates(tgt, max_level, coupling) {
                scratch.iter_mut().for_each(|v| *v = 0.0);
                block(src, tgt, &mut scratch);
                if scratch.iter().all(|&v| v == 0.0) {
                    continue;
                }
                pairs.push((src.id() as u32, tid as u32, (blocks.len() / bs.max(1)) as u32));
                blocks.extend_from_slice(&scratch);
            }
        }
        let level = |id: u32| Node1D::from_id(id as usize).level;
        let (lo, up): (Vec<_>, Vec<_>) = pairs.iter().partition(|&&(s, t, _)| level(s) < level(t));
        let (lower_offsets, lower) = csr(n, lo.iter().map(|&&(s, t, o)| (t, s, o)));
        let (upper_offsets, upper) = csr(n, up.iter().map(|&&(s, t, o)| (s, t, o)));
        Self { max_level, src_size, tgt_size, coupling, blocks, lower_offsets, lower, upper_offsets, upper }
    }

    pub fn max_level(&self) -> u32 {
        self.max_level
    }

    pub fn src_size(&self) -> usize {
        self.src_size
    }

    pub fn tgt_size(&self) -> usize {
        self.tgt_size
    }

    pub fn coupling(&self) -> Coupling {
        self.coupling
    }

    /// `(source id, block number)` of all strictly coarser sources feeding `tgt_id`.
    pub fn lower_sources(&self, tgt_id: usize) -> &[(u32, u32)] {
        &self.lower[self.lower_offsets[tgt_id]..self.lower_offsets[tgt_id + 1]]
    }

    /// `(target id, block number)` of all targets not finer than `src_id`.
    pub fn upper_targets(&self, src_id: usize) -> &[(u32, u32)] {
        &self.upper[self.upper_offsets[src_id]..self.upper_offsets[src_id + 1]]
    }

    pub fn block(&self, number: u32) -> &[f64] {
        let bs = self.src_size * self.tgt_size;
        &self.blocks[number as usize * bs..(number as usize + 1) * bs]
    }

    /// Block for an arbitrary pair, or `None` if it is zero.
    pub fn find(&self, src_id: usize, tgt_id: usize) -> Option<&[f64]> {
        let s = Node1D::from_id(src_id);
        let t = Node1D::from_id(tgt_id);
        if s.level < t.level {
            self.lower_sources(tgt_id).iter().find(|e| e.0 as usize == src_id).map(|e| self.block(e.1))
        } else {
            self.upper_targets(src_id).iter().find(|e| e.0 as usize == tgt_id).map(|e| self.block(e.1))
        }
    }

    pub fn num_blocks(&self) -> usize {
        self.lower.len() + self.upper.len()
    }
}

fn csr(n: usize, items: impl Iterator<Item = (u32, u32, u32)>) -> (Vec<usize>, Vec<(u32, u32)>) {
    let mut items: Vec<_> = items.collect();
    items.sort_unstable();
    let mut offsets = vec![0usize; n + 1];
    for &(k, _, _) in &items {
        offsets[k as usize + 1] += 1;
    }
    for i in 0..n {
        offsets[i + 1] += offsets[i];
    }
    (offsets, items.into_iter().map(|(_, a, b)| (a, b)).collect())
}

/// Candidate sources for `tgt`.
fn candidates(tgt: Node1D, max_level: u32, coupling: Coupling) -> Vec<Node1D> {
    let (a, b) = tgt.support();
    let mut out = vec![Node1D::ROOT];
    for l in 1..=max_level {
        let cells = 1u32 << (l - 1);
        let scale = cells as f64;
        let lo = ((a * scale).ceil() as i64 - 1).max(0) as u32;
        let hi = ((b * scale).floor() as i64).min(cells as i64 - 1) as u32;
        let mut idx: Vec<u32> = (lo..=hi).collect();
        if coupling == Coupling::Touching {
            if a == 0.0 {
                idx.push(cells - 1);
            }
            if b == 1.0 {
                idx.push(0);
            }
            idx.sort_unstable();
            idx.dedup();
        }
        for j in idx {
            let s = Node1D::new(l, j);
            if coupling == Coupling::Touching || s.nested_with(tgt) {
                out.push(s);
            }
        }
    }
    out
}

/// Values `(left limit, right limit)` at `e` with periodic identification of 0 and 1.
fn traces(f: &dyn Hierarchical1D, node: Node1D, local: usize, e: f64) -> (f64, f64) {
    (f.eval_periodic(node, local, e, Side::Minus, 0), f.eval_periodic(node, local, e, Side::Plus, 0))
}

/// Common refinement of the two supports' breakpoints on their overlap.
fn overlap_cells(s: Node1D, t: Node1D) -> Vec<(f64, f64)> {
    let (sa, sb) = s.support();
    let (ta, tb) = t.support();
    let (a, b) = (sa.max(ta), sb.min(tb));
    if a >= b {
        return Vec::new();
    }
    let mut pts = vec![a, b];
    for n in [s, t] {
        let (x, y) = n.support();
        if n.level > 0 {
            pts.push(0.5 * (x + y));
        }
    }
    pts.retain(|&p| p >= a && p <= b);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    pts.windows(2).map(|w| (w[0], w[1])).collect()
}

/// `out[i * tgt + j] += ∫ d^{ds} f_i d^{dt} g_j` over the overlap of the two supports.
#[allow(clippy::too_many_arguments)]
fn volume_block(
    rule: &GaussRule,
    src: &dyn Hierarchical1D,
    s: Node1D,
    ds: usize,
    tgt: &dyn Hierarchical1D,
    t: Node1D,
    dt: usize,
    out: &mut [f64],
) {
    let (ns, nt) = (src.local_size(), tgt.local_size());
    let mut fv = vec![0.0; ns];
    let mut gv = vec![0.0; nt];
    for (a, b) in overlap_cells(s, t) {
        for (x, w) in rule.mapped(a, b) {
            for (i, v) in fv.iter_mut().enumerate() {
                *v = src.eval(s, i, x, Side::Plus, ds);
            }
            for (j, v) in gv.iter_mut().enumerate() {
                *v = tgt.eval(t, j, x, Side::Plus, dt);
            }
            for i in 0..ns {
                for j in 0..nt {
                    out[i * nt + j] += w * fv[i] * gv[j];
                }
            }
        }
    }
}

/// `out[i * tgt + j] = Σ_e w(f_i, e) [g_j](e)` over breakpoints `e` of `t`, where
/// `w` is the average (`average = true`) or the jump of the source function.
fn edge_block(
    src: &dyn Hierarchical1D,
    s: Node1D,
    tgt: &dyn Hierarchical1D,
    t: Node1D,
    average: bool,
    out: &mut [f64],
) {
    let (ns, nt) = (src.local_size(), tgt.local_size());
    for e in t.breakpoints() {
        for j in 0..nt {
            let (gl, gr) = traces(tgt, t, j, e);
            let jump = gl - gr;
            if jump == 0.0 {
                continue;
            }
            for i in 0..ns {
                let (fl, fr) = traces(src, s, i, e);
                let w = if average { 0.5 * (fl + fr) } else { fl - fr };
                out[i * nt + j] += w * jump;
            }
        }
    }
}

/// `out[i * tgt + c] = d^r f_i(x_c^side)` for the interpolation functionals of `t`.
fn point_block(src: &dyn Hierarchical1D, s: Node1D, interp: &InterpBasis, t: Node1D, out: &mut [f64]) {
    let ns = src.local_size();
    let funcs = interp.functionals(t);
    let nt = funcs.len();
    let (a, b) = s.support();
    for (c, (p, r)) in funcs.into_iter().enumerate() {
        if p.x < a || p.x > b {
            continue;
        }
        for i in 0..ns {
            out[i * nt + c] = src.eval(s, i, p.x, p.side, r);
        }
    }
}

/// All 1D tables needed by the residual, for one `(k, interpolation family, N)`.
#[derive(Clone, Debug)]
pub struct OperatorTables {
    pub max_level: u32,
    /// Alpert coefficients to interpolation functionals.
    pub eval_alpert: Transfer1D,
    /// Interpolatory coefficients to interpolation functionals (unit lower triangular).
    pub interp_points: Transfer1D,
    /// `∫ ψ v'` minus the averaged edge term.
    pub flux_volume: Transfer1D,
    /// `∫ ψ v`.
    pub mass_cross: Transfer1D,
    /// `Σ_e [v_s][v_t]` between Alpert functions.
    pub jump: Transfer1D,
    /// `∫ v_s v_t'` minus the averaged edge term, between Alpert functions.
    pub alpert_flux: Transfer1D,
}

impl OperatorTables {
    pub fn new(alpert: &AlpertBasis, interp: &InterpBasis, max_level: u32) -> Self {
        let (na, ni) = (alpert.local_size(), interp.local_size());
        let rule = GaussRule::new(alpert.degree().max(interp.degree()) + 1);
        let eval_alpert = Transfer1D::build(max_level, na, ni, Coupling::Nested, |s, t, out| {
            point_block(alpert, s, interp, t, out)
        });
        // Functions vanish at the points of all coarser-or-equal levels except their own,
        // so the part at or above the diagonal is exactly the identity.
        let interp_points = Transfer1D::build(max_level, ni, ni, Coupling::Nested, |s, t, out| {
            if s.level < t.level {
                point_block(interp, s, interp, t, out)
            } else if s == t {
                (0..ni).for_each(|i| out[i * ni + i] = 1.0);
            }
        });
        let flux_volume = Transfer1D::build(max_level, ni, na, Coupling::Touching, |s, t, out| {
            volume_block(&rule, interp, s, 0, alpert, t, 1, out);
            let mut e = vec![0.0; out.len()];
            edge_block(interp, s, alpert, t, true, &mut e);
            out.iter_mut().zip(e).for_each(|(o, v)| *o -= v);
        });
        let mass_cross = Transfer1D::build(max_level, ni, na, Coupling::Nested, |s, t, out| {
            volume_block(&rule, interp, s, 0, alpert, t, 0, out)
        });
        let jump = Transfer1D::build(max_level, na, na, Coupling::Touching, |s, t, out| {
            edge_block(alpert, s, alpert, t, false, out)
        });
        let alpert_flux = Transfer1D::build(max_level, na, na, Coupling::Touching, |s, t, out| {
            volume_block(&rule, alpert, s, 0, alpert, t, 1, out);
            let mut e = vec![0.0; out.len()];
            edge_block(alpert, s, alpert, t, true, &mut e);
            out.iter_mut().zip(e).for_each(|(o, v)| *o -= v);
        });
        Self { max_level, eval_alpert, interp_points, flux_volume, mass_cross, jump, alpert_flux }
    }
}

/// Cell-restricted 1D integrals used by the artificial viscosity.
///
/// Returns `(∫_cell f_i' g_j', ∫_cell f_i g_j)` as row-major blocks.
pub fn cell_integrals(
    alpert: &AlpertBasis,
    rule: &GaussRule,
    cell: Node1D,
    s: Node1D,
    t: Node1D,
) -> (Vec<f64>, Vec<f64>) {
    let n = alpert.local_size();
    let (ca, cb) = cell.support();
    let mut pts = vec![ca, cb];
    for node in [cell, s, t] {
        let (a, b) = node.support();
        pts.extend([a, b]);
        if node.level > 0 {
            pts.push(0.5 * (a + b));
        }
    }
    pts.retain(|&p| p >= ca && p <= cb);
    pts.sort_by(f64::total_cmp);
    pts.dedup();
    let mut stiff = vec![0.0; n * n];
    let mut mass = vec![0.0; n * n];
    for w2 in pts.windows(2) {
        for (x, w) in rule.mapped(w2[0], w2[1]) {
            for i in 0..n {
                let (fi, di) = (alpert.eval(s, i, x, Side::Plus, 0), alpert.eval(s, i, x, Side::Plus, 1));
                for j in 0..n {
                    // Products formed before weighting keep the (s, t) and (t, s) blocks exact transposes.
                    mass[i * n + j] += w * (fi * alpert.eval(t, j, x, Side::Plus, 0));
                    stiff[i * n + j] += w * (di * alpert.eval(t, j, x, Side::Plus, 1));
                }
            }
        }
    }
    (stiff, mass)
}
