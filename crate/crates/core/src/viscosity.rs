//! Leaf-element artificial viscosity driven by the hierarchical surplus.
//!
//! A leaf whose coefficient block is large compared with the decay expected for
//! smooth data gets `ν = ν0 h`, `h = 2^{-|l|_∞}`. The viscous bilinear form
//! `Σ_e ν_e ∫_{supp e} ∇u · ∇v` is assembled once per step into a block-sparse
//! symmetric matrix; per cell it factorizes into 1D stiffness and mass integrals.

use rustc_hash::FxHashMap;

use crate::basis::{cell_integrals, AlpertBasis, Hierarchical1D, Node1D};
use crate::error::{Error, Result};
use crate::grid::{AdaptiveGrid, ElementKey};
use crate::quadrature::GaussRule;
use crate::time::ImplicitOperator;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ViscosityParams {
    pub nu0: f64,
    pub kappa: f64,
}

impl Default for ViscosityParams {
    fn default() -> Self {
        Self { nu0: 2.0, kappa: 0.0 }
    }
}

/// `(s_e, s_0)`: log10 of the block norm and of the smooth-decay reference `2^{-(k+1/2)|l|_1}`.
pub fn smoothness_indicator(block: &[f64], k: usize, level_l1: u32) -> (f64, f64) {
    let norm = block.iter().map(|v| v * v).sum::<f64>().sqrt();
    let s_e = if norm > 0.0 { norm.log10() } else { f64::NEG_INFINITY };
    let s_0 = -(k as f64 + 0.5) * level_l1 as f64 * 2f64.log10();
    (s_e, s_0)
}

/// Viscosity per flagged leaf, frozen for one step.
#[derive(Clone, Debug, Default, PartialEq)]
pub struct ViscosityField {
    pub entries: Vec<(ElementKey, f64)>,
    pub params: ViscosityParams,
    /// Step whose solution defined the field.
    pub step: usize,
}

impl ViscosityField {
    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }
}

/// Flags leaves with `s_e > s_0 + κ` and records the viscosity on the grid elements.
pub fn flag_viscosity(grid: &mut AdaptiveGrid, params: ViscosityParams, step: usize) -> ViscosityField {
    let k = grid.degree();
    let mut entries = Vec::new();
    for i in 0..grid.len() {
        let e = grid.element(i);
        let mut nu = 0.0;
        if e.is_leaf() {
            let (s_e, s_0) = smoothness_indicator(grid.coeffs(i), k, e.key.level_l1());
            if s_e > s_0 + params.kappa {
                nu = params.nu0 * 0.5f64.powi(e.key.level_linf() as i32);
                entries.push((e.key.clone(), nu));
            }
        }
        grid.set_viscosity(i, nu);
    }
    ViscosityField { entries, params, step }
}

/// Block-sparse symmetric matrix over the active elements.
#[derive(Clone, Debug, Default)]
pub struct ViscosityOperator {
    block: usize,
    n_elems: usize,
    row_offsets: Vec<usize>,
    cols: Vec<u32>,
    blocks: Vec<f64>,
}

impl ViscosityOperator {
    pub fn zero(n_elems: usize, block: usize) -> Self {
        Self { block, n_elems, row_offsets: vec![0; n_elems + 1], cols: Vec::new(), blocks: Vec::new() }
    }

    pub fn is_zero(&self) -> bool {
        self.cols.is_empty()
    }

    pub fn nnz_blocks(&self) -> usize {
        self.cols.len()
    }

    /// `y = A x`.
    pub fn apply(&self, x: &[f64], y: &mut [f64]) {
        let b = self.block;
        y.iter_mut().for_each(|v| *v = 0.0);
        for r in 0..self.n_elems {
            let xr = &x[r * b..(r + 1) * b];
            for p in self.row_offsets[r]..self.row_offsets[r + 1] {
                let c = self.cols[p] as usize;
                let blk = &self.blocks[p * b * b..(p + 1) * b * b];
                let (lo, hi) = y.split_at_mut(r * b);
                let yr = &mut hi[..b];
                for (yv, row) in yr.iter_mut().zip(blk.chunks_exact(b)) {
                    *yv += dot4(row, &x[c * b..(c + 1) * b]);
                }
                if c != r {
                    // Mirrored block: y_c += B^T x_r.
                    let yc = &mut lo[c * b..(c + 1) * b];
                    for (row, &xv) in blk.chunks_exact(b).zip(xr) {
                        for (yv, a) in yc.iter_mut().zip(row) {
                            *yv += a * xv;
                        }
                    }
                }
            }
        }
    }

    /// Solves `(I + gamma A) x = rhs` by CG started from `rhs`.
    pub fn solve_shifted(&self, gamma: f64, rhs: &[f64], tol: f64, max_iter: usize) -> Result<(Vec<f64>, CgOutcome)> {
        if self.is_zero() || gamma == 0.0 {
            return Ok((rhs.to_vec(), CgOutcome { iterations: 0, residual: 0.0 }));
        }
        let mut ax = vec![0.0; rhs.len()];
        cg_solve(
            |x, y| {
                self.apply(x, &mut ax);
                y.iter_mut().zip(x).zip(&ax).for_each(|((o, a), b)| *o = a + gamma * b);
            },
            rhs,
            rhs,
            tol,
            max_iter,
        )
    }

    /// Dense block `A[row, col]` (row-major, local row index first), if nonzero.
    /// Only blocks with `col <= row` are stored; the others are transposed copies.
    pub fn block(&self, row: usize, col: usize) -> Option<Vec<f64>> {
        let b = self.block;
        let (r, c) = if col <= row { (row, col) } else { (col, row) };
        let p = (self.row_offsets[r]..self.row_offsets[r + 1]).find(|&p| self.cols[p] as usize == c)?;
        let blk = &self.blocks[p * b * b..(p + 1) * b * b];
        if col <= row {
            return Some(blk.to_vec());
        }
        Some((0..b * b).map(|f| blk[(f % b) * b + f / b]).collect())
    }
}

/// Dot product with four partial sums to break the add dependency chain.
fn dot4(a: &[f64], b: &[f64]) -> f64 {
    let mut acc = [0.0f64; 4];
    let (ha, ta) = a.split_at(a.len() / 4 * 4);
    let (hb, tb) = b.split_at(ha.len());
    for (ca, cb) in ha.chunks_exact(4).zip(hb.chunks_exact(4)) {
        for t in 0..4 {
            acc[t] += ca[t] * cb[t];
        }
    }
    let tail: f64 = ta.iter().zip(tb).map(|(x, y)| x * y).sum();
    (acc[0] + acc[1]) + (acc[2] + acc[3]) + tail
}

struct CellCache<'a> {
    alpert: &'a AlpertBasis,
    rule: GaussRule,
    map: FxHashMap<(usize, usize, usize), usize>,
    /// `(stiffness, mass)` per cached triple; `None` when identically zero.
    data: Vec<(Option<Vec<f64>>, Option<Vec<f64>>)>,
}

impl<'a> CellCache<'a> {
    fn get(&mut self, cell: Node1D, a: Node1D, b: Node1D) -> usize {
        let key = (cell.id(), a.id(), b.id());
        if let Some(&i) = self.map.get(&key) {
            return i;
        }
        let (k, m) = cell_integrals(self.alpert, &self.rule, cell, a, b);
        let tol = 1e-14;
        let nz = |v: Vec<f64>| if v.iter().any(|x| x.abs() > tol) { Some(v) } else { None };
        self.data.push((nz(k), nz(m)));
        self.map.insert(key, self.data.len() - 1);
        self.data.len() - 1
    }
}

/// Assembles `Σ_e ν_e ∫_{supp e} ∇v_a · ∇v_b` over the active elements of `grid`.
pub fn assemble_viscosity(grid: &AdaptiveGrid, alpert: &AlpertBasis, field: &ViscosityField) -> ViscosityOperator {
    let d = grid.dim();
    let n1 = alpert.local_size();
    let bs = grid.block_size();
    if field.is_empty() {
        return ViscosityOperator::zero(grid.len(), bs);
    }
    let mut cache = CellCache { alpert, rule: GaussRule::new(n1 + 1), map: FxHashMap::default(), data: Vec::new() };
    let mut index: FxHashMap<(u32, u32), usize> = FxHashMap::default();
    let mut blocks: Vec<f64> = Vec::new();
    let mut pairs: Vec<(u32, u32)> = Vec::new();
    let digits: Vec<Vec<usize>> = (0..bs)
        .map(|mut f| {
            let mut v = vec![0; d];
            for m in (0..d).rev() {
                v[m] = f % n1;
                f /= n1;
            }
            v
        })
        .collect();
    for (cell, nu) in &field.entries {
        let overlap: Vec<usize> = (0..grid.len())
            .filter(|&a| (0..d).all(|m| grid.key(a).node(m).nested_with(cell.node(m))))
            .collect();
        // Dense local tables of cached 1D integrals per dimension.
        let mut local: Vec<Vec<usize>> = vec![Vec::with_capacity(overlap.len()); d];
        let mut tables: Vec<Vec<usize>> = Vec::with_capacity(d);
        let mut sizes = Vec::with_capacity(d);
        for m in 0..d {
            let mut nodes: Vec<Node1D> = overlap.iter().map(|&a| grid.key(a).node(m)).collect();
            nodes.sort();
            nodes.dedup();
            for &a in &overlap {
                local[m].push(nodes.binary_search(&grid.key(a).node(m)).expect("present"));
            }
            let c = cell.node(m);
            let mut t = Vec::with_capacity(nodes.len() * nodes.len());
            for &p in &nodes {
                for &q in &nodes {
                    t.push(cache.get(c, p, q));
                }
            }
            sizes.push(nodes.len());
            tables.push(t);
        }
        let mut ent = Vec::with_capacity(d);
        let mut terms = Vec::with_capacity(d);
        for (ia, &a) in overlap.iter().enumerate() {
            for (ib, &b) in overlap.iter().enumerate() {
                // Lower triangle only: row b (test function), column a (trial function).
                if b < a {
                    continue;
                }
                ent.clear();
                ent.extend((0..d).map(|m| &cache.data[tables[m][local[m][ia] * sizes[m] + local[m][ib]]]));
                terms.clear();
                terms.extend((0..d).filter(|&m| ent[m].0.is_some() && (0..d).all(|q| q == m || ent[q].1.is_some())));
                if terms.is_empty() {
                    continue;
                }
                let slot = *index.entry((b as u32, a as u32)).or_insert_with(|| {
                    pairs.push((b as u32, a as u32));
                    blocks.extend(std::iter::repeat_n(0.0, bs * bs));
                    pairs.len() - 1
                });
                let blk = &mut blocks[slot * bs * bs..(slot + 1) * bs * bs];
                for &m in &terms {
                    for (j, dj) in digits.iter().enumerate() {
                        for (i, di) in digits.iter().enumerate() {
                            let mut v = *nu;
                            for q in 0..d {
                                let tab = if q == m { ent[q].0.as_ref() } else { ent[q].1.as_ref() };
                                v *= tab.expect("nonzero")[di[q] * n1 + dj[q]];
                            }
                            blk[j * bs + i] += v;
                        }
                    }
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..pairs.len()).collect();
    order.sort_unstable_by_key(|&p| pairs[p]);
    let mut row_offsets = vec![0usize; grid.len() + 1];
    for &(r, _) in &pairs {
        row_offsets[r as usize + 1] += 1;
    }
    for r in 0..grid.len() {
        row_offsets[r + 1] += row_offsets[r];
    }
    let mut cols = Vec::with_capacity(pairs.len());
    let mut sorted = Vec::with_capacity(blocks.len());
    for p in order {
        cols.push(pairs[p].1);
        sorted.extend_from_slice(&blocks[p * bs * bs..(p + 1) * bs * bs]);
    }
    ViscosityOperator { block: bs, n_elems: grid.len(), row_offsets, cols, blocks: sorted }
}

/// The viscous term `G = -A` with its shifted solve; CG uses the default tolerances.
impl ImplicitOperator for ViscosityOperator {
    fn apply(&self, x: &[f64], y: &mut [f64]) {
        ViscosityOperator::apply(self, x, y);
        y.iter_mut().for_each(|v| *v = -*v);
    }

    fn solve(&self, gamma: f64, rhs: &[f64]) -> Result<Vec<f64>> {
        self.solve_shifted(gamma, rhs, CG_TOL, CG_MAX_ITER).map(|(x, _)| x)
    }
}

pub const CG_TOL: f64 = 1e-10;
pub const CG_MAX_ITER: usize = 500;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct CgOutcome {
    pub iterations: usize,
    pub residual: f64,
}

/// Unpreconditioned conjugate gradients for an SPD operator, starting from `x0`.
/// Stops when `‖r‖ <= tol ‖rhs‖`.
pub fn cg_solve(
    mut apply: impl FnMut(&[f64], &mut [f64]),
    rhs: &[f64],
    x0: &[f64],
    tol: f64,
    max_iter: usize,
) -> Result<(Vec<f64>, CgOutcome)> {
    let n = rhs.len();
    let dot = |a: &[f64], b: &[f64]| a.iter().zip(b).map(|(x, y)| x * y).sum::<f64>();
    let bnorm = dot(rhs, rhs).sqrt();
    let mut x = x0.to_vec();
    if bnorm == 0.0 {
        return Ok((vec![0.0; n], CgOutcome { iterations: 0, residual: 0.0 }));
    }
    let mut ax = vec![0.0; n];
    apply(&x, &mut ax);
    let mut r: Vec<f64> = rhs.iter().zip(&ax).map(|(b, a)| b - a).collect();
    let mut rr = dot(&r, &r);
    if rr.sqrt() <= tol * bnorm {
        return Ok((x, CgOutcome { iterations: 0, residual: rr.sqrt() / bnorm }));
    }
    let mut p = r.clone();
    let mut ap = vec![0.0; n];
    for it in 1..=max_iter {
        apply(&p, &mut ap);
        let alpha = rr / dot(&p, &ap);
        for i in 0..n {
            x[i] += alpha * p[i];
            r[i] -= alpha * ap[i];
        }
        let rr_new = dot(&r, &r);
        if rr_new.sqrt() <= tol * bnorm {
            return Ok((x, CgOutcome { iterations: it, residual: rr_new.sqrt() / bnorm }));
        }
        let beta = rr_new / rr;
        rr = rr_new;
        for i in 0..n {
            p[i] = r[i] + beta * p[i];
        }
    }
    Err(Error::SolverStalled { iterations: max_iter, residual: rr.sqrt() / bnorm })
}

/// Boxes supporting the flagged elements.
pub fn flagged_supports(field: &ViscosityField) -> Vec<Vec<(f64, f64)>> {
    field.entries.iter().map(|(k, _)| k.support()).collect()
}
