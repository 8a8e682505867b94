//! Dimension-by-dimension transforms on downward-closed element sets.
//!
//! A tensor operator `T = T_1 ⊗ ... ⊗ T_d` restricted to an element set `G` is applied
//! by splitting every 1D factor except one into its lower part (strictly coarser
//! source) and upper part (the rest). For each of the `2^{d-1}` split patterns the
//! factors are applied one dimension at a time, upper factors first, then the
//! unsplit dimension, then the lower factors. Every intermediate index is then an
//! ancestor of the source or of the target, hence in `G`, so the result equals the
//! restriction of the full Kronecker product. Factors that couple neighbouring nodes
//! must be placed in the unsplit dimension.

use crate::basis::{Coupling, Node1D, OperatorTables, Transfer1D};
use crate::error::{Error, Result};
use crate::grid::AdaptiveGrid;

/// Element lines along each dimension, used by the 1D sweeps.
#[derive(Clone, Debug)]
pub struct Topology {
    dim: usize,
    max_level: u32,
    n_elems: usize,
    node_ids: Vec<u32>,
    fibers: Vec<Fibers>,
}

#[derive(Clone, Debug)]
struct Fibers {
    offsets: Vec<usize>,
    /// Element indices, grouped by fiber, coarsest first within a fiber.
    members: Vec<u32>,
}

impl Topology {
    pub fn new(grid: &AdaptiveGrid) -> Result<Self> {
        if !grid.is_downward_closed() {
            return Err(Error::Contract("element set is not downward-closed".into()));
        }
        let dim = grid.dim();
        let n = grid.len();
        let mut node_ids = Vec::with_capacity(n * dim);
        for key in grid.keys() {
            node_ids.extend((0..dim).map(|m| key.node(m).id() as u32));
        }
        let bits = 64 / dim as u32;
        let fibers = (0..dim)
            .map(|m| {
                let line = |e: usize| -> u64 {
                    (0..dim)
                        .filter(|&q| q != m)
                        .fold(0u64, |acc, q| acc | (node_ids[e * dim + q] as u64) << (bits * q as u32))
                };
                let mut order: Vec<(u64, u32, u32)> = (0..n)
                    .map(|e| {
                        let id = node_ids[e * dim + m];
                        (line(e), Node1D::from_id(id as usize).level, e as u32)
                    })
                    .collect();
                order.sort_unstable_by_key(|&(l, lev, e)| (l, lev, node_ids[e as usize * dim + m]));
                let mut offsets = vec![0];
                for i in 1..order.len() {
                    if order[i].0 != order[i - 1].0 {
                        offsets.push(i);
                    }
                }
                offsets.push(order.len());
                Fibers { offsets, members: order.into_iter().map(|t| t.2).collect() }
            })
            .collect();
        Ok(Self { dim, max_level: grid.max_level(), n_elems: n, node_ids, fibers })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.n_elems
    }

    pub fn is_empty(&self) -> bool {
        self.n_elems == 0
    }

    pub fn node_id(&self, e: usize, m: usize) -> usize {
        self.node_ids[e * self.dim + m] as usize
    }

    fn fibers(&self, m: usize) -> impl Iterator<Item = &[u32]> {
        let f = &self.fibers[m];
        f.offsets.windows(2).map(move |w| &f.members[w[0]..w[1]])
    }

    pub fn num_fibers(&self, m: usize) -> usize {
        self.fibers[m].offsets.len() - 1
    }
}

/// Which part of a 1D operator a sweep applies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Part {
    /// Pairs with a strictly coarser source.
    Lower,
    /// Pairs whose source is at least as fine as the target.
    Upper,
    Full,
}

/// `y[pre, t, post] += Σ_s x[pre, s, post] b[s, t]`.
#[inline]
fn contract(x: &[f64], y: &mut [f64], b: &[f64], pre: usize, s: usize, t: usize, post: usize) {
    for p in 0..pre {
        for si in 0..s {
            let xr = &x[(p * s + si) * post..(p * s + si + 1) * post];
            for ti in 0..t {
                let c = b[si * t + ti];
                if c == 0.0 {
                    continue;
                }
                let yr = &mut y[(p * t + ti) * post..(p * t + ti + 1) * post];
                for (yv, xv) in yr.iter_mut().zip(xr) {
                    *yv += c * xv;
                }
            }
        }
    }
}

fn strides(shape: &[usize], m: usize) -> (usize, usize) {
    (shape[..m].iter().product(), shape[m + 1..].iter().product())
}

/// Applies one part of `op` along dimension `m`, accumulating into `y`.
/// Returns the number of block products performed.
#[allow(clippy::too_many_arguments)]
pub fn sweep(
    topo: &Topology,
    m: usize,
    part: Part,
    op: &Transfer1D,
    shape_in: &[usize],
    x: &[f64],
    y: &mut [f64],
) -> u64 {
    assert_eq!(shape_in[m], op.src_size(), "source size mismatch along dimension {m}");
    assert!(op.max_level() >= topo.max_level, "operator table too shallow");
    let (pre, post) = strides(shape_in, m);
    let (s, t) = (op.src_size(), op.tgt_size());
    let bin = pre * s * post;
    let bout = pre * t * post;
    assert_eq!(x.len(), bin * topo.n_elems);
    assert_eq!(y.len(), bout * topo.n_elems);
    let mut slot = vec![u32::MAX; Node1D::count(topo.max_level)];
    let mut count = 0u64;
    for fiber in topo.fibers(m) {
        for &e in fiber {
            slot[topo.node_id(e as usize, m)] = e;
        }
        for &e in fiber {
            let e = e as usize;
            let id = topo.node_id(e, m);
            if part != Part::Upper {
                for &(src, blk) in op.lower_sources(id) {
                    let a = slot[src as usize];
                    if a != u32::MAX {
                        let a = a as usize;
                        contract(&x[a * bin..(a + 1) * bin], &mut y[e * bout..(e + 1) * bout], op.block(blk), pre, s, t, post);
                        count += 1;
                    }
                }
            }
            if part != Part::Lower {
                for &(tgt, blk) in op.upper_targets(id) {
                    let b = slot[tgt as usize];
                    if b != u32::MAX {
                        let b = b as usize;
                        contract(&x[e * bin..(e + 1) * bin], &mut y[b * bout..(b + 1) * bout], op.block(blk), pre, s, t, post);
                        count += 1;
                    }
                }
            }
        }
        for &e in fiber {
            slot[topo.node_id(e as usize, m)] = u32::MAX;
        }
    }
    count
}

/// Result of a counted transform.
#[derive(Clone, Debug, Default)]
pub struct KronOutput {
    pub values: Vec<f64>,
    pub block_products: u64,
}

/// Applies `ops[0] ⊗ ... ⊗ ops[d-1]` restricted to the element set, with `full_dim` unsplit.
pub fn fast_kron_matvec(
    topo: &Topology,
    x: &[f64],
    ops: &[&Transfer1D],
    full_dim: usize,
) -> Result<Vec<f64>> {
    fast_kron_matvec_counted(topo, x, ops, full_dim).map(|o| o.values)
}

pub fn fast_kron_matvec_counted(
    topo: &Topology,
    x: &[f64],
    ops: &[&Transfer1D],
    full_dim: usize,
) -> Result<KronOutput> {
    let d = topo.dim;
    if ops.len() != d || full_dim >= d {
        return Err(Error::Contract("one operator per dimension required".into()));
    }
    for (m, op) in ops.iter().enumerate() {
        if m != full_dim && op.coupling() != Coupling::Nested {
            return Err(Error::Contract(format!("neighbour-coupled operator in split dimension {m}")));
        }
    }
    let shape_in: Vec<usize> = ops.iter().map(|o| o.src_size()).collect();
    let shape_out: Vec<usize> = ops.iter().map(|o| o.tgt_size()).collect();
    let n = topo.n_elems;
    if x.len() != n * shape_in.iter().product::<usize>() {
        return Err(Error::Contract("input length does not match the element set".into()));
    }
    let mut out = vec![0.0; n * shape_out.iter().product::<usize>()];
    let mut count = 0;
    let others: Vec<usize> = (0..d).filter(|&m| m != full_dim).collect();
    for mask in 0..(1usize << others.len()) {
        let lower: Vec<usize> = others.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 1).map(|(_, &m)| m).collect();
        let upper: Vec<usize> = others.iter().enumerate().filter(|(b, _)| mask >> b & 1 == 0).map(|(_, &m)| m).collect();
        let plan = upper
            .iter()
            .map(|&m| (m, Part::Upper))
            .chain(std::iter::once((full_dim, Part::Full)))
            .chain(lower.iter().map(|&m| (m, Part::Lower)));
        let mut shape = shape_in.clone();
        let mut cur: Option<Vec<f64>> = None;
        for (m, part) in plan {
            let mut next_shape = shape.clone();
            next_shape[m] = shape_out[m];
            let mut next = vec![0.0; n * next_shape.iter().product::<usize>()];
            let src = cur.as_deref().unwrap_or(x);
            count += sweep(topo, m, part, ops[m], &shape, src, &mut next);
            cur = Some(next);
            shape = next_shape;
        }
        for (o, v) in out.iter_mut().zip(cur.expect("at least one sweep")) {
            *o += v;
        }
    }
    Ok(KronOutput { values: out, block_products: count })
}

/// Applies the lower part of a unit lower triangular `op` inverse along `m`, in place.
fn solve_lower_unit(topo: &Topology, m: usize, op: &Transfer1D, shape: &[usize], data: &mut [f64]) {
    let (pre, post) = strides(shape, m);
    let s = op.src_size();
    let b = pre * s * post;
    let mut slot = vec![u32::MAX; Node1D::count(topo.max_level)];
    let mut acc = vec![0.0; b];
    for fiber in topo.fibers(m) {
        for &e in fiber {
            slot[topo.node_id(e as usize, m)] = e;
        }
        for &e in fiber {
            let e = e as usize;
            acc.iter_mut().for_each(|v| *v = 0.0);
            for &(src, blk) in op.lower_sources(topo.node_id(e, m)) {
                let a = slot[src as usize];
                if a != u32::MAX {
                    let a = a as usize;
                    contract(&data[a * b..(a + 1) * b], &mut acc, op.block(blk), pre, s, s, post);
                }
            }
            for (v, c) in data[e * b..(e + 1) * b].iter_mut().zip(&acc) {
                *v -= c;
            }
        }
        for &e in fiber {
            slot[topo.node_id(e as usize, m)] = u32::MAX;
        }
    }
}

/// Values and derivatives of the Alpert expansion at all interpolation functionals.
pub fn eval_at_interp_points(topo: &Topology, tables: &OperatorTables, coeffs: &[f64]) -> Result<Vec<f64>> {
    let ops = vec![&tables.eval_alpert; topo.dim];
    fast_kron_matvec(topo, coeffs, &ops, topo.dim - 1)
}

/// Converts functional values into interpolatory multiwavelet coefficients, in place.
pub fn values_to_interp_coeffs(topo: &Topology, tables: &OperatorTables, values: &mut [f64]) {
    let n = tables.interp_points.src_size();
    let shape = vec![n; topo.dim];
    for m in 0..topo.dim {
        solve_lower_unit(topo, m, &tables.interp_points, &shape, values);
    }
}
