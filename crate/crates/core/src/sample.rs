//! Point evaluation of `u_h` on the uniform finest mesh.
//!
//! On a cell of level `L` only one node per level and dimension is nonzero, so each
//! cell touches at most `(L+1)^d` elements, found by hash lookup.

use crate::basis::{AlpertBasis, Hierarchical1D, Node1D};
use crate::grid::{AdaptiveGrid, ElementKey};
use crate::poly::Side;
use crate::quadrature::GaussRule;

/// Visits every cell of the uniform level-`level` mesh with the values of `u_h` at the
/// tensor points `ref_pts^d` (reference coordinates in `[0,1]`, last dimension fastest).
pub fn sample_cells(
    grid: &AdaptiveGrid,
    alpert: &AlpertBasis,
    level: u32,
    ref_pts: &[f64],
    mut visit: impl FnMut(&[usize], &[f64]),
) {
    let d = grid.dim();
    let n1 = alpert.local_size();
    let nq = ref_pts.len();
    let cells = 1usize << level;
    let h = 1.0 / cells as f64;
    // vals[c][l] = values of the level-l node over cell c: [local][point].
    let vals: Vec<Vec<Vec<f64>>> = (0..cells)
        .map(|c| {
            (0..=level)
                .map(|l| {
                    let node = chain_node(c, level, l);
                    (0..n1)
                        .flat_map(|i| ref_pts.iter().map(move |&r| (i, r)))
                        .map(|(i, r)| alpert.eval(node, i, (c as f64 + r) * h, Side::Plus, 0))
                        .collect()
                })
                .collect()
        })
        .collect();
    let npts = nq.pow(d as u32);
    let mut out = vec![0.0; npts];
    let mut cell = vec![0usize; d];
    let mut levels = vec![0u32; d];
    for flat in 0..cells.pow(d as u32) {
        let mut r = flat;
        for m in (0..d).rev() {
            cell[m] = r % cells;
            r /= cells;
        }
        out.iter_mut().for_each(|v| *v = 0.0);
        let combos = (level as usize + 1).pow(d as u32);
        for lc in 0..combos {
            let mut r = lc;
            for m in (0..d).rev() {
                levels[m] = (r % (level as usize + 1)) as u32;
                r /= level as usize + 1;
            }
            if levels.iter().any(|&l| l > grid.max_level()) {
                continue;
            }
            let nodes: Vec<Node1D> = (0..d).map(|m| chain_node(cell[m], level, levels[m])).collect();
            let Some(e) = grid.find(&ElementKey::from_nodes(&nodes)) else {
                continue;
            };
            let v: Vec<&[f64]> = (0..d).map(|m| &vals[cell[m]][levels[m] as usize][..]).collect();
            accumulate(grid.coeffs(e), &v, n1, nq, &mut out);
        }
        visit(&cell, &out);
    }
}

/// `out += Σ_c coeffs[c] Π_m v_m[c_m][q_m]`, contracting the first dimension first.
fn accumulate(coeffs: &[f64], v: &[&[f64]], n1: usize, nq: usize, out: &mut [f64]) {
    let d = v.len();
    // cur has shape [q_0..q_{m-1}, c_m..c_{d-1}].
    let mut cur = coeffs.to_vec();
    let mut lead = 1usize;
    for (m, vm) in v.iter().enumerate() {
        let rest = n1.pow((d - m - 1) as u32);
        let mut next = vec![0.0; lead * nq * rest];
        for a in 0..lead {
            for c in 0..n1 {
                for q in 0..nq {
                    let w = vm[c * nq + q];
                    if w == 0.0 {
                        continue;
                    }
                    let src = &cur[(a * n1 + c) * rest..(a * n1 + c + 1) * rest];
                    let dst = &mut next[(a * nq + q) * rest..(a * nq + q + 1) * rest];
                    dst.iter_mut().zip(src).for_each(|(o, s)| *o += w * s);
                }
            }
        }
        cur = next;
        lead *= nq;
    }
    out.iter_mut().zip(&cur).for_each(|(o, c)| *o += c);
}

/// The level-`l` node whose support contains cell `c` of the level-`level` mesh.
fn chain_node(c: usize, level: u32, l: u32) -> Node1D {
    if l == 0 {
        Node1D::ROOT
    } else {
        Node1D::new(l, (c >> (level - l + 1)) as u32)
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct ErrorNorms {
    pub l1: f64,
    pub l2: f64,
    pub linf: f64,
}

/// `‖u_h − u‖` in L1, L2 and L∞ by Gauss quadrature with `k+3` points per dimension on
/// each cell of the finest mesh.
pub fn measure_errors(grid: &AdaptiveGrid, alpert: &AlpertBasis, exact: impl Fn(&[f64]) -> f64) -> ErrorNorms {
    measure_errors_with(grid, alpert, grid.degree() + 3, exact)
}

/// As [`measure_errors`] with `points` Gauss points per dimension. With `k+1` points
/// this is the discrete norm at the Gauss nodes, where the projection error superconverges.
pub fn measure_errors_with(
    grid: &AdaptiveGrid,
    alpert: &AlpertBasis,
    points: usize,
    exact: impl Fn(&[f64]) -> f64,
) -> ErrorNorms {
    let d = grid.dim();
    let level = grid.max_level();
    let rule = GaussRule::new(points);
    let h = 0.5f64.powi(level as i32);
    let nq = rule.len();
    let mut norms = ErrorNorms::default();
    let mut x = vec![0.0; d];
    let vol = h.powi(d as i32);
    sample_cells(grid, alpert, level, &rule.nodes, |cell, vals| {
        for (p, &uh) in vals.iter().enumerate() {
            let mut r = p;
            let mut w = vol;
            for m in (0..d).rev() {
                let q = r % nq;
                r /= nq;
                x[m] = (cell[m] as f64 + rule.nodes[q]) * h;
                w *= rule.weights[q];
            }
            let e = (uh - exact(&x)).abs();
            norms.l1 += w * e;
            norms.l2 += w * e * e;
            norms.linf = norms.linf.max(e);
        }
    });
    norms.l2 = norms.l2.sqrt();
    norms
}

/// Values of `u_h` at the centres of the `2^level` per-dimension probe lattice, last dimension fastest.
pub fn probe_lattice(grid: &AdaptiveGrid, alpert: &AlpertBasis, level: u32) -> Vec<f64> {
    let d = grid.dim();
    let cells = 1usize << level;
    let mut out = vec![0.0; cells.pow(d as u32)];
    sample_cells(grid, alpert, level, &[0.5], |cell, vals| {
        let idx = cell.iter().fold(0, |acc, &c| acc * cells + c);
        out[idx] = vals[0];
    });
    out
}
