//! L2 projection of initial data onto the multiwavelet space.
//!
//! Coefficients are plain integrals `∫ u0 v` because the basis is orthonormal. Each
//! element is integrated cell by cell on its native scale (the halves of its support),
//! bisecting until a once-refined Gauss rule agrees with the unrefined one.

use crate::basis::{AlpertBasis, Hierarchical1D, Node1D};
use crate::error::{Error, Result};
use crate::grid::{level_set_keys, AdaptiveGrid, ElementKey, LevelSet};
use crate::poly::Side;
use crate::quadrature::GaussRule;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ProjectionOptions {
    pub tol: f64,
    pub points: usize,
    /// Bisection stops at width `2^{-(N + extra_levels)}`.
    pub extra_levels: u32,
    /// Fail instead of accepting the finest estimate when bisection bottoms out.
    pub strict: bool,
}

impl Default for ProjectionOptions {
    fn default() -> Self {
        Self { tol: 1e-10, points: 10, extra_levels: 4, strict: false }
    }
}

/// Initial data on the unit box.
pub type InitialData<'a> = &'a (dyn Fn(&[f64]) -> f64 + Sync);

struct Projector<'a> {
    alpert: &'a AlpertBasis,
    rule: GaussRule,
    opts: ProjectionOptions,
    min_width: f64,
    f: InitialData<'a>,
}

impl Projector<'_> {
    fn gauss(&self, key: &ElementKey, boxed: &[(f64, f64)]) -> Vec<f64> {
        let d = key.dim();
        let n1 = self.alpert.local_size();
        let np = self.rule.len();
        // Per dimension: mapped points, weights, basis values [local][point].
        let mut pts = Vec::with_capacity(d);
        let mut vals = Vec::with_capacity(d);
        for (m, &(a, b)) in boxed.iter().enumerate() {
            let pw: Vec<(f64, f64)> = self.rule.mapped(a, b).collect();
            let node = key.node(m);
            let v: Vec<f64> = (0..n1)
                .flat_map(|i| pw.iter().map(move |&(x, _)| (i, x)))
                .map(|(i, x)| self.alpert.eval(node, i, x, Side::Plus, 0))
                .collect();
            pts.push(pw);
            vals.push(v);
        }
        let total = np.pow(d as u32);
        let bs = n1.pow(d as u32);
        let mut out = vec![0.0; bs];
        let mut x = vec![0.0; d];
        let mut q = vec![0usize; d];
        for flat in 0..total {
            let mut r = flat;
            let mut w = 1.0;
            for m in (0..d).rev() {
                q[m] = r % np;
                r /= np;
                x[m] = pts[m][q[m]].0;
                w *= pts[m][q[m]].1;
            }
            let fw = w * (self.f)(&x);
            if fw == 0.0 {
                continue;
            }
            for (c, o) in out.iter_mut().enumerate() {
                let mut r = c;
                let mut p = fw;
                for m in (0..d).rev() {
                    p *= vals[m][(r % n1) * np + q[m]];
                    r /= n1;
                }
                *o += p;
            }
        }
        out
    }

    fn split(&self, boxed: &[(f64, f64)]) -> Option<Vec<Vec<(f64, f64)>>> {
        let splittable: Vec<bool> = boxed.iter().map(|&(a, b)| b - a > self.min_width * (1.0 + 1e-12)).collect();
        if !splittable.iter().any(|&s| s) {
            return None;
        }
        let mut parts = vec![Vec::new()];
        for (m, &(a, b)) in boxed.iter().enumerate() {
            let halves: Vec<(f64, f64)> =
                if splittable[m] { vec![(a, 0.5 * (a + b)), (0.5 * (a + b), b)] } else { vec![(a, b)] };
            parts = parts
                .into_iter()
                .flat_map(|p: Vec<(f64, f64)>| {
                    halves.iter().map(move |&h| {
                        let mut q = p.clone();
                        q.push(h);
                        q
                    })
                })
                .collect();
        }
        Some(parts)
    }

    fn integrate(&self, key: &ElementKey, boxed: &[(f64, f64)], coarse: Vec<f64>) -> Result<Vec<f64>> {
        let Some(parts) = self.split(boxed) else {
            return Ok(coarse);
        };
        let fine: Vec<Vec<f64>> = parts.iter().map(|p| self.gauss(key, p)).collect();
        let mut sum = vec![0.0; coarse.len()];
        for v in &fine {
            sum.iter_mut().zip(v).for_each(|(s, x)| *s += x);
        }
        let diff = sum.iter().zip(&coarse).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
        if diff <= self.opts.tol {
            return Ok(sum);
        }
        if self.split(&parts[0]).is_none() {
            if self.opts.strict {
                return Err(Error::QuadratureNotConverged { element: format!("{key} on {boxed:?}"), difference: diff });
            }
            return Ok(sum);
        }
        let mut total = vec![0.0; coarse.len()];
        for (p, c) in parts.iter().zip(fine) {
            let v = self.integrate(key, p, c)?;
            total.iter_mut().zip(&v).for_each(|(s, x)| *s += x);
        }
        Ok(total)
    }

    fn element(&self, key: &ElementKey) -> Result<Vec<f64>> {
        let d = key.dim();
        let cells: Vec<Vec<(f64, f64)>> = (0..d).map(|m| native_cells(key.node(m))).collect();
        let mut out = vec![0.0; self.alpert.local_size().pow(d as u32)];
        let mut boxes = vec![Vec::new()];
        for c in &cells {
            boxes = boxes
                .into_iter()
                .flat_map(|b: Vec<(f64, f64)>| {
                    c.iter().map(move |&iv| {
                        let mut q = b.clone();
                        q.push(iv);
                        q
                    })
                })
                .collect();
        }
        for b in boxes {
            let coarse = self.gauss(key, &b);
            let v = self.integrate(key, &b, coarse)?;
            out.iter_mut().zip(&v).for_each(|(s, x)| *s += x);
        }
        Ok(out)
    }
}

/// Cells on which a 1D function is polynomial.
fn native_cells(node: Node1D) -> Vec<(f64, f64)> {
    let (a, b) = node.support();
    if node.level == 0 {
        vec![(a, b)]
    } else {
        vec![(a, 0.5 * (a + b)), (0.5 * (a + b), b)]
    }
}

/// Coefficient block of a single element.
pub fn project_element(
    alpert: &AlpertBasis,
    key: &ElementKey,
    f: InitialData<'_>,
    max_level: u32,
    opts: ProjectionOptions,
) -> Result<Vec<f64>> {
    projector(alpert, f, max_level, opts).element(key)
}

fn projector<'a>(alpert: &'a AlpertBasis, f: InitialData<'a>, max_level: u32, opts: ProjectionOptions) -> Projector<'a> {
    Projector {
        alpert,
        rule: GaussRule::new(opts.points),
        opts,
        min_width: 0.5f64.powi((max_level + opts.extra_levels) as i32),
        f,
    }
}

/// Overwrites every coefficient block of `grid` with the projection of `f`.
pub fn project_onto(grid: &mut AdaptiveGrid, alpert: &AlpertBasis, f: InitialData<'_>, opts: ProjectionOptions) -> Result<()> {
    let p = projector(alpert, f, grid.max_level(), opts);
    for i in 0..grid.len() {
        let v = p.element(grid.key(i))?;
        grid.coeffs_mut(i).copy_from_slice(&v);
    }
    Ok(())
}

/// Projection onto a fixed full or sparse grid.
pub fn project_fixed(
    dim: usize,
    alpert: &AlpertBasis,
    max_level: u32,
    set: LevelSet,
    f: InitialData<'_>,
    opts: ProjectionOptions,
) -> Result<AdaptiveGrid> {
    let mut grid = AdaptiveGrid::with_level_set(dim, alpert.degree_k(), max_level, set)?;
    project_onto(&mut grid, alpert, f, opts)?;
    Ok(grid)
}

/// Top-down adaptive projection: start from `|l|_∞ <= 1` and add the children of any
/// element whose block norm is `>= eps`, up to level `max_level`.
pub fn project_initial(
    dim: usize,
    alpert: &AlpertBasis,
    max_level: u32,
    eps: f64,
    f: InitialData<'_>,
    opts: ProjectionOptions,
) -> Result<AdaptiveGrid> {
    let p = projector(alpert, f, max_level, opts);
    let mut grid = AdaptiveGrid::new(dim, alpert.degree_k(), max_level)?;
    for key in level_set_keys(dim, max_level.min(1), |_| true) {
        grid.insert_with_closure(&key)?;
    }
    let mut todo: Vec<usize> = Vec::new();
    let fill = |grid: &mut AdaptiveGrid, i: usize| -> Result<()> {
        let v = p.element(grid.key(i))?;
        grid.coeffs_mut(i).copy_from_slice(&v);
        Ok(())
    };
    for i in 0..grid.len() {
        fill(&mut grid, i)?;
        todo.push(i);
    }
    while let Some(i) = todo.pop() {
        if grid.block_norm(i) < eps {
            continue;
        }
        for c in grid.key(i).children(max_level) {
            if grid.contains(&c) {
                continue;
            }
            let before = grid.len();
            grid.insert_with_closure(&c)?;
            for j in before..grid.len() {
                fill(&mut grid, j)?;
                todo.push(j);
            }
        }
    }
    Ok(grid)
}
