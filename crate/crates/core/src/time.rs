//! Explicit SSP Runge-Kutta steppers and the four-stage IMEX scheme.
//!
//! All updates go through [`combine`], which forms `u + Δt Σ w_j k_j` in a fixed order
//! and skips zero weights. `ssp_rk3` is written in the Butcher form of the Shu-Osher
//! scheme, so `imex_rk3` with a vanishing implicit part follows its arithmetic exactly.

use crate::error::Result;

/// `u + dt Σ w_j k_j`, terms applied in order, zero weights skipped.
pub fn combine(u: &[f64], dt: f64, terms: &[(f64, &[f64])]) -> Vec<f64> {
    let terms: Vec<&(f64, &[f64])> = terms.iter().filter(|(w, _)| *w != 0.0).collect();
    (0..u.len())
        .map(|i| {
            let mut s = 0.0;
            for (w, k) in &terms {
                s += w * k[i];
            }
            u[i] + dt * s
        })
        .collect()
}

pub fn forward_euler<F>(u: &[f64], dt: f64, mut f: F) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let k = f(u)?;
    Ok(combine(u, dt, &[(1.0, &k)]))
}

pub fn ssp_rk2<F>(u: &[f64], dt: f64, mut f: F) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let k1 = f(u)?;
    let u1 = combine(u, dt, &[(1.0, &k1)]);
    let k2 = f(&u1)?;
    Ok(combine(u, dt, &[(0.5, &k1), (0.5, &k2)]))
}

pub fn ssp_rk3<F>(u: &[f64], dt: f64, mut f: F) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let k1 = f(u)?;
    let k2 = f(&combine(u, dt, &[(1.0, &k1)]))?;
    let k3 = f(&combine(u, dt, &[(0.25, &k1), (0.25, &k2)]))?;
    Ok(combine(u, dt, &[(1.0 / 6.0, &k1), (1.0 / 6.0, &k2), (2.0 / 3.0, &k3)]))
}

/// A linear stiff term `G` integrated implicitly.
pub trait ImplicitOperator {
    /// `y = G x`.
    fn apply(&self, x: &[f64], y: &mut [f64]);
    /// Solves `(I - gamma G) x = rhs`.
    fn solve(&self, gamma: f64, rhs: &[f64]) -> Result<Vec<f64>>;
}

#[derive(Clone, Debug, PartialEq)]
pub struct ImexTableau {
    pub explicit: [[f64; 4]; 4],
    pub implicit: [[f64; 4]; 4],
    pub w_explicit: [f64; 4],
    pub w_implicit: [f64; 4],
}

impl ImexTableau {
    pub const ALPHA: f64 = 0.24169426078821;
    pub const BETA: f64 = 0.06042356519705;
    pub const ETA: f64 = 0.12915286960590;

    /// Third-order scheme whose explicit part is SSP-RK3.
    pub fn third_order() -> Self {
        let (a, b, e) = (Self::ALPHA, Self::BETA, Self::ETA);
        let w = [0.0, 1.0 / 6.0, 1.0 / 6.0, 2.0 / 3.0];
        Self {
            explicit: [[0.0; 4], [0.0; 4], [0.0, 1.0, 0.0, 0.0], [0.0, 0.25, 0.25, 0.0]],
            implicit: [
                [a, 0.0, 0.0, 0.0],
                [-a, a, 0.0, 0.0],
                [0.0, 1.0 - a, a, 0.0],
                [b, e, 0.5 - b - e - a, a],
            ],
            w_explicit: w,
            w_implicit: w,
        }
    }
}

impl Default for ImexTableau {
    fn default() -> Self {
        Self::third_order()
    }
}

/// One IMEX step. `f` is the explicit term, `g` the implicit one.
pub fn imex_rk3<F>(u: &[f64], dt: f64, mut f: F, g: &dyn ImplicitOperator, tab: &ImexTableau) -> Result<Vec<f64>>
where
    F: FnMut(&[f64]) -> Result<Vec<f64>>,
{
    let s = 4;
    let n = u.len();
    let mut fk: Vec<Option<Vec<f64>>> = vec![None; s];
    let mut gk: Vec<Vec<f64>> = Vec::with_capacity(s);
    for i in 0..s {
        let terms: Vec<(f64, &[f64])> =
            (0..i).filter_map(|j| fk[j].as_deref().map(|k| (tab.explicit[i][j], k))).collect();
        let mut rhs = combine(u, dt, &terms);
        for (j, gj) in gk.iter().enumerate() {
            let w = tab.implicit[i][j];
            if w != 0.0 {
                rhs.iter_mut().zip(gj).for_each(|(r, v)| *r += dt * (w * v));
            }
        }
        let ui = g.solve(dt * tab.implicit[i][i], &rhs)?;
        let needed = tab.w_explicit[i] != 0.0 || (i + 1..s).any(|r| tab.explicit[r][i] != 0.0);
        if needed {
            fk[i] = Some(f(&ui)?);
        }
        let mut y = vec![0.0; n];
        g.apply(&ui, &mut y);
        gk.push(y);
    }
    let terms: Vec<(f64, &[f64])> = (0..s).filter_map(|j| fk[j].as_deref().map(|k| (tab.w_explicit[j], k))).collect();
    let mut out = combine(u, dt, &terms);
    for (j, gj) in gk.iter().enumerate() {
        let w = tab.w_implicit[j];
        if w != 0.0 {
            out.iter_mut().zip(gj).for_each(|(r, v)| *r += dt * (w * v));
        }
    }
    Ok(out)
}
