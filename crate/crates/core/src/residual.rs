//! Semi-discrete DG right-hand side with the Lax-Friedrichs flux.
//!
//! For each dimension `m` the flux `f_m(u_h)` is interpolated with the interpolatory
//! multiwavelets (values and derivatives at the interpolation points are obtained
//! from the jets of `u_h` by the chain rule), and the volume and averaged edge terms
//! are applied with one tensor transform. The dissipative part of the numerical flux
//! acts on `u_h` directly. Linear fluxes bypass interpolation.

use crate::basis::{InterpBasis, OperatorTables};
use crate::error::{Error, Result};
use crate::flux::ScalarFlux;
use crate::transform::{
    eval_at_interp_points, fast_kron_matvec, sweep, values_to_interp_coeffs, Part, Topology,
};

/// Evaluated right-hand side and the Lax-Friedrichs speeds used.
#[derive(Clone, Debug)]
pub struct ResidualEval {
    pub rhs: Vec<f64>,
    pub wave_speeds: Vec<f64>,
}

/// Jet of a composite function: `∂^r f(u)` from `∂^r u` for every `r` in `[0, K]^d`.
#[derive(Clone, Debug)]
pub struct JetComposer {
    size: usize,
    max_order: usize,
    factorial: Vec<f64>,
    products: Vec<(usize, usize, usize)>,
}

impl JetComposer {
    pub fn new(dim: usize, derivs: usize) -> Self {
        let nk = derivs + 1;
        let size = nk.pow(dim as u32);
        let digits = |mut i: usize| -> Vec<usize> {
            let mut d = vec![0; dim];
            for m in (0..dim).rev() {
                d[m] = i % nk;
                i /= nk;
            }
            d
        };
        let fact = |n: usize| (1..=n).map(|v| v as f64).product::<f64>();
        let factorial = (0..size).map(|i| digits(i).into_iter().map(fact).product()).collect();
        let mut products = Vec::new();
        for a in 0..size {
            for b in 0..size {
                let (da, db) = (digits(a), digits(b));
                if da.iter().zip(&db).all(|(x, y)| x + y < nk) {
                    let c = da.iter().zip(&db).fold(0, |acc, (x, y)| acc * nk + x + y);
                    products.push((a, b, c));
                }
            }
        }
        Self { size, max_order: dim * derivs, factorial, products }
    }

    pub fn size(&self) -> usize {
        self.size
    }

    /// Writes `∂^r f(u)` into `out` given `jet[r] = ∂^r u`.
    pub fn compose(&self, f: ScalarFlux, jet: &[f64], out: &mut [f64]) {
        if self.size == 1 {
            out[0] = f.value(jet[0]);
            return;
        }
        let n = self.size;
        let mut delta: Vec<f64> = (0..n).map(|r| jet[r] / self.factorial[r]).collect();
        delta[0] = 0.0;
        let mut power = vec![0.0; n];
        power[0] = 1.0;
        let mut acc = vec![0.0; n];
        let mut q_fact = 1.0;
        for q in 0..=self.max_order {
            if q > 0 {
                q_fact *= q as f64;
                let mut next = vec![0.0; n];
                for &(a, b, c) in &self.products {
                    next[c] += power[a] * delta[b];
                }
                power = next;
            }
            let c = f.derivative(q, jet[0]) / q_fact;
            for r in 0..n {
                acc[r] += c * power[r];
            }
        }
        for r in 0..n {
            out[r] = acc[r] * self.factorial[r];
        }
    }
}

/// Assembles the DG right-hand side for a fixed flux and basis.
#[derive(Clone, Debug)]
pub struct ResidualOperator<'a> {
    tables: &'a OperatorTables,
    interp: &'a InterpBasis,
    flux: Vec<ScalarFlux>,
    wave_speed_margin: f64,
    linear_shortcut: bool,
    composer: JetComposer,
    point_jets: Vec<Vec<usize>>,
    k: usize,
}

impl<'a> ResidualOperator<'a> {
    pub fn new(
        tables: &'a OperatorTables,
        interp: &'a InterpBasis,
        k: usize,
        flux: Vec<ScalarFlux>,
        wave_speed_margin: f64,
    ) -> Result<Self> {
        let dim = flux.len();
        if dim == 0 || tables.eval_alpert.src_size() != k + 1 {
            return Err(Error::Config("flux and tables do not match".into()));
        }
        let np = interp.num_points();
        let nk = interp.derivs() + 1;
        let n = np * nk;
        // For each point tuple, the block offsets of its derivative tuples.
        let mut point_jets = Vec::new();
        for p in 0..np.pow(dim as u32) {
            let pd = digits(p, np, dim);
            let jets = (0..nk.pow(dim as u32))
                .map(|r| {
                    let rd = digits(r, nk, dim);
                    (0..dim).fold(0, |acc, m| acc * n + pd[m] * nk + rd[m])
                })
                .collect();
            point_jets.push(jets);
        }
        let linear_shortcut = flux.iter().all(ScalarFlux::is_linear);
        Ok(Self {
            tables,
            interp,
            composer: JetComposer::new(dim, interp.derivs()),
            flux,
            wave_speed_margin,
            linear_shortcut,
            point_jets,
            k,
        })
    }

    /// Forces the interpolation path even for linear fluxes.
    pub fn with_linear_shortcut(mut self, on: bool) -> Self {
        self.linear_shortcut = on && self.flux.iter().all(ScalarFlux::is_linear);
        self
    }

    pub fn dim(&self) -> usize {
        self.flux.len()
    }

    pub fn evaluate(&self, topo: &Topology, coeffs: &[f64]) -> Result<ResidualEval> {
        let d = self.dim();
        if topo.dim() != d {
            return Err(Error::Contract("grid dimension does not match the flux".into()));
        }
        let na = self.k + 1;
        let shape_a = vec![na; d];
        let mut rhs = vec![0.0; coeffs.len()];
        let wave_speeds;
        if self.linear_shortcut {
            wave_speeds = self.flux.iter().map(|f| f.max_speed(0.0, 0.0)).collect::<Vec<_>>();
            for m in 0..d {
                let ScalarFlux::Linear(a) = self.flux[m] else { unreachable!() };
                let mut t = vec![0.0; rhs.len()];
                sweep(topo, m, Part::Full, &self.tables.alpert_flux, &shape_a, coeffs, &mut t);
                rhs.iter_mut().zip(&t).for_each(|(r, v)| *r += a * v);
            }
        } else {
            let vals = eval_at_interp_points(topo, self.tables, coeffs)?;
            let (lo, hi) = self.value_range(&vals);
            let pad = self.wave_speed_margin * (hi - lo);
            wave_speeds = self.flux.iter().map(|f| f.max_speed(lo - pad, hi + pad)).collect();
            let mut cache: Vec<(ScalarFlux, Vec<f64>)> = Vec::new();
            for m in 0..d {
                let f = self.flux[m];
                if !cache.iter().any(|(g, _)| *g == f) {
                    let mut fv = self.flux_values(f, &vals);
                    values_to_interp_coeffs(topo, self.tables, &mut fv);
                    cache.push((f, fv));
                }
                let fc = &cache.iter().find(|(g, _)| *g == f).expect("cached").1;
                let mut ops = vec![&self.tables.mass_cross; d];
                ops[m] = &self.tables.flux_volume;
                let part = fast_kron_matvec(topo, fc, &ops, m)?;
                rhs.iter_mut().zip(&part).for_each(|(r, v)| *r += v);
            }
        }
        for m in 0..d {
            let c = wave_speeds[m];
            if c == 0.0 {
                continue;
            }
            let mut t = vec![0.0; rhs.len()];
            sweep(topo, m, Part::Full, &self.tables.jump, &shape_a, coeffs, &mut t);
            rhs.iter_mut().zip(&t).for_each(|(r, v)| *r -= 0.5 * c * v);
        }
        Ok(ResidualEval { rhs, wave_speeds })
    }

    fn value_range(&self, vals: &[f64]) -> (f64, f64) {
        let bs = self.point_jets.len() * self.composer.size();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for block in vals.chunks_exact(bs) {
            for jets in &self.point_jets {
                let v = block[jets[0]];
                lo = lo.min(v);
                hi = hi.max(v);
            }
        }
        (lo, hi)
    }

    fn flux_values(&self, f: ScalarFlux, vals: &[f64]) -> Vec<f64> {
        let bs = self.point_jets.len() * self.composer.size();
        let mut out = vec![0.0; vals.len()];
        let ns = self.composer.size();
        let mut jet = vec![0.0; ns];
        let mut res = vec![0.0; ns];
        for (bi, block) in vals.chunks_exact(bs).enumerate() {
            let ob = &mut out[bi * bs..(bi + 1) * bs];
            for jets in &self.point_jets {
                for (j, &o) in jets.iter().enumerate() {
                    jet[j] = block[o];
                }
                self.composer.compose(f, &jet, &mut res);
                for (j, &o) in jets.iter().enumerate() {
                    ob[o] = res[j];
                }
            }
        }
        out
    }

    pub fn interp(&self) -> &InterpBasis {
        self.interp
    }
}

fn digits(mut i: usize, base: usize, dim: usize) -> Vec<usize> {
    let mut d = vec![0; dim];
    for m in (0..dim).rev() {
        d[m] = i % base;
        i /= base;
    }
    d
}
