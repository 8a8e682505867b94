//! Interpolatory multiwavelets used to represent the flux.
//!
//! A family is determined by a point set `X0` in `[0, 1]` (with one-sided tags), the
//! number `K` of interpolated derivatives, and the new points `X1 \ X0` of the
//! refined set `X1 = X0/2 ∪ (X0+1)/2`. Level-0 functions are polynomials of degree
//! `M = (|X0|)(K+1) - 1` interpolating at `X0`; level-1 functions are piecewise degree
//! `M`, vanish on `X0` and interpolate at the new points. Everything is constructed in
//! exact arithmetic; local function `i * (K + 1) + r` pairs with point `i`, derivative `r`.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::alpert::Halves;
use super::{Hierarchical1D, Node1D};
use crate::error::{Error, Result};
use crate::poly::{rat, solve_exact, Piecewise, RPoly, RationalPoint, Side, TaggedPoint};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum InterpFamily {
    /// Lagrange interpolation at points interior to the cell.
    LagrangeInner,
    /// Lagrange interpolation including one-sided values at the cell ends.
    LagrangeInterface,
    /// Hermite interpolation of values and derivatives at the cell ends.
    Hermite,
}

impl InterpFamily {
    pub fn name(self) -> &'static str {
        match self {
            InterpFamily::LagrangeInner => "lagrange-inner",
            InterpFamily::LagrangeInterface => "lagrange-interface",
            InterpFamily::Hermite => "hermite",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "lagrange-inner" | "inner" => Some(Self::LagrangeInner),
            "lagrange-interface" | "interface" => Some(Self::LagrangeInterface),
            "hermite" => Some(Self::Hermite),
            _ => None,
        }
    }
}

#[derive(Clone, Debug)]
pub struct InterpBasis {
    family: InterpFamily,
    derivs: usize,
    x0: Vec<RationalPoint>,
    x1: Vec<RationalPoint>,
    phi_exact: Vec<RPoly>,
    psi_exact: Vec<Halves>,
    phi: Vec<Piecewise>,
    psi: Vec<Piecewise>,
    x0_f: Vec<TaggedPoint>,
    x1_f: Vec<TaggedPoint>,
}

type Pts = &'static [(i64, i64, Side)];

const P: Side = Side::Plus;
const N: Side = Side::Minus;

fn point_sets(family: InterpFamily, m: usize) -> Option<(Pts, Pts, usize)> {
    // (X0, new points of X1, K)
    let sets: (Pts, Pts, usize) = match (family, m) {
        (InterpFamily::LagrangeInner, 1) => (&[(1, 3, P), (2, 3, P)], &[(1, 6, P), (5, 6, P)], 0),
        (InterpFamily::LagrangeInner, 2) => {
            (&[(1, 6, P), (1, 3, P), (2, 3, P)], &[(1, 12, P), (7, 12, P), (5, 6, P)], 0)
        }
        (InterpFamily::LagrangeInner, 3) => (
            &[(1, 5, P), (2, 5, P), (3, 5, P), (4, 5, P)],
            &[(1, 10, P), (3, 10, P), (7, 10, P), (9, 10, P)],
            0,
        ),
        (InterpFamily::LagrangeInner, 4) => (
            &[(1, 10, P), (1, 5, P), (2, 5, P), (3, 5, P), (4, 5, P)],
            &[(1, 20, P), (3, 10, P), (11, 20, P), (7, 10, P), (9, 10, P)],
            0,
        ),
        (InterpFamily::LagrangeInterface, 1) => (&[(0, 1, P), (1, 1, N)], &[(1, 2, N), (1, 2, P)], 0),
        (InterpFamily::LagrangeInterface, 2) => {
            (&[(0, 1, P), (1, 2, N), (1, 1, N)], &[(1, 4, N), (1, 2, P), (3, 4, N)], 0)
        }
        (InterpFamily::LagrangeInterface, 3) => (
            &[(0, 1, P), (1, 4, N), (1, 2, N), (1, 1, N)],
            &[(1, 8, N), (1, 2, P), (5, 8, N), (3, 4, N)],
            0,
        ),
        (InterpFamily::Hermite, 3) => (&[(0, 1, P), (1, 1, N)], &[(1, 2, N), (1, 2, P)], 1),
        (InterpFamily::Hermite, 5) => (&[(0, 1, P), (1, 1, N)], &[(1, 2, N), (1, 2, P)], 2),
        _ => return None,
    };
    Some(sets)
}

fn to_points(p: Pts) -> Vec<RationalPoint> {
    p.iter().map(|&(a, b, s)| RationalPoint::new(a, b, s)).collect()
}

/// Row of the confluent Vandermonde matrix for `d^r/dx^r` at `x`.
fn vandermonde_row(x: &BigRational, r: usize, m: usize) -> Vec<BigRational> {
    (0..=m)
        .map(|p| {
            if p < r {
                return BigRational::zero();
            }
            let f: i64 = ((p + 1 - r)..=p).map(|v| v as i64).product();
            let mut v = BigRational::from_integer(BigInt::from(f));
            for _ in 0..p - r {
                v *= x;
            }
            v
        })
        .collect()
}

/// Polynomials of degree `m` with `d^r p_c(x_i) = delta` for conditions `c = (i, r)`.
fn dual_polys(points: &[BigRational], derivs: usize) -> Option<Vec<RPoly>> {
    let m = points.len() * (derivs + 1) - 1;
    let rows: Vec<Vec<BigRational>> = points
        .iter()
        .flat_map(|x| (0..=derivs).map(move |r| vandermonde_row(x, r, m)))
        .collect();
    let ident: Vec<Vec<BigRational>> = (0..=m)
        .map(|i| (0..=m).map(|j| if i == j { BigRational::one() } else { BigRational::zero() }).collect())
        .collect();
    let sol = solve_exact(rows, ident)?;
    Some((0..=m).map(|c| RPoly((0..=m).map(|p| sol[p][c].clone()).collect())).collect())
}

fn at_break(x: &BigRational) -> bool {
    *x == rat(0, 1) || *x == rat(1, 2) || *x == rat(1, 1)
}

fn same_point(a: &RationalPoint, b: &RationalPoint) -> bool {
    a.x == b.x && (a.side == b.side || !at_break(&a.x))
}

impl InterpBasis {
    /// Family with interpolation degree `m`.
    pub fn new(family: InterpFamily, m: usize) -> Result<Self> {
        let (x0, x1, derivs) = point_sets(family, m).ok_or_else(|| {
            Error::Construction(format!("no {} family with degree {m}", family.name()))
        })?;
        Self::from_points(family, to_points(x0), to_points(x1), derivs)
    }

    /// Generic construction from `X0`, the new points of `X1`, and `K`.
    pub fn from_points(
        family: InterpFamily,
        x0: Vec<RationalPoint>,
        x1: Vec<RationalPoint>,
        derivs: usize,
    ) -> Result<Self> {
        if x0.len() != x1.len() || x0.is_empty() {
            return Err(Error::Construction("point sets must have equal nonzero size".into()));
        }
        let half = rat(1, 2);
        let left: Vec<RationalPoint> =
            x0.iter().map(|p| RationalPoint { x: &p.x * &half, side: p.side }).collect();
        let right: Vec<RationalPoint> = x0
            .iter()
            .map(|p| RationalPoint { x: (&p.x + rat(1, 1)) * &half, side: p.side })
            .collect();
        for p in &x0 {
            if !left.iter().chain(&right).any(|q| same_point(p, q)) {
                return Err(Error::Construction("X0 is not contained in its refinement".into()));
            }
        }
        let phi_exact = dual_polys(&x0.iter().map(|p| p.x.clone()).collect::<Vec<_>>(), derivs)
            .ok_or_else(|| Error::Construction("singular level-0 interpolation".into()))?;
        let xs = |v: &[RationalPoint]| v.iter().map(|p| p.x.clone()).collect::<Vec<_>>();
        let left_duals = dual_polys(&xs(&left), derivs)
            .ok_or_else(|| Error::Construction("singular level-1 interpolation".into()))?;
        let right_duals = dual_polys(&xs(&right), derivs)
            .ok_or_else(|| Error::Construction("singular level-1 interpolation".into()))?;
        let mut psi_exact = Vec::with_capacity(phi_exact.len());
        for p in &x1 {
            if x0.iter().any(|q| same_point(p, q)) {
                return Err(Error::Construction("new point already in X0".into()));
            }
            let li = left.iter().position(|q| same_point(p, q));
            let ri = right.iter().position(|q| same_point(p, q));
            for r in 0..=derivs {
                let h = match (li, ri) {
                    (Some(i), _) => Halves { left: left_duals[i * (derivs + 1) + r].clone(), right: RPoly::zero() },
                    (None, Some(i)) => Halves { left: RPoly::zero(), right: right_duals[i * (derivs + 1) + r].clone() },
                    (None, None) => return Err(Error::Construction("new point missing from refinement".into())),
                };
                psi_exact.push(h);
            }
        }
        let phi = phi_exact.iter().map(|p| Piecewise::new(vec![0.0, 1.0], vec![p.to_f64()])).collect();
        let psi = psi_exact
            .iter()
            .map(|h| Piecewise::new(vec![0.0, 0.5, 1.0], vec![h.left.to_f64(), h.right.to_f64()]))
            .collect();
        Ok(Self {
            family,
            derivs,
            x0_f: x0.iter().map(RationalPoint::to_f64).collect(),
            x1_f: x1.iter().map(RationalPoint::to_f64).collect(),
            x0,
            x1,
            phi_exact,
            psi_exact,
            phi,
            psi,
        })
    }

    pub fn family(&self) -> InterpFamily {
        self.family
    }

    /// Interpolation degree `M`.
    pub fn m(&self) -> usize {
        self.phi.len() - 1
    }

    /// Number of interpolated derivatives `K`.
    pub fn derivs(&self) -> usize {
        self.derivs
    }

    /// Number of points `|X0|`.
    pub fn num_points(&self) -> usize {
        self.x0.len()
    }

    pub fn x0(&self) -> &[RationalPoint] {
        &self.x0
    }

    pub fn x1_new(&self) -> &[RationalPoint] {
        &self.x1
    }

    /// Exact coefficients of level-0 function `c`.
    pub fn phi_exact(&self, c: usize) -> &RPoly {
        &self.phi_exact[c]
    }

    /// Exact coefficients of level-1 function `c` on `[0, 1/2]` and `[1/2, 1]`.
    pub fn psi_exact(&self, c: usize) -> (&RPoly, &RPoly) {
        (&self.psi_exact[c].left, &self.psi_exact[c].right)
    }

    /// Interpolation functionals of `node`: one `(point, derivative order)` per local function.
    pub fn functionals(&self, node: Node1D) -> Vec<(TaggedPoint, usize)> {
        let pts: Vec<TaggedPoint> = if node.level == 0 {
            self.x0_f.clone()
        } else {
            let s = (1u64 << (node.level - 1)) as f64;
            self.x1_f
                .iter()
                .map(|p| TaggedPoint { x: (p.x + node.index as f64) / s, side: p.side })
                .collect()
        };
        pts.into_iter().flat_map(|p| (0..=self.derivs).map(move |r| (p, r))).collect()
    }
}

impl Hierarchical1D for InterpBasis {
    fn local_size(&self) -> usize {
        self.phi.len()
    }

    fn degree(&self) -> usize {
        self.m()
    }

    fn eval(&self, node: Node1D, local: usize, x: f64, side: Side, deriv: usize) -> f64 {
        if node.level == 0 {
            return self.phi[local].eval(x, side, deriv);
        }
        let s = (1u64 << (node.level - 1)) as f64;
        let t = s * x - node.index as f64;
        let r = (local % (self.derivs + 1)) as i32;
        self.psi[local].eval(t, side, deriv) * s.powi(deriv as i32 - r)
    }
}
