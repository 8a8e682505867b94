//! Orthonormal Alpert multiwavelets on `[0, 1]`.
//!
//! Level 0 holds normalized shifted Legendre polynomials of degree `<= k`.
//! Level 1 holds `k + 1` piecewise polynomials on `[0, 1/2] | [1/2, 1]`, orthogonal to
//! the polynomials of degree `<= k`, with as many extra vanishing moments as the
//! construction allows. Finer levels are dyadic dilates and translates.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

use super::{Hierarchical1D, Node1D};
use crate::error::{Error, Result};
use crate::poly::{rat, solve_exact, Piecewise, Poly, RPoly, Side};

/// Piecewise polynomial on the two halves of `[0, 1]`, exact coefficients in the global variable.
#[derive(Clone, Debug, PartialEq, Eq)]
pub(crate) struct Halves {
    pub left: RPoly,
    pub right: RPoly,
}

impl Halves {
    fn inner(&self, other: &Halves) -> BigRational {
        let (z, h, o) = (rat(0, 1), rat(1, 2), rat(1, 1));
        self.left.mul(&other.left).integrate(&z, &h) + self.right.mul(&other.right).integrate(&h, &o)
    }

    fn both(p: RPoly) -> Halves {
        Halves { left: p.clone(), right: p }
    }

    fn axpy(&mut self, other: &Halves, s: &BigRational) {
        self.left.add_scaled(&other.left, s);
        self.right.add_scaled(&other.right, s);
    }
}

#[derive(Clone, Debug)]
pub struct AlpertBasis {
    k: usize,
    scaling: Vec<Poly>,
    wavelets: Vec<Piecewise>,
}

impl AlpertBasis {
    pub fn new(k: usize) -> Result<Self> {
        if k > 6 {
            return Err(Error::Construction(format!("degree {k} is not supported")));
        }
        let scaling = (0..=k).map(|i| legendre(i)).collect();
        let wavelets = mother_wavelets(k)?
            .into_iter()
            .map(|(f, norm2)| {
                let s = 1.0 / norm2.to_f64().expect("finite").sqrt();
                let scale = |p: &RPoly| Poly(p.to_f64().0.into_iter().map(|c| c * s).collect());
                Piecewise::new(vec![0.0, 0.5, 1.0], vec![scale(&f.left), scale(&f.right)])
            })
            .collect();
        Ok(Self { k, scaling, wavelets })
    }

    pub fn degree_k(&self) -> usize {
        self.k
    }

    /// Level-0 function `i` on `[0, 1]`.
    pub fn scaling(&self, i: usize) -> &Poly {
        &self.scaling[i]
    }

    /// Level-1 mother wavelet `i`.
    pub fn wavelet(&self, i: usize) -> &Piecewise {
        &self.wavelets[i]
    }
}

impl Hierarchical1D for AlpertBasis {
    fn local_size(&self) -> usize {
        self.k + 1
    }

    fn degree(&self) -> usize {
        self.k
    }

    fn eval(&self, node: Node1D, local: usize, x: f64, side: Side, deriv: usize) -> f64 {
        if node.level == 0 {
            let inside = match side {
                Side::Minus => x > 0.0 && x <= 1.0,
                Side::Plus => (0.0..1.0).contains(&x),
            };
            return if inside { self.scaling[local].eval(x, deriv) } else { 0.0 };
        }
        let s = (1u64 << (node.level - 1)) as f64;
        let t = s * x - node.index as f64;
        self.wavelets[local].eval(t, side, deriv) * s.sqrt() * s.powi(deriv as i32)
    }
}

/// Normalized shifted Legendre polynomial of degree `i`.
fn legendre(i: usize) -> Poly {
    let binom = |n: usize, r: usize| -> BigInt {
        (0..r).fold(BigInt::one(), |acc, m| acc * BigInt::from(n - m) / BigInt::from(m + 1))
    };
    let norm = ((2 * i + 1) as f64).sqrt();
    Poly(
        (0..=i)
            .map(|m| {
                let sign = if (i + m) % 2 == 0 { 1 } else { -1 };
                let c = BigInt::from(sign) * binom(i, m) * binom(i + m, m);
                c.to_f64().expect("finite") * norm
            })
            .collect(),
    )
}

/// Unnormalized exact mother wavelets with their squared norms.
pub(crate) fn mother_wavelets(k: usize) -> Result<Vec<(Halves, BigRational)>> {
    let (z, o) = (rat(0, 1), rat(1, 1));
    // Hilbert system for projecting onto polynomials of degree <= k.
    let gram: Vec<Vec<BigRational>> = (0..=k)
        .map(|a| (0..=k).map(|b| RPoly::monomial(a + b).integrate(&z, &o)).collect())
        .collect();
    let mut fs: Vec<Halves> = Vec::with_capacity(k + 1);
    for i in 0..=k {
        let mut h = Halves { left: RPoly::zero(), right: RPoly::monomial(i) };
        let rhs: Vec<Vec<BigRational>> =
            (0..=k).map(|m| vec![h.inner(&Halves::both(RPoly::monomial(m)))]).collect();
        let c = solve_exact(gram.clone(), rhs)
            .ok_or_else(|| Error::Construction("singular moment system".into()))?;
        for (m, cm) in c.iter().enumerate() {
            h.axpy(&Halves::both(RPoly::monomial(m)), &-cm[0].clone());
        }
        fs.push(h);
    }
    // Extra vanishing moments: f_i orthogonal to x^{k+1}, ..., x^{k+i}.
    for j in 0..k {
        let mono = Halves::both(RPoly::monomial(k + 1 + j));
        let Some(p) = (j..=k).find(|&p| !fs[p].inner(&mono).is_zero()) else { continue };
        fs.swap(j, p);
        let pivot = fs[j].inner(&mono);
        for i in j + 1..=k {
            let f = fs[i].inner(&mono) / &pivot;
            let src = fs[j].clone();
            fs[i].axpy(&src, &-f);
        }
    }
    // Gram-Schmidt from the highest index down keeps the moment structure.
    for i in (0..=k).rev() {
        for m in i + 1..=k {
            let f = fs[i].inner(&fs[m]) / fs[m].inner(&fs[m]);
            let src = fs[m].clone();
            fs[i].axpy(&src, &-f);
        }
    }
    let one = rat(1, 1);
    fs.into_iter()
        .map(|mut f| {
            let sign = (0..=k)
                .map(|n| RPoly::sign_of(&f.right.derivative(n).eval(&one)))
                .find(|&s| s != 0)
                .unwrap_or(1);
            if sign < 0 {
                f.left.scale(&rat(-1, 1));
                f.right.scale(&rat(-1, 1));
            }
            let n2 = f.inner(&f);
            if n2.is_zero() {
                return Err(Error::Construction("degenerate wavelet".into()));
            }
            Ok((f, n2))
        })
        .collect()
}
