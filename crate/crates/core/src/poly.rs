//! Polynomials in exact rational and floating-point form, with one-sided evaluation.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

/// Which one-sided limit to take at a breakpoint.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Side {
    /// Limit from the left, `x^-`.
    Minus,
    /// Limit from the right, `x^+`.
    Plus,
}

/// A point with a one-sided tag.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TaggedPoint {
    pub x: f64,
    pub side: Side,
}

/// Exact counterpart of [`TaggedPoint`].
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RationalPoint {
    pub x: BigRational,
    pub side: Side,
}

impl RationalPoint {
    pub fn new(num: i64, den: i64, side: Side) -> Self {
        Self { x: rat(num, den), side }
    }

    pub fn to_f64(&self) -> TaggedPoint {
        TaggedPoint { x: self.x.to_f64().expect("finite"), side: self.side }
    }
}

pub fn rat(num: i64, den: i64) -> BigRational {
    BigRational::new(BigInt::from(num), BigInt::from(den))
}

/// Dense polynomial with rational coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RPoly(pub Vec<BigRational>);

impl RPoly {
    pub fn zero() -> Self {
        RPoly(Vec::new())
    }

    pub fn monomial(p: usize) -> Self {
        let mut c = vec![BigRational::zero(); p + 1];
        c[p] = BigRational::one();
        RPoly(c)
    }

    pub fn is_zero(&self) -> bool {
        self.0.iter().all(Zero::is_zero)
    }

    pub fn eval(&self, x: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        for c in self.0.iter().rev() {
            acc = acc * x + c;
        }
        acc
    }

    pub fn derivative(&self, n: usize) -> RPoly {
        let mut c = self.0.clone();
        for _ in 0..n {
            if c.is_empty() {
                break;
            }
            c = c
                .iter()
                .enumerate()
                .skip(1)
                .map(|(m, v)| v * BigRational::from_integer(BigInt::from(m)))
                .collect();
        }
        RPoly(c)
    }

    pub fn mul(&self, other: &RPoly) -> RPoly {
        if self.0.is_empty() || other.0.is_empty() {
            return RPoly::zero();
        }
        let mut c = vec![BigRational::zero(); self.0.len() + other.0.len() - 1];
        for (i, a) in self.0.iter().enumerate() {
            for (j, b) in other.0.iter().enumerate() {
                c[i + j] += a * b;
            }
        }
        RPoly(c)
    }

    pub fn add_scaled(&mut self, other: &RPoly, s: &BigRational) {
        if self.0.len() < other.0.len() {
            self.0.resize(other.0.len(), BigRational::zero());
        }
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b * s;
        }
    }

    pub fn scale(&mut self, s: &BigRational) {
        for a in &mut self.0 {
            *a *= s;
        }
    }

    /// Exact integral over `[a, b]`.
    pub fn integrate(&self, a: &BigRational, b: &BigRational) -> BigRational {
        let mut acc = BigRational::zero();
        let mut pa = a.clone();
        let mut pb = b.clone();
        for (m, c) in self.0.iter().enumerate() {
            acc += c * (&pb - &pa) / BigRational::from_integer(BigInt::from(m + 1));
            pa *= a;
            pb *= b;
        }
        acc
    }

    pub fn to_f64(&self) -> Poly {
        let mut c: Vec<f64> = self.0.iter().map(|v| v.to_f64().expect("finite")).collect();
        while c.last() == Some(&0.0) {
            c.pop();
        }
        Poly(c)
    }

    pub fn sign_of(v: &BigRational) -> i32 {
        if v.is_zero() {
            0
        } else if v.is_positive() {
            1
        } else {
            -1
        }
    }
}

/// Solves `A X = B` exactly by Gaussian elimination; `None` if `A` is singular.
pub fn solve_exact(
    mut a: Vec<Vec<BigRational>>,
    mut b: Vec<Vec<BigRational>>,
) -> Option<Vec<Vec<BigRational>>> {
    let n = a.len();
    for col in 0..n {
        let piv = (col..n).find(|&r| !a[r][col].is_zero())?;
        a.swap(col, piv);
        b.swap(col, piv);
        let inv = BigRational::one() / &a[col][col];
        for r in 0..n {
            if r == col || a[r][col].is_zero() {
                continue;
            }
            let f = &a[r][col] * &inv;
            for c in col..n {
                let v = &a[col][c] * &f;
                a[r][c] -= v;
            }
            for c in 0..b[r].len() {
                let v = &b[col][c] * &f;
                b[r][c] -= v;
            }
        }
    }
    for r in 0..n {
        let inv = BigRational::one() / &a[r][r];
        for v in &mut b[r] {
            *v *= &inv;
        }
    }
    Some(b)
}

/// Dense polynomial with `f64` coefficients, lowest degree first.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct Poly(pub Vec<f64>);

impl Poly {
    /// Value of the `n`-th derivative at `x`.
    pub fn eval(&self, x: f64, n: usize) -> f64 {
        let c = &self.0;
        if n >= c.len() {
            return 0.0;
        }
        let mut acc = 0.0;
        for m in (n..c.len()).rev() {
            acc = acc * x + c[m] * falling(m, n);
        }
        acc
    }

    pub fn degree(&self) -> usize {
        self.0.len().saturating_sub(1)
    }
}

/// `m (m-1) ... (m-n+1)`.
fn falling(m: usize, n: usize) -> f64 {
    ((m + 1 - n)..=m).fold(1.0, |acc, v| acc * v as f64)
}

/// Piecewise polynomial on sorted breakpoints, zero outside.
#[derive(Clone, Debug, PartialEq)]
pub struct Piecewise {
    pub breaks: Vec<f64>,
    pub pieces: Vec<Poly>,
}

impl Piecewise {
    pub fn new(breaks: Vec<f64>, pieces: Vec<Poly>) -> Self {
        assert_eq!(breaks.len(), pieces.len() + 1);
        Self { breaks, pieces }
    }

    fn piece_at(&self, x: f64, side: Side) -> Option<usize> {
        let b = &self.breaks;
        let n = self.pieces.len();
        if x < b[0] || x > b[n] {
            return None;
        }
        match b.iter().position(|&v| v == x) {
            Some(i) => match side {
                Side::Minus => i.checked_sub(1),
                Side::Plus => (i < n).then_some(i),
            },
            None => Some(b.iter().position(|&v| v > x).expect("inside") - 1),
        }
    }

    /// One-sided value of the `n`-th derivative at `x`.
    pub fn eval(&self, x: f64, side: Side, n: usize) -> f64 {
        self.piece_at(x, side).map_or(0.0, |i| self.pieces[i].eval(x, n))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rational_integral_and_derivative() {
        let p = RPoly(vec![rat(1, 1), rat(-3, 1), rat(2, 1)]);
        assert_eq!(p.integrate(&rat(0, 1), &rat(1, 1)), rat(1, 6));
        assert_eq!(p.derivative(1), RPoly(vec![rat(-3, 1), rat(4, 1)]));
        assert_eq!(p.eval(&rat(1, 2)), rat(0, 1));
    }

    #[test]
    fn float_derivatives() {
        let p = Poly(vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(p.eval(2.0, 0), 1.0 + 4.0 + 12.0 + 32.0);
        assert_eq!(p.eval(2.0, 1), 2.0 + 12.0 + 48.0);
        assert_eq!(p.eval(2.0, 2), 6.0 + 48.0);
        assert_eq!(p.eval(2.0, 3), 24.0);
        assert_eq!(p.eval(2.0, 4), 0.0);
    }

    #[test]
    fn one_sided_limits() {
        let f = Piecewise::new(vec![0.0, 0.5, 1.0], vec![Poly(vec![1.0]), Poly(vec![2.0])]);
        assert_eq!(f.eval(0.5, Side::Minus, 0), 1.0);
        assert_eq!(f.eval(0.5, Side::Plus, 0), 2.0);
        assert_eq!(f.eval(0.0, Side::Minus, 0), 0.0);
        assert_eq!(f.eval(0.0, Side::Plus, 0), 1.0);
        assert_eq!(f.eval(1.0, Side::Minus, 0), 2.0);
        assert_eq!(f.eval(1.0, Side::Plus, 0), 0.0);
        assert_eq!(f.eval(1.5, Side::Plus, 0), 0.0);
    }
}
