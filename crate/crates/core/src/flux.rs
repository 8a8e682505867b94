//! Scalar flux functions with derivatives of all orders.

use std::f64::consts::PI;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum ScalarFlux {
    /// `f(u) = a u`.
    Linear(f64),
    /// `f(u) = u^2 / 2`.
    Burgers,
    /// `f(u) = sin u`.
    Sine,
    /// `f(u) = cos u`.
    Cosine,
}

impl ScalarFlux {
    /// `d^order f / du^order` at `u`.
    pub fn derivative(&self, order: usize, u: f64) -> f64 {
        match *self {
            ScalarFlux::Linear(a) => match order {
                0 => a * u,
                1 => a,
                _ => 0.0,
            },
            ScalarFlux::Burgers => match order {
                0 => 0.5 * u * u,
                1 => u,
                2 => 1.0,
                _ => 0.0,
            },
            ScalarFlux::Sine => match order % 4 {
                0 => u.sin(),
                1 => u.cos(),
                2 => -u.sin(),
                _ => -u.cos(),
            },
            ScalarFlux::Cosine => match order % 4 {
                0 => u.cos(),
                1 => -u.sin(),
                2 => -u.cos(),
                _ => u.sin(),
            },
        }
    }

    pub fn value(&self, u: f64) -> f64 {
        self.derivative(0, u)
    }

    /// `max |f'(u)|` over `[lo, hi]`.
    pub fn max_speed(&self, lo: f64, hi: f64) -> f64 {
        match *self {
            ScalarFlux::Linear(a) => a.abs(),
            ScalarFlux::Burgers => lo.abs().max(hi.abs()),
            // |cos| peaks at multiples of π, |sin| at odd multiples of π/2.
            ScalarFlux::Sine => peak_or_ends(lo, hi, 0.0, |u| u.cos().abs()),
            ScalarFlux::Cosine => peak_or_ends(lo, hi, 0.5 * PI, |u| u.sin().abs()),
        }
    }

    pub fn is_linear(&self) -> bool {
        matches!(self, ScalarFlux::Linear(_))
    }
}

/// 1 if `[lo, hi]` contains `shift + nπ`, else the larger end value.
fn peak_or_ends(lo: f64, hi: f64, shift: f64, g: impl Fn(f64) -> f64) -> f64 {
    let n = ((lo - shift) / PI).ceil();
    if shift + n * PI <= hi {
        1.0
    } else {
        g(lo).max(g(hi))
    }
}
