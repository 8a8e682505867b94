//! Reference solutions for the benchmark problems.
//!
//! Burgers data are solved along characteristics. Before the shock the implicit
//! relation `u = u0(x - u t)` is solved by Newton with a bisection safeguard. For the
//! 1D data `sin(2πx) + 1/2` the entropy solution is also available after the shock: in
//! the frame moving with the mean the shock is stationary and symmetric.

use std::f64::consts::PI;

use crate::error::{Error, Result};

/// Solves `g(u) = 0` for increasing `g` on `[lo, hi]`: Newton steps, bisection when a step leaves the bracket.
fn safeguarded_newton(g: impl Fn(f64) -> (f64, f64), mut lo: f64, mut hi: f64, x0: f64) -> f64 {
    let mut u = x0.clamp(lo, hi);
    for _ in 0..200 {
        let (val, dv) = g(u);
        if val.abs() <= 1e-15 {
            return u;
        }
        if val > 0.0 {
            hi = u;
        } else {
            lo = u;
        }
        let next = u - val / dv;
        u = if dv > 0.0 && next > lo && next < hi { next } else { 0.5 * (lo + hi) };
        if hi - lo <= 1e-16 * (1.0 + u.abs()) {
            break;
        }
    }
    u
}

/// Shock formation time for `u_t + Σ (u²/2)_{x_m} = 0` with `u0 = A sin(2π Σ x_m) + c` in `d` dimensions.
pub fn burgers_breaking_time(amplitude: f64, dim: usize) -> f64 {
    1.0 / (2.0 * PI * amplitude * dim as f64)
}

/// `u0 = A sin(2π Σ x) + c` transported by Burgers' equation in `d` dimensions, pre-shock.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BurgersSine {
    pub dim: usize,
    pub amplitude: f64,
    pub offset: f64,
}

impl BurgersSine {
    pub fn initial(&self, x: &[f64]) -> f64 {
        self.amplitude * (2.0 * PI * x.iter().sum::<f64>()).sin() + self.offset
    }

    pub fn breaking_time(&self) -> f64 {
        burgers_breaking_time(self.amplitude, self.dim)
    }

    /// Solution of `u = u0(s - d u t)` with `s = Σ x_m`; errors after the shock forms.
    pub fn solve(&self, x: &[f64], t: f64) -> Result<f64> {
        if t >= self.breaking_time() {
            return Err(Error::Contract(format!("exact solution requested at t = {t} after the shock")));
        }
        let s: f64 = x.iter().sum();
        let (a, c, d) = (self.amplitude, self.offset, self.dim as f64);
        let g = |u: f64| {
            let arg = 2.0 * PI * (s - d * u * t);
            (u - a * arg.sin() - c, 1.0 + 2.0 * PI * a * d * t * arg.cos())
        };
        let u0 = a * (2.0 * PI * s).sin() + c;
        Ok(safeguarded_newton(g, c - a.abs(), c + a.abs(), u0))
    }
}

/// Entropy solution of 1D Burgers with `u0 = sin(2πx) + 1/2`, valid for all `t >= 0`.
pub fn burgers1d_entropy(x: f64, t: f64) -> f64 {
    let (a, _) = shock_state(t);
    // Zero-mean frame centred opposite the shock.
    let eta = (x - 0.5 * t + 0.5).rem_euclid(1.0) - 0.5;
    let h = |y: f64| (y + t * (2.0 * PI * y).sin() - eta, 1.0 + 2.0 * PI * t * (2.0 * PI * y).cos());
    let y = safeguarded_newton(h, -a, a, eta / (1.0 + 2.0 * PI * t));
    (2.0 * PI * y).sin() + 0.5
}

/// `(a, v*)`: characteristics from `|y| <= a` (zero-mean frame) have not entered the
/// shock, whose states are `1/2 ± v*`. Before the shock `a = 1/2`, `v* = 0`.
fn shock_state(t: f64) -> (f64, f64) {
    if t <= burgers_breaking_time(1.0, 1) {
        return (0.5, 0.0);
    }
    // Positive root of v = sin(2π v t).
    let (mut lo, mut hi) = (0.0, 1.0);
    let phi = |v: f64| (2.0 * PI * v * t).sin() - v;
    // phi > 0 just above zero, phi(1) <= 0.
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if phi(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let v = 0.5 * (lo + hi);
    (0.5 - t * v, v)
}

/// Shock position of the 1D entropy solution, or `None` before it forms.
pub fn burgers1d_shock_position(t: f64) -> Option<f64> {
    (t > burgers_breaking_time(1.0, 1)).then(|| (0.5 + 0.5 * t).rem_euclid(1.0))
}

/// Total variation over one period of the 1D entropy solution: twice the range. The
/// extremes `1/2 ± 1` survive until the characteristics carrying them reach the shock.
pub fn burgers1d_entropy_tv(t: f64) -> f64 {
    let (a, _) = shock_state(t);
    4.0 * (2.0 * PI * a.min(0.25)).sin()
}
