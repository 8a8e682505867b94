//! Basis properties: orthonormality and vanishing moments of the Alpert family, the
//! interpolation (delta) property of the interpolatory families, and exact agreement
//! with closed-form reference expressions.

use mrdg_core::basis::{AlpertBasis, Hierarchical1D, InterpBasis, InterpFamily, Node1D};
use mrdg_core::poly::{rat, RPoly, Side};
use mrdg_core::quadrature::GaussRule;
use num_rational::BigRational;

/// `num/den * x + c_num/c_den`.
fn lin(a: (i64, i64), b: (i64, i64)) -> RPoly {
    RPoly(vec![rat(b.0, b.1), rat(a.0, a.1)])
}

fn prod(c: (i64, i64), factors: &[RPoly]) -> RPoly {
    let mut p = RPoly(vec![rat(c.0, c.1)]);
    for f in factors {
        p = p.mul(f);
    }
    p
}

fn x() -> RPoly {
    lin((1, 1), (0, 1))
}

fn trimmed(p: &RPoly) -> Vec<BigRational> {
    let mut v = p.0.clone();
    while v.last().is_some_and(|c| *c == rat(0, 1)) {
        v.pop();
    }
    v
}

fn same(a: &RPoly, b: &RPoly) -> bool {
    trimmed(a) == trimmed(b)
}

enum Half {
    L,
    R,
}

fn check_psi(b: &InterpBasis, c: usize, half: Half, want: RPoly) {
    let (l, r) = b.psi_exact(c);
    let (on, off) = match half {
        Half::L => (l, r),
        Half::R => (r, l),
    };
    assert!(same(on, &want), "{:?} M={} psi {c}: {:?}", b.family(), b.m(), on);
    assert!(off.is_zero(), "psi {c} must vanish on the other half");
}

fn check_phi(b: &InterpBasis, c: usize, want: RPoly) {
    assert!(same(b.phi_exact(c), &want), "{:?} M={} phi {c}", b.family(), b.m());
}

#[test]
fn lagrange_inner_closed_forms() {
    let b = InterpBasis::new(InterpFamily::LagrangeInner, 1).unwrap();
    check_phi(&b, 0, lin((-3, 1), (2, 1)));
    check_phi(&b, 1, lin((3, 1), (-1, 1)));
    check_psi(&b, 0, Half::L, lin((-6, 1), (2, 1)));
    check_psi(&b, 1, Half::R, lin((6, 1), (-4, 1)));

    let b = InterpBasis::new(InterpFamily::LagrangeInner, 2).unwrap();
    let (f32_, f31, f61, f65, f127) =
        (lin((3, 1), (-2, 1)), lin((3, 1), (-1, 1)), lin((6, 1), (-1, 1)), lin((6, 1), (-5, 1)), lin((12, 1), (-7, 1)));
    check_phi(&b, 0, prod((4, 3), &[f32_.clone(), f31.clone()]));
    check_phi(&b, 1, prod((-1, 1), &[f32_.clone(), f61.clone()]));
    check_phi(&b, 2, prod((1, 3), &[f31.clone(), f61.clone()]));
    check_psi(&b, 0, Half::L, prod((8, 3), &[f31, f61]));
    check_psi(&b, 1, Half::R, prod((8, 3), &[f32_.clone(), f65]));
    check_psi(&b, 2, Half::R, prod((2, 3), &[f32_, f127]));

    let b = InterpBasis::new(InterpFamily::LagrangeInner, 3).unwrap();
    let f = |a: i64, c: i64| lin((a, 1), (-c, 1));
    check_phi(&b, 0, prod((-1, 6), &[f(5, 4), f(5, 3), f(5, 2)]));
    check_phi(&b, 1, prod((1, 2), &[f(5, 4), f(5, 3), f(5, 1)]));
    check_phi(&b, 2, prod((-1, 2), &[f(5, 4), f(5, 2), f(5, 1)]));
    check_phi(&b, 3, prod((1, 6), &[f(5, 3), f(5, 2), f(5, 1)]));
    check_psi(&b, 0, Half::L, prod((-2, 3), &[f(5, 2), f(5, 1), f(10, 3)]));
    check_psi(&b, 1, Half::L, prod((-2, 1), &[f(5, 2), f(5, 1), f(10, 1)]));
    check_psi(&b, 2, Half::R, prod((2, 1), &[f(5, 4), f(5, 3), f(10, 9)]));
    check_psi(&b, 3, Half::R, prod((2, 3), &[f(5, 4), f(5, 3), f(10, 7)]));
}

#[test]
fn lagrange_interface_closed_forms() {
    let f = |a: i64, c: (i64, i64)| lin((a, 1), (-c.0, c.1));
    let b = InterpBasis::new(InterpFamily::LagrangeInterface, 1).unwrap();
    check_phi(&b, 0, lin((-1, 1), (1, 1)));
    check_phi(&b, 1, x());
    check_psi(&b, 0, Half::L, lin((2, 1), (0, 1)));
    check_psi(&b, 1, Half::R, lin((-2, 1), (2, 1)));

    let b = InterpBasis::new(InterpFamily::LagrangeInterface, 2).unwrap();
    check_phi(&b, 0, prod((2, 1), &[f(1, (1, 2)), f(1, (1, 1))]));
    check_phi(&b, 1, prod((-4, 1), &[x(), f(1, (1, 1))]));
    check_phi(&b, 2, prod((2, 1), &[x(), f(1, (1, 2))]));
    check_psi(&b, 0, Half::L, prod((-16, 1), &[x(), f(1, (1, 2))]));
    check_psi(&b, 1, Half::R, prod((8, 1), &[f(1, (3, 4)), f(1, (1, 1))]));
    check_psi(&b, 2, Half::R, prod((-16, 1), &[f(1, (1, 2)), f(1, (1, 1))]));

    let b = InterpBasis::new(InterpFamily::LagrangeInterface, 3).unwrap();
    let g = |a: i64, c: i64| lin((a, 1), (-c, 1));
    check_phi(&b, 0, prod((-1, 1), &[g(1, 1), g(2, 1), g(4, 1)]));
    check_phi(&b, 1, prod((32, 3), &[x(), g(1, 1), g(2, 1)]));
    check_phi(&b, 2, prod((-4, 1), &[x(), g(1, 1), g(4, 1)]));
    check_phi(&b, 3, prod((1, 3), &[x(), g(2, 1), g(4, 1)]));
    check_psi(&b, 0, Half::L, prod((64, 3), &[x(), g(2, 1), g(4, 1)]));
    check_psi(&b, 1, Half::R, prod((-2, 1), &[g(1, 1), g(4, 3), g(8, 5)]));
    check_psi(&b, 2, Half::R, prod((64, 3), &[g(1, 1), g(2, 1), g(4, 3)]));
    check_psi(&b, 3, Half::R, prod((-8, 1), &[g(1, 1), g(2, 1), g(8, 5)]));
}

#[test]
fn hermite_closed_forms() {
    let g = |a: i64, c: i64| lin((a, 1), (-c, 1));
    let sq = |p: RPoly| p.mul(&p);
    let cube = |p: RPoly| p.mul(&p).mul(&p);

    let b = InterpBasis::new(InterpFamily::Hermite, 3).unwrap();
    // Local index i * 2 + l for point i and derivative order l.
    check_phi(&b, 0, prod((1, 1), &[sq(g(1, 1)), lin((2, 1), (1, 1))]));
    check_phi(&b, 2, prod((-1, 1), &[sq(x()), g(2, 3)]));
    check_phi(&b, 1, prod((1, 1), &[x(), sq(g(1, 1))]));
    check_phi(&b, 3, prod((1, 1), &[sq(x()), g(1, 1)]));
    check_psi(&b, 0, Half::L, prod((-4, 1), &[sq(x()), g(4, 3)]));
    check_psi(&b, 2, Half::R, prod((4, 1), &[sq(g(1, 1)), g(4, 1)]));
    check_psi(&b, 1, Half::L, prod((2, 1), &[sq(x()), g(2, 1)]));
    check_psi(&b, 3, Half::R, prod((2, 1), &[sq(g(1, 1)), g(2, 1)]));

    let b = InterpBasis::new(InterpFamily::Hermite, 5).unwrap();
    let quad = |a: i64, bb: i64, c: i64| RPoly(vec![rat(c, 1), rat(bb, 1), rat(a, 1)]);
    // Local index i * 3 + l.
    check_phi(&b, 0, prod((-1, 1), &[cube(g(1, 1)), quad(6, 3, 1)]));
    check_phi(&b, 1, prod((-1, 1), &[x(), cube(g(1, 1)), lin((3, 1), (1, 1))]));
    check_phi(&b, 2, prod((-1, 2), &[sq(x()), cube(g(1, 1))]));
    check_phi(&b, 3, prod((1, 1), &[cube(x()), quad(6, -15, 10)]));
    check_phi(&b, 4, prod((-1, 1), &[cube(x()), g(1, 1), g(3, 4)]));
    check_phi(&b, 5, prod((1, 2), &[cube(x()), sq(g(1, 1))]));
    check_psi(&b, 0, Half::L, prod((16, 1), &[cube(x()), quad(12, -15, 5)]));
    check_psi(&b, 3, Half::R, prod((-16, 1), &[cube(g(1, 1)), quad(12, -9, 2)]));
    check_psi(&b, 1, Half::L, prod((-8, 1), &[cube(x()), g(2, 1), g(3, 2)]));
    check_psi(&b, 4, Half::R, prod((-8, 1), &[cube(g(1, 1)), g(2, 1), g(3, 1)]));
    check_psi(&b, 2, Half::L, prod((1, 1), &[cube(x()), sq(g(2, 1))]));
    check_psi(&b, 5, Half::R, prod((-1, 1), &[cube(g(1, 1)), sq(g(2, 1))]));
}

fn all_families() -> Vec<InterpBasis> {
    let mut v = Vec::new();
    for m in 1..=4 {
        v.push(InterpBasis::new(InterpFamily::LagrangeInner, m).unwrap());
    }
    for m in 1..=3 {
        v.push(InterpBasis::new(InterpFamily::LagrangeInterface, m).unwrap());
    }
    for m in [3, 5] {
        v.push(InterpBasis::new(InterpFamily::Hermite, m).unwrap());
    }
    v
}

#[test]
fn delta_property_through_level_four() {
    for b in all_families() {
        let n = b.local_size();
        for src in Node1D::all(5) {
            for tgt in Node1D::all(5).filter(|t| t.level <= src.level) {
                for (c, (p, r)) in b.functionals(tgt).into_iter().enumerate() {
                    for i in 0..n {
                        let v = b.eval(src, i, p.x, p.side, r);
                        let want = if src == tgt && i == c { 1.0 } else { 0.0 };
                        assert!((v - want).abs() < 1e-12, "{:?} M={} {src:?} {tgt:?} i={i} c={c}: {v}", b.family(), b.m());
                    }
                }
            }
        }
    }
}

#[test]
fn interpolation_reproduces_degree_m_polynomials() {
    // The level-0 part alone interpolates monomials up to degree M exactly.
    for b in all_families() {
        let m = b.m();
        let f = |x: f64, r: usize| -> f64 {
            if r > m {
                0.0
            } else {
                ((m + 1 - r)..=m).fold(1.0, |a, v| a * v as f64) * x.powi((m - r) as i32)
            }
        };
        let funcs = b.functionals(Node1D::ROOT);
        for &xq in &[0.13, 0.5, 0.77] {
            let approx: f64 = funcs.iter().enumerate().map(|(c, (p, r))| f(p.x, *r) * b.eval(Node1D::ROOT, c, xq, Side::Plus, 0)).sum();
            assert!((approx - xq.powi(m as i32)).abs() < 1e-12);
        }
    }
}

fn alpert_gram(k: usize, max_level: u32) -> (Vec<(Node1D, usize)>, Vec<f64>) {
    let b = AlpertBasis::new(k).unwrap();
    let rule = GaussRule::new(k + 2);
    let fine = 1usize << max_level;
    let funcs: Vec<(Node1D, usize)> = Node1D::all(max_level).flat_map(|n| (0..=k).map(move |i| (n, i))).collect();
    let nf = funcs.len();
    let mut g = vec![0.0; nf * nf];
    for c in 0..fine {
        let (a, bb) = (c as f64 / fine as f64, (c + 1) as f64 / fine as f64);
        for (x, w) in rule.mapped(a, bb) {
            let vals: Vec<f64> = funcs.iter().map(|&(n, i)| b.eval(n, i, x, Side::Plus, 0)).collect();
            for p in 0..nf {
                if vals[p] == 0.0 {
                    continue;
                }
                for q in 0..nf {
                    g[p * nf + q] += w * vals[p] * vals[q];
                }
            }
        }
    }
    (funcs, g)
}

#[test]
fn alpert_orthonormal_through_level_four() {
    for k in 0..=3 {
        let (funcs, g) = alpert_gram(k, 5);
        let nf = funcs.len();
        for p in 0..nf {
            for q in 0..nf {
                let want = if p == q { 1.0 } else { 0.0 };
                assert!((g[p * nf + q] - want).abs() < 1e-12, "k={k} {:?} {:?}", funcs[p], funcs[q]);
            }
        }
    }
}

#[test]
fn alpert_wavelets_have_vanishing_moments() {
    for k in 0..=3 {
        let b = AlpertBasis::new(k).unwrap();
        let rule = GaussRule::new(k + 3);
        for node in Node1D::all(5).filter(|n| n.level > 0) {
            let (a, c) = node.support();
            let mid = 0.5 * (a + c);
            for i in 0..=k {
                for p in 0..=k {
                    let f = |x: f64| b.eval(node, i, x, Side::Plus, 0) * x.powi(p as i32);
                    let m = rule.integrate(a, mid, f) + rule.integrate(mid, c, f);
                    assert!(m.abs() < 1e-12, "k={k} {node:?} i={i} p={p}: {m}");
                }
            }
        }
    }
}

#[test]
fn alpert_extra_moments_for_higher_wavelets() {
    let k = 2;
    let b = AlpertBasis::new(k).unwrap();
    let rule = GaussRule::new(6);
    for i in 1..=k {
        for p in k + 1..=k + i {
            let f = |x: f64| b.wavelet(i).eval(x, Side::Plus, 0) * x.powi(p as i32);
            let m = rule.integrate(0.0, 0.5, f) + rule.integrate(0.5, 1.0, f);
            assert!(m.abs() < 1e-13, "i={i} p={p}: {m}");
        }
    }
}

#[test]
fn alpert_sign_convention() {
    for k in 0..=3 {
        let b = AlpertBasis::new(k).unwrap();
        for i in 0..=k {
            let w = b.wavelet(i);
            let first = (0..=k).map(|r| w.eval(1.0, Side::Minus, r)).find(|v| v.abs() > 1e-12).unwrap();
            assert!(first > 0.0);
        }
    }
}
