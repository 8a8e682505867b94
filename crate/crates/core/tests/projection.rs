use mrdg_core::basis::{AlpertBasis, Hierarchical1D, Node1D};
use mrdg_core::grid::{ElementKey, LevelSet};
use mrdg_core::poly::Side;
use mrdg_core::projection::{project_element, project_fixed, project_initial, ProjectionOptions};
use mrdg_core::quadrature::GaussRule;
use mrdg_core::Error;
use std::f64::consts::PI;

fn step(x: &[f64]) -> f64 {
    if x[0] > 0.23 && x[0] < 0.56 {
        1.0
    } else {
        0.0
    }
}

fn contains_jump(key: &ElementKey) -> bool {
    let (a, b) = key.support()[0];
    [0.23, 0.56].iter().any(|&p| a <= p && p <= b)
}

#[test]
fn constants_project_to_the_root_mode() {
    let b = AlpertBasis::new(2).unwrap();
    let g = project_initial(1, &b, 6, 1e-5, &|_| 1.0, ProjectionOptions::default()).unwrap();
    assert_eq!(g.len(), 2);
    let root = g.find(&ElementKey::root(1)).unwrap();
    assert!((g.coeffs(root)[0] - 1.0).abs() < 1e-14);
    let rest: f64 = g.all_coeffs().iter().map(|v| v.abs()).sum::<f64>() - g.coeffs(root)[0].abs();
    assert!(rest < 1e-13, "{rest}");
}

#[test]
fn element_coefficients_match_direct_quadrature() {
    let b = AlpertBasis::new(3).unwrap();
    let f = |x: f64| (3.0 * x).exp() * (5.0 * x).cos();
    let rule = GaussRule::new(24);
    for node in [Node1D::new(0, 0), Node1D::new(1, 0), Node1D::new(3, 2), Node1D::new(5, 11)] {
        let key = ElementKey::from_nodes(&[node]);
        let got = project_element(&b, &key, &|x| f(x[0]), 5, ProjectionOptions::default()).unwrap();
        let (a, c) = node.support();
        let m = 0.5 * (a + c);
        for (i, g) in got.iter().enumerate() {
            let v = |x: f64| f(x) * b.eval(node, i, x, Side::Plus, 0);
            let want = if node.level == 0 { rule.integrate(a, c, v) } else { rule.integrate(a, m, v) + rule.integrate(m, c, v) };
            assert!((g - want).abs() < 1e-12, "{node:?} {i}: {g} vs {want}");
        }
    }
}

#[test]
fn adaptive_sine_stays_within_a_small_multiple_of_eps() {
    let b = AlpertBasis::new(2).unwrap();
    let f = |x: &[f64]| (2.0 * PI * x[0]).sin();
    let eps = 1e-4;
    let adaptive = project_initial(1, &b, 8, eps, &f, ProjectionOptions::default()).unwrap();
    let full = project_fixed(1, &b, 8, LevelSet::Full, &f, ProjectionOptions::default()).unwrap();
    assert!(adaptive.len() < full.len());
    let mut err2 = 0.0;
    for i in 0..full.len() {
        let fc = full.coeffs(i);
        match adaptive.find(full.key(i)) {
            Some(j) => err2 += fc.iter().zip(adaptive.coeffs(j)).map(|(a, c)| (a - c).powi(2)).sum::<f64>(),
            None => err2 += fc.iter().map(|a| a * a).sum::<f64>(),
        }
    }
    let ratio = err2.sqrt() / eps;
    println!("adaptive-vs-full L2 error / eps = {ratio:.3}, {} of {} elements", adaptive.len(), full.len());
    assert!(ratio <= 10.0);
    assert!(adaptive.is_downward_closed());
}

#[test]
fn step_data_refines_only_at_the_jumps() {
    let b = AlpertBasis::new(2).unwrap();
    let g = project_initial(1, &b, 8, 1e-5, &step, ProjectionOptions::default()).unwrap();
    let deepest: Vec<&ElementKey> = g.keys().filter(|k| k.levels[0] == 8).collect();
    assert!(!deepest.is_empty());
    // Deepest elements are children of elements straddling a jump.
    assert!(deepest.iter().all(|k| k.parents().iter().all(contains_jump)));
    for i in 0..g.len() {
        if g.key(i).levels[0] >= 2 && g.block_norm(i) >= 1e-5 {
            assert!(contains_jump(g.key(i)), "{}", g.key(i));
        }
    }
}

#[test]
fn strict_mode_reports_the_unconverged_cell() {
    let b = AlpertBasis::new(1).unwrap();
    let opts = ProjectionOptions { strict: true, extra_levels: 2, ..Default::default() };
    let err = project_initial(1, &b, 4, 1e-5, &step, opts).unwrap_err();
    assert!(matches!(err, Error::QuadratureNotConverged { .. }), "{err}");
}

#[test]
fn two_dimensional_projection_preserves_energy() {
    let b = AlpertBasis::new(2).unwrap();
    let f = |x: &[f64]| (2.0 * PI * x[0]).sin() * (2.0 * PI * x[1]).sin();
    let g = project_fixed(2, &b, 5, LevelSet::Full, &f, ProjectionOptions::default()).unwrap();
    let e = g.l2_norm().powi(2);
    assert!(e <= 0.25 + 1e-12 && 0.25 - e < 1e-7, "{e}");
}
