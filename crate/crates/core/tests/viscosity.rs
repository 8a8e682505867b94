use mrdg_core::basis::{AlpertBasis, Hierarchical1D, Node1D};
use mrdg_core::grid::{AdaptiveGrid, ElementKey, LevelSet};
use mrdg_core::poly::Side;
use mrdg_core::projection::{project_fixed, project_initial, ProjectionOptions};
use mrdg_core::quadrature::GaussRule;
use mrdg_core::viscosity::{
    assemble_viscosity, cg_solve, flag_viscosity, smoothness_indicator, ViscosityField, ViscosityOperator,
    ViscosityParams,
};
use nalgebra::{DMatrix, DVector};
use rand::rngs::StdRng;
use rand::{RngExt, SeedableRng};
use std::f64::consts::PI;

fn step(x: &[f64]) -> f64 {
    if x[0] > 0.23 && x[0] < 0.56 {
        1.0
    } else {
        0.0
    }
}

fn dense(op: &ViscosityOperator, n: usize) -> Vec<Vec<f64>> {
    (0..n)
        .map(|c| {
            let mut e = vec![0.0; n];
            e[c] = 1.0;
            let mut y = vec![0.0; n];
            op.apply(&e, &mut y);
            y
        })
        .collect()
}

fn field(entries: Vec<(ElementKey, f64)>) -> ViscosityField {
    ViscosityField { entries, params: ViscosityParams::default(), step: 0 }
}

#[test]
fn smooth_sine_decays_below_the_envelope() {
    let b = AlpertBasis::new(2).unwrap();
    let f = |x: &[f64]| (2.0 * PI * x[0]).sin();
    let g = project_fixed(1, &b, 8, LevelSet::Full, &f, ProjectionOptions::default()).unwrap();
    let mut margin = f64::NEG_INFINITY;
    for i in 0..g.len() {
        let l1 = g.key(i).level_l1();
        if l1 >= 2 {
            let (se, s0) = smoothness_indicator(g.coeffs(i), 2, l1);
            margin = margin.max(se - s0);
        }
    }
    println!("max s_e - s_0 for the projected sine: {margin:.3}");
    assert!(margin < 0.0);
    let mut adaptive = project_initial(1, &b, 8, 1e-6, &f, ProjectionOptions::default()).unwrap();
    assert!(flag_viscosity(&mut adaptive, ViscosityParams::default(), 0).is_empty());
}

#[test]
fn step_data_flags_exactly_the_leaves_at_jumps() {
    let b = AlpertBasis::new(2).unwrap();
    let mut g = project_initial(1, &b, 8, 1e-5, &step, ProjectionOptions::default()).unwrap();
    let fld = flag_viscosity(&mut g, ViscosityParams::default(), 3);
    assert_eq!(fld.step, 3);
    let mut want: Vec<ElementKey> = g
        .leaves()
        .into_iter()
        .map(|i| g.key(i).clone())
        .filter(|k| {
            let (a, c) = k.support()[0];
            [0.23, 0.56].iter().any(|&p| a < p && p < c)
        })
        .collect();
    let mut got: Vec<ElementKey> = fld.entries.iter().map(|(k, _)| k.clone()).collect();
    want.sort_by_key(|k| k.packed());
    got.sort_by_key(|k| k.packed());
    assert!(!got.is_empty());
    assert_eq!(got, want);
    for (k, nu) in &fld.entries {
        assert_eq!(*nu, 2.0 * 0.5f64.powi(k.level_linf() as i32));
        let i = g.find(k).unwrap();
        assert!(g.element(i).is_leaf());
        assert_eq!(g.element(i).viscosity, *nu);
    }
}

#[test]
fn level_four_leaf_gets_nu0_h() {
    let b = AlpertBasis::new(1).unwrap();
    let mut g = project_fixed(1, &b, 4, LevelSet::Full, &step, ProjectionOptions::default()).unwrap();
    let fld = flag_viscosity(&mut g, ViscosityParams::default(), 0);
    assert!(!fld.is_empty());
    assert!(fld.entries.iter().all(|(k, nu)| k.levels[0] == 4 && *nu == 0.125));
}

#[test]
fn empty_field_gives_the_zero_operator() {
    let b = AlpertBasis::new(1).unwrap();
    let g = AdaptiveGrid::with_level_set(2, 1, 3, LevelSet::Sparse).unwrap();
    let op = assemble_viscosity(&g, &b, &field(vec![]));
    assert!(op.is_zero());
    let rhs: Vec<f64> = (0..g.dof()).map(|i| i as f64).collect();
    let (x, out) = op.solve_shifted(0.3, &rhs, 1e-10, 500).unwrap();
    assert_eq!(x, rhs);
    assert!(out.iterations <= 1);
}

#[test]
fn single_cell_matches_direct_quadrature_in_one_dimension() {
    let b = AlpertBasis::new(2).unwrap();
    let n = 4;
    let g = AdaptiveGrid::with_level_set(1, 2, n, LevelSet::Full).unwrap();
    let cell = ElementKey::from_nodes(&[Node1D::new(3, 2)]);
    let nu = 0.75;
    let op = assemble_viscosity(&g, &b, &field(vec![(cell.clone(), nu)]));
    let (ca, cb) = cell.support()[0];
    let rule = GaussRule::new(6);
    let h = 0.5f64.powi(n as i32);
    let na = b.local_size();
    let scale = dense(&op, g.dof()).iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
    for r in 0..g.len() {
        for c in 0..g.len() {
            let (nr, nc) = (g.key(r).node(0), g.key(c).node(0));
            let blk = op.block(r, c);
            for i in 0..na {
                for j in 0..na {
                    let mut want = 0.0;
                    let mut x = ca;
                    while x < cb - 1e-15 {
                        want += rule.integrate(x, x + h, |t| {
                            b.eval(nr, i, t, Side::Plus, 1) * b.eval(nc, j, t, Side::Plus, 1)
                        });
                        x += h;
                    }
                    want *= nu;
                    let got = blk.as_ref().map_or(0.0, |bl| bl[i * na + j]);
                    assert!((got - want).abs() < 1e-12 * scale, "({r},{c}) [{i},{j}]: {got} vs {want}");
                }
            }
        }
    }
}

#[test]
fn single_cell_matches_direct_quadrature_in_two_dimensions() {
    let b = AlpertBasis::new(1).unwrap();
    let n = 3;
    let g = AdaptiveGrid::with_level_set(2, 1, n, LevelSet::Full).unwrap();
    let cell = ElementKey::from_nodes(&[Node1D::new(2, 1), Node1D::new(3, 0)]);
    let op = assemble_viscosity(&g, &b, &field(vec![(cell.clone(), 0.5)]));
    let sup = cell.support();
    let rule = GaussRule::new(4);
    let h = 0.5f64.powi(n as i32);
    let na = b.local_size();
    let bs = na * na;
    let scale = dense(&op, g.dof()).iter().flatten().fold(1.0f64, |m, v| m.max(v.abs()));
    let cells = |(a, c): (f64, f64)| -> Vec<(f64, f64)> {
        let mut v = Vec::new();
        let mut x = a;
        while x < c - 1e-15 {
            v.extend(rule.mapped(x, x + h));
            x += h;
        }
        v
    };
    let (px, py) = (cells(sup[0]), cells(sup[1]));
    let grad = |k: &ElementKey, f: usize, x: f64, y: f64| -> [f64; 2] {
        let (i, j) = (f / na, f % na);
        let (n0, n1) = (k.node(0), k.node(1));
        [
            b.eval(n0, i, x, Side::Plus, 1) * b.eval(n1, j, y, Side::Plus, 0),
            b.eval(n0, i, x, Side::Plus, 0) * b.eval(n1, j, y, Side::Plus, 1),
        ]
    };
    for r in 0..g.len() {
        for c in 0..g.len() {
            let blk = op.block(r, c);
            for fr in 0..bs {
                for fc in 0..bs {
                    let mut want = 0.0;
                    for &(x, wx) in &px {
                        for &(y, wy) in &py {
                            let (gr, gc) = (grad(g.key(r), fr, x, y), grad(g.key(c), fc, x, y));
                            want += wx * wy * (gr[0] * gc[0] + gr[1] * gc[1]);
                        }
                    }
                    want *= 0.5;
                    let got = blk.as_ref().map_or(0.0, |bl| bl[fr * bs + fc]);
                    assert!((got - want).abs() < 1e-12 * scale, "({r},{c}) [{fr},{fc}]: {got} vs {want}");
                }
            }
        }
    }
}

fn flagged_sparse_grid(rng: &mut StdRng) -> (AdaptiveGrid, ViscosityField) {
    let g = AdaptiveGrid::with_level_set(2, 2, 5, LevelSet::Sparse).unwrap();
    let leaves = g.leaves();
    let entries = leaves
        .iter()
        .filter(|_| rng.random_range(0.0..1.0) < 0.3)
        .map(|&i| (g.key(i).clone(), 2.0 * 0.5f64.powi(g.key(i).level_linf() as i32)))
        .collect();
    (g, field(entries))
}

#[test]
fn operator_is_symmetric_psd_and_kills_constants() {
    let mut rng = StdRng::seed_from_u64(7);
    let b = AlpertBasis::new(2).unwrap();
    let (g, fld) = flagged_sparse_grid(&mut rng);
    assert!(!fld.is_empty());
    let op = assemble_viscosity(&g, &b, &fld);
    let n = g.dof();
    let a = dense(&op, n);
    for r in 0..n {
        for c in 0..n {
            assert_eq!(a[c][r].to_bits(), a[r][c].to_bits(), "asymmetric at ({r},{c})");
        }
    }
    let mut one = vec![0.0; n];
    one[g.find(&ElementKey::root(2)).unwrap() * g.block_size()] = 1.0;
    let mut y = vec![0.0; n];
    op.apply(&one, &mut y);
    assert!(y.iter().all(|v| v.abs() < 1e-12));
    let scale = a.iter().flatten().fold(0.0f64, |m, v| m.max(v.abs()));
    for _ in 0..100 {
        let x: Vec<f64> = (0..n).map(|_| rng.random_range(-1.0..1.0)).collect();
        op.apply(&x, &mut y);
        let q: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
        assert!(q >= -1e-12 * scale * n as f64, "{q}");
    }
}

#[test]
fn implicit_viscous_solve_dissipates() {
    let mut rng = StdRng::seed_from_u64(11);
    let b = AlpertBasis::new(2).unwrap();
    let (g, fld) = flagged_sparse_grid(&mut rng);
    let op = assemble_viscosity(&g, &b, &fld);
    let rhs: Vec<f64> = (0..g.dof()).map(|_| rng.random_range(-1.0..1.0)).collect();
    let (x, out) = op.solve_shifted(1e-3, &rhs, 1e-10, 500).unwrap();
    let nrm = |v: &[f64]| v.iter().map(|a| a * a).sum::<f64>().sqrt();
    assert!(out.iterations > 0);
    assert!(nrm(&x) <= nrm(&rhs));
    let mut ax = vec![0.0; x.len()];
    op.apply(&x, &mut ax);
    let res: Vec<f64> = x.iter().zip(&ax).zip(&rhs).map(|((a, b), c)| a + 1e-3 * b - c).collect();
    assert!(nrm(&res) <= 1e-9 * nrm(&rhs));
}

#[test]
fn cg_matches_a_dense_cholesky_factorization() {
    let mut rng = StdRng::seed_from_u64(3);
    let n = 50;
    let m = DMatrix::from_fn(n, n, |_, _| rng.random_range(-1.0..1.0));
    let a = &m * m.transpose() + DMatrix::identity(n, n) * (n as f64);
    let rhs = DVector::from_fn(n, |_, _| rng.random_range(-1.0..1.0));
    let want = a.clone().cholesky().unwrap().solve(&rhs);
    let (x, _) = cg_solve(
        |v, out| {
            let y = &a * DVector::from_column_slice(v);
            out.copy_from_slice(y.as_slice());
        },
        rhs.as_slice(),
        &vec![0.0; n],
        1e-12,
        500,
    )
    .unwrap();
    let err = x.iter().zip(want.iter()).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max);
    assert!(err < 1e-8, "{err}");
}
