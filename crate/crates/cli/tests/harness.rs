use std::path::Path;
use std::process::Command;

use mrdg_cli::config::{parse_lines, RunConfig};
use mrdg_cli::experiment::{initial_data, reference_solution};
use mrdg_cli::table::{build_table, order, r_dof, r_eps, write_table, Measurement, Param};
use mrdg_cli::{exit, CliError, Example};
use mrdg_core::driver::{DtRule, TimeScheme};
use mrdg_core::exact::burgers1d_entropy;
use mrdg_core::sample::ErrorNorms;

fn pairs(s: &[&str]) -> Vec<String> {
    s.iter().map(|x| x.to_string()).collect()
}

fn norms(l2: f64) -> ErrorNorms {
    ErrorNorms { l1: l2 / 2.0, l2, linf: 2.0 * l2 }
}

fn csv_rows(bytes: &[u8]) -> Vec<Vec<String>> {
    let mut r = csv::Reader::from_reader(bytes);
    r.records().map(|rec| rec.unwrap().iter().map(String::from).collect()).collect()
}

#[test]
fn order_of_a_quartered_error_is_two() {
    assert!((order(1e-2, 2.5e-3) - 2.0).abs() < 1e-14);
    let runs = [
        Measurement { k: 2, m: 3, param: Param::Level(3), dof: 100, errors: norms(1e-2), diverged: false },
        Measurement { k: 2, m: 3, param: Param::Level(4), dof: 300, errors: norms(2.5e-3), diverged: false },
    ];
    let rows = build_table(&runs);
    assert_eq!(rows[0].l2_order, None);
    assert!((rows[1].l2_order.unwrap() - 2.0).abs() < 1e-14);
    assert!((rows[1].linf_order.unwrap() - 2.0).abs() < 1e-14);
    let mut out = Vec::new();
    write_table(&mut out, &rows).unwrap();
    let recs = csv_rows(&out);
    assert_eq!(recs.len(), 2);
    assert_eq!(recs[1][8], "2.0000");
}

#[test]
fn single_row_leaves_order_columns_empty() {
    let rows = build_table(&[Measurement { k: 1, m: 3, param: Param::Level(5), dof: 10, errors: norms(1e-3), diverged: false }]);
    let mut out = Vec::new();
    write_table(&mut out, &rows).unwrap();
    let recs = csv_rows(&out);
    assert_eq!(recs.len(), 1);
    for col in [6, 8, 10, 11, 12] {
        assert_eq!(recs[0][col], "", "column {col}");
    }
    assert_eq!(recs[0][2], "5");
}

#[test]
fn threshold_rates_follow_their_definitions() {
    // Error halves when eps drops tenfold and DoF doubles.
    let a = Measurement { k: 2, m: 3, param: Param::Eps(1e-4), dof: 1000, errors: norms(2e-4), diverged: false };
    let b = Measurement { k: 2, m: 3, param: Param::Eps(1e-5), dof: 2000, errors: norms(1e-4), diverged: false };
    let rows = build_table(&[a, b]);
    let want_eps = 2f64.ln() / 10f64.ln();
    assert!((rows[1].r_eps.unwrap() - want_eps).abs() < 1e-14);
    assert!((rows[1].r_dof.unwrap() - 1.0).abs() < 1e-14);
    assert_eq!(rows[1].l2_order, None);
    assert!((r_eps(2e-4, 1e-4, 1e-4, 1e-5) - want_eps).abs() < 1e-14);
    assert!((r_dof(2e-4, 1e-4, 1000, 2000) - 1.0).abs() < 1e-14);
}

#[test]
fn rates_need_matching_degrees() {
    let a = Measurement { k: 1, m: 3, param: Param::Level(5), dof: 10, errors: norms(1e-2), diverged: false };
    let b = Measurement { k: 2, m: 3, param: Param::Level(5), dof: 10, errors: norms(1e-3), diverged: false };
    assert_eq!(build_table(&[a, b])[1].l2_order, None);
}

#[test]
fn config_file_then_overrides() {
    let text = "# setup\nexample = burgers2d\nn = 4   # level\nfamily = lagrange-inner\nm = 2\n\ngrid=full\n";
    assert_eq!(parse_lines(text).unwrap().len(), 5);
    let cfg = RunConfig::from_sources(Some(text), &pairs(&["n=6", "k=1"])).unwrap();
    assert_eq!(cfg.example, Example::Burgers2d);
    assert_eq!(cfg.n, 6);
    assert_eq!(cfg.k, 1);
    assert_eq!(cfg.m, 2);
    assert_eq!(cfg.dt, DtRule::MeshScaled(0.1));
    assert_eq!(cfg.scheme(), TimeScheme::SspRk2);
    assert_eq!(cfg.t_final, 0.01);
}

#[test]
fn example_defaults() {
    let b = RunConfig::defaults(Example::Burgers1d);
    assert_eq!((b.n, b.eps, b.t_final, b.viscosity), (8, 1e-3, 0.2, true));
    assert_eq!(b.scheme(), TimeScheme::Imex);
    assert!((b.eta() - 1e-4).abs() < 1e-20);
    let a = RunConfig::defaults(Example::Advection1d);
    assert_eq!((a.n, a.eps, a.t_final), (8, 1e-5, 3.0));
    let k = RunConfig::defaults(Example::Kpp2d);
    assert_eq!((k.n, k.eps, k.t_final), (7, 5e-4, 0.4));
}

#[test]
fn canonical_pairs_round_trip() {
    let cfg = RunConfig::from_sources(None, &pairs(&["example=kpp2d", "n=5", "eta=1e-5", "dt=fixed:0.001", "snapshot_times=0.1,0.2"])).unwrap();
    let back: Vec<(String, String)> = cfg.to_pairs();
    let again = RunConfig::from_pairs(&back).unwrap();
    assert_eq!(again, RunConfig { eta: Some(1e-5), error_points: Some(5), probe_level: Some(5), scheme: Some(TimeScheme::Imex), ..cfg });
}

#[test]
fn invalid_configurations_are_rejected() {
    let bad = [
        vec!["n=3"],
        vec!["example=waves"],
        vec!["example=burgers1d", "colour=red"],
        vec!["example=burgers1d", "k=4"],
        vec!["example=burgers1d", "n=0"],
        vec!["example=burgers1d", "eps=1e-4", "eta=1e-3"],
        vec!["example=burgers1d", "family=hermite", "m=4"],
        vec!["example=burgers1d", "family=lagrange-interface", "m=4"],
        vec!["example=burgers1d", "scheme=rk3"],
        vec!["example=burgers1d", "dt=cfl:-1"],
        vec!["example=burgers1d", "dt=courant:1"],
        vec!["example=burgers1d", "viscosity=maybe"],
        vec!["example=burgers1d", "tag=a/b"],
        vec!["example=burgers1d", "k"],
    ];
    for b in bad {
        let e = RunConfig::from_sources(None, &pairs(&b)).unwrap_err();
        assert!(matches!(e, CliError::Config(_)), "{b:?}: {e}");
        assert_eq!(e.exit_code(), exit::CONFIG);
    }
}

#[test]
fn exit_codes_are_distinct() {
    let codes = [
        CliError::Config(String::new()).exit_code(),
        CliError::Diverged(String::new()).exit_code(),
        CliError::Solver(mrdg_core::Error::SolverStalled { iterations: 1, residual: 1.0 }).exit_code(),
        CliError::Io(String::new()).exit_code(),
        exit::SUCCESS,
    ];
    for i in 0..codes.len() {
        for j in 0..i {
            assert_ne!(codes[i], codes[j]);
        }
    }
    let stalled: CliError = mrdg_core::Error::SolverStalled { iterations: 500, residual: 1e-3 }.into();
    assert_eq!(stalled.exit_code(), exit::SOLVER);
}

#[test]
fn references_agree_with_initial_data() {
    for ex in [Example::Advection1d, Example::Burgers1d, Example::Burgers2d] {
        let u0 = initial_data(ex);
        let r = reference_solution(ex).unwrap();
        for &x in &[0.1, 0.3, 0.45, 0.8] {
            let p = vec![x; ex.dim()];
            assert!((r(&p, 0.0) - u0(&p)).abs() < 1e-13, "{ex:?} at {x}");
        }
    }
    assert!(reference_solution(Example::Kpp2d).is_none());
    let adv = reference_solution(Example::Advection1d).unwrap();
    assert_eq!(adv(&[0.3], 1.0), 1.0);
    assert_eq!(adv(&[0.6], 0.1), 1.0);
    assert_eq!(adv(&[0.7], 0.1), 0.0);
    // After the shock the 2D reference is the shifted 1D entropy solution along the diagonal at twice the time.
    let b2 = reference_solution(Example::Burgers2d).unwrap();
    for &(x, y) in &[(0.1, 0.2), (0.7, 0.9), (0.33, 0.41)] {
        let want = burgers1d_entropy((x + y + 0.2) % 1.0, 0.4) - 0.5;
        assert!((b2(&[x, y], 0.2) - want).abs() < 1e-14);
    }
    // Zero-mean data keeps a standing shock on x + y = 1/2, with odd symmetry about it.
    let (a, b) = (b2(&[0.2, 0.25], 0.2), b2(&[0.3, 0.25], 0.2));
    assert!(a > 0.1 && (a + b).abs() < 1e-10, "{a} {b}");
}

fn mrdg(dir: &Path, args: &[&str]) -> (i32, String) {
    let out = Command::new(env!("CARGO_BIN_EXE_mrdg")).args(args).env("MRDG_OUTPUT_DIR", dir).output().unwrap();
    let text = String::from_utf8_lossy(&out.stdout).to_string() + &String::from_utf8_lossy(&out.stderr);
    (out.status.code().unwrap(), text)
}

const SMALL_ADVECTION: [&str; 5] = ["example=advection1d", "n=5", "t_final=0.05", "eps=1e-4", "snapshot_times=0.02"];

#[test]
fn run_writes_deterministic_artifacts() {
    let dirs = [tempfile::tempdir().unwrap(), tempfile::tempdir().unwrap()];
    for d in &dirs {
        let mut args = vec!["run"];
        args.extend(SMALL_ADVECTION);
        let (code, text) = mrdg(d.path(), &args);
        assert_eq!(code, exit::SUCCESS, "{text}");
    }
    let files = ["summary", "dof", "probe", "grid", "snapshots", "snap0_probe", "snap0_grid"];
    for f in files {
        let name = format!("advection1d_{f}.csv");
        let a = std::fs::read(dirs[0].path().join(&name)).unwrap();
        let b = std::fs::read(dirs[1].path().join(&name)).unwrap();
        assert!(!a.is_empty());
        assert_eq!(a, b, "{name} differs between runs");
    }
    let summary = std::fs::read_to_string(dirs[0].path().join("advection1d_summary.csv")).unwrap();
    assert!(summary.contains("status,completed"));
    assert!(summary.contains("probe_level,5"));
    let probe = csv_rows(&std::fs::read(dirs[0].path().join("advection1d_probe.csv")).unwrap());
    assert_eq!(probe.len(), 32);
    let grid = std::fs::read_to_string(dirs[0].path().join("advection1d_grid.csv")).unwrap();
    assert!(grid.starts_with("l0,j0,is_leaf,norm,viscosity"));
}

#[test]
fn output_dir_key_overrides_environment() {
    let env_dir = tempfile::tempdir().unwrap();
    let key_dir = tempfile::tempdir().unwrap();
    let target = format!("output_dir={}", key_dir.path().display());
    let (code, text) = mrdg(env_dir.path(), &["run", "example=advection1d", "n=3", "t_final=0.01", "tag=here", &target]);
    assert_eq!(code, exit::SUCCESS, "{text}");
    assert!(key_dir.path().join("here_summary.csv").exists());
    assert!(!env_dir.path().join("here_summary.csv").exists());
}

#[test]
fn configuration_errors_exit_with_their_status() {
    let d = tempfile::tempdir().unwrap();
    let (code, text) = mrdg(d.path(), &["run", "example=burgers1d", "colour=red"]);
    assert_eq!(code, exit::CONFIG, "{text}");
    assert!(text.contains("unknown key"));
    let (code, _) = mrdg(d.path(), &["run", "/nonexistent/run.cfg"]);
    assert_eq!(code, exit::CONFIG);
    let (code, _) = mrdg(d.path(), &["sweep", "--over", "k=1,2", "example=burgers2d"]);
    assert_eq!(code, exit::CONFIG);
}

#[test]
fn blow_up_is_recorded_with_its_status() {
    // Discontinuous data without viscosity.
    let d = tempfile::tempdir().unwrap();
    let (code, text) = mrdg(d.path(), &["run", "example=kpp2d", "n=4", "viscosity=off", "t_final=0.1"]);
    assert_eq!(code, exit::DIVERGED, "{text}");
    let summary = std::fs::read_to_string(d.path().join("kpp2d_summary.csv")).unwrap();
    assert!(summary.contains("status,diverged"));
    assert!(summary.contains("diverged_step,"));
}

#[test]
fn sweep_writes_a_convergence_table() {
    let d = tempfile::tempdir().unwrap();
    let (code, text) = mrdg(d.path(), &["sweep", "--over", "n=3,4", "example=burgers2d", "t_final=0.002", "tag=conv"]);
    assert_eq!(code, exit::SUCCESS, "{text}");
    let rows = csv_rows(&std::fs::read(d.path().join("conv_table.csv")).unwrap());
    assert_eq!(rows.len(), 2);
    assert_eq!((rows[0][2].as_str(), rows[1][2].as_str()), ("3", "4"));
    assert_eq!(rows[0][8], "");
    let ord: f64 = rows[1][8].parse().unwrap();
    assert!(ord > 1.5, "{ord}");
    assert!(d.path().join("conv_n3_summary.csv").exists());
}

#[test]
fn batch_runs_manifest_lines_in_order() {
    let d = tempfile::tempdir().unwrap();
    std::fs::write(d.path().join("adv.cfg"), "example = advection1d\nn = 3\nt_final = 0.01\n").unwrap();
    std::fs::write(
        d.path().join("batch.txt"),
        "# two runs\nrun adv.cfg tag=first\nrun adv.cfg tag=second n=4\n\nsweep --over n=2,3 example=burgers2d t_final=0.001 tag=tab\n",
    )
    .unwrap();
    let (code, text) = mrdg(d.path(), &["batch", d.path().join("batch.txt").to_str().unwrap()]);
    assert_eq!(code, exit::SUCCESS, "{text}");
    for f in ["first_summary.csv", "second_summary.csv", "tab_table.csv"] {
        assert!(d.path().join(f).exists(), "{f}");
    }
    let second = std::fs::read_to_string(d.path().join("second_summary.csv")).unwrap();
    assert!(second.contains("n,4"));
    std::fs::write(d.path().join("bad.txt"), "show example=burgers1d\n").unwrap();
    let (code, _) = mrdg(d.path(), &["batch", d.path().join("bad.txt").to_str().unwrap()]);
    assert_eq!(code, exit::CONFIG);
}
