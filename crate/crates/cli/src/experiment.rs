//! Initial data, reference solutions and the run loop of each example.

use std::f64::consts::PI;

use mrdg_core::driver::{RunState, Solver, StepReport};
use mrdg_core::exact::{burgers1d_entropy, BurgersSine};
use mrdg_core::sample::{measure_errors_with, probe_lattice, ErrorNorms};

use crate::config::{Example, RunConfig};
use crate::error::CliError;

pub type Field = Box<dyn Fn(&[f64]) -> f64 + Sync>;
pub type Reference = Box<dyn Fn(&[f64], f64) -> f64 + Sync>;

const BURGERS_SINE_1D: BurgersSine = BurgersSine { dim: 1, amplitude: 1.0, offset: 0.5 };
const BURGERS_SINE_2D: BurgersSine = BurgersSine { dim: 2, amplitude: 1.0, offset: 0.0 };

fn in_box(s: f64) -> f64 {
    if 0.23 < s && s < 0.56 {
        1.0
    } else {
        0.0
    }
}

pub fn initial_data(example: Example) -> Field {
    match example {
        Example::Advection1d => Box::new(|x| in_box(x[0])),
        Example::Burgers1d => Box::new(|x| BURGERS_SINE_1D.initial(x)),
        Example::Burgers2d => Box::new(|x| BURGERS_SINE_2D.initial(x)),
        Example::Kpp2d => Box::new(|x| {
            if (x[0] - 0.5).powi(2) + (x[1] - 0.5).powi(2) <= 1.0 / 16.0 {
                3.5 * PI
            } else {
                0.25 * PI
            }
        }),
    }
}

/// Exact solution, where one is known.
pub fn reference_solution(example: Example) -> Option<Reference> {
    match example {
        Example::Advection1d => Some(Box::new(|x, t| in_box((x[0] - t).rem_euclid(1.0)))),
        Example::Burgers1d => Some(Box::new(|x, t| match BURGERS_SINE_1D.solve(x, t) {
            Ok(u) => u,
            Err(_) => burgers1d_entropy(x[0], t),
        })),
        // `u = w(x + y, t)` with `w_t + 2 w w_s = 0`, so `w` is the zero-mean 1D solution at
        // time `2t`; a Galilean shift by 1/2 turns that into the tabulated offset-1/2 one.
        Example::Burgers2d => Some(Box::new(|x, t| match BURGERS_SINE_2D.solve(x, t) {
            Ok(u) => u,
            Err(_) => burgers1d_entropy((x[0] + x[1] + t).rem_euclid(1.0), 2.0 * t) - 0.5,
        })),
        Example::Kpp2d => None,
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Status {
    Completed,
    Diverged { step: usize, time: f64, norm: f64 },
}

impl Status {
    pub fn name(&self) -> &'static str {
        match self {
            Status::Completed => "completed",
            Status::Diverged { .. } => "diverged",
        }
    }
}

/// Probe values and grid copy taken once the run passes a requested time.
#[derive(Clone, Debug)]
pub struct Snapshot {
    pub requested: f64,
    pub time: f64,
    pub step: usize,
    pub state: Box<RunState>,
}

pub struct Outcome {
    pub config: RunConfig,
    pub solver: Solver,
    pub state: RunState,
    pub status: Status,
    pub reports: Vec<StepReport>,
    /// Errors at the final (or divergence) time, when an exact solution exists.
    pub errors: Option<ErrorNorms>,
    pub probe_level: u32,
    pub probe: Vec<f64>,
    pub snapshots: Vec<Snapshot>,
}

impl Outcome {
    pub fn max_dof(&self) -> usize {
        self.state.dof_history.iter().map(|&(_, d)| d).max().unwrap_or(0)
    }

    pub fn probe_range(&self) -> (f64, f64) {
        self.probe.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)))
    }

    /// Total variation of the 1D probe values over one period.
    pub fn probe_total_variation(&self) -> Option<f64> {
        (self.state.grid.dim() == 1).then(|| {
            let n = self.probe.len();
            (0..n).map(|i| (self.probe[(i + 1) % n] - self.probe[i]).abs()).sum()
        })
    }
}

pub fn run_experiment(cfg: &RunConfig) -> Result<Outcome, CliError> {
    run_experiment_with(cfg, |_, _| {})
}

/// Runs one experiment, calling `observe` after every step. Divergence is an outcome,
/// every other failure an error.
pub fn run_experiment_with(cfg: &RunConfig, mut observe: impl FnMut(&RunState, &StepReport)) -> Result<Outcome, CliError> {
    cfg.validate()?;
    let solver = Solver::new(cfg.solver_config())?;
    let u0 = initial_data(cfg.example);
    let mut state = solver.initial_state(&*u0)?;
    let mut reports = Vec::new();
    let mut snapshots = Vec::new();
    let mut pending: Vec<f64> = cfg.snapshot_times.clone();
    pending.sort_by(f64::total_cmp);
    pending.reverse();
    let take_due = |state: &RunState, pending: &mut Vec<f64>, snapshots: &mut Vec<Snapshot>| {
        while pending.last().is_some_and(|&t| state.time >= t * (1.0 - 1e-12)) {
            let requested = pending.pop().expect("nonempty");
            snapshots.push(Snapshot { requested, time: state.time, step: state.step, state: Box::new(state.clone()) });
        }
    };
    take_due(&state, &mut pending, &mut snapshots);
    let result = solver.run(&mut state, |st, r| {
        if cfg.log_every > 0 && r.step % cfg.log_every == 0 {
            eprintln!("{r}");
        }
        reports.push(*r);
        take_due(st, &mut pending, &mut snapshots);
        observe(st, r);
    });
    let status = match result {
        Ok(()) => Status::Completed,
        Err(mrdg_core::Error::Divergence { step, time, norm }) => Status::Diverged { step, time, norm },
        Err(e) => return Err(e.into()),
    };
    let errors = reference_solution(cfg.example).map(|exact| {
        let t = state.time;
        let points = cfg.error_points.unwrap_or(cfg.k + 3);
        measure_errors_with(&state.grid, &solver.alpert, points, |x| exact(x, t))
    });
    let probe_level = cfg.probe_level.unwrap_or(cfg.n);
    let probe = probe_lattice(&state.grid, &solver.alpert, probe_level);
    Ok(Outcome { config: cfg.clone(), solver, state, status, reports, errors, probe_level, probe, snapshots })
}
