//! The adaptive time-stepping cycle: predict, refine, evolve, coarsen.
//!
//! The prediction is a forward-Euler step without viscosity; elements whose predicted
//! block is significant get their children (zero-initialized). Viscosity is flagged from
//! `u^n` on the leaves of the refined grid, frozen for the step, and treated implicitly
//! by the IMEX scheme. Smooth runs use explicit SSP steppers instead.

use std::time::Instant;

use crate::basis::{AlpertBasis, InterpBasis, InterpFamily, OperatorTables};
use crate::error::{Error, Result};
use crate::flux::ScalarFlux;
use crate::grid::{AdaptiveGrid, ElementKey, LevelSet};
use crate::projection::{project_fixed, project_initial, InitialData, ProjectionOptions};
use crate::residual::ResidualOperator;
use crate::time::{forward_euler, imex_rk3, ssp_rk2, ssp_rk3, ImexTableau};
use crate::transform::Topology;
use crate::viscosity::{assemble_viscosity, flag_viscosity, ViscosityField, ViscosityOperator, ViscosityParams};

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GridMode {
    Full,
    Sparse,
    /// Refinement threshold `eps`, coarsening threshold `eta`.
    Adaptive { eps: f64, eta: f64 },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum TimeScheme {
    ForwardEuler,
    SspRk2,
    SspRk3,
    /// IMEX with the artificial viscosity (shock mode).
    Imex,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DtRule {
    /// `cfl · h / ((2k+1) · d · C)` with `C` the largest wave speed of `u^n`.
    Cfl(f64),
    /// `factor · h`, or `factor · h^{4/3}` for `k = 3`.
    MeshScaled(f64),
    Fixed(f64),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SolverConfig {
    pub k: usize,
    pub max_level: u32,
    pub family: InterpFamily,
    pub interp_degree: usize,
    /// One flux per dimension.
    pub flux: Vec<ScalarFlux>,
    pub grid: GridMode,
    pub scheme: TimeScheme,
    pub dt: DtRule,
    pub t_final: f64,
    /// `None` disables the artificial viscosity.
    pub viscosity: Option<ViscosityParams>,
    /// Relative widening of the solution range when bounding wave speeds.
    pub wave_speed_margin: f64,
    /// The run is aborted once the coefficient norm exceeds this.
    pub blowup_norm: f64,
    /// ... or exceeds this multiple of the initial norm. Entropy solutions never gain L2 norm.
    pub blowup_growth: f64,
    pub projection: ProjectionOptions,
}

impl SolverConfig {
    pub fn dim(&self) -> usize {
        self.flux.len()
    }

    pub fn validate(&self) -> Result<()> {
        if !(1..=3).contains(&self.dim()) {
            return Err(Error::Config(format!("dimension {} is not supported", self.dim())));
        }
        if self.max_level == 0 {
            return Err(Error::Config("N must be at least 1".into()));
        }
        if let GridMode::Adaptive { eps, eta } = self.grid {
            if !(eps >= 0.0 && eta >= 0.0 && eta <= eps) {
                return Err(Error::Config(format!("thresholds need 0 <= eta <= eps, got eps={eps}, eta={eta}")));
            }
        }
        if !(self.t_final >= 0.0) {
            return Err(Error::Config("final time must be non-negative".into()));
        }
        let positive = match self.dt {
            DtRule::Cfl(c) | DtRule::MeshScaled(c) | DtRule::Fixed(c) => c > 0.0,
        };
        if !positive {
            return Err(Error::Config("time step parameters must be positive".into()));
        }
        Ok(())
    }
}

/// Solution and bookkeeping at `t^n`.
#[derive(Clone, Debug)]
pub struct RunState {
    pub grid: AdaptiveGrid,
    pub time: f64,
    pub step: usize,
    /// `(t, DoF)` after every step, starting with the initial grid.
    pub dof_history: Vec<(f64, usize)>,
    /// Field used in the last step.
    pub viscosity: ViscosityField,
    /// Largest `|residual|` against the constant test function seen so far.
    pub conservation_defect: f64,
    pub initial_norm: f64,
    pub wall_seconds: f64,
}

/// One line of the step log.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepReport {
    pub step: usize,
    pub time: f64,
    pub dt: f64,
    pub dof: usize,
    pub flagged: usize,
    pub l2_norm: f64,
    pub conservation: f64,
}

impl std::fmt::Display for StepReport {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(
            f,
            "step {:>6}  t {:.6e}  dt {:.3e}  dof {:>8}  flagged {:>6}  |u| {:.6e}  cons {:.1e}",
            self.step, self.time, self.dt, self.dof, self.flagged, self.l2_norm, self.conservation
        )
    }
}

/// Owns the bases and 1D tables for one configuration.
pub struct Solver {
    pub config: SolverConfig,
    pub alpert: AlpertBasis,
    pub interp: InterpBasis,
    pub tables: OperatorTables,
}

impl Solver {
    pub fn new(config: SolverConfig) -> Result<Self> {
        config.validate()?;
        let alpert = AlpertBasis::new(config.k)?;
        let interp = InterpBasis::new(config.family, config.interp_degree)?;
        let tables = OperatorTables::new(&alpert, &interp, config.max_level);
        Ok(Self { config, alpert, interp, tables })
    }

    pub fn residual_operator(&self) -> Result<ResidualOperator<'_>> {
        ResidualOperator::new(&self.tables, &self.interp, self.config.k, self.config.flux.clone(), self.config.wave_speed_margin)
    }

    pub fn initial_state(&self, u0: InitialData<'_>) -> Result<RunState> {
        let c = &self.config;
        let d = c.dim();
        let grid = match c.grid {
            GridMode::Full => project_fixed(d, &self.alpert, c.max_level, LevelSet::Full, u0, c.projection)?,
            GridMode::Sparse => project_fixed(d, &self.alpert, c.max_level, LevelSet::Sparse, u0, c.projection)?,
            GridMode::Adaptive { eps, .. } => project_initial(d, &self.alpert, c.max_level, eps, u0, c.projection)?,
        };
        Ok(self.state_from_grid(grid))
    }

    pub fn state_from_grid(&self, grid: AdaptiveGrid) -> RunState {
        let dof = grid.dof();
        let initial_norm = grid.l2_norm();
        RunState {
            grid,
            time: 0.0,
            step: 0,
            dof_history: vec![(0.0, dof)],
            viscosity: ViscosityField::default(),
            conservation_defect: 0.0,
            initial_norm,
            wall_seconds: 0.0,
        }
    }

    /// Step size before truncation to the final time.
    pub fn nominal_dt(&self, wave_speed: f64) -> f64 {
        let c = &self.config;
        let h = 0.5f64.powi(c.max_level as i32);
        match c.dt {
            DtRule::Fixed(dt) => dt,
            DtRule::MeshScaled(f) => {
                if c.k == 3 {
                    f * h.powf(4.0 / 3.0)
                } else {
                    f * h
                }
            }
            DtRule::Cfl(cfl) => cfl * h / ((2 * c.k + 1) as f64 * c.dim() as f64 * wave_speed.max(1e-12)),
        }
    }

    /// Advances `state` by one step of at most `dt_max`.
    pub fn advance_step(&self, state: &mut RunState, dt_max: f64) -> Result<StepReport> {
        let c = &self.config;
        let op = self.residual_operator()?;
        let start = Instant::now();
        let mut defect = 0.0f64;
        let root = state.grid.find(&ElementKey::root(c.dim())).expect("root element");
        let bs = state.grid.block_size();

        // Prediction on the current grid; its wave speeds fix the step size.
        let topo = Topology::new(&state.grid)?;
        let r0 = op.evaluate(&topo, state.grid.all_coeffs())?;
        defect = defect.max(r0.rhs[root * bs].abs());
        let speed = r0.wave_speeds.iter().copied().fold(0.0, f64::max);
        let dt = self.nominal_dt(speed).min(dt_max);

        if let GridMode::Adaptive { eps, .. } = c.grid {
            let predicted = forward_euler(state.grid.all_coeffs(), dt, |_| Ok(r0.rhs.clone()))?;
            state.grid.refine(&predicted, eps)?;
        }
        // Viscosity from u^n on the refined grid: an element refined this step is no
        // longer a leaf, and its new children hold zero coefficients.
        let field = match c.viscosity {
            Some(p) if c.scheme == TimeScheme::Imex => flag_viscosity(&mut state.grid, p, state.step),
            _ => ViscosityField::default(),
        };
        let topo = Topology::new(&state.grid)?;
        let root = state.grid.find(&ElementKey::root(c.dim())).expect("root element");
        let mut f = |u: &[f64]| -> Result<Vec<f64>> {
            let r = op.evaluate(&topo, u)?;
            defect = defect.max(r.rhs[root * bs].abs());
            Ok(r.rhs)
        };
        let u = state.grid.all_coeffs().to_vec();
        let next = match c.scheme {
            TimeScheme::ForwardEuler => forward_euler(&u, dt, &mut f)?,
            TimeScheme::SspRk2 => ssp_rk2(&u, dt, &mut f)?,
            TimeScheme::SspRk3 => ssp_rk3(&u, dt, &mut f)?,
            TimeScheme::Imex => {
                let a = if field.is_empty() {
                    ViscosityOperator::zero(state.grid.len(), bs)
                } else {
                    assemble_viscosity(&state.grid, &self.alpert, &field)
                };
                imex_rk3(&u, dt, &mut f, &a, &ImexTableau::third_order())?
            }
        };
        state.grid.set_all_coeffs(&next);
        if let GridMode::Adaptive { eta, .. } = c.grid {
            state.grid.coarsen(eta);
        }

        state.step += 1;
        state.time += dt;
        let norm = state.grid.l2_norm();
        if !norm.is_finite() || norm > c.blowup_norm || norm > c.blowup_growth * state.initial_norm.max(f64::MIN_POSITIVE) {
            return Err(Error::Divergence { step: state.step, time: state.time, norm });
        }
        state.conservation_defect = state.conservation_defect.max(defect);
        state.dof_history.push((state.time, state.grid.dof()));
        state.wall_seconds += start.elapsed().as_secs_f64();
        let flagged = field.len();
        state.viscosity = field;
        Ok(StepReport {
            step: state.step,
            time: state.time,
            dt,
            dof: state.grid.dof(),
            flagged,
            l2_norm: norm,
            conservation: defect,
        })
    }

    /// Steps until the final time, calling `observe` after every step.
    pub fn run(&self, state: &mut RunState, mut observe: impl FnMut(&RunState, &StepReport)) -> Result<()> {
        let t_final = self.config.t_final;
        while state.time < t_final * (1.0 - 1e-14) {
            let report = self.advance_step(state, t_final - state.time)?;
            observe(state, &report);
        }
        Ok(())
    }
}
