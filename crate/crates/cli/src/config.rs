//! Flat `key=value` run configuration.
//!
//! A config file holds one pair per line (`#` starts a comment); command-line pairs are
//! applied afterwards. The `example` key selects the defaults and is applied first
//! wherever it appears.

use std::fmt;
use std::path::{Path, PathBuf};

use mrdg_core::basis::{InterpBasis, InterpFamily};
use mrdg_core::driver::{DtRule, GridMode, SolverConfig, TimeScheme};
use mrdg_core::flux::ScalarFlux;
use mrdg_core::projection::ProjectionOptions;
use mrdg_core::viscosity::ViscosityParams;

use crate::error::CliError;

/// Environment variable naming the output directory.
pub const OUTPUT_DIR_ENV: &str = "MRDG_OUTPUT_DIR";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Example {
    /// `u_t + u_x = 0` with the box data on `(0.23, 0.56)`.
    Advection1d,
    /// `u_t + (u^2/2)_x = 0`, `u0 = sin(2πx) + 1/2`.
    Burgers1d,
    /// `u_t + (u^2/2)_x + (u^2/2)_y = 0`, `u0 = sin(2π(x+y)) + 1/2`.
    Burgers2d,
    /// `u_t + sin(u)_x + cos(u)_y = 0` with the disk data.
    Kpp2d,
}

impl Example {
    pub fn name(self) -> &'static str {
        match self {
            Example::Advection1d => "advection1d",
            Example::Burgers1d => "burgers1d",
            Example::Burgers2d => "burgers2d",
            Example::Kpp2d => "kpp2d",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "advection1d" => Some(Example::Advection1d),
            "burgers1d" => Some(Example::Burgers1d),
            "burgers2d" => Some(Example::Burgers2d),
            "kpp2d" => Some(Example::Kpp2d),
            _ => None,
        }
    }

    pub fn dim(self) -> usize {
        match self {
            Example::Advection1d | Example::Burgers1d => 1,
            Example::Burgers2d | Example::Kpp2d => 2,
        }
    }

    pub fn fluxes(self) -> Vec<ScalarFlux> {
        match self {
            Example::Advection1d => vec![ScalarFlux::Linear(1.0)],
            Example::Burgers1d => vec![ScalarFlux::Burgers],
            Example::Burgers2d => vec![ScalarFlux::Burgers; 2],
            Example::Kpp2d => vec![ScalarFlux::Sine, ScalarFlux::Cosine],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum GridKind {
    Full,
    Sparse,
    Adaptive,
}

impl GridKind {
    fn name(self) -> &'static str {
        match self {
            GridKind::Full => "full",
            GridKind::Sparse => "sparse",
            GridKind::Adaptive => "adaptive",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub example: Example,
    pub k: usize,
    pub family: InterpFamily,
    pub m: usize,
    pub grid: GridKind,
    pub n: u32,
    pub eps: f64,
    /// Coarsening threshold; `None` means `eps / 10`.
    pub eta: Option<f64>,
    pub dt: DtRule,
    /// `None` picks IMEX with viscosity, else SSP-RK2 for `k = 1` and SSP-RK3 otherwise.
    pub scheme: Option<TimeScheme>,
    pub t_final: f64,
    pub viscosity: bool,
    pub nu0: f64,
    pub kappa: f64,
    /// Gauss points per dimension for the error norms; `None` means `k + 3`.
    pub error_points: Option<usize>,
    /// Probe lattice level; `None` means `N`.
    pub probe_level: Option<u32>,
    /// Times at which extra probe and grid snapshots are written.
    pub snapshot_times: Vec<f64>,
    /// Print a step line every this many steps (0: never).
    pub log_every: usize,
    /// File-name prefix of every artifact.
    pub tag: String,
    /// `None` falls back to the environment variable, then the working directory.
    pub output_dir: Option<PathBuf>,
    /// Write CSV artifacts at all.
    pub write: bool,
}

impl RunConfig {
    /// Defaults reproducing the setup of each example.
    pub fn defaults(example: Example) -> Self {
        let base = RunConfig {
            example,
            k: 2,
            family: InterpFamily::Hermite,
            m: 3,
            grid: GridKind::Adaptive,
            n: 8,
            eps: 1e-3,
            eta: None,
            dt: DtRule::Cfl(1.0),
            scheme: None,
            t_final: 0.2,
            viscosity: true,
            nu0: ViscosityParams::default().nu0,
            kappa: ViscosityParams::default().kappa,
            error_points: None,
            probe_level: None,
            snapshot_times: Vec::new(),
            log_every: 0,
            tag: example.name().to_string(),
            output_dir: None,
            write: true,
        };
        match example {
            Example::Advection1d => RunConfig { eps: 1e-5, t_final: 3.0, ..base },
            Example::Burgers1d => base,
            Example::Burgers2d => RunConfig {
                grid: GridKind::Sparse,
                n: 5,
                dt: DtRule::MeshScaled(0.1),
                t_final: 0.01,
                viscosity: false,
                ..base
            },
            Example::Kpp2d => RunConfig { n: 7, eps: 5e-4, t_final: 0.4, ..base },
        }
    }

    /// Parses file text followed by override pairs.
    pub fn from_sources(file_text: Option<&str>, overrides: &[String]) -> Result<Self, CliError> {
        let mut pairs = Vec::new();
        if let Some(text) = file_text {
            pairs.extend(parse_lines(text)?);
        }
        for o in overrides {
            pairs.push(split_pair(o)?);
        }
        Self::from_pairs(&pairs)
    }

    /// Reads a config file and applies the overrides.
    pub fn load(path: Option<&Path>, overrides: &[String]) -> Result<Self, CliError> {
        let text = match path {
            Some(p) => Some(
                std::fs::read_to_string(p).map_err(|e| CliError::Config(format!("cannot read {}: {e}", p.display())))?,
            ),
            None => None,
        };
        Self::from_sources(text.as_deref(), overrides)
    }

    pub fn from_pairs(pairs: &[(String, String)]) -> Result<Self, CliError> {
        let example = pairs
            .iter()
            .rev()
            .find(|(k, _)| k == "example")
            .map(|(_, v)| Example::parse(v).ok_or_else(|| CliError::Config(format!("unknown example '{v}'"))))
            .transpose()?
            .ok_or_else(|| CliError::Config("missing key 'example'".into()))?;
        let mut cfg = RunConfig::defaults(example);
        let mut tag_set = false;
        for (k, v) in pairs {
            if k == "tag" {
                tag_set = true;
            }
            cfg.set(k, v)?;
        }
        if !tag_set {
            cfg.tag = example.name().to_string();
        }
        cfg.validate()?;
        Ok(cfg)
    }

    /// Applies one pair.
    pub fn set(&mut self, key: &str, value: &str) -> Result<(), CliError> {
        let bad = |what: &str| CliError::Config(format!("invalid value '{value}' for {key}: expected {what}"));
        let float = || value.parse::<f64>().map_err(|_| bad("a number"));
        let uint = || value.parse::<usize>().map_err(|_| bad("a non-negative integer"));
        let flag = || match value {
            "on" | "true" | "1" | "yes" => Ok(true),
            "off" | "false" | "0" | "no" => Ok(false),
            _ => Err(bad("on/off")),
        };
        match key {
            "example" => {}
            "k" => self.k = uint()?,
            "family" => self.family = InterpFamily::parse(value).ok_or_else(|| bad("hermite, lagrange-inner or lagrange-interface"))?,
            "m" => self.m = uint()?,
            "grid" => {
                self.grid = match value {
                    "full" => GridKind::Full,
                    "sparse" => GridKind::Sparse,
                    "adaptive" => GridKind::Adaptive,
                    _ => return Err(bad("full, sparse or adaptive")),
                }
            }
            "n" => self.n = value.parse().map_err(|_| bad("a level"))?,
            "eps" => self.eps = float()?,
            "eta" => self.eta = Some(float()?),
            "dt" => self.dt = parse_dt(value).ok_or_else(|| bad("cfl:<c>, mesh:<c> or fixed:<dt>"))?,
            "cfl" => self.dt = DtRule::Cfl(float()?),
            "scheme" => {
                self.scheme = match value {
                    "auto" => None,
                    "euler" => Some(TimeScheme::ForwardEuler),
                    "rk2" => Some(TimeScheme::SspRk2),
                    "rk3" => Some(TimeScheme::SspRk3),
                    "imex" => Some(TimeScheme::Imex),
                    _ => return Err(bad("auto, euler, rk2, rk3 or imex")),
                }
            }
            "t_final" => self.t_final = float()?,
            "viscosity" => self.viscosity = flag()?,
            "nu0" => self.nu0 = float()?,
            "kappa" => self.kappa = float()?,
            "error_points" => self.error_points = Some(uint()?),
            "probe_level" => self.probe_level = Some(value.parse().map_err(|_| bad("a level"))?),
            "snapshot_times" => {
                self.snapshot_times = if value.is_empty() {
                    Vec::new()
                } else {
                    value.split(',').map(|s| s.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad("a comma list of times"))?
                }
            }
            "log_every" => self.log_every = uint()?,
            "tag" => self.tag = value.to_string(),
            "output_dir" => self.output_dir = Some(PathBuf::from(value)),
            "write" => self.write = flag()?,
            _ => return Err(CliError::Config(format!("unknown key '{key}'"))),
        }
        Ok(())
    }

    pub fn eta(&self) -> f64 {
        self.eta.unwrap_or(self.eps / 10.0)
    }

    pub fn scheme(&self) -> TimeScheme {
        self.scheme.unwrap_or(if self.viscosity {
            TimeScheme::Imex
        } else if self.k == 1 {
            TimeScheme::SspRk2
        } else {
            TimeScheme::SspRk3
        })
    }

    pub fn validate(&self) -> Result<(), CliError> {
        let err = |m: String| Err(CliError::Config(m));
        if !(1..=3).contains(&self.k) {
            return err(format!("k must be 1, 2 or 3, got {}", self.k));
        }
        if self.n == 0 {
            return err("N must be at least 1".into());
        }
        if InterpBasis::new(self.family, self.m).is_err() {
            return err(format!("no {} interpolation of degree {}", self.family.name(), self.m));
        }
        if self.grid == GridKind::Adaptive && !(self.eps >= 0.0 && self.eta() >= 0.0 && self.eta() <= self.eps) {
            return err(format!("thresholds need 0 <= eta <= eps, got eps={}, eta={}", self.eps, self.eta()));
        }
        if self.viscosity && self.scheme() != TimeScheme::Imex {
            return err("viscosity requires the imex scheme".into());
        }
        if !(self.nu0 > 0.0) {
            return err("nu0 must be positive".into());
        }
        if self.error_points == Some(0) {
            return err("error_points must be positive".into());
        }
        if self.tag.is_empty() || self.tag.contains(['/', '\\']) {
            return err(format!("tag '{}' is not a plain file-name prefix", self.tag));
        }
        self.solver_config().validate().map_err(|e| CliError::Config(e.to_string()))
    }

    pub fn solver_config(&self) -> SolverConfig {
        let grid = match self.grid {
            GridKind::Full => GridMode::Full,
            GridKind::Sparse => GridMode::Sparse,
            GridKind::Adaptive => GridMode::Adaptive { eps: self.eps, eta: self.eta() },
        };
        SolverConfig {
            k: self.k,
            max_level: self.n,
            family: self.family,
            interp_degree: self.m,
            flux: self.example.fluxes(),
            grid,
            scheme: self.scheme(),
            dt: self.dt,
            t_final: self.t_final,
            viscosity: self.viscosity.then_some(ViscosityParams { nu0: self.nu0, kappa: self.kappa }),
            wave_speed_margin: 0.0,
            blowup_norm: 1e10,
            blowup_growth: 1e3,
            projection: ProjectionOptions::default(),
        }
    }

    /// Directory receiving the artifacts.
    pub fn resolved_output_dir(&self) -> PathBuf {
        self.output_dir
            .clone()
            .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
            .unwrap_or_else(|| PathBuf::from("."))
    }

    /// Canonical `key=value` listing; parses back to the same config.
    pub fn to_pairs(&self) -> Vec<(String, String)> {
        let mut v = vec![
            ("example", self.example.name().to_string()),
            ("k", self.k.to_string()),
            ("family", self.family.name().to_string()),
            ("m", self.m.to_string()),
            ("grid", self.grid.name().to_string()),
            ("n", self.n.to_string()),
            ("eps", format!("{:e}", self.eps)),
            ("eta", format!("{:e}", self.eta())),
            ("dt", format_dt(self.dt)),
            ("scheme", scheme_name(self.scheme()).to_string()),
            ("t_final", format!("{}", self.t_final)),
            ("viscosity", if self.viscosity { "on" } else { "off" }.to_string()),
            ("nu0", format!("{}", self.nu0)),
            ("kappa", format!("{}", self.kappa)),
            ("error_points", self.error_points.unwrap_or(self.k + 3).to_string()),
            ("probe_level", self.probe_level.unwrap_or(self.n).to_string()),
            ("tag", self.tag.clone()),
        ];
        if !self.snapshot_times.is_empty() {
            let s: Vec<String> = self.snapshot_times.iter().map(|t| t.to_string()).collect();
            v.push(("snapshot_times", s.join(",")));
        }
        v.into_iter().map(|(k, v)| (k.to_string(), v)).collect()
    }
}

impl fmt::Display for RunConfig {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let parts: Vec<String> = self.to_pairs().into_iter().map(|(k, v)| format!("{k}={v}")).collect();
        f.write_str(&parts.join(" "))
    }
}

pub fn scheme_name(s: TimeScheme) -> &'static str {
    match s {
        TimeScheme::ForwardEuler => "euler",
        TimeScheme::SspRk2 => "rk2",
        TimeScheme::SspRk3 => "rk3",
        TimeScheme::Imex => "imex",
    }
}

fn parse_dt(s: &str) -> Option<DtRule> {
    let (kind, v) = s.split_once(':')?;
    let v: f64 = v.parse().ok()?;
    match kind {
        "cfl" => Some(DtRule::Cfl(v)),
        "mesh" => Some(DtRule::MeshScaled(v)),
        "fixed" => Some(DtRule::Fixed(v)),
        _ => None,
    }
}

fn format_dt(d: DtRule) -> String {
    match d {
        DtRule::Cfl(c) => format!("cfl:{c}"),
        DtRule::MeshScaled(c) => format!("mesh:{c}"),
        DtRule::Fixed(c) => format!("fixed:{c}"),
    }
}

pub fn split_pair(s: &str) -> Result<(String, String), CliError> {
    let (k, v) = s.split_once('=').ok_or_else(|| CliError::Config(format!("expected key=value, got '{s}'")))?;
    let k = k.trim();
    if k.is_empty() {
        return Err(CliError::Config(format!("empty key in '{s}'")));
    }
    Ok((k.to_string(), v.trim().to_string()))
}

/// Pairs of a config file; blank lines and `#` comments are skipped.
pub fn parse_lines(text: &str) -> Result<Vec<(String, String)>, CliError> {
    text.lines()
        .map(|l| l.split('#').next().unwrap_or("").trim())
        .filter(|l| !l.is_empty())
        .map(split_pair)
        .collect()
}
