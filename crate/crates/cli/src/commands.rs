//! `run`, `sweep`, `batch` and `show`, shared by the binary and the tests.

use std::path::{Path, PathBuf};

use clap::{Parser, Subcommand};

use crate::config::{split_pair, RunConfig};
use crate::error::{exit, CliError};
use crate::experiment::{run_experiment, Status};
use crate::output::write_outcome;
use crate::table::{build_table, write_table, Measurement, Param};

#[derive(Debug, Parser)]
#[command(name = "mrdg", about = "Adaptive multiresolution DG experiments for scalar conservation laws")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one experiment: `[CONFIG_FILE] [KEY=VALUE]...`.
    Run { args: Vec<String> },
    /// Run one experiment per value of a key and write a convergence table.
    Sweep {
        /// `n=3,4,5` or `eps=1e-4,5e-5`.
        #[arg(long)]
        over: String,
        args: Vec<String>,
    },
    /// Run the `run`/`sweep` lines of a manifest file in order.
    Batch { manifest: PathBuf },
    /// Print the resolved configuration.
    Show { args: Vec<String> },
}

/// Splits `[CONFIG_FILE] [KEY=VALUE]...`; relative files resolve against `base`.
fn split_args(args: &[String], base: Option<&Path>) -> Result<(Option<PathBuf>, Vec<String>), CliError> {
    let mut file = None;
    let mut pairs = Vec::new();
    for a in args {
        if a.contains('=') {
            pairs.push(a.clone());
        } else if file.is_none() {
            let p = PathBuf::from(a);
            file = Some(match base {
                Some(b) if p.is_relative() => b.join(p),
                _ => p,
            });
        } else {
            return Err(CliError::Config(format!("unexpected argument '{a}'")));
        }
    }
    Ok((file, pairs))
}

fn load(args: &[String], base: Option<&Path>, extra: &[String]) -> Result<RunConfig, CliError> {
    let (file, mut pairs) = split_args(args, base)?;
    pairs.extend_from_slice(extra);
    RunConfig::load(file.as_deref(), &pairs)
}

/// Runs one experiment and writes its artifacts. `Ok(exit::DIVERGED)` for a recorded blow-up.
pub fn cmd_run(args: &[String], base: Option<&Path>) -> Result<i32, CliError> {
    let cfg = load(args, base, &[])?;
    let o = run_experiment(&cfg)?;
    if cfg.write {
        write_outcome(&o)?;
    }
    let err = o.errors.map(|e| format!("  L1 {:.4e}  L2 {:.4e}  Linf {:.4e}", e.l1, e.l2, e.linf)).unwrap_or_default();
    println!("{}: {} at t = {:.6} after {} steps, DoF {}{err}", cfg.tag, o.status.name(), o.state.time, o.state.step, o.state.grid.dof());
    Ok(match o.status {
        Status::Completed => exit::SUCCESS,
        Status::Diverged { .. } => exit::DIVERGED,
    })
}

pub fn parse_over(over: &str) -> Result<(String, Vec<String>), CliError> {
    let (key, values) = split_pair(over)?;
    if key != "n" && key != "eps" {
        return Err(CliError::Config(format!("sweeps run over n or eps, not '{key}'")));
    }
    let values: Vec<String> = values.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect();
    if values.is_empty() {
        return Err(CliError::Config("empty sweep".into()));
    }
    Ok((key, values))
}

/// Runs the sweep and returns the measurements in sweep order.
pub fn sweep(base_cfg_args: &[String], base: Option<&Path>, over: &str) -> Result<(RunConfig, Vec<Measurement>), CliError> {
    let (key, values) = parse_over(over)?;
    let root = load(base_cfg_args, base, &[])?;
    let mut runs = Vec::new();
    for v in &values {
        let tag = format!("{}_{key}{v}", root.tag);
        let cfg = load(base_cfg_args, base, &[format!("{key}={v}"), format!("tag={tag}")])?;
        let o = run_experiment(&cfg)?;
        if cfg.write {
            write_outcome(&o)?;
        }
        let errors = o.errors.ok_or_else(|| CliError::Config(format!("{} has no reference solution to tabulate", cfg.example.name())))?;
        let param = if key == "n" { Param::Level(cfg.n) } else { Param::Eps(cfg.eps) };
        let diverged = matches!(o.status, Status::Diverged { .. });
        println!("{tag}: {} DoF {} L2 {:.4e}", o.status.name(), o.state.grid.dof(), errors.l2);
        runs.push(Measurement { k: cfg.k, m: cfg.m, param, dof: o.state.grid.dof(), errors, diverged });
    }
    Ok((root, runs))
}

pub fn cmd_sweep(args: &[String], base: Option<&Path>, over: &str) -> Result<i32, CliError> {
    let (root, runs) = sweep(args, base, over)?;
    let rows = build_table(&runs);
    if root.write {
        let dir = root.resolved_output_dir();
        std::fs::create_dir_all(&dir)?;
        let f = std::fs::File::create(dir.join(format!("{}_table.csv", root.tag)))?;
        write_table(std::io::BufWriter::new(f), &rows)?;
    }
    write_table(std::io::stdout().lock(), &rows)?;
    Ok(if runs.iter().any(|r| r.diverged) { exit::DIVERGED } else { exit::SUCCESS })
}

/// Each non-comment manifest line is a `run` or `sweep` invocation. Stops at the first
/// configuration or solver error; the status is the worst seen.
pub fn cmd_batch(manifest: &Path) -> Result<i32, CliError> {
    let text = std::fs::read_to_string(manifest).map_err(|e| CliError::Config(format!("cannot read {}: {e}", manifest.display())))?;
    let base = manifest.parent().map(Path::to_path_buf);
    let mut status = exit::SUCCESS;
    for (no, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let tokens = std::iter::once("mrdg").chain(line.split_whitespace());
        let cli = Cli::try_parse_from(tokens).map_err(|e| CliError::Config(format!("manifest line {}: {e}", no + 1)))?;
        let code = match cli.command {
            Command::Run { args } => cmd_run(&args, base.as_deref())?,
            Command::Sweep { over, args } => cmd_sweep(&args, base.as_deref(), &over)?,
            _ => return Err(CliError::Config(format!("manifest line {}: only run and sweep are allowed", no + 1))),
        };
        status = status.max(code);
    }
    Ok(status)
}

pub fn cmd_show(args: &[String]) -> Result<i32, CliError> {
    let cfg = load(args, None, &[])?;
    for (k, v) in cfg.to_pairs() {
        println!("{k}={v}");
    }
    Ok(exit::SUCCESS)
}

pub fn dispatch(cli: Cli) -> Result<i32, CliError> {
    match cli.command {
        Command::Run { args } => cmd_run(&args, None),
        Command::Sweep { over, args } => cmd_sweep(&args, None, &over),
        Command::Batch { manifest } => cmd_batch(&manifest),
        Command::Show { args } => cmd_show(&args),
    }
}

