//! CSV artifacts. Every file is a pure function of the configuration: no wall times,
//! no timestamps, fixed float formatting.
//!
//! | file | columns |
//! |---|---|
//! | `<tag>_summary.csv` | `key,value` pairs: the canonical config, then results |
//! | `<tag>_dof.csv` | `step,t,dt,dof,flagged,l2_norm,conservation` (step 0 is the initial grid) |
//! | `<tag>_probe.csv` | `x[,y],u` at the cell centres of the `2^probe_level` lattice, last dimension fastest |
//! | `<tag>_grid.csv` | `l0,j0[,l1,j1],is_leaf,norm,viscosity` per active element |
//! | `<tag>_snapshots.csv` | `index,t_requested,t,step,dof`; files `<tag>_snap<index>_{probe,grid}.csv` |
//! | `<tag>_table.csv` | sweeps only, see `table::TABLE_HEADER` |

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use mrdg_core::basis::AlpertBasis;
use mrdg_core::driver::RunState;
use mrdg_core::grid::AdaptiveGrid;
use mrdg_core::sample::probe_lattice;

use crate::error::CliError;
use crate::experiment::{Outcome, Status};

fn create(dir: &Path, name: &str) -> Result<(PathBuf, BufWriter<File>), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Io(format!("cannot create {}: {e}", dir.display())))?;
    let path = dir.join(name);
    let f = File::create(&path).map_err(|e| CliError::Io(format!("cannot create {}: {e}", path.display())))?;
    Ok((path, BufWriter::new(f)))
}

fn sci(v: f64) -> String {
    format!("{v:.12e}")
}

/// Summary rows: configuration first, then the measured quantities.
pub fn summary_pairs(o: &Outcome) -> Vec<(String, String)> {
    let mut v = o.config.to_pairs();
    let mut push = |k: &str, s: String| v.push((k.to_string(), s));
    push("status", o.status.name().to_string());
    if let Status::Diverged { step, time, norm } = o.status {
        push("diverged_step", step.to_string());
        push("diverged_time", sci(time));
        push("diverged_norm", sci(norm));
    }
    push("steps", o.state.step.to_string());
    push("final_time", sci(o.state.time));
    push("dof", o.state.grid.dof().to_string());
    push("max_dof", o.max_dof().to_string());
    push("elements", o.state.grid.len().to_string());
    push("l2_norm", sci(o.state.grid.l2_norm()));
    push("conservation_defect", sci(o.state.conservation_defect));
    if let Some(e) = o.errors {
        push("l1_error", sci(e.l1));
        push("l2_error", sci(e.l2));
        push("linf_error", sci(e.linf));
    }
    let (lo, hi) = o.probe_range();
    push("probe_level", o.probe_level.to_string());
    push("probe_points_per_dim", (1u64 << o.probe_level).to_string());
    push("probe_min", sci(lo));
    push("probe_max", sci(hi));
    if let Some(tv) = o.probe_total_variation() {
        push("probe_total_variation", sci(tv));
    }
    push("flagged_final", o.state.viscosity.len().to_string());
    v
}

pub fn write_summary<W: Write>(out: W, o: &Outcome) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["key", "value"])?;
    for (k, v) in summary_pairs(o) {
        w.write_record([k, v])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_dof_history<W: Write>(out: W, o: &Outcome) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["step", "t", "dt", "dof", "flagged", "l2_norm", "conservation"])?;
    let first = o.state.dof_history.first().map(|&(_, d)| d).unwrap_or(0);
    w.write_record(["0".into(), sci(0.0), sci(0.0), first.to_string(), "0".into(), String::new(), String::new()])?;
    for r in &o.reports {
        w.write_record([
            r.step.to_string(),
            sci(r.time),
            sci(r.dt),
            r.dof.to_string(),
            r.flagged.to_string(),
            sci(r.l2_norm),
            sci(r.conservation),
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_probe<W: Write>(out: W, grid: &AdaptiveGrid, alpert: &AlpertBasis, level: u32) -> Result<(), CliError> {
    let d = grid.dim();
    let vals = probe_lattice(grid, alpert, level);
    let cells = 1usize << level;
    let mut w = csv::Writer::from_writer(out);
    let mut header: Vec<String> = ["x", "y", "z"][..d].iter().map(|s| s.to_string()).collect();
    header.push("u".into());
    w.write_record(&header)?;
    for (idx, v) in vals.iter().enumerate() {
        let mut rec = Vec::with_capacity(d + 1);
        let mut rem = idx;
        let mut coords = vec![0.0; d];
        for m in (0..d).rev() {
            coords[m] = ((rem % cells) as f64 + 0.5) / cells as f64;
            rem /= cells;
        }
        rec.extend(coords.iter().map(|c| format!("{c:.10}")));
        rec.push(sci(*v));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_grid<W: Write>(out: W, grid: &AdaptiveGrid) -> Result<(), CliError> {
    let d = grid.dim();
    let mut w = csv::Writer::from_writer(out);
    let mut header = Vec::new();
    for m in 0..d {
        header.push(format!("l{m}"));
        header.push(format!("j{m}"));
    }
    header.extend(["is_leaf", "norm", "viscosity"].map(String::from));
    w.write_record(&header)?;
    // Sorted by key so the file does not depend on insertion history.
    let mut order: Vec<usize> = (0..grid.len()).collect();
    order.sort_by_key(|&i| {
        let k = grid.key(i);
        (0..d).map(|m| (k.node(m).level, k.node(m).index)).collect::<Vec<_>>()
    });
    for i in order {
        let e = grid.element(i);
        let mut rec = Vec::with_capacity(2 * d + 3);
        for m in 0..d {
            rec.push(e.key.node(m).level.to_string());
            rec.push(e.key.node(m).index.to_string());
        }
        rec.push(u8::from(e.is_leaf()).to_string());
        rec.push(sci(grid.block_norm(i)));
        rec.push(sci(e.viscosity));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}

fn write_state(dir: &Path, prefix: &str, state: &RunState, alpert: &AlpertBasis, level: u32) -> Result<Vec<PathBuf>, CliError> {
    let (p1, f) = create(dir, &format!("{prefix}_probe.csv"))?;
    write_probe(f, &state.grid, alpert, level)?;
    let (p2, f) = create(dir, &format!("{prefix}_grid.csv"))?;
    write_grid(f, &state.grid)?;
    Ok(vec![p1, p2])
}

/// Writes every artifact of one run; returns the paths written.
pub fn write_outcome(o: &Outcome) -> Result<Vec<PathBuf>, CliError> {
    let dir = o.config.resolved_output_dir();
    let tag = &o.config.tag;
    let mut written = Vec::new();
    let (p, f) = create(&dir, &format!("{tag}_summary.csv"))?;
    write_summary(f, o)?;
    written.push(p);
    let (p, f) = create(&dir, &format!("{tag}_dof.csv"))?;
    write_dof_history(f, o)?;
    written.push(p);
    written.extend(write_state(&dir, tag, &o.state, &o.solver.alpert, o.probe_level)?);
    if !o.snapshots.is_empty() {
        let (p, f) = create(&dir, &format!("{tag}_snapshots.csv"))?;
        let mut w = csv::Writer::from_writer(f);
        w.write_record(["index", "t_requested", "t", "step", "dof"])?;
        for (i, s) in o.snapshots.iter().enumerate() {
            w.write_record([i.to_string(), sci(s.requested), sci(s.time), s.step.to_string(), s.state.grid.dof().to_string()])?;
            written.extend(write_state(&dir, &format!("{tag}_snap{i}"), &s.state, &o.solver.alpert, o.probe_level)?);
        }
        w.flush()?;
        written.push(p);
    }
    Ok(written)
}
