//! Convergence tables over `N` (mesh halving) or over the threshold `ε`.

use std::io::Write;

use mrdg_core::sample::ErrorNorms;

use crate::error::CliError;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Param {
    Level(u32),
    Eps(f64),
}

/// One measured run of a sweep.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Measurement {
    pub k: usize,
    pub m: usize,
    pub param: Param,
    pub dof: usize,
    pub errors: ErrorNorms,
    pub diverged: bool,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TableRow {
    pub k: usize,
    pub m: usize,
    pub param: Param,
    pub dof: usize,
    pub l1: f64,
    pub l1_order: Option<f64>,
    pub l2: f64,
    pub l2_order: Option<f64>,
    pub linf: f64,
    pub linf_order: Option<f64>,
    /// `log(e_{l-1}/e_l) / log(DoF_l/DoF_{l-1})` on the L2 errors.
    pub r_dof: Option<f64>,
    /// `log(e_{l-1}/e_l) / log(ε_{l-1}/ε_l)` on the L2 errors.
    pub r_eps: Option<f64>,
    pub diverged: bool,
}

/// `log2(prev / cur)`, the order under mesh halving.
pub fn order(prev: f64, cur: f64) -> f64 {
    (prev / cur).log2()
}

pub fn r_eps(prev_err: f64, err: f64, prev_eps: f64, eps: f64) -> f64 {
    (prev_err / err).ln() / (prev_eps / eps).ln()
}

pub fn r_dof(prev_err: f64, err: f64, prev_dof: usize, dof: usize) -> f64 {
    (prev_err / err).ln() / (dof as f64 / prev_dof as f64).ln()
}

/// Rows in sweep order; rates need a predecessor with the same `(k, M)`.
pub fn build_table(runs: &[Measurement]) -> Vec<TableRow> {
    let mut rows: Vec<TableRow> = Vec::with_capacity(runs.len());
    for (i, r) in runs.iter().enumerate() {
        let prev = i.checked_sub(1).map(|p| &runs[p]).filter(|p| p.k == r.k && p.m == r.m);
        let mut row = TableRow {
            k: r.k,
            m: r.m,
            param: r.param,
            dof: r.dof,
            l1: r.errors.l1,
            l1_order: None,
            l2: r.errors.l2,
            l2_order: None,
            linf: r.errors.linf,
            linf_order: None,
            r_dof: None,
            r_eps: None,
            diverged: r.diverged,
        };
        if let Some(p) = prev {
            match (p.param, r.param) {
                (Param::Level(_), Param::Level(_)) => {
                    row.l1_order = Some(order(p.errors.l1, r.errors.l1));
                    row.l2_order = Some(order(p.errors.l2, r.errors.l2));
                    row.linf_order = Some(order(p.errors.linf, r.errors.linf));
                }
                (Param::Eps(pe), Param::Eps(e)) => {
                    row.r_eps = Some(r_eps(p.errors.l2, r.errors.l2, pe, e));
                    row.r_dof = Some(r_dof(p.errors.l2, r.errors.l2, p.dof, r.dof));
                }
                _ => {}
            }
        }
        rows.push(row);
    }
    rows
}

pub const TABLE_HEADER: [&str; 14] =
    ["k", "M", "N", "eps", "DoF", "L1", "L1_order", "L2", "L2_order", "Linf", "Linf_order", "R_DoF", "R_eps", "status"];

fn opt(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.4}")).unwrap_or_default()
}

/// CSV in the column order of `TABLE_HEADER`; empty cells where a rate is undefined.
pub fn write_table<W: Write>(out: W, rows: &[TableRow]) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(TABLE_HEADER)?;
    for r in rows {
        let (n, eps) = match r.param {
            Param::Level(n) => (n.to_string(), String::new()),
            Param::Eps(e) => (String::new(), format!("{e:e}")),
        };
        w.write_record([
            r.k.to_string(),
            r.m.to_string(),
            n,
            eps,
            r.dof.to_string(),
            format!("{:.6e}", r.l1),
            opt(r.l1_order),
            format!("{:.6e}", r.l2),
            opt(r.l2_order),
            format!("{:.6e}", r.linf),
            opt(r.linf_order),
            opt(r.r_dof),
            opt(r.r_eps),
            if r.diverged { "diverged" } else { "completed" }.to_string(),
        ])?;
    }
    w.flush()?;
    Ok(())
}
