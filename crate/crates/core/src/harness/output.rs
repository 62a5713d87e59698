//! CSV writers. Values use Rust's shortest round-trip formatting, so equal
//! results give byte-identical files.

use std::io::Write;

use crate::error::Result;

use super::runner::Snapshot;
use super::studies::{ComparisonReport, ConvergenceReport, EvolutionReport, SweepReport};

fn write_columns(out: &mut impl Write, header: &[String], columns: &[&[f64]]) -> Result<()> {
    writeln!(out, "{}", header.join(","))?;
    let rows = columns.first().map_or(0, |c| c.len());
    for i in 0..rows {
        let line: Vec<String> = columns.iter().map(|c| c[i].to_string()).collect();
        writeln!(out, "{}", line.join(","))?;
    }
    Ok(())
}

/// `x,n,S[,f_0,…,f_Nv]`, one row per node.
pub fn write_snapshot_csv(out: &mut impl Write, x: &[f64], snap: &Snapshot) -> Result<()> {
    let mut header = vec!["x".to_string(), "n".into(), "S".into()];
    match &snap.f {
        None => write_columns(out, &header, &[x, &snap.n, &snap.s]),
        Some(f) => {
            let nv = f.first().map_or(0, |fi| fi.len());
            header.extend((0..nv).map(|j| format!("f_{j}")));
            writeln!(out, "{}", header.join(","))?;
            for (i, fi) in f.iter().enumerate() {
                let mut line = vec![x[i].to_string(), snap.n[i].to_string(), snap.s[i].to_string()];
                line.extend(fi.iter().map(|v| v.to_string()));
                writeln!(out, "{}", line.join(","))?;
            }
            Ok(())
        }
    }
}

/// `Nx,error,order`; missing entries are left empty.
pub fn write_convergence_csv(out: &mut impl Write, report: &ConvergenceReport) -> Result<()> {
    writeln!(out, "Nx,error,order")?;
    let cell = |v: Option<f64>| v.map(|v| v.to_string()).unwrap_or_default();
    for row in &report.rows {
        writeln!(out, "{},{},{}", row.nx, cell(row.error), cell(row.order))?;
    }
    Ok(())
}

/// `x,n_eps=<ε>…,n_ks`.
pub fn write_sweep_csv(out: &mut impl Write, report: &SweepReport) -> Result<()> {
    let mut header = vec!["x".to_string()];
    header.extend(report.entries.iter().map(|e| format!("n_eps={}", e.eps)));
    header.push("n_ks".into());
    let mut cols: Vec<&[f64]> = vec![&report.x];
    cols.extend(report.entries.iter().map(|e| e.n.as_slice()));
    cols.push(&report.ks);
    write_columns(out, &header, &cols)
}

/// `x,n_<scheme>…`.
pub fn write_comparison_csv(out: &mut impl Write, report: &ComparisonReport) -> Result<()> {
    let mut header = vec!["x".to_string()];
    header.extend(report.profiles.iter().map(|p| format!("n_{}", p.0)));
    let mut cols: Vec<&[f64]> = vec![&report.x];
    cols.extend(report.profiles.iter().map(|p| p.1.as_slice()));
    write_columns(out, &header, &cols)
}

/// `x,n_t=<t>…`.
pub fn write_evolution_csv(out: &mut impl Write, report: &EvolutionReport) -> Result<()> {
    let mut header = vec!["x".to_string()];
    header.extend(report.snapshots.iter().map(|s| format!("n_t={}", s.0)));
    let mut cols: Vec<&[f64]> = vec![&report.x];
    cols.extend(report.snapshots.iter().map(|s| s.1.as_slice()));
    write_columns(out, &header, &cols)
}
