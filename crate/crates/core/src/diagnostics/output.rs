//! CSV writers for diagnostic and iterate records.

use std::io::Write;

use super::records::{DiagnosticRecord, CSV_COLUMNS};
use crate::euler::IterateRecord;

pub fn write_diagnostics_csv<W: Write>(mut out: W, records: &[DiagnosticRecord]) -> std::io::Result<()> {
    writeln!(out, "{}", CSV_COLUMNS.join(","))?;
    for r in records {
        let row: Vec<String> = r.row().iter().map(|v| format!("{v:e}")).collect();
        writeln!(out, "{}", row.join(","))?;
    }
    Ok(())
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| format!("{x:e}"))
}

pub fn write_iterate_csv<W: Write>(mut out: W, records: &[IterateRecord]) -> std::io::Result<()> {
    writeln!(
        out,
        "n,norm_sigma_crit,norm_u_crit,norm_u_l1,norm_grad_sigma,norm_grad_u,delta_u,delta_sigma"
    )?;
    for r in records {
        writeln!(
            out,
            "{},{:e},{:e},{:e},{:e},{:e},{},{}",
            r.n,
            r.norm_sigma_crit,
            r.norm_u_crit,
            r.norm_u_l1,
            r.norm_grad_sigma,
            r.norm_grad_u,
            opt(r.delta_u),
            opt(r.delta_sigma)
        )?;
    }
    Ok(())
}
