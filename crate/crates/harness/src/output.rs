//! CSV writers for study results.

use std::path::Path;

use crate::run::FieldErrors;
use crate::study::{ConvergenceReport, PollutionRow};

/// `N, Linf_E, Linf_H, rate_E, rate_H`; rates are pairwise between
/// consecutive rows (empty on the first).
pub fn write_errors_csv<P: AsRef<Path>>(
    path: P,
    rows: &[(usize, FieldErrors)],
    _fit: Option<&ConvergenceReport>,
) -> csv::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["N", "Linf_E", "Linf_H", "rate_E", "rate_H"])?;
    for (k, (n, e)) in rows.iter().enumerate() {
        let (re, rh) = if k == 0 {
            (String::new(), String::new())
        } else {
            let (n0, e0) = rows[k - 1];
            let lr = (*n as f64 / n0 as f64).ln();
            (
                format!("{:.6}", (e0.e / e.e).ln() / lr),
                format!("{:.6}", (e0.h / e.h).ln() / lr),
            )
        };
        w.write_record([
            n.to_string(),
            format!("{:.17e}", e.e),
            format!("{:.17e}", e.h),
            re,
            rh,
        ])?;
    }
    w.flush()?;
    Ok(())
}

pub fn write_report_csv<P: AsRef<Path>>(path: P, report: &ConvergenceReport) -> csv::Result<()> {
    let rows: Vec<(usize, FieldErrors)> = report.rows.iter().map(|r| (r.n, r.errors)).collect();
    write_errors_csv(path, &rows, Some(report))
}

pub fn write_pollution_csv<P: AsRef<Path>>(path: P, rows: &[PollutionRow]) -> csv::Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["omega0", "N", "scheme", "Linf"])?;
    for r in rows {
        w.write_record([
            format!("{}", r.omega0),
            r.n.to_string(),
            format!("{:?}", r.scheme),
            format!("{:.17e}", r.error),
        ])?;
    }
    w.flush()?;
    Ok(())
}
