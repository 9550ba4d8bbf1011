//! Convergence, self-convergence, pollution and stability drivers.

use fourier_penalty::stability::{
    assemble_operator, check_rk4_containment, spectrum, ContainmentReport,
};
use fourier_penalty::Complex64;

use crate::cases::{pollution_grid, CaseId, CaseSpec, Observed, Scheme};
use crate::error::{HarnessError, Result};
use crate::run::{run_case, FieldErrors, RunOptions};

/// Least-squares slope of `log error` against `log(1/N)` and the RMS of the
/// fit residuals.
pub fn fit_rate(errors: &[f64], ns: &[usize]) -> Result<(f64, f64)> {
    if errors.len() != ns.len() || errors.len() < 2 {
        return Err(HarnessError::Study(
            "need at least two (N, error) pairs".into(),
        ));
    }
    if let Some(e) = errors.iter().find(|e| !(**e > 0.0) || !e.is_finite()) {
        return Err(HarnessError::Study(format!("nonpositive error {e}")));
    }
    let xs: Vec<f64> = ns.iter().map(|&n| -(n as f64).ln()).collect();
    let ys: Vec<f64> = errors.iter().map(|e| e.ln()).collect();
    let k = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / k;
    let my = ys.iter().sum::<f64>() / k;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let rms = (xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - my - slope * (x - mx)).powi(2))
        .sum::<f64>()
        / k)
        .sqrt();
    Ok((slope, rms))
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ConvergenceRow {
    pub n: usize,
    pub errors: FieldErrors,
}

#[derive(Clone, Debug, PartialEq)]
pub struct ConvergenceReport {
    pub case: CaseId,
    pub m: usize,
    pub rows: Vec<ConvergenceRow>,
    /// Rate of the combined (max over fields) error.
    pub rate: f64,
    pub rate_e: f64,
    pub rate_h: f64,
    pub residual: f64,
    /// False when the combined error fails to decrease somewhere.
    pub monotone: bool,
}

impl ConvergenceReport {
    fn from_rows(case: CaseId, m: usize, rows: Vec<ConvergenceRow>) -> Result<Self> {
        let ns: Vec<usize> = rows.iter().map(|r| r.n).collect();
        let all: Vec<f64> = rows.iter().map(|r| r.errors.max()).collect();
        let es: Vec<f64> = rows.iter().map(|r| r.errors.e).collect();
        let hs: Vec<f64> = rows.iter().map(|r| r.errors.h).collect();
        let (rate, residual) = fit_rate(&all, &ns)?;
        let rate_e = fit_rate(&es, &ns).map(|r| r.0).unwrap_or(f64::NAN);
        let rate_h = fit_rate(&hs, &ns).map(|r| r.0).unwrap_or(f64::NAN);
        let monotone = all.windows(2).all(|w| w[1] < w[0]);
        Ok(Self {
            case,
            m,
            rows,
            rate,
            rate_e,
            rate_h,
            residual,
            monotone,
        })
    }

    pub fn summary(&self) -> String {
        let mut s = format!("{} m={}:", self.case, self.m);
        for r in &self.rows {
            s += &format!(" N={} E={:.3e} H={:.3e};", r.n, r.errors.e, r.errors.h);
        }
        s += &format!(
            " rate={:.3} (E {:.3}, H {:.3}) rms={:.3}",
            self.rate, self.rate_e, self.rate_h, self.residual
        );
        if !self.monotone {
            s += " [non-monotone]";
        }
        s
    }
}

fn check_grids(ns: &[usize]) -> Result<()> {
    if ns.len() < 3 {
        return Err(HarnessError::Study(format!(
            "need at least 3 grids, got {}",
            ns.len()
        )));
    }
    Ok(())
}

/// Runs `base` on each grid and fits the error decay against the exact solution.
pub fn convergence_study(base: &CaseSpec, ns: &[usize]) -> Result<ConvergenceReport> {
    check_grids(ns)?;
    if !base.case.has_exact() {
        return Err(HarnessError::Study(format!(
            "{} has no exact solution; use self-convergence",
            base.case
        )));
    }
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let spec = CaseSpec { n, ..base.clone() };
        let out = run_case(&spec, RunOptions::default(), None)?;
        let errors = out.errors.expect("case has an exact solution");
        rows.push(ConvergenceRow { n, errors });
    }
    ConvergenceReport::from_rows(base.case, base.m, rows)
}

/// Errors against the run at `n_ref`, compared on the points shared with each
/// coarser grid and normalized by the reference maximum.
pub fn self_convergence_study(
    base: &CaseSpec,
    ns: &[usize],
    n_ref: usize,
) -> Result<ConvergenceReport> {
    check_grids(ns)?;
    if let Some(&bad) = ns.iter().find(|&&n| n >= n_ref || n_ref % n != 0) {
        return Err(HarnessError::Study(format!(
            "grid {bad} does not divide the reference {n_ref}"
        )));
    }
    let reference = run_case(
        &CaseSpec {
            n: n_ref,
            ..base.clone()
        },
        RunOptions::default(),
        None,
    )?;
    let rgrid = &reference.setup.grid;
    let mode = base.case.mode();
    let ru = &reference.trajectory.state;
    let scale = (0..rgrid.len())
        .filter(|&i| reference.setup.measure[i])
        .map(|i| {
            let o = Observed::from_state(mode, ru, i);
            o.e.iter().chain(&o.h).map(|v| v.abs()).fold(0.0, f64::max)
        })
        .fold(0.0, f64::max)
        .max(f64::MIN_POSITIVE);
    let mut rows = Vec::with_capacity(ns.len());
    for &n in ns {
        let out = run_case(&CaseSpec { n, ..base.clone() }, RunOptions::default(), None)?;
        let g = &out.setup.grid;
        let r = n_ref / n;
        let (mut de, mut dh) = (0.0f64, 0.0f64);
        for i in 0..g.len() {
            if !out.setup.measure[i] {
                continue;
            }
            let mi = g.multi_index(i);
            let fine: Vec<usize> = mi[..g.dim()].iter().map(|&k| k * r).collect();
            let j = rgrid.flat_index(&fine);
            let a = Observed::from_state(mode, &out.trajectory.state, i);
            let b = Observed::from_state(mode, ru, j);
            de =
                a.e.iter()
                    .zip(&b.e)
                    .map(|(x, y)| (x - y).abs())
                    .fold(de, f64::max);
            dh =
                a.h.iter()
                    .zip(&b.h)
                    .map(|(x, y)| (x - y).abs())
                    .fold(dh, f64::max);
        }
        rows.push(ConvergenceRow {
            n,
            errors: FieldErrors {
                e: de / scale,
                h: dh / scale,
            },
        });
    }
    ConvergenceReport::from_rows(base.case, base.m, rows)
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PollutionRow {
    pub omega0: f64,
    pub n: usize,
    pub scheme: Scheme,
    pub error: f64,
}

/// Step coefficient used by the dispersion sweep for a given `m`.
pub fn pollution_dt_coeff(m: usize) -> f64 {
    if m >= 2 {
        0.2
    } else {
        0.5
    }
}

/// Runs the 1D pulse at fixed points per wavelength for each carrier.
pub fn pollution_study(
    ppwl: f64,
    omegas: &[f64],
    m: usize,
    scheme: Scheme,
) -> Result<Vec<PollutionRow>> {
    if !(ppwl >= 8.0) {
        return Err(HarnessError::Study(format!(
            "ppwl = {ppwl} must be at least 8"
        )));
    }
    let mut rows = Vec::with_capacity(omegas.len());
    for &w in omegas {
        let spec = CaseSpec {
            n: pollution_grid(ppwl, w),
            m,
            omega0: w,
            scheme,
            dt_coeff: pollution_dt_coeff(m),
            ..CaseSpec::defaults(CaseId::Pollution1d)
        };
        let out = run_case(&spec, RunOptions::default(), None)?;
        let e = out.errors.expect("pollution case has an exact solution");
        rows.push(PollutionRow {
            omega0: w,
            n: spec.n,
            scheme,
            error: e.max(),
        });
    }
    Ok(rows)
}

/// Eigenvalues of the assembled operator and their RK4 containment at the
/// case's step.
pub fn stability_study(spec: &CaseSpec, slack: f64) -> Result<(Vec<Complex64>, ContainmentReport)> {
    let setup = spec.build()?;
    let (_, dt) = setup.run.steps().map_err(|e| spec.wrap(e))?;
    let op = assemble_operator(&setup.problem, setup.run.t_start).map_err(|e| spec.wrap(e))?;
    let eigs = spectrum(&op).map_err(|e| spec.wrap(e))?;
    let report = check_rk4_containment(&eigs, dt, slack);
    Ok((eigs, report))
}
