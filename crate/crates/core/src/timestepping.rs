//! Classical RK4 with per-stage penalty rebuild and post-step projection.

use std::f64::consts::PI;
use std::io::Write;
use std::path::Path;

use rustfft::num_complex::Complex64;

use crate::equations::Problem;
use crate::error::{Error, Result};
use crate::spectral::ScalarField;

/// `Δt < 2.83 / (π √d) · D / N`.
pub fn max_stable_dt(dim: usize, length: f64, n: usize) -> f64 {
    2.83 / (PI * (dim as f64).sqrt()) * length / n as f64
}

/// `|1 + z + z²/2 + z³/6 + z⁴/24|²`.
pub fn rk4_amplification(z: Complex64) -> f64 {
    let p = Complex64::new(1.0, 0.0) + z * (1.0 + z * (0.5 + z * (1.0 / 6.0 + z / 24.0)));
    p.norm_sqr()
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub dt: f64,
    pub t_final: f64,
    pub t_start: f64,
    /// Keep every `k`-th state (the initial state is always kept).
    pub snapshot_stride: Option<usize>,
}

impl RunConfig {
    pub fn new(dt: f64, t_final: f64) -> Self {
        Self {
            dt,
            t_final,
            t_start: 0.0,
            snapshot_stride: None,
        }
    }

    /// Number of steps and the step actually used, so that the run ends on `t_final`.
    pub fn steps(&self) -> Result<(usize, f64)> {
        let span = self.t_final - self.t_start;
        if !(self.dt > 0.0) || !(span >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "need dt > 0 and t_final >= t_start (dt = {}, span = {span})",
                self.dt
            )));
        }
        if span == 0.0 {
            return Ok((0, self.dt));
        }
        let n = (span / self.dt - 1e-9).ceil().max(1.0) as usize;
        Ok((n, span / n as f64))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepDiagnostics {
    pub step: usize,
    pub t: f64,
    pub energy_physical: f64,
    pub energy_total: f64,
    pub max_div: f64,
}

#[derive(Clone, Debug)]
pub struct Trajectory {
    pub state: Vec<ScalarField>,
    pub t: f64,
    pub dt: f64,
    pub diagnostics: Vec<StepDiagnostics>,
    pub snapshots: Vec<(f64, Vec<ScalarField>)>,
}

impl Trajectory {
    pub fn write_diagnostics<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record([
            "step",
            "t",
            "energy_physical",
            "energy_total",
            "max_div_masked",
        ])?;
        for d in &self.diagnostics {
            w.write_record([
                d.step.to_string(),
                format!("{:.17e}", d.t),
                format!("{:.17e}", d.energy_physical),
                format!("{:.17e}", d.energy_total),
                format!("{:.17e}", d.max_div),
            ])?;
        }
        w.flush()?;
        Ok(())
    }
}

fn diagnostics(
    problem: &Problem,
    step: usize,
    t: f64,
    u: &[ScalarField],
    with_div: bool,
) -> Result<StepDiagnostics> {
    let (ep, et) = problem.energy(u);
    let max_div = if with_div {
        problem.masked_divergence(u)?
    } else {
        0.0
    };
    Ok(StepDiagnostics {
        step,
        t,
        energy_physical: ep,
        energy_total: et,
        max_div,
    })
}

fn axpy(out: &mut [ScalarField], base: &[ScalarField], a: f64, k: &[ScalarField]) {
    for ((o, b), kk) in out.iter_mut().zip(base).zip(k) {
        for ((oi, bi), ki) in o.iter_mut().zip(b).zip(kk) {
            *oi = bi + a * ki;
        }
    }
}

/// Options controlling what `evolve` records.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EvolveOptions {
    /// Compute the masked divergence every step (costs extra transforms).
    pub divergence_diagnostics: bool,
}

impl Default for EvolveOptions {
    fn default() -> Self {
        Self {
            divergence_diagnostics: true,
        }
    }
}

pub fn evolve(problem: &Problem, run: &RunConfig, initial: Vec<ScalarField>) -> Result<Trajectory> {
    evolve_with(
        problem,
        run,
        initial,
        EvolveOptions::default(),
        |_, _, _| Ok(()),
    )
}

/// RK4 time loop; `observer(step, t, state)` runs after every step.
pub fn evolve_with<F>(
    problem: &Problem,
    run: &RunConfig,
    initial: Vec<ScalarField>,
    opts: EvolveOptions,
    mut observer: F,
) -> Result<Trajectory>
where
    F: FnMut(usize, f64, &[ScalarField]) -> Result<()>,
{
    let (nsteps, dt) = run.steps()?;
    let mut u = initial;
    if u.len() != problem.n_components() {
        return Err(Error::InvalidParameter(format!(
            "initial state has {} components, expected {}",
            u.len(),
            problem.n_components()
        )));
    }
    let mut t = run.t_start;
    let mut diags = vec![diagnostics(problem, 0, t, &u, opts.divergence_diagnostics)?];
    let mut snaps = Vec::new();
    if run.snapshot_stride.is_some() {
        snaps.push((t, u.clone()));
    }
    let mut k: Vec<Vec<ScalarField>> = (0..4).map(|_| problem.zero_state()).collect();
    let mut stage = problem.zero_state();

    for step in 1..=nsteps {
        problem.rhs(t, &u, &mut k[0])?;
        axpy(&mut stage, &u, 0.5 * dt, &k[0]);
        problem.rhs(t + 0.5 * dt, &stage, &mut k[1])?;
        axpy(&mut stage, &u, 0.5 * dt, &k[1]);
        problem.rhs(t + 0.5 * dt, &stage, &mut k[2])?;
        axpy(&mut stage, &u, dt, &k[2]);
        problem.rhs(t + dt, &stage, &mut k[3])?;
        for (c, uc) in u.iter_mut().enumerate() {
            for (i, v) in uc.iter_mut().enumerate() {
                *v += dt / 6.0 * (k[0][c][i] + 2.0 * k[1][c][i] + 2.0 * k[2][c][i] + k[3][c][i]);
            }
        }
        problem.project(&mut u)?;
        t = run.t_start + step as f64 * dt;
        if u.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::NonFinite { step, t });
        }
        diags.push(diagnostics(
            problem,
            step,
            t,
            &u,
            opts.divergence_diagnostics,
        )?);
        if let Some(s) = run.snapshot_stride {
            if s > 0 && step % s == 0 {
                snaps.push((t, u.clone()));
            }
        }
        observer(step, t, &u)?;
    }
    Ok(Trajectory {
        state: u,
        t,
        dt,
        diagnostics: diags,
        snapshots: snaps,
    })
}

/// Writes one row per grid point: coordinates followed by each component.
pub fn write_field_csv<P: AsRef<Path>>(
    problem: &Problem,
    u: &[ScalarField],
    t: f64,
    path: P,
) -> Result<()> {
    let grid = problem.grid();
    let file = std::fs::File::create(path)?;
    let mut buf = std::io::BufWriter::new(file);
    writeln!(
        buf,
        "# mode={:?} dim={} N={} D={} origin={:?} t={t:.17e}",
        problem.mode(),
        grid.dim(),
        grid.n(),
        grid.length(),
        &grid.origin()[..grid.dim()]
    )?;
    let mut w = csv::Writer::from_writer(buf);
    let mut header: Vec<String> = ["x", "y", "z"][..grid.dim()]
        .iter()
        .map(|s| s.to_string())
        .collect();
    header.extend(problem.component_names().iter().map(|s| s.to_string()));
    w.write_record(&header)?;
    for i in 0..grid.len() {
        let p = grid.coords(i);
        let mut rec: Vec<String> = p[..grid.dim()]
            .iter()
            .map(|v| format!("{v:.17e}"))
            .collect();
        rec.extend(u.iter().map(|c| format!("{:.17e}", c[i])));
        w.write_record(&rec)?;
    }
    w.flush()?;
    Ok(())
}
