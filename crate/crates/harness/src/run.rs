//! Single-case execution and error measurement.

use std::path::Path;

use fourier_penalty::equations::Problem;
use fourier_penalty::timestepping::{evolve_with, write_field_csv, EvolveOptions, Trajectory};
use fourier_penalty::ScalarField;

use crate::cases::{CaseSpec, ExactFn, Observed, Setup};
use crate::error::Result;
use crate::output;

/// L∞ errors over the measured points, split by field.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldErrors {
    pub e: f64,
    pub h: f64,
}

impl FieldErrors {
    pub fn max(&self) -> f64 {
        self.e.max(self.h)
    }
}

pub struct RunOutput {
    pub spec: CaseSpec,
    pub steps: usize,
    pub dt: f64,
    pub trajectory: Trajectory,
    pub errors: Option<FieldErrors>,
    pub setup: Setup,
}

#[derive(Clone, Copy, Debug, Default)]
pub struct RunOptions {
    pub divergence_diagnostics: bool,
}

pub fn measure_errors(setup: &Setup, exact: &ExactFn, u: &[ScalarField], t: f64) -> FieldErrors {
    let mode = setup.problem.mode();
    let per_point = fourier_penalty::parallel::map_indices(setup.grid.len(), |i| {
        if !setup.measure[i] {
            return (0.0f64, 0.0f64);
        }
        let num = Observed::from_state(mode, u, i);
        let ex = exact(&setup.grid.coords(i), t);
        let de = num
            .e
            .iter()
            .zip(&ex.e)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        let dh = num
            .h
            .iter()
            .zip(&ex.h)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        (de, dh)
    });
    let (e, h) = per_point
        .into_iter()
        .fold((0.0f64, 0.0f64), |(a, b), (c, d)| (a.max(c), b.max(d)));
    FieldErrors { e, h }
}

/// Builds and integrates a case; with `out` set, writes the diagnostics,
/// final field and (when an exact solution exists) error row.
pub fn run_case(spec: &CaseSpec, opts: RunOptions, out: Option<&Path>) -> Result<RunOutput> {
    let setup = spec.build()?;
    let (steps, dt) = setup.run.steps().map_err(|e| spec.wrap(e))?;
    let evo = EvolveOptions {
        divergence_diagnostics: opts.divergence_diagnostics,
    };
    let trajectory = evolve_with(
        &setup.problem,
        &setup.run,
        setup.initial.clone(),
        evo,
        |_, _, _| Ok(()),
    )
    .map_err(|e| spec.wrap(e))?;
    let errors = setup
        .exact
        .as_ref()
        .map(|f| measure_errors(&setup, f, &trajectory.state, trajectory.t));
    let result = RunOutput {
        spec: spec.clone(),
        steps,
        dt,
        trajectory,
        errors,
        setup,
    };
    if let Some(dir) = out {
        write_run(&result, dir)?;
    }
    Ok(result)
}

fn write_run(r: &RunOutput, dir: &Path) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    r.trajectory
        .write_diagnostics(dir.join("diagnostics.csv"))
        .map_err(|e| r.spec.wrap(e))?;
    write_state(&r.setup.problem, &r.trajectory.state, r.trajectory.t, dir)?;
    if let Some(err) = r.errors {
        output::write_errors_csv(dir.join("errors.csv"), &[(r.spec.n, err)], None)?;
    }
    Ok(())
}

pub fn write_state(problem: &Problem, u: &[ScalarField], t: f64, dir: &Path) -> Result<()> {
    let path = dir.join(format!("field_{t:.6}.csv"));
    write_field_csv(problem, u, t, path)?;
    Ok(())
}
