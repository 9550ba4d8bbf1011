//! Test-case registry and study drivers for the Fourier penalty solver.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod cases;
pub mod config;
pub mod error;
pub mod output;
pub mod run;
pub mod study;

pub use cases::{CaseId, CaseSpec, Scheme};
pub use error::{HarnessError, Result};
pub use run::{run_case, FieldErrors, RunOptions, RunOutput};
pub use study::{
    convergence_study, fit_rate, pollution_study, self_convergence_study, stability_study,
};
