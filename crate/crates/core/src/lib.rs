//! Fourier active-penalty solver for Maxwell's equations with embedded
//! perfect-conductor boundaries in periodic boxes.

#![allow(clippy::neg_cmp_op_on_partial_ord, clippy::needless_range_loop)]

pub mod equations;
pub mod error;
pub mod geometry;
pub mod interp;
pub mod oracles;
pub mod parallel;
pub mod penalty;
pub mod spectral;
pub mod stability;
pub mod timestepping;

pub use error::{Error, Point, Result};
pub use rustfft::num_complex::Complex64;
pub use spectral::{wavenumbers, Grid, ScalarField, Spectral};
