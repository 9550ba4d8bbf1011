//! Closed-form reference solutions.

mod bessel;
mod reflection;

pub use bessel::{bessel_j, bessel_root, cavity_mode_cartesian, cavity_mode_exact};
pub use reflection::{reflection_expansion, reflection_matching, ReflectionSolution};

use crate::error::Point;

/// Modulated Gaussian `f(α) = e^{-½(α/σ)²} sin(ω₀ α)` with amplitude and center.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PulseParams {
    pub e0: f64,
    pub x0: f64,
    pub sigma: f64,
    pub omega0: f64,
}

impl PulseParams {
    pub fn f(&self, a: f64) -> f64 {
        (-0.5 * (a / self.sigma).powi(2)).exp() * (self.omega0 * a).sin()
    }
}

/// Incident plus reflected pulse on `x ≥ 0` with a conductor at `x = 0`;
/// returns `(H_y, E_z)`.
pub fn gaussian_1d_exact(x: f64, t: f64, p: &PulseParams) -> (f64, f64) {
    if x < 0.0 {
        return (0.0, 0.0);
    }
    let inc = p.f(t + x - p.x0);
    let refl = p.f(t - x - p.x0);
    (p.e0 * (inc + refl), p.e0 * (inc - refl))
}

/// TM manufactured triple `(H_x, H_y, E_z)`.
pub fn manufactured_tm_exact(x: f64, y: f64, t: f64) -> (f64, f64, f64) {
    (
        x.sin() * y.sin() * t.sin(),
        x.cos() * y.cos() * t.sin(),
        x.sin() * y.cos() * t.cos(),
    )
}

/// TE manufactured triple `(E_x, E_y, H_z)`.
pub fn manufactured_te_exact(x: f64, y: f64, t: f64) -> (f64, f64, f64) {
    (
        -x.sin() * y.sin() * t.sin(),
        -x.cos() * y.cos() * t.sin(),
        x.sin() * y.cos() * t.cos(),
    )
}

/// Source for both manufactured problems, `sin x cos y sin t`.
pub fn manufactured_forcing(x: f64, y: f64, t: f64) -> f64 {
    x.sin() * y.cos() * t.sin()
}

/// Standing wave `(E, H)` with `k = (1,1,1)/√3` and amplitude `e0`.
pub fn standing_wave_3d_exact(x: &Point, t: f64, e0: [f64; 3]) -> ([f64; 3], [f64; 3]) {
    let s3 = 3f64.sqrt();
    let k = [1.0 / s3; 3];
    let phase = s3 * (k[0] * x[0] + k[1] * x[1] + k[2] * x[2]);
    let kxe = [
        k[1] * e0[2] - k[2] * e0[1],
        k[2] * e0[0] - k[0] * e0[2],
        k[0] * e0[1] - k[1] * e0[0],
    ];
    let ce = 2.0 * (s3 * t).cos() * phase.cos();
    let sh = 2.0 * (s3 * t).sin() * phase.sin();
    (e0.map(|v| v * ce), kxe.map(|v| v * sh))
}

/// Default standing-wave amplitude.
pub const STANDING_WAVE_E0: [f64; 3] = [1.0, -2.0, 1.0];

/// Start time at which the standing-wave electric field vanishes.
pub fn standing_wave_t0() -> f64 {
    std::f64::consts::PI / (2.0 * 3f64.sqrt())
}
