//! Reflection of a TM plane wave by a penalized flat wall.

use rustfft::num_complex::Complex64;

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ReflectionSolution {
    pub r: Complex64,
    /// Integration constant of the interior solution.
    pub e0: Complex64,
    pub gamma: Complex64,
}

/// Root of `γ² = ω² - k_y² - iω/η` with `Re{iγ} ≥ 0` (ties: `Im{iγ} ≤ 0`).
fn gamma(omega: f64, ky: f64, eta: f64) -> Complex64 {
    let g2 = Complex64::new(omega * omega - ky * ky, -omega / eta);
    let r = g2.sqrt();
    let i = Complex64::new(0.0, 1.0);
    let (a, b) = ((i * r), (i * -r));
    let pick_first = if a.re != b.re {
        a.re > b.re
    } else {
        a.im <= 0.0
    };
    if pick_first {
        r
    } else {
        -r
    }
}

/// Solves the two continuity conditions at `x = h` for `(E_0, R)` with the
/// quadratic model extension `x(x+1)/(h(h+1)) Ê(h)` and unit incident amplitude.
pub fn reflection_matching(eta: f64, h: f64, kx: f64, ky: f64) -> Result<ReflectionSolution> {
    let omega = kx.hypot(ky);
    if !(omega > 0.0) || !(eta > 0.0) || !(h > 0.0) {
        return Err(Error::InvalidParameter("need ω, η, h > 0".into()));
    }
    let i = Complex64::new(0.0, 1.0);
    let g = gamma(omega, ky, eta);
    let g2 = g * g;
    let a = i * omega / (eta * h * (h + 1.0));
    let c1 = 2.0 / (g2 * g2) - h / g2 - h * h / g2;
    let c2 = -1.0 / g2 - 2.0 * h / g2;
    // E0 + (1 - a c1) R = 1 - a c1
    // iγ E0 - (a c2 + i kx) R = i kx - a c2
    let (m11, m12, b1) = (Complex64::new(1.0, 0.0), 1.0 - a * c1, 1.0 - a * c1);
    let (m21, m22, b2) = (i * g, -(a * c2 + i * kx), i * kx - a * c2);
    let det = m11 * m22 - m12 * m21;
    if det.norm() < 1e-300 || !det.is_finite() {
        return Err(Error::InvalidParameter("singular matching system".into()));
    }
    let e0 = (b1 * m22 - m12 * b2) / det;
    let r = (m11 * b2 - b1 * m21) / det;
    Ok(ReflectionSolution { r, e0, gamma: g })
}

/// `R ≈ (1 - 2ihk_x) - 2√2(1+i)k_x ω^{-1/2} √η h + 2k_x ω^{-1}(k_x² - 4) η h`.
pub fn reflection_expansion(eta: f64, h: f64, kx: f64, ky: f64) -> Complex64 {
    let omega = kx.hypot(ky);
    let i = Complex64::new(0.0, 1.0);
    (1.0 - 2.0 * i * h * kx) - 2.0 * 2f64.sqrt() * (1.0 + i) * kx / omega.sqrt() * eta.sqrt() * h
        + 2.0 * kx / omega * (kx * kx - 4.0) * eta * h
}
