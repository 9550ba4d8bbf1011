//! Right-hand sides of the penalized Maxwell systems.

use std::sync::Arc;

use rustfft::num_complex::Complex64;

use crate::error::{Error, Point, Result};
use crate::parallel;
use crate::penalty::{BoundaryData, PenaltyOperator, ScalarFn};
use crate::spectral::{Grid, ScalarField, Spectral};

/// Field layout per mode.
///
/// | mode   | components                              |
/// |--------|-----------------------------------------|
/// | OneD   | `H_y, E_z`                              |
/// | Tm     | `H_x, H_y, E_z` (+ `Φ` with a PML)      |
/// | Te     | `E_x, E_y, H_zx, H_zy`                  |
/// | Full3d | `H_x, H_y, H_z, E_x, E_y, E_z`          |
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Mode {
    OneD,
    Tm,
    Te,
    Full3d,
}

impl Mode {
    pub fn dim(self) -> usize {
        match self {
            Mode::OneD => 1,
            Mode::Tm | Mode::Te => 2,
            Mode::Full3d => 3,
        }
    }

    pub fn component_names(self, with_pml: bool) -> Vec<&'static str> {
        match self {
            Mode::OneD => vec!["H_y", "E_z"],
            Mode::Tm if with_pml => vec!["H_x", "H_y", "E_z", "Phi"],
            Mode::Tm => vec!["H_x", "H_y", "E_z"],
            Mode::Te => vec!["E_x", "E_y", "H_zx", "H_zy"],
            Mode::Full3d => vec!["H_x", "H_y", "H_z", "E_x", "E_y", "E_z"],
        }
    }

    /// Indices of the electric field components.
    pub fn e_components(self) -> &'static [usize] {
        match self {
            Mode::OneD => &[1],
            Mode::Tm => &[2],
            Mode::Te => &[0, 1],
            Mode::Full3d => &[3, 4, 5],
        }
    }

    /// Whether the post-step divergence projection applies.
    pub fn projects(self) -> bool {
        matches!(self, Mode::Te | Mode::Full3d)
    }
}

/// Spatial derivative used for the curl terms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum DerivativeScheme {
    #[default]
    Spectral,
    /// Periodic centered second-order differences.
    Fd2,
    /// Periodic centered fourth-order differences.
    Fd4,
}

/// Source term added to `E_z` (TM) or `H_zx` (TE).
#[derive(Clone)]
pub enum Forcing {
    /// `spatial(x) · temporal(t)` with the spatial factor pre-sampled.
    Separable {
        spatial: ScalarField,
        temporal: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
    General(ScalarFn),
}

impl std::fmt::Debug for Forcing {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Forcing::Separable { .. } => "Separable",
            Forcing::General(_) => "General",
        })
    }
}

/// Time dependence of the PML strength.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub enum TemporalRamp {
    #[default]
    None,
    /// `σ(t) = σ · min(t / t_full, 1)³`.
    Cubic { t_full: f64 },
}

impl TemporalRamp {
    pub fn factor(self, t: f64) -> f64 {
        match self {
            TemporalRamp::None => 1.0,
            TemporalRamp::Cubic { t_full } => (t / t_full).clamp(0.0, 1.0).powi(3),
        }
    }
}

/// Absorbing-layer conductivities sampled on the grid.
#[derive(Clone, Debug, PartialEq)]
pub struct PmlProfile {
    pub sigma_x: ScalarField,
    pub sigma_y: ScalarField,
    pub sigma_max: [f64; 2],
    pub width: [f64; 2],
    pub ramp: TemporalRamp,
}

/// One slab per axis in `axes`, centered on the periodic seam: σ rises
/// linearly from 0 at each slab edge to `sigma_max` at the seam.
pub fn build_pml_profile(
    grid: &Grid,
    axes: &[usize],
    sigma_max: f64,
    slab_width: f64,
    ramp: TemporalRamp,
) -> Result<PmlProfile> {
    if grid.dim() != 2 {
        return Err(Error::InvalidParameter(
            "PML profiles are two-dimensional".into(),
        ));
    }
    if !(slab_width > 0.0) || slab_width >= grid.length() {
        return Err(Error::InvalidParameter(format!(
            "slab width {slab_width} must be in (0, D)"
        )));
    }
    if !(sigma_max >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "sigma_max {sigma_max} must be >= 0"
        )));
    }
    if let TemporalRamp::Cubic { t_full } = ramp {
        if !(t_full > 0.0) {
            return Err(Error::InvalidParameter(
                "ramp duration must be positive".into(),
            ));
        }
    }
    let d = grid.length();
    let origin = grid.origin();
    let half = 0.5 * slab_width;
    let profile = |axis: usize| -> ScalarField {
        if !axes.contains(&axis) {
            return vec![0.0; grid.len()];
        }
        grid.sample(|p| {
            let u = (p[axis] - origin[axis]).rem_euclid(d);
            let dist = u.min(d - u);
            if dist < half {
                sigma_max * (1.0 - dist / half)
            } else {
                0.0
            }
        })
    };
    let mut sm = [0.0; 2];
    let mut w = [0.0; 2];
    for &a in axes {
        if a > 1 {
            return Err(Error::InvalidParameter(format!(
                "PML axis {a} out of range"
            )));
        }
        sm[a] = sigma_max;
        w[a] = slab_width;
    }
    Ok(PmlProfile {
        sigma_x: profile(0),
        sigma_y: profile(1),
        sigma_max: sm,
        width: w,
        ramp,
    })
}

/// A fully specified semi-discrete system.
#[derive(Clone, Debug)]
pub struct Problem {
    mode: Mode,
    grid: Grid,
    spectral: Spectral,
    d1: Vec<Complex64>,
    penalty: Option<PenaltyOperator>,
    chi: ScalarField,
    /// Quadrature weights of the physical region `ψ > 0`: one inside, one
    /// half on grid points lying on the boundary.
    physical: ScalarField,
    boundary: BoundaryData,
    forcing: Option<Forcing>,
    pml: Option<PmlProfile>,
    scheme: DerivativeScheme,
    projection: bool,
}

impl Problem {
    pub fn new(mode: Mode, grid: &Grid) -> Result<Self> {
        if grid.dim() != mode.dim() {
            return Err(Error::InvalidParameter(format!(
                "{mode:?} needs a {}-dimensional grid",
                mode.dim()
            )));
        }
        let spectral = Spectral::new(grid)?;
        let d1 = spectral.multiplier(1, None);
        Ok(Self {
            mode,
            grid: grid.clone(),
            spectral,
            d1,
            penalty: None,
            chi: vec![0.0; grid.len()],
            physical: vec![1.0; grid.len()],
            boundary: BoundaryData::Zero,
            forcing: None,
            pml: None,
            scheme: DerivativeScheme::Spectral,
            projection: mode.projects(),
        })
    }

    pub fn with_penalty(mut self, op: PenaltyOperator) -> Result<Self> {
        if op.grid() != &self.grid {
            return Err(Error::InvalidParameter(
                "penalty operator built on another grid".into(),
            ));
        }
        let cfg = op.config();
        match self.mode {
            Mode::Tm if cfg.m > 1 => {
                return Err(Error::InvalidParameter("TM mode supports m <= 1".into()));
            }
            Mode::Te | Mode::Full3d if cfg.m > 0 => {
                return Err(Error::InvalidParameter(
                    "vector modes support m = 0 only".into(),
                ));
            }
            _ => {}
        }
        self.chi = op.chi().clone();
        self.physical = self
            .chi
            .iter()
            .map(|c| if *c == 0.0 { 1.0 } else { 0.0 })
            .collect();
        let tiny = 1e-12 * self.grid.dx();
        for r in op.table().rays() {
            if r.s > tiny {
                self.physical[r.index] = 1.0;
            } else if r.s.abs() <= tiny {
                self.physical[r.index] = 0.5;
            }
        }
        self.penalty = Some(op);
        self.check_overlap(false)?;
        Ok(self)
    }

    pub fn with_boundary(mut self, g: BoundaryData) -> Self {
        self.boundary = g;
        self
    }

    pub fn with_forcing(mut self, f: Forcing) -> Result<Self> {
        if !matches!(self.mode, Mode::Tm | Mode::Te) {
            return Err(Error::InvalidParameter(
                "forcing is defined for TM and TE only".into(),
            ));
        }
        if let Forcing::Separable { spatial, .. } = &f {
            if spatial.len() != self.grid.len() {
                return Err(Error::ShapeMismatch {
                    expected: self.grid.len(),
                    got: spatial.len(),
                });
            }
        }
        self.forcing = Some(f);
        Ok(self)
    }

    /// Attaches a PML; overlap with the penalty band is an error unless allowed.
    pub fn with_pml(mut self, pml: PmlProfile, allow_overlap: bool) -> Result<Self> {
        if !matches!(self.mode, Mode::Tm | Mode::Te) {
            return Err(Error::InvalidParameter(
                "PML is defined for TM and TE only".into(),
            ));
        }
        if pml.sigma_x.len() != self.grid.len() || pml.sigma_y.len() != self.grid.len() {
            return Err(Error::ShapeMismatch {
                expected: self.grid.len(),
                got: pml.sigma_x.len(),
            });
        }
        self.pml = Some(pml);
        self.check_overlap(allow_overlap)?;
        Ok(self)
    }

    pub fn with_scheme(mut self, scheme: DerivativeScheme) -> Self {
        self.scheme = scheme;
        self
    }

    pub fn with_projection(mut self, on: bool) -> Self {
        self.projection = on && self.mode.projects();
        self
    }

    /// `max χ (σ_x + σ_y)`; zero when the regions are disjoint.
    pub fn penalty_pml_overlap(&self) -> f64 {
        let Some(p) = &self.pml else { return 0.0 };
        self.chi
            .iter()
            .zip(p.sigma_x.iter().zip(&p.sigma_y))
            .map(|(c, (sx, sy))| c * (sx + sy))
            .fold(0.0, f64::max)
    }

    fn check_overlap(&self, allow: bool) -> Result<()> {
        let o = self.penalty_pml_overlap();
        if o != 0.0 && !allow {
            return Err(Error::PenaltyPmlOverlap(o));
        }
        Ok(())
    }

    /// Same system with zero boundary data and no forcing.
    pub fn homogeneous(&self) -> Self {
        let mut p = self.clone();
        p.boundary = BoundaryData::Zero;
        p.forcing = None;
        p
    }

    pub fn mode(&self) -> Mode {
        self.mode
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn spectral(&self) -> &Spectral {
        &self.spectral
    }

    pub fn penalty(&self) -> Option<&PenaltyOperator> {
        self.penalty.as_ref()
    }

    pub fn chi(&self) -> &ScalarField {
        &self.chi
    }

    /// Quadrature weights of the physical region, including the band `0 < s < h`.
    pub fn physical(&self) -> &ScalarField {
        &self.physical
    }

    pub fn pml(&self) -> Option<&PmlProfile> {
        self.pml.as_ref()
    }

    pub fn boundary(&self) -> &BoundaryData {
        &self.boundary
    }

    pub fn projection(&self) -> bool {
        self.projection
    }

    pub fn scheme(&self) -> DerivativeScheme {
        self.scheme
    }

    pub fn n_components(&self) -> usize {
        self.component_names().len()
    }

    pub fn component_names(&self) -> Vec<&'static str> {
        self.mode.component_names(self.pml.is_some())
    }

    pub fn zero_state(&self) -> Vec<ScalarField> {
        vec![vec![0.0; self.grid.len()]; self.n_components()]
    }

    /// First derivative along `axis` with the configured scheme.
    pub fn derivative(&self, f: &[f64], axis: usize) -> ScalarField {
        let mut out = vec![0.0; f.len()];
        self.derivative_into(f, axis, &mut out);
        out
    }

    fn derivative_into(&self, f: &[f64], axis: usize, out: &mut [f64]) {
        match self.scheme {
            DerivativeScheme::Spectral => self.spectral.apply_along_axis(f, axis, &self.d1, out),
            DerivativeScheme::Fd2 => fd_derivative(&self.grid, f, axis, &[(1, 0.5)], out),
            DerivativeScheme::Fd4 => fd_derivative(
                &self.grid,
                f,
                axis,
                &[(1, 2.0 / 3.0), (2, -1.0 / 12.0)],
                out,
            ),
        }
    }

    fn forcing_at(&self, t: f64) -> Option<ScalarField> {
        match self.forcing.as_ref()? {
            Forcing::Separable { spatial, temporal } => {
                let s = temporal(t);
                Some(spatial.iter().map(|v| v * s).collect())
            }
            Forcing::General(f) => Some(self.grid.sample(|p| f(p, t))),
        }
    }

    fn sigmas(&self, t: f64) -> Option<(f64, &PmlProfile)> {
        self.pml.as_ref().map(|p| (p.ramp.factor(t), p))
    }

    /// Scalar penalty target for 1D and TM.
    pub fn gtilde_scalar(&self, e: &[f64], t: f64) -> Result<ScalarField> {
        let mut out = vec![0.0; e.len()];
        if let Some(op) = &self.penalty {
            op.gtilde_scalar(&self.spectral, e, &self.boundary, t, &mut out)?;
        }
        Ok(out)
    }

    /// Vector penalty target for TE and 3D.
    pub fn gtilde_vector(&self, e: &[&[f64]], t: f64) -> Result<Vec<ScalarField>> {
        let mut out = vec![vec![0.0; self.grid.len()]; e.len()];
        if let Some(op) = &self.penalty {
            op.gtilde_vector(e, &self.boundary, t, &mut out)?;
        }
        Ok(out)
    }

    fn check_state(&self, u: &[ScalarField]) -> Result<()> {
        if u.len() != self.n_components() {
            return Err(Error::InvalidParameter(format!(
                "state has {} components, {:?} expects {}",
                u.len(),
                self.mode,
                self.n_components()
            )));
        }
        for c in u {
            if c.len() != self.grid.len() {
                return Err(Error::ShapeMismatch {
                    expected: self.grid.len(),
                    got: c.len(),
                });
            }
        }
        Ok(())
    }

    /// Evaluates `du/dt` at time `t`.
    pub fn rhs(&self, t: f64, u: &[ScalarField], du: &mut [ScalarField]) -> Result<()> {
        self.check_state(u)?;
        if du.len() != u.len() {
            return Err(Error::InvalidParameter(
                "output state has wrong component count".into(),
            ));
        }
        match self.mode {
            Mode::OneD => self.rhs_1d(t, u, du),
            Mode::Tm => self.rhs_tm(t, u, du),
            Mode::Te => self.rhs_te(t, u, du),
            Mode::Full3d => self.rhs_3d(t, u, du),
        }
    }

    fn eta_inv(&self) -> f64 {
        self.penalty.as_ref().map_or(0.0, |p| 1.0 / p.config().eta)
    }

    fn rhs_1d(&self, t: f64, u: &[ScalarField], du: &mut [ScalarField]) -> Result<()> {
        let (hy, ez) = (&u[0], &u[1]);
        let gt = self.gtilde_scalar(ez, t)?;
        let ei = self.eta_inv();
        let (a, b) = du.split_at_mut(1);
        self.derivative_into(ez, 0, &mut a[0]);
        self.derivative_into(hy, 0, &mut b[0]);
        for i in 0..ez.len() {
            b[0][i] -= ei * self.chi[i] * (ez[i] - gt[i]);
        }
        Ok(())
    }

    fn rhs_tm(&self, t: f64, u: &[ScalarField], du: &mut [ScalarField]) -> Result<()> {
        let (hx, hy, ez) = (&u[0], &u[1], &u[2]);
        let gt = self.gtilde_scalar(ez, t)?;
        let ei = self.eta_inv();
        let dez_dy = self.derivative(ez, 1);
        let dez_dx = self.derivative(ez, 0);
        let dhy_dx = self.derivative(hy, 0);
        let dhx_dy = self.derivative(hx, 1);
        let f = self.forcing_at(t);
        let pml = self.sigmas(t);
        let chi = &self.chi;
        let (dh, rest) = du.split_at_mut(2);
        let (dhx, dhy) = dh.split_at_mut(1);
        let (dez, dphi) = rest.split_at_mut(1);
        let (dhx, dhy, dez) = (&mut dhx[0], &mut dhy[0], &mut dez[0]);
        for i in 0..ez.len() {
            dhx[i] = -dez_dy[i];
            dhy[i] = dez_dx[i];
            dez[i] = dhy_dx[i] - dhx_dy[i] - ei * chi[i] * (ez[i] - gt[i]);
        }
        if let Some(f) = f {
            dez.iter_mut().zip(&f).for_each(|(d, v)| *d += v);
        }
        if let Some((r, p)) = pml {
            let phi = &u[3];
            let dphi = &mut dphi[0];
            for i in 0..ez.len() {
                let (sx, sy) = (r * p.sigma_x[i], r * p.sigma_y[i]);
                dhx[i] -= sy * hx[i];
                dhy[i] -= sx * hy[i];
                dez[i] += -(sx + sy) * ez[i] + phi[i];
                dphi[i] = -sx * sy * ez[i];
            }
        }
        Ok(())
    }

    fn rhs_te(&self, t: f64, u: &[ScalarField], du: &mut [ScalarField]) -> Result<()> {
        let (ex, ey, hzx, hzy) = (&u[0], &u[1], &u[2], &u[3]);
        let hz: ScalarField = hzx.iter().zip(hzy).map(|(a, b)| a + b).collect();
        let gt = self.gtilde_vector(&[ex, ey], t)?;
        let ei = self.eta_inv();
        let dhz_dy = self.derivative(&hz, 1);
        let dhz_dx = self.derivative(&hz, 0);
        let dey_dx = self.derivative(ey, 0);
        let dex_dy = self.derivative(ex, 1);
        let f = self.forcing_at(t);
        let pml = self.sigmas(t);
        let chi = &self.chi;
        for i in 0..ex.len() {
            du[0][i] = dhz_dy[i] - ei * chi[i] * (ex[i] - gt[0][i]);
            du[1][i] = -dhz_dx[i] - ei * chi[i] * (ey[i] - gt[1][i]);
            du[2][i] = -dey_dx[i];
            du[3][i] = dex_dy[i];
        }
        if let Some(f) = f {
            du[2].iter_mut().zip(&f).for_each(|(d, v)| *d += v);
        }
        if let Some((r, p)) = pml {
            for i in 0..ex.len() {
                let (sx, sy) = (r * p.sigma_x[i], r * p.sigma_y[i]);
                du[0][i] -= sy * ex[i];
                du[1][i] -= sx * ey[i];
                du[2][i] -= sx * hzx[i];
                du[3][i] -= sy * hzy[i];
            }
        }
        Ok(())
    }

    fn rhs_3d(&self, t: f64, u: &[ScalarField], du: &mut [ScalarField]) -> Result<()> {
        let (h, e) = u.split_at(3);
        let gt = self.gtilde_vector(&[&e[0], &e[1], &e[2]], t)?;
        let ei = self.eta_inv();
        let n = self.grid.len();
        let (dh, de) = du.split_at_mut(3);
        // H_t = -curl E, E_t = curl H
        for (src, dst, sign) in [(e, &mut *dh, -1.0), (h, &mut *de, 1.0)] {
            for c in 0..3 {
                let (a, b) = ((c + 1) % 3, (c + 2) % 3);
                let d1 = self.derivative(&src[b], a);
                let d2 = self.derivative(&src[a], b);
                for i in 0..n {
                    dst[c][i] = sign * (d1[i] - d2[i]);
                }
            }
        }
        let chi = &self.chi;
        for c in 0..3 {
            for i in 0..n {
                de[c][i] -= ei * chi[i] * (e[c][i] - gt[c][i]);
            }
        }
        Ok(())
    }

    /// `(energy over the physical region, energy over the whole box)`, `½Σ(|E|²+|H|²)dx^d`.
    pub fn energy(&self, u: &[ScalarField]) -> (f64, f64) {
        let vol = self.grid.cell_volume();
        let density = |i: usize| -> f64 {
            match self.mode {
                Mode::OneD => u[0][i].powi(2) + u[1][i].powi(2),
                Mode::Tm => u[0][i].powi(2) + u[1][i].powi(2) + u[2][i].powi(2),
                Mode::Te => u[0][i].powi(2) + u[1][i].powi(2) + (u[2][i] + u[3][i]).powi(2),
                Mode::Full3d => u.iter().take(6).map(|c| c[i] * c[i]).sum(),
            }
        };
        let mut phys = 0.0;
        let mut total = 0.0;
        for i in 0..self.grid.len() {
            let e = density(i);
            total += e;
            phys += self.physical[i] * e;
        }
        (0.5 * phys * vol, 0.5 * total * vol)
    }

    /// Divergence of the constrained field outside the mask: E for TE and
    /// 3D, H for TM, zero in 1D.
    pub fn masked_divergence(&self, u: &[ScalarField]) -> Result<f64> {
        let comps: Vec<ScalarField> = match self.mode {
            Mode::OneD => return Ok(0.0),
            Mode::Tm => vec![u[0].clone(), u[1].clone()],
            Mode::Te => vec![u[0].clone(), u[1].clone()],
            Mode::Full3d => u[3..6].to_vec(),
        };
        self.spectral.masked_divergence_max(&comps, &self.chi)
    }

    /// Divergence projection of the electric field (TE and 3D).
    pub fn project(&self, u: &mut [ScalarField]) -> Result<()> {
        if !self.projection {
            return Ok(());
        }
        let idx = self.mode.e_components();
        let mut e: Vec<ScalarField> = idx.iter().map(|&i| std::mem::take(&mut u[i])).collect();
        let r = self.spectral.project_divergence_free(&mut e, &self.chi);
        for (&i, c) in idx.iter().zip(e) {
            u[i] = c;
        }
        r
    }
}

fn fd_derivative(grid: &Grid, f: &[f64], axis: usize, stencil: &[(usize, f64)], out: &mut [f64]) {
    let n = grid.n();
    let stride = grid.stride(axis);
    let inv_dx = 1.0 / grid.dx();
    parallel::for_each_mut(out, |i, o| {
        let j = (i / stride) % n;
        let base = i - j * stride;
        let mut acc = 0.0;
        for &(off, c) in stencil {
            let p = base + ((j + off) % n) * stride;
            let m = base + ((j + n - off) % n) * stride;
            acc += c * (f[p] - f[m]);
        }
        *o = acc * inv_dx;
    });
}

/// Convenience: samples a vector-valued closure into component fields.
pub fn sample_state<F>(grid: &Grid, ncomp: usize, f: F) -> Vec<ScalarField>
where
    F: Fn(&Point) -> Vec<f64> + Sync + Send,
{
    let pts = parallel::map_indices(grid.len(), |i| f(&grid.coords(i)));
    (0..ncomp)
        .map(|c| pts.iter().map(|v| v[c]).collect())
        .collect()
}
