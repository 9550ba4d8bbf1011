//! Named test cases and their default parameters.

use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;

use serde::{Deserialize, Serialize};

use fourier_penalty::equations::{
    build_pml_profile, sample_state, DerivativeScheme, Forcing, Mode, PmlProfile, Problem,
    TemporalRamp,
};
use fourier_penalty::geometry::{
    build_ray_table, make_shape, Geometry, ShapeSpec, WaveguideParams,
};
use fourier_penalty::oracles::{
    bessel_root, cavity_mode_cartesian, gaussian_1d_exact, manufactured_forcing,
    manufactured_te_exact, manufactured_tm_exact, standing_wave_3d_exact, standing_wave_t0,
    PulseParams, STANDING_WAVE_E0,
};
use fourier_penalty::penalty::{BoundaryData, PenaltyConfig, PenaltyKind, PenaltyOperator};
use fourier_penalty::timestepping::RunConfig;
use fourier_penalty::{Grid, Point, ScalarField};

use crate::error::{HarnessError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CaseId {
    Gauss1d,
    Pollution1d,
    TmCircle,
    TeCircle,
    Cavity,
    CylinderScatter,
    WaveguideTm,
    WaveguideTePulse,
    WindmillTmPml,
    Sphere3d,
    GyroidDemo,
}

impl CaseId {
    pub const ALL: [CaseId; 11] = [
        CaseId::Gauss1d,
        CaseId::Pollution1d,
        CaseId::TmCircle,
        CaseId::TeCircle,
        CaseId::Cavity,
        CaseId::CylinderScatter,
        CaseId::WaveguideTm,
        CaseId::WaveguideTePulse,
        CaseId::WindmillTmPml,
        CaseId::Sphere3d,
        CaseId::GyroidDemo,
    ];

    pub fn name(self) -> &'static str {
        match self {
            CaseId::Gauss1d => "gauss1d",
            CaseId::Pollution1d => "pollution1d",
            CaseId::TmCircle => "tm_circle",
            CaseId::TeCircle => "te_circle",
            CaseId::Cavity => "cavity",
            CaseId::CylinderScatter => "cylinder_scatter",
            CaseId::WaveguideTm => "waveguide_tm",
            CaseId::WaveguideTePulse => "waveguide_te_pulse",
            CaseId::WindmillTmPml => "windmill_tm_pml",
            CaseId::Sphere3d => "sphere3d",
            CaseId::GyroidDemo => "gyroid_demo",
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            CaseId::Gauss1d => "1D modulated Gaussian reflecting off a wall at x = 0",
            CaseId::Pollution1d => "1D Gaussian at fixed points per wavelength, T = 15",
            CaseId::TmCircle => "TM manufactured solution around a circular hole",
            CaseId::TeCircle => "TE manufactured solution around a circular hole",
            CaseId::Cavity => "TM Bessel mode (6, 2) inside a circular cavity",
            CaseId::CylinderScatter => "TE pulse scattering off a PEC cylinder with PML",
            CaseId::WaveguideTm => "TM manufactured solution in the bent waveguide",
            CaseId::WaveguideTePulse => "TE pulse travelling down the bent waveguide",
            CaseId::WindmillTmPml => "TM pulse scattering off a trifolium with stretched PML",
            CaseId::Sphere3d => "3D standing wave around a spherical hole",
            CaseId::GyroidDemo => "3D pulse around a gyroid (smoke test)",
        }
    }

    pub fn mode(self) -> Mode {
        match self {
            CaseId::Gauss1d | CaseId::Pollution1d => Mode::OneD,
            CaseId::TmCircle | CaseId::Cavity | CaseId::WaveguideTm | CaseId::WindmillTmPml => {
                Mode::Tm
            }
            CaseId::TeCircle | CaseId::CylinderScatter | CaseId::WaveguideTePulse => Mode::Te,
            CaseId::Sphere3d | CaseId::GyroidDemo => Mode::Full3d,
        }
    }

    /// Whether a closed-form solution is available for error measurement.
    pub fn has_exact(self) -> bool {
        !matches!(
            self,
            CaseId::CylinderScatter
                | CaseId::WaveguideTePulse
                | CaseId::WindmillTmPml
                | CaseId::GyroidDemo
        )
    }
}

impl fmt::Display for CaseId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for CaseId {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        CaseId::ALL
            .into_iter()
            .find(|c| c.name() == s)
            .ok_or_else(|| HarnessError::UnknownCase(s.to_string()))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    #[default]
    Spectral,
    Fd2,
    Fd4,
}

impl From<Scheme> for DerivativeScheme {
    fn from(s: Scheme) -> Self {
        match s {
            Scheme::Spectral => DerivativeScheme::Spectral,
            Scheme::Fd2 => DerivativeScheme::Fd2,
            Scheme::Fd4 => DerivativeScheme::Fd4,
        }
    }
}

impl FromStr for Scheme {
    type Err = HarnessError;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "spectral" => Ok(Scheme::Spectral),
            "fd2" => Ok(Scheme::Fd2),
            "fd4" => Ok(Scheme::Fd4),
            _ => Err(HarnessError::Config(format!("unknown scheme `{s}`"))),
        }
    }
}

/// Full parameter set of one run. Step, penalty strength and band width are
/// given relative to the grid unless overridden with absolute values.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CaseSpec {
    pub case: CaseId,
    pub n: usize,
    pub m: usize,
    /// `false` selects the static penalty `g̃ ≡ 0`.
    pub active: bool,
    /// `Δt = dt_coeff · Δx`.
    pub dt_coeff: f64,
    /// `η = eta_dt · Δt`.
    pub eta_dt: f64,
    /// `h = h_dx · Δx`.
    pub h_dx: f64,
    pub eta: Option<f64>,
    pub h: Option<f64>,
    pub l: f64,
    pub t_final: f64,
    pub c_f: Option<f64>,
    /// Carrier frequency of the 1D pulse.
    pub omega0: f64,
    /// Pulse or mode amplitude.
    pub amplitude: f64,
    pub scheme: Scheme,
}

impl CaseSpec {
    pub fn defaults(case: CaseId) -> Self {
        let base = CaseSpec {
            case,
            n: 64,
            m: 0,
            active: true,
            dt_coeff: 0.4,
            eta_dt: 4.0,
            h_dx: 2.0,
            eta: None,
            h: None,
            l: 1.0,
            t_final: 1.0,
            c_f: None,
            omega0: 10.0,
            amplitude: 1.0,
            scheme: Scheme::Spectral,
        };
        match case {
            CaseId::Gauss1d => CaseSpec {
                n: 1024,
                m: 1,
                dt_coeff: 0.2,
                eta_dt: 5.0,
                h_dx: 1.0,
                t_final: 12.0,
                l: 0.75,
                c_f: Some(16.0),
                ..base
            },
            CaseId::Pollution1d => CaseSpec {
                n: pollution_grid(20.0, 10.0),
                m: 1,
                dt_coeff: 0.5,
                eta_dt: 1.0,
                h_dx: 1.002,
                t_final: 15.0,
                c_f: Some(16.0),
                ..base
            },
            CaseId::TmCircle => CaseSpec {
                m: 1,
                t_final: 1.1 * PI,
                c_f: Some(16.0),
                ..base
            },
            CaseId::TeCircle => CaseSpec {
                t_final: 1.1 * PI,
                ..base
            },
            CaseId::Cavity => CaseSpec {
                m: 1,
                l: 0.45,
                t_final: 0.3,
                c_f: Some(16.0),
                ..base
            },
            CaseId::CylinderScatter => CaseSpec {
                n: 128,
                eta_dt: 1.0,
                l: 0.15,
                t_final: 1.508,
                ..base
            },
            CaseId::WaveguideTm => CaseSpec {
                n: 128,
                m: 1,
                eta_dt: 1.0,
                l: 0.4,
                t_final: 0.275 * PI,
                c_f: Some(16.0),
                ..base
            },
            CaseId::WaveguideTePulse => CaseSpec {
                n: 128,
                eta_dt: 1.0,
                l: 0.4,
                t_final: 10.0,
                ..base
            },
            CaseId::WindmillTmPml => CaseSpec {
                n: 128,
                m: 1,
                eta_dt: 1.0,
                l: 0.3,
                t_final: 10.0,
                c_f: Some(16.0),
                ..base
            },
            CaseId::Sphere3d => CaseSpec {
                n: 32,
                t_final: standing_wave_t0() + 3.0,
                ..base
            },
            CaseId::GyroidDemo => CaseSpec {
                dt_coeff: 0.35,
                eta_dt: 5.0,
                l: 0.025,
                t_final: 0.5,
                ..base
            },
        }
    }

    pub fn grid(&self) -> Result<Grid> {
        let g = match self.case {
            CaseId::Gauss1d | CaseId::Pollution1d => Grid::new(1, self.n, 16.0, &[-2.0]),
            CaseId::TmCircle
            | CaseId::TeCircle
            | CaseId::WaveguideTm
            | CaseId::WaveguideTePulse => Grid::cube(2, self.n, 2.0 * PI),
            CaseId::Cavity => Grid::new(2, self.n, 3.0, &[-1.5, -1.5]),
            CaseId::CylinderScatter => Grid::new(2, self.n, 2.5, &[-1.0, -1.0]),
            CaseId::WindmillTmPml => Grid::new(2, self.n, 3.0 * PI, &[-1.5 * PI, -1.5 * PI]),
            CaseId::Sphere3d => Grid::cube(3, self.n, 2.0 * PI),
            CaseId::GyroidDemo => Grid::cube(3, self.n, 1.0),
        };
        g.map_err(|e| self.wrap(e))
    }

    pub fn dx(&self) -> Result<f64> {
        Ok(self.grid()?.dx())
    }

    pub fn dt(&self) -> Result<f64> {
        Ok(self.dt_coeff * self.dx()?)
    }

    pub fn eta_value(&self) -> Result<f64> {
        Ok(self.eta.unwrap_or(self.eta_dt * self.dt()?))
    }

    pub fn h_value(&self) -> Result<f64> {
        Ok(self.h.unwrap_or(self.h_dx * self.dx()?))
    }

    pub fn start_time(&self) -> f64 {
        if self.case == CaseId::Sphere3d {
            standing_wave_t0()
        } else {
            0.0
        }
    }

    pub fn shape(&self) -> ShapeSpec {
        match self.case {
            CaseId::Gauss1d | CaseId::Pollution1d => ShapeSpec::Halfspace { x0: 0.0 },
            CaseId::TmCircle | CaseId::TeCircle => ShapeSpec::CircleHole {
                center: [PI, PI],
                a: 2.0,
            },
            CaseId::Cavity => ShapeSpec::CircularCavity {
                center: [0.0, 0.0],
                radius: 1.0,
            },
            CaseId::CylinderScatter => ShapeSpec::CircleHole {
                center: [0.0, 0.0],
                a: 0.2,
            },
            CaseId::WaveguideTm | CaseId::WaveguideTePulse => {
                ShapeSpec::Waveguide(WaveguideParams::default())
            }
            CaseId::WindmillTmPml => ShapeSpec::Trifolium { a: 3.0, b: 1.0 },
            CaseId::Sphere3d => ShapeSpec::SphereHole {
                center: [PI, PI, PI],
                a: 2.0,
            },
            CaseId::GyroidDemo => ShapeSpec::Gyroid { a: 0.95 },
        }
    }

    pub(crate) fn wrap(&self, e: fourier_penalty::Error) -> HarnessError {
        HarnessError::Case {
            case: self.case.name().to_string(),
            source: e,
        }
    }

    /// Builds geometry, ray table, penalty, PML, forcing and initial data.
    pub fn build(&self) -> Result<Setup> {
        self.build_inner().map_err(|e| match e {
            HarnessError::Core(c) => self.wrap(c),
            other => other,
        })
    }

    fn build_inner(&self) -> Result<Setup> {
        let grid = self.grid()?;
        let mode = self.case.mode();
        let dx = grid.dx();
        let dt = self.dt_coeff * dx;
        let h = self.h_value()?;
        let eta = self.eta_value()?;
        let geom = make_shape(self.shape())?;
        let table = build_ray_table(geom.as_ref(), &grid, h, self.l)?;
        let cfg = PenaltyConfig {
            eta,
            h,
            l: self.l,
            m: self.m,
            c_f: if self.m == 0 { None } else { self.c_f },
        };
        cfg.validate()?;
        let kind = if self.active {
            PenaltyKind::Active
        } else {
            PenaltyKind::Static
        };
        let vector = matches!(mode, Mode::Te | Mode::Full3d);
        let op = PenaltyOperator::new(&grid, cfg, table, kind, vector)?;
        let mut problem = Problem::new(mode, &grid)?
            .with_penalty(op)?
            .with_scheme(self.scheme.into());
        let amp = self.amplitude;
        let t0 = self.start_time();

        let exact: Option<ExactFn> = match self.case {
            CaseId::Gauss1d | CaseId::Pollution1d => {
                let p = PulseParams {
                    e0: amp,
                    x0: 7.0,
                    sigma: 0.5f64.sqrt(),
                    omega0: self.omega0,
                };
                Some(Arc::new(move |x: &Point, t: f64| {
                    let (hy, ez) = gaussian_1d_exact(x[0], t, &p);
                    Observed::new(&[ez], &[hy])
                }))
            }
            CaseId::TmCircle | CaseId::WaveguideTm => Some(Arc::new(move |x: &Point, t: f64| {
                let (hx, hy, ez) = manufactured_tm_exact(x[0], x[1], t);
                Observed::new(&[amp * ez], &[amp * hx, amp * hy])
            })),
            CaseId::TeCircle => Some(Arc::new(move |x: &Point, t: f64| {
                let (ex, ey, hz) = manufactured_te_exact(x[0], x[1], t);
                Observed::new(&[amp * ex, amp * ey], &[amp * hz])
            })),
            CaseId::Cavity => {
                let alpha = bessel_root(6, 2);
                Some(Arc::new(move |x: &Point, t: f64| {
                    let (hx, hy, ez) = cavity_mode_cartesian(6, alpha, x[0], x[1], t);
                    Observed::new(&[amp * ez], &[amp * hx, amp * hy])
                }))
            }
            CaseId::Sphere3d => Some(Arc::new(move |x: &Point, t: f64| {
                let (e, h) = standing_wave_3d_exact(x, t, STANDING_WAVE_E0);
                Observed::new(&e.map(|v| amp * v), &h.map(|v| amp * v))
            })),
            _ => None,
        };

        match self.case {
            CaseId::TmCircle | CaseId::WaveguideTm => {
                problem = problem
                    .with_boundary(BoundaryData::Scalar(Arc::new(move |y: &Point, t: f64| {
                        amp * manufactured_tm_exact(y[0], y[1], t).2
                    })))
                    .with_forcing(manufactured_source(&grid, amp))?;
            }
            CaseId::TeCircle => {
                problem = problem
                    .with_boundary(BoundaryData::Vector(Arc::new(move |y: &Point, t: f64| {
                        let (ex, ey, _) = manufactured_te_exact(y[0], y[1], t);
                        [amp * ex, amp * ey, 0.0]
                    })))
                    .with_forcing(manufactured_source(&grid, amp))?;
            }
            CaseId::Sphere3d => {
                problem = problem.with_boundary(BoundaryData::Vector(Arc::new(
                    move |y: &Point, t: f64| {
                        standing_wave_3d_exact(y, t, STANDING_WAVE_E0)
                            .0
                            .map(|v| amp * v)
                    },
                )));
            }
            _ => {}
        }

        let pml: Option<(PmlProfile, bool)> = match self.case {
            CaseId::CylinderScatter => Some((
                build_pml_profile(
                    &grid,
                    &[0, 1],
                    grid.length() / (2.0 * dx),
                    0.25,
                    TemporalRamp::None,
                )?,
                false,
            )),
            // The slab sits on the seam, which the waveguide crosses.
            CaseId::WaveguideTePulse => Some((
                build_pml_profile(
                    &grid,
                    &[0],
                    grid.length() / (2.0 * dx),
                    0.25,
                    TemporalRamp::None,
                )?,
                true,
            )),
            CaseId::WindmillTmPml => Some((
                build_pml_profile(
                    &grid,
                    &[0, 1],
                    0.5 * grid.n() as f64,
                    1.0 / 3.0,
                    TemporalRamp::Cubic {
                        t_full: 0.5 * self.t_final,
                    },
                )?,
                false,
            )),
            _ => None,
        };
        if let Some((p, allow)) = pml {
            problem = problem.with_pml(p, allow)?;
        }

        let ncomp = problem.n_components();
        let initial = match (&exact, self.case) {
            (Some(f), _) => {
                let f = f.clone();
                sample_state(&grid, ncomp, move |x| f(x, t0).to_state(mode, ncomp))
            }
            (None, CaseId::CylinderScatter) => {
                let (s, x0) = (0.125, -0.6);
                sample_state(&grid, ncomp, move |x| {
                    let v = amp * pulse_profile(x[0], x0, s);
                    vec![0.0, v, v, 0.0]
                })
            }
            (None, CaseId::WaveguideTePulse) => {
                let (s, x0) = (0.25, 0.5);
                sample_state(&grid, ncomp, move |x| {
                    let v = -amp * pulse_profile(x[0], x0, s);
                    vec![0.0, v, v, 0.0]
                })
            }
            (None, CaseId::WindmillTmPml) => {
                let (s, x0) = (0.25, -4.0);
                sample_state(&grid, ncomp, move |x| {
                    let v = amp * pulse_profile(x[0], x0, s);
                    vec![0.0, -v, v, 0.0]
                })
            }
            (None, _) => {
                let (s, x0) = (0.05, 0.5);
                sample_state(&grid, ncomp, move |x| {
                    let v = amp * pulse_profile(x[0], x0, s);
                    vec![0.0, -v, 0.0, 0.0, 0.0, v]
                })
            }
        };

        let chi = problem.chi().clone();
        let sigma_free: Option<Vec<bool>> = problem.pml().map(|p| {
            p.sigma_x
                .iter()
                .zip(&p.sigma_y)
                .map(|(a, b)| *a == 0.0 && *b == 0.0)
                .collect()
        });
        let measure: Vec<bool> = (0..grid.len())
            .map(|i| {
                chi[i] == 0.0
                    && geom.value(&grid.coords(i)) > 0.0
                    && sigma_free.as_ref().map_or(true, |s| s[i])
            })
            .collect();
        let run = RunConfig {
            dt,
            t_final: self.t_final,
            t_start: t0,
            snapshot_stride: None,
        };
        Ok(Setup {
            spec: self.clone(),
            grid,
            geometry: geom,
            problem,
            initial,
            run,
            exact,
            measure,
        })
    }
}

/// `(2/σ²)(x - x₀) e^{-((x - x₀)/σ)²}`.
pub fn pulse_profile(x: f64, x0: f64, sigma: f64) -> f64 {
    let u = x - x0;
    2.0 / (sigma * sigma) * u * (-(u / sigma).powi(2)).exp()
}

fn manufactured_source(grid: &Grid, amp: f64) -> Forcing {
    Forcing::Separable {
        spatial: grid
            .sample(|p| amp * manufactured_forcing(p[0], p[1], std::f64::consts::FRAC_PI_2)),
        temporal: Arc::new(|t: f64| t.sin()),
    }
}

/// Physical field values at one point: electric then magnetic components.
#[derive(Clone, Debug, PartialEq)]
pub struct Observed {
    pub e: Vec<f64>,
    pub h: Vec<f64>,
}

impl Observed {
    pub fn new(e: &[f64], h: &[f64]) -> Self {
        Self {
            e: e.to_vec(),
            h: h.to_vec(),
        }
    }

    /// Reads the physical fields out of a state vector.
    pub fn from_state(mode: Mode, u: &[ScalarField], i: usize) -> Self {
        match mode {
            Mode::OneD => Self::new(&[u[1][i]], &[u[0][i]]),
            Mode::Tm => Self::new(&[u[2][i]], &[u[0][i], u[1][i]]),
            Mode::Te => Self::new(&[u[0][i], u[1][i]], &[u[2][i] + u[3][i]]),
            Mode::Full3d => Self::new(&[u[3][i], u[4][i], u[5][i]], &[u[0][i], u[1][i], u[2][i]]),
        }
    }

    /// Inverse of `from_state`; auxiliary components start at zero.
    pub fn to_state(&self, mode: Mode, ncomp: usize) -> Vec<f64> {
        let mut v = match mode {
            Mode::OneD => vec![self.h[0], self.e[0]],
            Mode::Tm => vec![self.h[0], self.h[1], self.e[0]],
            Mode::Te => vec![self.e[0], self.e[1], self.h[0], 0.0],
            Mode::Full3d => vec![
                self.h[0], self.h[1], self.h[2], self.e[0], self.e[1], self.e[2],
            ],
        };
        v.resize(ncomp, 0.0);
        v
    }
}

pub type ExactFn = Arc<dyn Fn(&Point, f64) -> Observed + Send + Sync>;

/// Everything needed to run a case.
pub struct Setup {
    pub spec: CaseSpec,
    pub grid: Grid,
    pub geometry: Geometry,
    pub problem: Problem,
    pub initial: Vec<ScalarField>,
    pub run: RunConfig,
    pub exact: Option<ExactFn>,
    /// Grid points counted in error norms: outside the band, inside the
    /// physical region and outside any absorbing layer.
    pub measure: Vec<bool>,
}

/// Grid size giving `ppwl` points per carrier wavelength on the 1D box.
pub fn pollution_grid(ppwl: f64, omega0: f64) -> usize {
    let w = omega0.max(1.0);
    let n = (16.0 * w * ppwl / (2.0 * PI)).ceil() as usize;
    (n + n % 2).max(64)
}
