//! Construction of the penalty target `g̃` from the current field.

use std::sync::Arc;

use crate::error::{Error, Point, Result};
use crate::geometry::RayTable;
use crate::interp::Stencil;
use crate::parallel;
use crate::spectral::{Grid, ScalarField, Spectral};

pub const DEFAULT_FILTER: f64 = 16.0;

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct PenaltyConfig {
    pub eta: f64,
    pub h: f64,
    pub l: f64,
    pub m: usize,
    /// Filter for the matching derivatives; `None` disables it.
    pub c_f: Option<f64>,
}

impl PenaltyConfig {
    pub fn new(eta: f64, h: f64, l: f64, m: usize) -> Result<Self> {
        let cfg = Self {
            eta,
            h,
            l,
            m,
            c_f: Some(DEFAULT_FILTER),
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("eta", self.eta), ("h", self.h), ("L", self.l)] {
            if !(v > 0.0) || !v.is_finite() {
                return Err(Error::InvalidParameter(format!(
                    "{name} = {v} must be positive"
                )));
            }
        }
        if self.m > 2 {
            return Err(Error::InvalidParameter(format!(
                "m = {} not in 0..=2",
                self.m
            )));
        }
        if let Some(c) = self.c_f {
            if !(c >= 0.0) {
                return Err(Error::InvalidParameter(format!("c_f = {c} must be >= 0")));
            }
        }
        Ok(())
    }
}

pub type ScalarFn = Arc<dyn Fn(&Point, f64) -> f64 + Send + Sync>;
pub type VectorFn = Arc<dyn Fn(&Point, f64) -> Point + Send + Sync>;

/// Tangential boundary value `g(y, t)`.
#[derive(Clone, Default)]
pub enum BoundaryData {
    #[default]
    Zero,
    Scalar(ScalarFn),
    Vector(VectorFn),
}

impl std::fmt::Debug for BoundaryData {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            Self::Zero => "Zero",
            Self::Scalar(_) => "Scalar",
            Self::Vector(_) => "Vector",
        })
    }
}

impl BoundaryData {
    fn scalar(&self, y: &Point, t: f64) -> Result<f64> {
        match self {
            Self::Zero => Ok(0.0),
            Self::Scalar(g) => Ok(g(y, t)),
            Self::Vector(_) => Err(Error::InvalidParameter(
                "scalar mode given vector boundary data".into(),
            )),
        }
    }

    fn vector(&self, y: &Point, t: f64) -> Result<Point> {
        match self {
            Self::Zero => Ok([0.0; 3]),
            Self::Vector(g) => Ok(g(y, t)),
            Self::Scalar(_) => Err(Error::InvalidParameter(
                "vector mode given scalar boundary data".into(),
            )),
        }
    }
}

/// Extension polynomials `P_{m,0..=m+1}(s)` on `[-L, h]`.
pub fn basis_1d(m: usize, h: f64, l: f64, s: f64) -> Result<Vec<f64>> {
    if !(s >= -l && s <= h) {
        return Err(Error::InvalidParameter(format!(
            "s = {s} outside [-{l}, {h}]"
        )));
    }
    if m > 2 {
        return Err(Error::InvalidParameter(format!("m = {m} not in 0..=2")));
    }
    Ok(basis_unchecked(m, h, l, s).to_vec()[..m + 2].to_vec())
}

fn basis_unchecked(m: usize, h: f64, l: f64, x: f64) -> [f64; 4] {
    let xl = x + l;
    let xh = x - h;
    let hl = h + l;
    match m {
        0 => [
            -xh * xl * xl / (h * l * l),
            x * xl * xl / (h * hl * hl),
            0.0,
            0.0,
        ],
        1 => {
            let c = x * xl.powi(3) / (h * hl.powi(3));
            [
                xl.powi(3) * xh * xh / (h * h * l.powi(3)),
                c * (1.0 - (4.0 * h + l) / (h * hl) * xh),
                c * xh,
                0.0,
            ]
        }
        _ => {
            let c = x * xl.powi(4) / (h * hl.powi(4));
            let a1 = (5.0 * h + l) / (h * hl);
            let a2 = (15.0 * h * h + 6.0 * h * l + l * l) / (h * h * hl * hl);
            [
                -xl.powi(4) * xh.powi(3) / (h.powi(3) * l.powi(4)),
                c * (1.0 - a1 * xh + a2 * xh * xh),
                c * xh * (1.0 - a1 * xh),
                0.5 * c * xh * xh,
            ]
        }
    }
}

/// Active penalty rebuilds `g̃` from the field; static uses `g̃ ≡ 0`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Default)]
pub enum PenaltyKind {
    #[default]
    Active,
    Static,
}

/// Precomputed ray data for repeated `g̃` assembly.
#[derive(Clone, Debug)]
pub struct PenaltyOperator {
    grid: Grid,
    cfg: PenaltyConfig,
    kind: PenaltyKind,
    table: RayTable,
    basis: Vec<[f64; 4]>,
    at_h: Vec<Stencil>,
    at_y: Vec<Stencil>,
}

impl PenaltyOperator {
    /// `vector` selects the tangential extension used for TE and 3D.
    pub fn new(
        grid: &Grid,
        cfg: PenaltyConfig,
        table: RayTable,
        kind: PenaltyKind,
        vector: bool,
    ) -> Result<Self> {
        cfg.validate()?;
        if (table.h() - cfg.h).abs() > 1e-14 * cfg.h
            || (table.decay_length() - cfg.l).abs() > 1e-14 * cfg.l
        {
            return Err(Error::InvalidParameter(
                "ray table built with different h or L".into(),
            ));
        }
        if vector && cfg.m > 0 {
            return Err(Error::InvalidParameter(format!(
                "vector extension supports only m = 0 (got {})",
                cfg.m
            )));
        }
        if grid.dim() > 1 && cfg.m > 1 {
            return Err(Error::InvalidParameter(format!(
                "m = {} is only available in one dimension",
                cfg.m
            )));
        }
        if table.chi().len() != grid.len() {
            return Err(Error::ShapeMismatch {
                expected: grid.len(),
                got: table.chi().len(),
            });
        }
        let rays = table.rays();
        let basis = parallel::map_slice(rays, |r| basis_unchecked(cfg.m, cfg.h, cfg.l, r.s));
        let at_h = parallel::map_slice(rays, |r| {
            let mut p = r.y;
            for a in 0..grid.dim() {
                p[a] += cfg.h * r.n[a];
            }
            Stencil::new(grid, &p)
        });
        let at_y = if vector {
            parallel::map_slice(rays, |r| Stencil::new(grid, &r.y))
        } else {
            Vec::new()
        };
        Ok(Self {
            grid: grid.clone(),
            cfg,
            kind,
            table,
            basis,
            at_h,
            at_y,
        })
    }

    pub fn config(&self) -> &PenaltyConfig {
        &self.cfg
    }

    pub fn kind(&self) -> PenaltyKind {
        self.kind
    }

    pub fn table(&self) -> &RayTable {
        &self.table
    }

    pub fn chi(&self) -> &ScalarField {
        self.table.chi()
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    /// Scalar extension for 1D (m ≤ 2) and TM (m ≤ 1).
    pub fn gtilde_scalar(
        &self,
        spectral: &Spectral,
        e: &[f64],
        g: &BoundaryData,
        t: f64,
        out: &mut [f64],
    ) -> Result<()> {
        out.iter_mut().for_each(|v| *v = 0.0);
        if self.kind == PenaltyKind::Static {
            return Ok(());
        }
        let dim = self.grid.dim();
        let m = self.cfg.m;
        let grads: Vec<ScalarField> = if m >= 1 {
            (0..dim)
                .map(|a| spectral.derivative(e, a, 1, self.cfg.c_f))
                .collect::<Result<_>>()?
        } else {
            Vec::new()
        };
        let second = if m >= 2 {
            Some(spectral.derivative(e, 0, 2, self.cfg.c_f)?)
        } else {
            None
        };
        let rays = self.table.rays();
        let vals = parallel::map_indices(rays.len(), |k| -> Result<f64> {
            let r = &rays[k];
            let st = &self.at_h[k];
            let b = &self.basis[k];
            let mut v = g.scalar(&r.y, t)? * b[0] + st.eval(&self.grid, e) * b[1];
            if m >= 1 {
                let dn: f64 = (0..dim)
                    .map(|a| r.n[a] * st.eval(&self.grid, &grads[a]))
                    .sum();
                v += dn * b[2];
            }
            if let Some(d2) = &second {
                v += r.n[0] * r.n[0] * st.eval(&self.grid, d2) * b[3];
            }
            Ok(v)
        });
        for (r, v) in rays.iter().zip(vals) {
            out[r.index] = v?;
        }
        Ok(())
    }

    /// Tangential vector extension (m = 0) for TE and 3D.
    pub fn gtilde_vector(
        &self,
        e: &[&[f64]],
        g: &BoundaryData,
        t: f64,
        out: &mut [ScalarField],
    ) -> Result<()> {
        let dim = self.grid.dim();
        if e.len() != dim || out.len() != dim {
            return Err(Error::InvalidParameter(format!(
                "vector extension needs {dim} components"
            )));
        }
        for o in out.iter_mut() {
            o.iter_mut().for_each(|v| *v = 0.0);
        }
        if self.kind == PenaltyKind::Static {
            return Ok(());
        }
        if self.at_y.len() != self.at_h.len() {
            return Err(Error::InvalidParameter(
                "operator built for scalar extension".into(),
            ));
        }
        let rays = self.table.rays();
        let vals = parallel::map_indices(rays.len(), |k| -> Result<Point> {
            let r = &rays[k];
            let b = &self.basis[k];
            let gy = g.vector(&r.y, t)?;
            let mut ey = [0.0; 3];
            let mut eh = [0.0; 3];
            for a in 0..dim {
                ey[a] = self.at_y[k].eval(&self.grid, e[a]);
                eh[a] = self.at_h[k].eval(&self.grid, e[a]);
            }
            let en: f64 = (0..dim).map(|a| ey[a] * r.n[a]).sum();
            let gn: f64 = (0..dim).map(|a| gy[a] * r.n[a]).sum();
            let mut v = [0.0; 3];
            for a in 0..dim {
                v[a] = (en * r.n[a] + gy[a] - gn * r.n[a]) * b[0] + eh[a] * b[1];
            }
            Ok(v)
        });
        for (r, v) in rays.iter().zip(vals) {
            let v = v?;
            for a in 0..dim {
                out[a][r.index] = v[a];
            }
        }
        Ok(())
    }
}

/// One-dimensional `g̃_z` (m = 0, 1, 2).
pub fn build_gtilde_1d(
    op: &PenaltyOperator,
    spectral: &Spectral,
    e_z: &[f64],
    g: &BoundaryData,
    t: f64,
) -> Result<ScalarField> {
    if op.grid.dim() != 1 {
        return Err(Error::InvalidParameter(
            "build_gtilde_1d needs a 1D grid".into(),
        ));
    }
    let mut out = vec![0.0; e_z.len()];
    op.gtilde_scalar(spectral, e_z, g, t, &mut out)?;
    Ok(out)
}

/// TM-mode `g̃_z` (m = 0, 1).
pub fn build_gtilde_tm(
    op: &PenaltyOperator,
    spectral: &Spectral,
    e_z: &[f64],
    g: &BoundaryData,
    t: f64,
) -> Result<ScalarField> {
    if op.grid.dim() != 2 {
        return Err(Error::InvalidParameter(
            "build_gtilde_tm needs a 2D grid".into(),
        ));
    }
    let mut out = vec![0.0; e_z.len()];
    op.gtilde_scalar(spectral, e_z, g, t, &mut out)?;
    Ok(out)
}

/// TE / 3D vector `g̃`.
pub fn build_gtilde_vector(
    op: &PenaltyOperator,
    e: &[ScalarField],
    g: &BoundaryData,
    t: f64,
) -> Result<Vec<ScalarField>> {
    let refs: Vec<&[f64]> = e.iter().map(|c| c.as_slice()).collect();
    let mut out = vec![vec![0.0; op.grid.len()]; op.grid.dim()];
    op.gtilde_vector(&refs, g, t, &mut out)?;
    Ok(out)
}
