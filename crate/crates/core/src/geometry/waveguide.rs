//! Bent waveguide: a channel of half-width `c` swept along a piecewise curve
//! of straight segments and circular arcs, sampled on a (τ, v) lattice.

use std::f64::consts::PI;

use super::{Hessian, LevelSet, NewtonOptions, Projection};
use crate::error::{Error, Point, Result};

#[derive(Clone, Debug, PartialEq)]
pub struct WaveguideParams {
    pub r0: f64,
    pub l0: f64,
    pub y_off: f64,
    pub c: f64,
    /// Lattice cells along τ ∈ [0, 5].
    pub n_tau: usize,
    /// Lattice cells along v ∈ [-1, 1]; must be even so v = 0 is a node line.
    pub n_v: usize,
}

impl Default for WaveguideParams {
    fn default() -> Self {
        Self {
            r0: 1.0,
            l0: PI - 2.0,
            y_off: 2.0,
            c: 0.5,
            n_tau: 2048,
            n_v: 512,
        }
    }
}

impl WaveguideParams {
    /// Centerline point `r(τ)` and its τ-derivative.
    pub fn curve(&self, tau: f64) -> ([f64; 2], [f64; 2]) {
        let (r0, l0, yo) = (self.r0, self.l0, self.y_off);
        let seg = (tau.floor().max(0.0) as usize).min(4);
        match seg {
            0 => ([l0 * tau, yo], [l0, 0.0]),
            1 => {
                let a = 0.5 * PI * tau + PI;
                (
                    [l0 + r0 * a.cos(), yo + r0 * (1.0 + a.sin())],
                    [-0.5 * PI * r0 * a.sin(), 0.5 * PI * r0 * a.cos()],
                )
            }
            2 => {
                let a = PI * tau;
                (
                    [l0 + r0 * (2.0 - a.cos()), yo + r0 * (1.0 + a.sin())],
                    [PI * r0 * a.sin(), PI * r0 * a.cos()],
                )
            }
            3 => {
                let a = 0.5 * PI * tau - 0.5 * PI;
                (
                    [l0 + r0 * (4.0 + a.cos()), yo + r0 * (1.0 + a.sin())],
                    [-0.5 * PI * r0 * a.sin(), 0.5 * PI * r0 * a.cos()],
                )
            }
            _ => ([l0 + 4.0 * r0 + l0 * (tau - 4.0), yo], [l0, 0.0]),
        }
    }

    /// `n̂ = [[0, 1], [-1, 0]] t`.
    pub fn normal_hat(&self, tau: f64) -> [f64; 2] {
        let (_, d) = self.curve(tau);
        let m = d[0].hypot(d[1]);
        [d[1] / m, -d[0] / m]
    }

    pub fn surface(&self, tau: f64, v: f64) -> [f64; 2] {
        let (r, _) = self.curve(tau);
        let n = self.normal_hat(tau);
        [r[0] + v * n[0], r[1] + v * n[1]]
    }
}

/// Sampled waveguide geometry.
#[derive(Debug)]
pub struct Waveguide {
    p: WaveguideParams,
    nodes: Vec<[f64; 2]>,
    nhat: Vec<[f64; 2]>,
    bucket_origin: [f64; 2],
    bucket_size: f64,
    bucket_dims: [usize; 2],
    buckets: Vec<Vec<u32>>,
}

struct Located {
    v: f64,
    psi: f64,
    n: [f64; 2],
}

impl Waveguide {
    pub fn new(p: WaveguideParams) -> Result<Self> {
        if !(p.r0 > 0.0) || !(p.c > 0.0 && p.c < 1.0) || !(p.l0 >= 0.0) {
            return Err(Error::InvalidParameter(format!(
                "waveguide needs r0 > 0, 0 < c < 1, l0 >= 0 (got r0 = {}, c = {}, l0 = {})",
                p.r0, p.c, p.l0
            )));
        }
        if p.n_tau < 5 || p.n_v < 2 || p.n_v % 2 != 0 {
            return Err(Error::InvalidParameter(
                "waveguide lattice too small or n_v odd".into(),
            ));
        }
        let (nt, nv) = (p.n_tau + 1, p.n_v + 1);
        let mut nodes = Vec::with_capacity(nt * nv);
        let mut nhat = Vec::with_capacity(nt);
        for i in 0..nt {
            let tau = 5.0 * i as f64 / p.n_tau as f64;
            let (r, _) = p.curve(tau);
            let n = p.normal_hat(tau);
            nhat.push(n);
            for j in 0..nv {
                let v = -1.0 + 2.0 * j as f64 / p.n_v as f64;
                nodes.push([r[0] + v * n[0], r[1] + v * n[1]]);
            }
        }
        let mut lo = [f64::INFINITY; 2];
        let mut hi = [f64::NEG_INFINITY; 2];
        for q in &nodes {
            for a in 0..2 {
                lo[a] = lo[a].min(q[a]);
                hi[a] = hi[a].max(q[a]);
            }
        }
        // bucket edge covers the largest cell diagonal
        let mut cell = 0.0f64;
        for i in 0..nt - 1 {
            for j in 0..nv - 1 {
                let a = nodes[i * nv + j];
                let b = nodes[(i + 1) * nv + j + 1];
                let c = nodes[(i + 1) * nv + j];
                let d = nodes[i * nv + j + 1];
                cell = cell.max((a[0] - b[0]).hypot(a[1] - b[1]));
                cell = cell.max((c[0] - d[0]).hypot(c[1] - d[1]));
            }
        }
        let size = cell * 1.01;
        let dims = [
            ((hi[0] - lo[0]) / size).floor() as usize + 1,
            ((hi[1] - lo[1]) / size).floor() as usize + 1,
        ];
        let mut buckets = vec![Vec::new(); dims[0] * dims[1]];
        for (k, q) in nodes.iter().enumerate() {
            let bx = ((q[0] - lo[0]) / size).floor() as usize;
            let by = ((q[1] - lo[1]) / size).floor() as usize;
            buckets[bx.min(dims[0] - 1) * dims[1] + by.min(dims[1] - 1)].push(k as u32);
        }
        Ok(Self {
            p,
            nodes,
            nhat,
            bucket_origin: lo,
            bucket_size: size,
            bucket_dims: dims,
            buckets,
        })
    }

    pub fn params(&self) -> &WaveguideParams {
        &self.p
    }

    fn node(&self, i: usize, j: usize) -> [f64; 2] {
        self.nodes[i * (self.p.n_v + 1) + j]
    }

    /// Inverts the bilinear map of cell (i, j); returns local (a, b).
    fn invert_cell(&self, i: usize, j: usize, q: &[f64; 2]) -> Option<(f64, f64)> {
        let p00 = self.node(i, j);
        let p10 = self.node(i + 1, j);
        let p01 = self.node(i, j + 1);
        let p11 = self.node(i + 1, j + 1);
        let (mut a, mut b) = (0.5, 0.5);
        for _ in 0..30 {
            let mut f = [0.0; 2];
            let mut ja = [0.0; 2];
            let mut jb = [0.0; 2];
            for k in 0..2 {
                f[k] = (1.0 - a) * (1.0 - b) * p00[k]
                    + a * (1.0 - b) * p10[k]
                    + (1.0 - a) * b * p01[k]
                    + a * b * p11[k]
                    - q[k];
                ja[k] = (1.0 - b) * (p10[k] - p00[k]) + b * (p11[k] - p01[k]);
                jb[k] = (1.0 - a) * (p01[k] - p00[k]) + a * (p11[k] - p10[k]);
            }
            let det = ja[0] * jb[1] - ja[1] * jb[0];
            if det.abs() < 1e-300 {
                return None;
            }
            let da = (f[0] * jb[1] - f[1] * jb[0]) / det;
            let db = (ja[0] * f[1] - ja[1] * f[0]) / det;
            a -= da;
            b -= db;
            if !(a.is_finite() && b.is_finite()) || a.abs() > 10.0 || b.abs() > 10.0 {
                return None;
            }
            if da.abs().max(db.abs()) < 1e-14 {
                break;
            }
        }
        let eps = 1e-9;
        ((-eps..=1.0 + eps).contains(&a) && (-eps..=1.0 + eps).contains(&b)).then_some((a, b))
    }

    fn locate(&self, x: &Point) -> Option<Located> {
        let q = [x[0], x[1]];
        let s = self.bucket_size;
        let bx = ((q[0] - self.bucket_origin[0]) / s).floor() as i64;
        let by = ((q[1] - self.bucket_origin[1]) / s).floor() as i64;
        let (nt, nv) = (self.p.n_tau, self.p.n_v);
        let mut cells: Vec<(usize, usize)> = Vec::new();
        for ix in bx - 1..=bx + 1 {
            for iy in by - 1..=by + 1 {
                if ix < 0
                    || iy < 0
                    || ix as usize >= self.bucket_dims[0]
                    || iy as usize >= self.bucket_dims[1]
                {
                    continue;
                }
                for &k in &self.buckets[ix as usize * self.bucket_dims[1] + iy as usize] {
                    let (i, j) = (k as usize / (nv + 1), k as usize % (nv + 1));
                    for ci in i.saturating_sub(1)..=i.min(nt - 1) {
                        for cj in j.saturating_sub(1)..=j.min(nv - 1) {
                            cells.push((ci, cj));
                        }
                    }
                }
            }
        }
        cells.sort_unstable();
        cells.dedup();
        let mut best: Option<Located> = None;
        for (i, j) in cells {
            let Some((a, b)) = self.invert_cell(i, j, &q) else {
                continue;
            };
            let v = -1.0 + 2.0 * (j as f64 + b) / nv as f64;
            if best.as_ref().is_some_and(|bst| bst.v.abs() <= v.abs()) {
                continue;
            }
            let vc = -1.0 + 2.0 * (j as f64 + 0.5) / nv as f64;
            let n0 = self.nhat[i];
            let n1 = self.nhat[i + 1];
            let mut n = [(1.0 - a) * n0[0] + a * n1[0], (1.0 - a) * n0[1] + a * n1[1]];
            let m = n[0].hypot(n[1]);
            let sgn = -vc.signum();
            n = [sgn * n[0] / m, sgn * n[1] / m];
            best = Some(Located {
                v,
                psi: self.p.c - v.abs(),
                n,
            });
        }
        best
    }
}

impl LevelSet for Waveguide {
    fn dim(&self) -> usize {
        2
    }

    /// Outside the swept band the value is `c - 1`.
    fn value(&self, x: &Point) -> f64 {
        self.locate(x).map_or(self.p.c - 1.0, |l| l.psi)
    }

    fn gradient(&self, x: &Point) -> Point {
        self.locate(x).map_or([0.0; 3], |l| [l.n[0], l.n[1], 0.0])
    }

    fn hessian(&self, _x: &Point) -> Hessian {
        [[0.0; 3]; 3]
    }

    fn is_signed_distance(&self) -> bool {
        true
    }

    /// Rays come straight from the parametrization: `y = x - s n`.
    fn project(&self, x: &Point, _opts: &NewtonOptions) -> Result<Projection> {
        let l = self.locate(x).ok_or(Error::OutsideBand(*x))?;
        let n = [l.n[0], l.n[1], 0.0];
        let y = [x[0] - l.psi * n[0], x[1] - l.psi * n[1], 0.0];
        Ok(Projection { y, s: l.psi, n })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn coarse() -> Waveguide {
        Waveguide::new(WaveguideParams {
            n_tau: 512,
            n_v: 128,
            ..Default::default()
        })
        .unwrap()
    }

    #[test]
    fn joints_are_continuous() {
        let p = WaveguideParams::default();
        for t in 1..5 {
            let tau = t as f64;
            let below = p.curve(tau - 1e-12).0;
            let at = p.curve(tau).0;
            assert!(
                (below[0] - at[0]).abs() < 1e-9 && (below[1] - at[1]).abs() < 1e-9,
                "joint {t}"
            );
        }
        let (r, _) = p.curve(0.5);
        assert!((r[0] - p.l0 / 2.0).abs() < 1e-15 && r[1] == p.y_off);
        let end = p.curve(5.0).0;
        assert!((end[0] - 2.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn centerline_value() {
        let w = coarse();
        for tau in [0.3, 1.5, 2.5, 3.7, 4.6] {
            let (r, _) = w.p.curve(tau);
            let v = w.value(&[r[0], r[1], 0.0]);
            // bilinear cells cut arcs along chords: error is the sagitta
            let ds = PI * 5.0 / 512.0;
            assert!((v - 0.5).abs() < ds * ds / 8.0 * 1.01, "tau {tau}: {v}");
        }
    }

    #[test]
    fn offset_points_recover_distance() {
        let w = coarse();
        for (tau, v) in [(0.4, 0.3), (2.5, -0.45), (1.3, 0.6), (3.5, -0.2)] {
            let q = w.p.surface(tau, v);
            let p = w
                .project(&[q[0], q[1], 0.0], &NewtonOptions::default())
                .unwrap();
            assert!(
                (p.s - (0.5 - f64::abs(v))).abs() < 1e-4,
                "tau {tau} v {v}: {}",
                p.s
            );
            let recon = [p.y[0] + p.s * p.n[0], p.y[1] + p.s * p.n[1]];
            assert!((recon[0] - q[0]).abs() < 1e-12 && (recon[1] - q[1]).abs() < 1e-12);
        }
    }

    #[test]
    fn far_point_is_outside() {
        let w = coarse();
        assert!(w
            .project(&[3.0, 0.2, 0.0], &NewtonOptions::default())
            .is_err());
        assert_eq!(w.value(&[3.0, 0.2, 0.0]), -0.5);
    }
}
