//! Level sets, closest-point projection, boundary rays and the penalty mask.
//!
//! Sign convention: `ψ̂ > 0` in the physical region, `ψ̂ < 0` inside the
//! conductor. Normals point toward the physical region, so a grid point is
//! `x = y + s n` with `s > 0` outside the conductor.

mod waveguide;

use std::path::Path;
use std::sync::Arc;

use crate::error::{Error, Point, Result};
use crate::parallel;
use crate::spectral::{Grid, ScalarField};

pub use waveguide::{Waveguide, WaveguideParams};

pub type Hessian = [[f64; 3]; 3];

/// Closest boundary point of a query together with its signed distance.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Projection {
    pub y: Point,
    pub s: f64,
    pub n: Point,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct NewtonOptions {
    pub tol: f64,
    pub max_iter: usize,
    pub max_halvings: usize,
}

impl Default for NewtonOptions {
    fn default() -> Self {
        Self {
            tol: 1e-12,
            max_iter: 50,
            max_halvings: 20,
        }
    }
}

pub trait LevelSet: Send + Sync + std::fmt::Debug {
    fn dim(&self) -> usize;
    fn value(&self, x: &Point) -> f64;
    fn gradient(&self, x: &Point) -> Point;
    fn hessian(&self, x: &Point) -> Hessian;
    fn is_signed_distance(&self) -> bool;

    fn project(&self, x: &Point, opts: &NewtonOptions) -> Result<Projection> {
        newton_project(self, x, opts)
    }
}

/// Built-in level sets.
#[derive(Clone, Debug, PartialEq)]
pub enum ShapeSpec {
    /// `ψ = x - x0`; conductor on the left.
    Halfspace { x0: f64 },
    /// `ψ = |x - c| - a`; conductor inside the disc.
    CircleHole { center: [f64; 2], a: f64 },
    /// `ψ = r - |x - c|`; physical region inside the disc.
    CircularCavity { center: [f64; 2], radius: f64 },
    /// `ψ = |x - c| - a` in three dimensions.
    SphereHole { center: [f64; 3], a: f64 },
    /// `(x²+y²)² - 4ayx² + ay(x²+y²) - b`; not a distance function.
    Trifolium { a: f64, b: f64 },
    /// `a - sin(2πx)cos(2πy) - sin(2πy)cos(2πz) - sin(2πz)cos(2πx)`.
    Gyroid { a: f64 },
    /// Bent channel swept along a piecewise curve.
    Waveguide(WaveguideParams),
}

#[derive(Clone, Debug, PartialEq)]
pub struct Shape {
    spec: ShapeSpec,
}

pub type Geometry = Arc<dyn LevelSet>;

pub fn make_shape(spec: ShapeSpec) -> Result<Geometry> {
    let positive = |name: &str, v: f64| {
        if v > 0.0 && v.is_finite() {
            Ok(())
        } else {
            Err(Error::InvalidParameter(format!(
                "{name} = {v} must be positive"
            )))
        }
    };
    match &spec {
        ShapeSpec::Halfspace { x0 } => {
            if !x0.is_finite() {
                return Err(Error::InvalidParameter(
                    "halfspace offset not finite".into(),
                ));
            }
        }
        ShapeSpec::CircleHole { a, .. } | ShapeSpec::SphereHole { a, .. } => positive("a", *a)?,
        ShapeSpec::CircularCavity { radius, .. } => positive("radius", *radius)?,
        ShapeSpec::Trifolium { a, b } => {
            positive("a", *a)?;
            positive("b", *b)?;
        }
        ShapeSpec::Gyroid { a } => {
            if !a.is_finite() || a.abs() >= 1.5 {
                return Err(Error::InvalidParameter(format!(
                    "gyroid offset {a} outside (-1.5, 1.5)"
                )));
            }
        }
        ShapeSpec::Waveguide(p) => return Ok(Arc::new(Waveguide::new(p.clone())?)),
    }
    Ok(Arc::new(Shape { spec }))
}

fn radial(d: &[f64], dim: usize) -> (f64, Point, Hessian) {
    let r = d[..dim].iter().map(|v| v * v).sum::<f64>().sqrt();
    let mut g = [0.0; 3];
    let mut h = [[0.0; 3]; 3];
    if r == 0.0 {
        return (0.0, g, h);
    }
    for i in 0..dim {
        g[i] = d[i] / r;
        for j in 0..dim {
            let delta = if i == j { 1.0 } else { 0.0 };
            h[i][j] = (delta - g[i] * g[j]) / r;
        }
    }
    (r, g, h)
}

fn neg(g: Point) -> Point {
    [-g[0], -g[1], -g[2]]
}

fn neg_h(h: Hessian) -> Hessian {
    h.map(|row| row.map(|v| -v))
}

impl Shape {
    fn eval(&self, x: &Point) -> (f64, Point, Hessian) {
        use std::f64::consts::TAU;
        match self.spec {
            ShapeSpec::Halfspace { x0 } => (x[0] - x0, [1.0, 0.0, 0.0], [[0.0; 3]; 3]),
            ShapeSpec::CircleHole { center, a } => {
                let (r, g, h) = radial(&[x[0] - center[0], x[1] - center[1]], 2);
                (r - a, g, h)
            }
            ShapeSpec::CircularCavity { center, radius } => {
                let (r, g, h) = radial(&[x[0] - center[0], x[1] - center[1]], 2);
                (radius - r, neg(g), neg_h(h))
            }
            ShapeSpec::SphereHole { center, a } => {
                let (r, g, h) = radial(&[x[0] - center[0], x[1] - center[1], x[2] - center[2]], 3);
                (r - a, g, h)
            }
            ShapeSpec::Trifolium { a, b } => {
                let (px, py) = (x[0], x[1]);
                let q = px * px + py * py;
                let v = q * q - 3.0 * a * px * px * py + a * py.powi(3) - b;
                let g = [
                    4.0 * px * q - 6.0 * a * px * py,
                    4.0 * py * q - 3.0 * a * px * px + 3.0 * a * py * py,
                    0.0,
                ];
                let hxy = 8.0 * px * py - 6.0 * a * px;
                let h = [
                    [4.0 * q + 8.0 * px * px - 6.0 * a * py, hxy, 0.0],
                    [hxy, 4.0 * q + 8.0 * py * py + 6.0 * a * py, 0.0],
                    [0.0; 3],
                ];
                (v, g, h)
            }
            ShapeSpec::Gyroid { a } => {
                let w = TAU;
                let (sx, cx) = (w * x[0]).sin_cos();
                let (sy, cy) = (w * x[1]).sin_cos();
                let (sz, cz) = (w * x[2]).sin_cos();
                let v = a - sx * cy - sy * cz - sz * cx;
                let g = [
                    w * (sz * sx - cx * cy),
                    w * (sx * sy - cy * cz),
                    w * (sy * sz - cz * cx),
                ];
                let w2 = w * w;
                let (hxy, hxz, hyz) = (w2 * cx * sy, w2 * sx * cz, w2 * cy * sz);
                let h = [
                    [w2 * (sx * cy + sz * cx), hxy, hxz],
                    [hxy, w2 * (sx * cy + sy * cz), hyz],
                    [hxz, hyz, w2 * (sy * cz + sz * cx)],
                ];
                (v, g, h)
            }
            ShapeSpec::Waveguide(_) => unreachable!("waveguide has its own type"),
        }
    }
}

impl LevelSet for Shape {
    fn dim(&self) -> usize {
        match self.spec {
            ShapeSpec::Halfspace { .. } => 1,
            ShapeSpec::CircleHole { .. }
            | ShapeSpec::CircularCavity { .. }
            | ShapeSpec::Trifolium { .. }
            | ShapeSpec::Waveguide(_) => 2,
            ShapeSpec::SphereHole { .. } | ShapeSpec::Gyroid { .. } => 3,
        }
    }

    fn value(&self, x: &Point) -> f64 {
        self.eval(x).0
    }

    fn gradient(&self, x: &Point) -> Point {
        self.eval(x).1
    }

    fn hessian(&self, x: &Point) -> Hessian {
        self.eval(x).2
    }

    fn is_signed_distance(&self) -> bool {
        !matches!(
            self.spec,
            ShapeSpec::Trifolium { .. } | ShapeSpec::Gyroid { .. }
        )
    }
}

pub(crate) fn norm(v: &Point, dim: usize) -> f64 {
    v[..dim].iter().map(|a| a * a).sum::<f64>().sqrt()
}

fn cross(a: &Point, b: &Point) -> Point {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

/// `f(y) = [ψ(y); (y - x) × ∇ψ(y)]` and its Jacobian.
fn newton_system<G: LevelSet + ?Sized>(
    geom: &G,
    x: &Point,
    y: &Point,
) -> (Vec<f64>, Vec<[f64; 3]>, f64) {
    let dim = geom.dim();
    let psi = geom.value(y);
    let g = geom.gradient(y);
    let gn = norm(&g, dim);
    let mut d = [0.0; 3];
    for a in 0..dim {
        d[a] = y[a] - x[a];
    }
    match dim {
        1 => (vec![psi], vec![[g[0], 0.0, 0.0]], gn),
        2 => {
            let h = geom.hessian(y);
            let c = d[0] * g[1] - d[1] * g[0];
            let j1 = [
                g[1] + d[0] * h[1][0] - d[1] * h[0][0],
                -g[0] + d[0] * h[1][1] - d[1] * h[0][1],
                0.0,
            ];
            (vec![psi, c], vec![[g[0], g[1], 0.0], j1], gn)
        }
        _ => {
            let h = geom.hessian(y);
            let c = cross(&d, &g);
            let mut rows = vec![g, [0.0; 3], [0.0; 3], [0.0; 3]];
            for j in 0..3 {
                let mut e = [0.0; 3];
                e[j] = 1.0;
                let hj = [h[0][j], h[1][j], h[2][j]];
                let a = cross(&e, &g);
                let b = cross(&d, &hj);
                for i in 0..3 {
                    rows[1 + i][j] = a[i] + b[i];
                }
            }
            (vec![psi, c[0], c[1], c[2]], rows, gn)
        }
    }
}

fn solve3(a: [[f64; 3]; 3], b: [f64; 3], dim: usize) -> Option<[f64; 3]> {
    let mut m = [[0.0; 4]; 3];
    for i in 0..dim {
        m[i][..dim].copy_from_slice(&a[i][..dim]);
        m[i][3] = b[i];
    }
    for col in 0..dim {
        let piv = (col..dim).max_by(|&p, &q| m[p][col].abs().total_cmp(&m[q][col].abs()))?;
        if m[piv][col].abs() < 1e-300 {
            return None;
        }
        m.swap(col, piv);
        for r in 0..dim {
            if r != col {
                let f = m[r][col] / m[col][col];
                for c in col..4 {
                    m[r][c] -= f * m[col][c];
                }
            }
        }
    }
    let mut x = [0.0; 3];
    for i in 0..dim {
        x[i] = m[i][3] / m[i][i];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// Gauss-Newton step (exact Newton when the system is square).
fn newton_step(f: &[f64], jac: &[[f64; 3]], dim: usize) -> Option<[f64; 3]> {
    if f.len() == dim {
        let mut a = [[0.0; 3]; 3];
        let mut b = [0.0; 3];
        for i in 0..dim {
            a[i] = jac[i];
            b[i] = -f[i];
        }
        return solve3(a, b, dim);
    }
    let mut a = [[0.0; 3]; 3];
    let mut b = [0.0; 3];
    for (row, fi) in jac.iter().zip(f) {
        for i in 0..dim {
            b[i] -= row[i] * fi;
            for j in 0..dim {
                a[i][j] += row[i] * row[j];
            }
        }
    }
    solve3(a, b, dim)
}

fn scaled_residual(f: &[f64], gn: f64) -> f64 {
    let m = f.iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
    if gn > 0.0 && gn.is_finite() {
        m / gn
    } else {
        f64::INFINITY
    }
}

/// Damped Newton solve for the closest boundary point of `x`.
///
/// The residual is measured as `‖f‖∞ / |∇ψ̂(y)|`, which has units of length.
pub fn newton_project<G: LevelSet + ?Sized>(
    geom: &G,
    x: &Point,
    opts: &NewtonOptions,
) -> Result<Projection> {
    let dim = geom.dim();
    let fail = |iterations, residual| Error::NewtonFailed {
        point: *x,
        iterations,
        residual,
    };
    let psi_x = geom.value(x);
    let gx = geom.gradient(x);
    let gx2: f64 = gx[..dim].iter().map(|v| v * v).sum();
    if !(gx2 > 0.0) || !psi_x.is_finite() {
        return Err(fail(0, f64::INFINITY));
    }
    let mut y = *x;
    for a in 0..dim {
        y[a] -= psi_x * gx[a] / gx2;
    }
    newton_from(geom, x, y, psi_x, opts)
}

fn newton_from<G: LevelSet + ?Sized>(
    geom: &G,
    x: &Point,
    mut y: Point,
    psi_x: f64,
    opts: &NewtonOptions,
) -> Result<Projection> {
    let dim = geom.dim();
    let fail = |iterations, residual| Error::NewtonFailed {
        point: *x,
        iterations,
        residual,
    };
    let (mut f, mut jac, mut gn) = newton_system(geom, x, &y);
    let mut res = scaled_residual(&f, gn);
    let mut iter = 0;
    while res > opts.tol {
        if iter == opts.max_iter {
            return Err(fail(iter, res));
        }
        iter += 1;
        let step = newton_step(&f, &jac, dim).ok_or_else(|| fail(iter, res))?;
        let mut alpha = 1.0;
        let mut accepted = false;
        for _ in 0..=opts.max_halvings {
            let mut trial = y;
            for a in 0..dim {
                trial[a] += alpha * step[a];
            }
            let (tf, tj, tg) = newton_system(geom, x, &trial);
            let tres = scaled_residual(&tf, tg);
            if tres < res {
                y = trial;
                f = tf;
                jac = tj;
                gn = tg;
                res = tres;
                accepted = true;
                break;
            }
            alpha *= 0.5;
        }
        if !accepted {
            // stagnation at roundoff level counts as converged
            if res <= 1e3 * opts.tol {
                break;
            }
            return Err(fail(iter, res));
        }
    }
    let g = geom.gradient(&y);
    let gnorm = norm(&g, dim);
    let mut n = [0.0; 3];
    let mut dist2 = 0.0;
    for a in 0..dim {
        n[a] = g[a] / gnorm;
        dist2 += (x[a] - y[a]).powi(2);
    }
    let s = if psi_x == 0.0 {
        0.0
    } else {
        psi_x.signum() * dist2.sqrt()
    };
    let _ = gn;
    Ok(Projection { y, s, n })
}

fn search_directions(dim: usize) -> Vec<Point> {
    use std::f64::consts::PI;
    match dim {
        1 => vec![[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]],
        2 => (0..96)
            .map(|k| (2.0 * PI * k as f64 / 96.0).sin_cos())
            .map(|(s, c)| [c, s, 0.0])
            .collect(),
        _ => {
            // Fibonacci sphere
            let n = 400;
            let golden = PI * (3.0 - 5f64.sqrt());
            (0..n)
                .map(|k| {
                    let z = 1.0 - 2.0 * (k as f64 + 0.5) / n as f64;
                    let r = (1.0 - z * z).sqrt();
                    let (s, c) = (golden * k as f64).sin_cos();
                    [r * c, r * s, z]
                })
                .collect()
        }
    }
}

/// Closest-point projection that falls back to Newton solves started from
/// the sign changes of `ψ̂` found by marching rays out to `radius`.
///
/// Returns `Ok(None)` when the default start fails and no boundary point lies
/// within `radius`.
pub fn project_within<G: LevelSet + ?Sized>(
    geom: &G,
    x: &Point,
    opts: &NewtonOptions,
    radius: f64,
) -> Result<Option<Projection>> {
    let first = match geom.project(x, opts) {
        Ok(p) => return Ok(Some(p)),
        Err(e) => e,
    };
    let dim = geom.dim();
    let psi_x = geom.value(x);
    let steps = 48;
    let mut best: Option<Projection> = None;
    let mut found_crossing = false;
    for d in search_directions(dim) {
        let at = |t: f64| {
            let mut p = *x;
            for a in 0..dim {
                p[a] += t * d[a];
            }
            p
        };
        let mut t0 = 0.0;
        for k in 1..=steps {
            let t1 = radius * k as f64 / steps as f64;
            if geom.value(&at(t1)).signum() == psi_x.signum() {
                t0 = t1;
                continue;
            }
            let (mut lo, mut hi) = (t0, t1);
            for _ in 0..60 {
                let mid = 0.5 * (lo + hi);
                if geom.value(&at(mid)).signum() == psi_x.signum() {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            found_crossing = true;
            if let Ok(p) = newton_from(geom, x, at(0.5 * (lo + hi)), psi_x, opts) {
                if best.map_or(true, |b| p.s.abs() < b.s.abs()) {
                    best = Some(p);
                }
            }
            break;
        }
    }
    match best {
        Some(p) => Ok(Some(p)),
        None if !found_crossing => Ok(None),
        None => Err(first),
    }
}

/// One entry of the boundary-ray table.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundaryRay {
    pub index: usize,
    pub x: Point,
    pub y: Point,
    pub s: f64,
    pub n: Point,
}

/// Rays for every grid point whose signed distance lies in `[-L, h]`.
#[derive(Clone, Debug)]
pub struct RayTable {
    dim: usize,
    h: f64,
    l: f64,
    rays: Vec<BoundaryRay>,
    chi: ScalarField,
}

impl RayTable {
    pub fn rays(&self) -> &[BoundaryRay] {
        &self.rays
    }

    pub fn len(&self) -> usize {
        self.rays.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rays.is_empty()
    }

    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn decay_length(&self) -> f64 {
        self.l
    }

    /// `χ_h`: 1 on points with signed distance `<= h`, else 0.
    pub fn chi(&self) -> &ScalarField {
        &self.chi
    }

    pub fn write_csv<P: AsRef<Path>>(&self, path: P) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        let axes = ["x", "y", "z"];
        let mut header = vec!["j".to_string()];
        for prefix in ["x", "y"] {
            header.extend(axes[..self.dim].iter().map(|a| format!("{prefix}_{a}")));
        }
        header.push("s".into());
        header.extend(axes[..self.dim].iter().map(|a| format!("n_{a}")));
        w.write_record(&header)?;
        for r in &self.rays {
            let mut rec = vec![r.index.to_string()];
            for v in [&r.x, &r.y] {
                rec.extend(v[..self.dim].iter().map(|c| format!("{c:.17e}")));
            }
            rec.push(format!("{:.17e}", r.s));
            rec.extend(r.n[..self.dim].iter().map(|c| format!("{c:.17e}")));
            w.write_record(&rec)?;
        }
        w.flush()?;
        Ok(())
    }
}

enum Classified {
    Outside,
    Deep,
    Ray(BoundaryRay),
}

fn classify(
    geom: &dyn LevelSet,
    grid: &Grid,
    idx: usize,
    h: f64,
    l: f64,
    band: f64,
    opts: &NewtonOptions,
) -> Result<Classified> {
    let x = grid.coords(idx);
    let psi = geom.value(&x);
    let reach = h.max(l);
    let fallback = if psi < 0.0 {
        Classified::Deep
    } else {
        Classified::Outside
    };
    if psi.abs() > band {
        return Ok(fallback);
    }
    let estimate = psi.abs() / norm(&geom.gradient(&x), grid.dim());
    if geom.is_signed_distance() || !(estimate <= 2.0 * reach) {
        return match geom.project(&x, opts) {
            Ok(p) if p.s >= -l && p.s <= h => Ok(Classified::Ray(BoundaryRay {
                index: idx,
                x,
                y: p.y,
                s: p.s,
                n: p.n,
            })),
            Ok(_) => Ok(fallback),
            Err(_) if !(estimate <= 2.0 * reach) => Ok(fallback),
            Err(e) => Err(Error::RayFailed {
                index: idx,
                source: Box::new(e),
            }),
        };
    }
    match project_within(geom, &x, opts, 1.5 * reach) {
        Ok(Some(p)) if p.s >= -l && p.s <= h => Ok(Classified::Ray(BoundaryRay {
            index: idx,
            x,
            y: p.y,
            s: p.s,
            n: p.n,
        })),
        Ok(_) => Ok(fallback),
        Err(e) => Err(Error::RayFailed {
            index: idx,
            source: Box::new(e),
        }),
    }
}

fn prefilter_band(geom: &dyn LevelSet, grid: &Grid, reach: f64) -> f64 {
    let gmax = parallel::map_indices(grid.len(), |i| {
        norm(&geom.gradient(&grid.coords(i)), grid.dim())
    })
    .into_iter()
    .filter(|v| v.is_finite())
    .fold(0.0, f64::max);
    4.0 * gmax.max(1.0) * reach
}

fn check_dims(geom: &dyn LevelSet, grid: &Grid) -> Result<()> {
    if geom.dim() != grid.dim() {
        return Err(Error::InvalidParameter(format!(
            "geometry is {}-dimensional but the grid is {}-dimensional",
            geom.dim(),
            grid.dim()
        )));
    }
    Ok(())
}

/// Builds the boundary-ray table and the matching mask `χ_h`.
pub fn build_ray_table(geom: &dyn LevelSet, grid: &Grid, h: f64, l: f64) -> Result<RayTable> {
    check_dims(geom, grid)?;
    if !(h > 0.0) || !(l > 0.0) {
        return Err(Error::InvalidParameter(format!(
            "need h > 0 and L > 0 (h = {h}, L = {l})"
        )));
    }
    let opts = NewtonOptions::default();
    let band = prefilter_band(geom, grid, h.max(l));
    let classes = parallel::map_indices(grid.len(), |i| classify(geom, grid, i, h, l, band, &opts));
    let mut rays = Vec::new();
    let mut chi = vec![0.0; grid.len()];
    for (i, c) in classes.into_iter().enumerate() {
        match c? {
            Classified::Outside => {}
            Classified::Deep => chi[i] = 1.0,
            Classified::Ray(r) => {
                chi[i] = 1.0;
                rays.push(r);
            }
        }
    }
    Ok(RayTable {
        dim: grid.dim(),
        h,
        l,
        rays,
        chi,
    })
}

/// `χ_h = 1` where the signed distance is at most `h`.
pub fn mask_chi_h(geom: &dyn LevelSet, grid: &Grid, h: f64) -> Result<ScalarField> {
    check_dims(geom, grid)?;
    if !(h >= 0.0) {
        return Err(Error::InvalidParameter(format!(
            "h = {h} must be nonnegative"
        )));
    }
    let opts = NewtonOptions::default();
    let reach = h.max(grid.dx());
    let band = prefilter_band(geom, grid, reach);
    let vals = parallel::map_indices(grid.len(), |i| -> Result<f64> {
        let x = grid.coords(i);
        let psi = geom.value(&x);
        if psi < 0.0 {
            return Ok(1.0);
        }
        if psi > band {
            return Ok(0.0);
        }
        match classify(geom, grid, i, h, 0.0, band, &opts)? {
            Classified::Ray(_) => Ok(1.0),
            _ => Ok(0.0),
        }
    });
    vals.into_iter().collect()
}
