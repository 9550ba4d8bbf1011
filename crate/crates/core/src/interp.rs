//! Tensorized 4-point Lagrange interpolation on the periodic grid.

use crate::error::Point;
use crate::spectral::Grid;

/// Precomputed interpolation stencil for one query point.
#[derive(Clone, Debug, PartialEq)]
pub struct Stencil {
    idx: [[u32; 4]; 3],
    w: [[f64; 4]; 3],
}

/// Lagrange weights for nodes at offsets -1, 0, 1, 2 and fractional position `t`.
pub fn cubic_weights(t: f64) -> [f64; 4] {
    [
        -t * (t - 1.0) * (t - 2.0) / 6.0,
        (t + 1.0) * (t - 1.0) * (t - 2.0) / 2.0,
        -(t + 1.0) * t * (t - 2.0) / 2.0,
        (t + 1.0) * t * (t - 1.0) / 6.0,
    ]
}

impl Stencil {
    pub fn new(grid: &Grid, p: &Point) -> Self {
        let n = grid.n() as i64;
        let dx = grid.dx();
        let origin = grid.origin();
        let mut idx = [[0u32; 4]; 3];
        let mut w = [[0.0; 4]; 3];
        for a in 0..3 {
            if a >= grid.dim() {
                w[a] = [0.0, 1.0, 0.0, 0.0];
                continue;
            }
            let u = (p[a] - origin[a]) / dx;
            let i0 = u.floor();
            let mut t = u - i0;
            let mut i0 = i0 as i64;
            // snap nodes so that on-grid queries are exact
            if t > 1.0 - 1e-14 {
                t = 0.0;
                i0 += 1;
            } else if t < 1e-14 {
                t = 0.0;
            }
            for (o, slot) in idx[a].iter_mut().enumerate() {
                *slot = (i0 - 1 + o as i64).rem_euclid(n) as u32;
            }
            w[a] = cubic_weights(t);
        }
        Self { idx, w }
    }

    pub fn eval(&self, grid: &Grid, f: &[f64]) -> f64 {
        let n = grid.n();
        match grid.dim() {
            1 => (0..4)
                .map(|i| self.w[0][i] * f[self.idx[0][i] as usize])
                .sum(),
            2 => {
                let mut acc = 0.0;
                for i in 0..4 {
                    let row = self.idx[0][i] as usize * n;
                    let mut r = 0.0;
                    for j in 0..4 {
                        r += self.w[1][j] * f[row + self.idx[1][j] as usize];
                    }
                    acc += self.w[0][i] * r;
                }
                acc
            }
            _ => {
                let mut acc = 0.0;
                for i in 0..4 {
                    let pi = self.idx[0][i] as usize * n;
                    let mut ri = 0.0;
                    for j in 0..4 {
                        let pj = (pi + self.idx[1][j] as usize) * n;
                        let mut rj = 0.0;
                        for k in 0..4 {
                            rj += self.w[2][k] * f[pj + self.idx[2][k] as usize];
                        }
                        ri += self.w[1][j] * rj;
                    }
                    acc += self.w[0][i] * ri;
                }
                acc
            }
        }
    }
}

/// Interpolates `f` at each point (coordinates wrap periodically).
pub fn interpolate(grid: &Grid, f: &[f64], points: &[Point]) -> Vec<f64> {
    crate::parallel::map_slice(points, |p| Stencil::new(grid, p).eval(grid, f))
}
