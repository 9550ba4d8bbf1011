//! Periodic grids, FFT derivatives and the divergence projection.

use std::f64::consts::PI;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Point, Result};
use crate::parallel;

/// Real field sampled at every grid point, row-major with axis 0 slowest.
pub type ScalarField = Vec<f64>;

/// Equispaced periodic grid with `n` points per axis.
#[derive(Clone, Debug, PartialEq)]
pub struct Grid {
    dim: usize,
    n: usize,
    length: f64,
    origin: [f64; 3],
}

impl Grid {
    pub fn new(dim: usize, n: usize, length: f64, origin: &[f64]) -> Result<Self> {
        if !(1..=3).contains(&dim) {
            return Err(Error::InvalidGrid(format!("dimension {dim} not in 1..=3")));
        }
        if n < 2 || n % 2 != 0 {
            return Err(Error::InvalidGrid(format!("N = {n} must be even and >= 2")));
        }
        if !(length > 0.0) || !length.is_finite() {
            return Err(Error::InvalidGrid(format!(
                "box length {length} must be positive"
            )));
        }
        if origin.len() != dim {
            return Err(Error::InvalidGrid(format!(
                "origin has {} entries, expected {dim}",
                origin.len()
            )));
        }
        let mut o = [0.0; 3];
        o[..dim].copy_from_slice(origin);
        Ok(Self {
            dim,
            n,
            length,
            origin: o,
        })
    }

    /// Box `[0, length)^dim`.
    pub fn cube(dim: usize, n: usize, length: f64) -> Result<Self> {
        Self::new(dim, n, length, &vec![0.0; dim.min(3)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn length(&self) -> f64 {
        self.length
    }

    pub fn origin(&self) -> [f64; 3] {
        self.origin
    }

    pub fn dx(&self) -> f64 {
        self.length / self.n as f64
    }

    /// Number of grid points, `n^dim`.
    pub fn len(&self) -> usize {
        self.n.pow(self.dim as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn cell_volume(&self) -> f64 {
        self.dx().powi(self.dim as i32)
    }

    /// Distance between consecutive points along `axis` in the flat layout.
    pub fn stride(&self, axis: usize) -> usize {
        self.n.pow((self.dim - 1 - axis) as u32)
    }

    pub fn multi_index(&self, mut idx: usize) -> [usize; 3] {
        let mut out = [0; 3];
        for a in (0..self.dim).rev() {
            out[a] = idx % self.n;
            idx /= self.n;
        }
        out
    }

    /// Flat index of a multi-index; entries are wrapped periodically.
    pub fn flat_index(&self, mi: &[usize]) -> usize {
        mi[..self.dim]
            .iter()
            .fold(0, |acc, &i| acc * self.n + i % self.n)
    }

    pub fn coords(&self, idx: usize) -> Point {
        let mi = self.multi_index(idx);
        let dx = self.dx();
        let mut p = [0.0; 3];
        for a in 0..self.dim {
            p[a] = self.origin[a] + mi[a] as f64 * dx;
        }
        p
    }

    /// Samples `f` at every grid point.
    pub fn sample<F>(&self, f: F) -> ScalarField
    where
        F: Fn(&Point) -> f64 + Sync + Send,
    {
        parallel::map_indices(self.len(), |i| f(&self.coords(i)))
    }

    fn check(&self, f: &[f64]) -> Result<()> {
        if f.len() != self.len() {
            return Err(Error::ShapeMismatch {
                expected: self.len(),
                got: f.len(),
            });
        }
        Ok(())
    }
}

/// `k_l = 2πl/D` for `l <= N/2`, `2π(l-N)/D` above.
pub fn wavenumbers(n: usize, length: f64) -> Result<Vec<f64>> {
    if n == 0 || n % 2 != 0 {
        return Err(Error::InvalidGrid(format!("N = {n} must be even")));
    }
    if !(length > 0.0) {
        return Err(Error::InvalidGrid(format!(
            "box length {length} must be positive"
        )));
    }
    let scale = 2.0 * PI / length;
    Ok((0..n)
        .map(|l| {
            if l <= n / 2 {
                scale * l as f64
            } else {
                scale * (l as f64 - n as f64)
            }
        })
        .collect())
}

/// Spectral operator set bound to one grid.
#[derive(Clone)]
pub struct Spectral {
    grid: Grid,
    k: Vec<f64>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
}

impl std::fmt::Debug for Spectral {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Spectral")
            .field("grid", &self.grid)
            .finish()
    }
}

const PAIRS_PER_BATCH: usize = 32;

impl Spectral {
    pub fn new(grid: &Grid) -> Result<Self> {
        let k = wavenumbers(grid.n(), grid.length())?;
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(grid.n());
        let inv = planner.plan_fft_inverse(grid.n());
        Ok(Self {
            grid: grid.clone(),
            k,
            fwd,
            inv,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn wavenumbers(&self) -> &[f64] {
        &self.k
    }

    /// Fourier multiplier `e^{-c_f j²/N²} (ik)^order / N`, Nyquist zeroed for odd orders.
    /// The filter uses the integer mode index `j = k D / 2π`, so its strength is
    /// tied to the resolution and not to the box size.
    pub fn multiplier(&self, order: u32, c_f: Option<f64>) -> Vec<Complex64> {
        let n = self.grid.n();
        let norm = 1.0 / n as f64;
        let to_index = self.grid.length() / (2.0 * std::f64::consts::PI);
        self.k
            .iter()
            .enumerate()
            .map(|(l, &k)| {
                if order % 2 == 1 && l == n / 2 {
                    return Complex64::new(0.0, 0.0);
                }
                let j = k * to_index;
                let filter = c_f.map_or(1.0, |c| (-c * j * j / (n * n) as f64).exp());
                Complex64::new(0.0, k).powu(order) * (filter * norm)
            })
            .collect()
    }

    /// Filtered spectral derivative along `axis`.
    pub fn derivative(
        &self,
        f: &[f64],
        axis: usize,
        order: u32,
        c_f: Option<f64>,
    ) -> Result<ScalarField> {
        self.grid.check(f)?;
        if axis >= self.grid.dim() {
            return Err(Error::InvalidParameter(format!("axis {axis} out of range")));
        }
        if let Some(c) = c_f {
            if !(c >= 0.0) {
                return Err(Error::InvalidParameter(format!(
                    "filter coefficient {c} < 0"
                )));
            }
        }
        let mult = self.multiplier(order, c_f);
        let mut out = vec![0.0; f.len()];
        self.apply_along_axis(f, axis, &mult, &mut out);
        Ok(out)
    }

    /// Applies a Hermitian multiplier (normalization included) to every line
    /// along `axis`. Two real lines share one complex transform.
    pub fn apply_along_axis(&self, f: &[f64], axis: usize, mult: &[Complex64], out: &mut [f64]) {
        let n = self.grid.n();
        let stride = self.grid.stride(axis);
        let nlines = f.len() / n;
        let line_base = |l: usize| (l / stride) * n * stride + l % stride;
        let npairs = nlines.div_ceil(2);
        let nbatches = npairs.div_ceil(PAIRS_PER_BATCH);

        let batches = parallel::map_indices(nbatches, |b| {
            let mut buf = vec![Complex64::new(0.0, 0.0); n];
            let mut scratch = vec![
                Complex64::new(0.0, 0.0);
                self.fwd
                    .get_inplace_scratch_len()
                    .max(self.inv.get_inplace_scratch_len())
            ];
            let first = b * PAIRS_PER_BATCH * 2;
            let last = ((b + 1) * PAIRS_PER_BATCH * 2).min(nlines);
            let mut res = Vec::with_capacity((last - first) * n);
            let mut l = first;
            while l < last {
                let a = line_base(l);
                let second = (l + 1 < last).then(|| line_base(l + 1));
                for (j, c) in buf.iter_mut().enumerate() {
                    let im = second.map_or(0.0, |bb| f[bb + j * stride]);
                    *c = Complex64::new(f[a + j * stride], im);
                }
                self.fwd.process_with_scratch(&mut buf, &mut scratch);
                for (c, m) in buf.iter_mut().zip(mult) {
                    *c *= m;
                }
                self.inv.process_with_scratch(&mut buf, &mut scratch);
                res.extend(buf.iter().map(|c| c.re));
                if second.is_some() {
                    res.extend(buf.iter().map(|c| c.im));
                }
                l += 2;
            }
            res
        });

        for (b, res) in batches.into_iter().enumerate() {
            let first = b * PAIRS_PER_BATCH * 2;
            for (off, line) in res.chunks_exact(n).enumerate() {
                let base = line_base(first + off);
                for (j, v) in line.iter().enumerate() {
                    out[base + j * stride] = *v;
                }
            }
        }
    }

    fn transform_nd(&self, data: &mut [Complex64], forward: bool) {
        let n = self.grid.n();
        let plan = if forward { &self.fwd } else { &self.inv };
        for axis in 0..self.grid.dim() {
            let stride = self.grid.stride(axis);
            let nlines = data.len() / n;
            let line_base = |l: usize| (l / stride) * n * stride + l % stride;
            let per_batch = PAIRS_PER_BATCH * 2;
            let nbatches = nlines.div_ceil(per_batch);
            let src: &[Complex64] = data;
            let batches = parallel::map_indices(nbatches, |b| {
                let mut scratch = vec![Complex64::new(0.0, 0.0); plan.get_inplace_scratch_len()];
                let first = b * per_batch;
                let last = ((b + 1) * per_batch).min(nlines);
                let mut res = Vec::with_capacity((last - first) * n);
                for l in first..last {
                    let base = line_base(l);
                    let start = res.len();
                    res.extend((0..n).map(|j| src[base + j * stride]));
                    plan.process_with_scratch(&mut res[start..], &mut scratch);
                }
                res
            });
            for (b, res) in batches.into_iter().enumerate() {
                for (off, line) in res.chunks_exact(n).enumerate() {
                    let base = line_base(b * per_batch + off);
                    for (j, v) in line.iter().enumerate() {
                        data[base + j * stride] = *v;
                    }
                }
            }
        }
    }

    /// Unnormalized multidimensional forward DFT.
    pub fn forward_nd(&self, data: &mut [Complex64]) {
        self.transform_nd(data, true);
    }

    /// Unnormalized multidimensional inverse DFT.
    pub fn inverse_nd(&self, data: &mut [Complex64]) {
        self.transform_nd(data, false);
    }

    /// Spectral divergence of a `dim`-component vector field (no filter).
    pub fn divergence(&self, e: &[ScalarField]) -> Result<ScalarField> {
        let dim = self.grid.dim();
        if e.len() != dim {
            return Err(Error::InvalidParameter(format!(
                "divergence needs {dim} components, got {}",
                e.len()
            )));
        }
        let mult = self.multiplier(1, None);
        let mut div = vec![0.0; self.grid.len()];
        let mut tmp = vec![0.0; self.grid.len()];
        for (a, comp) in e.iter().enumerate() {
            self.grid.check(comp)?;
            self.apply_along_axis(comp, a, &mult, &mut tmp);
            div.iter_mut().zip(&tmp).for_each(|(d, t)| *d += t);
        }
        Ok(div)
    }

    /// `max |div E| (1 - χ)`.
    pub fn masked_divergence_max(&self, e: &[ScalarField], chi: &[f64]) -> Result<f64> {
        let div = self.divergence(e)?;
        Ok(div
            .iter()
            .zip(chi)
            .map(|(d, c)| (d * (1.0 - c)).abs())
            .fold(0.0, f64::max))
    }

    /// Removes the gradient part of the divergence seen outside the mask.
    ///
    /// The Poisson symbol uses the same Nyquist-zeroed wavenumbers as the
    /// first derivative, so the masked divergence is cancelled exactly.
    pub fn project_divergence_free(&self, e: &mut [ScalarField], chi: &[f64]) -> Result<()> {
        let dim = self.grid.dim();
        if dim < 2 {
            return Err(Error::InvalidParameter("projection needs dim >= 2".into()));
        }
        self.grid.check(chi)?;
        let div = self.divergence(e)?;
        let mut w: Vec<Complex64> = div
            .iter()
            .zip(chi)
            .map(|(d, c)| Complex64::new(d * (1.0 - c), 0.0))
            .collect();
        self.forward_nd(&mut w);

        let n = self.grid.n();
        let kd: Vec<f64> = self
            .k
            .iter()
            .enumerate()
            .map(|(l, &k)| if l == n / 2 { 0.0 } else { k })
            .collect();
        let norm = 1.0 / self.grid.len() as f64;
        parallel::for_each_mut(&mut w, |i, c| {
            let mi = self.grid.multi_index(i);
            let ksq: f64 = (0..dim).map(|a| kd[mi[a]] * kd[mi[a]]).sum();
            *c = if ksq == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                -*c * (norm / ksq)
            };
        });

        for (a, comp) in e.iter_mut().enumerate() {
            let mut g = w.clone();
            parallel::for_each_mut(&mut g, |i, c| {
                let ka = kd[self.grid.multi_index(i)[a]];
                *c *= Complex64::new(0.0, ka);
            });
            self.inverse_nd(&mut g);
            comp.iter_mut().zip(&g).for_each(|(v, c)| *v -= c.re);
        }
        Ok(())
    }
}
