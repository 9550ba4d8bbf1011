//! Dense assembly of the semi-discrete operator and RK4 containment checks.

use std::path::Path;

use faer::Mat;
use rustfft::num_complex::Complex64;

use crate::equations::Problem;
use crate::error::{Error, Result};
use crate::parallel;
use crate::spectral::ScalarField;
use crate::timestepping::rk4_amplification;

/// Column-major square matrix with the flat state ordering
/// `component * grid_len + grid_index`.
#[derive(Clone, Debug)]
pub struct DenseOperator {
    n: usize,
    data: Vec<f64>,
    pub components: Vec<&'static str>,
    pub grid_len: usize,
}

impl DenseOperator {
    pub fn size(&self) -> usize {
        self.n
    }

    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.data[j * self.n + i]
    }

    pub fn column(&self, j: usize) -> &[f64] {
        &self.data[j * self.n..(j + 1) * self.n]
    }

    pub fn apply(&self, x: &[f64]) -> Vec<f64> {
        let mut y = vec![0.0; self.n];
        for (j, xj) in x.iter().enumerate() {
            if *xj != 0.0 {
                for (yi, a) in y.iter_mut().zip(self.column(j)) {
                    *yi += a * xj;
                }
            }
        }
        y
    }

    pub fn apply_complex(&self, x: &[Complex64]) -> Vec<Complex64> {
        let mut y = vec![Complex64::new(0.0, 0.0); self.n];
        for (j, xj) in x.iter().enumerate() {
            for (yi, a) in y.iter_mut().zip(self.column(j)) {
                *yi += xj * a;
            }
        }
        y
    }

    fn to_faer(&self) -> Mat<f64> {
        Mat::from_fn(self.n, self.n, |i, j| self.get(i, j))
    }
}

fn split(problem: &Problem, flat: &[f64]) -> Vec<ScalarField> {
    flat.chunks_exact(problem.grid().len())
        .map(|c| c.to_vec())
        .collect()
}

fn rhs_flat(problem: &Problem, t: f64, flat: &[f64]) -> Result<Vec<f64>> {
    let u = split(problem, flat);
    let mut du = problem.zero_state();
    problem.rhs(t, &u, &mut du)?;
    Ok(du.concat())
}

/// Deterministic pseudo-random values in `[-1, 1)`.
fn noise(n: usize, seed: u64) -> Vec<f64> {
    let mut s = seed.wrapping_mul(0x9E37_79B9_7F4A_7C15) | 1;
    (0..n)
        .map(|_| {
            s ^= s << 13;
            s ^= s >> 7;
            s ^= s << 17;
            (s >> 11) as f64 / (1u64 << 52) as f64 - 1.0
        })
        .collect()
}

fn rel_defect(a: &[f64], b: &[f64]) -> f64 {
    let num = a
        .iter()
        .zip(b)
        .map(|(x, y)| (x - y).abs())
        .fold(0.0, f64::max);
    let den = a
        .iter()
        .chain(b)
        .map(|x| x.abs())
        .fold(0.0, f64::max)
        .max(1e-300);
    num / den
}

/// Spot-checks homogeneity and additivity of the RHS at random states.
pub fn check_linearity(problem: &Problem, t: f64) -> Result<f64> {
    let n = problem.n_components() * problem.grid().len();
    let u = noise(n, 1);
    let v = noise(n, 2);
    let alpha = 0.731_7;
    let ru = rhs_flat(problem, t, &u)?;
    let rv = rhs_flat(problem, t, &v)?;
    let au: Vec<f64> = u.iter().map(|x| alpha * x).collect();
    let rau = rhs_flat(problem, t, &au)?;
    let scaled: Vec<f64> = ru.iter().map(|x| alpha * x).collect();
    let sum: Vec<f64> = u.iter().zip(&v).map(|(a, b)| a + b).collect();
    let rsum = rhs_flat(problem, t, &sum)?;
    let added: Vec<f64> = ru.iter().zip(&rv).map(|(a, b)| a + b).collect();
    Ok(rel_defect(&rau, &scaled).max(rel_defect(&rsum, &added)))
}

/// Builds `A` column by column from the production RHS with `g ≡ 0`.
pub fn assemble_operator(problem: &Problem, t: f64) -> Result<DenseOperator> {
    let hp = problem.homogeneous();
    let defect = check_linearity(&hp, t)?;
    if defect > 1e-10 {
        return Err(Error::NonLinear(defect));
    }
    let n = hp.n_components() * hp.grid().len();
    let cols = parallel::map_indices(n, |j| {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        rhs_flat(&hp, t, &e)
    });
    let mut data = Vec::with_capacity(n * n);
    for c in cols {
        data.extend(c?);
    }
    Ok(DenseOperator {
        n,
        data,
        components: hp.component_names(),
        grid_len: hp.grid().len(),
    })
}

/// All eigenvalues of `A`.
pub fn spectrum(op: &DenseOperator) -> Result<Vec<Complex64>> {
    let ev = op
        .to_faer()
        .eigenvalues()
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    Ok(ev.iter().map(|z| Complex64::new(z.re, z.im)).collect())
}

/// Eigenvalues plus the worst relative residual `‖Av - λv‖ / ‖v‖` over
/// `checks` eigenpairs spread through the spectrum.
pub fn spectrum_checked(op: &DenseOperator, checks: usize) -> Result<(Vec<Complex64>, f64)> {
    let evd = op
        .to_faer()
        .eigen()
        .map_err(|e| Error::Eigen(format!("{e:?}")))?;
    let (u, s) = (evd.U(), evd.S());
    let n = op.size();
    let eigs: Vec<Complex64> = (0..n).map(|i| Complex64::new(s[i].re, s[i].im)).collect();
    let picks = noise(checks, 7);
    let mut worst = 0.0f64;
    for p in picks {
        let k = (((p + 1.0) * 0.5 * n as f64) as usize).min(n - 1);
        let v: Vec<Complex64> = (0..n)
            .map(|i| Complex64::new(u[(i, k)].re, u[(i, k)].im))
            .collect();
        let av = op.apply_complex(&v);
        let num: f64 = av
            .iter()
            .zip(&v)
            .map(|(a, b)| (a - eigs[k] * b).norm_sqr())
            .sum::<f64>()
            .sqrt();
        let den: f64 = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        worst = worst.max(num / den);
    }
    Ok((eigs, worst))
}

#[derive(Clone, Debug, PartialEq)]
pub struct ContainmentReport {
    pub dt: f64,
    pub slack: f64,
    /// Eigenvalue with the largest amplification.
    pub worst: Complex64,
    pub worst_amplification: f64,
    /// Eigenvalues with amplification above `1 + slack`.
    pub outside: Vec<Complex64>,
}

impl ContainmentReport {
    pub fn contained(&self) -> bool {
        self.outside.is_empty()
    }

    pub fn summary(&self) -> String {
        format!(
            "dt={:.6e} slack={:.1e} worst_lambda={:.6e}{:+.6e}i amplification={:.12} outside={}",
            self.dt,
            self.slack,
            self.worst.re,
            self.worst.im,
            self.worst_amplification,
            self.outside.len()
        )
    }
}

/// Flags every `λ` with `|R(λΔt)|² > 1 + slack`.
pub fn check_rk4_containment(eigs: &[Complex64], dt: f64, slack: f64) -> ContainmentReport {
    let mut worst = Complex64::new(0.0, 0.0);
    let mut worst_amp = f64::NEG_INFINITY;
    let mut outside = Vec::new();
    for &l in eigs {
        let a = rk4_amplification(l * dt);
        if a > worst_amp {
            worst_amp = a;
            worst = l;
        }
        if a > 1.0 + slack {
            outside.push(l);
        }
    }
    ContainmentReport {
        dt,
        slack,
        worst,
        worst_amplification: worst_amp,
        outside,
    }
}

pub fn write_eigs_csv<P: AsRef<Path>>(eigs: &[Complex64], path: P) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["re", "im"])?;
    for z in eigs {
        w.write_record([format!("{:.17e}", z.re), format!("{:.17e}", z.im)])?;
    }
    w.flush()?;
    Ok(())
}
