//! Bessel functions of the first kind and circular-cavity TM modes.

/// `J_n(x)` for integer `n ≥ 0`, `x ≥ 0`.
///
/// Power series for small arguments, Miller's downward recurrence normalized
/// by `J_0 + 2 Σ J_{2k} = 1` otherwise.
pub fn bessel_j(n: usize, x: f64) -> f64 {
    let x = x.abs();
    if x == 0.0 {
        return if n == 0 { 1.0 } else { 0.0 };
    }
    if x < 2.0 {
        return series(n, x);
    }
    let top = n.max(x as usize);
    let mut m = top + 15 + (40.0 * top as f64).sqrt() as usize;
    m += m % 2;
    let (mut jp1, mut j) = (0.0f64, 1e-30f64);
    let mut norm = 0.0;
    let mut out = 0.0;
    for k in (1..=m).rev() {
        let jm1 = 2.0 * k as f64 / x * j - jp1;
        jp1 = j;
        j = jm1;
        if j.abs() > 1e250 {
            j *= 1e-250;
            jp1 *= 1e-250;
            norm *= 1e-250;
            out *= 1e-250;
        }
        // j now holds J_{k-1}
        if k - 1 == n {
            out = j;
        }
        if (k - 1) % 2 == 0 && k - 1 > 0 {
            norm += 2.0 * j;
        }
    }
    if n == 0 {
        out = j;
    }
    norm += j;
    out / norm
}

fn series(n: usize, x: f64) -> f64 {
    let h = 0.5 * x;
    let mut term = h.powi(n as i32) / (1..=n).map(|k| k as f64).product::<f64>();
    let mut sum = term;
    for k in 1..60 {
        term *= -h * h / (k as f64 * (k + n) as f64);
        sum += term;
        if term.abs() < 1e-18 * sum.abs() {
            break;
        }
    }
    sum
}

/// `j`-th positive root of `J_i`, bracketed on a 0.1 lattice and bisected.
pub fn bessel_root(i: usize, j: usize) -> f64 {
    assert!(j >= 1, "root index starts at 1");
    let mut count = 0;
    let mut a = 0.1;
    let mut fa = bessel_j(i, a);
    loop {
        let b = a + 0.1;
        let fb = bessel_j(i, b);
        if fa == 0.0 || fa * fb < 0.0 {
            count += 1;
            if count == j {
                if fa == 0.0 {
                    return a;
                }
                let (mut lo, mut hi, mut flo) = (a, b, fa);
                for _ in 0..200 {
                    let mid = 0.5 * (lo + hi);
                    let fm = bessel_j(i, mid);
                    if fm == 0.0 {
                        return mid;
                    }
                    if flo * fm < 0.0 {
                        hi = mid;
                    } else {
                        lo = mid;
                        flo = fm;
                    }
                    if hi - lo < 1e-15 * hi {
                        break;
                    }
                }
                return 0.5 * (lo + hi);
            }
        }
        a = b;
        fa = fb;
    }
}

/// Polar components `(H_ρ, H_φ, E_z)` of the unit-disc TM mode.
pub fn cavity_mode_exact(i: usize, alpha: f64, rho: f64, phi: f64, t: f64) -> (f64, f64, f64) {
    let z = alpha * rho;
    let ji = bessel_j(i, z);
    let fi = i as f64;
    let ratio = if rho < 1e-14 {
        if i == 1 {
            0.5
        } else {
            0.0
        }
    } else {
        fi * ji / z
    };
    let dj = if i == 0 {
        -bessel_j(1, z)
    } else {
        0.5 * (bessel_j(i - 1, z) - bessel_j(i + 1, z))
    };
    let st = (alpha * t).sin();
    (
        ratio * (fi * phi).sin() * st,
        dj * (fi * phi).cos() * st,
        ji * (fi * phi).cos() * (alpha * t).cos(),
    )
}

/// Cartesian `(H_x, H_y, E_z)` of the cavity mode at `(x, y)` relative to the center.
pub fn cavity_mode_cartesian(i: usize, alpha: f64, x: f64, y: f64, t: f64) -> (f64, f64, f64) {
    let rho = x.hypot(y);
    let phi = y.atan2(x);
    let (hr, hp, ez) = cavity_mode_exact(i, alpha, rho, phi, t);
    let (s, c) = phi.sin_cos();
    (hr * c - hp * s, hr * s + hp * c, ez)
}
