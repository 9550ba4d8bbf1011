use std::f64::consts::PI;

use fourier_penalty::geometry::{
    build_ray_table, make_shape, mask_chi_h, project_within, NewtonOptions, ShapeSpec,
};
use fourier_penalty::Grid;
use proptest::prelude::*;

/// Shape, grid and decay length.
fn shapes() -> Vec<(ShapeSpec, Grid, f64)> {
    vec![
        (
            ShapeSpec::CircleHole {
                center: [PI, PI],
                a: 2.0,
            },
            Grid::cube(2, 48, 2.0 * PI).unwrap(),
            0.5,
        ),
        (
            ShapeSpec::CircularCavity {
                center: [0.0, 0.0],
                radius: 1.0,
            },
            Grid::new(2, 48, 3.0, &[-1.5, -1.5]).unwrap(),
            0.45,
        ),
        (
            ShapeSpec::SphereHole {
                center: [PI, PI, PI],
                a: 2.0,
            },
            Grid::cube(3, 24, 2.0 * PI).unwrap(),
            0.5,
        ),
        (
            ShapeSpec::Trifolium { a: 3.0, b: 1.0 },
            Grid::new(2, 128, 3.0 * PI, &[-1.5 * PI, -1.5 * PI]).unwrap(),
            0.3,
        ),
    ]
}

#[test]
fn rays_reconstruct_grid_points() {
    let tol = NewtonOptions::default().tol;
    for (spec, grid, l) in shapes() {
        let geom = make_shape(spec.clone()).unwrap();
        let table = build_ray_table(geom.as_ref(), &grid, 2.0 * grid.dx(), l).unwrap();
        assert!(!table.is_empty());
        for r in table.rays() {
            let err: f64 = (0..3)
                .map(|a| (r.x[a] - (r.y[a] + r.s * r.n[a])).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(err <= 10.0 * tol.max(1e-13), "{spec:?}: {err}");
            assert!(r.s >= -l - 1e-12 && r.s <= 2.0 * grid.dx() + 1e-12);
        }
    }
}

#[test]
fn signed_distance_shapes_agree_with_level_set() {
    let tol = NewtonOptions::default().tol;
    for (spec, grid, l) in shapes().into_iter().take(3) {
        let geom = make_shape(spec).unwrap();
        assert!(geom.is_signed_distance());
        let table = build_ray_table(geom.as_ref(), &grid, 2.0 * grid.dx(), l).unwrap();
        for r in table.rays() {
            assert!((r.s - geom.value(&r.x)).abs() <= 10.0 * tol);
        }
    }
}

#[test]
fn projection_is_idempotent() {
    let opts = NewtonOptions::default();
    for (spec, grid, l) in shapes() {
        let geom = make_shape(spec).unwrap();
        let table = build_ray_table(geom.as_ref(), &grid, 2.0 * grid.dx(), l).unwrap();
        for r in table.rays().iter().step_by(7) {
            let again = geom.project(&r.y, &opts).unwrap();
            let d: f64 = (0..3)
                .map(|a| (again.y[a] - r.y[a]).powi(2))
                .sum::<f64>()
                .sqrt();
            assert!(d <= 1e-10, "moved by {d}");
            assert!(again.s.abs() <= 1e-10);
        }
    }
}

/// Boundary of the trifolium sampled by its polar form `r⁴ - a sin3θ r³ - b = 0`.
fn trifolium_samples(a: f64, b: f64, count: usize) -> Vec<[f64; 2]> {
    (0..count)
        .map(|k| {
            let th = 2.0 * PI * k as f64 / count as f64;
            let c = a * (3.0 * th).sin();
            let f = |r: f64| r.powi(4) - c * r.powi(3) - b;
            let (mut lo, mut hi) = (0.0, 1.0 + c.abs() + b);
            for _ in 0..80 {
                let mid = 0.5 * (lo + hi);
                if f(mid) < 0.0 {
                    lo = mid;
                } else {
                    hi = mid;
                }
            }
            let r = 0.5 * (lo + hi);
            [r * th.cos(), r * th.sin()]
        })
        .collect()
}

#[test]
fn trifolium_projection_matches_dense_sampling() {
    let geom = make_shape(ShapeSpec::Trifolium { a: 3.0, b: 1.0 }).unwrap();
    assert!(!geom.is_signed_distance());
    let samples = trifolium_samples(3.0, 1.0, 100_000);
    let opts = NewtonOptions::default();
    let queries = [
        [0.0, -3.3, 0.0],
        [0.0, -2.8, 0.0],
        [0.0, -3.1, 0.0],
        [-2.356194490192345, 1.325359400733194, 0.0],
    ];
    for x in queries {
        let p = project_within(geom.as_ref(), &x, &opts, 1.0)
            .unwrap()
            .expect("boundary within reach");
        assert!(geom.value(&p.y).abs() < 1e-10);
        let g = geom.gradient(&p.y);
        let d = [x[0] - p.y[0], x[1] - p.y[1]];
        let dn = (d[0] * d[0] + d[1] * d[1]).sqrt();
        let gn = (g[0] * g[0] + g[1] * g[1]).sqrt();
        if dn > 1e-12 {
            assert!((d[0] * g[1] - d[1] * g[0]).abs() / (dn * gn) < 1e-8);
        }
        let dense = samples
            .iter()
            .map(|q| ((q[0] - x[0]).powi(2) + (q[1] - x[1]).powi(2)).sqrt())
            .fold(f64::INFINITY, f64::min);
        assert!(p.s.abs() <= dense + 1e-12, "{x:?}: {} vs {dense}", p.s);
        assert!(dense - p.s.abs() < 1e-5, "{x:?}: {} vs {dense}", p.s);
        assert_eq!(p.s < 0.0, geom.value(&x) < 0.0);
    }
}

#[test]
fn far_points_report_no_boundary() {
    let geom = make_shape(ShapeSpec::Trifolium { a: 3.0, b: 1.0 }).unwrap();
    let r = project_within(
        geom.as_ref(),
        &[0.0, -1.5, 0.0],
        &NewtonOptions::default(),
        0.05,
    )
    .unwrap();
    // Either the default start converges or nothing lies within the radius.
    if let Some(p) = r {
        assert!(geom.value(&p.y).abs() < 1e-10);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn mask_monotone_in_h(h1 in 0.01f64..0.5, dh in 0.0f64..0.5) {
        let grid = Grid::cube(2, 32, 2.0 * PI).unwrap();
        let geom = make_shape(ShapeSpec::CircleHole { center: [PI, PI], a: 2.0 }).unwrap();
        let a = mask_chi_h(geom.as_ref(), &grid, h1).unwrap();
        let b = mask_chi_h(geom.as_ref(), &grid, h1 + dh).unwrap();
        prop_assert!(a.iter().zip(&b).all(|(x, y)| x <= y));
    }

    #[test]
    fn circle_rays_land_on_circle(cx in 2.5f64..3.8, cy in 2.5f64..3.8, a in 1.0f64..2.0) {
        let grid = Grid::cube(2, 32, 2.0 * PI).unwrap();
        let geom = make_shape(ShapeSpec::CircleHole { center: [cx, cy], a }).unwrap();
        let table = build_ray_table(geom.as_ref(), &grid, 0.3, 0.5).unwrap();
        for r in table.rays() {
            let rho = ((r.y[0] - cx).powi(2) + (r.y[1] - cy).powi(2)).sqrt();
            prop_assert!((rho - a).abs() < 1e-10);
        }
    }
}
