use std::f64::consts::PI;

use fourier_penalty::equations::{Mode, Problem};
use fourier_penalty::geometry::{build_ray_table, make_shape, ShapeSpec};
use fourier_penalty::penalty::{PenaltyConfig, PenaltyKind, PenaltyOperator};
use fourier_penalty::stability::{
    assemble_operator, check_rk4_containment, spectrum, spectrum_checked,
};
use fourier_penalty::{Complex64, Grid};

fn penalized_tm(n: usize, m: usize) -> Problem {
    let grid = Grid::cube(2, n, 2.0 * PI).unwrap();
    let geom = make_shape(ShapeSpec::CircleHole {
        center: [PI, PI],
        a: 2.0,
    })
    .unwrap();
    let h = grid.dx();
    let table = build_ray_table(geom.as_ref(), &grid, h, 1.0).unwrap();
    let cfg = PenaltyConfig {
        eta: 0.2,
        h,
        l: 1.0,
        m,
        c_f: Some(16.0),
    };
    let op = PenaltyOperator::new(&grid, cfg, table, PenaltyKind::Active, false).unwrap();
    Problem::new(Mode::Tm, &grid)
        .unwrap()
        .with_penalty(op)
        .unwrap()
}

#[test]
fn unpenalized_spectrum_is_imaginary() {
    for p in [
        Problem::new(Mode::OneD, &Grid::cube(1, 32, 2.0 * PI).unwrap()).unwrap(),
        Problem::new(Mode::Tm, &Grid::cube(2, 8, 2.0 * PI).unwrap()).unwrap(),
    ] {
        let eigs = spectrum(&assemble_operator(&p, 0.0).unwrap()).unwrap();
        let worst = eigs.iter().map(|z| z.re.abs()).fold(0.0, f64::max);
        assert!(worst < 1e-10, "{worst}");
        // 1D spectrum: ±ik for |k| < N/2, Nyquist dropped.
        if p.mode() == Mode::OneD {
            let top = eigs.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
            assert!((top - 15.0).abs() < 1e-10);
        }
    }
}

#[test]
fn spectrum_closed_under_conjugation() {
    let op = assemble_operator(&penalized_tm(12, 0), 0.0).unwrap();
    let (eigs, residual) = spectrum_checked(&op, 6).unwrap();
    let scale = eigs.iter().map(|z| z.norm()).fold(1.0, f64::max);
    assert!(residual < 1e-8 * scale, "{residual}");
    for z in &eigs {
        let nearest = eigs
            .iter()
            .map(|w| (w - z.conj()).norm())
            .fold(f64::INFINITY, f64::min);
        assert!(nearest < 1e-8 * scale, "{z}");
    }
}

#[test]
fn penalized_spectrum_is_dissipative_and_containment_monotone() {
    let eigs = spectrum(&assemble_operator(&penalized_tm(12, 0), 0.0).unwrap()).unwrap();
    assert!(eigs.iter().all(|z| z.re < 1e-9));
    assert!(eigs.iter().any(|z| z.re < -1.0));
    let dts: Vec<f64> = (1..100).map(|k| 0.01 * k as f64).collect();
    let contained: Vec<bool> = dts
        .iter()
        .map(|&dt| check_rk4_containment(&eigs, dt, 1e-12).contained())
        .collect();
    assert!(contained[0]);
    assert!(!contained[contained.len() - 1]);
    // Once a step fails, every larger step fails too.
    let first_fail = contained.iter().position(|c| !c).unwrap();
    assert!(contained[first_fail..].iter().all(|c| !c), "{contained:?}");
}

#[test]
fn containment_flags_unstable_eigenvalues() {
    let eigs = [
        Complex64::new(0.0, 2.0),
        Complex64::new(0.01, 0.0),
        Complex64::new(-1.0, 0.0),
    ];
    let r = check_rk4_containment(&eigs, 0.1, 1e-12);
    assert_eq!(r.outside, vec![Complex64::new(0.01, 0.0)]);
    assert!(!r.contained());
}
