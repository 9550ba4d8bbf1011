use fourier_penalty_harness::cases::{pollution_grid, Observed};
use fourier_penalty_harness::{run_case, CaseId, CaseSpec, RunOptions};

fn small(case: CaseId) -> CaseSpec {
    let n = match case {
        CaseId::Gauss1d | CaseId::Pollution1d => 256,
        CaseId::Sphere3d | CaseId::GyroidDemo => 16,
        _ => 64,
    };
    CaseSpec {
        n,
        ..CaseSpec::defaults(case)
    }
}

#[test]
fn every_case_builds_with_consistent_state() {
    for case in CaseId::ALL {
        let spec = small(case);
        let setup = spec.build().unwrap_or_else(|e| panic!("{case}: {e}"));
        assert_eq!(setup.initial.len(), setup.problem.n_components(), "{case}");
        assert!(setup.initial.iter().all(|c| c.len() == setup.grid.len()));
        assert!(setup.measure.iter().any(|&m| m), "{case}: nothing measured");
        for i in 0..setup.grid.len() {
            if setup.measure[i] {
                assert_eq!(setup.problem.chi()[i], 0.0, "{case}");
            }
        }
        assert_eq!(setup.exact.is_some(), case.has_exact(), "{case}");
    }
}

#[test]
fn initial_state_matches_exact_solution() {
    for case in CaseId::ALL.into_iter().filter(|c| c.has_exact()) {
        let setup = small(case).build().unwrap();
        let exact = setup.exact.as_ref().unwrap();
        let mode = setup.problem.mode();
        for i in (0..setup.grid.len()).step_by(17) {
            let a = Observed::from_state(mode, &setup.initial, i);
            let b = exact(&setup.grid.coords(i), setup.run.t_start);
            for (x, y) in a.e.iter().chain(&a.h).zip(b.e.iter().chain(&b.h)) {
                assert!((x - y).abs() < 1e-12, "{case}");
            }
        }
    }
}

#[test]
fn paper_parameters_are_the_defaults() {
    let tm = CaseSpec::defaults(CaseId::TmCircle);
    assert_eq!(
        (tm.dt_coeff, tm.eta_dt, tm.h_dx, tm.l),
        (0.4, 4.0, 2.0, 1.0)
    );
    assert!((tm.t_final - 1.1 * std::f64::consts::PI).abs() < 1e-15);
    let sp = CaseSpec::defaults(CaseId::Sphere3d);
    assert_eq!(
        (sp.dt_coeff, sp.eta_dt, sp.h_dx, sp.l, sp.m),
        (0.4, 4.0, 2.0, 1.0, 0)
    );
    let g = CaseSpec::defaults(CaseId::Gauss1d);
    assert_eq!((g.dt_coeff, g.eta_dt, g.h_dx), (0.2, 5.0, 1.0));
    let dx = 16.0 / g.n as f64;
    assert!((g.eta_value().unwrap() - dx).abs() < 1e-15);
}

#[test]
fn pollution_grid_keeps_points_per_wavelength() {
    for w in [10.0, 20.0, 40.0] {
        let n = pollution_grid(20.0, w);
        let ppwl = 2.0 * std::f64::consts::PI / w / (16.0 / n as f64);
        assert!((20.0 - 1e-9..22.0).contains(&ppwl), "{w}: {ppwl}");
    }
}

#[test]
fn vector_modes_reject_higher_m() {
    let spec = CaseSpec {
        m: 1,
        ..small(CaseId::TeCircle)
    };
    assert!(spec.build().is_err());
}

#[test]
fn short_gauss1d_run_is_accurate_before_impact() {
    // The pulse has not reached the wall by t = 2; only RK4 error remains.
    let spec = CaseSpec {
        n: 512,
        t_final: 2.0,
        ..CaseSpec::defaults(CaseId::Gauss1d)
    };
    let out = run_case(&spec, RunOptions::default(), None).unwrap();
    assert!(out.errors.unwrap().max() < 2e-5, "{:?}", out.errors);
}
