use std::path::Path;
use std::process::Command;

fn fpenalty(args: &[&str], dir: &Path) -> std::process::Output {
    Command::new(env!("CARGO_BIN_EXE_fpenalty"))
        .args(args)
        .current_dir(dir)
        .output()
        .unwrap()
}

fn stdout(o: &std::process::Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

#[test]
fn list_cases_names_every_case() {
    let dir = tempfile::tempdir().unwrap();
    let o = fpenalty(&["list-cases"], dir.path());
    assert!(o.status.success());
    let text = stdout(&o);
    for name in [
        "gauss1d",
        "tm_circle",
        "te_circle",
        "cavity",
        "sphere3d",
        "gyroid_demo",
        "windmill_tm_pml",
    ] {
        assert!(text.contains(name), "{name} missing");
    }
}

#[test]
fn run_writes_diagnostics_field_and_errors() {
    let dir = tempfile::tempdir().unwrap();
    let out = dir.path().join("tm");
    let o = fpenalty(
        &[
            "run",
            "tm_circle",
            "--N",
            "32",
            "--T",
            "0.2",
            "--out",
            out.to_str().unwrap(),
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("Linf_E="));
    let mut rd = csv::Reader::from_path(out.join("errors.csv")).unwrap();
    assert_eq!(
        rd.headers().unwrap(),
        vec!["N", "Linf_E", "Linf_H", "rate_E", "rate_H"]
    );
    let row = rd.records().next().unwrap().unwrap();
    assert_eq!(&row[0], "32");
    assert!(row[1].parse::<f64>().unwrap() > 0.0);
    let diag = std::fs::read_to_string(out.join("diagnostics.csv")).unwrap();
    assert!(diag.starts_with("step,t,energy_physical,energy_total,max_div_masked"));
    let fields: Vec<_> = std::fs::read_dir(&out)
        .unwrap()
        .filter_map(|e| e.ok())
        .filter(|e| e.file_name().to_string_lossy().starts_with("field_"))
        .collect();
    assert_eq!(fields.len(), 1);
}

#[test]
fn config_file_with_flag_override() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = dir.path().join("case.toml");
    std::fs::write(&cfg, "case = \"gauss1d\"\nn = 512\nm = 0\nt_final = 0.5\n").unwrap();
    let o = fpenalty(
        &[
            "run",
            "--config",
            cfg.to_str().unwrap(),
            "--N",
            "256",
            "--out",
            "o",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = stdout(&o);
    assert!(text.contains("gauss1d N=256 m=0"), "{text}");
}

#[test]
fn bad_input_fails_cleanly() {
    let dir = tempfile::tempdir().unwrap();
    for args in [
        vec!["run", "no_such_case"],
        vec!["converge", "gauss1d", "--grids", "256,512"],
        vec!["run", "gauss1d", "--scheme", "fd3"],
        vec!["converge", "cylinder_scatter", "--grids", "32,64,128"],
    ] {
        let o = fpenalty(&args, dir.path());
        assert!(!o.status.success(), "{args:?} succeeded");
        assert!(
            String::from_utf8_lossy(&o.stderr).starts_with("error:"),
            "{args:?}"
        );
    }
    let cfg = dir.path().join("bad.toml");
    std::fs::write(&cfg, "case = \"gauss1d\"\ngrid = 3\n").unwrap();
    assert!(
        !fpenalty(&["run", "--config", cfg.to_str().unwrap()], dir.path())
            .status
            .success()
    );
}

#[test]
fn converge_and_stability_write_csv() {
    let dir = tempfile::tempdir().unwrap();
    let o = fpenalty(
        &[
            "converge",
            "gauss1d",
            "--grids",
            "128,256,512",
            "--m",
            "0",
            "--T",
            "8",
            "--out",
            "c",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("rate="));
    let rows = csv::Reader::from_path(dir.path().join("c/errors.csv"))
        .unwrap()
        .records()
        .count();
    assert_eq!(rows, 3);

    let o = fpenalty(
        &[
            "stability",
            "gauss1d",
            "--N",
            "64",
            "--m",
            "0",
            "--out",
            "s",
        ],
        dir.path(),
    );
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    assert!(stdout(&o).contains("amplification="));
    let eigs = csv::Reader::from_path(dir.path().join("s/eigs.csv"))
        .unwrap()
        .records()
        .count();
    assert_eq!(eigs, 128);
}
