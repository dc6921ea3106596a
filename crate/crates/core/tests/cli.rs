use std::path::Path;
use std::process::{Command, Output};

fn bin() -> Command {
    Command::new(env!("CARGO_BIN_EXE_fpk-chaos"))
}

fn write_config(dir: &Path, body: &str) -> std::path::PathBuf {
    let p = dir.join("run.cfg");
    std::fs::write(&p, body).unwrap();
    p
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().unwrap()
}

const SMALL: &str = "model = heat\nnu = 0.1\nN = 7\nM = 8\ngrid_points = 11\noutput_times = 5\nref_points = 80\nref_dt = 1e-3\npaths = 200\n";

#[test]
fn spectral_run_writes_surface_and_metadata() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let o = run(&[
        "run",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let text = std::fs::read_to_string(out.join("spectral.csv")).unwrap();
    let mut lines = text.lines();
    let header: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(header.len(), 11 + 1);
    assert_eq!(header[0], "t");
    assert_eq!(lines.count(), 6);
    let meta = std::fs::read_to_string(out.join("spectral.meta")).unwrap();
    assert!(meta.contains("ode = eigen"));
    assert!(meta.contains("N = 7"));
}

#[test]
fn config_errors_exit_with_code_two() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), "nu = 0\n");
    let o = run(&["run", "--config", cfg.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    let err = String::from_utf8_lossy(&o.stderr);
    assert_eq!(err.trim().lines().count(), 1);
    assert!(err.starts_with("error kind=config code=2 reason="), "{err}");

    let cfg = write_config(dir.path(), "paths = 0\n");
    assert_eq!(
        run(&["mc", "--config", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );

    let cfg = write_config(dir.path(), "N = three\n");
    assert_eq!(
        run(&["reference", "--config", cfg.to_str().unwrap()])
            .status
            .code(),
        Some(2)
    );
}

#[test]
fn missing_files_exit_with_code_four() {
    let o = run(&["run", "--config", "/nonexistent/run.cfg"]);
    assert_eq!(o.status.code(), Some(4));
    let o = run(&["compare", "/nonexistent/a.csv", "/nonexistent/b.csv"]);
    assert_eq!(o.status.code(), Some(4));
}

#[test]
fn all_runners_rerun_byte_identically_and_compare() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    let names = [
        "spectral.csv",
        "reference.csv",
        "mc.csv",
        "mc_stderr.csv",
        "metrics.txt",
    ];
    let mut snapshots = Vec::new();
    for _ in 0..2 {
        for cmd in ["run", "reference", "mc"] {
            let o = run(&[
                cmd,
                "--config",
                cfg.to_str().unwrap(),
                "--out",
                out.to_str().unwrap(),
            ]);
            assert!(
                o.status.success(),
                "{cmd}: {}",
                String::from_utf8_lossy(&o.stderr)
            );
        }
        let a = out.join("spectral.csv");
        let b = out.join("reference.csv");
        let o = run(&[
            "compare",
            a.to_str().unwrap(),
            b.to_str().unwrap(),
            "--out",
            out.to_str().unwrap(),
        ]);
        assert!(o.status.success());
        snapshots.push(
            names
                .iter()
                .map(|n| std::fs::read(out.join(n)).unwrap())
                .collect::<Vec<_>>(),
        );
    }
    assert_eq!(snapshots[0], snapshots[1]);

    let metrics = String::from_utf8(snapshots[0][4].clone()).unwrap();
    let l2: f64 = metrics
        .lines()
        .next()
        .unwrap()
        .strip_prefix("l2=")
        .unwrap()
        .parse()
        .unwrap();
    assert!(l2 < 5e-2, "{metrics}");
    assert_eq!(metrics.lines().filter(|l| l.starts_with("t=")).count(), 6);
    let headers: Vec<String> = snapshots[0][..3]
        .iter()
        .map(|b| {
            String::from_utf8_lossy(b)
                .lines()
                .next()
                .unwrap()
                .to_string()
        })
        .collect();
    assert!(headers.iter().all(|h| h == &headers[0]));
}

#[test]
fn comparing_a_file_with_itself_gives_zeros() {
    let dir = tempfile::tempdir().unwrap();
    let cfg = write_config(dir.path(), SMALL);
    let out = dir.path().join("out");
    assert!(run(&[
        "reference",
        "--config",
        cfg.to_str().unwrap(),
        "--out",
        out.to_str().unwrap()
    ])
    .status
    .success());
    let f = out.join("reference.csv");
    let o = run(&[
        "compare",
        f.to_str().unwrap(),
        f.to_str().unwrap(),
        "--out",
        out.to_str().unwrap(),
    ]);
    assert!(o.status.success());
    let metrics = std::fs::read_to_string(out.join("metrics.txt")).unwrap();
    assert!(metrics.starts_with("l2=0\nsup=0\n"), "{metrics}");
}

#[test]
fn validate_lists_every_suite() {
    let dir = tempfile::tempdir().unwrap();
    let o = run(&["validate", "--out", dir.path().to_str().unwrap()]);
    assert!(o.status.success(), "{}", String::from_utf8_lossy(&o.stderr));
    let report = std::fs::read_to_string(dir.path().join("validation.txt")).unwrap();
    for suite in [
        "hermite",
        "ou_identity",
        "green_identity",
        "kernel",
        "heat_equivalence",
        "triple_products",
        "solver_agreement",
        "ic_delta",
    ] {
        assert!(
            report
                .lines()
                .any(|l| l.starts_with("PASS ") && l.split(' ').nth(1) == Some(suite)),
            "{suite}\n{report}"
        );
    }
}
