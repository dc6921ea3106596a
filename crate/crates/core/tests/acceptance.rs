//! End-to-end acceptance checks, one line per criterion.

#![allow(clippy::needless_range_loop)]

use std::time::Instant;

use fpk_chaos::config::{FunctionalKind, ModelKind, RunConfig};
use fpk_chaos::exec::Execution;
use fpk_chaos::hermite::gauss_hermite;
use fpk_chaos::reference::compare;
use fpk_chaos::runner::{self, mc_surface, reference_surface, spectral_surface};
use fpk_chaos::validation::{self, SuiteResult};

type Criterion = (&'static str, fn() -> Outcome);

struct Outcome {
    passed: bool,
    detail: String,
}

fn from_suites(suites: &[SuiteResult]) -> Outcome {
    Outcome {
        passed: suites.iter().all(|s| s.passed),
        detail: suites
            .iter()
            .map(|s| format!("[{}] {}", s.name, s.detail))
            .collect::<Vec<_>>()
            .join(" "),
    }
}

fn heat_config(n: u32) -> RunConfig {
    let mut c = RunConfig::for_model(ModelKind::Heat);
    c.degree = n;
    c.modes = 8;
    c
}

fn relative_l2(c: &RunConfig) -> (f64, String) {
    let s = spectral_surface(c, Execution::default()).expect("spectral run");
    let r = reference_surface(c).expect("reference run");
    let report = compare(&s, &r).expect("comparison");
    let size = s.meta.get("reduced_size").unwrap_or("?").to_string();
    (report.l2, size)
}

fn criterion_1() -> Outcome {
    from_suites(&[validation::hermite_suite(&gauss_hermite(64).unwrap())])
}

fn criterion_2() -> Outcome {
    from_suites(&[validation::ou_identity_suite()])
}

fn criterion_3() -> Outcome {
    from_suites(&[validation::green_identity_suite()])
}

fn criterion_4() -> Outcome {
    from_suites(&[validation::kernel_suite()])
}

fn criterion_5() -> Outcome {
    from_suites(&[validation::heat_equivalence_suite()])
}

fn criterion_6() -> Outcome {
    from_suites(&[validation::solver_agreement_suite()])
}

fn criterion_7() -> Outcome {
    let start = Instant::now();
    let (e8, d8) = relative_l2(&heat_config(8));
    let (e4, d4) = relative_l2(&heat_config(4));
    let secs = start.elapsed().as_secs_f64();
    Outcome {
        passed: e8 <= 5e-2 && e8 <= e4 * (1.0 + 1e-10) && secs <= 120.0,
        detail: format!(
            "l2(N=8)={e8:.4e} (dim {d8}) l2(N=4)={e4:.4e} (dim {d4}) runtime={secs:.1}s"
        ),
    }
}

fn criterion_8() -> Outcome {
    let mut passed = true;
    let mut detail = Vec::new();
    for model in [ModelKind::Fisher, ModelKind::Burgers] {
        let mut c = RunConfig::for_model(model);
        c.degree = 5;
        let (e5, d5) = relative_l2(&c);
        c.degree = 4;
        let (e4, d4) = relative_l2(&c);
        // Non-increase up to round-off: equal reduced systems differ only in quadrature order.
        passed &= e5 <= 0.15 && e5 <= e4 * (1.0 + 1e-10);
        detail.push(format!(
            "{}: l2(N=5)={e5:.4e} (dim {d5}) l2(N=4)={e4:.4e} (dim {d4})",
            model.name()
        ));
    }
    let mut c = RunConfig::for_model(ModelKind::Burgers);
    c.nu = 0.01;
    c.degree = 5;
    match spectral_surface(&c, Execution::default()) {
        Ok(s) => {
            let finite = s.values.iter().flatten().all(|v| v.is_finite());
            let last = s.points.len() - 1;
            let boundary = s
                .values
                .iter()
                .map(|r| r[0].abs().max(r[last].abs()))
                .fold(0.0, f64::max);
            passed &= finite && boundary <= 1e-12;
            detail.push(format!(
                "burgers nu=0.01: finite={finite} boundary={boundary:.1e}"
            ));
        }
        Err(e) => {
            passed = false;
            detail.push(format!("burgers nu=0.01: {e}"));
        }
    }
    Outcome {
        passed,
        detail: detail.join("; "),
    }
}

fn criterion_9() -> Outcome {
    let mut c = heat_config(8);
    c.grid_points = 7;
    c.output_times = 4;
    c.paths = 10_000;
    c.dt = 1e-3;
    let s = spectral_surface(&c, Execution::default()).expect("spectral run");
    let m = mc_surface(&c, Execution::default()).expect("monte-carlo run");
    let se = m.std_errors.as_ref().expect("standard errors");
    let mut worst: f64 = 0.0;
    let mut checks = 0;
    for (ti, &t) in s.times.iter().enumerate() {
        if ![0.25, 0.5, 1.0].contains(&t) {
            continue;
        }
        for p in 1..=5 {
            let z = (s.values[ti][p] - m.values[ti][p]).abs() / se[ti][p];
            worst = worst.max(z);
            checks += 1;
        }
    }
    Outcome {
        passed: checks == 15 && worst <= 3.0,
        detail: format!("{checks} cells, max |spectral - mc|/se = {worst:.3}"),
    }
}

fn criterion_10() -> Outcome {
    from_suites(&[validation::ic_delta_suite()])
}

fn criterion_11() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let d = &dir;
    let mut files = Vec::new();
    for _ in 0..2 {
        let mut c = RunConfig::for_model(ModelKind::Burgers);
        c.degree = 4;
        c.grid_points = 11;
        c.output_times = 5;
        c.paths = 2000;
        c.output_dir = d.path().to_path_buf();
        let mut written = runner::run_spectral(&c).unwrap();
        written.extend(runner::run_reference(&c).unwrap());
        written.extend(runner::run_mc(&c).unwrap());
        let mut ci = c.clone();
        ci.model = ModelKind::Heat;
        ci.functional = FunctionalKind::Integral;
        ci.output_dir = d.path().join("integral");
        written.extend(runner::run_spectral(&ci).unwrap());
        let (_, metrics) = runner::run_compare(
            &d.path().join("spectral.csv"),
            &d.path().join("reference.csv"),
            d.path(),
        )
        .unwrap();
        written.push(metrics);
        let bytes: Vec<(std::path::PathBuf, Vec<u8>)> = written
            .into_iter()
            .map(|p| {
                let b = std::fs::read(&p).unwrap();
                (p, b)
            })
            .collect();
        files.push(bytes);
    }
    let identical = files[0] == files[1];
    Outcome {
        passed: identical,
        detail: format!("{} files compared byte for byte", files[0].len()),
    }
}

fn main() {
    // Passing `--list` (as `cargo test -- --list` does) only enumerates.
    if std::env::args().any(|a| a == "--list") {
        println!("acceptance: test");
        return;
    }
    let criteria: [Criterion; 11] = [
        ("hermite family", criterion_1),
        ("OU spectral identity", criterion_2),
        ("Green identity", criterion_3),
        ("covariance kernel", criterion_4),
        ("heat coefficient equivalence", criterion_5),
        ("eigen vs RK4 agreement", criterion_6),
        ("heat end-to-end", criterion_7),
        ("Fisher-KPP and Burgers end-to-end", criterion_8),
        ("Monte-Carlo cross-check", criterion_9),
        ("initial-condition delta structure", criterion_10),
        ("determinism", criterion_11),
    ];
    let mut failures = 0;
    for (i, (name, f)) in criteria.iter().enumerate() {
        let o = f();
        if !o.passed {
            failures += 1;
        }
        println!(
            "criterion {:>2} {} {name}: {}",
            i + 1,
            if o.passed { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!(
        "acceptance: {} passed, {failures} failed",
        criteria.len() - failures
    );
    if failures > 0 {
        std::process::exit(1);
    }
}
