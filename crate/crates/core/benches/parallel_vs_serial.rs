use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use fpk_chaos::drift::{
    assemble_expansion, DriftExpansion, DriftModel, Forcing, QuadraticTreatment,
};
use fpk_chaos::exec::Execution;
use fpk_chaos::hermite::gauss_hermite;
use fpk_chaos::mc::{simulate_mean, McConfig, McModel, Observation};
use fpk_chaos::multiindex::{enumerate_indices, Scheme};
use fpk_chaos::spectral_basis::{project_field, OperatorSpectrum};

const MODES: [(Execution, &str); 2] = [
    (Execution::Serial, "serial"),
    (Execution::Parallel, "parallel"),
];

fn coupling_assembly(c: &mut Criterion) {
    let spectrum = OperatorSpectrum::new(0.1, 6).unwrap();
    let base = project_field(|x| (std::f64::consts::PI * x).sin(), 6);
    let model = DriftModel::burgers(base).with_treatment(QuadraticTreatment::Substitute);
    let set = enumerate_indices(6, 4, Scheme::TotalDegree).unwrap();
    let rule = gauss_hermite(12).unwrap();
    let exp = DriftExpansion::new(&model, &spectrum, 6).unwrap();
    let mut group = c.benchmark_group("coupling_assembly");
    group.sample_size(10);
    for (exec, name) in MODES {
        group.bench_with_input(BenchmarkId::new(name, set.len()), &exec, |b, &exec| {
            b.iter(|| black_box(assemble_expansion(&exp, &set, &rule, exec).unwrap()))
        });
    }
    group.finish();
}

fn monte_carlo(c: &mut Criterion) {
    let mut group = c.benchmark_group("monte_carlo_heat");
    group.sample_size(10);
    let grid: Vec<f64> = (0..=10).map(|i| i as f64 / 10.0).collect();
    for (exec, name) in MODES {
        let config = McConfig {
            modes: 8,
            dt: 1e-3,
            paths: 4096,
            seed: 7,
            model: McModel::Heat(Forcing::Cubic),
            nu: 0.1,
            initial: project_field(|x| (std::f64::consts::PI * x).sin(), 8),
            noise: true,
            execution: exec,
        };
        let obs = Observation::Points(grid.clone());
        group.bench_with_input(BenchmarkId::new(name, config.paths), &config, |b, cfg| {
            b.iter(|| black_box(simulate_mean(cfg, &obs, &[0.0, 0.25]).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, coupling_assembly, monte_carlo);
criterion_main!(benches);
