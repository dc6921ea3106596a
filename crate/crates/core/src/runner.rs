//! Experiment orchestration and file outputs.

use std::fmt::Write as _;
use std::fs;
use std::path::{Path, PathBuf};

use crate::config::{ConstantsMode, FunctionalKind, ModelKind, OdeSolver, RunConfig};
use crate::drift::{assemble_expansion, coupling_closure, DriftExpansion, DriftModel};
use crate::error::{Error, Result};
use crate::exec::{try_map_indexed, Execution};
use crate::field_solution::{build_surface, SolutionSurface, SurfaceInput, SurfaceMeta};
use crate::galerkin::{
    assemble_system, eigen_decompose, fallback_step, solve_rk4, Decomposition, GalerkinSystem,
    ModeTrajectories, TrajectorySource,
};
use crate::hermite::{default_quadrature_order, gauss_hermite};
use crate::initial::{
    collocation_constants, fix_constants, functional_ic, gaussian_sample_fields, Functional,
};
use crate::mc::{simulate_mean, McConfig, McModel, Observation};
use crate::multiindex::{enumerate_indices, IndexSet};
use crate::reference::{
    compare, integrate_surface, solve_deterministic, ErrorReport, FDGrid, PdeModel,
};
use crate::spectral_basis::{project_field, OperatorSpectrum, SpectralField};
use crate::validation::{run_all_suites, SuiteResult};

/// Everything the spectral pipeline derives from a config before solving.
pub struct SpectralProblem {
    pub spectrum: OperatorSpectrum,
    pub initial_field: SpectralField,
    pub model: DriftModel,
    pub full_dimension: usize,
    /// Indices reachable from the first chaos under the drift coupling.
    pub index_set: IndexSet,
    pub system: GalerkinSystem,
    pub quadrature_order: usize,
}

pub fn drift_model(cfg: &RunConfig, base: &SpectralField) -> DriftModel {
    match cfg.model {
        ModelKind::Heat => DriftModel::Heat {
            forcing: cfg.forcing.clone(),
        },
        ModelKind::Fisher => DriftModel::fisher(base.clone()).with_treatment(cfg.nonlinearity),
        ModelKind::Burgers => DriftModel::burgers(base.clone()).with_treatment(cfg.nonlinearity),
    }
}

/// Builds the reduced Galerkin system for `cfg`.
pub fn prepare_spectral(cfg: &RunConfig, exec: Execution) -> Result<SpectralProblem> {
    cfg.validate()?;
    let spectrum = OperatorSpectrum::new(cfg.nu, cfg.modes)?;
    let ic = cfg.ic;
    let initial_field = project_field(|x| ic.eval(x), cfg.modes);
    let model = drift_model(cfg, &initial_field);
    let q = cfg
        .quadrature_order
        .unwrap_or_else(|| default_quadrature_order(cfg.degree));
    let rule = gauss_hermite(q)?;
    let full = enumerate_indices(cfg.modes, cfg.degree, cfg.scheme)?;
    let expansion = DriftExpansion::new(&model, &spectrum, cfg.modes)?;
    let seeds: Vec<usize> = (0..cfg.modes)
        .filter_map(|k| full.unit_position(k))
        .collect();
    let keep = coupling_closure(&expansion, &full, &seeds, &rule)?;
    let index_set = full.restrict(&keep);
    let coefficients = assemble_expansion(&expansion, &index_set, &rule, exec)?;
    let system = assemble_system(&coefficients, &index_set, &spectrum)?;
    Ok(SpectralProblem {
        spectrum,
        initial_field,
        model,
        full_dimension: full.len(),
        index_set,
        system,
        quadrature_order: q,
    })
}

fn functionals(cfg: &RunConfig) -> Result<Vec<Functional>> {
    match cfg.functional {
        FunctionalKind::Point => cfg.grid().into_iter().map(Functional::point).collect(),
        FunctionalKind::Integral => Ok(vec![Functional::Integral]),
    }
}

/// Solves the reduced system once per functional and evaluates `û(t, X₀)`.
pub fn spectral_surface(cfg: &RunConfig, exec: Execution) -> Result<SolutionSurface> {
    let p = prepare_spectral(cfg, exec)?;
    let times = cfg.times();
    let funcs = functionals(cfg)?;
    let u0s: Vec<Vec<f64>> = funcs
        .iter()
        .map(|&f| functional_ic(&p.index_set, f, &p.spectrum))
        .collect();

    let decomposition = match cfg.solver {
        OdeSolver::Eigen => Some(eigen_decompose(&p.system)?),
        OdeSolver::Rk4 => None,
    };
    if cfg.constants == ConstantsMode::Collocation
        && !matches!(decomposition, Some(Decomposition::Usable(_)))
    {
        return Err(Error::Config(
            "collocation constants need a usable eigen decomposition".into(),
        ));
    }
    let samples = match cfg.constants {
        ConstantsMode::Collocation => {
            gaussian_sample_fields(2 * p.system.dim(), &p.spectrum, cfg.seed)
        }
        ConstantsMode::Direct => Vec::new(),
    };
    let trajectories: Vec<ModeTrajectories> =
        try_map_indexed(exec, funcs.len(), |i| match &decomposition {
            Some(Decomposition::Usable(eig)) => {
                let c = match cfg.constants {
                    ConstantsMode::Direct => fix_constants(eig, &u0s[i])?.0,
                    ConstantsMode::Collocation => {
                        let targets: Vec<f64> = samples.iter().map(|s| funcs[i].apply(s)).collect();
                        collocation_constants(&p.index_set, eig, &samples, &targets, &p.spectrum)?
                    }
                };
                eig.trajectories(&c, &times)
            }
            Some(Decomposition::Unusable(reason)) => {
                let mut t = solve_rk4(&p.system, &u0s[i], &times, fallback_step(&p.system))?;
                t.source = TrajectorySource::EigenFallback(reason.clone());
                Ok(t)
            }
            None => solve_rk4(&p.system, &u0s[i], &times, fallback_step(&p.system)),
        })?;

    let source = trajectories
        .first()
        .map(|t| t.source.label())
        .unwrap_or("eigen");
    let mut meta = SurfaceMeta::new()
        .with("solver", "spectral")
        .with("ode", source)
        .with("model", cfg.model.name())
        .with("nu", cfg.nu)
        .with("N", cfg.degree)
        .with("M", cfg.modes)
        .with("scheme", cfg.scheme.name())
        .with("functional", cfg.functional.name())
        .with("ic", cfg.ic.name())
        .with("nonlinearity", cfg.nonlinearity.name())
        .with("constants", cfg.constants.name())
        .with("quadrature_order", p.quadrature_order)
        .with("index_set_size", p.full_dimension)
        .with("reduced_size", p.system.dim());
    if let Some(Decomposition::Unusable(reason)) = &decomposition {
        meta.set("fallback_reason", reason);
    }
    let input = match cfg.functional {
        FunctionalKind::Point => SurfaceInput::PerPoint(&trajectories),
        FunctionalKind::Integral => SurfaceInput::Integral(&trajectories[0]),
    };
    build_surface(
        input,
        &p.index_set,
        &cfg.grid(),
        &times,
        &p.initial_field,
        &p.spectrum,
        meta,
    )
}

/// Finite-difference surface on the same grid as the spectral output.
pub fn reference_surface(cfg: &RunConfig) -> Result<SolutionSurface> {
    cfg.validate()?;
    let model = match cfg.model {
        ModelKind::Heat => PdeModel::Heat(cfg.forcing.clone()),
        ModelKind::Fisher => PdeModel::Fisher {
            linear: 1.0,
            quadratic: 1.0,
        },
        ModelKind::Burgers => PdeModel::Burgers,
    };
    let grid = FDGrid::new(cfg.ref_points, cfg.ref_dt, cfg.ref_scheme)?;
    let ic = cfg.ic;
    let times = cfg.times();
    let mut surface = match cfg.functional {
        FunctionalKind::Point => {
            let pts = cfg.grid();
            solve_deterministic(
                &model,
                cfg.nu,
                |x| ic.eval_pinned(x),
                &grid,
                &times,
                Some(&pts),
            )?
        }
        FunctionalKind::Integral => {
            let nodes =
                solve_deterministic(&model, cfg.nu, |x| ic.eval_pinned(x), &grid, &times, None)?;
            integrate_surface(&nodes)?
        }
    };
    surface.meta.set("functional", cfg.functional.name());
    surface.meta.set("ic", cfg.ic.name());
    Ok(surface)
}

/// Monte-Carlo mean surface with standard errors.
pub fn mc_surface(cfg: &RunConfig, exec: Execution) -> Result<SolutionSurface> {
    cfg.validate()?;
    let k = cfg.mc_mode_count();
    let ic = cfg.ic;
    let model = match cfg.model {
        ModelKind::Heat => McModel::Heat(cfg.forcing.clone()),
        ModelKind::Fisher => McModel::Fisher {
            linear: 1.0,
            quadratic: 1.0,
        },
        ModelKind::Burgers => McModel::Burgers,
    };
    let mc = McConfig {
        modes: k,
        dt: cfg.dt,
        paths: cfg.paths,
        seed: cfg.seed,
        model,
        nu: cfg.nu,
        initial: project_field(|x| ic.eval(x), k),
        noise: true,
        execution: exec,
    };
    let observation = match cfg.functional {
        FunctionalKind::Point => Observation::Points(cfg.grid()),
        FunctionalKind::Integral => Observation::Integral,
    };
    let mut s = simulate_mean(&mc, &observation, &cfg.times())?;
    s.meta.set("functional", cfg.functional.name());
    s.meta.set("ic", cfg.ic.name());
    Ok(s)
}

/// `t,x_0,...,x_P` header followed by one row per time.
pub fn format_surface(values: &[Vec<f64>], surface: &SolutionSurface) -> String {
    let mut s = String::from("t");
    for p in &surface.points {
        let _ = write!(s, ",{p}");
    }
    s.push('\n');
    for (t, row) in surface.times.iter().zip(values) {
        let _ = write!(s, "{t}");
        for v in row {
            let _ = write!(s, ",{v}");
        }
        s.push('\n');
    }
    s
}

/// Parses a surface file written by [`write_surface`].
pub fn parse_surface(text: &str) -> Result<SolutionSurface> {
    let mut lines = text
        .lines()
        .enumerate()
        .filter(|(_, l)| !l.trim().is_empty());
    let (_, header) = lines.next().ok_or(Error::Parse {
        line: 1,
        message: "empty surface file".into(),
    })?;
    let mut cols = header.split(',');
    if cols.next().map(str::trim) != Some("t") {
        return Err(Error::Parse {
            line: 1,
            message: "header must start with `t`".into(),
        });
    }
    let num = |line: usize, s: &str| -> Result<f64> {
        s.trim().parse::<f64>().map_err(|_| Error::Parse {
            line,
            message: format!("not a number: `{s}`"),
        })
    };
    let points = cols.map(|c| num(1, c)).collect::<Result<Vec<f64>>>()?;
    let mut times = Vec::new();
    let mut values = Vec::new();
    for (i, line) in lines {
        let fields = line
            .split(',')
            .map(|c| num(i + 1, c))
            .collect::<Result<Vec<f64>>>()?;
        if fields.len() != points.len() + 1 {
            return Err(Error::Parse {
                line: i + 1,
                message: format!(
                    "expected {} columns, found {}",
                    points.len() + 1,
                    fields.len()
                ),
            });
        }
        times.push(fields[0]);
        values.push(fields[1..].to_vec());
    }
    SolutionSurface::new(times, points, values, SurfaceMeta::new())
}

pub fn read_surface(path: &Path) -> Result<SolutionSurface> {
    let text = fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_surface(&text)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path, e))
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

/// Writes `<stem>.csv`, `<stem>.meta` and, for Monte-Carlo surfaces,
/// `<stem>_stderr.csv`. Returns the written paths.
pub fn write_surface(
    dir: &Path,
    stem: &str,
    surface: &SolutionSurface,
    cfg: &RunConfig,
) -> Result<Vec<PathBuf>> {
    ensure_dir(dir)?;
    let mut written = Vec::new();
    let csv = dir.join(format!("{stem}.csv"));
    write_file(&csv, &format_surface(&surface.values, surface))?;
    written.push(csv);
    if let Some(se) = &surface.std_errors {
        let p = dir.join(format!("{stem}_stderr.csv"));
        write_file(&p, &format_surface(se, surface))?;
        written.push(p);
    }
    let mut meta = String::new();
    for (k, v) in &surface.meta.entries {
        let _ = writeln!(meta, "{k} = {v}");
    }
    meta.push_str("\n# configuration\n");
    meta.push_str(&cfg.serialize());
    let p = dir.join(format!("{stem}.meta"));
    write_file(&p, &meta)?;
    written.push(p);
    Ok(written)
}

pub fn run_spectral(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let s = spectral_surface(cfg, Execution::default())?;
    write_surface(&cfg.output_dir, "spectral", &s, cfg)
}

pub fn run_reference(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let s = reference_surface(cfg)?;
    write_surface(&cfg.output_dir, "reference", &s, cfg)
}

pub fn run_mc(cfg: &RunConfig) -> Result<Vec<PathBuf>> {
    let s = mc_surface(cfg, Execution::default())?;
    write_surface(&cfg.output_dir, "mc", &s, cfg)
}

pub fn format_metrics(report: &ErrorReport) -> String {
    let mut s = format!("l2={}\nsup={}\n", report.l2, report.sup);
    for (t, e) in &report.per_time {
        let _ = writeln!(s, "t={t} l2={e}");
    }
    s
}

/// Compares surface file `a` against reference file `b` and writes `metrics.txt`.
pub fn run_compare(a: &Path, b: &Path, out_dir: &Path) -> Result<(ErrorReport, PathBuf)> {
    let sa = read_surface(a)?;
    let sb = read_surface(b)?;
    let report = compare(&sa, &sb)?;
    ensure_dir(out_dir)?;
    let path = out_dir.join("metrics.txt");
    write_file(&path, &format_metrics(&report))?;
    Ok((report, path))
}

pub fn format_report(results: &[SuiteResult]) -> String {
    let mut s = String::new();
    for r in results {
        let _ = writeln!(
            s,
            "{} {} {}",
            if r.passed { "PASS" } else { "FAIL" },
            r.name,
            r.detail
        );
    }
    s
}

/// Runs every invariant suite and writes `validation.txt`; failing suites
/// produce a numerical error after the report is written.
pub fn run_validate(out_dir: &Path) -> Result<(Vec<SuiteResult>, PathBuf)> {
    let results = run_all_suites();
    ensure_dir(out_dir)?;
    let path = out_dir.join("validation.txt");
    write_file(&path, &format_report(&results))?;
    let failed: Vec<&str> = results
        .iter()
        .filter(|r| !r.passed)
        .map(|r| r.name)
        .collect();
    if !failed.is_empty() {
        return Err(Error::Numerical(format!(
            "validation suites failed: {}",
            failed.join(", ")
        )));
    }
    Ok((results, path))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(model: ModelKind) -> RunConfig {
        let mut c = RunConfig::for_model(model);
        c.degree = 3;
        c.modes = 4;
        c.grid_points = 5;
        c.output_times = 4;
        c.ref_points = 60;
        c.ref_dt = 1e-3;
        c.paths = 64;
        c
    }

    #[test]
    fn surface_text_round_trips() {
        let s = SolutionSurface::new(
            vec![0.0, 0.1],
            vec![0.0, 0.5, 1.0],
            vec![vec![0.0, 1.0 / 3.0, 0.0], vec![0.0, 0.1 + 0.2, -1e-300]],
            SurfaceMeta::new(),
        )
        .unwrap();
        let text = format_surface(&s.values, &s);
        assert!(text.starts_with("t,0,0.5,1\n"));
        let back = parse_surface(&text).unwrap();
        assert_eq!(back.values, s.values);
        assert_eq!(back.points, s.points);
        assert!(matches!(
            parse_surface("t,0\n0,1,2\n"),
            Err(Error::Parse { line: 2, .. })
        ));
    }

    #[test]
    fn runners_share_the_grid() {
        for model in [ModelKind::Heat, ModelKind::Fisher, ModelKind::Burgers] {
            let c = small(model);
            let a = spectral_surface(&c, Execution::Serial).unwrap();
            let b = reference_surface(&c).unwrap();
            let m = match mc_surface(&c, Execution::Serial) {
                Ok(m) => m,
                // Additive noise can push Fisher paths into the x → −∞ branch.
                Err(Error::Stability(msg)) if model == ModelKind::Fisher => {
                    assert!(msg.contains("blew up"));
                    continue;
                }
                Err(e) => panic!("{model:?}: {e}"),
            };
            assert_eq!(a.points, b.points);
            assert_eq!(a.points, m.points);
            assert_eq!(a.times, b.times);
            assert_eq!(a.times, m.times);
        }
    }

    #[test]
    fn serial_and_parallel_agree_bitwise() {
        let c = small(ModelKind::Fisher);
        let a = spectral_surface(&c, Execution::Serial).unwrap();
        let b = spectral_surface(&c, Execution::Parallel).unwrap();
        assert_eq!(a.values, b.values);
    }

    #[test]
    fn collocation_matches_direct_constants() {
        let mut c = small(ModelKind::Heat);
        let direct = spectral_surface(&c, Execution::Serial).unwrap();
        c.constants = ConstantsMode::Collocation;
        let col = spectral_surface(&c, Execution::Serial).unwrap();
        for (r1, r2) in direct.values.iter().zip(&col.values) {
            for (a, b) in r1.iter().zip(r2) {
                assert!((a - b).abs() < 1e-8, "{a} vs {b}");
            }
        }
    }

    #[test]
    fn rk4_solver_option_matches_eigen() {
        let mut c = small(ModelKind::Burgers);
        let e = spectral_surface(&c, Execution::Serial).unwrap();
        c.solver = OdeSolver::Rk4;
        let r = spectral_surface(&c, Execution::Serial).unwrap();
        assert_eq!(r.meta.get("ode"), Some("rk4"));
        let worst = e
            .values
            .iter()
            .flatten()
            .zip(r.values.iter().flatten())
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(worst < 1e-6, "{worst}");
    }

    #[test]
    fn integral_functional_runs_everywhere() {
        let mut c = small(ModelKind::Heat);
        c.functional = FunctionalKind::Integral;
        let a = spectral_surface(&c, Execution::Serial).unwrap();
        let b = reference_surface(&c).unwrap();
        assert_eq!(a.points, vec![0.5]);
        assert_eq!(b.points, vec![0.5]);
        let r = compare(&a, &b).unwrap();
        assert!(r.l2 < 1e-2, "{}", r.l2);
    }
}
