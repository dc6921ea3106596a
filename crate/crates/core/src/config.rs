//! Flat `key = value` run configuration.

use std::f64::consts::PI;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use crate::drift::{Forcing, QuadraticTreatment};
use crate::error::{Error, Result};
use crate::hermite::MAX_QUADRATURE_ORDER;
use crate::multiindex::Scheme;
use crate::reference::FdScheme;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModelKind {
    Heat,
    Fisher,
    Burgers,
}

impl ModelKind {
    pub fn name(self) -> &'static str {
        match self {
            ModelKind::Heat => "heat",
            ModelKind::Fisher => "fisher",
            ModelKind::Burgers => "burgers",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "heat" => Some(ModelKind::Heat),
            "fisher" => Some(ModelKind::Fisher),
            "burgers" => Some(ModelKind::Burgers),
            _ => None,
        }
    }

    pub fn default_ic(self) -> InitialCondition {
        match self {
            ModelKind::Heat | ModelKind::Burgers => InitialCondition::HeatSine,
            ModelKind::Fisher => InitialCondition::FisherSech,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FunctionalKind {
    Point,
    Integral,
}

impl FunctionalKind {
    pub fn name(self) -> &'static str {
        match self {
            FunctionalKind::Point => "point",
            FunctionalKind::Integral => "integral",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "point" => Some(FunctionalKind::Point),
            "integral" => Some(FunctionalKind::Integral),
            _ => None,
        }
    }
}

/// Initial profile `X₀`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum InitialCondition {
    /// `sin(πξ)`
    HeatSine,
    /// `sech²(5(ξ − 0.5))`
    FisherSech,
    /// `sin(2πξ)`
    DoubleSine,
    /// `4ξ(1 − ξ)`
    Parabola,
}

impl InitialCondition {
    pub fn name(self) -> &'static str {
        match self {
            InitialCondition::HeatSine => "heat_sine",
            InitialCondition::FisherSech => "fisher_sech",
            InitialCondition::DoubleSine => "double_sine",
            InitialCondition::Parabola => "parabola",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "heat_sine" => Some(InitialCondition::HeatSine),
            "fisher_sech" => Some(InitialCondition::FisherSech),
            "double_sine" => Some(InitialCondition::DoubleSine),
            "parabola" => Some(InitialCondition::Parabola),
            _ => None,
        }
    }

    pub fn eval(self, xi: f64) -> f64 {
        match self {
            InitialCondition::HeatSine => (PI * xi).sin(),
            InitialCondition::FisherSech => 1.0 / (5.0 * (xi - 0.5)).cosh().powi(2),
            InitialCondition::DoubleSine => (2.0 * PI * xi).sin(),
            InitialCondition::Parabola => 4.0 * xi * (1.0 - xi),
        }
    }

    /// The profile with its boundary values replaced by zero, which is what
    /// a Dirichlet solver sees.
    pub fn eval_pinned(self, xi: f64) -> f64 {
        if xi <= 0.0 || xi >= 1.0 {
            0.0
        } else {
            self.eval(xi)
        }
    }
}

/// How the eigen constants are fixed.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstantsMode {
    /// Solve `Φ(0)c = u(0)` from the functional's delta structure.
    Direct,
    /// Least squares against sampled values of the functional.
    Collocation,
}

impl ConstantsMode {
    pub fn name(self) -> &'static str {
        match self {
            ConstantsMode::Direct => "direct",
            ConstantsMode::Collocation => "collocation",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "direct" => Some(ConstantsMode::Direct),
            "collocation" => Some(ConstantsMode::Collocation),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OdeSolver {
    Eigen,
    Rk4,
}

impl OdeSolver {
    pub fn name(self) -> &'static str {
        match self {
            OdeSolver::Eigen => "eigen",
            OdeSolver::Rk4 => "rk4",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "eigen" => Some(OdeSolver::Eigen),
            "rk4" => Some(OdeSolver::Rk4),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub model: ModelKind,
    pub nu: f64,
    pub degree: u32,
    pub modes: usize,
    pub scheme: Scheme,
    pub functional: FunctionalKind,
    pub grid_points: usize,
    pub t_final: f64,
    /// Number of output intervals; samples are taken at `output_times + 1` instants.
    pub output_times: usize,
    /// `None` selects `2(N + 2)`.
    pub quadrature_order: Option<usize>,
    pub ic: InitialCondition,
    pub forcing: Forcing,
    pub nonlinearity: QuadraticTreatment,
    pub constants: ConstantsMode,
    pub solver: OdeSolver,
    pub seed: u64,
    pub paths: usize,
    pub dt: f64,
    /// `None` uses `modes`.
    pub mc_modes: Option<usize>,
    pub ref_points: usize,
    pub ref_dt: f64,
    pub ref_scheme: FdScheme,
    pub output_dir: PathBuf,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig::for_model(ModelKind::Heat)
    }
}

const KEYS: &[&str] = &[
    "model",
    "nu",
    "N",
    "M",
    "scheme",
    "functional",
    "grid_points",
    "t_final",
    "output_times",
    "quadrature_order",
    "ic",
    "forcing",
    "nonlinearity",
    "constants",
    "solver",
    "seed",
    "paths",
    "dt",
    "mc_modes",
    "ref_points",
    "ref_dt",
    "ref_scheme",
    "output_dir",
];

impl RunConfig {
    pub fn for_model(model: ModelKind) -> Self {
        RunConfig {
            model,
            nu: 0.1,
            degree: if model == ModelKind::Heat { 8 } else { 5 },
            modes: 8,
            scheme: Scheme::TotalDegree,
            functional: FunctionalKind::Point,
            grid_points: 21,
            t_final: 1.0,
            output_times: 20,
            quadrature_order: None,
            ic: model.default_ic(),
            forcing: if model == ModelKind::Heat {
                Forcing::Cubic
            } else {
                Forcing::Zero
            },
            nonlinearity: QuadraticTreatment::default(),
            constants: ConstantsMode::Direct,
            solver: OdeSolver::Eigen,
            seed: 42,
            paths: 10_000,
            dt: 1e-3,
            mc_modes: None,
            ref_points: 200,
            ref_dt: 1e-4,
            ref_scheme: FdScheme::Imex,
            output_dir: PathBuf::from("out"),
        }
    }

    pub fn parse(text: &str) -> Result<Self> {
        let mut pairs: Vec<(usize, &str, &str)> = Vec::new();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| Error::Parse {
                line: i + 1,
                message: format!("expected `key = value`, found `{line}`"),
            })?;
            let (k, v) = (k.trim(), v.trim());
            if !KEYS.contains(&k) {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("unknown key `{k}`"),
                });
            }
            if pairs.iter().any(|(_, pk, _)| *pk == k) {
                return Err(Error::Parse {
                    line: i + 1,
                    message: format!("duplicate key `{k}`"),
                });
            }
            pairs.push((i + 1, k, v));
        }

        let model = match pairs.iter().find(|(_, k, _)| *k == "model") {
            Some(&(line, _, v)) => ModelKind::parse(v).ok_or_else(|| bad(line, "model", v))?,
            None => ModelKind::Heat,
        };
        let mut c = RunConfig::for_model(model);
        for &(line, k, v) in &pairs {
            let num = |_: ()| -> Result<f64> { v.parse::<f64>().map_err(|_| bad(line, k, v)) };
            let count =
                |_: ()| -> Result<usize> { v.parse::<usize>().map_err(|_| bad(line, k, v)) };
            match k {
                "model" => {}
                "nu" => c.nu = num(())?,
                "N" => c.degree = v.parse().map_err(|_| bad(line, k, v))?,
                "M" => c.modes = count(())?,
                "scheme" => c.scheme = Scheme::parse(v).ok_or_else(|| bad(line, k, v))?,
                "functional" => {
                    c.functional = FunctionalKind::parse(v).ok_or_else(|| bad(line, k, v))?
                }
                "grid_points" => c.grid_points = count(())?,
                "t_final" => c.t_final = num(())?,
                "output_times" => c.output_times = count(())?,
                "quadrature_order" => {
                    c.quadrature_order = if v == "auto" { None } else { Some(count(())?) };
                }
                "ic" => c.ic = InitialCondition::parse(v).ok_or_else(|| bad(line, k, v))?,
                "forcing" => c.forcing = Forcing::parse(v).ok_or_else(|| bad(line, k, v))?,
                "nonlinearity" => {
                    c.nonlinearity = QuadraticTreatment::parse(v).ok_or_else(|| bad(line, k, v))?
                }
                "constants" => {
                    c.constants = ConstantsMode::parse(v).ok_or_else(|| bad(line, k, v))?
                }
                "solver" => c.solver = OdeSolver::parse(v).ok_or_else(|| bad(line, k, v))?,
                "seed" => c.seed = v.parse().map_err(|_| bad(line, k, v))?,
                "paths" => c.paths = count(())?,
                "dt" => c.dt = num(())?,
                "mc_modes" => {
                    c.mc_modes = if v == "auto" { None } else { Some(count(())?) };
                }
                "ref_points" => c.ref_points = count(())?,
                "ref_dt" => c.ref_dt = num(())?,
                "ref_scheme" => c.ref_scheme = FdScheme::parse(v).ok_or_else(|| bad(line, k, v))?,
                "output_dir" => {
                    if v.is_empty() {
                        return Err(bad(line, k, v));
                    }
                    c.output_dir = PathBuf::from(v);
                }
                _ => unreachable!("key list checked above"),
            }
        }
        Ok(c)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&text)
    }

    /// Canonical text form; `parse(serialize(c)) == c`.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        let auto = |o: Option<usize>| o.map_or_else(|| "auto".to_string(), |v| v.to_string());
        let rows: Vec<(&str, String)> = vec![
            ("model", self.model.name().into()),
            ("nu", self.nu.to_string()),
            ("N", self.degree.to_string()),
            ("M", self.modes.to_string()),
            ("scheme", self.scheme.name().into()),
            ("functional", self.functional.name().into()),
            ("grid_points", self.grid_points.to_string()),
            ("t_final", self.t_final.to_string()),
            ("output_times", self.output_times.to_string()),
            ("quadrature_order", auto(self.quadrature_order)),
            ("ic", self.ic.name().into()),
            ("forcing", self.forcing.name().into()),
            ("nonlinearity", self.nonlinearity.name().into()),
            ("constants", self.constants.name().into()),
            ("solver", self.solver.name().into()),
            ("seed", self.seed.to_string()),
            ("paths", self.paths.to_string()),
            ("dt", self.dt.to_string()),
            ("mc_modes", auto(self.mc_modes)),
            ("ref_points", self.ref_points.to_string()),
            ("ref_dt", self.ref_dt.to_string()),
            ("ref_scheme", self.ref_scheme.name().into()),
            ("output_dir", self.output_dir.display().to_string()),
        ];
        for (k, v) in rows {
            let _ = writeln!(s, "{k} = {v}");
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        let fail = |m: String| Err(Error::Config(m));
        if !(self.nu > 0.0 && self.nu.is_finite()) {
            return fail(format!("nu must be positive, got {}", self.nu));
        }
        if !(self.t_final > 0.0 && self.t_final.is_finite()) {
            return fail(format!("t_final must be positive, got {}", self.t_final));
        }
        if self.degree < 1 {
            return fail("N must be at least 1".into());
        }
        if !(1..=64).contains(&self.modes) {
            return fail(format!("M must lie in 1..=64, got {}", self.modes));
        }
        for (name, v) in [
            ("grid_points", self.grid_points),
            ("output_times", self.output_times),
            ("paths", self.paths),
            ("ref_points", self.ref_points),
        ] {
            if v < 1 {
                return fail(format!("{name} must be at least 1"));
            }
        }
        if let Some(q) = self.quadrature_order {
            if q == 0 || q > MAX_QUADRATURE_ORDER {
                return fail(format!(
                    "quadrature_order must lie in 1..={MAX_QUADRATURE_ORDER}"
                ));
            }
        }
        if let Some(k) = self.mc_modes {
            if !(1..=64).contains(&k) {
                return fail(format!("mc_modes must lie in 1..=64, got {k}"));
            }
        }
        for (name, v) in [("dt", self.dt), ("ref_dt", self.ref_dt)] {
            if !(v > 0.0 && v.is_finite()) {
                return fail(format!("{name} must be positive, got {v}"));
            }
        }
        if self.model != ModelKind::Heat && self.forcing != Forcing::Zero {
            return fail("forcing applies to the heat model only".into());
        }
        Ok(())
    }

    /// Uniform evaluation points on `[0, 1]`; a single point sits at 0.5.
    pub fn grid(&self) -> Vec<f64> {
        if self.grid_points == 1 {
            return vec![0.5];
        }
        let n = (self.grid_points - 1) as f64;
        (0..self.grid_points).map(|i| i as f64 / n).collect()
    }

    /// `0, t_final/K, ..., t_final` with `K = output_times`.
    pub fn times(&self) -> Vec<f64> {
        let k = self.output_times as f64;
        (0..=self.output_times)
            .map(|i| self.t_final * i as f64 / k)
            .collect()
    }

    pub fn mc_mode_count(&self) -> usize {
        self.mc_modes.unwrap_or(self.modes)
    }
}

fn bad(line: usize, key: &str, value: &str) -> Error {
    Error::Parse {
        line,
        message: format!("invalid value `{value}` for `{key}`"),
    }
}
