//! Evaluation of the truncated chaos sum and assembly of output surfaces.

use crate::error::{Error, Result};
use crate::galerkin::ModeTrajectories;
use crate::hermite::hermite_eval;
use crate::multiindex::{IndexSet, MultiIndex};
use crate::spectral_basis::{OperatorSpectrum, SpectralField};

/// `H_n(x) = Π_i P_{n_i}(σ_i β_i)`.
pub fn hermite_functional_eval(
    n: &MultiIndex,
    field: &SpectralField,
    spectrum: &OperatorSpectrum,
) -> f64 {
    n.entries()
        .iter()
        .enumerate()
        .filter(|(_, &e)| e > 0)
        .map(|(i, &e)| hermite_eval(e as usize, spectrum.sigma()[i] * field.coefficient(i + 1)))
        .product()
}

/// `H_n(x)` for every index of the set.
pub fn hermite_functional_values(
    index_set: &IndexSet,
    field: &SpectralField,
    spectrum: &OperatorSpectrum,
) -> Vec<f64> {
    index_set
        .iter()
        .map(|n| hermite_functional_eval(n, field, spectrum))
        .collect()
}

/// `û(t, x) = Σ_n u_n(t) H_n(x)`, linear in time between samples.
pub fn evaluate_solution(
    traj: &ModeTrajectories,
    index_set: &IndexSet,
    field: &SpectralField,
    spectrum: &OperatorSpectrum,
    t: f64,
) -> Result<f64> {
    let u = traj.at(t)?;
    if u.len() != index_set.len() {
        return Err(Error::Shape(format!(
            "{} trajectories for {} indices",
            u.len(),
            index_set.len()
        )));
    }
    let h = hermite_functional_values(index_set, field, spectrum);
    Ok(u.iter().zip(&h).map(|(a, b)| a * b).sum())
}

/// Descriptive fields carried alongside a surface.
#[derive(Debug, Clone, PartialEq)]
pub struct SurfaceMeta {
    pub entries: Vec<(String, String)>,
}

impl SurfaceMeta {
    pub fn new() -> Self {
        SurfaceMeta {
            entries: Vec::new(),
        }
    }

    pub fn with(mut self, key: &str, value: impl ToString) -> Self {
        self.set(key, value);
        self
    }

    pub fn set(&mut self, key: &str, value: impl ToString) {
        let value = value.to_string();
        match self.entries.iter_mut().find(|(k, _)| k == key) {
            Some(e) => e.1 = value,
            None => self.entries.push((key.to_string(), value)),
        }
    }

    pub fn get(&self, key: &str) -> Option<&str> {
        self.entries
            .iter()
            .find(|(k, _)| k == key)
            .map(|(_, v)| v.as_str())
    }
}

impl Default for SurfaceMeta {
    fn default() -> Self {
        Self::new()
    }
}

/// Values on a time × space grid, `values[ti][pi]`.
#[derive(Debug, Clone, PartialEq)]
pub struct SolutionSurface {
    pub times: Vec<f64>,
    pub points: Vec<f64>,
    pub values: Vec<Vec<f64>>,
    /// Optional per-cell standard errors (Monte-Carlo surfaces).
    pub std_errors: Option<Vec<Vec<f64>>>,
    pub meta: SurfaceMeta,
}

impl SolutionSurface {
    pub fn new(
        times: Vec<f64>,
        points: Vec<f64>,
        values: Vec<Vec<f64>>,
        meta: SurfaceMeta,
    ) -> Result<Self> {
        let s = SolutionSurface {
            times,
            points,
            values,
            std_errors: None,
            meta,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.values.len() != self.times.len()
            || self.values.iter().any(|r| r.len() != self.points.len())
        {
            return Err(Error::Shape(format!(
                "surface values do not match {} times x {} points",
                self.times.len(),
                self.points.len()
            )));
        }
        if let Some(se) = &self.std_errors {
            if se.len() != self.times.len() || se.iter().any(|r| r.len() != self.points.len()) {
                return Err(Error::Shape(
                    "standard-error grid does not match the surface".into(),
                ));
            }
        }
        if self.values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Numerical(
                "surface contains non-finite values".into(),
            ));
        }
        Ok(())
    }

    /// Column of values at point index `p`.
    pub fn column(&self, p: usize) -> Vec<f64> {
        self.values.iter().map(|r| r[p]).collect()
    }
}

/// Where the spectral surface takes its values.
pub enum SurfaceInput<'a> {
    /// One trajectory set per grid point (point functional at that point).
    PerPoint(&'a [ModeTrajectories]),
    /// A single trajectory set for the integral functional.
    Integral(&'a ModeTrajectories),
}

/// Evaluates `û_N(t, X₀)` on `times` for each grid point (or once for the
/// integral functional, which yields a single column at abscissa 0.5).
pub fn build_surface(
    input: SurfaceInput<'_>,
    index_set: &IndexSet,
    grid: &[f64],
    times: &[f64],
    initial_field: &SpectralField,
    spectrum: &OperatorSpectrum,
    meta: SurfaceMeta,
) -> Result<SolutionSurface> {
    if grid.iter().any(|z| !(0.0..=1.0).contains(z)) {
        return Err(Error::Config("grid points must lie in [0, 1]".into()));
    }
    let h = hermite_functional_values(index_set, initial_field, spectrum);
    let eval = |traj: &ModeTrajectories, t: f64| -> Result<f64> {
        let u = traj.at(t)?;
        if u.len() != h.len() {
            return Err(Error::Shape(format!(
                "{} trajectories for {} indices",
                u.len(),
                h.len()
            )));
        }
        Ok(u.iter().zip(&h).map(|(a, b)| a * b).sum())
    };
    let (points, values) = match input {
        SurfaceInput::PerPoint(trajs) => {
            if trajs.len() != grid.len() {
                return Err(Error::Shape(format!(
                    "{} trajectory sets for {} grid points",
                    trajs.len(),
                    grid.len()
                )));
            }
            let values = times
                .iter()
                .map(|&t| {
                    trajs
                        .iter()
                        .map(|tr| eval(tr, t))
                        .collect::<Result<Vec<f64>>>()
                })
                .collect::<Result<Vec<_>>>()?;
            (grid.to_vec(), values)
        }
        SurfaceInput::Integral(traj) => {
            let values = times
                .iter()
                .map(|&t| eval(traj, t).map(|v| vec![v]))
                .collect::<Result<Vec<_>>>()?;
            (vec![0.5], values)
        }
    };
    SolutionSurface::new(times.to_vec(), points, values, meta)
}
