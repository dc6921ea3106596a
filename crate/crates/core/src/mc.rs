//! Monte-Carlo estimate of `E[u₀(X_t)]` from a spectral-Galerkin SPDE
//! simulation with cylindrical noise.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::drift::{derivative_triple_product, triple_product, Forcing};
use crate::error::{Error, Result};
use crate::exec::{pairwise_sum, try_map_indexed, Execution};
use crate::field_solution::{SolutionSurface, SurfaceMeta};
use crate::hermite::LegendreRule;
use crate::initial::Functional;
use crate::spectral_basis::{basis_eval, OperatorSpectrum, SpectralField};

/// Paths simulated sequentially before their sums enter the reduction tree.
pub const BLOCK_PATHS: usize = 256;
/// Any coefficient above this magnitude aborts the run.
pub const BLOWUP_LIMIT: f64 = 1e6;

#[derive(Debug, Clone)]
pub enum McModel {
    Heat(Forcing),
    Fisher { linear: f64, quadratic: f64 },
    Burgers,
}

impl McModel {
    pub fn name(&self) -> &'static str {
        match self {
            McModel::Heat(_) => "heat",
            McModel::Fisher { .. } => "fisher",
            McModel::Burgers => "burgers",
        }
    }
}

#[derive(Debug, Clone)]
pub struct McConfig {
    pub modes: usize,
    pub dt: f64,
    pub paths: usize,
    pub seed: u64,
    pub model: McModel,
    pub nu: f64,
    pub initial: SpectralField,
    pub noise: bool,
    pub execution: Execution,
}

impl McConfig {
    pub fn validate(&self) -> Result<OperatorSpectrum> {
        let spectrum = OperatorSpectrum::new(self.nu, self.modes)?;
        if self.paths == 0 {
            return Err(Error::Config("Monte-Carlo needs at least one path".into()));
        }
        if !(self.dt > 0.0 && self.dt.is_finite()) {
            return Err(Error::Config(format!(
                "Monte-Carlo time step must be positive, got {}",
                self.dt
            )));
        }
        let stiff = self.dt * spectrum.lambda_a()[self.modes - 1];
        if stiff >= 2.0 {
            return Err(Error::Stability(format!(
                "dt*lambda_K = {stiff:.4} must stay below 2 for explicit stepping of {} modes",
                self.modes
            )));
        }
        Ok(spectrum)
    }
}

/// What is averaged: point values on a grid or the spatial integral.
#[derive(Debug, Clone, PartialEq)]
pub enum Observation {
    Points(Vec<f64>),
    Integral,
}

impl Observation {
    fn abscissae(&self) -> Vec<f64> {
        match self {
            Observation::Points(p) => p.clone(),
            Observation::Integral => vec![0.5],
        }
    }

    // weights[p][k] = u₀_p(e_{k+1}).
    fn weights(&self, modes: usize) -> Result<Vec<Vec<f64>>> {
        match self {
            Observation::Points(p) => p
                .iter()
                .map(|&z| {
                    Functional::point(z).map(|f| (1..=modes).map(|k| f.mode_weight(k)).collect())
                })
                .collect(),
            Observation::Integral => Ok(vec![(1..=modes)
                .map(|k| Functional::Integral.mode_weight(k))
                .collect()]),
        }
    }
}

// Nonlinear drift as a sparse list of (l, k, j, c): B_j += c·β_l·β_k.
struct Drift {
    linear: f64,
    quadratic: Vec<(usize, usize, usize, f64)>,
    forcing: Option<Vec<f64>>,
}

impl Drift {
    fn new(model: &McModel, modes: usize) -> Self {
        let collect = |scale: f64, f: fn(usize, usize, usize) -> f64| {
            let mut out = Vec::new();
            for l in 1..=modes {
                for k in 1..=modes {
                    for j in 1..=modes {
                        let c = f(l, k, j);
                        if c.abs() > 1e-14 {
                            out.push((l - 1, k - 1, j - 1, scale * c));
                        }
                    }
                }
            }
            out
        };
        match model {
            McModel::Heat(f) => Drift {
                linear: 0.0,
                quadratic: Vec::new(),
                forcing: Some(f.coefficients(modes, &LegendreRule::standard())),
            },
            McModel::Fisher { linear, quadratic } => Drift {
                linear: *linear,
                quadratic: collect(-quadratic, triple_product),
                forcing: None,
            },
            McModel::Burgers => Drift {
                linear: 0.0,
                quadratic: collect(0.5, derivative_triple_product),
                forcing: None,
            },
        }
    }

    fn eval(&self, beta: &[f64], out: &mut [f64]) {
        for (o, b) in out.iter_mut().zip(beta) {
            *o = self.linear * b;
        }
        for &(l, k, j, c) in &self.quadratic {
            out[j] += c * beta[l] * beta[k];
        }
    }
}

// Per-block running sums of the observable and its square, cell-major.
struct Sums {
    value: Vec<f64>,
    square: Vec<f64>,
}

fn simulate_path(
    config: &McConfig,
    spectrum: &OperatorSpectrum,
    drift: &Drift,
    weights: &[Vec<f64>],
    times: &[f64],
    path: usize,
    sums: &mut Sums,
) -> Result<()> {
    let k_modes = config.modes;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    rng.set_stream(path as u64);
    let lambda = spectrum.lambda_a();
    let mut beta: Vec<f64> = (1..=k_modes)
        .map(|k| config.initial.coefficient(k))
        .collect();
    let mut b = vec![0.0; k_modes];
    let np = weights.len();
    let mut record = |ti: usize, beta: &[f64]| {
        for (p, w) in weights.iter().enumerate() {
            let v: f64 = w.iter().zip(beta).map(|(a, c)| a * c).sum();
            sums.value[ti * np + p] += v;
            sums.square[ti * np + p] += v * v;
        }
    };
    record(0, &beta);
    for (ti, w) in times.windows(2).enumerate() {
        let span = w[1] - w[0];
        let steps = (span / config.dt).ceil().max(1.0) as usize;
        let h = span / steps as f64;
        for _ in 0..steps {
            match &drift.forcing {
                Some(f) => {
                    for k in 0..k_modes {
                        let decay = (-lambda[k] * h).exp();
                        let mut next = decay * beta[k] + f[k] * (1.0 - decay) / lambda[k];
                        if config.noise {
                            let z: f64 = StandardNormal.sample(&mut rng);
                            next += ((1.0 - decay * decay) / (2.0 * lambda[k])).sqrt() * z;
                        }
                        beta[k] = next;
                    }
                }
                None => {
                    drift.eval(&beta, &mut b);
                    let sq = h.sqrt();
                    for k in 0..k_modes {
                        let mut next = beta[k] + h * (b[k] - lambda[k] * beta[k]);
                        if config.noise {
                            let z: f64 = StandardNormal.sample(&mut rng);
                            next += sq * z;
                        }
                        beta[k] = next;
                    }
                }
            }
            if let Some((k, v)) = beta
                .iter()
                .enumerate()
                .find(|(_, v)| !(v.abs() <= BLOWUP_LIMIT))
            {
                return Err(Error::Stability(format!(
                    "path {path} blew up before t={}: |beta_{}| = {v:e}",
                    w[1],
                    k + 1
                )));
            }
        }
        record(ti + 1, &beta);
    }
    Ok(())
}

/// Empirical mean of the observation at each time with standard errors.
pub fn simulate_mean(
    config: &McConfig,
    observation: &Observation,
    times: &[f64],
) -> Result<SolutionSurface> {
    let spectrum = config.validate()?;
    if times.first() != Some(&0.0) || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config(
            "output times must start at 0 and increase strictly".into(),
        ));
    }
    let weights = observation.weights(config.modes)?;
    let drift = Drift::new(&config.model, config.modes);
    let cells = times.len() * weights.len();
    let blocks = config.paths.div_ceil(BLOCK_PATHS);
    let partial = try_map_indexed(config.execution, blocks, |blk| -> Result<Sums> {
        let mut sums = Sums {
            value: vec![0.0; cells],
            square: vec![0.0; cells],
        };
        let end = ((blk + 1) * BLOCK_PATHS).min(config.paths);
        for path in blk * BLOCK_PATHS..end {
            simulate_path(config, &spectrum, &drift, &weights, times, path, &mut sums)?;
        }
        Ok(sums)
    })?;

    let n = config.paths as f64;
    let np = weights.len();
    let mut values = vec![vec![0.0; np]; times.len()];
    let mut errors = vec![vec![0.0; np]; times.len()];
    let mut col = vec![0.0; blocks];
    for c in 0..cells {
        col.iter_mut()
            .zip(&partial)
            .for_each(|(d, s)| *d = s.value[c]);
        let sum = pairwise_sum(&col);
        col.iter_mut()
            .zip(&partial)
            .for_each(|(d, s)| *d = s.square[c]);
        let sq = pairwise_sum(&col);
        let mean = sum / n;
        let var = if config.paths > 1 {
            ((sq - sum * mean) / (n - 1.0)).max(0.0)
        } else {
            0.0
        };
        values[c / np][c % np] = mean;
        errors[c / np][c % np] = (var / n).sqrt();
    }
    let meta = SurfaceMeta::new()
        .with("solver", "monte-carlo")
        .with("model", config.model.name())
        .with("nu", config.nu)
        .with("mc_modes", config.modes)
        .with("mc_dt", config.dt)
        .with("paths", config.paths)
        .with("seed", config.seed)
        .with("noise", config.noise);
    let mut surface = SolutionSurface::new(times.to_vec(), observation.abscissae(), values, meta)?;
    surface.std_errors = Some(errors);
    surface.validate()?;
    Ok(surface)
}

/// `X(ξ)` reconstructed from the first `modes` coefficients.
pub fn field_value(beta: &[f64], xi: f64) -> f64 {
    beta.iter()
        .enumerate()
        .map(|(i, b)| b * basis_eval(i + 1, xi))
        .sum()
}
