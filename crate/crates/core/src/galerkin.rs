//! The truncated linear system `u̇ = G u` and its two solvers.

use faer::c64;

use crate::drift::CoefficientMatrix;
use crate::error::{Error, Result};
use crate::linalg::{self, Matrix};
use crate::multiindex::{ou_eigenvalue, IndexSet};
use crate::spectral_basis::OperatorSpectrum;

/// Eigenvector matrices with a larger 2-norm condition number are rejected.
pub const CONDITION_LIMIT: f64 = 1e12;

/// `G[m][n] = −λ_m δ_{mn} + C̄_{n,m}` over `index_set`.
#[derive(Debug, Clone)]
pub struct GalerkinSystem {
    pub matrix: Matrix,
    pub index_set: IndexSet,
    pub ou_eigenvalues: Vec<f64>,
}

impl GalerkinSystem {
    pub fn dim(&self) -> usize {
        self.matrix.rows()
    }
}

pub fn assemble_system(
    coefficients: &CoefficientMatrix,
    index_set: &IndexSet,
    spectrum: &OperatorSpectrum,
) -> Result<GalerkinSystem> {
    let dim = index_set.len();
    let c = &coefficients.values;
    if c.rows() != dim || c.cols() != dim || coefficients.index_set.len() != dim {
        return Err(Error::Shape(format!(
            "coefficient matrix is {}x{} but the index set has {dim} entries",
            c.rows(),
            c.cols()
        )));
    }
    if spectrum.modes() < index_set.modes() {
        return Err(Error::Shape(format!(
            "spectrum has {} modes, index set needs {}",
            spectrum.modes(),
            index_set.modes()
        )));
    }
    let lambdas: Vec<f64> = index_set
        .iter()
        .map(|m| ou_eigenvalue(m, spectrum.lambda_a()))
        .collect();
    let mut matrix = c.clone();
    for (i, lam) in lambdas.iter().enumerate() {
        matrix[(i, i)] -= lam;
    }
    Ok(GalerkinSystem {
        matrix,
        index_set: index_set.clone(),
        ou_eigenvalues: lambdas,
    })
}

/// One real fundamental solution of `u̇ = G u`.
#[derive(Debug, Clone)]
pub enum RealMode {
    /// `e^{ηt} v`.
    Real { rate: f64, v: Vec<f64> },
    /// `e^{γt}(a cos μt − b sin μt)` for the eigenpair `γ ± iμ` with vector `a + ib`.
    Cos {
        gamma: f64,
        mu: f64,
        a: Vec<f64>,
        b: Vec<f64>,
    },
    /// `e^{γt}(a sin μt + b cos μt)`.
    Sin {
        gamma: f64,
        mu: f64,
        a: Vec<f64>,
        b: Vec<f64>,
    },
}

impl RealMode {
    pub fn eval(&self, t: f64, out: &mut [f64]) {
        match self {
            RealMode::Real { rate, v } => {
                let e = (rate * t).exp();
                for (o, x) in out.iter_mut().zip(v) {
                    *o = e * x;
                }
            }
            RealMode::Cos { gamma, mu, a, b } => {
                let (e, c, s) = ((gamma * t).exp(), (mu * t).cos(), (mu * t).sin());
                for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
                    *o = e * (x * c - y * s);
                }
            }
            RealMode::Sin { gamma, mu, a, b } => {
                let (e, c, s) = ((gamma * t).exp(), (mu * t).cos(), (mu * t).sin());
                for ((o, x), y) in out.iter_mut().zip(a).zip(b) {
                    *o = e * (x * s + y * c);
                }
            }
        }
    }
}

/// Eigen-data of a Galerkin system plus its real fundamental matrix.
#[derive(Debug, Clone)]
pub struct EigenSolution {
    pub eigenvalues: Vec<c64>,
    pub eigenvectors: Vec<Vec<c64>>,
    pub real_form: Vec<RealMode>,
    /// 2-norm condition number of the fundamental matrix at `t = 0`.
    pub condition: f64,
}

impl EigenSolution {
    pub fn dim(&self) -> usize {
        self.real_form.len()
    }

    /// Fundamental matrix `Φ(t)`; column `i` is `real_form[i]` at `t`.
    pub fn fundamental_matrix(&self, t: f64) -> Matrix {
        let n = self.dim();
        let mut m = Matrix::zeros(n, n);
        let mut col = vec![0.0; n];
        for (j, mode) in self.real_form.iter().enumerate() {
            mode.eval(t, &mut col);
            for (i, v) in col.iter().enumerate() {
                m[(i, j)] = *v;
            }
        }
        m
    }

    /// Samples `u(t) = Φ(t) c`.
    pub fn trajectories(&self, constants: &[f64], times: &[f64]) -> Result<ModeTrajectories> {
        let n = self.dim();
        if constants.len() != n {
            return Err(Error::Shape(format!(
                "{} constants for a system of dimension {n}",
                constants.len()
            )));
        }
        let mut values = Matrix::zeros(times.len(), n);
        let mut col = vec![0.0; n];
        for (ti, &t) in times.iter().enumerate() {
            let row = values.row_mut(ti);
            for (mode, &c) in self.real_form.iter().zip(constants) {
                if c == 0.0 {
                    continue;
                }
                mode.eval(t, &mut col);
                for (r, v) in row.iter_mut().zip(&col) {
                    *r += c * v;
                }
            }
        }
        let traj = ModeTrajectories {
            times: times.to_vec(),
            values,
            source: TrajectorySource::Eigen,
        };
        traj.check_finite()?;
        Ok(traj)
    }
}

/// Outcome of [`eigen_decompose`].
#[derive(Debug, Clone)]
pub enum Decomposition {
    Usable(EigenSolution),
    /// The eigen route cannot be trusted; the reason is reported to callers.
    Unusable(String),
}

fn real_tolerance(z: c64, scale: f64) -> bool {
    z.im.abs() <= 1e-10 * scale.max(z.norm()).max(1.0)
}

/// Eigendecomposition with complex pairs mapped to real fundamental solutions.
pub fn eigen_decompose(system: &GalerkinSystem) -> Result<Decomposition> {
    let g = &system.matrix;
    let n = g.rows();
    if n == 0 {
        return Err(Error::Shape("empty Galerkin system".into()));
    }
    if !g.is_finite() {
        return Err(Error::Numerical(
            "Galerkin matrix has non-finite entries".into(),
        ));
    }
    let (vals, vecs) = linalg::eigen(g)?;
    let gnorm = g.frobenius_norm();
    let scale = gnorm.max(1.0);

    for (eta, v) in vals.iter().zip(&vecs) {
        let res: f64 = (0..n)
            .map(|i| {
                let gv: c64 = (0..n).map(|j| v[j] * g[(i, j)]).sum();
                (gv - *eta * v[i]).norm_sqr()
            })
            .sum::<f64>()
            .sqrt();
        if res > 1e-8 * gnorm.max(f64::MIN_POSITIVE) {
            return Ok(Decomposition::Unusable(format!(
                "eigenpair residual {res:e} exceeds tolerance"
            )));
        }
    }

    let mut used = vec![false; n];
    let mut real_form = Vec::with_capacity(n);
    for i in 0..n {
        if used[i] {
            continue;
        }
        let eta = vals[i];
        if real_tolerance(eta, scale) {
            used[i] = true;
            let v = &vecs[i];
            let pivot = v
                .iter()
                .copied()
                .max_by(|a, b| a.norm().total_cmp(&b.norm()))
                .unwrap_or(c64::new(1.0, 0.0));
            let phase = pivot / pivot.norm();
            let rotated: Vec<c64> = v.iter().map(|z| z / phase).collect();
            let imag = rotated.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
            if imag > 1e-8 {
                return Ok(Decomposition::Unusable(
                    "real eigenvalue with a non-real eigenvector".into(),
                ));
            }
            real_form.push(RealMode::Real {
                rate: eta.re,
                v: rotated.iter().map(|z| z.re).collect(),
            });
            continue;
        }
        // Complex: find the unused conjugate partner.
        let partner = (0..n).filter(|&j| j != i && !used[j]).min_by(|&a, &b| {
            (vals[a] - eta.conj())
                .norm()
                .total_cmp(&(vals[b] - eta.conj()).norm())
        });
        let j = match partner {
            Some(j) if (vals[j] - eta.conj()).norm() <= 1e-8 * scale => j,
            _ => {
                return Ok(Decomposition::Unusable(
                    "unmatched complex eigenvalue".into(),
                ))
            }
        };
        used[i] = true;
        used[j] = true;
        let (eta, v) = if eta.im > 0.0 {
            (eta, &vecs[i])
        } else {
            (vals[j], &vecs[j])
        };
        let a: Vec<f64> = v.iter().map(|z| z.re).collect();
        let b: Vec<f64> = v.iter().map(|z| z.im).collect();
        real_form.push(RealMode::Cos {
            gamma: eta.re,
            mu: eta.im,
            a: a.clone(),
            b: b.clone(),
        });
        real_form.push(RealMode::Sin {
            gamma: eta.re,
            mu: eta.im,
            a,
            b,
        });
    }

    let mut sol = EigenSolution {
        eigenvalues: vals,
        eigenvectors: vecs,
        real_form,
        condition: 0.0,
    };
    let cond = linalg::condition_number(&sol.fundamental_matrix(0.0))?;
    sol.condition = cond;
    if !(cond <= CONDITION_LIMIT) {
        return Ok(Decomposition::Unusable(format!(
            "eigenvector matrix condition number {cond:e} exceeds {CONDITION_LIMIT:e}"
        )));
    }
    Ok(Decomposition::Usable(sol))
}

#[derive(Debug, Clone, PartialEq)]
pub enum TrajectorySource {
    Eigen,
    Rk4,
    /// RK4 used because the eigen route was rejected.
    EigenFallback(String),
}

impl TrajectorySource {
    pub fn label(&self) -> &'static str {
        match self {
            TrajectorySource::Eigen => "eigen",
            TrajectorySource::Rk4 => "rk4",
            TrajectorySource::EigenFallback(_) => "eigen-fallback",
        }
    }
}

/// Sampled `u_n(t)`: `values[(ti, n)]`.
#[derive(Debug, Clone)]
pub struct ModeTrajectories {
    pub times: Vec<f64>,
    pub values: Matrix,
    pub source: TrajectorySource,
}

impl ModeTrajectories {
    fn check_finite(&self) -> Result<()> {
        if self.values.is_finite() {
            Ok(())
        } else {
            Err(Error::Numerical("non-finite mode trajectory".into()))
        }
    }

    /// Mode vector at `t`, linearly interpolated between samples.
    pub fn at(&self, t: f64) -> Result<Vec<f64>> {
        let (first, last) = match (self.times.first(), self.times.last()) {
            (Some(&a), Some(&b)) => (a, b),
            _ => return Err(Error::Shape("trajectory has no samples".into())),
        };
        if !(t >= first && t <= last) {
            return Err(Error::Config(format!(
                "time {t} outside the sampled range [{first}, {last}]"
            )));
        }
        let k = self.times.partition_point(|&s| s < t);
        if self.times[k] == t || k == 0 {
            return Ok(self.values.row(k).to_vec());
        }
        let (t0, t1) = (self.times[k - 1], self.times[k]);
        let w = (t - t0) / (t1 - t0);
        Ok(self
            .values
            .row(k - 1)
            .iter()
            .zip(self.values.row(k))
            .map(|(a, b)| (1.0 - w) * a + w * b)
            .collect())
    }
}

fn check_times(times: &[f64]) -> Result<()> {
    if times.first() != Some(&0.0) {
        return Err(Error::Config("output times must start at 0".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) || times.iter().any(|t| !t.is_finite()) {
        return Err(Error::Config(
            "output times must be finite and strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Classical RK4 with at most `dt` per step, sampled at `times`.
pub fn solve_rk4(
    system: &GalerkinSystem,
    u0: &[f64],
    times: &[f64],
    dt: f64,
) -> Result<ModeTrajectories> {
    let g = &system.matrix;
    let n = g.rows();
    if u0.len() != n {
        return Err(Error::Shape(format!(
            "initial vector has {} entries, system {n}",
            u0.len()
        )));
    }
    if !(dt > 0.0 && dt.is_finite()) {
        return Err(Error::Config(format!(
            "time step must be positive, got {dt}"
        )));
    }
    check_times(times)?;
    let mut values = Matrix::zeros(times.len(), n);
    values.row_mut(0).copy_from_slice(u0);
    let mut u = u0.to_vec();
    let axpy = |u: &[f64], k: &[f64], h: f64| -> Vec<f64> {
        u.iter().zip(k).map(|(a, b)| a + h * b).collect()
    };
    for ti in 1..times.len() {
        let span = times[ti] - times[ti - 1];
        let steps = (span / dt).ceil().max(1.0) as usize;
        let h = span / steps as f64;
        for _ in 0..steps {
            let k1 = g.mul_vec(&u);
            let k2 = g.mul_vec(&axpy(&u, &k1, 0.5 * h));
            let k3 = g.mul_vec(&axpy(&u, &k2, 0.5 * h));
            let k4 = g.mul_vec(&axpy(&u, &k3, h));
            for i in 0..n {
                u[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
            }
            if u.iter().any(|v| !v.is_finite()) {
                return Err(Error::Stability(format!(
                    "RK4 state became non-finite near t={}; reduce the step size below {h}",
                    times[ti]
                )));
            }
        }
        values.row_mut(ti).copy_from_slice(&u);
    }
    Ok(ModeTrajectories {
        times: times.to_vec(),
        values,
        source: TrajectorySource::Rk4,
    })
}

/// Step used when the eigen route is rejected.
pub fn fallback_step(system: &GalerkinSystem) -> f64 {
    let rho = system.matrix.inf_norm();
    if rho > 0.0 {
        (0.25 / rho).min(1e-3)
    } else {
        1e-3
    }
}

/// Eigen route with constants from `u(0) = u0`; RK4 (flagged) when the
/// eigen-data are unusable.
pub fn solve_eigen(system: &GalerkinSystem, u0: &[f64], times: &[f64]) -> Result<ModeTrajectories> {
    if u0.len() != system.dim() {
        return Err(Error::Shape(format!(
            "initial vector has {} entries, system {}",
            u0.len(),
            system.dim()
        )));
    }
    check_times(times)?;
    match eigen_decompose(system)? {
        Decomposition::Usable(eig) => {
            let (c, _) = crate::initial::fix_constants(&eig, u0)?;
            eig.trajectories(&c, times)
        }
        Decomposition::Unusable(reason) => {
            let mut t = solve_rk4(system, u0, times, fallback_step(system))?;
            t.source = TrajectorySource::EigenFallback(reason);
            Ok(t)
        }
    }
}
