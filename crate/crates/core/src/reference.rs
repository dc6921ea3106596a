//! Method-of-lines finite-difference solver for the deterministic mean-field
//! PDEs, and surface comparison.

use crate::drift::{DriftModel, Forcing};
use crate::error::{Error, Result};
use crate::field_solution::{SolutionSurface, SurfaceMeta};

/// Time integrator of the finite-difference solver.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum FdScheme {
    /// Crank–Nicolson diffusion with second-order Adams–Bashforth reaction.
    #[default]
    Imex,
    /// Classical RK4 on the full right-hand side (CFL-limited).
    ExplicitRk4,
}

impl FdScheme {
    pub fn name(self) -> &'static str {
        match self {
            FdScheme::Imex => "imex",
            FdScheme::ExplicitRk4 => "rk4",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "imex" | "cn" | "cnab2" => Some(FdScheme::Imex),
            "rk4" | "explicit" => Some(FdScheme::ExplicitRk4),
            _ => None,
        }
    }
}

/// Largest `ν·dt/h²` accepted on the explicit path.
pub const EXPLICIT_CFL_LIMIT: f64 = 0.25;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FDGrid {
    /// Interior point count.
    pub points: usize,
    pub dt: f64,
    pub scheme: FdScheme,
}

impl FDGrid {
    pub fn new(points: usize, dt: f64, scheme: FdScheme) -> Result<Self> {
        if points < 2 {
            return Err(Error::Config(
                "finite-difference grid needs at least 2 interior points".into(),
            ));
        }
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(Error::Config(format!(
                "finite-difference time step must be positive, got {dt}"
            )));
        }
        Ok(FDGrid { points, dt, scheme })
    }

    pub fn spacing(&self) -> f64 {
        1.0 / (self.points + 1) as f64
    }

    /// All nodes including both boundaries.
    pub fn nodes(&self) -> Vec<f64> {
        let h = self.spacing();
        (0..=self.points + 1).map(|i| i as f64 * h).collect()
    }
}

/// Right-hand side of the mean-field PDE besides `ν y''`.
#[derive(Debug, Clone)]
pub enum PdeModel {
    Heat(Forcing),
    Fisher { linear: f64, quadratic: f64 },
    Burgers,
}

impl From<&DriftModel> for PdeModel {
    fn from(m: &DriftModel) -> Self {
        match m {
            DriftModel::Heat { forcing } => PdeModel::Heat(forcing.clone()),
            DriftModel::Fisher {
                linear, quadratic, ..
            } => PdeModel::Fisher {
                linear: *linear,
                quadratic: *quadratic,
            },
            DriftModel::Burgers { .. } => PdeModel::Burgers,
        }
    }
}

impl PdeModel {
    pub fn name(&self) -> &'static str {
        match self {
            PdeModel::Heat(_) => "heat",
            PdeModel::Fisher { .. } => "fisher",
            PdeModel::Burgers => "burgers",
        }
    }

    // Reaction/advection term on the interior nodes; `y` holds interior values.
    fn reaction(&self, y: &[f64], xs: &[f64], h: f64, out: &mut [f64]) {
        match self {
            PdeModel::Heat(f) => {
                for (o, &x) in out.iter_mut().zip(xs) {
                    *o = f.eval(x);
                }
            }
            PdeModel::Fisher { linear, quadratic } => {
                for (o, &v) in out.iter_mut().zip(y) {
                    *o = linear * v - quadratic * v * v;
                }
            }
            PdeModel::Burgers => {
                let n = y.len();
                let flux = |i: isize| -> f64 {
                    if i < 0 || i as usize >= n {
                        0.0
                    } else {
                        0.5 * y[i as usize] * y[i as usize]
                    }
                };
                for (i, o) in out.iter_mut().enumerate() {
                    let i = i as isize;
                    *o = (flux(i + 1) - flux(i - 1)) / (2.0 * h);
                }
            }
        }
    }
}

// ν·(y_{i+1} − 2y_i + y_{i−1})/h² with zero boundary values.
fn laplacian(y: &[f64], nu: f64, h: f64, out: &mut [f64]) {
    let n = y.len();
    let c = nu / (h * h);
    for i in 0..n {
        let l = if i > 0 { y[i - 1] } else { 0.0 };
        let r = if i + 1 < n { y[i + 1] } else { 0.0 };
        out[i] = c * (l - 2.0 * y[i] + r);
    }
}

/// Solves the tridiagonal system with constant bands `(sub, diag, sup)`.
pub fn thomas_solve(sub: f64, diag: f64, sup: f64, rhs: &[f64]) -> Vec<f64> {
    let n = rhs.len();
    let mut c = vec![0.0; n];
    let mut d = vec![0.0; n];
    c[0] = sup / diag;
    d[0] = rhs[0] / diag;
    for i in 1..n {
        let m = diag - sub * c[i - 1];
        c[i] = sup / m;
        d[i] = (rhs[i] - sub * d[i - 1]) / m;
    }
    let mut x = vec![0.0; n];
    x[n - 1] = d[n - 1];
    for i in (0..n - 1).rev() {
        x[i] = d[i] - c[i] * x[i + 1];
    }
    x
}

/// Discrete steady state of the heat model: `−ν L y = f` on the interior.
pub fn heat_steady_state(f: &Forcing, nu: f64, points: usize) -> Vec<f64> {
    let h = 1.0 / (points + 1) as f64;
    let c = nu / (h * h);
    let rhs: Vec<f64> = (1..=points).map(|i| f.eval(i as f64 * h)).collect();
    thomas_solve(-c, 2.0 * c, -c, &rhs)
}

fn linear_interp(xs: &[f64], ys: &[f64], x: f64) -> f64 {
    let k = xs.partition_point(|&v| v < x);
    if k == 0 {
        return ys[0];
    }
    if k >= xs.len() {
        return ys[xs.len() - 1];
    }
    if xs[k] == x {
        return ys[k];
    }
    let w = (x - xs[k - 1]) / (xs[k] - xs[k - 1]);
    (1.0 - w) * ys[k - 1] + w * ys[k]
}

/// Solves `y_t = ν y'' + R(y)` with `y(0) = x0` and zero Dirichlet data.
///
/// Values are reported at `output_points` (linear interpolation between
/// nodes) or at every node, boundaries included, when `None`.
pub fn solve_deterministic(
    model: &PdeModel,
    nu: f64,
    x0: impl Fn(f64) -> f64,
    grid: &FDGrid,
    times: &[f64],
    output_points: Option<&[f64]>,
) -> Result<SolutionSurface> {
    if !(nu > 0.0 && nu.is_finite()) {
        return Err(Error::Config(format!("nu must be positive, got {nu}")));
    }
    if x0(0.0).abs() > 1e-12 || x0(1.0).abs() > 1e-12 {
        return Err(Error::Config(
            "initial condition must vanish at both boundaries".into(),
        ));
    }
    if times.first() != Some(&0.0) || times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Config(
            "output times must start at 0 and increase strictly".into(),
        ));
    }
    let h = grid.spacing();
    if grid.scheme == FdScheme::ExplicitRk4 && nu * grid.dt / (h * h) > EXPLICIT_CFL_LIMIT {
        return Err(Error::Stability(format!(
            "explicit CFL number {:.4} exceeds {EXPLICIT_CFL_LIMIT}; use the implicit scheme or a smaller step",
            nu * grid.dt / (h * h)
        )));
    }
    let nodes = grid.nodes();
    let xs = &nodes[1..=grid.points];
    let mut y: Vec<f64> = xs.iter().map(|&x| x0(x)).collect();
    let n = y.len();

    let mut snapshots = Vec::with_capacity(times.len());
    snapshots.push(y.clone());
    let mut r_prev: Option<(Vec<f64>, f64)> = None;
    let mut r = vec![0.0; n];
    let mut lap = vec![0.0; n];
    for w in times.windows(2) {
        let span = w[1] - w[0];
        let steps = (span / grid.dt).ceil().max(1.0) as usize;
        let k = span / steps as f64;
        for _ in 0..steps {
            match grid.scheme {
                FdScheme::Imex => {
                    model.reaction(&y, xs, h, &mut r);
                    // Variable-step AB2 extrapolation; forward Euler on the first step.
                    let extrap: Vec<f64> = match &r_prev {
                        Some((rp, kp)) => {
                            let om = k / kp;
                            r.iter()
                                .zip(rp)
                                .map(|(a, b)| (1.0 + 0.5 * om) * a - 0.5 * om * b)
                                .collect()
                        }
                        None => r.clone(),
                    };
                    laplacian(&y, nu, h, &mut lap);
                    let rhs: Vec<f64> = (0..n)
                        .map(|i| y[i] + 0.5 * k * lap[i] + k * extrap[i])
                        .collect();
                    let c = 0.5 * k * nu / (h * h);
                    y = thomas_solve(-c, 1.0 + 2.0 * c, -c, &rhs);
                    r_prev = Some((r.clone(), k));
                }
                FdScheme::ExplicitRk4 => {
                    let rhs = |v: &[f64]| -> Vec<f64> {
                        let mut a = vec![0.0; n];
                        let mut b = vec![0.0; n];
                        laplacian(v, nu, h, &mut a);
                        model.reaction(v, xs, h, &mut b);
                        a.iter().zip(&b).map(|(p, q)| p + q).collect()
                    };
                    let add = |v: &[f64], d: &[f64], s: f64| -> Vec<f64> {
                        v.iter().zip(d).map(|(p, q)| p + s * q).collect()
                    };
                    let k1 = rhs(&y);
                    let k2 = rhs(&add(&y, &k1, 0.5 * k));
                    let k3 = rhs(&add(&y, &k2, 0.5 * k));
                    let k4 = rhs(&add(&y, &k3, k));
                    for i in 0..n {
                        y[i] += k / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
                    }
                }
            }
            if y.iter().any(|v| !v.is_finite()) {
                return Err(Error::Stability(format!(
                    "finite-difference state became non-finite before t={}",
                    w[1]
                )));
            }
        }
        snapshots.push(y.clone());
    }

    let (points, values) = match output_points {
        None => {
            let values = snapshots
                .iter()
                .map(|s| {
                    let mut row = Vec::with_capacity(n + 2);
                    row.push(0.0);
                    row.extend_from_slice(s);
                    row.push(0.0);
                    row
                })
                .collect();
            (nodes.clone(), values)
        }
        Some(pts) => {
            if pts.iter().any(|p| !(0.0..=1.0).contains(p)) {
                return Err(Error::Config("output points must lie in [0, 1]".into()));
            }
            let values = snapshots
                .iter()
                .map(|s| {
                    let mut full = Vec::with_capacity(n + 2);
                    full.push(0.0);
                    full.extend_from_slice(s);
                    full.push(0.0);
                    pts.iter()
                        .map(|&p| linear_interp(&nodes, &full, p))
                        .collect()
                })
                .collect();
            (pts.to_vec(), values)
        }
    };
    let meta = SurfaceMeta::new()
        .with("solver", "reference")
        .with("model", model.name())
        .with("nu", nu)
        .with("fd_points", grid.points)
        .with("fd_dt", grid.dt)
        .with("fd_scheme", grid.scheme.name());
    SolutionSurface::new(times.to_vec(), points, values, meta)
}

/// Integral functional of a node-valued surface: trapezoid rule per time.
pub fn integrate_surface(surface: &SolutionSurface) -> Result<SolutionSurface> {
    let p = &surface.points;
    if p.len() < 2 {
        return Err(Error::Shape("need at least two points to integrate".into()));
    }
    let values = surface
        .values
        .iter()
        .map(|row| {
            let s: f64 = (1..p.len())
                .map(|i| 0.5 * (row[i] + row[i - 1]) * (p[i] - p[i - 1]))
                .sum();
            vec![s]
        })
        .collect();
    SolutionSurface::new(
        surface.times.clone(),
        vec![0.5],
        values,
        surface.meta.clone(),
    )
}

/// Discrepancy of a candidate surface against a reference surface.
#[derive(Debug, Clone, PartialEq)]
pub struct ErrorReport {
    /// `‖A − B‖ / ‖B‖` over every compared cell (absolute when `‖B‖ = 0`).
    pub l2: f64,
    pub sup: f64,
    /// `(t, relative L² at t)` for each compared time.
    pub per_time: Vec<(f64, f64)>,
}

fn interp_row(points: &[f64], row: &[f64], x: f64) -> Result<f64> {
    if points.len() == 1 {
        if (points[0] - x).abs() <= 1e-12 {
            return Ok(row[0]);
        }
        return Err(Error::Shape(
            "single-column surface cannot be interpolated to other points".into(),
        ));
    }
    if x < points[0] - 1e-12 || x > points[points.len() - 1] + 1e-12 {
        return Err(Error::Shape(format!(
            "point {x} outside the candidate grid"
        )));
    }
    Ok(linear_interp(points, row, x))
}

/// Compares `a` against reference `b` on `b`'s grid; `a` is interpolated
/// linearly in space and time. Times of `b` outside `a`'s range are skipped.
pub fn compare(a: &SolutionSurface, b: &SolutionSurface) -> Result<ErrorReport> {
    a.validate()?;
    b.validate()?;
    let (a0, a1) = (a.times[0], a.times[a.times.len() - 1]);
    let tol = 1e-12 * a1.abs().max(1.0);
    let shared: Vec<usize> = (0..b.times.len())
        .filter(|&i| b.times[i] >= a0 - tol && b.times[i] <= a1 + tol)
        .collect();
    if shared.is_empty() {
        return Err(Error::Shape("surfaces have disjoint time ranges".into()));
    }
    let mut num = 0.0;
    let mut den = 0.0;
    let mut sup: f64 = 0.0;
    let mut per_time = Vec::with_capacity(shared.len());
    for &bi in &shared {
        let t = b.times[bi].clamp(a0, a1);
        let k = a.times.partition_point(|&s| s < t).min(a.times.len() - 1);
        let arow: Vec<f64> = if a.times[k] == t || k == 0 {
            a.values[k].clone()
        } else {
            let w = (t - a.times[k - 1]) / (a.times[k] - a.times[k - 1]);
            a.values[k - 1]
                .iter()
                .zip(&a.values[k])
                .map(|(p, q)| (1.0 - w) * p + w * q)
                .collect()
        };
        let (mut n_t, mut d_t) = (0.0, 0.0);
        for (pi, &x) in b.points.iter().enumerate() {
            let av = interp_row(&a.points, &arow, x)?;
            let bv = b.values[bi][pi];
            let e = av - bv;
            n_t += e * e;
            d_t += bv * bv;
            sup = sup.max(e.abs());
        }
        num += n_t;
        den += d_t;
        let rel = if d_t > 0.0 {
            (n_t / d_t).sqrt()
        } else {
            n_t.sqrt()
        };
        per_time.push((b.times[bi], rel));
    }
    let l2 = if den > 0.0 {
        (num / den).sqrt()
    } else {
        num.sqrt()
    };
    Ok(ErrorReport { l2, sup, per_time })
}
