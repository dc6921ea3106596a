//! Orthonormal probabilists' Hermite polynomials and Gauss–Hermite quadrature
//! against the standard Gaussian measure.

use crate::error::{Error, Result};
use crate::linalg;

/// Largest Gauss–Hermite order accepted by [`gauss_hermite`].
pub const MAX_QUADRATURE_ORDER: usize = 200;

/// `P_k(x)` via `√(k+1) P_{k+1} = x P_k − √k P_{k−1}`.
pub fn hermite_eval(k: usize, x: f64) -> f64 {
    let mut prev = 0.0;
    let mut cur = 1.0;
    for j in 0..k {
        let next = (x * cur - (j as f64).sqrt() * prev) / ((j + 1) as f64).sqrt();
        prev = cur;
        cur = next;
    }
    cur
}

/// `P_0(x), ..., P_kmax(x)` written into `out`.
pub fn hermite_values(kmax: usize, x: f64, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    if kmax == 0 {
        return;
    }
    out.push(x);
    for j in 1..kmax {
        let next = (x * out[j] - (j as f64).sqrt() * out[j - 1]) / ((j + 1) as f64).sqrt();
        out.push(next);
    }
}

/// `P_k'(x) = √k P_{k−1}(x)`.
pub fn hermite_derivative(k: usize, x: f64) -> f64 {
    if k == 0 {
        0.0
    } else {
        (k as f64).sqrt() * hermite_eval(k - 1, x)
    }
}

/// Gauss rule for the standard normal distribution.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

impl QuadratureRule {
    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn order(&self) -> usize {
        self.nodes.len()
    }

    /// Highest polynomial degree integrated exactly.
    pub fn exact_degree(&self) -> usize {
        2 * self.order() - 1
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }

    /// Copy with one weight scaled; used as a negative control in validation.
    pub fn with_perturbed_weight(&self, i: usize, factor: f64) -> QuadratureRule {
        let mut r = self.clone();
        r.weights[i] *= factor;
        r
    }

    fn check_degree(&self, degree: usize) -> Result<()> {
        if degree > self.exact_degree() {
            Err(Error::Precision {
                order: self.order(),
                degree,
            })
        } else {
            Ok(())
        }
    }
}

/// Order used when nothing else is configured: exact for every pairing that
/// arises from a degree-`n` index set with up to two extra moment factors.
pub fn default_quadrature_order(n: u32) -> usize {
    2 * (n as usize + 2)
}

/// `Q`-point Gauss–Hermite rule (Golub–Welsch eigenvalues, Newton-polished).
pub fn gauss_hermite(q: usize) -> Result<QuadratureRule> {
    if q == 0 {
        return Err(Error::Config("quadrature order must be at least 1".into()));
    }
    if q > MAX_QUADRATURE_ORDER {
        return Err(Error::Config(format!(
            "quadrature order {q} exceeds the stability cap {MAX_QUADRATURE_ORDER}"
        )));
    }
    let off: Vec<f64> = (1..q).map(|k| (k as f64).sqrt()).collect();
    let mut nodes = linalg::symmetric_tridiagonal_eigenvalues(&vec![0.0; q], &off)?;

    let mut buf = Vec::with_capacity(q + 1);
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            hermite_values(q, *x, &mut buf);
            let p = buf[q];
            let dp = (q as f64).sqrt() * buf[q - 1];
            if dp == 0.0 {
                break;
            }
            let step = p / dp;
            *x -= step;
            if step.abs() <= 1e-16 * x.abs().max(1.0) {
                break;
            }
        }
    }
    nodes.sort_by(f64::total_cmp);
    for i in 0..q / 2 {
        let m = 0.5 * (nodes[q - 1 - i] - nodes[i]);
        nodes[i] = -m;
        nodes[q - 1 - i] = m;
    }
    if q % 2 == 1 {
        nodes[q / 2] = 0.0;
    }

    let mut weights: Vec<f64> = nodes
        .iter()
        .map(|&x| {
            hermite_values(q - 1, x, &mut buf);
            1.0 / buf.iter().map(|p| p * p).sum::<f64>()
        })
        .collect();
    for i in 0..q / 2 {
        let w = 0.5 * (weights[i] + weights[q - 1 - i]);
        weights[i] = w;
        weights[q - 1 - i] = w;
    }
    let total: f64 = weights.iter().sum();
    for w in &mut weights {
        *w /= total;
    }
    Ok(QuadratureRule { nodes, weights })
}

/// True when `∫ P_i P_j ξ^p dμ₁` vanishes for parity or degree-gap reasons.
pub fn pairing_vanishes(i: usize, j: usize, p: usize) -> bool {
    i.abs_diff(j) > p || (i + j + p) % 2 == 1
}

/// `∫ P_i(ξ) P_j(ξ) ξ^p dμ₁(ξ)` by quadrature.
pub fn gaussian_pairing(i: usize, j: usize, p: usize, rule: &QuadratureRule) -> Result<f64> {
    rule.check_degree(i + j + p)?;
    Ok(rule.integrate(|x| hermite_eval(i, x) * hermite_eval(j, x) * x.powi(p as i32)))
}

/// Precomputed pairings `∫ P_a P_b ξ^p dμ₁` for `a, b ≤ max_degree`, `p ≤ max_power`,
/// with structural zeros stored as exact zeros.
#[derive(Debug, Clone)]
pub struct PairingTable {
    max_degree: usize,
    max_power: usize,
    values: Vec<f64>,
}

impl PairingTable {
    pub fn new(max_degree: usize, max_power: usize, rule: &QuadratureRule) -> Result<Self> {
        rule.check_degree(2 * max_degree + max_power)?;
        let d = max_degree + 1;
        let mut values = vec![0.0; (max_power + 1) * d * d];
        let mut rows = Vec::with_capacity(rule.order());
        let mut buf = Vec::new();
        for &x in rule.nodes() {
            hermite_values(max_degree, x, &mut buf);
            rows.push(buf.clone());
        }
        for p in 0..=max_power {
            for a in 0..d {
                for b in 0..d {
                    if pairing_vanishes(a, b, p) {
                        continue;
                    }
                    let v: f64 = rule
                        .nodes()
                        .iter()
                        .zip(rule.weights())
                        .zip(&rows)
                        .map(|((&x, &w), h)| w * h[a] * h[b] * x.powi(p as i32))
                        .sum();
                    values[(p * d + a) * d + b] = v;
                }
            }
        }
        Ok(PairingTable {
            max_degree,
            max_power,
            values,
        })
    }

    pub fn max_degree(&self) -> usize {
        self.max_degree
    }

    pub fn max_power(&self) -> usize {
        self.max_power
    }

    /// `∫ P_a P_b ξ^p dμ₁`.
    #[inline]
    pub fn pair(&self, a: usize, b: usize, p: usize) -> f64 {
        let d = self.max_degree + 1;
        debug_assert!(a < d && b < d && p <= self.max_power);
        self.values[(p * d + a) * d + b]
    }

    /// `∫ P_a' P_b ξ^p dμ₁ = √a ∫ P_{a−1} P_b ξ^p dμ₁`.
    #[inline]
    pub fn derivative_pair(&self, a: usize, b: usize, p: usize) -> f64 {
        if a == 0 {
            0.0
        } else {
            (a as f64).sqrt() * self.pair(a - 1, b, p)
        }
    }
}

/// Composite Gauss–Legendre rule on `[0, 1]`.
#[derive(Debug, Clone)]
pub struct LegendreRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
}

pub const DEFAULT_PANELS: usize = 64;
pub const DEFAULT_PANEL_ORDER: usize = 8;

impl LegendreRule {
    pub fn new(panels: usize, order: usize) -> Result<Self> {
        if panels == 0 || order == 0 {
            return Err(Error::Config(
                "Gauss-Legendre rule needs at least one panel and one node".into(),
            ));
        }
        let (ref_nodes, ref_weights) = legendre_reference(order)?;
        let h = 1.0 / panels as f64;
        let mut nodes = Vec::with_capacity(panels * order);
        let mut weights = Vec::with_capacity(panels * order);
        for p in 0..panels {
            let a = p as f64 * h;
            for (x, w) in ref_nodes.iter().zip(&ref_weights) {
                nodes.push(a + 0.5 * h * (x + 1.0));
                weights.push(0.5 * h * w);
            }
        }
        Ok(LegendreRule { nodes, weights })
    }

    pub fn standard() -> Self {
        LegendreRule::new(DEFAULT_PANELS, DEFAULT_PANEL_ORDER).expect("default Gauss-Legendre rule")
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn integrate(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes
            .iter()
            .zip(&self.weights)
            .map(|(&x, &w)| w * f(x))
            .sum()
    }
}

// Nodes and weights on [-1, 1].
fn legendre_reference(order: usize) -> Result<(Vec<f64>, Vec<f64>)> {
    let off: Vec<f64> = (1..order)
        .map(|k| {
            let k = k as f64;
            k / (4.0 * k * k - 1.0).sqrt()
        })
        .collect();
    let mut nodes = linalg::symmetric_tridiagonal_eigenvalues(&vec![0.0; order], &off)?;
    let mut weights = Vec::with_capacity(order);
    for x in nodes.iter_mut() {
        for _ in 0..3 {
            let (p, d) = legendre_with_derivative(order, *x);
            *x -= p / d;
        }
        let (_, d) = legendre_with_derivative(order, *x);
        weights.push(2.0 / ((1.0 - *x * *x) * d * d));
    }
    Ok((nodes, weights))
}

fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p0 = 1.0;
    let mut p1 = x;
    if n == 0 {
        return (1.0, 0.0);
    }
    for k in 2..=n {
        let k = k as f64;
        let p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
        p0 = p1;
        p1 = p2;
    }
    let n = n as f64;
    (p1, n * (x * p1 - p0) / (x * x - 1.0))
}
