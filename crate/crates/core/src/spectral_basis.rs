//! Dirichlet sine basis on `[0, 1]` and the three operator spectra built on it.

use std::f64::consts::{PI, SQRT_2};

use crate::error::{Error, Result};
use crate::hermite::LegendreRule;

/// `e_k(ξ) = √2 sin(kπξ)` for `k ≥ 1`.
pub fn basis_eval(k: usize, xi: f64) -> f64 {
    debug_assert!(k >= 1);
    SQRT_2 * (k as f64 * PI * xi).sin()
}

/// `e_k'(ξ) = √2 kπ cos(kπξ)`.
pub fn basis_derivative(k: usize, xi: f64) -> f64 {
    SQRT_2 * k as f64 * PI * (k as f64 * PI * xi).cos()
}

/// `∫₀¹ e_k`, which is `2√2/(kπ)` for odd `k` and zero otherwise.
pub fn basis_integral(k: usize) -> f64 {
    if k % 2 == 1 {
        2.0 * SQRT_2 / (k as f64 * PI)
    } else {
        0.0
    }
}

/// Per-mode eigenvalues for diffusivity `nu`, modes `k = 1..=M`.
///
/// `lambda_a[k-1]` belongs to `−A`, `lambda_cov[k-1]` to the invariant
/// covariance `Λ`, and `sigma[k-1]` to `Λ^{−1/2}`.
#[derive(Debug, Clone, PartialEq)]
pub struct OperatorSpectrum {
    nu: f64,
    lambda_a: Vec<f64>,
    lambda_cov: Vec<f64>,
    sigma: Vec<f64>,
}

impl OperatorSpectrum {
    pub fn new(nu: f64, modes: usize) -> Result<Self> {
        if !(nu > 0.0 && nu.is_finite()) {
            return Err(Error::Config(format!(
                "nu must be positive and finite, got {nu}"
            )));
        }
        if modes == 0 {
            return Err(Error::Config("mode count M must be at least 1".into()));
        }
        let ks = 1..=modes;
        let lambda_a: Vec<f64> = ks.clone().map(|k| nu * PI * PI * (k * k) as f64).collect();
        let lambda_cov = lambda_a.iter().map(|l| 1.0 / (2.0 * l)).collect();
        let sigma = ks.map(|k| (2.0 * nu).sqrt() * PI * k as f64).collect();
        Ok(OperatorSpectrum {
            nu,
            lambda_a,
            lambda_cov,
            sigma,
        })
    }

    pub fn nu(&self) -> f64 {
        self.nu
    }

    pub fn modes(&self) -> usize {
        self.lambda_a.len()
    }

    pub fn lambda_a(&self) -> &[f64] {
        &self.lambda_a
    }

    pub fn lambda_cov(&self) -> &[f64] {
        &self.lambda_cov
    }

    pub fn sigma(&self) -> &[f64] {
        &self.sigma
    }
}

/// A field `x = Σ β_k e_k` stored by its first `K` sine coefficients.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectralField {
    beta: Vec<f64>,
}

impl SpectralField {
    pub fn new(beta: Vec<f64>) -> Self {
        SpectralField { beta }
    }

    pub fn zero(modes: usize) -> Self {
        SpectralField {
            beta: vec![0.0; modes],
        }
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn modes(&self) -> usize {
        self.beta.len()
    }

    /// Coefficient of mode `k` (1-based); zero beyond the truncation.
    pub fn coefficient(&self, k: usize) -> f64 {
        self.beta.get(k - 1).copied().unwrap_or(0.0)
    }

    /// Gaussian coordinates `ξ_k = σ_k β_k` for the spectrum's modes.
    pub fn gaussian_coordinates(&self, spectrum: &OperatorSpectrum) -> Vec<f64> {
        spectrum
            .sigma()
            .iter()
            .enumerate()
            .map(|(i, s)| s * self.coefficient(i + 1))
            .collect()
    }

    pub fn truncated(&self, modes: usize) -> SpectralField {
        let mut beta = self.beta.clone();
        beta.resize(modes, 0.0);
        SpectralField { beta }
    }
}

/// `β_k ≈ ∫₀¹ x e_k` for `k = 1..=modes` with the given composite rule.
pub fn project_field_with(
    x: impl Fn(f64) -> f64,
    modes: usize,
    rule: &LegendreRule,
) -> SpectralField {
    let values: Vec<f64> = rule.nodes().iter().map(|&s| x(s)).collect();
    let beta = (1..=modes)
        .map(|k| {
            rule.nodes()
                .iter()
                .zip(rule.weights())
                .zip(&values)
                .map(|((&s, &w), &v)| w * v * basis_eval(k, s))
                .sum()
        })
        .collect();
    SpectralField { beta }
}

/// [`project_field_with`] at the default resolution (64 panels, 8 nodes each).
pub fn project_field(x: impl Fn(f64) -> f64, modes: usize) -> SpectralField {
    project_field_with(x, modes, &LegendreRule::standard())
}

/// `Σ_k β_k e_k(ξ)`.
pub fn field_eval(field: &SpectralField, xi: f64) -> f64 {
    field
        .beta()
        .iter()
        .enumerate()
        .map(|(i, b)| b * basis_eval(i + 1, xi))
        .sum()
}

/// Covariance kernel of the invariant measure, `(1/ν)·½[ξ(1−ξ′) − (ξ−ξ′)1{ξ′≤ξ}]`.
pub fn covariance_kernel(xi: f64, xi_p: f64, nu: f64) -> f64 {
    let (hi, lo) = if xi_p <= xi { (xi, xi_p) } else { (xi_p, xi) };
    0.5 * (hi * (1.0 - lo) - (hi - lo)) / nu
}

/// Truncated Mercer series `Σ_{k≤K} e_k(ξ)e_k(ξ′)/(2νπ²k²)`.
pub fn mercer_series(xi: f64, xi_p: f64, nu: f64, terms: usize) -> f64 {
    (1..=terms)
        .map(|k| basis_eval(k, xi) * basis_eval(k, xi_p) / (2.0 * nu * PI * PI * (k * k) as f64))
        .sum()
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn basis_values() {
        assert!((basis_eval(1, 0.5) - SQRT_2).abs() < 1e-15);
        assert!((basis_eval(2, 0.25) - SQRT_2).abs() < 1e-15);
        for k in 1..20 {
            assert_eq!(basis_eval(k, 0.0), 0.0);
        }
    }

    #[test]
    fn spectrum_consistency() {
        let s = OperatorSpectrum::new(0.1, 12).unwrap();
        for k in 0..12 {
            let lam = s.lambda_a()[k];
            assert!((s.sigma()[k].powi(2) - 2.0 * lam).abs() <= 1e-12 * 2.0 * lam);
            assert!((s.lambda_cov()[k] * 2.0 * lam - 1.0).abs() <= 1e-12);
            if k > 0 {
                assert!(lam > s.lambda_a()[k - 1]);
            }
        }
        assert!(OperatorSpectrum::new(0.0, 3).is_err());
        assert!(OperatorSpectrum::new(1.0, 0).is_err());
    }

    // Oracle: trapezoid rule on a very fine grid.
    fn trapezoid(f: impl Fn(f64) -> f64, n: usize) -> f64 {
        let h = 1.0 / n as f64;
        let mut s = 0.5 * (f(0.0) + f(1.0));
        for i in 1..n {
            s += f(i as f64 * h);
        }
        s * h
    }

    #[test]
    fn projection_examples() {
        let e3 = project_field(|x| basis_eval(3, x), 6);
        for (i, b) in e3.beta().iter().enumerate() {
            assert!((b - if i == 2 { 1.0 } else { 0.0 }).abs() < 1e-12);
        }
        let s = project_field(|x| (PI * x).sin(), 5);
        assert!((s.beta()[0] - 0.5f64.sqrt()).abs() < 1e-12);
        assert!(s.beta()[1..].iter().all(|b| b.abs() < 1e-12));
        let sech2 = |x: f64| 1.0 / (5.0 * (x - 0.5)).cosh().powi(2);
        let f = project_field(sech2, 6);
        assert!(f.beta()[1].abs() < 1e-12);
        let oracle = trapezoid(|x| sech2(x) * basis_eval(1, x), 200_000);
        assert!((f.beta()[0] - oracle).abs() < 1e-9);
    }

    #[test]
    fn synthesis_round_trip() {
        let x = |s: f64| (2.0 * PI * s).sin();
        let f = project_field(x, 4);
        for i in 0..=100 {
            let s = i as f64 / 100.0;
            assert!((field_eval(&f, s) - x(s)).abs() < 1e-6);
        }
        assert_eq!(field_eval(&f, 0.0), 0.0);
        assert!((field_eval(&SpectralField::new(vec![1.0]), 0.5) - SQRT_2).abs() < 1e-15);
    }

    #[test]
    fn kernel_examples() {
        assert!((covariance_kernel(0.5, 0.5, 1.0) - 0.125).abs() < 1e-12);
        assert_eq!(covariance_kernel(0.0, 0.3, 2.0), 0.0);
        assert!(
            (covariance_kernel(0.5, 0.5, 1.0) - mercer_series(0.5, 0.5, 1.0, 1000)).abs() < 1e-3
        );
    }

    #[test]
    fn kernel_matches_mercer_series_on_grid() {
        let mut worst: f64 = 0.0;
        for i in 0..=20 {
            for j in 0..=20 {
                let (a, b) = (i as f64 / 20.0, j as f64 / 20.0);
                worst = worst
                    .max((covariance_kernel(a, b, 1.0) - mercer_series(a, b, 1.0, 1000)).abs());
            }
        }
        assert!(worst <= 2e-3, "sup error {worst}");
    }

    #[test]
    fn basis_integral_matches_quadrature() {
        let rule = LegendreRule::standard();
        for k in 1..10 {
            assert!((rule.integrate(|x| basis_eval(k, x)) - basis_integral(k)).abs() < 1e-13);
        }
    }

    proptest! {
        #[test]
        fn projection_is_idempotent(beta in proptest::collection::vec(-2.0f64..2.0, 1..8)) {
            let f = SpectralField::new(beta);
            let g = project_field(|s| field_eval(&f, s), f.modes());
            let h = project_field(|s| field_eval(&g, s), g.modes());
            for (a, b) in g.beta().iter().zip(h.beta()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
            for (a, b) in f.beta().iter().zip(g.beta()) {
                prop_assert!((a - b).abs() < 1e-12);
            }
        }

        #[test]
        fn kernel_is_symmetric(a in 0.0f64..1.0, b in 0.0f64..1.0, nu in 0.05f64..3.0) {
            prop_assert!((covariance_kernel(a, b, nu) - covariance_kernel(b, a, nu)).abs() < 1e-15);
            prop_assert!(covariance_kernel(a, b, nu) >= 0.0);
        }
    }
}
