//! Initial chaos coefficients `u_m(0)` for the two linear functionals and the
//! constants of the eigen solution.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

use crate::error::{Error, Result};
use crate::field_solution::hermite_functional_eval;
use crate::galerkin::EigenSolution;
use crate::hermite::{gaussian_pairing, QuadratureRule};
use crate::linalg::{self, Matrix};
use crate::multiindex::IndexSet;
use crate::spectral_basis::{basis_eval, basis_integral, OperatorSpectrum, SpectralField};

/// The observable `u₀` whose expectation is propagated.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Functional {
    /// `g ↦ g(z)`.
    Point(f64),
    /// `g ↦ ∫₀¹ g`.
    Integral,
}

impl Functional {
    pub fn point(z: f64) -> Result<Self> {
        if (0.0..=1.0).contains(&z) {
            Ok(Functional::Point(z))
        } else {
            Err(Error::Config(format!(
                "evaluation point {z} outside [0, 1]"
            )))
        }
    }

    /// `u₀` applied to a field.
    pub fn apply(&self, field: &SpectralField) -> f64 {
        field
            .beta()
            .iter()
            .enumerate()
            .map(|(i, b)| b * self.mode_weight(i + 1))
            .sum()
    }

    /// `u₀(e_k)`.
    pub fn mode_weight(&self, k: usize) -> f64 {
        match *self {
            Functional::Point(z) => basis_eval(k, z),
            Functional::Integral => basis_integral(k),
        }
    }
}

fn first_chaos_ic(
    index_set: &IndexSet,
    spectrum: &OperatorSpectrum,
    weight: impl Fn(usize) -> f64,
) -> Vec<f64> {
    let mut u = vec![0.0; index_set.len()];
    for k in 0..index_set.modes() {
        if let Some(p) = index_set.unit_position(k) {
            u[p] = weight(k + 1) / spectrum.sigma()[k];
        }
    }
    u
}

/// `u_m(0) = e_k(z)/σ_k` for `m = unit_k`, zero elsewhere.
pub fn point_functional_ic(
    index_set: &IndexSet,
    z: f64,
    spectrum: &OperatorSpectrum,
) -> Result<Vec<f64>> {
    let f = Functional::point(z)?;
    Ok(functional_ic(index_set, f, spectrum))
}

/// `u_m(0) = (∫₀¹ e_k)/σ_k` for `m = unit_k`, zero elsewhere.
pub fn integral_functional_ic(index_set: &IndexSet, spectrum: &OperatorSpectrum) -> Vec<f64> {
    functional_ic(index_set, Functional::Integral, spectrum)
}

pub fn functional_ic(
    index_set: &IndexSet,
    functional: Functional,
    spectrum: &OperatorSpectrum,
) -> Vec<f64> {
    first_chaos_ic(index_set, spectrum, |k| functional.mode_weight(k))
}

/// `u_m(0) = Σ_k (u₀(e_k)/σ_k) ∫P_{m_k} ξ dμ₁ Π_{i≠k} ∫P_{m_i} dμ₁`, the
/// undelta'd form evaluated by Gauss–Hermite quadrature.
pub fn functional_ic_quadrature(
    index_set: &IndexSet,
    functional: Functional,
    spectrum: &OperatorSpectrum,
    rule: &QuadratureRule,
) -> Result<Vec<f64>> {
    index_set
        .iter()
        .map(|m| {
            let mut total = 0.0;
            for k in 0..m.len() {
                let mut term = functional.mode_weight(k + 1) / spectrum.sigma()[k];
                term *= gaussian_pairing(m.get(k) as usize, 0, 1, rule)?;
                for i in (0..m.len()).filter(|&i| i != k) {
                    term *= gaussian_pairing(m.get(i) as usize, 0, 0, rule)?;
                }
                total += term;
            }
            Ok(total)
        })
        .collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ConstantsStatus {
    /// LU solve with partial pivoting.
    Direct,
    /// The direct solve was inaccurate and least squares was used.
    LeastSquares,
}

/// Solves `Φ(0) c = u0` for the eigen constants.
pub fn fix_constants(eigen: &EigenSolution, u0: &[f64]) -> Result<(Vec<f64>, ConstantsStatus)> {
    let v = eigen.fundamental_matrix(0.0);
    if v.rows() != u0.len() {
        return Err(Error::Shape(format!(
            "{} eigen columns for {} initial values",
            v.rows(),
            u0.len()
        )));
    }
    let scale = u0
        .iter()
        .map(|x| x * x)
        .sum::<f64>()
        .sqrt()
        .max(f64::MIN_POSITIVE);
    let c = linalg::lu_solve(&v, u0);
    if c.iter().all(|x| x.is_finite()) && linalg::residual_norm(&v, &c, u0) <= 1e-10 * scale {
        return Ok((c, ConstantsStatus::Direct));
    }
    let c = linalg::lstsq(&v, u0);
    let res = linalg::residual_norm(&v, &c, u0);
    if c.iter().all(|x| x.is_finite()) && res <= 1e-8 * scale {
        Ok((c, ConstantsStatus::LeastSquares))
    } else {
        Err(Error::RankDeficient(format!(
            "eigenvector matrix cannot reproduce the initial vector (residual {res:e})"
        )))
    }
}

/// Fields drawn from the invariant measure: `ξ_k ~ N(0,1)`, `β_k = ξ_k/σ_k`.
pub fn gaussian_sample_fields(
    count: usize,
    spectrum: &OperatorSpectrum,
    seed: u64,
) -> Vec<SpectralField> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            SpectralField::new(
                spectrum
                    .sigma()
                    .iter()
                    .map(|s| {
                        let xi: f64 = StandardNormal.sample(&mut rng);
                        xi / s
                    })
                    .collect(),
            )
        })
        .collect()
}

/// Least-squares constants from `Σ_n H_n(x_p) (Φ(0) c)_n = target_p`.
pub fn collocation_constants(
    index_set: &IndexSet,
    eigen: &EigenSolution,
    sample_fields: &[SpectralField],
    target_values: &[f64],
    spectrum: &OperatorSpectrum,
) -> Result<Vec<f64>> {
    let dim = eigen.dim();
    if index_set.len() != dim {
        return Err(Error::Shape(format!(
            "index set of {} for a system of {dim}",
            index_set.len()
        )));
    }
    if sample_fields.len() != target_values.len() {
        return Err(Error::Shape(
            "one target value per sample field is required".into(),
        ));
    }
    if sample_fields.len() < dim {
        return Err(Error::RankDeficient(format!(
            "{} samples cannot determine {dim} constants",
            sample_fields.len()
        )));
    }
    let h = Matrix::from_fn(sample_fields.len(), dim, |p, n| {
        hermite_functional_eval(index_set.get(n), &sample_fields[p], spectrum)
    });
    let a = h.mul(&eigen.fundamental_matrix(0.0));
    if linalg::rank(&a, 1e-10)? < dim {
        return Err(Error::RankDeficient(
            "collocation matrix is singular".into(),
        ));
    }
    Ok(linalg::lstsq(&a, target_values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::drift::{assemble_coefficients, DriftModel, Forcing};
    use crate::galerkin::{
        assemble_system, eigen_decompose, Decomposition, GalerkinSystem, RealMode,
    };
    use crate::hermite::gauss_hermite;
    use crate::multiindex::{enumerate_indices, MultiIndex, Scheme};
    use std::f64::consts::{PI, SQRT_2};

    fn heat_system(nu: f64, m: usize, n: u32) -> (GalerkinSystem, OperatorSpectrum) {
        let s = OperatorSpectrum::new(nu, m).unwrap();
        let set = enumerate_indices(m, n, Scheme::TotalDegree).unwrap();
        let c = assemble_coefficients(
            &DriftModel::Heat {
                forcing: Forcing::Cubic,
            },
            &set,
            &s,
            &gauss_hermite(2 * (n as usize + 2)).unwrap(),
        )
        .unwrap();
        (assemble_system(&c, &set, &s).unwrap(), s)
    }

    fn usable(sys: &GalerkinSystem) -> EigenSolution {
        match eigen_decompose(sys).unwrap() {
            Decomposition::Usable(e) => e,
            Decomposition::Unusable(r) => panic!("{r}"),
        }
    }

    #[test]
    fn point_ic_examples() {
        let s = OperatorSpectrum::new(0.1, 3).unwrap();
        let set = enumerate_indices(3, 3, Scheme::TotalDegree).unwrap();
        let u = point_functional_ic(&set, 0.5, &s).unwrap();
        assert_eq!(u[0], 0.0);
        let p1 = set.unit_position(0).unwrap();
        let want = SQRT_2 / (0.2f64.sqrt() * PI);
        assert!((u[p1] - want).abs() < 1e-14);
        assert!((u[p1] - 1.0065).abs() < 1e-4);
        let two = set.position(&MultiIndex::new(vec![2, 0, 0])).unwrap();
        assert_eq!(u[two], 0.0);
        let q =
            functional_ic_quadrature(&set, Functional::Point(0.5), &s, &gauss_hermite(8).unwrap())
                .unwrap();
        for (a, b) in u.iter().zip(&q) {
            assert!((a - b).abs() < 1e-6);
        }
        assert!(point_functional_ic(&set, 1.5, &s).is_err());
    }

    #[test]
    fn integral_ic_examples() {
        let s = OperatorSpectrum::new(0.1, 3).unwrap();
        let set = enumerate_indices(3, 2, Scheme::TotalDegree).unwrap();
        let u = integral_functional_ic(&set, &s);
        assert_eq!(u[set.unit_position(1).unwrap()], 0.0);
        assert_eq!(u[0], 0.0);
        let v = u[set.unit_position(0).unwrap()];
        assert!((v - (2.0 * SQRT_2 / PI) / (0.2f64.sqrt() * PI)).abs() < 1e-14);
        assert!((v - 0.6408).abs() < 1e-4);
        let q =
            functional_ic_quadrature(&set, Functional::Integral, &s, &gauss_hermite(6).unwrap())
                .unwrap();
        for (a, b) in u.iter().zip(&q) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn only_first_chaos_is_populated() {
        let s = OperatorSpectrum::new(0.3, 4).unwrap();
        let set = enumerate_indices(4, 3, Scheme::FullTensor).unwrap();
        for f in [Functional::Point(0.37), Functional::Integral] {
            let u = functional_ic(&set, f, &s);
            for (m, v) in set.iter().zip(&u) {
                if *v != 0.0 {
                    assert_eq!(m.degree(), 1);
                }
            }
        }
    }

    #[test]
    fn reflection_parity() {
        let s = OperatorSpectrum::new(0.1, 6).unwrap();
        let set = enumerate_indices(6, 1, Scheme::TotalDegree).unwrap();
        let a = point_functional_ic(&set, 0.23, &s).unwrap();
        let b = point_functional_ic(&set, 0.77, &s).unwrap();
        for k in 0..6 {
            let p = set.unit_position(k).unwrap();
            let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
            assert!((b[p] - sign * a[p]).abs() < 1e-13);
        }
    }

    #[test]
    fn constants_for_identity_and_round_trip() {
        let id = EigenSolution {
            eigenvalues: vec![],
            eigenvectors: vec![],
            real_form: vec![
                RealMode::Real {
                    rate: -1.0,
                    v: vec![1.0, 0.0],
                },
                RealMode::Real {
                    rate: -2.0,
                    v: vec![0.0, 1.0],
                },
            ],
            condition: 1.0,
        };
        let (c, st) = fix_constants(&id, &[1.0, 1.0]).unwrap();
        assert_eq!(c, vec![1.0, 1.0]);
        assert_eq!(st, ConstantsStatus::Direct);

        let (sys, s) = heat_system(0.1, 3, 3);
        let eig = usable(&sys);
        let u0 = point_functional_ic(&sys.index_set, 0.4, &s).unwrap();
        let (c, _) = fix_constants(&eig, &u0).unwrap();
        let back = eig.fundamental_matrix(0.0).mul_vec(&c);
        let err = back
            .iter()
            .zip(&u0)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(err <= 1e-10 * u0.iter().map(|x| x * x).sum::<f64>().sqrt());
        assert!(fix_constants(&eig, &[1.0]).is_err());
    }

    #[test]
    fn collocation_reproduces_galerkin_constants() {
        let (sys, s) = heat_system(0.1, 2, 2);
        let eig = usable(&sys);
        let u0 = point_functional_ic(&sys.index_set, 0.5, &s).unwrap();
        let (c, _) = fix_constants(&eig, &u0).unwrap();
        let samples = gaussian_sample_fields(2 * eig.dim(), &s, 7);
        let f = Functional::Point(0.5);
        let targets: Vec<f64> = samples.iter().map(|x| f.apply(x)).collect();
        let cc = collocation_constants(&sys.index_set, &eig, &samples, &targets, &s).unwrap();
        let norm = c.iter().map(|x| x * x).sum::<f64>().sqrt();
        let diff = c
            .iter()
            .zip(&cc)
            .map(|(a, b)| (a - b).powi(2))
            .sum::<f64>()
            .sqrt();
        assert!(diff <= 5e-2 * norm, "relative difference {}", diff / norm);

        let dup = vec![samples[0].clone(); eig.dim() + 2];
        let t = vec![targets[0]; eig.dim() + 2];
        assert!(matches!(
            collocation_constants(&sys.index_set, &eig, &dup, &t, &s),
            Err(Error::RankDeficient(_))
        ));
        assert!(
            collocation_constants(&sys.index_set, &eig, &samples[..2], &targets[..2], &s).is_err()
        );
    }

    #[test]
    fn single_constant_collocation() {
        let set = enumerate_indices(1, 0, Scheme::TotalDegree).unwrap();
        let s = OperatorSpectrum::new(1.0, 1).unwrap();
        let eig = EigenSolution {
            eigenvalues: vec![],
            eigenvectors: vec![],
            real_form: vec![RealMode::Real {
                rate: 0.0,
                v: vec![1.0],
            }],
            condition: 1.0,
        };
        let c = collocation_constants(&set, &eig, &[SpectralField::new(vec![0.3])], &[2.5], &s)
            .unwrap();
        assert!((c[0] - 2.5).abs() < 1e-14);
    }
}
