//! Drift operators and the chaos coupling coefficients `C̄_{n,m}`.
//!
//! Every supported drift has sine coefficients `B_j(x) = ⟨B(x), e_j⟩` that are
//! polynomials of degree at most two in the field coefficients `β`. After the
//! change of variables `β_i = ξ_i/σ_i` each `B_j` becomes a polynomial in the
//! Gaussian coordinates, stored as a [`DriftExpansion`]. A coupling
//! coefficient is then a sum of products of one-dimensional Hermite pairings:
//!
//! `C̄_{n,m} = Σ_j σ_j Σ_terms c · Π_i ∫ Q_i P_{m_i} ξ_i^{p_i} dμ₁`
//!
//! where `Q_i = P'_{n_i}` in coordinate `j` and `P_{n_i}` elsewhere.

use std::collections::{BTreeMap, VecDeque};
use std::f64::consts::{PI, SQRT_2};
use std::fmt;
use std::sync::Arc;

use crate::error::{Error, Result};
use crate::exec::{map_indexed, Execution};
use crate::hermite::{gaussian_pairing, LegendreRule, PairingTable, QuadratureRule};
use crate::linalg::Matrix;
use crate::multiindex::{IndexSet, MultiIndex};
use crate::spectral_basis::{basis_eval, OperatorSpectrum, SpectralField};

/// Deterministic source term of the heat model.
#[derive(Clone)]
pub enum Forcing {
    Zero,
    /// `f(ξ) = ξ³`.
    Cubic,
    Custom {
        name: String,
        f: Arc<dyn Fn(f64) -> f64 + Send + Sync>,
    },
}

impl Forcing {
    pub fn eval(&self, xi: f64) -> f64 {
        match self {
            Forcing::Zero => 0.0,
            Forcing::Cubic => xi * xi * xi,
            Forcing::Custom { f, .. } => f(xi),
        }
    }

    pub fn name(&self) -> &str {
        match self {
            Forcing::Zero => "zero",
            Forcing::Cubic => "cubic",
            Forcing::Custom { name, .. } => name,
        }
    }

    pub fn parse(s: &str) -> Option<Forcing> {
        match s {
            "zero" | "none" => Some(Forcing::Zero),
            "cubic" => Some(Forcing::Cubic),
            _ => None,
        }
    }

    /// `⟨f, e_k⟩` for `k = 1..=modes`.
    pub fn coefficients(&self, modes: usize, rule: &LegendreRule) -> Vec<f64> {
        if let Forcing::Zero = self {
            return vec![0.0; modes];
        }
        (1..=modes)
            .map(|k| forcing_inner_product(|x| self.eval(x), k, rule))
            .collect()
    }
}

impl PartialEq for Forcing {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Forcing::Zero, Forcing::Zero) | (Forcing::Cubic, Forcing::Cubic) => true,
            (Forcing::Custom { name: a, f: fa }, Forcing::Custom { name: b, f: fb }) => {
                a == b && Arc::ptr_eq(fa, fb)
            }
            _ => false,
        }
    }
}

impl fmt::Debug for Forcing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Forcing({})", self.name())
    }
}

/// How products `β_l β_k` of two field coefficients enter the expansion.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum QuadraticTreatment {
    /// First-order expansion about the base field:
    /// `β_l β_k ≈ β̄_l β_k + β_l β̄_k − β̄_l β̄_k`.
    #[default]
    Linearized,
    /// Both factors become Gaussian coordinates, giving second-moment integrals.
    Substitute,
}

impl QuadraticTreatment {
    pub fn name(self) -> &'static str {
        match self {
            QuadraticTreatment::Linearized => "linearized",
            QuadraticTreatment::Substitute => "substitute",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "linearized" => Some(QuadraticTreatment::Linearized),
            "substitute" => Some(QuadraticTreatment::Substitute),
            _ => None,
        }
    }
}

#[derive(Debug, Clone)]
pub enum DriftModel {
    /// `B(x) = f`.
    Heat { forcing: Forcing },
    /// `B(x) = a·x − b·x²`.
    Fisher {
        linear: f64,
        quadratic: f64,
        base_field: SpectralField,
        treatment: QuadraticTreatment,
    },
    /// `B(x) = ½ ∂_ξ(x²)`.
    Burgers {
        base_field: SpectralField,
        treatment: QuadraticTreatment,
    },
}

impl DriftModel {
    pub fn fisher(base_field: SpectralField) -> Self {
        DriftModel::Fisher {
            linear: 1.0,
            quadratic: 1.0,
            base_field,
            treatment: QuadraticTreatment::default(),
        }
    }

    pub fn burgers(base_field: SpectralField) -> Self {
        DriftModel::Burgers {
            base_field,
            treatment: QuadraticTreatment::default(),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            DriftModel::Heat { .. } => "heat",
            DriftModel::Fisher { .. } => "fisher",
            DriftModel::Burgers { .. } => "burgers",
        }
    }

    pub fn with_treatment(self, t: QuadraticTreatment) -> Self {
        match self {
            DriftModel::Fisher {
                linear,
                quadratic,
                base_field,
                ..
            } => DriftModel::Fisher {
                linear,
                quadratic,
                base_field,
                treatment: t,
            },
            DriftModel::Burgers { base_field, .. } => DriftModel::Burgers {
                base_field,
                treatment: t,
            },
            heat => heat,
        }
    }
}

/// `∫₀¹ f e_k` by composite Gauss–Legendre quadrature.
pub fn forcing_inner_product(f: impl Fn(f64) -> f64, k: usize, rule: &LegendreRule) -> f64 {
    rule.integrate(|x| f(x) * basis_eval(k, x))
}

// ∫₀¹ sin(qπξ) dξ.
fn sine_integral(q: i64) -> f64 {
    if q.rem_euclid(2) == 1 {
        2.0 / (q as f64 * PI)
    } else {
        0.0
    }
}

/// `⟨e_l e_k, e_j⟩` in closed form.
pub fn triple_product(l: usize, k: usize, j: usize) -> f64 {
    let (l, k, j) = (l as i64, k as i64, j as i64);
    let s = sine_integral(j + l - k) + sine_integral(j - l + k)
        - sine_integral(j + l + k)
        - sine_integral(j - l - k);
    0.5 * SQRT_2 * s
}

/// `⟨(e_l e_k)', e_j⟩ = ⟨e_l e_k' + e_l' e_k, e_j⟩` in closed form.
pub fn derivative_triple_product(l: usize, k: usize, j: usize) -> f64 {
    // Integration by parts gives −⟨e_l e_k, e_j'⟩; only cosines of zero
    // frequency survive on [0, 1].
    let (l, k, j) = (l as i64, k as i64, j as i64);
    let hits = [
        (l - k + j, 1),
        (l - k - j, 1),
        (l + k + j, -1),
        (l + k - j, -1),
    ]
    .iter()
    .filter(|(q, _)| *q == 0)
    .map(|(_, s)| *s)
    .sum::<i64>();
    if hits == 0 {
        return 0.0;
    }
    -0.5 * SQRT_2 * j as f64 * PI * hits as f64
}

// Monomial in the Gaussian coordinates: 1, ξ_a, or ξ_a ξ_b with a ≤ b.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
enum Monomial {
    One,
    Linear(usize),
    Quadratic(usize, usize),
}

impl Monomial {
    fn power(self, coord: usize) -> usize {
        match self {
            Monomial::One => 0,
            Monomial::Linear(a) => usize::from(a == coord),
            Monomial::Quadratic(a, b) => usize::from(a == coord) + usize::from(b == coord),
        }
    }

    fn support_mask(self) -> u64 {
        match self {
            Monomial::One => 0,
            Monomial::Linear(a) => 1 << a,
            Monomial::Quadratic(a, b) => (1 << a) | (1 << b),
        }
    }
}

// β_i as an affine function of ξ: either (1/σ_i) ξ_i or a frozen constant.
#[derive(Debug, Clone, Copy)]
enum Affine {
    Coord(usize, f64),
    Const(f64),
}

#[derive(Debug, Clone, Default)]
struct Polynomial {
    terms: BTreeMap<Monomial, f64>,
}

impl Polynomial {
    fn add(&mut self, m: Monomial, c: f64) {
        if c != 0.0 {
            *self.terms.entry(m).or_insert(0.0) += c;
        }
    }

    fn add_affine(&mut self, a: Affine, scale: f64) {
        match a {
            Affine::Coord(i, s) => self.add(Monomial::Linear(i), scale * s),
            Affine::Const(v) => self.add(Monomial::One, scale * v),
        }
    }

    fn add_product(&mut self, a: Affine, b: Affine, scale: f64) {
        match (a, b) {
            (Affine::Const(x), Affine::Const(y)) => self.add(Monomial::One, scale * x * y),
            (Affine::Const(x), other) | (other, Affine::Const(x)) => {
                self.add_affine(other, scale * x)
            }
            (Affine::Coord(i, s), Affine::Coord(k, t)) => {
                let (lo, hi) = if i <= k { (i, k) } else { (k, i) };
                self.add(Monomial::Quadratic(lo, hi), scale * s * t);
            }
        }
    }
}

/// Sine coefficients `B_j` of a drift written as polynomials in the Gaussian
/// coordinates `ξ_1..ξ_M`.
#[derive(Debug, Clone)]
pub struct DriftExpansion {
    modes: usize,
    sigma: Vec<f64>,
    // Per coordinate j: (monomial, coefficient, support mask).
    components: Vec<Vec<(Monomial, f64, u64)>>,
    max_power: usize,
}

impl DriftExpansion {
    pub fn new(model: &DriftModel, spectrum: &OperatorSpectrum, modes: usize) -> Result<Self> {
        Self::with_rule(model, spectrum, modes, &LegendreRule::standard())
    }

    pub fn with_rule(
        model: &DriftModel,
        spectrum: &OperatorSpectrum,
        modes: usize,
        rule: &LegendreRule,
    ) -> Result<Self> {
        if modes == 0 || modes > 64 {
            return Err(Error::Config(format!("mode count {modes} outside 1..=64")));
        }
        if spectrum.modes() < modes {
            return Err(Error::Shape(format!(
                "spectrum has {} modes but the index set needs {modes}",
                spectrum.modes()
            )));
        }
        let sigma = spectrum.sigma()[..modes].to_vec();
        let mut polys = vec![Polynomial::default(); modes];
        match model {
            DriftModel::Heat { forcing } => {
                for (j, c) in forcing.coefficients(modes, rule).into_iter().enumerate() {
                    polys[j].add(Monomial::One, c);
                }
            }
            DriftModel::Fisher {
                linear,
                quadratic,
                base_field,
                treatment,
            } => {
                for (j, poly) in polys.iter_mut().enumerate() {
                    poly.add(Monomial::Linear(j), linear / sigma[j]);
                }
                let width = modes.max(base_field.modes());
                add_quadratic(
                    &mut polys,
                    &sigma,
                    base_field,
                    *treatment,
                    width,
                    |l, k, j| -quadratic * triple_product(l, k, j),
                );
            }
            DriftModel::Burgers {
                base_field,
                treatment,
            } => {
                let width = modes.max(base_field.modes());
                add_quadratic(
                    &mut polys,
                    &sigma,
                    base_field,
                    *treatment,
                    width,
                    |l, k, j| 0.5 * derivative_triple_product(l, k, j),
                );
            }
        }
        let mut max_power = 0;
        let components = polys
            .into_iter()
            .map(|p| {
                p.terms
                    .into_iter()
                    .filter(|(_, c)| *c != 0.0)
                    .map(|(m, c)| {
                        max_power = max_power.max(match m {
                            Monomial::One => 0,
                            Monomial::Linear(_) => 1,
                            Monomial::Quadratic(a, b) if a == b => 2,
                            Monomial::Quadratic(..) => 1,
                        });
                        (m, c, m.support_mask())
                    })
                    .collect()
            })
            .collect();
        Ok(DriftExpansion {
            modes,
            sigma,
            components,
            max_power,
        })
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    /// Highest single-coordinate moment power appearing in any term.
    pub fn max_power(&self) -> usize {
        self.max_power
    }

    /// Number of nonzero polynomial terms over all components.
    pub fn term_count(&self) -> usize {
        self.components.iter().map(Vec::len).sum()
    }

    /// Largest polynomial degree in any component (0, 1 or 2).
    pub fn degree(&self) -> usize {
        self.components
            .iter()
            .flatten()
            .map(|(m, _, _)| match m {
                Monomial::One => 0,
                Monomial::Linear(_) => 1,
                Monomial::Quadratic(..) => 2,
            })
            .max()
            .unwrap_or(0)
    }

    /// Pairing table big enough for any pair of indices with entries ≤ `max_degree`.
    pub fn pairing_table(&self, max_degree: usize, rule: &QuadratureRule) -> Result<PairingTable> {
        PairingTable::new(max_degree, 2, rule)
    }

    /// `C̄_{n,m}`.
    pub fn coefficient(&self, n: &MultiIndex, m: &MultiIndex, table: &PairingTable) -> f64 {
        debug_assert_eq!(n.len(), self.modes);
        let diff = n.diff_mask(m);
        let mut total = 0.0;
        for (j, comp) in self.components.iter().enumerate() {
            if n.get(j) == 0 {
                continue;
            }
            let mut cj = 0.0;
            for &(mono, c, support) in comp {
                if diff & !(support | (1 << j)) != 0 {
                    continue;
                }
                let mut prod = c;
                for i in 0..self.modes {
                    let (a, b, p) = (n.get(i) as usize, m.get(i) as usize, mono.power(i));
                    let g = if i == j {
                        table.derivative_pair(a, b, p)
                    } else {
                        table.pair(a, b, p)
                    };
                    if g == 0.0 {
                        prod = 0.0;
                        break;
                    }
                    prod *= g;
                }
                cj += prod;
            }
            total += self.sigma[j] * cj;
        }
        total
    }
}

fn add_quadratic(
    polys: &mut [Polynomial],
    sigma: &[f64],
    base: &SpectralField,
    treatment: QuadraticTreatment,
    width: usize,
    weight: impl Fn(usize, usize, usize) -> f64,
) {
    let modes = polys.len();
    let affine = |i: usize| -> Affine {
        if i <= modes {
            Affine::Coord(i - 1, 1.0 / sigma[i - 1])
        } else {
            Affine::Const(base.coefficient(i))
        }
    };
    for j in 1..=modes {
        let poly = &mut polys[j - 1];
        for l in 1..=width {
            for k in 1..=width {
                let w = weight(l, k, j);
                if w == 0.0 {
                    continue;
                }
                match treatment {
                    QuadraticTreatment::Substitute => poly.add_product(affine(l), affine(k), w),
                    QuadraticTreatment::Linearized => {
                        let (bl, bk) = (base.coefficient(l), base.coefficient(k));
                        poly.add_affine(affine(k), w * bl);
                        poly.add_affine(affine(l), w * bk);
                        poly.add(Monomial::One, -w * bl * bk);
                    }
                }
            }
        }
    }
}

/// Heat coupling via its Kronecker-delta form: `σ_k √n_k f_k` when
/// `m = n − unit_k`, zero otherwise. `forcing_coeffs[k-1] = ⟨f, e_k⟩`.
pub fn heat_coefficient(
    n: &MultiIndex,
    m: &MultiIndex,
    spectrum: &OperatorSpectrum,
    forcing_coeffs: &[f64],
) -> f64 {
    if n.degree() != m.degree() + 1 {
        return 0.0;
    }
    let diff = n.diff_mask(m);
    if diff.count_ones() != 1 {
        return 0.0;
    }
    let k = diff.trailing_zeros() as usize;
    if n.get(k) != m.get(k) + 1 {
        return 0.0;
    }
    spectrum.sigma()[k] * f64::from(n.get(k)).sqrt() * forcing_coeffs[k]
}

/// Heat coupling evaluated term by term from one-dimensional quadratures.
pub fn heat_coefficient_quadrature(
    n: &MultiIndex,
    m: &MultiIndex,
    spectrum: &OperatorSpectrum,
    forcing_coeffs: &[f64],
    rule: &QuadratureRule,
) -> Result<f64> {
    let mut total = 0.0;
    for k in 0..n.len() {
        let nk = n.get(k) as usize;
        if nk == 0 {
            continue;
        }
        let mut term = spectrum.sigma()[k] * (nk as f64).sqrt() * forcing_coeffs[k];
        term *= gaussian_pairing(m.get(k) as usize, nk - 1, 0, rule)?;
        for i in (0..n.len()).filter(|&i| i != k) {
            term *= gaussian_pairing(n.get(i) as usize, m.get(i) as usize, 0, rule)?;
        }
        total += term;
    }
    Ok(total)
}

fn single_coefficient(
    model: &DriftModel,
    n: &MultiIndex,
    m: &MultiIndex,
    spectrum: &OperatorSpectrum,
    rule: &QuadratureRule,
) -> Result<f64> {
    let exp = DriftExpansion::new(model, spectrum, n.len())?;
    let max_deg = n
        .entries()
        .iter()
        .chain(m.entries())
        .copied()
        .max()
        .unwrap_or(0) as usize;
    let table = exp.pairing_table(max_deg, rule)?;
    Ok(exp.coefficient(n, m, &table))
}

/// Fisher–KPP coupling (`a = b = 1`) about `base_field`.
pub fn fisher_coefficient(
    n: &MultiIndex,
    m: &MultiIndex,
    spectrum: &OperatorSpectrum,
    base_field: &SpectralField,
    rule: &QuadratureRule,
) -> Result<f64> {
    single_coefficient(
        &DriftModel::fisher(base_field.clone()),
        n,
        m,
        spectrum,
        rule,
    )
}

/// Burgers coupling about `base_field`.
pub fn burgers_coefficient(
    n: &MultiIndex,
    m: &MultiIndex,
    spectrum: &OperatorSpectrum,
    base_field: &SpectralField,
    rule: &QuadratureRule,
) -> Result<f64> {
    single_coefficient(
        &DriftModel::burgers(base_field.clone()),
        n,
        m,
        spectrum,
        rule,
    )
}

/// Dense matrix with entry `[m][n] = C̄_{n,m}`, ordered by `index_set`.
#[derive(Debug, Clone)]
pub struct CoefficientMatrix {
    pub values: Matrix,
    pub index_set: IndexSet,
}

/// Assembles `C̄` over `index_set` with the default [`Execution`].
pub fn assemble_coefficients(
    model: &DriftModel,
    index_set: &IndexSet,
    spectrum: &OperatorSpectrum,
    rule: &QuadratureRule,
) -> Result<CoefficientMatrix> {
    assemble_coefficients_with(model, index_set, spectrum, rule, Execution::default())
}

pub fn assemble_coefficients_with(
    model: &DriftModel,
    index_set: &IndexSet,
    spectrum: &OperatorSpectrum,
    rule: &QuadratureRule,
    exec: Execution,
) -> Result<CoefficientMatrix> {
    let exp = DriftExpansion::new(model, spectrum, index_set.modes())?;
    assemble_expansion(&exp, index_set, rule, exec)
}

/// Assembles from a prepared expansion. Heat drifts take the delta shortcut.
pub fn assemble_expansion(
    exp: &DriftExpansion,
    index_set: &IndexSet,
    rule: &QuadratureRule,
    exec: Execution,
) -> Result<CoefficientMatrix> {
    if exp.modes() != index_set.modes() {
        return Err(Error::Shape(format!(
            "expansion has {} modes, index set {}",
            exp.modes(),
            index_set.modes()
        )));
    }
    let dim = index_set.len();
    let max_deg = max_entry(index_set);
    let table = exp.pairing_table(max_deg, rule)?;
    let rows = map_indexed(exec, dim, |mi| {
        let m = index_set.get(mi);
        index_set
            .iter()
            .map(|n| exp.coefficient(n, m, &table))
            .collect::<Vec<f64>>()
    });
    let values = Matrix::from_rows(&rows);
    if !values.is_finite() {
        return Err(Error::Numerical("non-finite coupling coefficient".into()));
    }
    Ok(CoefficientMatrix {
        values,
        index_set: index_set.clone(),
    })
}

fn max_entry(set: &IndexSet) -> usize {
    set.iter()
        .flat_map(|i| i.entries().iter().copied())
        .max()
        .unwrap_or(0) as usize
}

/// Positions reachable from `seeds` along nonzero couplings `n → m`
/// (`C̄_{n,m} ≠ 0`), sorted. Coordinates outside this set stay identically zero
/// under the Galerkin dynamics when started from data supported on `seeds`.
pub fn coupling_closure(
    exp: &DriftExpansion,
    index_set: &IndexSet,
    seeds: &[usize],
    rule: &QuadratureRule,
) -> Result<Vec<usize>> {
    let table = exp.pairing_table(max_entry(index_set), rule)?;
    let mut seen = vec![false; index_set.len()];
    let mut queue = VecDeque::new();
    for &s in seeds {
        if !seen[s] {
            seen[s] = true;
            queue.push_back(s);
        }
    }
    while let Some(ni) = queue.pop_front() {
        let n = index_set.get(ni);
        for (mi, m) in index_set.iter().enumerate() {
            if !seen[mi] && exp.coefficient(n, m, &table) != 0.0 {
                seen[mi] = true;
                queue.push_back(mi);
            }
        }
    }
    Ok((0..index_set.len()).filter(|&i| seen[i]).collect())
}
