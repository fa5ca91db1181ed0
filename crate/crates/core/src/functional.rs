//! Candidate statistical-length functionals built from the symmetric
//! polynomials `s = a + ā` and `q = a·ā`.
//!
//! A [`GeneralAnsatz`] is any finite sum `Σ γ_{ℓp} s^ℓ q^p`. Scalability
//! forces every surviving term to share one degree `K = 2p + ℓ`; a
//! [`SymmetricFunctional`] is that homogeneous slice, keyed by `p`.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::amplitude::{compensated_sum, Amplitude, Representation};
use crate::error::{Error, Result};

/// Largest degree the engine is tuned for.
pub const K_MAX: u32 = 8;

/// A real-valued function of one amplitude.
pub trait Functional: Sync {
    fn value(&self, a: Amplitude) -> Result<f64>;
}

impl<F> Functional for F
where
    F: Fn(Amplitude) -> f64 + Sync,
{
    fn value(&self, a: Amplitude) -> Result<f64> {
        Ok(self(a))
    }
}

/// The pair `(a + ā, a·ā)`, both real.
fn symmetric_pair(a: Amplitude) -> Result<(f64, f64)> {
    a.check_finite()?;
    Ok((2.0 * a.re, a.norm_sqr()))
}

fn term(gamma: f64, s: f64, q: f64, ell: u32, p: u32) -> f64 {
    gamma * s.powi(ell as i32) * q.powi(p as i32)
}

fn finite(v: f64) -> Result<f64> {
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::MagnitudeOverflow)
    }
}

/// Homogeneous functional of degree `K`: `Σ_p γ_p (a+ā)^{K−2p} (a·ā)^p`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "FunctionalJson", into = "FunctionalJson")]
pub struct SymmetricFunctional {
    degree: u32,
    gammas: BTreeMap<u32, f64>,
}

#[derive(Serialize, Deserialize)]
struct FunctionalJson {
    #[serde(rename = "K")]
    k: u32,
    gamma: BTreeMap<String, f64>,
}

impl TryFrom<FunctionalJson> for SymmetricFunctional {
    type Error = Error;
    fn try_from(raw: FunctionalJson) -> Result<Self> {
        let mut gammas = BTreeMap::new();
        for (key, g) in raw.gamma {
            let p: u32 = key
                .trim()
                .parse()
                .map_err(|_| Error::InvalidFunctional(format!("gamma key {key:?} is not an integer p")))?;
            gammas.insert(p, g);
        }
        let f = SymmetricFunctional::new(raw.k, gammas)?;
        if f.is_zero() {
            return Err(Error::InvalidFunctional("all coefficients are zero".into()));
        }
        Ok(f)
    }
}

impl From<SymmetricFunctional> for FunctionalJson {
    fn from(f: SymmetricFunctional) -> Self {
        FunctionalJson {
            k: f.degree,
            gamma: f.gammas.iter().map(|(p, g)| (p.to_string(), *g)).collect(),
        }
    }
}

impl SymmetricFunctional {
    /// Every key `p` must satisfy `2p ≤ K`; coefficients must be finite.
    pub fn new(degree: u32, gammas: BTreeMap<u32, f64>) -> Result<Self> {
        for (&p, g) in &gammas {
            if 2 * p > degree {
                return Err(Error::InvalidFunctional(format!(
                    "term p={p} exceeds degree K={degree}"
                )));
            }
            if !g.is_finite() {
                return Err(Error::InvalidFunctional(format!("gamma for p={p} is not finite")));
            }
        }
        Ok(Self { degree, gammas })
    }

    pub fn from_pairs(degree: u32, pairs: &[(u32, f64)]) -> Result<Self> {
        Self::new(degree, pairs.iter().copied().collect())
    }

    /// The declared zero functional of degree `K`.
    pub fn zero(degree: u32) -> Self {
        Self {
            degree,
            gammas: BTreeMap::new(),
        }
    }

    /// `|a|^{2p}`, the pure term `(a·ā)^p`.
    pub fn modulus_power(p: u32) -> Self {
        Self {
            degree: 2 * p,
            gammas: BTreeMap::from([(p, 1.0)]),
        }
    }

    /// `|a|²`.
    pub fn born() -> Self {
        Self::modulus_power(1)
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn gammas(&self) -> &BTreeMap<u32, f64> {
        &self.gammas
    }

    pub fn gamma(&self, p: u32) -> f64 {
        self.gammas.get(&p).copied().unwrap_or(0.0)
    }

    pub fn is_zero(&self) -> bool {
        self.gammas.values().all(|&g| g == 0.0)
    }

    /// True when only the `ℓ = 0` term `(a·ā)^{K/2}` carries weight.
    pub fn is_pure(&self) -> bool {
        self.gammas.iter().all(|(&p, &g)| g == 0.0 || 2 * p == self.degree)
    }

    /// `(ℓ, p, γ)` for every stored term.
    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        self.gammas.iter().map(move |(&p, &g)| (self.degree - 2 * p, p, g))
    }

    /// Coefficients of the polar form `ρ^K Σ γ'_ℓ cos^ℓ κ`, with
    /// `γ'_ℓ = 2^ℓ γ_{ℓ,p}`. Returned as `(ℓ, γ'_ℓ)`, ascending in `ℓ`.
    pub fn polar_coefficients(&self) -> Vec<(u32, f64)> {
        let mut out: Vec<(u32, f64)> = self
            .terms()
            .map(|(ell, _, g)| (ell, g * 2f64.powi(ell as i32)))
            .collect();
        out.sort_by_key(|&(ell, _)| ell);
        out
    }

    pub fn evaluate(&self, a: Amplitude) -> Result<f64> {
        let (s, q) = symmetric_pair(a)?;
        finite(self.terms().map(|(ell, p, g)| term(g, s, q, ell, p)).sum())
    }

    /// Evaluation through the modulus-phase form; even `K` only.
    pub fn polar_evaluate(&self, rho: f64, kappa: f64) -> Result<f64> {
        if self.degree % 2 == 1 {
            return Err(Error::OddPolarDegree);
        }
        if !rho.is_finite() || !kappa.is_finite() {
            return Err(Error::NonFinite);
        }
        let c = kappa.cos();
        let angular: f64 = self
            .polar_coefficients()
            .into_iter()
            .map(|(ell, g)| g * c.powi(ell as i32))
            .sum();
        finite(rho.powi(self.degree as i32) * angular)
    }

    /// Executable witness that an odd-degree functional vanishes on the
    /// imaginary axis: checks `F(i·r) == 0` exactly on `samples` points
    /// spread log-uniformly over `±[1e-3, 1e3]`.
    pub fn odd_k_vanishes(&self, samples: usize) -> Result<bool> {
        if self.degree.is_multiple_of(2) {
            return Err(Error::NotOddDegree);
        }
        for j in 0..samples {
            let t = if samples > 1 {
                j as f64 / (samples - 1) as f64
            } else {
                0.5
            };
            let mut r = 10f64.powf(-3.0 + 6.0 * t);
            if j % 2 == 1 {
                r = -r;
            }
            if self.evaluate(Amplitude::new(0.0, r))? != 0.0 {
                return Ok(false);
            }
        }
        Ok(true)
    }
}

impl Functional for SymmetricFunctional {
    fn value(&self, a: Amplitude) -> Result<f64> {
        self.evaluate(a)
    }
}

/// Unreduced finite sum `Σ γ_{ℓp} (a+ā)^ℓ (a·ā)^p`; keys `(ℓ, p)` unique.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct GeneralAnsatz {
    terms: BTreeMap<(u32, u32), f64>,
}

impl GeneralAnsatz {
    pub fn new(terms: &[(u32, u32, f64)]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for &(ell, p, g) in terms {
            if !g.is_finite() {
                return Err(Error::InvalidFunctional(format!(
                    "gamma for (l={ell}, p={p}) is not finite"
                )));
            }
            if map.insert((ell, p), g).is_some() {
                return Err(Error::InvalidFunctional(format!("duplicate term (l={ell}, p={p})")));
            }
        }
        Ok(Self { terms: map })
    }

    pub fn terms(&self) -> impl Iterator<Item = (u32, u32, f64)> + '_ {
        self.terms.iter().map(|(&(ell, p), &g)| (ell, p, g))
    }

    pub fn evaluate(&self, a: Amplitude) -> Result<f64> {
        let (s, q) = symmetric_pair(a)?;
        finite(self.terms().map(|(ell, p, g)| term(g, s, q, ell, p)).sum())
    }

    /// Splits the ansatz by degree `K = 2p + ℓ`, one homogeneous functional
    /// per occurring degree, ascending in `K`.
    pub fn reduce_to_homogeneous(&self) -> Vec<SymmetricFunctional> {
        let mut by_degree: BTreeMap<u32, BTreeMap<u32, f64>> = BTreeMap::new();
        for (ell, p, g) in self.terms() {
            by_degree.entry(2 * p + ell).or_default().insert(p, g);
        }
        by_degree
            .into_iter()
            .map(|(degree, gammas)| SymmetricFunctional { degree, gammas })
            .collect()
    }
}

impl Functional for GeneralAnsatz {
    fn value(&self, a: Amplitude) -> Result<f64> {
        self.evaluate(a)
    }
}

/// `Σ_j F(a_j)` over the entries of a representation.
pub fn evaluate_rep<F: Functional + ?Sized>(f: &F, rep: &Representation) -> Result<f64> {
    let values = rep
        .entries()
        .iter()
        .map(|e| f.value(e.amp))
        .collect::<Result<Vec<f64>>>()?;
    finite(compensated_sum(values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::{assert_abs_diff_eq, assert_relative_eq};
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn sf(k: u32, pairs: &[(u32, f64)]) -> SymmetricFunctional {
        SymmetricFunctional::from_pairs(k, pairs).unwrap()
    }

    fn rep(amps: &[Amplitude]) -> Representation {
        Representation::from_amplitudes("A", amps).unwrap()
    }

    #[test]
    fn evaluate_examples() {
        let a = Amplitude::new(1.0, 1.0);
        assert_eq!(sf(2, &[(1, 1.0)]).evaluate(a).unwrap(), 2.0);
        assert_eq!(sf(2, &[(1, 1.0), (0, 1.0)]).evaluate(a).unwrap(), 6.0);
        assert_eq!(sf(1, &[(0, 1.0)]).evaluate(Amplitude::I).unwrap(), 0.0);
    }

    #[test]
    fn evaluate_rep_examples() {
        let born = SymmetricFunctional::born();
        assert_eq!(
            evaluate_rep(&born, &rep(&[Amplitude::ONE, Amplitude::new(0.0, 2.0)])).unwrap(),
            5.0
        );
        assert_eq!(
            evaluate_rep(&born, &rep(&[Amplitude::ZERO, Amplitude::ZERO])).unwrap(),
            0.0
        );
        let quartic = sf(4, &[(2, 1.0)]);
        assert_eq!(
            evaluate_rep(&quartic, &rep(&[Amplitude::ONE, Amplitude::new(1.0, 1.0)])).unwrap(),
            5.0
        );
    }

    #[test]
    fn overflow_and_non_finite() {
        let f = SymmetricFunctional::modulus_power(4);
        assert_eq!(f.evaluate(Amplitude::real(1e80)), Err(Error::MagnitudeOverflow));
        assert_eq!(f.evaluate(Amplitude::new(f64::NAN, 0.0)), Err(Error::NonFinite));
    }

    #[test]
    fn reduce_examples() {
        let g = GeneralAnsatz::new(&[(0, 1, 1.0)]).unwrap();
        let parts = g.reduce_to_homogeneous();
        assert_eq!(parts.len(), 1);
        assert_eq!(parts[0].degree(), 2);

        let g = GeneralAnsatz::new(&[(0, 1, 1.0), (2, 0, 1.0)]).unwrap();
        let parts = g.reduce_to_homogeneous();
        assert_eq!(parts, vec![sf(2, &[(1, 1.0), (0, 1.0)])]);

        let g = GeneralAnsatz::new(&[(0, 1, 1.0), (0, 2, 1.0)]).unwrap();
        let degrees: Vec<u32> = g.reduce_to_homogeneous().iter().map(|f| f.degree()).collect();
        assert_eq!(degrees, vec![2, 4]);

        assert!(GeneralAnsatz::new(&[(0, 1, 1.0), (0, 1, 2.0)]).is_err());
    }

    #[test]
    fn polar_examples() {
        let born = SymmetricFunctional::born();
        for kappa in [-3.0, 0.0, 0.7, 2.5] {
            assert_abs_diff_eq!(born.polar_evaluate(3.0, kappa).unwrap(), 9.0, epsilon = 1e-12);
        }
        let f = sf(2, &[(0, 1.0)]);
        assert_abs_diff_eq!(f.polar_evaluate(1.0, FRAC_PI_2).unwrap(), 0.0, epsilon = 1e-15);
        assert_eq!(f.polar_evaluate(2.0, 0.0).unwrap(), 16.0);
        assert_eq!(sf(3, &[(0, 1.0)]).polar_evaluate(1.0, 0.0), Err(Error::OddPolarDegree));
    }

    #[test]
    fn polar_coefficient_convention() {
        let f = sf(4, &[(0, 0.5), (1, -1.0), (2, 3.0)]);
        assert_eq!(f.polar_coefficients(), vec![(0, 3.0), (2, -4.0), (4, 8.0)]);
    }

    #[test]
    fn odd_k_examples() {
        assert!(sf(1, &[(0, 1.0)]).odd_k_vanishes(100).unwrap());
        assert!(sf(3, &[(0, 2.0), (1, -1.0)]).odd_k_vanishes(100).unwrap());
        assert!(SymmetricFunctional::zero(3).odd_k_vanishes(100).unwrap());
        assert_eq!(SymmetricFunctional::born().odd_k_vanishes(10), Err(Error::NotOddDegree));
    }

    #[test]
    fn rejects_ill_formed() {
        assert!(SymmetricFunctional::from_pairs(2, &[(2, 1.0)]).is_err());
        assert!(SymmetricFunctional::from_pairs(2, &[(1, f64::NAN)]).is_err());
    }

    #[test]
    fn json_shape() {
        let f = sf(2, &[(0, 0.5), (1, 1.0)]);
        let v = serde_json::to_value(&f).unwrap();
        assert_eq!(v, serde_json::json!({"K": 2, "gamma": {"0": 0.5, "1": 1.0}}));
        assert_eq!(serde_json::from_value::<SymmetricFunctional>(v).unwrap(), f);
        assert!(serde_json::from_str::<SymmetricFunctional>(r#"{"K":2,"gamma":{"1":0}}"#).is_err());
        assert!(serde_json::from_str::<SymmetricFunctional>(r#"{"K":2,"gamma":{"x":1}}"#).is_err());
        assert!(serde_json::from_str::<SymmetricFunctional>(r#"{"K":2,"gamma":{"3":1}}"#).is_err());
    }

    fn amp() -> impl Strategy<Value = Amplitude> {
        (-3.0..3.0f64, -3.0..3.0f64).prop_map(|(re, im)| Amplitude::new(re, im))
    }

    fn functional() -> impl Strategy<Value = SymmetricFunctional> {
        (0u32..=K_MAX).prop_flat_map(|k| {
            prop::collection::vec(-2.0..2.0f64, (k / 2 + 1) as usize).prop_map(move |gs| {
                let pairs: Vec<(u32, f64)> = gs.into_iter().enumerate().map(|(p, g)| (p as u32, g)).collect();
                SymmetricFunctional::from_pairs(k, &pairs).unwrap()
            })
        })
    }

    fn scale_of(f: &SymmetricFunctional, a: Amplitude) -> f64 {
        let (s, q) = (2.0 * a.re, a.norm_sqr());
        f.terms()
            .map(|(ell, p, g)| (g * s.powi(ell as i32) * q.powi(p as i32)).abs())
            .sum::<f64>()
            .max(1.0)
    }

    proptest! {
        #[test]
        fn star_invariance(f in functional(), a in amp()) {
            let d = f.evaluate(a.star()).unwrap() - f.evaluate(a).unwrap();
            prop_assert!(d.abs() <= 1e-10 * scale_of(&f, a));
        }

        // tilde maps a+ā = 2Re(a) to 2Im(a), so only the pure term survives it
        #[test]
        fn tilde_invariance_of_pure_terms(p in 0u32..=4, g in -2.0..2.0f64, a in amp()) {
            let f = SymmetricFunctional::from_pairs(2 * p, &[(p, g)]).unwrap();
            let d = f.evaluate(a.tilde()).unwrap() - f.evaluate(a).unwrap();
            prop_assert!(d.abs() <= 1e-10 * scale_of(&f, a));
        }

        #[test]
        fn homogeneity(f in functional(), a in amp(), r in 0.05..4.0f64) {
            let lhs = f.evaluate(a.scale(r)).unwrap();
            let rhs = r.powi(f.degree() as i32) * f.evaluate(a).unwrap();
            let tol = 1e-9 * r.powi(f.degree() as i32) * scale_of(&f, a);
            prop_assert!((lhs - rhs).abs() <= tol, "{} vs {}", lhs, rhs);
        }

        #[test]
        fn polar_matches_direct(f in functional(), a in amp()) {
            prop_assume!(f.degree() % 2 == 0);
            let (rho, kappa) = a.to_polar();
            let direct = f.evaluate(a).unwrap();
            let polar = f.polar_evaluate(rho, kappa).unwrap();
            prop_assert!((direct - polar).abs() <= 1e-10 * scale_of(&f, a));
        }

        #[test]
        fn reduction_is_a_partition(
            raw in prop::collection::btree_map((0u32..5, 0u32..4), -2.0..2.0f64, 1..10),
            a in amp(),
        ) {
            let terms: Vec<(u32, u32, f64)> = raw.iter().map(|(&(l, p), &g)| (l, p, g)).collect();
            let g = GeneralAnsatz::new(&terms).unwrap();
            let parts = g.reduce_to_homogeneous();
            let n_terms: usize = parts.iter().map(|f| f.gammas().len()).sum();
            prop_assert_eq!(n_terms, terms.len());
            for f in &parts {
                for (ell, p, _) in f.terms() {
                    prop_assert_eq!(2 * p + ell, f.degree());
                }
            }
            let whole = g.evaluate(a).unwrap();
            let summed: f64 = parts.iter().map(|f| f.evaluate(a).unwrap()).sum();
            prop_assert!((whole - summed).abs() <= 1e-9 * whole.abs().max(1.0));
        }

        #[test]
        fn odd_degree_vanishes_on_imaginary_axis(
            k in (0u32..4).prop_map(|j| 2 * j + 1),
            gs in prop::collection::vec(-5.0..5.0f64, 4),
            r in -1e3..1e3f64,
        ) {
            let pairs: Vec<(u32, f64)> = (0..=k / 2).map(|p| (p, gs[p as usize])).collect();
            let f = SymmetricFunctional::from_pairs(k, &pairs).unwrap();
            prop_assert_eq!(f.evaluate(Amplitude::new(0.0, r)).unwrap(), 0.0);
        }
    }

    #[test]
    fn homogeneity_of_born_is_exact_for_integers() {
        let born = SymmetricFunctional::born();
        assert_relative_eq!(born.evaluate(Amplitude::new(3.0, 4.0)).unwrap(), 25.0);
    }
}
