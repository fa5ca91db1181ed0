//! Exact extraction of the `(x x̄)^{p−1}(y ȳ)` coefficient of
//! `Σ_k |(U·(x, y))_k|^{2p} − |x|^{2p} − |y|^{2p}` for a 2×2 change `U`.
//!
//! Two independent routes are provided: the closed form
//! `p²(|a|^{2p−2}|b|² + |c|^{2p−2}|d|²)` and a brute-force expansion of the
//! polynomial in the four independent symbols `x, x̄, y, ȳ`. Matrix entries
//! are converted to rationals exactly, so both routes run in exact
//! arithmetic.

use std::collections::BTreeMap;
use std::ops::{Add, Mul, Neg};

use num_bigint::BigInt;
use num_complex::Complex64;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::basis::BasisChange;
use crate::error::{Error, Result};

/// Exact complex rational `re + i·im`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GaussianRational {
    pub re: BigRational,
    pub im: BigRational,
}

impl GaussianRational {
    pub fn new(re: BigRational, im: BigRational) -> Self {
        Self { re, im }
    }

    pub fn from_integers(re: i64, im: i64) -> Self {
        Self::new(
            BigRational::from_integer(BigInt::from(re)),
            BigRational::from_integer(BigInt::from(im)),
        )
    }

    /// Exact conversion of a double-precision complex number.
    pub fn from_complex(z: Complex64) -> Result<Self> {
        let conv = |x: f64| BigRational::from_float(x).ok_or(Error::NonFinite);
        Ok(Self::new(conv(z.re)?, conv(z.im)?))
    }

    pub fn zero() -> Self {
        Self::new(BigRational::zero(), BigRational::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.re.is_zero() && self.im.is_zero()
    }

    pub fn conj(&self) -> Self {
        Self::new(self.re.clone(), -self.im.clone())
    }

    /// `|z|²`.
    pub fn norm_sqr(&self) -> BigRational {
        &self.re * &self.re + &self.im * &self.im
    }
}

impl Add for &GaussianRational {
    type Output = GaussianRational;
    fn add(self, rhs: Self) -> GaussianRational {
        GaussianRational::new(&self.re + &rhs.re, &self.im + &rhs.im)
    }
}

impl Mul for &GaussianRational {
    type Output = GaussianRational;
    fn mul(self, rhs: Self) -> GaussianRational {
        GaussianRational::new(
            &self.re * &rhs.re - &self.im * &rhs.im,
            &self.re * &rhs.im + &self.im * &rhs.re,
        )
    }
}

impl Neg for &GaussianRational {
    type Output = GaussianRational;
    fn neg(self) -> GaussianRational {
        GaussianRational::new(-self.re.clone(), -self.im.clone())
    }
}

/// Exponents of `(x, x̄, y, ȳ)`.
type Monomial = [u32; 4];

/// Sparse polynomial in the four independent symbols `x, x̄, y, ȳ`.
#[derive(Debug, Clone, Default, PartialEq)]
struct Poly {
    terms: BTreeMap<Monomial, GaussianRational>,
}

impl Poly {
    fn one() -> Self {
        Self::monomial([0; 4], GaussianRational::new(BigRational::one(), BigRational::zero()))
    }

    fn monomial(m: Monomial, c: GaussianRational) -> Self {
        let mut terms = BTreeMap::new();
        if !c.is_zero() {
            terms.insert(m, c);
        }
        Self { terms }
    }

    /// `u·s + v·t` for symbol indices `s`, `t`.
    fn linear(u: &GaussianRational, s: usize, v: &GaussianRational, t: usize) -> Self {
        let mut e_s = [0; 4];
        e_s[s] = 1;
        let mut e_t = [0; 4];
        e_t[t] = 1;
        Self::monomial(e_s, u.clone()).add(&Self::monomial(e_t, v.clone()))
    }

    fn accumulate(&mut self, m: Monomial, c: &GaussianRational) {
        let entry = self.terms.entry(m).or_insert_with(GaussianRational::zero);
        *entry = &*entry + c;
        if entry.is_zero() {
            self.terms.remove(&m);
        }
    }

    fn add(&self, other: &Poly) -> Poly {
        let mut out = self.clone();
        for (m, c) in &other.terms {
            out.accumulate(*m, c);
        }
        out
    }

    fn neg(&self) -> Poly {
        Poly {
            terms: self.terms.iter().map(|(m, c)| (*m, -c)).collect(),
        }
    }

    fn mul(&self, other: &Poly) -> Poly {
        let mut out = Poly::default();
        for (m1, c1) in &self.terms {
            for (m2, c2) in &other.terms {
                let m = [m1[0] + m2[0], m1[1] + m2[1], m1[2] + m2[2], m1[3] + m2[3]];
                out.accumulate(m, &(c1 * c2));
            }
        }
        out
    }

    fn pow(&self, n: u32) -> Poly {
        (0..n).fold(Poly::one(), |acc, _| acc.mul(self))
    }

    fn coefficient(&self, m: Monomial) -> GaussianRational {
        self.terms.get(&m).cloned().unwrap_or_else(GaussianRational::zero)
    }
}

const X: usize = 0;
const XBAR: usize = 1;
const Y: usize = 2;
const YBAR: usize = 3;

fn exact_entries(u: &BasisChange) -> Result<[GaussianRational; 4]> {
    if u.dim() != 2 {
        return Err(Error::CrossTermDimension);
    }
    Ok([
        GaussianRational::from_complex(u.entry(0, 0))?,
        GaussianRational::from_complex(u.entry(0, 1))?,
        GaussianRational::from_complex(u.entry(1, 0))?,
        GaussianRational::from_complex(u.entry(1, 1))?,
    ])
}

fn check_exponent(p: u32) -> Result<()> {
    if p < 2 {
        Err(Error::CrossTermExponent)
    } else {
        Ok(())
    }
}

/// Closed form `p²(|a|^{2p−2}|b|² + |c|^{2p−2}|d|²)` on exact entries.
pub fn closed_form(p: u32, entries: &[GaussianRational; 4]) -> Result<BigRational> {
    check_exponent(p)?;
    let [a, b, c, d] = entries;
    let pow = |z: &BigRational, n: u32| (0..n).fold(BigRational::one(), |acc, _| acc * z);
    let p_sq = BigRational::from_integer(BigInt::from(p) * BigInt::from(p));
    Ok(p_sq * (pow(&a.norm_sqr(), p - 1) * b.norm_sqr() + pow(&c.norm_sqr(), p - 1) * d.norm_sqr()))
}

/// Brute-force multivariate expansion; returns the full complex
/// coefficient (its imaginary part is zero for any input).
pub fn brute_force(p: u32, entries: &[GaussianRational; 4]) -> Result<GaussianRational> {
    check_exponent(p)?;
    let [a, b, c, d] = entries;
    let row = |u: &GaussianRational, v: &GaussianRational| {
        let z = Poly::linear(u, X, v, Y);
        let zbar = Poly::linear(&u.conj(), XBAR, &v.conj(), YBAR);
        z.pow(p).mul(&zbar.pow(p))
    };
    let one = GaussianRational::new(BigRational::one(), BigRational::zero());
    let identity = Poly::monomial([p, p, 0, 0], one.clone()).add(&Poly::monomial([0, 0, p, p], one));
    let diff = row(a, b).add(&row(c, d)).add(&identity.neg());
    Ok(diff.coefficient([p - 1, p - 1, 1, 1]))
}

/// Closed-form cross-term coefficient of `U`, exact.
pub fn cross_term_coefficient(p: u32, u: &BasisChange) -> Result<BigRational> {
    closed_form(p, &exact_entries(u)?)
}

fn ser_rational<S: Serializer>(r: &BigRational, s: S) -> std::result::Result<S::Ok, S::Error> {
    s.serialize_str(&r.to_string())
}

/// Both routes side by side.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CrossTermCertificate {
    pub p: u32,
    #[serde(serialize_with = "ser_rational")]
    pub closed_form: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub brute_force: BigRational,
    #[serde(serialize_with = "ser_rational")]
    pub brute_force_imag: BigRational,
    pub agree: bool,
    /// True iff `a·b = 0 = c·d`.
    pub trivial_pattern: bool,
}

impl CrossTermCertificate {
    pub fn value(&self) -> f64 {
        self.closed_form.to_f64().unwrap_or(f64::NAN)
    }

    pub fn vanishes(&self) -> bool {
        self.closed_form.is_zero()
    }
}

pub fn certify(p: u32, u: &BasisChange) -> Result<CrossTermCertificate> {
    certify_exact(p, &exact_entries(u)?)
}

pub fn certify_exact(p: u32, entries: &[GaussianRational; 4]) -> Result<CrossTermCertificate> {
    let closed = closed_form(p, entries)?;
    let brute = brute_force(p, entries)?;
    let [a, b, c, d] = entries;
    let trivial_pattern = (a * b).is_zero() && (c * d).is_zero();
    Ok(CrossTermCertificate {
        p,
        agree: brute.im.is_zero() && brute.re == closed,
        closed_form: closed,
        brute_force: brute.re,
        brute_force_imag: brute.im,
        trivial_pattern,
    })
}
