//! Complex amplitudes, the two involutions, polar forms, labelled
//! representations and the frequency map.

use std::collections::HashSet;
use std::f64::consts::PI;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A complex coefficient `re + i·im`.
///
/// Components are expected to be finite; [`Amplitude::try_new`] and every
/// fallible consumer reject NaN and infinities.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct Amplitude {
    pub re: f64,
    pub im: f64,
}

impl Amplitude {
    pub const ZERO: Amplitude = Amplitude { re: 0.0, im: 0.0 };
    pub const ONE: Amplitude = Amplitude { re: 1.0, im: 0.0 };
    pub const I: Amplitude = Amplitude { re: 0.0, im: 1.0 };

    pub const fn new(re: f64, im: f64) -> Self {
        Self { re, im }
    }

    pub const fn real(re: f64) -> Self {
        Self { re, im: 0.0 }
    }

    pub fn try_new(re: f64, im: f64) -> Result<Self> {
        let a = Self { re, im };
        a.check_finite()?;
        Ok(a)
    }

    pub fn from_polar(rho: f64, kappa: f64) -> Self {
        let (s, c) = kappa.sin_cos();
        Self::new(rho * c, rho * s)
    }

    pub fn is_finite(&self) -> bool {
        self.re.is_finite() && self.im.is_finite()
    }

    pub(crate) fn check_finite(&self) -> Result<()> {
        if self.is_finite() {
            Ok(())
        } else {
            Err(Error::NonFinite)
        }
    }

    /// Complex conjugation, `(n + im) ↦ (n − im)`.
    pub fn star(self) -> Self {
        Self::new(self.re, -self.im)
    }

    /// Component swap, `(n + im) ↦ (m + in)`. Coincides with `i·star(a)`.
    pub fn tilde(self) -> Self {
        Self::new(self.im, self.re)
    }

    /// `|a|²`, i.e. `a·ā`.
    pub fn norm_sqr(self) -> f64 {
        self.re * self.re + self.im * self.im
    }

    pub fn modulus(self) -> f64 {
        self.re.hypot(self.im)
    }

    /// `(rho, kappa)` with `kappa ∈ (−π, π]`; the phase of zero is 0.
    pub fn to_polar(self) -> (f64, f64) {
        let rho = self.modulus();
        if rho == 0.0 {
            return (0.0, 0.0);
        }
        let mut kappa = self.im.atan2(self.re);
        // atan2 yields −π for (negative, −0.0)
        if kappa <= -PI {
            kappa = PI;
        }
        (rho, kappa)
    }

    pub fn scale(self, r: f64) -> Self {
        Self::new(self.re * r, self.im * r)
    }

    pub fn to_complex(self) -> Complex64 {
        Complex64::new(self.re, self.im)
    }
}

impl From<Complex64> for Amplitude {
    fn from(z: Complex64) -> Self {
        Self::new(z.re, z.im)
    }
}

impl From<Amplitude> for Complex64 {
    fn from(a: Amplitude) -> Self {
        a.to_complex()
    }
}

impl From<f64> for Amplitude {
    fn from(re: f64) -> Self {
        Self::real(re)
    }
}

impl Add for Amplitude {
    type Output = Amplitude;
    fn add(self, rhs: Self) -> Self {
        Self::new(self.re + rhs.re, self.im + rhs.im)
    }
}

impl Sub for Amplitude {
    type Output = Amplitude;
    fn sub(self, rhs: Self) -> Self {
        Self::new(self.re - rhs.re, self.im - rhs.im)
    }
}

impl Mul for Amplitude {
    type Output = Amplitude;
    fn mul(self, rhs: Self) -> Self {
        Self::new(self.re * rhs.re - self.im * rhs.im, self.re * rhs.im + self.im * rhs.re)
    }
}

impl Neg for Amplitude {
    type Output = Amplitude;
    fn neg(self) -> Self {
        Self::new(-self.re, -self.im)
    }
}

impl fmt::Display for Amplitude {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.im.is_sign_negative() {
            write!(f, "{}-{}i", self.re, -self.im)
        } else {
            write!(f, "{}+{}i", self.re, self.im)
        }
    }
}

/// One labelled coefficient of a representation.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Entry {
    pub label: String,
    #[serde(flatten)]
    pub amp: Amplitude,
}

#[derive(Deserialize)]
struct RawRepresentation {
    basis: String,
    entries: Vec<Entry>,
}

/// A state expanded in the eigen-basis of one instrument: an ordered list of
/// amplitudes attached to distinguishable outcome labels.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawRepresentation")]
pub struct Representation {
    basis: String,
    entries: Vec<Entry>,
}

impl TryFrom<RawRepresentation> for Representation {
    type Error = Error;
    fn try_from(raw: RawRepresentation) -> Result<Self> {
        Representation::new(raw.basis, raw.entries)
    }
}

impl Representation {
    pub fn new(basis: impl Into<String>, entries: Vec<Entry>) -> Result<Self> {
        if entries.is_empty() {
            return Err(Error::InvalidRepresentation("no entries".into()));
        }
        let mut seen = HashSet::with_capacity(entries.len());
        for e in &entries {
            if !seen.insert(e.label.as_str()) {
                return Err(Error::InvalidRepresentation(format!(
                    "duplicate outcome label {:?}",
                    e.label
                )));
            }
            e.amp.check_finite()?;
        }
        Ok(Self {
            basis: basis.into(),
            entries,
        })
    }

    /// Builds a representation with labels `0, 1, 2, …`.
    pub fn from_amplitudes(basis: impl Into<String>, amps: &[Amplitude]) -> Result<Self> {
        let entries = amps
            .iter()
            .enumerate()
            .map(|(k, &amp)| Entry {
                label: k.to_string(),
                amp,
            })
            .collect();
        Self::new(basis, entries)
    }

    pub fn basis(&self) -> &str {
        &self.basis
    }

    pub fn entries(&self) -> &[Entry] {
        &self.entries
    }

    pub fn dim(&self) -> usize {
        self.entries.len()
    }

    pub fn labels(&self) -> impl Iterator<Item = &str> {
        self.entries.iter().map(|e| e.label.as_str())
    }

    pub fn amplitudes(&self) -> Vec<Amplitude> {
        self.entries.iter().map(|e| e.amp).collect()
    }

    /// Multiplies every coefficient by `c`.
    pub fn scaled(&self, c: Amplitude) -> Self {
        Self {
            basis: self.basis.clone(),
            entries: self
                .entries
                .iter()
                .map(|e| Entry {
                    label: e.label.clone(),
                    amp: c * e.amp,
                })
                .collect(),
        }
    }

    /// Same labels, new coefficients, new basis id.
    pub fn with_amplitudes(&self, basis: impl Into<String>, amps: &[Amplitude]) -> Result<Self> {
        if amps.len() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                got: amps.len(),
            });
        }
        let entries = self
            .entries
            .iter()
            .zip(amps)
            .map(|(e, &amp)| Entry {
                label: e.label.clone(),
                amp,
            })
            .collect();
        Self::new(basis, entries)
    }

    /// The single-entry representation holding only entry `k`.
    pub fn single(&self, k: usize) -> Self {
        Self {
            basis: self.basis.clone(),
            entries: vec![self.entries[k].clone()],
        }
    }
}

/// Neumaier-compensated sum.
pub(crate) fn compensated_sum(values: impl IntoIterator<Item = f64>) -> f64 {
    let mut sum = 0.0f64;
    let mut comp = 0.0f64;
    for v in values {
        let t = sum + v;
        if sum.abs() >= v.abs() {
            comp += (sum - t) + v;
        } else {
            comp += (v - t) + sum;
        }
        sum = t;
    }
    sum + comp
}

/// `ν_k = |a_k|² / Σ_j |a_j|²`.
pub fn born_frequencies(rep: &Representation) -> Result<Vec<f64>> {
    let weights: Vec<f64> = rep.entries.iter().map(|e| e.amp.norm_sqr()).collect();
    let total = compensated_sum(weights.iter().copied());
    if total == 0.0 {
        return Err(Error::DegenerateRepresentation);
    }
    if !total.is_finite() {
        return Err(Error::MagnitudeOverflow);
    }
    Ok(weights.into_iter().map(|w| w / total).collect())
}
