//! Linear coordinate changes between instruments and their triviality
//! classes.

use std::f64::consts::FRAC_1_SQRT_2;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::amplitude::Amplitude;
use crate::error::{Error, Result};
use crate::sampling::{self, complex_gaussian};

/// Relative magnitude below which an entry counts as absent.
pub const DEFAULT_EPS_TRIVIAL: f64 = 1e-9;

/// `|det|` floor after scaling every row to unit norm.
pub const SINGULAR_DET: f64 = 1e-12;

/// Largest achievable value of [`mixing_strength`] in any dimension.
pub const MAX_MIXING: f64 = FRAC_1_SQRT_2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Triviality {
    /// Mixes outcomes in some row, yet leaves another outcome's coordinate
    /// untouched up to scale (a 2×2 shear such as `[[1,1],[0,1]]`).
    IdentityLike,
    /// Exactly one significant entry per row and column: relabelling and
    /// rescaling of the same instrument.
    GeneralizedPermutation,
    /// Genuine mixing of outcomes.
    Nontrivial,
}

impl Triviality {
    pub fn is_trivial(self) -> bool {
        self != Triviality::Nontrivial
    }
}

/// A square, invertible complex matrix acting on coordinate vectors.
#[derive(Debug, Clone, PartialEq)]
pub struct BasisChange {
    matrix: DMatrix<Complex64>,
    triviality: Triviality,
}

impl BasisChange {
    pub fn new(matrix: DMatrix<Complex64>) -> Result<Self> {
        if matrix.nrows() == 0 || matrix.nrows() != matrix.ncols() {
            return Err(Error::NotABasisChange);
        }
        if matrix.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        if normalized_det(&matrix) <= SINGULAR_DET {
            return Err(Error::NotABasisChange);
        }
        let triviality = classify(&matrix, DEFAULT_EPS_TRIVIAL);
        Ok(Self { matrix, triviality })
    }

    /// Row-major nested slices.
    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let n = rows.len();
        if rows.iter().any(|r| r.len() != n) {
            return Err(Error::NotABasisChange);
        }
        Self::new(DMatrix::from_fn(n, n, |i, j| rows[i][j]))
    }

    pub fn from_real_rows(rows: &[&[f64]]) -> Result<Self> {
        let rows: Vec<Vec<Complex64>> = rows
            .iter()
            .map(|r| r.iter().map(|&x| Complex64::new(x, 0.0)).collect())
            .collect();
        Self::from_rows(&rows)
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::new(DMatrix::identity(dim, dim))
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<Complex64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<Complex64> {
        self.matrix
    }

    pub fn entry(&self, i: usize, j: usize) -> Complex64 {
        self.matrix[(i, j)]
    }

    pub fn triviality(&self) -> Triviality {
        self.triviality
    }

    /// `b = U·a`.
    pub fn apply(&self, a: &[Complex64]) -> Result<Vec<Complex64>> {
        let n = self.dim();
        if a.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: a.len(),
            });
        }
        Ok((0..n)
            .map(|i| (0..n).map(|j| self.matrix[(i, j)] * a[j]).sum())
            .collect())
    }

    pub fn apply_amplitudes(&self, a: &[Amplitude]) -> Result<Vec<Amplitude>> {
        let z: Vec<Complex64> = a.iter().map(|x| x.to_complex()).collect();
        Ok(self.apply(&z)?.into_iter().map(Amplitude::from).collect())
    }

    /// `‖U*ᵀU − I‖_max`.
    pub fn unitarity_defect(&self) -> f64 {
        let n = self.dim();
        let gram = self.matrix.adjoint() * &self.matrix;
        let eye = DMatrix::<Complex64>::identity(n, n);
        (gram - eye).iter().map(|z| z.norm()).fold(0.0, f64::max)
    }

    /// Nested `[[{"re","im"}, …], …]` rows.
    pub fn to_rows(&self) -> Vec<Vec<Amplitude>> {
        let n = self.dim();
        (0..n)
            .map(|i| (0..n).map(|j| self.matrix[(i, j)].into()).collect())
            .collect()
    }
}

/// A matrix entry: `{"re", "im"}` or a bare real number.
#[derive(Deserialize)]
#[serde(untagged)]
enum EntryJson {
    Complex(Amplitude),
    Real(f64),
}

impl From<EntryJson> for Complex64 {
    fn from(e: EntryJson) -> Self {
        match e {
            EntryJson::Complex(a) => a.into(),
            EntryJson::Real(x) => Complex64::new(x, 0.0),
        }
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum MatrixJson {
    Rows(Vec<Vec<EntryJson>>),
    Wrapped { matrix: Vec<Vec<EntryJson>> },
}

impl Serialize for BasisChange {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        self.to_rows().serialize(s)
    }
}

impl<'de> Deserialize<'de> for BasisChange {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let rows = match MatrixJson::deserialize(d)? {
            MatrixJson::Rows(r) | MatrixJson::Wrapped { matrix: r } => r,
        };
        let rows: Vec<Vec<Complex64>> = rows
            .into_iter()
            .map(|r| r.into_iter().map(Complex64::from).collect())
            .collect();
        BasisChange::from_rows(&rows).map_err(serde::de::Error::custom)
    }
}

/// Row 2-norms, floored away from zero.
fn row_norms(m: &DMatrix<Complex64>) -> Vec<f64> {
    m.row_iter()
        .map(|r| r.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt())
        .collect()
}

/// `|det|` of the matrix with each row scaled to unit norm.
pub fn normalized_det(m: &DMatrix<Complex64>) -> f64 {
    let norms = row_norms(m);
    if norms.contains(&0.0) {
        return 0.0;
    }
    let mut scaled = m.clone();
    for (i, r) in norms.iter().enumerate() {
        scaled.row_mut(i).iter_mut().for_each(|z| *z /= *r);
    }
    scaled.determinant().norm()
}

/// Magnitudes of each row after scaling it to unit norm.
fn normalized_magnitudes(m: &DMatrix<Complex64>) -> Vec<Vec<f64>> {
    let norms = row_norms(m);
    m.row_iter()
        .zip(norms)
        .map(|(row, r)| row.iter().map(|z| if r > 0.0 { z.norm() / r } else { 0.0 }).collect())
        .collect()
}

fn classify(m: &DMatrix<Complex64>, eps: f64) -> Triviality {
    let mags = normalized_magnitudes(m);
    let n = mags.len();
    let significant = |i: usize, j: usize| mags[i][j] > eps;
    let row_counts: Vec<usize> = (0..n).map(|i| (0..n).filter(|&j| significant(i, j)).count()).collect();
    let col_counts: Vec<usize> = (0..n).map(|j| (0..n).filter(|&i| significant(i, j)).count()).collect();
    if row_counts.iter().all(|&c| c == 1) && col_counts.iter().all(|&c| c == 1) {
        return Triviality::GeneralizedPermutation;
    }
    let mixing_rows = row_counts.iter().filter(|&&c| c >= 2).count();
    let nontrivial = if n == 2 { mixing_rows == 2 } else { mixing_rows >= 1 };
    if nontrivial {
        Triviality::Nontrivial
    } else {
        Triviality::IdentityLike
    }
}

/// Classification with an explicit threshold `eps_trivial` (relative to the
/// row norm).
pub fn classify_triviality(u: &BasisChange, eps_trivial: f64) -> Triviality {
    classify(u.matrix(), eps_trivial)
}

fn second_largest(row: &[f64]) -> f64 {
    let mut top = [0.0f64; 2];
    for &x in row {
        if x > top[0] {
            top = [x, top[0]];
        } else if x > top[1] {
            top[1] = x;
        }
    }
    top[1]
}

/// Continuous nontriviality measure. In dimension 2 it is the smaller of the
/// two rows' second-largest normalized magnitudes (both rows must mix); in
/// higher dimension the largest such value over rows (one mixing row
/// suffices). Never exceeds [`MAX_MIXING`].
pub fn mixing_strength(m: &DMatrix<Complex64>) -> f64 {
    let per_row = normalized_magnitudes(m).into_iter().map(|r| second_largest(&r));
    if m.nrows() == 2 {
        per_row.fold(f64::INFINITY, f64::min)
    } else {
        per_row.fold(0.0, f64::max)
    }
}

/// Haar-distributed unitary: QR of a complex Gaussian matrix with the
/// phases of `R`'s diagonal folded back into `Q`.
pub fn random_unitary(dim: usize, seed: u64) -> Result<BasisChange> {
    if dim == 0 {
        return Err(Error::InvalidConfig("dimension must be at least 1".into()));
    }
    let mut rng = sampling::stream(seed, 0);
    let g = DMatrix::from_fn(dim, dim, |_, _| complex_gaussian(&mut rng));
    let qr = g.qr();
    let (mut q, r) = (qr.q(), qr.r());
    for j in 0..dim {
        let d = r[(j, j)];
        let phase = if d.norm() > 0.0 {
            d / d.norm()
        } else {
            Complex64::new(1.0, 0.0)
        };
        q.column_mut(j).iter_mut().for_each(|z| *z *= phase);
    }
    BasisChange::new(q)
}
