//! Numeric search for nontrivial linear maps preserving `Σ_k |a_k|^{2p}`.

use nalgebra::DMatrix;
use num_complex::Complex64;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amplitude::Representation;
use crate::basis::{mixing_strength, normalized_det, BasisChange, MAX_MIXING, SINGULAR_DET};
use crate::error::{Error, Result};
use crate::sampling::{self, complex_gaussian, unit_vector, EngineRng};

use super::cross_term::{certify, CrossTermCertificate};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SearchConfig {
    pub restarts: usize,
    /// Proposals per restart at dimension 2; scaled by `dim²/4` above that.
    pub descent_steps: usize,
    pub nontriviality_floor: f64,
    pub sample_vectors: usize,
    pub rng_seed: u64,
    /// Residual at or below which a nontrivial matrix counts as a preserver.
    pub pass_tol: f64,
    /// Consecutive rejected proposals before the step is halved.
    pub decay_patience: usize,
    pub initial_step: f64,
}

impl Default for SearchConfig {
    fn default() -> Self {
        Self {
            restarts: 200,
            descent_steps: 3000,
            nontriviality_floor: 0.1,
            sample_vectors: 64,
            rng_seed: 0,
            pass_tol: 1e-9,
            decay_patience: 10,
            initial_step: 0.25,
        }
    }
}

impl SearchConfig {
    /// Proposal budget per restart at dimension `dim`.
    pub fn steps_for(&self, dim: usize) -> usize {
        self.descent_steps.saturating_mul((dim * dim).max(4)) / 4
    }

    pub fn validate(&self) -> Result<()> {
        if self.restarts == 0 {
            return Err(Error::InvalidConfig("restarts must be at least 1".into()));
        }
        if self.sample_vectors == 0 {
            return Err(Error::InvalidConfig("sample_vectors must be at least 1".into()));
        }
        if !(self.nontriviality_floor > 0.0) {
            return Err(Error::InvalidConfig("nontriviality_floor must be positive".into()));
        }
        if self.nontriviality_floor >= MAX_MIXING {
            return Err(Error::InfeasibleFloor);
        }
        if self.decay_patience == 0 || !(self.initial_step > 0.0) {
            return Err(Error::InvalidConfig("step schedule must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SearchVerdict {
    PreserverFound,
    NoPreserver,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepResult {
    pub p: u32,
    pub dim: usize,
    pub best_residual: f64,
    pub best_matrix: BasisChange,
    pub verdict: SearchVerdict,
    /// Nontriviality measure of `best_matrix`.
    pub mixing: f64,
    pub floor: f64,
    /// Exact cross-term certificate of `best_matrix` (dimension 2, `p ≥ 2`).
    pub certificate: Option<CrossTermCertificate>,
}

impl SweepResult {
    pub fn admissible(&self) -> bool {
        self.verdict == SearchVerdict::PreserverFound
    }
}

#[derive(Serialize)]
struct CertificateJson<'a> {
    cross_term: Option<f64>,
    exact: Option<String>,
    routes_agree: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    detail: Option<&'a CrossTermCertificate>,
}

#[derive(Serialize)]
struct SweepJson<'a> {
    p: u32,
    dim: usize,
    best_residual: f64,
    verdict: SearchVerdict,
    matrix: &'a BasisChange,
    certificate: CertificateJson<'a>,
    nontriviality: f64,
    floor: f64,
    unitarity_defect: f64,
    /// Dimension > 2 uses the one-mixing-row generalization of the 2×2
    /// nontriviality condition.
    generalized_floor: bool,
}

impl Serialize for SweepResult {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let cert = CertificateJson {
            cross_term: self.certificate.as_ref().map(|c| c.value()),
            exact: self.certificate.as_ref().map(|c| c.closed_form.to_string()),
            routes_agree: self.certificate.as_ref().map(|c| c.agree),
            detail: None,
        };
        SweepJson {
            p: self.p,
            dim: self.dim,
            best_residual: self.best_residual,
            verdict: self.verdict,
            matrix: &self.best_matrix,
            certificate: cert,
            nontriviality: self.mixing,
            floor: self.floor,
            unitarity_defect: self.best_matrix.unitarity_defect(),
            generalized_floor: self.dim > 2,
        }
        .serialize(s)
    }
}

/// `Σ_k |z_k|^{2p}`.
fn power_sum(p: u32, z: &[Complex64]) -> f64 {
    z.iter().map(|w| w.norm_sqr().powi(p as i32)).sum()
}

/// `max_a |Σ_k |(U a)_k|^{2p} − Σ_k |a_k|^{2p}| / max(1, Σ_k |a_k|^{2p})`.
pub fn preservation_residual_vectors(p: u32, u: &BasisChange, vectors: &[Vec<Complex64>]) -> Result<f64> {
    let mut worst = 0.0f64;
    for a in vectors {
        let b = u.apply(a)?;
        let before = power_sum(p, a);
        let r = (power_sum(p, &b) - before).abs() / before.max(1.0);
        worst = if r.is_nan() { f64::INFINITY } else { worst.max(r) };
    }
    Ok(worst)
}

pub fn preservation_residual(p: u32, u: &BasisChange, reps: &[Representation]) -> Result<f64> {
    let vectors: Vec<Vec<Complex64>> = reps
        .iter()
        .map(|r| r.amplitudes().into_iter().map(Complex64::from).collect())
        .collect();
    preservation_residual_vectors(p, u, &vectors)
}

/// Precomputed sample set for repeated objective evaluations.
struct Objective {
    p: u32,
    dim: usize,
    vectors: Vec<Vec<Complex64>>,
    before: Vec<f64>,
}

impl Objective {
    fn new(p: u32, dim: usize, vectors: Vec<Vec<Complex64>>) -> Self {
        let before = vectors.iter().map(|a| power_sum(p, a)).collect();
        Self {
            p,
            dim,
            vectors,
            before,
        }
    }

    /// Per-vector relative errors for the row-major matrix `m`.
    fn errors<'a>(&'a self, m: &'a [Complex64]) -> impl Iterator<Item = f64> + 'a {
        let n = self.dim;
        self.vectors.iter().zip(&self.before).map(move |(a, &before)| {
            let mut after = 0.0;
            for i in 0..n {
                let row = &m[i * n..(i + 1) * n];
                let b: Complex64 = row.iter().zip(a).map(|(u, x)| u * x).sum();
                after += b.norm_sqr().powi(self.p as i32);
            }
            (after - before).abs() / before.max(1.0)
        })
    }

    /// The preservation residual: worst relative error.
    fn max(&self, m: &[Complex64]) -> f64 {
        let mut worst = 0.0f64;
        for r in self.errors(m) {
            if r.is_nan() {
                return f64::INFINITY;
            }
            worst = worst.max(r);
        }
        worst
    }

    /// Smooth surrogate: root-mean-square relative error.
    fn rms(&self, m: &[Complex64]) -> f64 {
        let ss: f64 = self.errors(m).map(|r| r * r).sum();
        let v = (ss / self.vectors.len() as f64).sqrt();
        if v.is_nan() {
            f64::INFINITY
        } else {
            v
        }
    }

    fn eval(&self, stage: Stage, m: &[Complex64]) -> f64 {
        match stage {
            Stage::Smooth => self.rms(m),
            Stage::Max => self.max(m),
        }
    }
}

fn to_dmatrix(dim: usize, m: &[Complex64]) -> DMatrix<Complex64> {
    DMatrix::from_row_slice(dim, dim, m)
}

fn feasible(dim: usize, m: &[Complex64], floor: f64) -> bool {
    let d = to_dmatrix(dim, m);
    mixing_strength(&d) >= floor && normalized_det(&d) > SINGULAR_DET
}

fn normalize_rows(dim: usize, m: &mut [Complex64]) {
    for row in m.chunks_mut(dim) {
        let norm = row.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
        if norm > 0.0 {
            row.iter_mut().for_each(|z| *z /= norm);
        }
    }
}

/// Random feasible start. Odd restarts in dimension > 2 embed a random 2×2
/// block into the identity, mirroring a transposition-like change of two
/// outcomes; the rest are dense complex Gaussian matrices.
fn random_start(dim: usize, floor: f64, restart: usize, rng: &mut EngineRng) -> Vec<Complex64> {
    loop {
        let mut m: Vec<Complex64> = if dim > 2 && restart % 2 == 1 {
            let mut m = vec![Complex64::new(0.0, 0.0); dim * dim];
            for k in 0..dim {
                m[k * dim + k] = Complex64::new(1.0, 0.0);
            }
            let i = rng.random_range(0..dim);
            let j = (i + rng.random_range(1..dim)) % dim;
            for (r, c) in [(i, i), (i, j), (j, i), (j, j)] {
                m[r * dim + c] = complex_gaussian(rng);
            }
            m
        } else {
            (0..dim * dim).map(|_| complex_gaussian(rng)).collect()
        };
        normalize_rows(dim, &mut m);
        if feasible(dim, &m, floor) {
            return m;
        }
    }
}

#[derive(Clone, Copy)]
enum Stage {
    Smooth,
    Max,
}

struct RestartOutcome {
    residual: f64,
    matrix: Vec<Complex64>,
}

/// Derivative-free descent from one start: random complex perturbations
/// (a single entry or the whole matrix, alternating at random), accepted
/// only when feasible and strictly improving. The step grows after a
/// success and halves after `decay_patience` consecutive rejections.
/// The first two thirds of the budget minimize the root-mean-square error,
/// the rest the worst-case error that is reported.
fn descend(obj: &Objective, cfg: &SearchConfig, m: Vec<Complex64>, rng: &mut EngineRng) -> RestartOutcome {
    let total = cfg.steps_for(obj.dim);
    let smooth_steps = total * 2 / 3;
    let (m, step) = descend_stage(obj, cfg, Stage::Smooth, m, cfg.initial_step, smooth_steps, rng);
    let (m, _) = descend_stage(obj, cfg, Stage::Max, m, step, total - smooth_steps, rng);
    RestartOutcome {
        residual: obj.max(&m),
        matrix: m,
    }
}

fn descend_stage(
    obj: &Objective,
    cfg: &SearchConfig,
    stage: Stage,
    mut m: Vec<Complex64>,
    mut step: f64,
    steps: usize,
    rng: &mut EngineRng,
) -> (Vec<Complex64>, f64) {
    let dim = obj.dim;
    let n = dim * dim;
    let mut best = obj.eval(stage, &m);
    let mut rejected = 0usize;
    let mut trial = m.clone();
    for _ in 0..steps {
        if best == 0.0 {
            break;
        }
        trial.copy_from_slice(&m);
        if rng.random_bool(0.5) {
            let k = rng.random_range(0..n);
            trial[k] += complex_gaussian(rng) * step;
        } else {
            let scale = step / (n as f64).sqrt();
            for z in trial.iter_mut() {
                *z += complex_gaussian(rng) * scale;
            }
        }
        let value = obj.eval(stage, &trial);
        if value < best && feasible(dim, &trial, cfg.nontriviality_floor) {
            best = value;
            std::mem::swap(&mut m, &mut trial);
            step *= 1.5;
            rejected = 0;
        } else {
            rejected += 1;
            if rejected >= cfg.decay_patience {
                step *= 0.5;
                rejected = 0;
            }
        }
    }
    (m, step)
}

fn stream_id(p: u32, dim: usize, restart: usize) -> u64 {
    ((p as u64) << 48) | ((dim as u64) << 32) | restart as u64
}

/// Multi-restart search for a nontrivial `U` with `Σ|(Ua)_k|^{2p} = Σ|a_k|^{2p}`
/// under the floor `mixing_strength(U) ≥ δ`. Deterministic in
/// `(cfg.rng_seed, p, dim)`.
pub fn preserver_search(p: u32, dim: usize, cfg: &SearchConfig) -> Result<SweepResult> {
    cfg.validate()?;
    if p < 1 {
        return Err(Error::InvalidConfig("exponent p must be at least 1".into()));
    }
    if dim < 2 {
        return Err(Error::InvalidConfig("dimension must be at least 2".into()));
    }
    let mut vrng = sampling::stream(cfg.rng_seed, stream_id(p, dim, 0) | (1 << 63));
    let vectors = (0..cfg.sample_vectors).map(|_| unit_vector(&mut vrng, dim)).collect();
    let obj = Objective::new(p, dim, vectors);

    let (_, best) = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = sampling::stream(cfg.rng_seed, stream_id(p, dim, r));
            let start = random_start(dim, cfg.nontriviality_floor, r, &mut rng);
            (r, descend(&obj, cfg, start, &mut rng))
        })
        .reduce_with(|a, b| {
            // lowest residual, ties to the earlier restart
            if (b.1.residual, b.0) < (a.1.residual, a.0) {
                b
            } else {
                a
            }
        })
        .expect("restarts >= 1");

    let best_matrix = BasisChange::new(to_dmatrix(dim, &best.matrix))?;
    let mixing = mixing_strength(best_matrix.matrix());
    let verdict = if best.residual <= cfg.pass_tol && !best_matrix.triviality().is_trivial() {
        SearchVerdict::PreserverFound
    } else {
        SearchVerdict::NoPreserver
    };
    let certificate = if dim == 2 && p >= 2 {
        Some(certify(p, &best_matrix)?)
    } else {
        None
    };
    Ok(SweepResult {
        p,
        dim,
        best_residual: best.residual,
        best_matrix,
        verdict,
        mixing,
        floor: cfg.nontriviality_floor,
        certificate,
    })
}

/// One search per exponent.
pub fn exponent_sweep(p_list: &[u32], dim: usize, cfg: &SearchConfig) -> Result<Vec<SweepResult>> {
    if p_list.is_empty() {
        return Err(Error::InvalidConfig("empty exponent list".into()));
    }
    p_list.iter().map(|&p| preserver_search(p, dim, cfg)).collect()
}

/// Exponents whose search found a nontrivial preserver.
pub fn admissible_set(results: &[SweepResult]) -> Vec<u32> {
    results.iter().filter(|r| r.admissible()).map(|r| r.p).collect()
}

/// True iff `U` preserves `Σ|a_k|²` on `trials` seeded random vectors to
/// 1e-10 and the induced base-vector change `(Uᵀ)^{−1}` undoes the
/// coordinate change (`Uᵀ·(Uᵀ)^{−1} = I` to 1e-10).
pub fn unitarity_witness(u: &BasisChange, trials: usize, seed: u64) -> Result<bool> {
    let dim = u.dim();
    let mut rng = sampling::stream(seed, 0);
    let vectors: Vec<Vec<Complex64>> = (0..trials).map(|_| unit_vector(&mut rng, dim)).collect();
    let preserves = preservation_residual_vectors(1, u, &vectors)? <= 1e-10;

    let ut = u.matrix().transpose();
    let inv = ut.clone().try_inverse().ok_or(Error::NotABasisChange)?;
    let eye = DMatrix::<Complex64>::identity(dim, dim);
    let consistent = (ut * inv - eye).iter().all(|z| z.norm() <= 1e-10);
    Ok(preserves && consistent)
}
