//! Numeric residuals for the statistical-length axioms.
//!
//! Each check samples seeded inputs, measures how far a candidate functional
//! is from satisfying one axiom, and reports the worst case together with
//! the inputs that produced it.

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::amplitude::{Amplitude, Representation};
use crate::basis::BasisChange;
use crate::error::{Error, Result};
use crate::functional::{evaluate_rep, Functional};
use crate::sampling::{self, clipped_amplitude, unit_vector};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AxiomConfig {
    pub tol_pass: f64,
    pub sample_count: usize,
    pub rng_seed: u64,
    pub amplitude_scale: f64,
}

impl Default for AxiomConfig {
    fn default() -> Self {
        Self {
            tol_pass: 1e-9,
            sample_count: 256,
            rng_seed: 0,
            amplitude_scale: 1.0,
        }
    }
}

impl AxiomConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.tol_pass > 0.0) {
            return Err(Error::InvalidConfig("tol_pass must be positive".into()));
        }
        if self.sample_count == 0 {
            return Err(Error::InvalidConfig("sample_count must be at least 1".into()));
        }
        if !(self.amplitude_scale > 0.0 && self.amplitude_scale.is_finite()) {
            return Err(Error::InvalidConfig("amplitude_scale must be positive".into()));
        }
        Ok(())
    }

    fn amplitudes(&self, stream: u64) -> Vec<Amplitude> {
        let mut rng = sampling::stream(self.rng_seed, stream);
        (0..self.sample_count)
            .map(|_| clipped_amplitude(&mut rng, self.amplitude_scale))
            .collect()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AxiomName {
    Additivity,
    Scalability,
    Involution,
    DeviceIndependence,
    Cauchy,
}

impl AxiomName {
    pub fn as_str(self) -> &'static str {
        match self {
            AxiomName::Additivity => "additivity",
            AxiomName::Scalability => "scalability",
            AxiomName::Involution => "involution",
            AxiomName::DeviceIndependence => "device_independence",
            AxiomName::Cauchy => "cauchy",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Pass,
    Fail,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ResidualReport {
    pub axiom: AxiomName,
    pub max_residual: f64,
    pub verdict: Verdict,
    pub seed: u64,
    pub witness: Value,
}

impl ResidualReport {
    fn new(axiom: AxiomName, max_residual: f64, tol: f64, seed: u64, witness: Value) -> Self {
        let verdict = if max_residual <= tol {
            Verdict::Pass
        } else {
            Verdict::Fail
        };
        Self {
            axiom,
            max_residual,
            verdict,
            seed,
            witness,
        }
    }

    pub fn passed(&self) -> bool {
        self.verdict == Verdict::Pass
    }
}

fn amp_json(a: Amplitude) -> Value {
    json!({"re": a.re, "im": a.im})
}

fn amps_json(a: &[Amplitude]) -> Value {
    Value::Array(a.iter().copied().map(amp_json).collect())
}

/// Tracks the running maximum and the inputs that produced it.
struct Worst {
    residual: f64,
    witness: Value,
}

impl Worst {
    fn new() -> Self {
        Self {
            residual: -1.0,
            witness: Value::Null,
        }
    }

    fn residual(&self) -> f64 {
        self.residual.max(0.0)
    }

    fn offer(&mut self, residual: f64, witness: impl FnOnce() -> Value) {
        // NaN counts as the worst possible outcome
        if residual.is_nan() || residual > self.residual {
            self.residual = if residual.is_nan() { f64::INFINITY } else { residual };
            self.witness = witness();
        }
    }
}

fn median(mut xs: Vec<f64>) -> Option<f64> {
    if xs.is_empty() {
        return None;
    }
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    Some(if n % 2 == 1 {
        xs[n / 2]
    } else {
        0.5 * (xs[n / 2 - 1] + xs[n / 2])
    })
}

/// Scalability residual for the scalar `c` on the given amplitudes.
///
/// For every pair `(a, a′)` with `F(a)·F(a′) ≠ 0` the ratio test
/// `|F(ca)F(a′) − F(a)F(ca′)| / (|F(ca)F(a′)| + |F(a)F(ca′)|)` vanishes iff a
/// single `const(c)` serves both. The implied constant is the median of
/// `F(ca)/F(a)` and is reported in the witness.
pub fn scaling_residual_on<F: Functional + ?Sized>(
    f: &F,
    c: Amplitude,
    samples: &[Amplitude],
    tol: f64,
    seed: u64,
) -> Result<ResidualReport> {
    c.check_finite()?;
    if c.norm_sqr() == 0.0 {
        return Err(Error::ZeroScale);
    }
    let base = samples.iter().map(|&a| f.value(a)).collect::<Result<Vec<_>>>()?;
    let scaled = samples.iter().map(|&a| f.value(c * a)).collect::<Result<Vec<_>>>()?;

    let mut worst = Worst::new();
    for i in 0..samples.len() {
        if base[i] == 0.0 {
            continue;
        }
        for j in (i + 1)..samples.len() {
            if base[j] == 0.0 {
                continue;
            }
            let lhs = scaled[i] * base[j];
            let rhs = base[i] * scaled[j];
            let den = lhs.abs() + rhs.abs();
            if den == 0.0 {
                continue;
            }
            worst.offer(
                (lhs - rhs).abs() / den,
                || json!({"a": amp_json(samples[i]), "a_prime": amp_json(samples[j])}),
            );
        }
    }
    let implied = median(
        base.iter()
            .zip(&scaled)
            .filter(|(b, _)| **b != 0.0)
            .map(|(b, s)| s / b)
            .collect(),
    );
    let residual = worst.residual();
    let mut witness = json!({"c": amp_json(c), "implied_const": implied});
    if let Value::Object(pair) = worst.witness {
        witness.as_object_mut().unwrap().extend(pair);
    }
    Ok(ResidualReport::new(
        AxiomName::Scalability,
        residual,
        tol,
        seed,
        witness,
    ))
}

pub fn scaling_residual<F: Functional + ?Sized>(f: &F, c: Amplitude, cfg: &AxiomConfig) -> Result<ResidualReport> {
    cfg.validate()?;
    scaling_residual_on(f, c, &cfg.amplitudes(0), cfg.tol_pass, cfg.rng_seed)
}

/// Fixed scalars every scalability sweep probes: a pure dilation, a quarter
/// turn, and several generic moduli and phases.
pub fn scaling_probes() -> Vec<Amplitude> {
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_3, FRAC_PI_4, FRAC_PI_8};
    vec![
        Amplitude::real(2.0),
        Amplitude::I,
        Amplitude::from_polar(1.0, FRAC_PI_8),
        Amplitude::from_polar(1.0, FRAC_PI_4),
        Amplitude::from_polar(1.0, FRAC_PI_3),
        Amplitude::from_polar(0.5, 2.0 * FRAC_PI_3),
        Amplitude::from_polar(1.7, -1.1),
        Amplitude::from_polar(3.0, FRAC_PI_2 + 0.3),
    ]
}

/// Worst scalability report over [`scaling_probes`] plus `extra_random`
/// seeded unit-modulus phases.
pub fn scaling_sweep<F: Functional + ?Sized>(f: &F, cfg: &AxiomConfig, extra_random: usize) -> Result<ResidualReport> {
    cfg.validate()?;
    let samples = cfg.amplitudes(0);
    let mut rng = sampling::stream(cfg.rng_seed, 1);
    let mut probes = scaling_probes();
    probes.extend((0..extra_random).map(|_| {
        let t: f64 = rand::Rng::random_range(&mut rng, -std::f64::consts::PI..std::f64::consts::PI);
        Amplitude::from_polar(1.0, t)
    }));
    let mut worst: Option<ResidualReport> = None;
    for c in probes {
        let r = scaling_residual_on(f, c, &samples, cfg.tol_pass, cfg.rng_seed)?;
        if worst.as_ref().is_none_or(|w| r.max_residual > w.max_residual) {
            worst = Some(r);
        }
    }
    Ok(worst.expect("probe list is never empty"))
}

/// `|F(a*) − F(a)| + |F(ã) − F(a)|`, divided by `max(1, |F(a)|)`.
pub fn involution_residual_on<F: Functional + ?Sized>(
    f: &F,
    samples: &[Amplitude],
    tol: f64,
    seed: u64,
) -> Result<ResidualReport> {
    let mut worst = Worst::new();
    for &a in samples {
        let fa = f.value(a)?;
        let d = (f.value(a.star())? - fa).abs() + (f.value(a.tilde())? - fa).abs();
        worst.offer(d / fa.abs().max(1.0), || json!({"a": amp_json(a)}));
    }
    let residual = worst.residual();
    Ok(ResidualReport::new(
        AxiomName::Involution,
        residual,
        tol,
        seed,
        worst.witness,
    ))
}

pub fn involution_residual<F: Functional + ?Sized>(f: &F, cfg: &AxiomConfig) -> Result<ResidualReport> {
    cfg.validate()?;
    involution_residual_on(f, &cfg.amplitudes(2), cfg.tol_pass, cfg.rng_seed)
}

/// `|Σ F((U·a)_k) − Σ F(a_k)| / max(1, |Σ F(a_k)|)` on explicit vectors.
pub fn device_independence_on<F: Functional + ?Sized>(
    f: &F,
    u: &BasisChange,
    vectors: &[Vec<Amplitude>],
    tol: f64,
    seed: u64,
) -> Result<ResidualReport> {
    let mut worst = Worst::new();
    for a in vectors {
        let b = u.apply_amplitudes(a)?;
        let before = evaluate_rep(f, &Representation::from_amplitudes("A", a)?)?;
        let after = evaluate_rep(f, &Representation::from_amplitudes("B", &b)?)?;
        worst.offer(
            (after - before).abs() / before.abs().max(1.0),
            || json!({"a": amps_json(a), "b": amps_json(&b)}),
        );
    }
    let residual = worst.residual();
    Ok(ResidualReport::new(
        AxiomName::DeviceIndependence,
        residual,
        tol,
        seed,
        worst.witness,
    ))
}

/// Device-independence on `cfg.sample_count` seeded unit vectors.
pub fn device_independence_residual<F: Functional + ?Sized>(
    f: &F,
    u: &BasisChange,
    cfg: &AxiomConfig,
) -> Result<ResidualReport> {
    cfg.validate()?;
    let mut rng = sampling::stream(cfg.rng_seed, 3);
    let vectors: Vec<Vec<Amplitude>> = (0..cfg.sample_count)
        .map(|_| {
            unit_vector(&mut rng, u.dim())
                .into_iter()
                .map(Amplitude::from)
                .collect()
        })
        .collect();
    device_independence_on(f, u, &vectors, cfg.tol_pass, cfg.rng_seed)
}

/// Outcome of [`cauchy_linearity_check`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CauchyReport {
    pub residual: f64,
    pub fitted_slope: f64,
    pub linear: bool,
    /// Grid pair `(x, y)` attaining the residual.
    pub witness: (f64, f64),
}

impl CauchyReport {
    pub fn to_residual_report(&self, tol: f64, seed: u64) -> ResidualReport {
        ResidualReport::new(
            AxiomName::Cauchy,
            self.residual,
            tol,
            seed,
            json!({"x": self.witness.0, "y": self.witness.1, "fitted_slope": self.fitted_slope}),
        )
    }
}

pub const DEFAULT_CAUCHY_GRID_MAX: f64 = 1.0;
pub const DEFAULT_CAUCHY_GRID_STEPS: usize = 64;

/// Finite-grid test of `C(x + y) = C(x) + C(y)` on `x, y ∈ {k·h}`,
/// `h = grid_max / grid_steps`, plus the least-squares slope through the
/// origin. Linear iff the residual is within `tol`.
pub fn cauchy_linearity_check<C: Fn(f64) -> f64>(c: C, grid_max: f64, grid_steps: usize, tol: f64) -> CauchyReport {
    let steps = grid_steps.max(1);
    let h = grid_max / steps as f64;
    let grid: Vec<f64> = (0..=steps).map(|k| k as f64 * h).collect();
    let values: Vec<f64> = grid.iter().map(|&x| c(x)).collect();
    // C on the sums k·h, k = 0..=2·steps
    let sums: Vec<f64> = (0..=2 * steps).map(|k| c(k as f64 * h)).collect();

    let mut residual = 0.0f64;
    let mut witness = (0.0, 0.0);
    for i in 0..=steps {
        for j in i..=steps {
            let r = (sums[i + j] - values[i] - values[j]).abs();
            if r.is_nan() || r > residual {
                residual = if r.is_nan() { f64::INFINITY } else { r };
                witness = (grid[i], grid[j]);
            }
        }
    }
    let sxx: f64 = grid.iter().map(|x| x * x).sum();
    let sxy: f64 = grid.iter().zip(&values).map(|(x, y)| x * y).sum();
    let fitted_slope = if sxx > 0.0 { sxy / sxx } else { 0.0 };
    CauchyReport {
        residual,
        fitted_slope,
        linear: residual <= tol,
        witness,
    }
}

/// `|F_rep(rep) − Σ_j F_rep(rep_j)|` where `rep_j` keeps only entry `j`.
pub fn additivity_contract_on<R>(f_rep: R, reps: &[Representation], tol: f64, seed: u64) -> Result<ResidualReport>
where
    R: Fn(&Representation) -> Result<f64>,
{
    let mut worst = Worst::new();
    for rep in reps {
        let whole = f_rep(rep)?;
        let parts = (0..rep.dim())
            .map(|k| f_rep(&rep.single(k)))
            .collect::<Result<Vec<f64>>>()?;
        let sum: f64 = parts.iter().sum();
        worst.offer(
            (whole - sum).abs(),
            || json!({"representation": serde_json::to_value(rep).unwrap_or(Value::Null)}),
        );
    }
    let residual = worst.residual();
    Ok(ResidualReport::new(
        AxiomName::Additivity,
        residual,
        tol,
        seed,
        worst.witness,
    ))
}

/// Additivity on `cfg.sample_count` seeded representations of dimension 1–8.
pub fn additivity_contract_check<R>(f_rep: R, cfg: &AxiomConfig) -> Result<ResidualReport>
where
    R: Fn(&Representation) -> Result<f64>,
{
    cfg.validate()?;
    let mut rng = sampling::stream(cfg.rng_seed, 4);
    let reps = (0..cfg.sample_count)
        .map(|_| {
            let dim = rand::Rng::random_range(&mut rng, 1..=8usize);
            let amps: Vec<Amplitude> = (0..dim)
                .map(|_| clipped_amplitude(&mut rng, cfg.amplitude_scale))
                .collect();
            Representation::from_amplitudes("A", &amps)
        })
        .collect::<Result<Vec<_>>>()?;
    additivity_contract_on(f_rep, &reps, cfg.tol_pass, cfg.rng_seed)
}
