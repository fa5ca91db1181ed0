//! Finite click ensembles drawn from a representation, frequency estimates
//! and their convergence.
//!
//! The generative model is the squared-modulus frequency rule itself, so the
//! simulator demonstrates estimator convergence and instrument independence;
//! it is not an independent confirmation of the rule.

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::amplitude::{born_frequencies, compensated_sum, Representation};
use crate::basis::BasisChange;
use crate::error::{Error, Result};
use crate::sampling::{self, EngineRng};
use crate::uniqueness::unitarity_witness;

/// Fixed disclaimer carried by every simulation report.
pub const DISCLAIMER: &str = "clicks are drawn from the squared-modulus frequency rule; \
the simulation shows estimator convergence and instrument independence, \
not an independent confirmation of the rule";

/// Probe vectors used to check that an instrument change is unitary.
const WITNESS_TRIALS: usize = 64;

/// Counts per outcome label, in representation order.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClickEnsemble {
    counts: Vec<(String, u64)>,
    n_total: u64,
    seed: u64,
    basis_id: String,
}

/// Sidecar metadata of the CSV form.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct EnsembleMeta {
    pub n: u64,
    pub seed: u64,
    pub basis: String,
}

#[derive(Debug, Serialize, Deserialize)]
struct CsvRow {
    label: String,
    count: u64,
}

impl ClickEnsemble {
    pub fn new(counts: Vec<(String, u64)>, seed: u64, basis_id: impl Into<String>) -> Result<Self> {
        if counts.is_empty() {
            return Err(Error::InvalidRepresentation("ensemble has no outcomes".into()));
        }
        let n_total = counts.iter().try_fold(0u64, |acc, (_, c)| acc.checked_add(*c));
        let n_total = n_total.ok_or_else(|| Error::InvalidConfig("count overflow".into()))?;
        if n_total == 0 {
            return Err(Error::NoEvents);
        }
        Ok(Self {
            counts,
            n_total,
            seed,
            basis_id: basis_id.into(),
        })
    }

    pub fn counts(&self) -> &[(String, u64)] {
        &self.counts
    }

    pub fn count_values(&self) -> Vec<u64> {
        self.counts.iter().map(|(_, c)| *c).collect()
    }

    pub fn n_total(&self) -> u64 {
        self.n_total
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn basis_id(&self) -> &str {
        &self.basis_id
    }

    pub fn meta(&self) -> EnsembleMeta {
        EnsembleMeta {
            n: self.n_total,
            seed: self.seed,
            basis: self.basis_id.clone(),
        }
    }

    /// CSV with header `label,count`.
    pub fn to_csv(&self) -> Result<String> {
        let mut w = csv::Writer::from_writer(Vec::new());
        for (label, count) in &self.counts {
            w.serialize(CsvRow {
                label: label.clone(),
                count: *count,
            })
            .map_err(csv_err)?;
        }
        let bytes = w.into_inner().map_err(|e| Error::InvalidConfig(e.to_string()))?;
        String::from_utf8(bytes).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    /// Inverse of [`to_csv`](Self::to_csv) plus sidecar; the sidecar total must match.
    pub fn from_csv(text: &str, meta: &EnsembleMeta) -> Result<Self> {
        let mut r = csv::Reader::from_reader(text.as_bytes());
        let counts = r
            .deserialize::<CsvRow>()
            .map(|row| row.map(|row| (row.label, row.count)).map_err(csv_err))
            .collect::<Result<Vec<_>>>()?;
        let e = Self::new(counts, meta.seed, meta.basis.clone())?;
        if e.n_total != meta.n {
            return Err(Error::InvalidConfig(format!(
                "sidecar n = {} but counts sum to {}",
                meta.n, e.n_total
            )));
        }
        Ok(e)
    }
}

fn csv_err(e: csv::Error) -> Error {
    Error::InvalidConfig(format!("csv: {e}"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimulationConfig {
    pub n_events: u64,
    pub trials: usize,
    pub rng_seed: u64,
}

impl Default for SimulationConfig {
    fn default() -> Self {
        Self {
            n_events: 1_000_000,
            trials: 100,
            rng_seed: 0,
        }
    }
}

impl SimulationConfig {
    pub fn validate(&self) -> Result<()> {
        if self.n_events == 0 {
            return Err(Error::InvalidConfig("n_events must be at least 1".into()));
        }
        if self.trials == 0 {
            return Err(Error::InvalidConfig("trials must be at least 1".into()));
        }
        Ok(())
    }
}

/// `ν_k = length_k / Σ_j length_j`.
pub fn frequencies_from_lengths(lengths: &[f64]) -> Result<Vec<f64>> {
    if lengths.iter().any(|l| !l.is_finite()) {
        return Err(Error::NonFinite);
    }
    if lengths.iter().any(|&l| l < 0.0) {
        return Err(Error::InvalidRepresentation("negative length".into()));
    }
    let total = compensated_sum(lengths.iter().copied());
    if total == 0.0 {
        return Err(Error::NoEvents);
    }
    if !total.is_finite() {
        return Err(Error::MagnitudeOverflow);
    }
    Ok(lengths.iter().map(|l| l / total).collect())
}

/// Cumulative frequencies, pinned to exactly 1 from the last nonzero
/// channel on so every draw in `(0, 1]` lands in a positive interval.
fn cumulative(freqs: &[f64]) -> Vec<f64> {
    let mut cdf = Vec::with_capacity(freqs.len());
    let mut acc = 0.0;
    for f in freqs {
        acc += f;
        cdf.push(acc);
    }
    if let Some(last) = freqs.iter().rposition(|&f| f > 0.0) {
        for c in &mut cdf[last..] {
            *c = 1.0;
        }
    }
    cdf
}

fn draw_counts(cdf: &[f64], n: u64, rng: &mut EngineRng) -> Vec<u64> {
    let mut counts = vec![0u64; cdf.len()];
    for _ in 0..n {
        // `u ∈ (0, 1]`; interval `k` is `(cdf_{k−1}, cdf_k]`, so a draw on a
        // boundary goes to the earlier interval.
        let u = 1.0 - rng.random::<f64>();
        let k = cdf.partition_point(|&c| c < u);
        counts[k] += 1;
    }
    counts
}

fn simulate_on_stream(rep: &Representation, n: u64, seed: u64, stream: u64) -> Result<ClickEnsemble> {
    if n == 0 {
        return Err(Error::InvalidConfig("n must be at least 1".into()));
    }
    let cdf = cumulative(&born_frequencies(rep)?);
    let counts = draw_counts(&cdf, n, &mut sampling::stream(seed, stream));
    let labelled = rep.labels().map(str::to_owned).zip(counts).collect();
    ClickEnsemble::new(labelled, seed, rep.basis())
}

/// `n` independent categorical draws with the representation's frequencies,
/// by inverse-CDF sampling.
pub fn simulate_clicks(rep: &Representation, n: u64, seed: u64) -> Result<ClickEnsemble> {
    simulate_on_stream(rep, n, seed, 0)
}

/// `ν̂_k = counts_k / n_total`.
pub fn estimate_frequencies(e: &ClickEnsemble) -> Vec<f64> {
    let n = e.n_total as f64;
    e.counts.iter().map(|(_, c)| *c as f64 / n).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvergencePoint {
    pub n: u64,
    pub mean_abs_error: f64,
}

/// Mean over `trials` of `max_k |ν̂_k − ν_k|` for each `n`. Trial `t` at
/// position `i` of `n_list` draws from stream `(i << 32) | t`.
pub fn convergence_curve(
    rep: &Representation,
    n_list: &[u64],
    trials: usize,
    seed: u64,
) -> Result<Vec<ConvergencePoint>> {
    if n_list.is_empty() || n_list[0] == 0 || n_list.windows(2).any(|w| w[0] >= w[1]) {
        return Err(Error::InvalidConfig(
            "n_list must be positive and strictly increasing".into(),
        ));
    }
    if trials == 0 {
        return Err(Error::InvalidConfig("trials must be at least 1".into()));
    }
    let freqs = born_frequencies(rep)?;
    let cdf = cumulative(&freqs);
    n_list
        .iter()
        .enumerate()
        .map(|(i, &n)| {
            let errors: Vec<f64> = (0..trials)
                .into_par_iter()
                .map(|t| {
                    let mut rng = sampling::stream(seed, ((i as u64) << 32) | t as u64);
                    let counts = draw_counts(&cdf, n, &mut rng);
                    counts
                        .iter()
                        .zip(&freqs)
                        .map(|(&c, &f)| (c as f64 / n as f64 - f).abs())
                        .fold(0.0, f64::max)
                })
                .collect();
            let mean = compensated_sum(errors) / trials as f64;
            Ok(ConvergencePoint {
                n,
                mean_abs_error: mean,
            })
        })
        .collect()
}

/// Least-squares slope of `ln(error)` against `ln(n)`; `None` with fewer
/// than two points or any nonpositive error.
pub fn loglog_slope(points: &[ConvergencePoint]) -> Option<f64> {
    if points.len() < 2 || points.iter().any(|p| !(p.mean_abs_error > 0.0)) {
        return None;
    }
    let xs: Vec<f64> = points.iter().map(|p| (p.n as f64).ln()).collect();
    let ys: Vec<f64> = points.iter().map(|p| p.mean_abs_error.ln()).collect();
    let m = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / m;
    let my = ys.iter().sum::<f64>() / m;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    (sxx > 0.0).then(|| sxy / sxx)
}

/// Both instruments' ensembles for the same state.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TwoInstrumentRun {
    pub a: ClickEnsemble,
    pub b: ClickEnsemble,
    /// `|Σ|a_k|² − Σ|b_k|²|`.
    pub length_gap: f64,
}

/// Clicks in basis A from `rep` (stream 0) and in basis B from `U·rep`
/// (stream 1).
pub fn two_instrument_run(rep: &Representation, u: &BasisChange, n: u64, seed: u64) -> Result<TwoInstrumentRun> {
    if u.dim() != rep.dim() {
        return Err(Error::DimensionMismatch {
            expected: rep.dim(),
            got: u.dim(),
        });
    }
    if !unitarity_witness(u, WITNESS_TRIALS, seed)? {
        return Err(Error::NonUnitaryChange);
    }
    let amps = rep.amplitudes();
    let transformed = u.apply_amplitudes(&amps)?;
    let rep_b = rep.with_amplitudes(format!("{}:changed", rep.basis()), &transformed)?;
    let len_a = compensated_sum(amps.iter().map(|a| a.norm_sqr()));
    let len_b = compensated_sum(transformed.iter().map(|b| b.norm_sqr()));
    Ok(TwoInstrumentRun {
        a: simulate_on_stream(rep, n, seed, 0)?,
        b: simulate_on_stream(&rep_b, n, seed, 1)?,
        length_gap: (len_a - len_b).abs(),
    })
}
