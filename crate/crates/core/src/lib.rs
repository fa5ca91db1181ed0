//! Verification engine for statistical-length functionals.
//!
//! The crate checks candidate functionals of complex amplitudes against the
//! additivity, scalability, involution and device-independence axioms,
//! shows that only `Σ|a_k|²` survives nontrivial changes of instrument, and
//! simulates click ensembles whose long-run frequencies follow
//! `|a_k|² / Σ_j |a_j|²`.

// `!(x > 0.0)` deliberately rejects NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod amplitude;
pub mod axioms;
pub mod basis;
pub mod clicks;
pub mod error;
pub mod functional;
pub mod sampling;
pub mod uniqueness;

pub use amplitude::{born_frequencies, Amplitude, Entry, Representation};
pub use basis::{classify_triviality, random_unitary, BasisChange, Triviality};
pub use clicks::{
    convergence_curve, estimate_frequencies, frequencies_from_lengths, loglog_slope, simulate_clicks,
    two_instrument_run, ClickEnsemble, ConvergencePoint, SimulationConfig,
};
pub use error::{Error, Result};
pub use functional::{evaluate_rep, Functional, GeneralAnsatz, SymmetricFunctional};
