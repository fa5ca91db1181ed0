//! Which exponents `p` admit nontrivial basis changes preserving
//! `Σ_k |a_k|^{2p}`: exact cross-term certificates for 2×2 changes and a
//! numeric preserver search for any dimension.

pub mod cross_term;
pub mod search;

pub use cross_term::{certify, certify_exact, cross_term_coefficient, CrossTermCertificate, GaussianRational};
pub use search::{
    admissible_set, exponent_sweep, preservation_residual, preservation_residual_vectors, preserver_search,
    unitarity_witness, SearchConfig, SearchVerdict, SweepResult,
};
