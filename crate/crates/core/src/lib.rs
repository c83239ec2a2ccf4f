//! Finite-blocklength self-random-number generation under f-divergences.
//!
//! Given an explicit source pmf over `X^n`, the crate builds deterministic
//! encoder/decoder pairs that approximate the source by a function of
//! itself, evaluates their exact f-divergence, and brackets it between
//! spectrum-based achievability and converse bounds. Rates (`K_f`, tail
//! quantiles, smooth max entropy) and rate-distortion-perception bounds are
//! computed from the same spectrum.
//!
//! Arithmetic is generic over [`Mass`]: `BigRational` for exact runs, `f64`
//! otherwise.

pub mod cli;
pub mod config;
pub mod construction;
pub mod error;
pub mod fdivergence;
pub mod mass;
pub mod oracle;
pub mod probability;
pub mod rdp;
pub mod spectrum;

pub use construction::{
    achievability_bound, apply_mapping, build_baseline_mapping, build_smooth_set_mapping, build_threshold_mapping,
    converse_bound, ConstructionTrace, MappingPair,
};
pub use error::{Error, Result};
pub use fdivergence::{check_conditions, divergence, Curve};
pub use mass::Mass;
pub use oracle::{min_fdiv_bruteforce, min_set_bruteforce, PartitionPlan};
pub use probability::{expand, AtomicDistribution, Outcome, SourceModel};
pub use rdp::{d_threshold, mapping_distortion, rd_function_iid, DistortionSpec, RdpBoundReport};
pub use spectrum::{k_f_rate, smooth_max_entropy, spectrum_cdf, sup_entropy_quantile, SpectrumSummary};
