//! Fitting univariate heteroscedastic Gaussian mixtures to weighted or
//! binned data by constrained EM, with initial parameters taken from a
//! globally optimal block partition of the sorted sample.
//!
//! The pieces, bottom to top:
//!
//! - data model: [`MixtureParams`], [`WeightedSample`],
//!   [`BlockPartition`], and likelihood evaluation ([`log_likelihood`],
//!   [`exact_binned_log_likelihood`], [`blocks_to_params`]);
//! - block-quality scoring over prefix sums ([`ScoringSpec`],
//!   [`block_score`]);
//! - the dynamic program returning the globally optimal K-block split
//!   ([`dp_partition`]) and an exhaustive reference
//!   ([`brute_force_partition`]);
//! - baseline initializers: weighted quantiles
//!   ([`quantile_partition`]) and 1-D agglomerative clustering
//!   ([`hierarchical_partition`]);
//! - the constrained EM iteration ([`run_em`]) with σ/α floors and a
//!   clamp-event log;
//! - overlap-controlled synthetic mixtures with seeded, splittable
//!   random streams ([`draw_mixture`], [`sample_mixture`]);
//! - fit-quality metrics ([`d_criterion`], [`attainment`], [`bic`]).

mod em;
mod error;
mod metrics;
mod model;
mod partition;
mod refinit;
mod scoring;
mod simgen;

pub use em::{
    e_step, e_step_with_rescues, m_step, run_em, ClampEvent, ClampKind, EmConfig, FitResult,
    Responsibilities,
};
pub use error::{Error, Result};
pub use metrics::{attainment, avg_log_d, avg_p, bic, d_criterion};
pub use model::{
    blocks_to_params, exact_binned_log_likelihood, log_likelihood, mixture_pdf, BlockPartition,
    MixtureParams, WeightedSample,
};
pub use partition::{brute_force_partition, dp_partition};
pub use refinit::{hierarchical_partition, quantile_partition, Linkage};
pub use scoring::{
    block_score, BlockScore, BlockStats, PrefixAccumulator, ScoreKind, ScoringSpec,
};
pub use simgen::{
    dataset_rng, draw_mixture, overlap, sample_mixture, spacing_from_overlap, GroupSpec,
    WeightsMode,
};
