//! Error type shared across the crate.

use crate::model::MixtureParams;
use thiserror::Error;

/// Errors reported by the fitting, partitioning and simulation routines.
#[derive(Debug, Clone, Error)]
pub enum Error {
    /// A call argument violated a documented precondition (bad component
    /// count, non-positive penalty, oversized brute-force request, ...).
    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    /// The input sample is malformed (unsorted positions, negative weights,
    /// non-finite values, zero total weight, ...).
    #[error("invalid sample: {0}")]
    InvalidSample(String),

    /// Mixture parameters are malformed (mismatched lengths, non-positive
    /// spreads, weights that do not form a distribution, ...).
    #[error("invalid mixture parameters: {0}")]
    InvalidParams(String),

    /// A block partition is inconsistent with the sample it refers to.
    #[error("invalid partition: {0}")]
    InvalidPartition(String),

    /// A block that must carry mass has zero total weight.
    #[error("block {block} has zero total weight")]
    ZeroWeightBlock { block: usize },

    /// No feasible solution exists for the requested size.
    #[error("infeasible: {0}")]
    Infeasible(String),

    /// The likelihood became non-finite during fitting. Carries the last
    /// parameter vector for which the likelihood was still finite.
    #[error("fit diverged at iteration {iteration}: log-likelihood is no longer finite")]
    Diverged {
        iteration: usize,
        last: Box<MixtureParams>,
    },

    /// An operation that needs a bin width was given unbinned data.
    #[error("sample carries no bin width")]
    MissingBinWidth,
}

/// Convenience alias used throughout the crate.
pub type Result<T> = std::result::Result<T, Error>;
