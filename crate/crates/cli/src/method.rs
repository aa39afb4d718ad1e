//! Initialization-method selection and its textual notation.
//!
//! Methods are written as `eq`, `hclu-c`, `hclu-a`, `dp-q1`, `dp-q2`,
//! `dp-q3`, or `dp-q4:<delta>` (the width penalty is part of the method
//! identity). The same notation appears in benchmark configs, CSV output
//! and model files.

use crate::error::{AppError, AppResult};
use gmix_core::{
    blocks_to_params, dp_partition, hierarchical_partition, quantile_partition, BlockPartition,
    Linkage, MixtureParams, ScoreKind, ScoringSpec, WeightedSample,
};

/// One way of producing initial mixture parameters from data.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Equal weighted quantiles.
    EqualQuantiles,
    /// Agglomerative clustering, complete linkage.
    HierarchicalComplete,
    /// Agglomerative clustering, average linkage.
    HierarchicalAverage,
    /// Optimal block partition under the given scoring.
    OptimalPartition(ScoringSpec),
}

impl Method {
    /// Parses the inline notation (`eq`, `hclu-c`, `hclu-a`, `dp-q1`,
    /// `dp-q2`, `dp-q3`, `dp-q4:<delta>`), case-insensitively.
    pub fn parse(text: &str) -> AppResult<Method> {
        let lowered = text.trim().to_ascii_lowercase();
        let (name, delta_text) = match lowered.split_once(':') {
            Some((n, d)) => (n, Some(d)),
            None => (lowered.as_str(), None),
        };
        if delta_text.is_some() && name != "dp-q4" {
            return Err(AppError::Input(format!(
                "method {name:?} does not take a delta (only dp-q4 does)"
            )));
        }
        match name {
            "eq" => Ok(Method::EqualQuantiles),
            "hclu-c" => Ok(Method::HierarchicalComplete),
            "hclu-a" => Ok(Method::HierarchicalAverage),
            "dp-q1" => Ok(Method::OptimalPartition(ScoringSpec::q1())),
            "dp-q2" => Ok(Method::OptimalPartition(ScoringSpec::q2())),
            "dp-q3" => Ok(Method::OptimalPartition(ScoringSpec::q3())),
            "dp-q4" => {
                let d = delta_text.ok_or_else(|| {
                    AppError::Input(
                        "method dp-q4 needs a width penalty, e.g. dp-q4:0.1".into(),
                    )
                })?;
                let delta: f64 = d.parse().map_err(|_| {
                    AppError::Input(format!("cannot parse dp-q4 delta {d:?} as a number"))
                })?;
                Ok(Method::OptimalPartition(ScoringSpec::q4(delta)?))
            }
            other => Err(AppError::Input(format!(
                "unknown method {other:?}; expected eq, hclu-c, hclu-a, dp-q1, dp-q2, dp-q3 \
                 or dp-q4:<delta>"
            ))),
        }
    }

    /// Combines the `--method` and `--delta` flags: `dp-q4` requires a
    /// delta, every other method rejects one.
    pub fn from_flags(name: &str, delta: Option<f64>) -> AppResult<Method> {
        let lowered = name.trim().to_ascii_lowercase();
        match (lowered.as_str(), delta) {
            ("dp-q4", Some(d)) => Ok(Method::OptimalPartition(ScoringSpec::q4(d)?)),
            ("dp-q4", None) => Err(AppError::Input(
                "--method dp-q4 requires --delta <width penalty>".into(),
            )),
            (_, Some(_)) => Err(AppError::Input(format!(
                "--delta only applies to --method dp-q4, not {lowered:?}"
            ))),
            (_, None) => Method::parse(&lowered),
        }
    }

    /// The canonical textual form, suitable for re-parsing.
    pub fn label(&self) -> String {
        match self {
            Method::EqualQuantiles => "eq".into(),
            Method::HierarchicalComplete => "hclu-c".into(),
            Method::HierarchicalAverage => "hclu-a".into(),
            Method::OptimalPartition(spec) => match spec.kind() {
                ScoreKind::Q1 => "dp-q1".into(),
                ScoreKind::Q2 => "dp-q2".into(),
                ScoreKind::Q3 => "dp-q3".into(),
                ScoreKind::Q4 => format!("dp-q4:{}", spec.delta()),
            },
        }
    }

    /// Produces the method's block partition of the data.
    pub fn partition(&self, data: &WeightedSample, k: usize) -> gmix_core::Result<BlockPartition> {
        match self {
            Method::EqualQuantiles => quantile_partition(data, k),
            Method::HierarchicalComplete => hierarchical_partition(data, k, Linkage::Complete),
            Method::HierarchicalAverage => hierarchical_partition(data, k, Linkage::Average),
            Method::OptimalPartition(spec) => dp_partition(data, k, spec).map(|(p, _)| p),
        }
    }

    /// Partition plus moment conversion: the initial parameters EM
    /// starts from.
    pub fn initial_params(
        &self,
        data: &WeightedSample,
        k: usize,
        sigma_min: f64,
    ) -> gmix_core::Result<MixtureParams> {
        let partition = self.partition(data, k)?;
        blocks_to_params(data, &partition, sigma_min)
    }
}
