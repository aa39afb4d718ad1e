//! Synthetic mixture generation with overlap-controlled component spacing
//! and reproducible per-dataset random streams.

use crate::error::{Error, Result};
use crate::model::{MixtureParams, WeightedSample};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rand_distr::weighted::WeightedIndex;
use rand_distr::Normal;

/// How mixing weights are assigned across components.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum WeightsMode {
    /// α_k = 1/K for every component.
    Equal,
    /// α_k proportional to k: α_k = k / (K(K+1)/2).
    Linear,
}

/// Scenario description for one generated dataset family.
#[derive(Debug, Clone, Copy)]
pub struct GroupSpec {
    pub weights_mode: WeightsMode,
    /// Half-open range the component standard deviations are drawn from.
    pub sigma_range: (f64, f64),
    /// Number of components.
    pub k: usize,
    /// Target overlap between each pair of adjacent components, in (0,1).
    pub ov: f64,
    /// Observations per sampled dataset.
    pub n: usize,
    /// Master seed; per-dataset streams derive from it via [`dataset_rng`].
    pub seed: u64,
}

impl GroupSpec {
    pub fn new(
        weights_mode: WeightsMode,
        sigma_range: (f64, f64),
        k: usize,
        ov: f64,
        n: usize,
        seed: u64,
    ) -> Result<Self> {
        if !(sigma_range.0 > 0.0 && sigma_range.1 > sigma_range.0) {
            return Err(Error::InvalidArgument(format!(
                "sigma range must satisfy 0 < low < high, got ({}, {})",
                sigma_range.0, sigma_range.1
            )));
        }
        if !(ov > 0.0 && ov < 1.0) {
            return Err(Error::InvalidArgument(format!(
                "overlap must lie strictly between 0 and 1, got {ov}"
            )));
        }
        if k == 0 {
            return Err(Error::InvalidArgument("component count must be at least 1".into()));
        }
        if n == 0 {
            return Err(Error::InvalidArgument("sample size must be at least 1".into()));
        }
        Ok(Self { weights_mode, sigma_range, k, ov, n, seed })
    }

    /// The four standard scenarios: 1 = equal weights, σ ∈ (0.5,1);
    /// 2 = equal weights, σ ∈ (0.05,1); 3 = linear weights, σ ∈ (0.5,1);
    /// 4 = linear weights, σ ∈ (0.05,1).
    pub fn standard_group(group: u8, k: usize, ov: f64, n: usize, seed: u64) -> Result<Self> {
        let (mode, range) = match group {
            1 => (WeightsMode::Equal, (0.5, 1.0)),
            2 => (WeightsMode::Equal, (0.05, 1.0)),
            3 => (WeightsMode::Linear, (0.5, 1.0)),
            4 => (WeightsMode::Linear, (0.05, 1.0)),
            other => {
                return Err(Error::InvalidArgument(format!(
                    "group must be 1..=4, got {other}"
                )))
            }
        };
        Self::new(mode, range, k, ov, n, seed)
    }

    /// The mixing weights this scenario assigns to its `k` components.
    pub fn weights(&self) -> Vec<f64> {
        match self.weights_mode {
            WeightsMode::Equal => vec![1.0 / self.k as f64; self.k],
            WeightsMode::Linear => {
                let denom = (self.k * (self.k + 1) / 2) as f64;
                (1..=self.k).map(|i| i as f64 / denom).collect()
            }
        }
    }
}

/// Overlap coefficient between two Gaussian components:
/// exp(−|μ_i − μ_j| / (2·√(σ_i² + σ_j²))). Equals 1 at coincident means
/// and decays to 0 as the means separate.
pub fn overlap(mu_i: f64, sigma_i: f64, mu_j: f64, sigma_j: f64) -> f64 {
    debug_assert!(sigma_i > 0.0 && sigma_j > 0.0);
    (-(mu_i - mu_j).abs() / (2.0 * (sigma_i * sigma_i + sigma_j * sigma_j).sqrt())).exp()
}

/// Mean spacing that produces overlap `ov` between components with the
/// given standard deviations: 2·√(σ_i² + σ_j²)·ln(1/ov).
pub fn spacing_from_overlap(sigma_i: f64, sigma_j: f64, ov: f64) -> Result<f64> {
    if !(ov > 0.0 && ov < 1.0) {
        return Err(Error::InvalidArgument(format!(
            "overlap must lie strictly between 0 and 1, got {ov}"
        )));
    }
    Ok(2.0 * (sigma_i * sigma_i + sigma_j * sigma_j).sqrt() * (1.0 / ov).ln())
}

/// Draws ground-truth mixture parameters for a scenario: standard
/// deviations uniform over `sigma_range`, weights from the weights mode,
/// and means chained left to right so every adjacent pair overlaps by
/// exactly `ov` (first mean at 0).
pub fn draw_mixture<R: Rng + ?Sized>(spec: &GroupSpec, rng: &mut R) -> MixtureParams {
    let stds: Vec<f64> = (0..spec.k)
        .map(|_| rng.random_range(spec.sigma_range.0..spec.sigma_range.1))
        .collect();
    let mut means = Vec::with_capacity(spec.k);
    means.push(0.0);
    for i in 1..spec.k {
        let spacing = spacing_from_overlap(stds[i - 1], stds[i], spec.ov)
            .expect("GroupSpec validated ov at construction");
        means.push(means[i - 1] + spacing);
    }
    MixtureParams::new(spec.weights(), means, stds)
        .expect("generated parameters are valid by construction")
}

/// Samples `n` observations from the mixture: component labels from the
/// weights, then one Gaussian draw each. The draws are sorted and exact
/// duplicates collapse into counts.
pub fn sample_mixture<R: Rng + ?Sized>(
    params: &MixtureParams,
    n: usize,
    rng: &mut R,
) -> Result<WeightedSample> {
    if n == 0 {
        return Err(Error::InvalidArgument("sample size must be at least 1".into()));
    }
    let label_dist = WeightedIndex::new(params.weights())
        .expect("mixture weights are positive and sum to 1");
    let normals: Vec<Normal<f64>> = (0..params.k())
        .map(|j| Normal::new(params.means()[j], params.stds()[j]).expect("std positive"))
        .collect();
    let points: Vec<f64> = (0..n)
        .map(|_| normals[label_dist.sample(rng)].sample(rng))
        .collect();
    WeightedSample::from_points(&points)
}

/// Deterministic child stream for dataset `index` under `master_seed`.
/// Distinct indices give statistically independent streams; the same
/// (seed, index) pair always reproduces the same stream.
pub fn dataset_rng(master_seed: u64, index: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(master_seed);
    rng.set_stream(index);
    rng
}
