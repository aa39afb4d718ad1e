//! Mixture parameters, weighted samples, block partitions, and the
//! density/likelihood evaluations that everything else builds on.

use crate::error::{Error, Result};
use std::ops::Range;

/// ln(2π), used by the log-space Gaussian density.
const LN_2PI: f64 = 1.837_877_066_409_345_3;

/// Parameters of a univariate Gaussian mixture: one weight, mean and
/// standard deviation per component.
#[derive(Debug, Clone, PartialEq)]
pub struct MixtureParams {
    weights: Vec<f64>,
    means: Vec<f64>,
    stds: Vec<f64>,
}

impl MixtureParams {
    /// Builds a parameter vector, checking that all three slices have the
    /// same non-zero length, weights are strictly positive and sum to 1
    /// (within 1e-9), and spreads are strictly positive and finite.
    pub fn new(weights: Vec<f64>, means: Vec<f64>, stds: Vec<f64>) -> Result<Self> {
        let k = weights.len();
        if k == 0 {
            return Err(Error::InvalidParams("no components".into()));
        }
        if means.len() != k || stds.len() != k {
            return Err(Error::InvalidParams(format!(
                "component count mismatch: {} weights, {} means, {} stds",
                k,
                means.len(),
                stds.len()
            )));
        }
        if weights.iter().any(|w| !w.is_finite() || *w <= 0.0) {
            return Err(Error::InvalidParams(
                "weights must be finite and strictly positive".into(),
            ));
        }
        let total: f64 = weights.iter().sum();
        if (total - 1.0).abs() > 1e-9 {
            return Err(Error::InvalidParams(format!(
                "weights sum to {total}, expected 1"
            )));
        }
        if means.iter().any(|m| !m.is_finite()) {
            return Err(Error::InvalidParams("means must be finite".into()));
        }
        if stds.iter().any(|s| !s.is_finite() || *s <= 0.0) {
            return Err(Error::InvalidParams(
                "stds must be finite and strictly positive".into(),
            ));
        }
        Ok(Self {
            weights,
            means,
            stds,
        })
    }

    /// Number of components.
    pub fn k(&self) -> usize {
        self.weights.len()
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn means(&self) -> &[f64] {
        &self.means
    }

    pub fn stds(&self) -> &[f64] {
        &self.stds
    }
}

/// A sorted sample with per-position nonnegative weights. Raw (unbinned)
/// observations are represented with unit weights after collapsing ties, so
/// binned histograms and plain samples share one representation.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedSample {
    xs: Vec<f64>,
    ys: Vec<f64>,
    bin_width: Option<f64>,
}

impl WeightedSample {
    /// Builds a sample from strictly increasing positions `xs` and
    /// nonnegative weights `ys`. `bin_width`, when given, must match the
    /// spacing of `xs` within 1e-6 relative (the tolerance file readers
    /// promise for uniform grids).
    pub fn new(xs: Vec<f64>, ys: Vec<f64>, bin_width: Option<f64>) -> Result<Self> {
        if xs.is_empty() {
            return Err(Error::InvalidSample("empty sample".into()));
        }
        if xs.len() != ys.len() {
            return Err(Error::InvalidSample(format!(
                "{} positions but {} weights",
                xs.len(),
                ys.len()
            )));
        }
        if xs.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidSample("positions must be finite".into()));
        }
        if xs.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidSample(
                "positions must be strictly increasing".into(),
            ));
        }
        if ys.iter().any(|y| !y.is_finite() || *y < 0.0) {
            return Err(Error::InvalidSample(
                "weights must be finite and nonnegative".into(),
            ));
        }
        let total: f64 = ys.iter().sum();
        if total <= 0.0 {
            return Err(Error::InvalidSample("total weight must be positive".into()));
        }
        if let Some(delta) = bin_width {
            if !delta.is_finite() || delta <= 0.0 {
                return Err(Error::InvalidSample("bin width must be positive".into()));
            }
            for w in xs.windows(2) {
                let step = w[1] - w[0];
                if (step - delta).abs() > 1e-6 * delta.max(step) {
                    return Err(Error::InvalidSample(format!(
                        "positions step by {step} but bin width is {delta}"
                    )));
                }
            }
        }
        Ok(Self { xs, ys, bin_width })
    }

    /// Builds a sample from raw, possibly unsorted observations. Ties are
    /// collapsed into counts so the positions come out strictly increasing.
    pub fn from_points(points: &[f64]) -> Result<Self> {
        if points.is_empty() {
            return Err(Error::InvalidSample("empty sample".into()));
        }
        if points.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidSample("positions must be finite".into()));
        }
        let mut sorted = points.to_vec();
        sorted.sort_by(f64::total_cmp);
        let mut xs: Vec<f64> = Vec::with_capacity(sorted.len());
        let mut ys: Vec<f64> = Vec::with_capacity(sorted.len());
        for &x in &sorted {
            match xs.last() {
                Some(&last) if last == x => *ys.last_mut().expect("parallel vectors") += 1.0,
                _ => {
                    xs.push(x);
                    ys.push(1.0);
                }
            }
        }
        Self::new(xs, ys, None)
    }

    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    pub fn xs(&self) -> &[f64] {
        &self.xs
    }

    pub fn ys(&self) -> &[f64] {
        &self.ys
    }

    pub fn bin_width(&self) -> Option<f64> {
        self.bin_width
    }

    /// Sum of all weights.
    pub fn total_weight(&self) -> f64 {
        self.ys.iter().sum()
    }
}

/// A split of the index range `0..n` into consecutive, nonempty blocks,
/// stored as boundary indices `0 = b_0 < b_1 < ... < b_k = n`; block `i`
/// is the half-open range `[b_i, b_{i+1})`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BlockPartition {
    boundaries: Vec<usize>,
}

impl BlockPartition {
    /// Builds a partition from its full boundary vector (including the
    /// leading 0 and trailing `n`).
    pub fn new(boundaries: Vec<usize>) -> Result<Self> {
        if boundaries.len() < 2 {
            return Err(Error::InvalidPartition(
                "need at least a start and an end boundary".into(),
            ));
        }
        if boundaries[0] != 0 {
            return Err(Error::InvalidPartition("first boundary must be 0".into()));
        }
        if boundaries.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidPartition(
                "boundaries must be strictly increasing".into(),
            ));
        }
        Ok(Self { boundaries })
    }

    /// Number of blocks.
    pub fn k(&self) -> usize {
        self.boundaries.len() - 1
    }

    /// Total number of indexed points (the final boundary).
    pub fn n(&self) -> usize {
        *self.boundaries.last().expect("nonempty by construction")
    }

    pub fn boundaries(&self) -> &[usize] {
        &self.boundaries
    }

    /// The `i`-th block as an index range.
    pub fn block(&self, i: usize) -> Range<usize> {
        self.boundaries[i]..self.boundaries[i + 1]
    }

    /// Iterates over all blocks in order.
    pub fn blocks(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        self.boundaries.windows(2).map(|w| w[0]..w[1])
    }
}

/// Log of the Gaussian density with mean `mu` and standard deviation
/// `sigma`, evaluated at `x`.
pub(crate) fn log_normal_pdf(x: f64, mu: f64, sigma: f64) -> f64 {
    let z = (x - mu) / sigma;
    -0.5 * z * z - sigma.ln() - 0.5 * LN_2PI
}

/// Mixture density at `x`: the weight-averaged component densities. Each
/// component is evaluated in log space and exponentiated, so far-tail
/// points with narrow components underflow to 0 instead of misbehaving.
pub fn mixture_pdf(x: f64, params: &MixtureParams) -> f64 {
    let mut acc = 0.0;
    for k in 0..params.k() {
        acc += params.weights[k] * log_normal_pdf(x, params.means[k], params.stds[k]).exp();
    }
    acc
}

/// Log of the mixture density at `x`, evaluated with a streaming
/// log-sum-exp over the components. Returns −∞ when every component
/// underflows.
pub(crate) fn log_mixture_pdf(x: f64, params: &MixtureParams) -> f64 {
    let mut max = f64::NEG_INFINITY;
    let mut sum = 0.0;
    for k in 0..params.k() {
        let l = params.weights[k].ln() + log_normal_pdf(x, params.means[k], params.stds[k]);
        if l == f64::NEG_INFINITY {
            continue;
        }
        if l <= max {
            sum += (l - max).exp();
        } else {
            sum = sum * (max - l).exp() + 1.0;
            max = l;
        }
    }
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    max + sum.ln()
}

/// Weighted log-likelihood of the sample under the mixture: the sum of
/// `y_n · log f(x_n)` over positions with positive weight. Returns −∞ when
/// the density underflows to zero at any weighted position; callers treat
/// that as a divergence signal.
pub fn log_likelihood(data: &WeightedSample, params: &MixtureParams) -> f64 {
    let mut acc = 0.0;
    for (&x, &y) in data.xs.iter().zip(&data.ys) {
        if y == 0.0 {
            continue;
        }
        let l = log_mixture_pdf(x, params);
        if l == f64::NEG_INFINITY {
            return f64::NEG_INFINITY;
        }
        acc += y * l;
    }
    acc
}

/// Standard normal cumulative distribution.
fn normal_cdf(z: f64) -> f64 {
    0.5 * libm::erfc(-z / std::f64::consts::SQRT_2)
}

/// Probability mass a single Gaussian assigns to the interval `(a, b)`,
/// `a < b`, in standardized units. Evaluated through the complementary
/// error function on whichever tail keeps the arguments positive, so
/// narrow far-tail bins do not cancel to zero prematurely.
fn normal_mass(a: f64, b: f64) -> f64 {
    if a + b > 0.0 {
        normal_cdf(-a) - normal_cdf(-b)
    } else {
        normal_cdf(b) - normal_cdf(a)
    }
}

/// Binned log-likelihood evaluated with exact per-bin probability masses
/// (differences of the Gaussian cumulative distribution across each bin)
/// rather than the dense bin-area approximation. Serves as the validation
/// oracle for [`log_likelihood`] on finely binned data. Returns −∞ when a
/// positive-weight bin receives zero mass.
pub fn exact_binned_log_likelihood(data: &WeightedSample, params: &MixtureParams) -> Result<f64> {
    let delta = data.bin_width.ok_or(Error::MissingBinWidth)?;
    let half = 0.5 * delta;
    let mut acc = 0.0;
    for (&x, &y) in data.xs.iter().zip(&data.ys) {
        if y == 0.0 {
            continue;
        }
        let mut p = 0.0;
        for k in 0..params.k() {
            let lo = (x - half - params.means[k]) / params.stds[k];
            let hi = (x + half - params.means[k]) / params.stds[k];
            p += params.weights[k] * normal_mass(lo, hi);
        }
        if p <= 0.0 {
            return Ok(f64::NEG_INFINITY);
        }
        acc += y * p.ln();
    }
    Ok(acc)
}

/// Summarizes each block of a partition into one mixture component: the
/// block's weighted mean, weighted standard deviation (floored at
/// `sigma_min`), and its share of the total weight. This is how a range
/// partition becomes a starting point for iterative fitting.
pub fn blocks_to_params(
    data: &WeightedSample,
    partition: &BlockPartition,
    sigma_min: f64,
) -> Result<MixtureParams> {
    if partition.n() != data.len() {
        return Err(Error::InvalidPartition(format!(
            "partition covers {} points but sample has {}",
            partition.n(),
            data.len()
        )));
    }
    if !sigma_min.is_finite() || sigma_min <= 0.0 {
        return Err(Error::InvalidArgument(
            "sigma_min must be positive and finite".into(),
        ));
    }
    let total = data.total_weight();
    let k = partition.k();
    let mut weights = Vec::with_capacity(k);
    let mut means = Vec::with_capacity(k);
    let mut stds = Vec::with_capacity(k);
    for (b, range) in partition.blocks().enumerate() {
        let xs = &data.xs[range.clone()];
        let ys = &data.ys[range];
        let w: f64 = ys.iter().sum();
        if w <= 0.0 {
            return Err(Error::ZeroWeightBlock { block: b });
        }
        let mean: f64 = xs.iter().zip(ys).map(|(&x, &y)| y * x).sum::<f64>() / w;
        let var: f64 = xs
            .iter()
            .zip(ys)
            .map(|(&x, &y)| y * (x - mean) * (x - mean))
            .sum::<f64>()
            / w;
        weights.push(w / total);
        means.push(mean);
        stds.push(var.sqrt().max(sigma_min));
    }
    MixtureParams::new(weights, means, stds)
}
