//! Constant-time block scoring over a prefix-sum accumulator. The four
//! score kinds trade off within-block tightness against block width and
//! drive the optimal range partitioning.

use crate::error::{Error, Result};
use crate::model::WeightedSample;
use std::ops::Range;

/// Which block score to compute.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScoreKind {
    /// Weighted within-block variance.
    Q1,
    /// Weighted within-block standard deviation.
    Q2,
    /// Standard deviation divided by the block's sample range.
    Q3,
    /// Penalized standard deviation divided by the sample range; the
    /// additive penalty steers the optimizer toward wider blocks.
    Q4,
}

/// A score kind plus the width penalty used by [`ScoreKind::Q4`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoringSpec {
    kind: ScoreKind,
    delta: f64,
}

impl ScoringSpec {
    /// Builds a spec; `delta` must be positive and finite when `kind` is
    /// `Q4` and is ignored otherwise.
    pub fn new(kind: ScoreKind, delta: f64) -> Result<Self> {
        if kind == ScoreKind::Q4 && (!delta.is_finite() || delta <= 0.0) {
            return Err(Error::InvalidArgument(
                "Q4 requires a positive, finite delta".into(),
            ));
        }
        Ok(Self { kind, delta })
    }

    pub fn q1() -> Self {
        Self {
            kind: ScoreKind::Q1,
            delta: 0.0,
        }
    }

    pub fn q2() -> Self {
        Self {
            kind: ScoreKind::Q2,
            delta: 0.0,
        }
    }

    pub fn q3() -> Self {
        Self {
            kind: ScoreKind::Q3,
            delta: 0.0,
        }
    }

    /// The width-penalized score. `delta` is in data units and must be
    /// tuned per dataset scale.
    pub fn q4(delta: f64) -> Result<Self> {
        Self::new(ScoreKind::Q4, delta)
    }

    pub fn kind(&self) -> ScoreKind {
        self.kind
    }

    pub fn delta(&self) -> f64 {
        self.delta
    }
}

/// Weighted summary statistics of one contiguous block.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockStats {
    /// Total weight Σ y over the block.
    pub weight: f64,
    /// Weighted mean position.
    pub mean: f64,
    /// Weighted (population) variance.
    pub variance: f64,
    /// Sample range: last position minus first.
    pub range: f64,
}

/// Cumulative sums of y, y·x and y·x² over a sample, enabling O(1)
/// weighted block statistics for any contiguous index range.
///
/// Positions are stored shifted by the first sample position, and block
/// moments are re-centered on each block's leading position before
/// squaring; both steps control the catastrophic cancellation that the
/// naive Σyx² − (Σyx)²/W form suffers when positions are large relative
/// to block widths.
#[derive(Debug, Clone)]
pub struct PrefixAccumulator {
    xs: Vec<f64>,
    shift: f64,
    cum_w: Vec<f64>,
    cum_wx: Vec<f64>,
    cum_wxx: Vec<f64>,
}

impl PrefixAccumulator {
    /// Builds the accumulator in O(N).
    pub fn new(data: &WeightedSample) -> Self {
        let xs = data.xs().to_vec();
        let ys = data.ys();
        let shift = xs[0];
        let n = xs.len();
        let mut cum_w = Vec::with_capacity(n + 1);
        let mut cum_wx = Vec::with_capacity(n + 1);
        let mut cum_wxx = Vec::with_capacity(n + 1);
        cum_w.push(0.0);
        cum_wx.push(0.0);
        cum_wxx.push(0.0);
        let (mut w, mut wx, mut wxx) = (0.0, 0.0, 0.0);
        for i in 0..n {
            let d = xs[i] - shift;
            let y = ys[i];
            w += y;
            wx += y * d;
            wxx += y * d * d;
            cum_w.push(w);
            cum_wx.push(wx);
            cum_wxx.push(wxx);
        }
        Self {
            xs,
            shift,
            cum_w,
            cum_wx,
            cum_wxx,
        }
    }

    /// Number of sample positions covered.
    pub fn len(&self) -> usize {
        self.xs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.xs.is_empty()
    }

    /// The cumulative weight channel, length N+1 with a leading zero.
    pub fn cum_weights(&self) -> &[f64] {
        &self.cum_w
    }

    /// Total weight of the block `range` (half-open indices).
    pub fn block_weight(&self, range: Range<usize>) -> f64 {
        self.cum_w[range.end] - self.cum_w[range.start]
    }

    /// Weighted statistics of the block `range` (half-open, nonempty,
    /// positive total weight). The moments are centered on the block's
    /// first position.
    pub fn block_stats(&self, range: Range<usize>) -> BlockStats {
        let (i, j) = (range.start, range.end);
        debug_assert!(i < j && j <= self.len());
        let w = self.cum_w[j] - self.cum_w[i];
        let dw = self.cum_wx[j] - self.cum_wx[i];
        let dww = self.cum_wxx[j] - self.cum_wxx[i];
        // Re-center on the block's first position: with c the leading
        // (shifted) position, Σy(x−x_i) = Σy(x−x_0) − c·W and
        // Σy(x−x_i)² = Σy(x−x_0)² − 2c·Σy(x−x_0) + c²·W.
        let c = self.xs[i] - self.shift;
        let m1 = dw - c * w;
        let m2 = dww - 2.0 * c * dw + c * c * w;
        let mean_off = m1 / w;
        let variance = (m2 / w - mean_off * mean_off).max(0.0);
        BlockStats {
            weight: w,
            mean: self.xs[i] + mean_off,
            variance,
            range: self.xs[j - 1] - self.xs[i],
        }
    }
}

/// A block score: either a finite value or an infinite sentinel that
/// records why the block is unusable. Sentinels dominate every finite
/// score, so the partition optimizer avoids such blocks without treating
/// them as errors.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlockScore {
    Finite(f64),
    /// Single-position block scored by a range-normalized kind: the
    /// sample range is zero, so the ratio is undefined.
    InfiniteZeroRange,
    /// The block carries no weight at all, so no statistic is defined.
    InfiniteZeroWeight,
}

impl BlockScore {
    /// The score as a plain float, with +∞ for both sentinels.
    pub fn value(self) -> f64 {
        match self {
            BlockScore::Finite(v) => v,
            _ => f64::INFINITY,
        }
    }

    pub fn is_finite(self) -> bool {
        matches!(self, BlockScore::Finite(_))
    }
}

/// Scores one block in O(1) from the accumulator.
pub fn block_score(acc: &PrefixAccumulator, range: Range<usize>, spec: &ScoringSpec) -> BlockScore {
    if acc.block_weight(range.clone()) <= 0.0 {
        return BlockScore::InfiniteZeroWeight;
    }
    let singleton = range.len() == 1;
    match spec.kind() {
        ScoreKind::Q1 | ScoreKind::Q2 if singleton => BlockScore::Finite(0.0),
        ScoreKind::Q3 | ScoreKind::Q4 if singleton => BlockScore::InfiniteZeroRange,
        kind => {
            let stats = acc.block_stats(range);
            BlockScore::Finite(match kind {
                ScoreKind::Q1 => stats.variance,
                ScoreKind::Q2 => stats.variance.sqrt(),
                ScoreKind::Q3 => stats.variance.sqrt() / stats.range,
                ScoreKind::Q4 => (spec.delta() + stats.variance.sqrt()) / stats.range,
            })
        }
    }
}
