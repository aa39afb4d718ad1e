//! Reference partitioning methods: equal weighted quantiles and 1-D
//! agglomerative clustering of adjacent intervals.

use crate::error::{Error, Result};
use crate::model::{BlockPartition, WeightedSample};
use std::cmp::Ordering;
use std::collections::BinaryHeap;

/// Splits the sample at the weighted quantile thresholds: boundary `t` is
/// placed at the smallest index whose cumulative weight reaches t·W/K.
/// When one index crosses several thresholds, later boundaries advance by
/// one index so every block stays nonempty.
pub fn quantile_partition(data: &WeightedSample, k: usize) -> Result<BlockPartition> {
    let n = data.len();
    if k == 0 {
        return Err(Error::InvalidArgument("block count must be at least 1".into()));
    }
    if k > n {
        return Err(Error::Infeasible(format!(
            "cannot split {n} points into {k} nonempty blocks"
        )));
    }
    let total = data.total_weight();
    let ys = data.ys();
    // csum[j] = weight of the first j points.
    let mut csum = Vec::with_capacity(n + 1);
    csum.push(0.0);
    let mut acc = 0.0;
    for &y in ys {
        acc += y;
        csum.push(acc);
    }
    let mut boundaries = Vec::with_capacity(k + 1);
    boundaries.push(0usize);
    for t in 1..k {
        let target = t as f64 * total / k as f64;
        let crossing = csum.partition_point(|&c| c < target); // smallest j with csum[j] >= target
        let prev = *boundaries.last().expect("seeded with 0");
        // Keep every block nonempty: never collide with the previous
        // boundary, and leave room for the blocks still to come.
        boundaries.push(crossing.max(prev + 1).min(n - (k - t)));
    }
    boundaries.push(n);
    BlockPartition::new(boundaries)
}

/// Linkage rule for [`hierarchical_partition`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Linkage {
    /// Distance between clusters = largest pairwise position difference.
    Complete,
    /// Distance = weight-averaged pairwise position difference, which for
    /// ordered interval clusters is the difference of their weighted
    /// means.
    Average,
}

#[derive(Debug, Clone, Copy)]
struct Cluster {
    start: usize,
    end: usize,
    weight: f64,
    wsum: f64, // Σ y·x
    usum: f64, // Σ x (used when the cluster carries no weight)
    stamp: u32,
}

impl Cluster {
    fn mean(&self) -> f64 {
        if self.weight > 0.0 {
            self.wsum / self.weight
        } else {
            self.usum / (self.end - self.start) as f64
        }
    }
}

struct PairEntry {
    dist: f64,
    left_start: usize,
    left: usize,
    right: usize,
    left_stamp: u32,
    right_stamp: u32,
}

impl PartialEq for PairEntry {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for PairEntry {}

impl PartialOrd for PairEntry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for PairEntry {
    fn cmp(&self, other: &Self) -> Ordering {
        // BinaryHeap is a max-heap; invert so the closest pair (ties going
        // to the leftmost) pops first.
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.left_start.cmp(&self.left_start))
    }
}

/// Agglomerates the sample bottom-up, always merging the closest pair of
/// neighboring clusters, until `k` interval clusters remain. In one
/// dimension the closest pair under both supported linkages is always a
/// neighboring pair, so restricting merges to neighbors reproduces
/// unrestricted agglomerative clustering at O(N log N).
pub fn hierarchical_partition(
    data: &WeightedSample,
    k: usize,
    linkage: Linkage,
) -> Result<BlockPartition> {
    let n = data.len();
    if k == 0 {
        return Err(Error::InvalidArgument("block count must be at least 1".into()));
    }
    if k > n {
        return Err(Error::Infeasible(format!(
            "cannot split {n} points into {k} nonempty clusters"
        )));
    }
    let xs = data.xs();
    let ys = data.ys();

    let mut clusters: Vec<Cluster> = (0..n)
        .map(|i| Cluster {
            start: i,
            end: i + 1,
            weight: ys[i],
            wsum: ys[i] * xs[i],
            usum: xs[i],
            stamp: 0,
        })
        .collect();
    // Doubly linked active list over cluster slots.
    let mut next: Vec<usize> = (1..=n).collect();
    let mut prev: Vec<usize> = (0..n).map(|i| i.wrapping_sub(1)).collect();
    let mut alive = vec![true; n];

    let dist = |clusters: &[Cluster], a: usize, b: usize| -> f64 {
        match linkage {
            Linkage::Complete => xs[clusters[b].end - 1] - xs[clusters[a].start],
            Linkage::Average => clusters[b].mean() - clusters[a].mean(),
        }
    };

    let mut heap: BinaryHeap<PairEntry> = BinaryHeap::with_capacity(2 * n);
    for a in 0..n.saturating_sub(1) {
        heap.push(PairEntry {
            dist: dist(&clusters, a, a + 1),
            left_start: a,
            left: a,
            right: a + 1,
            left_stamp: 0,
            right_stamp: 0,
        });
    }

    let mut remaining = n;
    while remaining > k {
        let entry = heap.pop().expect("a mergeable pair always exists while remaining > 1");
        let a = entry.left;
        let b = entry.right;
        if !alive[a]
            || !alive[b]
            || next[a] != b
            || clusters[a].stamp != entry.left_stamp
            || clusters[b].stamp != entry.right_stamp
        {
            continue; // outdated entry
        }
        // Merge b into a.
        clusters[a].end = clusters[b].end;
        clusters[a].weight += clusters[b].weight;
        clusters[a].wsum += clusters[b].wsum;
        clusters[a].usum += clusters[b].usum;
        clusters[a].stamp += 1;
        alive[b] = false;
        next[a] = next[b];
        if next[b] < n {
            prev[next[b]] = a;
        }
        remaining -= 1;

        if prev[a] < n {
            let p = prev[a];
            heap.push(PairEntry {
                dist: dist(&clusters, p, a),
                left_start: clusters[p].start,
                left: p,
                right: a,
                left_stamp: clusters[p].stamp,
                right_stamp: clusters[a].stamp,
            });
        }
        if next[a] < n {
            let q = next[a];
            heap.push(PairEntry {
                dist: dist(&clusters, a, q),
                left_start: clusters[a].start,
                left: a,
                right: q,
                left_stamp: clusters[a].stamp,
                right_stamp: clusters[q].stamp,
            });
        }
    }

    let mut boundaries = Vec::with_capacity(k + 1);
    boundaries.push(0);
    let mut c = 0usize;
    loop {
        boundaries.push(clusters[c].end);
        if next[c] >= n {
            break;
        }
        c = next[c];
    }
    BlockPartition::new(boundaries)
}
