//! Globally optimal splitting of a sorted sample into contiguous blocks.
//! A dynamic program over block ends finds the partition minimizing the
//! cumulative block score; an exhaustive enumerator with the same
//! tie-break rule serves as a test oracle.

use crate::error::{Error, Result};
use crate::model::{BlockPartition, WeightedSample};
use crate::scoring::{block_score, PrefixAccumulator, ScoreKind, ScoringSpec};

fn infeasible(n: usize, k: usize, spec: &ScoringSpec) -> Error {
    let range_normalized = matches!(spec.kind(), ScoreKind::Q3 | ScoreKind::Q4);
    if range_normalized && 2 * k > n {
        Error::Infeasible(format!(
            "range-normalized scoring needs at least 2 points per block, \
             so {n} points admit at most {} blocks (requested {k})",
            n / 2
        ))
    } else {
        Error::Infeasible(format!(
            "every partition of {n} points into {k} blocks contains a block \
             with zero weight or zero range"
        ))
    }
}

fn check_k(n: usize, k: usize) -> Result<()> {
    if k == 0 {
        return Err(Error::InvalidArgument("block count must be at least 1".into()));
    }
    if k > n {
        return Err(Error::Infeasible(format!(
            "cannot split {n} points into {k} nonempty blocks"
        )));
    }
    Ok(())
}

/// Finds the partition of the sample into exactly `k` contiguous blocks
/// minimizing the summed block score, by dynamic programming over block
/// ends (O(k·N²) time, O(1) per block score). Returns the partition and
/// its total score.
///
/// Ties are broken deterministically: at every backtracking step the
/// smaller start index for the trailing block wins.
pub fn dp_partition(
    data: &WeightedSample,
    k: usize,
    spec: &ScoringSpec,
) -> Result<(BlockPartition, f64)> {
    let n = data.len();
    check_k(n, k)?;
    let acc = PrefixAccumulator::new(data);
    let score = |i: usize, j: usize| block_score(&acc, i..j, spec).value();

    // prev[j]: best score splitting the prefix [0, j) into the current
    // number of blocks. Infinite entries mark infeasible prefixes; they
    // propagate through the minimization without special cases.
    let mut prev: Vec<f64> = (0..=n).map(|j| if j == 0 { f64::INFINITY } else { score(0, j) }).collect();
    let mut cur = vec![f64::INFINITY; n + 1];
    // args[m-2][j]: start of the last block in the best split of [0, j)
    // into m blocks.
    let mut args: Vec<Vec<u32>> = Vec::with_capacity(k.saturating_sub(1));

    for m in 2..=k {
        let mut arg_row = vec![u32::MAX; n + 1];
        for slot in cur.iter_mut().take(m) {
            *slot = f64::INFINITY;
        }
        for j in m..=n {
            let mut best = f64::INFINITY;
            let mut best_i = u32::MAX;
            for i in (m - 1)..j {
                let p = prev[i];
                if p.is_infinite() {
                    continue;
                }
                let cand = p + score(i, j);
                if cand < best {
                    best = cand;
                    best_i = i as u32;
                }
            }
            cur[j] = best;
            arg_row[j] = best_i;
        }
        args.push(arg_row);
        std::mem::swap(&mut prev, &mut cur);
    }

    let total = prev[n];
    if !total.is_finite() {
        return Err(infeasible(n, k, spec));
    }

    let mut boundaries = vec![0usize; k + 1];
    boundaries[k] = n;
    let mut j = n;
    for m in (2..=k).rev() {
        let i = args[m - 2][j] as usize;
        boundaries[m - 1] = i;
        j = i;
    }
    Ok((BlockPartition::new(boundaries)?, total))
}

/// Returns true when candidate boundaries beat the incumbent under the
/// partition ordering: smaller total score first, then the smaller start
/// of the last block, then of the one before it, and so on (the same
/// order the dynamic program's backtracking produces).
fn beats(cand_score: f64, cand: &[usize], best_score: f64, best: &[usize]) -> bool {
    if cand_score < best_score {
        return true;
    }
    if cand_score > best_score {
        return false;
    }
    for t in (0..cand.len()).rev() {
        if cand[t] != best[t] {
            return cand[t] < best[t];
        }
    }
    false
}

/// Exhaustively enumerates every split of the sample into exactly `k`
/// contiguous blocks and returns the best under the same ordering as
/// [`dp_partition`]. Guarded to N ≤ 20 points; intended as a test oracle.
pub fn brute_force_partition(
    data: &WeightedSample,
    k: usize,
    spec: &ScoringSpec,
) -> Result<(BlockPartition, f64)> {
    let n = data.len();
    if n > 20 {
        return Err(Error::InvalidArgument(format!(
            "exhaustive enumeration supports at most 20 points, got {n}"
        )));
    }
    check_k(n, k)?;
    let acc = PrefixAccumulator::new(data);

    let mut best_score = f64::INFINITY;
    let mut best: Option<Vec<usize>> = None;
    // Interior boundaries: strictly increasing (k−1)-subsets of 1..n,
    // visited in lexicographic order, each evaluated before advancing.
    let mut interior: Vec<usize> = (1..k).collect();
    loop {
        let mut total = 0.0;
        let mut start = 0;
        for &b in &interior {
            total += block_score(&acc, start..b, spec).value();
            start = b;
        }
        total += block_score(&acc, start..n, spec).value();
        if total.is_finite() {
            let better = match &best {
                None => true,
                Some(b) => beats(total, &interior, best_score, b),
            };
            if better {
                best_score = total;
                best = Some(interior.clone());
            }
        }

        // Advance: bump the rightmost entry with headroom (entry `pos` may
        // reach at most n − (len − pos)) and reset everything after it.
        let len = interior.len();
        if len == 0 {
            break; // k == 1: single partition.
        }
        let mut advanced = false;
        let mut pos = len;
        while pos > 0 {
            pos -= 1;
            if interior[pos] < n - (len - pos) {
                interior[pos] += 1;
                for t in pos + 1..len {
                    interior[t] = interior[t - 1] + 1;
                }
                advanced = true;
                break;
            }
        }
        if !advanced {
            break;
        }
    }

    match best {
        Some(interior) => {
            let mut boundaries = Vec::with_capacity(k + 1);
            boundaries.push(0);
            boundaries.extend(interior);
            boundaries.push(n);
            Ok((BlockPartition::new(boundaries)?, best_score))
        }
        None => Err(infeasible(n, k, spec)),
    }
}
