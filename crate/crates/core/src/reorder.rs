//! Output-channel reordering.
//!
//! Streaming rows in a different order is an open-path traveling salesman
//! problem over the rows, with the hamming distance between two rows (on the
//! selected columns) as the edge length. [`greedy_reorder`] is the
//! nearest-neighbour heuristic, [`exact_reorder`] solves small instances
//! optimally, and [`reorder_with_fallback`] wraps the heuristic so that it never
//! does worse than leaving the rows alone.

use crate::error::{HdError, Result};
use crate::matrix::WeightMatrix;
use crate::metrics::DistanceTable;
use crate::par;
use crate::plan::ChannelOrder;

/// Largest channel count accepted by the exact search.
pub const EXACT_MAX_CHANNELS: usize = 12;

fn check_columns(w: &WeightMatrix, columns: &[usize]) -> Result<()> {
    if columns.is_empty() {
        return Err(HdError::InvalidArgument("column subset is empty".into()));
    }
    if let Some(&bad) = columns.iter().find(|&&c| c >= w.cols()) {
        return Err(HdError::ShapeMismatch(format!(
            "column {bad} out of range for {} columns",
            w.cols()
        )));
    }
    Ok(())
}

fn check_start(w: &WeightMatrix, start: usize) -> Result<()> {
    if start >= w.rows() {
        return Err(HdError::InvalidArgument(format!(
            "start channel {start} out of range for {} channels",
            w.rows()
        )));
    }
    Ok(())
}

/// Nearest-neighbour ordering starting at `start`: each next row is the unused
/// row with the fewest flips against the previous one, lowest index on ties.
pub fn greedy_reorder(w: &WeightMatrix, columns: &[usize], start: usize) -> Result<ChannelOrder> {
    check_columns(w, columns)?;
    check_start(w, start)?;
    let table = DistanceTable::new(w, columns);
    Ok(ChannelOrder::from_trusted(greedy_path(&table, start)))
}

pub(crate) fn greedy_path(table: &DistanceTable, start: usize) -> Vec<usize> {
    let n = table.len();
    let mut used = vec![false; n];
    let mut order = Vec::with_capacity(n);
    let mut current = start;
    used[current] = true;
    order.push(current);
    for _ in 1..n {
        let mut best = usize::MAX;
        let mut best_d = u32::MAX;
        for (j, _) in used.iter().enumerate().filter(|(_, u)| !**u) {
            let d = table.get(current, j);
            if d < best_d {
                best_d = d;
                best = j;
            }
        }
        used[best] = true;
        order.push(best);
        current = best;
    }
    order
}

/// Optimal ordering over all `K!` permutations; among equally good orders the
/// lexicographically smallest is returned.
pub fn exact_reorder(w: &WeightMatrix, columns: &[usize]) -> Result<ChannelOrder> {
    check_columns(w, columns)?;
    check_exact_size(w)?;
    let table = DistanceTable::new(w, columns);
    Ok(ChannelOrder::from_trusted(exact_path(&table, None)))
}

/// Like [`exact_reorder`] but with the first streamed row pinned to `start`.
pub fn exact_reorder_from(
    w: &WeightMatrix,
    columns: &[usize],
    start: usize,
) -> Result<ChannelOrder> {
    check_columns(w, columns)?;
    check_exact_size(w)?;
    check_start(w, start)?;
    let table = DistanceTable::new(w, columns);
    Ok(ChannelOrder::from_trusted(exact_path(&table, Some(start))))
}

fn check_exact_size(w: &WeightMatrix) -> Result<()> {
    if w.rows() > EXACT_MAX_CHANNELS {
        return Err(HdError::TooManyChannels {
            channels: w.rows(),
            max: EXACT_MAX_CHANNELS,
        });
    }
    Ok(())
}

/// Held-Karp over subsets. `rest[mask][v]` is the cheapest way to finish the
/// path from `v` once the rows in `mask` (which contains `v`) are visited.
/// Rebuilding the path front to back and always taking the smallest row that
/// keeps an optimal completion gives the lexicographically smallest optimum.
pub(crate) fn exact_path(table: &DistanceTable, start: Option<usize>) -> Vec<usize> {
    let n = table.len();
    debug_assert!(n <= EXACT_MAX_CHANNELS);
    if n == 1 {
        return vec![0];
    }
    let full = (1usize << n) - 1;
    let mut rest = vec![u32::MAX; (full + 1) * n];
    for v in 0..n {
        rest[full * n + v] = 0;
    }
    for mask in (1..full).rev() {
        for v in (0..n).filter(|v| mask & (1 << v) != 0) {
            let mut best = u32::MAX;
            for u in (0..n).filter(|u| mask & (1 << u) == 0) {
                let cand = table.get(v, u) + rest[(mask | 1 << u) * n + u];
                best = best.min(cand);
            }
            rest[mask * n + v] = best;
        }
    }

    let first = match start {
        Some(s) => s,
        None => (0..n)
            .min_by_key(|&v| (rest[(1 << v) * n + v], v))
            .expect("n >= 1"),
    };
    let mut order = Vec::with_capacity(n);
    order.push(first);
    let mut mask = 1usize << first;
    let mut v = first;
    while mask != full {
        let target = rest[mask * n + v];
        let u = (0..n)
            .find(|&u| {
                mask & (1 << u) == 0 && table.get(v, u) + rest[(mask | 1 << u) * n + u] == target
            })
            .expect("an optimal successor always exists");
        order.push(u);
        mask |= 1 << u;
        v = u;
    }
    order
}

/// Best of greedy runs from the first `restarts` channels and the identity
/// order, so the result never streams with more flips than the identity.
/// Ties go to the lexicographically smaller order.
pub fn reorder_with_fallback(
    w: &WeightMatrix,
    columns: &[usize],
    restarts: usize,
) -> Result<ChannelOrder> {
    check_columns(w, columns)?;
    if restarts == 0 {
        return Err(HdError::InvalidArgument("restarts must be >= 1".into()));
    }
    let table = DistanceTable::new(w, columns);
    Ok(ChannelOrder::from_trusted(fallback_path(&table, restarts)))
}

pub(crate) fn fallback_path(table: &DistanceTable, restarts: usize) -> Vec<usize> {
    let n = table.len();
    let starts = restarts.min(n);
    let mut candidates: Vec<(u64, Vec<usize>)> = par::map_indexed(starts, |s| {
        let path = greedy_path(table, s);
        (table.path_cost(&path), path)
    });
    let identity: Vec<usize> = (0..n).collect();
    candidates.push((table.path_cost(&identity), identity));
    candidates
        .into_iter()
        .min()
        .map(|(_, path)| path)
        .expect("at least the identity candidate")
}
