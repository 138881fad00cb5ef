//! Hamming-distance metrics over codes, matrices, orders and plans.

use serde::{Deserialize, Serialize};

use crate::error::{HdError, Result};
use crate::matrix::WeightMatrix;
use crate::par;
use crate::plan::{ChannelOrder, ClusterPlan};

/// Bit flips between two `bits`-wide codes.
pub fn hd_scalar(a: u32, b: u32, bits: u32) -> Result<u32> {
    if bits == 0 || bits > 32 {
        return Err(HdError::BitWidth(bits));
    }
    let limit = 1u64 << bits;
    for v in [a, b] {
        if u64::from(v) >= limit {
            return Err(HdError::CodeOutOfRange {
                row: 0,
                col: 0,
                value: v.into(),
                bits,
            });
        }
    }
    Ok((a ^ b).count_ones())
}

#[inline]
pub(crate) fn flips(a: u16, b: u16) -> u64 {
    u64::from((a ^ b).count_ones())
}

/// Total flips of streaming `w` in its natural row order.
pub fn hd_matrix(w: &WeightMatrix) -> u64 {
    (1..w.rows())
        .map(|r| {
            w.row(r - 1)
                .iter()
                .zip(w.row(r))
                .map(|(&a, &b)| flips(a, b))
                .sum::<u64>()
        })
        .sum()
}

/// Total flips of streaming `w` row-by-row following `order`, counted only on
/// `columns` (every column when `None`).
pub fn hd_with_order(
    w: &WeightMatrix,
    order: &ChannelOrder,
    columns: Option<&[usize]>,
) -> Result<u64> {
    if order.len() != w.rows() {
        return Err(HdError::InvalidPermutation {
            len: w.rows(),
            reason: format!(
                "order has {} entries for {} channels",
                order.len(),
                w.rows()
            ),
        });
    }
    match columns {
        None => {
            let all: Vec<usize> = (0..w.cols()).collect();
            Ok(order_cost(w, order.as_slice(), &all))
        }
        Some(cols) => {
            if let Some(&bad) = cols.iter().find(|&&c| c >= w.cols()) {
                return Err(HdError::ShapeMismatch(format!(
                    "column {bad} out of range for {} columns",
                    w.cols()
                )));
            }
            Ok(order_cost(w, order.as_slice(), cols))
        }
    }
}

/// Unchecked core of [`hd_with_order`].
pub(crate) fn order_cost(w: &WeightMatrix, order: &[usize], cols: &[usize]) -> u64 {
    order
        .windows(2)
        .map(|pair| {
            let (a, b) = (w.row(pair[0]), w.row(pair[1]));
            cols.iter().map(|&c| flips(a[c], b[c])).sum::<u64>()
        })
        .sum()
}

/// Flips contributed by a single column when rows stream in `order`.
pub(crate) fn column_cost(w: &WeightMatrix, order: &[usize], col: usize) -> u64 {
    order
        .windows(2)
        .map(|pair| flips(w.get(pair[0], col), w.get(pair[1], col)))
        .sum()
}

/// Flip totals of a plan applied to a matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HdReport {
    #[serde(rename = "hd")]
    pub total_hd: u64,
    /// `total_hd / (C * (K - 1) * B)`; `None` when `K = 1`.
    pub nhd: Option<f64>,
    pub per_segment: Vec<u64>,
}

/// Sum of per-segment flips, each segment streamed in its own order.
pub fn hd_plan(w: &WeightMatrix, plan: &ClusterPlan) -> Result<HdReport> {
    plan.validate_for(w.rows(), w.cols())?;
    let per_segment = par::map_indexed(plan.segments().len(), |i| {
        let seg = &plan.segments()[i];
        order_cost(w, seg.order().as_slice(), seg.columns())
    });
    let total_hd = per_segment.iter().sum();
    Ok(HdReport {
        total_hd,
        nhd: nhd_of(total_hd, w).ok(),
        per_segment,
    })
}

/// Upper bound on flips for any order: `C * (K - 1) * B`.
pub fn max_hd(w: &WeightMatrix) -> u64 {
    (w.cols() as u64) * (w.rows() as u64 - 1) * u64::from(w.bits())
}

/// Normalized hamming distance of `w` in natural order: the average flip
/// probability per streamed bit.
pub fn nhd(w: &WeightMatrix) -> Result<f64> {
    nhd_of(hd_matrix(w), w)
}

pub(crate) fn nhd_of(hd: u64, w: &WeightMatrix) -> Result<f64> {
    if w.rows() < 2 {
        return Err(HdError::UndefinedNhd);
    }
    Ok(hd as f64 / max_hd(w) as f64)
}

/// Rows restricted to a column subset, bit-packed so that the distance between
/// two rows is a handful of XOR + popcount operations.
#[derive(Debug, Clone)]
pub(crate) struct PackedRows {
    words_per_row: usize,
    words: Vec<u64>,
}

impl PackedRows {
    pub fn new(w: &WeightMatrix, cols: &[usize]) -> Self {
        let bits = w.bits() as usize;
        let per_word = 64 / bits;
        let words_per_row = cols.len().div_ceil(per_word).max(1);
        let mut words = vec![0u64; words_per_row * w.rows()];
        for r in 0..w.rows() {
            let row = w.row(r);
            let dst = &mut words[r * words_per_row..(r + 1) * words_per_row];
            for (i, &c) in cols.iter().enumerate() {
                dst[i / per_word] |= u64::from(row[c]) << ((i % per_word) * bits);
            }
        }
        PackedRows {
            words_per_row,
            words,
        }
    }

    #[inline]
    fn row(&self, r: usize) -> &[u64] {
        &self.words[r * self.words_per_row..(r + 1) * self.words_per_row]
    }

    #[inline]
    pub fn distance(&self, a: usize, b: usize) -> u32 {
        self.row(a)
            .iter()
            .zip(self.row(b))
            .map(|(x, y)| (x ^ y).count_ones())
            .sum()
    }

    pub fn rows(&self) -> usize {
        self.words.len() / self.words_per_row
    }
}

/// Symmetric `K x K` row distance table over a column subset.
#[derive(Debug, Clone)]
pub(crate) struct DistanceTable {
    n: usize,
    d: Vec<u32>,
}

impl DistanceTable {
    pub fn new(w: &WeightMatrix, cols: &[usize]) -> Self {
        let packed = PackedRows::new(w, cols);
        let n = packed.rows();
        let mut d = vec![0u32; n * n];
        for i in 0..n {
            for j in i + 1..n {
                let v = packed.distance(i, j);
                d[i * n + j] = v;
                d[j * n + i] = v;
            }
        }
        DistanceTable { n, d }
    }

    #[inline]
    pub fn get(&self, a: usize, b: usize) -> u32 {
        self.d[a * self.n + b]
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn path_cost(&self, order: &[usize]) -> u64 {
        order
            .windows(2)
            .map(|p| u64::from(self.get(p[0], p[1])))
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::samples;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn scalar_examples() {
        assert_eq!(hd_scalar(0b00, 0b11, 2).unwrap(), 2);
        assert_eq!(hd_scalar(0b1010, 0b0101, 4).unwrap(), 4);
        assert_eq!(hd_scalar(9, 9, 4).unwrap(), 0);
        assert!(matches!(
            hd_scalar(4, 0, 2),
            Err(HdError::CodeOutOfRange { .. })
        ));
    }

    #[test]
    fn matrix_examples() {
        assert_eq!(hd_matrix(&samples::w_a()), 24);
        assert_eq!(hd_matrix(&samples::w_b()), 12);
        let single = WeightMatrix::new("r", 4, 1, 3, vec![1, 2, 3]).unwrap();
        assert_eq!(hd_matrix(&single), 0);
    }

    #[test]
    fn ordered_examples() {
        let order = ChannelOrder::new(vec![0, 2, 1, 3]).unwrap();
        assert_eq!(hd_with_order(&samples::w_a(), &order, None).unwrap(), 8);
        assert_eq!(hd_with_order(&samples::w_b(), &order, None).unwrap(), 4);
        let short = ChannelOrder::new(vec![0, 1]).unwrap();
        assert!(hd_with_order(&samples::w_a(), &short, None).is_err());
        assert!(hd_with_order(&samples::w_a(), &order, Some(&[4])).is_err());
    }

    #[test]
    fn plan_examples() {
        let w = samples::w_c();
        let seg = samples::w_c_contiguous_plan();
        let report = hd_plan(&w, &seg).unwrap();
        assert_eq!(report.per_segment, vec![12, 10]);
        assert_eq!(report.total_hd, 22);
        let clustered = samples::w_c_clustered_plan();
        assert_eq!(hd_plan(&w, &clustered).unwrap().total_hd, 16);
        let constant = WeightMatrix::constant("c", 2, 4, 8, 2).unwrap();
        assert_eq!(hd_plan(&constant, &clustered).unwrap().total_hd, 0);
        assert!(hd_plan(&samples::w_a(), &clustered).is_err());
    }

    #[test]
    fn nhd_examples() {
        assert_eq!(nhd(&samples::w_a()).unwrap(), 1.0);
        assert_eq!(
            nhd(&WeightMatrix::constant("c", 4, 5, 5, 7).unwrap()).unwrap(),
            0.0
        );
        let single = WeightMatrix::new("r", 4, 1, 3, vec![1, 2, 3]).unwrap();
        assert!(matches!(nhd(&single), Err(HdError::UndefinedNhd)));
        let report = hd_plan(&single, &ClusterPlan::identity(1, 3).unwrap()).unwrap();
        assert_eq!((report.total_hd, report.nhd), (0, None));
    }

    #[test]
    fn random_matrix_nhd_near_half() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let w = WeightMatrix::random("r", 4, 256, 256, &mut rng).unwrap();
        let v = nhd(&w).unwrap();
        assert!((v - 0.5).abs() <= 0.01, "nhd {v}");
    }

    #[test]
    fn packed_distance_matches_scalar_sum() {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        for bits in [1, 3, 4, 7, 16] {
            let w = WeightMatrix::random("r", bits, 6, 37, &mut rng).unwrap();
            let cols: Vec<usize> = (0..37).rev().step_by(2).collect();
            let table = DistanceTable::new(&w, &cols);
            for a in 0..6 {
                for b in 0..6 {
                    let direct: u64 = cols.iter().map(|&c| flips(w.get(a, c), w.get(b, c))).sum();
                    assert_eq!(u64::from(table.get(a, b)), direct);
                }
            }
        }
    }

    fn matrix_and_order() -> impl Strategy<Value = (WeightMatrix, Vec<usize>)> {
        (1u32..=6, 1usize..7, 1usize..7).prop_flat_map(|(bits, k, c)| {
            let codes = proptest::collection::vec(0u16..(1u16 << bits), k * c);
            let order = Just((0..k).collect::<Vec<_>>()).prop_shuffle();
            (codes, order).prop_map(move |(data, order)| {
                (WeightMatrix::new("p", bits, k, c, data).unwrap(), order)
            })
        })
    }

    proptest! {
        #[test]
        fn scalar_is_a_metric(a in 0u32..256, b in 0u32..256, c in 0u32..256) {
            let ab = hd_scalar(a, b, 8).unwrap();
            prop_assert_eq!(ab, hd_scalar(b, a, 8).unwrap());
            prop_assert!(hd_scalar(a, c, 8).unwrap() <= ab + hd_scalar(b, c, 8).unwrap());
            prop_assert_eq!(hd_scalar(a, a, 8).unwrap(), 0);
        }

        #[test]
        fn column_separable_and_bounded((w, order) in matrix_and_order()) {
            let order = ChannelOrder::new(order).unwrap();
            let total = hd_with_order(&w, &order, None).unwrap();
            let per_col: u64 = (0..w.cols())
                .map(|c| hd_with_order(&w, &order, Some(&[c])).unwrap())
                .sum();
            prop_assert_eq!(total, per_col);
            prop_assert!(total <= max_hd(&w));
            let reversed: Vec<usize> = (0..w.cols()).rev().collect();
            prop_assert_eq!(hd_with_order(&w, &order, Some(&reversed)).unwrap(), total);
        }

        #[test]
        fn identity_order_and_trivial_plan_match_matrix((w, _) in matrix_and_order()) {
            let hd = hd_matrix(&w);
            prop_assert_eq!(hd_with_order(&w, &ChannelOrder::identity(w.rows()), None).unwrap(), hd);
            let plan = ClusterPlan::identity(w.rows(), w.cols()).unwrap();
            let report = hd_plan(&w, &plan).unwrap();
            prop_assert_eq!(report.total_hd, hd);
            prop_assert_eq!(report.per_segment.iter().sum::<u64>(), report.total_hd);
        }
    }
}
