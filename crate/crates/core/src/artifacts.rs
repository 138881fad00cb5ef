//! Deployment artifacts for optimized plans: accumulator address tables and
//! re-laid-out weight matrices for adjacent layers.
//!
//! Table convention: `tables[i][j]` is the original output-channel address
//! that streaming position `j` of segment `i` accumulates into. Indices are
//! 0-based throughout.

use serde::{Deserialize, Serialize};

use crate::error::{HdError, Result};
use crate::matrix::WeightMatrix;
use crate::plan::{check_permutation, ClusterPlan, Segment};

/// Output address lookup tables, one per segment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AddressLut {
    depth: usize,
    tables: Vec<Vec<usize>>,
}

impl AddressLut {
    pub fn new(depth: usize, tables: Vec<Vec<usize>>) -> Result<Self> {
        if depth == 0 {
            return Err(HdError::InvalidArgument("buffer depth must be >= 1".into()));
        }
        let Some(first) = tables.first() else {
            return Err(HdError::InvalidArgument("LUT has no tables".into()));
        };
        let len = first.len();
        for t in &tables {
            if t.len() != len {
                return Err(HdError::ShapeMismatch("LUT tables differ in length".into()));
            }
            check_permutation(t)?;
        }
        if len > depth {
            return Err(HdError::Infeasible(format!(
                "{len} addresses exceed buffer depth {depth}"
            )));
        }
        Ok(AddressLut { depth, tables })
    }

    pub fn depth(&self) -> usize {
        self.depth
    }

    pub fn tables(&self) -> &[Vec<usize>] {
        &self.tables
    }

    /// Bits per entry: `ceil(log2 D)`.
    pub fn entry_bits(&self) -> u32 {
        self.depth.next_power_of_two().trailing_zeros()
    }

    /// Storage of a `D`-entry table in bits.
    pub fn memory_bits(&self) -> u64 {
        self.depth as u64 * u64::from(self.entry_bits())
    }
}

/// Address tables that let each segment accumulate into the original
/// channel slots even though it streams rows in its own order.
pub fn emit_lut(plan: &ClusterPlan, depth: usize) -> Result<AddressLut> {
    if plan.channels() > depth {
        return Err(HdError::Infeasible(format!(
            "{} output channels exceed buffer depth {depth}",
            plan.channels()
        )));
    }
    AddressLut::new(
        depth,
        plan.segments()
            .iter()
            .map(|s| s.order().as_slice().to_vec())
            .collect(),
    )
}

/// Reorders the output channels of a layer without any hardware support:
/// rows of `w1` follow the plan's single order and the matching columns of the
/// next layer's `w2` move with them, so `w2' * (w1' * x) == w2 * (w1 * x)`.
pub fn relayout_pair(
    w1: &WeightMatrix,
    plan1: &ClusterPlan,
    w2: &WeightMatrix,
) -> Result<(WeightMatrix, WeightMatrix)> {
    plan1.validate_for(w1.rows(), w1.cols())?;
    let [seg] = plan1.segments() else {
        return Err(HdError::InvalidPlan(format!(
            "re-layout needs a single-segment plan, got {} segments; use the address LUT instead",
            plan1.segments().len()
        )));
    };
    if w2.cols() != w1.rows() {
        return Err(HdError::ShapeMismatch(format!(
            "next layer has {} input channels, layer produces {}",
            w2.cols(),
            w1.rows()
        )));
    }
    let order = seg.order().as_slice();
    Ok((w1.select_rows(order)?, w2.select_cols(order)?))
}

/// Table for the *previous* layer's accumulator so that it emits channels in
/// the order a clustered next layer reads them (its segments' columns,
/// concatenated). Entry `j` names the channel emitted at position `j`.
pub fn input_permutation_lut(next_plan: &ClusterPlan, depth: usize) -> Result<AddressLut> {
    input_permutation_from_order(&next_plan.concatenated_columns(), depth)
}

/// [`input_permutation_lut`] for an explicit required channel order.
pub fn input_permutation_from_order(order: &[usize], depth: usize) -> Result<AddressLut> {
    check_permutation(order)?;
    AddressLut::new(depth, vec![order.to_vec()])
}

/// Write-out through an emission table: `out[j] = values[table[j]]`.
pub fn apply_output_lut(values: &[i64], table: &[usize]) -> Result<Vec<i64>> {
    if table.len() != values.len() {
        return Err(HdError::ShapeMismatch(format!(
            "table has {} entries for {} values",
            table.len(),
            values.len()
        )));
    }
    check_permutation(table)?;
    Ok(table.iter().map(|&a| values[a]).collect())
}

/// Re-expresses a layer and its plan in the coordinates of an activation
/// stream that arrives in `next_plan.concatenated_columns()` order: column `p`
/// of the returned matrix is original column `concat[p]`, and each segment
/// becomes a contiguous run of stream positions.
pub fn stream_layout(w: &WeightMatrix, plan: &ClusterPlan) -> Result<(WeightMatrix, ClusterPlan)> {
    plan.validate_for(w.rows(), w.cols())?;
    let concat = plan.concatenated_columns();
    let relaid = w.select_cols(&concat)?;
    let mut start = 0;
    let segments = plan
        .segments()
        .iter()
        .map(|s| {
            let n = s.columns().len();
            let seg = Segment::new((start..start + n).collect(), s.order().clone());
            start += n;
            seg
        })
        .collect::<Result<Vec<_>>>()?;
    Ok((
        relaid,
        ClusterPlan::new(plan.width(), segments)?.with_seed(plan.seed()),
    ))
}
