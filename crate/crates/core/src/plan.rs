//! Streaming plans: output-channel orders, input-channel segments, and the
//! full cluster plan that covers a weight matrix.

use std::collections::HashSet;

use crate::error::{HdError, Result};

/// A permutation of the `K` output channels, giving the order in which rows
/// are streamed into the array.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct ChannelOrder(Vec<usize>);

impl ChannelOrder {
    pub fn new(order: Vec<usize>) -> Result<Self> {
        check_permutation(&order)?;
        Ok(ChannelOrder(order))
    }

    pub fn identity(len: usize) -> Self {
        ChannelOrder((0..len).collect())
    }

    /// Wraps an order the caller already knows to be a permutation.
    pub(crate) fn from_trusted(order: Vec<usize>) -> Self {
        debug_assert!(check_permutation(&order).is_ok());
        ChannelOrder(order)
    }

    pub fn as_slice(&self) -> &[usize] {
        &self.0
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn is_identity(&self) -> bool {
        self.0.iter().enumerate().all(|(i, &v)| i == v)
    }

    /// `inverse()[order[j]] == j`.
    pub fn inverse(&self) -> ChannelOrder {
        let mut inv = vec![0; self.0.len()];
        for (pos, &ch) in self.0.iter().enumerate() {
            inv[ch] = pos;
        }
        ChannelOrder(inv)
    }

    pub fn into_inner(self) -> Vec<usize> {
        self.0
    }
}

impl AsRef<[usize]> for ChannelOrder {
    fn as_ref(&self) -> &[usize] {
        &self.0
    }
}

pub(crate) fn check_permutation(order: &[usize]) -> Result<()> {
    let len = order.len();
    if len == 0 {
        return Err(HdError::InvalidPermutation {
            len,
            reason: "empty order".into(),
        });
    }
    let mut seen = vec![false; len];
    for &v in order {
        if v >= len {
            return Err(HdError::InvalidPermutation {
                len,
                reason: format!("index {v} out of range"),
            });
        }
        if std::mem::replace(&mut seen[v], true) {
            return Err(HdError::InvalidPermutation {
                len,
                reason: format!("index {v} repeated"),
            });
        }
    }
    Ok(())
}

/// A group of input-channel columns streamed together, with the output-channel
/// order used while streaming it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Segment {
    columns: Vec<usize>,
    order: ChannelOrder,
}

impl Segment {
    pub fn new(columns: Vec<usize>, order: ChannelOrder) -> Result<Self> {
        if columns.is_empty() {
            return Err(HdError::InvalidPlan("segment has no columns".into()));
        }
        let mut seen = HashSet::with_capacity(columns.len());
        if let Some(dup) = columns.iter().find(|c| !seen.insert(**c)) {
            return Err(HdError::InvalidPlan(format!(
                "column {dup} repeated within a segment"
            )));
        }
        Ok(Segment { columns, order })
    }

    pub fn columns(&self) -> &[usize] {
        &self.columns
    }

    pub fn order(&self) -> &ChannelOrder {
        &self.order
    }
}

/// Partition of all input-channel columns into segments of at most `width`
/// columns, each with its own output-channel order.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ClusterPlan {
    width: usize,
    segments: Vec<Segment>,
    seed: Option<u64>,
}

impl ClusterPlan {
    /// Validates disjointness, coverage of `0..C` (where `C` is the total
    /// column count), the width bound, and that all orders share one `K`.
    pub fn new(width: usize, segments: Vec<Segment>) -> Result<Self> {
        if width == 0 {
            return Err(HdError::InvalidPlan("width must be >= 1".into()));
        }
        let Some(first) = segments.first() else {
            return Err(HdError::InvalidPlan("plan has no segments".into()));
        };
        let channels = first.order.len();
        let total: usize = segments.iter().map(|s| s.columns.len()).sum();
        let mut owner = vec![usize::MAX; total];
        for (i, seg) in segments.iter().enumerate() {
            if seg.columns.len() > width {
                return Err(HdError::InvalidPlan(format!(
                    "segment {i} has {} columns, more than width {width}",
                    seg.columns.len()
                )));
            }
            if seg.order.len() != channels {
                return Err(HdError::InvalidPlan(format!(
                    "segment {i} orders {} channels, segment 0 orders {channels}",
                    seg.order.len()
                )));
            }
            for &c in &seg.columns {
                if c >= total {
                    return Err(HdError::InvalidPlan(format!(
                        "column {c} in segment {i} leaves a gap: columns must cover 0..{total}"
                    )));
                }
                if owner[c] != usize::MAX {
                    return Err(HdError::InvalidPlan(format!(
                        "column {c} appears in segments {} and {i}",
                        owner[c]
                    )));
                }
                owner[c] = i;
            }
        }
        Ok(ClusterPlan {
            width,
            segments,
            seed: None,
        })
    }

    /// One segment holding every column in natural order, identity row order.
    pub fn identity(channels: usize, columns: usize) -> Result<Self> {
        let seg = Segment::new((0..columns).collect(), ChannelOrder::identity(channels))?;
        Self::new(columns, vec![seg])
    }

    /// One segment with all columns streamed in the given row order.
    pub fn single(columns: usize, order: ChannelOrder) -> Result<Self> {
        Self::new(columns, vec![Segment::new((0..columns).collect(), order)?])
    }

    /// Checks the plan against a `rows x cols` matrix.
    pub fn validate_for(&self, rows: usize, cols: usize) -> Result<()> {
        if self.channels() != rows || self.columns() != cols {
            return Err(HdError::ShapeMismatch(format!(
                "plan covers {}x{} but matrix is {rows}x{cols}",
                self.channels(),
                self.columns()
            )));
        }
        Ok(())
    }

    pub fn width(&self) -> usize {
        self.width
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Number of output channels `K` each segment orders.
    pub fn channels(&self) -> usize {
        self.segments[0].order.len()
    }

    /// Number of input-channel columns `C` the plan covers.
    pub fn columns(&self) -> usize {
        self.segments.iter().map(|s| s.columns.len()).sum()
    }

    /// PRNG seed that produced the plan, when one was involved.
    pub fn seed(&self) -> Option<u64> {
        self.seed
    }

    pub fn with_seed(mut self, seed: Option<u64>) -> Self {
        self.seed = seed;
        self
    }

    /// Columns of every segment, concatenated in segment order. This is the
    /// input-channel order a consumer of the plan reads activations in.
    pub fn concatenated_columns(&self) -> Vec<usize> {
        self.segments
            .iter()
            .flat_map(|s| s.columns.iter().copied())
            .collect()
    }
}
