//! Quantized weight matrices and layer shapes.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{HdError, Result};

/// Largest supported weight bit width.
pub const MAX_BITS: u32 = 16;

/// A `K x C` grid of unsigned `B`-bit weight codes, row-major.
///
/// Rows are output channels and columns are input channels (with any
/// `F_x * F_y` filter taps already flattened into the column axis). Codes are
/// opaque bit patterns; nothing here interprets them as signed values.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct WeightMatrix {
    name: String,
    bits: u32,
    rows: usize,
    cols: usize,
    data: Vec<u16>,
}

impl WeightMatrix {
    pub fn new(
        name: impl Into<String>,
        bits: u32,
        rows: usize,
        cols: usize,
        data: Vec<u16>,
    ) -> Result<Self> {
        check_bits(bits)?;
        if rows == 0 || cols == 0 {
            return Err(HdError::Dimension(format!(
                "matrix must be at least 1x1, got {rows}x{cols}"
            )));
        }
        let expected = rows * cols;
        if data.len() != expected {
            let first_bad = data.len().min(expected);
            return Err(HdError::LengthMismatch {
                expected,
                actual: data.len(),
                row: first_bad / cols,
                col: first_bad % cols,
            });
        }
        let limit = 1u32 << bits;
        if let Some(pos) = data.iter().position(|&v| u32::from(v) >= limit) {
            return Err(HdError::CodeOutOfRange {
                row: pos / cols,
                col: pos % cols,
                value: u64::from(data[pos]),
                bits,
            });
        }
        Ok(WeightMatrix {
            name: name.into(),
            bits,
            rows,
            cols,
            data,
        })
    }

    /// Builds a matrix from explicit rows, which must all have the same length.
    pub fn from_rows<R: AsRef<[u16]>>(
        name: impl Into<String>,
        bits: u32,
        rows: &[R],
    ) -> Result<Self> {
        let cols = rows.first().map_or(0, |r| r.as_ref().len());
        if let Some(bad) = rows.iter().position(|r| r.as_ref().len() != cols) {
            return Err(HdError::ShapeMismatch(format!(
                "row {bad} has {} columns, expected {cols}",
                rows[bad].as_ref().len()
            )));
        }
        let data = rows
            .iter()
            .flat_map(|r| r.as_ref().iter().copied())
            .collect();
        Self::new(name, bits, rows.len(), cols, data)
    }

    /// Uniformly random codes.
    pub fn random<R: Rng + ?Sized>(
        name: impl Into<String>,
        bits: u32,
        rows: usize,
        cols: usize,
        rng: &mut R,
    ) -> Result<Self> {
        check_bits(bits)?;
        let limit = 1u32 << bits;
        let data = (0..rows * cols)
            .map(|_| rng.random_range(0..limit) as u16)
            .collect();
        Self::new(name, bits, rows, cols, data)
    }

    /// A matrix with every code equal to `value`.
    pub fn constant(
        name: impl Into<String>,
        bits: u32,
        rows: usize,
        cols: usize,
        value: u16,
    ) -> Result<Self> {
        Self::new(name, bits, rows, cols, vec![value; rows * cols])
    }

    pub fn name(&self) -> &str {
        &self.name
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    /// Number of output channels, `K`.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of (flattened) input channels, `C`.
    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn data(&self) -> &[u16] {
        &self.data
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> u16 {
        self.data[row * self.cols + col]
    }

    pub fn row(&self, row: usize) -> &[u16] {
        &self.data[row * self.cols..(row + 1) * self.cols]
    }

    pub fn with_name(mut self, name: impl Into<String>) -> Self {
        self.name = name.into();
        self
    }

    /// New matrix whose row `j` is row `order[j]` of `self`.
    ///
    /// `order` may repeat or omit rows; callers that need a relabeling should
    /// pass a validated permutation.
    pub fn select_rows(&self, order: &[usize]) -> Result<Self> {
        if let Some(&bad) = order.iter().find(|&&r| r >= self.rows) {
            return Err(HdError::ShapeMismatch(format!(
                "row index {bad} out of range for {} rows",
                self.rows
            )));
        }
        let data = order
            .iter()
            .flat_map(|&r| self.row(r).iter().copied())
            .collect();
        Self::new(self.name.clone(), self.bits, order.len(), self.cols, data)
    }

    /// New matrix whose column `j` is column `columns[j]` of `self`.
    pub fn select_cols(&self, columns: &[usize]) -> Result<Self> {
        if let Some(&bad) = columns.iter().find(|&&c| c >= self.cols) {
            return Err(HdError::ShapeMismatch(format!(
                "column index {bad} out of range for {} columns",
                self.cols
            )));
        }
        let data = (0..self.rows)
            .flat_map(|r| columns.iter().map(move |&c| self.get(r, c)))
            .collect();
        Self::new(self.name.clone(), self.bits, self.rows, columns.len(), data)
    }
}

pub(crate) fn check_bits(bits: u32) -> Result<()> {
    if (1..=MAX_BITS).contains(&bits) {
        Ok(())
    } else {
        Err(HdError::BitWidth(bits))
    }
}

/// Convolution layer shape. The weight matrix of the layer is
/// `k_out x (c_in * fx * fy)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct LayerShape {
    pub c_in: usize,
    pub k_out: usize,
    #[serde(default = "one")]
    pub fx: usize,
    #[serde(default = "one")]
    pub fy: usize,
}

fn one() -> usize {
    1
}

impl LayerShape {
    pub fn new(c_in: usize, k_out: usize) -> Self {
        LayerShape {
            c_in,
            k_out,
            fx: 1,
            fy: 1,
        }
    }

    pub fn with_filter(mut self, fx: usize, fy: usize) -> Self {
        self.fx = fx;
        self.fy = fy;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.c_in == 0 || self.k_out == 0 || self.fx == 0 || self.fy == 0 {
            return Err(HdError::Dimension(format!(
                "layer shape fields must be >= 1: {self:?}"
            )));
        }
        Ok(())
    }

    /// Rows of the flattened weight matrix.
    pub fn matrix_rows(&self) -> usize {
        self.k_out
    }

    /// Columns of the flattened weight matrix.
    pub fn matrix_cols(&self) -> usize {
        self.c_in * self.fx * self.fy
    }
}
