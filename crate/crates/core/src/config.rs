//! Array geometry and energy model parameters.

use serde::{Deserialize, Serialize};

use crate::error::{HdError, Result};

/// Input-stationary array geometry and operand widths.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ArrayConfig {
    /// Rows `R`: input channels streamed side by side in one segment.
    pub array_rows: usize,
    /// Columns `P`: stationary pixels sharing each streamed weight.
    pub array_cols: usize,
    pub weight_bits: u32,
    pub activation_bits: u32,
    pub psum_bits: u32,
    /// Accumulation buffer depth `D`; must hold all `K` outputs of a layer.
    pub buffer_depth: usize,
}

impl Default for ArrayConfig {
    fn default() -> Self {
        ArrayConfig {
            array_rows: 8,
            array_cols: 8,
            weight_bits: 4,
            activation_bits: 8,
            psum_bits: 32,
            buffer_depth: 1024,
        }
    }
}

impl ArrayConfig {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("array_rows", self.array_rows),
            ("array_cols", self.array_cols),
            ("weight_bits", self.weight_bits as usize),
            ("activation_bits", self.activation_bits as usize),
            ("psum_bits", self.psum_bits as usize),
            ("buffer_depth", self.buffer_depth),
        ];
        if let Some((name, _)) = fields.iter().find(|(_, v)| *v == 0) {
            return Err(HdError::InvalidArgument(format!("{name} must be >= 1")));
        }
        if self.weight_bits > 16 || self.activation_bits > 16 {
            return Err(HdError::InvalidArgument(
                "weight and activation widths are limited to 16 bits".into(),
            ));
        }
        if self.psum_bits > 64 {
            return Err(HdError::InvalidArgument(
                "psum_bits is limited to 64".into(),
            ));
        }
        Ok(())
    }
}

/// Relative energy units and reuse factors.
///
/// The `*_scale` factors weight each SRAM stream by its operand width relative
/// to the unit access (for example `psum_scale = 4` for 32-bit partial sums
/// against 8-bit operands). With all scales at 1 the memory term reduces to the
/// plain reuse-factor formula.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EnergyParams {
    pub compute_unit: f64,
    pub propagate_unit: f64,
    pub sram_unit: f64,
    pub tau_weight: f64,
    pub tau_input: f64,
    pub tau_psum: f64,
    /// Energy per weight-register bit flip.
    pub flip_unit: f64,
    pub op_scale: f64,
    pub weight_scale: f64,
    pub input_scale: f64,
    pub psum_scale: f64,
}

impl Default for EnergyParams {
    fn default() -> Self {
        EnergyParams {
            compute_unit: 1.0,
            propagate_unit: 2.0,
            sram_unit: 6.0,
            tau_weight: 16.0,
            tau_input: 16.0,
            tau_psum: 16.0,
            flip_unit: 1.0,
            op_scale: 1.0,
            weight_scale: 1.0,
            input_scale: 1.0,
            psum_scale: 1.0,
        }
    }
}

impl EnergyParams {
    pub fn validate(&self) -> Result<()> {
        let fields = [
            ("compute_unit", self.compute_unit),
            ("propagate_unit", self.propagate_unit),
            ("sram_unit", self.sram_unit),
            ("tau_weight", self.tau_weight),
            ("tau_input", self.tau_input),
            ("tau_psum", self.tau_psum),
            ("flip_unit", self.flip_unit),
            ("op_scale", self.op_scale),
            ("weight_scale", self.weight_scale),
            ("input_scale", self.input_scale),
            ("psum_scale", self.psum_scale),
        ];
        for (name, v) in fields {
            if !v.is_finite() || v < 0.0 {
                return Err(HdError::InvalidArgument(format!(
                    "{name} must be finite and >= 0, got {v}"
                )));
            }
        }
        for (name, tau) in [
            ("tau_weight", self.tau_weight),
            ("tau_input", self.tau_input),
            ("tau_psum", self.tau_psum),
        ] {
            if tau == 0.0 {
                return Err(HdError::InvalidArgument(format!("{name} must be > 0")));
            }
        }
        Ok(())
    }
}
