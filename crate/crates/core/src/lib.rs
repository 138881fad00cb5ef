//! Minimizing weight-register bit flips when quantized weight matrices are
//! streamed into an input-stationary accelerator array.
//!
//! The crate covers the metric ([`metrics`]), the optimizers that pick a
//! streaming plan ([`reorder`], [`partition`]), a cycle-level simulator that
//! counts flips and checks that an optimized plan still computes the same
//! outputs ([`sim`]), and the hardware/model artifacts a plan needs at
//! deployment time ([`artifacts`]).

pub mod artifacts;
pub mod config;
pub mod error;
pub mod io;
pub mod matrix;
pub mod metrics;
pub mod par;
pub mod partition;
pub mod plan;
pub mod reorder;
pub mod samples;
pub mod sim;

pub use artifacts::{
    apply_output_lut, emit_lut, input_permutation_from_order, input_permutation_lut, relayout_pair,
    stream_layout, AddressLut,
};
pub use config::{ArrayConfig, EnergyParams};
pub use error::{ErrorClass, HdError, Result};
pub use matrix::{LayerShape, WeightMatrix};
pub use metrics::{hd_matrix, hd_plan, hd_scalar, hd_with_order, nhd, HdReport};
pub use partition::{
    cluster_then_reorder, segment_then_reorder, ClusterConfig, ClusterTrace, InnerSolver,
};
pub use plan::{ChannelOrder, ClusterPlan, Segment};
pub use reorder::{
    exact_reorder, exact_reorder_from, greedy_reorder, reorder_with_fallback, EXACT_MAX_CHANNELS,
};
pub use sim::{
    estimate_energy, simulate_stream, simulate_stream_with_lut, ActivationSet, EnergyEstimate,
    EnergyMode, StreamReport,
};
