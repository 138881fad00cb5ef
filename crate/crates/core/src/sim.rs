//! Cycle-level model of streaming a plan into an input-stationary array.
//!
//! Activations for up to `P` pixels sit in the array, one input channel per
//! array row. For every segment, the rows of the weight matrix stream through
//! the array in the segment's order: at step `j` array row `r` receives
//! `W[order[j], columns[r]]`, every PE column multiplies it with its stationary
//! activation, and the column reduction produces one partial sum per pixel.
//! A step counter indexes the address LUT, which sends the partial sum to the
//! accumulator slot of the original output channel.
//!
//! Flips are counted on the weight register at the input of each array row.
//! All PEs in a row see the same weight sequence, so one count per row is kept.

use serde::{Deserialize, Serialize};

use crate::artifacts::{emit_lut, AddressLut};
use crate::config::{ArrayConfig, EnergyParams};
use crate::error::{HdError, Result};
use crate::matrix::WeightMatrix;
use crate::metrics::flips;
use crate::plan::ClusterPlan;

/// Stationary activations: one vector of `C` codes per array column.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ActivationSet {
    bits: u32,
    vectors: Vec<Vec<u64>>,
}

impl ActivationSet {
    pub fn new(bits: u32, vectors: Vec<Vec<u64>>) -> Result<Self> {
        if bits == 0 || bits > 16 {
            return Err(HdError::BitWidth(bits));
        }
        let Some(first) = vectors.first() else {
            return Err(HdError::Dimension("activation set has no vectors".into()));
        };
        let len = first.len();
        if len == 0 {
            return Err(HdError::Dimension("activation vectors are empty".into()));
        }
        let limit = 1u64 << bits;
        for (p, v) in vectors.iter().enumerate() {
            if v.len() != len {
                return Err(HdError::ShapeMismatch(format!(
                    "activation vector {p} has {} codes, vector 0 has {len}",
                    v.len()
                )));
            }
            if let Some(c) = v.iter().position(|&x| x >= limit) {
                return Err(HdError::CodeOutOfRange {
                    row: c,
                    col: p,
                    value: v[c],
                    bits,
                });
            }
        }
        Ok(ActivationSet { bits, vectors })
    }

    pub fn bits(&self) -> u32 {
        self.bits
    }

    pub fn vectors(&self) -> &[Vec<u64>] {
        &self.vectors
    }

    /// Number of pixels `P`.
    pub fn pixels(&self) -> usize {
        self.vectors.len()
    }

    /// Input channels `C` per vector.
    pub fn channels(&self) -> usize {
        self.vectors[0].len()
    }
}

/// Outcome of one simulated layer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StreamReport {
    /// Flips between consecutive rows inside a segment.
    pub in_segment_flips: u64,
    /// Flips when the first row of a segment replaces the last row of the
    /// previous one.
    pub boundary_flips: u64,
    /// `outputs[p][k]`: accumulated result of output channel `k` for pixel `p`.
    pub outputs: Vec<Vec<i64>>,
    /// `flip_unit * (in_segment_flips + boundary_flips)`.
    pub energy: f64,
    /// Analytical SRAM energy for the layer's MAC count.
    pub mem_energy: f64,
}

impl StreamReport {
    pub fn total_flips(&self) -> u64 {
        self.in_segment_flips + self.boundary_flips
    }
}

/// Streams `plan` through the array, using the address LUT derived from the
/// plan's segment orders.
pub fn simulate_stream(
    w: &WeightMatrix,
    plan: &ClusterPlan,
    acts: &ActivationSet,
    cfg: &ArrayConfig,
    params: &EnergyParams,
) -> Result<StreamReport> {
    cfg.validate()?;
    let lut = emit_lut(plan, cfg.buffer_depth)?;
    simulate_stream_with_lut(w, plan, &lut, acts, cfg, params)
}

/// Like [`simulate_stream`] but with an explicit address LUT, one table per
/// segment.
pub fn simulate_stream_with_lut(
    w: &WeightMatrix,
    plan: &ClusterPlan,
    lut: &AddressLut,
    acts: &ActivationSet,
    cfg: &ArrayConfig,
    params: &EnergyParams,
) -> Result<StreamReport> {
    cfg.validate()?;
    params.validate()?;
    plan.validate_for(w.rows(), w.cols())?;
    let k = w.rows();
    if w.bits() > cfg.weight_bits {
        return Err(HdError::Infeasible(format!(
            "{}-bit weights on a {}-bit weight datapath",
            w.bits(),
            cfg.weight_bits
        )));
    }
    if acts.bits() > cfg.activation_bits {
        return Err(HdError::Infeasible(format!(
            "{}-bit activations on a {}-bit activation datapath",
            acts.bits(),
            cfg.activation_bits
        )));
    }
    if acts.channels() != w.cols() {
        return Err(HdError::ShapeMismatch(format!(
            "activations have {} channels, weights have {}",
            acts.channels(),
            w.cols()
        )));
    }
    if acts.pixels() > cfg.array_cols {
        return Err(HdError::Infeasible(format!(
            "{} pixels do not fit {} array columns",
            acts.pixels(),
            cfg.array_cols
        )));
    }
    if k > cfg.buffer_depth || k > lut.depth() {
        return Err(HdError::Infeasible(format!(
            "{k} output channels exceed accumulation buffer depth {}",
            cfg.buffer_depth.min(lut.depth())
        )));
    }
    if lut.tables().len() != plan.segments().len() || lut.tables().iter().any(|t| t.len() != k) {
        return Err(HdError::ShapeMismatch(
            "address LUT does not match the plan's segments".into(),
        ));
    }
    if let Some((i, seg)) = plan
        .segments()
        .iter()
        .enumerate()
        .find(|(_, s)| s.columns().len() > cfg.array_rows)
    {
        return Err(HdError::Infeasible(format!(
            "segment {i} streams {} channels on a {}-row array",
            seg.columns().len(),
            cfg.array_rows
        )));
    }

    let psum_max: i128 = (1i128 << (cfg.psum_bits - 1)) - 1;
    let mut registers: Vec<Option<u16>> = vec![None; cfg.array_rows];
    let mut acc = vec![vec![0i128; k]; acts.pixels()];
    let mut in_segment = 0u64;
    let mut boundary = 0u64;

    for (seg, table) in plan.segments().iter().zip(lut.tables()) {
        let cols = seg.columns();
        for (step, &row) in seg.order().as_slice().iter().enumerate() {
            let weights = w.row(row);
            for (r, &c) in cols.iter().enumerate() {
                let value = weights[c];
                if let Some(prev) = registers[r].replace(value) {
                    let f = flips(prev, value);
                    if step == 0 {
                        boundary += f;
                    } else {
                        in_segment += f;
                    }
                }
            }
            let addr = table[step];
            for (p, x) in acts.vectors().iter().enumerate() {
                let psum: i128 = cols
                    .iter()
                    .map(|&c| i128::from(weights[c]) * i128::from(x[c]))
                    .sum();
                let slot = &mut acc[p][addr];
                *slot += psum;
                if *slot > psum_max {
                    return Err(HdError::PsumOverflow {
                        value: *slot,
                        bits: cfg.psum_bits,
                    });
                }
            }
        }
    }

    let outputs = acc
        .into_iter()
        .map(|v| v.into_iter().map(|x| x as i64).collect())
        .collect();
    let ops = (k * w.cols() * acts.pixels()) as u64;
    let energy = estimate_energy(ops, in_segment + boundary, params, EnergyMode::Empirical)?;
    Ok(StreamReport {
        in_segment_flips: in_segment,
        boundary_flips: boundary,
        outputs,
        energy: energy.datapath,
        mem_energy: energy.mem,
    })
}

/// How the datapath term is computed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum EnergyMode {
    /// `OPs * (compute + propagate) * op_scale`.
    Analytical,
    /// `flip_unit * flips`: datapath energy tracks weight-input bit flips
    /// linearly.
    Empirical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EnergyEstimate {
    pub datapath: f64,
    pub mem: f64,
}

/// Datapath and SRAM energy of a layer with `ops` MACs.
///
/// SRAM energy is always `OPs * sram_unit * (s_w/tau_w + s_i/tau_i + s_p/tau_p)`
/// where the `s_*` are the operand-width scales in `params`.
pub fn estimate_energy(
    ops: u64,
    flips: u64,
    params: &EnergyParams,
    mode: EnergyMode,
) -> Result<EnergyEstimate> {
    params.validate()?;
    let ops_f = ops as f64;
    let datapath = match mode {
        EnergyMode::Analytical => {
            ops_f * (params.compute_unit + params.propagate_unit) * params.op_scale
        }
        EnergyMode::Empirical => params.flip_unit * flips as f64,
    };
    let reuse = params.weight_scale / params.tau_weight
        + params.input_scale / params.tau_input
        + params.psum_scale / params.tau_psum;
    Ok(EnergyEstimate {
        datapath,
        mem: ops_f * reuse * params.sram_unit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::plan::{ChannelOrder, Segment};
    use crate::samples;

    fn ones(c: usize) -> ActivationSet {
        ActivationSet::new(8, vec![vec![1; c]]).unwrap()
    }

    fn run(w: &WeightMatrix, plan: &ClusterPlan, acts: &ActivationSet) -> StreamReport {
        simulate_stream(
            w,
            plan,
            acts,
            &ArrayConfig::default(),
            &EnergyParams::default(),
        )
        .unwrap()
    }

    #[test]
    fn motivating_matrix_identity() {
        let w = samples::w_a();
        let r = run(&w, &ClusterPlan::identity(4, 4).unwrap(), &ones(4));
        assert_eq!(r.in_segment_flips, 24);
        assert_eq!(r.boundary_flips, 0);
        assert_eq!(r.outputs, vec![vec![0, 12, 0, 12]]);
        assert_eq!(r.energy, 24.0);
    }

    #[test]
    fn motivating_matrix_reordered() {
        let w = samples::w_a();
        let plan = ClusterPlan::single(4, ChannelOrder::new(vec![0, 2, 1, 3]).unwrap()).unwrap();
        let r = run(&w, &plan, &ones(4));
        assert_eq!(r.in_segment_flips, 8);
        assert_eq!(r.outputs, vec![vec![0, 12, 0, 12]]);
    }

    #[test]
    fn boundary_flips_counted_separately() {
        let w = samples::w_c();
        let plan = samples::w_c_clustered_plan();
        let acts = ActivationSet::new(8, vec![(0..8).collect(), vec![3; 8]]).unwrap();
        let r = run(&w, &plan, &acts);
        assert_eq!(r.in_segment_flips, 16);
        assert!(r.boundary_flips <= 4 * 2);
        for (p, x) in acts.vectors().iter().enumerate() {
            for k in 0..4 {
                let direct: i64 = (0..8).map(|c| i64::from(w.get(k, c)) * x[c] as i64).sum();
                assert_eq!(r.outputs[p][k], direct);
            }
        }
    }

    #[test]
    fn wrong_lut_breaks_outputs() {
        let w = samples::w_b();
        let plan = ClusterPlan::single(4, ChannelOrder::new(vec![0, 2, 1, 3]).unwrap()).unwrap();
        let identity = AddressLut::new(1024, vec![vec![0, 1, 2, 3]]).unwrap();
        let acts = ActivationSet::new(8, vec![vec![1, 2, 3, 4]]).unwrap();
        let cfg = ArrayConfig::default();
        let good = simulate_stream(&w, &plan, &acts, &cfg, &EnergyParams::default()).unwrap();
        let bad =
            simulate_stream_with_lut(&w, &plan, &identity, &acts, &cfg, &EnergyParams::default())
                .unwrap();
        // rows 1 and 2 differ, so swapping their addresses is visible
        assert_ne!(good.outputs, bad.outputs);
    }

    #[test]
    fn rejects_overwide_segment_and_shallow_buffer() {
        let w = samples::w_c();
        let plan = ClusterPlan::identity(4, 8).unwrap();
        let cfg = ArrayConfig {
            array_rows: 4,
            ..Default::default()
        };
        let err = simulate_stream(&w, &plan, &ones(8), &cfg, &EnergyParams::default()).unwrap_err();
        assert!(matches!(err, HdError::Infeasible(_)));
        let cfg = ArrayConfig {
            buffer_depth: 3,
            ..Default::default()
        };
        assert!(simulate_stream(&w, &plan, &ones(8), &cfg, &EnergyParams::default()).is_err());
        assert!(simulate_stream(
            &w,
            &plan,
            &ones(7),
            &ArrayConfig::default(),
            &EnergyParams::default()
        )
        .is_err());
    }

    #[test]
    fn psum_overflow_is_reported() {
        let w = WeightMatrix::constant("big", 4, 2, 8, 15).unwrap();
        let acts = ActivationSet::new(8, vec![vec![255; 8]]).unwrap();
        let cfg = ArrayConfig {
            psum_bits: 12,
            ..Default::default()
        };
        let err = simulate_stream(
            &w,
            &ClusterPlan::identity(2, 8).unwrap(),
            &acts,
            &cfg,
            &EnergyParams::default(),
        );
        assert!(matches!(err, Err(HdError::PsumOverflow { bits: 12, .. })));
    }

    #[test]
    fn activation_validation() {
        assert!(ActivationSet::new(4, vec![vec![16]]).is_err());
        assert!(ActivationSet::new(4, vec![vec![1, 2], vec![1]]).is_err());
        assert!(ActivationSet::new(4, vec![]).is_err());
    }

    #[test]
    fn narrow_segment_leaves_idle_rows() {
        // Three columns on width 2: second segment uses only array row 0.
        let w = WeightMatrix::from_rows("w", 2, &[[0u16, 3, 1], [3, 0, 2]]).unwrap();
        let plan = ClusterPlan::new(
            2,
            vec![
                Segment::new(vec![0, 1], ChannelOrder::identity(2)).unwrap(),
                Segment::new(vec![2], ChannelOrder::new(vec![1, 0]).unwrap()).unwrap(),
            ],
        )
        .unwrap();
        let r = run(&w, &plan, &ones(3));
        assert_eq!(r.in_segment_flips, 4 + 2);
        // row 0 register holds 3 (W[1,0]) and receives 2 (W[1,2])
        assert_eq!(r.boundary_flips, 1);
        assert_eq!(r.outputs, vec![vec![4, 5]]);
    }

    #[test]
    fn energy_modes() {
        let p = EnergyParams::default();
        let zero = estimate_energy(100, 0, &p, EnergyMode::Empirical).unwrap();
        assert_eq!(zero.datapath, 0.0);
        let one = estimate_energy(100, 37, &p, EnergyMode::Empirical).unwrap();
        let two = estimate_energy(100, 74, &p, EnergyMode::Empirical).unwrap();
        assert_eq!(two.datapath, 2.0 * one.datapath);
        let a = estimate_energy(16, 0, &p, EnergyMode::Analytical).unwrap();
        assert_eq!(a.datapath, 48.0);
        assert_eq!(a.mem, 16.0 * 6.0 * 3.0 / 16.0);
        let big = EnergyParams {
            tau_weight: 1e18,
            tau_input: 1e18,
            tau_psum: 1e18,
            ..p
        };
        assert!(
            estimate_energy(1_000_000, 0, &big, EnergyMode::Analytical)
                .unwrap()
                .mem
                < 1e-9
        );
        let zero_tau = EnergyParams {
            tau_weight: 0.0,
            ..p
        };
        assert!(estimate_energy(1, 1, &zero_tau, EnergyMode::Empirical).is_err());
    }
}
