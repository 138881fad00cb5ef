//! JSON file formats.
//!
//! All channel and column indices in files are 0-based.
//!
//! * weight bundle: `{"name": str, "bits": int, "shape": [K, C], "data": [K*C ints, row-major]}`
//! * plan: `{"width": int, "segments": [{"columns": [ints], "order": [ints]}], "seed": int?}`
//! * activations: `{"bits": int, "vectors": [[C ints], ...]}` (one vector per array column)
//! * address LUT: `{"depth": int, "tables": [[ints], ...]}`
//! * simulator config: `{"array": {...}, "energy": {...}}`, every field optional

use std::fs;
use std::path::Path;

use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::artifacts::AddressLut;
use crate::config::{ArrayConfig, EnergyParams};
use crate::error::{HdError, Result};
use crate::matrix::{check_bits, WeightMatrix};
use crate::plan::{ChannelOrder, ClusterPlan, Segment};
use crate::sim::ActivationSet;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct WeightBundle {
    name: String,
    bits: u32,
    shape: [usize; 2],
    data: Vec<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct PlanFile {
    width: usize,
    segments: Vec<SegmentFile>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SegmentFile {
    columns: Vec<usize>,
    order: Vec<usize>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ActivationFile {
    bits: u32,
    vectors: Vec<Vec<u64>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct LutFile {
    depth: usize,
    tables: Vec<Vec<usize>>,
}

/// Simulator configuration file.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    pub array: ArrayConfig,
    pub energy: EnergyParams,
}

fn from_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    serde_json::from_str(text).map_err(HdError::parse)
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("file DTOs always serialize");
    s.push('\n');
    s
}

fn read(path: &Path) -> Result<String> {
    fs::read_to_string(path).map_err(|e| HdError::io(path, e))
}

fn write(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).map_err(|e| HdError::io(path, e))
}

pub fn parse_weight_bundle(text: &str) -> Result<WeightMatrix> {
    let b: WeightBundle = from_json(text)?;
    check_bits(b.bits)?;
    let [rows, cols] = b.shape;
    if rows == 0 || cols == 0 {
        return Err(HdError::Dimension(format!(
            "shape must be at least [1, 1], got [{rows}, {cols}]"
        )));
    }
    let limit = 1u64 << b.bits;
    if let Some(pos) = b.data.iter().position(|&v| v >= limit) {
        return Err(HdError::CodeOutOfRange {
            row: pos / cols,
            col: pos % cols,
            value: b.data[pos],
            bits: b.bits,
        });
    }
    let data = b.data.into_iter().map(|v| v as u16).collect();
    WeightMatrix::new(b.name, b.bits, rows, cols, data)
}

pub fn weight_bundle_to_string(w: &WeightMatrix) -> String {
    to_json(&WeightBundle {
        name: w.name().to_owned(),
        bits: w.bits(),
        shape: [w.rows(), w.cols()],
        data: w.data().iter().map(|&v| u64::from(v)).collect(),
    })
}

pub fn load_weight_bundle(path: impl AsRef<Path>) -> Result<WeightMatrix> {
    parse_weight_bundle(&read(path.as_ref())?)
}

pub fn save_weight_bundle(w: &WeightMatrix, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &weight_bundle_to_string(w))
}

pub fn parse_plan(text: &str) -> Result<ClusterPlan> {
    let p: PlanFile = from_json(text)?;
    let segments = p
        .segments
        .into_iter()
        .map(|s| Segment::new(s.columns, ChannelOrder::new(s.order)?))
        .collect::<Result<Vec<_>>>()?;
    Ok(ClusterPlan::new(p.width, segments)?.with_seed(p.seed))
}

pub fn plan_to_string(plan: &ClusterPlan) -> String {
    to_json(&PlanFile {
        width: plan.width(),
        segments: plan
            .segments()
            .iter()
            .map(|s| SegmentFile {
                columns: s.columns().to_vec(),
                order: s.order().as_slice().to_vec(),
            })
            .collect(),
        seed: plan.seed(),
    })
}

pub fn load_plan(path: impl AsRef<Path>) -> Result<ClusterPlan> {
    parse_plan(&read(path.as_ref())?)
}

pub fn save_plan(plan: &ClusterPlan, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &plan_to_string(plan))
}

pub fn parse_activations(text: &str) -> Result<ActivationSet> {
    let a: ActivationFile = from_json(text)?;
    ActivationSet::new(a.bits, a.vectors)
}

pub fn activations_to_string(acts: &ActivationSet) -> String {
    to_json(&ActivationFile {
        bits: acts.bits(),
        vectors: acts.vectors().to_vec(),
    })
}

pub fn load_activations(path: impl AsRef<Path>) -> Result<ActivationSet> {
    parse_activations(&read(path.as_ref())?)
}

pub fn save_activations(acts: &ActivationSet, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &activations_to_string(acts))
}

pub fn parse_lut(text: &str) -> Result<AddressLut> {
    let l: LutFile = from_json(text)?;
    AddressLut::new(l.depth, l.tables)
}

pub fn lut_to_string(lut: &AddressLut) -> String {
    to_json(&LutFile {
        depth: lut.depth(),
        tables: lut.tables().to_vec(),
    })
}

pub fn load_lut(path: impl AsRef<Path>) -> Result<AddressLut> {
    parse_lut(&read(path.as_ref())?)
}

pub fn save_lut(lut: &AddressLut, path: impl AsRef<Path>) -> Result<()> {
    write(path.as_ref(), &lut_to_string(lut))
}

pub fn parse_sim_config(text: &str) -> Result<SimConfig> {
    let cfg: SimConfig = from_json(text)?;
    cfg.array.validate()?;
    cfg.energy.validate()?;
    Ok(cfg)
}

pub fn load_sim_config(path: impl AsRef<Path>) -> Result<SimConfig> {
    parse_sim_config(&read(path.as_ref())?)
}
