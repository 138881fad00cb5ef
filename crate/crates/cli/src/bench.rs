use std::path::PathBuf;

use clap::Args;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use hdopt_core::partition::restart_seed;
use hdopt_core::sim::EnergyMode;
use hdopt_core::{
    cluster_then_reorder, estimate_energy, hd_matrix, par, ClusterConfig, EnergyParams, HdError,
    InnerSolver, LayerShape, WeightMatrix,
};

use crate::commands::json_line;
use crate::Format;

#[derive(Debug, Args)]
pub struct BenchArgs {
    /// JSON file: {"layers": [{"name": str, "c_in": int, "k_out": int, "fx": int?, "fy": int?}]}
    #[arg(long)]
    pub shapes: PathBuf,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = 4)]
    pub bits: u32,
    /// Columns per cluster (array rows).
    #[arg(long, default_value_t = 8)]
    pub width: usize,
    #[arg(long, default_value_t = 20)]
    pub iters: usize,
    #[arg(long, default_value_t = 4)]
    pub restarts: usize,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct ShapesFile {
    layers: Vec<NamedShape>,
}

#[derive(Debug, Deserialize)]
struct NamedShape {
    name: String,
    #[serde(flatten)]
    shape: LayerShape,
}

#[derive(Debug, Serialize)]
struct Row {
    layer: String,
    c: usize,
    k: usize,
    baseline_hd: u64,
    plan_hd: u64,
    reduction: f64,
    energy: f64,
}

fn bench_layer(args: &BenchArgs, index: usize, layer: &NamedShape) -> Result<Row, HdError> {
    layer.shape.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(restart_seed(args.seed, index));
    let (k, c) = (layer.shape.matrix_rows(), layer.shape.matrix_cols());
    let w = WeightMatrix::random(layer.name.clone(), args.bits, k, c, &mut rng)?;
    let width = args.width.min(c);
    let cfg = ClusterConfig {
        iters: args.iters,
        restarts: args.restarts,
        seed: args.seed,
        solver: InnerSolver::Greedy,
        ..ClusterConfig::for_columns(c, width)
    };
    let (plan, _) = cluster_then_reorder(&w, &cfg)?;
    let baseline_hd = hd_matrix(&w);
    let plan_hd = hdopt_core::hd_plan(&w, &plan)?.total_hd;
    let energy = estimate_energy(
        (k * c) as u64,
        plan_hd,
        &EnergyParams::default(),
        EnergyMode::Empirical,
    )?;
    Ok(Row {
        layer: layer.name.clone(),
        c,
        k,
        baseline_hd,
        plan_hd,
        reduction: if plan_hd == 0 {
            f64::INFINITY
        } else {
            baseline_hd as f64 / plan_hd as f64
        },
        energy: energy.datapath,
    })
}

pub fn run(args: &BenchArgs) -> Result<String, HdError> {
    let text = std::fs::read_to_string(&args.shapes).map_err(|source| HdError::Io {
        path: args.shapes.clone(),
        source,
    })?;
    let shapes: ShapesFile = serde_json::from_str(&text).map_err(|e| HdError::Parse {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let rows = par::map_indexed(shapes.layers.len(), |i| {
        bench_layer(args, i, &shapes.layers[i])
    })
    .into_iter()
    .collect::<Result<Vec<_>, _>>()?;
    Ok(match args.format {
        Format::Json => json_line(&rows),
        Format::Csv => {
            let mut out = String::from("layer,c,k,baseline_hd,plan_hd,reduction,energy\n");
            for r in rows {
                out.push_str(&format!(
                    "{},{},{},{},{},{:.4},{}\n",
                    r.layer, r.c, r.k, r.baseline_hd, r.plan_hd, r.reduction, r.energy
                ));
            }
            out
        }
    })
}
