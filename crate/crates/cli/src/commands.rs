use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde::Serialize;

use hdopt_core::io::{self, SimConfig};
use hdopt_core::{
    cluster_then_reorder, emit_lut as build_lut, exact_reorder, hd_plan, input_permutation_lut,
    relayout_pair, reorder_with_fallback, segment_then_reorder, simulate_stream, ClusterConfig,
    ClusterPlan, HdError, HdReport, InnerSolver, WeightMatrix,
};

use crate::{ClusterArgs, Format};

type Result<T> = std::result::Result<T, HdError>;

pub fn json_line<T: Serialize>(value: &T) -> String {
    let mut s = serde_json::to_string(value).expect("report types serialize");
    s.push('\n');
    s
}

fn solver(exact: bool) -> InnerSolver {
    if exact {
        InnerSolver::Exact
    } else {
        InnerSolver::Greedy
    }
}

fn report_text(report: &HdReport, format: Format) -> String {
    match format {
        Format::Json => json_line(report),
        Format::Csv => {
            let nhd = report.nhd.map(|v| v.to_string()).unwrap_or_default();
            let segs: Vec<String> = report.per_segment.iter().map(u64::to_string).collect();
            format!(
                "hd,nhd,per_segment\n{},{},{}\n",
                report.total_hd,
                nhd,
                segs.join(";")
            )
        }
    }
}

pub fn analyze(input: &Path, plan: Option<&Path>, format: Format) -> Result<String> {
    let w = io::load_weight_bundle(input)?;
    let plan = match plan {
        Some(p) => io::load_plan(p)?,
        None => ClusterPlan::identity(w.rows(), w.cols())?,
    };
    Ok(report_text(&hd_plan(&w, &plan)?, format))
}

fn all_columns(w: &WeightMatrix) -> Vec<usize> {
    (0..w.cols()).collect()
}

pub fn reorder(input: &Path, output: &Path, restarts: usize, exact: bool) -> Result<String> {
    let w = io::load_weight_bundle(input)?;
    let cols = all_columns(&w);
    let order = if exact {
        exact_reorder(&w, &cols)?
    } else {
        reorder_with_fallback(&w, &cols, restarts)?
    };
    let plan = ClusterPlan::single(w.cols(), order)?;
    io::save_plan(&plan, output)?;
    Ok(json_line(&hd_plan(&w, &plan)?))
}

pub fn segment(input: &Path, output: &Path, width: usize, exact: bool) -> Result<String> {
    let w = io::load_weight_bundle(input)?;
    let plan = segment_then_reorder(&w, width, solver(exact))?;
    io::save_plan(&plan, output)?;
    Ok(json_line(&hd_plan(&w, &plan)?))
}

fn sidecar(output: &Path) -> PathBuf {
    let mut name = output.as_os_str().to_owned();
    name.push(".trace.json");
    PathBuf::from(name)
}

pub fn cluster(args: &ClusterArgs) -> Result<String> {
    let w = io::load_weight_bundle(&args.input)?;
    let base = ClusterConfig::for_columns(w.cols(), args.width);
    let cfg = ClusterConfig {
        clusters: args.clusters.unwrap_or(base.clusters),
        width: args.width,
        iters: args.iters,
        restarts: args.restarts,
        seed: args.seed,
        solver: solver(args.exact),
    };
    let (plan, trace) = cluster_then_reorder(&w, &cfg)?;
    io::save_plan(&plan, &args.output)?;
    let trace_path = args.trace.clone().unwrap_or_else(|| sidecar(&args.output));
    let mut text = serde_json::to_string_pretty(&trace).expect("trace serializes");
    text.push('\n');
    std::fs::write(&trace_path, text).map_err(|source| HdError::Io {
        path: trace_path.clone(),
        source,
    })?;
    Ok(json_line(&hd_plan(&w, &plan)?))
}

pub fn simulate(
    input: &Path,
    plan: &Path,
    acts: &Path,
    config: Option<&Path>,
    format: Format,
) -> Result<String> {
    let w = io::load_weight_bundle(input)?;
    let plan = io::load_plan(plan)?;
    let acts = io::load_activations(acts)?;
    let cfg = match config {
        Some(p) => io::load_sim_config(p)?,
        None => SimConfig::default(),
    };
    let report = simulate_stream(&w, &plan, &acts, &cfg.array, &cfg.energy)?;
    Ok(match format {
        Format::Json => json_line(&report),
        Format::Csv => format!(
            "in_segment_flips,boundary_flips,energy,mem_energy\n{},{},{},{}\n",
            report.in_segment_flips, report.boundary_flips, report.energy, report.mem_energy
        ),
    })
}

pub fn emit_lut(
    plan: &Path,
    depth: usize,
    output: &Path,
    input_permutation: bool,
) -> Result<String> {
    let plan = io::load_plan(plan)?;
    let lut = if input_permutation {
        input_permutation_lut(&plan, depth)?
    } else {
        build_lut(&plan, depth)?
    };
    io::save_lut(&lut, output)?;
    #[derive(Serialize)]
    struct Summary {
        depth: usize,
        tables: usize,
        entry_bits: u32,
        memory_bits: u64,
    }
    Ok(json_line(&Summary {
        depth: lut.depth(),
        tables: lut.tables().len(),
        entry_bits: lut.entry_bits(),
        memory_bits: lut.memory_bits(),
    }))
}

pub fn relayout(first: &Path, second: &Path, plan: &Path, out_dir: &Path) -> Result<String> {
    let w1 = io::load_weight_bundle(first)?;
    let w2 = io::load_weight_bundle(second)?;
    let plan = io::load_plan(plan)?;
    let (w1r, w2r) = relayout_pair(&w1, &plan, &w2)?;
    std::fs::create_dir_all(out_dir).map_err(|source| HdError::Io {
        path: out_dir.to_owned(),
        source,
    })?;
    let p1 = out_dir.join("w1.json");
    let p2 = out_dir.join("w2.json");
    io::save_weight_bundle(&w1r, &p1)?;
    io::save_weight_bundle(&w2r, &p2)?;
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{}",
        serde_json::json!({ "w1": p1.display().to_string(), "w2": p2.display().to_string() })
    );
    Ok(s)
}
