//! Input-channel segmentation and clustering.
//!
//! A matrix with many input channels gains little from a single row order,
//! because every column has to agree on it. Splitting the columns into
//! array-height segments and ordering each one separately helps; choosing
//! *which* columns share a segment helps further.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{HdError, Result};
use crate::matrix::WeightMatrix;
use crate::metrics::{column_cost, order_cost, DistanceTable};
use crate::par;
use crate::plan::{ChannelOrder, ClusterPlan, Segment};
use crate::reorder::{exact_path, fallback_path, EXACT_MAX_CHANNELS};

/// Row-order solver used for each segment.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InnerSolver {
    /// Greedy from channel 0, falling back to the identity order if that is
    /// better.
    #[default]
    Greedy,
    /// Exhaustive optimum; needs `K <= EXACT_MAX_CHANNELS`.
    Exact,
}

impl InnerSolver {
    fn check(self, w: &WeightMatrix) -> Result<()> {
        if self == InnerSolver::Exact && w.rows() > EXACT_MAX_CHANNELS {
            return Err(HdError::TooManyChannels {
                channels: w.rows(),
                max: EXACT_MAX_CHANNELS,
            });
        }
        Ok(())
    }

    fn solve(self, w: &WeightMatrix, cols: &[usize]) -> Vec<usize> {
        let table = DistanceTable::new(w, cols);
        match self {
            InnerSolver::Greedy => fallback_path(&table, 1),
            InnerSolver::Exact => exact_path(&table, None),
        }
    }
}

/// Splits the columns into contiguous chunks of `width` (the last may be
/// shorter) and orders each chunk independently.
pub fn segment_then_reorder(
    w: &WeightMatrix,
    width: usize,
    solver: InnerSolver,
) -> Result<ClusterPlan> {
    if width == 0 || width > w.cols() {
        return Err(HdError::InvalidArgument(format!(
            "width must be in [1, {}], got {width}",
            w.cols()
        )));
    }
    solver.check(w)?;
    let chunks: Vec<Vec<usize>> = (0..w.cols())
        .collect::<Vec<_>>()
        .chunks(width)
        .map(<[usize]>::to_vec)
        .collect();
    let orders = par::map_indexed(chunks.len(), |i| solver.solve(w, &chunks[i]));
    let segments = chunks
        .into_iter()
        .zip(orders)
        .map(|(cols, order)| Segment::new(cols, ChannelOrder::from_trusted(order)))
        .collect::<Result<Vec<_>>>()?;
    ClusterPlan::new(width, segments)
}

/// Parameters of [`cluster_then_reorder`].
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterConfig {
    /// Number of clusters `t`.
    pub clusters: usize,
    /// Maximum columns per cluster (array rows `R`).
    pub width: usize,
    /// Assignment/update iterations after the initial pass.
    pub iters: usize,
    /// Independent random initializations.
    pub restarts: usize,
    pub seed: u64,
    pub solver: InnerSolver,
}

impl ClusterConfig {
    pub fn new(clusters: usize, width: usize) -> Self {
        ClusterConfig {
            clusters,
            width,
            iters: 20,
            restarts: 20,
            seed: 0,
            solver: InnerSolver::Greedy,
        }
    }

    /// `ceil(C / width)` clusters: the fewest that fit `C` columns.
    pub fn for_columns(cols: usize, width: usize) -> Self {
        Self::new(cols.div_ceil(width.max(1)), width)
    }

    fn validate(&self, w: &WeightMatrix) -> Result<()> {
        if self.clusters == 0 || self.width == 0 || self.iters == 0 || self.restarts == 0 {
            return Err(HdError::InvalidArgument(
                "clusters, width, iters and restarts must all be >= 1".into(),
            ));
        }
        if self.clusters.saturating_mul(self.width) < w.cols() {
            return Err(HdError::Infeasible(format!(
                "{} clusters of width {} cannot hold {} columns",
                self.clusters,
                self.width,
                w.cols()
            )));
        }
        if self.clusters > w.cols() {
            return Err(HdError::InvalidArgument(format!(
                "{} clusters requested for only {} columns",
                self.clusters,
                w.cols()
            )));
        }
        self.solver.check(w)
    }
}

/// Objective history of a clustering run.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ClusterTrace {
    /// Total flips after the initial pass and after each iteration of the
    /// best restart; `iterations_run + 1` entries.
    pub objectives: Vec<u64>,
    pub iterations_run: usize,
    /// Restart that produced the returned plan, or `None` when the contiguous
    /// segmentation beat every restart.
    pub best_restart: Option<usize>,
    /// Objective history of every restart, in restart order.
    pub restart_objectives: Vec<Vec<u64>>,
}

struct RestartOutcome {
    clusters: Vec<Vec<usize>>,
    orders: Vec<Vec<usize>>,
    objectives: Vec<u64>,
}

/// Alternates between assigning columns to clusters and re-ordering each
/// cluster's rows, from several random starts, and returns the best plan seen.
///
/// Each restart seeds `t` singleton clusters with randomly chosen columns.
/// The assignment pass clears the clusters and places every column in the
/// cluster whose current order streams that column with the fewest flips,
/// respecting the `width` capacity: columns with the largest gap between their
/// best and second-best cluster are placed first, and an empty cluster takes
/// the column that is worst off where it landed. A pass or a re-solved order is
/// only kept when it does not increase the objective, so each restart's
/// objective never goes up. The plain contiguous segmentation is always a
/// candidate, so the result never loses to [`segment_then_reorder`].
pub fn cluster_then_reorder(
    w: &WeightMatrix,
    cfg: &ClusterConfig,
) -> Result<(ClusterPlan, ClusterTrace)> {
    cfg.validate(w)?;
    let outcomes = par::map_indexed(cfg.restarts, |r| run_restart(w, cfg, r));

    let (best_idx, best) = outcomes
        .iter()
        .enumerate()
        .min_by_key(|(i, o)| (*o.objectives.last().expect("non-empty trace"), *i))
        .expect("restarts >= 1");
    let best_obj = *best.objectives.last().expect("non-empty trace");

    let contiguous_width = cfg.width.min(w.cols());
    let contiguous = segment_then_reorder(w, contiguous_width, cfg.solver)?;
    let contiguous_obj: u64 = contiguous
        .segments()
        .iter()
        .map(|s| order_cost(w, s.order().as_slice(), s.columns()))
        .sum();

    let trace = ClusterTrace {
        objectives: best.objectives.clone(),
        iterations_run: cfg.iters,
        best_restart: (best_obj <= contiguous_obj).then_some(best_idx),
        restart_objectives: outcomes.iter().map(|o| o.objectives.clone()).collect(),
    };

    let plan = if best_obj <= contiguous_obj {
        let mut segments: Vec<(Vec<usize>, Vec<usize>)> = best
            .clusters
            .iter()
            .cloned()
            .zip(best.orders.iter().cloned())
            .filter(|(cols, _)| !cols.is_empty())
            .collect();
        segments.sort_by_key(|(cols, _)| cols[0]);
        let segments = segments
            .into_iter()
            .map(|(cols, order)| Segment::new(cols, ChannelOrder::from_trusted(order)))
            .collect::<Result<Vec<_>>>()?;
        ClusterPlan::new(cfg.width, segments)?
    } else {
        ClusterPlan::new(cfg.width, contiguous.segments().to_vec())?
    };
    Ok((plan.with_seed(Some(cfg.seed)), trace))
}

/// Per-restart RNG seed; restart 0 uses the configured seed itself.
pub fn restart_seed(seed: u64, restart: usize) -> u64 {
    seed ^ (restart as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)
}

fn run_restart(w: &WeightMatrix, cfg: &ClusterConfig, restart: usize) -> RestartOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(restart_seed(cfg.seed, restart));
    let seeds = rand::seq::index::sample(&mut rng, w.cols(), cfg.clusters).into_vec();
    let mut orders: Vec<Vec<usize>> = seeds.iter().map(|&c| cfg.solver.solve(w, &[c])).collect();

    let (mut clusters, _) = assign(w, &orders, cfg.width);
    let mut objective = update(w, &clusters, &mut orders, cfg.solver);
    let mut objectives = Vec::with_capacity(cfg.iters + 1);
    objectives.push(objective);

    let mut settled = false;
    for _ in 0..cfg.iters {
        if !settled {
            let (candidate, candidate_cost) = assign(w, &orders, cfg.width);
            let accepted = candidate != clusters && candidate_cost <= objective;
            if accepted {
                clusters = candidate;
            }
            let before = orders.clone();
            objective = update(w, &clusters, &mut orders, cfg.solver);
            // Nothing moved: every later pass would repeat this one exactly.
            settled = !accepted && before == orders;
        }
        objectives.push(objective);
    }
    RestartOutcome {
        clusters,
        orders,
        objectives,
    }
}

/// Capacity-bounded assignment of every column given the current orders.
/// Returns the clusters (columns ascending) and their cost under those orders.
fn assign(w: &WeightMatrix, orders: &[Vec<usize>], width: usize) -> (Vec<Vec<usize>>, u64) {
    let t = orders.len();
    let cols = w.cols();
    let costs: Vec<u64> = (0..cols)
        .flat_map(|c| orders.iter().map(move |o| column_cost(w, o, c)))
        .collect();
    let cost = |c: usize, k: usize| costs[c * t + k];

    let mut by_regret: Vec<(u64, usize)> = (0..cols)
        .map(|c| {
            let (mut best, mut second) = (u64::MAX, u64::MAX);
            for k in 0..t {
                let v = cost(c, k);
                if v < best {
                    second = best;
                    best = v;
                } else if v < second {
                    second = v;
                }
            }
            let regret = if t == 1 { 0 } else { second - best };
            (regret, c)
        })
        .collect();
    by_regret.sort_by(|a, b| b.0.cmp(&a.0).then(a.1.cmp(&b.1)));

    let mut owner = vec![usize::MAX; cols];
    let mut sizes = vec![0usize; t];
    for &(_, c) in &by_regret {
        let k = (0..t)
            .filter(|&k| sizes[k] < width)
            .min_by_key(|&k| (cost(c, k), k))
            .expect("total capacity covers every column");
        owner[c] = k;
        sizes[k] += 1;
    }

    for empty in 0..t {
        if sizes[empty] != 0 {
            continue;
        }
        let worst = (0..cols)
            .filter(|&c| sizes[owner[c]] > 1)
            .max_by_key(|&c| (cost(c, owner[c]), std::cmp::Reverse(c)))
            .expect("clusters <= columns leaves a donor");
        sizes[owner[worst]] -= 1;
        owner[worst] = empty;
        sizes[empty] = 1;
    }

    let mut clusters = vec![Vec::new(); t];
    let mut total = 0;
    for (c, &k) in owner.iter().enumerate() {
        clusters[k].push(c);
        total += cost(c, k);
    }
    (clusters, total)
}

/// Re-solves each cluster's order, keeping the previous order when the solver
/// does not improve on it. Returns the resulting total flips.
fn update(
    w: &WeightMatrix,
    clusters: &[Vec<usize>],
    orders: &mut [Vec<usize>],
    solver: InnerSolver,
) -> u64 {
    clusters
        .iter()
        .zip(orders.iter_mut())
        .map(|(cols, order)| {
            if cols.is_empty() {
                return 0;
            }
            let kept = order_cost(w, order, cols);
            let fresh = solver.solve(w, cols);
            let fresh_cost = order_cost(w, &fresh, cols);
            if fresh_cost < kept {
                *order = fresh;
                fresh_cost
            } else {
                kept
            }
        })
        .sum()
}
