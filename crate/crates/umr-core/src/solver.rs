//! The cutting-plane solver.
//!
//! Each iteration solves the warm restricted master, asks the planar
//! min-cut oracle for the most violated cut per level under the reduced
//! weights, turns the restricted primal into a fractional hierarchy,
//! rounds it to a certified integer hierarchy, and only then expands the
//! new cuts into isolating columns and adds them to the pools. The dual
//! objective plus one and a half times the total separation residual is a
//! valid lower bound at every iteration, so the loop always carries a
//! certificate; it stops when the residual clears the tolerance or a
//! budget runs out.

use alloc::vec;
use alloc::vec::Vec;

use crate::cut::{CutColumn, MinCutOracle};
use crate::graph::{connected_components, is_multicut, isocuts, FaceSet, PlanarGraph};
use crate::lp::{DualState, PrimalState, RestrictedDualLp, DEFAULT_EPSILON};
use crate::weights::{LayerWeights, LevelSchedule};
use crate::{Error, Result};

/// Scale factor between the separation residual and the lower-bound
/// correction: each violated column enters the expansion at most this many
/// times its own violation.
pub const RESIDUAL_SCALE: f64 = 1.5;

/// Monotonicity slack for fractional hierarchies.
pub const MONOTONE_TOL: f64 = 1e-9;

/// A source of elapsed seconds. The core solver never reads a real clock;
/// callers inject one (or [`NullClock`] for reproducible traces).
pub trait Clock {
    fn now(&self) -> f64;
}

/// Reports zero forever: traces become independent of the machine.
pub struct NullClock;

impl Clock for NullClock {
    fn now(&self) -> f64 {
        0.0
    }
}

/// One round of separation: every level's reduced weights against one
/// shared oracle. The batch is immutable, so drivers may fan the levels out
/// across threads.
pub struct SeparationBatch<'a> {
    pub oracle: &'a MinCutOracle,
    pub weights: Vec<Vec<f64>>,
}

/// Strategy for executing a separation batch. Implementations must return
/// one column per level, in level order.
pub trait SeparationDriver {
    fn run_batch(&self, batch: &SeparationBatch<'_>) -> Result<Vec<CutColumn>>;
}

/// Runs the levels one after another on the calling thread.
pub struct Sequential;

impl SeparationDriver for Sequential {
    fn run_batch(&self, batch: &SeparationBatch<'_>) -> Result<Vec<CutColumn>> {
        batch.weights.iter().map(|w| batch.oracle.min_cut(w)).collect()
    }
}

/// Per-level pools of cut columns, deduplicated by exact indicator
/// equality. Insertion validates that the column is a genuine two-way cut
/// of the instance graph.
pub struct CutPool {
    num_edges: usize,
    layers: Vec<Vec<Vec<bool>>>,
    seen: Vec<alloc::collections::BTreeSet<Vec<bool>>>,
}

impl CutPool {
    pub fn new(num_levels: usize, num_edges: usize) -> Self {
        CutPool {
            num_edges,
            layers: vec![Vec::new(); num_levels],
            seen: vec![alloc::collections::BTreeSet::new(); num_levels],
        }
    }

    pub fn num_levels(&self) -> usize {
        self.layers.len()
    }

    pub fn level(&self, level: usize) -> &[Vec<bool>] {
        &self.layers[level - 1]
    }

    pub fn sizes(&self) -> Vec<usize> {
        self.layers.iter().map(Vec::len).collect()
    }

    /// Inserts a column into `level` (1-based). Returns false when an equal
    /// indicator is already pooled there.
    pub fn insert(&mut self, level: usize, column: Vec<bool>, graph: &PlanarGraph) -> Result<bool> {
        if level == 0 || level > self.layers.len() || column.len() != self.num_edges {
            return Err(Error::PoolColumnInvalid { layer: level, column: self.layers[level.min(self.layers.len()).saturating_sub(1)].len() });
        }
        if !is_two_way_cut(graph, &column)? {
            return Err(Error::PoolColumnInvalid { layer: level, column: self.layers[level - 1].len() });
        }
        if !self.seen[level - 1].insert(column.clone()) {
            return Ok(false);
        }
        self.layers[level - 1].push(column);
        Ok(true)
    }
}

/// Whether `z` is the boundary of some vertex set: assign each vertex a
/// side so that exactly the marked edges change sides. The constraint
/// system is a parity two-coloring; any contradiction means some cycle
/// crosses `z` an odd number of times.
pub fn is_two_way_cut(graph: &PlanarGraph, z: &[bool]) -> Result<bool> {
    if z.len() != graph.num_edges() {
        return Err(Error::LengthMismatch { expected: graph.num_edges(), got: z.len() });
    }
    let n = graph.num_vertices();
    let mut adj = vec![Vec::new(); n];
    for (id, e) in graph.edges().iter().enumerate() {
        adj[e.u].push((e.v, z[id]));
        adj[e.v].push((e.u, z[id]));
    }
    let mut side = vec![u8::MAX; n];
    let mut stack = Vec::new();
    for start in 0..n {
        if side[start] != u8::MAX {
            continue;
        }
        side[start] = 0;
        stack.push(start);
        while let Some(v) = stack.pop() {
            for &(w, crossing) in &adj[v] {
                let want = side[v] ^ u8::from(crossing);
                if side[w] == u8::MAX {
                    side[w] = want;
                    stack.push(w);
                } else if side[w] != want {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

/// A fractional hierarchy: per-level edge values in `[0, 1]`, nonincreasing
/// across levels. Level `0` is all ones and level `L + 1` all zeros by
/// convention.
#[derive(Clone, Debug, PartialEq)]
pub struct Hierarchy {
    levels: Vec<Vec<f64>>,
}

impl Hierarchy {
    pub fn new(levels: Vec<Vec<f64>>) -> Result<Self> {
        if levels.is_empty() {
            return Err(Error::InvalidHierarchy("a hierarchy needs at least one level"));
        }
        let m = levels[0].len();
        for level in &levels {
            if level.len() != m {
                return Err(Error::InvalidHierarchy("levels disagree on the edge count"));
            }
            for &v in level {
                if !v.is_finite() || !(-MONOTONE_TOL..=1.0 + MONOTONE_TOL).contains(&v) {
                    return Err(Error::InvalidHierarchy("level value outside the unit interval"));
                }
            }
        }
        for l in 1..levels.len() {
            for e in 0..m {
                if levels[l][e] > levels[l - 1][e] + MONOTONE_TOL {
                    return Err(Error::InvalidHierarchy("levels must be nonincreasing"));
                }
            }
        }
        Ok(Hierarchy { levels })
    }

    pub fn num_levels(&self) -> usize {
        self.levels.len()
    }

    pub fn num_edges(&self) -> usize {
        self.levels[0].len()
    }

    pub fn levels(&self) -> &[Vec<f64>] {
        &self.levels
    }

    /// Value with the boundary conventions filled in.
    pub fn value(&self, level: usize, edge: usize) -> f64 {
        if level == 0 {
            1.0
        } else if level > self.levels.len() {
            0.0
        } else {
            self.levels[level - 1][edge]
        }
    }
}

/// An integer hierarchy: nested multicuts with their component labels.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct IntegerHierarchy {
    pub levels: Vec<Vec<bool>>,
    /// Component labels of the uncut subgraph, one vector per level.
    pub labels: Vec<Vec<usize>>,
}

/// Checks that every level is a multicut and that the levels are nested
/// (each cut edge of a coarser level is cut at every finer level).
pub fn validate_hierarchy(graph: &PlanarGraph, levels: &[Vec<bool>]) -> Result<()> {
    if levels.is_empty() {
        return Err(Error::InvalidHierarchy("a hierarchy needs at least one level"));
    }
    for level in levels {
        if level.len() != graph.num_edges() {
            return Err(Error::InvalidHierarchy("levels disagree on the edge count"));
        }
        if !is_multicut(graph, level)? {
            return Err(Error::InvalidHierarchy("level is not a multicut"));
        }
    }
    for l in 1..levels.len() {
        for e in 0..graph.num_edges() {
            if levels[l][e] && !levels[l - 1][e] {
                return Err(Error::InvalidHierarchy("levels are not nested"));
            }
        }
    }
    Ok(())
}

/// A solver instance: an embedded graph, its faces, and the per-level fit
/// weights (with the schedule kept when the weights came from a fit).
pub struct Instance {
    pub graph: PlanarGraph,
    pub faces: FaceSet,
    pub weights: LayerWeights,
    pub schedule: Option<LevelSchedule>,
}

impl Instance {
    /// Builds the telescoped fit weights from the edge observations stored
    /// on the graph.
    pub fn new(graph: PlanarGraph, schedule: LevelSchedule) -> Result<Self> {
        let faces = graph.validate_embedding()?;
        let weights = LayerWeights::from_graph(&graph, &schedule)?;
        Ok(Instance { graph, faces, weights, schedule: Some(schedule) })
    }

    /// Takes the per-level weights as given; no fit constant, no schedule.
    pub fn from_raw_layers(graph: PlanarGraph, layers: Vec<Vec<f64>>) -> Result<Self> {
        let faces = graph.validate_embedding()?;
        let weights = LayerWeights::from_raw(layers)?;
        if weights.num_edges() != graph.num_edges() {
            return Err(Error::LengthMismatch {
                expected: graph.num_edges(),
                got: weights.num_edges(),
            });
        }
        Ok(Instance { graph, faces, weights, schedule: None })
    }

    pub fn num_levels(&self) -> usize {
        self.weights.num_levels()
    }
}

/// Stopping rule on the separation residual.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum Termination {
    /// Stop when `residual / max(1, |best lower bound|)` clears the
    /// tolerance. The default mode.
    Relative(f64),
    /// Stop when the scaled residual `1.5 * delta` clears the tolerance.
    Absolute(f64),
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    pub epsilon: f64,
    pub termination: Termination,
    pub max_iterations: usize,
    /// Wall-clock budget in seconds, measured by the injected clock.
    pub time_budget: Option<f64>,
    pub thresholds: Vec<f64>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        SolverConfig {
            epsilon: DEFAULT_EPSILON,
            termination: Termination::Relative(1e-6),
            max_iterations: 1000,
            time_budget: None,
            thresholds: vec![0.0, 0.2, 0.4, 0.6, 0.8],
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveStatus {
    Converged,
    IterationBudget,
    TimeBudget,
}

impl core::fmt::Display for SolveStatus {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            SolveStatus::Converged => write!(f, "converged"),
            SolveStatus::IterationBudget => write!(f, "iteration-budget"),
            SolveStatus::TimeBudget => write!(f, "time-budget"),
        }
    }
}

#[derive(Clone, Debug)]
pub struct TraceRow {
    pub iteration: usize,
    pub seconds: f64,
    pub dual_objective: f64,
    pub residual: f64,
    pub lower_bound: f64,
    pub best_upper_bound: f64,
    pub gap: f64,
    pub decoded_cost: f64,
    pub restricted_objective: f64,
    /// Pool sizes the restricted solve saw, per level.
    pub pool_sizes: Vec<usize>,
}

#[derive(Clone, Debug)]
pub struct SolveReport {
    pub status: SolveStatus,
    pub iterations: usize,
    /// Best certified lower bound across all iterations.
    pub lower_bound: f64,
    /// Cost of the best integer hierarchy found.
    pub upper_bound: f64,
    pub gap: f64,
    /// Final separation residual.
    pub residual: f64,
    /// Level-zero fit constant; adding it to a bound converts the layer
    /// objective into distortion units.
    pub constant: f64,
    pub hierarchy: IntegerHierarchy,
    pub fractional: Hierarchy,
    pub dual: DualState,
    pub dual_objective: f64,
    pub trace: Vec<TraceRow>,
    /// How many times the per-iteration lower bound dipped below its
    /// predecessor; informational, the reported bound is the running best.
    pub lb_regressions: usize,
}

/// The certified lower bound derived from one restricted solve: the dual
/// objective plus the scaled separation residual.
pub fn lower_bound(dual_objective: f64, residual: f64) -> f64 {
    dual_objective + RESIDUAL_SCALE * residual
}

/// Reduced separation weights per level: fit weight plus capacity
/// multiplier minus the net nesting pressure.
pub fn separation_weights(lw: &LayerWeights, dual: &DualState) -> Vec<Vec<f64>> {
    let m = lw.num_edges();
    (1..=lw.num_levels())
        .map(|l| {
            (0..m)
                .map(|e| lw.layer(l)[e] + dual.lambda[l - 1][e] - dual.mu(l, e))
                .collect()
        })
        .collect()
}

/// Runs one exact separation round over all levels.
pub fn separate<D: SeparationDriver>(
    oracle: &MinCutOracle,
    lw: &LayerWeights,
    dual: &DualState,
    driver: &D,
) -> Result<Vec<CutColumn>> {
    let batch = SeparationBatch { oracle, weights: separation_weights(lw, dual) };
    let cuts = driver.run_batch(&batch)?;
    if cuts.len() != lw.num_levels() {
        return Err(Error::LengthMismatch { expected: lw.num_levels(), got: cuts.len() });
    }
    Ok(cuts)
}

/// Projects the restricted primal onto a fractional hierarchy: each level
/// takes the largest pooled mass at or above it, clamped to one. The
/// suffix maximum makes the result monotone by construction, and it passes
/// every cycle inequality.
pub fn decode_fractional(primal: &PrimalState) -> Result<Hierarchy> {
    let levels = primal.mass.len();
    if levels == 0 {
        return Err(Error::InvalidHierarchy("a hierarchy needs at least one level"));
    }
    let m = primal.mass[0].len();
    let mut out = vec![vec![0.0; m]; levels];
    let mut suffix = vec![0.0f64; m];
    for l in (0..levels).rev() {
        for e in 0..m {
            suffix[e] = suffix[e].max(primal.mass[l][e]).max(0.0);
            out[l][e] = suffix[e].min(1.0);
        }
    }
    Hierarchy::new(out)
}

/// Thresholds a fractional hierarchy and repairs each level into a
/// multicut: cut edges whose endpoints still touch inside a component are
/// uncut again. Repair preserves nesting. Returns the cheapest candidate
/// under the layer objective; ties go to the smaller threshold.
pub fn round_hierarchy(
    graph: &PlanarGraph,
    lw: &LayerWeights,
    fractional: &Hierarchy,
    thresholds: &[f64],
) -> Result<(IntegerHierarchy, f64)> {
    if thresholds.is_empty() {
        return Err(Error::BadValue("rounding needs at least one threshold"));
    }
    if fractional.num_levels() != lw.num_levels() || fractional.num_edges() != lw.num_edges() {
        return Err(Error::LengthMismatch {
            expected: lw.num_levels(),
            got: fractional.num_levels(),
        });
    }
    let mut order: Vec<f64> = thresholds.to_vec();
    order.sort_by(f64::total_cmp);

    let levels = lw.num_levels();
    let m = lw.num_edges();
    let mut best: Option<(IntegerHierarchy, f64)> = None;
    for &t in &order {
        let mut cuts = Vec::with_capacity(levels);
        let mut labels = Vec::with_capacity(levels);
        for l in 1..=levels {
            let raw: Vec<bool> = (0..m).map(|e| fractional.value(l, e) > t).collect();
            let lab = connected_components(graph, &raw)?;
            let repaired: Vec<bool> = graph
                .edges()
                .iter()
                .enumerate()
                .map(|(id, edge)| raw[id] && lab[edge.u] != lab[edge.v])
                .collect();
            cuts.push(repaired);
            labels.push(lab);
        }
        for l in 1..levels {
            for e in 0..m {
                if cuts[l][e] && !cuts[l - 1][e] {
                    return Err(Error::Internal(
                        "threshold repair broke the nesting invariant".into(),
                    ));
                }
            }
        }
        let cost = lw.cost(&cuts)?;
        let better = match &best {
            None => true,
            Some((_, c)) => cost < *c,
        };
        if better {
            best = Some((IntegerHierarchy { levels: cuts, labels }, cost));
        }
    }
    Ok(best.unwrap())
}

/// Runs the cutting-plane loop to completion under the given budgets.
pub fn run<C: Clock, D: SeparationDriver>(
    instance: &Instance,
    config: &SolverConfig,
    clock: &C,
    driver: &D,
) -> Result<SolveReport> {
    if config.max_iterations == 0 {
        return Err(Error::BadValue("the iteration budget must be positive"));
    }
    let lw = &instance.weights;
    let levels = lw.num_levels();
    let oracle = MinCutOracle::new(&instance.graph, &instance.faces)?;
    let mut master = RestrictedDualLp::new(lw, config.epsilon)?;
    let mut pool = CutPool::new(levels, lw.num_edges());

    let mut trace: Vec<TraceRow> = Vec::new();
    let mut best_lb = f64::NEG_INFINITY;
    let mut best_ub = f64::INFINITY;
    let mut best_hierarchy: Option<IntegerHierarchy> = None;
    let mut last_lb = f64::NEG_INFINITY;
    let mut lb_regressions = 0usize;
    let mut status = SolveStatus::IterationBudget;
    let mut final_residual = 0.0;
    let mut final_fractional: Option<Hierarchy> = None;
    let mut final_dual: Option<DualState> = None;
    let mut final_dual_obj = 0.0;

    for iteration in 1..=config.max_iterations {
        let pool_sizes = pool.sizes();
        let (dual, primal, dual_obj) = master.solve()?;
        let cuts = separate(&oracle, lw, &dual, driver)?;
        // The empty cut is always feasible, so true separation values are
        // nonpositive; clamp roundoff noise.
        let residual: f64 = cuts.iter().map(|c| c.weight.min(0.0)).sum();
        let lb = lower_bound(dual_obj, residual);
        if lb < last_lb - 1e-12 && iteration > 1 {
            lb_regressions += 1;
        }
        last_lb = lb;
        best_lb = best_lb.max(lb);

        // Decode and round against the pools the LP actually saw, before
        // any new column lands.
        let fractional = decode_fractional(&primal)?;
        let decoded_cost = lw.fractional_cost(fractional.levels())?;
        let restricted_obj = master.expanded_objective(&primal);
        let (candidate, candidate_cost) =
            round_hierarchy(&instance.graph, lw, &fractional, &config.thresholds)?;
        if candidate_cost < best_ub {
            best_ub = candidate_cost;
            best_hierarchy = Some(candidate);
        }

        let gap = (best_ub - best_lb) / f64::max(1.0, best_lb.abs());
        trace.push(TraceRow {
            iteration,
            seconds: clock.now(),
            dual_objective: dual_obj,
            residual,
            lower_bound: lb,
            best_upper_bound: best_ub,
            gap,
            decoded_cost,
            restricted_objective: restricted_obj,
            pool_sizes,
        });
        final_residual = residual;
        final_fractional = Some(fractional);
        final_dual = Some(dual);
        final_dual_obj = dual_obj;

        let reached = match config.termination {
            Termination::Relative(tau) => residual / f64::max(1.0, best_lb.abs()) > -tau,
            Termination::Absolute(tau) => RESIDUAL_SCALE * residual > -tau,
        };
        if reached {
            status = SolveStatus::Converged;
            break;
        }
        if let Some(budget) = config.time_budget {
            if clock.now() > budget {
                status = SolveStatus::TimeBudget;
                break;
            }
        }

        let mut added = 0usize;
        for (idx, cut) in cuts.iter().enumerate() {
            for column in isocuts(&instance.graph, &cut.edges)? {
                if column.iter().any(|&b| b)
                    && pool.insert(idx + 1, column.clone(), &instance.graph)?
                {
                    master.add_column(idx + 1, &column)?;
                    added += 1;
                }
            }
        }
        if added == 0 {
            // Exact separation found a violated cut whose expansion is
            // already pooled: the master would repeat itself forever.
            return Err(Error::Internal("separation stalled without convergence".into()));
        }
    }

    let hierarchy = best_hierarchy.ok_or(Error::Internal("no iteration completed".into()))?;
    let lower = best_lb;
    let upper = best_ub;
    if lower > upper + 1e-6 {
        return Err(Error::Internal("lower bound exceeds the upper bound".into()));
    }
    Ok(SolveReport {
        status,
        iterations: trace.len(),
        lower_bound: lower,
        upper_bound: upper,
        gap: (upper - lower) / f64::max(1.0, lower.abs()),
        residual: final_residual,
        constant: lw.constant_total(),
        hierarchy,
        fractional: final_fractional.unwrap(),
        dual: final_dual.unwrap(),
        dual_objective: final_dual_obj,
        trace,
        lb_regressions,
    })
}

/// [`run`] with the default clock and the sequential driver.
pub fn run_default(instance: &Instance, config: &SolverConfig) -> Result<SolveReport> {
    run(instance, config, &NullClock, &Sequential)
}
