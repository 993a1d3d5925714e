//! Agglomerative baseline and the independent-layer ablation.
//!
//! The baseline builds a merge tree by single linkage over edge strengths,
//! reads off the normalized merge heights as an ultrametric, and then fits
//! one threshold per level against the layer objective. The ablation drops
//! the nesting coupling entirely and solves each layer as its own
//! single-level problem, which is exactly the solver with the nesting
//! multipliers pinned to zero; its point is that the resulting level cuts
//! need not nest.

use alloc::vec;
use alloc::vec::Vec;

use crate::graph::PlanarGraph;
use crate::solver::{run_default, Instance, SolveStatus, SolverConfig};
use crate::weights::LayerWeights;
use crate::{Error, Result};

/// Merge heights of an agglomeration: `heights[e]` is the normalized
/// strength at which the endpoints of edge `e` first co-clustered. With
/// nonnegative strengths all heights lie in `[0, 1]`, and thresholding at
/// any value yields a multicut.
#[derive(Clone, Debug)]
pub struct MergeTree {
    heights: Vec<f64>,
}

impl MergeTree {
    pub fn heights(&self) -> &[f64] {
        &self.heights
    }

    /// The multicut obtained by cutting every edge strictly above `q`.
    pub fn threshold(&self, q: f64) -> Vec<bool> {
        self.heights.iter().map(|&u| u > q).collect()
    }
}

struct UnionFind {
    parent: Vec<usize>,
}

impl UnionFind {
    fn new(n: usize) -> Self {
        UnionFind { parent: (0..n).collect() }
    }

    fn find(&mut self, mut v: usize) -> usize {
        while self.parent[v] != v {
            self.parent[v] = self.parent[self.parent[v]];
            v = self.parent[v];
        }
        v
    }

    fn union(&mut self, a: usize, b: usize) -> bool {
        let (ra, rb) = (self.find(a), self.find(b));
        if ra == rb {
            return false;
        }
        let (lo, hi) = if ra < rb { (ra, rb) } else { (rb, ra) };
        self.parent[hi] = lo;
        true
    }
}

/// Single-linkage agglomeration over edge strengths. Edges are processed in
/// batches of equal strength, smallest first; every edge whose endpoints
/// become connected during a batch gets that batch's strength as its merge
/// height. Heights are scaled by the largest strength (or left unscaled
/// when no strength is positive).
pub fn agglomerate(graph: &PlanarGraph, strengths: &[f64]) -> Result<MergeTree> {
    let m = graph.num_edges();
    if strengths.len() != m {
        return Err(Error::LengthMismatch { expected: m, got: strengths.len() });
    }
    if strengths.iter().any(|s| !s.is_finite()) {
        return Err(Error::BadValue("strengths must be finite"));
    }
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| strengths[a].total_cmp(&strengths[b]).then(a.cmp(&b)));

    let mut uf = UnionFind::new(graph.num_vertices());
    let mut heights = vec![f64::INFINITY; m];
    let mut pending: Vec<usize> = (0..m).collect();
    let mut i = 0;
    while i < order.len() {
        let s = strengths[order[i]];
        // Union the whole equal-strength batch first, then sweep: ties
        // merge simultaneously.
        let mut j = i;
        while j < order.len() && strengths[order[j]] == s {
            let e = graph.edge(order[j]);
            uf.union(e.u, e.v);
            j += 1;
        }
        pending.retain(|&id| {
            let e = graph.edge(id);
            if uf.find(e.u) == uf.find(e.v) {
                heights[id] = s;
                false
            } else {
                true
            }
        });
        i = j;
    }
    debug_assert!(pending.is_empty() || heights.iter().all(|h| h.is_finite()) == pending.is_empty());
    // Edges in components never merged cannot remain: each edge connects
    // its own endpoints once processed.
    if heights.iter().any(|h| !h.is_finite()) {
        return Err(Error::Internal("agglomeration left an edge without a merge height".into()));
    }
    let peak = strengths.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let scale = if peak > 0.0 { peak } else { 1.0 };
    for h in &mut heights {
        *h /= scale;
    }
    Ok(MergeTree { heights })
}

/// Per-level fitted thresholds against the layer objective.
#[derive(Clone, Debug)]
pub struct BaselineFit {
    /// One threshold per level; cutting strictly above it minimizes that
    /// level's cost.
    pub thresholds: Vec<f64>,
    pub per_level_costs: Vec<f64>,
    pub cost: f64,
    /// Whether the layer weights satisfy the pointwise monotonicity premise
    /// that guarantees nondecreasing thresholds.
    pub monotone_premise: bool,
    /// Whether the fitted thresholds are nondecreasing, making the
    /// thresholded levels a nested hierarchy.
    pub nested: bool,
}

impl BaselineFit {
    /// The thresholded cut per level.
    pub fn levels(&self, tree: &MergeTree) -> Vec<Vec<bool>> {
        self.thresholds.iter().map(|&q| tree.threshold(q)).collect()
    }
}

/// Scans, for each level, all cut positions of the merge heights (below
/// everything, or at any height) and keeps the cheapest; ties go to the
/// smaller threshold.
pub fn fit_thresholds(tree: &MergeTree, lw: &LayerWeights) -> Result<BaselineFit> {
    if lw.num_edges() != tree.heights.len() {
        return Err(Error::LengthMismatch { expected: tree.heights.len(), got: lw.num_edges() });
    }
    let mut candidates: Vec<f64> = tree.heights.clone();
    candidates.sort_by(f64::total_cmp);
    candidates.dedup();
    candidates.insert(0, f64::NEG_INFINITY);

    let levels = lw.num_levels();
    let mut thresholds = Vec::with_capacity(levels);
    let mut per_level_costs = Vec::with_capacity(levels);
    for l in 1..=levels {
        let theta = lw.layer(l);
        let mut best_q = f64::NEG_INFINITY;
        let mut best_cost = f64::INFINITY;
        for &q in &candidates {
            let cost: f64 = tree
                .heights
                .iter()
                .zip(theta)
                .filter(|(&u, _)| u > q)
                .map(|(_, &t)| t)
                .sum();
            if cost < best_cost {
                best_cost = cost;
                best_q = q;
            }
        }
        thresholds.push(best_q);
        per_level_costs.push(best_cost);
    }

    let m = lw.num_edges();
    let monotone_premise = (1..levels)
        .all(|l| (0..m).all(|e| lw.layer(l)[e] <= lw.layer(l + 1)[e]));
    let nested = thresholds.windows(2).all(|w| w[0] <= w[1]);
    Ok(BaselineFit {
        thresholds,
        cost: per_level_costs.iter().sum(),
        per_level_costs,
        monotone_premise,
        nested,
    })
}

/// Convenience: agglomerate on the graph's own base weights and fit.
pub fn fit_baseline(graph: &PlanarGraph, lw: &LayerWeights) -> Result<(MergeTree, BaselineFit)> {
    let strengths = graph.thetas();
    let tree = agglomerate(graph, &strengths)?;
    let fit = fit_thresholds(&tree, lw)?;
    Ok((tree, fit))
}

/// Outcome of the independent-layer ablation: each level solved on its own.
#[derive(Clone, Debug)]
pub struct IndependentLayers {
    pub cuts: Vec<Vec<bool>>,
    pub costs: Vec<f64>,
    pub statuses: Vec<SolveStatus>,
    /// Pairs `(level, edge)` where the level cuts an edge the previous
    /// level keeps; empty iff the stack of cuts is a nested hierarchy.
    pub violations: Vec<(usize, usize)>,
}

impl IndependentLayers {
    pub fn is_nested(&self) -> bool {
        self.violations.is_empty()
    }

    pub fn total_cost(&self) -> f64 {
        self.costs.iter().sum()
    }
}

/// Solves every layer as its own single-level instance, which is the full
/// problem with the nesting multipliers pinned to zero. The per-level cuts
/// are multicuts but need not nest.
pub fn independent_layers(instance: &Instance, config: &SolverConfig) -> Result<IndependentLayers> {
    let lw = &instance.weights;
    let mut cuts = Vec::with_capacity(lw.num_levels());
    let mut costs = Vec::with_capacity(lw.num_levels());
    let mut statuses = Vec::with_capacity(lw.num_levels());
    for l in 1..=lw.num_levels() {
        let layer = lw.layer(l).to_vec();
        let single = Instance::from_raw_layers(instance.graph.clone(), vec![layer])?;
        let report = run_default(&single, config)?;
        cuts.push(report.hierarchy.levels.into_iter().next().unwrap());
        costs.push(report.upper_bound);
        statuses.push(report.status);
    }
    let mut violations = Vec::new();
    for l in 1..cuts.len() {
        for e in 0..lw.num_edges() {
            if cuts[l][e] && !cuts[l - 1][e] {
                violations.push((l + 1, e));
            }
        }
    }
    Ok(IndependentLayers { cuts, costs, statuses, violations })
}
