//! Exact brute-force references.
//!
//! Everything here enumerates, so every function carries a hard size cap and
//! returns [`Error::TooLarge`] beyond it. These are the ground truth the fast
//! paths are tested against; they must stay independent of the code they
//! check, so they work on plain edge lists and label vectors.

use alloc::vec;
use alloc::vec::Vec;

use crate::graph::{EdgeId, PlanarGraph};
use crate::{Error, Result};

pub const MIN_CUT_VERTEX_CAP: usize = 20;
pub const MULTICUT_VERTEX_CAP: usize = 10;
pub const HIERARCHY_VERTEX_CAP: usize = 9;
pub const HIERARCHY_LEVEL_CAP: usize = 3;
pub const MWPM_NODE_CAP: usize = 12;
pub const CYCLE_CHECK_EDGE_CAP: usize = 12;

/// Iterates over all partitions of `0..n` as restricted growth strings:
/// label vectors with `a[0] = 0` and `a[i] <= 1 + max(a[..i])`. The number of
/// partitions visited is the Bell number of `n`.
pub struct Partitions {
    labels: Vec<usize>,
    fresh: bool,
    done: bool,
}

impl Partitions {
    pub fn new(n: usize) -> Self {
        Partitions { labels: vec![0; n], fresh: true, done: n == 0 }
    }

    fn advance(&mut self) {
        let n = self.labels.len();
        for i in (1..n).rev() {
            let max_prefix = *self.labels[..i].iter().max().unwrap();
            if self.labels[i] <= max_prefix {
                self.labels[i] += 1;
                for j in i + 1..n {
                    self.labels[j] = 0;
                }
                return;
            }
        }
        self.done = true;
    }
}

impl Iterator for Partitions {
    type Item = Vec<usize>;

    fn next(&mut self) -> Option<Vec<usize>> {
        if self.done {
            return None;
        }
        if self.fresh {
            self.fresh = false;
        } else {
            self.advance();
            if self.done {
                return None;
            }
        }
        Some(self.labels.clone())
    }
}

fn cut_of_labels(graph: &PlanarGraph, labels: &[usize]) -> Vec<bool> {
    graph.edges().iter().map(|e| labels[e.u] != labels[e.v]).collect()
}

fn cut_value(graph: &PlanarGraph, weights: &[f64], labels: &[usize]) -> f64 {
    graph
        .edges()
        .iter()
        .enumerate()
        .filter(|(_, e)| labels[e.u] != labels[e.v])
        .map(|(id, _)| weights[id])
        .sum()
}

/// Minimum-weight two-way cut by enumerating all vertex bipartitions,
/// the empty cut included. Ties keep the first bipartition visited.
pub fn brute_force_min_cut(graph: &PlanarGraph, weights: &[f64]) -> Result<(Vec<bool>, f64)> {
    let n = graph.num_vertices();
    if n > MIN_CUT_VERTEX_CAP {
        return Err(Error::TooLarge { what: "min cut vertices", limit: MIN_CUT_VERTEX_CAP, got: n });
    }
    if weights.len() != graph.num_edges() {
        return Err(Error::LengthMismatch { expected: graph.num_edges(), got: weights.len() });
    }
    let mut best_labels = vec![0; n];
    let mut best = f64::INFINITY;
    let mut labels = vec![0; n];
    // Vertex 0 stays on side 0; masks cover the rest.
    for mask in 0u64..(1u64 << (n - 1).min(63)) {
        for i in 1..n {
            labels[i] = ((mask >> (i - 1)) & 1) as usize;
        }
        let value = cut_value(graph, weights, &labels);
        if value < best {
            best = value;
            best_labels.copy_from_slice(&labels);
        }
    }
    Ok((cut_of_labels(graph, &best_labels), best))
}

/// Minimum-weight multicut by enumerating all vertex partitions. Ties keep
/// the first partition in restricted-growth-string order.
pub fn brute_force_multicut(graph: &PlanarGraph, weights: &[f64]) -> Result<(Vec<bool>, f64)> {
    let n = graph.num_vertices();
    if n > MULTICUT_VERTEX_CAP {
        return Err(Error::TooLarge { what: "multicut vertices", limit: MULTICUT_VERTEX_CAP, got: n });
    }
    if weights.len() != graph.num_edges() {
        return Err(Error::LengthMismatch { expected: graph.num_edges(), got: weights.len() });
    }
    let mut best_labels = vec![0; n];
    let mut best = f64::INFINITY;
    for labels in Partitions::new(n) {
        let value = cut_value(graph, weights, &labels);
        if value < best {
            best = value;
            best_labels = labels;
        }
    }
    Ok((cut_of_labels(graph, &best_labels), best))
}

fn for_each_refinement(blocks: &[Vec<usize>], n: usize, f: &mut impl FnMut(&[usize])) {
    // Product over blocks of the partitions of each block, glued into global
    // labels with one label range per (block, sub-block) pair.
    fn rec(blocks: &[Vec<usize>], idx: usize, next_label: usize, labels: &mut [usize], f: &mut impl FnMut(&[usize])) {
        if idx == blocks.len() {
            f(labels);
            return;
        }
        let block = &blocks[idx];
        for sub in Partitions::new(block.len()) {
            let used = sub.iter().max().map_or(0, |&m| m + 1);
            for (pos, &v) in block.iter().enumerate() {
                labels[v] = next_label + sub[pos];
            }
            rec(blocks, idx + 1, next_label + used, labels, f);
        }
    }
    let mut labels = vec![0; n];
    rec(blocks, 0, 0, &mut labels, f);
}

fn blocks_of(labels: &[usize]) -> Vec<Vec<usize>> {
    let count = labels.iter().max().map_or(0, |&m| m + 1);
    let mut blocks = vec![Vec::new(); count];
    for (v, &l) in labels.iter().enumerate() {
        blocks[l].push(v);
    }
    blocks
}

/// Optimal hierarchy by enumerating every chain of nested partitions.
/// `layers[l]` holds the per-edge weights of level `l + 1`; level 1 is the
/// finest, so each level's partition refines the next one's. Returns the
/// per-level cut indicators of the best chain and its total cost.
pub fn brute_force_hierarchy(
    graph: &PlanarGraph,
    layers: &[Vec<f64>],
) -> Result<(Vec<Vec<bool>>, f64)> {
    let n = graph.num_vertices();
    let levels = layers.len();
    if n > HIERARCHY_VERTEX_CAP {
        return Err(Error::TooLarge { what: "hierarchy vertices", limit: HIERARCHY_VERTEX_CAP, got: n });
    }
    if levels > HIERARCHY_LEVEL_CAP {
        return Err(Error::TooLarge { what: "hierarchy levels", limit: HIERARCHY_LEVEL_CAP, got: levels });
    }
    for w in layers {
        if w.len() != graph.num_edges() {
            return Err(Error::LengthMismatch { expected: graph.num_edges(), got: w.len() });
        }
    }
    if levels == 0 {
        return Ok((Vec::new(), 0.0));
    }

    struct Search<'a> {
        graph: &'a PlanarGraph,
        layers: &'a [Vec<f64>],
        stack: Vec<Vec<usize>>,
        best: f64,
        best_chain: Vec<Vec<usize>>,
    }

    impl Search<'_> {
        // Fills levels from coarsest (index levels-1) down to finest (0).
        fn descend(&mut self, level: isize, cost_above: f64) {
            if level < 0 {
                if cost_above < self.best {
                    self.best = cost_above;
                    self.best_chain = self.stack.clone();
                }
                return;
            }
            let l = level as usize;
            let n = self.graph.num_vertices();
            let coarser = self.stack.last().cloned();
            let mut visit = |labels: &[usize]| {
                let cost = cost_above + cut_value(self.graph, &self.layers[l], labels);
                self.stack.push(labels.to_vec());
                self.descend(level - 1, cost);
                self.stack.pop();
            };
            match coarser {
                None => {
                    for labels in Partitions::new(n) {
                        visit(&labels);
                    }
                }
                Some(up) => {
                    let blocks = blocks_of(&up);
                    for_each_refinement(&blocks, n, &mut visit);
                }
            }
        }
    }

    let mut search = Search { graph, layers, stack: Vec::new(), best: f64::INFINITY, best_chain: Vec::new() };
    search.descend(levels as isize - 1, 0.0);

    // The chain was stacked coarsest-first; emit indicators finest-first.
    let mut cuts = Vec::with_capacity(levels);
    for labels in search.best_chain.iter().rev() {
        cuts.push(cut_of_labels(graph, labels));
    }
    Ok((cuts, search.best))
}

/// Minimum-weight perfect matching by recursion over pairings. Returns the
/// matched edge ids (sorted) and the total weight; ties keep the pairing that
/// matches earlier nodes to earlier partners.
pub fn brute_force_mwpm(
    num_nodes: usize,
    edges: &[(usize, usize, f64)],
) -> Result<(Vec<EdgeId>, f64)> {
    if num_nodes > MWPM_NODE_CAP {
        return Err(Error::TooLarge { what: "matching nodes", limit: MWPM_NODE_CAP, got: num_nodes });
    }
    if num_nodes % 2 != 0 {
        return Err(Error::NoPerfectMatching);
    }
    // Parallel edges: keep the cheapest, lowest id on ties.
    let mut cheapest = vec![vec![usize::MAX; num_nodes]; num_nodes];
    for (id, &(u, v, w)) in edges.iter().enumerate() {
        if u >= num_nodes || v >= num_nodes {
            return Err(Error::BadIndex { what: "matching node", index: u.max(v) });
        }
        if u == v {
            return Err(Error::SelfLoop { edge: id });
        }
        let cur = cheapest[u][v];
        if cur == usize::MAX || w < edges[cur].2 {
            cheapest[u][v] = id;
            cheapest[v][u] = id;
        }
    }

    fn rec(
        cheapest: &Vec<Vec<usize>>,
        edges: &[(usize, usize, f64)],
        used: &mut [bool],
        chosen: &mut Vec<usize>,
        acc: f64,
        best: &mut f64,
        best_edges: &mut Vec<usize>,
    ) {
        let first = match used.iter().position(|u| !u) {
            None => {
                if acc < *best {
                    *best = acc;
                    *best_edges = chosen.clone();
                }
                return;
            }
            Some(i) => i,
        };
        used[first] = true;
        for j in first + 1..used.len() {
            if used[j] || cheapest[first][j] == usize::MAX {
                continue;
            }
            let id = cheapest[first][j];
            used[j] = true;
            chosen.push(id);
            rec(cheapest, edges, used, chosen, acc + edges[id].2, best, best_edges);
            chosen.pop();
            used[j] = false;
        }
        used[first] = false;
    }

    let mut used = vec![false; num_nodes];
    let mut chosen = Vec::new();
    let mut best = f64::INFINITY;
    let mut best_edges = Vec::new();
    rec(&cheapest, edges, &mut used, &mut chosen, 0.0, &mut best, &mut best_edges);
    if best.is_infinite() {
        return Err(Error::NoPerfectMatching);
    }
    best_edges.sort_unstable();
    Ok((best_edges, best))
}

/// Checks every cycle inequality by enumerating all simple cycles (edge
/// subsets whose touched vertices all have degree two and that are
/// connected). Returns all violated `(cycle, edge)` pairs.
pub fn brute_force_cycle_check(
    graph: &PlanarGraph,
    x: &[f64],
) -> Result<Vec<(Vec<EdgeId>, EdgeId)>> {
    let m = graph.num_edges();
    if m > CYCLE_CHECK_EDGE_CAP {
        return Err(Error::TooLarge { what: "cycle check edges", limit: CYCLE_CHECK_EDGE_CAP, got: m });
    }
    if x.len() != m {
        return Err(Error::LengthMismatch { expected: m, got: x.len() });
    }
    let n = graph.num_vertices();
    let mut violations = Vec::new();
    for mask in 1u64..(1u64 << m) {
        let members: Vec<usize> = (0..m).filter(|&e| mask >> e & 1 == 1).collect();
        if members.len() < 2 {
            continue;
        }
        let mut degree = vec![0usize; n];
        for &e in &members {
            degree[graph.edge(e).u] += 1;
            degree[graph.edge(e).v] += 1;
        }
        if degree.iter().any(|&d| d != 0 && d != 2) {
            continue;
        }
        // Connectivity of the touched subgraph.
        let start = graph.edge(members[0]).u;
        let mut seen = vec![false; n];
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(v) = stack.pop() {
            for &e in &members {
                let (a, b) = (graph.edge(e).u, graph.edge(e).v);
                for (p, q) in [(a, b), (b, a)] {
                    if p == v && !seen[q] {
                        seen[q] = true;
                        stack.push(q);
                    }
                }
            }
        }
        if degree.iter().enumerate().any(|(v, &d)| d == 2 && !seen[v]) {
            continue;
        }
        let total: f64 = members.iter().map(|&e| x[e]).sum();
        for &hat in &members {
            if total - x[hat] < x[hat] - crate::graph::CYCLE_TOL {
                violations.push((members.clone(), hat));
            }
        }
    }
    Ok(violations)
}
