//! Exact planar minimum cut via perfect matching.
//!
//! Cuts of a planar graph are exactly the even-degree edge sets of its dual,
//! and even subgraphs of a graph with only degree-three nodes are exactly
//! the complements of its perfect matchings after each node is expanded into
//! a small gadget. Chaining those two facts turns minimum cut with arbitrary
//! edge signs, which is NP-hard in general, into one minimum-weight perfect
//! matching problem:
//!
//! 1. triangulate every face with zero-weight fill edges, so each dual node
//!    has degree three;
//! 2. expand each dual node (triangle) into three ports joined by a
//!    zero-weight clique, and connect the two ports of each edge's sides by
//!    an external edge of weight minus the edge weight;
//! 3. a perfect matching always exists (match every external edge), each
//!    gadget matches one or all three of its external edges, and the
//!    unmatched external edges form the minimum cut.
//!
//! The matched/unmatched complement flips the sign: minimizing the matching
//! weight with negated externals minimizes the original weight of the
//! unmatched set. The cut value is never positive because the empty cut
//! (all externals matched) is always available.
//!
//! [`MinCutOracle`] does the structural work (triangulation, gadget wiring)
//! once per graph; each [`min_cut`](MinCutOracle::min_cut) call reuses it
//! with fresh weights, which is what the cutting-plane loop needs.

use alloc::vec;
use alloc::vec::Vec;

use crate::graph::{triangulate, FaceSet, PlanarGraph, Triangulation};
use crate::matching::min_weight_perfect_matching;
use crate::{Error, Result};

/// A cut as an indicator over the caller's edges plus its total weight.
#[derive(Clone, Debug, PartialEq)]
pub struct CutColumn {
    pub edges: Vec<bool>,
    pub weight: f64,
}

/// Reusable minimum-cut solver for one embedded graph.
pub struct MinCutOracle {
    tri: Triangulation,
    num_original: usize,
    gadget_nodes: usize,
    // Matching edge list prefix: zero-weight cliques inside each gadget.
    internal_edges: Vec<(usize, usize)>,
    // One per triangulated edge: the ports of its two sides.
    external_edges: Vec<(usize, usize)>,
}

impl MinCutOracle {
    /// Builds the matching structure for `graph` with validated `faces`.
    pub fn new(graph: &PlanarGraph, faces: &FaceSet) -> Result<Self> {
        let tri = triangulate(graph, faces)?;
        let num_faces = tri.faces.num_faces();
        let mut internal_edges = Vec::with_capacity(3 * num_faces);
        let mut ports: Vec<Vec<usize>> = vec![Vec::new(); tri.graph.num_edges()];
        for (f, walk) in tri.faces.faces.iter().enumerate() {
            debug_assert_eq!(walk.len(), 3);
            let base = 3 * f;
            internal_edges.push((base, base + 1));
            internal_edges.push((base + 1, base + 2));
            internal_edges.push((base, base + 2));
            for (slot, dart) in walk.iter().enumerate() {
                ports[dart.edge].push(base + slot);
            }
        }
        let mut external_edges = Vec::with_capacity(tri.graph.num_edges());
        for (e, p) in ports.iter().enumerate() {
            if p.len() != 2 {
                return Err(Error::Internal(alloc::format!(
                    "edge {e} borders {} face sides, expected 2",
                    p.len()
                )));
            }
            external_edges.push((p[0], p[1]));
        }
        Ok(MinCutOracle {
            num_original: graph.num_edges(),
            gadget_nodes: 3 * num_faces,
            internal_edges,
            external_edges,
            tri,
        })
    }

    pub fn num_original_edges(&self) -> usize {
        self.num_original
    }

    /// Minimum-weight cut under `weights` (indexed by the original edges).
    /// The result is never positive; all-nonnegative weights give the empty
    /// cut.
    pub fn min_cut(&self, weights: &[f64]) -> Result<CutColumn> {
        if weights.len() != self.num_original {
            return Err(Error::LengthMismatch { expected: self.num_original, got: weights.len() });
        }
        for (e, w) in weights.iter().enumerate() {
            if !w.is_finite() {
                return Err(Error::BadEdgeWeight { edge: e });
            }
        }
        if self.gadget_nodes == 0 {
            return Ok(CutColumn { edges: Vec::new(), weight: 0.0 });
        }

        let tri_weight =
            |e: usize| if e < self.num_original { weights[e] } else { 0.0 };
        let mut matching_edges =
            Vec::with_capacity(self.internal_edges.len() + self.external_edges.len());
        for &(a, b) in &self.internal_edges {
            matching_edges.push((a, b, 0.0));
        }
        for (e, &(a, b)) in self.external_edges.iter().enumerate() {
            matching_edges.push((a, b, -tri_weight(e)));
        }
        let matching = min_weight_perfect_matching(self.gadget_nodes, &matching_edges)?;

        // Unmatched externals are the cut, fill edges included.
        let first_external = self.internal_edges.len();
        let mut in_cut = vec![true; self.tri.graph.num_edges()];
        for &id in &matching.edges {
            if id >= first_external {
                in_cut[id - first_external] = false;
            }
        }
        self.check_is_bipartition(&in_cut)?;

        let edges: Vec<bool> = in_cut[..self.num_original].to_vec();
        let weight = edges
            .iter()
            .zip(weights)
            .filter(|(&c, _)| c)
            .map(|(_, w)| w)
            .sum();
        Ok(CutColumn { edges, weight })
    }

    /// The unmatched external set must two-color the triangulated vertices;
    /// anything else means the gadget correspondence was violated.
    fn check_is_bipartition(&self, in_cut: &[bool]) -> Result<()> {
        let g = &self.tri.graph;
        let n = g.num_vertices();
        let mut adj = vec![Vec::new(); n];
        for (id, e) in g.edges().iter().enumerate() {
            adj[e.u].push((e.v, in_cut[id]));
            adj[e.v].push((e.u, in_cut[id]));
        }
        let mut color = vec![u8::MAX; n];
        let mut stack = vec![0usize];
        color[0] = 0;
        while let Some(v) = stack.pop() {
            for &(u, crossed) in &adj[v] {
                let want = color[v] ^ u8::from(crossed);
                if color[u] == u8::MAX {
                    color[u] = want;
                    stack.push(u);
                } else if color[u] != want {
                    return Err(Error::ParityError);
                }
            }
        }
        Ok(())
    }
}
