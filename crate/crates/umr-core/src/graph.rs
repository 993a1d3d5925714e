//! Planar graphs carried with an explicit rotation system.
//!
//! The embedding is input data, not something this module computes: callers
//! supply, for every vertex, the cyclic order of incident edges. Faces are
//! recovered by walking darts (directed edge sides), and the sphere check is
//! Euler's identity `n - m + f = 2`. On top of that sit the combinatorial
//! operations the solver needs: connected components under a cut, multicut
//! validation, cycle-inequality separation, per-component isolating cuts,
//! the face-by-face fan triangulation, and the dual graph.

use alloc::collections::BinaryHeap;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

pub type Vertex = usize;
pub type EdgeId = usize;

/// Violations smaller than this are treated as satisfied.
pub const CYCLE_TOL: f64 = 1e-9;

/// An edge with its fitting data. `theta` is the target distance the fitted
/// ultrametric tries to match, `length` the multiplier on its squared error.
#[derive(Debug, Clone, PartialEq)]
pub struct Edge {
    pub u: Vertex,
    pub v: Vertex,
    pub theta: f64,
    pub length: f64,
}

impl Edge {
    pub fn new(u: Vertex, v: Vertex, theta: f64, length: f64) -> Self {
        Edge { u, v, theta, length }
    }

    /// Unit-weight edge, for purely combinatorial uses.
    pub fn plain(u: Vertex, v: Vertex) -> Self {
        Edge { u, v, theta: 0.0, length: 1.0 }
    }

    pub fn other(&self, w: Vertex) -> Vertex {
        if w == self.u {
            self.v
        } else {
            self.u
        }
    }
}

/// One side of an edge, traversed `tail -> head`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Dart {
    pub edge: EdgeId,
    pub tail: Vertex,
    pub head: Vertex,
}

/// The faces of an embedding. `edge_faces[e]` holds the face ids seen by the
/// two darts of `e`, forward (`u -> v`) first. An edge whose two darts lie on
/// the same face is a bridge.
#[derive(Debug, Clone)]
pub struct FaceSet {
    pub faces: Vec<Vec<Dart>>,
    pub edge_faces: Vec<[usize; 2]>,
}

impl FaceSet {
    pub fn num_faces(&self) -> usize {
        self.faces.len()
    }
}

/// An embedded graph. Parallel edges are allowed (triangulation and duals
/// need them); self-loops are not. Vertices are `0..n`, edges are indices
/// into the edge list, and `rotation[v]` lists the edges incident to `v` in
/// cyclic order.
#[derive(Debug, Clone)]
pub struct PlanarGraph {
    n: usize,
    edges: Vec<Edge>,
    rotation: Vec<Vec<EdgeId>>,
}

impl PlanarGraph {
    pub fn new(n: usize, edges: Vec<Edge>, rotation: Vec<Vec<EdgeId>>) -> Result<Self> {
        for (id, e) in edges.iter().enumerate() {
            if e.u >= n {
                return Err(Error::BadIndex { what: "vertex", index: e.u });
            }
            if e.v >= n {
                return Err(Error::BadIndex { what: "vertex", index: e.v });
            }
            if e.u == e.v {
                return Err(Error::SelfLoop { edge: id });
            }
            if !(e.theta >= 0.0) || !e.theta.is_finite() || !(e.length > 0.0) || !e.length.is_finite() {
                return Err(Error::BadEdgeWeight { edge: id });
            }
        }
        if rotation.len() != n {
            return Err(Error::LengthMismatch { expected: n, got: rotation.len() });
        }
        // Each edge must appear exactly once in the rotation of each endpoint.
        let mut seen = vec![[false, false]; edges.len()];
        for (v, around) in rotation.iter().enumerate() {
            for &e in around {
                if e >= edges.len() {
                    return Err(Error::BadIndex { what: "edge", index: e });
                }
                let slot = if edges[e].u == v {
                    0
                } else if edges[e].v == v {
                    1
                } else {
                    return Err(Error::BadRotation { vertex: v });
                };
                if seen[e][slot] {
                    return Err(Error::BadRotation { vertex: v });
                }
                seen[e][slot] = true;
            }
        }
        if seen.iter().any(|s| !s[0] || !s[1]) {
            let v = edges[seen.iter().position(|s| !s[0] || !s[1]).unwrap()].u;
            return Err(Error::BadRotation { vertex: v });
        }
        Ok(PlanarGraph { n, edges, rotation })
    }

    pub fn num_vertices(&self) -> usize {
        self.n
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn edge(&self, e: EdgeId) -> &Edge {
        &self.edges[e]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn rotation(&self, v: Vertex) -> &[EdgeId] {
        &self.rotation[v]
    }

    /// Per-edge target weights, in edge order.
    pub fn thetas(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.theta).collect()
    }

    /// Per-edge length multipliers, in edge order.
    pub fn lengths(&self) -> Vec<f64> {
        self.edges.iter().map(|e| e.length).collect()
    }

    fn check_edge_vec(&self, len: usize) -> Result<()> {
        if len != self.edges.len() {
            return Err(Error::LengthMismatch { expected: self.edges.len(), got: len });
        }
        Ok(())
    }

    /// The dart leaving `tail` along `e`.
    fn dart_from(&self, e: EdgeId, tail: Vertex) -> Dart {
        Dart { edge: e, tail, head: self.edges[e].other(tail) }
    }

    /// Face successor: continue from the head of `d` along the next edge in
    /// rotation order.
    fn next_dart(&self, d: Dart) -> Dart {
        let around = &self.rotation[d.head];
        let pos = around.iter().position(|&e| e == d.edge).expect("rotation covers incidences");
        let e2 = around[(pos + 1) % around.len()];
        self.dart_from(e2, d.head)
    }

    fn trace_faces(&self) -> FaceSet {
        let m = self.edges.len();
        // Dart codes: 2e = u->v, 2e+1 = v->u.
        let mut face_of = vec![usize::MAX; 2 * m];
        let mut faces = Vec::new();
        for start in 0..2 * m {
            if face_of[start] != usize::MAX {
                continue;
            }
            let id = faces.len();
            let mut walk = Vec::new();
            let e = start / 2;
            let tail = if start % 2 == 0 { self.edges[e].u } else { self.edges[e].v };
            let mut d = self.dart_from(e, tail);
            loop {
                let code = 2 * d.edge + usize::from(d.tail != self.edges[d.edge].u);
                if face_of[code] != usize::MAX {
                    break;
                }
                face_of[code] = id;
                walk.push(d);
                d = self.next_dart(d);
            }
            faces.push(walk);
        }
        let edge_faces = (0..m).map(|e| [face_of[2 * e], face_of[2 * e + 1]]).collect();
        FaceSet { faces, edge_faces }
    }

    /// Checks that the rotation system is a sphere embedding of a connected,
    /// two-edge-connected graph, and returns its faces.
    pub fn validate_embedding(&self) -> Result<FaceSet> {
        if self.edges.is_empty() {
            return if self.n <= 1 {
                Ok(FaceSet { faces: Vec::new(), edge_faces: Vec::new() })
            } else {
                Err(Error::Disconnected)
            };
        }
        if self.components_under(&vec![false; self.edges.len()]) != 1 {
            return Err(Error::Disconnected);
        }
        let faces = self.trace_faces();
        // Euler first: a rotation system that is not a sphere embedding
        // traces too few faces, and any same-face edge it produces is an
        // artifact of that, not a bridge.
        let f = faces.faces.len();
        if self.n + f != self.edges.len() + 2 {
            return Err(Error::EulerViolation { vertices: self.n, edges: self.edges.len(), faces: f });
        }
        for (e, pair) in faces.edge_faces.iter().enumerate() {
            if pair[0] == pair[1] {
                return Err(Error::BridgeDetected { edge: e });
            }
        }
        Ok(faces)
    }

    fn components_under(&self, cut: &[bool]) -> usize {
        *component_labels(self, cut).iter().max().unwrap_or(&0) + 1
    }
}

/// Labels of the connected components of the graph with the cut edges
/// removed. Labels are dense and assigned in order of the smallest vertex in
/// each component, so the output is deterministic.
pub fn connected_components(graph: &PlanarGraph, cut: &[bool]) -> Result<Vec<usize>> {
    graph.check_edge_vec(cut.len())?;
    Ok(component_labels(graph, cut))
}

fn component_labels(graph: &PlanarGraph, cut: &[bool]) -> Vec<usize> {
    let n = graph.num_vertices();
    let mut adj = vec![Vec::new(); n];
    for (id, e) in graph.edges().iter().enumerate() {
        if !cut[id] {
            adj[e.u].push(e.v);
            adj[e.v].push(e.u);
        }
    }
    let mut label = vec![usize::MAX; n];
    let mut next = 0;
    let mut stack = Vec::new();
    for start in 0..n {
        if label[start] != usize::MAX {
            continue;
        }
        label[start] = next;
        stack.push(start);
        while let Some(v) = stack.pop() {
            for &w in &adj[v] {
                if label[w] == usize::MAX {
                    label[w] = next;
                    stack.push(w);
                }
            }
        }
        next += 1;
    }
    label
}

/// A binary vector is a multicut iff every cut edge joins two distinct
/// components of the uncut subgraph (no cut edge can be "repaired" from
/// inside its own cluster).
pub fn is_multicut(graph: &PlanarGraph, cut: &[bool]) -> Result<bool> {
    let labels = connected_components(graph, cut)?;
    Ok(graph
        .edges()
        .iter()
        .enumerate()
        .all(|(id, e)| !cut[id] || labels[e.u] != labels[e.v]))
}

/// A violated cycle inequality: the fractional mass on `edge` exceeds the
/// mass on the cheapest path between its endpoints through the rest of the
/// graph by `gap`.
#[derive(Debug, Clone, PartialEq)]
pub struct CycleViolation {
    pub edge: EdgeId,
    /// Edges of the violating cycle, the offending edge included.
    pub cycle: Vec<EdgeId>,
    pub gap: f64,
}

#[derive(Debug, PartialEq)]
struct HeapItem {
    dist: f64,
    vertex: Vertex,
}

impl Eq for HeapItem {}

impl PartialOrd for HeapItem {
    fn partial_cmp(&self, other: &Self) -> Option<core::cmp::Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for HeapItem {
    fn cmp(&self, other: &Self) -> core::cmp::Ordering {
        // Reversed on distance: BinaryHeap is a max-heap, we want the min.
        other
            .dist
            .total_cmp(&self.dist)
            .then_with(|| other.vertex.cmp(&self.vertex))
    }
}

/// Finds all edges whose value exceeds the shortest-path value between their
/// endpoints in the rest of the graph. For each such edge the returned cycle
/// (path plus the edge itself) is a violated cycle inequality.
pub fn separate_cycle_inequalities(graph: &PlanarGraph, x: &[f64]) -> Result<Vec<CycleViolation>> {
    graph.check_edge_vec(x.len())?;
    if x.iter().any(|v| !v.is_finite() || *v < -CYCLE_TOL) {
        return Err(Error::BadValue("cycle separation needs nonnegative finite values"));
    }
    let n = graph.num_vertices();
    let mut adj: Vec<Vec<(Vertex, EdgeId)>> = vec![Vec::new(); n];
    for (id, e) in graph.edges().iter().enumerate() {
        adj[e.u].push((e.v, id));
        adj[e.v].push((e.u, id));
    }
    let mut out = Vec::new();
    for (skip, e) in graph.edges().iter().enumerate() {
        if x[skip] <= CYCLE_TOL {
            continue;
        }
        // Dijkstra from e.u to e.v avoiding `skip`.
        let mut dist = vec![f64::INFINITY; n];
        let mut via = vec![usize::MAX; n];
        dist[e.u] = 0.0;
        let mut heap = BinaryHeap::new();
        heap.push(HeapItem { dist: 0.0, vertex: e.u });
        while let Some(HeapItem { dist: d, vertex: v }) = heap.pop() {
            if d > dist[v] {
                continue;
            }
            if v == e.v {
                break;
            }
            for &(w, id) in &adj[v] {
                if id == skip {
                    continue;
                }
                let nd = d + x[id].max(0.0);
                if nd < dist[w] {
                    dist[w] = nd;
                    via[w] = id;
                    heap.push(HeapItem { dist: nd, vertex: w });
                }
            }
        }
        if dist[e.v] < x[skip] - CYCLE_TOL {
            let mut cycle = vec![skip];
            let mut v = e.v;
            while v != e.u {
                let id = via[v];
                cycle.push(id);
                v = graph.edge(id).other(v);
            }
            out.push(CycleViolation { edge: skip, cycle, gap: x[skip] - dist[e.v] });
        }
    }
    Ok(out)
}

/// One isolating cut per connected component of the uncut subgraph, in
/// component-label order. Duplicates are kept: with exactly two components
/// both isolating cuts coincide, and summing the returned columns counts
/// every separating edge exactly twice.
pub fn isocuts(graph: &PlanarGraph, z: &[bool]) -> Result<Vec<Vec<bool>>> {
    let labels = connected_components(graph, z)?;
    let parts = labels.iter().max().map_or(0, |&l| l + 1);
    let mut out = vec![vec![false; graph.num_edges()]; parts];
    for (id, e) in graph.edges().iter().enumerate() {
        let (a, b) = (labels[e.u], labels[e.v]);
        if a != b {
            out[a][id] = true;
            out[b][id] = true;
        }
    }
    Ok(out)
}

/// A triangulation of an embedded graph. Edges `0..original_edges` are the
/// input edges under their original ids; the rest are zero-weight fill.
#[derive(Debug, Clone)]
pub struct Triangulation {
    pub graph: PlanarGraph,
    pub faces: FaceSet,
    pub original_edges: usize,
}

/// Splits every face with four or more sides into triangles by clipping
/// corners, keeping the rotation system consistent so the result is still a
/// sphere embedding. Fill edges get `theta = 0` and unit length.
pub fn triangulate(graph: &PlanarGraph, faces: &FaceSet) -> Result<Triangulation> {
    let original_edges = graph.num_edges();
    let mut edges = graph.edges().to_vec();
    let mut rotation: Vec<Vec<EdgeId>> = (0..graph.num_vertices())
        .map(|v| graph.rotation(v).to_vec())
        .collect();

    for face in &faces.faces {
        let mut walk = face.clone();
        while walk.len() > 3 {
            let k = walk.len();
            let corner = (0..k)
                .find(|&i| walk[i].tail != walk[(i + 1) % k].head)
                .ok_or_else(|| Error::Internal("face cannot be triangulated".into()))?;
            let p = walk[corner];
            let q = walk[(corner + 1) % k];
            let (x, z) = (p.tail, q.head);
            let chord = edges.len();
            edges.push(Edge { u: x, v: z, theta: 0.0, length: 1.0 });
            // Successor of q.edge at z becomes the chord; successor of the
            // chord at x becomes p.edge. This closes the triangle (p, q,
            // z->x) and leaves the residual walk consistent.
            let pos_q = rotation[z].iter().position(|&e| e == q.edge).unwrap();
            rotation[z].insert(pos_q + 1, chord);
            let pos_p = rotation[x].iter().position(|&e| e == p.edge).unwrap();
            rotation[x].insert(pos_p, chord);
            let replacement = Dart { edge: chord, tail: x, head: z };
            if corner + 1 < k {
                walk[corner] = replacement;
                walk.remove(corner + 1);
            } else {
                walk[corner] = replacement;
                walk.remove(0);
            }
        }
    }

    let out = PlanarGraph::new(graph.num_vertices(), edges, rotation)?;
    let out_faces = out.validate_embedding()?;
    for (id, face) in out_faces.faces.iter().enumerate() {
        if face.len() != 3 {
            return Err(Error::NotTriangulated { face: id, degree: face.len() });
        }
    }
    Ok(Triangulation { graph: out, faces: out_faces, original_edges })
}

/// A dual edge crosses primal edge `primal` and joins the two faces on its
/// sides. Parallel dual edges are expected and kept.
#[derive(Debug, Clone, PartialEq)]
pub struct DualEdge {
    pub a: usize,
    pub b: usize,
    pub primal: EdgeId,
    pub weight: f64,
}

/// The dual of an embedded graph: one node per face, one edge per primal
/// edge, carrying caller-supplied weights.
#[derive(Debug, Clone)]
pub struct DualGraph {
    pub num_nodes: usize,
    pub edges: Vec<DualEdge>,
}

pub fn dual_graph(graph: &PlanarGraph, faces: &FaceSet, weights: &[f64]) -> Result<DualGraph> {
    graph.check_edge_vec(weights.len())?;
    let edges = faces
        .edge_faces
        .iter()
        .enumerate()
        .map(|(id, pair)| DualEdge { a: pair[0], b: pair[1], primal: id, weight: weights[id] })
        .collect();
    Ok(DualGraph { num_nodes: faces.faces.len(), edges })
}

/// Small embedded graphs shared by unit tests across the crate.
#[cfg(test)]
pub(crate) mod tests_support {
    use super::*;
    use alloc::vec;

    pub(crate) fn triangle() -> PlanarGraph {
        PlanarGraph::new(
            3,
            vec![Edge::plain(0, 1), Edge::plain(1, 2), Edge::plain(2, 0)],
            vec![vec![0, 2], vec![0, 1], vec![1, 2]],
        )
        .unwrap()
    }

    pub(crate) fn four_cycle() -> PlanarGraph {
        PlanarGraph::new(
            4,
            vec![Edge::plain(0, 1), Edge::plain(1, 2), Edge::plain(2, 3), Edge::plain(3, 0)],
            vec![vec![0, 3], vec![0, 1], vec![1, 2], vec![2, 3]],
        )
        .unwrap()
    }

    pub(crate) fn k4() -> PlanarGraph {
        // 3 sits inside triangle 0-1-2; rotations read off a drawing.
        PlanarGraph::new(
            4,
            vec![
                Edge::plain(0, 1),
                Edge::plain(0, 2),
                Edge::plain(0, 3),
                Edge::plain(1, 2),
                Edge::plain(1, 3),
                Edge::plain(2, 3),
            ],
            vec![vec![0, 2, 1], vec![3, 4, 0], vec![1, 5, 3], vec![5, 2, 4]],
        )
        .unwrap()
    }

    pub(crate) fn grid(rows: usize, cols: usize) -> PlanarGraph {
        let at = |r: usize, c: usize| r * cols + c;
        let mut edges = Vec::new();
        let mut horiz = vec![vec![usize::MAX; cols]; rows];
        let mut vert = vec![vec![usize::MAX; cols]; rows];
        for r in 0..rows {
            for c in 0..cols {
                if c + 1 < cols {
                    horiz[r][c] = edges.len();
                    edges.push(Edge::plain(at(r, c), at(r, c + 1)));
                }
                if r + 1 < rows {
                    vert[r][c] = edges.len();
                    edges.push(Edge::plain(at(r, c), at(r + 1, c)));
                }
            }
        }
        let mut rotation = vec![Vec::new(); rows * cols];
        for r in 0..rows {
            for c in 0..cols {
                let mut around = Vec::new();
                if r > 0 {
                    around.push(vert[r - 1][c]);
                }
                if c + 1 < cols {
                    around.push(horiz[r][c]);
                }
                if r + 1 < rows {
                    around.push(vert[r][c]);
                }
                if c > 0 {
                    around.push(horiz[r][c - 1]);
                }
                rotation[at(r, c)] = around;
            }
        }
        PlanarGraph::new(rows * cols, edges, rotation).unwrap()
    }
}
