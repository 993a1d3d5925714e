//! Minimum-weight perfect matching in general graphs.
//!
//! The core is a primal-dual blossom algorithm for maximum-weight matching
//! in the O(n^3) formulation: vertices carry dual values, odd sets shrink
//! into blossoms with their own duals, and alternating trees grow from free
//! vertices until an augmenting path appears or a dual adjustment unlocks
//! one. Minimum-weight perfect matching is the same problem on negated
//! weights with maximum cardinality forced, which is how [`min_weight_perfect_matching`]
//! drives it. Every solve re-checks the optimality certificate (feasible
//! duals, complementary slackness) before returning, so a wrong answer turns
//! into an error instead of a silent bad cut.
//!
//! Weights are plain floats. With integer inputs every dual adjustment stays
//! a multiple of one half, so the comparisons are exact and the matching is
//! exact; for general floats the slack tolerance below decides when an edge
//! counts as tight.

use alloc::collections::BTreeMap;
use alloc::format;
use alloc::vec;
use alloc::vec::Vec;

use crate::{Error, Result};

/// Slack at or below this counts as tight, and dual values this close to
/// zero count as zero.
pub const SLACK_EPS: f64 = 1e-9;

const NONE: usize = usize::MAX;

/// A perfect matching: the chosen edge ids (sorted, referring to the caller's
/// edge list) and their total weight under the caller's weights.
#[derive(Clone, Debug, PartialEq)]
pub struct Matching {
    pub edges: Vec<usize>,
    pub weight: f64,
}

/// Finds a perfect matching of `num_nodes` nodes minimizing total weight.
///
/// `edges` lists `(u, v, weight)` triples; parallel edges are allowed and
/// the cheapest copy (lowest id on ties) represents each node pair. Fails
/// with [`Error::NoPerfectMatching`] when none exists and
/// [`Error::Internal`] if the optimality certificate does not verify.
pub fn min_weight_perfect_matching(
    num_nodes: usize,
    edges: &[(usize, usize, f64)],
) -> Result<Matching> {
    if num_nodes % 2 != 0 {
        return Err(Error::NoPerfectMatching);
    }
    if num_nodes == 0 {
        return Ok(Matching { edges: Vec::new(), weight: 0.0 });
    }
    // Collapse parallel edges; the blossom machinery wants simple graphs.
    let mut cheapest: BTreeMap<(usize, usize), (usize, f64)> = BTreeMap::new();
    for (id, &(u, v, w)) in edges.iter().enumerate() {
        if u >= num_nodes || v >= num_nodes {
            return Err(Error::BadIndex { what: "matching node", index: u.max(v) });
        }
        if u == v {
            return Err(Error::SelfLoop { edge: id });
        }
        if !w.is_finite() {
            return Err(Error::BadEdgeWeight { edge: id });
        }
        let key = (u.min(v), u.max(v));
        match cheapest.get(&key) {
            Some(&(_, best)) if best <= w => {}
            _ => {
                cheapest.insert(key, (id, w));
            }
        }
    }
    let mut dense = Vec::with_capacity(cheapest.len());
    let mut orig = Vec::with_capacity(cheapest.len());
    for (&(u, v), &(id, w)) in &cheapest {
        // Maximum-weight machinery on negated weights minimizes.
        dense.push((u, v, -w));
        orig.push(id);
    }
    if dense.is_empty() {
        return Err(Error::NoPerfectMatching);
    }

    let mut solver = Blossom::new(num_nodes, dense);
    solver.solve();
    solver.verify()?;

    let mut ids = Vec::with_capacity(num_nodes / 2);
    let mut weight = 0.0;
    for v in 0..num_nodes {
        let p = solver.mate[v];
        if p == NONE {
            return Err(Error::NoPerfectMatching);
        }
        let k = p / 2;
        let (i, j, _) = solver.edges[k];
        if v == i.min(j) {
            ids.push(orig[k]);
            weight += edges[orig[k]].2;
        }
    }
    ids.sort_unstable();
    Ok(Matching { edges: ids, weight })
}

/// Maximum-weight maximum-cardinality matching state. Indices `0..n` are
/// vertices, `n..2n` are blossom slots; `NONE` plays the role of a null id.
struct Blossom {
    n: usize,
    edges: Vec<(usize, usize, f64)>,
    // endpoint p identifies edge p/2 seen from side p%2; neighbend[v] lists
    // the endpoints whose opposite side is v.
    endpoint: Vec<usize>,
    neighbend: Vec<Vec<usize>>,
    mate: Vec<usize>,
    label: Vec<u8>,
    labelend: Vec<usize>,
    inblossom: Vec<usize>,
    blossomparent: Vec<usize>,
    blossomchilds: Vec<Vec<usize>>,
    blossombase: Vec<usize>,
    blossomendps: Vec<Vec<usize>>,
    bestedge: Vec<usize>,
    blossombestedges: Vec<Vec<usize>>,
    unusedblossoms: Vec<usize>,
    dualvar: Vec<f64>,
    allowedge: Vec<bool>,
    queue: Vec<usize>,
}

impl Blossom {
    fn new(n: usize, edges: Vec<(usize, usize, f64)>) -> Self {
        let m = edges.len();
        let maxweight = edges.iter().map(|e| e.2).fold(0.0f64, f64::max);
        let mut endpoint = Vec::with_capacity(2 * m);
        let mut neighbend = vec![Vec::new(); n];
        for (k, &(i, j, _)) in edges.iter().enumerate() {
            endpoint.push(i);
            endpoint.push(j);
            neighbend[i].push(2 * k + 1);
            neighbend[j].push(2 * k);
        }
        let mut dualvar = vec![maxweight; n];
        dualvar.extend(core::iter::repeat(0.0).take(n));
        Blossom {
            n,
            edges,
            endpoint,
            neighbend,
            mate: vec![NONE; n],
            label: vec![0; 2 * n],
            labelend: vec![NONE; 2 * n],
            inblossom: (0..n).collect(),
            blossomparent: vec![NONE; 2 * n],
            blossomchilds: vec![Vec::new(); 2 * n],
            blossombase: (0..n).chain(core::iter::repeat(NONE).take(n)).collect(),
            blossomendps: vec![Vec::new(); 2 * n],
            bestedge: vec![NONE; 2 * n],
            blossombestedges: vec![Vec::new(); 2 * n],
            unusedblossoms: (n..2 * n).collect(),
            dualvar,
            allowedge: vec![false; m],
            queue: Vec::new(),
        }
    }

    fn slack(&self, k: usize) -> f64 {
        let (i, j, w) = self.edges[k];
        self.dualvar[i] + self.dualvar[j] - 2.0 * w
    }

    fn leaves(&self, b: usize) -> Vec<usize> {
        let mut out = Vec::new();
        let mut stack = vec![b];
        while let Some(t) = stack.pop() {
            if t < self.n {
                out.push(t);
            } else {
                // Reverse keeps the emitted order equal to child order.
                stack.extend(self.blossomchilds[t].iter().rev());
            }
        }
        out
    }

    fn assign_label(&mut self, w: usize, t: u8, p: usize) {
        let b = self.inblossom[w];
        debug_assert!(self.label[w] == 0 && self.label[b] == 0);
        self.label[w] = t;
        self.label[b] = t;
        self.labelend[w] = p;
        self.labelend[b] = p;
        self.bestedge[w] = NONE;
        self.bestedge[b] = NONE;
        if t == 1 {
            let mut l = self.leaves(b);
            self.queue.append(&mut l);
        } else {
            let base = self.blossombase[b];
            let mb = self.mate[base];
            debug_assert!(mb != NONE);
            self.assign_label(self.endpoint[mb], 1, mb ^ 1);
        }
    }

    /// Walks up both alternating trees; returns the base of the first common
    /// blossom, or `NONE` when the trees are rooted apart (an augmenting
    /// path).
    fn scan_blossom(&mut self, v0: usize, w0: usize) -> usize {
        let mut v = v0;
        let mut w = w0;
        let mut path = Vec::new();
        let mut base = NONE;
        loop {
            if v == NONE && w == NONE {
                break;
            }
            if v != NONE {
                let b = self.inblossom[v];
                if self.label[b] & 4 != 0 {
                    base = self.blossombase[b];
                    break;
                }
                debug_assert_eq!(self.label[b], 1);
                path.push(b);
                self.label[b] = 5;
                debug_assert_eq!(self.labelend[b], self.mate[self.blossombase[b]]);
                if self.labelend[b] == NONE {
                    v = NONE;
                } else {
                    let t = self.endpoint[self.labelend[b]];
                    let bt = self.inblossom[t];
                    debug_assert_eq!(self.label[bt], 2);
                    debug_assert!(self.labelend[bt] != NONE);
                    v = self.endpoint[self.labelend[bt]];
                }
            }
            if w != NONE {
                core::mem::swap(&mut v, &mut w);
            }
        }
        for b in path {
            self.label[b] = 1;
        }
        base
    }

    /// Shrinks the odd cycle through tight edge `k` with common base `base`
    /// into a fresh blossom slot.
    fn add_blossom(&mut self, base: usize, k: usize) {
        let (mut v, mut w, _) = self.edges[k];
        let bb = self.inblossom[base];
        let mut bv = self.inblossom[v];
        let mut bw = self.inblossom[w];
        let b = self.unusedblossoms.pop().expect("a free blossom slot always exists");
        self.blossombase[b] = base;
        self.blossomparent[b] = NONE;
        self.blossomparent[bb] = b;

        let mut path = Vec::new();
        let mut endps = Vec::new();
        while bv != bb {
            self.blossomparent[bv] = b;
            path.push(bv);
            endps.push(self.labelend[bv]);
            debug_assert!(self.labelend[bv] != NONE);
            v = self.endpoint[self.labelend[bv]];
            bv = self.inblossom[v];
        }
        path.push(bb);
        path.reverse();
        endps.reverse();
        endps.push(2 * k);
        while bw != bb {
            self.blossomparent[bw] = b;
            path.push(bw);
            endps.push(self.labelend[bw] ^ 1);
            debug_assert!(self.labelend[bw] != NONE);
            w = self.endpoint[self.labelend[bw]];
            bw = self.inblossom[w];
        }

        debug_assert_eq!(self.label[bb], 1);
        self.label[b] = 1;
        self.labelend[b] = self.labelend[bb];
        self.dualvar[b] = 0.0;
        self.blossomchilds[b] = path.clone();
        self.blossomendps[b] = endps;
        for leaf in self.leaves(b) {
            if self.label[self.inblossom[leaf]] == 2 {
                self.queue.push(leaf);
            }
            self.inblossom[leaf] = b;
        }

        // Merge the children's candidate tight edges toward other S-blossoms.
        let mut bestedgeto = vec![NONE; 2 * self.n];
        for &child in &path {
            let lists: Vec<Vec<usize>> = if self.blossombestedges[child].is_empty() {
                self.leaves(child)
                    .into_iter()
                    .map(|leaf| self.neighbend[leaf].iter().map(|&p| p / 2).collect())
                    .collect()
            } else {
                vec![core::mem::take(&mut self.blossombestedges[child])]
            };
            for list in lists {
                for k in list {
                    let (mut i, mut j, _) = self.edges[k];
                    if self.inblossom[j] == b {
                        core::mem::swap(&mut i, &mut j);
                    }
                    let bj = self.inblossom[j];
                    if bj != b
                        && self.label[bj] == 1
                        && (bestedgeto[bj] == NONE || self.slack(k) < self.slack(bestedgeto[bj]))
                    {
                        bestedgeto[bj] = k;
                    }
                }
            }
            self.blossombestedges[child].clear();
            self.bestedge[child] = NONE;
        }
        self.blossombestedges[b] = bestedgeto.into_iter().filter(|&k| k != NONE).collect();
        self.bestedge[b] = NONE;
        for idx in 0..self.blossombestedges[b].len() {
            let k = self.blossombestedges[b][idx];
            if self.bestedge[b] == NONE || self.slack(k) < self.slack(self.bestedge[b]) {
                self.bestedge[b] = k;
            }
        }
    }

    /// Undoes a blossom. During a phase (`endstage` false) this happens to a
    /// T-blossom whose dual hit zero and the labels inside are recomputed;
    /// at the end of a phase it just dissolves the structure.
    fn expand_blossom(&mut self, b: usize, endstage: bool) {
        for idx in 0..self.blossomchilds[b].len() {
            let s = self.blossomchilds[b][idx];
            self.blossomparent[s] = NONE;
            if s < self.n {
                self.inblossom[s] = s;
            } else if endstage && self.dualvar[s].abs() <= SLACK_EPS {
                self.expand_blossom(s, endstage);
            } else {
                for leaf in self.leaves(s) {
                    self.inblossom[leaf] = s;
                }
            }
        }

        if !endstage && self.label[b] == 2 {
            debug_assert!(self.labelend[b] != NONE);
            let entrychild = self.inblossom[self.endpoint[self.labelend[b] ^ 1]];
            let len = self.blossomchilds[b].len() as isize;
            let at = |j: isize| j.rem_euclid(len) as usize;
            let mut j = self.blossomchilds[b].iter().position(|&c| c == entrychild).unwrap() as isize;
            let (jstep, endptrick): (isize, usize) = if j & 1 != 0 {
                j -= len;
                (1, 0)
            } else {
                (-1, 1)
            };
            let mut p = self.labelend[b];
            while j != 0 {
                self.label[self.endpoint[p ^ 1]] = 0;
                let q = self.blossomendps[b][at(j - endptrick as isize)] ^ endptrick ^ 1;
                self.label[self.endpoint[q]] = 0;
                self.assign_label(self.endpoint[p ^ 1], 2, p);
                self.allowedge[self.blossomendps[b][at(j - endptrick as isize)] / 2] = true;
                j += jstep;
                p = self.blossomendps[b][at(j - endptrick as isize)] ^ endptrick;
                self.allowedge[p / 2] = true;
                j += jstep;
            }
            // The base child keeps label T but no tree step through it.
            let bv = self.blossomchilds[b][at(j)];
            self.label[self.endpoint[p ^ 1]] = 2;
            self.label[bv] = 2;
            self.labelend[self.endpoint[p ^ 1]] = p;
            self.labelend[bv] = p;
            self.bestedge[bv] = NONE;
            j += jstep;
            while self.blossomchilds[b][at(j)] != entrychild {
                let bv = self.blossomchilds[b][at(j)];
                if self.label[bv] == 1 {
                    j += jstep;
                    continue;
                }
                let found = self.leaves(bv).into_iter().find(|&v| self.label[v] != 0);
                if let Some(v) = found {
                    debug_assert_eq!(self.label[v], 2);
                    debug_assert_eq!(self.inblossom[v], bv);
                    self.label[v] = 0;
                    self.label[self.endpoint[self.mate[self.blossombase[bv]]]] = 0;
                    let le = self.labelend[v];
                    self.assign_label(v, 2, le);
                }
                j += jstep;
            }
        }

        self.label[b] = 0;
        self.labelend[b] = NONE;
        self.blossomchilds[b].clear();
        self.blossomendps[b].clear();
        self.blossombase[b] = NONE;
        self.blossombestedges[b].clear();
        self.unusedblossoms.push(b);
    }

    /// Swaps matched and unmatched edges inside blossom `b` so that vertex
    /// `v` becomes its base.
    fn augment_blossom(&mut self, b: usize, v: usize) {
        let mut t = v;
        while self.blossomparent[t] != b {
            t = self.blossomparent[t];
        }
        if t >= self.n {
            self.augment_blossom(t, v);
        }
        let len = self.blossomchilds[b].len() as isize;
        let at = |j: isize| j.rem_euclid(len) as usize;
        let i = self.blossomchilds[b].iter().position(|&c| c == t).unwrap();
        let mut j = i as isize;
        let (jstep, endptrick): (isize, usize) = if j & 1 != 0 {
            j -= len;
            (1, 0)
        } else {
            (-1, 1)
        };
        while j != 0 {
            j += jstep;
            let t = self.blossomchilds[b][at(j)];
            let p = self.blossomendps[b][at(j - endptrick as isize)] ^ endptrick;
            if t >= self.n {
                self.augment_blossom(t, self.endpoint[p]);
            }
            j += jstep;
            let t = self.blossomchilds[b][at(j)];
            if t >= self.n {
                self.augment_blossom(t, self.endpoint[p ^ 1]);
            }
            self.mate[self.endpoint[p]] = p ^ 1;
            self.mate[self.endpoint[p ^ 1]] = p;
        }
        self.blossomchilds[b].rotate_left(i);
        self.blossomendps[b].rotate_left(i);
        self.blossombase[b] = self.blossombase[self.blossomchilds[b][0]];
        debug_assert_eq!(self.blossombase[b], v);
    }

    /// Augments along the path through tight edge `k` between two trees.
    fn augment_matching(&mut self, k: usize) {
        let (v, w, _) = self.edges[k];
        for (mut s, mut p) in [(v, 2 * k + 1), (w, 2 * k)] {
            loop {
                let bs = self.inblossom[s];
                debug_assert_eq!(self.label[bs], 1);
                debug_assert_eq!(self.labelend[bs], self.mate[self.blossombase[bs]]);
                if bs >= self.n {
                    self.augment_blossom(bs, s);
                }
                self.mate[s] = p;
                if self.labelend[bs] == NONE {
                    break;
                }
                let t = self.endpoint[self.labelend[bs]];
                let bt = self.inblossom[t];
                debug_assert_eq!(self.label[bt], 2);
                debug_assert!(self.labelend[bt] != NONE);
                s = self.endpoint[self.labelend[bt]];
                let j = self.endpoint[self.labelend[bt] ^ 1];
                debug_assert_eq!(self.blossombase[bt], t);
                if bt >= self.n {
                    self.augment_blossom(bt, j);
                }
                self.mate[j] = self.labelend[bt];
                p = self.labelend[bt] ^ 1;
            }
        }
    }

    fn solve(&mut self) {
        for _ in 0..self.n {
            self.label.iter_mut().for_each(|l| *l = 0);
            self.bestedge.iter_mut().for_each(|e| *e = NONE);
            for b in self.n..2 * self.n {
                self.blossombestedges[b].clear();
            }
            self.allowedge.iter_mut().for_each(|a| *a = false);
            self.queue.clear();
            for v in 0..self.n {
                if self.mate[v] == NONE && self.label[self.inblossom[v]] == 0 {
                    self.assign_label(v, 1, NONE);
                }
            }
            let mut augmented = false;
            loop {
                while let Some(v) = self.queue.pop() {
                    debug_assert_eq!(self.label[self.inblossom[v]], 1);
                    for idx in 0..self.neighbend[v].len() {
                        let p = self.neighbend[v][idx];
                        let k = p / 2;
                        let w = self.endpoint[p];
                        if self.inblossom[v] == self.inblossom[w] {
                            continue;
                        }
                        let mut kslack = 0.0;
                        if !self.allowedge[k] {
                            kslack = self.slack(k);
                            if kslack <= SLACK_EPS {
                                self.allowedge[k] = true;
                            }
                        }
                        if self.allowedge[k] {
                            if self.label[self.inblossom[w]] == 0 {
                                self.assign_label(w, 2, p ^ 1);
                            } else if self.label[self.inblossom[w]] == 1 {
                                let base = self.scan_blossom(v, w);
                                if base != NONE {
                                    self.add_blossom(base, k);
                                } else {
                                    self.augment_matching(k);
                                    augmented = true;
                                    break;
                                }
                            } else if self.label[w] == 0 {
                                debug_assert_eq!(self.label[self.inblossom[w]], 2);
                                self.label[w] = 2;
                                self.labelend[w] = p ^ 1;
                            }
                        } else if self.label[self.inblossom[w]] == 1 {
                            let b = self.inblossom[v];
                            if self.bestedge[b] == NONE || kslack < self.slack(self.bestedge[b]) {
                                self.bestedge[b] = k;
                            }
                        } else if self.label[w] == 0
                            && (self.bestedge[w] == NONE || kslack < self.slack(self.bestedge[w]))
                        {
                            self.bestedge[w] = k;
                        }
                    }
                    if augmented {
                        break;
                    }
                }
                if augmented {
                    break;
                }

                // Dual adjustment: find the binding constraint.
                let mut deltatype = 0usize;
                let mut delta = 0.0f64;
                let mut deltaedge = NONE;
                let mut deltablossom = NONE;
                for v in 0..self.n {
                    if self.label[self.inblossom[v]] == 0 && self.bestedge[v] != NONE {
                        let d = self.slack(self.bestedge[v]);
                        if deltatype == 0 || d < delta {
                            delta = d;
                            deltatype = 2;
                            deltaedge = self.bestedge[v];
                        }
                    }
                }
                for b in 0..2 * self.n {
                    if self.blossomparent[b] == NONE && self.label[b] == 1 && self.bestedge[b] != NONE
                    {
                        let d = self.slack(self.bestedge[b]) / 2.0;
                        if deltatype == 0 || d < delta {
                            delta = d;
                            deltatype = 3;
                            deltaedge = self.bestedge[b];
                        }
                    }
                }
                for b in self.n..2 * self.n {
                    if self.blossombase[b] != NONE
                        && self.blossomparent[b] == NONE
                        && self.label[b] == 2
                        && (deltatype == 0 || self.dualvar[b] < delta)
                    {
                        delta = self.dualvar[b];
                        deltatype = 4;
                        deltablossom = b;
                    }
                }
                if deltatype == 0 {
                    // No structural move left: the matching has maximum
                    // cardinality. Settle the duals and stop the phase.
                    deltatype = 1;
                    delta = self.dualvar[..self.n].iter().copied().fold(f64::INFINITY, f64::min);
                    delta = delta.max(0.0);
                }

                for v in 0..self.n {
                    match self.label[self.inblossom[v]] {
                        1 => self.dualvar[v] -= delta,
                        2 => self.dualvar[v] += delta,
                        _ => {}
                    }
                }
                for b in self.n..2 * self.n {
                    if self.blossombase[b] != NONE && self.blossomparent[b] == NONE {
                        match self.label[b] {
                            1 => self.dualvar[b] += delta,
                            2 => self.dualvar[b] -= delta,
                            _ => {}
                        }
                    }
                }

                match deltatype {
                    1 => break,
                    2 => {
                        self.allowedge[deltaedge] = true;
                        let (mut i, j, _) = self.edges[deltaedge];
                        if self.label[self.inblossom[i]] == 0 {
                            i = j;
                        }
                        debug_assert_eq!(self.label[self.inblossom[i]], 1);
                        self.queue.push(i);
                    }
                    3 => {
                        self.allowedge[deltaedge] = true;
                        let (i, _, _) = self.edges[deltaedge];
                        debug_assert_eq!(self.label[self.inblossom[i]], 1);
                        self.queue.push(i);
                    }
                    _ => self.expand_blossom(deltablossom, false),
                }
            }
            if !augmented {
                break;
            }
            for b in self.n..2 * self.n {
                if self.blossomparent[b] == NONE
                    && self.blossombase[b] != NONE
                    && self.label[b] == 1
                    && self.dualvar[b].abs() <= SLACK_EPS
                {
                    self.expand_blossom(b, true);
                }
            }
        }
    }

    /// Optimality certificate: dual feasibility, complementary slackness on
    /// matched edges, and full blossoms for every positive blossom dual.
    fn verify(&self) -> Result<()> {
        let scale = self.edges.iter().map(|e| e.2.abs()).fold(1.0f64, f64::max);
        let tol = 1e-6 * scale * self.n as f64;
        let fail = |what: &str| Err(Error::Internal(format!("matching certificate failed: {what}")));

        // Maximum-cardinality mode shifts vertex duals by a common offset.
        let minvdual =
            self.dualvar[..self.n].iter().copied().fold(f64::INFINITY, f64::min);
        let offset = (-minvdual).max(0.0);
        for b in self.n..2 * self.n {
            if self.blossombase[b] != NONE && self.dualvar[b] < -tol {
                return fail("negative blossom dual");
            }
        }
        // Slacks are checked with the raw duals: a common vertex offset
        // cancels between any two perfect matchings, so it cannot change
        // which one is optimal and must not enter the slack conditions.
        for k in 0..self.edges.len() {
            let (i, j, _) = self.edges[k];
            let mut s = self.slack(k);
            let mut ichain = vec![i];
            while self.blossomparent[*ichain.last().unwrap()] != NONE {
                ichain.push(self.blossomparent[*ichain.last().unwrap()]);
            }
            let mut jchain = vec![j];
            while self.blossomparent[*jchain.last().unwrap()] != NONE {
                jchain.push(self.blossomparent[*jchain.last().unwrap()]);
            }
            ichain.reverse();
            jchain.reverse();
            for (bi, bj) in ichain.iter().zip(&jchain) {
                if bi != bj {
                    break;
                }
                s += 2.0 * self.dualvar[*bi];
            }
            if s < -tol {
                return fail("negative slack");
            }
            let matched = (self.mate[i] != NONE && self.mate[i] / 2 == k)
                || (self.mate[j] != NONE && self.mate[j] / 2 == k);
            if matched {
                if !(self.mate[i] != NONE
                    && self.mate[j] != NONE
                    && self.mate[i] / 2 == k
                    && self.mate[j] / 2 == k)
                {
                    return fail("one-sided mate");
                }
                if s.abs() > tol {
                    return fail("matched edge not tight");
                }
            }
        }
        for v in 0..self.n {
            if self.mate[v] == NONE && (self.dualvar[v] + offset).abs() > tol {
                return fail("unmatched vertex with positive dual");
            }
        }
        for b in self.n..2 * self.n {
            if self.blossombase[b] != NONE && self.dualvar[b] > tol {
                if self.blossomendps[b].len() % 2 != 1 {
                    return fail("even blossom with positive dual");
                }
                for p in self.blossomendps[b].iter().skip(1).step_by(2) {
                    if self.mate[self.endpoint[*p]] != p ^ 1
                        || self.mate[self.endpoint[p ^ 1]] != *p
                    {
                        return fail("blossom edge unmatched");
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracles::brute_force_mwpm;
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn four_cycle_picks_the_cheap_pair() {
        let edges = vec![(0, 1, 1.0), (1, 2, 2.0), (2, 3, 1.0), (3, 0, 2.0)];
        let m = min_weight_perfect_matching(4, &edges).unwrap();
        assert_eq!(m.edges, vec![0, 2]);
        assert_eq!(m.weight, 2.0);
    }

    #[test]
    fn infeasible_inputs_are_reported() {
        assert!(matches!(
            min_weight_perfect_matching(3, &[(0, 1, 1.0)]),
            Err(Error::NoPerfectMatching)
        ));
        let star = vec![(0, 1, 1.0), (0, 2, 1.0), (0, 3, 1.0)];
        assert!(matches!(
            min_weight_perfect_matching(4, &star),
            Err(Error::NoPerfectMatching)
        ));
        assert!(matches!(
            min_weight_perfect_matching(4, &[]),
            Err(Error::NoPerfectMatching)
        ));
        assert!(min_weight_perfect_matching(0, &[]).is_ok());
    }

    #[test]
    fn parallel_edges_use_the_cheapest_copy() {
        let m = min_weight_perfect_matching(2, &[(0, 1, 5.0), (0, 1, -1.0)]).unwrap();
        assert_eq!(m.edges, vec![1]);
        assert_eq!(m.weight, -1.0);
        // Equal weights keep the earlier id.
        let m = min_weight_perfect_matching(2, &[(0, 1, 2.0), (1, 0, 2.0)]).unwrap();
        assert_eq!(m.edges, vec![0]);
    }

    #[test]
    fn negative_weights_are_fine() {
        let edges = vec![(0, 1, -4.0), (1, 2, -3.0), (2, 3, -4.0), (3, 0, -3.0)];
        let m = min_weight_perfect_matching(4, &edges).unwrap();
        assert_eq!(m.edges, vec![0, 2]);
        assert_eq!(m.weight, -8.0);
    }

    #[test]
    fn blossom_formation_is_required() {
        // Two triangles joined by a bridge pair: the optimum must use the
        // bridge, forcing odd-cycle handling on both sides.
        let edges = vec![
            (0, 1, 1.0),
            (1, 2, 1.0),
            (2, 0, 1.0),
            (3, 4, 1.0),
            (4, 5, 1.0),
            (5, 3, 1.0),
            (2, 3, 10.0),
            (0, 4, 10.0),
        ];
        let m = min_weight_perfect_matching(6, &edges).unwrap();
        let (_, want) = brute_force_mwpm(6, &edges).unwrap();
        assert_eq!(m.weight, want);
        assert_eq!(m.weight, 12.0);
    }

    #[test]
    fn agrees_with_brute_force_on_random_graphs() {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut solved = 0;
        for case in 0..300 {
            let n = 2 * rng.gen_range(1..=5);
            let density = rng.gen_range(0.3..1.0);
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    if rng.gen_bool(density) {
                        edges.push((u, v, f64::from(rng.gen_range(-10..=10))));
                    }
                }
            }
            let want = brute_force_mwpm(n, &edges);
            let got = min_weight_perfect_matching(n, &edges);
            match (want, got) {
                (Err(Error::NoPerfectMatching), Err(Error::NoPerfectMatching)) => {}
                (Ok((_, want_w)), Ok(m)) => {
                    assert_eq!(m.weight, want_w, "case {case}: weight mismatch");
                    // The returned ids must form a perfect matching of that weight.
                    let mut touched = vec![false; n];
                    let mut total = 0.0;
                    for &id in &m.edges {
                        let (u, v, w) = edges[id];
                        assert!(!touched[u] && !touched[v], "case {case}: not a matching");
                        touched[u] = true;
                        touched[v] = true;
                        total += w;
                    }
                    assert!(touched.iter().all(|&t| t), "case {case}: not perfect");
                    assert_eq!(total, m.weight);
                    solved += 1;
                }
                (want, got) => panic!("case {case}: oracle {want:?} vs blossom {got:?}"),
            }
        }
        assert!(solved >= 100, "too few feasible cases: {solved}");
    }

    #[test]
    fn dense_even_graphs_match_brute_force() {
        let mut rng = ChaCha8Rng::seed_from_u64(99);
        for _ in 0..30 {
            let n = 10;
            let mut edges = Vec::new();
            for u in 0..n {
                for v in u + 1..n {
                    edges.push((u, v, f64::from(rng.gen_range(-10..=10))));
                }
            }
            let (_, want_w) = brute_force_mwpm(n, &edges).unwrap();
            let m = min_weight_perfect_matching(n, &edges).unwrap();
            assert_eq!(m.weight, want_w);
        }
    }
}
