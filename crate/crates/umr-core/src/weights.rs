//! Level schedules and per-level edge weights.
//!
//! An ultrametric restricted to a fixed value schedule `0 = d0 < d1 < ... <
//! dL` is a chain of nested multicuts: edge `e` gets distance `d[m]` where
//! `m` is the coarsest level whose cut still separates the endpoints of `e`.
//! The squared-error fit objective then telescopes into one weight vector per
//! level plus a constant term, and that is the form everything downstream
//! (solver, baseline, reports) consumes:
//!
//! * level 0 carries `len_e * theta_e^2`, a constant that no cut choice can
//!   change, kept only so reported costs equal true distortions;
//! * level `l >= 1` carries `len_e * ((theta_e - d_l)^2 - (theta_e -
//!   d_{l-1})^2)`, the marginal cost of keeping `e` cut at level `l`.
//!
//! Partial sums of the layers reproduce the squared distances exactly, which
//! is the identity the unit tests pin down.

use alloc::vec;
use alloc::vec::Vec;

use crate::graph::PlanarGraph;
use crate::{Error, Result};

/// Strictly increasing positive level values `d1 < d2 < ... < dL`; the
/// implicit level 0 sits at zero.
#[derive(Clone, Debug, PartialEq)]
pub struct LevelSchedule {
    deltas: Vec<f64>,
}

impl LevelSchedule {
    pub fn new(deltas: Vec<f64>) -> Result<Self> {
        if deltas.is_empty() {
            return Err(Error::BadDimensions("schedule needs at least one level"));
        }
        let mut prev = 0.0;
        for &d in &deltas {
            if !d.is_finite() || d <= prev {
                return Err(Error::NonIncreasingSchedule);
            }
            prev = d;
        }
        Ok(LevelSchedule { deltas })
    }

    /// Number of cut levels (excludes the implicit level 0).
    pub fn num_levels(&self) -> usize {
        self.deltas.len()
    }

    /// Schedule value of `level`; `delta(0)` is zero.
    pub fn delta(&self, level: usize) -> f64 {
        if level == 0 {
            0.0
        } else {
            self.deltas[level - 1]
        }
    }

    pub fn deltas(&self) -> &[f64] {
        &self.deltas
    }
}

/// Per-level edge weights, split into positive and negative parts once at
/// construction since the solver reads both on every iteration.
#[derive(Clone, Debug)]
pub struct LayerWeights {
    constant: Vec<f64>,
    layers: Vec<Vec<f64>>,
    plus: Vec<Vec<f64>>,
    minus: Vec<Vec<f64>>,
}

impl LayerWeights {
    /// Telescoped weights for fitting `thetas` with edge multiplicities
    /// `lengths` against `schedule`.
    pub fn from_parts(thetas: &[f64], lengths: &[f64], schedule: &LevelSchedule) -> Result<Self> {
        if thetas.len() != lengths.len() {
            return Err(Error::LengthMismatch { expected: thetas.len(), got: lengths.len() });
        }
        for (e, (&t, &len)) in thetas.iter().zip(lengths).enumerate() {
            if !t.is_finite() || t < 0.0 || !len.is_finite() || len <= 0.0 {
                return Err(Error::BadEdgeWeight { edge: e });
            }
        }
        let m = thetas.len();
        let levels = schedule.num_levels();
        let constant: Vec<f64> = (0..m).map(|e| lengths[e] * thetas[e] * thetas[e]).collect();
        let mut layers = Vec::with_capacity(levels);
        for l in 1..=levels {
            let (lo, hi) = (schedule.delta(l - 1), schedule.delta(l));
            let layer: Vec<f64> = (0..m)
                .map(|e| {
                    let a = thetas[e] - hi;
                    let b = thetas[e] - lo;
                    lengths[e] * (a * a - b * b)
                })
                .collect();
            layers.push(layer);
        }
        Ok(Self::assemble(constant, layers))
    }

    pub fn from_graph(graph: &PlanarGraph, schedule: &LevelSchedule) -> Result<Self> {
        Self::from_parts(&graph.thetas(), &graph.lengths(), schedule)
    }

    /// Wraps already-computed per-level weights; the constant term is zero.
    /// Used by ablations that pin a single level or hand-build weights.
    pub fn from_raw(layers: Vec<Vec<f64>>) -> Result<Self> {
        if layers.is_empty() {
            return Err(Error::BadDimensions("need at least one weight layer"));
        }
        let m = layers[0].len();
        for layer in &layers {
            if layer.len() != m {
                return Err(Error::LengthMismatch { expected: m, got: layer.len() });
            }
            if let Some(e) = layer.iter().position(|w| !w.is_finite()) {
                return Err(Error::BadEdgeWeight { edge: e });
            }
        }
        Ok(Self::assemble(vec![0.0; m], layers))
    }

    fn assemble(constant: Vec<f64>, layers: Vec<Vec<f64>>) -> Self {
        let plus = layers
            .iter()
            .map(|layer| layer.iter().map(|&w| w.max(0.0)).collect())
            .collect();
        let minus = layers
            .iter()
            .map(|layer| layer.iter().map(|&w| w.min(0.0)).collect())
            .collect();
        LayerWeights { constant, layers, plus, minus }
    }

    pub fn num_levels(&self) -> usize {
        self.layers.len()
    }

    pub fn num_edges(&self) -> usize {
        self.constant.len()
    }

    /// Weights of `level` (1-based).
    pub fn layer(&self, level: usize) -> &[f64] {
        &self.layers[level - 1]
    }

    /// Positive part of `level`'s weights.
    pub fn plus(&self, level: usize) -> &[f64] {
        &self.plus[level - 1]
    }

    /// Negative part of `level`'s weights.
    pub fn minus(&self, level: usize) -> &[f64] {
        &self.minus[level - 1]
    }

    pub fn constant(&self) -> &[f64] {
        &self.constant
    }

    pub fn constant_total(&self) -> f64 {
        self.constant.iter().sum()
    }

    /// Objective value of a chain of cut indicators, constant term excluded.
    pub fn cost(&self, cuts: &[Vec<bool>]) -> Result<f64> {
        if cuts.len() != self.num_levels() {
            return Err(Error::LengthMismatch { expected: self.num_levels(), got: cuts.len() });
        }
        let mut total = 0.0;
        for (layer, cut) in self.layers.iter().zip(cuts) {
            if cut.len() != layer.len() {
                return Err(Error::LengthMismatch { expected: layer.len(), got: cut.len() });
            }
            total += layer.iter().zip(cut).filter(|(_, &c)| c).map(|(w, _)| w).sum::<f64>();
        }
        Ok(total)
    }

    /// Same as [`cost`](Self::cost) but for fractional indicators.
    pub fn fractional_cost(&self, x: &[Vec<f64>]) -> Result<f64> {
        if x.len() != self.num_levels() {
            return Err(Error::LengthMismatch { expected: self.num_levels(), got: x.len() });
        }
        let mut total = 0.0;
        for (layer, xs) in self.layers.iter().zip(x) {
            if xs.len() != layer.len() {
                return Err(Error::LengthMismatch { expected: layer.len(), got: xs.len() });
            }
            total += layer.iter().zip(xs).map(|(w, v)| w * v).sum::<f64>();
        }
        Ok(total)
    }

    /// Full distortion of a chain: constant term plus [`cost`](Self::cost).
    pub fn total_cost(&self, cuts: &[Vec<bool>]) -> Result<f64> {
        Ok(self.constant_total() + self.cost(cuts)?)
    }
}

/// Distance vector of a chain of nested cuts: each edge gets the schedule
/// value of the coarsest level that cuts it, zero if none does. The chain is
/// given finest level first and must be nested.
pub fn ultrametric_from_hierarchy(
    schedule: &LevelSchedule,
    cuts: &[Vec<bool>],
) -> Result<Vec<f64>> {
    if cuts.len() != schedule.num_levels() {
        return Err(Error::LengthMismatch { expected: schedule.num_levels(), got: cuts.len() });
    }
    let m = cuts.first().map_or(0, Vec::len);
    let mut distances = vec![0.0; m];
    for (idx, cut) in cuts.iter().enumerate() {
        let level = idx + 1;
        if cut.len() != m {
            return Err(Error::LengthMismatch { expected: m, got: cut.len() });
        }
        for (e, &c) in cut.iter().enumerate() {
            if c {
                if level > 1 && !cuts[idx - 1][e] {
                    return Err(Error::InvalidHierarchy("cut levels are not nested"));
                }
                distances[e] = schedule.delta(level);
            }
        }
    }
    Ok(distances)
}

/// Weighted squared error between fitted distances and the input weights.
pub fn distortion(thetas: &[f64], lengths: &[f64], distances: &[f64]) -> Result<f64> {
    if thetas.len() != lengths.len() {
        return Err(Error::LengthMismatch { expected: thetas.len(), got: lengths.len() });
    }
    if thetas.len() != distances.len() {
        return Err(Error::LengthMismatch { expected: thetas.len(), got: distances.len() });
    }
    Ok(thetas
        .iter()
        .zip(lengths)
        .zip(distances)
        .map(|((&t, &len), &d)| len * (t - d) * (t - d))
        .sum())
}
