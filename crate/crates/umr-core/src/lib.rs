/*!
Fits an ultrametric (a hierarchy of nested multicuts) to edge weights on a
planar graph, with certified lower and upper bounds.

The distance data lives on the edges of a planar graph: each edge carries a
target value `theta` and a length multiplier, and the fit minimizes the
length-weighted squared distortion between the targets and the fitted
ultrametric. The fitted object is a stack of nested multicuts, one per level
of a user-supplied level schedule; the induced pairwise distance between two
vertices is the level value of the coarsest multicut that separates them.

The solver works on a relaxation built from two-way cuts:

* [`weights`] folds the per-edge targets into per-level layer weights whose
  partial sums telescope back to the squared distortion.
* [`cut`] finds a minimum-weight two-way cut of a planar graph with signed
  edge weights, by triangulating the graph, expanding each dual triangle into
  a three-node gadget, and running minimum-weight perfect matching.
* [`matching`] is the blossom algorithm that powers the cut oracle.
* [`lp`] is a bounded-variable revised simplex used to solve the restricted
  dual of the relaxation over a growing pool of cut columns.
* [`solver`] ties these together in a cutting-plane loop: solve the restricted
  dual, separate one minimum cut per level, expand it into isolating cuts,
  grow the pools, and decode/round the dual prices into feasible hierarchies.
  Every iteration yields a certified lower bound and a feasible upper bound.
* [`baseline`] is a single-linkage reference method and a per-level ablation.
* [`oracles`] holds brute-force references used to pin down the fast paths in
  tests; they are exact and deliberately size-capped.

The crate is `no_std` (with `alloc`); anything that touches clocks, threads,
files, or argument parsing lives in the companion CLI crate.
*/
#![cfg_attr(not(test), no_std)]
#![deny(unsafe_code)]

extern crate alloc;

pub mod baseline;
pub mod cut;
mod error;
pub mod graph;
pub mod lp;
pub mod matching;
pub mod oracles;
pub mod solver;
pub mod weights;

pub use error::Error;

/// Result alias used across the crate.
pub type Result<T> = core::result::Result<T, Error>;
