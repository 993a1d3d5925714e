//! Synthetic instances: grid graphs with a planted nested partition, and
//! the fallback level schedule for instances that do not carry one.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use umr_core::graph::{Edge, PlanarGraph};
use umr_core::weights::LevelSchedule;
use umr_core::Error as CoreError;

use crate::error::CliError;
use crate::format::{fmt_f64, InstanceFile};

/// Grid instance with a planted hierarchy. The grid is bisected
/// recursively, alternating axes; the cut at recursion depth k becomes the
/// planted boundary of distance level L-k+1. With the schedule fixed at
/// delta^l = l, boundary edges get theta = L+0.5 at depth 1 and theta =
/// L-k+1 at depth k >= 2, interior edges get theta = 0.25, so at zero noise
/// every edge's distortion is uniquely minimized by the planted level and
/// the planted hierarchy is the unique optimum. Noise adds a uniform
/// perturbation of the given amplitude, clamped to keep theta nonnegative.
pub fn gen_grid(
    rows: usize,
    cols: usize,
    levels: usize,
    noise: f64,
    seed: u64,
) -> Result<InstanceFile, CliError> {
    if rows < 2 || cols < 2 {
        return Err(CliError::Core(CoreError::BadDimensions(
            "a grid needs at least two rows and two columns",
        )));
    }
    if levels == 0 {
        return Err(CliError::Core(CoreError::BadValue("levels must be positive")));
    }
    if !(noise >= 0.0) || !noise.is_finite() {
        return Err(CliError::Core(CoreError::BadValue("noise must be finite and nonnegative")));
    }

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

    // depth[e] = recursion depth of the bisection boundary through e.
    let mut depth = vec![0usize; edges.len()];
    let mut stack = vec![(0usize, rows, 0usize, cols, 1usize)];
    while let Some((r0, r1, c0, c1, d)) = stack.pop() {
        if d > levels {
            continue;
        }
        // Alternate axes, odd depths vertical; fall back to the other axis
        // when the block is too thin to split.
        let vertical = if d % 2 == 1 { c1 - c0 >= 2 } else { c1 - c0 >= 2 && r1 - r0 < 2 };
        if vertical {
            let mid = (c0 + c1) / 2;
            for r in r0..r1 {
                depth[horiz[r][mid - 1]] = d;
            }
            stack.push((r0, r1, c0, mid, d + 1));
            stack.push((r0, r1, mid, c1, d + 1));
        } else if r1 - r0 >= 2 {
            let mid = (r0 + r1) / 2;
            for c in c0..c1 {
                depth[vert[mid - 1][c]] = d;
            }
            stack.push((r0, mid, c0, c1, d + 1));
            stack.push((mid, r1, c0, c1, d + 1));
        }
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for (e, edge) in edges.iter_mut().enumerate() {
        let planted = match depth[e] {
            0 => 0.25,
            1 => levels as f64 + 0.5,
            k => (levels - k + 1) as f64,
        };
        let jitter = if noise > 0.0 { rng.gen_range(-noise..=noise) } else { 0.0 };
        edge.theta = (planted + jitter).max(0.0);
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

    let graph = PlanarGraph::new(rows * cols, edges, rotation).map_err(CliError::Core)?;
    graph.validate_embedding().map_err(CliError::Core)?;
    let schedule =
        LevelSchedule::new((1..=levels).map(|l| l as f64).collect()).map_err(CliError::Core)?;
    let mut file = InstanceFile::new(graph, Some(schedule));
    file.meta.push(("name".into(), format!("grid-{rows}x{cols}-l{levels}-s{seed}")));
    file.meta.push(("generator".into(), "grid".into()));
    file.meta.push(("noise".into(), fmt_f64(noise)));
    file.meta.push(("seed".into(), seed.to_string()));
    Ok(file)
}

/// Default schedule for instances without one: `levels` thresholds spaced
/// uniformly strictly inside the span, which defaults to the instance's
/// theta range.
pub fn default_schedule(
    thetas: &[f64],
    levels: usize,
    span: Option<(f64, f64)>,
) -> Result<LevelSchedule, CliError> {
    if levels == 0 {
        return Err(CliError::Usage("the default schedule needs at least one level".into()));
    }
    let (lo, hi) = match span {
        Some(pair) => pair,
        None => {
            let lo = thetas.iter().cloned().fold(f64::INFINITY, f64::min);
            let hi = thetas.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
            if !lo.is_finite() {
                return Err(CliError::Usage("cannot derive a schedule for an empty graph".into()));
            }
            (lo, hi)
        }
    };
    if !(lo >= 0.0) || !(hi >= lo) {
        return Err(CliError::Usage("the schedule span must satisfy 0 <= lo <= hi".into()));
    }
    let width = if hi > lo { hi - lo } else { 1.0 };
    let deltas = (1..=levels)
        .map(|l| lo + width * l as f64 / (levels + 1) as f64)
        .collect();
    LevelSchedule::new(deltas).map_err(CliError::Core)
}
