//! The std-only runtime pieces the core solver refuses to own: a real
//! clock for time budgets and a threaded separation driver.

use std::time::Instant;

use umr_core::cut::CutColumn;
use umr_core::solver::{Clock, SeparationBatch, SeparationDriver};
use umr_core::{Error, Result};

/// Elapsed seconds since construction.
pub struct WallClock {
    start: Instant,
}

impl WallClock {
    pub fn new() -> Self {
        WallClock { start: Instant::now() }
    }
}

impl Default for WallClock {
    fn default() -> Self {
        WallClock::new()
    }
}

impl Clock for WallClock {
    fn now(&self) -> f64 {
        self.start.elapsed().as_secs_f64()
    }
}

/// Runs every level of a separation batch on its own thread. The oracle is
/// shared read-only; results come back in level order.
pub struct Threaded;

impl SeparationDriver for Threaded {
    fn run_batch(&self, batch: &SeparationBatch<'_>) -> Result<Vec<CutColumn>> {
        std::thread::scope(|scope| {
            let handles: Vec<_> = batch
                .weights
                .iter()
                .map(|w| scope.spawn(move || batch.oracle.min_cut(w)))
                .collect();
            handles
                .into_iter()
                .map(|h| {
                    h.join().map_err(|_| Error::Internal("a separation worker panicked".into()))?
                })
                .collect()
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use umr_core::graph::{Edge, PlanarGraph};
    use umr_core::cut::MinCutOracle;
    use umr_core::solver::Sequential;

    #[test]
    fn threaded_separation_matches_sequential() {
        let graph = PlanarGraph::new(
            4,
            vec![
                Edge::plain(0, 1),
                Edge::plain(1, 2),
                Edge::plain(2, 3),
                Edge::plain(3, 0),
            ],
            vec![vec![0, 3], vec![0, 1], vec![1, 2], vec![2, 3]],
        )
        .unwrap();
        let faces = graph.validate_embedding().unwrap();
        let oracle = MinCutOracle::new(&graph, &faces).unwrap();
        let batch = SeparationBatch {
            oracle: &oracle,
            weights: vec![
                vec![-3.0, 1.0, -2.0, 1.0],
                vec![4.0, 4.0, 4.0, 4.0],
                vec![-1.0, -1.0, -1.0, -1.0],
            ],
        };
        let seq = Sequential.run_batch(&batch).unwrap();
        let par = Threaded.run_batch(&batch).unwrap();
        assert_eq!(seq.len(), par.len());
        for (a, b) in seq.iter().zip(&par) {
            assert_eq!(a.weight, b.weight);
            assert_eq!(a.edges, b.edges);
        }
    }

    #[test]
    fn wall_clock_moves_forward() {
        let clock = WallClock::new();
        let a = clock.now();
        let b = clock.now();
        assert!(b >= a && a >= 0.0);
    }
}
