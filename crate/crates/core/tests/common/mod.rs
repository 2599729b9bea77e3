#![allow(dead_code)]

use nni_core::{NaepProblem, SparseMatrix};
use proptest::prelude::*;

/// Random irreducible, strictly row-diagonally-dominant Z-matrix problem.
/// The pattern is a path plus random chords; values may be unsymmetric.
#[derive(Debug, Clone)]
pub struct Instance {
    pub prob: NaepProblem,
    pub u: Vec<f64>,
}

pub fn build(
    n: usize,
    chords: &[(usize, usize)],
    weights: &[(f64, f64)],
    margins: &[f64],
    saturation: Vec<f64>,
    gamma: f64,
) -> NaepProblem {
    let mut edges: Vec<(usize, usize)> = (0..n - 1).map(|i| (i, i + 1)).collect();
    for &(i, j) in chords {
        let (i, j) = (i % n, j % n);
        if i != j && !edges.contains(&(i.min(j), i.max(j))) {
            edges.push((i.min(j), i.max(j)));
        }
    }
    let mut triplets = Vec::new();
    let mut row_abs = vec![0.0; n];
    for (e, &(i, j)) in edges.iter().enumerate() {
        let (wij, wji) = weights[e % weights.len()];
        triplets.push((i, j, -wij));
        triplets.push((j, i, -wji));
        row_abs[i] += wij;
        row_abs[j] += wji;
    }
    for i in 0..n {
        triplets.push((i, i, row_abs[i] + margins[i % margins.len()]));
    }
    let a = SparseMatrix::from_triplets(n, n, &triplets).unwrap();
    NaepProblem::new(a, saturation, gamma).unwrap()
}

pub fn instance(max_n: usize, gamma: impl Strategy<Value = f64>) -> impl Strategy<Value = Instance> {
    (2..=max_n, gamma).prop_flat_map(|(n, gamma)| {
        (
            prop::collection::vec((0..n, 0..n), 0..n),
            prop::collection::vec((0.1f64..2.0, 0.1f64..2.0), 1..8),
            prop::collection::vec(0.01f64..2.0, n),
            prop::collection::vec(1e-3f64..2.5, n),
            prop::collection::vec(0.05f64..1.0, n),
        )
            .prop_map(move |(chords, weights, margins, sat, u)| Instance {
                prob: build(n, &chords, &weights, &margins, sat, gamma),
                u,
            })
    })
}
