//! Inputs shared by the criterion benches.

use weftprint::pattern::perturb;
use weftprint::{fingerprint, grid_to_graph, weave_matrix, CorpusSpec, FrequencyVector, PatternKind, TextileGraph};

/// One graph per corpus weave kind, `side` x `side` crossings, every second
/// one with 3% of its cells flipped.
pub fn textile_graphs(side: usize, seed: u64) -> Vec<TextileGraph> {
    CorpusSpec::desk_scale(seed)
        .categories
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let m = weave_matrix(c.kind.with_seed(seed + i as u64), side, side).expect("corpus kinds are valid");
            let m = if i % 2 == 1 {
                perturb(&m, 0.03, seed ^ i as u64).expect("rate in range")
            } else {
                m
            };
            grid_to_graph(&m)
        })
        .collect()
}

/// A single 80 x 79 twill (6320 crossings).
pub fn large_graph() -> TextileGraph {
    grid_to_graph(&weave_matrix(PatternKind::Twill { over: 2, under: 1 }, 80, 79).expect("valid twill"))
}

pub fn frequency_vectors(graphs: &[TextileGraph], k: usize) -> Vec<FrequencyVector> {
    graphs
        .iter()
        .map(|g| fingerprint(g, k).expect("k in range").into_counts())
        .collect()
}
