//! Similarity search for woven textile structures.
//!
//! Textiles are modelled as crossing hypergraphs ([`graph`]), described by
//! the multiset of k-neighbourhoods of their crossings ([`fingerprint`]) and
//! compared with multiset distances ([`similarity`]). [`eval`] scores the
//! distances by clustering and ranked retrieval against known categories,
//! and [`pattern`] / [`corpus`] synthesise labelled weave collections to run
//! those experiments on.

pub mod corpus;
pub mod eval;
pub mod fingerprint;
pub mod graph;
pub mod pattern;
pub mod pipeline;
pub mod similarity;

use thiserror::Error;

pub use corpus::{generate_corpus, CategorySpec, CorpusSpec, LabeledCorpus};
pub use eval::{Partition, RetrievalCurves};
pub use fingerprint::{fingerprint, Fingerprint, FrequencyVector, Neighborhood, DEFAULT_K};
pub use graph::{EdgeLabel, TextileGraph};
pub use pattern::{grid_to_graph, weave_matrix, PatternKind, Transform, WeaveMatrix};
pub use pipeline::{run_pipeline, EvalReport};
pub use similarity::{DistanceMatrix, Metric};

#[derive(Debug, Error)]
pub enum Error {
    #[error(transparent)]
    Graph(#[from] graph::GraphError),
    #[error(transparent)]
    Pattern(#[from] pattern::PatternError),
    #[error(transparent)]
    Corpus(#[from] corpus::CorpusError),
    #[error(transparent)]
    Fingerprint(#[from] fingerprint::FingerprintError),
    #[error(transparent)]
    Similarity(#[from] similarity::SimilarityError),
    #[error(transparent)]
    Eval(#[from] eval::EvalError),
}
