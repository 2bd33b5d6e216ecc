//! End-to-end runs: generate, fingerprint, compare, cluster and retrieve.

use std::collections::HashMap;
use std::fmt::Write as _;

use rayon::prelude::*;

use crate::corpus::{generate_corpus, CorpusSpec, LabeledCorpus};
use crate::eval::{evaluate_retrieval, pair_scores, upgma_cluster, PairScores, Partition, RetrievalCurves};
use crate::fingerprint::{fingerprint, Fingerprint, FrequencyVector};
use crate::graph::TextileGraph;
use crate::similarity::{corpus_stats, distance_matrix, DistanceMatrix, Metric};
use crate::Error;

/// Fingerprints of many graphs, in input order.
pub fn fingerprint_all(graphs: &[&TextileGraph], k: usize) -> Result<Vec<Fingerprint>, Error> {
    Ok(graphs
        .par_iter()
        .map(|g| fingerprint(g, k))
        .collect::<Result<Vec<_>, _>>()?)
}

/// Distance matrix over the corpus; corpus statistics are derived from the
/// corpus itself when the metric needs them.
pub fn corpus_distances(corpus: &LabeledCorpus, k: usize, metric: Metric) -> Result<DistanceMatrix, Error> {
    let fingerprints = fingerprint_all(&corpus.graphs(), k)?;
    let vectors: Vec<&FrequencyVector> = fingerprints.iter().map(Fingerprint::counts).collect();
    let stats = if metric.needs_stats() {
        Some(corpus_stats(vectors.iter().copied())?)
    } else {
        None
    };
    Ok(distance_matrix(&corpus.ids(), &vectors, metric, stats.as_ref())?)
}

#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub clusters: usize,
    pub partition: Partition,
    pub scores: PairScores,
    pub retrieval: RetrievalCurves,
}

impl EvalReport {
    /// `RI`, `P`, `R`, `F` and `MAP`, six decimals each.
    pub fn to_text(&self) -> String {
        let mut out = String::new();
        let s = &self.scores;
        for (name, v) in [
            ("RI", s.rand_index),
            ("P", s.precision),
            ("R", s.recall),
            ("F", s.f_measure),
            ("MAP", self.retrieval.map),
        ] {
            let _ = writeln!(out, "{name} {v:.6}");
        }
        out
    }
}

/// Clusters `d` into `clusters` groups and scores both the clustering and
/// the rankings against `categories` (aligned with the matrix ids).
pub fn evaluate(d: &DistanceMatrix, categories: &[String], clusters: usize) -> Result<EvalReport, Error> {
    let truth = Partition::from_labels(d.ids(), categories)?;
    let partition = upgma_cluster(d, clusters)?;
    let scores = pair_scores(&partition, &truth)?;
    let labels: HashMap<String, String> = d.ids().iter().cloned().zip(categories.iter().cloned()).collect();
    let retrieval = evaluate_retrieval(d, &labels)?;
    Ok(EvalReport {
        clusters,
        partition,
        scores,
        retrieval,
    })
}

/// Runs the whole experiment on a generated corpus. `clusters` defaults to
/// the number of categories.
pub fn run_pipeline(spec: &CorpusSpec, k: usize, metric: Metric, clusters: Option<usize>) -> Result<EvalReport, Error> {
    let corpus = generate_corpus(spec)?;
    let d = corpus_distances(&corpus, k, metric)?;
    evaluate(&d, &corpus.categories(), clusters.unwrap_or(spec.categories.len()))
}
