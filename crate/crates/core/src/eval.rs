//! Average-linkage clustering and the clustering / retrieval quality scores.

use std::collections::{HashMap, HashSet};
use std::fmt::Write as _;

use rayon::prelude::*;
use thiserror::Error;

use crate::similarity::DistanceMatrix;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum EvalError {
    #[error("cluster count {m} out of range 1..={n}")]
    ClusterCount { m: usize, n: usize },
    #[error("partitions cover different ids")]
    IdMismatch,
    #[error("duplicate id '{0}'")]
    DuplicateId(String),
    #[error("unknown id '{0}'")]
    UnknownId(String),
    #[error("no category for id '{0}'")]
    MissingLabel(String),
    #[error("relevant set is empty")]
    NoRelevant,
    #[error("relevant id '{0}' does not occur in the ranking")]
    RelevantNotRanked(String),
    #[error("ranking needs at least two items")]
    TooFewItems,
    #[error("no query has a relevant item")]
    NoQueries,
}

/// Assignment of every id to one of `clusters` dense cluster ids.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Partition {
    ids: Vec<String>,
    assignment: Vec<usize>,
    clusters: usize,
}

impl Partition {
    /// Cluster ids are numbered by first appearance of each label.
    pub fn from_labels<S: AsRef<str>>(ids: &[String], labels: &[S]) -> Result<Self, EvalError> {
        if ids.len() != labels.len() {
            return Err(EvalError::IdMismatch);
        }
        let mut seen = HashSet::new();
        if let Some(dup) = ids.iter().find(|id| !seen.insert(id.as_str())) {
            return Err(EvalError::DuplicateId(dup.clone()));
        }
        let mut dense: HashMap<&str, usize> = HashMap::new();
        let assignment = labels
            .iter()
            .map(|l| {
                let next = dense.len();
                *dense.entry(l.as_ref()).or_insert(next)
            })
            .collect();
        Ok(Partition {
            ids: ids.to_vec(),
            assignment,
            clusters: dense.len(),
        })
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn cluster_count(&self) -> usize {
        self.clusters
    }

    pub fn cluster_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id).map(|i| self.assignment[i])
    }

    /// `id,cluster` lines with a header.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("id,cluster\n");
        for (id, c) in self.ids.iter().zip(&self.assignment) {
            let _ = writeln!(out, "{id},{c}");
        }
        out
    }
}

/// One agglomeration step. Clusters are named by their smallest member.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Merge {
    pub left: usize,
    pub right: usize,
    /// Mean pairwise distance between the two clusters.
    pub distance: f64,
    /// Size of the merged cluster.
    pub size: usize,
}

/// Full UPGMA merge sequence, `n - 1` steps.
///
/// The closest pair by mean pairwise distance is merged first; ties go to
/// the pair with the smallest (left, right) names. Cross-cluster distance
/// sums are kept instead of running means so the comparison uses the same
/// quotient as a from-scratch evaluation.
pub fn upgma_merges(d: &DistanceMatrix) -> Vec<Merge> {
    let n = d.len();
    let mut sums: Vec<f64> = (0..n * n).map(|x| d.get(x / n, x % n)).collect();
    let mut sizes = vec![1usize; n];
    let mut active: Vec<usize> = (0..n).collect();
    let mut merges = Vec::with_capacity(n.saturating_sub(1));

    while active.len() > 1 {
        let mut best: Option<(f64, usize, usize)> = None;
        for (x, &a) in active.iter().enumerate() {
            for &b in &active[x + 1..] {
                let mean = sums[a * n + b] / (sizes[a] * sizes[b]) as f64;
                if best.is_none_or(|(m, _, _)| mean < m) {
                    best = Some((mean, a, b));
                }
            }
        }
        let (distance, a, b) = best.expect("at least two active clusters");
        for &w in &active {
            if w != a && w != b {
                let s = sums[a * n + w] + sums[b * n + w];
                sums[a * n + w] = s;
                sums[w * n + a] = s;
            }
        }
        sizes[a] += sizes[b];
        active.retain(|&x| x != b);
        merges.push(Merge {
            left: a,
            right: b,
            distance,
            size: sizes[a],
        });
    }
    merges
}

/// Cuts the UPGMA hierarchy at `m` clusters.
pub fn upgma_cluster(d: &DistanceMatrix, m: usize) -> Result<Partition, EvalError> {
    let n = d.len();
    if m == 0 || m > n {
        return Err(EvalError::ClusterCount { m, n });
    }
    let merges = upgma_merges(d);
    let mut owner: Vec<usize> = (0..n).collect();
    for merge in &merges[..n - m] {
        for o in owner.iter_mut() {
            if *o == merge.right {
                *o = merge.left;
            }
        }
    }
    let labels: Vec<String> = owner.iter().map(usize::to_string).collect();
    Partition::from_labels(d.ids(), &labels)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct PairConfusion {
    pub tp: u64,
    pub tn: u64,
    pub fp: u64,
    pub fn_: u64,
}

impl PairConfusion {
    pub fn total(&self) -> u64 {
        self.tp + self.tn + self.fp + self.fn_
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PairScores {
    pub confusion: PairConfusion,
    pub rand_index: f64,
    pub precision: f64,
    pub recall: f64,
    pub f_measure: f64,
}

fn ratio(num: u64, den: u64) -> f64 {
    if den == 0 {
        0.0
    } else {
        num as f64 / den as f64
    }
}

fn f_score(p: f64, r: f64) -> f64 {
    if p + r == 0.0 {
        0.0
    } else {
        2.0 * p * r / (p + r)
    }
}

/// Pair-counting agreement of `clustering` with `truth`. Precision is 0
/// when no pair shares a cluster, F is 0 when P + R = 0.
pub fn pair_scores(clustering: &Partition, truth: &Partition) -> Result<PairScores, EvalError> {
    if clustering.ids.len() != truth.ids.len() {
        return Err(EvalError::IdMismatch);
    }
    let position: HashMap<&str, usize> = truth.ids.iter().enumerate().map(|(i, id)| (id.as_str(), i)).collect();
    let truth_of = clustering
        .ids
        .iter()
        .map(|id| {
            position
                .get(id.as_str())
                .map(|&i| truth.assignment[i])
                .ok_or(EvalError::IdMismatch)
        })
        .collect::<Result<Vec<_>, _>>()?;

    let mut c = PairConfusion::default();
    let n = clustering.ids.len();
    for i in 0..n {
        for j in i + 1..n {
            let same_cluster = clustering.assignment[i] == clustering.assignment[j];
            let same_class = truth_of[i] == truth_of[j];
            match (same_cluster, same_class) {
                (true, true) => c.tp += 1,
                (false, false) => c.tn += 1,
                (true, false) => c.fp += 1,
                (false, true) => c.fn_ += 1,
            }
        }
    }
    let precision = ratio(c.tp, c.tp + c.fp);
    let recall = ratio(c.tp, c.tp + c.fn_);
    Ok(PairScores {
        confusion: c,
        rand_index: ratio(c.tp + c.tn, c.total()),
        precision,
        recall,
        f_measure: f_score(precision, recall),
    })
}

fn ranked_indices(d: &DistanceMatrix, q: usize) -> Vec<usize> {
    let ids = d.ids();
    let mut order: Vec<usize> = (0..d.len()).filter(|&i| i != q).collect();
    order.sort_by(|&a, &b| d.get(q, a).total_cmp(&d.get(q, b)).then_with(|| ids[a].cmp(&ids[b])));
    order
}

/// All other ids by ascending distance to `query`, ties by ascending id.
pub fn rank_for_query<'a>(d: &'a DistanceMatrix, query: &str) -> Result<Vec<&'a str>, EvalError> {
    let q = d
        .index_of(query)
        .ok_or_else(|| EvalError::UnknownId(query.to_string()))?;
    if d.len() < 2 {
        return Err(EvalError::TooFewItems);
    }
    Ok(ranked_indices(d, q).into_iter().map(|i| d.ids()[i].as_str()).collect())
}

/// (recall, precision) after each relevant hit, in rank order.
pub fn raw_points(relevance: &[bool]) -> Vec<(f64, f64)> {
    let m = relevance.iter().filter(|&&r| r).count();
    let mut hits = 0;
    let mut points = Vec::with_capacity(m);
    for (rank, _) in relevance.iter().enumerate().filter(|(_, &r)| r) {
        hits += 1;
        points.push((hits as f64 / m as f64, hits as f64 / (rank + 1) as f64));
    }
    points
}

fn ap_of(relevance: &[bool]) -> f64 {
    let points = raw_points(relevance);
    points.iter().map(|&(_, p)| p).sum::<f64>() / points.len() as f64
}

/// Mean of the precisions at the ranks of the relevant items.
pub fn average_precision(ranked: &[&str], relevant: &HashSet<&str>) -> Result<f64, EvalError> {
    if relevant.is_empty() {
        return Err(EvalError::NoRelevant);
    }
    let relevance: Vec<bool> = ranked.iter().map(|id| relevant.contains(id)).collect();
    let found = relevance.iter().filter(|&&r| r).count();
    if found != relevant.len() {
        let ranked: HashSet<&str> = ranked.iter().copied().collect();
        let missing = relevant
            .iter()
            .find(|r| !ranked.contains(*r))
            .copied()
            .unwrap_or_default();
        return Err(EvalError::RelevantNotRanked(missing.to_string()));
    }
    Ok(ap_of(&relevance))
}

pub const RECALL_LEVELS: usize = 11;

/// Interpolated precision at recall levels 0.0, 0.1, ..., 1.0: the best
/// precision reached at any recall at or above the level.
pub fn interpolated_precision(relevance: &[bool]) -> [f64; RECALL_LEVELS] {
    let m = relevance.iter().filter(|&&r| r).count();
    let mut levels = [0.0; RECALL_LEVELS];
    if m == 0 {
        return levels;
    }
    let points = raw_points(relevance);
    // running maximum from the right
    let mut best_from = vec![0.0f64; points.len() + 1];
    for h in (0..points.len()).rev() {
        best_from[h] = best_from[h + 1].max(points[h].1);
    }
    for (l, level) in levels.iter_mut().enumerate() {
        // first hit h (1-based) with h/m >= l/10
        let first = (l * m).div_ceil(10).max(1);
        *level = best_from[first - 1];
    }
    levels
}

#[derive(Debug, Clone, PartialEq)]
pub struct RetrievalCurves {
    pub precision: [f64; RECALL_LEVELS],
    pub f_measure: [f64; RECALL_LEVELS],
    pub map: f64,
    pub queries: usize,
    /// Queries without any other member of their category.
    pub skipped: Vec<String>,
}

impl RetrievalCurves {
    pub fn recall_level(l: usize) -> f64 {
        l as f64 / 10.0
    }

    /// `recall_level,avg_precision,avg_fmeasure` with 11 rows.
    pub fn to_csv_string(&self) -> String {
        let mut out = String::from("recall_level,avg_precision,avg_fmeasure\n");
        for l in 0..RECALL_LEVELS {
            let _ = writeln!(
                out,
                "{:.1},{:.6},{:.6}",
                Self::recall_level(l),
                self.precision[l],
                self.f_measure[l]
            );
        }
        out
    }
}

fn label_indices(d: &DistanceMatrix, labels: &HashMap<String, String>) -> Result<Vec<usize>, EvalError> {
    let mut dense: HashMap<&str, usize> = HashMap::new();
    d.ids()
        .iter()
        .map(|id| {
            let label = labels.get(id).ok_or_else(|| EvalError::MissingLabel(id.clone()))?;
            let next = dense.len();
            Ok(*dense.entry(label.as_str()).or_insert(next))
        })
        .collect()
}

/// Uses every item as a query against all others; items of the same
/// category are relevant. Queries whose category has no other member are
/// skipped and listed in the result.
pub fn evaluate_retrieval(d: &DistanceMatrix, labels: &HashMap<String, String>) -> Result<RetrievalCurves, EvalError> {
    if d.len() < 2 {
        return Err(EvalError::TooFewItems);
    }
    let category = label_indices(d, labels)?;
    let per_query: Vec<Option<(f64, [f64; RECALL_LEVELS])>> = (0..d.len())
        .into_par_iter()
        .map(|q| {
            let relevance: Vec<bool> = ranked_indices(d, q)
                .iter()
                .map(|&i| category[i] == category[q])
                .collect();
            if !relevance.contains(&true) {
                return None;
            }
            Some((ap_of(&relevance), interpolated_precision(&relevance)))
        })
        .collect();

    let skipped: Vec<String> = per_query
        .iter()
        .zip(d.ids())
        .filter(|(r, _)| r.is_none())
        .map(|(_, id)| id.clone())
        .collect();
    let answered: Vec<&(f64, [f64; RECALL_LEVELS])> = per_query.iter().flatten().collect();
    if answered.is_empty() {
        return Err(EvalError::NoQueries);
    }
    let count = answered.len() as f64;
    let map = answered.iter().map(|(ap, _)| ap).sum::<f64>() / count;
    let mut precision = [0.0; RECALL_LEVELS];
    let mut f_measure = [0.0; RECALL_LEVELS];
    for l in 0..RECALL_LEVELS {
        let r = RetrievalCurves::recall_level(l);
        precision[l] = answered.iter().map(|(_, p)| p[l]).sum::<f64>() / count;
        f_measure[l] = answered.iter().map(|(_, p)| f_score(p[l], r)).sum::<f64>() / count;
    }
    Ok(RetrievalCurves {
        precision,
        f_measure,
        map,
        queries: answered.len(),
        skipped,
    })
}

/// Mean average precision over all queries.
pub fn map_score(d: &DistanceMatrix, labels: &HashMap<String, String>) -> Result<f64, EvalError> {
    Ok(evaluate_retrieval(d, labels)?.map)
}
