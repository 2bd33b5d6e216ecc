//! Distances between fingerprints and full distance matrices.

use std::collections::HashMap;
use std::fmt;
use std::io;
use std::str::FromStr;

use rayon::prelude::*;
use thiserror::Error;

use crate::fingerprint::{FrequencyVector, Neighborhood};

#[derive(Debug, Error)]
pub enum SimilarityError {
    #[error("jaccard distance is undefined on empty fingerprints")]
    EmptyFingerprints,
    #[error("stale corpus statistics: neighbourhood {0} is not covered")]
    StaleStats(Neighborhood),
    #[error("corpus statistics need at least one fingerprint")]
    EmptyCorpus,
    #[error("unknown metric '{0}' (expected jaccard, jaccard-set, hbool, hfreq, cosine or tfidf)")]
    UnknownMetric(String),
    #[error("metric tfidf needs corpus statistics")]
    MissingStats,
    #[error("a distance matrix needs at least two items, got {0}")]
    TooFewItems(usize),
    #[error("{ids} ids for {items} items")]
    IdCount { ids: usize, items: usize },
    #[error("duplicate id '{0}'")]
    DuplicateId(String),
    #[error("distance matrix csv: {0}")]
    Csv(String),
}

impl From<csv::Error> for SimilarityError {
    fn from(e: csv::Error) -> Self {
        SimilarityError::Csv(e.to_string())
    }
}

/// Generalised (multiset) Jaccard distance: `1 - Σ min / Σ max`.
pub fn jaccard_dist(r: &FrequencyVector, s: &FrequencyVector) -> Result<f64, SimilarityError> {
    if r.is_empty() && s.is_empty() {
        return Err(SimilarityError::EmptyFingerprints);
    }
    let mut shared = 0u64;
    r.for_each_common(s, |_, a, b| shared += a.min(b) as u64);
    let union = r.total() + s.total() - shared;
    Ok(1.0 - shared as f64 / union as f64)
}

/// Jaccard distance on the supports only, ignoring counts.
pub fn jaccard_set_dist(r: &FrequencyVector, s: &FrequencyVector) -> Result<f64, SimilarityError> {
    if r.is_empty() && s.is_empty() {
        return Err(SimilarityError::EmptyFingerprints);
    }
    let shared = common_support(r, s);
    let union = r.support_len() + s.support_len() - shared;
    Ok(1.0 - shared as f64 / union as f64)
}

fn common_support(r: &FrequencyVector, s: &FrequencyVector) -> usize {
    let mut shared = 0;
    r.for_each_common(s, |_, _, _| shared += 1);
    shared
}

/// Number of neighbourhoods present in exactly one of the two fingerprints.
pub fn hamming_bool_dist(r: &FrequencyVector, s: &FrequencyVector) -> u64 {
    (r.support_len() + s.support_len() - 2 * common_support(r, s)) as u64
}

/// L1 distance between the count vectors.
pub fn hamming_freq_dist(r: &FrequencyVector, s: &FrequencyVector) -> u64 {
    let mut shared = 0u64;
    r.for_each_common(s, |_, a, b| shared += a.min(b) as u64);
    r.total() + s.total() - 2 * shared
}

fn cosine_from_parts(dot: f64, norm_r: f64, norm_s: f64) -> f64 {
    match (norm_r == 0.0, norm_s == 0.0) {
        (true, true) => 0.0,
        (true, false) | (false, true) => 1.0,
        (false, false) => (1.0 - dot / (norm_r.sqrt() * norm_s.sqrt())).clamp(0.0, 1.0),
    }
}

fn squared_norm(v: &FrequencyVector) -> f64 {
    v.entries().iter().map(|&(_, c)| (c as f64) * (c as f64)).sum()
}

/// `1 - r·s / (|r| |s|)`. An all-zero side gives 1, two all-zero sides 0.
pub fn cosine_freq_dist(r: &FrequencyVector, s: &FrequencyVector) -> f64 {
    let mut dot = 0.0;
    r.for_each_common(s, |_, a, b| dot += a as f64 * b as f64);
    cosine_from_parts(dot, squared_norm(r), squared_norm(s))
}

/// Collection size and per-neighbourhood document frequency.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusStats {
    documents: usize,
    df: HashMap<Neighborhood, u32>,
}

impl CorpusStats {
    pub fn documents(&self) -> usize {
        self.documents
    }

    pub fn document_frequency(&self, key: &Neighborhood) -> Option<u32> {
        self.df.get(key).copied()
    }

    pub fn len(&self) -> usize {
        self.df.len()
    }

    pub fn is_empty(&self) -> bool {
        self.df.is_empty()
    }
}

pub fn corpus_stats<'a>(corpus: impl IntoIterator<Item = &'a FrequencyVector>) -> Result<CorpusStats, SimilarityError> {
    let mut documents = 0;
    let mut df: HashMap<Neighborhood, u32> = HashMap::new();
    for vector in corpus {
        documents += 1;
        for key in vector.keys() {
            *df.entry(*key).or_insert(0) += 1;
        }
    }
    if documents == 0 {
        return Err(SimilarityError::EmptyCorpus);
    }
    Ok(CorpusStats { documents, df })
}

/// TF-IDF weighted vector: `(1 + log10 f) * log10(N / df)` per key.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightedVector {
    entries: Vec<(Neighborhood, f64)>,
    squared_norm: f64,
}

impl WeightedVector {
    pub fn new(v: &FrequencyVector, stats: &CorpusStats) -> Result<Self, SimilarityError> {
        let n = stats.documents as f64;
        let entries = v
            .entries()
            .iter()
            .map(|&(key, count)| {
                let df = stats.document_frequency(&key).ok_or(SimilarityError::StaleStats(key))?;
                let tf = 1.0 + (count as f64).log10();
                Ok((key, tf * (n / df as f64).log10()))
            })
            .collect::<Result<Vec<_>, SimilarityError>>()?;
        let squared_norm = entries.iter().map(|&(_, w)| w * w).sum();
        Ok(WeightedVector { entries, squared_norm })
    }

    pub fn entries(&self) -> &[(Neighborhood, f64)] {
        &self.entries
    }

    fn dot(&self, other: &WeightedVector) -> f64 {
        let (small, large) = if self.entries.len() <= other.entries.len() {
            (&self.entries, &other.entries)
        } else {
            (&other.entries, &self.entries)
        };
        let mut dot = 0.0;
        let mut rest = &large[..];
        for &(key, w) in small.iter() {
            match rest.binary_search_by(|(k, _)| k.cmp(&key)) {
                Ok(i) => {
                    dot += w * rest[i].1;
                    rest = &rest[i + 1..];
                }
                Err(i) => rest = &rest[i..],
            }
        }
        dot
    }

    pub fn cosine_dist(&self, other: &WeightedVector) -> f64 {
        cosine_from_parts(self.dot(other), self.squared_norm, other.squared_norm)
    }
}

pub fn cosine_tfidf_dist(
    r: &FrequencyVector,
    s: &FrequencyVector,
    stats: &CorpusStats,
) -> Result<f64, SimilarityError> {
    Ok(WeightedVector::new(r, stats)?.cosine_dist(&WeightedVector::new(s, stats)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Metric {
    Jaccard,
    JaccardSet,
    HammingBool,
    HammingFreq,
    CosineFreq,
    CosineTfIdf,
}

impl Metric {
    pub const ALL: [Metric; 6] = [
        Metric::Jaccard,
        Metric::JaccardSet,
        Metric::HammingBool,
        Metric::HammingFreq,
        Metric::CosineFreq,
        Metric::CosineTfIdf,
    ];

    pub fn id(self) -> &'static str {
        match self {
            Metric::Jaccard => "jaccard",
            Metric::JaccardSet => "jaccard-set",
            Metric::HammingBool => "hbool",
            Metric::HammingFreq => "hfreq",
            Metric::CosineFreq => "cosine",
            Metric::CosineTfIdf => "tfidf",
        }
    }

    pub fn needs_stats(self) -> bool {
        self == Metric::CosineTfIdf
    }

    /// Distance between two vectors as `f64`; Hamming counts are exact.
    pub fn distance(
        self,
        r: &FrequencyVector,
        s: &FrequencyVector,
        stats: Option<&CorpusStats>,
    ) -> Result<f64, SimilarityError> {
        match self {
            Metric::Jaccard => jaccard_dist(r, s),
            Metric::JaccardSet => jaccard_set_dist(r, s),
            Metric::HammingBool => Ok(hamming_bool_dist(r, s) as f64),
            Metric::HammingFreq => Ok(hamming_freq_dist(r, s) as f64),
            Metric::CosineFreq => Ok(cosine_freq_dist(r, s)),
            Metric::CosineTfIdf => cosine_tfidf_dist(r, s, stats.ok_or(SimilarityError::MissingStats)?),
        }
    }
}

impl FromStr for Metric {
    type Err = SimilarityError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Metric::ALL
            .into_iter()
            .find(|m| m.id() == s)
            .ok_or_else(|| SimilarityError::UnknownMetric(s.to_string()))
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.id())
    }
}

/// Symmetric matrix of pairwise distances with a zero diagonal.
#[derive(Debug, Clone, PartialEq)]
pub struct DistanceMatrix {
    ids: Vec<String>,
    values: Vec<f64>,
}

impl DistanceMatrix {
    /// Builds a matrix from row-major values, checking shape, symmetry and
    /// the diagonal.
    pub fn new(ids: Vec<String>, values: Vec<f64>) -> Result<Self, SimilarityError> {
        let n = ids.len();
        if values.len() != n * n {
            return Err(SimilarityError::Csv(format!(
                "expected {} values, got {}",
                n * n,
                values.len()
            )));
        }
        let mut seen = std::collections::HashSet::new();
        for id in &ids {
            if !seen.insert(id) {
                return Err(SimilarityError::DuplicateId(id.clone()));
            }
        }
        for i in 0..n {
            if values[i * n + i] != 0.0 {
                return Err(SimilarityError::Csv(format!("non-zero diagonal at '{}'", ids[i])));
            }
            for j in 0..n {
                let v = values[i * n + j];
                if !(v >= 0.0 && v.is_finite()) {
                    return Err(SimilarityError::Csv(format!("invalid distance {v} at ({i}, {j})")));
                }
                if v != values[j * n + i] {
                    return Err(SimilarityError::Csv(format!(
                        "asymmetric entries for '{}' and '{}'",
                        ids[i], ids[j]
                    )));
                }
            }
        }
        Ok(DistanceMatrix { ids, values })
    }

    pub fn len(&self) -> usize {
        self.ids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.ids.is_empty()
    }

    pub fn ids(&self) -> &[String] {
        &self.ids
    }

    pub fn index_of(&self, id: &str) -> Option<usize> {
        self.ids.iter().position(|x| x == id)
    }

    #[inline]
    pub fn get(&self, i: usize, j: usize) -> f64 {
        self.values[i * self.ids.len() + j]
    }

    pub fn row(&self, i: usize) -> &[f64] {
        let n = self.ids.len();
        &self.values[i * n..(i + 1) * n]
    }

    /// Same matrix with every distance passed through `f`.
    pub fn map(&self, f: impl Fn(f64) -> f64) -> DistanceMatrix {
        let n = self.ids.len();
        let values = (0..n * n)
            .map(|x| if x / n == x % n { 0.0 } else { f(self.values[x]) })
            .collect();
        DistanceMatrix {
            ids: self.ids.clone(),
            values,
        }
    }

    /// CSV with an `id,<ids...>` header; floats carry 12 significant digits.
    pub fn write_csv<W: io::Write>(&self, writer: W) -> Result<(), SimilarityError> {
        let mut out = csv::Writer::from_writer(writer);
        out.write_record(std::iter::once("id").chain(self.ids.iter().map(String::as_str)))?;
        for (i, id) in self.ids.iter().enumerate() {
            let row = self.row(i).iter().map(|&v| format_distance(v));
            out.write_record(std::iter::once(id.clone()).chain(row))?;
        }
        out.flush().map_err(|e| SimilarityError::Csv(e.to_string()))
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("csv output is utf-8")
    }

    pub fn read_csv<R: io::Read>(reader: R) -> Result<Self, SimilarityError> {
        let mut input = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .from_reader(reader);
        let mut records = input.records();
        let header = records
            .next()
            .ok_or_else(|| SimilarityError::Csv("empty input".to_string()))??;
        if header.get(0) != Some("id") {
            return Err(SimilarityError::Csv("header must start with 'id'".to_string()));
        }
        let ids: Vec<String> = header.iter().skip(1).map(str::to_string).collect();
        let mut values = Vec::with_capacity(ids.len() * ids.len());
        let mut rows = 0;
        for record in records {
            let record = record?;
            if rows >= ids.len() {
                return Err(SimilarityError::Csv("more rows than ids".to_string()));
            }
            if record.get(0) != Some(ids[rows].as_str()) {
                return Err(SimilarityError::Csv(format!(
                    "row {} must be labelled '{}'",
                    rows + 1,
                    ids[rows]
                )));
            }
            if record.len() != ids.len() + 1 {
                return Err(SimilarityError::Csv(format!(
                    "row '{}' has {} fields",
                    ids[rows],
                    record.len()
                )));
            }
            for field in record.iter().skip(1) {
                values.push(
                    field
                        .parse::<f64>()
                        .map_err(|_| SimilarityError::Csv(format!("invalid number '{field}'")))?,
                );
            }
            rows += 1;
        }
        if rows != ids.len() {
            return Err(SimilarityError::Csv(format!("expected {} rows, got {rows}", ids.len())));
        }
        DistanceMatrix::new(ids, values)
    }
}

/// At most 12 significant digits; integral values print without a fraction.
pub fn format_distance(v: f64) -> String {
    let rounded: f64 = format!("{v:.11e}").parse().unwrap_or(v);
    format!("{rounded}")
}

/// All pairwise distances under `metric`. Every cell is computed on its own,
/// so the result does not depend on the thread count.
pub fn distance_matrix(
    ids: &[String],
    vectors: &[&FrequencyVector],
    metric: Metric,
    stats: Option<&CorpusStats>,
) -> Result<DistanceMatrix, SimilarityError> {
    let n = vectors.len();
    if ids.len() != n {
        return Err(SimilarityError::IdCount {
            ids: ids.len(),
            items: n,
        });
    }
    if n < 2 {
        return Err(SimilarityError::TooFewItems(n));
    }

    let rows: Vec<Vec<f64>> = if metric == Metric::CosineTfIdf {
        let stats = stats.ok_or(SimilarityError::MissingStats)?;
        let weighted = vectors
            .par_iter()
            .map(|v| WeightedVector::new(v, stats))
            .collect::<Result<Vec<_>, _>>()?;
        (0..n)
            .into_par_iter()
            .map(|i| (i + 1..n).map(|j| weighted[i].cosine_dist(&weighted[j])).collect())
            .collect()
    } else {
        (0..n)
            .into_par_iter()
            .map(|i| {
                (i + 1..n)
                    .map(|j| metric.distance(vectors[i], vectors[j], None))
                    .collect::<Result<Vec<_>, _>>()
            })
            .collect::<Result<Vec<_>, _>>()?
    };

    let mut values = vec![0.0; n * n];
    for (i, row) in rows.iter().enumerate() {
        for (offset, &d) in row.iter().enumerate() {
            let j = i + 1 + offset;
            values[i * n + j] = d;
            values[j * n + i] = d;
        }
    }
    DistanceMatrix::new(ids.to_vec(), values)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fingerprint::fingerprint;
    use crate::pattern::{grid_to_graph, weave_matrix, PatternKind};
    use proptest::prelude::*;

    fn key(i: usize) -> Neighborhood {
        let sym = ["A", "N"];
        let arm: String = (0..4).map(|b| sym[(i >> b) & 1]).collect();
        format!("{arm},{arm};{arm},{arm}").parse().unwrap()
    }

    fn vector(counts: &[(usize, u32)]) -> FrequencyVector {
        FrequencyVector::from_counts(counts.iter().map(|&(k, c)| (key(k), c)))
    }

    fn h1_h2() -> (FrequencyVector, FrequencyVector) {
        (vector(&[(0, 4)]), vector(&[(0, 2), (1, 2)]))
    }

    #[test]
    fn worked_example_vectors() {
        let (r, s) = h1_h2();
        assert_eq!(hamming_freq_dist(&r, &s), 4);
        assert_eq!(hamming_bool_dist(&r, &s), 1);
        assert!((jaccard_dist(&r, &s).unwrap() - 2.0 / 3.0).abs() < 1e-15);
        let expected = 1.0 - 2f64.sqrt() / 2.0;
        assert!((cosine_freq_dist(&r, &s) - expected).abs() < 1e-12);
        assert!((cosine_freq_dist(&r, &s) - 0.2928932).abs() < 1e-7);
    }

    #[test]
    fn identical_and_disjoint() {
        let r = vector(&[(0, 3), (2, 5)]);
        let s = vector(&[(1, 1), (3, 2), (4, 1)]);
        assert_eq!(jaccard_dist(&r, &r).unwrap(), 0.0);
        assert_eq!(jaccard_dist(&r, &s).unwrap(), 1.0);
        assert_eq!(hamming_bool_dist(&r, &r), 0);
        assert_eq!(hamming_bool_dist(&r, &s), 5);
        assert_eq!(hamming_freq_dist(&r, &r), 0);
        assert!(cosine_freq_dist(&r, &r).abs() < 1e-12);
        assert_eq!(cosine_freq_dist(&r, &s), 1.0);
        assert_eq!(jaccard_set_dist(&r, &s).unwrap(), 1.0);
    }

    #[test]
    fn empty_vectors() {
        let empty = FrequencyVector::default();
        let r = vector(&[(0, 3)]);
        assert!(matches!(
            jaccard_dist(&empty, &empty),
            Err(SimilarityError::EmptyFingerprints)
        ));
        assert_eq!(jaccard_dist(&empty, &r).unwrap(), 1.0);
        assert_eq!(hamming_freq_dist(&r, &empty), 3);
        assert_eq!(cosine_freq_dist(&r, &empty), 1.0);
        assert_eq!(cosine_freq_dist(&empty, &empty), 0.0);
    }

    #[test]
    fn document_frequencies() {
        let a = vector(&[(0, 1), (1, 1)]);
        let b = vector(&[(0, 2)]);
        let c = vector(&[(0, 1), (2, 7)]);
        let stats = corpus_stats([&a, &b, &c]).unwrap();
        assert_eq!(stats.documents(), 3);
        assert_eq!(stats.document_frequency(&key(0)), Some(3));
        assert_eq!(stats.document_frequency(&key(1)), Some(1));
        assert_eq!(stats.document_frequency(&key(2)), Some(1));
        assert_eq!(stats.len(), 3);
        let single = corpus_stats([&c]).unwrap();
        assert_eq!(single.documents(), 1);
        assert_eq!(single.document_frequency(&key(2)), Some(1));
        assert!(matches!(
            corpus_stats(std::iter::empty()),
            Err(SimilarityError::EmptyCorpus)
        ));
    }

    /// Weights evaluated by hand: 2 log10(1.5) and 2 log10(3).
    #[test]
    fn tfidf_fixture() {
        let r = vector(&[(0, 10)]);
        let s = vector(&[(0, 10), (1, 10)]);
        let stats = corpus_stats([&r, &s, &vector(&[(2, 1)])]).unwrap();
        assert_eq!(stats.document_frequency(&key(0)), Some(2));
        assert_eq!(stats.document_frequency(&key(1)), Some(1));
        let wr = WeightedVector::new(&r, &stats).unwrap();
        assert!((wr.entries()[0].1 - 0.352183).abs() < 1e-6);
        let ws = WeightedVector::new(&s, &stats).unwrap();
        assert!((ws.entries()[1].1 - 0.954243).abs() < 1e-6);
        let (p, q) = (0.352183_f64, 0.954243_f64);
        let expected = 1.0 - p * p / (p * (p * p + q * q).sqrt());
        let d = cosine_tfidf_dist(&r, &s, &stats).unwrap();
        assert!((d - expected).abs() < 1e-6);
        assert!((d - 0.653758).abs() < 1e-6);
        assert!(cosine_tfidf_dist(&r, &r, &stats).unwrap().abs() < 1e-12);
    }

    #[test]
    fn tfidf_conventions() {
        let r = vector(&[(0, 3), (1, 1)]);
        let s = vector(&[(0, 1), (1, 4)]);
        let stats = corpus_stats([&r, &s]).unwrap();
        assert_eq!(cosine_tfidf_dist(&r, &s, &stats).unwrap(), 0.0);
        let stranger = vector(&[(5, 1)]);
        assert!(matches!(
            cosine_tfidf_dist(&r, &stranger, &stats),
            Err(SimilarityError::StaleStats(_))
        ));
    }

    #[test]
    fn metric_ids() {
        for m in Metric::ALL {
            assert_eq!(m.id().parse::<Metric>().unwrap(), m);
        }
        assert!(matches!(
            "euclid".parse::<Metric>(),
            Err(SimilarityError::UnknownMetric(_))
        ));
        let (r, s) = h1_h2();
        assert!(matches!(
            Metric::CosineTfIdf.distance(&r, &s, None),
            Err(SimilarityError::MissingStats)
        ));
    }

    #[test]
    fn matrix_of_identical_items() {
        let (r, _) = h1_h2();
        let ids = vec!["a".to_string(), "b".to_string()];
        for m in Metric::ALL {
            let stats = corpus_stats([&r, &r]).unwrap();
            let d = distance_matrix(&ids, &[&r, &r], m, Some(&stats)).unwrap();
            assert_eq!(d.row(0), &[0.0, 0.0]);
            assert_eq!(d.row(1), &[0.0, 0.0]);
        }
    }

    #[test]
    fn matrix_of_worked_example() {
        let (r, s) = h1_h2();
        let ids = vec!["h1".to_string(), "h2".to_string()];
        let d = distance_matrix(&ids, &[&r, &s], Metric::HammingFreq, None).unwrap();
        assert_eq!(d.get(0, 1), 4.0);
        assert_eq!(d.to_csv_string(), "id,h1,h2\nh1,0,4\nh2,4,0\n");
        let d = distance_matrix(&ids, &[&r, &s], Metric::CosineFreq, None).unwrap();
        assert_eq!(
            d.to_csv_string(),
            "id,h1,h2\nh1,0,0.292893218813\nh2,0.292893218813,0\n"
        );
    }

    #[test]
    fn matrix_errors() {
        let (r, s) = h1_h2();
        let ids = vec!["a".to_string()];
        assert!(matches!(
            distance_matrix(&ids, &[&r], Metric::Jaccard, None),
            Err(SimilarityError::TooFewItems(1))
        ));
        let ids = vec!["a".to_string(), "b".to_string()];
        assert!(matches!(
            distance_matrix(&ids, &[&r, &s], Metric::CosineTfIdf, None),
            Err(SimilarityError::MissingStats)
        ));
        let dup = vec!["a".to_string(), "a".to_string()];
        assert!(matches!(
            distance_matrix(&dup, &[&r, &s], Metric::Jaccard, None),
            Err(SimilarityError::DuplicateId(_))
        ));
    }

    #[test]
    fn matrix_matches_pairwise_calls() {
        let vectors: Vec<FrequencyVector> = (0..5)
            .map(|seed| {
                let m = weave_matrix(PatternKind::Random { density: 0.5, seed }, 6, 5).unwrap();
                fingerprint(&grid_to_graph(&m), 2).unwrap().into_counts()
            })
            .collect();
        let refs: Vec<&FrequencyVector> = vectors.iter().collect();
        let ids: Vec<String> = (0..5).map(|i| format!("g{i}")).collect();
        let stats = corpus_stats(refs.iter().copied()).unwrap();
        for metric in Metric::ALL {
            let d = distance_matrix(&ids, &refs, metric, Some(&stats)).unwrap();
            for i in 0..5 {
                for j in 0..5 {
                    let expected = if i == j {
                        0.0
                    } else {
                        metric.distance(refs[i], refs[j], Some(&stats)).unwrap()
                    };
                    assert_eq!(d.get(i, j).to_bits(), expected.to_bits(), "{metric} ({i},{j})");
                }
            }
        }
    }

    #[test]
    fn csv_round_trip_and_validation() {
        let ids = vec!["x".to_string(), "y".to_string(), "z".to_string()];
        let values = vec![0.0, 0.25, 1.0, 0.25, 0.0, 1.0 / 3.0, 1.0, 1.0 / 3.0, 0.0];
        let d = DistanceMatrix::new(ids, values).unwrap();
        let text = d.to_csv_string();
        let back = DistanceMatrix::read_csv(text.as_bytes()).unwrap();
        assert_eq!(back.to_csv_string(), text);
        assert!((back.get(1, 2) - 1.0 / 3.0).abs() < 1e-12);
        assert!(DistanceMatrix::read_csv("id,a,b\na,0,1\nb,2,0\n".as_bytes()).is_err());
        assert!(DistanceMatrix::read_csv("id,a,b\na,1,1\nb,1,0\n".as_bytes()).is_err());
        assert!(DistanceMatrix::read_csv("id,a,b\na,0,1\n".as_bytes()).is_err());
        assert!(DistanceMatrix::read_csv("id,a,b\nb,0,1\na,1,0\n".as_bytes()).is_err());
        assert!(DistanceMatrix::read_csv("x,a\na,0\n".as_bytes()).is_err());
        assert!(DistanceMatrix::read_csv("id,a,b\na,0,q\nb,q,0\n".as_bytes()).is_err());
    }

    #[test]
    fn number_formatting() {
        assert_eq!(format_distance(0.0), "0");
        assert_eq!(format_distance(4.0), "4");
        assert_eq!(format_distance(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_distance(2.0 / 3.0), "0.666666666667");
        assert_eq!(format_distance(123456.0), "123456");
    }

    fn vector_strategy() -> impl Strategy<Value = FrequencyVector> {
        proptest::collection::vec((0usize..12, 1u32..20), 1..8).prop_map(|c| vector(&c))
    }

    proptest! {
        #[test]
        fn identity_symmetry_ranges(r in vector_strategy(), s in vector_strategy()) {
            let j = jaccard_dist(&r, &s).unwrap();
            prop_assert_eq!(j, jaccard_dist(&s, &r).unwrap());
            prop_assert!((0.0..=1.0).contains(&j));
            prop_assert_eq!(jaccard_dist(&r, &r).unwrap(), 0.0);
            let c = cosine_freq_dist(&r, &s);
            prop_assert_eq!(c, cosine_freq_dist(&s, &r));
            prop_assert!((0.0..=1.0).contains(&c));
            prop_assert!(cosine_freq_dist(&r, &r) < 1e-12);
            prop_assert_eq!(hamming_bool_dist(&r, &s), hamming_bool_dist(&s, &r));
            prop_assert_eq!(hamming_freq_dist(&r, &s), hamming_freq_dist(&s, &r));
            prop_assert!(hamming_bool_dist(&r, &s) <= (r.support_len() + s.support_len()) as u64);
            prop_assert!(hamming_freq_dist(&r, &s) >= hamming_bool_dist(&r, &s));
        }

        #[test]
        fn scaling_invariance(r in vector_strategy(), s in vector_strategy(), c in 2u32..50) {
            let scale = |v: &FrequencyVector| FrequencyVector::from_counts(v.entries().iter().map(|&(k, n)| (k, n * c)));
            let (rs, ss) = (scale(&r), scale(&s));
            prop_assert_eq!(jaccard_dist(&r, &s).unwrap(), jaccard_dist(&rs, &ss).unwrap());
            prop_assert!((cosine_freq_dist(&r, &s) - cosine_freq_dist(&rs, &ss)).abs() < 1e-12);
        }

        #[test]
        fn jaccard_triangle(r in vector_strategy(), s in vector_strategy(), t in vector_strategy()) {
            let d = |a: &FrequencyVector, b: &FrequencyVector| jaccard_dist(a, b).unwrap();
            prop_assert!(d(&r, &t) <= d(&r, &s) + d(&s, &t) + 1e-12);
        }
    }
}
