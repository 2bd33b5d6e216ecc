//! Labelled corpora of generated weaves, their TOML description and the
//! on-disk layout (`<id>.tg` files plus a `manifest.csv`).

use std::collections::HashSet;
use std::fs;
use std::path::{Path, PathBuf};

use rand::RngCore;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Deserialize;
use thiserror::Error;

use crate::graph::{GraphError, TextileGraph};
use crate::pattern::{
    grid_to_graph, perturb, transform, weave_matrix, PatternError, PatternKind, Transform, WeaveMatrix,
};

#[derive(Debug, Error)]
pub enum CorpusError {
    #[error("category '{category}': {source}")]
    Pattern {
        category: String,
        #[source]
        source: PatternError,
    },
    #[error("category '{category}': {message}")]
    InvalidCategory { category: String, message: String },
    #[error("corpus spec has no categories")]
    NoCategories,
    #[error("duplicate category name '{0}'")]
    DuplicateCategory(String),
    #[error("invalid corpus spec: {0}")]
    Config(#[from] toml::de::Error),
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("manifest {path}: {message}")]
    Manifest { path: PathBuf, message: String },
    #[error("{path}: {source}")]
    Graph {
        path: PathBuf,
        #[source]
        source: GraphError,
    },
}

/// One category of a corpus: `count` samples of one weave, of which the
/// `perturbed` fraction carries random cell flips at `rate` and the
/// `transformed` fraction is rotated or mirrored. The rest are clean.
#[derive(Debug, Clone, PartialEq)]
pub struct CategorySpec {
    pub name: String,
    pub kind: PatternKind,
    pub count: usize,
    pub width: usize,
    pub height: usize,
    pub perturbed: f64,
    pub rate: f64,
    pub transformed: f64,
    /// Overrides the corpus seed for this category.
    pub seed: Option<u64>,
}

impl CategorySpec {
    pub fn new(name: &str, kind: PatternKind, count: usize, width: usize, height: usize) -> Self {
        CategorySpec {
            name: name.to_string(),
            kind,
            count,
            width,
            height,
            perturbed: 0.0,
            rate: 0.0,
            transformed: 0.0,
            seed: None,
        }
    }

    pub fn with_perturbed(mut self, fraction: f64, rate: f64) -> Self {
        self.perturbed = fraction;
        self.rate = rate;
        self
    }

    pub fn with_transformed(mut self, fraction: f64) -> Self {
        self.transformed = fraction;
        self
    }

    fn invalid(&self, message: impl Into<String>) -> CorpusError {
        CorpusError::InvalidCategory {
            category: self.name.clone(),
            message: message.into(),
        }
    }

    /// Sample counts as (clean, perturbed, transformed).
    pub fn split(&self) -> (usize, usize, usize) {
        let perturbed = (self.perturbed * self.count as f64).round() as usize;
        let transformed = (self.transformed * self.count as f64).round() as usize;
        (
            self.count.saturating_sub(perturbed + transformed),
            perturbed,
            transformed,
        )
    }

    fn check(&self) -> Result<(), CorpusError> {
        if self.name.is_empty() || self.name.contains(|c: char| c == ',' || c == '/' || c.is_whitespace()) {
            return Err(self.invalid("name must be non-empty without commas, slashes or whitespace"));
        }
        if self.count == 0 {
            return Err(self.invalid("count must be at least 1"));
        }
        if self.width == 0 || self.height == 0 {
            return Err(self.invalid("grid dimensions must be at least 1"));
        }
        for (what, value) in [
            ("perturbed", self.perturbed),
            ("rate", self.rate),
            ("transformed", self.transformed),
        ] {
            if !(0.0..=1.0).contains(&value) {
                return Err(self.invalid(format!("{what} must lie in [0, 1], got {value}")));
            }
        }
        let (_, p, t) = self.split();
        if p + t > self.count {
            return Err(self.invalid("perturbed and transformed fractions exceed the sample count"));
        }
        self.kind.check().map_err(|source| CorpusError::Pattern {
            category: self.name.clone(),
            source,
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct CorpusSpec {
    pub seed: u64,
    pub categories: Vec<CategorySpec>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawSpec {
    seed: u64,
    #[serde(default, rename = "category")]
    categories: Vec<RawCategory>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawCategory {
    name: String,
    kind: String,
    count: usize,
    width: usize,
    height: usize,
    #[serde(default)]
    perturbed: f64,
    #[serde(default)]
    rate: f64,
    #[serde(default)]
    transformed: f64,
    seed: Option<u64>,
}

impl CorpusSpec {
    /// Reads the TOML corpus description (see the README for the keys).
    pub fn parse(text: &str) -> Result<Self, CorpusError> {
        let raw: RawSpec = toml::from_str(text)?;
        let categories = raw
            .categories
            .into_iter()
            .map(|c| {
                let kind = c.kind.parse().map_err(|source| CorpusError::Pattern {
                    category: c.name.clone(),
                    source,
                })?;
                Ok(CategorySpec {
                    name: c.name,
                    kind,
                    count: c.count,
                    width: c.width,
                    height: c.height,
                    perturbed: c.perturbed,
                    rate: c.rate,
                    transformed: c.transformed,
                    seed: c.seed,
                })
            })
            .collect::<Result<Vec<_>, CorpusError>>()?;
        let spec = CorpusSpec {
            seed: raw.seed,
            categories,
        };
        spec.check()?;
        Ok(spec)
    }

    pub fn from_file(path: &Path) -> Result<Self, CorpusError> {
        let text = fs::read_to_string(path).map_err(|source| CorpusError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        CorpusSpec::parse(&text)
    }

    pub fn check(&self) -> Result<(), CorpusError> {
        if self.categories.is_empty() {
            return Err(CorpusError::NoCategories);
        }
        let mut names = HashSet::new();
        for category in &self.categories {
            category.check()?;
            if !names.insert(category.name.as_str()) {
                return Err(CorpusError::DuplicateCategory(category.name.clone()));
            }
        }
        Ok(())
    }

    /// Nine categories of twenty 24x24 samples each: ten clean, five with 3%
    /// of the cells flipped and five rotated or mirrored.
    pub fn desk_scale(seed: u64) -> Self {
        let kinds = [
            ("plain", PatternKind::Plain),
            ("twill-2-1", PatternKind::Twill { over: 2, under: 1 }),
            ("twill-2-2", PatternKind::Twill { over: 2, under: 2 }),
            ("twill-3-1", PatternKind::Twill { over: 3, under: 1 }),
            ("twill-3-3", PatternKind::Twill { over: 3, under: 3 }),
            ("twill-4-4", PatternKind::Twill { over: 4, under: 4 }),
            ("satin-5-2", PatternKind::Satin { period: 5, step: 2 }),
            ("warp-above", PatternKind::WarpAbove),
            ("random-mixed", PatternKind::Mixed { block: 4, seed: 0 }),
        ];
        let categories = kinds
            .into_iter()
            .map(|(name, kind)| {
                CategorySpec::new(name, kind, 20, 24, 24)
                    .with_perturbed(0.25, 0.03)
                    .with_transformed(0.25)
            })
            .collect();
        CorpusSpec { seed, categories }
    }

    pub fn total_count(&self) -> usize {
        self.categories.iter().map(|c| c.count).sum()
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CorpusItem {
    pub id: String,
    pub category: String,
    pub graph: TextileGraph,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct LabeledCorpus {
    pub items: Vec<CorpusItem>,
}

impl LabeledCorpus {
    pub fn len(&self) -> usize {
        self.items.len()
    }

    pub fn is_empty(&self) -> bool {
        self.items.is_empty()
    }

    pub fn ids(&self) -> Vec<String> {
        self.items.iter().map(|i| i.id.clone()).collect()
    }

    pub fn categories(&self) -> Vec<String> {
        self.items.iter().map(|i| i.category.clone()).collect()
    }

    pub fn graphs(&self) -> Vec<&TextileGraph> {
        self.items.iter().map(|i| &i.graph).collect()
    }

    /// Writes `<id>.tg` for every item and `manifest.csv` into `dir`.
    pub fn write_to_dir(&self, dir: &Path) -> Result<PathBuf, CorpusError> {
        let io = |path: &Path| {
            let path = path.to_path_buf();
            move |source| CorpusError::Io { path, source }
        };
        fs::create_dir_all(dir).map_err(io(dir))?;
        let manifest: Vec<ManifestEntry> = self
            .items
            .iter()
            .map(|item| ManifestEntry {
                id: item.id.clone(),
                path: PathBuf::from(format!("{}.tg", item.id)),
                category: item.category.clone(),
            })
            .collect();
        for (item, entry) in self.items.iter().zip(&manifest) {
            let path = dir.join(&entry.path);
            fs::write(&path, item.graph.serialize()).map_err(io(&path))?;
        }
        let manifest_path = dir.join("manifest.csv");
        write_manifest(&manifest_path, &manifest)?;
        Ok(manifest_path)
    }
}

/// Per-sample randomness: word 0 seeds the base pattern, word 1 the flips.
fn sample_seeds(seed: u64, category: usize, sample: usize) -> [u64; 2] {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(((category as u64) << 32) | sample as u64);
    [rng.next_u64(), rng.next_u64()]
}

fn generate_sample(spec: &CorpusSpec, index: usize, sample: usize) -> Result<WeaveMatrix, CorpusError> {
    let category = &spec.categories[index];
    let [pattern_seed, flip_seed] = sample_seeds(category.seed.unwrap_or(spec.seed), index, sample);
    let pattern_error = |source| CorpusError::Pattern {
        category: category.name.clone(),
        source,
    };
    let base =
        weave_matrix(category.kind.with_seed(pattern_seed), category.width, category.height).map_err(pattern_error)?;
    let (clean, perturbed, _) = category.split();
    if sample < clean {
        Ok(base)
    } else if sample < clean + perturbed {
        perturb(&base, category.rate, flip_seed).map_err(pattern_error)
    } else {
        let op = Transform::ALL[(sample - clean - perturbed) % Transform::ALL.len()];
        Ok(transform(&base, op))
    }
}

/// Generates every sample of `spec`. Output order follows the spec (category
/// by category; clean, perturbed, then transformed samples) and does not
/// depend on how the work is scheduled.
pub fn generate_corpus(spec: &CorpusSpec) -> Result<LabeledCorpus, CorpusError> {
    spec.check()?;
    let jobs: Vec<(usize, usize)> = spec
        .categories
        .iter()
        .enumerate()
        .flat_map(|(c, cat)| (0..cat.count).map(move |s| (c, s)))
        .collect();
    let items = jobs
        .par_iter()
        .map(|&(c, s)| {
            let matrix = generate_sample(spec, c, s)?;
            let category = &spec.categories[c];
            Ok(CorpusItem {
                id: format!("{}-{:03}", category.name, s),
                category: category.name.clone(),
                graph: grid_to_graph(&matrix),
            })
        })
        .collect::<Result<Vec<_>, CorpusError>>()?;
    Ok(LabeledCorpus { items })
}

/// One row of `manifest.csv` (`id,path,category`). Relative paths are
/// resolved against the manifest's directory.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ManifestEntry {
    pub id: String,
    pub path: PathBuf,
    pub category: String,
}

pub fn write_manifest(path: &Path, entries: &[ManifestEntry]) -> Result<(), CorpusError> {
    let fail = |message: String| CorpusError::Manifest {
        path: path.to_path_buf(),
        message,
    };
    let mut writer = csv::Writer::from_path(path).map_err(|e| fail(e.to_string()))?;
    writer
        .write_record(["id", "path", "category"])
        .map_err(|e| fail(e.to_string()))?;
    for entry in entries {
        let p = entry.path.to_string_lossy();
        writer
            .write_record([entry.id.as_str(), p.as_ref(), entry.category.as_str()])
            .map_err(|e| fail(e.to_string()))?;
    }
    writer.flush().map_err(|e| fail(e.to_string()))
}

pub fn read_manifest(path: &Path) -> Result<Vec<ManifestEntry>, CorpusError> {
    let fail = |message: String| CorpusError::Manifest {
        path: path.to_path_buf(),
        message,
    };
    let mut reader = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .from_path(path)
        .map_err(|e| fail(e.to_string()))?;
    let headers = reader.headers().map_err(|e| fail(e.to_string()))?.clone();
    if headers.iter().collect::<Vec<_>>() != ["id", "path", "category"] {
        return Err(fail("header must be 'id,path,category'".to_string()));
    }
    let mut entries = Vec::new();
    let mut seen = HashSet::new();
    for record in reader.records() {
        let record = record.map_err(|e| fail(e.to_string()))?;
        let id = record[0].to_string();
        if id.is_empty() {
            return Err(fail("empty id".to_string()));
        }
        if !seen.insert(id.clone()) {
            return Err(fail(format!("duplicate id '{id}'")));
        }
        entries.push(ManifestEntry {
            id,
            path: PathBuf::from(&record[1]),
            category: record[2].to_string(),
        });
    }
    Ok(entries)
}

/// Reads every graph listed in a manifest.
pub fn load_corpus(manifest: &Path) -> Result<LabeledCorpus, CorpusError> {
    let base = manifest.parent().unwrap_or_else(|| Path::new("."));
    let entries = read_manifest(manifest)?;
    let items = entries
        .into_par_iter()
        .map(|entry| {
            let path = base.join(&entry.path);
            let text = fs::read_to_string(&path).map_err(|source| CorpusError::Io {
                path: path.clone(),
                source,
            })?;
            let graph = TextileGraph::parse(&text).map_err(|source| CorpusError::Graph { path, source })?;
            Ok(CorpusItem {
                id: entry.id,
                category: entry.category,
                graph,
            })
        })
        .collect::<Result<Vec<_>, CorpusError>>()?;
    Ok(LabeledCorpus { items })
}
