//! `weftprint` command line: corpus generation, fingerprints, distance
//! matrices, clustering, retrieval and timing runs.

use std::collections::HashMap;
use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;
use std::time::Instant;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};

use weftprint::corpus::{load_corpus, read_manifest};
use weftprint::eval::{evaluate_retrieval, pair_scores, upgma_cluster};
use weftprint::fingerprint::MAX_K;
use weftprint::pipeline::{corpus_distances, fingerprint_all};
use weftprint::similarity::{corpus_stats, distance_matrix};
use weftprint::{
    fingerprint, generate_corpus, run_pipeline, CorpusSpec, DistanceMatrix, FrequencyVector, Metric, Partition,
    TextileGraph, DEFAULT_K,
};

#[derive(Debug, Parser)]
#[command(
    name = "weftprint",
    version,
    about = "Fingerprint-based similarity search for woven textiles"
)]
struct Cli {
    /// Overrides the seed of the corpus spec.
    #[arg(long, global = true)]
    seed: Option<u64>,

    /// Worker threads; 0 lets the runtime decide.
    #[arg(long, global = true, env = "WEFTPRINT_THREADS", default_value_t = 0)]
    threads: usize,

    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Generate a labelled corpus of `.tg` graphs and its manifest.
    Generate {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long)]
        out_dir: PathBuf,
    },
    /// Fingerprint one `.tg` file or every `.tg` file of a directory.
    Fingerprint {
        #[arg(long = "in")]
        input: PathBuf,
        #[command(flatten)]
        k: KArg,
        /// Output file (directory for a directory input); stdout if omitted.
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Pairwise distances between all graphs of a manifest.
    Distmatrix {
        #[arg(long)]
        manifest: PathBuf,
        #[arg(long)]
        metric: Metric,
        #[command(flatten)]
        k: KArg,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// UPGMA clustering scored against the manifest categories.
    Cluster {
        #[arg(long)]
        dist: PathBuf,
        #[arg(long)]
        clusters: usize,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Also write the `id,cluster` assignment.
        #[arg(long)]
        partition: Option<PathBuf>,
    },
    /// Ranked retrieval with every item as a query.
    Retrieve {
        #[arg(long)]
        dist: PathBuf,
        #[arg(long)]
        truth: PathBuf,
        #[arg(long)]
        curves: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Time fingerprinting plus distance computation over a range of k.
    Bench {
        #[arg(long)]
        spec: PathBuf,
        #[arg(long, value_parser = parse_k_range, default_value = "1..9")]
        k_range: (usize, usize),
        /// Comma separated metric ids.
        #[arg(long, value_delimiter = ',', default_value = "jaccard")]
        metrics: Vec<Metric>,
        #[arg(long)]
        out: Option<PathBuf>,
    },
    /// Generate, fingerprint, compare, cluster and retrieve in one go.
    Run {
        #[arg(long)]
        spec: PathBuf,
        #[command(flatten)]
        k: KArg,
        #[arg(long, default_value = "jaccard")]
        metric: Metric,
        /// Defaults to the number of categories.
        #[arg(long)]
        clusters: Option<usize>,
        #[arg(long)]
        report: Option<PathBuf>,
        #[arg(long)]
        curves: Option<PathBuf>,
    },
}

#[derive(Debug, Args)]
struct KArg {
    /// Neighbourhood depth.
    #[arg(long = "k", default_value_t = DEFAULT_K, value_parser = parse_k)]
    value: usize,
}

fn parse_k(s: &str) -> Result<usize, String> {
    let k: usize = s.parse().map_err(|e| format!("{s:?}: {e}"))?;
    if !(1..=MAX_K).contains(&k) {
        return Err(format!("k must be in 1..={MAX_K}"));
    }
    Ok(k)
}

fn parse_k_range(s: &str) -> Result<(usize, usize), String> {
    let (a, b) = s.split_once("..").ok_or_else(|| format!("expected a..b, got {s:?}"))?;
    let parse = |v: &str| v.trim().parse::<usize>().map_err(|e| format!("{v:?}: {e}"));
    let (a, b) = (parse(a)?, parse(b)?);
    if a == 0 || a > b || b > MAX_K {
        return Err(format!("range {a}..{b} must satisfy 1 <= a <= b <= {MAX_K}"));
    }
    Ok((a, b))
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(1)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    if let Err(e) = rayon::ThreadPoolBuilder::new().num_threads(cli.threads).build_global() {
        eprintln!("error: {e}");
        return ExitCode::from(2);
    }
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(2)
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Generate { spec, out_dir } => {
            let spec = load_spec(&spec, cli.seed)?;
            let corpus = generate_corpus(&spec)?;
            let manifest = corpus.write_to_dir(&out_dir)?;
            eprintln!("{} graphs, manifest {}", corpus.len(), manifest.display());
        }
        Command::Fingerprint { input, k, out } => fingerprint_cmd(&input, k.value, out.as_deref())?,
        Command::Distmatrix {
            manifest,
            metric,
            k,
            out,
        } => {
            let corpus = load_corpus(&manifest)?;
            let d = corpus_distances(&corpus, k.value, metric)?;
            emit(out.as_deref(), &d.to_csv_string())?;
        }
        Command::Cluster {
            dist,
            clusters,
            truth,
            report,
            partition,
        } => {
            let d = read_dist(&dist)?;
            let labels = truth_labels(&truth)?;
            let categories = aligned_categories(&d, &labels)?;
            let found = upgma_cluster(&d, clusters)?;
            let scores = pair_scores(&found, &Partition::from_labels(d.ids(), &categories)?)?;
            if let Some(path) = partition {
                write_file(&path, &found.to_csv_string())?;
            }
            let text = format!(
                "clusters {clusters}\nRI {:.6}\nP {:.6}\nR {:.6}\nF {:.6}\n",
                scores.rand_index, scores.precision, scores.recall, scores.f_measure
            );
            emit(report.as_deref(), &text)?;
        }
        Command::Retrieve {
            dist,
            truth,
            curves,
            report,
        } => {
            let d = read_dist(&dist)?;
            let labels = truth_labels(&truth)?;
            aligned_categories(&d, &labels)?;
            let result = evaluate_retrieval(&d, &labels)?;
            if let Some(path) = curves {
                write_file(&path, &result.to_csv_string())?;
            }
            let mut text = format!("MAP {:.6}\nqueries {}\n", result.map, result.queries);
            if !result.skipped.is_empty() {
                text.push_str(&format!("skipped {}\n", result.skipped.join(" ")));
            }
            emit(report.as_deref(), &text)?;
        }
        Command::Bench {
            spec,
            k_range,
            metrics,
            out,
        } => {
            let spec = load_spec(&spec, cli.seed)?;
            let corpus = generate_corpus(&spec)?;
            let ids = corpus.ids();
            let graphs = corpus.graphs();
            let mut text = String::from("metric,k,seconds\n");
            for metric in metrics {
                for k in k_range.0..=k_range.1 {
                    let mut runs = [0.0; 3];
                    for run in &mut runs {
                        let start = Instant::now();
                        let fps = fingerprint_all(&graphs, k)?;
                        let vectors: Vec<&FrequencyVector> = fps.iter().map(|f| f.counts()).collect();
                        let stats = metric
                            .needs_stats()
                            .then(|| corpus_stats(vectors.iter().copied()))
                            .transpose()?;
                        distance_matrix(&ids, &vectors, metric, stats.as_ref())?;
                        *run = start.elapsed().as_secs_f64();
                    }
                    runs.sort_by(f64::total_cmp);
                    text.push_str(&format!("{metric},{k},{:.6}\n", runs[1]));
                }
            }
            emit(out.as_deref(), &text)?;
        }
        Command::Run {
            spec,
            k,
            metric,
            clusters,
            report,
            curves,
        } => {
            let spec = load_spec(&spec, cli.seed)?;
            let result = run_pipeline(&spec, k.value, metric, clusters)?;
            if let Some(path) = curves {
                write_file(&path, &result.retrieval.to_csv_string())?;
            }
            emit(report.as_deref(), &result.to_text())?;
        }
    }
    Ok(())
}

fn load_spec(path: &Path, seed: Option<u64>) -> Result<CorpusSpec> {
    let mut spec = CorpusSpec::from_file(path).with_context(|| format!("reading spec {}", path.display()))?;
    if let Some(seed) = seed {
        spec.seed = seed;
    }
    Ok(spec)
}

fn read_graph(path: &Path) -> Result<TextileGraph> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    TextileGraph::parse(&text).with_context(|| format!("parsing {}", path.display()))
}

fn fingerprint_cmd(input: &Path, k: usize, out: Option<&Path>) -> Result<()> {
    if !input.is_dir() {
        let fp = fingerprint(&read_graph(input)?, k)?;
        return emit(out, &fp.serialize());
    }
    let Some(out_dir) = out else {
        bail!("--out <dir> is required when --in is a directory");
    };
    let mut files: Vec<PathBuf> = fs::read_dir(input)
        .with_context(|| format!("listing {}", input.display()))?
        .map(|entry| entry.map(|e| e.path()))
        .collect::<io::Result<_>>()?;
    files.retain(|p| p.extension().is_some_and(|e| e == "tg"));
    files.sort();
    if files.is_empty() {
        bail!("no .tg files in {}", input.display());
    }
    fs::create_dir_all(out_dir).with_context(|| format!("creating {}", out_dir.display()))?;
    let graphs = files.iter().map(|p| read_graph(p)).collect::<Result<Vec<_>>>()?;
    let fps = fingerprint_all(&graphs.iter().collect::<Vec<_>>(), k)?;
    for (path, fp) in files.iter().zip(&fps) {
        let name = path.with_extension("fp");
        write_file(&out_dir.join(name.file_name().unwrap_or_default()), &fp.serialize())?;
    }
    Ok(())
}

fn read_dist(path: &Path) -> Result<DistanceMatrix> {
    let file = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    DistanceMatrix::read_csv(file).with_context(|| format!("reading {}", path.display()))
}

fn truth_labels(manifest: &Path) -> Result<HashMap<String, String>> {
    let entries = read_manifest(manifest).with_context(|| format!("reading {}", manifest.display()))?;
    Ok(entries.into_iter().map(|e| (e.id, e.category)).collect())
}

fn aligned_categories(d: &DistanceMatrix, labels: &HashMap<String, String>) -> Result<Vec<String>> {
    d.ids()
        .iter()
        .map(|id| {
            labels
                .get(id)
                .cloned()
                .with_context(|| format!("id {id} is not in the truth manifest"))
        })
        .collect()
}

fn write_file(path: &Path, text: &str) -> Result<()> {
    fs::write(path, text).with_context(|| format!("writing {}", path.display()))
}

fn emit(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(path) => write_file(path, text),
        None => {
            io::stdout().lock().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}
