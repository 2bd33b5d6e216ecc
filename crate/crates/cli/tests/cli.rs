use std::fs;
use std::path::Path;
use std::process::{Command, Output};

use tempfile::TempDir;
use weftprint::{grid_to_graph, weave_matrix, PatternKind};

fn weftprint(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_weftprint"))
        .args(args)
        .env_remove("WEFTPRINT_THREADS")
        .output()
        .unwrap()
}

fn ok(args: &[&str]) -> String {
    let out = weftprint(args);
    assert!(
        out.status.success(),
        "{args:?}: {}",
        String::from_utf8_lossy(&out.stderr)
    );
    String::from_utf8(out.stdout).unwrap()
}

fn path(p: &Path) -> &str {
    p.to_str().unwrap()
}

fn write_plain(dir: &Path, name: &str, size: usize) -> String {
    let g = grid_to_graph(&weave_matrix(PatternKind::Plain, size, size).unwrap());
    let file = dir.join(name);
    fs::write(&file, g.serialize()).unwrap();
    path(&file).to_string()
}

const SMALL_SPEC: &str = r#"
seed = 9

[[category]]
name = "plain"
kind = "plain"
count = 4
width = 8
height = 8
perturbed = 0.5
rate = 0.05

[[category]]
name = "twill"
kind = "twill:2/1"
count = 4
width = 8
height = 8
transformed = 0.5

[[category]]
name = "mixed"
kind = "mixed"
count = 4
width = 8
height = 8
"#;

fn small_corpus(dir: &Path) -> (String, String) {
    let spec = dir.join("spec.toml");
    fs::write(&spec, SMALL_SPEC).unwrap();
    let corpus = dir.join("corpus");
    ok(&["generate", "--spec", path(&spec), "--out-dir", path(&corpus)]);
    (path(&spec).to_string(), path(&corpus.join("manifest.csv")).to_string())
}

#[test]
fn plain_2x2_fingerprint_has_one_neighbourhood() {
    let dir = TempDir::new().unwrap();
    let tg = write_plain(dir.path(), "plain2x2.tg", 2);
    let fp = ok(&["fingerprint", "--in", &tg, "--k", "1"]);
    assert_eq!(fp, "A,T;A,T 4\n");
}

#[test]
fn fingerprint_directory() {
    let dir = TempDir::new().unwrap();
    let input = dir.path().join("graphs");
    fs::create_dir(&input).unwrap();
    write_plain(&input, "a.tg", 2);
    write_plain(&input, "b.tg", 5);
    let out = dir.path().join("fps");
    ok(&["fingerprint", "--in", path(&input), "--k", "2", "--out", path(&out)]);
    let b = fs::read_to_string(out.join("b.fp")).unwrap();
    let total: u32 = b
        .lines()
        .map(|l| l.rsplit(' ').next().unwrap().parse::<u32>().unwrap())
        .sum();
    assert_eq!(total, 25);
    assert!(out.join("a.fp").exists());
}

#[test]
fn same_graph_twice_has_zero_distance() {
    let dir = TempDir::new().unwrap();
    write_plain(dir.path(), "g.tg", 4);
    let manifest = dir.path().join("manifest.csv");
    fs::write(&manifest, "id,path,category\nfirst,g.tg,x\nsecond,g.tg,x\n").unwrap();
    for metric in ["jaccard", "jaccard-set", "hbool", "hfreq", "cosine", "tfidf"] {
        let csv = ok(&[
            "distmatrix",
            "--manifest",
            path(&manifest),
            "--metric",
            metric,
            "--k",
            "3",
        ]);
        assert_eq!(csv, "id,first,second\nfirst,0,0\nsecond,0,0\n", "{metric}");
    }
}

#[test]
fn singleton_truth_with_n_clusters_scores_one() {
    let dir = TempDir::new().unwrap();
    let (_, manifest) = small_corpus(dir.path());
    let dist = dir.path().join("d.csv");
    ok(&[
        "distmatrix",
        "--manifest",
        &manifest,
        "--metric",
        "jaccard",
        "--out",
        path(&dist),
    ]);

    let singletons = dir.path().join("singletons.csv");
    let mut text = String::from("id,path,category\n");
    for line in fs::read_to_string(&manifest).unwrap().lines().skip(1) {
        let id = line.split(',').next().unwrap();
        text.push_str(&format!("{id},unused.tg,{id}\n"));
    }
    fs::write(&singletons, text).unwrap();
    let report = ok(&[
        "cluster",
        "--dist",
        path(&dist),
        "--clusters",
        "12",
        "--truth",
        path(&singletons),
    ]);
    assert!(report.contains("RI 1.000000"), "{report}");
}

#[test]
fn cluster_and_retrieve_write_artifacts() {
    let dir = TempDir::new().unwrap();
    let (_, manifest) = small_corpus(dir.path());
    let dist = dir.path().join("d.csv");
    ok(&[
        "distmatrix",
        "--manifest",
        &manifest,
        "--metric",
        "hfreq",
        "--k",
        "2",
        "--out",
        path(&dist),
    ]);
    let partition = dir.path().join("p.csv");
    let report = dir.path().join("cluster.txt");
    ok(&[
        "cluster",
        "--dist",
        path(&dist),
        "--clusters",
        "3",
        "--truth",
        &manifest,
        "--report",
        path(&report),
        "--partition",
        path(&partition),
    ]);
    let text = fs::read_to_string(&report).unwrap();
    assert_eq!(
        text.lines().map(|l| l.split(' ').next().unwrap()).collect::<Vec<_>>(),
        ["clusters", "RI", "P", "R", "F"]
    );
    assert_eq!(fs::read_to_string(&partition).unwrap().lines().count(), 13);

    let curves = dir.path().join("curves.csv");
    let report = ok(&[
        "retrieve",
        "--dist",
        path(&dist),
        "--truth",
        &manifest,
        "--curves",
        path(&curves),
    ]);
    assert!(report.starts_with("MAP "));
    assert!(report.contains("queries 12"));
    let curves = fs::read_to_string(&curves).unwrap();
    assert_eq!(curves.lines().next(), Some("recall_level,avg_precision,avg_fmeasure"));
    assert_eq!(curves.lines().count(), 12);
}

#[test]
fn runs_are_byte_identical() {
    let dir = TempDir::new().unwrap();
    let (spec, _) = small_corpus(dir.path());
    let first = ok(&["run", "--spec", &spec, "--k", "3"]);
    let second = ok(&["--threads", "1", "run", "--spec", &spec, "--k", "3"]);
    assert_eq!(first, second);
    assert_eq!(first.lines().count(), 5);
    let other_seed = ok(&["--seed", "10", "run", "--spec", &spec, "--k", "3", "--metric", "cosine"]);
    assert!(other_seed.starts_with("RI "));

    let a = dir.path().join("a");
    let b = dir.path().join("b");
    ok(&["generate", "--spec", &spec, "--out-dir", path(&a)]);
    ok(&["--threads", "3", "generate", "--spec", &spec, "--out-dir", path(&b)]);
    for entry in fs::read_dir(&a).unwrap() {
        let name = entry.unwrap().file_name();
        assert_eq!(fs::read(a.join(&name)).unwrap(), fs::read(b.join(&name)).unwrap());
    }
}

#[test]
fn thread_count_does_not_change_distances() {
    let dir = TempDir::new().unwrap();
    let (_, manifest) = small_corpus(dir.path());
    let one = ok(&[
        "--threads",
        "1",
        "distmatrix",
        "--manifest",
        &manifest,
        "--metric",
        "tfidf",
    ]);
    let out = Command::new(env!("CARGO_BIN_EXE_weftprint"))
        .args(["distmatrix", "--manifest", &manifest, "--metric", "tfidf"])
        .env("WEFTPRINT_THREADS", "4")
        .output()
        .unwrap();
    assert!(out.status.success());
    assert_eq!(String::from_utf8(out.stdout).unwrap(), one);
}

#[test]
fn bench_emits_one_row_per_metric_and_k() {
    let dir = TempDir::new().unwrap();
    let (spec, _) = small_corpus(dir.path());
    let csv = ok(&[
        "bench",
        "--spec",
        &spec,
        "--k-range",
        "1..3",
        "--metrics",
        "jaccard,hbool",
    ]);
    let rows: Vec<&str> = csv.lines().collect();
    assert_eq!(rows[0], "metric,k,seconds");
    assert_eq!(rows.len(), 7);
    assert!(rows[1].starts_with("jaccard,1,"));
    assert!(rows[6].starts_with("hbool,3,"));
}

#[test]
fn exit_codes() {
    let dir = TempDir::new().unwrap();
    assert_eq!(weftprint(&["--help"]).status.code(), Some(0));
    assert_eq!(weftprint(&["fingerprint", "--bogus"]).status.code(), Some(1));
    assert_eq!(weftprint(&["frobnicate"]).status.code(), Some(1));
    let tg = write_plain(dir.path(), "g.tg", 2);
    assert_eq!(
        weftprint(&["fingerprint", "--in", &tg, "--k", "0"]).status.code(),
        Some(1)
    );
    assert_eq!(
        weftprint(&["distmatrix", "--manifest", &tg, "--metric", "euclid"])
            .status
            .code(),
        Some(1)
    );
    assert_eq!(
        weftprint(&["bench", "--spec", &tg, "--k-range", "5..2"]).status.code(),
        Some(1)
    );

    let missing = dir.path().join("missing.tg");
    let out = weftprint(&["fingerprint", "--in", path(&missing)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).starts_with("error: "));

    let bad = dir.path().join("bad.tg");
    fs::write(&bad, "crossings 1\n0 -1 1 1\n").unwrap();
    let out = weftprint(&["fingerprint", "--in", path(&bad)]);
    assert_eq!(out.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&out.stderr).contains("node count"));
}
