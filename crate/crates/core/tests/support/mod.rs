//! Reference implementations used only by the tests.
#![allow(dead_code)]

use std::collections::{BTreeMap, HashMap, HashSet};

use weftprint::similarity::DistanceMatrix;
use weftprint::WeaveMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
enum Port {
    North,
    South,
    West,
    East,
}

impl Port {
    fn through(self) -> Port {
        match self {
            Port::North => Port::South,
            Port::South => Port::North,
            Port::West => Port::East,
            Port::East => Port::West,
        }
    }
}

type Vertex = ((usize, usize), Port);

/// Explicit hypergraph of a grid weave: every crossing is a hyperedge over
/// four compass ports, inter-crossing edges live in a map and the top edge
/// is a set of ports.
pub struct Hypergraph {
    crossings: Vec<(usize, usize)>,
    omega: HashMap<Vertex, Vertex>,
    top: HashSet<Vertex>,
}

impl Hypergraph {
    pub fn from_matrix(m: &WeaveMatrix) -> Self {
        let (rows, cols) = (m.rows(), m.cols());
        let mut crossings = Vec::new();
        let mut omega = HashMap::new();
        let mut top = HashSet::new();
        for i in 0..rows {
            for j in 0..cols {
                crossings.push((i, j));
                let warp_up = m.get(i, j);
                for port in [Port::North, Port::South] {
                    if warp_up {
                        top.insert(((i, j), port));
                    }
                }
                for port in [Port::West, Port::East] {
                    if !warp_up {
                        top.insert(((i, j), port));
                    }
                }
                if i + 1 < rows {
                    omega.insert(((i, j), Port::South), ((i + 1, j), Port::North));
                    omega.insert(((i + 1, j), Port::North), ((i, j), Port::South));
                }
                if j + 1 < cols {
                    omega.insert(((i, j), Port::East), ((i, j + 1), Port::West));
                    omega.insert(((i, j + 1), Port::West), ((i, j), Port::East));
                }
            }
        }
        Hypergraph { crossings, omega, top }
    }

    fn walk(&self, start: Vertex, k: usize) -> String {
        let mut labels = String::new();
        let mut current = start;
        while labels.len() < k {
            match self.omega.get(&current) {
                None => {
                    labels.push('T');
                    while labels.len() < k {
                        labels.push('0');
                    }
                }
                Some(&(crossing, port)) => {
                    let changes = self.top.contains(&current) != self.top.contains(&(crossing, port));
                    labels.push(if changes { 'A' } else { 'N' });
                    current = (crossing, port.through());
                }
            }
        }
        labels
    }

    /// Multiset of canonical neighbourhood keys in the `.fp` key syntax.
    pub fn fingerprint(&self, k: usize) -> BTreeMap<String, u32> {
        // sort with the padding symbol after every label
        let order = |s: &String| s.replace('0', "~");
        let mut out = BTreeMap::new();
        for &c in &self.crossings {
            let mut top = Vec::new();
            let mut bottom = Vec::new();
            for port in [Port::North, Port::South, Port::West, Port::East] {
                let arm = self.walk((c, port), k);
                if self.top.contains(&(c, port)) {
                    top.push(arm);
                } else {
                    bottom.push(arm);
                }
            }
            assert_eq!((top.len(), bottom.len()), (2, 2));
            top.sort_by_key(order);
            bottom.sort_by_key(order);
            let mut pairs = [top, bottom];
            pairs.sort_by_key(|p| p.iter().map(order).collect::<Vec<_>>());
            let key = format!("{},{};{},{}", pairs[0][0], pairs[0][1], pairs[1][0], pairs[1][1]);
            *out.entry(key).or_insert(0) += 1;
        }
        out
    }
}

/// Implementation fingerprint as a key-string multiset.
pub fn as_key_map(fp: &weftprint::Fingerprint) -> BTreeMap<String, u32> {
    fp.counts().entries().iter().map(|(k, c)| (k.to_string(), *c)).collect()
}

/// UPGMA recomputing every cluster distance from its members at each step.
/// Returns (left, right, distance) per merge, clusters named by min member.
pub fn brute_force_upgma(d: &DistanceMatrix) -> Vec<(usize, usize, f64)> {
    let mut clusters: Vec<Vec<usize>> = (0..d.len()).map(|i| vec![i]).collect();
    let mut merges = Vec::new();
    while clusters.len() > 1 {
        let mut best: Option<(f64, usize, usize)> = None;
        for a in 0..clusters.len() {
            for b in a + 1..clusters.len() {
                let mut sum = 0.0;
                for &r in &clusters[a] {
                    for &s in &clusters[b] {
                        sum += d.get(r, s);
                    }
                }
                let mean = sum / (clusters[a].len() * clusters[b].len()) as f64;
                let better = match best {
                    None => true,
                    Some((m, ba, bb)) => {
                        mean < m || (mean == m && (clusters[a][0], clusters[b][0]) < (clusters[ba][0], clusters[bb][0]))
                    }
                };
                if better {
                    best = Some((mean, a, b));
                }
            }
        }
        let (mean, a, b) = best.unwrap();
        let (left, right) = (clusters[a][0], clusters[b][0]);
        let moved = clusters.remove(b);
        clusters[a].extend(moved);
        clusters[a].sort_unstable();
        merges.push((left.min(right), left.max(right), mean));
    }
    merges
}

/// Seeded random symmetric matrix; `integral` draws small integers so that
/// ties occur.
pub fn random_matrix(n: usize, seed: u64, integral: bool) -> DistanceMatrix {
    use rand::{Rng, SeedableRng};
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
    let mut values = vec![0.0; n * n];
    for i in 0..n {
        for j in i + 1..n {
            let v = if integral {
                rng.gen_range(0..4) as f64
            } else {
                rng.gen::<f64>()
            };
            values[i * n + j] = v;
            values[j * n + i] = v;
        }
    }
    let ids = (0..n).map(|i| format!("item{i:02}")).collect();
    DistanceMatrix::new(ids, values).unwrap()
}
