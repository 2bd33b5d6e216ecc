//! k-neighbourhood fingerprints.
//!
//! For every crossing the four threads leaving it are followed for up to `k`
//! crossings and the labels of the edges passed are recorded. An arm that
//! reaches a thread end is padded. The two arms of the top thread and the two
//! arms of the bottom thread each form an unordered pair, and the two pairs
//! are themselves unordered. A fingerprint is the multiset of these
//! neighbourhoods over all crossings, built in `O(n k)`.
//!
//! Arms are packed two bits per symbol with the first step in the most
//! significant position, so integer order on an arm equals lexicographic
//! order on its symbols (`A < N < T < 0`).

use std::cmp::Ordering;
use std::fmt;
use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

use crate::graph::{EdgeLabel, TextileGraph};

/// Longest supported neighbourhood.
pub const MAX_K: usize = 32;

/// Neighbourhood size used when none is given.
pub const DEFAULT_K: usize = 4;

#[derive(Debug, Error, PartialEq, Eq)]
pub enum FingerprintError {
    #[error("neighbourhood size must be in 1..={MAX_K}, got {0}")]
    InvalidK(usize),
    #[error("node {index} out of range for {nodes} nodes")]
    NodeOutOfRange { index: usize, nodes: usize },
    #[error("crossing {index} out of range for {crossings} crossings")]
    CrossingOutOfRange { index: usize, crossings: usize },
    #[error("invalid neighbourhood key '{0}'")]
    InvalidKey(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[repr(u8)]
pub enum ArmSymbol {
    Alternating = 0,
    NonAlternating = 1,
    Terminated = 2,
    /// Filler after a thread end.
    Pad = 3,
}

impl ArmSymbol {
    fn from_bits(bits: u64) -> ArmSymbol {
        match bits & 3 {
            0 => ArmSymbol::Alternating,
            1 => ArmSymbol::NonAlternating,
            2 => ArmSymbol::Terminated,
            _ => ArmSymbol::Pad,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            ArmSymbol::Alternating => 'A',
            ArmSymbol::NonAlternating => 'N',
            ArmSymbol::Terminated => 'T',
            ArmSymbol::Pad => '0',
        }
    }

    fn from_char(c: char) -> Option<ArmSymbol> {
        match c {
            'A' => Some(ArmSymbol::Alternating),
            'N' => Some(ArmSymbol::NonAlternating),
            'T' => Some(ArmSymbol::Terminated),
            '0' => Some(ArmSymbol::Pad),
            _ => None,
        }
    }
}

impl From<EdgeLabel> for ArmSymbol {
    fn from(label: EdgeLabel) -> Self {
        match label {
            EdgeLabel::Alternating => ArmSymbol::Alternating,
            EdgeLabel::NonAlternating => ArmSymbol::NonAlternating,
            EdgeLabel::Terminated => ArmSymbol::Terminated,
        }
    }
}

/// Labels met along one thread, exactly `k` symbols long.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct ArmSequence {
    k: u8,
    bits: u64,
}

impl ArmSequence {
    /// Fails unless the sequence is a valid walk: at most one `T`, followed
    /// only by padding, and padding only after a `T`.
    pub fn from_symbols(symbols: &[ArmSymbol]) -> Result<Self, FingerprintError> {
        let k = symbols.len();
        let invalid = || FingerprintError::InvalidKey(symbols.iter().map(|s| s.as_char()).collect());
        if k == 0 || k > MAX_K {
            return Err(FingerprintError::InvalidK(k));
        }
        let end = symbols.iter().position(|&s| s == ArmSymbol::Terminated);
        for (i, &s) in symbols.iter().enumerate() {
            let ok = match end {
                Some(e) if i > e => s == ArmSymbol::Pad,
                _ => s != ArmSymbol::Pad,
            };
            if !ok {
                return Err(invalid());
            }
        }
        let bits = symbols.iter().fold(0u64, |acc, &s| (acc << 2) | s as u64);
        Ok(ArmSequence { k: k as u8, bits })
    }

    pub fn len(&self) -> usize {
        self.k as usize
    }

    pub fn is_empty(&self) -> bool {
        self.k == 0
    }

    pub fn symbols(&self) -> impl Iterator<Item = ArmSymbol> + '_ {
        (0..self.k).map(move |i| ArmSymbol::from_bits(self.bits >> (2 * (self.k - 1 - i))))
    }
}

impl fmt::Display for ArmSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.symbols().try_for_each(|s| f.write_char(s.as_char()))
    }
}

impl FromStr for ArmSequence {
    type Err = FingerprintError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let symbols = s
            .chars()
            .map(ArmSymbol::from_char)
            .collect::<Option<Vec<_>>>()
            .ok_or_else(|| FingerprintError::InvalidKey(s.to_string()))?;
        ArmSequence::from_symbols(&symbols)
    }
}

/// Canonical k-neighbourhood of one crossing.
///
/// Arms are sorted within each pair and the pairs are sorted against each
/// other, so equality and hashing see only the equivalence class.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Neighborhood {
    k: u8,
    arms: [u64; 4],
}

impl Neighborhood {
    fn from_packed(k: usize, top: [u64; 2], bottom: [u64; 2]) -> Self {
        let sort = |[a, b]: [u64; 2]| if a <= b { [a, b] } else { [b, a] };
        let (top, bottom) = (sort(top), sort(bottom));
        let (first, second) = if top <= bottom { (top, bottom) } else { (bottom, top) };
        Neighborhood {
            k: k as u8,
            arms: [first[0], first[1], second[0], second[1]],
        }
    }

    /// Canonicalises two arm pairs. All arms must have the same length.
    pub fn new(first: [ArmSequence; 2], second: [ArmSequence; 2]) -> Result<Self, FingerprintError> {
        let k = first[0].k;
        if [first[1], second[0], second[1]].iter().any(|a| a.k != k) {
            return Err(FingerprintError::InvalidKey(format!(
                "{},{};{},{}",
                first[0], first[1], second[0], second[1]
            )));
        }
        Ok(Neighborhood::from_packed(
            k as usize,
            [first[0].bits, first[1].bits],
            [second[0].bits, second[1].bits],
        ))
    }

    pub fn k(&self) -> usize {
        self.k as usize
    }

    /// The two canonical pairs.
    pub fn pairs(&self) -> [[ArmSequence; 2]; 2] {
        let arm = |bits| ArmSequence { k: self.k, bits };
        [
            [arm(self.arms[0]), arm(self.arms[1])],
            [arm(self.arms[2]), arm(self.arms[3])],
        ]
    }
}

impl fmt::Display for Neighborhood {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let [[a, b], [c, d]] = self.pairs();
        write!(f, "{a},{b};{c},{d}")
    }
}

impl FromStr for Neighborhood {
    type Err = FingerprintError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let invalid = || FingerprintError::InvalidKey(s.to_string());
        let (first, second) = s.split_once(';').ok_or_else(invalid)?;
        let pair = |p: &str| -> Result<[ArmSequence; 2], FingerprintError> {
            let (a, b) = p.split_once(',').ok_or_else(invalid)?;
            Ok([a.parse().map_err(|_| invalid())?, b.parse().map_err(|_| invalid())?])
        };
        Neighborhood::new(pair(first)?, pair(second)?).map_err(|_| invalid())
    }
}

/// Sparse vector of neighbourhood counts, sorted by key, zeros never stored.
#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
pub struct FrequencyVector {
    entries: Vec<(Neighborhood, u32)>,
    total: u64,
}

impl FrequencyVector {
    /// Sums duplicate keys and drops zero counts.
    pub fn from_counts(counts: impl IntoIterator<Item = (Neighborhood, u32)>) -> Self {
        let mut entries: Vec<(Neighborhood, u32)> = counts.into_iter().filter(|&(_, c)| c > 0).collect();
        entries.sort_unstable_by_key(|&(key, _)| key);
        entries.dedup_by(|next, kept| {
            if next.0 == kept.0 {
                kept.1 += next.1;
                true
            } else {
                false
            }
        });
        let total = entries.iter().map(|&(_, c)| c as u64).sum();
        FrequencyVector { entries, total }
    }

    pub fn entries(&self) -> &[(Neighborhood, u32)] {
        &self.entries
    }

    pub fn keys(&self) -> impl Iterator<Item = &Neighborhood> {
        self.entries.iter().map(|(k, _)| k)
    }

    /// Number of distinct neighbourhoods.
    pub fn support_len(&self) -> usize {
        self.entries.len()
    }

    /// Sum of all counts.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, key: &Neighborhood) -> u32 {
        self.entries
            .binary_search_by(|(k, _)| k.cmp(key))
            .map_or(0, |i| self.entries[i].1)
    }

    /// Visits keys present in both vectors in ascending key order, walking
    /// the smaller support and searching the larger one.
    pub fn for_each_common(&self, other: &FrequencyVector, mut f: impl FnMut(&Neighborhood, u32, u32)) {
        let swap = self.entries.len() > other.entries.len();
        let (small, large) = if swap { (other, self) } else { (self, other) };
        let mut rest = &large.entries[..];
        for &(key, count) in &small.entries {
            match rest.binary_search_by(|(k, _)| k.cmp(&key)) {
                Ok(i) => {
                    let other_count = rest[i].1;
                    if swap {
                        f(&key, other_count, count);
                    } else {
                        f(&key, count, other_count);
                    }
                    rest = &rest[i + 1..];
                }
                Err(i) => rest = &rest[i..],
            }
            if rest.is_empty() {
                break;
            }
        }
    }
}

/// Multiset of the neighbourhoods of every crossing of a graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Fingerprint {
    k: usize,
    counts: FrequencyVector,
}

impl Fingerprint {
    pub fn k(&self) -> usize {
        self.k
    }

    pub fn counts(&self) -> &FrequencyVector {
        &self.counts
    }

    pub fn into_counts(self) -> FrequencyVector {
        self.counts
    }

    /// Equals the crossing count of the source graph.
    pub fn total(&self) -> u64 {
        self.counts.total()
    }

    pub fn get(&self, key: &Neighborhood) -> u32 {
        self.counts.get(key)
    }

    /// `.fp` text: one `<key> <count>` line per neighbourhood in key order.
    pub fn serialize(&self) -> String {
        let mut out = String::new();
        for (key, count) in self.counts.entries() {
            let _ = writeln!(out, "{key} {count}");
        }
        out
    }

    pub fn parse(text: &str) -> Result<Self, FingerprintError> {
        let mut k = None;
        let mut counts = Vec::new();
        for (idx, line) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = line.trim();
            if line.is_empty() || line.starts_with('#') {
                continue;
            }
            let fail = |message: String| FingerprintError::Parse { line: line_no, message };
            let mut fields = line.split_whitespace();
            let (Some(key), Some(count), None) = (fields.next(), fields.next(), fields.next()) else {
                return Err(fail("expected '<key> <count>'".to_string()));
            };
            let key: Neighborhood = key.parse().map_err(|e: FingerprintError| fail(e.to_string()))?;
            let count: u32 = count.parse().map_err(|_| fail(format!("invalid count '{count}'")))?;
            if count == 0 {
                return Err(fail("count must be positive".to_string()));
            }
            match k {
                None => k = Some(key.k()),
                Some(k) if k != key.k() => return Err(fail(format!("key length {} differs from {k}", key.k()))),
                _ => {}
            }
            counts.push((key, count));
        }
        let k = k.ok_or(FingerprintError::Parse {
            line: 0,
            message: "empty fingerprint".to_string(),
        })?;
        Ok(Fingerprint {
            k,
            counts: FrequencyVector::from_counts(counts),
        })
    }
}

fn check_k(k: usize) -> Result<(), FingerprintError> {
    if k == 0 || k > MAX_K {
        Err(FingerprintError::InvalidK(k))
    } else {
        Ok(())
    }
}

/// Packed labels of the thread leaving `start`, `k` symbols.
#[inline]
fn walk_packed(graph: &TextileGraph, start: usize, k: usize) -> u64 {
    let nodes = graph.nodes();
    let mut bits = 0u64;
    let mut current = start;
    for step in 0..k {
        let node = nodes[current];
        let Some(next) = node.next() else {
            let pad = k - step - 1;
            bits = (bits << 2) | ArmSymbol::Terminated as u64;
            // 2 * pad < 64 because k <= 32
            return (bits << (2 * pad)) | ((1u64 << (2 * pad)) - 1);
        };
        let neighbour = nodes[next];
        let symbol = if node.on_top() != neighbour.on_top() {
            ArmSymbol::Alternating
        } else {
            ArmSymbol::NonAlternating
        };
        bits = (bits << 2) | symbol as u64;
        current = neighbour.opposite();
    }
    bits
}

/// Follows the thread leaving node `start` across up to `k` crossings.
pub fn arm_walk(graph: &TextileGraph, start: usize, k: usize) -> Result<ArmSequence, FingerprintError> {
    check_k(k)?;
    if start >= graph.node_count() {
        return Err(FingerprintError::NodeOutOfRange {
            index: start,
            nodes: graph.node_count(),
        });
    }
    Ok(ArmSequence {
        k: k as u8,
        bits: walk_packed(graph, start, k),
    })
}

#[inline]
fn neighborhood_unchecked(graph: &TextileGraph, crossing: usize, k: usize) -> Neighborhood {
    let base = 4 * crossing;
    let first = base;
    let partner = graph.node(first).opposite();
    // the remaining two nodes form the other thread
    let other = (base..base + 4).find(|&i| i != first && i != partner).unwrap_or(base);
    let other_partner = graph.node(other).opposite();
    let (top, bottom) = if graph.node(first).on_top() {
        ([first, partner], [other, other_partner])
    } else {
        ([other, other_partner], [first, partner])
    };
    let walk = |i| walk_packed(graph, i, k);
    Neighborhood::from_packed(k, [walk(top[0]), walk(top[1])], [walk(bottom[0]), walk(bottom[1])])
}

pub fn crossing_neighborhood(
    graph: &TextileGraph,
    crossing: usize,
    k: usize,
) -> Result<Neighborhood, FingerprintError> {
    check_k(k)?;
    if crossing >= graph.crossing_count() {
        return Err(FingerprintError::CrossingOutOfRange {
            index: crossing,
            crossings: graph.crossing_count(),
        });
    }
    Ok(neighborhood_unchecked(graph, crossing, k))
}

/// Fingerprint of a valid graph.
pub fn fingerprint(graph: &TextileGraph, k: usize) -> Result<Fingerprint, FingerprintError> {
    check_k(k)?;
    let mut all: Vec<Neighborhood> = (0..graph.crossing_count())
        .map(|c| neighborhood_unchecked(graph, c, k))
        .collect();
    all.sort_unstable();
    let mut entries: Vec<(Neighborhood, u32)> = Vec::new();
    for key in all {
        match entries.last_mut() {
            Some((last, count)) if *last == key => *count += 1,
            _ => entries.push((key, 1)),
        }
    }
    Ok(Fingerprint {
        k,
        counts: FrequencyVector::from_counts(entries),
    })
}

impl PartialOrd for ArmSequence {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Lexicographic on symbols for equal lengths; shorter arms first.
impl Ord for ArmSequence {
    fn cmp(&self, other: &Self) -> Ordering {
        self.k.cmp(&other.k).then(self.bits.cmp(&other.bits))
    }
}
