//! Crossing hypergraph of a textile structure.
//!
//! Every crossing of two threads is a block of four consecutive nodes in a
//! flat array: crossing `c` owns nodes `4c..4c + 3`. A node records the
//! node it is joined to along its thread in a neighbouring crossing (or a
//! thread end), whether it belongs to the thread lying on top, and its
//! partner on the same thread inside the crossing. Hyperedges are the
//! blocks themselves and thread ends are not stored, so the whole graph is
//! one `Vec` and every traversal step is an index lookup.

use std::fmt;
use std::fmt::Write as _;

use thiserror::Error;

/// Sentinel stored in place of a node index when a thread ends.
const TERMINAL: u32 = u32::MAX;

/// One vertex of a crossing.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct CrossingNode {
    next: u32,
    opposite: u32,
    on_top: bool,
}

impl CrossingNode {
    /// `next` is the node this one is joined to in another crossing, `None`
    /// when the thread ends here.
    pub fn new(next: Option<usize>, on_top: bool, opposite: usize) -> Self {
        CrossingNode {
            next: next.map_or(TERMINAL, |n| n as u32),
            opposite: opposite as u32,
            on_top,
        }
    }

    #[inline]
    pub fn next(&self) -> Option<usize> {
        if self.next == TERMINAL {
            None
        } else {
            Some(self.next as usize)
        }
    }

    #[inline]
    pub fn on_top(&self) -> bool {
        self.on_top
    }

    #[inline]
    pub fn opposite(&self) -> usize {
        self.opposite as usize
    }
}

/// Label of the inter-crossing edge leaving a node.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum EdgeLabel {
    /// The thread changes level between the two crossings.
    Alternating,
    /// The thread stays on the same level.
    NonAlternating,
    /// The thread ends.
    Terminated,
}

impl EdgeLabel {
    pub fn as_char(self) -> char {
        match self {
            EdgeLabel::Alternating => 'A',
            EdgeLabel::NonAlternating => 'N',
            EdgeLabel::Terminated => 'T',
        }
    }
}

impl fmt::Display for EdgeLabel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.as_char())
    }
}

/// A broken structural rule, naming the node or crossing at fault.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Violation {
    Empty,
    NodeCountNotMultipleOfFour {
        nodes: usize,
    },
    OppositeOutOfRange {
        node: usize,
        opposite: usize,
    },
    OppositeIsSelf {
        node: usize,
    },
    OppositeOutsideCrossing {
        node: usize,
        opposite: usize,
    },
    OppositeNotInvolution {
        node: usize,
        opposite: usize,
    },
    TopFlagMismatch {
        node: usize,
        opposite: usize,
    },
    TopEdgeCount {
        crossing: usize,
        count: usize,
    },
    NextOutOfRange {
        node: usize,
        next: usize,
    },
    SelfConnection {
        node: usize,
        next: usize,
    },
    AsymmetricEdge {
        node: usize,
        next: usize,
        back: Option<usize>,
    },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Violation::Empty => write!(f, "graph has no crossings"),
            Violation::NodeCountNotMultipleOfFour { nodes } => {
                write!(f, "node count {nodes} is not a multiple of four")
            }
            Violation::OppositeOutOfRange { node, opposite } => {
                write!(f, "opposite node {opposite} of node {node} out of range")
            }
            Violation::OppositeIsSelf { node } => write!(f, "node {node} is its own opposite"),
            Violation::OppositeOutsideCrossing { node, opposite } => {
                write!(f, "opposite node {opposite} of node {node} lies in another crossing")
            }
            Violation::OppositeNotInvolution { node, opposite } => {
                write!(f, "opposite of node {opposite} is not node {node}")
            }
            Violation::TopFlagMismatch { node, opposite } => {
                write!(f, "top flag of node {node} differs from its opposite node {opposite}")
            }
            Violation::TopEdgeCount { crossing, count } => {
                write!(f, "top-edge count {count} != 2 in crossing {crossing}")
            }
            Violation::NextOutOfRange { node, next } => {
                write!(f, "next node {next} of node {node} out of range")
            }
            Violation::SelfConnection { node, next } => {
                write!(f, "node {node} connects to node {next} of its own crossing")
            }
            Violation::AsymmetricEdge { node, next, back } => match back {
                Some(back) => write!(
                    f,
                    "asymmetric edge at {node}: next is {next} but next of {next} is {back}"
                ),
                None => write!(f, "asymmetric edge at {node}: next is {next} but {next} is terminated"),
            },
        }
    }
}

/// Outcome of [`TextileGraph::validate`]; empty means valid.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ValidationReport {
    pub violations: Vec<Violation>,
}

impl ValidationReport {
    pub fn is_ok(&self) -> bool {
        self.violations.is_empty()
    }
}

impl fmt::Display for ValidationReport {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.violations.is_empty() {
            return write!(f, "ok");
        }
        for (i, v) in self.violations.iter().enumerate() {
            if i > 0 {
                write!(f, "; ")?;
            }
            write!(f, "{v}")?;
        }
        Ok(())
    }
}

#[derive(Debug, Error)]
pub enum GraphError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("node count {found} not equal to 4·{crossings}")]
    NodeCount { found: usize, crossings: usize },
    #[error("line {line}: index {index} out of range for {nodes} nodes")]
    IndexOutOfRange { line: usize, index: usize, nodes: usize },
    #[error("node {index} out of range for {nodes} nodes")]
    NodeOutOfRange { index: usize, nodes: usize },
    #[error("invalid graph: {0}")]
    Invalid(ValidationReport),
}

/// Textile hypergraph in flat-array form. Immutable once built.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct TextileGraph {
    nodes: Vec<CrossingNode>,
}

impl TextileGraph {
    /// Builds a graph and rejects it unless every structural rule holds.
    pub fn from_nodes(nodes: Vec<CrossingNode>) -> Result<Self, GraphError> {
        let graph = TextileGraph { nodes };
        let report = graph.validate();
        if report.is_ok() {
            Ok(graph)
        } else {
            Err(GraphError::Invalid(report))
        }
    }

    /// Builds a graph without checking it. Traversals on a graph that fails
    /// [`validate`](Self::validate) may panic.
    pub fn from_nodes_unchecked(nodes: Vec<CrossingNode>) -> Self {
        TextileGraph { nodes }
    }

    pub fn nodes(&self) -> &[CrossingNode] {
        &self.nodes
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn crossing_count(&self) -> usize {
        self.nodes.len() / 4
    }

    #[inline]
    pub fn node(&self, index: usize) -> &CrossingNode {
        &self.nodes[index]
    }

    /// Number of arms that end in a thread end.
    pub fn terminal_count(&self) -> usize {
        self.nodes.iter().filter(|n| n.next.eq(&TERMINAL)).count()
    }

    /// Label of the edge leaving node `index` along its thread.
    pub fn edge_label(&self, index: usize) -> Result<EdgeLabel, GraphError> {
        if index >= self.nodes.len() {
            return Err(GraphError::NodeOutOfRange {
                index,
                nodes: self.nodes.len(),
            });
        }
        Ok(self.label_at(index))
    }

    #[inline]
    pub(crate) fn label_at(&self, index: usize) -> EdgeLabel {
        let node = self.nodes[index];
        if node.next == TERMINAL {
            EdgeLabel::Terminated
        } else if node.on_top != self.nodes[node.next as usize].on_top {
            EdgeLabel::Alternating
        } else {
            EdgeLabel::NonAlternating
        }
    }

    pub fn validate(&self) -> ValidationReport {
        let mut violations = Vec::new();
        let len = self.nodes.len();
        if len == 0 {
            violations.push(Violation::Empty);
            return ValidationReport { violations };
        }
        if !len.is_multiple_of(4) {
            violations.push(Violation::NodeCountNotMultipleOfFour { nodes: len });
        }

        for (i, node) in self.nodes.iter().enumerate() {
            let opp = node.opposite();
            if opp >= len {
                violations.push(Violation::OppositeOutOfRange { node: i, opposite: opp });
            } else if opp == i {
                violations.push(Violation::OppositeIsSelf { node: i });
            } else if opp / 4 != i / 4 {
                violations.push(Violation::OppositeOutsideCrossing { node: i, opposite: opp });
            } else {
                if self.nodes[opp].opposite() != i {
                    violations.push(Violation::OppositeNotInvolution { node: i, opposite: opp });
                }
                if self.nodes[opp].on_top != node.on_top {
                    violations.push(Violation::TopFlagMismatch { node: i, opposite: opp });
                }
            }

            if let Some(next) = node.next() {
                if next >= len {
                    violations.push(Violation::NextOutOfRange { node: i, next });
                } else if next / 4 == i / 4 {
                    violations.push(Violation::SelfConnection { node: i, next });
                } else {
                    let back = self.nodes[next].next();
                    if back != Some(i) {
                        violations.push(Violation::AsymmetricEdge { node: i, next, back });
                    }
                }
            }
        }

        for (crossing, block) in self.nodes.chunks_exact(4).enumerate() {
            let count = block.iter().filter(|n| n.on_top).count();
            if count != 2 {
                violations.push(Violation::TopEdgeCount { crossing, count });
            }
        }

        ValidationReport { violations }
    }

    /// Parses the line-oriented `.tg` format and validates the result.
    pub fn parse(text: &str) -> Result<Self, GraphError> {
        parse_graph(text)
    }

    /// Canonical `.tg` text.
    pub fn serialize(&self) -> String {
        let mut out = String::with_capacity(16 + self.nodes.len() * 16);
        let _ = writeln!(out, "crossings {}", self.crossing_count());
        for (i, node) in self.nodes.iter().enumerate() {
            let next = node.next().map_or(-1, |n| n as i64);
            let _ = writeln!(out, "{} {} {} {}", i, next, node.on_top as u8, node.opposite);
        }
        out
    }
}

struct Field<'a> {
    text: &'a str,
    column: usize,
}

fn split_fields(line: &str) -> Vec<Field<'_>> {
    let mut fields = Vec::new();
    let mut start = None;
    for (pos, ch) in line.char_indices() {
        match (ch.is_whitespace(), start) {
            (false, None) => start = Some(pos),
            (true, Some(s)) => {
                fields.push(Field {
                    text: &line[s..pos],
                    column: line[..s].chars().count() + 1,
                });
                start = None;
            }
            _ => {}
        }
    }
    if let Some(s) = start {
        fields.push(Field {
            text: &line[s..],
            column: line[..s].chars().count() + 1,
        });
    }
    fields
}

fn syntax(line: usize, column: usize, message: impl Into<String>) -> GraphError {
    GraphError::Syntax {
        line,
        column,
        message: message.into(),
    }
}

fn parse_int(field: &Field<'_>, line: usize, what: &str) -> Result<i64, GraphError> {
    field.text.parse::<i64>().map_err(|_| {
        syntax(
            line,
            field.column,
            format!("expected integer {what}, found '{}'", field.text),
        )
    })
}

struct RawNode {
    line: usize,
    id: i64,
    next: i64,
    top: bool,
    opposite: i64,
}

pub fn parse_graph(text: &str) -> Result<TextileGraph, GraphError> {
    let mut crossings: Option<usize> = None;
    let mut raw = Vec::new();
    let mut last_line = 0;

    for (idx, line) in text.lines().enumerate() {
        let line_no = idx + 1;
        last_line = line_no;
        let trimmed = line.trim_start();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let fields = split_fields(line);
        if crossings.is_none() {
            if fields[0].text != "crossings" {
                return Err(syntax(line_no, fields[0].column, "expected 'crossings <n>' header"));
            }
            if fields.len() != 2 {
                let column = fields.get(2).map_or(line.len() + 1, |f| f.column);
                return Err(syntax(line_no, column, "header takes exactly one value"));
            }
            let n = parse_int(&fields[1], line_no, "crossing count")?;
            if n < 1 {
                return Err(syntax(line_no, fields[1].column, "crossing count must be at least 1"));
            }
            crossings = Some(n as usize);
            continue;
        }
        if fields.len() != 4 {
            let column = fields.get(4).map_or(line.chars().count() + 1, |f| f.column);
            return Err(syntax(
                line_no,
                column,
                format!("expected 4 fields '<id> <next> <top> <opp>', found {}", fields.len()),
            ));
        }
        let id = parse_int(&fields[0], line_no, "node id")?;
        let next = parse_int(&fields[1], line_no, "next node")?;
        let top = match fields[2].text {
            "0" => false,
            "1" => true,
            other => {
                return Err(syntax(
                    line_no,
                    fields[2].column,
                    format!("top flag must be 0 or 1, found '{other}'"),
                ))
            }
        };
        let opposite = parse_int(&fields[3], line_no, "opposite node")?;
        raw.push((
            RawNode {
                line: line_no,
                id,
                next,
                top,
                opposite,
            },
            [fields[0].column, fields[1].column],
        ));
    }

    let crossings = crossings.ok_or_else(|| syntax(last_line.max(1), 1, "missing 'crossings <n>' header"))?;
    let expected = crossings
        .checked_mul(4)
        .ok_or_else(|| syntax(1, 1, "crossing count too large"))?;
    if raw.len() != expected {
        return Err(GraphError::NodeCount {
            found: raw.len(),
            crossings,
        });
    }

    let mut nodes = Vec::with_capacity(expected);
    for (position, (node, columns)) in raw.into_iter().enumerate() {
        if node.id != position as i64 {
            return Err(syntax(
                node.line,
                columns[0],
                format!("expected node id {position}, found {}", node.id),
            ));
        }
        let next = match node.next {
            -1 => None,
            n if n >= 0 && (n as usize) < expected => Some(n as usize),
            n => {
                return Err(GraphError::IndexOutOfRange {
                    line: node.line,
                    index: n.max(0) as usize,
                    nodes: expected,
                })
            }
        };
        if node.opposite < 0 || node.opposite as usize >= expected {
            return Err(GraphError::IndexOutOfRange {
                line: node.line,
                index: node.opposite.max(0) as usize,
                nodes: expected,
            });
        }
        nodes.push(CrossingNode::new(next, node.top, node.opposite as usize));
    }
    TextileGraph::from_nodes(nodes)
}
