//! Binary weave matrices and their conversion into crossing graphs.
//!
//! A [`WeaveMatrix`] has one row per weft and one column per warp; a cell is
//! `true` when the warp passes over the weft at that crossing.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use thiserror::Error;

use crate::graph::{CrossingNode, TextileGraph};

#[derive(Debug, Error, PartialEq)]
pub enum PatternError {
    #[error("matrix dimensions must be at least 1x1, got {rows}x{cols}")]
    EmptyMatrix { rows: usize, cols: usize },
    #[error("expected {expected} cells for the given dimensions, got {found}")]
    CellCount { expected: usize, found: usize },
    #[error("matrix rows have different lengths")]
    Ragged,
    #[error("twill needs at least one over and one under, got {over}/{under}")]
    InvalidTwill { over: usize, under: usize },
    #[error("satin needs period >= 5, 1 < step < period - 1 and gcd(step, period) = 1, got {period}/{step}")]
    InvalidSatin { period: usize, step: usize },
    #[error("{what} must lie in [0, 1], got {value}")]
    OutOfUnitRange { what: &'static str, value: f64 },
    #[error("block size must be at least 1")]
    InvalidBlock,
    #[error("unknown pattern kind '{0}'")]
    UnknownKind(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct WeaveMatrix {
    rows: usize,
    cols: usize,
    cells: Vec<bool>,
}

impl WeaveMatrix {
    /// `cells` is row-major.
    pub fn new(rows: usize, cols: usize, cells: Vec<bool>) -> Result<Self, PatternError> {
        if rows == 0 || cols == 0 {
            return Err(PatternError::EmptyMatrix { rows, cols });
        }
        if cells.len() != rows * cols {
            return Err(PatternError::CellCount {
                expected: rows * cols,
                found: cells.len(),
            });
        }
        Ok(WeaveMatrix { rows, cols, cells })
    }

    pub fn from_rows(rows: &[Vec<bool>]) -> Result<Self, PatternError> {
        let cols = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != cols) {
            return Err(PatternError::Ragged);
        }
        WeaveMatrix::new(rows.len(), cols, rows.concat())
    }

    fn from_fn(rows: usize, cols: usize, f: impl Fn(usize, usize) -> bool) -> Result<Self, PatternError> {
        let cells = (0..rows)
            .flat_map(|i| (0..cols).map(move |j| (i, j)))
            .map(|(i, j)| f(i, j))
            .collect();
        WeaveMatrix::new(rows, cols, cells)
    }

    /// Number of wefts.
    pub fn rows(&self) -> usize {
        self.rows
    }

    /// Number of warps.
    pub fn cols(&self) -> usize {
        self.cols
    }

    #[inline]
    pub fn get(&self, row: usize, col: usize) -> bool {
        self.cells[row * self.cols + col]
    }

    pub fn cells(&self) -> &[bool] {
        &self.cells
    }

    pub fn to_rows(&self) -> Vec<Vec<bool>> {
        self.cells.chunks(self.cols).map(<[bool]>::to_vec).collect()
    }

    /// Every cell inverted: the fabric seen from the back.
    pub fn inverted(&self) -> WeaveMatrix {
        WeaveMatrix {
            rows: self.rows,
            cols: self.cols,
            cells: self.cells.iter().map(|c| !c).collect(),
        }
    }
}

impl fmt::Display for WeaveMatrix {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for row in self.cells.chunks(self.cols) {
            for &c in row {
                write!(f, "{}", if c { '1' } else { '0' })?;
            }
            writeln!(f)?;
        }
        Ok(())
    }
}

/// Weave family used to fill a matrix.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum PatternKind {
    Plain,
    /// `over` warp floats followed by `under` sinks, shifted one column per row.
    Twill {
        over: usize,
        under: usize,
    },
    /// One warp lift per `period` columns, moving `step` columns per row.
    Satin {
        period: usize,
        step: usize,
    },
    /// Every warp above every weft.
    WarpAbove,
    /// Independent cells, each lifted with probability `density`.
    Random {
        density: f64,
        seed: u64,
    },
    /// `block`x`block` tiles of density-0.5 random cells, every tile drawn
    /// from its own stream of `seed`.
    Mixed {
        block: usize,
        seed: u64,
    },
}

impl PatternKind {
    pub fn is_stochastic(&self) -> bool {
        matches!(self, PatternKind::Random { .. } | PatternKind::Mixed { .. })
    }

    /// Same kind with its seed replaced; deterministic kinds are returned as is.
    pub fn with_seed(self, seed: u64) -> PatternKind {
        match self {
            PatternKind::Random { density, .. } => PatternKind::Random { density, seed },
            PatternKind::Mixed { block, .. } => PatternKind::Mixed { block, seed },
            other => other,
        }
    }

    pub fn check(&self) -> Result<(), PatternError> {
        match *self {
            PatternKind::Twill { over, under } if over == 0 || under == 0 => {
                Err(PatternError::InvalidTwill { over, under })
            }
            PatternKind::Satin { period, step }
                if period < 5 || step <= 1 || step + 1 >= period || gcd(step, period) != 1 =>
            {
                Err(PatternError::InvalidSatin { period, step })
            }
            PatternKind::Random { density, .. } if !(0.0..=1.0).contains(&density) => {
                Err(PatternError::OutOfUnitRange {
                    what: "density",
                    value: density,
                })
            }
            PatternKind::Mixed { block: 0, .. } => Err(PatternError::InvalidBlock),
            _ => Ok(()),
        }
    }
}

/// Accepts `plain`, `twill:M/N`, `satin:P/S`, `warp-above`, `random:D` and
/// `mixed[:B]`. Seeds are left at zero.
impl FromStr for PatternKind {
    type Err = PatternError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let unknown = || PatternError::UnknownKind(s.to_string());
        let (name, args) = match s.trim().split_once(':') {
            Some((n, a)) => (n.trim(), Some(a.trim())),
            None => (s.trim(), None),
        };
        let pair = |args: Option<&str>| -> Result<(usize, usize), PatternError> {
            let (a, b) = args.and_then(|a| a.split_once('/')).ok_or_else(unknown)?;
            Ok((
                a.trim().parse().map_err(|_| unknown())?,
                b.trim().parse().map_err(|_| unknown())?,
            ))
        };
        let kind = match name {
            "plain" if args.is_none() => PatternKind::Plain,
            "warp-above" if args.is_none() => PatternKind::WarpAbove,
            "twill" => {
                let (over, under) = pair(args)?;
                PatternKind::Twill { over, under }
            }
            "satin" => {
                let (period, step) = pair(args)?;
                PatternKind::Satin { period, step }
            }
            "random" => {
                let density = args.ok_or_else(unknown)?.parse().map_err(|_| unknown())?;
                PatternKind::Random { density, seed: 0 }
            }
            "mixed" => {
                let block = match args {
                    Some(a) => a.parse().map_err(|_| unknown())?,
                    None => 4,
                };
                PatternKind::Mixed { block, seed: 0 }
            }
            _ => return Err(unknown()),
        };
        kind.check()?;
        Ok(kind)
    }
}

impl fmt::Display for PatternKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            PatternKind::Plain => write!(f, "plain"),
            PatternKind::Twill { over, under } => write!(f, "twill:{over}/{under}"),
            PatternKind::Satin { period, step } => write!(f, "satin:{period}/{step}"),
            PatternKind::WarpAbove => write!(f, "warp-above"),
            PatternKind::Random { density, .. } => write!(f, "random:{density}"),
            PatternKind::Mixed { block, .. } => write!(f, "mixed:{block}"),
        }
    }
}

fn gcd(mut a: usize, mut b: usize) -> usize {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// `cols` warps by `rows` wefts of the given weave.
pub fn weave_matrix(kind: PatternKind, cols: usize, rows: usize) -> Result<WeaveMatrix, PatternError> {
    kind.check()?;
    if rows == 0 || cols == 0 {
        return Err(PatternError::EmptyMatrix { rows, cols });
    }
    match kind {
        PatternKind::Plain => WeaveMatrix::from_fn(rows, cols, |i, j| (i + j) % 2 == 0),
        PatternKind::Twill { over, under } => {
            let period = over + under;
            // row i is row 0 shifted right by i
            WeaveMatrix::from_fn(rows, cols, |i, j| (j + period - i % period) % period < over)
        }
        PatternKind::Satin { period, step } => {
            WeaveMatrix::from_fn(rows, cols, |i, j| j % period == (i * step) % period)
        }
        PatternKind::WarpAbove => WeaveMatrix::from_fn(rows, cols, |_, _| true),
        PatternKind::Random { density, seed } => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let cells = (0..rows * cols).map(|_| rng.gen_bool(density)).collect();
            WeaveMatrix::new(rows, cols, cells)
        }
        PatternKind::Mixed { block, seed } => {
            let mut cells = vec![false; rows * cols];
            let block_cols = cols.div_ceil(block);
            for bi in 0..rows.div_ceil(block) {
                for bj in 0..block_cols {
                    let mut rng = ChaCha8Rng::seed_from_u64(seed);
                    rng.set_stream((bi * block_cols + bj) as u64);
                    for i in bi * block..((bi + 1) * block).min(rows) {
                        for j in bj * block..((bj + 1) * block).min(cols) {
                            cells[i * cols + j] = rng.gen_bool(0.5);
                        }
                    }
                }
            }
            WeaveMatrix::new(rows, cols, cells)
        }
    }
}

// Node slots inside a crossing block.
const WARP_IN: usize = 0;
const WARP_OUT: usize = 1;
const WEFT_IN: usize = 2;
const WEFT_OUT: usize = 3;

/// Crossing `(i, j)` becomes block `i * cols + j`. Warp nodes come first
/// (`0` faces row `i - 1`, `1` faces row `i + 1`), weft nodes second (`2`
/// faces column `j - 1`, `3` faces column `j + 1`). Arms at the border of the
/// grid end in thread ends.
pub fn grid_to_graph(matrix: &WeaveMatrix) -> TextileGraph {
    let (rows, cols) = (matrix.rows, matrix.cols);
    let base = |i: usize, j: usize| 4 * (i * cols + j);
    let mut nodes = Vec::with_capacity(4 * rows * cols);
    for i in 0..rows {
        for j in 0..cols {
            let b = base(i, j);
            let warp_top = matrix.get(i, j);
            let up = (i > 0).then(|| base(i - 1, j) + WARP_OUT);
            let down = (i + 1 < rows).then(|| base(i + 1, j) + WARP_IN);
            let left = (j > 0).then(|| base(i, j - 1) + WEFT_OUT);
            let right = (j + 1 < cols).then(|| base(i, j + 1) + WEFT_IN);
            nodes.push(CrossingNode::new(up, warp_top, b + WARP_OUT));
            nodes.push(CrossingNode::new(down, warp_top, b + WARP_IN));
            nodes.push(CrossingNode::new(left, !warp_top, b + WEFT_OUT));
            nodes.push(CrossingNode::new(right, !warp_top, b + WEFT_IN));
        }
    }
    TextileGraph::from_nodes_unchecked(nodes)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Transform {
    Rotate90,
    Rotate180,
    Mirror,
}

impl Transform {
    pub const ALL: [Transform; 3] = [Transform::Rotate90, Transform::Rotate180, Transform::Mirror];
}

pub fn transform(matrix: &WeaveMatrix, op: Transform) -> WeaveMatrix {
    let (rows, cols) = (matrix.rows, matrix.cols);
    match op {
        // Transpose, then reverse the row order. Warps turn into wefts, so the
        // over/under bit of every cell flips.
        Transform::Rotate90 => WeaveMatrix {
            rows: cols,
            cols: rows,
            cells: (0..cols)
                .flat_map(|r| (0..rows).map(move |c| (r, c)))
                .map(|(r, c)| !matrix.get(c, cols - 1 - r))
                .collect(),
        },
        Transform::Rotate180 => WeaveMatrix {
            rows,
            cols,
            cells: matrix.cells.iter().rev().copied().collect(),
        },
        Transform::Mirror => WeaveMatrix {
            rows,
            cols,
            cells: matrix
                .cells
                .chunks(cols)
                .flat_map(|row| row.iter().rev().copied())
                .collect(),
        },
    }
}

/// Flips each cell independently with probability `rate`.
pub fn perturb(matrix: &WeaveMatrix, rate: f64, seed: u64) -> Result<WeaveMatrix, PatternError> {
    if !(0.0..=1.0).contains(&rate) {
        return Err(PatternError::OutOfUnitRange {
            what: "perturbation rate",
            value: rate,
        });
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let cells = matrix.cells.iter().map(|&c| c ^ rng.gen_bool(rate)).collect();
    Ok(WeaveMatrix {
        rows: matrix.rows,
        cols: matrix.cols,
        cells,
    })
}
