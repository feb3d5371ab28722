//! Run-length coding of linearized cell sequences.
//!
//! Text form: `rle := run+ ; run := count letter ; count := [1-9][0-9]* ;
//! letter := 'E' | 'F'`. Rendering never inserts separators; parsing also
//! accepts a single space between runs.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Cell, VoxelGrid};
use crate::traversal::{ColumnOrder, TraversalStrategy};

/// `rep` consecutive cells of value `val`.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Run {
    pub rep: u64,
    pub val: Cell,
}

impl Run {
    pub const fn new(rep: u64, val: Cell) -> Self {
        Run { rep, val }
    }

    pub const fn empty(rep: u64) -> Self {
        Run::new(rep, Cell::Empty)
    }

    pub const fn full(rep: u64) -> Self {
        Run::new(rep, Cell::Full)
    }

    /// Length of the rendered text, e.g. 4 for `"102E"`.
    pub fn rendered_len(&self) -> usize {
        let mut digits = 1;
        let mut n = self.rep;
        while n >= 10 {
            n /= 10;
            digits += 1;
        }
        digits + 1
    }
}

impl fmt::Display for Run {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}{}", self.rep, self.val.letter())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Hash)]
pub struct RleSequence {
    runs: Vec<Run>,
}

impl RleSequence {
    /// Wraps runs as given; they need not be canonical but every `rep` must be positive.
    pub fn from_runs(runs: Vec<Run>) -> Result<Self> {
        if let Some(i) = runs.iter().position(|r| r.rep == 0) {
            return Err(Error::Format(format!("run {i} has a repetition count of 0")));
        }
        Ok(RleSequence { runs })
    }

    pub fn runs(&self) -> &[Run] {
        &self.runs
    }

    pub fn into_runs(self) -> Vec<Run> {
        self.runs
    }

    pub fn len(&self) -> usize {
        self.runs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.runs.is_empty()
    }

    /// Number of cells the sequence expands to.
    pub fn rep_sum(&self) -> u64 {
        self.runs.iter().map(|r| r.rep).sum()
    }

    /// True when no two adjacent runs share a value.
    pub fn is_canonical(&self) -> bool {
        self.runs.windows(2).all(|w| w[0].val != w[1].val)
    }

    /// Merges adjacent runs with equal values.
    pub fn canonicalize(&self) -> RleSequence {
        let mut out = RleBuilder::default();
        for run in &self.runs {
            out.push_run(*run);
        }
        out.finish()
    }

    pub fn rendered_len(&self) -> usize {
        self.runs.iter().map(Run::rendered_len).sum()
    }

    pub fn render(&self) -> String {
        render_runs(&self.runs)
    }
}

impl fmt::Display for RleSequence {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        for run in &self.runs {
            write!(f, "{run}")?;
        }
        Ok(())
    }
}

impl FromStr for RleSequence {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        parse_rle(s)
    }
}

/// Incrementally builds a canonical sequence.
#[derive(Debug, Default)]
pub struct RleBuilder {
    runs: Vec<Run>,
}

impl RleBuilder {
    #[inline]
    pub fn push(&mut self, cell: Cell) {
        self.push_run(Run::new(1, cell));
    }

    #[inline]
    pub fn push_run(&mut self, run: Run) {
        match self.runs.last_mut() {
            Some(last) if last.val == run.val => last.rep += run.rep,
            _ => self.runs.push(run),
        }
    }

    pub fn finish(self) -> RleSequence {
        RleSequence { runs: self.runs }
    }
}

pub fn render_runs(runs: &[Run]) -> String {
    use fmt::Write;
    let mut s = String::with_capacity(runs.iter().map(Run::rendered_len).sum());
    for run in runs {
        write!(s, "{run}").expect("writing to a String cannot fail");
    }
    s
}

/// Encodes cells into maximal runs.
pub fn rle_encode(seq: &[Cell]) -> Result<RleSequence> {
    encode_iter(seq.iter().copied())
}

pub fn encode_iter(cells: impl IntoIterator<Item = Cell>) -> Result<RleSequence> {
    let mut builder = RleBuilder::default();
    for cell in cells {
        builder.push(cell);
    }
    let seq = builder.finish();
    if seq.is_empty() {
        return Err(Error::InvalidArgument("cannot run-length encode an empty sequence".into()));
    }
    Ok(seq)
}

/// Linearizes and encodes a grid in one pass.
pub fn encode_grid(grid: &VoxelGrid, strategy: TraversalStrategy) -> RleSequence {
    let order = ColumnOrder::for_dims(strategy, grid.dims()).expect("grid dims are validated");
    encode_grid_with(grid, &order)
}

pub fn encode_grid_with(grid: &VoxelGrid, order: &ColumnOrder) -> RleSequence {
    encode_iter(order.cells(grid)).expect("grids have at least one cell")
}

/// Expands runs back into cells. Non-canonical input is accepted.
pub fn rle_decode(rle: &RleSequence) -> Result<Vec<Cell>> {
    let mut out = Vec::with_capacity(rle.rep_sum() as usize);
    for (i, run) in rle.runs.iter().enumerate() {
        if run.rep == 0 {
            return Err(Error::Format(format!("run {i} has a repetition count of 0")));
        }
        out.extend(std::iter::repeat_n(run.val, run.rep as usize));
    }
    Ok(out)
}

pub fn render_rle(rle: &RleSequence) -> String {
    rle.render()
}

/// Parses rendered runs, tolerating a single space between runs.
pub fn parse_rle(text: &str) -> Result<RleSequence> {
    let bytes = text.as_bytes();
    let err = |offset: usize, message: String| Error::Parse { offset, message };
    let mut runs = Vec::new();
    let mut i = 0;
    while i < bytes.len() {
        if !runs.is_empty() && bytes[i] == b' ' {
            i += 1;
            if i == bytes.len() {
                return Err(err(i - 1, "trailing space".into()));
            }
        }
        let start = i;
        match bytes[i] {
            b'0' => return Err(err(i, "count has a leading zero".into())),
            b'1'..=b'9' => {}
            b => return Err(err(i, format!("expected a count, found {:?}", b as char))),
        }
        while i < bytes.len() && bytes[i].is_ascii_digit() {
            i += 1;
        }
        let rep: u64 = text[start..i]
            .parse()
            .map_err(|_| err(start, "count does not fit in 64 bits".into()))?;
        let Some(&letter) = bytes.get(i) else {
            return Err(err(i, format!("count {rep} is missing its value letter")));
        };
        let val = Cell::from_letter(letter as char)
            .ok_or_else(|| err(i, format!("unknown value letter {:?}", letter as char)))?;
        runs.push(Run::new(rep, val));
        i += 1;
    }
    if runs.is_empty() {
        return Err(err(0, "empty run-length text".into()));
    }
    Ok(RleSequence { runs })
}

/// Size statistics of one encoded grid.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompressionReport {
    /// Bytes of the rendered run text.
    pub rle_bytes: u64,
    /// Cells in the grid.
    pub vox_count: u64,
    /// `rle_bytes / vox_count`.
    pub cf: f64,
}

impl CompressionReport {
    pub fn new(rle_bytes: u64, vox_count: u64) -> Result<Self> {
        if vox_count == 0 {
            return Err(Error::InvalidArgument("voxel count must be at least 1".into()));
        }
        Ok(CompressionReport {
            rle_bytes,
            vox_count,
            cf: rle_bytes as f64 / vox_count as f64,
        })
    }
}

pub fn compression_factor(rle: &RleSequence, vox_count: u64) -> Result<CompressionReport> {
    let sum = rle.rep_sum();
    if sum != vox_count {
        return Err(Error::Consistency(format!(
            "runs cover {sum} cells but the grid has {vox_count}"
        )));
    }
    CompressionReport::new(rle.rendered_len() as u64, vox_count)
}
