//! Dense binary occupancy grids.
//!
//! Cells are addressed by `(x, y, z)` where `z` is the column axis. The flat
//! index is `x * (depth * height) + y * height + z`, so the cells of one
//! column are contiguous and every traversal reads a column as a slice of
//! `height` consecutive indices.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Occupancy value of a single voxel.
#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Cell {
    /// Empty (`E`, 0).
    Empty,
    /// Full (`F`, 1).
    Full,
}

impl Cell {
    pub fn is_full(self) -> bool {
        self == Cell::Full
    }

    pub fn letter(self) -> char {
        match self {
            Cell::Empty => 'E',
            Cell::Full => 'F',
        }
    }

    pub fn from_letter(c: char) -> Option<Cell> {
        match c {
            'E' => Some(Cell::Empty),
            'F' => Some(Cell::Full),
            _ => None,
        }
    }
}

impl From<bool> for Cell {
    fn from(full: bool) -> Self {
        if full {
            Cell::Full
        } else {
            Cell::Empty
        }
    }
}

impl fmt::Display for Cell {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

/// Grid extents along x (width), y (depth) and z (height).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Dims {
    pub width: usize,
    pub depth: usize,
    pub height: usize,
}

impl Dims {
    pub fn new(width: usize, depth: usize, height: usize) -> Result<Self> {
        let dims = Dims {
            width,
            depth,
            height,
        };
        dims.validate()?;
        Ok(dims)
    }

    /// The 32x32x32 volume used for ShapeNet voxelizations.
    pub const fn standard() -> Self {
        Dims {
            width: 32,
            depth: 32,
            height: 32,
        }
    }

    pub fn cube(side: usize) -> Result<Self> {
        Self::new(side, side, side)
    }

    pub fn validate(&self) -> Result<()> {
        if self.width == 0 || self.depth == 0 || self.height == 0 {
            return Err(Error::InvalidDimension(format!(
                "all dimensions must be at least 1, got {self}"
            )));
        }
        self.width
            .checked_mul(self.depth)
            .and_then(|v| v.checked_mul(self.height))
            .ok_or_else(|| Error::InvalidDimension(format!("{self} overflows the address space")))?;
        Ok(())
    }

    pub fn cell_count(&self) -> usize {
        self.width * self.depth * self.height
    }

    pub fn column_count(&self) -> usize {
        self.width * self.depth
    }

    pub fn contains(&self, x: usize, y: usize, z: usize) -> bool {
        x < self.width && y < self.depth && z < self.height
    }

    /// Flat index of `(x, y, z)`; callers must ensure the coordinates are in range.
    #[inline]
    pub fn index(&self, x: usize, y: usize, z: usize) -> usize {
        (x * self.depth + y) * self.height + z
    }

    /// Flat index of the bottom cell (z = 0) of column `(x, y)`.
    #[inline]
    pub fn column_start(&self, x: usize, y: usize) -> usize {
        (x * self.depth + y) * self.height
    }

    pub fn coords(&self, index: usize) -> (usize, usize, usize) {
        let z = index % self.height;
        let column = index / self.height;
        (column / self.depth, column % self.depth, z)
    }
}

impl Default for Dims {
    fn default() -> Self {
        Self::standard()
    }
}

impl fmt::Display for Dims {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}x{}x{}", self.width, self.depth, self.height)
    }
}

const WORD_BITS: usize = 64;

/// Bit-packed binary occupancy volume.
#[derive(Clone, PartialEq, Eq, Hash)]
pub struct VoxelGrid {
    dims: Dims,
    bits: Vec<u64>,
}

impl VoxelGrid {
    /// Creates a grid with every cell empty.
    pub fn new(dims: Dims) -> Result<Self> {
        dims.validate()?;
        let words = dims.cell_count().div_ceil(WORD_BITS);
        Ok(VoxelGrid {
            dims,
            bits: vec![0; words],
        })
    }

    pub fn from_fn(dims: Dims, mut f: impl FnMut(usize, usize, usize) -> bool) -> Result<Self> {
        let mut grid = Self::new(dims)?;
        for x in 0..dims.width {
            for y in 0..dims.depth {
                for z in 0..dims.height {
                    if f(x, y, z) {
                        grid.set_index(dims.index(x, y, z), Cell::Full);
                    }
                }
            }
        }
        Ok(grid)
    }

    /// Builds a grid from cells given in canonical flat order.
    pub fn from_cells(dims: Dims, cells: impl IntoIterator<Item = Cell>) -> Result<Self> {
        let mut grid = Self::new(dims)?;
        let mut n = 0usize;
        for cell in cells {
            if n >= dims.cell_count() {
                return Err(Error::InvalidArgument(format!(
                    "more than {} cells supplied for grid {dims}",
                    dims.cell_count()
                )));
            }
            if cell.is_full() {
                grid.set_index(n, Cell::Full);
            }
            n += 1;
        }
        if n != dims.cell_count() {
            return Err(Error::InvalidArgument(format!(
                "{n} cells supplied for grid {dims} of {} cells",
                dims.cell_count()
            )));
        }
        Ok(grid)
    }

    pub fn dims(&self) -> Dims {
        self.dims
    }

    pub fn len(&self) -> usize {
        self.dims.cell_count()
    }

    pub fn is_empty(&self) -> bool {
        self.occupied_count() == 0
    }

    pub fn get(&self, x: usize, y: usize, z: usize) -> Result<Cell> {
        self.check_bounds(x, y, z)?;
        Ok(self.get_index(self.dims.index(x, y, z)))
    }

    pub fn set(&mut self, x: usize, y: usize, z: usize, value: Cell) -> Result<()> {
        self.check_bounds(x, y, z)?;
        self.set_index(self.dims.index(x, y, z), value);
        Ok(())
    }

    /// Reads the cell at a canonical flat index.
    ///
    /// Panics if `index >= self.len()`.
    #[inline]
    pub fn get_index(&self, index: usize) -> Cell {
        assert!(index < self.len(), "flat index {index} out of range");
        Cell::from(self.bits[index / WORD_BITS] >> (index % WORD_BITS) & 1 == 1)
    }

    /// Writes the cell at a canonical flat index.
    ///
    /// Panics if `index >= self.len()`.
    #[inline]
    pub fn set_index(&mut self, index: usize, value: Cell) {
        assert!(index < self.len(), "flat index {index} out of range");
        let mask = 1u64 << (index % WORD_BITS);
        let word = &mut self.bits[index / WORD_BITS];
        match value {
            Cell::Full => *word |= mask,
            Cell::Empty => *word &= !mask,
        }
    }

    pub fn occupied_count(&self) -> usize {
        // Bits past the last cell are never set, so whole-word popcounts are exact.
        self.bits.iter().map(|w| w.count_ones() as usize).sum()
    }

    /// Cells in canonical flat order.
    pub fn cells(&self) -> impl Iterator<Item = Cell> + '_ {
        (0..self.len()).map(move |i| self.get_index(i))
    }

    /// Backing words; bit `i % 64` of word `i / 64` holds cell `i`.
    pub fn words(&self) -> &[u64] {
        &self.bits
    }

    fn check_bounds(&self, x: usize, y: usize, z: usize) -> Result<()> {
        if self.dims.contains(x, y, z) {
            Ok(())
        } else {
            Err(Error::OutOfBounds {
                x,
                y,
                z,
                dims: self.dims,
            })
        }
    }
}

impl fmt::Debug for VoxelGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("VoxelGrid")
            .field("dims", &self.dims)
            .field("occupied", &self.occupied_count())
            .finish()
    }
}
