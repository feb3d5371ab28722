//! Column visit orders and grid linearization.
//!
//! A traversal picks the order in which the `(x, y)` columns of a grid are
//! visited; each visited column is then read bottom to top (z ascending).

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::grid::{Cell, Dims, VoxelGrid};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum TraversalStrategy {
    /// Boustrophedon rows: even rows (y) run +x, odd rows run -x.
    Snake,
    /// Clockwise from `(0, 0)` heading +x along the border, inward to the center.
    Spiral,
    /// Every row (y) runs +x, like a CRT scanline.
    #[serde(rename = "raster")]
    RasterScan,
}

impl TraversalStrategy {
    pub const ALL: [TraversalStrategy; 3] = [
        TraversalStrategy::Snake,
        TraversalStrategy::Spiral,
        TraversalStrategy::RasterScan,
    ];

    pub fn name(self) -> &'static str {
        match self {
            TraversalStrategy::Snake => "snake",
            TraversalStrategy::Spiral => "spiral",
            TraversalStrategy::RasterScan => "raster",
        }
    }

    /// Byte tag used in binary token streams.
    pub fn code(self) -> u8 {
        match self {
            TraversalStrategy::Snake => 0,
            TraversalStrategy::Spiral => 1,
            TraversalStrategy::RasterScan => 2,
        }
    }

    pub fn from_code(code: u8) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.code() == code)
    }
}

impl fmt::Display for TraversalStrategy {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for TraversalStrategy {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown traversal strategy {s:?} (expected snake, spiral or raster)")))
    }
}

/// A permutation of the `width * depth` columns of a grid.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct ColumnOrder {
    width: usize,
    depth: usize,
    columns: Vec<(usize, usize)>,
}

impl ColumnOrder {
    pub fn new(strategy: TraversalStrategy, width: usize, depth: usize) -> Result<Self> {
        if width == 0 || depth == 0 {
            return Err(Error::InvalidDimension(format!(
                "column grid {width}x{depth} has a zero dimension"
            )));
        }
        let columns = match strategy {
            TraversalStrategy::RasterScan => raster(width, depth),
            TraversalStrategy::Snake => snake(width, depth),
            TraversalStrategy::Spiral => spiral(width, depth),
        };
        debug_assert_eq!(columns.len(), width * depth);
        Ok(ColumnOrder { width, depth, columns })
    }

    pub fn for_dims(strategy: TraversalStrategy, dims: Dims) -> Result<Self> {
        Self::new(strategy, dims.width, dims.depth)
    }

    pub fn dims_xy(&self) -> (usize, usize) {
        (self.width, self.depth)
    }

    pub fn columns(&self) -> &[(usize, usize)] {
        &self.columns
    }

    pub fn len(&self) -> usize {
        self.columns.len()
    }

    pub fn is_empty(&self) -> bool {
        self.columns.is_empty()
    }

    /// Cells of `grid` in traversal order. The grid's x/y extents must match.
    pub fn cells<'a>(&'a self, grid: &'a VoxelGrid) -> impl Iterator<Item = Cell> + 'a {
        let dims = grid.dims();
        assert_eq!((dims.width, dims.depth), self.dims_xy(), "column order built for other dims");
        self.columns.iter().flat_map(move |&(x, y)| {
            let start = dims.column_start(x, y);
            (start..start + dims.height).map(move |i| grid.get_index(i))
        })
    }
}

fn raster(width: usize, depth: usize) -> Vec<(usize, usize)> {
    (0..depth).flat_map(|y| (0..width).map(move |x| (x, y))).collect()
}

fn snake(width: usize, depth: usize) -> Vec<(usize, usize)> {
    let mut out = Vec::with_capacity(width * depth);
    for y in 0..depth {
        if y % 2 == 0 {
            out.extend((0..width).map(|x| (x, y)));
        } else {
            out.extend((0..width).rev().map(|x| (x, y)));
        }
    }
    out
}

/// Walks forward and turns right whenever the next cell is outside the grid or
/// already visited.
fn spiral(width: usize, depth: usize) -> Vec<(usize, usize)> {
    const HEADINGS: [(isize, isize); 4] = [(1, 0), (0, 1), (-1, 0), (0, -1)];
    let total = width * depth;
    let mut visited = vec![false; total];
    let mut out = Vec::with_capacity(total);
    let (mut x, mut y, mut heading) = (0usize, 0usize, 0usize);
    loop {
        visited[y * width + x] = true;
        out.push((x, y));
        if out.len() == total {
            break;
        }
        let open = |heading: usize| {
            let (dx, dy) = HEADINGS[heading];
            let nx = x.checked_add_signed(dx).filter(|&v| v < width)?;
            let ny = y.checked_add_signed(dy).filter(|&v| v < depth)?;
            (!visited[ny * width + nx]).then_some((nx, ny))
        };
        let (nx, ny) = match open(heading) {
            Some(next) => next,
            None => {
                heading = (heading + 1) % 4;
                open(heading).expect("spiral always has an unvisited neighbour after turning")
            }
        };
        x = nx;
        y = ny;
    }
    out
}

pub fn column_order(strategy: TraversalStrategy, dims_xy: (usize, usize)) -> Result<ColumnOrder> {
    ColumnOrder::new(strategy, dims_xy.0, dims_xy.1)
}

/// Flattens a grid into `W * D * H` cells: columns in traversal order, each read z ascending.
pub fn linearize(grid: &VoxelGrid, strategy: TraversalStrategy) -> Vec<Cell> {
    let order = ColumnOrder::for_dims(strategy, grid.dims()).expect("grid dims are validated");
    linearize_with(grid, &order)
}

pub fn linearize_with(grid: &VoxelGrid, order: &ColumnOrder) -> Vec<Cell> {
    let mut out = Vec::with_capacity(grid.len());
    out.extend(order.cells(grid));
    out
}

/// Inverse of [`linearize`].
pub fn delinearize(seq: &[Cell], strategy: TraversalStrategy, dims: Dims) -> Result<VoxelGrid> {
    let order = ColumnOrder::for_dims(strategy, dims)?;
    delinearize_with(seq, &order, dims)
}

pub fn delinearize_with(seq: &[Cell], order: &ColumnOrder, dims: Dims) -> Result<VoxelGrid> {
    let mut grid = VoxelGrid::new(dims)?;
    if seq.len() != grid.len() {
        return Err(Error::InvalidArgument(format!(
            "sequence has {} cells but grid {dims} needs {}",
            seq.len(),
            grid.len()
        )));
    }
    if order.dims_xy() != (dims.width, dims.depth) {
        return Err(Error::InvalidArgument(format!(
            "column order is {:?} but grid is {dims}",
            order.dims_xy()
        )));
    }
    for (column, chunk) in order.columns().iter().zip(seq.chunks_exact(dims.height)) {
        let start = dims.column_start(column.0, column.1);
        for (z, &cell) in chunk.iter().enumerate() {
            if cell.is_full() {
                grid.set_index(start + z, Cell::Full);
            }
        }
    }
    Ok(grid)
}
