//! Lossless voxel compression and tokenization.
//!
//! A [`VoxelGrid`] is linearized column by column along a
//! [`TraversalStrategy`], run-length encoded into an [`RleSequence`], and
//! tokenized against a [`Codebook`] into a [`TokenStream`]. Every step is
//! exactly invertible.
//!
//! ```
//! use voxtok_core::{build_codebook, encode_grid, BuildParams, Cell, Dims, TraversalStrategy, VoxelGrid};
//! use voxtok_core::stream::{decode_stream, encode_grid_tokens};
//!
//! let mut grid = VoxelGrid::new(Dims::cube(4)?)?;
//! grid.set(1, 2, 3, Cell::Full)?;
//! let rle = encode_grid(&grid, TraversalStrategy::Snake);
//! let book = build_codebook(&[rle], TraversalStrategy::Snake, BuildParams::default())?;
//! let stream = encode_grid_tokens(&grid, &book)?;
//! assert_eq!(decode_stream(&stream, &book)?, grid);
//! # Ok::<(), voxtok_core::Error>(())
//! ```

pub mod binvox;
pub mod codebook;
pub mod error;
pub mod grid;
pub mod manifest;
pub mod metrics;
pub mod par;
pub mod pipeline;
pub mod rle;
pub mod stream;
pub mod traversal;

pub use binvox::{parse_binvox, write_binvox, BinvoxHeader};
pub use codebook::{build_codebook, BuildParams, Codebook, CodebookBuilder, ScoreRule, TokenId};
pub use error::{Error, Result};
pub use grid::{Cell, Dims, VoxelGrid};
pub use manifest::{CorpusManifest, ManifestRecord};
pub use metrics::{iou, CategoryStats, IoUResult, StatsTable};
pub use par::Execution;
pub use rle::{encode_grid, rle_decode, rle_encode, CompressionReport, RleSequence, Run};
pub use stream::TokenStream;
pub use traversal::{column_order, delinearize, linearize, ColumnOrder, TraversalStrategy};
