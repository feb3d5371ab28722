//! Token streams and their on-disk forms.
//!
//! Text form (`.svtk`):
//!
//! ```text
//! SVTK1 <strategy> <W> <D> <H> <codebook-id>
//! <id> <id> <id> ...
//! ```
//!
//! Binary form: magic `SVTK`, version byte (1), strategy byte, three
//! little-endian `u16` dims, a little-endian `u32` token count, then the ids
//! as little-endian `u32`. The binary form carries no codebook id.

use std::path::Path;

use crate::codebook::{Codebook, TokenId};
use crate::error::{Error, Result};
use crate::grid::{Dims, VoxelGrid};
use crate::rle::{encode_grid, rle_decode, RleSequence};
use crate::traversal::{delinearize, TraversalStrategy};

const TEXT_MAGIC: &str = "SVTK1";
const BINARY_MAGIC: &[u8; 4] = b"SVTK";
const BINARY_VERSION: u8 = 1;
const BINARY_HEADER_LEN: usize = 4 + 1 + 1 + 6 + 4;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TokenStream {
    pub tokens: Vec<TokenId>,
    pub dims: Dims,
    pub strategy: TraversalStrategy,
    /// Id of the codebook that produced the stream; `None` for binary streams.
    pub codebook_id: Option<String>,
}

impl TokenStream {
    pub fn to_text(&self) -> Result<String> {
        let id = self
            .codebook_id
            .as_deref()
            .ok_or_else(|| Error::InvalidArgument("text streams need a codebook id".into()))?;
        let d = self.dims;
        let mut out = format!(
            "{TEXT_MAGIC} {} {} {} {} {id}\n",
            self.strategy, d.width, d.depth, d.height
        );
        let ids: Vec<String> = self.tokens.iter().map(u32::to_string).collect();
        out.push_str(&ids.join(" "));
        out.push('\n');
        Ok(out)
    }

    pub fn to_binary(&self) -> Result<Vec<u8>> {
        let dim = |v: usize| {
            u16::try_from(v).map_err(|_| Error::InvalidArgument(format!("dimension {v} does not fit a binary stream")))
        };
        let count = u32::try_from(self.tokens.len())
            .map_err(|_| Error::InvalidArgument("too many tokens for a binary stream".into()))?;
        let mut out = Vec::with_capacity(BINARY_HEADER_LEN + 4 * self.tokens.len());
        out.extend_from_slice(BINARY_MAGIC);
        out.push(BINARY_VERSION);
        out.push(self.strategy.code());
        for v in [self.dims.width, self.dims.depth, self.dims.height] {
            out.extend_from_slice(&dim(v)?.to_le_bytes());
        }
        out.extend_from_slice(&count.to_le_bytes());
        for t in &self.tokens {
            out.extend_from_slice(&t.to_le_bytes());
        }
        Ok(out)
    }

    /// Parses either form, detected from the leading bytes.
    pub fn parse(bytes: &[u8]) -> Result<Self> {
        if bytes.starts_with(BINARY_MAGIC) && bytes.get(4) == Some(&BINARY_VERSION) {
            Self::parse_binary(bytes)
        } else {
            let text = std::str::from_utf8(bytes).map_err(|_| Error::Format("token stream is neither text nor SVTK binary".into()))?;
            Self::parse_text(text)
        }
    }

    pub fn parse_text(text: &str) -> Result<Self> {
        let (header, body) = text.split_once('\n').unwrap_or((text, ""));
        let fields: Vec<&str> = header.split_whitespace().collect();
        let [magic, strategy, w, d, h, id] = fields[..] else {
            return Err(Error::Format(format!("token stream header needs 6 fields, found {}", fields.len())));
        };
        if magic != TEXT_MAGIC {
            return Err(Error::Format(format!("bad token stream magic {magic:?}")));
        }
        let strategy: TraversalStrategy = strategy.parse().map_err(|e| Error::Format(format!("{e}")))?;
        let dim = |s: &str| s.parse::<usize>().map_err(|_| Error::Format(format!("invalid dimension {s:?}")));
        let dims = Dims::new(dim(w)?, dim(d)?, dim(h)?).map_err(|e| Error::Format(e.to_string()))?;
        let tokens = body
            .split_whitespace()
            .map(|t| t.parse::<TokenId>().map_err(|_| Error::Format(format!("invalid token id {t:?}"))))
            .collect::<Result<Vec<_>>>()?;
        Ok(TokenStream {
            tokens,
            dims,
            strategy,
            codebook_id: Some(id.to_string()),
        })
    }

    pub fn parse_binary(bytes: &[u8]) -> Result<Self> {
        if bytes.len() < BINARY_HEADER_LEN || &bytes[..4] != BINARY_MAGIC {
            return Err(Error::Format("binary token stream header is truncated or has bad magic".into()));
        }
        if bytes[4] != BINARY_VERSION {
            return Err(Error::Format(format!("unsupported binary stream version {}", bytes[4])));
        }
        let strategy = TraversalStrategy::from_code(bytes[5])
            .ok_or_else(|| Error::Format(format!("unknown strategy code {}", bytes[5])))?;
        let u16_at = |i: usize| u16::from_le_bytes([bytes[i], bytes[i + 1]]) as usize;
        let dims = Dims::new(u16_at(6), u16_at(8), u16_at(10)).map_err(|e| Error::Format(e.to_string()))?;
        let count = u32::from_le_bytes(bytes[12..16].try_into().expect("4 bytes")) as usize;
        let body = &bytes[BINARY_HEADER_LEN..];
        if body.len() != count * 4 {
            return Err(Error::Format(format!(
                "binary stream declares {count} tokens but carries {} bytes of ids",
                body.len()
            )));
        }
        let tokens = body
            .chunks_exact(4)
            .map(|c| u32::from_le_bytes(c.try_into().expect("4 bytes")))
            .collect();
        Ok(TokenStream {
            tokens,
            dims,
            strategy,
            codebook_id: None,
        })
    }

    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
        Self::parse(&bytes)
    }
}

/// Tokenizes the runs of a grid with the given dims.
pub fn tokenize(rle: &RleSequence, dims: Dims, book: &Codebook) -> Result<TokenStream> {
    let cells = dims.cell_count() as u64;
    if rle.rep_sum() != cells {
        return Err(Error::Consistency(format!(
            "runs cover {} cells but grid {dims} has {cells}",
            rle.rep_sum()
        )));
    }
    Ok(TokenStream {
        tokens: book.tokenize(rle)?,
        dims,
        strategy: book.strategy(),
        codebook_id: Some(book.id().to_string()),
    })
}

fn check_compatible(stream: &TokenStream, book: &Codebook) -> Result<()> {
    if let Some(id) = &stream.codebook_id {
        if id != book.id() {
            return Err(Error::WrongCodebook {
                expected: id.clone(),
                found: book.id().to_string(),
            });
        }
    }
    if stream.strategy != book.strategy() {
        return Err(Error::InvalidArgument(format!(
            "stream was linearized with {} but the codebook is for {}",
            stream.strategy,
            book.strategy()
        )));
    }
    Ok(())
}

/// Expands a stream to canonical runs, checking codebook identity and coverage.
pub fn detokenize(stream: &TokenStream, book: &Codebook) -> Result<RleSequence> {
    check_compatible(stream, book)?;
    if stream.tokens.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "empty token stream cannot cover grid {}",
            stream.dims
        )));
    }
    let rle = book.detokenize(&stream.tokens)?;
    let cells = stream.dims.cell_count() as u64;
    if rle.rep_sum() != cells {
        return Err(Error::Consistency(format!(
            "tokens expand to {} cells but grid {} has {cells}",
            rle.rep_sum(),
            stream.dims
        )));
    }
    Ok(rle)
}

/// Grid to token stream using the codebook's traversal.
pub fn encode_grid_tokens(grid: &VoxelGrid, book: &Codebook) -> Result<TokenStream> {
    let rle = encode_grid(grid, book.strategy());
    tokenize(&rle, grid.dims(), book)
}

/// Token stream back to a grid.
pub fn decode_stream(stream: &TokenStream, book: &Codebook) -> Result<VoxelGrid> {
    let rle = detokenize(stream, book)?;
    let cells = rle_decode(&rle)?;
    delinearize(&cells, stream.strategy, stream.dims)
}
