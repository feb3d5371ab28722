//! Reader and writer for the binvox voxel format.
//!
//! A binvox file is an ASCII header followed by `(value, count)` byte pairs:
//!
//! ```text
//! #binvox 1
//! dim D1 D2 D3
//! translate TX TY TZ
//! scale S
//! data
//! <value u8><count u8> ...
//! ```
//!
//! The body nests x outermost, then binvox z, then binvox y innermost. Binvox
//! y is the vertical axis of the model, so it becomes the column axis `z` of
//! [`VoxelGrid`] and binvox z becomes the grid's `y`. With that renaming the
//! body order is exactly the grid's canonical flat order; `dim D1 D2 D3` maps
//! to `(width, depth, height)`.

use std::fmt;
use std::path::Path;

use crate::error::{Error, Result};
use crate::grid::{Cell, Dims, VoxelGrid};

const MAGIC: &str = "#binvox 1";
const MAX_COUNT: u64 = 255;

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BinvoxHeader {
    pub dims: Dims,
    /// Model-space offset, kept as the original decimal tokens.
    pub translate: [String; 3],
    /// Model-space scale, kept as the original decimal token.
    pub scale: String,
}

impl BinvoxHeader {
    pub fn new(dims: Dims) -> Self {
        BinvoxHeader {
            dims,
            translate: ["0".into(), "0".into(), "0".into()],
            scale: "1".into(),
        }
    }

    pub fn translate_values(&self) -> [f64; 3] {
        self.translate
            .each_ref()
            .map(|t| t.parse().expect("translate validated on parse"))
    }

    pub fn scale_value(&self) -> f64 {
        self.scale.parse().expect("scale validated on parse")
    }
}

impl fmt::Display for BinvoxHeader {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = self.dims;
        write!(
            f,
            "{MAGIC}\ndim {} {} {}\ntranslate {} {} {}\nscale {}\ndata\n",
            d.width, d.depth, d.height, self.translate[0], self.translate[1], self.translate[2], self.scale
        )
    }
}

fn format_err(msg: impl Into<String>) -> Error {
    Error::Format(msg.into())
}

fn parse_dim(tok: Option<&str>) -> Result<usize> {
    let tok = tok.ok_or_else(|| format_err("dim line needs three values"))?;
    let v: usize = tok
        .parse()
        .map_err(|_| format_err(format!("invalid dimension {tok:?}")))?;
    if v == 0 {
        return Err(format_err("dimension of 0"));
    }
    Ok(v)
}

fn parse_decimal(tok: Option<&str>, what: &str) -> Result<String> {
    let tok = tok.ok_or_else(|| format_err(format!("missing {what} value")))?;
    tok.parse::<f64>()
        .map_err(|_| format_err(format!("invalid {what} value {tok:?}")))?;
    Ok(tok.to_string())
}

/// Splits off one `\n`-terminated header line, returning it and the remainder.
fn next_line(bytes: &[u8]) -> Result<(&str, &[u8])> {
    let end = bytes
        .iter()
        .position(|&b| b == b'\n')
        .ok_or_else(|| format_err("header ended before the data line"))?;
    let line = std::str::from_utf8(&bytes[..end]).map_err(|_| format_err("header is not ASCII"))?;
    Ok((line.trim_end_matches('\r'), &bytes[end + 1..]))
}

fn parse_header(bytes: &[u8]) -> Result<(BinvoxHeader, &[u8])> {
    let (magic, mut rest) = next_line(bytes).map_err(|_| format_err("missing '#binvox 1' line"))?;
    if magic.trim_end() != MAGIC {
        return Err(format_err(format!("bad magic line {magic:?}, expected {MAGIC:?}")));
    }

    let mut dims = None;
    let mut translate = None;
    let mut scale = None;
    loop {
        let (line, tail) = next_line(rest)?;
        rest = tail;
        let mut toks = line.split_whitespace();
        match toks.next() {
            None => continue,
            Some(t) if t.starts_with('#') => continue,
            Some("data") => break,
            Some("dim") => {
                let d = (parse_dim(toks.next())?, parse_dim(toks.next())?, parse_dim(toks.next())?);
                dims = Some(Dims::new(d.0, d.1, d.2)?);
            }
            Some("translate") => {
                translate = Some([
                    parse_decimal(toks.next(), "translate")?,
                    parse_decimal(toks.next(), "translate")?,
                    parse_decimal(toks.next(), "translate")?,
                ]);
            }
            Some("scale") => scale = Some(parse_decimal(toks.next(), "scale")?),
            Some(other) => return Err(format_err(format!("unknown header keyword {other:?}"))),
        }
        if toks.next().is_some() {
            return Err(format_err(format!("trailing tokens on header line {line:?}")));
        }
    }

    let dims = dims.ok_or_else(|| format_err("header has no dim line"))?;
    let mut header = BinvoxHeader::new(dims);
    if let Some(t) = translate {
        header.translate = t;
    }
    if let Some(s) = scale {
        header.scale = s;
    }
    Ok((header, rest))
}

/// Parses a complete binvox file.
pub fn parse_binvox(bytes: &[u8]) -> Result<(BinvoxHeader, VoxelGrid)> {
    let (header, body) = parse_header(bytes)?;
    let mut grid = VoxelGrid::new(header.dims)?;
    let expected = grid.len() as u64;

    let mut decoded = 0u64;
    let mut pairs = body.chunks_exact(2);
    for pair in &mut pairs {
        let (value, count) = (pair[0], pair[1] as u64);
        let cell = match value {
            0 => Cell::Empty,
            1 => Cell::Full,
            v => return Err(format_err(format!("voxel value {v} at cell {decoded} is not 0 or 1"))),
        };
        if count == 0 {
            return Err(format_err(format!("zero run count at cell {decoded}")));
        }
        let end = decoded + count;
        if end > expected {
            return Err(Error::LengthMismatch {
                decoded: total_cells(body),
                expected,
            });
        }
        if cell.is_full() {
            for i in decoded..end {
                grid.set_index(i as usize, Cell::Full);
            }
        }
        decoded = end;
    }
    if !pairs.remainder().is_empty() || decoded < expected {
        return Err(Error::Truncated { decoded, expected });
    }
    Ok((header, grid))
}

/// Total cells described by a body, ignoring validity of the values.
fn total_cells(body: &[u8]) -> u64 {
    body.chunks_exact(2).map(|p| p[1] as u64).sum()
}

/// Serializes a grid; runs longer than 255 cells are split into several pairs.
pub fn write_binvox(header: &BinvoxHeader, grid: &VoxelGrid) -> Result<Vec<u8>> {
    if header.dims != grid.dims() {
        return Err(Error::InvalidArgument(format!(
            "header dims {} do not match grid dims {}",
            header.dims,
            grid.dims()
        )));
    }
    let mut out = header.to_string().into_bytes();
    let mut cells = grid.cells();
    let Some(mut current) = cells.next() else {
        return Ok(out);
    };
    let mut count = 1u64;
    let flush = |value: Cell, mut count: u64, out: &mut Vec<u8>| {
        while count > 0 {
            let n = count.min(MAX_COUNT);
            out.push(value.is_full() as u8);
            out.push(n as u8);
            count -= n;
        }
    };
    for cell in cells {
        if cell == current {
            count += 1;
        } else {
            flush(current, count, &mut out);
            current = cell;
            count = 1;
        }
    }
    flush(current, count, &mut out);
    Ok(out)
}

pub fn read_binvox_file(path: impl AsRef<Path>) -> Result<(BinvoxHeader, VoxelGrid)> {
    let path = path.as_ref();
    let bytes = std::fs::read(path).map_err(|e| Error::io(path, e))?;
    parse_binvox(&bytes)
}

pub fn write_binvox_file(path: impl AsRef<Path>, header: &BinvoxHeader, grid: &VoxelGrid) -> Result<()> {
    let path = path.as_ref();
    let bytes = write_binvox(header, grid)?;
    std::fs::write(path, bytes).map_err(|e| Error::io(path, e))
}
