//! Batch dataset operations behind the `voxtok` CLI.
//!
//! Every operation works on a [`CorpusManifest`] and processes objects
//! independently. One unreadable object is recorded as a failed row and never
//! stops the batch; outputs are written in manifest order whatever the
//! execution mode, so parallel and sequential runs produce identical bytes.

use std::fmt;
use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::binvox::{read_binvox_file, write_binvox, write_binvox_file, parse_binvox, BinvoxHeader};
use crate::codebook::{build_codebook, BuildParams, Codebook};
use crate::error::{Error, Result};
use crate::grid::VoxelGrid;
use crate::manifest::CorpusManifest;
use crate::metrics::{corpus_stats, CategoryStats, StatsTable};
use crate::par::{map_ordered, Execution};
use crate::rle::{compression_factor, encode_grid, parse_rle, rle_decode, CompressionReport, RleSequence};
use crate::stream::{decode_stream, encode_grid_tokens, TokenStream};
use crate::traversal::{delinearize, TraversalStrategy};

pub const STREAM_EXTENSION: &str = "svtk";
pub const ENCODE_LOG: &str = "encode_log.csv";
pub const DECODE_LOG: &str = "decode_log.csv";
pub const VERIFY_REPORT: &str = "verify_report.csv";

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    #[default]
    Csv,
    Json,
}

impl FromStr for ReportFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(ReportFormat::Csv),
            "json" => Ok(ReportFormat::Json),
            other => Err(Error::InvalidArgument(format!("unknown report format {other:?} (expected csv or json)"))),
        }
    }
}

impl fmt::Display for ReportFormat {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ReportFormat::Csv => "csv",
            ReportFormat::Json => "json",
        })
    }
}

#[derive(Clone, Debug)]
pub struct PipelineConfig {
    pub strategy: TraversalStrategy,
    pub params: BuildParams,
    pub out_dir: PathBuf,
    pub execution: Execution,
    pub format: ReportFormat,
    pub binary_streams: bool,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        PipelineConfig {
            strategy: TraversalStrategy::Snake,
            params: BuildParams::default(),
            out_dir: PathBuf::from("out"),
            execution: Execution::default(),
            format: ReportFormat::Csv,
            binary_streams: false,
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        if self.out_dir.as_os_str().is_empty() {
            return Err(Error::InvalidArgument("output directory is empty".into()));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Ok,
    Error,
}

fn create_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))
}

fn write_csv_rows<T: Serialize>(path: &Path, rows: &[T]) -> Result<()> {
    let file = fs::File::create(path).map_err(|e| Error::io(path, e))?;
    let mut w = csv::Writer::from_writer(file);
    for row in rows {
        w.serialize(row)?;
    }
    w.flush().map_err(|e| Error::io(path, e))
}

/// Reads every object's grid, in manifest order.
pub fn load_grids(manifest: &CorpusManifest, exec: Execution) -> Vec<Result<VoxelGrid>> {
    map_ordered(&manifest.records, exec, |r| {
        read_binvox_file(manifest.resolve(&r.binvox)).map(|(_, g)| g)
    })
}

#[derive(Debug)]
pub struct BuildOutcome {
    pub codebook: Codebook,
    pub objects_used: usize,
    /// `(object_id, error)` for objects that could not be read.
    pub failures: Vec<(String, String)>,
}

/// Builds a codebook over every readable object; fails only if none is readable.
pub fn build_codebook_from_manifest(
    manifest: &CorpusManifest,
    strategy: TraversalStrategy,
    params: BuildParams,
    exec: Execution,
) -> Result<BuildOutcome> {
    let grids = load_grids(manifest, exec);
    let mut failures = Vec::new();
    let mut ok = Vec::new();
    for (record, grid) in manifest.records.iter().zip(grids) {
        match grid {
            Ok(g) => ok.push(g),
            Err(e) => failures.push((record.object_id.clone(), e.to_string())),
        }
    }
    if ok.is_empty() {
        return Err(Error::InvalidArgument(format!(
            "none of the {} manifest objects could be read",
            manifest.records.len()
        )));
    }
    let corpus: Vec<RleSequence> = map_ordered(&ok, exec, |g| encode_grid(g, strategy));
    let codebook = build_codebook(&corpus, strategy, params)?;
    Ok(BuildOutcome {
        codebook,
        objects_used: ok.len(),
        failures,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EncodeRow {
    pub object_id: String,
    pub category: String,
    pub status: Status,
    pub rle_bytes: Option<u64>,
    pub tokens: Option<usize>,
    pub cf: Option<f64>,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct EncodeSummary {
    pub rows: Vec<EncodeRow>,
    pub log_path: PathBuf,
}

impl EncodeSummary {
    pub fn failed(&self) -> usize {
        self.rows.iter().filter(|r| r.status == Status::Error).count()
    }
}

pub fn stream_path(out_dir: &Path, stem: &str) -> PathBuf {
    out_dir.join(format!("{stem}.{STREAM_EXTENSION}"))
}

/// Writes one token stream per object plus `encode_log.csv` into the output directory.
pub fn encode_corpus(manifest: &CorpusManifest, book: &Codebook, config: &PipelineConfig) -> Result<EncodeSummary> {
    config.validate()?;
    if book.strategy() != config.strategy {
        return Err(Error::InvalidArgument(format!(
            "codebook was built for {} but {} was requested",
            book.strategy(),
            config.strategy
        )));
    }
    create_dir(&config.out_dir)?;
    let rows = map_ordered(&manifest.records, config.execution, |record| {
        let encoded = (|| -> Result<(CompressionReport, usize)> {
            let (_, grid) = read_binvox_file(manifest.resolve(&record.binvox))?;
            let rle = encode_grid(&grid, book.strategy());
            let report = compression_factor(&rle, grid.len() as u64)?;
            let stream = encode_grid_tokens(&grid, book)?;
            let bytes = if config.binary_streams {
                stream.to_binary()?
            } else {
                stream.to_text()?.into_bytes()
            };
            let path = stream_path(&config.out_dir, &record.file_stem());
            fs::write(&path, bytes).map_err(|e| Error::io(&path, e))?;
            Ok((report, stream.tokens.len()))
        })();
        match encoded {
            Ok((report, tokens)) => EncodeRow {
                object_id: record.object_id.clone(),
                category: record.category.clone(),
                status: Status::Ok,
                rle_bytes: Some(report.rle_bytes),
                tokens: Some(tokens),
                cf: Some(report.cf),
                error: None,
            },
            Err(e) => EncodeRow {
                object_id: record.object_id.clone(),
                category: record.category.clone(),
                status: Status::Error,
                rle_bytes: None,
                tokens: None,
                cf: None,
                error: Some(e.to_string()),
            },
        }
    });
    let log_path = config.out_dir.join(ENCODE_LOG);
    write_csv_rows(&log_path, &rows)?;
    Ok(EncodeSummary { rows, log_path })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DecodeRow {
    pub input: String,
    pub output: Option<String>,
    pub status: Status,
    pub error: Option<String>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecodeSummary {
    pub rows: Vec<DecodeRow>,
    pub log_path: PathBuf,
}

impl DecodeSummary {
    pub fn failed(&self) -> usize {
        self.rows.iter().filter(|r| r.status == Status::Error).count()
    }
}

/// Decodes token stream files to binvox files named after each input's stem.
///
/// Streams tied to another codebook, or linearized with a strategy other than
/// the codebook's (or `expected_strategy`), abort the whole run before any
/// file is written. Unreadable or malformed streams fail individually.
pub fn decode_streams(
    files: &[PathBuf],
    book: &Codebook,
    out_dir: &Path,
    expected_strategy: Option<TraversalStrategy>,
    exec: Execution,
) -> Result<DecodeSummary> {
    let parsed = map_ordered(files, exec, TokenStream::read);
    for (path, stream) in files.iter().zip(&parsed) {
        let Ok(stream) = stream else { continue };
        if let Some(id) = &stream.codebook_id {
            if id != book.id() {
                return Err(Error::WrongCodebook {
                    expected: id.clone(),
                    found: book.id().to_string(),
                });
            }
        }
        for want in [Some(book.strategy()), expected_strategy].into_iter().flatten() {
            if stream.strategy != want {
                return Err(Error::InvalidArgument(format!(
                    "{} was linearized with {} but {want} was expected",
                    path.display(),
                    stream.strategy
                )));
            }
        }
    }

    create_dir(out_dir)?;
    let items: Vec<_> = files.iter().zip(parsed).collect();
    let rows = map_ordered(&items, exec, |(path, stream)| {
        let input = path.display().to_string();
        let result = stream.as_ref().map_err(|e| e.to_string()).and_then(|stream| {
            let grid = decode_stream(stream, book).map_err(|e| e.to_string())?;
            let stem = path.file_stem().map(|s| s.to_string_lossy().into_owned()).unwrap_or_default();
            let out = out_dir.join(format!("{stem}.binvox"));
            write_binvox_file(&out, &BinvoxHeader::new(grid.dims()), &grid).map_err(|e| e.to_string())?;
            Ok(out.display().to_string())
        });
        match result {
            Ok(output) => DecodeRow {
                input,
                output: Some(output),
                status: Status::Ok,
                error: None,
            },
            Err(error) => DecodeRow {
                input,
                output: None,
                status: Status::Error,
                error: Some(error),
            },
        }
    });
    let log_path = out_dir.join(DECODE_LOG);
    write_csv_rows(&log_path, &rows)?;
    Ok(DecodeSummary { rows, log_path })
}

/// Mean rendered sizes per category for each of the three traversals.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonRow {
    pub category: String,
    pub object_count: u64,
    pub snake_rle_bytes: f64,
    pub spiral_rle_bytes: f64,
    pub raster_rle_bytes: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonTable {
    pub rows: Vec<ComparisonRow>,
    pub overall: ComparisonRow,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StatsReport {
    Single(StatsTable),
    Comparison(ComparisonTable),
}

#[derive(Clone, Debug, PartialEq)]
pub struct StatsOutcome {
    pub report: StatsReport,
    pub failures: Vec<(String, String)>,
}

impl StatsReport {
    pub fn write(&self, format: ReportFormat, mut out: impl Write) -> Result<()> {
        match (self, format) {
            (StatsReport::Single(t), ReportFormat::Csv) => t.write_csv(out),
            (StatsReport::Single(t), ReportFormat::Json) => t.write_json(out),
            (StatsReport::Comparison(t), ReportFormat::Csv) => {
                let mut w = csv::Writer::from_writer(out);
                for row in t.rows.iter().chain([&t.overall]) {
                    w.serialize(row)?;
                }
                w.flush().map_err(csv::Error::from)?;
                Ok(())
            }
            (StatsReport::Comparison(t), ReportFormat::Json) => {
                serde_json::to_writer_pretty(&mut out, t)?;
                out.write_all(b"\n").map_err(serde_json::Error::io)?;
                Ok(())
            }
        }
    }
}

/// Compression statistics for one traversal, or all three when `all_strategies` is set.
pub fn corpus_statistics(
    manifest: &CorpusManifest,
    strategy: TraversalStrategy,
    all_strategies: bool,
    exec: Execution,
) -> Result<StatsOutcome> {
    let strategies: Vec<TraversalStrategy> = if all_strategies {
        TraversalStrategy::ALL.to_vec()
    } else {
        vec![strategy]
    };
    let per_object = map_ordered(&manifest.records, exec, |record| -> Result<Vec<CompressionReport>> {
        let (_, grid) = read_binvox_file(manifest.resolve(&record.binvox))?;
        strategies
            .iter()
            .map(|&s| compression_factor(&encode_grid(&grid, s), grid.len() as u64))
            .collect()
    });

    let mut failures = Vec::new();
    let mut columns: Vec<Vec<(String, CompressionReport)>> = vec![Vec::new(); strategies.len()];
    for (record, result) in manifest.records.iter().zip(per_object) {
        match result {
            Ok(reports) => {
                for (column, report) in columns.iter_mut().zip(reports) {
                    column.push((record.category.clone(), report));
                }
            }
            Err(e) => failures.push((record.object_id.clone(), e.to_string())),
        }
    }
    let tables = columns.iter().map(|c| corpus_stats(c)).collect::<Result<Vec<_>>>()?;

    let report = if all_strategies {
        let row = |snake: &CategoryStats, spiral: &CategoryStats, raster: &CategoryStats| ComparisonRow {
            category: snake.category.clone(),
            object_count: snake.object_count,
            snake_rle_bytes: snake.mean_rle_bytes,
            spiral_rle_bytes: spiral.mean_rle_bytes,
            raster_rle_bytes: raster.mean_rle_bytes,
        };
        let [snake, spiral, raster] = &tables[..] else {
            unreachable!("three strategies");
        };
        StatsReport::Comparison(ComparisonTable {
            rows: snake
                .rows
                .iter()
                .zip(&spiral.rows)
                .zip(&raster.rows)
                .map(|((a, b), c)| row(a, b, c))
                .collect(),
            overall: row(&snake.overall, &spiral.overall, &raster.overall),
        })
    } else {
        StatsReport::Single(tables.into_iter().next().expect("one strategy"))
    };
    Ok(StatsOutcome { report, failures })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VerifyRow {
    pub object_id: String,
    /// Traversal checked, or `-` when the object could not be read at all.
    pub strategy: String,
    pub status: Status,
    pub detail: String,
}

#[derive(Clone, Debug, PartialEq)]
pub struct VerifyReport {
    pub rows: Vec<VerifyRow>,
}

impl VerifyReport {
    pub fn failed(&self) -> usize {
        self.rows.iter().filter(|r| r.status == Status::Error).count()
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        write_csv_rows(path, &self.rows)
    }
}

fn check(cond: bool, what: &str) -> Result<()> {
    if cond {
        Ok(())
    } else {
        Err(Error::Consistency(format!("{what} round trip changed the grid")))
    }
}

fn verify_one(grid: &VoxelGrid, book: &Codebook) -> Result<String> {
    let strategy = book.strategy();
    let rle = encode_grid(grid, strategy);
    check(parse_rle(&rle.render())? == rle, "RLE text")?;
    check(delinearize(&rle_decode(&rle)?, strategy, grid.dims())? == *grid, "RLE")?;
    let stream = encode_grid_tokens(grid, book)?;
    let reparsed = TokenStream::parse(stream.to_text()?.as_bytes())?;
    check(decode_stream(&reparsed, book)? == *grid, "token stream")?;
    let bytes = write_binvox(&BinvoxHeader::new(grid.dims()), grid)?;
    check(parse_binvox(&bytes)?.1 == *grid, "binvox")?;
    Ok(format!("{} runs, {} tokens, {} bytes", rle.len(), stream.tokens.len(), rle.rendered_len()))
}

/// Checks the full round trip of every object under every traversal.
///
/// Token round trips use `codebook` for its own strategy and a codebook built
/// over the readable objects (with `config.params`) for the others.
pub fn verify_corpus(manifest: &CorpusManifest, config: &PipelineConfig, codebook: Option<&Codebook>) -> Result<VerifyReport> {
    config.validate()?;
    let exec = config.execution;
    let grids = load_grids(manifest, exec);
    let readable: Vec<&VoxelGrid> = grids.iter().filter_map(|g| g.as_ref().ok()).collect();

    let mut books = Vec::new();
    for strategy in TraversalStrategy::ALL {
        let book = match codebook {
            Some(b) if b.strategy() == strategy => Some(b.clone()),
            _ if readable.is_empty() => None,
            _ => {
                let corpus: Vec<RleSequence> = map_ordered(&readable, exec, |g| encode_grid(g, strategy));
                Some(build_codebook(&corpus, strategy, config.params)?)
            }
        };
        books.push((strategy, book));
    }

    let items: Vec<_> = manifest.records.iter().zip(&grids).collect();
    let nested = map_ordered(&items, exec, |(record, grid)| match grid {
        Err(e) => vec![VerifyRow {
            object_id: record.object_id.clone(),
            strategy: "-".into(),
            status: Status::Error,
            detail: e.to_string(),
        }],
        Ok(grid) => books
            .iter()
            .map(|(strategy, book)| {
                let book = book.as_ref().expect("codebooks exist when any grid is readable");
                let (status, detail) = match verify_one(grid, book) {
                    Ok(d) => (Status::Ok, d),
                    Err(e) => (Status::Error, e.to_string()),
                };
                VerifyRow {
                    object_id: record.object_id.clone(),
                    strategy: strategy.to_string(),
                    status,
                    detail,
                }
            })
            .collect(),
    });
    Ok(VerifyReport {
        rows: nested.into_iter().flatten().collect(),
    })
}
