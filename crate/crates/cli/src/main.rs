use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand};
use voxtok_core::pipeline::{
    build_codebook_from_manifest, corpus_statistics, decode_streams, encode_corpus, verify_corpus, PipelineConfig,
    ReportFormat, STREAM_EXTENSION, VERIFY_REPORT,
};
use voxtok_core::{BuildParams, Codebook, CorpusManifest, Execution, TraversalStrategy};

const CODEBOOK_FILE: &str = "codebook.json";

/// Lossless voxel tokenization: binvox corpora to run-length token streams and back.
#[derive(Parser)]
#[command(name = "voxtok", version)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Build a codebook over every readable object in a manifest.
    BuildCodebook {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        params: ParamArgs,
        /// Codebook file to write [default: <out>/codebook.json].
        #[arg(long)]
        codebook: Option<PathBuf>,
    },
    /// Write one token stream per object plus encode_log.csv.
    Encode {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        params: ParamArgs,
        /// Codebook to use; built (and saved here) when the file does not exist
        /// [default: <out>/codebook.json].
        #[arg(long)]
        codebook: Option<PathBuf>,
        /// Write binary streams instead of text.
        #[arg(long)]
        binary_streams: bool,
    },
    /// Decode token streams back to binvox files.
    Decode {
        /// Stream files, or directories searched for *.svtk.
        #[arg(required = true)]
        inputs: Vec<PathBuf>,
        #[arg(long)]
        codebook: PathBuf,
        #[arg(long, default_value = "out")]
        out: PathBuf,
        /// Refuse streams linearized with any other traversal.
        #[arg(long)]
        strategy: Option<TraversalStrategy>,
        #[arg(long, default_value_t = 0)]
        workers: usize,
    },
    /// Per-category mean RLE sizes and compression factors.
    Stats {
        #[command(flatten)]
        corpus: CorpusArgs,
        /// Compare snake, spiral and raster side by side.
        #[arg(long)]
        all_strategies: bool,
        #[arg(long, default_value = "csv")]
        format: ReportFormat,
    },
    /// Check every round trip for every object and traversal.
    Verify {
        #[command(flatten)]
        corpus: CorpusArgs,
        #[command(flatten)]
        params: ParamArgs,
        /// Codebook to use for its own traversal; others are built on the fly.
        #[arg(long)]
        codebook: Option<PathBuf>,
    },
    /// Scan a directory tree of .binvox files (and view images) into a manifest.
    ManifestInit {
        root: PathBuf,
        /// Manifest to write [default: <root>/manifest.jsonl].
        #[arg(long)]
        manifest: Option<PathBuf>,
    },
}

#[derive(Args)]
struct CorpusArgs {
    #[arg(long)]
    manifest: PathBuf,
    /// snake, spiral or raster.
    #[arg(long, default_value = "snake")]
    strategy: TraversalStrategy,
    /// Output directory; `stats` prints to stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
    /// Worker threads; 0 uses every core, 1 runs sequentially.
    #[arg(long, default_value_t = 0)]
    workers: usize,
}

#[derive(Args)]
struct ParamArgs {
    #[arg(long, default_value_t = BuildParams::default().min_frequency)]
    min_frequency: u64,
    #[arg(long, default_value_t = BuildParams::default().max_pattern_runs)]
    max_pattern_runs: usize,
    #[arg(long, default_value_t = BuildParams::default().max_vocab)]
    max_vocab: usize,
}

impl ParamArgs {
    fn params(&self) -> BuildParams {
        BuildParams {
            min_frequency: self.min_frequency,
            max_pattern_runs: self.max_pattern_runs,
            max_vocab: self.max_vocab,
            ..BuildParams::default()
        }
    }
}

impl CorpusArgs {
    fn out_dir(&self) -> PathBuf {
        self.out.clone().unwrap_or_else(|| PathBuf::from("out"))
    }

    fn load(&self) -> Result<CorpusManifest> {
        CorpusManifest::load(&self.manifest).with_context(|| format!("loading manifest {}", self.manifest.display()))
    }

    fn config(&self, params: BuildParams) -> Result<PipelineConfig> {
        let config = PipelineConfig {
            strategy: self.strategy,
            params,
            out_dir: self.out_dir(),
            execution: Execution::with_workers(self.workers),
            ..PipelineConfig::default()
        };
        config.validate()?;
        Ok(config)
    }
}

/// How a command ended when it did not fail outright.
enum Outcome {
    Done,
    Partial(usize),
}

fn main() -> ExitCode {
    env_logger::Builder::from_env(env_logger::Env::default().default_filter_or("info")).init();
    let cli = Cli::parse();
    match run(cli.command) {
        Ok(Outcome::Done) => ExitCode::SUCCESS,
        Ok(Outcome::Partial(n)) => {
            log::error!("{n} item(s) failed");
            ExitCode::from(1)
        }
        Err(e) => {
            log::error!("{e:#}");
            ExitCode::from(2)
        }
    }
}

fn partial(failed: usize) -> Outcome {
    if failed == 0 {
        Outcome::Done
    } else {
        Outcome::Partial(failed)
    }
}

fn report_failures(failures: &[(String, String)]) {
    for (id, err) in failures {
        log::warn!("{id}: {err}");
    }
}

fn build(manifest: &CorpusManifest, config: &PipelineConfig, path: &Path) -> Result<(Codebook, usize)> {
    let outcome = build_codebook_from_manifest(manifest, config.strategy, config.params, config.execution)?;
    report_failures(&outcome.failures);
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
    }
    outcome.codebook.save(path)?;
    log::info!(
        "built {} codebook {} with {} tokens from {} objects -> {}",
        config.strategy,
        outcome.codebook.id(),
        outcome.codebook.len(),
        outcome.objects_used,
        path.display()
    );
    Ok((outcome.codebook, outcome.failures.len()))
}

fn run(command: Command) -> Result<Outcome> {
    match command {
        Command::BuildCodebook { corpus, params, codebook } => {
            let config = corpus.config(params.params())?;
            let manifest = corpus.load()?;
            let path = codebook.unwrap_or_else(|| config.out_dir.join(CODEBOOK_FILE));
            let (_, failed) = build(&manifest, &config, &path)?;
            Ok(partial(failed))
        }
        Command::Encode {
            corpus,
            params,
            codebook,
            binary_streams,
        } => {
            let config = PipelineConfig {
                binary_streams,
                ..corpus.config(params.params())?
            };
            let manifest = corpus.load()?;
            let path = codebook.unwrap_or_else(|| config.out_dir.join(CODEBOOK_FILE));
            let book = if path.exists() {
                Codebook::load(&path).with_context(|| format!("loading codebook {}", path.display()))?
            } else {
                build(&manifest, &config, &path)?.0
            };
            if book.strategy() != config.strategy {
                bail!(
                    "codebook {} was built for {}, not {}",
                    path.display(),
                    book.strategy(),
                    config.strategy
                );
            }
            let summary = encode_corpus(&manifest, &book, &config)?;
            for row in summary.rows.iter().filter(|r| r.error.is_some()) {
                log::warn!("{}: {}", row.object_id, row.error.as_deref().unwrap_or_default());
            }
            log::info!(
                "encoded {} of {} objects; log at {}",
                summary.rows.len() - summary.failed(),
                summary.rows.len(),
                summary.log_path.display()
            );
            Ok(partial(summary.failed()))
        }
        Command::Decode {
            inputs,
            codebook,
            out,
            strategy,
            workers,
        } => {
            let book = Codebook::load(&codebook).with_context(|| format!("loading codebook {}", codebook.display()))?;
            let files = expand_inputs(&inputs)?;
            let summary = decode_streams(&files, &book, &out, strategy, Execution::with_workers(workers))?;
            for row in summary.rows.iter().filter(|r| r.error.is_some()) {
                log::warn!("{}: {}", row.input, row.error.as_deref().unwrap_or_default());
            }
            log::info!(
                "decoded {} of {} streams into {}",
                summary.rows.len() - summary.failed(),
                summary.rows.len(),
                out.display()
            );
            Ok(partial(summary.failed()))
        }
        Command::Stats {
            corpus,
            all_strategies,
            format,
        } => {
            let manifest = corpus.load()?;
            let outcome = corpus_statistics(&manifest, corpus.strategy, all_strategies, Execution::with_workers(corpus.workers))?;
            report_failures(&outcome.failures);
            match &corpus.out {
                Some(dir) => {
                    fs::create_dir_all(dir).with_context(|| format!("creating {}", dir.display()))?;
                    let path = dir.join(format!("stats.{format}"));
                    let file = fs::File::create(&path).with_context(|| format!("creating {}", path.display()))?;
                    outcome.report.write(format, std::io::BufWriter::new(file))?;
                    log::info!("wrote {}", path.display());
                }
                None => {
                    let mut stdout = std::io::stdout().lock();
                    outcome.report.write(format, &mut stdout)?;
                    stdout.flush()?;
                }
            }
            Ok(partial(outcome.failures.len()))
        }
        Command::Verify {
            corpus,
            params,
            codebook,
        } => {
            let config = corpus.config(params.params())?;
            let manifest = corpus.load()?;
            let book = codebook
                .map(|p| Codebook::load(&p).with_context(|| format!("loading codebook {}", p.display())))
                .transpose()?;
            let report = verify_corpus(&manifest, &config, book.as_ref())?;
            fs::create_dir_all(&config.out_dir).with_context(|| format!("creating {}", config.out_dir.display()))?;
            let path = config.out_dir.join(VERIFY_REPORT);
            report.write_csv(&path)?;
            for row in report.rows.iter().filter(|r| r.status == voxtok_core::pipeline::Status::Error) {
                log::warn!("{} [{}]: {}", row.object_id, row.strategy, row.detail);
            }
            log::info!(
                "{} of {} checks passed; report at {}",
                report.rows.len() - report.failed(),
                report.rows.len(),
                path.display()
            );
            Ok(partial(report.failed()))
        }
        Command::ManifestInit { root, manifest } => {
            let scanned = CorpusManifest::scan(&root).with_context(|| format!("scanning {}", root.display()))?;
            let path = manifest.unwrap_or_else(|| root.join("manifest.jsonl"));
            scanned.save(&path)?;
            log::info!("wrote {} records to {}", scanned.records.len(), path.display());
            Ok(Outcome::Done)
        }
    }
}

/// Files as given; directories contribute their `.svtk` files in name order.
fn expand_inputs(inputs: &[PathBuf]) -> Result<Vec<PathBuf>> {
    let mut files = Vec::new();
    for input in inputs {
        if input.is_dir() {
            let mut found: Vec<PathBuf> = fs::read_dir(input)
                .with_context(|| format!("reading {}", input.display()))?
                .filter_map(|e| e.ok().map(|e| e.path()))
                .filter(|p| p.is_file() && p.extension().is_some_and(|e| e == STREAM_EXTENSION))
                .collect();
            found.sort();
            files.extend(found);
        } else {
            files.push(input.clone());
        }
    }
    if files.is_empty() {
        bail!("no token streams found");
    }
    Ok(files)
}
