//! Command surface behind the `hmt` binary. Each command reads PGM files,
//! writes images by path, and emits a JSON report to `--report` or stdout.

use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::{Parser, Subcommand, ValueEnum};
use serde::Serialize;
use thiserror::Error;

use crate::bench;
use crate::engine::{run_dendrogram, thresholds_at, EngineError, StageVariances};
use crate::image::{histogram_of, BinaryMask, GrayImage, Polarity};
use crate::metrics::{self, finite_or_null, MetricsError, MetricsReport};
use crate::oracle::{self, OracleError};
use crate::pgm::{self, PgmError, PgmFormat};
use crate::REPORT_VERSION;

#[derive(Debug, Error)]
pub enum CommandError {
    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("{path}: {source}")]
    Pgm { path: PathBuf, source: PgmError },
    #[error("usage: {0}")]
    Usage(String),
    #[error("infeasible: {0}")]
    Infeasible(String),
    #[error("dimension mismatch: {0}")]
    Dimensions(String),
    #[error("oracle guard: {0}")]
    Guard(String),
    #[error("internal: {0}")]
    Internal(String),
}

impl CommandError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CommandError::Io { .. } | CommandError::Pgm { .. } | CommandError::Usage(_) => 2,
            CommandError::Infeasible(_) => 3,
            CommandError::Dimensions(_) => 4,
            CommandError::Guard(_) => 5,
            CommandError::Internal(_) => 1,
        }
    }
}

impl From<MetricsError> for CommandError {
    fn from(e: MetricsError) -> Self {
        match e {
            MetricsError::DimensionMismatch { .. } => CommandError::Dimensions(e.to_string()),
            MetricsError::RangeMismatch { .. } => CommandError::Internal(e.to_string()),
        }
    }
}

#[derive(Debug, Parser)]
#[command(
    name = "hmt",
    version,
    about = "Hierarchical multilevel gray-level thresholding"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, ValueEnum)]
pub enum PolarityArg {
    #[default]
    Above,
    Below,
}

impl From<PolarityArg> for Polarity {
    fn from(p: PolarityArg) -> Self {
        match p {
            PolarityArg::Above => Polarity::Above,
            PolarityArg::Below => Polarity::Below,
        }
    }
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Segment an image into M classes and write the quantized image.
    Threshold {
        image: PathBuf,
        #[arg(long)]
        levels: usize,
        /// Quantized image (class means rounded half up).
        #[arg(long)]
        out: Option<PathBuf>,
        #[arg(long)]
        report: Option<PathBuf>,
        /// Side of the highest cut treated as foreground.
        #[arg(long, value_enum, default_value_t)]
        polarity: PolarityArg,
        /// Foreground mask (0/255) at the highest cut.
        #[arg(long)]
        mask: Option<PathBuf>,
        /// Write ASCII (P2) instead of binary (P5) images.
        #[arg(long)]
        ascii: bool,
    },
    /// PSNR for several class counts from one merge pass.
    Sweep {
        image: PathBuf,
        #[arg(long, value_delimiter = ',', default_value = "2,3,5,10,25")]
        levels_list: Vec<usize>,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// ME and RAE between binary images, PSNR against an optional source.
    Metrics {
        #[arg(long = "ref")]
        reference: PathBuf,
        #[arg(long)]
        test: PathBuf,
        #[arg(long)]
        src: Option<PathBuf>,
        /// `below` treats zero pixels as foreground.
        #[arg(long, value_enum, default_value_t)]
        polarity: PolarityArg,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Compare the merge result with the exhaustive scatter optimum.
    Oracle {
        image: PathBuf,
        #[arg(long)]
        levels: usize,
        #[arg(long, default_value_t = oracle::MAX_COMBINATIONS)]
        max_combinations: u128,
        #[arg(long)]
        report: Option<PathBuf>,
    },
    /// Time full merge runs on synthetic dense histograms.
    Bench {
        #[arg(long, value_delimiter = ',', default_value = "32,64,128,256")]
        bins_list: Vec<usize>,
        #[arg(long, default_value_t = 11)]
        repeat: usize,
        #[arg(long)]
        report: Option<PathBuf>,
    },
}

pub fn read_image(path: &Path) -> Result<GrayImage, CommandError> {
    let bytes = fs::read(path).map_err(|source| CommandError::Io {
        path: path.to_owned(),
        source,
    })?;
    pgm::read_pgm(&bytes).map_err(|source| CommandError::Pgm {
        path: path.to_owned(),
        source,
    })
}

fn write_file(path: &Path, bytes: &[u8]) -> Result<(), CommandError> {
    fs::write(path, bytes).map_err(|source| CommandError::Io {
        path: path.to_owned(),
        source,
    })
}

/// Pretty JSON plus a trailing newline, to `path` or stdout.
pub fn emit_json<T: Serialize>(value: &T, path: Option<&Path>) -> Result<(), CommandError> {
    let mut text =
        serde_json::to_string_pretty(value).map_err(|e| CommandError::Internal(e.to_string()))?;
    text.push('\n');
    match path {
        Some(p) => write_file(p, text.as_bytes()),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn engine_error(e: EngineError) -> CommandError {
    match e {
        EngineError::InvalidStop { .. } | EngineError::InvalidLevel { .. } => {
            CommandError::Infeasible(e.to_string())
        }
        other => CommandError::Internal(other.to_string()),
    }
}

fn require_levels(m: usize) -> Result<(), CommandError> {
    if m < 2 {
        return Err(CommandError::Usage(format!(
            "levels must be at least 2, got {m}"
        )));
    }
    Ok(())
}

fn elapsed_ms(start: Instant) -> f64 {
    start.elapsed().as_secs_f64() * 1e3
}

#[derive(Debug, Serialize)]
pub struct PhaseTimings {
    pub read_ms: f64,
    pub dendrogram_ms: f64,
    pub quantize_ms: f64,
    pub write_ms: f64,
}

#[derive(Debug, Serialize)]
pub struct QualityReport {
    pub mse_real: f64,
    #[serde(serialize_with = "finite_or_null")]
    pub psnr_db_real: Option<f64>,
    pub mse_rounded: f64,
    #[serde(serialize_with = "finite_or_null")]
    pub psnr_db_rounded: Option<f64>,
    pub foreground_pixels: usize,
}

#[derive(Debug, Serialize)]
pub struct RunReport {
    pub version: &'static str,
    pub input: String,
    pub levels: usize,
    pub thresholds: Vec<u32>,
    pub class_means: Vec<f64>,
    pub class_counts: Vec<u64>,
    pub variances: StageVariances,
    pub metrics: QualityReport,
    pub timings: PhaseTimings,
}

pub struct ThresholdOptions<'a> {
    pub levels: usize,
    pub out: Option<&'a Path>,
    pub mask: Option<&'a Path>,
    pub polarity: Polarity,
    pub format: PgmFormat,
}

pub fn cmd_threshold(image: &Path, opts: &ThresholdOptions) -> Result<RunReport, CommandError> {
    require_levels(opts.levels)?;
    let t0 = Instant::now();
    let img = read_image(image)?;
    let read_ms = elapsed_ms(t0);

    let t1 = Instant::now();
    let h = histogram_of(&img);
    let trace = run_dendrogram(&h, opts.levels).map_err(engine_error)?;
    let t = thresholds_at(&trace, opts.levels).map_err(engine_error)?;
    let dendrogram_ms = elapsed_ms(t1);

    let t2 = Instant::now();
    let quantized = metrics::quantize(&img, &t)?;
    let real = metrics::psnr(&img, &metrics::quantize_real(&img, &t)?)?;
    let rounded = metrics::psnr_images(&img, &quantized)?;
    let top_cut = *t.cuts().last().expect("at least two classes") as u8;
    let mask = BinaryMask::from_threshold(&img, top_cut, opts.polarity);
    let quantize_ms = elapsed_ms(t2);

    let t3 = Instant::now();
    if let Some(out) = opts.out {
        write_file(out, &pgm::write_pgm(&quantized, opts.format))?;
    }
    if let Some(path) = opts.mask {
        write_file(path, &pgm::write_pgm(&mask.to_image(), opts.format))?;
    }
    let write_ms = elapsed_ms(t3);

    Ok(RunReport {
        version: REPORT_VERSION,
        input: image.display().to_string(),
        levels: opts.levels,
        thresholds: t.cuts().to_vec(),
        class_means: t.means().to_vec(),
        class_counts: t.counts().to_vec(),
        variances: trace
            .variances_at(opts.levels)
            .expect("trace reaches the level"),
        metrics: QualityReport {
            mse_real: real.mse,
            psnr_db_real: Some(real.db),
            mse_rounded: rounded.mse,
            psnr_db_rounded: Some(rounded.db),
            foreground_pixels: mask.foreground_count(),
        },
        timings: PhaseTimings {
            read_ms,
            dendrogram_ms,
            quantize_ms,
            write_ms,
        },
    })
}

#[derive(Debug, Serialize)]
pub struct SweepEntry {
    pub level: usize,
    pub thresholds: Vec<u32>,
    pub mse_real: f64,
    #[serde(serialize_with = "finite_or_null")]
    pub psnr_db_real: Option<f64>,
    #[serde(serialize_with = "finite_or_null")]
    pub psnr_db_rounded: Option<f64>,
}

#[derive(Debug, Serialize)]
pub struct SweepReport {
    pub version: &'static str,
    pub input: String,
    pub entries: Vec<SweepEntry>,
}

/// Levels are sorted and deduplicated; every level comes from one trace.
pub fn cmd_sweep(image: &Path, levels: &[usize]) -> Result<SweepReport, CommandError> {
    let mut levels = levels.to_vec();
    levels.sort_unstable();
    levels.dedup();
    let Some(&lowest) = levels.first() else {
        return Err(CommandError::Usage("empty levels list".into()));
    };
    require_levels(lowest)?;

    let img = read_image(image)?;
    let h = histogram_of(&img);
    let trace = run_dendrogram(&h, lowest).map_err(engine_error)?;
    let entries = levels
        .iter()
        .map(|&m| {
            let t = thresholds_at(&trace, m).map_err(engine_error)?;
            let real = metrics::psnr(&img, &metrics::quantize_real(&img, &t)?)?;
            let rounded = metrics::psnr_images(&img, &metrics::quantize(&img, &t)?)?;
            Ok(SweepEntry {
                level: m,
                thresholds: t.cuts().to_vec(),
                mse_real: real.mse,
                psnr_db_real: Some(real.db),
                psnr_db_rounded: Some(rounded.db),
            })
        })
        .collect::<Result<Vec<_>, CommandError>>()?;
    Ok(SweepReport {
        version: REPORT_VERSION,
        input: image.display().to_string(),
        entries,
    })
}

#[derive(Debug, Serialize)]
pub struct MetricsOutput {
    pub version: &'static str,
    #[serde(flatten)]
    pub report: MetricsReport,
}

pub fn cmd_metrics(
    reference: &Path,
    test: &Path,
    src: Option<&Path>,
    polarity: Polarity,
) -> Result<MetricsOutput, CommandError> {
    let ref_img = read_image(reference)?;
    let test_img = read_image(test)?;
    let src_img = src.map(read_image).transpose()?;
    let report = MetricsReport::evaluate(
        &BinaryMask::from_nonzero(&ref_img, polarity),
        &BinaryMask::from_nonzero(&test_img, polarity),
        src_img.as_ref().map(|s| (s, &test_img)),
    )?;
    Ok(MetricsOutput {
        version: REPORT_VERSION,
        report,
    })
}

#[derive(Debug, Serialize)]
pub struct Partition {
    pub thresholds: Vec<u32>,
    pub class_means: Vec<f64>,
    pub within_scatter: f64,
}

#[derive(Debug, Serialize)]
pub struct OracleReport {
    pub version: &'static str,
    pub input: String,
    pub levels: usize,
    pub oracle: Partition,
    pub engine: Partition,
    /// Engine over oracle within-class scatter; `null` when only the oracle
    /// reaches zero.
    pub scatter_ratio: Option<f64>,
}

pub fn cmd_oracle(
    image: &Path,
    levels: usize,
    max_combinations: u128,
) -> Result<OracleReport, CommandError> {
    require_levels(levels)?;
    let img = read_image(image)?;
    let h = histogram_of(&img);
    let best =
        oracle::exhaustive_otsu_with_limit(&h, levels, max_combinations).map_err(|e| match e {
            OracleError::TooLarge(_) => CommandError::Guard(e.to_string()),
            OracleError::Infeasible { .. } => CommandError::Infeasible(e.to_string()),
            _ => CommandError::Internal(e.to_string()),
        })?;
    let trace = run_dendrogram(&h, levels).map_err(engine_error)?;
    let greedy = thresholds_at(&trace, levels).map_err(engine_error)?;

    let oracle_scatter = best.within_scatter(&h);
    let engine_scatter = greedy.within_scatter(&h);
    if engine_scatter < oracle_scatter * (1.0 - 1e-12) - 1e-9 {
        return Err(CommandError::Internal(format!(
            "engine scatter {engine_scatter} below exhaustive optimum {oracle_scatter}"
        )));
    }
    let scatter_ratio = if oracle_scatter > 0.0 {
        Some(engine_scatter / oracle_scatter)
    } else if engine_scatter == 0.0 {
        Some(1.0)
    } else {
        None
    };
    Ok(OracleReport {
        version: REPORT_VERSION,
        input: image.display().to_string(),
        levels,
        oracle: Partition {
            thresholds: best.cuts().to_vec(),
            class_means: best.means().to_vec(),
            within_scatter: oracle_scatter,
        },
        engine: Partition {
            thresholds: greedy.cuts().to_vec(),
            class_means: greedy.means().to_vec(),
            within_scatter: engine_scatter,
        },
        scatter_ratio,
    })
}

#[derive(Debug, Serialize)]
pub struct BenchReport {
    pub version: &'static str,
    pub repeat: usize,
    pub rows: Vec<bench::BenchRow>,
    pub loglog_slope: Option<f64>,
}

/// Sizes run sequentially in the order given.
pub fn cmd_bench(bins: &[usize], repeat: usize) -> Result<BenchReport, CommandError> {
    if bins.is_empty() || bins.contains(&0) {
        return Err(CommandError::Usage("bins must be positive".into()));
    }
    if repeat == 0 {
        return Err(CommandError::Usage("repeat must be positive".into()));
    }
    let rows: Vec<_> = bins.iter().map(|&b| bench::measure(b, repeat)).collect();
    Ok(BenchReport {
        version: REPORT_VERSION,
        repeat,
        loglog_slope: bench::loglog_slope(&rows),
        rows,
    })
}

/// Dispatches a parsed command line.
pub fn run(cli: Cli) -> Result<(), CommandError> {
    match cli.command {
        Command::Threshold {
            image,
            levels,
            out,
            report,
            polarity,
            mask,
            ascii,
        } => {
            let opts = ThresholdOptions {
                levels,
                out: out.as_deref(),
                mask: mask.as_deref(),
                polarity: polarity.into(),
                format: if ascii {
                    PgmFormat::Ascii
                } else {
                    PgmFormat::Binary
                },
            };
            emit_json(&cmd_threshold(&image, &opts)?, report.as_deref())
        }
        Command::Sweep {
            image,
            levels_list,
            report,
        } => emit_json(&cmd_sweep(&image, &levels_list)?, report.as_deref()),
        Command::Metrics {
            reference,
            test,
            src,
            polarity,
            report,
        } => emit_json(
            &cmd_metrics(&reference, &test, src.as_deref(), polarity.into())?,
            report.as_deref(),
        ),
        Command::Oracle {
            image,
            levels,
            max_combinations,
            report,
        } => emit_json(
            &cmd_oracle(&image, levels, max_combinations)?,
            report.as_deref(),
        ),
        Command::Bench {
            bins_list,
            repeat,
            report,
        } => emit_json(&cmd_bench(&bins_list, repeat)?, report.as_deref()),
    }
}
