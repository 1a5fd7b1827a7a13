//! Gray-level histograms and their text ingestion formats.

use serde::Deserialize;
use thiserror::Error;

/// Default number of representable gray levels (8-bit images).
pub const DEFAULT_LEVELS: usize = 256;

#[derive(Debug, Error)]
pub enum HistogramError {
    #[error("histogram has no pixels")]
    EmptyHistogram,
    #[error("histogram has no gray levels")]
    NoLevels,
    #[error("gray level {gray} is outside 0..{levels}")]
    GrayOutOfRange { gray: usize, levels: usize },
    #[error("invalid JSON histogram: {0}")]
    Json(#[from] serde_json::Error),
    #[error("invalid CSV histogram: {0}")]
    Csv(#[from] csv::Error),
    #[error("invalid CSV histogram line {line}: {msg}")]
    CsvRecord { line: usize, msg: String },
}

/// Per-gray-level pixel counts.
///
/// Always holds at least one gray level and at least one pixel.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Histogram {
    counts: Vec<u64>,
    total: u64,
}

impl Histogram {
    pub fn new(counts: Vec<u64>) -> Result<Self, HistogramError> {
        if counts.is_empty() {
            return Err(HistogramError::NoLevels);
        }
        let total: u64 = counts.iter().sum();
        if total == 0 {
            return Err(HistogramError::EmptyHistogram);
        }
        Ok(Self { counts, total })
    }

    /// Builds a histogram with `levels` bins from sparse `(gray, count)` pairs.
    /// Repeated gray levels accumulate.
    pub fn from_pairs<I>(levels: usize, pairs: I) -> Result<Self, HistogramError>
    where
        I: IntoIterator<Item = (usize, u64)>,
    {
        let mut counts = vec![0u64; levels];
        for (gray, count) in pairs {
            let slot = counts
                .get_mut(gray)
                .ok_or(HistogramError::GrayOutOfRange { gray, levels })?;
            *slot += count;
        }
        Self::new(counts)
    }

    /// Parses a JSON array of `G` counts, e.g. `[0, 2, 2, 0, 0, 1]`.
    pub fn from_json(text: &str) -> Result<Self, HistogramError> {
        #[derive(Deserialize)]
        #[serde(transparent)]
        struct Counts(Vec<u64>);

        let Counts(counts) = serde_json::from_str(text)?;
        Self::new(counts)
    }

    /// Parses `gray,count` lines. The level count is the larger of 256 and
    /// the highest gray level seen plus one.
    pub fn from_csv(text: &str) -> Result<Self, HistogramError> {
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .trim(csv::Trim::All)
            .comment(Some(b'#'))
            .from_reader(text.as_bytes());
        let mut pairs = Vec::new();
        for (idx, record) in reader.records().enumerate() {
            let record = record?;
            let line = record.position().map_or(idx + 1, |p| p.line() as usize);
            if record.len() != 2 {
                return Err(HistogramError::CsvRecord {
                    line,
                    msg: format!("expected 2 fields, found {}", record.len()),
                });
            }
            let gray: usize = record[0].parse().map_err(|e| HistogramError::CsvRecord {
                line,
                msg: format!("bad gray level {:?}: {e}", &record[0]),
            })?;
            let count: u64 = record[1].parse().map_err(|e| HistogramError::CsvRecord {
                line,
                msg: format!("bad count {:?}: {e}", &record[1]),
            })?;
            pairs.push((gray, count));
        }
        let levels = pairs
            .iter()
            .map(|&(g, _)| g + 1)
            .max()
            .unwrap_or(0)
            .max(DEFAULT_LEVELS);
        Self::from_pairs(levels, pairs)
    }

    pub fn counts(&self) -> &[u64] {
        &self.counts
    }

    /// Number of representable gray levels `G`.
    pub fn levels(&self) -> usize {
        self.counts.len()
    }

    /// Total pixel count `N`.
    pub fn total(&self) -> u64 {
        self.total
    }

    pub fn nonempty_bins(&self) -> usize {
        self.counts.iter().filter(|&&c| c > 0).count()
    }

    /// Iterates `(gray, count)` over bins with at least one pixel.
    pub fn nonempty(&self) -> impl Iterator<Item = (usize, u64)> + '_ {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(g, &c)| (g, c))
    }

    /// Pixel-weighted mean gray level.
    pub fn grand_mean(&self) -> f64 {
        let weighted: f64 = self.nonempty().map(|(g, c)| g as f64 * c as f64).sum();
        weighted / self.total as f64
    }

    /// Total scatter `sum_g h(g) (g - mean)^2`.
    pub fn total_scatter(&self) -> f64 {
        let mean = self.grand_mean();
        self.nonempty()
            .map(|(g, c)| {
                let dev = g as f64 - mean;
                c as f64 * dev * dev
            })
            .sum()
    }
}
