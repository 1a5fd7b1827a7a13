//! Multilevel gray-level thresholding by agglomerative merging of adjacent
//! histogram classes.
//!
//! One pass of [`engine::run_dendrogram`] records every merge down to a
//! single class; [`engine::thresholds_at`] then cuts that hierarchy at any
//! class count without re-running the loop. The within-class and
//! between-class unbiased variance estimators are carried recursively
//! through each merge.
//!
//! ```
//! use agglothresh::{full_dendrogram, thresholds_at, Histogram};
//!
//! let h = Histogram::from_pairs(256, [(1, 2), (2, 2), (5, 1)]).unwrap();
//! let trace = full_dendrogram(&h);
//! let two = thresholds_at(&trace, 2).unwrap();
//! assert_eq!(two.cuts(), &[2]);
//! assert_eq!(two.means(), &[1.5, 5.0]);
//! ```

pub mod bench;
pub mod cli;
pub mod engine;
pub mod histogram;
pub mod image;
pub mod metrics;
pub mod oracle;
pub mod pgm;
pub mod thresholds;

pub use engine::{
    build_initial, find_min_pair, full_dendrogram, merge_step, pair_distance, run_dendrogram,
    thresholds_at, ClassArray, ClassRecord, EngineError, MergeRecord, MergeTrace,
};
pub use histogram::{Histogram, HistogramError};
pub use image::{histogram_of, BinaryMask, GrayImage, Polarity};
pub use metrics::{MetricsError, MetricsReport, Psnr};
pub use pgm::{read_pgm, write_pgm, PgmError, PgmFormat};
pub use thresholds::ThresholdSet;

/// Schema version stamped into every JSON report.
pub const REPORT_VERSION: &str = "1";
