//! Timing harness for the full merge loop over synthetic dense histograms.

use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::engine::{full_dendrogram, thresholds_at};
use crate::histogram::Histogram;

/// Histogram with `bins` levels, every one nonempty, counts drawn from
/// `1..=1000` with a generator seeded by `bins`.
pub fn synthetic_histogram(bins: usize) -> Histogram {
    let mut rng = ChaCha8Rng::seed_from_u64(bins as u64);
    let counts = (0..bins).map(|_| rng.gen_range(1..=1000)).collect();
    Histogram::new(counts).expect("counts are positive")
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRow {
    pub bins: usize,
    pub median_ns: u64,
    /// Two-class cut of the synthetic histogram; identical across repeats.
    pub two_level_cut: Vec<u32>,
    pub ss_total: f64,
}

/// Times `repeat` complete dendrogram runs on the synthetic histogram of
/// each size and reports the median.
pub fn measure(bins: usize, repeat: usize) -> BenchRow {
    let h = synthetic_histogram(bins);
    let mut times: Vec<Duration> = Vec::with_capacity(repeat.max(1));
    let mut trace = None;
    for _ in 0..repeat.max(1) {
        let start = Instant::now();
        let t = full_dendrogram(&h);
        times.push(start.elapsed());
        trace = Some(t);
    }
    times.sort_unstable();
    let trace = trace.expect("at least one run");
    let two_level_cut = if bins >= 2 {
        thresholds_at(&trace, 2)
            .expect("two levels exist")
            .cuts()
            .to_vec()
    } else {
        Vec::new()
    };
    BenchRow {
        bins,
        median_ns: times[times.len() / 2].as_nanos() as u64,
        two_level_cut,
        ss_total: trace.ss_total(),
    }
}

/// Least-squares slope of `ln(median time)` against `ln(bins)`; `None` with
/// fewer than two distinct sizes.
pub fn loglog_slope(rows: &[BenchRow]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows
        .iter()
        .map(|r| ((r.bins as f64).ln(), (r.median_ns.max(1) as f64).ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    (pts.len() >= 2 && sxx > 0.0).then(|| sxy / sxx)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(bins: usize, ns: u64) -> BenchRow {
        BenchRow {
            bins,
            median_ns: ns,
            two_level_cut: vec![],
            ss_total: 0.0,
        }
    }

    #[test]
    fn slope_of_exact_power_law() {
        let rows: Vec<_> = [32, 64, 128, 256]
            .iter()
            .map(|&b| row(b, (b * b) as u64))
            .collect();
        assert!((loglog_slope(&rows).unwrap() - 2.0).abs() < 1e-12);
        assert_eq!(loglog_slope(&rows[..1]), None);
    }

    #[test]
    fn synthetic_is_dense_and_deterministic() {
        let h = synthetic_histogram(64);
        assert_eq!(h.nonempty_bins(), 64);
        assert_eq!(h, synthetic_histogram(64));
        let a = measure(32, 1);
        let b = measure(32, 5);
        assert_eq!(a.two_level_cut, b.two_level_cut);
        assert_eq!(a.ss_total, b.ss_total);
    }
}
