//! Median time of a complete merge run over dense synthetic histograms and
//! the fitted log-log slope.
//!
//! ```bash
//! cargo run --release -p agglothresh --example scaling_bench
//! ```

use agglothresh::bench::{loglog_slope, measure};

fn main() {
    let rows: Vec<_> = [16, 32, 64, 128, 256, 512, 1024]
        .into_iter()
        .map(|bins| measure(bins, 31))
        .collect();
    for r in &rows {
        println!("{:>5} bins  {:>10.1} µs", r.bins, r.median_ns as f64 / 1e3);
    }
    if let Some(slope) = loglog_slope(&rows) {
        println!("log-log slope {slope:.2}");
    }
}
