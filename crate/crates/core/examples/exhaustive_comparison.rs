//! Compare the greedy merge result with the exhaustive scatter-optimal cut
//! for small class counts.
//!
//! ```bash
//! cargo run --release -p agglothresh --example exhaustive_comparison -- [input.pgm]
//! ```

use std::path::PathBuf;
use std::time::Instant;

use agglothresh::oracle::exhaustive_otsu;
use agglothresh::{full_dendrogram, histogram_of, read_pgm, thresholds_at};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let input = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/camera.pgm"));
    let h = histogram_of(&read_pgm(&std::fs::read(&input)?)?);

    let start = Instant::now();
    let trace = full_dendrogram(&h);
    println!("full hierarchy in {:?}", start.elapsed());

    for m in 2..=3 {
        let greedy = thresholds_at(&trace, m)?;
        let start = Instant::now();
        let best = exhaustive_otsu(&h, m)?;
        let took = start.elapsed();
        let (gs, bs) = (greedy.within_scatter(&h), best.within_scatter(&h));
        println!(
            "M={m}: merge cuts {:?} scatter {gs:.4e} | exhaustive cuts {:?} scatter {bs:.4e} ({took:?}) | ratio {:.4}",
            greedy.cuts(),
            best.cuts(),
            gs / bs
        );
    }
    Ok(())
}
