//! Score a two-class segmentation against a reference mask with
//! misclassification error and relative foreground area error.
//!
//! Here the reference is the exhaustive optimum's mask and the test is the
//! merge result's mask, both with foreground above the cut.

use std::path::PathBuf;

use agglothresh::metrics::{misclassification_error, relative_area_error, MetricsReport};
use agglothresh::oracle::exhaustive_otsu;
use agglothresh::{full_dendrogram, histogram_of, read_pgm, thresholds_at, BinaryMask, Polarity};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let input = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/camera.pgm"));
    let img = read_pgm(&std::fs::read(&input)?)?;
    let h = histogram_of(&img);

    let merged = thresholds_at(&full_dendrogram(&h), 2)?.cuts()[0] as u8;
    let optimal = exhaustive_otsu(&h, 2)?.cuts()[0] as u8;
    let reference = BinaryMask::from_threshold(&img, optimal, Polarity::Above);
    let test = BinaryMask::from_threshold(&img, merged, Polarity::Above);

    println!("cut: merge {merged}, exhaustive {optimal}");
    println!("ME  {:.4}", misclassification_error(&reference, &test)?);
    println!("RAE {:.4}", relative_area_error(&reference, &test)?);

    let report = MetricsReport::evaluate(&reference, &test, Some((&img, &test.to_image())))?;
    println!("{}", serde_json::to_string_pretty(&report)?);
    Ok(())
}
