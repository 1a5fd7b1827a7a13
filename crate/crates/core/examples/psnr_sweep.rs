//! PSNR of the quantized image for several class counts, all cut from a
//! single merge pass.
//!
//! ```bash
//! cargo run -p agglothresh --example psnr_sweep -- [input.pgm] [2,3,5,10,25]
//! ```

use std::path::PathBuf;

use agglothresh::cli::cmd_sweep;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let input = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/camera.pgm"));
    let levels: Vec<usize> = args
        .next()
        .unwrap_or_else(|| "2,3,5,10,25".into())
        .split(',')
        .map(str::parse)
        .collect::<Result<_, _>>()?;

    let report = cmd_sweep(&input, &levels)?;
    println!("{}", input.display());
    println!(
        "{:>6} {:>12} {:>14}",
        "levels", "PSNR (mean)", "PSNR (rounded)"
    );
    for e in &report.entries {
        println!(
            "{:>6} {:>12.2} {:>14.2}",
            e.level,
            e.psnr_db_real.unwrap_or(f64::INFINITY),
            e.psnr_db_rounded.unwrap_or(f64::INFINITY)
        );
    }
    Ok(())
}
