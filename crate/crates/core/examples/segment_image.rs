//! Segment a PGM image into M gray-level classes and write the quantized
//! result.
//!
//! ```bash
//! cargo run -p agglothresh --example segment_image -- [input.pgm] [levels] [out.pgm]
//! ```
//!
//! Without arguments the bundled 512×512 camera image is split into 4
//! classes and written to `camera_4.pgm`.

use std::path::PathBuf;

use agglothresh::metrics::{psnr, quantize, quantize_real};
use agglothresh::{histogram_of, read_pgm, run_dendrogram, thresholds_at, write_pgm, PgmFormat};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let input = args
        .next()
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/data/camera.pgm"));
    let levels: usize = args.next().map(|s| s.parse()).transpose()?.unwrap_or(4);
    let out = args
        .next()
        .unwrap_or_else(|| format!("camera_{levels}.pgm"));

    let img = read_pgm(&std::fs::read(&input)?)?;
    let h = histogram_of(&img);
    println!(
        "{}: {}x{}, {} distinct gray levels",
        input.display(),
        img.width(),
        img.height(),
        h.nonempty_bins()
    );

    // Stopping at `levels` skips the merges below it.
    let trace = run_dendrogram(&h, levels)?;
    let t = thresholds_at(&trace, levels)?;
    for (k, (mean, n)) in t.means().iter().zip(t.counts()).enumerate() {
        let lo = if k == 0 { 0 } else { t.cuts()[k - 1] + 1 };
        let hi = t.cuts().get(k).copied().unwrap_or(255);
        println!("  class {k}: gray {lo:>3}..={hi:<3} mean {mean:7.2}  pixels {n}");
    }

    let quantized = quantize(&img, &t)?;
    let p = psnr(&img, &quantize_real(&img, &t)?)?;
    println!("PSNR {:.2} dB (MSE {:.3})", p.db, p.mse);
    std::fs::write(&out, write_pgm(&quantized, PgmFormat::Binary))?;
    println!("wrote {out}");
    Ok(())
}
