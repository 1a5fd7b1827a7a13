//! Print the full merge trace of a histogram as JSON.
//!
//! The input may be a PGM image, a JSON array of per-level counts, or CSV
//! lines of `gray,count`:
//!
//! ```bash
//! echo '[0, 2, 2, 0, 0, 1]' > h.json
//! cargo run -p agglothresh --example dendrogram_trace -- h.json
//! printf '1,2\n2,2\n5,1\n' > h.csv
//! cargo run -p agglothresh --example dendrogram_trace -- h.csv
//! ```

use agglothresh::{full_dendrogram, histogram_of, read_pgm, Histogram};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let h = match std::env::args().nth(1) {
        None => Histogram::from_pairs(256, [(1, 2), (2, 2), (5, 1)])?,
        Some(path) => {
            let bytes = std::fs::read(&path)?;
            if path.ends_with(".json") {
                Histogram::from_json(std::str::from_utf8(&bytes)?)?
            } else if path.ends_with(".csv") {
                Histogram::from_csv(std::str::from_utf8(&bytes)?)?
            } else {
                histogram_of(&read_pgm(&bytes)?)
            }
        }
    };
    let trace = full_dendrogram(&h);
    println!("{}", serde_json::to_string_pretty(&trace.to_json())?);
    Ok(())
}
