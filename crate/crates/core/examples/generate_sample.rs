//! Regenerates `data/sample_index.csv`, the bundled 1259-day index sample.
//!
//!     cargo run -p symbio-core --example generate_sample

use std::path::PathBuf;

use symbio::synthetic::{bars_csv, index_bars};

const DAYS: usize = 1259;
const LEVEL: f64 = 3100.0;
const SEED: u64 = 20140102;

fn main() -> std::io::Result<()> {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("data/sample_index.csv");
    std::fs::write(&path, bars_csv(&index_bars(DAYS, LEVEL, SEED)))?;
    println!("wrote {}", path.display());
    Ok(())
}
