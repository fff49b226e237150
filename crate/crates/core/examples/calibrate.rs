//! Measures the lattice-approximate residuals on the reference grids and
//! writes the calibration fixture. Run once; the output is then frozen.
//!
//! cargo run --release -p fockgen --example calibrate [-- <path>]

use std::path::PathBuf;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let path = std::env::args()
        .nth(1)
        .map(PathBuf::from)
        .unwrap_or_else(|| PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures/calibration.json"));
    let cal = fockgen::calibration::calibrate()?;
    for e in &cal.entries {
        eprintln!("{:?}", e.grid);
        for (k, v) in &e.values {
            eprintln!("  {k:<28} {v:.6e}");
        }
    }
    std::fs::write(&path, serde_json::to_string_pretty(&cal)? + "\n")?;
    eprintln!("wrote {}", path.display());
    Ok(())
}
