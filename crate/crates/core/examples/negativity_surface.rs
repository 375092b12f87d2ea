//! Logarithmic negativity over a `(κ₁, κ₂)` grid, written as CSV, and the
//! zero curve it traces against `κ₂ = κ₁/√(2κ₁² + 1)`.
//!
//! `cargo run --release --example negativity_surface -- surface.csv`

use faraday::dsl::{parse, sweep, Grid};
use faraday::protocols::eraser_kappa2;

const SCRIPT: &str = include_str!("../scripts/eraser_sweep.proto");

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let (n1, n2) = (50, 50);
    let grid: Grid = format!("k1=0.04:2:{n1};k2=0.02:1:{n2}").parse()?;
    let table = sweep(&parse(SCRIPT)?, &grid, 0, 0)?;
    if let Some(path) = std::env::args().nth(1) {
        std::fs::write(&path, table.to_csv())?;
        println!("wrote {} rows to {path}", table.rows.len());
    }
    let spacing = 0.98 / (n2 - 1) as f64;
    let mut worst: f64 = 0.0;
    for row in table.rows.chunks(n2) {
        let k1 = row[0][0];
        let best = row.iter().min_by(|a, b| a[2].total_cmp(&b[2])).unwrap();
        let err = (best[1] - eraser_kappa2(k1, 2)).abs();
        worst = worst.max(err / spacing);
    }
    println!("zero curve matches k1/sqrt(2 k1^2 + 1) to {worst:.2} grid spacings");
    Ok(())
}
