//! Parse a protocol script, run it and print the JSON report.
//!
//! `cargo run --example run_script -- scripts/ghz.proto`

use faraday::dsl::{parse, print, run_protocol};

const DEFAULT: &str = "\
protocol inline
param k=0.8
samples 2
beam k=$k pass 1@0 2@0 measure
beam k=$k pass 1@pi/2 2@-pi/2 measure seed=42
assert duan 1 2
report var +1y -2y
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let src = match std::env::args().nth(1) {
        Some(path) => std::fs::read_to_string(path)?,
        None => DEFAULT.to_string(),
    };
    let protocol = parse(&src).map_err(|d| d.to_string())?;
    eprint!("{}", print(&protocol));
    let report = run_protocol(&protocol, 0, &[])?;
    println!("{}", report.to_json());
    Ok(())
}
