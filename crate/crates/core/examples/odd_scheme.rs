//! Oppositely polarized samples, where `Σ J_y` and `Σ J_z` commute and can be
//! squeezed together.

use faraday::criteria::{odd_scheme_test, DEFAULT_TOL};
use faraday::interface::Orientation::{Minus, Plus};
use faraday::protocols::{balanced_orientations, build_odd_scheme};

fn main() -> faraday::Result<()> {
    for orient in [vec![Plus, Minus], vec![Plus, Plus, Minus, Minus], balanced_orientations(6)] {
        let ens = build_odd_scheme(&orient, 1.0)?.simulate(0, &[])?.ensembles;
        let r = odd_scheme_test(&ens, DEFAULT_TOL)?;
        println!("{} samples: lhs {:.4} vs bound {} -> violated {}", orient.len(), r.lhs, r.bound, r.violated);
    }
    let unbalanced = build_odd_scheme(&balanced_orientations(3), 1.0)?;
    for w in unbalanced.warnings() {
        println!("3 samples: {w}");
    }
    Ok(())
}
