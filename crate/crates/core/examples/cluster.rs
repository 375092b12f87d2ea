//! Linear cluster state: one beam per vertex reads its nullifier, which ends
//! up squeezed below the vacuum level and keeps improving with `κ`.

use faraday::criteria::{cluster_nullifier_variances, vacuum_nullifier_variance};
use faraday::protocols::{build_cluster, Graph};

fn main() -> faraday::Result<()> {
    let g = Graph::path(4)?;
    for rotated in [true, false] {
        println!("rotated variables: {rotated}");
        for kappa in [0.5, 1.0, 2.0] {
            let ens = build_cluster(&g, kappa, rotated)?.simulate(0, &[])?.ensembles;
            let line: Vec<String> = cluster_nullifier_variances(&ens, &g, rotated)?
                .into_iter()
                .map(|(a, v)| format!("{v:.4}/{:.1}", vacuum_nullifier_variance(&g, a)))
                .collect();
            println!("  kappa {kappa:<4} {}", line.join("  "));
        }
    }
    Ok(())
}
