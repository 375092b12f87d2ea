//! GHZ-like states of `N` samples: one global beam plus one beam per pair.
//! Prints the pairwise tests and checks every bipartition for negativity.

use faraday::criteria::{bipartitions, ghz_all_pairs, log_negativity, DEFAULT_TOL};
use faraday::interface::Spin::{Y, Z};
use faraday::protocols::{build_ghz_generic, expected_variances_ghz};

fn main() -> faraday::Result<()> {
    for n in 2..=5 {
        let kappa = 1.0;
        let p = build_ghz_generic(n, kappa)?;
        let ens = p.simulate(1, &[])?.ensembles;
        let zsum: Vec<_> = (1..=n).map(|k| (k, Z, 1.0)).collect();
        let expect = expected_variances_ghz(n, kappa);
        let pairs = ghz_all_pairs(&ens, DEFAULT_TOL)?;
        let min_en = bipartitions(n)
            .iter()
            .map(|s| log_negativity(&ens, s.side()))
            .collect::<faraday::Result<Vec<_>>>()?
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        println!(
            "N={n} beams={:<2} Var(sum z)={:.6} ({:.6}) Var(y2-y1)={:.6} ({:.6}) pairs violated {}/{} min E_N {min_en:.4}",
            p.beam_count(),
            ens.spin_variance(&zsum)?,
            expect.z_sum,
            ens.spin_variance(&[(2, Y, 1.0), (1, Y, -1.0)])?,
            expect.y_diff,
            pairs.iter().filter(|r| r.violated).count(),
            pairs.len(),
        );
    }
    Ok(())
}
