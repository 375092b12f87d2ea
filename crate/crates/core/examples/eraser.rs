//! Quantum eraser: an orthogonal beam at `κ₂² = κ₁²/(1 + nκ₁²)` returns the
//! samples to a displaced vacuum, whatever the first beam's outcome.

use faraday::criteria::{bipartitions, log_negativity};
use faraday::interface::Ensembles;
use faraday::protocols::{build_eraser, eraser_kappa2};

fn main() -> faraday::Result<()> {
    for n in [2, 3, 4] {
        let vacuum = Ensembles::uniform(n)?;
        for kappa1 in [0.25, 1.0, 4.0] {
            let kappa2 = eraser_kappa2(kappa1, n);
            let ens = build_eraser(kappa1, kappa2, n)?.simulate(7, &[])?.ensembles;
            let gap = (ens.state().cov() - vacuum.state().cov()).amax();
            let worst = bipartitions(n)
                .iter()
                .map(|s| log_negativity(&ens, s.side()))
                .collect::<faraday::Result<Vec<_>>>()?
                .into_iter()
                .fold(0.0, f64::max);
            println!("n={n} k1={kappa1:<5} k2={kappa2:.6}  |cov - vacuum| = {gap:.1e}  max E_N = {worst:.1e}");
        }
    }
    let off = build_eraser(1.0, 1.1 * eraser_kappa2(1.0, 2), 2)?.simulate(7, &[])?.ensembles;
    println!("10% off the erasing coupling: E_N = {:.4}", log_negativity(&off, &[1])?);
    Ok(())
}
