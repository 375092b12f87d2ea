//! A second, orthogonal beam squeezes `J_y⁽¹⁾ − J_y⁽²⁾` as well, without
//! undoing the first beam's squeezing.

use faraday::interface::Spin::{Y, Z};
use faraday::protocols::{build_two_variable_epr, expected_variances_bipartite};

fn main() -> faraday::Result<()> {
    println!("{:>6} {:>12} {:>12} {:>12}", "kappa", "Var(z1+z2)", "Var(y1-y2)", "one beam");
    for kappa in [0.25, 0.5, 1.0, 2.0] {
        let ens = build_two_variable_epr(kappa)?.simulate(3, &[])?.ensembles;
        let zsum = ens.spin_variance(&[(1, Z, 1.0), (2, Z, 1.0)])?;
        let ydiff = ens.spin_variance(&[(1, Y, 1.0), (2, Y, -1.0)])?;
        println!("{kappa:>6.2} {zsum:>12.6} {ydiff:>12.6} {:>12.6}", expected_variances_bipartite(kappa).z_sum);
    }
    Ok(())
}
