//! Two samples and one measured beam: squeezing of `J_z⁽¹⁾ + J_z⁽²⁾` and the
//! Duan test, compared with the closed form.

use faraday::criteria::{duan_test, log_negativity, DuanSign};
use faraday::interface::Spin::{Y, Z};
use faraday::protocols::{build_epr, expected_variances_bipartite};

fn main() -> faraday::Result<()> {
    println!("{:>6} {:>12} {:>12} {:>12} {:>10} {:>8}", "kappa", "Var(z1+z2)", "closed form", "Duan lhs", "E_N", "verify");
    for kappa in [0.0, 0.25, 0.5, 1.0, 2.0, 4.0] {
        let trace = build_epr(kappa)?.simulate(0, &[])?;
        let ens = &trace.ensembles;
        let zsum = ens.spin_variance(&[(1, Z, 1.0), (2, Z, 1.0)])?;
        let ydiff = ens.spin_variance(&[(1, Y, 1.0), (2, Y, -1.0)])?;
        assert!((ydiff - 1.0).abs() < 1e-12);
        let duan = duan_test(ens, 1, 2, 1.0, DuanSign::Minus)?;
        let predicted = trace.records[1].predicted_variance.unwrap_or(f64::NAN);
        println!(
            "{kappa:>6.2} {zsum:>12.6} {:>12.6} {:>12.6} {:>10.4} {predicted:>8.4}{}",
            expected_variances_bipartite(kappa).z_sum,
            duan.lhs,
            log_negativity(ens, &[1])?,
            if duan.violated { "  entangled" } else { "" }
        );
    }
    Ok(())
}
