//! Even number of samples with alternating beam angles, certified with the
//! multipartite variance inequality over every splitting.

use faraday::criteria::{vlf_certify_genuine, CertifyOptions};
use faraday::protocols::build_ghz_even;

fn main() -> faraday::Result<()> {
    for m in [1, 2, 3] {
        let n = 2 * m;
        let trace = build_ghz_even(m, 1.0, 1.0, 1.0)?.simulate(2, &[])?;
        let ens = &trace.ensembles;
        let h: Vec<f64> = (0..n).map(|k| if k % 2 == 0 { 1.0 } else { -1.0 }).collect();
        let g = vec![1.0; n];
        let report = vlf_certify_genuine(ens, &h, &g, &CertifyOptions::default())?;
        let violated = report.reports.iter().filter(|r| r.violated).count();
        println!(
            "{n} samples: pure={} readout variance {:.4}, {violated}/{} splittings violated",
            ens.state().is_pure(1e-9)?,
            trace.records[2].predicted_variance.unwrap_or(f64::NAN),
            report.reports.len()
        );
        for r in report.reports.iter().filter(|r| !r.violated) {
            println!("    {} holds: {:.4} >= {:.4}", r.name, r.lhs, r.bound);
        }
    }
    Ok(())
}
