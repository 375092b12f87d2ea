//! The Gaussian layer on its own: a QND pass, homodyne conditioning and the
//! symplectic spectrum before and after partial transposition.

use faraday::gaussian::{partial_transpose, qnd_pass_map, symplectic_spectrum, GaussianState, Outcome, Quadrature};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> faraday::Result<()> {
    let kappa = 1.0;
    // Modes 0 and 1 are samples, mode 2 is light.
    let map = qnd_pass_map(3, 2, 0, kappa, 0.0)?.then(&qnd_pass_map(3, 2, 1, kappa, 0.0)?)?;
    println!("symplectic error of two passes: {:.1e}", map.symplectic_error());
    let joint = GaussianState::vacuum(3)?.apply(&map)?;
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let (samples, x) = joint.homodyne_condition(2, Quadrature::X, Outcome::Sampled, &mut rng)?;
    println!("light x outcome {x:.4}");
    println!("conditioned covariance:\n{}", samples.cov());
    println!("spectrum {:?}", samples.symplectic_spectrum()?);
    println!("spectrum after partial transpose {:?}", symplectic_spectrum(&partial_transpose(samples.cov(), &[1])?)?);
    Ok(())
}
