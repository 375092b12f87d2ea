//! Atomic samples, light beams and the QND Faraday interface between them.
//!
//! Samples are numbered from 1. Sample `i` occupies mode `i − 1` of the
//! underlying [`GaussianState`]; a beam borrows one extra light mode for the
//! duration of its passage.

use std::fmt;

use rand::Rng;

use crate::error::{Error, Result};
use crate::gaussian::{
    qnd_pass_map_oriented, rotation_map_cs, GaussianState, Outcome, Quadrature, VACUUM_VARIANCE,
};

/// An angle, kept either as a rational multiple of π or as plain radians.
///
/// Rational multiples of π/4 have exact sines and cosines, so beam geometries
/// like `±π/2` do not leak `6e-17` couplings into the simulation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Angle {
    PiFraction { num: i64, den: i64 },
    Radians(f64),
}

fn gcd(a: i64, b: i64) -> i64 {
    if b == 0 {
        a.abs()
    } else {
        gcd(b, a % b)
    }
}

impl Angle {
    pub const ZERO: Angle = Angle::Radians(0.0);

    /// `num·π/den`, reduced to lowest terms. Zero collapses to `Radians(0)`.
    pub fn pi_fraction(num: i64, den: i64) -> Result<Angle> {
        if den == 0 {
            return Err(Error::invalid("angle denominator is zero"));
        }
        if num == 0 {
            return Ok(Angle::ZERO);
        }
        let g = gcd(num, den);
        let (mut num, mut den) = (num / g, den / g);
        if den < 0 {
            num = -num;
            den = -den;
        }
        Ok(Angle::PiFraction { num, den })
    }

    pub fn radians(self) -> f64 {
        match self {
            Angle::PiFraction { num, den } => std::f64::consts::PI * num as f64 / den as f64,
            Angle::Radians(r) => r,
        }
    }

    /// `(cos, sin)`, exact for multiples of π/4.
    pub fn cos_sin(self) -> (f64, f64) {
        use std::f64::consts::FRAC_1_SQRT_2 as H;
        if let Angle::PiFraction { num, den } = self {
            if 4 % den == 0 {
                let k = (num * (4 / den)).rem_euclid(8);
                return [
                    (1.0, 0.0),
                    (H, H),
                    (0.0, 1.0),
                    (-H, H),
                    (-1.0, 0.0),
                    (-H, -H),
                    (0.0, -1.0),
                    (H, -H),
                ][k as usize];
            }
        }
        let r = self.radians();
        (r.cos(), r.sin())
    }

    pub fn is_finite(self) -> bool {
        match self {
            Angle::PiFraction { .. } => true,
            Angle::Radians(r) => r.is_finite(),
        }
    }
}

impl std::ops::Neg for Angle {
    type Output = Angle;

    fn neg(self) -> Angle {
        match self {
            Angle::PiFraction { num, den } => Angle::PiFraction { num: -num, den },
            Angle::Radians(r) => Angle::Radians(-r),
        }
    }
}

impl fmt::Display for Angle {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match *self {
            Angle::PiFraction { num, den } => {
                let head = match num {
                    1 => "pi".to_string(),
                    -1 => "-pi".to_string(),
                    n => format!("{n}pi"),
                };
                if den == 1 {
                    write!(f, "{head}")
                } else {
                    write!(f, "{head}/{den}")
                }
            }
            Angle::Radians(0.0) => write!(f, "0"),
            Angle::Radians(r) => write!(f, "{r:?}"),
        }
    }
}

/// Sign of the macroscopic polarization of a sample along `x`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, serde::Serialize)]
pub enum Orientation {
    Plus,
    Minus,
}

impl Orientation {
    pub fn sign(self) -> f64 {
        match self {
            Orientation::Plus => 1.0,
            Orientation::Minus => -1.0,
        }
    }

    pub fn symbol(self) -> char {
        match self {
            Orientation::Plus => '+',
            Orientation::Minus => '-',
        }
    }
}

/// Dimensionless interface strength `κ = a√(S_x J_x)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CouplingParams {
    kappa: f64,
}

impl CouplingParams {
    pub fn new(kappa: f64) -> Result<Self> {
        if !kappa.is_finite() || kappa < 0.0 {
            return Err(Error::InvalidCoupling(kappa));
        }
        Ok(CouplingParams { kappa })
    }

    /// `κ = a√(S_x J_x)` from the coupling constant and the classical
    /// polarizations of light and atoms (in units of ħ).
    pub fn from_physical(a: f64, s_x: f64, j_x: f64) -> Result<Self> {
        if !(a >= 0.0 && s_x >= 0.0 && j_x >= 0.0) {
            return Err(Error::invalid("coupling inputs must be nonnegative"));
        }
        Self::new(a * (s_x * j_x).sqrt())
    }

    pub fn kappa(self) -> f64 {
        self.kappa
    }
}

/// Coupling constant `a = γ/(8AΔ) · λ²/(2π)` of the Faraday interaction.
///
/// `gamma` is the width of the excited state, `area` the cross section of
/// the sample, `detuning` the detuning and `wavelength` that of the light.
pub fn coupling_constant(gamma: f64, area: f64, detuning: f64, wavelength: f64) -> Result<f64> {
    if !(area > 0.0 && detuning != 0.0 && detuning.is_finite()) {
        return Err(Error::invalid("cross section must be positive and detuning nonzero"));
    }
    let a = gamma / (8.0 * area * detuning) * wavelength * wavelength / (2.0 * std::f64::consts::PI);
    if !a.is_finite() {
        return Err(Error::NonFinite("coupling constant"));
    }
    Ok(a)
}

/// One passage of a beam through a sample at angle α to `z`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Pass {
    pub sample: usize,
    pub angle: Angle,
}

impl Pass {
    pub fn new(sample: usize, angle: Angle) -> Self {
        Pass { sample, angle }
    }
}

/// What happens to the light after its last pass.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Measurement {
    /// The light leaves unobserved.
    None,
    /// Homodyne detection of `S_y` with a random outcome.
    Sampled,
    /// Homodyne detection of `S_y` with a prescribed outcome.
    Pinned(f64),
}

/// A light pulse: coupling strength, ordered passes and readout.
#[derive(Debug, Clone, PartialEq)]
pub struct Beam {
    pub coupling: CouplingParams,
    pub passes: Vec<Pass>,
    pub measurement: Measurement,
}

impl Beam {
    pub fn new(kappa: f64, passes: Vec<Pass>, measurement: Measurement) -> Result<Self> {
        let coupling = CouplingParams::new(kappa)?;
        for (k, p) in passes.iter().enumerate() {
            if !p.angle.is_finite() {
                return Err(Error::NonFinite("pass angle"));
            }
            if passes[..k].iter().any(|q| q.sample == p.sample) {
                return Err(Error::DuplicatePass(p.sample));
            }
        }
        if let Measurement::Pinned(v) = measurement {
            if !v.is_finite() {
                return Err(Error::NonFinite("pinned outcome"));
            }
        }
        Ok(Beam {
            coupling,
            passes,
            measurement,
        })
    }

    /// Same passes through every listed sample at one angle.
    pub fn uniform(kappa: f64, samples: impl IntoIterator<Item = usize>, angle: Angle, measurement: Measurement) -> Result<Self> {
        Self::new(
            kappa,
            samples.into_iter().map(|s| Pass::new(s, angle)).collect(),
            measurement,
        )
    }

    pub fn kappa(&self) -> f64 {
        self.coupling.kappa()
    }

    pub fn is_measured(&self) -> bool {
        !matches!(self.measurement, Measurement::None)
    }
}

/// A collective spin component of one sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Spin {
    Y,
    Z,
}

/// Atomic samples with their orientations and joint Gaussian state.
#[derive(Debug, Clone, PartialEq)]
pub struct Ensembles {
    orientations: Vec<Orientation>,
    state: GaussianState,
}

impl Ensembles {
    /// Coherent spin states (the vacuum) for every sample.
    pub fn new(orientations: Vec<Orientation>) -> Result<Self> {
        let state = GaussianState::vacuum(orientations.len())?;
        Ok(Ensembles { orientations, state })
    }

    /// `n` samples polarized along `+x`.
    pub fn uniform(n: usize) -> Result<Self> {
        Self::new(vec![Orientation::Plus; n])
    }

    pub fn with_state(orientations: Vec<Orientation>, state: GaussianState) -> Result<Self> {
        if state.n_modes() != orientations.len() {
            return Err(Error::DimensionMismatch {
                expected: orientations.len(),
                found: state.n_modes(),
            });
        }
        Ok(Ensembles { orientations, state })
    }

    pub fn n_samples(&self) -> usize {
        self.orientations.len()
    }

    pub fn orientations(&self) -> &[Orientation] {
        &self.orientations
    }

    pub fn state(&self) -> &GaussianState {
        &self.state
    }

    pub fn into_state(self) -> GaussianState {
        self.state
    }

    /// Mode index of a 1-based sample id.
    pub fn mode_of(&self, sample: usize) -> Result<usize> {
        if sample == 0 || sample > self.n_samples() {
            return Err(Error::UnknownSample(sample));
        }
        Ok(sample - 1)
    }

    /// Quadrature coefficients of `Σ c·J_k^(i)` in units of `√(ħJ_x)`.
    ///
    /// `J_y ↦ x` and `J_z ↦ σ·p` with σ the orientation sign of the sample.
    pub fn spin_coeffs(&self, terms: &[(usize, Spin, f64)]) -> Result<Vec<f64>> {
        let mut v = vec![0.0; 2 * self.n_samples()];
        for &(sample, spin, c) in terms {
            let m = self.mode_of(sample)?;
            match spin {
                Spin::Y => v[2 * m] += c,
                Spin::Z => v[2 * m + 1] += c * self.orientations[m].sign(),
            }
        }
        Ok(v)
    }

    /// Variance of `Σ c·J_k^(i)` in units of `ħJ_x`.
    pub fn spin_variance(&self, terms: &[(usize, Spin, f64)]) -> Result<f64> {
        self.state.variance_of(&self.spin_coeffs(terms)?)
    }

    /// Atomic combination `c` read out by the beam, `x_L' = x_L − κ c`, as
    /// quadrature coefficients (not scaled by κ).
    pub fn coupled_combination(&self, beam: &Beam) -> Result<Vec<f64>> {
        self.check_passes(beam)?;
        let terms: Vec<_> = beam
            .passes
            .iter()
            .flat_map(|p| {
                let (c, s) = p.angle.cos_sin();
                [(p.sample, Spin::Z, c), (p.sample, Spin::Y, s)]
            })
            .collect();
        self.spin_coeffs(&terms)
    }

    fn check_passes(&self, beam: &Beam) -> Result<()> {
        for (k, p) in beam.passes.iter().enumerate() {
            self.mode_of(p.sample)?;
            if beam.passes[..k].iter().any(|q| q.sample == p.sample) {
                return Err(Error::DuplicatePass(p.sample));
            }
        }
        Ok(())
    }

    /// Joint atoms + light state after all passes, light in the last mode.
    pub fn propagate(&self, beam: &Beam) -> Result<GaussianState> {
        self.check_passes(beam)?;
        let n = self.n_samples() + 1;
        let light = n - 1;
        let mut joint = self.state.with_vacuum_modes(1);
        for p in &beam.passes {
            let mode = self.mode_of(p.sample)?;
            let map = qnd_pass_map_oriented(
                n,
                light,
                mode,
                beam.kappa(),
                p.angle.cos_sin(),
                self.orientations[mode].sign(),
            )?;
            joint = joint.apply(&map)?;
        }
        Ok(joint)
    }

    /// Sends a beam through the samples.
    ///
    /// A measured beam conditions the atoms on the homodyne outcome of
    /// `S_y`, which is returned; an unmeasured beam is traced out.
    pub fn apply_beam<R: Rng + ?Sized>(&self, beam: &Beam, rng: &mut R) -> Result<(Ensembles, Option<f64>)> {
        let joint = self.propagate(beam)?;
        let light = self.n_samples();
        let (state, outcome) = match beam.measurement {
            Measurement::None => (joint.discard_mode(light)?, None),
            Measurement::Sampled => {
                let (s, v) = joint.homodyne_condition(light, Quadrature::X, Outcome::Sampled, rng)?;
                (s, Some(v))
            }
            Measurement::Pinned(v) => {
                let (s, v) = joint.homodyne_condition(light, Quadrature::X, Outcome::Pinned(v), rng)?;
                (s, Some(v))
            }
        };
        Ok((
            Ensembles {
                orientations: self.orientations.clone(),
                state,
            },
            outcome,
        ))
    }

    /// Predicted `Var(S_y^out)` in units of `ħS_x` for a readout beam:
    /// `1/2 + κ²·Var(c)`, with `c` the coupled combination. The state is left
    /// untouched.
    pub fn verification_variance(&self, beam: &Beam) -> Result<f64> {
        if beam.is_measured() {
            return Err(Error::invalid(
                "verification beams predict the output variance and must not be measured",
            ));
        }
        let c = self.coupled_combination(beam)?;
        let k = beam.kappa();
        Ok(VACUUM_VARIANCE + k * k * self.state.variance_of(&c)?)
    }

    /// Phase-space rotation of one sample by θ.
    pub fn rotate(&self, sample: usize, theta: Angle) -> Result<Ensembles> {
        let mode = self.mode_of(sample)?;
        let map = rotation_map_cs(self.n_samples(), mode, theta.cos_sin())?;
        Ok(Ensembles {
            orientations: self.orientations.clone(),
            state: self.state.apply(&map)?,
        })
    }

    /// Net polarization `Σ σ_i` in units of the single-sample `J_x`.
    pub fn net_polarization(&self) -> i64 {
        self.orientations
            .iter()
            .map(|o| match o {
                Orientation::Plus => 1,
                Orientation::Minus => -1,
            })
            .sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn pi(num: i64, den: i64) -> Angle {
        Angle::pi_fraction(num, den).unwrap()
    }

    fn rng() -> ChaCha8Rng {
        ChaCha8Rng::seed_from_u64(7)
    }

    #[test]
    fn angle_forms() {
        assert_eq!(pi(2, 8), pi(1, 4));
        assert_eq!(pi(1, -2), Angle::PiFraction { num: -1, den: 2 });
        assert_eq!(pi(0, 3), Angle::ZERO);
        assert_eq!(pi(1, 2).cos_sin(), (0.0, 1.0));
        assert_eq!(pi(-1, 2).cos_sin(), (0.0, -1.0));
        assert_eq!(pi(3, 4).to_string(), "3pi/4");
        assert_eq!(pi(-1, 4).to_string(), "-pi/4");
        assert_eq!(pi(1, 1).to_string(), "pi");
        let (c, s) = pi(1, 3).cos_sin();
        assert_abs_diff_eq!(c, 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(s, 3f64.sqrt() / 2.0, epsilon = 1e-15);
        assert!(Angle::pi_fraction(1, 0).is_err());
    }

    #[test]
    fn coupling_from_physical_inputs() {
        let c = CouplingParams::from_physical(2e-6, 1e10, 4e2).unwrap();
        assert!((c.kappa() - 2e-6 * (1e10f64 * 4e2).sqrt()).abs() < 1e-12);
        assert!(CouplingParams::new(-1.0).is_err());
        let a = coupling_constant(1.0, 2.0, 4.0, 1.0).unwrap();
        assert_abs_diff_eq!(a, 1.0 / 64.0 / (2.0 * std::f64::consts::PI), epsilon = 1e-16);
    }

    #[test]
    fn measured_entangling_beam() {
        let k: f64 = 1.0;
        let ens = Ensembles::uniform(2).unwrap();
        let beam = Beam::uniform(k, [1, 2], Angle::ZERO, Measurement::Sampled).unwrap();
        let (after, outcome) = ens.apply_beam(&beam, &mut rng()).unwrap();
        assert!(outcome.is_some());
        let zsum = after.spin_variance(&[(1, Spin::Z, 1.0), (2, Spin::Z, 1.0)]).unwrap();
        let ysum = after.spin_variance(&[(1, Spin::Y, 1.0), (2, Spin::Y, 1.0)]).unwrap();
        assert_abs_diff_eq!(zsum, 1.0 / (1.0 + 2.0 * k * k), epsilon = 1e-14);
        assert_abs_diff_eq!(ysum, 1.0 + 2.0 * k * k, epsilon = 1e-14);
    }

    #[test]
    fn readout_beam_on_vacuum() {
        let k = 1.0;
        let ens = Ensembles::uniform(2).unwrap();
        let beam = Beam::new(k, vec![Pass::new(1, pi(1, 4)), Pass::new(2, pi(-1, 4))], Measurement::None).unwrap();
        let joint = ens.propagate(&beam).unwrap();
        // c = ((p1 + p2) + (x1 − x2))/√2 has Var 1 on vacuum
        assert_abs_diff_eq!(joint.cov()[(4, 4)], 1.5, epsilon = 1e-14);
        assert_abs_diff_eq!(ens.verification_variance(&beam).unwrap(), 0.5 + k * k, epsilon = 1e-14);
    }

    #[test]
    fn readout_beam_after_entangling() {
        let ens = Ensembles::uniform(2).unwrap();
        let ent = Beam::uniform(1.0, [1, 2], Angle::ZERO, Measurement::Pinned(0.0)).unwrap();
        let (ens, _) = ens.apply_beam(&ent, &mut rng()).unwrap();
        let verify = Beam::new(1.0, vec![Pass::new(1, pi(1, 4)), Pass::new(2, pi(-1, 4))], Measurement::None).unwrap();
        assert_abs_diff_eq!(ens.verification_variance(&verify).unwrap(), 0.5 + 2.0 / 3.0, epsilon = 1e-14);
        let zero = Beam { coupling: CouplingParams::new(0.0).unwrap(), ..verify.clone() };
        assert_eq!(ens.verification_variance(&zero).unwrap(), 0.5);
        let measured = Beam { measurement: Measurement::Sampled, ..verify };
        assert!(ens.verification_variance(&measured).is_err());
    }

    #[test]
    fn zero_coupling_beam() {
        let ens = Ensembles::uniform(2).unwrap();
        let beam = Beam::uniform(0.0, [1, 2], Angle::ZERO, Measurement::Sampled).unwrap();
        let mut r = rng();
        let outcomes: Vec<f64> = (0..4000)
            .map(|_| {
                let (after, v) = ens.apply_beam(&beam, &mut r).unwrap();
                assert_eq!(after.state().cov(), ens.state().cov());
                v.unwrap()
            })
            .collect();
        let var = outcomes.iter().map(|v| v * v).sum::<f64>() / outcomes.len() as f64;
        assert!((var - 0.5).abs() < 0.05, "{var}");
    }

    #[test]
    fn beam_errors() {
        let ens = Ensembles::uniform(2).unwrap();
        let unknown = Beam::uniform(1.0, [1, 3], Angle::ZERO, Measurement::None).unwrap();
        assert_eq!(ens.apply_beam(&unknown, &mut rng()).unwrap_err(), Error::UnknownSample(3));
        assert_eq!(
            Beam::uniform(1.0, [1, 1], Angle::ZERO, Measurement::None).unwrap_err(),
            Error::DuplicatePass(1)
        );
        assert!(Beam::uniform(1.0, [1], Angle::Radians(f64::NAN), Measurement::None).is_err());
    }

    #[test]
    fn opposite_orientation_sums_commute() {
        // Σ J_z with orientations (+, −) is p1 − p2, Σ J_y is x1 + x2.
        let ens = Ensembles::new(vec![Orientation::Plus, Orientation::Minus]).unwrap();
        let z = Beam::uniform(1.0, [1, 2], Angle::ZERO, Measurement::Pinned(0.0)).unwrap();
        let y = Beam::uniform(1.0, [1, 2], pi(1, 2), Measurement::Pinned(0.0)).unwrap();
        let (e1, _) = ens.apply_beam(&z, &mut rng()).unwrap();
        let (e2, _) = e1.apply_beam(&y, &mut rng()).unwrap();
        let zsum = [(1, Spin::Z, 1.0), (2, Spin::Z, 1.0)];
        let ysum = [(1, Spin::Y, 1.0), (2, Spin::Y, 1.0)];
        assert_abs_diff_eq!(e1.spin_variance(&zsum).unwrap(), 1.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e1.spin_variance(&ysum).unwrap(), 1.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e2.spin_variance(&zsum).unwrap(), 1.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(e2.spin_variance(&ysum).unwrap(), 1.0 / 3.0, epsilon = 1e-14);
        assert_eq!(ens.net_polarization(), 0);
    }

    #[test]
    fn rotation_of_sample() {
        let ens = Ensembles::uniform(1).unwrap();
        assert!(ens.rotate(2, pi(1, 2)).is_err());
        let r = ens.rotate(1, pi(1, 2)).unwrap();
        assert_eq!(r.state().cov(), ens.state().cov());
    }
}
