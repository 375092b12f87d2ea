//! Beam sequences for every entangling, erasing and verifying scheme, and the
//! closed-form variances they are expected to produce.
//!
//! A [`Protocol`] is plain data: samples, an ordered list of steps, declared
//! checks and requested outputs. It is the same structure the protocol
//! language parses into, so every builder here can be printed as a script
//! and read back.

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::criteria::DuanSign;
use crate::error::{Error, Result};
pub use crate::graph::Graph;
use crate::interface::{Angle, Beam, Ensembles, Measurement, Orientation, Pass, Spin};

/// A number in a protocol: a literal or a reference to a declared parameter.
#[derive(Debug, Clone, PartialEq)]
pub enum Scalar {
    Value(f64),
    Param(String),
}

impl Scalar {
    pub fn resolve(&self, params: &BTreeMap<String, f64>) -> Result<f64> {
        match self {
            Scalar::Value(v) => Ok(*v),
            Scalar::Param(name) => params
                .get(name)
                .copied()
                .ok_or_else(|| Error::invalid(format!("undeclared parameter ${name}"))),
        }
    }
}

impl From<f64> for Scalar {
    fn from(v: f64) -> Self {
        Scalar::Value(v)
    }
}

/// Readout of a beam step.
#[derive(Debug, Clone, PartialEq)]
pub enum Readout {
    None,
    Sampled,
    Pinned(Scalar),
}

/// A beam as written in a protocol, before parameters are substituted.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamStep {
    pub kappa: Scalar,
    pub passes: Vec<Pass>,
    pub readout: Readout,
    /// Seed for this beam's outcome, overriding the run seed.
    pub seed: Option<u64>,
}

impl BeamStep {
    pub fn new(kappa: impl Into<Scalar>, passes: Vec<Pass>, readout: Readout) -> Self {
        BeamStep {
            kappa: kappa.into(),
            passes,
            readout,
            seed: None,
        }
    }

    pub fn to_beam(&self, params: &BTreeMap<String, f64>) -> Result<Beam> {
        let measurement = match &self.readout {
            Readout::None => Measurement::None,
            Readout::Sampled => Measurement::Sampled,
            Readout::Pinned(v) => Measurement::Pinned(v.resolve(params)?),
        };
        Beam::new(self.kappa.resolve(params)?, self.passes.clone(), measurement)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Step {
    /// Entangling or erasing beam; measured beams condition the samples.
    Beam(BeamStep),
    /// Readout beam whose output variance is predicted; the samples are not
    /// disturbed.
    Verify(BeamStep),
    /// Phase-space rotation of one sample (Larmor precession).
    Rotate { sample: usize, angle: Angle },
}

/// Whether a variance inequality is expected to be violated.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Expect {
    Entangled,
    Separable,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Cmp {
    Eq,
    Lt,
    Le,
    Gt,
    Ge,
}

impl Cmp {
    pub fn symbol(self) -> &'static str {
        match self {
            Cmp::Eq => "==",
            Cmp::Lt => "<",
            Cmp::Le => "<=",
            Cmp::Gt => ">",
            Cmp::Ge => ">=",
        }
    }

    pub fn holds(self, value: f64, target: f64, tol: f64) -> bool {
        match self {
            Cmp::Eq => (value - target).abs() <= tol,
            Cmp::Lt => value < target - tol,
            Cmp::Le => value <= target + tol,
            Cmp::Gt => value > target + tol,
            Cmp::Ge => value >= target - tol,
        }
    }
}

/// `coeff · J_spin^(sample)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpinTerm {
    pub sample: usize,
    pub spin: Spin,
    pub coeff: f64,
}

impl SpinTerm {
    pub fn new(coeff: f64, sample: usize, spin: Spin) -> Self {
        SpinTerm { sample, spin, coeff }
    }

    pub(crate) fn triple(&self) -> (usize, Spin, f64) {
        (self.sample, self.spin, self.coeff)
    }
}

/// A criterion the protocol asserts on its final state.
#[derive(Debug, Clone, PartialEq)]
pub enum Check {
    /// `lambda: None` optimizes λ; `sign: None` takes the better sign.
    Duan {
        i: usize,
        j: usize,
        lambda: Option<f64>,
        sign: Option<DuanSign>,
        expect: Expect,
        tol: Option<f64>,
    },
    /// `split: None` tests every bipartition.
    Vlf {
        h: Vec<f64>,
        g: Vec<f64>,
        split: Option<Vec<usize>>,
        expect: Expect,
        tol: Option<f64>,
    },
    /// `pair: None` tests every pair `i > j`.
    Ghz {
        pair: Option<(usize, usize)>,
        expect: Expect,
        tol: Option<f64>,
    },
    OddScheme { expect: Expect, tol: Option<f64> },
    /// `Entangled` here means every nullifier is squeezed below vacuum.
    Nullifiers {
        edges: Vec<(usize, usize)>,
        rotated: bool,
        expect: Expect,
        tol: Option<f64>,
    },
    Negativity {
        side: Vec<usize>,
        cmp: Cmp,
        value: f64,
        tol: Option<f64>,
    },
    Variance {
        terms: Vec<SpinTerm>,
        cmp: Cmp,
        value: f64,
        tol: Option<f64>,
    },
}

/// A quantity written to the run report and to sweep columns.
#[derive(Debug, Clone, PartialEq)]
pub enum Report {
    Variance { terms: Vec<SpinTerm>, label: Option<String> },
    Negativity { side: Vec<usize>, label: Option<String> },
    Nullifiers { edges: Vec<(usize, usize)>, rotated: bool },
}

/// A complete experiment.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Protocol {
    pub name: Option<String>,
    pub figure: Option<String>,
    pub params: Vec<(String, f64)>,
    pub orientations: Vec<Orientation>,
    pub steps: Vec<Step>,
    pub checks: Vec<Check>,
    pub reports: Vec<Report>,
}

/// What happened at one step of a simulated protocol.
#[derive(Debug, Clone, PartialEq, serde::Serialize)]
pub struct StepRecord {
    pub index: usize,
    pub kind: &'static str,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub outcome: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub predicted_variance: Option<f64>,
}

/// Final samples and per-step records of a simulation.
#[derive(Debug, Clone)]
pub struct Trace {
    pub ensembles: Ensembles,
    pub records: Vec<StepRecord>,
}

impl Protocol {
    pub fn new(orientations: Vec<Orientation>) -> Self {
        Protocol {
            orientations,
            ..Protocol::default()
        }
    }

    pub fn named(mut self, name: &str, figure: Option<&str>) -> Self {
        self.name = Some(name.to_string());
        self.figure = figure.map(str::to_string);
        self
    }

    pub fn n_samples(&self) -> usize {
        self.orientations.len()
    }

    pub fn beam(mut self, step: BeamStep) -> Self {
        self.steps.push(Step::Beam(step));
        self
    }

    pub fn verify(mut self, step: BeamStep) -> Self {
        self.steps.push(Step::Verify(step));
        self
    }

    pub fn check(mut self, check: Check) -> Self {
        self.checks.push(check);
        self
    }

    pub fn report(mut self, report: Report) -> Self {
        self.reports.push(report);
        self
    }

    /// Number of entangling/erasing beams (verification excluded).
    pub fn beam_count(&self) -> usize {
        self.steps.iter().filter(|s| matches!(s, Step::Beam(_))).count()
    }

    /// Conditions that do not stop a run but weaken its conclusions.
    pub fn warnings(&self) -> Vec<String> {
        let net: i64 = self
            .orientations
            .iter()
            .map(|o| o.sign() as i64)
            .sum();
        let mixed = self.orientations.iter().any(|&o| o != self.orientations[0]);
        let mut out = Vec::new();
        if mixed && net != 0 {
            out.push(format!(
                "net polarization is {net}: summed J_y and J_z do not commute"
            ));
        }
        out
    }

    /// Checks sample references, duplicate passes and parameter names.
    pub fn validate(&self) -> Result<()> {
        let n = self.n_samples();
        if n == 0 {
            return Err(Error::NoModes);
        }
        let known = |s: usize| if s == 0 || s > n { Err(Error::UnknownSample(s)) } else { Ok(()) };
        let params: BTreeMap<String, f64> = self.params.iter().cloned().collect();
        for (index, step) in self.steps.iter().enumerate() {
            let at = |e: Error| Error::AtStep {
                index,
                source: Box::new(e),
            };
            match step {
                Step::Beam(b) | Step::Verify(b) => {
                    for (k, p) in b.passes.iter().enumerate() {
                        known(p.sample).map_err(at)?;
                        if b.passes[..k].iter().any(|q| q.sample == p.sample) {
                            return Err(at(Error::DuplicatePass(p.sample)));
                        }
                    }
                    b.kappa.resolve(&params).map_err(at)?;
                    if let Readout::Pinned(v) = &b.readout {
                        v.resolve(&params).map_err(at)?;
                    }
                    if matches!(step, Step::Verify(_)) && b.readout != Readout::None {
                        return Err(at(Error::invalid("verification beams are not measured")));
                    }
                }
                Step::Rotate { sample, .. } => known(*sample).map_err(at)?,
            }
        }
        let mut ids: Vec<usize> = Vec::new();
        for c in &self.checks {
            match c {
                Check::Duan { i, j, .. } => ids.extend([*i, *j]),
                Check::Vlf { split: Some(s), .. } => ids.extend(s),
                Check::Ghz { pair: Some((i, j)), .. } => ids.extend([*i, *j]),
                Check::Nullifiers { edges, .. } => ids.extend(edges.iter().flat_map(|&(a, b)| [a, b])),
                Check::Negativity { side, .. } => ids.extend(side),
                Check::Variance { terms, .. } => ids.extend(terms.iter().map(|t| t.sample)),
                _ => {}
            }
        }
        for r in &self.reports {
            match r {
                Report::Variance { terms, .. } => ids.extend(terms.iter().map(|t| t.sample)),
                Report::Negativity { side, .. } => ids.extend(side),
                Report::Nullifiers { edges, .. } => ids.extend(edges.iter().flat_map(|&(a, b)| [a, b])),
            }
        }
        ids.into_iter().try_for_each(known)
    }

    /// Declared parameters with `overrides` applied. Overriding an
    /// undeclared parameter is an error.
    pub fn resolve_params(&self, overrides: &[(String, f64)]) -> Result<BTreeMap<String, f64>> {
        let mut params: BTreeMap<String, f64> = self.params.iter().cloned().collect();
        for (name, v) in overrides {
            match params.get_mut(name) {
                Some(slot) => *slot = *v,
                None => return Err(Error::invalid(format!("undeclared parameter ${name}"))),
            }
        }
        Ok(params)
    }

    /// Runs every step from the vacuum.
    ///
    /// Beam `k` draws its outcome from a ChaCha8 stream `k` keyed by `seed`
    /// (or by its own seed when it has one), so runs are reproducible and
    /// independent of how many random numbers earlier beams consumed.
    pub fn simulate(&self, seed: u64, overrides: &[(String, f64)]) -> Result<Trace> {
        self.validate()?;
        let params = self.resolve_params(overrides)?;
        let mut ens = Ensembles::new(self.orientations.clone())?;
        let mut records = Vec::with_capacity(self.steps.len());
        for (index, step) in self.steps.iter().enumerate() {
            let at = |e: Error| Error::AtStep {
                index,
                source: Box::new(e),
            };
            let record = match step {
                Step::Beam(b) => {
                    let beam = b.to_beam(&params).map_err(at)?;
                    let mut rng = match b.seed {
                        Some(s) => ChaCha8Rng::seed_from_u64(s),
                        None => {
                            let mut r = ChaCha8Rng::seed_from_u64(seed);
                            r.set_stream(index as u64);
                            r
                        }
                    };
                    let (next, outcome) = ens.apply_beam(&beam, &mut rng).map_err(at)?;
                    ens = next;
                    StepRecord {
                        index,
                        kind: "beam",
                        outcome,
                        predicted_variance: None,
                    }
                }
                Step::Verify(b) => {
                    let beam = b.to_beam(&params).map_err(at)?;
                    StepRecord {
                        index,
                        kind: "verify",
                        outcome: None,
                        predicted_variance: Some(ens.verification_variance(&beam).map_err(at)?),
                    }
                }
                Step::Rotate { sample, angle } => {
                    ens = ens.rotate(*sample, *angle).map_err(at)?;
                    StepRecord {
                        index,
                        kind: "rotate",
                        outcome: None,
                        predicted_variance: None,
                    }
                }
            };
            records.push(record);
        }
        Ok(Trace { ensembles: ens, records })
    }
}

fn pi(num: i64, den: i64) -> Angle {
    Angle::pi_fraction(num, den).expect("nonzero denominator")
}

fn check_kappa(k: f64) -> Result<()> {
    if !k.is_finite() || k < 0.0 {
        return Err(Error::InvalidCoupling(k));
    }
    Ok(())
}

fn sum_terms(n: usize, spin: Spin) -> Vec<SpinTerm> {
    (1..=n).map(|k| SpinTerm::new(1.0, k, spin)).collect()
}

fn var_report(terms: Vec<SpinTerm>, label: &str) -> Report {
    Report::Variance {
        terms,
        label: Some(label.to_string()),
    }
}

fn bipartite_reports(p: Protocol) -> Protocol {
    p.report(var_report(sum_terms(2, Spin::Y), "ysum"))
        .report(var_report(
            vec![SpinTerm::new(1.0, 1, Spin::Y), SpinTerm::new(-1.0, 2, Spin::Y)],
            "ydiff",
        ))
        .report(var_report(sum_terms(2, Spin::Z), "zsum"))
        .report(var_report(
            vec![SpinTerm::new(1.0, 1, Spin::Z), SpinTerm::new(-1.0, 2, Spin::Z)],
            "zdiff",
        ))
        .report(Report::Negativity {
            side: vec![1],
            label: Some("negativity".into()),
        })
}

/// Readout beam through sample 1 at π/4 and sample 2 at −π/4, reading
/// `(J_z⁽¹⁾ + J_z⁽²⁾ + J_y⁽¹⁾ − J_y⁽²⁾)/√2`.
fn bipartite_verification(kappa: f64) -> BeamStep {
    BeamStep::new(kappa, vec![Pass::new(1, pi(1, 4)), Pass::new(2, pi(-1, 4))], Readout::None)
}

fn epr_duan_check() -> Check {
    Check::Duan {
        i: 1,
        j: 2,
        lambda: Some(1.0),
        sign: Some(DuanSign::Minus),
        expect: Expect::Entangled,
        tol: None,
    }
}

/// One measured beam along `z` through two samples, then a readout beam at
/// `±π/4`.
pub fn build_epr(kappa: f64) -> Result<Protocol> {
    check_kappa(kappa)?;
    let p = Protocol::new(vec![Orientation::Plus; 2])
        .named("epr", Some("3"))
        .beam(BeamStep::new(kappa, vec![Pass::new(1, Angle::ZERO), Pass::new(2, Angle::ZERO)], Readout::Sampled))
        .verify(bipartite_verification(kappa))
        .check(epr_duan_check());
    Ok(bipartite_reports(p))
}

/// [`build_epr`] with a second measured beam at `(π/2, −π/2)` that also
/// squeezes `J_y⁽¹⁾ − J_y⁽²⁾`.
pub fn build_two_variable_epr(kappa: f64) -> Result<Protocol> {
    check_kappa(kappa)?;
    let p = Protocol::new(vec![Orientation::Plus; 2])
        .named("epr2", Some("4"))
        .beam(BeamStep::new(kappa, vec![Pass::new(1, Angle::ZERO), Pass::new(2, Angle::ZERO)], Readout::Sampled))
        .beam(BeamStep::new(kappa, vec![Pass::new(1, pi(1, 2)), Pass::new(2, pi(-1, 2))], Readout::Sampled))
        .verify(bipartite_verification(kappa))
        .check(epr_duan_check());
    Ok(bipartite_reports(p))
}

/// Second-beam coupling that erases the entanglement left by a first beam
/// of strength `κ₁` on `n` samples: `κ₂² = κ₁²/(1 + nκ₁²)`.
pub fn eraser_kappa2(kappa1: f64, n_samples: usize) -> f64 {
    let k1 = kappa1 * kappa1;
    (k1 / (1.0 + n_samples as f64 * k1)).sqrt()
}

/// A measured beam along `z` through every sample, followed by a measured
/// orthogonal beam (α = π/2) through every sample.
pub fn build_eraser(kappa1: f64, kappa2: f64, n_samples: usize) -> Result<Protocol> {
    check_kappa(kappa1)?;
    check_kappa(kappa2)?;
    if n_samples < 2 {
        return Err(Error::invalid("the eraser needs at least two samples"));
    }
    let n = n_samples;
    let all = |a: Angle| (1..=n).map(|k| Pass::new(k, a)).collect::<Vec<_>>();
    let mut p = Protocol::new(vec![Orientation::Plus; n])
        .named("eraser", Some("7"))
        .beam(BeamStep::new(kappa1, all(Angle::ZERO), Readout::Sampled))
        .beam(BeamStep::new(kappa2, all(pi(1, 2)), Readout::Sampled))
        .report(var_report(sum_terms(n, Spin::Y), "ysum"))
        .report(var_report(sum_terms(n, Spin::Z), "zsum"));
    if n == 2 {
        p = p
            .report(var_report(
                vec![SpinTerm::new(1.0, 1, Spin::Y), SpinTerm::new(-1.0, 2, Spin::Y)],
                "ydiff",
            ))
            .report(var_report(
                vec![SpinTerm::new(1.0, 1, Spin::Z), SpinTerm::new(-1.0, 2, Spin::Z)],
                "zdiff",
            ));
    }
    Ok(p.report(Report::Negativity {
        side: vec![1],
        label: Some("negativity".into()),
    }))
}

/// [`build_eraser`] at the erasing coupling, asserting zero negativity
/// across every bipartition.
pub fn build_eraser_fixed_point(kappa1: f64, n_samples: usize) -> Result<Protocol> {
    let mut p = build_eraser(kappa1, eraser_kappa2(kappa1, n_samples), n_samples)?;
    for split in crate::criteria::bipartitions(n_samples) {
        p.checks.push(Check::Negativity {
            side: split.side().to_vec(),
            cmp: Cmp::Eq,
            value: 0.0,
            tol: Some(1e-9),
        });
    }
    Ok(p)
}

/// Closed-form `Var(J_y⁽¹⁾ ± J_y⁽²⁾)` and `Var(J_z⁽¹⁾ ± J_z⁽²⁾)` in units of `ħJ_x`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BipartiteVariances {
    pub y_sum: f64,
    pub y_diff: f64,
    pub z_sum: f64,
    pub z_diff: f64,
}

/// After one measured beam along `z`.
pub fn expected_variances_bipartite(kappa: f64) -> BipartiteVariances {
    let k2 = kappa * kappa;
    BipartiteVariances {
        y_sum: 1.0 + 2.0 * k2,
        y_diff: 1.0,
        z_sum: 1.0 / (1.0 + 2.0 * k2),
        z_diff: 1.0,
    }
}

/// After a measured beam along `z` (κ₁) and a measured orthogonal beam (κ₂).
pub fn expected_variances_two_beam(kappa1: f64, kappa2: f64) -> BipartiteVariances {
    let (a, b) = (kappa1 * kappa1, kappa2 * kappa2);
    BipartiteVariances {
        y_sum: (2.0 * a + 1.0) / ((4.0 * a + 2.0) * b + 1.0),
        y_diff: 1.0,
        z_sum: 2.0 * b + 1.0 / (2.0 * a + 1.0),
        z_diff: 1.0,
    }
}

/// Closed-form variances of the GHZ-like state.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GhzVariances {
    /// `Var(J_z⁽¹⁾ + … + J_z⁽ᴺ⁾)`.
    pub z_sum: f64,
    /// `Var(J_y⁽ⁱ⁾ − J_y⁽ʲ⁾)` for any pair.
    pub y_diff: f64,
}

pub fn expected_variances_ghz(n_samples: usize, kappa: f64) -> GhzVariances {
    let n = n_samples as f64;
    let k2 = kappa * kappa;
    GhzVariances {
        z_sum: n / (2.0 + 2.0 * n * k2),
        y_diff: 1.0 / (1.0 + n * k2),
    }
}

fn ghz_reports(p: Protocol, n: usize) -> Protocol {
    p.report(var_report(sum_terms(n, Spin::Z), "zsum")).report(var_report(
        vec![SpinTerm::new(1.0, 2, Spin::Y), SpinTerm::new(-1.0, 1, Spin::Y)],
        "ydiff21",
    ))
}

/// GHZ-like state from one global beam along `z` plus one `(π/2, −π/2)`
/// beam per pair `i > j`.
pub fn build_ghz_generic(n_samples: usize, kappa: f64) -> Result<Protocol> {
    build_ghz_generic_with(n_samples, kappa, |_, _| kappa)
}

/// [`build_ghz_generic`] with an individual coupling per pair beam.
pub fn build_ghz_generic_with(n_samples: usize, kappa: f64, pair_kappa: impl Fn(usize, usize) -> f64) -> Result<Protocol> {
    check_kappa(kappa)?;
    if n_samples < 2 {
        return Err(Error::invalid("a GHZ state needs at least two samples"));
    }
    let n = n_samples;
    let mut p = Protocol::new(vec![Orientation::Plus; n])
        .named("ghz", None)
        .beam(BeamStep::new(kappa, (1..=n).map(|k| Pass::new(k, Angle::ZERO)).collect(), Readout::Sampled));
    for i in 2..=n {
        for j in 1..i {
            let k = pair_kappa(i, j);
            check_kappa(k)?;
            p = p.beam(BeamStep::new(
                k,
                vec![Pass::new(j, pi(-1, 2)), Pass::new(i, pi(1, 2))],
                Readout::Sampled,
            ));
        }
    }
    let p = p.check(Check::Ghz {
        pair: None,
        expect: Expect::Entangled,
        tol: None,
    });
    Ok(ghz_reports(p, n))
}

fn alternating(n: usize, even: Angle, odd: Angle) -> Vec<Pass> {
    (1..=n)
        .map(|k| Pass::new(k, if k % 2 == 1 { even } else { odd }))
        .collect()
}

/// `2M` samples: a global beam along `z` (κ₁), a measured beam through
/// sample `i` at `(−1)^(i−1)π/2` (κ₂) and a readout beam at `(−1)^(i−1)π/4` (κ_v).
pub fn build_ghz_even(m: usize, kappa1: f64, kappa2: f64, kappa_v: f64) -> Result<Protocol> {
    for k in [kappa1, kappa2, kappa_v] {
        check_kappa(k)?;
    }
    if m == 0 {
        return Err(Error::invalid("the even scheme needs at least two samples"));
    }
    let n = 2 * m;
    let h: Vec<f64> = (1..=n).map(|k| if k % 2 == 1 { 1.0 } else { -1.0 }).collect();
    let alt_y: Vec<SpinTerm> = (1..=n).map(|k| SpinTerm::new(h[k - 1], k, Spin::Y)).collect();
    let p = Protocol::new(vec![Orientation::Plus; n])
        .named("ghz-even", None)
        .beam(BeamStep::new(kappa1, (1..=n).map(|k| Pass::new(k, Angle::ZERO)).collect(), Readout::Sampled))
        .beam(BeamStep::new(kappa2, alternating(n, pi(1, 2), pi(-1, 2)), Readout::Sampled))
        .verify(BeamStep::new(kappa_v, alternating(n, pi(1, 4), pi(-1, 4)), Readout::None))
        .check(Check::Vlf {
            h,
            g: vec![1.0; n],
            split: Some(vec![1]),
            expect: Expect::Entangled,
            tol: None,
        })
        .report(var_report(sum_terms(n, Spin::Z), "zsum"))
        .report(var_report(alt_y, "yalt"));
    Ok(p)
}

/// Orientations `+, −, +, −, …`; balanced for even `n`.
pub fn balanced_orientations(n: usize) -> Vec<Orientation> {
    (0..n)
        .map(|k| if k % 2 == 0 { Orientation::Plus } else { Orientation::Minus })
        .collect()
}

/// Oppositely polarized samples: one measured beam squeezes `Σ J_z`; then
/// every sample precesses by `σ·π/2`, a second measured beam squeezes
/// `Σ J_y`, and the precession is undone.
///
/// Unbalanced orientations are accepted and reported by
/// [`Protocol::warnings`]; the summed-variance test is only declared when
/// the net polarization vanishes.
pub fn build_odd_scheme(orientations: &[Orientation], kappa: f64) -> Result<Protocol> {
    check_kappa(kappa)?;
    let n = orientations.len();
    if n < 2 {
        return Err(Error::invalid("the scheme needs at least two samples"));
    }
    if orientations.iter().all(|&o| o == orientations[0]) {
        return Err(Error::invalid(
            "all samples share one orientation: the summed spins do not commute",
        ));
    }
    let all_z = || (1..=n).map(|k| Pass::new(k, Angle::ZERO)).collect::<Vec<_>>();
    let quarter = |k: usize, s: i64| pi(s * orientations[k - 1].sign() as i64, 2);
    let mut p = Protocol::new(orientations.to_vec())
        .named("opposite-polarization", None)
        .beam(BeamStep::new(kappa, all_z(), Readout::Sampled));
    for k in 1..=n {
        p.steps.push(Step::Rotate { sample: k, angle: quarter(k, 1) });
    }
    p = p.beam(BeamStep::new(kappa, all_z(), Readout::Sampled));
    for k in 1..=n {
        p.steps.push(Step::Rotate { sample: k, angle: quarter(k, -1) });
    }
    let net: i64 = orientations.iter().map(|o| o.sign() as i64).sum();
    if net == 0 {
        p = p.check(Check::OddScheme {
            expect: Expect::Entangled,
            tol: None,
        });
    }
    Ok(p.report(var_report(sum_terms(n, Spin::Y), "ysum"))
        .report(var_report(sum_terms(n, Spin::Z), "zsum")))
}

/// One measured beam per vertex `a`, through `a` and its neighbors, reading
/// the nullifier `J_z⁽ᵃ⁾ − Σ_{b∈N_a} J_y⁽ᵇ⁾`.
///
/// With `rotated`, the beam reads the nullifier of the rotated variables
/// `J_y′ = (J_y − J_z)/√2`, `J_z′ = (J_y + J_z)/√2`: sample `a` is crossed
/// at π/4 and each neighbor at −π/4. Otherwise `a` is crossed at 0 and each
/// neighbor at −π/2.
pub fn build_cluster(graph: &Graph, kappa: f64, rotated: bool) -> Result<Protocol> {
    check_kappa(kappa)?;
    let (center, neighbor) = if rotated {
        (pi(1, 4), pi(-1, 4))
    } else {
        (Angle::ZERO, pi(-1, 2))
    };
    let mut p = Protocol::new(vec![Orientation::Plus; graph.n_vertices()]).named("cluster", Some("6"));
    for a in graph.vertices() {
        let mut members = graph.neighbors(a);
        members.push(a);
        members.sort_unstable();
        let passes = members
            .into_iter()
            .map(|s| Pass::new(s, if s == a { center } else { neighbor }))
            .collect();
        p = p.beam(BeamStep::new(kappa, passes, Readout::Sampled));
    }
    let edges: Vec<(usize, usize)> = graph.edges().collect();
    Ok(p.check(Check::Nullifiers {
        edges: edges.clone(),
        rotated,
        expect: Expect::Entangled,
        tol: None,
    })
    .report(Report::Nullifiers { edges, rotated }))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::criteria::{self, cluster_nullifier_variances, log_negativity, odd_scheme_test, DEFAULT_TOL};
    use crate::interface::Spin::{Y, Z};
    use approx::assert_abs_diff_eq;

    fn var(ens: &Ensembles, terms: &[(usize, Spin, f64)]) -> f64 {
        ens.spin_variance(terms).unwrap()
    }

    fn bip(ens: &Ensembles) -> BipartiteVariances {
        BipartiteVariances {
            y_sum: var(ens, &[(1, Y, 1.0), (2, Y, 1.0)]),
            y_diff: var(ens, &[(1, Y, 1.0), (2, Y, -1.0)]),
            z_sum: var(ens, &[(1, Z, 1.0), (2, Z, 1.0)]),
            z_diff: var(ens, &[(1, Z, 1.0), (2, Z, -1.0)]),
        }
    }

    fn assert_table(a: BipartiteVariances, b: BipartiteVariances, tol: f64) {
        assert_abs_diff_eq!(a.y_sum, b.y_sum, epsilon = tol);
        assert_abs_diff_eq!(a.y_diff, b.y_diff, epsilon = tol);
        assert_abs_diff_eq!(a.z_sum, b.z_sum, epsilon = tol);
        assert_abs_diff_eq!(a.z_diff, b.z_diff, epsilon = tol);
    }

    #[test]
    fn epr_values() {
        let e = build_epr(1.0).unwrap().simulate(1, &[]).unwrap().ensembles;
        let t = bip(&e);
        assert_abs_diff_eq!(t.z_sum, 1.0 / 3.0, epsilon = 1e-14);
        assert_abs_diff_eq!(t.y_diff, 1.0, epsilon = 1e-14);
        assert_table(t, expected_variances_bipartite(1.0), 1e-12);
        let e0 = build_epr(0.0).unwrap().simulate(1, &[]).unwrap().ensembles;
        assert_eq!(e0.state().cov(), Ensembles::uniform(2).unwrap().state().cov());
        for k in [0.2, 3.0] {
            let e = build_epr(k).unwrap().simulate(9, &[]).unwrap().ensembles;
            assert_abs_diff_eq!(bip(&e).y_diff, 1.0, epsilon = 1e-12);
        }
        assert!(build_epr(-1.0).is_err());
    }

    #[test]
    fn second_beam_keeps_first_squeezing() {
        let k = 0.9;
        let two = build_two_variable_epr(k).unwrap().simulate(2, &[]).unwrap().ensembles;
        let t = bip(&two);
        assert_abs_diff_eq!(t.z_sum, expected_variances_bipartite(k).z_sum, epsilon = 1e-12);
        assert!(t.z_sum < 1.0 && t.y_diff < 1.0);
        let zero = build_two_variable_epr(0.0).unwrap().simulate(2, &[]).unwrap().ensembles;
        assert_table(bip(&zero), expected_variances_bipartite(0.0), 1e-15);
    }

    #[test]
    fn eraser_kappa_values() {
        assert_abs_diff_eq!(eraser_kappa2(1.0, 2), 1.0 / 3f64.sqrt(), epsilon = 1e-15);
        assert_eq!(eraser_kappa2(0.0, 2), 0.0);
        let mut last = f64::INFINITY;
        for n in 2..10 {
            let k2 = eraser_kappa2(1.0, n).powi(2);
            assert_abs_diff_eq!(k2, 1.0 / (1.0 + n as f64), epsilon = 1e-15);
            assert!(k2 < last);
            last = k2;
        }
    }

    #[test]
    fn eraser_values() {
        let k1 = 1.0;
        let e = build_eraser(k1, eraser_kappa2(k1, 2), 2).unwrap().simulate(5, &[]).unwrap().ensembles;
        let t = bip(&e);
        assert_abs_diff_eq!(t.y_sum, 1.0, epsilon = 1e-12);
        assert_abs_diff_eq!(t.z_sum, 1.0, epsilon = 1e-12);

        let e = build_eraser(1.0, 0.3, 2).unwrap().simulate(5, &[]).unwrap().ensembles;
        assert_abs_diff_eq!(bip(&e).z_sum, 2.0 * 0.09 + 1.0 / 3.0, epsilon = 1e-12);
        assert_table(bip(&e), expected_variances_two_beam(1.0, 0.3), 1e-12);

        let a = build_eraser(0.7, 0.0, 2).unwrap().simulate(5, &[]).unwrap().ensembles;
        let b = build_epr(0.7).unwrap().simulate(5, &[]).unwrap().ensembles;
        assert!((a.state().cov() - b.state().cov()).amax() < 1e-14);
    }

    #[test]
    fn eraser_fixed_point_is_displaced_vacuum() {
        for n in 2..=5 {
            let p = build_eraser_fixed_point(1.5, n).unwrap();
            let e = p.simulate(11, &[]).unwrap().ensembles;
            let vac = Ensembles::uniform(n).unwrap();
            assert!((e.state().cov() - vac.state().cov()).amax() < 1e-10);
            assert!(e.state().mean().amax() > 0.0);
            assert!(log_negativity(&e, &[1]).unwrap() <= 1e-9);
        }
    }

    #[test]
    fn table_consistency() {
        for k in [0.0, 0.4, 1.7] {
            assert_eq!(expected_variances_two_beam(k, 0.0), expected_variances_bipartite(k));
        }
        let g = expected_variances_ghz(3, 1.0);
        assert_abs_diff_eq!(g.z_sum, 3.0 / 8.0);
        assert_abs_diff_eq!(g.y_diff, 0.25);
        let t = expected_variances_bipartite(1.0);
        assert_eq!((t.y_sum, t.y_diff, t.z_diff), (3.0, 1.0, 1.0));
        assert_abs_diff_eq!(t.z_sum, 1.0 / 3.0);
    }

    #[test]
    fn squeezing_is_monotone() {
        let ks = [0.1, 0.5, 1.0, 2.0, 4.0];
        for w in ks.windows(2) {
            assert!(expected_variances_bipartite(w[1]).z_sum < expected_variances_bipartite(w[0]).z_sum);
            assert!(expected_variances_ghz(4, w[1]).y_diff < expected_variances_ghz(4, w[0]).y_diff);
        }
        for n in 2..8 {
            assert!(expected_variances_ghz(n + 1, 1.0).y_diff < expected_variances_ghz(n, 1.0).y_diff);
        }
    }

    #[test]
    fn ghz_generic_matches_table() {
        for n in [2, 3, 4] {
            let p = build_ghz_generic(n, 1.0).unwrap();
            assert_eq!(p.beam_count(), 1 + n * (n - 1) / 2);
            let e = p.simulate(3, &[]).unwrap().ensembles;
            let t = expected_variances_ghz(n, 1.0);
            let zsum: Vec<_> = (1..=n).map(|k| (k, Z, 1.0)).collect();
            assert_abs_diff_eq!(var(&e, &zsum), t.z_sum, epsilon = 1e-12);
            for i in 2..=n {
                for j in 1..i {
                    assert_abs_diff_eq!(var(&e, &[(i, Y, 1.0), (j, Y, -1.0)]), t.y_diff, epsilon = 1e-12);
                }
            }
        }
        let two = build_ghz_generic(2, 0.6).unwrap().simulate(0, &[]).unwrap().ensembles;
        let ref2 = build_two_variable_epr(0.6).unwrap().simulate(0, &[]).unwrap().ensembles;
        assert!((two.state().cov() - ref2.state().cov()).amax() < 1e-14);
        assert!(build_ghz_generic(1, 1.0).is_err());
    }

    #[test]
    fn ghz_pair_overrides() {
        let p = build_ghz_generic_with(3, 1.0, |i, _| if i == 3 { 2.0 } else { 0.5 }).unwrap();
        let ks: Vec<_> = p
            .steps
            .iter()
            .filter_map(|s| match s {
                Step::Beam(b) => Some(b.kappa.clone()),
                _ => None,
            })
            .collect();
        assert_eq!(ks, vec![1.0.into(), 0.5.into(), 2.0.into(), 2.0.into()]);
    }

    #[test]
    fn ghz_even_pure_and_verified() {
        let one = build_ghz_even(1, 0.8, 0.8, 0.8).unwrap().simulate(4, &[]).unwrap();
        let two = build_two_variable_epr(0.8).unwrap().simulate(4, &[]).unwrap();
        assert!((one.ensembles.state().cov() - two.ensembles.state().cov()).amax() < 1e-14);

        let p = build_ghz_even(2, 1.0, 1.0, 1.0).unwrap();
        let t = p.simulate(4, &[]).unwrap();
        let e = &t.ensembles;
        assert!(e.state().is_pure(1e-9).unwrap());
        assert!(var(e, &[(1, Z, 1.0), (2, Z, 1.0), (3, Z, 1.0), (4, Z, 1.0)]) < 2.0);
        assert!(var(e, &[(1, Y, 1.0), (2, Y, -1.0), (3, Y, 1.0), (4, Y, -1.0)]) < 2.0);
        let predicted = t.records.iter().find_map(|r| r.predicted_variance).unwrap();
        let Step::Verify(vb) = &p.steps[2] else { panic!("verification step expected") };
        let joint = e.propagate(&vb.to_beam(&BTreeMap::new()).unwrap()).unwrap();
        assert_abs_diff_eq!(predicted, joint.cov()[(8, 8)], epsilon = 1e-12);
        assert!(build_ghz_even(0, 1.0, 1.0, 1.0).is_err());
    }

    #[test]
    fn opposite_polarization_scheme() {
        use Orientation::{Minus, Plus};
        let pair = build_odd_scheme(&[Plus, Minus], 1.0).unwrap().simulate(0, &[]).unwrap().ensembles;
        let r = odd_scheme_test(&pair, DEFAULT_TOL).unwrap();
        assert_abs_diff_eq!(r.lhs, 2.0 / 3.0, epsilon = 1e-12);
        assert!(r.violated);

        let zero = build_odd_scheme(&[Plus, Minus], 0.0).unwrap().simulate(0, &[]).unwrap().ensembles;
        let r = odd_scheme_test(&zero, DEFAULT_TOL).unwrap();
        assert_abs_diff_eq!(r.lhs, 2.0, epsilon = 1e-12);
        assert!(!r.violated);

        let four = build_odd_scheme(&[Plus, Plus, Minus, Minus], 1.0).unwrap().simulate(0, &[]).unwrap().ensembles;
        assert!(odd_scheme_test(&four, DEFAULT_TOL).unwrap().lhs < 4.0);

        let odd = build_odd_scheme(&balanced_orientations(3), 1.0).unwrap();
        assert_eq!(odd.warnings().len(), 1);
        assert!(odd.checks.is_empty());
        assert!(build_odd_scheme(&[Plus, Plus], 1.0).is_err());
    }

    #[test]
    fn cluster_beam_geometry() {
        let g = Graph::path(4).unwrap();
        let p = build_cluster(&g, 1.0, true).unwrap();
        let touched: Vec<Vec<usize>> = p
            .steps
            .iter()
            .map(|s| match s {
                Step::Beam(b) => b.passes.iter().map(|q| q.sample).collect(),
                _ => unreachable!(),
            })
            .collect();
        assert_eq!(touched, vec![vec![1, 2], vec![1, 2, 3], vec![2, 3, 4], vec![3, 4]]);
        let Step::Beam(first) = &p.steps[0] else { unreachable!() };
        assert_eq!(first.passes[0].angle, pi(1, 4));
        assert_eq!(first.passes[1].angle, pi(-1, 4));
    }

    #[test]
    fn cluster_squeezes_every_nullifier() {
        let g = Graph::path(4).unwrap();
        for rotated in [true, false] {
            let e = build_cluster(&g, 1.0, rotated).unwrap().simulate(0, &[]).unwrap().ensembles;
            let v = cluster_nullifier_variances(&e, &g, rotated).unwrap();
            for (a, x) in v {
                assert!(x < criteria::vacuum_nullifier_variance(&g, a), "vertex {a}: {x}");
            }
        }
    }

    #[test]
    fn cluster_edge_is_two_mode_squeezing() {
        let g = Graph::path(2).unwrap();
        let k: f64 = 0.7;
        let e = build_cluster(&g, k, true).unwrap().simulate(0, &[]).unwrap().ensembles;
        for (_, x) in cluster_nullifier_variances(&e, &g, true).unwrap() {
            assert_abs_diff_eq!(x, 1.0 / (1.0 + 2.0 * k * k), epsilon = 1e-12);
        }
        // Same numbers as the two-variable EPR run read in the unrotated frame.
        let epr = build_two_variable_epr(k).unwrap().simulate(0, &[]).unwrap().ensembles;
        assert_abs_diff_eq!(bip(&epr).z_sum, 1.0 / (1.0 + 2.0 * k * k), epsilon = 1e-12);
    }

    #[test]
    fn validation_errors() {
        let mut p = build_epr(1.0).unwrap();
        p.steps.push(Step::Rotate { sample: 3, angle: Angle::ZERO });
        assert!(matches!(p.validate(), Err(Error::AtStep { index: 2, .. })));
        let mut q = build_epr(1.0).unwrap();
        q.steps[0] = Step::Beam(BeamStep::new(Scalar::Param("k".into()), vec![Pass::new(1, Angle::ZERO)], Readout::Sampled));
        assert!(q.validate().is_err());
        q.params.push(("k".into(), 0.5));
        assert!(q.validate().is_ok());
        assert!(q.resolve_params(&[("nope".into(), 1.0)]).is_err());
        assert_eq!(q.resolve_params(&[("k".into(), 2.0)]).unwrap()["k"], 2.0);
    }

    #[test]
    fn simulation_is_deterministic() {
        let p = build_ghz_generic(3, 1.0).unwrap();
        let a = p.simulate(17, &[]).unwrap();
        let b = p.simulate(17, &[]).unwrap();
        let c = p.simulate(18, &[]).unwrap();
        assert_eq!(a.records, b.records);
        assert_eq!(a.ensembles, b.ensembles);
        assert_ne!(a.records, c.records);
    }
}
