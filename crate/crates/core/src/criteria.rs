//! Entanglement criteria on the spin variances of the samples.
//!
//! Every variance here is in units of `ħJ_x` and every bound is the pure
//! number multiplying `ħJ_x` in the corresponding inequality, so a bound
//! `c·ħJ_x` is compared against canonical variances directly.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::gaussian::{partial_transpose, symplectic_spectrum, VACUUM_VARIANCE};
use crate::graph::Graph;
use crate::interface::{Ensembles, Spin};

/// Default absolute slack before a bound counts as violated.
pub const DEFAULT_TOL: f64 = 1e-9;

/// Largest sample count for which all bipartitions are enumerated unless
/// the caller opts in explicitly.
pub const MAX_ENUMERATED_SAMPLES: usize = 12;

/// Outcome of one variance inequality `lhs ≥ bound`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CriterionReport {
    pub name: String,
    pub lhs: f64,
    pub bound: f64,
    /// `lhs < bound − tol`.
    pub violated: bool,
    pub tol: f64,
    pub witness: Witness,
}

/// The combinations and splitting a criterion was evaluated on.
#[derive(Debug, Clone, PartialEq, Default, Serialize)]
pub struct Witness {
    /// Quadrature coefficients of the first combination.
    pub u: Vec<f64>,
    /// Quadrature coefficients of the second combination.
    pub v: Vec<f64>,
    /// Samples on the first side of the bipartition, when there is one.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub side: Option<Vec<usize>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda: Option<f64>,
}

impl CriterionReport {
    fn new(name: impl Into<String>, lhs: f64, bound: f64, tol: f64, witness: Witness) -> Self {
        CriterionReport {
            name: name.into(),
            lhs,
            bound,
            violated: lhs < bound - tol,
            tol,
            witness,
        }
    }
}

/// Relative sign of the second sample in the Duan combinations.
///
/// `Plus` is `(|λ|J_y⁽ⁱ⁾ + J_y⁽ʲ⁾/λ, |λ|J_z⁽ⁱ⁾ − J_z⁽ʲ⁾/λ)`; `Minus` flips the
/// sample-`j` terms, giving `(J_y⁽ⁱ⁾ − J_y⁽ʲ⁾, J_z⁽ⁱ⁾ + J_z⁽ʲ⁾)` at λ = 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub enum DuanSign {
    Plus,
    Minus,
}

impl DuanSign {
    fn factor(self) -> f64 {
        match self {
            DuanSign::Plus => 1.0,
            DuanSign::Minus => -1.0,
        }
    }
}

/// Two-mode separability test:
/// `Var(|λ|J_y⁽ⁱ⁾ ± J_y⁽ʲ⁾/λ) + Var(|λ|J_z⁽ⁱ⁾ ∓ J_z⁽ʲ⁾/λ) ≥ λ² + 1/λ²`.
pub fn duan_test(ens: &Ensembles, i: usize, j: usize, lambda: f64, sign: DuanSign) -> Result<CriterionReport> {
    duan_test_tol(ens, i, j, lambda, sign, DEFAULT_TOL)
}

pub fn duan_test_tol(
    ens: &Ensembles,
    i: usize,
    j: usize,
    lambda: f64,
    sign: DuanSign,
    tol: f64,
) -> Result<CriterionReport> {
    if i == j {
        return Err(Error::invalid("Duan test needs two distinct samples"));
    }
    if lambda == 0.0 || !lambda.is_finite() {
        return Err(Error::invalid("λ must be finite and nonzero"));
    }
    let s = sign.factor();
    let u = ens.spin_coeffs(&[(i, Spin::Y, lambda.abs()), (j, Spin::Y, s / lambda)])?;
    let v = ens.spin_coeffs(&[(i, Spin::Z, lambda.abs()), (j, Spin::Z, -s / lambda)])?;
    let lhs = ens.state().variance_of(&u)? + ens.state().variance_of(&v)?;
    let bound = lambda * lambda + 1.0 / (lambda * lambda);
    Ok(CriterionReport::new(
        format!("duan({i},{j})"),
        lhs,
        bound,
        tol,
        Witness {
            u,
            v,
            side: Some(vec![i]),
            lambda: Some(lambda),
        },
    ))
}

/// Duan test at the λ > 0 and sign that minimize `lhs/bound`.
///
/// λ is found by golden-section search on `ln λ ∈ [−ln 10³, ln 10³]` to a
/// tolerance of 1e-10.
pub fn duan_optimized(ens: &Ensembles, i: usize, j: usize, tol: f64) -> Result<CriterionReport> {
    let mut best: Option<CriterionReport> = None;
    for sign in [DuanSign::Plus, DuanSign::Minus] {
        let ratio = |t: f64| -> Result<f64> {
            let r = duan_test_tol(ens, i, j, t.exp(), sign, tol)?;
            Ok(r.lhs / r.bound)
        };
        let t = golden_section_min(ratio, -(1e3f64.ln()), 1e3f64.ln(), 1e-10)?;
        let r = duan_test_tol(ens, i, j, t.exp(), sign, tol)?;
        if best.as_ref().is_none_or(|b| r.lhs / r.bound < b.lhs / b.bound) {
            best = Some(r);
        }
    }
    Ok(best.expect("two signs evaluated"))
}

fn golden_section_min<F: Fn(f64) -> Result<f64>>(f: F, mut a: f64, mut b: f64, tol: f64) -> Result<f64> {
    let inv_phi = (5f64.sqrt() - 1.0) / 2.0;
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut fc, mut fd) = (f(c)?, f(d)?);
    while (b - a).abs() > tol {
        if fc < fd {
            b = d;
            d = c;
            fd = fc;
            c = b - inv_phi * (b - a);
            fc = f(c)?;
        } else {
            a = c;
            c = d;
            fc = fd;
            d = a + inv_phi * (b - a);
            fd = f(d)?;
        }
    }
    Ok(0.5 * (a + b))
}

/// A split of the samples into two nonempty groups.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize)]
pub struct Bipartition {
    side: Vec<usize>,
    other: Vec<usize>,
}

impl Bipartition {
    /// `side` against the remaining samples of `1..=n`.
    pub fn new(n: usize, side: &[usize]) -> Result<Self> {
        let mut in_side = vec![false; n + 1];
        for &s in side {
            if s == 0 || s > n {
                return Err(Error::UnknownSample(s));
            }
            if in_side[s] {
                return Err(Error::InvalidPartition(format!("sample {s} listed twice")));
            }
            in_side[s] = true;
        }
        let side: Vec<usize> = (1..=n).filter(|&k| in_side[k]).collect();
        let other: Vec<usize> = (1..=n).filter(|&k| !in_side[k]).collect();
        if side.is_empty() || other.is_empty() {
            return Err(Error::InvalidPartition(
                "both sides of a bipartition must be nonempty".into(),
            ));
        }
        Ok(Bipartition { side, other })
    }

    pub fn side(&self) -> &[usize] {
        &self.side
    }

    pub fn other(&self) -> &[usize] {
        &self.other
    }

    pub fn n_samples(&self) -> usize {
        self.side.len() + self.other.len()
    }

    /// The same split with sample 1 on the first side.
    pub fn canonical(&self) -> Bipartition {
        if self.side.contains(&1) {
            self.clone()
        } else {
            Bipartition {
                side: self.other.clone(),
                other: self.side.clone(),
            }
        }
    }
}

/// Every bipartition of `1..=n` once, with sample 1 on the first side.
pub fn bipartitions(n: usize) -> Vec<Bipartition> {
    if n < 2 {
        return Vec::new();
    }
    let rest = n - 1;
    (0u64..(1u64 << rest) - 1)
        .map(|mask| {
            let mut side = vec![1];
            side.extend((0..rest).filter(|b| mask >> b & 1 == 1).map(|b| b + 2));
            Bipartition::new(n, &side).expect("valid by construction")
        })
        .collect()
}

/// Bound coefficient `|h_m g_m + Σ_{r∈I} h_r g_r| + |h_n g_n + Σ_{s∈I′} h_s g_s|`.
///
/// `m`, `n`, `I` and `I′` are 1-based sample ids and must partition the
/// samples.
pub fn vlf_f(h: &[f64], g: &[f64], m: usize, n: usize, group_m: &[usize], group_n: &[usize]) -> Result<f64> {
    if h.len() != g.len() {
        return Err(Error::DimensionMismatch {
            expected: h.len(),
            found: g.len(),
        });
    }
    let total = h.len();
    let mut seen = vec![false; total + 1];
    for &k in std::iter::once(&m).chain(group_m).chain(std::iter::once(&n)).chain(group_n) {
        if k == 0 || k > total {
            return Err(Error::InvalidPartition(format!("sample {k} out of range")));
        }
        if seen[k] {
            return Err(Error::InvalidPartition(format!("sample {k} appears twice")));
        }
        seen[k] = true;
    }
    if let Some(k) = (1..=total).find(|&k| !seen[k]) {
        return Err(Error::InvalidPartition(format!("sample {k} not assigned")));
    }
    let sum = |head: usize, rest: &[usize]| {
        std::iter::once(head)
            .chain(rest.iter().copied())
            .map(|k| h[k - 1] * g[k - 1])
            .sum::<f64>()
            .abs()
    };
    Ok(sum(m, group_m) + sum(n, group_n))
}

/// [`vlf_f`] for a bipartition; the choice of `m` and `n` inside each side
/// does not change the value.
pub fn vlf_bound(h: &[f64], g: &[f64], split: &Bipartition) -> Result<f64> {
    if h.len() != split.n_samples() {
        return Err(Error::DimensionMismatch {
            expected: split.n_samples(),
            found: h.len(),
        });
    }
    vlf_f(h, g, split.side[0], split.other[0], &split.side[1..], &split.other[1..])
}

/// `Var(Σ h_i J_y⁽ⁱ⁾) + Var(Σ g_i J_z⁽ⁱ⁾) ≥ f(h, g)` for one splitting.
pub fn vlf_test(ens: &Ensembles, h: &[f64], g: &[f64], split: &Bipartition, tol: f64) -> Result<CriterionReport> {
    let n = ens.n_samples();
    if n < 2 {
        return Err(Error::invalid("multipartite test needs at least two samples"));
    }
    for c in [h, g] {
        if c.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: c.len(),
            });
        }
    }
    if split.n_samples() != n {
        return Err(Error::InvalidPartition(format!(
            "splitting covers {} samples, state has {n}",
            split.n_samples()
        )));
    }
    let u = ens.spin_coeffs(&(1..=n).map(|k| (k, Spin::Y, h[k - 1])).collect::<Vec<_>>())?;
    let v = ens.spin_coeffs(&(1..=n).map(|k| (k, Spin::Z, g[k - 1])).collect::<Vec<_>>())?;
    let lhs = ens.state().variance_of(&u)? + ens.state().variance_of(&v)?;
    let bound = vlf_bound(h, g, split)?;
    let name = format!(
        "vlf({}|{})",
        join_ids(split.side()),
        join_ids(split.other())
    );
    Ok(CriterionReport::new(
        name,
        lhs,
        bound,
        tol,
        Witness {
            u,
            v,
            side: Some(split.side().to_vec()),
            lambda: None,
        },
    ))
}

pub(crate) fn join_ids(ids: &[usize]) -> String {
    ids.iter().map(|k| k.to_string()).collect::<Vec<_>>().join(",")
}

/// Options for [`vlf_certify_genuine`].
#[derive(Debug, Clone, Default)]
pub struct CertifyOptions {
    /// Replacement `(h, g)` for particular splittings.
    pub overrides: Vec<(Bipartition, Vec<f64>, Vec<f64>)>,
    /// Allow enumeration above [`MAX_ENUMERATED_SAMPLES`].
    pub allow_large: bool,
    pub tol: Option<f64>,
}

/// Result of testing every bipartition.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GenuineReport {
    pub reports: Vec<CriterionReport>,
    /// Every splitting's inequality is violated.
    pub genuine: bool,
}

/// Runs [`vlf_test`] on every bipartition of the samples.
pub fn vlf_certify_genuine(ens: &Ensembles, h: &[f64], g: &[f64], opts: &CertifyOptions) -> Result<GenuineReport> {
    let n = ens.n_samples();
    if n < 2 {
        return Err(Error::invalid("multipartite test needs at least two samples"));
    }
    if n > MAX_ENUMERATED_SAMPLES && !opts.allow_large {
        return Err(Error::invalid(format!(
            "refusing to enumerate {} splittings of {n} samples without an explicit override",
            (1u64 << (n - 1)) - 1
        )));
    }
    let tol = opts.tol.unwrap_or(DEFAULT_TOL);
    let reports = bipartitions(n)
        .iter()
        .map(|split| {
            let (hh, gg) = opts
                .overrides
                .iter()
                .find(|(s, _, _)| s.canonical() == *split)
                .map(|(_, hh, gg)| (hh.as_slice(), gg.as_slice()))
                .unwrap_or((h, g));
            vlf_test(ens, hh, gg, split, tol)
        })
        .collect::<Result<Vec<_>>>()?;
    let genuine = reports.iter().all(|r| r.violated);
    Ok(GenuineReport { reports, genuine })
}

/// Logarithmic negativity `Σ_k max(0, −log₂ 2ν̃_k)` across the split
/// between `samples` and the rest.
pub fn log_negativity(ens: &Ensembles, samples: &[usize]) -> Result<f64> {
    let nu = ppt_spectrum(ens, samples)?;
    Ok(nu.iter().map(|&v| (-(2.0 * v).log2()).max(0.0)).sum())
}

/// Symplectic spectrum of the covariance after time-reversing `samples`.
pub fn ppt_spectrum(ens: &Ensembles, samples: &[usize]) -> Result<Vec<f64>> {
    let modes = samples.iter().map(|&s| ens.mode_of(s)).collect::<Result<Vec<_>>>()?;
    let mut sorted = modes.clone();
    sorted.sort_unstable();
    sorted.dedup();
    if sorted.len() != modes.len() {
        return Err(Error::InvalidPartition("sample listed twice".into()));
    }
    symplectic_spectrum(&partial_transpose(ens.state().cov(), &modes)?)
}

/// `Var(J_y⁽ⁱ⁾ − J_y⁽ʲ⁾) + Var(J_z⁽¹⁾ + … + J_z⁽ᴺ⁾) ≥ 2`.
pub fn ghz_pairwise_test(ens: &Ensembles, i: usize, j: usize, tol: f64) -> Result<CriterionReport> {
    if i == j {
        return Err(Error::invalid("pairwise test needs two distinct samples"));
    }
    let n = ens.n_samples();
    let u = ens.spin_coeffs(&[(i, Spin::Y, 1.0), (j, Spin::Y, -1.0)])?;
    let v = ens.spin_coeffs(&(1..=n).map(|k| (k, Spin::Z, 1.0)).collect::<Vec<_>>())?;
    let lhs = ens.state().variance_of(&u)? + ens.state().variance_of(&v)?;
    Ok(CriterionReport::new(
        format!("ghz({i},{j})"),
        lhs,
        2.0,
        tol,
        Witness {
            u,
            v,
            side: Some(vec![i]),
            lambda: None,
        },
    ))
}

/// [`ghz_pairwise_test`] for every pair `i > j`.
pub fn ghz_all_pairs(ens: &Ensembles, tol: f64) -> Result<Vec<CriterionReport>> {
    let n = ens.n_samples();
    let mut out = Vec::new();
    for i in 2..=n {
        for j in 1..i {
            out.push(ghz_pairwise_test(ens, i, j, tol)?);
        }
    }
    Ok(out)
}

/// `Var(Σ J_y⁽ⁱ⁾) + Var(Σ J_z⁽ⁱ⁾) ≥ N` for samples with zero net polarization.
pub fn odd_scheme_test(ens: &Ensembles, tol: f64) -> Result<CriterionReport> {
    if ens.net_polarization() != 0 {
        return Err(Error::NotApplicable(format!(
            "net polarization is {} (the summed spins do not commute)",
            ens.net_polarization()
        )));
    }
    let n = ens.n_samples();
    let u = ens.spin_coeffs(&(1..=n).map(|k| (k, Spin::Y, 1.0)).collect::<Vec<_>>())?;
    let v = ens.spin_coeffs(&(1..=n).map(|k| (k, Spin::Z, 1.0)).collect::<Vec<_>>())?;
    let lhs = ens.state().variance_of(&u)? + ens.state().variance_of(&v)?;
    Ok(CriterionReport::new(
        "odd-scheme",
        lhs,
        n as f64,
        tol,
        Witness {
            u,
            v,
            side: None,
            lambda: None,
        },
    ))
}

/// Quadrature coefficients of the nullifier `J_z⁽ᵃ⁾ − Σ_{b∈N_a} J_y⁽ᵇ⁾`.
///
/// With `rotated`, the per-sample variables `J_y′ = (J_y − J_z)/√2` and
/// `J_z′ = (J_y + J_z)/√2` are used instead.
pub fn nullifier_coeffs(ens: &Ensembles, graph: &Graph, a: usize, rotated: bool) -> Result<Vec<f64>> {
    if graph.n_vertices() != ens.n_samples() {
        return Err(Error::DimensionMismatch {
            expected: ens.n_samples(),
            found: graph.n_vertices(),
        });
    }
    let h = std::f64::consts::FRAC_1_SQRT_2;
    let mut terms = Vec::new();
    if rotated {
        terms.extend([(a, Spin::Y, h), (a, Spin::Z, h)]);
    } else {
        terms.push((a, Spin::Z, 1.0));
    }
    for b in graph.neighbors(a) {
        if rotated {
            terms.extend([(b, Spin::Y, -h), (b, Spin::Z, h)]);
        } else {
            terms.push((b, Spin::Y, -1.0));
        }
    }
    ens.spin_coeffs(&terms)
}

/// Variance of each vertex nullifier, in vertex order.
pub fn cluster_nullifier_variances(ens: &Ensembles, graph: &Graph, rotated: bool) -> Result<Vec<(usize, f64)>> {
    graph
        .vertices()
        .map(|a| {
            let c = nullifier_coeffs(ens, graph, a, rotated)?;
            Ok((a, ens.state().variance_of(&c)?))
        })
        .collect()
}

/// Nullifier variance of the vacuum, `(1 + deg a)/2`.
pub fn vacuum_nullifier_variance(graph: &Graph, a: usize) -> f64 {
    VACUUM_VARIANCE * (1 + graph.degree(a)) as f64
}

/// Compares every nullifier variance with its vacuum value.
pub fn nullifier_squeezing(ens: &Ensembles, graph: &Graph, rotated: bool, tol: f64) -> Result<Vec<CriterionReport>> {
    graph
        .vertices()
        .map(|a| {
            let c = nullifier_coeffs(ens, graph, a, rotated)?;
            let lhs = ens.state().variance_of(&c)?;
            Ok(CriterionReport::new(
                format!("nullifier({a})"),
                lhs,
                vacuum_nullifier_variance(graph, a),
                tol,
                Witness {
                    u: c,
                    ..Witness::default()
                },
            ))
        })
        .collect()
}
