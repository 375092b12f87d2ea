use std::collections::BTreeMap;

use serde::Serialize;

use super::{parse, print_check, RunError};
use crate::criteria::{self, Bipartition, CertifyOptions, CriterionReport, DuanSign, DEFAULT_TOL};
use crate::graph::Graph;
use crate::interface::{Ensembles, Spin};
use crate::protocols::{Check, Expect, Protocol, Report, SpinTerm, StepRecord};
use crate::{Error, Result};

/// Version of the JSON run report layout.
pub const REPORT_SCHEMA: u32 = 1;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateSummary {
    pub mean: Vec<f64>,
    pub cov: Vec<Vec<f64>>,
}

/// One requested quantity.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Output {
    pub name: String,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub statement: String,
    pub passed: bool,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub value: Option<f64>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub reports: Vec<CriterionReport>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

/// Everything a run produced. Serializes to byte-identical JSON for equal
/// inputs.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunReport {
    pub schema: u32,
    pub version: &'static str,
    pub protocol: Option<String>,
    pub figure: Option<String>,
    pub seed: u64,
    pub params: BTreeMap<String, f64>,
    pub warnings: Vec<String>,
    pub steps: Vec<StepRecord>,
    pub final_state: StateSummary,
    pub outputs: Vec<Output>,
    pub checks: Vec<CheckOutcome>,
    pub passed: bool,
}

impl RunReport {
    pub fn output(&self, name: &str) -> Option<f64> {
        self.outputs.iter().find(|o| o.name == name).map(|o| o.value)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

fn triples(terms: &[SpinTerm]) -> Vec<(usize, Spin, f64)> {
    terms.iter().map(SpinTerm::triple).collect()
}

fn expected(expect: Expect, violated: bool) -> bool {
    match expect {
        Expect::Entangled => violated,
        Expect::Separable => !violated,
    }
}

fn all_expected(expect: Expect, reports: &[CriterionReport]) -> bool {
    match expect {
        Expect::Entangled => reports.iter().all(|r| r.violated),
        Expect::Separable => reports.iter().all(|r| !r.violated),
    }
}

fn single(expect: Expect, r: CriterionReport) -> (bool, Option<f64>, Vec<CriterionReport>) {
    (expected(expect, r.violated), Some(r.lhs), vec![r])
}

fn graph_of(ens: &Ensembles, edges: &[(usize, usize)]) -> Result<Graph> {
    Graph::new(ens.n_samples(), edges.iter().copied())
}

fn evaluate(ens: &Ensembles, check: &Check) -> Result<(bool, Option<f64>, Vec<CriterionReport>)> {
    Ok(match check {
        Check::Duan { i, j, lambda, sign, expect, tol } => {
            let tol = tol.unwrap_or(DEFAULT_TOL);
            let r = match (lambda, sign) {
                (None, _) => criteria::duan_optimized(ens, *i, *j, tol)?,
                (Some(l), Some(s)) => criteria::duan_test_tol(ens, *i, *j, *l, *s, tol)?,
                (Some(l), None) => {
                    let a = criteria::duan_test_tol(ens, *i, *j, *l, DuanSign::Plus, tol)?;
                    let b = criteria::duan_test_tol(ens, *i, *j, *l, DuanSign::Minus, tol)?;
                    if b.lhs < a.lhs {
                        b
                    } else {
                        a
                    }
                }
            };
            single(*expect, r)
        }
        Check::Vlf { h, g, split, expect, tol } => match split {
            Some(side) => {
                let split = Bipartition::new(ens.n_samples(), side)?;
                single(*expect, criteria::vlf_test(ens, h, g, &split, tol.unwrap_or(DEFAULT_TOL))?)
            }
            None => {
                let opts = CertifyOptions {
                    tol: *tol,
                    ..CertifyOptions::default()
                };
                let rep = criteria::vlf_certify_genuine(ens, h, g, &opts)?;
                (all_expected(*expect, &rep.reports), None, rep.reports)
            }
        },
        Check::Ghz { pair, expect, tol } => {
            let tol = tol.unwrap_or(DEFAULT_TOL);
            match pair {
                Some((i, j)) => single(*expect, criteria::ghz_pairwise_test(ens, *i, *j, tol)?),
                None => {
                    let reports = criteria::ghz_all_pairs(ens, tol)?;
                    (all_expected(*expect, &reports), None, reports)
                }
            }
        }
        Check::OddScheme { expect, tol } => single(*expect, criteria::odd_scheme_test(ens, tol.unwrap_or(DEFAULT_TOL))?),
        Check::Nullifiers { edges, rotated, expect, tol } => {
            let g = graph_of(ens, edges)?;
            let reports = criteria::nullifier_squeezing(ens, &g, *rotated, tol.unwrap_or(DEFAULT_TOL))?;
            (all_expected(*expect, &reports), None, reports)
        }
        Check::Negativity { side, cmp, value, tol } => {
            let v = criteria::log_negativity(ens, side)?;
            (cmp.holds(v, *value, tol.unwrap_or(DEFAULT_TOL)), Some(v), Vec::new())
        }
        Check::Variance { terms, cmp, value, tol } => {
            let v = ens.spin_variance(&triples(terms))?;
            (cmp.holds(v, *value, tol.unwrap_or(DEFAULT_TOL)), Some(v), Vec::new())
        }
    })
}

fn term_text(terms: &[SpinTerm]) -> String {
    terms.iter().map(super::print::term).collect()
}

fn outputs(ens: &Ensembles, report: &Report) -> Result<Vec<Output>> {
    Ok(match report {
        Report::Variance { terms, label } => vec![Output {
            name: label.clone().unwrap_or_else(|| format!("var({})", term_text(terms))),
            value: ens.spin_variance(&triples(terms))?,
        }],
        Report::Negativity { side, label } => vec![Output {
            name: label
                .clone()
                .unwrap_or_else(|| format!("negativity({})", criteria::join_ids(side))),
            value: criteria::log_negativity(ens, side)?,
        }],
        Report::Nullifiers { edges, rotated } => {
            let g = graph_of(ens, edges)?;
            criteria::cluster_nullifier_variances(ens, &g, *rotated)?
                .into_iter()
                .map(|(a, value)| Output {
                    name: format!("nullifier{a}"),
                    value,
                })
                .collect()
        }
    })
}

/// Simulates a protocol and evaluates its checks and reports.
///
/// Simulation failures are errors. A check that cannot be evaluated (for
/// instance the summed-variance test on unbalanced samples) fails with its
/// error recorded instead.
pub fn run_protocol(protocol: &Protocol, seed: u64, overrides: &[(String, f64)]) -> Result<RunReport> {
    let trace = protocol.simulate(seed, overrides)?;
    let ens = &trace.ensembles;
    let checks: Vec<CheckOutcome> = protocol
        .checks
        .iter()
        .map(|c| {
            let statement = print_check(c);
            match evaluate(ens, c) {
                Ok((passed, value, reports)) => CheckOutcome {
                    statement,
                    passed,
                    value,
                    reports,
                    error: None,
                },
                Err(e) => CheckOutcome {
                    statement,
                    passed: false,
                    value: None,
                    reports: Vec::new(),
                    error: Some(e.to_string()),
                },
            }
        })
        .collect();
    let mut outs = Vec::new();
    for r in &protocol.reports {
        outs.extend(outputs(ens, r)?);
    }
    let state = ens.state();
    let n = state.cov().nrows();
    let final_state = StateSummary {
        mean: state.mean().iter().copied().collect(),
        cov: (0..n).map(|r| state.cov().row(r).iter().copied().collect()).collect(),
    };
    if final_state.cov.iter().flatten().chain(&final_state.mean).any(|v| !v.is_finite()) {
        return Err(Error::NonFinite("final state"));
    }
    Ok(RunReport {
        schema: REPORT_SCHEMA,
        version: env!("CARGO_PKG_VERSION"),
        protocol: protocol.name.clone(),
        figure: protocol.figure.clone(),
        seed,
        params: protocol.resolve_params(overrides)?,
        warnings: protocol.warnings(),
        steps: trace.records,
        final_state,
        outputs: outs,
        passed: checks.iter().all(|c| c.passed),
        checks,
    })
}

/// Parses and runs a script.
pub fn run_script(src: &str, seed: u64, overrides: &[(String, f64)]) -> Result<RunReport, RunError> {
    let protocol = parse(src)?;
    Ok(run_protocol(&protocol, seed, overrides)?)
}
