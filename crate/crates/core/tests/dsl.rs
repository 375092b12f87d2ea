//! Parser totality, printer round trips and run determinism.

use faraday::dsl::{self, DiagnosticKind};
use faraday::interface::{Angle, Orientation, Pass, Spin};
use faraday::protocols::{BeamStep, Check, Cmp, Protocol, Readout, Report, Scalar, SpinTerm, Step};
use proptest::prelude::*;

const WORDS: &[&str] = &[
    "protocol", "param", "samples", "orient", "beam", "verify", "rotate", "assert", "report", "pass", "measure",
    "pin=", "seed=", "k=", "$k", "duan", "vlf", "ghz", "odd", "nullifiers", "negativity", "var", "h=", "g=",
    "split=", "graph=", "rotated", "expect=", "entangled", "separable", "tol=", "lambda=", "sign=", "as=", "1",
    "2", "0", "-1", "1e9", "nan", "inf", "@", "pi", "pi/4", "-pi/2", "3pi/4", "1@0", "2@pi/2", "+1y", "-2z",
    "0.5*1y", "1-2", "<", "<=", "==", ">", ">=", "+", "-", ",", "=", "#", "\t", "\n", "é", "*",
];

fn soup() -> impl Strategy<Value = String> {
    prop::collection::vec(prop::sample::select(WORDS), 0..40).prop_map(|w| w.join(" "))
}

fn angle() -> impl Strategy<Value = Angle> {
    prop_oneof![
        (-8i64..=8, prop::sample::select(vec![1i64, 2, 3, 4, 6, 8]))
            .prop_map(|(n, d)| Angle::pi_fraction(n, d).unwrap()),
        (-6.0f64..6.0).prop_map(Angle::Radians),
    ]
}

fn scalar(params: bool) -> impl Strategy<Value = Scalar> {
    prop_oneof![
        (0.0f64..3.0).prop_map(Scalar::Value),
        Just(if params { Scalar::Param("k".into()) } else { Scalar::Value(1.0) }),
    ]
}

fn term(n: usize) -> impl Strategy<Value = SpinTerm> {
    (prop::sample::select(vec![1.0, -1.0, 0.5, -2.25]), 1..=n, any::<bool>())
        .prop_map(|(c, s, y)| SpinTerm::new(c, s, if y { Spin::Y } else { Spin::Z }))
}

fn beam(n: usize) -> impl Strategy<Value = BeamStep> {
    (
        scalar(true),
        prop::sample::subsequence((1..=n).collect::<Vec<_>>(), 1..=n),
        prop::collection::vec(angle(), n),
        prop_oneof![Just(Readout::None), Just(Readout::Sampled), scalar(true).prop_map(Readout::Pinned)],
        prop::option::of(any::<u64>()),
    )
        .prop_map(|(kappa, samples, angles, readout, seed)| {
            let passes = samples.iter().zip(angles).map(|(&s, a)| Pass::new(s, a)).collect();
            BeamStep { kappa, passes, readout, seed }
        })
}

fn step(n: usize) -> impl Strategy<Value = Step> {
    prop_oneof![
        beam(n).prop_map(Step::Beam),
        beam(n).prop_map(|mut b| {
            b.readout = Readout::None;
            b.seed = None;
            Step::Verify(b)
        }),
        (1..=n, angle()).prop_map(|(sample, angle)| Step::Rotate { sample, angle }),
    ]
}

fn cmp() -> impl Strategy<Value = Cmp> {
    prop::sample::select(vec![Cmp::Eq, Cmp::Lt, Cmp::Le, Cmp::Gt, Cmp::Ge])
}

fn protocol() -> impl Strategy<Value = Protocol> {
    (2usize..6).prop_flat_map(|n| {
        (
            prop::collection::vec(any::<bool>(), n),
            prop::collection::vec(step(n), 0..6),
            prop::collection::vec(
                (prop::collection::vec(term(n), 1..4), cmp(), 0.0f64..5.0, prop::option::of(1e-6f64..0.1)),
                0..3,
            ),
            prop::collection::vec((prop::collection::vec(term(n), 1..3), any::<bool>()), 0..3),
            0.1f64..2.0,
        )
            .prop_map(move |(orient, steps, vars, reports, k)| {
                let mut p = Protocol::new(
                    orient.into_iter().map(|b| if b { Orientation::Plus } else { Orientation::Minus }).collect(),
                )
                .named("fuzz", None);
                p.params.push(("k".into(), k));
                p.steps = steps;
                for (terms, cmp, value, tol) in vars {
                    p = p.check(Check::Variance { terms, cmp, value, tol });
                }
                p = p.check(Check::Negativity { side: vec![1], cmp: Cmp::Ge, value: 0.0, tol: None });
                for (i, (terms, labelled)) in reports.into_iter().enumerate() {
                    let label = labelled.then(|| format!("r{i}"));
                    p = p.report(Report::Variance { terms, label });
                }
                p.report(Report::Negativity { side: (1..n).collect(), label: None })
            })
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn parser_never_panics_on_arbitrary_text(src in "\\PC{0,200}") {
        let _ = dsl::parse(&src);
    }

    #[test]
    fn parser_never_panics_on_token_soup(lines in prop::collection::vec(soup(), 0..8)) {
        if let Err(d) = dsl::parse(&lines.join("\n")) {
            prop_assert!(d.line >= 1 && d.col >= 1);
        }
    }

    #[test]
    fn print_then_parse_is_identity(p in protocol()) {
        let text = dsl::print(&p);
        let back = dsl::parse(&text).map_err(|d| TestCaseError::fail(format!("{d}\n{text}")))?;
        prop_assert_eq!(&back, &p, "{}", text);
        prop_assert_eq!(dsl::print(&back), text);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn runs_are_deterministic(p in protocol(), seed in any::<u64>()) {
        let a = dsl::run_protocol(&p, seed, &[]);
        let b = dsl::run_protocol(&p, seed, &[]);
        match (a, b) {
            (Ok(a), Ok(b)) => prop_assert_eq!(a.to_json(), b.to_json()),
            (Err(a), Err(b)) => prop_assert_eq!(a.to_string(), b.to_string()),
            _ => prop_assert!(false, "one run failed and the other did not"),
        }
    }
}

#[test]
fn seeds_change_outcomes_but_not_covariances() {
    let src = dsl::demo_script("eraser").unwrap();
    let a = dsl::run_script(src, 1, &[]).unwrap();
    let b = dsl::run_script(src, 2, &[]).unwrap();
    assert_ne!(a.final_state.mean, b.final_state.mean);
    assert_eq!(a.final_state.cov, b.final_state.cov);
    assert_eq!(a.outputs, b.outputs);
}

#[test]
fn every_demo_passes_its_assertions() {
    for name in ["epr", "eraser", "ghz", "cluster"] {
        let r = dsl::run_script(dsl::demo_script(name).unwrap(), 0, &[]).unwrap();
        assert!(r.passed, "{name}: {:?}", r.checks);
        let reparsed = dsl::parse(&dsl::print(&dsl::parse(dsl::demo_script(name).unwrap()).unwrap())).unwrap();
        assert_eq!(dsl::run_protocol(&reparsed, 0, &[]).unwrap().to_json(), r.to_json());
    }
}

#[test]
fn diagnostic_classes() {
    let cases = [
        ("samples 2\nbeam k=1 pass 1@0 ¤\n", DiagnosticKind::Lexical, 2),
        ("samples 2\nbeam k= pass 1@0\n", DiagnosticKind::Syntax, 2),
        ("samples 2\nfrobnicate\n", DiagnosticKind::Syntax, 2),
        ("samples 2\nbeam k=1 pass 3@0\n", DiagnosticKind::Semantic, 2),
        ("samples 2\nbeam k=$q pass 1@0\n", DiagnosticKind::Semantic, 2),
        ("samples 2\n\nbeam k=1 pass 1@0 1@pi\n", DiagnosticKind::Semantic, 3),
        ("samples 3 orient + -\n", DiagnosticKind::Semantic, 1),
        ("beam k=1 pass 1@0\n", DiagnosticKind::Semantic, 1),
    ];
    for (src, kind, line) in cases {
        let d = dsl::parse(src).unwrap_err();
        assert_eq!((d.kind, d.line), (kind, line), "{src:?}: {d}");
    }
}

#[test]
fn unknown_override_is_rejected() {
    let err = dsl::run_script("param k=1\nsamples 2\nbeam k=$k pass 1@0 2@0\n", 0, &[("q".into(), 1.0)]);
    assert!(matches!(err, Err(dsl::RunError::Numerical(e)) if e.is_input_error()));
}
