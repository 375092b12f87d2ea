use std::fmt::Write;

use crate::criteria::DuanSign;
use crate::interface::{Orientation, Pass, Spin};
use crate::protocols::{BeamStep, Check, Expect, Protocol, Readout, Report, Scalar, SpinTerm, Step};

fn num(v: f64) -> String {
    format!("{v:?}")
}

fn scalar(s: &Scalar) -> String {
    match s {
        Scalar::Value(v) => num(*v),
        Scalar::Param(name) => format!("${name}"),
    }
}

fn list<T>(items: &[T], f: impl Fn(&T) -> String) -> String {
    items.iter().map(f).collect::<Vec<_>>().join(",")
}

fn ids(v: &[usize]) -> String {
    list(v, |k| k.to_string())
}

fn edges(v: &[(usize, usize)]) -> String {
    list(v, |(a, b)| format!("{a}-{b}"))
}

pub(super) fn term(t: &SpinTerm) -> String {
    let sign = if t.coeff.is_sign_negative() { '-' } else { '+' };
    let spin = match t.spin {
        Spin::Y => 'y',
        Spin::Z => 'z',
    };
    let mag = t.coeff.abs();
    if mag == 1.0 {
        format!("{sign}{}{spin}", t.sample)
    } else {
        format!("{sign}{}*{}{spin}", num(mag), t.sample)
    }
}

fn terms(v: &[SpinTerm]) -> String {
    v.iter().map(term).collect::<Vec<_>>().join(" ")
}

fn passes(v: &[Pass]) -> String {
    v.iter()
        .map(|p| format!("{}@{}", p.sample, p.angle))
        .collect::<Vec<_>>()
        .join(" ")
}

fn beam(b: &BeamStep) -> String {
    let mut s = format!("k={} pass {}", scalar(&b.kappa), passes(&b.passes));
    match &b.readout {
        Readout::None => {}
        Readout::Sampled => s.push_str(" measure"),
        Readout::Pinned(v) => write!(s, " measure pin={}", scalar(v)).unwrap(),
    }
    if let Some(seed) = b.seed {
        write!(s, " seed={seed}").unwrap();
    }
    s
}

fn criterion_tail(expect: Expect, tol: Option<f64>) -> String {
    let mut s = String::new();
    if expect == Expect::Separable {
        s.push_str(" expect=separable");
    }
    if let Some(t) = tol {
        write!(s, " tol={}", num(t)).unwrap();
    }
    s
}

fn tol_tail(tol: Option<f64>) -> String {
    tol.map(|t| format!(" tol={}", num(t))).unwrap_or_default()
}

/// One `assert` statement, without the trailing newline.
pub fn print_check(c: &Check) -> String {
    match c {
        Check::Duan { i, j, lambda, sign, expect, tol } => {
            let mut s = format!("assert duan {i} {j}");
            if let Some(l) = lambda {
                write!(s, " lambda={}", num(*l)).unwrap();
            }
            match sign {
                Some(DuanSign::Plus) => s.push_str(" sign=+"),
                Some(DuanSign::Minus) => s.push_str(" sign=-"),
                None => {}
            }
            s + &criterion_tail(*expect, *tol)
        }
        Check::Vlf { h, g, split, expect, tol } => {
            let mut s = format!("assert vlf h={} g={}", list(h, |v| num(*v)), list(g, |v| num(*v)));
            if let Some(side) = split {
                write!(s, " split={}", ids(side)).unwrap();
            }
            s + &criterion_tail(*expect, *tol)
        }
        Check::Ghz { pair, expect, tol } => {
            let mut s = "assert ghz".to_string();
            if let Some((i, j)) = pair {
                write!(s, " {i} {j}").unwrap();
            }
            s + &criterion_tail(*expect, *tol)
        }
        Check::OddScheme { expect, tol } => "assert odd".to_string() + &criterion_tail(*expect, *tol),
        Check::Nullifiers { edges: e, rotated, expect, tol } => {
            let r = if *rotated { " rotated" } else { "" };
            format!("assert nullifiers graph={}{r}", edges(e)) + &criterion_tail(*expect, *tol)
        }
        Check::Negativity { side, cmp, value, tol } => {
            format!("assert negativity {} {} {}{}", ids(side), cmp.symbol(), num(*value), tol_tail(*tol))
        }
        Check::Variance { terms: t, cmp, value, tol } => {
            format!("assert var {} {} {}{}", terms(t), cmp.symbol(), num(*value), tol_tail(*tol))
        }
    }
}

fn label(l: &Option<String>) -> String {
    l.as_ref().map(|l| format!(" as={l}")).unwrap_or_default()
}

/// Canonical text of a protocol; [`super::parse`] reads it back unchanged.
pub fn print(p: &Protocol) -> String {
    let mut out = String::new();
    if let Some(name) = &p.name {
        write!(out, "protocol {name}").unwrap();
        if let Some(fig) = &p.figure {
            write!(out, " figure={fig}").unwrap();
        }
        out.push('\n');
    }
    for (name, v) in &p.params {
        writeln!(out, "param {name}={}", num(*v)).unwrap();
    }
    write!(out, "samples {}", p.n_samples()).unwrap();
    if p.orientations.contains(&Orientation::Minus) {
        out.push_str(" orient");
        for o in &p.orientations {
            write!(out, " {}", o.symbol()).unwrap();
        }
    }
    out.push('\n');
    for step in &p.steps {
        match step {
            Step::Beam(b) => writeln!(out, "beam {}", beam(b)),
            Step::Verify(b) => writeln!(out, "verify {}", beam(b)),
            Step::Rotate { sample, angle } => writeln!(out, "rotate {sample}@{angle}"),
        }
        .unwrap();
    }
    for c in &p.checks {
        writeln!(out, "{}", print_check(c)).unwrap();
    }
    for r in &p.reports {
        match r {
            Report::Variance { terms: t, label: l } => writeln!(out, "report var {}{}", terms(t), label(l)),
            Report::Negativity { side, label: l } => writeln!(out, "report negativity {}{}", ids(side), label(l)),
            Report::Nullifiers { edges: e, rotated } => {
                let r = if *rotated { " rotated" } else { "" };
                writeln!(out, "report nullifiers graph={}{r}", edges(e))
            }
        }
        .unwrap();
    }
    out
}

#[cfg(test)]
mod tests {
    use super::super::parse;
    use super::*;
    use crate::protocols::*;

    #[test]
    fn builders_round_trip() {
        let g = Graph::path(4).unwrap();
        let all = [
            build_epr(1.0).unwrap(),
            build_two_variable_epr(0.3).unwrap(),
            build_eraser_fixed_point(1.0, 3).unwrap(),
            build_ghz_generic(4, 0.7).unwrap(),
            build_ghz_even(2, 1.0, 0.5, 0.25).unwrap(),
            build_odd_scheme(&balanced_orientations(4), 1.0).unwrap(),
            build_cluster(&g, 1.0, true).unwrap(),
            build_cluster(&g, 2.0, false).unwrap(),
        ];
        for p in all {
            let text = print(&p);
            let back = parse(&text).unwrap_or_else(|d| panic!("{d}\n{text}"));
            assert_eq!(back, p, "{text}");
            assert_eq!(print(&back), text);
        }
    }

    #[test]
    fn term_forms() {
        assert_eq!(term(&SpinTerm::new(1.0, 3, Spin::Z)), "+3z");
        assert_eq!(term(&SpinTerm::new(-1.0, 2, Spin::Y)), "-2y");
        assert_eq!(term(&SpinTerm::new(-0.5, 1, Spin::Y)), "-0.5*1y");
    }
}
