use std::collections::BTreeSet;

use super::{Diagnostic, DiagnosticKind};
use crate::criteria::{Bipartition, DuanSign};
use crate::graph::Graph;
use crate::interface::{Angle, Orientation, Pass, Spin};
use crate::protocols::{BeamStep, Check, Cmp, Expect, Protocol, Readout, Report, Scalar, SpinTerm, Step};

/// Largest sample count a script may declare.
pub const MAX_SAMPLES: usize = 64;

const MAX_PI_TERM: i64 = 1_000_000;

type PResult<T> = Result<T, Diagnostic>;

/// `expect=`, `tol=` and any remaining `key[=value]` options with their columns.
type CriterionOptions = (Expect, Option<f64>, Vec<(String, Option<String>, usize)>);

#[derive(Clone, Copy)]
struct Tok<'a> {
    text: &'a str,
    col: usize,
}

struct Cursor<'a> {
    line: usize,
    toks: Vec<Tok<'a>>,
    pos: usize,
    end: usize,
}

fn diag(kind: DiagnosticKind, line: usize, col: usize, message: impl Into<String>, expected: &[&str]) -> Diagnostic {
    Diagnostic {
        kind,
        line,
        col,
        message: message.into(),
        expected: expected.iter().map(|s| s.to_string()).collect(),
    }
}

impl<'a> Cursor<'a> {
    fn syntax(&self, col: usize, msg: impl Into<String>, expected: &[&str]) -> Diagnostic {
        diag(DiagnosticKind::Syntax, self.line, col, msg, expected)
    }

    fn semantic(&self, col: usize, msg: impl Into<String>) -> Diagnostic {
        diag(DiagnosticKind::Semantic, self.line, col, msg, &[])
    }

    fn peek(&self) -> Option<Tok<'a>> {
        self.toks.get(self.pos).copied()
    }

    fn next(&mut self, expected: &[&str]) -> PResult<Tok<'a>> {
        match self.peek() {
            Some(t) => {
                self.pos += 1;
                Ok(t)
            }
            None => Err(self.syntax(self.end, "unexpected end of line", expected)),
        }
    }

    fn keyword(&mut self, word: &str) -> PResult<Tok<'a>> {
        let t = self.next(&[word])?;
        if t.text != word {
            return Err(self.syntax(t.col, format!("unexpected `{}`", t.text), &[word]));
        }
        Ok(t)
    }

    fn finish(&self) -> PResult<()> {
        match self.peek() {
            Some(t) => Err(self.syntax(t.col, format!("unexpected `{}`", t.text), &["end of line"])),
            None => Ok(()),
        }
    }

    fn rest(&mut self) -> Vec<Tok<'a>> {
        let out = self.toks[self.pos..].to_vec();
        self.pos = self.toks.len();
        out
    }
}

fn lex(line_no: usize, raw: &str) -> PResult<Cursor<'_>> {
    let body = match raw.find('#') {
        Some(i) => &raw[..i],
        None => raw,
    };
    for (col, ch) in body.chars().enumerate() {
        if !(ch == ' ' || ch == '\t' || ch.is_ascii_graphic()) {
            return Err(diag(
                DiagnosticKind::Lexical,
                line_no,
                col + 1,
                format!("invalid character {ch:?}"),
                &[],
            ));
        }
    }
    let mut toks = Vec::new();
    let mut start = None;
    for (i, ch) in body.char_indices().chain(std::iter::once((body.len(), ' '))) {
        match (ch.is_ascii_whitespace(), start) {
            (true, Some(s)) => {
                toks.push(Tok { text: &body[s..i], col: s + 1 });
                start = None;
            }
            (false, None) => start = Some(i),
            _ => {}
        }
    }
    Ok(Cursor {
        line: line_no,
        toks,
        pos: 0,
        end: body.trim_end().len() + 1,
    })
}

fn is_ident(s: &str) -> bool {
    let mut chars = s.chars();
    matches!(chars.next(), Some(c) if c.is_ascii_alphabetic() || c == '_')
        && chars.all(|c| c.is_ascii_alphanumeric() || c == '_')
}

fn is_label(s: &str) -> bool {
    !s.is_empty() && s.chars().all(|c| c.is_ascii_alphanumeric() || matches!(c, '_' | '-' | '.'))
}

fn finite(s: &str) -> Option<f64> {
    s.parse::<f64>().ok().filter(|v| v.is_finite())
}

fn parse_angle(s: &str) -> Option<Angle> {
    if let Some((head, tail)) = s.split_once("pi") {
        let num = match head {
            "" | "+" => 1,
            "-" => -1,
            h => h.parse::<i64>().ok()?,
        };
        let den = if tail.is_empty() {
            1
        } else {
            tail.strip_prefix('/')?.parse::<i64>().ok()?
        };
        if num.abs() > MAX_PI_TERM || !(1..=MAX_PI_TERM).contains(&den) {
            return None;
        }
        return Angle::pi_fraction(num, den).ok();
    }
    finite(s).map(Angle::Radians)
}

fn split_key<'a>(t: Tok<'a>) -> (&'a str, Option<&'a str>) {
    match t.text.split_once('=') {
        Some((k, v)) => (k, Some(v)),
        None => (t.text, None),
    }
}

fn parse_cmp(s: &str) -> Option<Cmp> {
    Some(match s {
        "==" => Cmp::Eq,
        "<" => Cmp::Lt,
        "<=" => Cmp::Le,
        ">" => Cmp::Gt,
        ">=" => Cmp::Ge,
        _ => return None,
    })
}

const CMPS: [&str; 5] = ["==", "<", "<=", ">", ">="];

struct Parser {
    protocol: Protocol,
    n: Option<usize>,
    seen_protocol: bool,
}

/// Parses a script. Never panics; every failure is a [`Diagnostic`].
pub fn parse(src: &str) -> Result<Protocol, Diagnostic> {
    let mut p = Parser {
        protocol: Protocol::default(),
        n: None,
        seen_protocol: false,
    };
    let mut last = 1;
    for (i, raw) in src.lines().enumerate() {
        last = i + 1;
        let mut cur = lex(i + 1, raw)?;
        if cur.toks.is_empty() {
            continue;
        }
        p.statement(&mut cur)?;
        cur.finish()?;
    }
    if p.n.is_none() {
        return Err(diag(
            DiagnosticKind::Semantic,
            last,
            1,
            "no samples declared",
            &["samples <n>"],
        ));
    }
    p.protocol
        .validate()
        .map_err(|e| diag(DiagnosticKind::Semantic, last, 1, e.to_string(), &[]))?;
    Ok(p.protocol)
}

impl Parser {
    fn statement(&mut self, cur: &mut Cursor) -> PResult<()> {
        const STATEMENTS: [&str; 8] = ["protocol", "param", "samples", "beam", "verify", "rotate", "assert", "report"];
        let head = cur.next(&STATEMENTS)?;
        match head.text {
            "protocol" => self.protocol_line(cur, head),
            "param" => self.param(cur),
            "samples" => self.samples(cur, head),
            "beam" => {
                let b = self.beam(cur, true)?;
                self.protocol.steps.push(Step::Beam(b));
                Ok(())
            }
            "verify" => {
                let b = self.beam(cur, false)?;
                self.protocol.steps.push(Step::Verify(b));
                Ok(())
            }
            "rotate" => {
                let t = cur.next(&["<id>@<angle>"])?;
                let (sample, angle) = self.pass_token(cur, t)?;
                self.protocol.steps.push(Step::Rotate { sample, angle });
                Ok(())
            }
            "assert" => {
                let c = self.check(cur)?;
                self.protocol.checks.push(c);
                Ok(())
            }
            "report" => {
                let r = self.report(cur)?;
                self.protocol.reports.push(r);
                Ok(())
            }
            other => Err(cur.syntax(head.col, format!("unknown statement `{other}`"), &STATEMENTS)),
        }
    }

    fn protocol_line(&mut self, cur: &mut Cursor, head: Tok) -> PResult<()> {
        if self.seen_protocol {
            return Err(cur.semantic(head.col, "protocol declared twice"));
        }
        self.seen_protocol = true;
        let name = cur.next(&["<name>"])?;
        if !is_label(name.text) || name.text.contains('=') {
            return Err(cur.syntax(name.col, format!("invalid name `{}`", name.text), &["<name>"]));
        }
        self.protocol.name = Some(name.text.to_string());
        if let Some(t) = cur.peek() {
            cur.pos += 1;
            match split_key(t) {
                ("figure", Some(v)) if is_label(v) => self.protocol.figure = Some(v.to_string()),
                _ => return Err(cur.syntax(t.col, format!("unexpected `{}`", t.text), &["figure=<tag>"])),
            }
        }
        Ok(())
    }

    fn param(&mut self, cur: &mut Cursor) -> PResult<()> {
        let t = cur.next(&["<name>=<value>"])?;
        let Some((name, value)) = t.text.split_once('=') else {
            return Err(cur.syntax(t.col, format!("unexpected `{}`", t.text), &["<name>=<value>"]));
        };
        if !is_ident(name) {
            return Err(cur.syntax(t.col, format!("invalid parameter name `{name}`"), &["identifier"]));
        }
        let Some(v) = finite(value) else {
            return Err(cur.syntax(t.col + name.len() + 1, format!("invalid number `{value}`"), &["finite number"]));
        };
        if self.protocol.params.iter().any(|(n, _)| n == name) {
            return Err(cur.semantic(t.col, format!("parameter `{name}` declared twice")));
        }
        self.protocol.params.push((name.to_string(), v));
        Ok(())
    }

    fn samples(&mut self, cur: &mut Cursor, head: Tok) -> PResult<()> {
        if self.n.is_some() {
            return Err(cur.semantic(head.col, "samples declared twice"));
        }
        let t = cur.next(&["<count>"])?;
        let n: usize = t
            .text
            .parse()
            .map_err(|_| cur.syntax(t.col, format!("invalid count `{}`", t.text), &["positive integer"]))?;
        if n == 0 || n > MAX_SAMPLES {
            return Err(cur.semantic(t.col, format!("sample count must be between 1 and {MAX_SAMPLES}")));
        }
        let mut orientations = vec![Orientation::Plus; n];
        if let Some(kw) = cur.peek() {
            cur.keyword("orient")?;
            let mut signs = Vec::new();
            for t in cur.rest() {
                for ch in t.text.chars() {
                    signs.push(match ch {
                        '+' => Orientation::Plus,
                        '-' => Orientation::Minus,
                        _ => return Err(cur.syntax(t.col, format!("unexpected `{}`", t.text), &["+", "-"])),
                    });
                }
            }
            if signs.len() != n {
                return Err(cur.semantic(kw.col, format!("{} orientations given for {n} samples", signs.len())));
            }
            orientations = signs;
        }
        self.n = Some(n);
        self.protocol.orientations = orientations;
        Ok(())
    }

    fn n_samples(&self, cur: &Cursor, col: usize) -> PResult<usize> {
        self.n.ok_or_else(|| cur.semantic(col, "samples must be declared first"))
    }

    fn sample_id(&self, cur: &Cursor, text: &str, col: usize) -> PResult<usize> {
        let n = self.n_samples(cur, col)?;
        let id: usize = text
            .parse()
            .map_err(|_| cur.syntax(col, format!("invalid sample id `{text}`"), &["sample id"]))?;
        if id == 0 || id > n {
            return Err(cur.semantic(col, format!("unknown sample {id}")));
        }
        Ok(id)
    }

    fn scalar(&self, cur: &Cursor, text: &str, col: usize) -> PResult<Scalar> {
        if let Some(name) = text.strip_prefix('$') {
            if !self.protocol.params.iter().any(|(n, _)| n == name) {
                return Err(cur.semantic(col, format!("undeclared parameter `${name}`")));
            }
            return Ok(Scalar::Param(name.to_string()));
        }
        finite(text)
            .map(Scalar::Value)
            .ok_or_else(|| cur.syntax(col, format!("invalid number `{text}`"), &["number", "$param"]))
    }

    fn number(&self, cur: &Cursor, text: &str, col: usize) -> PResult<f64> {
        finite(text).ok_or_else(|| cur.syntax(col, format!("invalid number `{text}`"), &["finite number"]))
    }

    fn pass_token(&self, cur: &Cursor, t: Tok) -> PResult<(usize, Angle)> {
        let Some((id, angle)) = t.text.split_once('@') else {
            return Err(cur.syntax(t.col, format!("unexpected `{}`", t.text), &["<id>@<angle>"]));
        };
        let sample = self.sample_id(cur, id, t.col)?;
        let angle = parse_angle(angle).ok_or_else(|| {
            cur.syntax(t.col + id.len() + 1, format!("invalid angle `{angle}`"), &["pi/4", "-pi/2", "radians"])
        })?;
        Ok((sample, angle))
    }

    fn beam(&self, cur: &mut Cursor, measurable: bool) -> PResult<BeamStep> {
        let t = cur.next(&["k=<coupling>"])?;
        let kappa = match split_key(t) {
            ("k", Some(v)) => self.scalar(cur, v, t.col + 2)?,
            _ => return Err(cur.syntax(t.col, format!("unexpected `{}`", t.text), &["k=<coupling>"])),
        };
        if let Scalar::Value(v) = kappa {
            if v < 0.0 {
                return Err(cur.semantic(t.col + 2, "coupling must be nonnegative"));
            }
        }
        cur.keyword("pass")?;
        let mut passes: Vec<Pass> = Vec::new();
        while let Some(t) = cur.peek() {
            if !t.text.contains('@') {
                break;
            }
            cur.pos += 1;
            let (sample, angle) = self.pass_token(cur, t)?;
            if passes.iter().any(|p| p.sample == sample) {
                return Err(cur.semantic(t.col, format!("sample {sample} passed twice in one beam")));
            }
            passes.push(Pass::new(sample, angle));
        }
        if passes.is_empty() {
            let col = cur.peek().map_or(cur.end, |t| t.col);
            return Err(cur.syntax(col, "beam has no passes", &["<id>@<angle>"]));
        }
        let mut step = BeamStep::new(kappa, passes, Readout::None);
        if !measurable {
            return Ok(step);
        }
        let mut pin = None;
        let mut seen = BTreeSet::new();
        let rest = cur.rest();
        let mut toks = rest.iter().copied();
        while let Some(t) = toks.next() {
            let (key, value) = split_key(t);
            if !seen.insert(key) {
                return Err(cur.syntax(t.col, format!("`{key}` given twice"), &[]));
            }
            match (key, value) {
                ("measure", None) => step.readout = Readout::Sampled,
                ("pin", Some(v)) => pin = Some((self.scalar(cur, v, t.col + 4)?, t.col)),
                ("pin", None) => {
                    let v = toks.next().ok_or_else(|| cur.syntax(cur.end, "pin needs a value", &["<value>"]))?;
                    pin = Some((self.scalar(cur, v.text, v.col)?, t.col));
                }
                ("seed", Some(v)) => {
                    step.seed = Some(
                        v.parse()
                            .map_err(|_| cur.syntax(t.col + 5, format!("invalid seed `{v}`"), &["unsigned integer"]))?,
                    )
                }
                _ => {
                    return Err(cur.syntax(
                        t.col,
                        format!("unexpected `{}`", t.text),
                        &["measure", "pin=<value>", "seed=<u64>"],
                    ))
                }
            }
        }
        if let Some((v, col)) = pin {
            if step.readout != Readout::Sampled {
                return Err(cur.semantic(col, "pin= needs measure"));
            }
            step.readout = Readout::Pinned(v);
        }
        Ok(step)
    }

    fn id_list(&self, cur: &Cursor, text: &str, col: usize) -> PResult<Vec<usize>> {
        let mut ids = Vec::new();
        for part in text.split(',') {
            let id = self.sample_id(cur, part, col)?;
            if ids.contains(&id) {
                return Err(cur.semantic(col, format!("sample {id} listed twice")));
            }
            ids.push(id);
        }
        Ok(ids)
    }

    fn float_list(&self, cur: &Cursor, text: &str, col: usize) -> PResult<Vec<f64>> {
        let values = text
            .split(',')
            .map(|s| self.number(cur, s, col))
            .collect::<PResult<Vec<_>>>()?;
        let n = self.n_samples(cur, col)?;
        if values.len() != n {
            return Err(cur.semantic(col, format!("{} coefficients given for {n} samples", values.len())));
        }
        Ok(values)
    }

    fn edges(&self, cur: &Cursor, text: &str, col: usize) -> PResult<Vec<(usize, usize)>> {
        let n = self.n_samples(cur, col)?;
        let mut edges = Vec::new();
        for part in text.split(',') {
            let Some((a, b)) = part.split_once('-') else {
                return Err(cur.syntax(col, format!("invalid edge `{part}`"), &["<a>-<b>"]));
            };
            edges.push((self.sample_id(cur, a, col)?, self.sample_id(cur, b, col)?));
        }
        let g = Graph::new(n, edges).map_err(|e| cur.semantic(col, e.to_string()))?;
        Ok(g.edges().collect())
    }

    fn term(&self, cur: &Cursor, t: Tok) -> PResult<SpinTerm> {
        let bad = || cur.syntax(t.col, format!("invalid term `{}`", t.text), &["[+|-][c*]<id><y|z>"]);
        let (sign, rest) = match t.text.as_bytes().first() {
            Some(b'+') => (1.0, &t.text[1..]),
            Some(b'-') => (-1.0, &t.text[1..]),
            _ => (1.0, t.text),
        };
        let (coeff, rest) = match rest.split_once('*') {
            Some((c, r)) => (finite(c).ok_or_else(bad)?, r),
            None => (1.0, rest),
        };
        let spin = match rest.as_bytes().last() {
            Some(b'y') => Spin::Y,
            Some(b'z') => Spin::Z,
            _ => return Err(bad()),
        };
        let sample = self.sample_id(cur, &rest[..rest.len() - 1], t.col)?;
        Ok(SpinTerm::new(sign * coeff, sample, spin))
    }

    fn criterion_options(&self, cur: &mut Cursor, extra: &[&str]) -> PResult<CriterionOptions> {
        let mut expect = Expect::Entangled;
        let mut tol = None;
        let mut others = Vec::new();
        let mut seen = BTreeSet::new();
        for t in cur.rest() {
            let (key, value) = split_key(t);
            if !seen.insert(key) {
                return Err(cur.syntax(t.col, format!("`{key}` given twice"), &[]));
            }
            match (key, value) {
                ("expect", Some("entangled")) => expect = Expect::Entangled,
                ("expect", Some("separable")) => expect = Expect::Separable,
                ("expect", _) => {
                    return Err(cur.syntax(t.col, format!("unexpected `{}`", t.text), &["entangled", "separable"]))
                }
                ("tol", Some(v)) => tol = Some(self.number(cur, v, t.col + 4)?),
                (k, v) if extra.contains(&k) => others.push((k.to_string(), v.map(str::to_string), t.col)),
                _ => {
                    let mut expected = vec!["expect=", "tol="];
                    expected.extend(extra);
                    return Err(cur.syntax(t.col, format!("unexpected `{}`", t.text), &expected));
                }
            }
        }
        Ok((expect, tol, others))
    }

    fn comparison(&self, cur: &mut Cursor) -> PResult<(Cmp, f64, Option<f64>)> {
        let op = cur.next(&CMPS)?;
        let cmp = parse_cmp(op.text).ok_or_else(|| cur.syntax(op.col, format!("unexpected `{}`", op.text), &CMPS))?;
        let v = cur.next(&["<value>"])?;
        let value = self.number(cur, v.text, v.col)?;
        let mut tol = None;
        if let Some(t) = cur.peek() {
            cur.pos += 1;
            match split_key(t) {
                ("tol", Some(x)) => tol = Some(self.number(cur, x, t.col + 4)?),
                _ => return Err(cur.syntax(t.col, format!("unexpected `{}`", t.text), &["tol=<value>"])),
            }
        }
        Ok((cmp, value, tol))
    }

    fn check(&self, cur: &mut Cursor) -> PResult<Check> {
        const KINDS: [&str; 7] = ["duan", "vlf", "ghz", "odd", "nullifiers", "negativity", "var"];
        let kind = cur.next(&KINDS)?;
        match kind.text {
            "duan" => {
                let a = cur.next(&["<i>"])?;
                let i = self.sample_id(cur, a.text, a.col)?;
                let b = cur.next(&["<j>"])?;
                let j = self.sample_id(cur, b.text, b.col)?;
                if i == j {
                    return Err(cur.semantic(b.col, "Duan test needs two distinct samples"));
                }
                let (expect, tol, opts) = self.criterion_options(cur, &["lambda", "sign"])?;
                let (mut lambda, mut sign) = (None, None);
                for (k, v, col) in opts {
                    let v = v.unwrap_or_default();
                    match k.as_str() {
                        "lambda" if v == "opt" => {}
                        "lambda" => {
                            let l = self.number(cur, &v, col + 7)?;
                            if l == 0.0 {
                                return Err(cur.semantic(col, "λ must be nonzero"));
                            }
                            lambda = Some(l);
                        }
                        _ => {
                            sign = match v.as_str() {
                                "+" => Some(DuanSign::Plus),
                                "-" => Some(DuanSign::Minus),
                                "best" => None,
                                _ => return Err(cur.syntax(col, format!("invalid sign `{v}`"), &["+", "-", "best"])),
                            }
                        }
                    }
                }
                Ok(Check::Duan { i, j, lambda, sign, expect, tol })
            }
            "vlf" => {
                let (expect, tol, opts) = self.criterion_options(cur, &["h", "g", "split"])?;
                let (mut h, mut g, mut split) = (None, None, None);
                for (k, v, col) in opts {
                    let v = v.unwrap_or_default();
                    match k.as_str() {
                        "h" => h = Some(self.float_list(cur, &v, col)?),
                        "g" => g = Some(self.float_list(cur, &v, col)?),
                        _ if v == "all" => {}
                        _ => {
                            let ids = self.id_list(cur, &v, col)?;
                            Bipartition::new(self.n_samples(cur, col)?, &ids)
                                .map_err(|e| cur.semantic(col, e.to_string()))?;
                            split = Some(ids);
                        }
                    }
                }
                let (Some(h), Some(g)) = (h, g) else {
                    return Err(cur.syntax(cur.end, "vlf needs h= and g=", &["h=<list>", "g=<list>"]));
                };
                Ok(Check::Vlf { h, g, split, expect, tol })
            }
            "ghz" => {
                let mut pair = None;
                if let Some(a) = cur.peek().filter(|t| !t.text.contains('=')) {
                    cur.pos += 1;
                    let i = self.sample_id(cur, a.text, a.col)?;
                    let b = cur.next(&["<j>"])?;
                    let j = self.sample_id(cur, b.text, b.col)?;
                    if i == j {
                        return Err(cur.semantic(b.col, "pair needs two distinct samples"));
                    }
                    pair = Some((i, j));
                }
                let (expect, tol, _) = self.criterion_options(cur, &[])?;
                Ok(Check::Ghz { pair, expect, tol })
            }
            "odd" => {
                let (expect, tol, _) = self.criterion_options(cur, &[])?;
                Ok(Check::OddScheme { expect, tol })
            }
            "nullifiers" => {
                let (expect, tol, opts) = self.criterion_options(cur, &["graph", "rotated"])?;
                let (edges, rotated) = self.graph_options(cur, &opts)?;
                Ok(Check::Nullifiers { edges, rotated, expect, tol })
            }
            "negativity" => {
                let t = cur.next(&["<ids>"])?;
                let side = self.id_list(cur, t.text, t.col)?;
                Bipartition::new(self.n_samples(cur, t.col)?, &side).map_err(|e| cur.semantic(t.col, e.to_string()))?;
                let (cmp, value, tol) = self.comparison(cur)?;
                Ok(Check::Negativity { side, cmp, value, tol })
            }
            "var" => {
                let mut terms = Vec::new();
                while let Some(t) = cur.peek() {
                    if parse_cmp(t.text).is_some() {
                        break;
                    }
                    cur.pos += 1;
                    terms.push(self.term(cur, t)?);
                }
                if terms.is_empty() {
                    let col = cur.peek().map_or(cur.end, |t| t.col);
                    return Err(cur.syntax(col, "no terms", &["[+|-][c*]<id><y|z>"]));
                }
                let (cmp, value, tol) = self.comparison(cur)?;
                Ok(Check::Variance { terms, cmp, value, tol })
            }
            other => Err(cur.syntax(kind.col, format!("unknown assertion `{other}`"), &KINDS)),
        }
    }

    fn graph_options(&self, cur: &Cursor, opts: &[(String, Option<String>, usize)]) -> PResult<(Vec<(usize, usize)>, bool)> {
        let mut edges = None;
        let mut rotated = false;
        for (k, v, col) in opts {
            match (k.as_str(), v) {
                ("graph", Some(v)) => edges = Some(self.edges(cur, v, *col + 6)?),
                ("rotated", None) => rotated = true,
                _ => return Err(cur.syntax(*col, format!("unexpected `{k}`"), &["graph=<a-b,...>", "rotated"])),
            }
        }
        let edges = edges.ok_or_else(|| cur.syntax(cur.end, "missing graph", &["graph=<a-b,...>"]))?;
        Ok((edges, rotated))
    }

    fn label(&self, cur: &mut Cursor) -> PResult<Option<String>> {
        let Some(t) = cur.peek() else { return Ok(None) };
        cur.pos += 1;
        match split_key(t) {
            ("as", Some(v)) if is_label(v) => Ok(Some(v.to_string())),
            _ => Err(cur.syntax(t.col, format!("unexpected `{}`", t.text), &["as=<name>"])),
        }
    }

    fn report(&self, cur: &mut Cursor) -> PResult<Report> {
        const KINDS: [&str; 3] = ["var", "negativity", "nullifiers"];
        let kind = cur.next(&KINDS)?;
        match kind.text {
            "var" => {
                let mut terms = Vec::new();
                while let Some(t) = cur.peek() {
                    if t.text.starts_with("as=") {
                        break;
                    }
                    cur.pos += 1;
                    terms.push(self.term(cur, t)?);
                }
                if terms.is_empty() {
                    let col = cur.peek().map_or(cur.end, |t| t.col);
                    return Err(cur.syntax(col, "no terms", &["[+|-][c*]<id><y|z>"]));
                }
                let label = self.label(cur)?;
                Ok(Report::Variance { terms, label })
            }
            "negativity" => {
                let t = cur.next(&["<ids>"])?;
                let side = self.id_list(cur, t.text, t.col)?;
                Bipartition::new(self.n_samples(cur, t.col)?, &side).map_err(|e| cur.semantic(t.col, e.to_string()))?;
                let label = self.label(cur)?;
                Ok(Report::Negativity { side, label })
            }
            "nullifiers" => {
                let opts: Vec<_> = cur
                    .rest()
                    .into_iter()
                    .map(|t| {
                        let (k, v) = split_key(t);
                        (k.to_string(), v.map(str::to_string), t.col)
                    })
                    .collect();
                let (edges, rotated) = self.graph_options(cur, &opts)?;
                Ok(Report::Nullifiers { edges, rotated })
            }
            other => Err(cur.syntax(kind.col, format!("unknown report `{other}`"), &KINDS)),
        }
    }
}
