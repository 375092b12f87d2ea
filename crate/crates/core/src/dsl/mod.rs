//! A small line-oriented language for protocols.
//!
//! ```text
//! # two samples entangled by one measured beam
//! protocol epr figure=3
//! param k=1.0
//! samples 2
//! beam k=$k pass 1@0 2@0 measure
//! verify k=$k pass 1@pi/4 2@-pi/4
//! assert duan 1 2 lambda=1.0 sign=-
//! report var +1z +2z as=zsum
//! ```
//!
//! Statements:
//!
//! | statement | meaning |
//! |---|---|
//! | `protocol <name> [figure=<tag>]` | metadata |
//! | `param <name>=<value>` | named number, referenced as `$name` |
//! | `samples <n> [orient + - …]` | sample count and orientations |
//! | `beam k=<κ> pass <id>@<angle>… [measure] [pin=<r>] [seed=<u64>]` | beam step |
//! | `verify k=<κ> pass <id>@<angle>…` | predicted readout, state untouched |
//! | `rotate <id>@<angle>` | precession of one sample |
//! | `assert duan <i> <j> [lambda=<λ>\|opt] [sign=+\|-\|best]` | |
//! | `assert vlf h=<list> g=<list> [split=<ids>\|all]` | |
//! | `assert ghz [<i> <j>]`, `assert odd` | |
//! | `assert nullifiers graph=<a-b,…> [rotated]` | |
//! | `assert negativity <ids> <op> <v>`, `assert var <terms> <op> <v>` | |
//! | `report var <terms> [as=<name>]`, `report negativity <ids> [as=<name>]` | outputs |
//! | `report nullifiers graph=<a-b,…> [rotated]` | |
//!
//! Criterion asserts accept `expect=entangled|separable` and `tol=<v>`;
//! comparison asserts accept `tol=<v>`. Angles are `0`, `pi`, `-pi/2`,
//! `3pi/4` or radians. A term is `[+|-][c*]<id><y|z>`, e.g. `-0.5*2y`.

mod parse;
mod print;
mod run;
mod sweep;

use std::fmt;

pub use parse::{parse, MAX_SAMPLES};
pub use print::{print, print_check};
pub use run::{run_protocol, run_script, CheckOutcome, Output, RunReport, StateSummary, REPORT_SCHEMA};
pub use sweep::{family, sweep, sweep_family, Axis, Grid, SweepTable, FAMILIES};

/// The syntax tree of a script. It is the protocol itself.
pub type ProtocolScript = crate::protocols::Protocol;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DiagnosticKind {
    /// A character that can never appear in a script.
    Lexical,
    /// Malformed statement.
    Syntax,
    /// Well-formed but meaningless: unknown sample, undeclared parameter,
    /// duplicate pass, wrong list length.
    Semantic,
}

/// A parse failure with its 1-based position.
#[derive(Debug, Clone, PartialEq)]
pub struct Diagnostic {
    pub kind: DiagnosticKind,
    pub line: usize,
    pub col: usize,
    pub message: String,
    pub expected: Vec<String>,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let kind = match self.kind {
            DiagnosticKind::Lexical => "lexical",
            DiagnosticKind::Syntax => "syntax",
            DiagnosticKind::Semantic => "semantic",
        };
        write!(f, "{}:{}: {kind} error: {}", self.line, self.col, self.message)?;
        if !self.expected.is_empty() {
            write!(f, " (expected {})", self.expected.join(", "))?;
        }
        Ok(())
    }
}

impl std::error::Error for Diagnostic {}

/// Why a script could not produce a report.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("{0}")]
    Parse(#[from] Diagnostic),
    #[error("numerical failure: {0}")]
    Numerical(#[from] crate::Error),
}

/// Bundled scripts: `epr`, `eraser`, `ghz` and `cluster`.
pub fn demo_script(name: &str) -> Option<&'static str> {
    Some(match name {
        "epr" => include_str!("../../scripts/epr.proto"),
        "eraser" => include_str!("../../scripts/eraser.proto"),
        "ghz" => include_str!("../../scripts/ghz.proto"),
        "cluster" => include_str!("../../scripts/cluster.proto"),
        _ => return None,
    })
}
