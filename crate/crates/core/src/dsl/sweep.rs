use std::collections::BTreeMap;
use std::fmt::Write;
use std::str::FromStr;

use rayon::prelude::*;

use super::run::{run_protocol, RunReport};
use crate::graph::Graph;
use crate::protocols::{self, Protocol};
use crate::{Error, Result};

/// One swept parameter and its values.
#[derive(Debug, Clone, PartialEq)]
pub struct Axis {
    pub name: String,
    pub values: Vec<f64>,
}

/// Cartesian product of axes; the first axis varies slowest.
///
/// Text form: axes separated by `;`, each `name=start:stop:count` (evenly
/// spaced, both ends included) or `name=v1,v2,…`.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Grid {
    pub axes: Vec<Axis>,
}

fn bad(msg: String) -> Error {
    Error::InvalidArgument(msg)
}

impl FromStr for Axis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let (name, body) = s
            .split_once('=')
            .ok_or_else(|| bad(format!("axis `{s}` is not name=values")))?;
        let num = |t: &str| {
            t.trim()
                .parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(format!("invalid number `{t}` in axis `{name}`")))
        };
        let values = if let [a, b, n] = body.split(':').collect::<Vec<_>>()[..] {
            let (a, b) = (num(a)?, num(b)?);
            let n: usize = n.trim().parse().map_err(|_| bad(format!("invalid count `{n}`")))?;
            match n {
                0 => return Err(bad(format!("axis `{name}` has no points"))),
                1 => vec![a],
                _ => (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect(),
            }
        } else {
            body.split(',').map(num).collect::<Result<Vec<_>>>()?
        };
        let name = name.trim();
        if name.is_empty() {
            return Err(bad("axis has no name".into()));
        }
        Ok(Axis {
            name: name.to_string(),
            values,
        })
    }
}

impl FromStr for Grid {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let axes = s
            .split(';')
            .filter(|t| !t.trim().is_empty())
            .map(str::parse)
            .collect::<Result<Vec<Axis>>>()?;
        Grid::new(axes)
    }
}

impl Grid {
    pub fn new(axes: Vec<Axis>) -> Result<Self> {
        if axes.is_empty() {
            return Err(bad("empty grid".into()));
        }
        for (k, a) in axes.iter().enumerate() {
            if axes[..k].iter().any(|b| b.name == a.name) {
                return Err(bad(format!("axis `{}` given twice", a.name)));
            }
        }
        Ok(Grid { axes })
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(|a| a.values.len()).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Grid point `index` as `(name, value)` pairs.
    pub fn point(&self, mut index: usize) -> Vec<(String, f64)> {
        let mut out = vec![(String::new(), 0.0); self.axes.len()];
        for (k, a) in self.axes.iter().enumerate().rev() {
            out[k] = (a.name.clone(), a.values[index % a.values.len()]);
            index /= a.values.len();
        }
        out
    }
}

/// Sweep results, one row per grid point in grid order.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepTable {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<f64>>,
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

impl SweepTable {
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let k = self.columns.iter().position(|c| c == name)?;
        Some(self.rows.iter().map(|r| r[k]).collect())
    }

    /// Header plus one line per row, floats with 17 significant digits.
    pub fn to_csv(&self) -> String {
        let mut out = self.columns.iter().map(|c| csv_field(c)).collect::<Vec<_>>().join(",");
        out.push('\n');
        for row in &self.rows {
            let line = row.iter().map(|v| format!("{v:.16e}")).collect::<Vec<_>>().join(",");
            writeln!(out, "{line}").unwrap();
        }
        out
    }
}

fn sweep_with<F>(grid: &Grid, jobs: usize, run: F) -> Result<SweepTable>
where
    F: Fn(&[(String, f64)]) -> Result<RunReport> + Sync,
{
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| bad(e.to_string()))?;
    let reports: Vec<(Vec<(String, f64)>, RunReport)> = pool.install(|| {
        (0..grid.len())
            .into_par_iter()
            .map(|i| {
                let point = grid.point(i);
                run(&point).map(|r| (point, r))
            })
            .collect::<Result<Vec<_>>>()
    })?;
    let mut columns: Vec<String> = grid.axes.iter().map(|a| a.name.clone()).collect();
    let (_, first) = &reports[0];
    columns.extend(first.outputs.iter().map(|o| o.name.clone()));
    let with_checks = !first.checks.is_empty();
    if with_checks {
        columns.push("passed".into());
    }
    let mut rows = Vec::with_capacity(reports.len());
    for (point, r) in &reports {
        let names: Vec<&str> = r.outputs.iter().map(|o| o.name.as_str()).collect();
        if names.into_iter().ne(columns[point.len()..point.len() + first.outputs.len()].iter().map(String::as_str)) {
            return Err(bad("outputs differ between grid points".into()));
        }
        let mut row: Vec<f64> = point.iter().map(|(_, v)| *v).collect();
        row.extend(r.outputs.iter().map(|o| o.value));
        if with_checks {
            row.push(if r.passed { 1.0 } else { 0.0 });
        }
        rows.push(row);
    }
    Ok(SweepTable { columns, rows })
}

/// Runs `protocol` at every grid point, the axes overriding its parameters.
/// `jobs = 0` uses every core.
pub fn sweep(protocol: &Protocol, grid: &Grid, seed: u64, jobs: usize) -> Result<SweepTable> {
    protocol.validate()?;
    sweep_with(grid, jobs, |point| run_protocol(protocol, seed, point))
}

/// Builder families available to [`family`] and [`sweep_family`].
pub const FAMILIES: [&str; 7] = ["epr", "epr2", "eraser", "ghz", "ghz-even", "odd", "cluster"];

/// Builds a protocol from a family name and named parameters.
///
/// | family | parameters (default) |
/// |---|---|
/// | `epr`, `epr2` | `k` (1) |
/// | `eraser` | `k1` (1), `k2` (erasing value), `n` (2) |
/// | `ghz` | `n` (3), `k` (1) |
/// | `ghz-even` | `m` (2), `k1`, `k2`, `kv` (1) |
/// | `odd` | `n` (2, alternating orientations), `k` (1) |
/// | `cluster` | `n` (4, path graph), `k` (1), `rotated` (1) |
pub fn family(name: &str, params: &BTreeMap<String, f64>) -> Result<Protocol> {
    let allowed: &[&str] = match name {
        "epr" | "epr2" => &["k"],
        "eraser" => &["k1", "k2", "n"],
        "ghz" | "odd" => &["n", "k"],
        "ghz-even" => &["m", "k1", "k2", "kv"],
        "cluster" => &["n", "k", "rotated"],
        _ => return Err(bad(format!("unknown family `{name}` (known: {})", FAMILIES.join(", ")))),
    };
    if let Some(p) = params.keys().find(|p| !allowed.contains(&p.as_str())) {
        return Err(bad(format!("family `{name}` has no parameter `{p}`")));
    }
    let get = |p: &str, default: f64| params.get(p).copied().unwrap_or(default);
    let int = |p: &str, default: usize| -> Result<usize> {
        let v = get(p, default as f64);
        if v < 0.0 || v.fract() != 0.0 || v > 1e6 {
            return Err(bad(format!("parameter `{p}` must be a nonnegative integer")));
        }
        Ok(v as usize)
    };
    match name {
        "epr" => protocols::build_epr(get("k", 1.0)),
        "epr2" => protocols::build_two_variable_epr(get("k", 1.0)),
        "eraser" => {
            let (k1, n) = (get("k1", 1.0), int("n", 2)?);
            protocols::build_eraser(k1, get("k2", protocols::eraser_kappa2(k1, n)), n)
        }
        "ghz" => protocols::build_ghz_generic(int("n", 3)?, get("k", 1.0)),
        "ghz-even" => protocols::build_ghz_even(int("m", 2)?, get("k1", 1.0), get("k2", 1.0), get("kv", 1.0)),
        "odd" => protocols::build_odd_scheme(&protocols::balanced_orientations(int("n", 2)?), get("k", 1.0)),
        _ => protocols::build_cluster(&Graph::path(int("n", 4)?)?, get("k", 1.0), get("rotated", 1.0) != 0.0),
    }
}

/// Sweeps a builder family; grid axes are family parameters.
pub fn sweep_family(name: &str, grid: &Grid, seed: u64, jobs: usize) -> Result<SweepTable> {
    family(name, &BTreeMap::new())?;
    sweep_with(grid, jobs, |point| {
        let params: BTreeMap<String, f64> = point.iter().cloned().collect();
        run_protocol(&family(name, &params)?, seed, &[])
    })
}
