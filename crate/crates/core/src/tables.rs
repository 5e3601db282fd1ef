//! Tabulated divisors ξ(n) (expected range) and η(n) (expected
//! interquartile range) of standard normal samples for n = 1..=50.
//!
//! The values live in `data/divisor_tables.tsv`, one `n<TAB>xi<TAB>eta` record
//! per line, and are checked against their structural invariants when first
//! used.

use std::fmt;
use std::sync::OnceLock;

use crate::error::{Error, Result};

pub const TABLE_LEN: usize = 50;

const FIXTURE: &str = include_str!("../data/divisor_tables.tsv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum DivisorKind {
    Xi,
    Eta,
}

impl fmt::Display for DivisorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DivisorKind::Xi => "xi",
            DivisorKind::Eta => "eta",
        })
    }
}

/// Divisor values indexed by sample size 1..=50.
#[derive(Debug, Clone, PartialEq)]
pub struct DivisorTable {
    kind: DivisorKind,
    values: [f64; TABLE_LEN],
}

impl DivisorTable {
    fn new(kind: DivisorKind, values: [f64; TABLE_LEN]) -> Result<Self> {
        match kind {
            DivisorKind::Xi => {
                if values[0] != 0.0 {
                    return Err(Error::Fixture(format!(
                        "xi(1) must be 0, found {}",
                        values[0]
                    )));
                }
                if let Some(i) = (2..TABLE_LEN).find(|&i| values[i] <= values[i - 1]) {
                    return Err(Error::Fixture(format!(
                        "xi not strictly increasing at n = {}",
                        i + 1
                    )));
                }
            }
            DivisorKind::Eta => {
                if let Some(i) = (1..TABLE_LEN).find(|&i| values[i] < values[i - 1]) {
                    return Err(Error::Fixture(format!("eta decreases at n = {}", i + 1)));
                }
            }
        }
        Ok(Self { kind, values })
    }

    pub fn kind(&self) -> DivisorKind {
        self.kind
    }

    pub fn get(&self, n: u32) -> Result<f64> {
        if (1..=TABLE_LEN as u32).contains(&n) {
            Ok(self.values[n as usize - 1])
        } else {
            Err(Error::Lookup(n))
        }
    }

    /// `(n, value)` pairs in ascending `n`.
    pub fn entries(&self) -> impl Iterator<Item = (u32, f64)> + '_ {
        self.values
            .iter()
            .enumerate()
            .map(|(i, &v)| (i as u32 + 1, v))
    }
}

/// Parses the `n<TAB>xi<TAB>eta` fixture format. Lines must cover
/// n = 1..=50 in order with no gaps, duplicates or header.
pub fn parse_fixture(text: &str) -> Result<(DivisorTable, DivisorTable)> {
    let mut xi = [0.0; TABLE_LEN];
    let mut eta = [0.0; TABLE_LEN];
    let mut count = 0usize;
    for (lineno, line) in text.lines().enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split('\t').collect();
        if fields.len() != 3 {
            return Err(Error::Fixture(format!(
                "line {}: expected 3 tab-separated fields, found {}",
                lineno + 1,
                fields.len()
            )));
        }
        let n: usize = fields[0]
            .trim()
            .parse()
            .map_err(|_| Error::Fixture(format!("line {}: bad n {:?}", lineno + 1, fields[0])))?;
        if n != count + 1 {
            return Err(Error::Fixture(format!(
                "line {}: expected n = {}, found {n}",
                lineno + 1,
                count + 1
            )));
        }
        if n > TABLE_LEN {
            return Err(Error::Fixture(format!("n = {n} beyond {TABLE_LEN}")));
        }
        let parse = |s: &str| -> Result<f64> {
            let v: f64 = s
                .trim()
                .parse()
                .map_err(|_| Error::Fixture(format!("line {}: bad value {s:?}", lineno + 1)))?;
            if v.is_finite() {
                Ok(v)
            } else {
                Err(Error::Fixture(format!(
                    "line {}: non-finite value",
                    lineno + 1
                )))
            }
        };
        xi[n - 1] = parse(fields[1])?;
        eta[n - 1] = parse(fields[2])?;
        count = n;
    }
    if count != TABLE_LEN {
        return Err(Error::Fixture(format!(
            "expected {TABLE_LEN} records, found {count}"
        )));
    }
    Ok((
        DivisorTable::new(DivisorKind::Xi, xi)?,
        DivisorTable::new(DivisorKind::Eta, eta)?,
    ))
}

fn fixtures() -> &'static (DivisorTable, DivisorTable) {
    static TABLES: OnceLock<(DivisorTable, DivisorTable)> = OnceLock::new();
    TABLES.get_or_init(|| parse_fixture(FIXTURE).expect("embedded divisor fixture is valid"))
}

pub fn table(kind: DivisorKind) -> &'static DivisorTable {
    match kind {
        DivisorKind::Xi => &fixtures().0,
        DivisorKind::Eta => &fixtures().1,
    }
}

/// Tabulated expected range ξ(n), 1 ≤ n ≤ 50.
pub fn xi_table(n: u32) -> Result<f64> {
    table(DivisorKind::Xi).get(n)
}

/// Tabulated expected interquartile range η(n), 1 ≤ n ≤ 50.
pub fn eta_table(n: u32) -> Result<f64> {
    table(DivisorKind::Eta).get(n)
}

/// Extremes of `|reference(n) - approx(n)|` over an integer range.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ErrorBounds {
    pub sup_abs: f64,
    pub inf_abs: f64,
    pub argmax_n: u32,
    pub argmin_n: u32,
}

pub fn error_bounds<F>(
    reference: &DivisorTable,
    mut approx: F,
    n_min: u32,
    n_max: u32,
) -> Result<ErrorBounds>
where
    F: FnMut(u32) -> f64,
{
    if n_min < 1 || n_max > TABLE_LEN as u32 || n_min > n_max {
        return Err(Error::Domain(format!(
            "error bounds need 1 <= n_min <= n_max <= {TABLE_LEN}, got {n_min}..={n_max}"
        )));
    }
    let mut bounds = ErrorBounds {
        sup_abs: f64::NEG_INFINITY,
        inf_abs: f64::INFINITY,
        argmax_n: n_min,
        argmin_n: n_min,
    };
    for n in n_min..=n_max {
        let d = (reference.get(n)? - approx(n)).abs();
        if d > bounds.sup_abs {
            bounds.sup_abs = d;
            bounds.argmax_n = n;
        }
        if d < bounds.inf_abs {
            bounds.inf_abs = d;
            bounds.argmin_n = n;
        }
    }
    Ok(bounds)
}

/// Renders rows in the fixture format. `None` cells are left empty.
pub fn format_fixture_rows<I>(rows: I) -> String
where
    I: IntoIterator<Item = (u32, Option<f64>, Option<f64>)>,
{
    let cell = |v: Option<f64>| v.map(|v| format!("{v:.6}")).unwrap_or_default();
    let mut out = String::new();
    for (n, xi, eta) in rows {
        out.push_str(&format!("{n}\t{}\t{}\n", cell(xi), cell(eta)));
    }
    out
}
