//! `tables`: tabulated divisors next to their closed-form approximations.

use std::io::Write;
use std::ops::RangeInclusive;

use serde::Serialize;
use smallsd::estimators::{blom_eta, blom_xi, eta_hat_with, xi_hat_with};
use smallsd::{CorrectionOrder, DivisorKind};

use crate::error::CliError;
use crate::output::{Format, RowWriter};

const HEADER: [&str; 5] = ["n", "table", "blom", "corrected", "residual"];

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TableRow {
    pub n: u32,
    pub table: Option<f64>,
    pub blom: f64,
    pub corrected: f64,
    /// `table - corrected`
    pub residual: Option<f64>,
}

pub fn rows(
    kind: DivisorKind,
    range: RangeInclusive<u32>,
    correction: CorrectionOrder,
    cutoff: u32,
) -> Result<Vec<TableRow>, CliError> {
    if *range.start() < 2 {
        return Err(CliError::Usage(format!(
            "the approximations need n >= 2, range starts at {}",
            range.start()
        )));
    }
    range
        .map(|n| {
            let (table, blom, corrected) = match kind {
                DivisorKind::Xi => (
                    smallsd::xi_table(n).ok(),
                    blom_xi(n)?,
                    xi_hat_with(n, correction, cutoff)?,
                ),
                DivisorKind::Eta => (
                    smallsd::eta_table(n).ok(),
                    blom_eta(n)?,
                    eta_hat_with(n, correction, cutoff)?,
                ),
            };
            Ok(TableRow {
                n,
                table,
                blom,
                corrected,
                residual: table.map(|t| t - corrected),
            })
        })
        .collect()
}

pub fn write<W: Write>(rows: &[TableRow], format: Format, out: W) -> Result<(), CliError> {
    let mut w = RowWriter::new(out, format, &HEADER)?;
    for r in rows {
        w.write(r)?;
    }
    w.finish()
}
