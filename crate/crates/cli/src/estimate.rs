//! `estimate`: one mean/sd row per study in a summary CSV.

use std::collections::HashSet;
use std::io::{Read, Write};

use serde::Serialize;
use smallsd::{Estimator, StudySummary};

use crate::error::CliError;
use crate::output::{Format, RowWriter};

pub const INPUT_HEADER: [&str; 7] = ["study_id", "n", "min", "q1", "median", "q3", "max"];

const OUTPUT_HEADER: [&str; 10] = [
    "study_id",
    "n",
    "scenario",
    "correction",
    "mean",
    "sd",
    "divisor",
    "xi_divisor",
    "eta_divisor",
    "degenerate",
];

#[derive(Serialize)]
struct OutputRow<'a> {
    study_id: &'a str,
    n: u32,
    scenario: String,
    correction: String,
    mean: Option<f64>,
    sd: Option<f64>,
    divisor: Option<f64>,
    xi_divisor: Option<f64>,
    eta_divisor: Option<f64>,
    degenerate: bool,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct Counts {
    pub estimated: usize,
    pub rejected: usize,
}

fn optional(record: &csv::StringRecord, i: usize) -> Result<Option<f64>, String> {
    let raw = record[i].trim();
    if raw.is_empty() {
        return Ok(None);
    }
    raw.parse::<f64>().map(Some).map_err(|_| {
        format!(
            "column {}: cannot parse {raw:?} as a number",
            INPUT_HEADER[i]
        )
    })
}

fn parse_row(record: &csv::StringRecord) -> Result<(String, StudySummary), String> {
    if record.len() != INPUT_HEADER.len() {
        return Err(format!(
            "expected {} fields, found {}",
            INPUT_HEADER.len(),
            record.len()
        ));
    }
    let id = record[0].trim().to_string();
    if id.is_empty() {
        return Err("empty study_id".into());
    }
    let raw_n = record[1].trim();
    let n = raw_n
        .parse::<u32>()
        .map_err(|_| format!("column n: cannot parse {raw_n:?} as a sample size"))?;
    let summary = StudySummary {
        n,
        min: optional(record, 2)?,
        q1: optional(record, 3)?,
        median: optional(record, 4)?,
        q3: optional(record, 5)?,
        max: optional(record, 6)?,
    };
    Ok((id, summary))
}

/// Reads summaries from `input` and writes estimates to `out`. Rows that
/// cannot be estimated are reported on `diag` and skipped; only an unreadable
/// stream or a wrong header aborts.
pub fn run<R: Read, W: Write, E: Write + ?Sized>(
    input: R,
    estimator: &Estimator,
    format: Format,
    out: W,
    diag: &mut E,
) -> Result<Counts, CliError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(input);
    let header = reader.headers()?.clone();
    if header.iter().map(str::trim).ne(INPUT_HEADER) {
        return Err(CliError::Header {
            expected: INPUT_HEADER.join(","),
            found: header.iter().collect::<Vec<_>>().join(","),
        });
    }

    let mut writer = RowWriter::new(out, format, &OUTPUT_HEADER)?;
    let mut seen = HashSet::new();
    let mut counts = Counts::default();
    for (i, record) in reader.records().enumerate() {
        // line numbers count the header as line 1
        let line = i + 2;
        let record = match record {
            Ok(r) => r,
            Err(e) if e.is_io_error() => return Err(e.into()),
            Err(e) => {
                writeln!(diag, "error: line {line}: {e}")?;
                counts.rejected += 1;
                continue;
            }
        };
        let result = parse_row(&record).and_then(|(id, summary)| {
            if !seen.insert(id.clone()) {
                return Err(format!("duplicate study_id {id:?}"));
            }
            estimator
                .estimate(&summary)
                .map(|est| (id, summary, est))
                .map_err(|e| e.to_string())
        });
        match result {
            Ok((id, summary, est)) => {
                writer.write(&OutputRow {
                    study_id: &id,
                    n: summary.n,
                    scenario: est.scenario.to_string(),
                    correction: est.correction.to_string(),
                    mean: est.mean,
                    sd: est.sd,
                    divisor: est.divisor_used(),
                    xi_divisor: est.xi_divisor,
                    eta_divisor: est.eta_divisor,
                    degenerate: est.degenerate,
                })?;
                counts.estimated += 1;
            }
            Err(reason) => {
                let id = record.get(0).map(str::trim).unwrap_or_default();
                writeln!(diag, "error: line {line} (study {id:?}): {reason}")?;
                counts.rejected += 1;
            }
        }
    }
    writer.finish()?;
    Ok(counts)
}
