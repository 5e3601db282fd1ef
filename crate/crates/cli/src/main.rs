//! `smallsd`: sample mean and standard deviation from reported medians,
//! ranges and quartiles.

mod error;
mod estimate;
mod oracle;
mod output;
mod refit;
mod tables;

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufReader, BufWriter, Write};
use std::ops::RangeInclusive;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};
use smallsd::oracle::{McConfig, QuadratureConfig, QuantileConvention, TableSelection};
use smallsd::refit::ResidualKind;
use smallsd::{CorrectionOrder, DivisorKind, Estimator, EstimatorConfig, Scenario};

use crate::error::CliError;
use crate::output::{create, Format};

#[derive(Parser)]
#[command(name = "smallsd", version, about)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Estimate mean and standard deviation for every study in a CSV file
    ///
    /// The input header must be exactly `study_id,n,min,q1,median,q3,max`.
    /// Empty cells are absent values. Rows that cannot be estimated are
    /// reported on stderr and skipped.
    Estimate(EstimateArgs),
    /// Tabulated divisors next to their approximations and residuals
    Tables(TablesArgs),
    /// Refit the correction terms to the tabulated divisors
    Refit(RefitArgs),
    /// Recompute the divisor tables (xi by quadrature, eta by Monte Carlo)
    Oracle(OracleArgs),
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Correction {
    None,
    First,
    Second,
}

impl From<Correction> for CorrectionOrder {
    fn from(c: Correction) -> Self {
        match c {
            Correction::None => CorrectionOrder::None,
            Correction::First => CorrectionOrder::First,
            Correction::Second => CorrectionOrder::Second,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum ScenarioArg {
    C1,
    C2,
    C3,
}

impl From<ScenarioArg> for Scenario {
    fn from(s: ScenarioArg) -> Self {
        match s {
            ScenarioArg::C1 => Scenario::C1,
            ScenarioArg::C2 => Scenario::C2,
            ScenarioArg::C3 => Scenario::C3,
        }
    }
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Which {
    Xi,
    Eta,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Kind {
    Epsilon,
    Delta,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Order {
    First,
    Second,
}

#[derive(Debug, Clone, Copy, ValueEnum)]
enum Convention {
    Blom,
    Linear,
    NearestRank,
}

impl From<Convention> for QuantileConvention {
    fn from(c: Convention) -> Self {
        match c {
            Convention::Blom => QuantileConvention::Blom,
            Convention::Linear => QuantileConvention::Linear,
            Convention::NearestRank => QuantileConvention::NearestRank,
        }
    }
}

#[derive(Args)]
struct Corrections {
    /// Small-sample correction applied to the divisors
    #[arg(long, value_enum, default_value_t = Correction::First)]
    correction: Correction,

    /// Largest n that receives the correction. Experimental for any value
    /// other than 50.
    #[arg(long, default_value_t = smallsd::estimators::SMALL_SAMPLE_CUTOFF,
          value_parser = clap::value_parser!(u32).range(2..))]
    cutoff: u32,
}

#[derive(Args)]
struct EstimateArgs {
    /// Summary CSV file
    input: PathBuf,

    #[command(flatten)]
    corrections: Corrections,

    /// Use this scenario instead of the most informative one available
    #[arg(long, value_enum)]
    scenario: Option<ScenarioArg>,

    /// Drop the 1/n term from the min/median/max mean
    #[arg(long)]
    simplified_mean: bool,

    #[arg(long, value_enum, default_value_t = Format::Csv)]
    format: Format,

    /// Write estimates here instead of stdout
    #[arg(long, short)]
    output: Option<PathBuf>,
}

#[derive(Args)]
struct TablesArgs {
    #[arg(long, value_enum)]
    which: Which,

    /// Sample sizes A:B, both inclusive, A >= 2. Table cells are empty
    /// beyond n = 50.
    #[arg(long, default_value = "2:50", value_parser = parse_range)]
    range: RangeInclusive<u32>,

    #[command(flatten)]
    corrections: Corrections,

    #[arg(long, value_enum, default_value_t = Format::Tsv)]
    format: Format,
}

#[derive(Args)]
struct RefitArgs {
    #[arg(long, value_enum)]
    kind: Kind,

    /// `second` fits a quadratic in n - 26 (epsilon only)
    #[arg(long, value_enum, default_value_t = Order::First)]
    order: Order,

    /// Write the residual series and fitted values as TSV
    #[arg(long)]
    emit_series: Option<PathBuf>,
}

#[derive(Args)]
struct OracleArgs {
    /// Table to regenerate; both when omitted
    #[arg(long, value_enum)]
    which: Option<Which>,

    /// Sample sizes A:B, both inclusive, A >= 2
    #[arg(long, default_value = "2:50", value_parser = parse_range)]
    range: RangeInclusive<u32>,

    /// Monte Carlo replications per sample size
    #[arg(long, default_value_t = 1_000_000)]
    reps: u64,

    #[arg(long, default_value_t = 7)]
    seed: u64,

    /// Quantile convention for eta when no row overlaps the table
    #[arg(long, value_enum, default_value_t = Convention::Linear)]
    convention: Convention,

    /// Half-width of the quadrature interval
    #[arg(long, default_value_t = 10.0)]
    bound: f64,

    #[arg(long, default_value_t = 1e-9)]
    abs_tol: f64,

    #[arg(long, default_value_t = 1e-12)]
    rel_tol: f64,

    /// Write the deviation report here instead of stderr
    #[arg(long)]
    report: Option<PathBuf>,
}

fn parse_range(s: &str) -> Result<RangeInclusive<u32>, String> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| format!("expected A:B, found {s:?}"))?;
    let a: u32 = a
        .trim()
        .parse()
        .map_err(|_| format!("bad range start {a:?}"))?;
    let b: u32 = b
        .trim()
        .parse()
        .map_err(|_| format!("bad range end {b:?}"))?;
    if a > b {
        return Err(format!("empty range {a}:{b}"));
    }
    Ok(a..=b)
}

fn estimator(
    c: &Corrections,
    scenario: Option<ScenarioArg>,
    simplified: bool,
) -> Result<Estimator, CliError> {
    Ok(Estimator::new(EstimatorConfig {
        correction: c.correction.into(),
        scenario: scenario.map(Into::into),
        cutoff: c.cutoff,
        simplified_c1_mean: simplified,
    })?)
}

fn run_estimate(
    args: &EstimateArgs,
    out: &mut dyn Write,
    diag: &mut dyn Write,
) -> Result<(), CliError> {
    let est = estimator(&args.corrections, args.scenario, args.simplified_mean)?;
    let input = File::open(&args.input).map_err(|source| CliError::Open {
        path: args.input.clone(),
        source,
    })?;
    let input = BufReader::new(input);
    let counts = match &args.output {
        Some(path) => estimate::run(input, &est, args.format, create(path)?, diag)?,
        None => estimate::run(input, &est, args.format, out, diag)?,
    };
    writeln!(
        diag,
        "{} estimated, {} rejected",
        counts.estimated, counts.rejected
    )?;
    Ok(())
}

fn run_tables(args: &TablesArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let kind = match args.which {
        Which::Xi => DivisorKind::Xi,
        Which::Eta => DivisorKind::Eta,
    };
    let rows = tables::rows(
        kind,
        args.range.clone(),
        args.corrections.correction.into(),
        args.corrections.cutoff,
    )?;
    tables::write(&rows, args.format, out)
}

fn run_refit(args: &RefitArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let kind = match args.kind {
        Kind::Epsilon => ResidualKind::Epsilon,
        Kind::Delta => ResidualKind::Delta,
    };
    let order = match args.order {
        Order::First => refit::Order::First,
        Order::Second => refit::Order::Second,
    };
    let r = refit::refit(kind, order)?;
    if let Some(path) = &args.emit_series {
        let mut w = create(path)?;
        w.write_all(r.series_tsv().as_bytes())?;
        w.flush()?;
    }
    out.write_all(r.report().as_bytes())?;
    Ok(())
}

fn run_oracle(
    args: &OracleArgs,
    out: &mut dyn Write,
    diag: &mut dyn Write,
) -> Result<(), CliError> {
    let which = match args.which {
        Some(Which::Xi) => TableSelection::Xi,
        Some(Which::Eta) => TableSelection::Eta,
        None => TableSelection::Both,
    };
    let quadrature = QuadratureConfig {
        abs_tol: args.abs_tol,
        rel_tol: args.rel_tol,
        integration_bound: args.bound,
        ..Default::default()
    };
    let mc = McConfig {
        replications: args.reps,
        seed: args.seed,
        quantile_convention: args.convention.into(),
        ..Default::default()
    };
    let regen = oracle::regenerate(args.range.clone(), which, &quadrature, &mc)?;
    out.write_all(regen.to_fixture_format().as_bytes())?;
    match &args.report {
        Some(path) => {
            let mut w = create(path)?;
            w.write_all(regen.report().as_bytes())?;
            w.flush()?;
        }
        None => diag.write_all(regen.report().as_bytes())?,
    }
    Ok(())
}

fn run(cli: &Cli, out: &mut dyn Write, diag: &mut dyn Write) -> Result<(), CliError> {
    match &cli.command {
        Command::Estimate(a) => run_estimate(a, out, diag),
        Command::Tables(a) => run_tables(a, out),
        Command::Refit(a) => run_refit(a, out),
        Command::Oracle(a) => run_oracle(a, out, diag),
    }
}

/// Parses `args`, runs the command and returns the process exit status.
/// Diagnostics, including clap's, go to `diag`; help text goes to `out`.
fn execute<I, T>(args: I, out: &mut dyn Write, diag: &mut dyn Write) -> u8
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let text = e.render().to_string();
            let _ = if e.use_stderr() {
                diag.write_all(text.as_bytes())
            } else {
                out.write_all(text.as_bytes())
            };
            return e.exit_code() as u8;
        }
    };
    let result = run(&cli, out, diag).and_then(|()| Ok(out.flush()?));
    match result {
        Ok(()) => 0,
        Err(e) => {
            let code = match e {
                CliError::Usage(_) => 2,
                _ => 1,
            };
            let msg = match e {
                CliError::Usage(msg) => msg,
                e => e.to_string(),
            };
            let _ = writeln!(diag, "error: {msg}");
            code
        }
    }
}

fn main() -> ExitCode {
    let mut out = BufWriter::new(io::stdout().lock());
    let mut diag = io::stderr().lock();
    let code = execute(std::env::args_os(), &mut out, &mut diag);
    let _ = out.flush();
    ExitCode::from(code)
}

#[cfg(test)]
mod process_tests;
