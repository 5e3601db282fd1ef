//! `oracle`: regenerated divisor tables with a deviation report.

use std::ops::RangeInclusive;

use smallsd::oracle::{
    regenerate_tables, McConfig, QuadratureConfig, Regeneration, TableSelection,
};

use crate::error::CliError;

pub fn regenerate(
    range: RangeInclusive<u32>,
    which: TableSelection,
    quadrature: &QuadratureConfig,
    mc: &McConfig,
) -> Result<Regeneration, CliError> {
    if *range.start() < 2 {
        return Err(CliError::Usage(format!(
            "expected values need n >= 2, range starts at {}",
            range.start()
        )));
    }
    Ok(regenerate_tables(quadrature, mc, range, which)?)
}
