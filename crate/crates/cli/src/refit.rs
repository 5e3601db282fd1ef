//! `refit`: least-squares fits of the table residuals.

use std::fmt::Write as _;

use smallsd::refit::{
    fit_delta, fit_epsilon_linear, fit_epsilon_quadratic, residual_series, RegressionFit,
    ResidualKind, ResidualSeries,
};

use crate::error::CliError;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Order {
    First,
    Second,
}

pub struct Refit {
    pub kind: ResidualKind,
    pub order: Order,
    pub series: ResidualSeries,
    pub fit: RegressionFit,
}

pub fn refit(kind: ResidualKind, order: Order) -> Result<Refit, CliError> {
    let series = residual_series(kind)?;
    let fit = match (kind, order) {
        (ResidualKind::Epsilon, Order::First) => fit_epsilon_linear(&series)?,
        (ResidualKind::Epsilon, Order::Second) => fit_epsilon_quadratic(&series)?,
        (ResidualKind::Delta, Order::First) => fit_delta(&series)?,
        (ResidualKind::Delta, Order::Second) => {
            return Err(CliError::Usage(
                "the delta correction has no second-order fit".into(),
            ))
        }
    };
    Ok(Refit {
        kind,
        order,
        series,
        fit,
    })
}

impl Refit {
    fn model(&self) -> &'static str {
        match (self.kind, self.order) {
            (ResidualKind::Epsilon, Order::First) => "n / ln(epsilon) ~ a + b n",
            (ResidualKind::Epsilon, Order::Second) => {
                "n / ln(epsilon) ~ c0 + c1 (n - 26) + c2 (n - 26)^2, 3 <= n <= 50"
            }
            _ => "delta ~ a + b ln(n)",
        }
    }

    pub fn report(&self) -> String {
        format!("Model: {}\n\n{}", self.model(), self.fit)
    }

    /// Residuals, regression response and fitted values, one row per `n`.
    /// For epsilon the back-transformed fit `exp(n / fitted)` is included.
    pub fn series_tsv(&self) -> String {
        // the quadratic fit drops n = 2, so match points on n
        let skip = self.series.points.len() - self.fit.fitted.len();
        let points = &self.series.points[skip..];
        let mut out = String::new();
        match self.kind {
            ResidualKind::Epsilon => {
                out.push_str("n\tepsilon\ty\tfitted\tresidual\tepsilon_fitted\n");
                for (i, &(n, e)) in points.iter().enumerate() {
                    let y = n as f64 / e.ln();
                    let f = self.fit.fitted[i];
                    let _ = writeln!(
                        out,
                        "{n}\t{e:.6}\t{y:.6}\t{f:.6}\t{:.6}\t{:.6}",
                        self.fit.residuals[i],
                        (n as f64 / f).exp()
                    );
                }
            }
            ResidualKind::Delta => {
                out.push_str("n\tln_n\tdelta\tfitted\tresidual\n");
                for (i, &(n, d)) in points.iter().enumerate() {
                    let _ = writeln!(
                        out,
                        "{n}\t{:.6}\t{d:.6}\t{:.6}\t{:.6}",
                        (n as f64).ln(),
                        self.fit.fitted[i],
                        self.fit.residuals[i]
                    );
                }
            }
        }
        out
    }
}
