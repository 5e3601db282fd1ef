//! Re-derivation of the δ̂ and ε̂ correction coefficients from the divisor
//! tables.
//!
//! The residuals of the tables against Blom's formulas are
//!
//! * δ(n) = ξ(n) − 2Φ⁻¹((n − 0.375)/(n + 0.25))
//! * ε(n) = η(n) − 2Φ⁻¹((0.75n − 0.125)/(n + 0.25))
//!
//! ε is positive and below one, so `Y = n / ln ε(n)` is defined; it is close
//! to linear in `n`, which gives ε̂(n) = exp(n / (a + b n)). δ is regressed on
//! ln n directly.

mod ols;

pub use ols::{ols, Coefficient, RegressionFit};

use std::fmt;

use crate::error::{Error, Result};
use crate::estimators::{blom_eta, blom_xi, EPSILON2_CENTER};
use crate::tables::{table, DivisorKind, TABLE_LEN};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ResidualKind {
    Delta,
    Epsilon,
}

impl fmt::Display for ResidualKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ResidualKind::Delta => "delta",
            ResidualKind::Epsilon => "epsilon",
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ResidualSeries {
    pub kind: ResidualKind,
    /// `(n, residual)` in ascending `n`.
    pub points: Vec<(u32, f64)>,
}

impl ResidualSeries {
    pub fn new(kind: ResidualKind, points: Vec<(u32, f64)>) -> Self {
        Self { kind, points }
    }

    fn restrict(&self, n_min: u32, n_max: u32) -> Vec<(u32, f64)> {
        self.points
            .iter()
            .copied()
            .filter(|(n, _)| (n_min..=n_max).contains(n))
            .collect()
    }

    /// `(n, n / ln ε(n))`; only meaningful for ε residuals in (0, 1).
    pub fn log_transformed(&self) -> Result<Vec<(u32, f64)>> {
        if self.kind != ResidualKind::Epsilon {
            return Err(Error::Transform(
                "log transform applies to epsilon residuals".into(),
            ));
        }
        self.points
            .iter()
            .map(|&(n, e)| {
                if e > 0.0 && e < 1.0 {
                    Ok((n, n as f64 / e.ln()))
                } else {
                    Err(Error::Transform(format!(
                        "epsilon({n}) = {e} outside (0, 1), n / ln(epsilon) undefined"
                    )))
                }
            })
            .collect()
    }
}

/// Residuals of the tabulated divisors against Blom's formulas, n = 2..=50.
pub fn residual_series(kind: ResidualKind) -> Result<ResidualSeries> {
    let (divisors, blom): (_, fn(u32) -> Result<f64>) = match kind {
        ResidualKind::Delta => (table(DivisorKind::Xi), blom_xi),
        ResidualKind::Epsilon => (table(DivisorKind::Eta), blom_eta),
    };
    let points = (2..=TABLE_LEN as u32)
        .map(|n| Ok((n, divisors.get(n)? - blom(n)?)))
        .collect::<Result<Vec<_>>>()?;
    if kind == ResidualKind::Epsilon {
        if let Some((n, e)) = points.iter().find(|(_, e)| *e <= 0.0) {
            return Err(Error::DataIntegrity(format!(
                "epsilon({n}) = {e} is not positive"
            )));
        }
    }
    Ok(ResidualSeries { kind, points })
}

fn require_kind(series: &ResidualSeries, kind: ResidualKind) -> Result<()> {
    if series.kind == kind {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "expected a {kind} series, got {}",
            series.kind
        )))
    }
}

/// `n / ln ε(n) = a + b n` over the whole series.
pub fn fit_epsilon_linear(series: &ResidualSeries) -> Result<RegressionFit> {
    require_kind(series, ResidualKind::Epsilon)?;
    let pts = series.log_transformed()?;
    let (n, y): (Vec<f64>, Vec<f64>) = pts.iter().map(|&(n, y)| (n as f64, y)).unzip();
    ols(&y, "a", &[("b", &n)])
}

/// `n / ln ε(n) = c0 + c1 (n − 26) + c2 (n − 26)²` over 3 ≤ n ≤ 50.
pub fn fit_epsilon_quadratic(series: &ResidualSeries) -> Result<RegressionFit> {
    require_kind(series, ResidualKind::Epsilon)?;
    let restricted = ResidualSeries::new(series.kind, series.restrict(3, TABLE_LEN as u32));
    let pts = restricted.log_transformed()?;
    let y: Vec<f64> = pts.iter().map(|p| p.1).collect();
    let c: Vec<f64> = pts.iter().map(|p| p.0 as f64 - EPSILON2_CENTER).collect();
    let c2: Vec<f64> = c.iter().map(|v| v * v).collect();
    ols(&y, "c0", &[("c1", &c), ("c2", &c2)])
}

/// `δ(n) = a + b ln n`.
pub fn fit_delta(series: &ResidualSeries) -> Result<RegressionFit> {
    require_kind(series, ResidualKind::Delta)?;
    let (ln_n, y): (Vec<f64>, Vec<f64>) = series
        .points
        .iter()
        .map(|&(n, d)| ((n as f64).ln(), d))
        .unzip();
    ols(&y, "a", &[("b", &ln_n)])
}

/// `(f(n + 1) − f(n − 1)) / 2` at every interior point. The series must be
/// contiguous in `n`.
pub fn central_difference(series: &ResidualSeries) -> Result<Vec<(u32, f64)>> {
    let pts = &series.points;
    if pts.len() < 3 {
        return Err(Error::Domain(format!(
            "central difference needs at least 3 points, got {}",
            pts.len()
        )));
    }
    if let Some(w) = pts.windows(2).find(|w| w[1].0 != w[0].0 + 1) {
        return Err(Error::Domain(format!(
            "series not contiguous between n = {} and n = {}",
            w[0].0, w[1].0
        )));
    }
    Ok(pts
        .windows(3)
        .map(|w| (w[1].0, (w[2].1 - w[0].1) / 2.0))
        .collect())
}
