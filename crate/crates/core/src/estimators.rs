//! Sample mean and standard deviation from median, range and quartiles.
//!
//! Three reporting patterns are supported:
//!
//! * [`Scenario::C1`]: minimum `a`, median `m`, maximum `b`
//! * [`Scenario::C2`]: all five of `a`, `Q1`, `m`, `Q3`, `b`
//! * [`Scenario::C3`]: `Q1`, `m`, `Q3`
//!
//! The standard deviation is a spread divided by a divisor function of `n`:
//! the expected range ξ(n) for `b - a`, the expected interquartile range η(n)
//! for `Q3 - Q1`. Both are approximated by Blom's plotting-position formulas
//! `2Φ⁻¹((n - 0.375)/(n + 0.25))` and `2Φ⁻¹((0.75n - 0.125)/(n + 0.25))`,
//! plus an additive small-sample correction for `n <= 50`:
//!
//! * δ̂(n) = -0.0626 + 0.0197 ln n for ξ
//! * ε̂(n) = exp(n / (-2.8822 - 0.2307863 n)) for η, or the second-order
//!   exp(n / (-9.01647 - 0.23238 (n - 26) + 0.00074 (n - 26)²)) for 3 ≤ n ≤ 50.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::specfun::{std_normal_quantile, Probability};

/// Largest `n` that receives the additive correction.
pub const SMALL_SAMPLE_CUTOFF: u32 = 50;

pub const DELTA_INTERCEPT: f64 = -0.0626;
pub const DELTA_LOG_SLOPE: f64 = 0.0197;

// Fitted values to the printed precision; -2.882 and -0.231 are the
// rounded display forms. The slope fixes the limit exp(1 / b) ≈ 0.01312794.
pub const EPSILON_INTERCEPT: f64 = -2.8822;
pub const EPSILON_SLOPE: f64 = -0.2307863;

pub const EPSILON2_INTERCEPT: f64 = -9.01647;
pub const EPSILON2_LINEAR: f64 = -0.23238;
pub const EPSILON2_QUADRATIC: f64 = 0.00074;
pub const EPSILON2_CENTER: f64 = 26.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Scenario {
    /// min, median, max
    C1,
    /// min, Q1, median, Q3, max
    C2,
    /// Q1, median, Q3
    C3,
}

impl fmt::Display for Scenario {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Scenario::C1 => "C1",
            Scenario::C2 => "C2",
            Scenario::C3 => "C3",
        })
    }
}

impl FromStr for Scenario {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "c1" => Ok(Scenario::C1),
            "c2" => Ok(Scenario::C2),
            "c3" => Ok(Scenario::C3),
            other => Err(Error::Domain(format!("unknown scenario {other:?}"))),
        }
    }
}

/// Which additive correction is applied to the Blom divisors.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default)]
pub enum CorrectionOrder {
    /// Blom's formulas as they are.
    None,
    /// δ̂ for ξ, first-order ε̂ for η.
    #[default]
    First,
    /// δ̂ for ξ, quadratic ε̂ for η (3 ≤ n ≤ 50 only).
    Second,
}

impl fmt::Display for CorrectionOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            CorrectionOrder::None => "none",
            CorrectionOrder::First => "first",
            CorrectionOrder::Second => "second",
        })
    }
}

impl FromStr for CorrectionOrder {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "none" => Ok(CorrectionOrder::None),
            "first" => Ok(CorrectionOrder::First),
            "second" => Ok(CorrectionOrder::Second),
            other => Err(Error::Domain(format!("unknown correction order {other:?}"))),
        }
    }
}

/// One study's reported summary. Absent statistics are `None`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct StudySummary {
    pub n: u32,
    pub min: Option<f64>,
    pub q1: Option<f64>,
    pub median: Option<f64>,
    pub q3: Option<f64>,
    pub max: Option<f64>,
}

impl StudySummary {
    pub fn c1(n: u32, min: f64, median: f64, max: f64) -> Self {
        Self {
            n,
            min: Some(min),
            median: Some(median),
            max: Some(max),
            ..Self::default()
        }
    }

    pub fn c2(n: u32, min: f64, q1: f64, median: f64, q3: f64, max: f64) -> Self {
        Self {
            n,
            min: Some(min),
            q1: Some(q1),
            median: Some(median),
            q3: Some(q3),
            max: Some(max),
        }
    }

    pub fn c3(n: u32, q1: f64, median: f64, q3: f64) -> Self {
        Self {
            n,
            q1: Some(q1),
            median: Some(median),
            q3: Some(q3),
            ..Self::default()
        }
    }

    /// Applies `x -> scale * x + shift` to every present statistic.
    pub fn affine(&self, scale: f64, shift: f64) -> Self {
        let f = |v: Option<f64>| v.map(|x| scale * x + shift);
        Self {
            n: self.n,
            min: f(self.min),
            q1: f(self.q1),
            median: f(self.median),
            q3: f(self.q3),
            max: f(self.max),
        }
    }

    fn ordered_fields(&self) -> [(&'static str, Option<f64>); 5] {
        [
            ("min", self.min),
            ("q1", self.q1),
            ("median", self.median),
            ("q3", self.q3),
            ("max", self.max),
        ]
    }

    /// Checks `n >= 2`, finiteness, and `a <= Q1 <= m <= Q3 <= b` among the
    /// statistics that are present.
    pub fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(Error::Validation(format!("sample size n = {} < 2", self.n)));
        }
        let present: Vec<(&str, f64)> = self
            .ordered_fields()
            .into_iter()
            .filter_map(|(name, v)| v.map(|v| (name, v)))
            .collect();
        if let Some((name, v)) = present.iter().find(|(_, v)| !v.is_finite()) {
            return Err(Error::Validation(format!("{name} = {v} is not finite")));
        }
        for pair in present.windows(2) {
            let ((lo_name, lo), (hi_name, hi)) = (pair[0], pair[1]);
            if lo > hi {
                return Err(Error::Validation(format!(
                    "{lo_name} = {lo} exceeds {hi_name} = {hi}"
                )));
            }
        }
        Ok(())
    }

    pub fn supports(&self, scenario: Scenario) -> bool {
        let range = self.min.is_some() && self.max.is_some();
        let quartiles = self.q1.is_some() && self.q3.is_some();
        self.median.is_some()
            && match scenario {
                Scenario::C1 => range,
                Scenario::C2 => range && quartiles,
                Scenario::C3 => quartiles,
            }
    }

    /// The most informative scenario the present fields allow: C2, then C3,
    /// then C1.
    pub fn scenario(&self) -> Result<Scenario> {
        [Scenario::C2, Scenario::C3, Scenario::C1]
            .into_iter()
            .find(|&s| self.supports(s))
            .ok_or_else(|| {
                Error::MissingFields(
                    "need {min, median, max}, {q1, median, q3} or all five".to_string(),
                )
            })
    }

    fn require(&self, scenario: Scenario) -> Result<()> {
        if self.supports(scenario) {
            Ok(())
        } else {
            let needed = match scenario {
                Scenario::C1 => "min, median, max",
                Scenario::C2 => "min, q1, median, q3, max",
                Scenario::C3 => "q1, median, q3",
            };
            Err(Error::MissingFields(format!(
                "scenario {scenario} needs {needed}"
            )))
        }
    }
}

fn blom(n: u32, numerator: f64) -> Result<f64> {
    if n < 1 {
        return Err(Error::Domain("sample size must be positive".into()));
    }
    let p = numerator / (n as f64 + 0.25);
    if p == 0.5 {
        return Ok(0.0);
    }
    Ok(2.0 * std_normal_quantile(p)?)
}

/// Blom's approximation to the expected range, `2Φ⁻¹((n - 0.375)/(n + 0.25))`.
pub fn blom_xi(n: u32) -> Result<f64> {
    blom(n, n as f64 - 0.375)
}

/// Blom's approximation to the expected interquartile range,
/// `2Φ⁻¹((0.75n - 0.125)/(n + 0.25))`.
pub fn blom_eta(n: u32) -> Result<f64> {
    blom(n, 0.75 * n as f64 - 0.125)
}

/// δ̂(n) = -0.0626 + 0.0197 ln n.
pub fn delta_hat(n: u32) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("delta_hat needs n >= 2, got {n}")));
    }
    Ok(DELTA_INTERCEPT + DELTA_LOG_SLOPE * (n as f64).ln())
}

/// ε̂(n) for the given order; zero for [`CorrectionOrder::None`].
pub fn epsilon_hat(n: u32, order: CorrectionOrder) -> Result<f64> {
    let x = n as f64;
    match order {
        CorrectionOrder::None => Ok(0.0),
        CorrectionOrder::First => {
            if n < 2 {
                return Err(Error::Domain(format!("epsilon_hat needs n >= 2, got {n}")));
            }
            Ok((x / (EPSILON_INTERCEPT + EPSILON_SLOPE * x)).exp())
        }
        CorrectionOrder::Second => {
            if !(3..=SMALL_SAMPLE_CUTOFF).contains(&n) {
                return Err(Error::Domain(format!(
                    "second-order epsilon_hat is fitted on 3 <= n <= 50, got {n}"
                )));
            }
            let c = x - EPSILON2_CENTER;
            Ok((x / (EPSILON2_INTERCEPT + EPSILON2_LINEAR * c + EPSILON2_QUADRATIC * c * c)).exp())
        }
    }
}

/// Corrected expected-range divisor ξ̂(n) with the default cutoff of 50.
pub fn xi_hat(n: u32) -> Result<f64> {
    xi_hat_with(n, CorrectionOrder::First, SMALL_SAMPLE_CUTOFF)
}

pub fn xi_hat_with(n: u32, order: CorrectionOrder, cutoff: u32) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("xi_hat needs n >= 2, got {n}")));
    }
    let base = blom_xi(n)?;
    if order == CorrectionOrder::None || n > cutoff {
        Ok(base)
    } else {
        Ok(base + delta_hat(n)?)
    }
}

/// Corrected interquartile-range divisor η̂(n) with the default cutoff of 50.
pub fn eta_hat(n: u32, order: CorrectionOrder) -> Result<f64> {
    eta_hat_with(n, order, SMALL_SAMPLE_CUTOFF)
}

pub fn eta_hat_with(n: u32, order: CorrectionOrder, cutoff: u32) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!("eta_hat needs n >= 2, got {n}")));
    }
    let base = blom_eta(n)?;
    if n > cutoff {
        Ok(base)
    } else {
        Ok(base + epsilon_hat(n, order)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EstimatorConfig {
    pub correction: CorrectionOrder,
    /// Forces a scenario instead of picking the most informative one.
    pub scenario: Option<Scenario>,
    pub cutoff: u32,
    /// Drop the `(a - 2m + b)/(4n)` term from the C1 mean.
    pub simplified_c1_mean: bool,
}

impl Default for EstimatorConfig {
    fn default() -> Self {
        Self {
            correction: CorrectionOrder::First,
            scenario: None,
            cutoff: SMALL_SAMPLE_CUTOFF,
            simplified_c1_mean: false,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MomentEstimate {
    pub mean: Option<f64>,
    pub sd: Option<f64>,
    pub scenario: Scenario,
    pub correction: CorrectionOrder,
    /// ξ̂(n), when the range was used.
    pub xi_divisor: Option<f64>,
    /// η̂(n), when the quartiles were used.
    pub eta_divisor: Option<f64>,
    /// A spread that entered the estimate was zero.
    pub degenerate: bool,
}

impl MomentEstimate {
    /// The single divisor for C1/C3, the mean of the two for C2.
    pub fn divisor_used(&self) -> Option<f64> {
        match (self.xi_divisor, self.eta_divisor) {
            (Some(x), Some(e)) => Some(0.5 * (x + e)),
            (Some(x), None) => Some(x),
            (None, Some(e)) => Some(e),
            (None, None) => None,
        }
    }
}

#[derive(Debug, Clone, Copy, Default)]
pub struct Estimator {
    pub config: EstimatorConfig,
}

impl Estimator {
    pub fn new(config: EstimatorConfig) -> Result<Self> {
        if config.cutoff < 2 {
            return Err(Error::Domain(format!(
                "cutoff must be >= 2, got {}",
                config.cutoff
            )));
        }
        Ok(Self { config })
    }

    fn resolve(&self, summary: &StudySummary) -> Result<Scenario> {
        summary.validate()?;
        match self.config.scenario {
            Some(s) => summary.require(s).map(|_| s),
            None => summary.scenario(),
        }
    }

    pub fn mean(&self, summary: &StudySummary) -> Result<f64> {
        let scenario = self.resolve(summary)?;
        Ok(self.mean_for(summary, scenario))
    }

    fn mean_for(&self, s: &StudySummary, scenario: Scenario) -> f64 {
        // fields are present, checked by resolve()
        let v = |x: Option<f64>| x.unwrap_or(f64::NAN);
        let m = v(s.median);
        match scenario {
            Scenario::C1 => {
                let (a, b) = (v(s.min), v(s.max));
                let base = (a + 2.0 * m + b) / 4.0;
                if self.config.simplified_c1_mean {
                    base
                } else {
                    base + (a - 2.0 * m + b) / (4.0 * s.n as f64)
                }
            }
            Scenario::C2 => (v(s.min) + 2.0 * v(s.q1) + 2.0 * m + 2.0 * v(s.q3) + v(s.max)) / 8.0,
            Scenario::C3 => (v(s.q1) + m + v(s.q3)) / 3.0,
        }
    }

    pub fn sd(&self, summary: &StudySummary) -> Result<MomentEstimate> {
        let scenario = self.resolve(summary)?;
        self.sd_for(summary, scenario)
    }

    fn sd_for(&self, s: &StudySummary, scenario: Scenario) -> Result<MomentEstimate> {
        let n = s.n;
        let cfg = &self.config;
        let range = match (scenario, s.min, s.max) {
            (Scenario::C1 | Scenario::C2, Some(a), Some(b)) => Some(b - a),
            _ => None,
        };
        let iqr = match (scenario, s.q1, s.q3) {
            (Scenario::C2 | Scenario::C3, Some(q1), Some(q3)) => Some(q3 - q1),
            _ => None,
        };
        let xi_divisor = range
            .map(|_| xi_hat_with(n, cfg.correction, cfg.cutoff))
            .transpose()?;
        let eta_divisor = iqr
            .map(|_| eta_hat_with(n, cfg.correction, cfg.cutoff))
            .transpose()?;

        let by_range = range.zip(xi_divisor).map(|(r, d)| r / d);
        let by_iqr = iqr.zip(eta_divisor).map(|(r, d)| r / d);
        let sd = match (by_range, by_iqr) {
            (Some(x), Some(y)) => 0.5 * (x + y),
            (Some(x), None) | (None, Some(x)) => x,
            (None, None) => unreachable!("scenario always provides a spread"),
        };
        let degenerate = range.is_some_and(|r| r == 0.0) || iqr.is_some_and(|r| r == 0.0);

        Ok(MomentEstimate {
            mean: None,
            sd: Some(sd),
            scenario,
            correction: cfg.correction,
            xi_divisor,
            eta_divisor,
            degenerate,
        })
    }

    /// Mean and standard deviation together.
    pub fn estimate(&self, summary: &StudySummary) -> Result<MomentEstimate> {
        let scenario = self.resolve(summary)?;
        let mut est = self.sd_for(summary, scenario)?;
        est.mean = Some(self.mean_for(summary, scenario));
        Ok(est)
    }
}

/// Mean under the default configuration (scenario auto-detected, full C1
/// formula).
pub fn estimate_mean(summary: &StudySummary) -> Result<f64> {
    Estimator::default().mean(summary)
}

/// Standard deviation under the default scenario rule and the given
/// correction order.
pub fn estimate_sd(summary: &StudySummary, order: CorrectionOrder) -> Result<MomentEstimate> {
    let est = Estimator {
        config: EstimatorConfig {
            correction: order,
            ..EstimatorConfig::default()
        },
    };
    est.sd(summary)
}

/// Smallest `n` per group with `n >= 2σ²(z_{α/2} + z_β)² / Δ²`.
pub fn required_sample_size(sigma: f64, delta: f64, alpha: f64, beta: f64) -> Result<u64> {
    if !(sigma > 0.0 && sigma.is_finite()) {
        return Err(Error::Domain(format!(
            "sigma must be positive, got {sigma}"
        )));
    }
    if delta == 0.0 || !delta.is_finite() {
        return Err(Error::Domain(format!(
            "delta must be non-zero, got {delta}"
        )));
    }
    let alpha = Probability::open(alpha)?;
    let beta = Probability::open(beta)?;
    let z_alpha = std_normal_quantile(1.0 - alpha.value() / 2.0)?;
    let z_beta = std_normal_quantile(1.0 - beta.value())?;
    let bound = 2.0 * sigma * sigma * (z_alpha + z_beta).powi(2) / (delta * delta);
    Ok(bound.ceil() as u64)
}
