use std::f64::consts::PI;
use std::fmt;

use crate::error::{Error, Result};

/// Relative size of a QR pivot, against its column's norm, below which the
/// design is treated as rank deficient.
const RANK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Coefficient {
    pub name: String,
    pub estimate: f64,
    pub std_error: f64,
    pub t_value: f64,
    /// Two-sided p-value below 0.001.
    pub p_below_0_001: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegressionFit {
    pub coefficients: Vec<Coefficient>,
    pub residual_std_error: f64,
    pub r_squared: f64,
    pub df: usize,
    pub fitted: Vec<f64>,
    pub residuals: Vec<f64>,
}

impl RegressionFit {
    pub fn coefficient(&self, name: &str) -> Option<&Coefficient> {
        self.coefficients.iter().find(|c| c.name == name)
    }

    pub fn estimates(&self) -> Vec<f64> {
        self.coefficients.iter().map(|c| c.estimate).collect()
    }
}

impl fmt::Display for RegressionFit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let width = self
            .coefficients
            .iter()
            .map(|c| c.name.len())
            .max()
            .unwrap_or(0)
            .max(4);
        writeln!(
            f,
            "{:width$}  {:>12}  {:>12}  {:>10}  {:>9}",
            "", "Estimate", "Std. Error", "t value", "Pr(>|t|)"
        )?;
        for c in &self.coefficients {
            let p = if c.p_below_0_001 {
                "< 0.001"
            } else {
                ">= 0.001"
            };
            writeln!(
                f,
                "{:width$}  {:>12.6}  {:>12.6}  {:>10.2}  {:>9}",
                c.name, c.estimate, c.std_error, c.t_value, p
            )?;
        }
        writeln!(
            f,
            "Residual standard error: {:.4} on {} degrees of freedom",
            self.residual_std_error, self.df
        )?;
        writeln!(f, "Multiple R-squared: {:.6}", self.r_squared)
    }
}

/// Ordinary least squares of `y` on an intercept plus the named regressors,
/// solved by Householder QR of the design matrix.
pub fn ols(y: &[f64], intercept: &str, regressors: &[(&str, &[f64])]) -> Result<RegressionFit> {
    let m = y.len();
    let k = regressors.len() + 1;
    if let Some((name, col)) = regressors.iter().find(|(_, c)| c.len() != m) {
        return Err(Error::Domain(format!(
            "regressor {name} has {} rows, response has {m}",
            col.len()
        )));
    }
    if m < k + 1 {
        return Err(Error::Domain(format!(
            "{m} observations cannot support {k} coefficients with residual degrees of freedom"
        )));
    }
    if y.iter()
        .chain(regressors.iter().flat_map(|(_, c)| c.iter()))
        .any(|v| !v.is_finite())
    {
        return Err(Error::Domain("non-finite value in regression data".into()));
    }

    let names: Vec<&str> = std::iter::once(intercept)
        .chain(regressors.iter().map(|(n, _)| *n))
        .collect();

    // column-major design
    let mut a: Vec<Vec<f64>> = std::iter::once(vec![1.0; m])
        .chain(regressors.iter().map(|(_, c)| c.to_vec()))
        .collect();
    let col_norms: Vec<f64> = a.iter().map(|c| norm(c)).collect();
    let mut qty = y.to_vec();

    for j in 0..k {
        let alpha = -norm(&a[j][j..]).copysign(a[j][j]);
        if alpha.abs() <= RANK_TOL * col_norms[j] || col_norms[j] == 0.0 {
            return Err(Error::SingularDesign(format!(
                "column {} is (nearly) a linear combination of earlier columns",
                names[j]
            )));
        }
        let mut v: Vec<f64> = a[j][j..].to_vec();
        v[0] -= alpha;
        let vnorm2: f64 = v.iter().map(|x| x * x).sum();
        let reflect = |col: &mut [f64]| {
            let dot: f64 = v.iter().zip(col.iter()).map(|(a, b)| a * b).sum();
            let s = 2.0 * dot / vnorm2;
            for (c, vi) in col.iter_mut().zip(v.iter()) {
                *c -= s * vi;
            }
        };
        for col in a.iter_mut().skip(j + 1) {
            reflect(&mut col[j..]);
        }
        reflect(&mut qty[j..]);
        a[j][j] = alpha;
        for x in a[j][j + 1..].iter_mut() {
            *x = 0.0;
        }
    }

    // R[i][j] = a[j][i] for i <= j
    let r = |i: usize, j: usize| a[j][i];
    let mut beta = vec![0.0; k];
    for i in (0..k).rev() {
        let s: f64 = (i + 1..k).map(|j| r(i, j) * beta[j]).sum();
        beta[i] = (qty[i] - s) / r(i, i);
    }

    // R⁻¹, upper triangular
    let mut rinv = vec![vec![0.0; k]; k];
    for (i, row) in rinv.iter_mut().enumerate() {
        row[i] = 1.0 / r(i, i);
        for j in i + 1..k {
            let s: f64 = (i..j).map(|l| row[l] * r(l, j)).sum();
            row[j] = -s / r(j, j);
        }
    }

    let fitted: Vec<f64> = (0..m)
        .map(|row| {
            beta[0]
                + regressors
                    .iter()
                    .zip(&beta[1..])
                    .map(|((_, c), b)| c[row] * b)
                    .sum::<f64>()
        })
        .collect();
    let residuals: Vec<f64> = y.iter().zip(&fitted).map(|(y, f)| y - f).collect();
    let rss: f64 = residuals.iter().map(|e| e * e).sum();
    let mean_y = y.iter().sum::<f64>() / m as f64;
    let tss: f64 = y.iter().map(|v| (v - mean_y).powi(2)).sum();
    let df = m - k;
    let sigma2 = rss / df as f64;
    let r_squared = if tss > 0.0 { 1.0 - rss / tss } else { 1.0 };

    let coefficients = (0..k)
        .map(|j| {
            let var: f64 = sigma2 * rinv[j][j..].iter().map(|x| x * x).sum::<f64>();
            let se = var.sqrt();
            let t = beta[j] / se;
            Coefficient {
                name: names[j].to_string(),
                estimate: beta[j],
                std_error: se,
                t_value: t,
                p_below_0_001: student_t_two_sided_p(t, df) < 1e-3,
            }
        })
        .collect();

    Ok(RegressionFit {
        coefficients,
        residual_std_error: sigma2.sqrt(),
        r_squared,
        df,
        fitted,
        residuals,
    })
}

fn norm(v: &[f64]) -> f64 {
    let scale = v.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    if scale == 0.0 {
        return 0.0;
    }
    scale * v.iter().map(|x| (x / scale).powi(2)).sum::<f64>().sqrt()
}

/// `P(|T| > |t|)` for Student's t with integer degrees of freedom, from the
/// finite trigonometric series for the central probability.
pub(crate) fn student_t_two_sided_p(t: f64, df: usize) -> f64 {
    if t.is_nan() || df == 0 {
        return f64::NAN;
    }
    if t.is_infinite() {
        return 0.0;
    }
    let nu = df as f64;
    let theta = (t.abs() / nu.sqrt()).atan();
    let (s, c) = theta.sin_cos();
    let c2 = c * c;
    let central = if df.is_multiple_of(2) {
        let mut term = 1.0;
        let mut sum = 1.0;
        let mut k = 2;
        while k <= df - 2 {
            term *= c2 * (k - 1) as f64 / k as f64;
            sum += term;
            k += 2;
        }
        s * sum
    } else if df == 1 {
        2.0 * theta / PI
    } else {
        let mut term = c;
        let mut sum = c;
        let mut k = 3;
        while k <= df - 2 {
            term *= c2 * (k - 1) as f64 / k as f64;
            sum += term;
            k += 2;
        }
        2.0 / PI * (theta + s * sum)
    };
    (1.0 - central).clamp(0.0, 1.0)
}
