//! Independent recomputation of the divisor tables.
//!
//! ξ(n) is the expected range of `n` standard normal draws,
//!
//! ```text
//! E[X(n) − X(1)] = ∫ z · n φ(z) [Φ(z)ⁿ⁻¹ − (1 − Φ(z))ⁿ⁻¹] dz,
//! ```
//!
//! evaluated by adaptive Gauss–Kronrod quadrature. η(n), the expected sample
//! interquartile range, depends on how sample quartiles are defined, so it
//! is estimated by Monte Carlo under several quantile conventions at once.
//! Exact expected order statistics are also available by quadrature.

use std::fmt::{self, Write as _};
use std::ops::RangeInclusive;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, Tolerance};
use crate::specfun::{std_normal_cdf, std_normal_pdf, std_normal_quantile, std_normal_sf};
use crate::tables::{table, DivisorKind, TABLE_LEN};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuadratureConfig {
    pub abs_tol: f64,
    pub rel_tol: f64,
    /// Integration runs over `[-bound, bound]`.
    pub integration_bound: f64,
    pub max_intervals: usize,
}

impl Default for QuadratureConfig {
    fn default() -> Self {
        Self {
            abs_tol: 1e-9,
            rel_tol: 1e-12,
            integration_bound: 10.0,
            max_intervals: 1000,
        }
    }
}

impl QuadratureConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.abs_tol > 0.0 && self.rel_tol > 0.0) {
            return Err(Error::Domain(
                "quadrature tolerances must be positive".into(),
            ));
        }
        if !(self.integration_bound >= 8.0 && self.integration_bound.is_finite()) {
            return Err(Error::Domain(format!(
                "integration bound must be finite and >= 8, got {}",
                self.integration_bound
            )));
        }
        Ok(())
    }

    fn tolerance(&self) -> Tolerance {
        Tolerance {
            abs: self.abs_tol,
            rel: self.rel_tol,
            max_intervals: self.max_intervals,
            // quarter-unit panels: order statistics of a few hundred draws
            // concentrate in a band narrower than one panel of [-b, b]
            initial_segments: (8.0 * self.integration_bound).ceil() as usize,
        }
    }
}

/// Expected range of `n` i.i.d. standard normal observations.
pub fn expected_range(n: u32, cfg: &QuadratureConfig) -> Result<f64> {
    if n < 2 {
        return Err(Error::Domain(format!(
            "expected range needs n >= 2, got {n}"
        )));
    }
    cfg.validate()?;
    let nf = n as f64;
    let e = n as i32 - 1;
    let integrand = |z: f64| {
        nf * z * std_normal_pdf(z) * (std_normal_cdf(z).powi(e) - std_normal_sf(z).powi(e))
    };
    let b = cfg.integration_bound;
    Ok(integrate(integrand, -b, b, cfg.tolerance())?.value)
}

fn ln_factorial(n: u32) -> f64 {
    (2..=n).map(|k| (k as f64).ln()).sum()
}

/// E[X(k)] for the k-th smallest of `n` standard normal observations.
pub fn expected_order_statistic(k: u32, n: u32, cfg: &QuadratureConfig) -> Result<f64> {
    if !(1..=n).contains(&k) {
        return Err(Error::Domain(format!("order statistic {k} of {n}")));
    }
    cfg.validate()?;
    let ln_c = ln_factorial(n) - ln_factorial(k - 1) - ln_factorial(n - k);
    let (lo, hi) = ((k - 1) as i32, (n - k) as i32);
    let integrand = |z: f64| {
        let density = (ln_c
            + if lo > 0 {
                lo as f64 * std_normal_cdf(z).ln()
            } else {
                0.0
            }
            + if hi > 0 {
                hi as f64 * std_normal_sf(z).ln()
            } else {
                0.0
            })
        .exp();
        z * density * std_normal_pdf(z)
    };
    let b = cfg.integration_bound;
    Ok(integrate(integrand, -b, b, cfg.tolerance())?.value)
}

/// E[X(3q+1) − X(q+1)] for a sample of size 4q + 1, i.e. the expected
/// spread between the order statistics that are exactly the sample quartiles
/// when `n = 4q + 1`.
pub fn quartile_indexed_iqr(q: u32, cfg: &QuadratureConfig) -> Result<f64> {
    if q < 1 {
        return Err(Error::Domain("quartile index must be >= 1".into()));
    }
    let n = 4 * q + 1;
    Ok(expected_order_statistic(3 * q + 1, n, cfg)? - expected_order_statistic(q + 1, n, cfg)?)
}

/// Rule turning a sorted sample into sample quartiles.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum QuantileConvention {
    /// Linear interpolation between order statistics placed at
    /// `(k − 0.375)/(n + 0.25)`.
    Blom,
    /// Linear interpolation at position `h = (n − 1)p + 1`.
    Linear,
    /// The order statistic at `round(p (n + 1))`.
    NearestRank,
}

impl QuantileConvention {
    pub const ALL: [QuantileConvention; 3] = [
        QuantileConvention::Blom,
        QuantileConvention::Linear,
        QuantileConvention::NearestRank,
    ];

    fn index(self) -> usize {
        match self {
            QuantileConvention::Blom => 0,
            QuantileConvention::Linear => 1,
            QuantileConvention::NearestRank => 2,
        }
    }

    /// Sample quantile of an ascending slice.
    pub fn quantile(self, sorted: &[f64], p: f64) -> f64 {
        let n = sorted.len();
        debug_assert!(n > 0);
        let nf = n as f64;
        let h = match self {
            QuantileConvention::Blom => p * (nf + 0.25) + 0.375,
            QuantileConvention::Linear => (nf - 1.0) * p + 1.0,
            QuantileConvention::NearestRank => (p * (nf + 1.0)).round(),
        };
        let h = h.clamp(1.0, nf);
        let lo = h.floor();
        let frac = h - lo;
        let i = lo as usize - 1;
        if frac == 0.0 || i + 1 >= n {
            sorted[i]
        } else {
            sorted[i] + frac * (sorted[i + 1] - sorted[i])
        }
    }
}

impl fmt::Display for QuantileConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            QuantileConvention::Blom => "blom",
            QuantileConvention::Linear => "linear",
            QuantileConvention::NearestRank => "nearest-rank",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct McConfig {
    pub replications: u64,
    pub seed: u64,
    pub quantile_convention: QuantileConvention,
    /// Replications per independently seeded stream.
    pub chunk_size: u64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            replications: 1_000_000,
            seed: 7,
            quantile_convention: QuantileConvention::Linear,
            chunk_size: 10_000,
        }
    }
}

pub const MIN_REPLICATIONS: u64 = 10_000;

impl McConfig {
    pub fn validate(&self) -> Result<()> {
        if self.replications < MIN_REPLICATIONS {
            return Err(Error::Domain(format!(
                "at least {MIN_REPLICATIONS} replications required, got {}",
                self.replications
            )));
        }
        if self.chunk_size == 0 {
            return Err(Error::Domain("chunk size must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IqrEstimate {
    pub estimate: f64,
    pub std_error: f64,
}

/// One Monte Carlo estimate per [`QuantileConvention`], from shared samples.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConventionEstimates([IqrEstimate; 3]);

impl ConventionEstimates {
    pub fn get(&self, convention: QuantileConvention) -> IqrEstimate {
        self.0[convention.index()]
    }

    pub fn iter(&self) -> impl Iterator<Item = (QuantileConvention, IqrEstimate)> + '_ {
        QuantileConvention::ALL.iter().map(|&c| (c, self.get(c)))
    }
}

#[derive(Clone, Copy, Default)]
struct Moments {
    sum: [f64; 3],
    sum_sq: [f64; 3],
}

fn uniform_open(rng: &mut ChaCha8Rng) -> f64 {
    ((rng.next_u64() >> 11) as f64 + 0.5) * (1.0 / (1u64 << 53) as f64)
}

fn stream_rng(seed: u64, n: u32, chunk: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (n as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15));
    rng.set_stream(chunk);
    rng
}

fn run_chunk(n: u32, seed: u64, chunk: u64, reps: u64) -> Moments {
    let mut rng = stream_rng(seed, n, chunk);
    let mut sample = vec![0.0; n as usize];
    let mut m = Moments::default();
    for _ in 0..reps {
        for x in sample.iter_mut() {
            *x = std_normal_quantile(uniform_open(&mut rng)).expect("uniform is in (0, 1)");
        }
        sample.sort_unstable_by(f64::total_cmp);
        for c in QuantileConvention::ALL {
            let iqr = c.quantile(&sample, 0.75) - c.quantile(&sample, 0.25);
            let i = c.index();
            m.sum[i] += iqr;
            m.sum_sq[i] += iqr * iqr;
        }
    }
    m
}

/// Expected sample interquartile range of `n` standard normal draws under
/// every quantile convention. Chunk `c` draws from ChaCha stream `c`, and
/// chunk results are combined in chunk order, so the output depends only
/// on `(n, seed, replications, chunk_size)`.
pub fn expected_iqr_all(n: u32, cfg: &McConfig) -> Result<ConventionEstimates> {
    if n < 2 {
        return Err(Error::Domain(format!("expected IQR needs n >= 2, got {n}")));
    }
    cfg.validate()?;
    let chunks = cfg.replications.div_ceil(cfg.chunk_size);
    let parts: Vec<Moments> = (0..chunks)
        .into_par_iter()
        .map(|c| {
            let reps = cfg.chunk_size.min(cfg.replications - c * cfg.chunk_size);
            run_chunk(n, cfg.seed, c, reps)
        })
        .collect();
    let total = parts.iter().fold(Moments::default(), |mut acc, p| {
        for i in 0..3 {
            acc.sum[i] += p.sum[i];
            acc.sum_sq[i] += p.sum_sq[i];
        }
        acc
    });
    let r = cfg.replications as f64;
    let est = |i: usize| {
        let mean = total.sum[i] / r;
        let var = ((total.sum_sq[i] - r * mean * mean) / (r - 1.0)).max(0.0);
        IqrEstimate {
            estimate: mean,
            std_error: (var / r).sqrt(),
        }
    };
    Ok(ConventionEstimates([est(0), est(1), est(2)]))
}

/// Expected sample interquartile range under `cfg.quantile_convention`.
pub fn expected_iqr(n: u32, cfg: &McConfig) -> Result<IqrEstimate> {
    Ok(expected_iqr_all(n, cfg)?.get(cfg.quantile_convention))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableSelection {
    Xi,
    Eta,
    Both,
}

impl TableSelection {
    fn xi(self) -> bool {
        matches!(self, TableSelection::Xi | TableSelection::Both)
    }

    fn eta(self) -> bool {
        matches!(self, TableSelection::Eta | TableSelection::Both)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct RegeneratedRow {
    pub n: u32,
    pub xi: Option<f64>,
    pub eta: Option<ConventionEstimates>,
    /// Expected quartile spread at sample size `4n + 1`.
    pub eta_quartile_indexed: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Regeneration {
    pub rows: Vec<RegeneratedRow>,
}

impl Regeneration {
    /// Largest |regenerated ξ − table| over rows inside the table.
    pub fn xi_max_deviation(&self) -> Option<(u32, f64)> {
        let t = table(DivisorKind::Xi);
        self.rows
            .iter()
            .filter(|r| r.n as usize <= TABLE_LEN)
            .filter_map(|r| Some((r.n, (r.xi? - t.get(r.n).ok()?).abs())))
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Largest |Monte Carlo η − table| per convention.
    pub fn eta_max_deviation(&self, convention: QuantileConvention) -> Option<(u32, f64)> {
        let t = table(DivisorKind::Eta);
        self.rows
            .iter()
            .filter(|r| r.n as usize <= TABLE_LEN)
            .filter_map(|r| {
                let e = r.eta?.get(convention).estimate;
                Some((r.n, (e - t.get(r.n).ok()?).abs()))
            })
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Largest |quartile-indexed η − table|.
    pub fn eta_quartile_indexed_max_deviation(&self) -> Option<(u32, f64)> {
        let t = table(DivisorKind::Eta);
        self.rows
            .iter()
            .filter(|r| r.n as usize <= TABLE_LEN)
            .filter_map(|r| Some((r.n, (r.eta_quartile_indexed? - t.get(r.n).ok()?).abs())))
            .max_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// Convention with the smallest maximum deviation from the table.
    pub fn best_convention(&self) -> Option<(QuantileConvention, f64)> {
        QuantileConvention::ALL
            .iter()
            .filter_map(|&c| self.eta_max_deviation(c).map(|(_, d)| (c, d)))
            .min_by(|a, b| a.1.total_cmp(&b.1))
    }

    /// `n<TAB>xi<TAB>eta`, with η from the best-matching convention (or the
    /// `Linear` convention when no row lies inside the table).
    pub fn to_fixture_format(&self) -> String {
        let conv = self
            .best_convention()
            .map(|b| b.0)
            .unwrap_or(QuantileConvention::Linear);
        crate::tables::format_fixture_rows(
            self.rows
                .iter()
                .map(|r| (r.n, r.xi, r.eta.map(|e| e.get(conv).estimate))),
        )
    }

    /// Per-n deviations from the tables plus the summary lines.
    pub fn report(&self) -> String {
        let xi_t = table(DivisorKind::Xi);
        let eta_t = table(DivisorKind::Eta);
        let in_table =
            |n: u32| -> Option<(f64, f64)> { Some((xi_t.get(n).ok()?, eta_t.get(n).ok()?)) };
        let mut out = String::new();
        let _ = writeln!(
            out,
            "n\txi\txi_table\txi_dev\teta_blom\teta_linear\teta_nearest_rank\teta_se\teta_table\teta_quartile_indexed\tqi_dev"
        );
        let cell = |v: Option<f64>| v.map(|v| format!("{v:.6}")).unwrap_or_default();
        for r in &self.rows {
            let t = in_table(r.n);
            let xi_dev = r.xi.zip(t).map(|(x, t)| x - t.0);
            let e = |c| r.eta.map(|e| e.get(c).estimate);
            let se = r
                .eta
                .map(|e| e.iter().map(|(_, v)| v.std_error).fold(0.0, f64::max));
            let qi_dev = r.eta_quartile_indexed.zip(t).map(|(q, t)| q - t.1);
            let _ = writeln!(
                out,
                "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}",
                r.n,
                cell(r.xi),
                cell(t.filter(|_| r.xi.is_some()).map(|t| t.0)),
                cell(xi_dev),
                cell(e(QuantileConvention::Blom)),
                cell(e(QuantileConvention::Linear)),
                cell(e(QuantileConvention::NearestRank)),
                cell(se),
                cell(t.filter(|_| r.eta.is_some()).map(|t| t.1)),
                cell(r.eta_quartile_indexed),
                cell(qi_dev),
            );
        }
        if let Some((n, d)) = self.xi_max_deviation() {
            let _ = writeln!(out, "# xi max |deviation| {d:.6} at n = {n}");
        }
        for c in QuantileConvention::ALL {
            if let Some((n, d)) = self.eta_max_deviation(c) {
                let _ = writeln!(out, "# eta[{c}] max |deviation| {d:.6} at n = {n}");
            }
        }
        if let Some((c, d)) = self.best_convention() {
            let _ = writeln!(out, "# best convention: {c} (max |deviation| {d:.6})");
        }
        if let Some((n, d)) = self.eta_quartile_indexed_max_deviation() {
            let _ = writeln!(
                out,
                "# eta read as quartile index (sample size 4n+1): max |deviation| {d:.6} at n = {n}"
            );
        }
        out
    }
}

/// Recomputes ξ by quadrature and η by Monte Carlo over `range`, clipped
/// below at n = 2.
pub fn regenerate_tables(
    cfg_q: &QuadratureConfig,
    cfg_mc: &McConfig,
    range: RangeInclusive<u32>,
    which: TableSelection,
) -> Result<Regeneration> {
    cfg_q.validate()?;
    if which.eta() {
        cfg_mc.validate()?;
    }
    let lo = (*range.start()).max(2);
    let hi = *range.end();
    if lo > hi {
        return Err(Error::Domain(format!("empty range {lo}..={hi}")));
    }
    let rows = (lo..=hi)
        .map(|n| {
            let xi = which.xi().then(|| expected_range(n, cfg_q)).transpose()?;
            let eta = which
                .eta()
                .then(|| expected_iqr_all(n, cfg_mc))
                .transpose()?;
            let eta_quartile_indexed = which
                .eta()
                .then(|| quartile_indexed_iqr(n, cfg_q))
                .transpose()?;
            Ok(RegeneratedRow {
                n,
                xi,
                eta,
                eta_quartile_indexed,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Regeneration { rows })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn small_mc(seed: u64) -> McConfig {
        McConfig {
            replications: MIN_REPLICATIONS,
            seed,
            quantile_convention: QuantileConvention::Linear,
            chunk_size: 1_000,
        }
    }

    #[test]
    fn range_of_two_is_analytic() {
        let v = expected_range(2, &QuadratureConfig::default()).unwrap();
        assert!((v - 2.0 / PI.sqrt()).abs() < 1e-9);
    }

    #[test]
    fn quartile_indexed_spread_matches_eta_table() {
        // sample sizes up to 201, where the order-statistic densities are narrow
        let cfg = QuadratureConfig::default();
        for q in [1, 2, 10, 20, 35, 50] {
            let v = quartile_indexed_iqr(q, &cfg).unwrap();
            let t = table(DivisorKind::Eta).get(q).unwrap();
            assert!((v - t).abs() < 6e-4, "q = {q}: {v} vs {t}");
        }
    }

    #[test]
    fn range_insensitive_to_bound() {
        let narrow = QuadratureConfig {
            integration_bound: 8.0,
            ..Default::default()
        };
        let wide = QuadratureConfig {
            integration_bound: 10.0,
            ..Default::default()
        };
        for n in [2, 10, 50] {
            let a = expected_range(n, &narrow).unwrap();
            let b = expected_range(n, &wide).unwrap();
            assert!((a - b).abs() <= 10.0 * 1e-9, "n = {n}");
        }
    }

    #[test]
    fn config_validation() {
        let bad = QuadratureConfig {
            integration_bound: 5.0,
            ..Default::default()
        };
        assert!(expected_range(5, &bad).is_err());
        assert!(expected_range(1, &QuadratureConfig::default()).is_err());
        let few = McConfig {
            replications: 100,
            ..Default::default()
        };
        assert!(expected_iqr(5, &few).is_err());
    }

    #[test]
    fn order_statistics_of_three() {
        // E[X(3)] for n = 3 is 3/(2√π)
        let cfg = QuadratureConfig::default();
        let top = expected_order_statistic(3, 3, &cfg).unwrap();
        assert!((top - 1.5 / PI.sqrt()).abs() < 1e-9);
        let mid = expected_order_statistic(2, 3, &cfg).unwrap();
        assert!(mid.abs() < 1e-12);
        // range = E[X(n)] − E[X(1)]
        let r = expected_order_statistic(10, 10, &cfg).unwrap()
            - expected_order_statistic(1, 10, &cfg).unwrap();
        assert!((r - expected_range(10, &cfg).unwrap()).abs() < 1e-8);
        assert!(expected_order_statistic(0, 3, &cfg).is_err());
    }

    #[test]
    fn quantile_conventions_on_small_sample() {
        let s = [1.0, 2.0, 3.0, 4.0, 5.0];
        // h = 4·0.25 + 1 = 2
        assert_eq!(QuantileConvention::Linear.quantile(&s, 0.25), 2.0);
        assert_eq!(QuantileConvention::Linear.quantile(&s, 0.75), 4.0);
        // round(1.5) = 2, round(4.5) = 5
        assert_eq!(QuantileConvention::NearestRank.quantile(&s, 0.25), 2.0);
        assert_eq!(QuantileConvention::NearestRank.quantile(&s, 0.75), 5.0);
        // h = 0.25·5.25 + 0.375 = 1.6875
        assert!((QuantileConvention::Blom.quantile(&s, 0.25) - 1.6875).abs() < 1e-15);
        let two = [0.0, 1.0];
        for c in QuantileConvention::ALL {
            let q1 = c.quantile(&two, 0.25);
            let q3 = c.quantile(&two, 0.75);
            assert!((0.0..=1.0).contains(&q1) && q1 <= q3);
        }
    }

    #[test]
    fn mc_is_deterministic_and_seed_sensitive() {
        let a = expected_iqr_all(7, &small_mc(11)).unwrap();
        let b = expected_iqr_all(7, &small_mc(11)).unwrap();
        let c = expected_iqr_all(7, &small_mc(12)).unwrap();
        assert_eq!(a, b);
        assert_ne!(a, c);
    }

    #[test]
    fn mc_independent_of_thread_count() {
        let cfg = small_mc(3);
        let one = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap()
            .install(|| expected_iqr_all(9, &cfg).unwrap());
        let four = rayon::ThreadPoolBuilder::new()
            .num_threads(4)
            .build()
            .unwrap()
            .install(|| expected_iqr_all(9, &cfg).unwrap());
        assert_eq!(one, four);
    }

    #[test]
    fn mc_agrees_with_exact_order_statistics() {
        // n = 9 with h = (n−1)p + 1 picks X(3) and X(7) exactly
        let cfg_q = QuadratureConfig::default();
        let exact = quartile_indexed_iqr(2, &cfg_q).unwrap();
        let est = expected_iqr(
            9,
            &McConfig {
                replications: 40_000,
                ..small_mc(5)
            },
        )
        .unwrap();
        assert!(
            (est.estimate - exact).abs() < 4.0 * est.std_error,
            "{est:?} vs {exact}"
        );
    }

    #[test]
    fn regeneration_rows_and_fixture_text() {
        let cfg_q = QuadratureConfig::default();
        let regen = regenerate_tables(&cfg_q, &small_mc(1), 1..=4, TableSelection::Xi).unwrap();
        assert_eq!(regen.rows.len(), 3);
        assert_eq!(regen.rows[0].n, 2);
        assert!(regen.rows.iter().all(|r| r.eta.is_none()));
        let text = regen.to_fixture_format();
        assert!(text.starts_with("2\t1.128379\t\n"), "{text}");
        assert!(regen.xi_max_deviation().unwrap().1 < 5e-4);
        assert!(regenerate_tables(
            &cfg_q,
            &small_mc(1),
            RangeInclusive::new(5, 4),
            TableSelection::Xi
        )
        .is_err());
    }
}
