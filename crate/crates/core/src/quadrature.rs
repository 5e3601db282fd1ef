//! Globally adaptive Gauss–Kronrod (7/15 point) integration over a finite
//! interval, in the style of QUADPACK's QAG.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use crate::error::{Error, Result};

/// Kronrod abscissae on [0, 1]; the odd-indexed entries are the 7-point
/// Gauss nodes.
#[allow(clippy::excessive_precision)]
const XGK: [f64; 8] = [
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 8] = [
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
];

/// Gauss weights for XGK[1], XGK[3], XGK[5], XGK[7].
#[allow(clippy::excessive_precision)]
const WG: [f64; 4] = [
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
];

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tolerance {
    pub abs: f64,
    pub rel: f64,
    pub max_intervals: usize,
    /// Equal panels the interval is cut into before adapting. A single
    /// 15-point rule can step over a narrow peak entirely and report a
    /// converged zero.
    pub initial_segments: usize,
}

impl Default for Tolerance {
    fn default() -> Self {
        Self {
            abs: 1e-9,
            rel: 1e-12,
            max_intervals: 500,
            initial_segments: 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    pub error_estimate: f64,
    pub intervals: usize,
}

#[derive(Debug, Clone, Copy)]
struct Segment {
    a: f64,
    b: f64,
    value: f64,
    error: f64,
}

impl PartialEq for Segment {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}

impl Eq for Segment {}

impl PartialOrd for Segment {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Segment {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// One 15-point Kronrod rule on [a, b] with the embedded 7-point Gauss
/// rule as error estimate. Returns (kronrod, |kronrod - gauss|).
pub fn gauss_kronrod_15<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[7];
    let mut gauss = fc * WG[3];
    for (j, (&x, &w)) in XGK.iter().zip(WGK.iter()).take(7).enumerate() {
        let dx = half * x;
        let pair = f(center - dx) + f(center + dx);
        kronrod += w * pair;
        if j % 2 == 1 {
            gauss += WG[j / 2] * pair;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

/// Integrates `f` over `[a, b]`, bisecting the interval with the largest
/// error estimate until the total error is within
/// `max(tol.abs, tol.rel * |value|)`.
pub fn integrate<F: Fn(f64) -> f64>(f: F, a: f64, b: f64, tol: Tolerance) -> Result<Integral> {
    if !(a.is_finite() && b.is_finite()) {
        return Err(Error::Domain(format!(
            "integration bounds [{a}, {b}] not finite"
        )));
    }
    if !(tol.abs > 0.0 && tol.rel > 0.0) {
        return Err(Error::Domain("tolerances must be positive".into()));
    }
    if tol.initial_segments == 0 || tol.initial_segments > tol.max_intervals {
        return Err(Error::Domain(format!(
            "initial segments must lie in 1..={}, got {}",
            tol.max_intervals, tol.initial_segments
        )));
    }
    let k = tol.initial_segments;
    let width = (b - a) / k as f64;
    let mut heap = BinaryHeap::with_capacity(tol.max_intervals + 1);
    let mut total = 0.0;
    let mut total_err = 0.0;
    for i in 0..k {
        let lo = a + i as f64 * width;
        let hi = if i + 1 == k { b } else { lo + width };
        let (value, error) = gauss_kronrod_15(&f, lo, hi);
        total += value;
        total_err += error;
        heap.push(Segment {
            a: lo,
            b: hi,
            value,
            error,
        });
    }

    loop {
        let target = tol.abs.max(tol.rel * total.abs());
        if total_err <= target {
            break;
        }
        if heap.len() >= tol.max_intervals {
            return Err(Error::Quadrature {
                estimate: total,
                error_estimate: total_err,
                intervals: heap.len(),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        let mid = 0.5 * (worst.a + worst.b);
        let (lv, le) = gauss_kronrod_15(&f, worst.a, mid);
        let (rv, re) = gauss_kronrod_15(&f, mid, worst.b);
        total += lv + rv - worst.value;
        total_err += le + re - worst.error;
        heap.push(Segment {
            a: worst.a,
            b: mid,
            value: lv,
            error: le,
        });
        heap.push(Segment {
            a: mid,
            b: worst.b,
            value: rv,
            error: re,
        });
    }

    // re-sum from the segments to shed accumulated update round-off
    let mut segments = heap.into_vec();
    segments.sort_by(|x, y| x.a.total_cmp(&y.a));
    let value = segments.iter().map(|s| s.value).sum();
    let error_estimate = segments.iter().map(|s| s.error).sum();
    Ok(Integral {
        value,
        error_estimate,
        intervals: segments.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_sum_to_interval_length() {
        let k: f64 = 2.0 * WGK[..7].iter().sum::<f64>() + WGK[7];
        let g: f64 = 2.0 * WG[..3].iter().sum::<f64>() + WG[3];
        assert!((k - 2.0).abs() < 1e-15);
        assert!((g - 2.0).abs() < 1e-15);
    }

    #[test]
    fn kronrod_exact_for_degree_22() {
        // ∫_{-1}^{1} x^22 dx = 2/23, ∫ x^13 = 0 for the gauss part
        let (v, _) = gauss_kronrod_15(&|x: f64| x.powi(22), -1.0, 1.0);
        assert!((v - 2.0 / 23.0).abs() < 1e-15);
        let (v, err) = gauss_kronrod_15(&|x: f64| x.powi(12) + x.powi(13), -1.0, 1.0);
        assert!((v - 2.0 / 13.0).abs() < 1e-15);
        assert!(err < 1e-14);
    }

    #[test]
    fn adaptive_gaussian_integral() {
        let r = integrate(|x| (-x * x).exp(), -10.0, 10.0, Tolerance::default()).unwrap();
        assert!((r.value - std::f64::consts::PI.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn initial_panels_find_a_narrow_bump() {
        // width 0.02 bump at 3.3: no node of a single panel on [-10, 10] lands on it
        let f = |x: f64| (-((x - 3.3) / 0.02).powi(2)).exp();
        let exact = 0.02 * std::f64::consts::PI.sqrt();
        let single = integrate(f, -10.0, 10.0, Tolerance::default()).unwrap();
        assert!(single.value.abs() < 1e-12);
        let tol = Tolerance {
            initial_segments: 80,
            ..Tolerance::default()
        };
        let r = integrate(f, -10.0, 10.0, tol).unwrap();
        assert!((r.value - exact).abs() < 1e-10, "{}", r.value);
    }

    #[test]
    fn adaptive_handles_peaked_integrand() {
        // ∫_0^1 1/(1e-4 + x^2) dx = atan(100) * 100
        let exact = 100.0 * 100f64.atan();
        let r = integrate(|x| 1.0 / (1e-4 + x * x), 0.0, 1.0, Tolerance::default()).unwrap();
        assert!((r.value - exact).abs() < 1e-8, "{} vs {exact}", r.value);
        assert!(r.intervals > 1);
    }

    #[test]
    fn gives_up_with_diagnostics() {
        let tol = Tolerance {
            abs: 1e-15,
            rel: 1e-15,
            max_intervals: 4,
            initial_segments: 1,
        };
        let err = integrate(|x: f64| x.abs().sqrt(), -1.0, 1.0, tol).unwrap_err();
        assert!(matches!(err, Error::Quadrature { intervals: 4, .. }));
    }

    #[test]
    fn rejects_infinite_bounds() {
        assert!(integrate(|x| x, 0.0, f64::INFINITY, Tolerance::default()).is_err());
        let zero = Tolerance {
            initial_segments: 0,
            ..Tolerance::default()
        };
        assert!(integrate(|x| x, 0.0, 1.0, zero).is_err());
    }
}
