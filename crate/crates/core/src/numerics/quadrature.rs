//! Globally adaptive Gauss-Kronrod (10/21) quadrature.
//!
//! Intervals from every panel share one priority queue ordered by error
//! estimate, so a tolerance applies to the whole integral rather than to
//! each panel separately.

use alloc::collections::BinaryHeap;
use core::cmp::Ordering;

// Unused whenever std is linked; needed for the float methods without it.
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

#[allow(clippy::excessive_precision)]
const XGK: [f64; 11] = [
    0.995_657_163_025_808_080_735_527_280_689_003,
    0.973_906_528_517_171_720_077_964_012_084_452,
    0.930_157_491_355_708_226_001_207_180_059_508,
    0.865_063_366_688_984_510_732_096_688_423_493,
    0.780_817_726_586_416_897_063_717_578_345_042,
    0.679_409_568_299_024_406_234_327_365_114_874,
    0.562_757_134_668_604_683_339_000_099_272_694,
    0.433_395_394_129_247_190_799_265_943_165_784,
    0.294_392_862_701_460_198_131_126_603_103_866,
    0.148_874_338_981_631_210_884_826_001_129_720,
    0.0,
];

#[allow(clippy::excessive_precision)]
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_958_109_831_074,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];

// Gauss weights for XGK[1], XGK[3], ..., XGK[9].
#[allow(clippy::excessive_precision)]
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// Result of an adaptive integration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Integral {
    pub value: f64,
    /// Absolute error estimate.
    pub error: f64,
    pub evaluations: usize,
}

/// Tolerances and limits for [`Quadrature::integrate`] and friends.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Quadrature {
    pub abs_tol: f64,
    pub rel_tol: f64,
    pub max_intervals: usize,
}

impl Default for Quadrature {
    fn default() -> Self {
        Self {
            abs_tol: 0.0,
            rel_tol: 1e-10,
            max_intervals: 4000,
        }
    }
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

fn gauss_kronrod<F: FnMut(f64) -> f64>(f: &mut F, a: f64, b: f64) -> Segment {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = 0.0;
    let mut abs_sum = kronrod.abs();
    let mut fv1 = [0.0; 10];
    let mut fv2 = [0.0; 10];
    for j in 0..10 {
        let x = half * XGK[j];
        let f1 = f(center - x);
        let f2 = f(center + x);
        fv1[j] = f1;
        fv2[j] = f2;
        kronrod += WGK[j] * (f1 + f2);
        abs_sum += WGK[j] * (f1.abs() + f2.abs());
        if j % 2 == 1 {
            gauss += WG[j / 2] * (f1 + f2);
        }
    }
    let mean = 0.5 * kronrod;
    let mut asc = WGK[10] * (fc - mean).abs();
    for j in 0..10 {
        asc += WGK[j] * ((fv1[j] - mean).abs() + (fv2[j] - mean).abs());
    }
    let value = kronrod * half;
    let res_abs = abs_sum * half.abs();
    let res_asc = asc * half.abs();
    let mut err = ((kronrod - gauss) * half).abs();
    if res_asc != 0.0 && err != 0.0 {
        err = res_asc * (200.0 * err / res_asc).powf(1.5).min(1.0);
    }
    if res_abs > f64::MIN_POSITIVE / (50.0 * f64::EPSILON) {
        err = err.max(50.0 * f64::EPSILON * res_abs);
    }
    Segment {
        a,
        b,
        value,
        error: err,
    }
}

impl Quadrature {
    pub fn with_rel_tol(rel_tol: f64) -> Self {
        Self {
            rel_tol,
            ..Self::default()
        }
    }

    fn tolerance(&self, value: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * value.abs())
    }

    /// Integrate `f` over `[a, b]`.
    pub fn integrate<F: FnMut(f64) -> f64>(&self, f: F, a: f64, b: f64) -> Result<Integral> {
        self.integrate_panels(f, &[a, b])
    }

    /// Integrate over consecutive panels `[p0, p1], [p1, p2], ...`.
    ///
    /// `points` must be strictly increasing and finite.
    pub fn integrate_panels<F: FnMut(f64) -> f64>(
        &self,
        mut f: F,
        points: &[f64],
    ) -> Result<Integral> {
        if points.len() < 2 {
            return Err(Error::InvalidArgument(
                "need at least two panel endpoints".into(),
            ));
        }
        if points.iter().any(|p| !p.is_finite()) {
            return Err(Error::NonFinite("panel endpoint"));
        }
        if points.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::GridNotIncreasing);
        }
        let mut heap = BinaryHeap::with_capacity(2 * self.max_intervals);
        let mut value = 0.0;
        let mut error = 0.0;
        let mut evaluations = 0;
        for w in points.windows(2) {
            let s = gauss_kronrod(&mut f, w[0], w[1]);
            evaluations += 21;
            value += s.value;
            error += s.error;
            heap.push(s);
        }
        // Segments too narrow to bisect any further.
        let mut frozen: alloc::vec::Vec<Segment> = alloc::vec::Vec::new();
        let mut frozen_error = 0.0;
        let mut count = heap.len();
        let mut budget_exhausted = false;
        while error > self.tolerance(value) {
            let Some(worst) = heap.pop() else { break };
            let mid = 0.5 * (worst.a + worst.b);
            let width = worst.b - worst.a;
            if width <= 100.0 * f64::EPSILON * mid.abs().max(f64::MIN_POSITIVE) {
                frozen_error += worst.error;
                frozen.push(worst);
                continue;
            }
            if count >= self.max_intervals {
                heap.push(worst);
                budget_exhausted = true;
                break;
            }
            let left = gauss_kronrod(&mut f, worst.a, mid);
            let right = gauss_kronrod(&mut f, mid, worst.b);
            evaluations += 42;
            count += 1;
            value += left.value + right.value - worst.value;
            heap.push(left);
            heap.push(right);
            // Resum to keep accumulated rounding out of the stopping test.
            error = frozen_error + heap.iter().map(|s| s.error).sum::<f64>();
        }
        value = heap
            .iter()
            .chain(frozen.iter())
            .map(|s| s.value)
            .sum::<f64>();
        if !value.is_finite() {
            return Err(Error::NonFinite("integrand"));
        }
        // Segments frozen at rounding level are reported in `error` but do not fail.
        if budget_exhausted && error > self.tolerance(value) {
            return Err(Error::QuadratureFailure {
                estimate: value,
                error,
                requested: self.tolerance(value),
            });
        }
        Ok(Integral {
            value,
            error,
            evaluations,
        })
    }

    /// Integrate `f` over `[a, inf)`, with optional interior breakpoints.
    ///
    /// Uses `omega = a + scale (1 - u) / u`, `u in (0, 1]`, so power-law tails
    /// decaying faster than `1/omega` are integrable in `u`.
    pub fn integrate_to_infinity<F: FnMut(f64) -> f64>(
        &self,
        mut f: F,
        a: f64,
        scale: f64,
        breakpoints: &[f64],
    ) -> Result<Integral> {
        if !(scale.is_finite() && scale > 0.0) {
            return Err(Error::InvalidArgument(
                "semi-infinite map needs a positive scale".into(),
            ));
        }
        let to_u = |w: f64| scale / (w - a + scale);
        let mut us: alloc::vec::Vec<f64> = breakpoints
            .iter()
            .filter(|&&w| w > a && w.is_finite())
            .map(|&w| to_u(w))
            .collect();
        us.push(0.0);
        us.push(1.0);
        us.sort_by(f64::total_cmp);
        us.dedup_by(|x, y| (*x - *y).abs() <= 1e-15);
        self.integrate_panels(
            |u: f64| {
                if u <= 0.0 {
                    return 0.0;
                }
                let w = a + scale * (1.0 - u) / u;
                let v = f(w) * scale / (u * u);
                if v.is_finite() {
                    v
                } else {
                    0.0
                }
            },
            &us,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use core::f64::consts::PI;

    #[test]
    fn polynomial_is_exact() {
        let q = Quadrature::default();
        let r = q.integrate(|x| x.powi(7) - 3.0 * x * x, -1.0, 2.0).unwrap();
        let exact = (2f64.powi(8) - 1.0) / 8.0 - (8.0 + 1.0);
        assert!((r.value - exact).abs() < 1e-13);
    }

    #[test]
    fn narrow_lorentzian_with_breakpoints() {
        let g = 1e-7;
        let q = Quadrature::with_rel_tol(1e-12);
        let f = |x: f64| (g / PI) / (x * x + g * g);
        let r = q
            .integrate_panels(f, &[-1.0, -10.0 * g, 10.0 * g, 2.0])
            .unwrap();
        let exact = ((2.0f64) / g).atan() / PI + (1.0 / g).atan() / PI;
        assert!((r.value - exact).abs() < 1e-11, "{} vs {}", r.value, exact);
    }

    #[test]
    fn semi_infinite_power_law() {
        let q = Quadrature::with_rel_tol(1e-12);
        let r = q
            .integrate_to_infinity(|x| 1.0 / (1.0 + x * x), 0.0, 1.0, &[])
            .unwrap();
        assert!((r.value - PI / 2.0).abs() < 1e-12);
        let r = q
            .integrate_to_infinity(|x| (-x).exp(), 0.0, 1.0, &[5.0, 20.0])
            .unwrap();
        assert!((r.value - 1.0).abs() < 1e-12);
    }

    #[test]
    fn endpoint_log_singularity() {
        let q = Quadrature::with_rel_tol(1e-10);
        let r = q.integrate(|x| x.ln(), 0.0, 1.0).unwrap();
        assert!((r.value + 1.0).abs() < 1e-9);
    }

    #[test]
    fn reports_failure_when_budget_exhausted() {
        let q = Quadrature {
            abs_tol: 0.0,
            rel_tol: 1e-14,
            max_intervals: 3,
        };
        let err = q
            .integrate(|x| (50.0 * x).sin().abs(), 0.0, 10.0)
            .unwrap_err();
        assert!(matches!(err, Error::QuadratureFailure { .. }));
    }

    #[test]
    fn rejects_bad_panels() {
        let q = Quadrature::default();
        assert_eq!(
            q.integrate(|x| x, 1.0, 0.0).unwrap_err(),
            Error::GridNotIncreasing
        );
    }
}
