//! Half-line Fourier integrals of the Gaussian test function.
//!
//! Every kernel entry needs integrals of the form `∫ f(x) e^{iqx} dx` over
//! `(-∞, 0]` or `[0, ∞)`. Because f is truncated, each one is a finite
//! integral over the support clipped at the origin, evaluated by globally
//! adaptive 21-point Gauss–Kronrod quadrature.

#![allow(clippy::excessive_precision)]

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::types::GaussianTest;

/// Which half-line an integral runs over.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub enum Side {
    /// `(-∞, 0]`
    Left,
    /// `[0, ∞)`
    Right,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfLineIntegralRequest {
    pub side: Side,
    pub q: f64,
    pub test: GaussianTest,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct QuadratureOptions {
    /// Target for the summed error estimate.
    pub abs_tol: f64,
    /// Refinement cap; exceeding it is an error, never a silent answer.
    pub max_intervals: usize,
}

impl Default for QuadratureOptions {
    fn default() -> Self {
        QuadratureOptions {
            abs_tol: 1e-12,
            max_intervals: 20_000,
        }
    }
}

/// An integral value with its error estimate.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct Estimate {
    pub value: Complex64,
    pub error: f64,
    pub intervals: usize,
}

/// f(x) for the truncated normalized Gaussian.
pub fn gaussian_eval(test: &GaussianTest, x: f64) -> f64 {
    test.eval(x)
}

/// `∫_side f(x) e^{iqx} dx` with the default tolerance.
pub fn halfline_fourier(req: &HalfLineIntegralRequest) -> Result<Complex64> {
    halfline_fourier_with(req, &QuadratureOptions::default())
}

pub fn halfline_fourier_with(
    req: &HalfLineIntegralRequest,
    opts: &QuadratureOptions,
) -> Result<Complex64> {
    if !req.q.is_finite() {
        return Err(Error::Domain(format!("oscillation frequency must be finite, got {}", req.q)));
    }
    let Some((lo, hi)) = clipped_support(&req.test, req.side) else {
        return Ok(Complex64::new(0.0, 0.0));
    };
    let test = req.test;
    let q = req.q;
    let integrand = move |x: f64| {
        let z = (x - test.x0()) / test.sigma();
        let weight = test.peak() * (-0.5 * z * z).exp();
        Complex64::from_polar(weight, q * x)
    };
    let panels = initial_panels(hi - lo, q, test.sigma());
    Ok(adaptive_gk21(integrand, lo, hi, panels, opts)?.value)
}

/// Support of f intersected with the half-line, or `None` if the overlap
/// has zero length.
fn clipped_support(test: &GaussianTest, side: Side) -> Option<(f64, f64)> {
    let (a, b) = test.support();
    let (lo, hi) = match side {
        Side::Left => (a, b.min(0.0)),
        Side::Right => (a.max(0.0), b),
    };
    (hi > lo).then_some((lo, hi))
}

/// About one panel per half oscillation, and at least one per 2σ.
fn initial_panels(width: f64, q: f64, sigma: f64) -> usize {
    let by_phase = (q.abs() * width / std::f64::consts::PI).ceil();
    let by_shape = (width / (2.0 * sigma)).ceil();
    by_phase.max(by_shape).max(1.0) as usize
}

// 21-point Kronrod extension of the 10-point Gauss rule (QUADPACK qk21).
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
const WGK: [f64; 11] = [
    0.011_694_638_867_371_874_278_064_396_062_192,
    0.032_558_162_307_964_727_478_818_972_459_390,
    0.054_755_896_574_351_996_031_381_300_244_580,
    0.075_039_674_810_919_952_767_043_140_916_190,
    0.093_125_454_583_697_605_535_065_465_083_366,
    0.109_387_158_802_297_641_899_210_590_325_805,
    0.123_491_976_262_065_851_077_600_525_478_532,
    0.134_709_217_311_473_325_928_054_001_771_707,
    0.142_775_938_577_060_080_797_094_273_138_717,
    0.147_739_104_901_338_491_374_841_515_972_068,
    0.149_445_554_002_916_905_664_936_468_389_821,
];
// Gauss weights for XGK[1], XGK[3], ..., XGK[9].
const WG: [f64; 5] = [
    0.066_671_344_308_688_137_593_568_809_893_332,
    0.149_451_349_150_580_593_145_776_339_657_697,
    0.219_086_362_515_982_043_995_534_934_228_163,
    0.269_266_719_309_996_355_091_226_921_569_469,
    0.295_524_224_714_752_870_173_892_994_651_338,
];

/// One GK21 panel: (Kronrod value, |Kronrod − Gauss|).
fn gk21<F: Fn(f64) -> Complex64>(f: &F, a: f64, b: f64) -> (Complex64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = fc * WGK[10];
    let mut gauss = Complex64::new(0.0, 0.0);
    for j in 0..10 {
        let dx = half * XGK[j];
        let pair = f(center - dx) + f(center + dx);
        kronrod += pair * WGK[j];
        if j % 2 == 1 {
            gauss += pair * WG[j / 2];
        }
    }
    let kronrod = kronrod * half;
    let gauss = gauss * half;
    (kronrod, (kronrod - gauss).norm())
}

#[derive(Clone, Copy, Debug)]
struct Panel {
    a: f64,
    b: f64,
    value: Complex64,
    error: f64,
}

impl PartialEq for Panel {
    fn eq(&self, other: &Self) -> bool {
        self.error.total_cmp(&other.error) == Ordering::Equal
    }
}
impl Eq for Panel {}
impl PartialOrd for Panel {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Panel {
    fn cmp(&self, other: &Self) -> Ordering {
        self.error.total_cmp(&other.error)
    }
}

/// Globally adaptive GK21 on `[a, b]`, starting from `panels` equal pieces and
/// bisecting the worst panel until the summed error estimate meets the target.
pub fn adaptive_gk21<F: Fn(f64) -> Complex64>(
    f: F,
    a: f64,
    b: f64,
    panels: usize,
    opts: &QuadratureOptions,
) -> Result<Estimate> {
    if !(a.is_finite() && b.is_finite()) || b < a {
        return Err(Error::Domain(format!("bad integration interval [{a}, {b}]")));
    }
    if a == b {
        return Ok(Estimate {
            value: Complex64::new(0.0, 0.0),
            error: 0.0,
            intervals: 0,
        });
    }
    let panels = panels.max(1);
    if panels > opts.max_intervals {
        return Err(Error::Quadrature {
            estimate: f64::INFINITY,
            target: opts.abs_tol,
            intervals: panels,
        });
    }
    let width = (b - a) / panels as f64;
    let mut heap = BinaryHeap::with_capacity(2 * panels);
    for p in 0..panels {
        let lo = a + p as f64 * width;
        let hi = if p + 1 == panels { b } else { lo + width };
        let (value, error) = gk21(&f, lo, hi);
        heap.push(Panel { a: lo, b: hi, value, error });
    }
    let min_width = (b - a) * 1e-14;
    loop {
        let total_err: f64 = heap.iter().map(|p| p.error).sum();
        if total_err <= opts.abs_tol {
            // Sum in a fixed order so the result does not depend on heap layout.
            let mut done = heap.into_vec();
            done.sort_by(|x, y| x.a.total_cmp(&y.a));
            let value = done.iter().map(|p| p.value).sum();
            return Ok(Estimate {
                value,
                error: total_err,
                intervals: done.len(),
            });
        }
        let worst = heap.pop().expect("heap is never empty");
        if heap.len() + 2 > opts.max_intervals || worst.b - worst.a < min_width {
            return Err(Error::Quadrature {
                estimate: total_err,
                target: opts.abs_tol,
                intervals: heap.len() + 1,
            });
        }
        let mid = 0.5 * (worst.a + worst.b);
        for (lo, hi) in [(worst.a, mid), (mid, worst.b)] {
            let (value, error) = gk21(&f, lo, hi);
            heap.push(Panel { a: lo, b: hi, value, error });
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn req(side: Side, q: f64, x0: f64) -> HalfLineIntegralRequest {
        HalfLineIntegralRequest {
            side,
            q,
            test: GaussianTest::new(x0, 0.1).unwrap(),
        }
    }

    /// Composite Simpson sum on the clipped support; deliberately crude.
    fn simpson_oracle(r: &HalfLineIntegralRequest, steps: usize) -> Complex64 {
        let (a, b) = r.test.support();
        let (lo, hi) = match r.side {
            Side::Left => (a, b.min(0.0)),
            Side::Right => (a.max(0.0), b),
        };
        if hi <= lo {
            return Complex64::new(0.0, 0.0);
        }
        let h = (hi - lo) / steps as f64;
        let g = |x: f64| Complex64::from_polar(r.test.eval(x), r.q * x);
        let mut s = g(lo) + g(hi);
        for i in 1..steps {
            let w = if i % 2 == 1 { 4.0 } else { 2.0 };
            s += g(lo + i as f64 * h) * w;
        }
        s * (h / 3.0)
    }

    #[test]
    fn normalization_and_symmetry() {
        let v = halfline_fourier(&req(Side::Left, 0.0, -2.0)).unwrap();
        assert!((v - Complex64::new(1.0, 0.0)).norm() < 1e-12);
        let v = halfline_fourier(&req(Side::Left, 0.0, 0.0)).unwrap();
        assert!((v - Complex64::new(0.5, 0.0)).norm() < 1e-12);
        let v = halfline_fourier(&req(Side::Right, 3.0, -2.0)).unwrap();
        assert_eq!(v, Complex64::new(0.0, 0.0));
    }

    #[test]
    fn shifted_gaussian_transform() {
        // Brute-force first, then the closed form it must agree with.
        let r = req(Side::Left, 10.0, -2.0);
        let brute = simpson_oracle(&r, 200_000);
        let closed = Complex64::from_polar((-0.5f64).exp(), -20.0);
        assert!((brute - closed).norm() < 1e-11);
        let v = halfline_fourier(&r).unwrap();
        assert!((v - closed).norm() < 1e-11, "{v} vs {closed}");
        assert!((v.re - 0.606_530_659_712_633_4 * 20f64.cos()).abs() < 1e-11);
    }

    #[test]
    fn straddling_support_matches_brute_force() {
        for &(x0, q) in &[(0.0, 0.0), (0.3, 7.5), (-0.45, -31.0), (0.1, 220.0), (-0.7, 399.9)] {
            for side in [Side::Left, Side::Right] {
                let r = req(side, q, x0);
                let brute = simpson_oracle(&r, 400_000);
                let v = halfline_fourier(&r).unwrap();
                assert!((v - brute).norm() < 1e-11, "{side:?} q={q} x0={x0}: {v} vs {brute}");
            }
        }
    }

    #[test]
    fn refinement_cap_fails_loudly() {
        let r = req(Side::Left, 150.0, 0.0);
        let opts = QuadratureOptions {
            abs_tol: 1e-30,
            max_intervals: 8,
        };
        match halfline_fourier_with(&r, &opts) {
            Err(Error::Quadrature { estimate, target, .. }) => {
                assert!(estimate > target);
            }
            other => panic!("expected quadrature failure, got {other:?}"),
        }
    }

    #[test]
    fn non_finite_frequency() {
        assert!(halfline_fourier(&req(Side::Left, f64::NAN, 0.0)).is_err());
    }

    #[test]
    fn gaussian_eval_matches_peak() {
        let t = GaussianTest::new(0.0, 0.1).unwrap();
        assert!((gaussian_eval(&t, 0.0) - 3.989423).abs() < 1e-6);
        assert_eq!(gaussian_eval(&t, 1.0), 0.0);
    }
}
