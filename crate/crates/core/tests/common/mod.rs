//! Brute-force kernel oracle built from first principles: the scattering
//! states written out directly, the Gaussian evaluated directly, and the
//! current sandwich integrated by Gauss–Legendre on each side of the defect.
#![allow(dead_code)]

use std::f64::consts::PI;

use backflow_core::{DefectKind, DefectSpec};
use gauss_quad::legendre::GaussLegendre;
use num_complex::Complex64;

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

pub fn gaussian(x0: f64, sigma: f64, x: f64) -> f64 {
    if (x - x0).abs() > 8.0 * sigma {
        return 0.0;
    }
    let z = (x - x0) / sigma;
    (-0.5 * z * z).exp() / (sigma * (2.0 * PI).sqrt())
}

/// `(φ_k(x), ∂_x φ_k(x))`, taking the left branch for `left` and the right one otherwise.
pub fn state(defect: &DefectSpec, k: f64, x: f64, left: bool) -> (Complex64, Complex64) {
    let (t, r) = match defect.kind() {
        DefectKind::Free => (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
        DefectKind::Delta => {
            let l = defect.strength().unwrap();
            (I * k / (I * k - l), Complex64::new(l, 0.0) / (I * k - l))
        }
        DefectKind::Jump => {
            let a = defect.strength().unwrap();
            (Complex64::new(k, a) / Complex64::new(k, -a), Complex64::new(0.0, 0.0))
        }
    };
    let e = Complex64::new(0.0, k * x).exp();
    if left {
        let back = r / e;
        (e + back, I * k * (e - back))
    } else {
        (t * e, I * k * t * e)
    }
}

/// `(i/4π) ∫ f (∂φ*_{k'} φ_k − φ*_{k'} ∂φ_k) dx`, plus the conserved-jump
/// defect term `(i/4π)(u*_{k'} v_k − v*_{k'} u_k)|₀ f(0)`.
pub fn kernel(defect: &DefectSpec, kp: f64, k: f64, x0: f64, sigma: f64) -> Complex64 {
    let (a, b) = (x0 - 8.0 * sigma, x0 + 8.0 * sigma);
    let degree = 400 + (10.0 * (k + kp) * (b - a)) as usize;
    let rule = GaussLegendre::new(degree.try_into().unwrap());
    let sandwich = |x: f64, left: bool| {
        let (p, dp) = state(defect, kp, x, left);
        let (q, dq) = state(defect, k, x, left);
        I / (4.0 * PI) * gaussian(x0, sigma, x) * (dp.conj() * q - p.conj() * dq)
    };
    let mut total = Complex64::new(0.0, 0.0);
    for (lo, hi, left) in [(a, b.min(0.0), true), (a.max(0.0), b, false)] {
        if hi > lo {
            total += Complex64::new(
                rule.integrate(lo, hi, |x| sandwich(x, left).re),
                rule.integrate(lo, hi, |x| sandwich(x, left).im),
            );
        }
    }
    if defect.kind() == DefectKind::Jump && defect.conserved() {
        let (u_p, _) = state(defect, kp, 0.0, true);
        let (v_p, _) = state(defect, kp, 0.0, false);
        let (u, _) = state(defect, k, 0.0, true);
        let (v, _) = state(defect, k, 0.0, false);
        total += I / (4.0 * PI) * (u_p.conj() * v - v_p.conj() * u) * gaussian(x0, sigma, 0.0);
    }
    total
}
