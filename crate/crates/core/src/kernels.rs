//! Momentum-space kernels `K(k', k) = L(k', k) / 2π` of the asymptotic
//! current operator.
//!
//! Each kernel is a short combination of half-line Fourier integrals of the
//! test function with closed-form scattering coefficients. The combination
//! lives in [`combine`], which takes the integrals as input so that pointwise
//! evaluation and table-driven matrix assembly share one formula.

use std::f64::consts::PI;

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::{halfline_fourier, HalfLineIntegralRequest, Side};
use crate::types::{DefectKind, DefectSpec, GaussianTest};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct KernelPointRequest {
    pub k_prime: f64,
    pub k: f64,
    pub defect: DefectSpec,
    pub test: GaussianTest,
}

/// The half-line integrals one kernel entry needs, `I_L(q) = ∫_{-∞}^0 f e^{iqx}`
/// and `I_R(q) = ∫_0^∞ f e^{iqx}`, at the frequencies built from `(k', k)`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct HalfLineIntegrals {
    /// `I_L(k - k')`
    pub left_diff: Complex64,
    /// `I_R(k - k')`
    pub right_diff: Complex64,
    /// `I_L(-(k - k'))`
    pub left_neg_diff: Complex64,
    /// `I_L(k + k')`
    pub left_sum: Complex64,
    /// `I_L(-(k + k'))`
    pub left_neg_sum: Complex64,
}

impl HalfLineIntegrals {
    /// Evaluates the integrals `defect` needs by direct quadrature. Those the
    /// kernel does not use are left at zero.
    pub fn compute(defect: DefectKind, k_prime: f64, k: f64, test: &GaussianTest) -> Result<Self> {
        let eval = |side, q| halfline_fourier(&HalfLineIntegralRequest { side, q, test: *test });
        let zero = Complex64::new(0.0, 0.0);
        let diff = k - k_prime;
        let sum = k + k_prime;
        let mut out = HalfLineIntegrals {
            left_diff: eval(Side::Left, diff)?,
            right_diff: eval(Side::Right, diff)?,
            left_neg_diff: zero,
            left_sum: zero,
            left_neg_sum: zero,
        };
        if defect == DefectKind::Delta {
            out.left_neg_diff = eval(Side::Left, -diff)?;
            out.left_sum = eval(Side::Left, sum)?;
            out.left_neg_sum = eval(Side::Left, -sum)?;
        }
        Ok(out)
    }
}

fn check_pair(k_prime: f64, k: f64) -> Result<()> {
    if k_prime > 0.0 && k > 0.0 && k_prime.is_finite() && k.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!(
            "kernel momenta must be positive, got k'={k_prime}, k={k}"
        )))
    }
}

/// Evaluates `K(k', k)` from precomputed integrals and `f(0)`.
pub fn combine(
    defect: &DefectSpec,
    k_prime: f64,
    k: f64,
    ints: &HalfLineIntegrals,
    f_at_origin: f64,
) -> Complex64 {
    let two_l = match (defect.kind(), defect.strength()) {
        (DefectKind::Delta, Some(lambda)) => delta_two_l(k_prime, k, lambda, ints),
        (DefectKind::Jump, Some(alpha)) => jump_two_l(k_prime, k, alpha, ints),
        _ => (k + k_prime) * (ints.left_diff + ints.right_diff),
    };
    let mut value = two_l / (4.0 * PI);
    if let (DefectKind::Jump, Some(alpha), true) =
        (defect.kind(), defect.strength(), defect.conserved())
    {
        value += fixing_term_value(k_prime, k, alpha, f_at_origin);
    }
    value
}

fn delta_two_l(kp: f64, k: f64, lambda: f64, ints: &HalfLineIntegrals) -> Complex64 {
    let sum = k + kp;
    let out_den = I * k - lambda; // ik - λ
    let in_den = I * kp + lambda; // ik' + λ
    let both = in_den * out_den;
    sum * ints.left_diff + lambda * (kp - k) / out_den * ints.left_neg_sum
        - lambda * (k - kp) / in_den * ints.left_sum
        + lambda * lambda * sum / both * ints.left_neg_diff
        - k * kp * sum / both * ints.right_diff
}

/// `T*(k') T(k)` for the jump defect.
pub fn jump_transmission_product(kp: f64, k: f64, alpha: f64) -> Complex64 {
    let num = Complex64::new(k * kp + alpha * alpha, alpha * (kp - k));
    num / (Complex64::new(kp, alpha) * Complex64::new(k, -alpha))
}

fn jump_two_l(kp: f64, k: f64, alpha: f64, ints: &HalfLineIntegrals) -> Complex64 {
    let sum = k + kp;
    sum * ints.left_diff + jump_transmission_product(kp, k, alpha) * sum * ints.right_diff
}

fn fixing_term_value(kp: f64, k: f64, alpha: f64, f0: f64) -> Complex64 {
    if f0 == 0.0 {
        return Complex64::new(0.0, 0.0);
    }
    let den = Complex64::new(k, -alpha) * Complex64::new(kp, alpha);
    -(alpha * (k + kp) * f0) / den / (2.0 * PI)
}

/// Free kernel `(k + k')/(4π) [I_L(k - k') + I_R(k - k')]`.
pub fn kernel_free(k_prime: f64, k: f64, test: &GaussianTest) -> Result<Complex64> {
    check_pair(k_prime, k)?;
    let ints = HalfLineIntegrals::compute(DefectKind::Free, k_prime, k, test)?;
    Ok(combine(&DefectSpec::free(), k_prime, k, &ints, test.at_origin()))
}

/// δ-defect kernel, five half-line terms.
pub fn kernel_delta(k_prime: f64, k: f64, lambda: f64, test: &GaussianTest) -> Result<Complex64> {
    check_pair(k_prime, k)?;
    let defect = DefectSpec::delta(lambda)?;
    let ints = HalfLineIntegrals::compute(DefectKind::Delta, k_prime, k, test)?;
    Ok(combine(&defect, k_prime, k, &ints, test.at_origin()))
}

/// Jump-defect kernel without the conserved-current term.
pub fn kernel_jump(k_prime: f64, k: f64, alpha: f64, test: &GaussianTest) -> Result<Complex64> {
    check_pair(k_prime, k)?;
    let defect = DefectSpec::jump(alpha, false)?;
    let ints = HalfLineIntegrals::compute(DefectKind::Jump, k_prime, k, test)?;
    Ok(combine(&defect, k_prime, k, &ints, test.at_origin()))
}

/// Term added to the jump kernel for the conserved probability current:
/// `-(1/2π) α (k + k') f(0) / ((k - iα)(k' + iα))`.
pub fn fixing_term(k_prime: f64, k: f64, alpha: f64, test: &GaussianTest) -> Result<Complex64> {
    check_pair(k_prime, k)?;
    if alpha == 0.0 || !alpha.is_finite() {
        return Err(Error::Config(format!("fixing term needs finite nonzero α, got {alpha}")));
    }
    Ok(fixing_term_value(k_prime, k, alpha, test.at_origin()))
}

/// The defect-supported term `2α(k + k') f(0) / ((k' + iα)(k - iα))` that the
/// `uv` and `vu` pieces would add to `2L` if the jump state were given the
/// value θ(0) = 1/2 at the origin. It is not part of any kernel.
pub fn extra_defect_term(k_prime: f64, k: f64, alpha: f64, test: &GaussianTest) -> Result<Complex64> {
    check_pair(k_prime, k)?;
    let den = Complex64::new(k_prime, alpha) * Complex64::new(k, -alpha);
    Ok(2.0 * alpha * (k + k_prime) * test.at_origin() / den)
}

/// The `uv` + `vu` contributions to the δ kernel's `2L`, both proportional to
/// f(0). They cancel for a continuous state; returned separately so that the
/// cancellation can be checked.
pub fn delta_defect_terms(k_prime: f64, k: f64, lambda: f64, test: &GaussianTest) -> Result<(Complex64, Complex64)> {
    check_pair(k_prime, k)?;
    let t_conj_kp = I * k_prime / (I * k_prime + lambda);
    let t_k = I * k / (I * k - lambda);
    let uv = t_conj_kp * t_k * test.at_origin();
    let vu = -t_conj_kp * t_k * test.at_origin();
    Ok((uv, vu))
}

/// Dispatch over the defect: free, δ, jump, or jump plus fixing term.
pub fn kernel(req: &KernelPointRequest) -> Result<Complex64> {
    check_pair(req.k_prime, req.k)?;
    let ints = HalfLineIntegrals::compute(req.defect.kind(), req.k_prime, req.k, &req.test)?;
    Ok(combine(&req.defect, req.k_prime, req.k, &ints, req.test.at_origin()))
}
