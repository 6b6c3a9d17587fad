//! Closed-form stationary scattering data for the point defects.
//!
//! The defect sits at the origin. The left branch `u_k` lives on `x < 0` and
//! the right branch `v_k` on `x > 0`; for an incoming right-mover of momentum
//! `k > 0`
//!
//! ```text
//! u_k(x) = e^{ikx} + R(k) e^{-ikx},    v_k(x) = T(k) e^{ikx}
//! ```
//!
//! with `T = ik/(ik - λ)`, `R = λ/(ik - λ)` for the δ defect and
//! `T = (k + iα)/(k - iα)`, `R = 0` for the jump defect.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::quadrature::Side;
use crate::types::{DefectKind, DefectSpec};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ScatteringCoefficients {
    pub t: Complex64,
    pub r: Complex64,
    pub k: f64,
}

fn check_momentum(k: f64) -> Result<()> {
    if k.is_finite() && k > 0.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("momentum must be positive, got {k}")))
    }
}

/// Transmission and reflection coefficients at momentum `k`.
pub fn coefficients(defect: &DefectSpec, k: f64) -> Result<ScatteringCoefficients> {
    check_momentum(k)?;
    let (t, r) = match (defect.kind(), defect.strength()) {
        (DefectKind::Delta, Some(lambda)) => {
            let den = I * k - lambda;
            (I * k / den, Complex64::new(lambda, 0.0) / den)
        }
        (DefectKind::Jump, Some(alpha)) => (
            Complex64::new(k, alpha) / Complex64::new(k, -alpha),
            Complex64::new(0.0, 0.0),
        ),
        _ => (Complex64::new(1.0, 0.0), Complex64::new(0.0, 0.0)),
    };
    Ok(ScatteringCoefficients { t, r, k })
}

/// Value and x-derivative of one branch formula at `x`.
///
/// The branch formulas are entire functions of x, so evaluating at `x = 0`
/// gives the one-sided limit at the defect from that side.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BranchValue {
    pub value: Complex64,
    pub dx: Complex64,
}

pub fn branch(coef: &ScatteringCoefficients, side: Side, x: f64) -> BranchValue {
    let k = coef.k;
    let forward = Complex64::from_polar(1.0, k * x);
    match side {
        Side::Left => {
            let back = forward.conj() * coef.r;
            BranchValue {
                value: forward + back,
                dx: I * k * (forward - back),
            }
        }
        Side::Right => {
            let v = forward * coef.t;
            BranchValue { value: v, dx: I * k * v }
        }
    }
}

/// φ_k(x): the left branch for `x < 0`, the right branch for `x > 0`.
///
/// At `x = 0` the δ state returns its continuous value; the jump state has no
/// value there and the call is a domain error.
pub fn scattering_state(defect: &DefectSpec, k: f64, x: f64) -> Result<Complex64> {
    let coef = coefficients(defect, k)?;
    if x == 0.0 && defect.kind() == DefectKind::Jump {
        return Err(Error::Domain(
            "value at defect undefined: the jump-defect state is discontinuous at x = 0"
                .to_string(),
        ));
    }
    let side = if x < 0.0 { Side::Left } else { Side::Right };
    Ok(branch(&coef, side, x).value)
}

/// ∂_x φ_k(x) away from the defect.
pub fn scattering_state_dx(defect: &DefectSpec, k: f64, x: f64) -> Result<Complex64> {
    let coef = coefficients(defect, k)?;
    if x == 0.0 && defect.kind() != DefectKind::Free {
        return Err(Error::Domain(
            "derivative at the defect is one-sided; use `branch`".to_string(),
        ));
    }
    let side = if x < 0.0 { Side::Left } else { Side::Right };
    Ok(branch(&coef, side, x).dx)
}

/// Max residual of the defect's sewing conditions on the stationary state.
///
/// Time derivatives act as `∂_t ↦ -iω` with `ω = k²/2`.
pub fn check_sewing(defect: &DefectSpec, k: f64) -> Result<f64> {
    let coef = coefficients(defect, k)?;
    let u = branch(&coef, Side::Left, 0.0);
    let v = branch(&coef, Side::Right, 0.0);
    let omega = 0.5 * k * k;
    let dt = |z: Complex64| -I * omega * z;
    Ok(sewing_residual(defect, u, v, dt(u.value - v.value)))
}

/// Residual of the sewing conditions given one-sided boundary data and
/// `(u - v)_t` at the defect.
pub(crate) fn sewing_residual(
    defect: &DefectSpec,
    u: BranchValue,
    v: BranchValue,
    jump_dt: Complex64,
) -> f64 {
    match (defect.kind(), defect.strength()) {
        (DefectKind::Delta, Some(lambda)) => {
            let continuity = (u.value - v.value).norm();
            let kink = (v.dx - u.dx - 2.0 * lambda * u.value).norm();
            continuity.max(kink)
        }
        (DefectKind::Jump, Some(alpha)) => {
            let first = (u.dx - v.dx - alpha * (u.value + v.value)).norm();
            let second = (v.dx + u.dx + 2.0 * I / alpha * jump_dt).norm();
            first.max(second)
        }
        _ => (u.value - v.value).norm().max((u.dx - v.dx).norm()),
    }
}

/// A square-integrable jump-defect state, stationary up to the phase
/// `e^{i α² t / 2}` and vanishing on the opposite half-line.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DefectBoundState {
    pub decay_rate: f64,
    /// Half-line carrying the nonzero component.
    pub side: Side,
    pub energy_phase_rate: f64,
}

/// One of the two jump-defect bound-state candidates at `k = ±iα`.
///
/// `v = e^{iα²t/2 - αx}` on the right (k = iα) and `u = e^{iα²t/2 + αx}` on the
/// left (k = -iα). Both satisfy the sewing conditions for either sign of α but
/// only decay when α > 0.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BoundStateCandidate {
    pub side: Side,
    /// Exponent `s` with the state ∝ `e^{s |x|}` away from the defect.
    pub exponent: f64,
    pub energy_phase_rate: f64,
}

impl BoundStateCandidate {
    pub fn square_integrable(&self) -> bool {
        self.exponent < 0.0
    }

    /// Boundary data at the defect, at `t`, with unit amplitude.
    pub fn edge(&self, t: f64) -> (BranchValue, BranchValue, Complex64) {
        let phase = Complex64::from_polar(1.0, self.energy_phase_rate * t);
        let zero = BranchValue {
            value: Complex64::new(0.0, 0.0),
            dx: Complex64::new(0.0, 0.0),
        };
        // d/dx of e^{s|x|} at 0±: +s on the right, -s on the left.
        let (u, v) = match self.side {
            Side::Right => (zero, BranchValue { value: phase, dx: phase * self.exponent }),
            Side::Left => (BranchValue { value: phase, dx: -phase * self.exponent }, zero),
        };
        // (u - v)_t = i (α²/2) (u - v)
        let jump_dt = I * self.energy_phase_rate * (u.value - v.value);
        (u, v, jump_dt)
    }
}

pub fn bound_state_candidates(defect: &DefectSpec) -> Result<Vec<BoundStateCandidate>> {
    let alpha = match (defect.kind(), defect.strength()) {
        (DefectKind::Jump, Some(a)) => a,
        _ => {
            return Err(Error::Unsupported(format!(
                "bound states are only enumerated for the jump defect, not {defect}"
            )))
        }
    };
    let rate = 0.5 * alpha * alpha;
    Ok(vec![
        BoundStateCandidate {
            side: Side::Right,
            exponent: -alpha,
            energy_phase_rate: rate,
        },
        BoundStateCandidate {
            side: Side::Left,
            exponent: -alpha,
            energy_phase_rate: rate,
        },
    ])
}

/// Square-integrable jump-defect bound states: the pair for α > 0, none for α < 0.
pub fn bound_states(defect: &DefectSpec) -> Result<Vec<DefectBoundState>> {
    Ok(bound_state_candidates(defect)?
        .into_iter()
        .filter(BoundStateCandidate::square_integrable)
        .map(|c| DefectBoundState {
            decay_rate: -c.exponent,
            side: c.side,
            energy_phase_rate: c.energy_phase_rate,
        })
        .collect())
}

/// The attractive δ bound state `√κ e^{-κ|x|}`, κ = -λ, energy -λ²/2.
///
/// Listed for completeness only; kernels are built from scattering states.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DeltaBoundState {
    pub kappa: f64,
    pub energy: f64,
}

pub fn delta_bound_state(defect: &DefectSpec) -> Option<DeltaBoundState> {
    match (defect.kind(), defect.strength()) {
        (DefectKind::Delta, Some(lambda)) if lambda < 0.0 => Some(DeltaBoundState {
            kappa: -lambda,
            energy: -0.5 * lambda * lambda,
        }),
        _ => None,
    }
}
