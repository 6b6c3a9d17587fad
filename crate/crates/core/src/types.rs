//! Domain values shared by every stage of the pipeline.
//!
//! Units are fixed to ℏ = m = 1 throughout; lengths are in the unit ℓ and
//! momenta in 1/ℓ. Nothing in the crate converts units.

use std::f64::consts::PI;
use std::fmt;

use num_complex::Complex64;
use serde::Serialize;

use crate::error::{Error, Result};

/// Which point interaction sits at the origin.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum DefectKind {
    Free,
    Delta,
    Jump,
}

impl DefectKind {
    pub fn as_str(self) -> &'static str {
        match self {
            DefectKind::Free => "free",
            DefectKind::Delta => "delta",
            DefectKind::Jump => "jump",
        }
    }
}

impl fmt::Display for DefectKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for DefectKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "free" => Ok(DefectKind::Free),
            "delta" => Ok(DefectKind::Delta),
            "jump" => Ok(DefectKind::Jump),
            other => Err(Error::Config(format!(
                "unknown defect kind `{other}` (expected free, delta or jump)"
            ))),
        }
    }
}

/// A validated defect configuration.
///
/// Zero strength is rejected for `Delta` and `Jump`; ask for [`DefectSpec::free`]
/// instead. The `conserved` flag only exists for the jump defect.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct DefectSpec {
    kind: DefectKind,
    strength: Option<f64>,
    conserved: bool,
}

impl DefectSpec {
    pub fn free() -> Self {
        DefectSpec {
            kind: DefectKind::Free,
            strength: None,
            conserved: false,
        }
    }

    /// δ interaction `V(x) = λ δ(x)`.
    pub fn delta(lambda: f64) -> Result<Self> {
        Self::new(DefectKind::Delta, Some(lambda), false)
    }

    /// Purely transmitting jump defect with parameter α.
    pub fn jump(alpha: f64, conserved: bool) -> Result<Self> {
        Self::new(DefectKind::Jump, Some(alpha), conserved)
    }

    pub fn new(kind: DefectKind, strength: Option<f64>, conserved: bool) -> Result<Self> {
        match kind {
            DefectKind::Free => {
                if strength.is_some_and(|s| s != 0.0) {
                    return Err(Error::Config(
                        "the free case takes no strength".to_string(),
                    ));
                }
                if conserved {
                    return Err(Error::Config(
                        "--conserved only applies to the jump defect".to_string(),
                    ));
                }
                Ok(Self::free())
            }
            DefectKind::Delta | DefectKind::Jump => {
                let s = strength.ok_or_else(|| {
                    Error::Config(format!("the {kind} defect requires a strength"))
                })?;
                if !s.is_finite() {
                    return Err(Error::Config(format!("strength must be finite, got {s}")));
                }
                if s == 0.0 {
                    return Err(Error::Config(format!(
                        "zero strength is not a {kind} defect; use --defect free for the \
                         interaction-free case"
                    )));
                }
                if conserved && kind != DefectKind::Jump {
                    return Err(Error::Config(
                        "--conserved only applies to the jump defect".to_string(),
                    ));
                }
                Ok(DefectSpec {
                    kind,
                    strength: Some(s),
                    conserved,
                })
            }
        }
    }

    pub fn kind(&self) -> DefectKind {
        self.kind
    }

    /// λ for `Delta`, α for `Jump`, `None` for `Free`.
    pub fn strength(&self) -> Option<f64> {
        self.strength
    }

    /// Strength with the free case reported as 0.
    pub fn strength_or_zero(&self) -> f64 {
        self.strength.unwrap_or(0.0)
    }

    pub fn conserved(&self) -> bool {
        self.conserved
    }
}

impl fmt::Display for DefectSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match (self.kind, self.strength) {
            (DefectKind::Free, _) | (_, None) => f.write_str("free"),
            (DefectKind::Delta, Some(s)) => write!(f, "delta(λ={s})"),
            (DefectKind::Jump, Some(s)) => {
                write!(f, "jump(α={s}{})", if self.conserved { ", conserved" } else { "" })
            }
        }
    }
}

/// Default half-width of the truncated support, in units of σ.
pub const DEFAULT_SUPPORT_FACTOR: f64 = 8.0;

/// Normalized Gaussian averaging function, truncated to `[x0 - cσ, x0 + cσ]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GaussianTest {
    x0: f64,
    sigma: f64,
    support_factor: f64,
}

impl GaussianTest {
    pub fn new(x0: f64, sigma: f64) -> Result<Self> {
        Self::with_support_factor(x0, sigma, DEFAULT_SUPPORT_FACTOR)
    }

    pub fn with_support_factor(x0: f64, sigma: f64, support_factor: f64) -> Result<Self> {
        if !x0.is_finite() {
            return Err(Error::Config(format!("x0 must be finite, got {x0}")));
        }
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::Config(format!("sigma must be positive, got {sigma}")));
        }
        if !(support_factor.is_finite() && support_factor > 0.0) {
            return Err(Error::Config(format!(
                "support factor must be positive, got {support_factor}"
            )));
        }
        Ok(GaussianTest {
            x0,
            sigma,
            support_factor,
        })
    }

    pub fn x0(&self) -> f64 {
        self.x0
    }

    pub fn sigma(&self) -> f64 {
        self.sigma
    }

    pub fn support_factor(&self) -> f64 {
        self.support_factor
    }

    /// Closed support interval `(lo, hi)`.
    pub fn support(&self) -> (f64, f64) {
        let half = self.support_factor * self.sigma;
        (self.x0 - half, self.x0 + half)
    }

    pub fn peak(&self) -> f64 {
        1.0 / (self.sigma * (2.0 * PI).sqrt())
    }

    /// f(x); zero outside the truncated support.
    pub fn eval(&self, x: f64) -> f64 {
        let (lo, hi) = self.support();
        if x < lo || x > hi {
            return 0.0;
        }
        let z = (x - self.x0) / self.sigma;
        self.peak() * (-0.5 * z * z).exp()
    }

    /// f(0), the weight the defect point receives.
    pub fn at_origin(&self) -> f64 {
        self.eval(0.0)
    }
}

/// Uniform midpoint discretization of `[0, p_cutoff]` into `n` momentum cells.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct GridSpec {
    n: usize,
    p_cutoff: f64,
}

impl GridSpec {
    pub fn new(n: usize, p_cutoff: f64) -> Result<Self> {
        if n < 2 {
            return Err(Error::Config(format!("grid needs at least two cells, got {n}")));
        }
        if !(p_cutoff.is_finite() && p_cutoff > 0.0) {
            return Err(Error::Config(format!(
                "momentum cutoff must be positive, got {p_cutoff}"
            )));
        }
        Ok(GridSpec { n, p_cutoff })
    }

    /// N = 2000 cells on [0, 200].
    pub fn paper() -> Self {
        GridSpec {
            n: 2000,
            p_cutoff: 200.0,
        }
    }

    /// N = 500 cells on [0, 100], used for landscapes and long sweeps.
    pub fn reduced() -> Self {
        GridSpec {
            n: 500,
            p_cutoff: 100.0,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn p_cutoff(&self) -> f64 {
        self.p_cutoff
    }

    /// Cell width, also the quadrature weight of every node.
    pub fn step(&self) -> f64 {
        self.p_cutoff / self.n as f64
    }

    pub fn node(&self, i: usize) -> f64 {
        (i as f64 + 0.5) * self.step()
    }

    /// Midpoint nodes `k_i = (i + 1/2) p_cutoff / n`.
    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.node(i)).collect()
    }
}

/// Midpoint nodes of a grid.
pub fn make_grid(spec: &GridSpec) -> Vec<f64> {
    spec.nodes()
}

/// The configuration a matrix was assembled from.
#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct MatrixMeta {
    pub defect: DefectSpec,
    pub test: GaussianTest,
    pub grid: GridSpec,
}

/// Dense complex Hermitian matrix, row-major.
#[derive(Clone, Debug, PartialEq)]
pub struct HermitianKernelMatrix {
    dim: usize,
    entries: Vec<Complex64>,
    meta: Option<MatrixMeta>,
}

impl HermitianKernelMatrix {
    /// Wraps row-major entries. Hermiticity is not checked here; see
    /// [`crate::spectral::hermiticity_report`].
    pub fn from_entries(dim: usize, entries: Vec<Complex64>) -> Result<Self> {
        if dim == 0 || entries.len() != dim * dim {
            return Err(Error::Config(format!(
                "expected {dim}x{dim} entries, got {}",
                entries.len()
            )));
        }
        Ok(HermitianKernelMatrix {
            dim,
            entries,
            meta: None,
        })
    }

    pub fn from_rows(rows: &[Vec<Complex64>]) -> Result<Self> {
        let dim = rows.len();
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::Config("matrix rows must be square".to_string()));
        }
        Self::from_entries(dim, rows.concat())
    }

    pub fn with_meta(mut self, meta: MatrixMeta) -> Self {
        self.meta = Some(meta);
        self
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn meta(&self) -> Option<&MatrixMeta> {
        self.meta.as_ref()
    }

    pub fn get(&self, i: usize, j: usize) -> Complex64 {
        self.entries[i * self.dim + j]
    }

    pub fn row(&self, i: usize) -> &[Complex64] {
        &self.entries[i * self.dim..(i + 1) * self.dim]
    }

    pub fn entries(&self) -> &[Complex64] {
        &self.entries
    }

    pub(crate) fn entries_mut(&mut self) -> &mut [Complex64] {
        &mut self.entries
    }

    /// `M v`.
    pub fn apply(&self, v: &[Complex64]) -> Vec<Complex64> {
        assert_eq!(v.len(), self.dim);
        (0..self.dim)
            .map(|i| self.row(i).iter().zip(v).map(|(a, b)| a * b).sum())
            .collect()
    }

    /// `v† M v`, real part only (the imaginary part vanishes for Hermitian M).
    pub fn quadratic_form(&self, v: &[Complex64]) -> f64 {
        let mv = self.apply(v);
        v.iter().zip(&mv).map(|(a, b)| (a.conj() * b).re).sum()
    }
}

/// Lowest eigenpair of a kernel matrix.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralResult {
    /// Lowest eigenvalue; the backflow constant β_V(f) for a kernel matrix.
    pub beta: f64,
    /// Unit-norm eigenvector, the lowest eigenfunction sampled at the nodes.
    pub eigenvector: Vec<Complex64>,
    /// `‖M v − β v‖₂ / ‖v‖₂`.
    pub residual_norm: f64,
}
