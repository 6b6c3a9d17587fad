//! Lowest eigenvalue of the spatially averaged probability-current operator
//! for a right-moving particle scattering off a point defect at the origin.
//!
//! The pipeline is: Gaussian averaging function and momentum grid ([`types`]),
//! half-line Fourier integrals ([`quadrature`]), closed-form scattering data
//! ([`scattering`]), momentum-space kernels ([`kernels`]), Hermitian
//! discretization and lowest eigenpair ([`spectral`]), and sweeps over
//! measurement position and defect strength ([`scan`]). [`conservation`]
//! checks the defect conservation laws on exact mode superpositions, and
//! [`validate`] bundles the invariant checks into runnable suites.

pub mod conservation;
pub mod error;
pub mod exec;
pub mod kernels;
pub mod quadrature;
pub mod scan;
pub mod scattering;
pub mod spectral;
pub mod types;
pub mod validate;

pub use error::{Error, Result};
pub use exec::Execution;
pub use types::{
    make_grid, DefectKind, DefectSpec, GaussianTest, GridSpec, HermitianKernelMatrix, MatrixMeta,
    SpectralResult,
};

/// β for one configuration: assemble and take the lowest eigenpair.
pub fn backflow_constant(
    defect: &DefectSpec,
    test: &GaussianTest,
    grid: &GridSpec,
    exec: Execution,
) -> Result<SpectralResult> {
    let m = spectral::build_matrix_with(defect, test, grid, exec)?;
    spectral::lowest_eigenpair_with(&m, exec)
}
