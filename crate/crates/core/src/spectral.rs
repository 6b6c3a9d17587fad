//! Discretization of the kernel into an N×N Hermitian matrix and extraction of
//! its lowest eigenpair.
//!
//! Entries are `M_ij = (p_cutoff / n) K(k_i, k_j)` at midpoint nodes. On the
//! uniform grid every frequency a kernel needs is an integer multiple of the
//! step, `k_j - k_i = (j - i) h` and `k_i + k_j = (i + j + 1) h`, so the
//! half-line integrals are tabulated once per frequency rather than once per
//! entry.
//!
//! The eigensolver reduces M to a real symmetric tridiagonal matrix (Householder
//! reflections followed by a diagonal phase similarity), locates the smallest
//! eigenvalue by Sturm-sequence bisection and recovers its eigenvector by
//! inverse iteration.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::exec::Execution;
use crate::kernels::{combine, HalfLineIntegrals};
use crate::quadrature::{halfline_fourier, HalfLineIntegralRequest, Side};
use crate::types::{
    DefectKind, DefectSpec, GaussianTest, GridSpec, HermitianKernelMatrix, MatrixMeta,
    SpectralResult,
};

/// Largest tolerated imaginary part on the assembled diagonal.
pub const DIAGONAL_IMAG_TOL: f64 = 1e-12;
/// Largest tolerated `|M_ij - conj(M_ji)|` accepted by the eigensolver.
pub const HERMITICITY_TOL: f64 = 1e-10;
/// Residual target for the returned eigenpair.
pub const RESIDUAL_TOL: f64 = 1e-8;

const ZERO: Complex64 = Complex64 { re: 0.0, im: 0.0 };

/// Half-line integrals at `q = m h` for every integer `m` a grid can produce.
struct IntegralTable {
    offset: usize,
    left: Vec<Complex64>,
    right: Vec<Complex64>,
}

impl IntegralTable {
    fn build(defect: DefectKind, test: &GaussianTest, grid: &GridSpec, exec: Execution) -> Result<Self> {
        let n = grid.n();
        let h = grid.step();
        // Sums reach (2n - 1) h; only the δ kernel needs them.
        let reach = if defect == DefectKind::Delta { 2 * n - 1 } else { n - 1 };
        let len = 2 * reach + 1;
        let eval = |side: Side, idx: usize| -> Result<Complex64> {
            let m = idx as i64 - reach as i64;
            halfline_fourier(&HalfLineIntegralRequest { side, q: m as f64 * h, test: *test })
                .map_err(|e| table_error(e, m, n))
        };
        let left: Result<Vec<_>> = exec.map_indices(len, |idx| eval(Side::Left, idx)).into_iter().collect();
        let right_len = 2 * (n - 1) + 1;
        let right_offset = reach - (n - 1);
        let right: Result<Vec<_>> = exec
            .map_indices(right_len, |idx| eval(Side::Right, idx + right_offset))
            .into_iter()
            .collect();
        // Right integrals are stored on the same index scale as the left ones.
        let mut right_full = vec![ZERO; len];
        right_full[right_offset..right_offset + right_len].copy_from_slice(&right?);
        Ok(IntegralTable { offset: reach, left: left?, right: right_full })
    }

    fn left(&self, m: i64) -> Complex64 {
        self.left[(m + self.offset as i64) as usize]
    }

    fn right(&self, m: i64) -> Complex64 {
        self.right[(m + self.offset as i64) as usize]
    }

    fn integrals(&self, row: usize, col: usize) -> HalfLineIntegrals {
        let diff = col as i64 - row as i64;
        let sum = (row + col + 1) as i64;
        let delta = self.offset as i64 >= sum;
        HalfLineIntegrals {
            left_diff: self.left(diff),
            right_diff: self.right(diff),
            left_neg_diff: self.left(-diff),
            left_sum: if delta { self.left(sum) } else { ZERO },
            left_neg_sum: if delta { self.left(-sum) } else { ZERO },
        }
    }
}

/// Names an entry that needed the failing frequency `m h`.
fn table_error(err: Error, m: i64, n: usize) -> Error {
    let a = m.unsigned_abs() as usize;
    let (row, col) = if a < n {
        if m >= 0 { (0, a) } else { (a, 0) }
    } else {
        // A sum frequency (i + j + 1) h.
        (a - n, n - 1)
    };
    Error::Assembly { row, col, source: Box::new(err) }
}

fn validate_inputs(defect: &DefectSpec, test: &GaussianTest, grid: &GridSpec) -> Result<()> {
    // Re-run constructors so hand-made values get the same checks.
    DefectSpec::new(defect.kind(), defect.strength(), defect.conserved())?;
    GaussianTest::with_support_factor(test.x0(), test.sigma(), test.support_factor())?;
    GridSpec::new(grid.n(), grid.p_cutoff())?;
    Ok(())
}

/// Assembles every entry independently, both triangles, without mirroring.
pub fn assemble_raw(
    defect: &DefectSpec,
    test: &GaussianTest,
    grid: &GridSpec,
    exec: Execution,
) -> Result<HermitianKernelMatrix> {
    validate_inputs(defect, test, grid)?;
    let n = grid.n();
    let h = grid.step();
    let table = IntegralTable::build(defect.kind(), test, grid, exec)?;
    let f0 = test.at_origin();
    let mut entries = vec![ZERO; n * n];
    exec.for_each_row(&mut entries, n, |i, row| {
        let kp = grid.node(i);
        for (j, slot) in row.iter_mut().enumerate() {
            *slot = h * combine(defect, kp, grid.node(j), &table.integrals(i, j), f0);
        }
    });
    Ok(HermitianKernelMatrix::from_entries(n, entries)?.with_meta(MatrixMeta {
        defect: *defect,
        test: *test,
        grid: *grid,
    }))
}

/// Assembles `M` from the upper triangle and diagonal, mirrored by conjugation.
pub fn build_matrix(defect: &DefectSpec, test: &GaussianTest, grid: &GridSpec) -> Result<HermitianKernelMatrix> {
    build_matrix_with(defect, test, grid, Execution::default())
}

pub fn build_matrix_with(
    defect: &DefectSpec,
    test: &GaussianTest,
    grid: &GridSpec,
    exec: Execution,
) -> Result<HermitianKernelMatrix> {
    validate_inputs(defect, test, grid)?;
    let n = grid.n();
    let h = grid.step();
    let table = IntegralTable::build(defect.kind(), test, grid, exec)?;
    let f0 = test.at_origin();
    let mut entries = vec![ZERO; n * n];
    exec.for_each_row(&mut entries, n, |i, row| {
        let kp = grid.node(i);
        for (j, slot) in row.iter_mut().enumerate().skip(i) {
            *slot = h * combine(defect, kp, grid.node(j), &table.integrals(i, j), f0);
        }
    });
    for i in 0..n {
        let d = &mut entries[i * n + i];
        if d.im.abs() > DIAGONAL_IMAG_TOL {
            return Err(Error::Assembly {
                row: i,
                col: i,
                source: Box::new(Error::Spectral(format!(
                    "diagonal entry has imaginary part {:.3e}",
                    d.im
                ))),
            });
        }
        d.im = 0.0;
        for j in (i + 1)..n {
            entries[j * n + i] = entries[i * n + j].conj();
        }
    }
    Ok(HermitianKernelMatrix::from_entries(n, entries)?.with_meta(MatrixMeta {
        defect: *defect,
        test: *test,
        grid: *grid,
    }))
}

/// `max_ij |M_ij - conj(M_ji)|`.
pub fn hermiticity_report(m: &HermitianKernelMatrix) -> f64 {
    let n = m.dim();
    let mut worst = 0.0f64;
    for i in 0..n {
        for j in i..n {
            worst = worst.max((m.get(i, j) - m.get(j, i).conj()).norm());
        }
    }
    worst
}

/// Lowest eigenpair with the default execution mode.
pub fn lowest_eigenpair(m: &HermitianKernelMatrix) -> Result<SpectralResult> {
    lowest_eigenpair_with(m, Execution::default())
}

pub fn lowest_eigenpair_with(m: &HermitianKernelMatrix, exec: Execution) -> Result<SpectralResult> {
    let n = m.dim();
    let dev = hermiticity_report(m);
    if dev > HERMITICITY_TOL {
        return Err(Error::Spectral(format!(
            "matrix is not Hermitian: max |M_ij - conj(M_ji)| = {dev:.3e}"
        )));
    }
    for i in 0..n {
        let im = m.get(i, i).im;
        if im.abs() > DIAGONAL_IMAG_TOL {
            return Err(Error::Spectral(format!(
                "diagonal entry {i} has imaginary part {im:.3e}"
            )));
        }
    }
    if m.entries().iter().any(|z| !z.is_finite()) {
        return Err(Error::Spectral("matrix has non-finite entries".to_string()));
    }

    // Working copy: exactly Hermitian, built from the lower triangle.
    let mut a = m.entries().to_vec();
    for i in 0..n {
        a[i * n + i].im = 0.0;
        for j in (i + 1)..n {
            a[i * n + j] = a[j * n + i].conj();
        }
    }

    let tri = tridiagonalize(&mut a, n, exec);
    let norm_bound = tri.gershgorin();
    let lambda = tri.smallest_eigenvalue();
    let y = tri.inverse_iteration(lambda, norm_bound)?;
    let mut v = tri.back_transform(y);

    normalize_phase(&mut v);
    let mv = m.apply(&v);
    let beta: f64 = v.iter().zip(&mv).map(|(a, b)| (a.conj() * b).re).sum();
    let residual_norm = mv
        .iter()
        .zip(&v)
        .map(|(a, b)| (a - beta * b).norm_sqr())
        .sum::<f64>()
        .sqrt();
    if residual_norm.is_nan() || residual_norm > RESIDUAL_TOL {
        return Err(Error::Spectral(format!(
            "eigenpair residual {residual_norm:.3e} exceeds {RESIDUAL_TOL:.0e} \
             (bisection value {lambda:.12e}, n = {n})"
        )));
    }
    Ok(SpectralResult { beta, eigenvector: v, residual_norm })
}

/// Unit norm, largest component real and positive.
fn normalize_phase(v: &mut [Complex64]) {
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    let pivot = v
        .iter()
        .copied()
        .max_by(|a, b| a.norm_sqr().total_cmp(&b.norm_sqr()))
        .unwrap_or(ZERO);
    let phase = if pivot.norm() > 0.0 { pivot.conj() / pivot.norm() } else { Complex64::new(1.0, 0.0) };
    let scale = phase / norm;
    v.iter_mut().for_each(|z| *z *= scale);
}

/// Householder reduction `Q† A Q = T` with T Hermitian tridiagonal.
struct Tridiagonal {
    diag: Vec<f64>,
    /// Sub-diagonal `T[i+1][i]`, complex before the phase similarity.
    sub: Vec<Complex64>,
    /// Reflector `k` acts on indices `k+1..n`: `H = I - tau u u†`.
    reflectors: Vec<(f64, Vec<Complex64>)>,
}

/// Rows below this size are updated serially; the pool overhead dominates.
const PARALLEL_ROWS: usize = 96;

fn tridiagonalize(a: &mut [Complex64], n: usize, exec: Execution) -> Tridiagonal {
    let mut sub = vec![ZERO; n.saturating_sub(1)];
    let mut reflectors = Vec::with_capacity(n.saturating_sub(2));
    for k in 0..n.saturating_sub(1) {
        let m = n - k - 1;
        let x: Vec<Complex64> = (k + 1..n).map(|r| a[r * n + k]).collect();
        let tail: f64 = x[1..].iter().map(|z| z.norm_sqr()).sum();
        if k + 2 >= n || tail == 0.0 {
            sub[k] = x[0];
            if k + 2 < n {
                reflectors.push((0.0, Vec::new()));
            }
            continue;
        }
        let alpha = x[0];
        let xnorm = (alpha.norm_sqr() + tail).sqrt();
        let phase = if alpha.norm() > 0.0 { alpha / alpha.norm() } else { Complex64::new(1.0, 0.0) };
        let mut u = x;
        u[0] += phase * xnorm;
        let tau = 1.0 / (xnorm * (xnorm + alpha.norm()));
        sub[k] = -phase * xnorm;

        let step = if m >= PARALLEL_ROWS { exec } else { Execution::Serial };
        let trailing = &mut a[(k + 1) * n..];

        // p = tau B u
        let view: &[Complex64] = trailing;
        let p: Vec<Complex64> = step.map_indices(m, |r| {
            let row = &view[r * n + k + 1..r * n + n];
            let mut acc = ZERO;
            for (b, uc) in row.iter().zip(&u) {
                acc += b * uc;
            }
            acc * tau
        });
        // w = p - (tau/2)(u† p) u
        let upu: Complex64 = u.iter().zip(&p).map(|(a, b)| a.conj() * b).sum();
        let kfac = 0.5 * tau * upu.re;
        let w: Vec<Complex64> = p.iter().zip(&u).map(|(pi, ui)| pi - kfac * ui).collect();
        let u_conj: Vec<Complex64> = u.iter().map(|z| z.conj()).collect();
        let w_conj: Vec<Complex64> = w.iter().map(|z| z.conj()).collect();

        // B -= u w† + w u†
        step.for_each_row(trailing, n, |r, row| {
            let (ur, wr) = (u[r], w[r]);
            for ((b, wc), uc) in row[k + 1..].iter_mut().zip(&w_conj).zip(&u_conj) {
                *b -= ur * wc + wr * uc;
            }
        });
        reflectors.push((tau, u));
    }
    let diag = (0..n).map(|i| a[i * n + i].re).collect();
    Tridiagonal { diag, sub, reflectors }
}

impl Tridiagonal {
    fn off(&self) -> Vec<f64> {
        self.sub.iter().map(|z| z.norm()).collect()
    }

    /// Bound on the spectral radius.
    fn gershgorin(&self) -> f64 {
        let off = self.off();
        let n = self.diag.len();
        (0..n)
            .map(|i| {
                let left = if i > 0 { off[i - 1] } else { 0.0 };
                let right = if i + 1 < n { off[i] } else { 0.0 };
                self.diag[i].abs() + left + right
            })
            .fold(0.0, f64::max)
    }

    /// Number of eigenvalues strictly below `x`.
    fn sturm_count(&self, off_sq: &[f64], x: f64, pivmin: f64) -> usize {
        let mut count = 0;
        let mut q = self.diag[0] - x;
        if q.abs() < pivmin {
            q = -pivmin;
        }
        if q < 0.0 {
            count += 1;
        }
        for i in 1..self.diag.len() {
            q = self.diag[i] - x - off_sq[i - 1] / q;
            if q.abs() < pivmin {
                q = -pivmin;
            }
            if q < 0.0 {
                count += 1;
            }
        }
        count
    }

    fn smallest_eigenvalue(&self) -> f64 {
        let off = self.off();
        let off_sq: Vec<f64> = off.iter().map(|b| b * b).collect();
        let n = self.diag.len();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for i in 0..n {
            let left = if i > 0 { off[i - 1] } else { 0.0 };
            let right = if i + 1 < n { off[i] } else { 0.0 };
            lo = lo.min(self.diag[i] - left - right);
            hi = hi.max(self.diag[i] + left + right);
        }
        let scale = lo.abs().max(hi.abs()).max(f64::MIN_POSITIVE);
        let pivmin = f64::MIN_POSITIVE.max(scale * scale * f64::EPSILON * f64::EPSILON);
        let (mut lo, mut hi) = (lo - 2.0 * f64::EPSILON * scale, hi + 2.0 * f64::EPSILON * scale);
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi || hi - lo <= 2.0 * f64::EPSILON * (lo.abs().max(hi.abs())) {
                break;
            }
            if self.sturm_count(&off_sq, mid, pivmin) >= 1 {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        0.5 * (lo + hi)
    }

    /// Eigenvector of the real tridiagonal `D† T D` for eigenvalue `lambda`,
    /// mapped back to T's basis.
    fn inverse_iteration(&self, lambda: f64, norm_bound: f64) -> Result<Vec<Complex64>> {
        let n = self.diag.len();
        let off = self.off();
        let floor = f64::EPSILON * norm_bound.max(f64::MIN_POSITIVE);
        let mut y: Vec<f64> = (0..n).map(|i| 1.0 + 0.5 * ((i as f64) * 0.618_033_988_7).sin()).collect();
        let lu = TridiagLu::factor(&self.diag, &off, lambda, floor);
        for _ in 0..4 {
            lu.solve(&mut y);
            let norm = y.iter().map(|v| v * v).sum::<f64>().sqrt();
            if !(norm.is_finite() && norm > 0.0) {
                return Err(Error::Spectral(format!(
                    "inverse iteration broke down at eigenvalue {lambda:.6e}"
                )));
            }
            y.iter_mut().for_each(|v| *v /= norm);
        }
        // Undo the phase similarity: T = D S D†, S real.
        let mut phase = Complex64::new(1.0, 0.0);
        let mut out = Vec::with_capacity(n);
        for (i, &yi) in y.iter().enumerate() {
            out.push(phase * yi);
            if i + 1 < n {
                let e = self.sub[i];
                if e.norm() > 0.0 {
                    phase *= e / e.norm();
                }
            }
        }
        Ok(out)
    }

    /// Applies `Q = H_0 H_1 ⋯` to a tridiagonal-basis vector.
    fn back_transform(&self, mut y: Vec<Complex64>) -> Vec<Complex64> {
        for (k, (tau, u)) in self.reflectors.iter().enumerate().rev() {
            if *tau == 0.0 {
                continue;
            }
            let seg = &mut y[k + 1..];
            let dot: Complex64 = u.iter().zip(seg.iter()).map(|(a, b)| a.conj() * b).sum();
            let s = dot * *tau;
            for (yi, ui) in seg.iter_mut().zip(u) {
                *yi -= s * ui;
            }
        }
        y
    }
}

/// LU factorization of a shifted symmetric tridiagonal matrix with partial
/// pivoting.
struct TridiagLu {
    // Row i of U: u0[i] on the diagonal, u1[i], u2[i] to its right.
    u0: Vec<f64>,
    u1: Vec<f64>,
    u2: Vec<f64>,
    mult: Vec<f64>,
    swapped: Vec<bool>,
}

impl TridiagLu {
    fn factor(diag: &[f64], off: &[f64], shift: f64, floor: f64) -> Self {
        let n = diag.len();
        let mut u0: Vec<f64> = diag.iter().map(|d| d - shift).collect();
        let mut u1: Vec<f64> = (0..n).map(|i| if i + 1 < n { off[i] } else { 0.0 }).collect();
        let mut u2 = vec![0.0; n];
        let mut mult = vec![0.0; n];
        let mut swapped = vec![false; n];
        // `lower[i]` is the sub-diagonal entry in row i+1, column i.
        let lower: Vec<f64> = off.to_vec();
        for i in 0..n.saturating_sub(1) {
            let below = lower[i];
            if u0[i].abs() >= below.abs() {
                if u0[i].abs() < floor {
                    u0[i] = floor;
                }
                let l = below / u0[i];
                mult[i] = l;
                u0[i + 1] -= l * u1[i];
            } else {
                // Swap rows i and i+1.
                let l = u0[i] / below;
                mult[i] = l;
                swapped[i] = true;
                let next_diag = u0[i + 1];
                let next_right = if i + 2 < n { off[i + 1] } else { 0.0 };
                u0[i] = below;
                let old_u1 = u1[i];
                u1[i] = next_diag;
                u2[i] = next_right;
                u0[i + 1] = old_u1 - l * next_diag;
                if i + 1 < n - 1 {
                    u1[i + 1] = -l * next_right;
                }
            }
        }
        if n > 0 && u0[n - 1].abs() < floor {
            u0[n - 1] = floor;
        }
        TridiagLu { u0, u1, u2, mult, swapped }
    }

    fn solve(&self, b: &mut [f64]) {
        let n = b.len();
        for i in 0..n.saturating_sub(1) {
            if self.swapped[i] {
                b.swap(i, i + 1);
            }
            b[i + 1] -= self.mult[i] * b[i];
        }
        for i in (0..n).rev() {
            let mut acc = b[i];
            if i + 1 < n {
                acc -= self.u1[i] * b[i + 1];
            }
            if i + 2 < n {
                acc -= self.u2[i] * b[i + 2];
            }
            b[i] = acc / self.u0[i];
        }
    }
}

/// Full spectrum by cyclic Jacobi rotations on the real symmetric embedding
/// `[[Re M, -Im M], [Im M, Re M]]`, ascending. Each eigenvalue of M appears
/// twice in the embedding; one copy of each is returned.
///
/// Slow (O(n³) per sweep) and meant as an independent reference for small n.
pub fn dense_spectrum(m: &HermitianKernelMatrix) -> Vec<f64> {
    let n = m.dim();
    let size = 2 * n;
    let mut a = vec![0.0f64; size * size];
    for i in 0..n {
        for j in 0..n {
            let z = m.get(i, j);
            a[i * size + j] = z.re;
            a[(i + n) * size + j + n] = z.re;
            a[i * size + j + n] = -z.im;
            a[(i + n) * size + j] = z.im;
        }
    }
    for _sweep in 0..100 {
        let off: f64 = (0..size)
            .flat_map(|i| (0..size).filter(move |&j| j != i).map(move |j| (i, j)))
            .map(|(i, j)| a[i * size + j].powi(2))
            .sum();
        let total: f64 = a.iter().map(|x| x * x).sum();
        if off <= 1e-30 * total.max(f64::MIN_POSITIVE) {
            break;
        }
        for p in 0..size {
            for q in (p + 1)..size {
                let apq = a[p * size + q];
                if apq == 0.0 {
                    continue;
                }
                let app = a[p * size + p];
                let aqq = a[q * size + q];
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let s = t * c;
                for r in 0..size {
                    let arp = a[r * size + p];
                    let arq = a[r * size + q];
                    a[r * size + p] = c * arp - s * arq;
                    a[r * size + q] = s * arp + c * arq;
                }
                for r in 0..size {
                    let apr = a[p * size + r];
                    let aqr = a[q * size + r];
                    a[p * size + r] = c * apr - s * aqr;
                    a[q * size + r] = s * apr + c * aqr;
                }
            }
        }
    }
    let mut eig: Vec<f64> = (0..size).map(|i| a[i * size + i]).collect();
    eig.sort_by(f64::total_cmp);
    eig.into_iter().step_by(2).collect()
}
