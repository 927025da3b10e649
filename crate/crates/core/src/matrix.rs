//! Dense complex matrices and the small set of kernels the rest of the
//! crate is built on: exponentials, linear solves with a condition check,
//! Hermitian diagnostics and norms.

use nalgebra::{DMatrix, SymmetricEigen};
use num_complex::Complex64;

use crate::error::{Error, Result};

pub type C64 = Complex64;
pub type CMatrix = DMatrix<C64>;

/// Condition estimates above this are reported as singular.
pub const SINGULAR_COND: f64 = 1e12;
pub const DEFAULT_PSD_TOL: f64 = 1e-10;

pub const I: C64 = C64::new(0.0, 1.0);

#[inline]
pub fn c(re: f64, im: f64) -> C64 {
    C64::new(re, im)
}

#[inline]
pub fn re(x: f64) -> C64 {
    C64::new(x, 0.0)
}

/// Builds a matrix from row-major entries, rejecting non-finite values.
pub fn from_row_major(rows: usize, cols: usize, entries: &[C64]) -> Result<CMatrix> {
    if rows * cols != entries.len() {
        return Err(Error::Shape {
            op: "from_row_major",
            detail: format!("{rows}x{cols} needs {} entries, got {}", rows * cols, entries.len()),
        });
    }
    if let Some(k) = entries.iter().position(|z| !z.re.is_finite() || !z.im.is_finite()) {
        return Err(Error::NonFinite { row: k / cols.max(1), col: k % cols.max(1) });
    }
    Ok(CMatrix::from_row_slice(rows, cols, entries))
}

/// Convenience constructor used heavily in tests and closed forms.
pub fn from_rows<const N: usize>(rows: &[[C64; N]]) -> CMatrix {
    let flat: Vec<C64> = rows.iter().flat_map(|r| r.iter().copied()).collect();
    CMatrix::from_row_slice(rows.len(), N, &flat)
}

pub fn identity(n: usize) -> CMatrix {
    CMatrix::identity(n, n)
}

pub fn is_finite(m: &CMatrix) -> bool {
    m.iter().all(|z| z.re.is_finite() && z.im.is_finite())
}

fn require_square(op: &'static str, m: &CMatrix) -> Result<()> {
    if m.is_square() {
        Ok(())
    } else {
        Err(Error::Shape { op, detail: format!("expected square, got {}x{}", m.nrows(), m.ncols()) })
    }
}

pub fn frobenius(m: &CMatrix) -> f64 {
    m.norm()
}

/// Spectral norm (largest singular value).
pub fn norm2(m: &CMatrix) -> f64 {
    if m.is_empty() {
        return 0.0;
    }
    m.clone().svd(false, false).singular_values.max()
}

pub fn norm1(m: &CMatrix) -> f64 {
    m.column_iter().map(|c| c.iter().map(|z| z.norm()).sum::<f64>()).fold(0.0, f64::max)
}

/// `exp(scale * m)`.
///
/// Backed by nalgebra's scaling-and-squaring Padé exponential.
pub fn expm(m: &CMatrix, scale: C64) -> Result<CMatrix> {
    require_square("expm", m)?;
    if m.nrows() == 0 {
        return Ok(m.clone());
    }
    Ok((m * scale).exp())
}

/// Result of [`solve_with_cond`].
#[derive(Debug, Clone)]
pub struct Solved {
    pub x: CMatrix,
    /// 1-norm condition number of the coefficient matrix.
    pub cond: f64,
}

/// Solves `a x = b`, returning the solution together with the 1-norm
/// condition number of `a`.
pub fn solve_with_cond(a: &CMatrix, b: &CMatrix) -> Result<Solved> {
    require_square("solve", a)?;
    if a.nrows() != b.nrows() {
        return Err(Error::Shape {
            op: "solve",
            detail: format!("{}x{} against {} right-hand-side rows", a.nrows(), a.ncols(), b.nrows()),
        });
    }
    let n = a.nrows();
    if n == 0 {
        return Ok(Solved { x: b.clone(), cond: 1.0 });
    }
    let lu = a.clone().lu();
    let inv = lu.try_inverse().ok_or(Error::Singular { cond: f64::INFINITY })?;
    let cond = norm1(a) * norm1(&inv);
    if !cond.is_finite() || cond > SINGULAR_COND {
        return Err(Error::Singular { cond });
    }
    let x = lu.solve(b).ok_or(Error::Singular { cond })?;
    Ok(Solved { x, cond })
}

pub fn solve(a: &CMatrix, b: &CMatrix) -> Result<CMatrix> {
    solve_with_cond(a, b).map(|s| s.x)
}

pub fn inverse(a: &CMatrix) -> Result<CMatrix> {
    solve(a, &identity(a.nrows()))
}

/// Condition number in the 1-norm; `+inf` for exactly singular input.
pub fn cond1(a: &CMatrix) -> f64 {
    match a.clone().try_inverse() {
        Some(inv) => norm1(a) * norm1(&inv),
        None => f64::INFINITY,
    }
}

/// Hermitian part `(m + m*) / 2`.
pub fn hermitian_part(m: &CMatrix) -> CMatrix {
    (m + m.adjoint()) * re(0.5)
}

/// Real eigenvalues of the Hermitian part, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Vec<f64> {
    if m.nrows() == 0 {
        return Vec::new();
    }
    let mut ev: Vec<f64> = SymmetricEigen::new(hermitian_part(m)).eigenvalues.iter().copied().collect();
    ev.sort_by(|a, b| a.total_cmp(b));
    ev
}

pub fn min_hermitian_eig(m: &CMatrix) -> f64 {
    hermitian_eigenvalues(m).first().copied().unwrap_or(0.0)
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct HermitianReport {
    /// `||M - M*||_F`
    pub defect: f64,
    pub min_eig: f64,
    pub is_psd: bool,
}

pub fn hermitian_report(m: &CMatrix) -> Result<HermitianReport> {
    hermitian_report_tol(m, DEFAULT_PSD_TOL)
}

pub fn hermitian_report_tol(m: &CMatrix, psd_tol: f64) -> Result<HermitianReport> {
    require_square("hermitian_report", m)?;
    let defect = frobenius(&(m - m.adjoint()));
    let min_eig = min_hermitian_eig(m);
    let is_psd = min_eig >= -psd_tol && defect <= psd_tol.max(1e-12) * (1.0 + frobenius(m));
    Ok(HermitianReport { defect, min_eig, is_psd })
}

/// Eigenvalues of a general square matrix via the complex Schur form.
pub fn eigenvalues(m: &CMatrix) -> Result<Vec<C64>> {
    require_square("eigenvalues", m)?;
    if m.nrows() == 0 {
        return Ok(Vec::new());
    }
    let schur = nalgebra::Schur::new(m.clone());
    let (_, t) = schur.unpack();
    Ok(t.diagonal().iter().copied().collect())
}

/// Entries in row-major order; used by every CSV writer.
pub fn row_major(m: &CMatrix) -> Vec<C64> {
    let mut out = Vec::with_capacity(m.len());
    for i in 0..m.nrows() {
        for j in 0..m.ncols() {
            out.push(m[(i, j)]);
        }
    }
    out
}
