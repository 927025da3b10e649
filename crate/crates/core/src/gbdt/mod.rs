//! The GBDT transformation of a canonical system: the parameter triple
//! `(A, S, Pi)` with `A(x) = (B - x I)^{-1}`, its evolution along the
//! system, transfer matrix functions and the transformed system.

mod trajectory;
mod transfer;
mod transform;

use std::fmt;

pub use trajectory::{evolve, positivity_report, GbdtState, GbdtTrajectory, PositivityReport};
pub use transfer::{transfer, transfer_at, TransferEval};
pub use transform::{
    boundedness_probe, direct_transformed_solution, g0_eval, g0_fd_residual, lipschitz_m2, transformed_boundary_values,
    transformed_fundamental, transformed_hamiltonian, transformed_system, BoundednessReport, TransformedBoundaryReport,
};

use crate::canonical::CanonicalSystem;
use crate::error::Result;
use crate::matrix::{eigenvalues, frobenius, identity, inverse, re, CMatrix, I};

/// Parameters of the transformation at the base point `xi`.
#[derive(Debug, Clone, PartialEq)]
pub struct GbdtParams {
    /// `A(x) = (B - x I)^{-1}`
    pub b: CMatrix,
    /// `S(xi)`, Hermitian
    pub s0: CMatrix,
    /// `Pi(xi)`, n x m
    pub pi0: CMatrix,
    pub xi: f64,
}

impl GbdtParams {
    pub fn n(&self) -> usize {
        self.b.nrows()
    }

    /// `A(x)`; fails when `x` is an eigenvalue of `B`.
    pub fn a_at(&self, x: f64) -> Result<CMatrix> {
        inverse(&(&self.b - identity(self.n()) * re(x)))
    }

    /// `1 + ||S0|| ||A(xi)|| + ||Pi0||^2`, the size of the terms in the identity.
    pub fn identity_scale(&self) -> f64 {
        let a = frobenius(&self.a_at(self.xi).unwrap_or_else(|_| identity(self.n())));
        1.0 + frobenius(&self.s0) * a + frobenius(&self.pi0).powi(2)
    }

    /// `||A(xi) S0 - S0 A(xi)* - i Pi0 J Pi0*||_F`
    pub fn identity_residual(&self, j: &CMatrix) -> Result<f64> {
        let a = self.a_at(self.xi)?;
        let lhs = &a * &self.s0 - &self.s0 * a.adjoint();
        Ok(frobenius(&(lhs - &self.pi0 * j * self.pi0.adjoint() * I)))
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ParamOptions {
    /// Relative tolerance on the identity at the base point.
    pub identity_tol: f64,
    pub hermitian_tol: f64,
    /// Minimal distance of the spectrum of `B` from `[a, b]`, as a
    /// fraction of the interval length.
    pub spectrum_margin: f64,
}

impl Default for ParamOptions {
    fn default() -> Self {
        Self { identity_tol: 1e-10, hermitian_tol: 1e-12, spectrum_margin: 1e-3 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum ParamViolation {
    Shape(String),
    BaseMismatch { params: f64, system: f64 },
    NotHermitian { defect: f64 },
    Identity { residual: f64 },
    SpectrumMeetsInterval { eigenvalue: (f64, f64), distance: f64 },
}

impl fmt::Display for ParamViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::Shape(s) => write!(f, "shape: {s}"),
            Self::BaseMismatch { params, system } => {
                write!(f, "parameter base point {params} differs from the system base point {system}")
            }
            Self::NotHermitian { defect } => write!(f, "S0 not Hermitian (defect {defect:e})"),
            Self::Identity { residual } => {
                write!(f, "A S0 - S0 A* != i Pi0 J Pi0* at the base point (residual {residual:e})")
            }
            Self::SpectrumMeetsInterval { eigenvalue, distance } => write!(
                f,
                "eigenvalue {}{:+}i of B is {distance:e} from the interval",
                eigenvalue.0, eigenvalue.1
            ),
        }
    }
}

fn dist_to_interval(re_: f64, im: f64, a: f64, b: f64) -> f64 {
    let dx = if re_ < a {
        a - re_
    } else if re_ > b {
        re_ - b
    } else {
        0.0
    };
    dx.hypot(im)
}

/// Checks the identity at the base point, Hermitian `S0`, and that the
/// spectrum of `B` stays away from the interval.
pub fn validate_params(p: &GbdtParams, sys: &CanonicalSystem, opts: &ParamOptions) -> Vec<ParamViolation> {
    let mut out = Vec::new();
    let n = p.n();
    let m = sys.m();
    if !p.b.is_square() || p.s0.shape() != (n, n) || p.pi0.shape() != (n, m) {
        out.push(ParamViolation::Shape(format!(
            "B {:?}, S0 {:?}, Pi0 {:?} for m = {m}",
            p.b.shape(),
            p.s0.shape(),
            p.pi0.shape()
        )));
        return out;
    }
    if (p.xi - sys.xi()).abs() > 1e-14 * (1.0 + sys.xi().abs()) {
        out.push(ParamViolation::BaseMismatch { params: p.xi, system: sys.xi() });
    }
    let herm = frobenius(&(&p.s0 - p.s0.adjoint()));
    if herm > opts.hermitian_tol * (1.0 + frobenius(&p.s0)) {
        out.push(ParamViolation::NotHermitian { defect: herm });
    }
    let (a, b) = sys.interval();
    let margin = opts.spectrum_margin * (b - a);
    let mut spectrum_ok = true;
    if let Ok(eigs) = eigenvalues(&p.b) {
        for e in eigs {
            let d = dist_to_interval(e.re, e.im, a, b);
            if d <= margin {
                spectrum_ok = false;
                out.push(ParamViolation::SpectrumMeetsInterval { eigenvalue: (e.re, e.im), distance: d });
            }
        }
    }
    if spectrum_ok {
        match p.identity_residual(sys.j()) {
            Ok(r) => {
                if r > opts.identity_tol * p.identity_scale() {
                    out.push(ParamViolation::Identity { residual: r });
                }
            }
            Err(_) => out.push(ParamViolation::Identity { residual: f64::INFINITY }),
        }
    }
    out
}

/// Smallest distance from the spectrum of `B` to `[a, b]`.
pub fn spectrum_distance(p: &GbdtParams, a: f64, b: f64) -> Result<f64> {
    Ok(eigenvalues(&p.b)?.iter().map(|e| dist_to_interval(e.re, e.im, a, b)).fold(f64::INFINITY, f64::min))
}
