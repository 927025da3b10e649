//! Non-isospectral canonical systems `W_x = i (z - x)^{-1} J H(x) W`.

mod boundary;
mod hamiltonian;
mod kernel;
mod solution;

use std::fmt;

pub use boundary::{boundary_values, richardson_limit, BoundaryOptions, BoundaryValueReport, Limit};
pub use hamiltonian::{HamiltonianSpec, Sampled};
pub use kernel::{kernel_bound, kernel_bound_of, KernelBoundReport, DEGENERACY_TOL};
pub use solution::{
    fundamental_solution, j_monotonicity_defect, product_integral, propagate, FundamentalSolution, Method,
};

use crate::error::{Error, Result};
use crate::matrix::{frobenius, hermitian_report_tol, identity, CMatrix, C64, DEFAULT_PSD_TOL};

/// Spectral points closer than this to the interval are rejected.
pub const DISTANCE_TOL: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct CanonicalSystem {
    j: CMatrix,
    a: f64,
    b: f64,
    xi: f64,
    hamiltonian: HamiltonianSpec,
}

impl CanonicalSystem {
    /// Checks shapes only; use [`validate_system`] for the structural
    /// conditions on `J` and `H`.
    pub fn new(j: CMatrix, interval: (f64, f64), xi: f64, hamiltonian: HamiltonianSpec) -> Result<Self> {
        if !j.is_square() {
            return Err(Error::Shape { op: "CanonicalSystem", detail: format!("J is {}x{}", j.nrows(), j.ncols()) });
        }
        if hamiltonian.dim() != j.nrows() {
            return Err(Error::Shape {
                op: "CanonicalSystem",
                detail: format!("J is {0}x{0} but H is {1}x{1}", j.nrows(), hamiltonian.dim()),
            });
        }
        let (a, b) = interval;
        if !(a.is_finite() && b.is_finite() && xi.is_finite()) {
            return Err(Error::Invalid("interval and base point must be finite".into()));
        }
        Ok(Self { j, a, b, xi, hamiltonian })
    }

    pub fn m(&self) -> usize {
        self.j.nrows()
    }

    pub fn j(&self) -> &CMatrix {
        &self.j
    }

    pub fn interval(&self) -> (f64, f64) {
        (self.a, self.b)
    }

    pub fn xi(&self) -> f64 {
        self.xi
    }

    pub fn hamiltonian(&self) -> &HamiltonianSpec {
        &self.hamiltonian
    }

    pub fn h(&self, x: f64) -> CMatrix {
        self.hamiltonian.eval(x)
    }

    pub fn with_hamiltonian(&self, hamiltonian: HamiltonianSpec) -> Result<Self> {
        Self::new(self.j.clone(), (self.a, self.b), self.xi, hamiltonian)
    }

    pub fn with_xi(&self, xi: f64) -> Self {
        Self { xi, ..self.clone() }
    }

    /// `|Im z| + dist(Re z, [a, b])`.
    pub fn distance_to_interval(&self, z: C64) -> f64 {
        let d = if z.re < self.a {
            self.a - z.re
        } else if z.re > self.b {
            z.re - self.b
        } else {
            0.0
        };
        z.im.abs() + d
    }

    pub(crate) fn check_off_cut(&self, z: C64) -> Result<()> {
        if self.distance_to_interval(z) < DISTANCE_TOL {
            return Err(Error::NearCut { re: z.re, im: z.im, a: self.a, b: self.b });
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub enum Violation {
    BadInterval { a: f64, b: f64 },
    XiOutside { xi: f64 },
    JNotHermitian { defect: f64 },
    JNotInvolution { defect: f64 },
    HNotPsd { index: usize, x: f64, min_eig: f64 },
    HNotHermitian { index: usize, x: f64, defect: f64 },
    GridDoesNotCover { lo: f64, hi: f64 },
    BetaJump { slope: f64, limit: f64 },
}

impl fmt::Display for Violation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Self::BadInterval { a, b } => write!(f, "interval [{a}, {b}] is empty"),
            Self::XiOutside { xi } => write!(f, "base point {xi} lies outside the interval"),
            Self::JNotHermitian { defect } => write!(f, "J != J* (defect {defect:e})"),
            Self::JNotInvolution { defect } => write!(f, "J² ≠ I (defect {defect:e})"),
            Self::HNotPsd { index, x, min_eig } => {
                write!(f, "H not PSD at x_{index} = {x} (min eigenvalue {min_eig:e})")
            }
            Self::HNotHermitian { index, x, defect } => {
                write!(f, "H not Hermitian at x_{index} = {x} (defect {defect:e})")
            }
            Self::GridDoesNotCover { lo, hi } => write!(f, "Hamiltonian grid [{lo}, {hi}] does not cover the interval"),
            Self::BetaJump { slope, limit } => {
                write!(f, "beta grid slope {slope:e} exceeds the Lipschitz estimate {limit:e}")
            }
        }
    }
}

#[derive(Debug, Clone, Copy)]
pub struct ValidationOptions {
    pub psd_tol: f64,
    pub signature_tol: f64,
    /// Bound on the sample-to-sample slope of a factored `beta`.
    pub lipschitz: Option<f64>,
}

impl Default for ValidationOptions {
    fn default() -> Self {
        Self { psd_tol: DEFAULT_PSD_TOL, signature_tol: 1e-12, lipschitz: None }
    }
}

/// Checks `J = J* = J^{-1}`, `H(x_j) >= 0` at every sample, and the
/// interval/base point layout. An empty list means the system is valid.
pub fn validate_system(sys: &CanonicalSystem, opts: &ValidationOptions) -> Vec<Violation> {
    let mut out = Vec::new();
    let (a, b) = sys.interval();
    if !(a < b) {
        out.push(Violation::BadInterval { a, b });
    }
    if sys.xi < a || sys.xi > b {
        out.push(Violation::XiOutside { xi: sys.xi });
    }
    let herm = frobenius(&(&sys.j - sys.j.adjoint()));
    if herm > opts.signature_tol {
        out.push(Violation::JNotHermitian { defect: herm });
    }
    let inv = frobenius(&(&sys.j * &sys.j - identity(sys.m())));
    if inv > opts.signature_tol {
        out.push(Violation::JNotInvolution { defect: inv });
    }
    let nodes = sys.hamiltonian.nodes();
    let (lo, hi) = (nodes[0], nodes[nodes.len() - 1]);
    if lo > a || hi < b {
        out.push(Violation::GridDoesNotCover { lo, hi });
    }
    match &sys.hamiltonian {
        HamiltonianSpec::Grid(s) => {
            for (index, (x, h)) in s.nodes().iter().zip(s.samples()).enumerate() {
                // report-style: shapes were checked at construction
                let Ok(r) = hermitian_report_tol(h, opts.psd_tol) else { continue };
                if r.defect > opts.psd_tol.max(1e-12) * (1.0 + frobenius(h)) {
                    out.push(Violation::HNotHermitian { index, x: *x, defect: r.defect });
                }
                if r.min_eig < -opts.psd_tol {
                    out.push(Violation::HNotPsd { index, x: *x, min_eig: r.min_eig });
                }
            }
        }
        HamiltonianSpec::Factored(s) => {
            if let Some(limit) = opts.lipschitz {
                let slope = s.lipschitz_estimate();
                if slope > limit {
                    out.push(Violation::BetaJump { slope, limit });
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::Example51;
    use crate::matrix::{from_rows, re};

    #[test]
    fn example_system_is_valid() {
        let sys = Example51::new(1.0).system();
        assert!(validate_system(&sys, &ValidationOptions::default()).is_empty());
    }

    #[test]
    fn scaled_signature_is_rejected() {
        let h = HamiltonianSpec::Grid(Sampled::constant(identity(2), 0.0, 1.0).unwrap());
        let sys = CanonicalSystem::new(identity(2) * re(2.0), (0.0, 1.0), 0.0, h).unwrap();
        let v = validate_system(&sys, &ValidationOptions::default());
        assert!(v.iter().any(|v| matches!(v, Violation::JNotInvolution { .. })));
        assert!(v.iter().any(|v| v.to_string().contains("J² ≠ I")));
    }

    #[test]
    fn negative_sample_is_reported() {
        let good = identity(2);
        let bad = from_rows(&[[re(1.0), re(0.0)], [re(0.0), re(-0.1)]]);
        let h = HamiltonianSpec::Grid(Sampled::new(vec![0.0, 0.5, 1.0], vec![good.clone(), bad, good]).unwrap());
        let sys = CanonicalSystem::new(identity(2), (0.0, 1.0), 0.0, h).unwrap();
        let v = validate_system(&sys, &ValidationOptions::default());
        assert_eq!(v.len(), 1);
        match &v[0] {
            Violation::HNotPsd { index, min_eig, .. } => {
                assert_eq!(*index, 1);
                assert!((min_eig + 0.1).abs() < 1e-14);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn base_point_outside_interval() {
        let sys = Example51::new(1.0).system().with_xi(1.5);
        let v = validate_system(&sys, &ValidationOptions::default());
        assert_eq!(v, vec![Violation::XiOutside { xi: 1.5 }]);
    }

    #[test]
    fn beta_lipschitz_limit() {
        let beta = Sampled::from_fn(vec![0.0, 0.1, 1.0], |x| from_rows(&[[re(1.0), re(10.0 * x)]])).unwrap();
        let j = from_rows(&[[re(0.0), re(1.0)], [re(1.0), re(0.0)]]);
        let sys = CanonicalSystem::new(j, (0.0, 1.0), 0.0, HamiltonianSpec::Factored(beta)).unwrap();
        let opts = ValidationOptions { lipschitz: Some(5.0), ..Default::default() };
        assert!(matches!(validate_system(&sys, &opts)[..], [Violation::BetaJump { .. }]));
    }
}
