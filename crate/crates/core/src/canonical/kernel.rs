use super::{CanonicalSystem, Sampled};
use crate::error::{Error, Result};
use crate::matrix::{norm2, CMatrix};

/// Grid estimate of `sup_{t < x} ||beta(x) J beta(t)*|| / (x - t)`.
#[derive(Debug, Clone)]
pub struct KernelBoundReport {
    /// `+inf` when `beta` is not degenerate.
    pub sup_bound: f64,
    pub argmax_pair: (f64, f64),
    /// `sup ||beta(x) J beta(x)*||` over the samples.
    pub degeneracy_defect: f64,
    pub diagnostic: Option<String>,
}

impl KernelBoundReport {
    pub fn is_finite(&self) -> bool {
        self.sup_bound.is_finite()
    }
}

/// Relative threshold on `||beta J beta*|| / max ||beta||²` above which the
/// factorization counts as non-degenerate.
pub const DEGENERACY_TOL: f64 = 1e-8;

pub fn kernel_bound(sys: &CanonicalSystem) -> Result<KernelBoundReport> {
    let beta = sys
        .hamiltonian()
        .beta()
        .ok_or_else(|| Error::Invalid("kernel bound needs a factored Hamiltonian".into()))?;
    Ok(kernel_bound_of(beta, sys.j(), DEGENERACY_TOL))
}

/// Pairs of adjacent samples play the role of the divided-difference
/// limit on the diagonal.
pub fn kernel_bound_of(beta: &Sampled, j: &CMatrix, degeneracy_tol: f64) -> KernelBoundReport {
    let x = beta.nodes();
    let b = beta.samples();
    let scale = b.iter().map(|m| norm2(m).powi(2)).fold(0.0, f64::max);
    let bj: Vec<CMatrix> = b.iter().map(|m| m * j).collect();
    let degeneracy_defect = bj.iter().zip(b).map(|(p, m)| norm2(&(p * m.adjoint()))).fold(0.0, f64::max);
    if degeneracy_defect > degeneracy_tol * scale.max(1.0) {
        return KernelBoundReport {
            sup_bound: f64::INFINITY,
            argmax_pair: (f64::NAN, f64::NAN),
            degeneracy_defect,
            diagnostic: Some(format!(
                "beta J beta* does not vanish (max {degeneracy_defect:e}); the kernel bound is infinite"
            )),
        };
    }
    let mut sup = 0.0;
    let mut arg = (x[0], x[0]);
    for xi in 1..x.len() {
        for ti in 0..xi {
            let val = norm2(&(&bj[xi] * b[ti].adjoint())) / (x[xi] - x[ti]);
            if val > sup {
                sup = val;
                arg = (x[xi], x[ti]);
            }
        }
    }
    KernelBoundReport { sup_bound: sup, argmax_pair: arg, degeneracy_defect, diagnostic: None }
}
