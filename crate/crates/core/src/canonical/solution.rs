use super::CanonicalSystem;
use crate::error::{Error, Result};
use crate::matrix::{expm, frobenius, identity, min_hermitian_eig, CMatrix, C64, I};
use crate::ode::Rk45;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    Ode,
    ProductIntegral,
}

/// Samples `W(x_j, z)` of a fundamental solution normalized at the base
/// point.
#[derive(Debug, Clone)]
pub struct FundamentalSolution {
    pub z: C64,
    pub grid: Vec<f64>,
    pub values: Vec<CMatrix>,
    pub method: Method,
    pub error_estimate: f64,
}

impl FundamentalSolution {
    pub fn last(&self) -> &CMatrix {
        self.values.last().expect("fundamental solution has at least one sample")
    }

    /// Sample at grid point `x` (exact match).
    pub fn at(&self, x: f64) -> Option<&CMatrix> {
        self.grid.iter().position(|&g| g == x).map(|i| &self.values[i])
    }
}

fn pack(m: &CMatrix) -> Vec<C64> {
    m.as_slice().to_vec()
}

fn unpack(v: &[C64], n: usize) -> CMatrix {
    CMatrix::from_column_slice(n, n, v)
}

/// Integrates `W_x = i (z - x)^{-1} J H W` from `(x0, w0)` to each of the
/// monotone `targets`. No distance check: callers decide how close to the
/// cut they are willing to go.
pub(crate) fn sweep(
    sys: &CanonicalSystem,
    z: C64,
    x0: f64,
    w0: &CMatrix,
    targets: &[f64],
    tol: f64,
) -> Result<(Vec<CMatrix>, f64)> {
    let m = sys.m();
    let j = sys.j().clone();
    let rk = Rk45::new(tol);
    let mut out = vec![CMatrix::zeros(m, m); targets.len()];
    let stats = rk.integrate(
        |x, y, dy| {
            let w = unpack(y, m);
            let d = (&j * sys.h(x) * w) * (I / (z - x));
            dy.copy_from_slice(d.as_slice());
            Ok(())
        },
        x0,
        &pack(w0),
        targets,
        sys.hamiltonian().nodes(),
        |i, y| out[i] = unpack(y, m),
    )?;
    Ok((out, stats.err_sum))
}

/// Integrates from the base point to an ascending `grid` in both
/// directions.
pub(crate) fn integrate_grid(sys: &CanonicalSystem, z: C64, grid: &[f64], tol: f64) -> Result<FundamentalSolution> {
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Invalid("grid must be ascending".into()));
    }
    let xi = sys.xi();
    let split = grid.partition_point(|&x| x < xi);
    let (left, right) = grid.split_at(split);
    let id = identity(sys.m());
    let (right_vals, e1) = sweep(sys, z, xi, &id, right, tol)?;
    let left_rev: Vec<f64> = left.iter().rev().copied().collect();
    let (mut left_vals, e2) = sweep(sys, z, xi, &id, &left_rev, tol)?;
    left_vals.reverse();
    left_vals.extend(right_vals);
    Ok(FundamentalSolution {
        z,
        grid: grid.to_vec(),
        values: left_vals,
        method: Method::Ode,
        error_estimate: e1 + e2,
    })
}

/// Fundamental solution by adaptive Runge–Kutta integration on an
/// ascending grid, with `W(xi, z) = I`.
pub fn fundamental_solution(sys: &CanonicalSystem, z: C64, grid: &[f64], tol: f64) -> Result<FundamentalSolution> {
    sys.check_off_cut(z)?;
    integrate_grid(sys, z, grid, tol)
}

/// Transition matrix from `from` to `to`: the solution at `to` of the
/// system normalized by `W(from) = I`.
pub fn propagate(sys: &CanonicalSystem, z: C64, from: f64, to: f64, tol: f64) -> Result<CMatrix> {
    sys.check_off_cut(z)?;
    let (mut v, _) = sweep(sys, z, from, &identity(sys.m()), &[to], tol)?;
    Ok(v.pop().expect("one target"))
}

fn midpoint_products(sys: &CanonicalSystem, z: C64, partition: &[f64], refine: usize) -> Result<Vec<CMatrix>> {
    let m = sys.m();
    let mut acc = identity(m);
    let mut out = Vec::with_capacity(partition.len());
    out.push(acc.clone());
    for w in partition.windows(2) {
        let h = (w[1] - w[0]) / refine as f64;
        for r in 0..refine {
            let t = w[0] + (r as f64 + 0.5) * h;
            let gen = sys.j() * sys.h(t);
            acc = expm(&gen, I * h / (z - t))? * acc;
        }
        out.push(acc.clone());
    }
    Ok(out)
}

/// Ordered product of matrix exponentials at the partition midpoints,
/// later factors multiplied on the left. The error estimate is the
/// largest change under halving every subinterval; the refined product
/// is returned.
pub fn product_integral(sys: &CanonicalSystem, z: C64, partition: &[f64]) -> Result<FundamentalSolution> {
    sys.check_off_cut(z)?;
    let (a, b) = sys.interval();
    if partition.len() < 2 {
        return Err(Error::Invalid("partition needs at least two breakpoints".into()));
    }
    if partition.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Invalid("partition must be strictly increasing".into()));
    }
    let scale = (b - a).abs().max(1.0);
    if (partition[0] - a).abs() > 1e-12 * scale || (sys.xi() - a).abs() > 1e-12 * scale {
        return Err(Error::Invalid("product integral requires xi = a and a partition starting at a".into()));
    }
    if partition[partition.len() - 1] > b + 1e-12 * scale {
        return Err(Error::Invalid("partition leaves the interval".into()));
    }
    let coarse = midpoint_products(sys, z, partition, 1)?;
    let fine = midpoint_products(sys, z, partition, 2)?;
    let error_estimate = coarse.iter().zip(&fine).map(|(p, q)| frobenius(&(p - q))).fold(0.0, f64::max);
    Ok(FundamentalSolution {
        z,
        grid: partition.to_vec(),
        values: fine,
        method: Method::ProductIntegral,
        error_estimate,
    })
}

/// How far `W` is from the J-expansion (Im z > 0) or J-contraction
/// (Im z < 0) inequality; for real `z` the J-unitarity defect.
pub fn j_monotonicity_defect(w: &FundamentalSolution, j: &CMatrix) -> f64 {
    w.values
        .iter()
        .map(|wx| {
            let form = wx.adjoint() * j * wx - j;
            if w.z.im > 0.0 {
                (-min_hermitian_eig(&form)).max(0.0)
            } else if w.z.im < 0.0 {
                (-min_hermitian_eig(&(-form))).max(0.0)
            } else {
                frobenius(&form)
            }
        })
        .fold(0.0, f64::max)
}
