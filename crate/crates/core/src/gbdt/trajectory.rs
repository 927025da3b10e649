use super::GbdtParams;
use crate::canonical::CanonicalSystem;
use crate::error::{Error, Result};
use crate::matrix::{
    cond1, frobenius, identity, min_hermitian_eig, norm2, re, solve, CMatrix, C64, I, SINGULAR_COND,
};
use crate::ode::Rk45;

/// Parameter matrices at one point.
#[derive(Debug, Clone)]
pub struct GbdtState {
    pub x: f64,
    pub a: CMatrix,
    pub s: CMatrix,
    pub pi: CMatrix,
    pub k: CMatrix,
}

impl GbdtState {
    /// `Q = K S K*`
    pub fn q(&self) -> CMatrix {
        &self.k * &self.s * self.k.adjoint()
    }

    /// `||A S - S A* - i Pi J Pi*||_F`
    pub fn identity_residual(&self, j: &CMatrix) -> f64 {
        frobenius(&(&self.a * &self.s - &self.s * self.a.adjoint() - &self.pi * j * self.pi.adjoint() * I))
    }

    /// `A(x)^{-1} = B - x I`
    pub fn a_inv(&self, b: &CMatrix) -> CMatrix {
        b - identity(b.nrows()) * re(self.x)
    }

    /// `S^{-1} rhs`, with the singular case reported at this `x`.
    pub fn s_solve(&self, rhs: &CMatrix) -> Result<CMatrix> {
        solve(&self.s, rhs).map_err(|e| match e {
            Error::Singular { cond } => Error::SingularS { x: self.x, cond },
            other => other,
        })
    }

    /// `w0 = I - i J Pi* S^{-1} A^{-1} Pi`
    pub fn w0(&self, b: &CMatrix, j: &CMatrix) -> Result<CMatrix> {
        let m = j.nrows();
        Ok(identity(m) - j * self.pi.adjoint() * self.s_solve(&(self.a_inv(b) * &self.pi))? * I)
    }
}

/// Evolved parameters on a grid together with the identity diagnostics.
#[derive(Debug, Clone)]
pub struct GbdtTrajectory {
    pub params: GbdtParams,
    pub system: CanonicalSystem,
    pub tol: f64,
    pub grid: Vec<f64>,
    pub states: Vec<GbdtState>,
    /// Max over the grid of the identity residual.
    pub identity_residual: f64,
    /// Smallest eigenvalue of (the Hermitian part of) `S` over the grid.
    pub min_eig_s: f64,
    pub max_cond_s: f64,
}

struct Layout {
    n: usize,
    m: usize,
}

impl Layout {
    fn len(&self) -> usize {
        self.n * self.m + 2 * self.n * self.n
    }

    fn pack(&self, pi: &CMatrix, s: &CMatrix, k: &CMatrix) -> Vec<C64> {
        let mut v = Vec::with_capacity(self.len());
        v.extend_from_slice(pi.as_slice());
        v.extend_from_slice(s.as_slice());
        v.extend_from_slice(k.as_slice());
        v
    }

    fn unpack(&self, y: &[C64]) -> (CMatrix, CMatrix, CMatrix) {
        let (n, m) = (self.n, self.m);
        let pi = CMatrix::from_column_slice(n, m, &y[..n * m]);
        let s = CMatrix::from_column_slice(n, n, &y[n * m..n * m + n * n]);
        let k = CMatrix::from_column_slice(n, n, &y[n * m + n * n..]);
        (pi, s, k)
    }
}

/// Joint integration of `Pi_x = -i A Pi J H`, `S_x = Pi J H J* Pi* - (A S + S A*)`
/// and `K_x = K A` from `(x0, state0)` to each monotone target.
fn sweep(
    p: &GbdtParams,
    sys: &CanonicalSystem,
    start: &GbdtState,
    targets: &[f64],
    tol: f64,
) -> Result<Vec<GbdtState>> {
    let lay = Layout { n: p.n(), m: sys.m() };
    let j = sys.j().clone();
    let rk = Rk45::new(tol);
    let mut out: Vec<Option<GbdtState>> = vec![None; targets.len()];
    let y0 = lay.pack(&start.pi, &start.s, &start.k);
    rk.integrate(
        |x, y, dy| {
            let (pi, s, k) = lay.unpack(y);
            let a = p.a_at(x)?;
            let h = sys.h(x);
            let pjh = &pi * &j * &h;
            let dpi = &a * &pjh * (-I);
            let ds = &pjh * j.adjoint() * pi.adjoint() - (&a * &s + &s * a.adjoint());
            let dk = &k * &a;
            let packed = lay.pack(&dpi, &ds, &dk);
            dy.copy_from_slice(&packed);
            Ok(())
        },
        start.x,
        &y0,
        targets,
        sys.hamiltonian().nodes(),
        |i, y| {
            let (pi, s, k) = lay.unpack(y);
            let x = targets[i];
            // A is evaluated in closed form; targets avoid sigma(B) by validation
            let a = p.a_at(x).unwrap_or_else(|_| CMatrix::from_element(lay.n, lay.n, C64::new(f64::NAN, 0.0)));
            out[i] = Some(GbdtState { x, a, s, pi, k });
        },
    )?;
    Ok(out.into_iter().map(|s| s.expect("every target visited")).collect())
}

fn initial_state(p: &GbdtParams) -> Result<GbdtState> {
    Ok(GbdtState { x: p.xi, a: p.a_at(p.xi)?, s: p.s0.clone(), pi: p.pi0.clone(), k: identity(p.n()) })
}

/// Evolves the parameters from the base point to an ascending grid (in
/// both directions). Fails with the location of the first grid point
/// where `S` is singular to working precision.
pub fn evolve(p: &GbdtParams, sys: &CanonicalSystem, grid: &[f64], tol: f64) -> Result<GbdtTrajectory> {
    if grid.is_empty() || grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Invalid("trajectory grid must be non-empty and strictly increasing".into()));
    }
    if p.pi0.shape() != (p.n(), sys.m()) || p.s0.shape() != (p.n(), p.n()) {
        return Err(Error::Shape { op: "evolve", detail: "parameter shapes do not match the system".into() });
    }
    let start = initial_state(p)?;
    let split = grid.partition_point(|&x| x < p.xi);
    let (left, right) = grid.split_at(split);
    let right_states = sweep(p, sys, &start, right, tol)?;
    let left_rev: Vec<f64> = left.iter().rev().copied().collect();
    let mut states = sweep(p, sys, &start, &left_rev, tol)?;
    states.reverse();
    states.extend(right_states);

    let j = sys.j();
    let mut identity_residual = 0.0_f64;
    let mut min_eig_s = f64::INFINITY;
    let mut max_cond_s = 0.0_f64;
    // S is only known to about the integration tolerance, so a smallest
    // singular value below that (relative to the size of S) is a zero.
    let scale = states.iter().map(|st| norm2(&st.s)).fold(norm2(&p.s0), f64::max);
    let floor = (100.0 * tol).max(1e-13) * scale;
    for st in &states {
        let cond = cond1(&st.s);
        let smin = st.s.clone().singular_values().min();
        if !cond.is_finite() || cond > SINGULAR_COND || smin <= floor {
            return Err(Error::SingularS { x: st.x, cond: if smin <= floor { scale / smin } else { cond } });
        }
        max_cond_s = max_cond_s.max(cond);
        identity_residual = identity_residual.max(st.identity_residual(j));
        min_eig_s = min_eig_s.min(min_hermitian_eig(&st.s));
    }
    Ok(GbdtTrajectory {
        params: p.clone(),
        system: sys.clone(),
        tol,
        grid: grid.to_vec(),
        states,
        identity_residual,
        min_eig_s,
        max_cond_s,
    })
}

impl GbdtTrajectory {
    pub fn n(&self) -> usize {
        self.params.n()
    }

    pub fn j(&self) -> &CMatrix {
        self.system.j()
    }

    /// State at `x`: the stored sample on a grid hit, otherwise a short
    /// integration from the nearest sample.
    pub fn state_at(&self, x: f64) -> Result<GbdtState> {
        if let Some(i) = self.grid.iter().position(|&g| g == x) {
            return Ok(self.states[i].clone());
        }
        if x == self.params.xi {
            return initial_state(&self.params);
        }
        let i = self.grid.partition_point(|&g| g < x);
        let nearest = match (i.checked_sub(1), self.grid.get(i)) {
            (Some(l), Some(&r)) if (r - x).abs() < (x - self.grid[l]).abs() => i,
            (Some(l), _) => l,
            (None, _) => 0,
        };
        let mut v = sweep(&self.params, &self.system, &self.states[nearest], &[x], self.tol)?;
        Ok(v.pop().expect("one target"))
    }

    pub fn w0_at(&self, x: f64) -> Result<CMatrix> {
        self.state_at(x)?.w0(&self.params.b, self.j())
    }

    pub fn q(&self) -> Vec<CMatrix> {
        self.states.iter().map(GbdtState::q).collect()
    }
}

#[derive(Debug, Clone)]
pub struct PositivityReport {
    /// Min eigenvalue of `S` over grid points at or right of the base point.
    pub min_eig_s: f64,
    pub s_positive: bool,
    /// Min over consecutive grid pairs of the smallest eigenvalue of `Q(x_{j+1}) - Q(x_j)`.
    pub q_increment_min_eig: f64,
    pub q_monotone: bool,
    /// Min over the grid of the smallest eigenvalue of `K* S0^{-1} K - S^{-1}`,
    /// the bound implied by `S >= K^{-1} S0 K^{-*}`.
    pub inverse_bound_min_eig: f64,
    pub inverse_bound_holds: bool,
    /// The same with the factors in the order `K S0^{-1} K*`; reported for
    /// comparison, it coincides with the bound above only when `K` and
    /// `S0` commute (e.g. `n = 1`).
    pub swapped_bound_min_eig: f64,
    /// Max over the grid of `||S^{-1}|| - ||K* S0^{-1} K||`.
    pub norm_bound_excess: f64,
    pub tol: f64,
}

impl PositivityReport {
    pub fn holds(&self) -> bool {
        self.s_positive && self.q_monotone && self.inverse_bound_holds && self.norm_bound_excess <= 10.0 * self.tol
    }
}

/// Checks `S > 0`, monotone `Q = K S K*` and `S^{-1} <= K* S0^{-1} K`
/// along the grid (the last bound only right of the base point, where it
/// is implied by monotonicity of `Q`).
pub fn positivity_report(traj: &GbdtTrajectory) -> Result<PositivityReport> {
    let tol = traj.tol;
    let xi = traj.params.xi;
    let n = traj.n();
    let s0_inv = solve(&traj.params.s0, &identity(n))?;
    let mut min_eig_s = f64::INFINITY;
    let mut inverse_bound_min_eig = f64::INFINITY;
    let mut swapped_bound_min_eig = f64::INFINITY;
    let mut norm_bound_excess = f64::NEG_INFINITY;
    for st in traj.states.iter().filter(|s| s.x >= xi) {
        min_eig_s = min_eig_s.min(min_hermitian_eig(&st.s));
        let s_inv = st.s_solve(&identity(n))?;
        let bound = st.k.adjoint() * &s0_inv * &st.k;
        let swapped = &st.k * &s0_inv * st.k.adjoint();
        inverse_bound_min_eig = inverse_bound_min_eig.min(min_hermitian_eig(&(&bound - &s_inv)));
        swapped_bound_min_eig = swapped_bound_min_eig.min(min_hermitian_eig(&(&swapped - &s_inv)));
        norm_bound_excess = norm_bound_excess.max(norm2(&s_inv) - norm2(&bound));
    }
    let q = traj.q();
    let q_increment_min_eig =
        q.windows(2).map(|w| min_hermitian_eig(&(&w[1] - &w[0]))).fold(f64::INFINITY, f64::min);
    Ok(PositivityReport {
        min_eig_s,
        s_positive: min_eig_s > 0.0,
        q_increment_min_eig,
        q_monotone: q_increment_min_eig >= -10.0 * tol,
        inverse_bound_min_eig,
        inverse_bound_holds: inverse_bound_min_eig >= -10.0 * tol,
        swapped_bound_min_eig,
        norm_bound_excess,
        tol,
    })
}
