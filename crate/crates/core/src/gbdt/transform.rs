use super::{transfer_at, GbdtState, GbdtTrajectory, TransferEval};
use crate::canonical::{
    boundary_values, fundamental_solution, propagate, richardson_limit, Limit, BoundaryOptions, BoundaryValueReport, CanonicalSystem, FundamentalSolution,
    HamiltonianSpec, Method, Sampled,
};
use crate::error::{Error, Result};
use crate::matrix::{eigenvalues, frobenius, hermitian_part, identity, norm2, CMatrix, C64, I};
use crate::ode::Rk45;

/// `H~ = w0* H w0` sampled on the trajectory grid; for a factored system
/// the factored form `beta~ = beta w0` is emitted instead.
pub fn transformed_hamiltonian(traj: &GbdtTrajectory) -> Result<HamiltonianSpec> {
    let sys = &traj.system;
    let b = &traj.params.b;
    let j = sys.j();
    let mut values = Vec::with_capacity(traj.states.len());
    for st in &traj.states {
        let w0 = st.w0(b, j)?;
        let v = match sys.hamiltonian().beta_at(st.x) {
            Some(beta) => beta * w0,
            None => hermitian_part(&(w0.adjoint() * sys.h(st.x) * &w0)),
        };
        values.push(v);
    }
    let sampled = Sampled::new(traj.grid.clone(), values)?;
    Ok(if sys.hamiltonian().is_factored() { HamiltonianSpec::Factored(sampled) } else { HamiltonianSpec::Grid(sampled) })
}

/// The transformed system with the sampled [`transformed_hamiltonian`].
pub fn transformed_system(traj: &GbdtTrajectory) -> Result<CanonicalSystem> {
    traj.system.with_hamiltonian(transformed_hamiltonian(traj)?)
}

/// `v(xi, z)^{-1}` through the `J`-property of `w_A`.
fn v_inverse_at(traj: &GbdtTrajectory, st: &GbdtState, z: C64) -> Result<CMatrix> {
    let e = transfer_at(st, &traj.params.b, traj.j(), z)?;
    let ec = transfer_at(st, &traj.params.b, traj.j(), z.conj())?;
    Ok(e.v_inverse(&ec, traj.j()))
}

/// `W~(x, z) = v(x, z) W(x, z) v(xi, z)^{-1}` on an ascending grid.
pub fn transformed_fundamental(traj: &GbdtTrajectory, z: C64, grid: &[f64], tol: f64) -> Result<FundamentalSolution> {
    let w = fundamental_solution(&traj.system, z, grid, tol)?;
    let v_xi_inv = v_inverse_at(traj, &traj.state_at(traj.params.xi)?, z)?;
    let mut values = Vec::with_capacity(grid.len());
    for (&x, wx) in grid.iter().zip(&w.values) {
        let e = transfer_at(&traj.state_at(x)?, &traj.params.b, traj.j(), z)?;
        values.push(&e.v * wx * &v_xi_inv);
    }
    Ok(FundamentalSolution { z, grid: grid.to_vec(), values, method: Method::Ode, error_estimate: w.error_estimate })
}

/// Integrates `(Pi, S, W~)` jointly, with `W~_x = i (z - x)^{-1} J w0* H w0 W~`
/// and `w0` rebuilt from the running `(Pi, S)`.
fn augmented_sweep(traj: &GbdtTrajectory, z: C64, targets: &[f64], tol: f64) -> Result<Vec<CMatrix>> {
    let p = &traj.params;
    let sys = &traj.system;
    let (n, m) = (p.n(), sys.m());
    let j = sys.j().clone();
    let (o_s, o_w) = (n * m, n * m + n * n);
    let start = traj.state_at(p.xi)?;
    let mut y0 = Vec::with_capacity(o_w + m * m);
    y0.extend_from_slice(start.pi.as_slice());
    y0.extend_from_slice(start.s.as_slice());
    y0.extend_from_slice(identity(m).as_slice());
    let mut out = vec![CMatrix::zeros(m, m); targets.len()];
    Rk45::new(tol).integrate(
        |x, y, dy| {
            let pi = CMatrix::from_column_slice(n, m, &y[..o_s]);
            let s = CMatrix::from_column_slice(n, n, &y[o_s..o_w]);
            let wt = CMatrix::from_column_slice(m, m, &y[o_w..]);
            let a = p.a_at(x)?;
            let h = sys.h(x);
            let st = GbdtState { x, a: a.clone(), s: s.clone(), pi: pi.clone(), k: identity(n) };
            let w0 = st.w0(&p.b, &j)?;
            let pjh = &pi * &j * &h;
            let dpi = &a * &pjh * (-I);
            let ds = &pjh * j.adjoint() * pi.adjoint() - (&a * &s + &s * a.adjoint());
            let dw = &j * w0.adjoint() * &h * &w0 * &wt * (I / (z - x));
            dy[..o_s].copy_from_slice(dpi.as_slice());
            dy[o_s..o_w].copy_from_slice(ds.as_slice());
            dy[o_w..].copy_from_slice(dw.as_slice());
            Ok(())
        },
        p.xi,
        &y0,
        targets,
        sys.hamiltonian().nodes(),
        |i, y| out[i] = CMatrix::from_column_slice(m, m, &y[o_w..]),
    )?;
    Ok(out)
}

/// Direct integration of the transformed system, independent of the
/// `v W v^{-1}` representation.
pub fn direct_transformed_solution(traj: &GbdtTrajectory, z: C64, grid: &[f64], tol: f64) -> Result<FundamentalSolution> {
    traj.system.check_off_cut(z)?;
    if grid.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::Invalid("grid must be ascending".into()));
    }
    let xi = traj.params.xi;
    let split = grid.partition_point(|&x| x < xi);
    let (left, right) = grid.split_at(split);
    let right_vals = augmented_sweep(traj, z, right, tol)?;
    let left_rev: Vec<f64> = left.iter().rev().copied().collect();
    let mut values = augmented_sweep(traj, z, &left_rev, tol)?;
    values.reverse();
    values.extend(right_vals);
    Ok(FundamentalSolution { z, grid: grid.to_vec(), values, method: Method::Ode, error_estimate: tol })
}

/// `P = Pi* S^{-1} Pi`, `G0 = -J (i P - H J P + P J* H)`.
fn g0_of(st: &GbdtState, j: &CMatrix, h: &CMatrix) -> Result<CMatrix> {
    let p = st.pi.adjoint() * st.s_solve(&st.pi)?;
    Ok(-(j * (&p * I - h * j * &p + &p * j.adjoint() * h)))
}

/// `G0(x)` with `w0' = G0 w0`.
pub fn g0_eval(traj: &GbdtTrajectory, x: f64) -> Result<CMatrix> {
    let st = traj.state_at(x)?;
    g0_of(&st, traj.j(), &traj.system.h(x))
}

/// `||(w0(x + h) - w0(x - h)) / 2h - G0(x) w0(x)||_F`
pub fn g0_fd_residual(traj: &GbdtTrajectory, x: f64, h: f64) -> Result<f64> {
    let fd = (traj.w0_at(x + h)? - traj.w0_at(x - h)?) / C64::new(2.0 * h, 0.0);
    Ok(frobenius(&(fd - g0_eval(traj, x)? * traj.w0_at(x)?)))
}

/// Grid supremum of `||G0 w0||`, a Lipschitz constant for `w0`.
pub fn lipschitz_m2(traj: &GbdtTrajectory) -> Result<f64> {
    let mut sup = 0.0_f64;
    for st in &traj.states {
        let w0 = st.w0(&traj.params.b, traj.j())?;
        sup = sup.max(norm2(&(g0_of(st, traj.j(), &traj.system.h(st.x))? * w0)));
    }
    Ok(sup)
}

/// Boundary values of the transformed solution by two routes.
#[derive(Debug, Clone)]
pub struct TransformedBoundaryReport {
    /// Limits of the base system.
    pub base: BoundaryValueReport,
    /// `v(x, s) W±(x, s) v(xi, s)^{-1}`
    pub formula: BoundaryValueReport,
    /// Extrapolated limits of the directly integrated transformed system.
    pub direct: BoundaryValueReport,
    /// `||W~+ formula - W~+ direct|| max the same for W~-`
    pub route_difference: f64,
    /// `||jump~ - v(xi, s) jump v(xi, s)^{-1}||_F` on the formula route
    pub jump_conjugation_defect: f64,
    pub v_x: TransferEval,
    pub v_xi_inv: CMatrix,
}

/// Transformed boundary values on the cut between the base point and `x`.
pub fn transformed_boundary_values(
    traj: &GbdtTrajectory,
    x: f64,
    s: f64,
    eta0: f64,
    levels: usize,
    opts: &BoundaryOptions,
    spectrum_margin: f64,
) -> Result<TransformedBoundaryReport> {
    for e in eigenvalues(&traj.params.b)? {
        if (s - e.re).abs() < spectrum_margin {
            return Err(Error::Invalid(format!(
                "s = {s} is within {spectrum_margin} of Re({}{:+}i), an eigenvalue of B",
                e.re, e.im
            )));
        }
    }
    let base = boundary_values(&traj.system, x, s, eta0, levels, opts)?;
    let z = C64::new(s, 0.0);
    let v_x = transfer_at(&traj.state_at(x)?, &traj.params.b, traj.j(), z)?;
    let st_xi = traj.state_at(traj.params.xi)?;
    let v_xi = transfer_at(&st_xi, &traj.params.b, traj.j(), z)?;
    let v_xi_inv = v_xi.v_inverse(&v_xi, traj.j());
    let conj = |w: &CMatrix| &v_x.v * w * &v_xi_inv;
    let lifted = |value: CMatrix| Limit {
        value,
        error: base.extrapolation_error,
        divergent: base.divergent,
        etas: base.eta_sequence.clone(),
    };
    let formula = BoundaryValueReport::from_limits(x, s, lifted(conj(&base.w_plus)), lifted(conj(&base.w_minus)))?;
    let at = |zz: C64| -> Result<CMatrix> { Ok(augmented_sweep(traj, zz, &[x], opts.tol)?.pop().expect("one target")) };
    let plus = richardson_limit(|eta| at(C64::new(s, eta)), eta0, levels)?;
    let minus = richardson_limit(|eta| at(C64::new(s, -eta)), eta0, levels)?;
    let direct = BoundaryValueReport::from_limits(x, s, plus, minus)?;
    let route_difference =
        frobenius(&(&formula.w_plus - &direct.w_plus)).max(frobenius(&(&formula.w_minus - &direct.w_minus)));
    let expected_jump = &v_xi.v * &base.jump * &v_xi_inv;
    let jump_conjugation_defect = frobenius(&(&formula.jump - expected_jump));
    Ok(TransformedBoundaryReport { base, formula, direct, route_difference, jump_conjugation_defect, v_x, v_xi_inv })
}

#[derive(Debug, Clone)]
pub struct BoundednessReport {
    pub max_w: f64,
    pub max_w_tilde: f64,
    pub sup_v_end: f64,
    pub sup_v_base_inv: f64,
    /// `sup ||v(b, z)|| * sup ||v(xi, z)^{-1}||`
    pub constant: f64,
    pub holds: bool,
}

/// Compares `max ||W~(b, z)||` with `C max ||W(b, z)||` on a probe set in
/// one half-plane, `W~` from direct integration.
pub fn boundedness_probe(traj: &GbdtTrajectory, zs: &[C64], tol: f64) -> Result<BoundednessReport> {
    let (_, b) = traj.system.interval();
    let xi = traj.params.xi;
    let st_b = traj.state_at(b)?;
    let st_xi = traj.state_at(xi)?;
    let mut r = BoundednessReport { max_w: 0.0, max_w_tilde: 0.0, sup_v_end: 0.0, sup_v_base_inv: 0.0, constant: 0.0, holds: false };
    for &z in zs {
        let w = propagate(&traj.system, z, xi, b, tol)?;
        let wt = direct_transformed_solution(traj, z, &[b.max(xi)], tol)?;
        r.max_w = r.max_w.max(norm2(&w));
        r.max_w_tilde = r.max_w_tilde.max(norm2(wt.last()));
        r.sup_v_end = r.sup_v_end.max(norm2(&transfer_at(&st_b, &traj.params.b, traj.j(), z)?.v));
        r.sup_v_base_inv = r.sup_v_base_inv.max(norm2(&v_inverse_at(traj, &st_xi, z)?));
    }
    r.constant = r.sup_v_end * r.sup_v_base_inv;
    r.holds = r.max_w_tilde <= r.constant * r.max_w * (1.0 + 1e-8);
    Ok(r)
}
