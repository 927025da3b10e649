//! Closed forms for the rank-one constant Hamiltonian `H = beta* beta`,
//! `beta = [1, i]`, `J = [[0, 1], [1, 0]]` on `[0, b]` with base point 0,
//! and for its GBDT transforms with diagonal `B`. These are the oracles
//! the generic engine is tested against.
//!
//! Logarithms follow one fixed branch: `ln(b_i - x)` starts at the
//! principal value for `x = 0` and is continued continuously in `x`;
//! `ln(z / (z - x))` starts at `ln 1 = 0`.

use std::f64::consts::PI;

use crate::canonical::{CanonicalSystem, HamiltonianSpec};
use crate::error::{Error, Result};
use crate::gbdt::GbdtParams;
use crate::matrix::{from_rows, identity, re, solve, CMatrix, C64, I};

/// The constant rank-one example on `[0, b]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Example51 {
    pub b: f64,
}

impl Example51 {
    pub fn new(b: f64) -> Self {
        Self { b }
    }

    pub fn beta() -> CMatrix {
        from_rows(&[[re(1.0), I]])
    }

    pub fn j() -> CMatrix {
        from_rows(&[[re(0.0), re(1.0)], [re(1.0), re(0.0)]])
    }

    /// `T = [beta; beta J]`
    pub fn t() -> CMatrix {
        from_rows(&[[re(1.0), I], [I, re(1.0)]])
    }

    pub fn t_inv() -> CMatrix {
        from_rows(&[[re(0.5), -I * 0.5], [-I * 0.5, re(0.5)]])
    }

    pub fn system(&self) -> CanonicalSystem {
        let h = HamiltonianSpec::constant_beta(Self::beta(), 0.0, self.b).expect("valid constant grid");
        CanonicalSystem::new(Self::j(), (0.0, self.b), 0.0, h).expect("consistent shapes")
    }
}

/// `ln(z / (z - x))` on the branch with value 0 at `x = 0`. For `z` off
/// the segment `[0, x]` the ratio never crosses the negative axis, so the
/// principal logarithm of the ratio is that branch.
pub fn log_ratio(x: f64, z: C64) -> Result<C64> {
    if z.im == 0.0 && z.re >= x.min(0.0) && z.re <= x.max(0.0) {
        return Err(Error::NearCut { re: z.re, im: z.im, a: x.min(0.0), b: x.max(0.0) });
    }
    Ok((z / (z - x)).ln())
}

/// Fixed branch of `ln(b_i - x)`, anchored at the principal value of
/// `ln b_i`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogBranch {
    pub point: C64,
    pub base: C64,
}

impl LogBranch {
    pub fn new(point: C64) -> Self {
        Self { point, base: point.ln() }
    }

    pub fn eval(&self, x: f64) -> C64 {
        let w = self.point - x;
        let p = w.ln();
        // unwrap towards the anchor; b_i - x stays in one half-plane so
        // the continuation never moves by more than pi
        let turns = ((self.base.im - p.im) / (2.0 * PI)).round();
        C64::new(p.re, p.im + 2.0 * PI * turns)
    }
}

/// `W(x, z) = T^{-1} [beta; 2 i ln(z/(z-x)) beta + beta J]`.
pub fn example51_w(x: f64, z: C64, b: f64) -> Result<CMatrix> {
    if x < 0.0 || x > b {
        return Err(Error::Invalid(format!("x = {x} outside [0, {b}]")));
    }
    let l = log_ratio(x, z)?;
    let beta = Example51::beta();
    let lower = &beta * (I * 2.0 * l) + &beta * Example51::j();
    let mut stack = CMatrix::zeros(2, 2);
    stack.row_mut(0).copy_from(&beta.row(0));
    stack.row_mut(1).copy_from(&lower.row(0));
    Ok(Example51::t_inv() * stack)
}

/// Expanded form `[[1 + L, i L], [i L, 1 - L]]`, `L = ln(z / (z - x))`.
pub fn example51_w_expanded(x: f64, z: C64) -> Result<CMatrix> {
    let l = log_ratio(x, z)?;
    Ok(from_rows(&[[re(1.0) + l, I * l], [I * l, re(1.0) - l]]))
}

/// `R = I + pi J beta* beta` and `R²`, for `0 < s < x`.
pub fn example51_jump(s: f64, x: f64) -> Result<(CMatrix, CMatrix)> {
    if !(s > 0.0 && s < x) {
        return Err(Error::Invalid(format!("jump defined for 0 < s < x, got s = {s}, x = {x}")));
    }
    let jbb = Example51::j() * Example51::beta().adjoint() * Example51::beta();
    let r = identity(2) + &jbb * re(PI);
    let r2 = identity(2) + jbb * re(2.0 * PI);
    Ok((r, r2))
}

/// GBDT parameters of the example: `B = diag(b_i)` and the vectors
/// `g = Pi(0) [-i; 1]`, `h = Pi(0) [1; -i] / 2 - {i g_i ln b_i}`.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalGbdt {
    pub b: Vec<C64>,
    pub g: Vec<C64>,
    pub h: Vec<C64>,
    branches: Vec<LogBranch>,
}

impl DiagonalGbdt {
    pub fn new(b: Vec<C64>, g: Vec<C64>, h: Vec<C64>) -> Result<Self> {
        if b.is_empty() || b.len() != g.len() || b.len() != h.len() {
            return Err(Error::Invalid("b, g, h must be non-empty and of equal length".into()));
        }
        let branches = b.iter().map(|&bi| LogBranch::new(bi)).collect();
        Ok(Self { b, g, h, branches })
    }

    /// Inverts the `g, h` correspondence for a given `Pi(0)` (n x 2).
    pub fn from_pi0(b: Vec<C64>, pi0: &CMatrix) -> Result<Self> {
        if pi0.nrows() != b.len() || pi0.ncols() != 2 {
            return Err(Error::Shape { op: "DiagonalGbdt::from_pi0", detail: format!("Pi(0) is {:?}", pi0.shape()) });
        }
        let g: Vec<C64> = (0..b.len()).map(|i| -I * pi0[(i, 0)] + pi0[(i, 1)]).collect();
        let h = (0..b.len())
            .map(|i| 0.5 * (pi0[(i, 0)] - I * pi0[(i, 1)]) - I * g[i] * LogBranch::new(b[i]).eval(0.0))
            .collect();
        Self::new(b, g, h)
    }

    pub fn n(&self) -> usize {
        self.b.len()
    }

    pub fn b_matrix(&self) -> CMatrix {
        CMatrix::from_diagonal(&nalgebra::DVector::from_vec(self.b.clone()))
    }

    pub fn log_b(&self, i: usize, x: f64) -> C64 {
        self.branches[i].eval(x)
    }

    /// `{i g_i ln(b_i - x)} + h`, so that `Pi(x) beta* = 2 c(x)`.
    pub fn c_vec(&self, x: f64) -> Vec<C64> {
        (0..self.n()).map(|i| I * self.g[i] * self.log_b(i, x) + self.h[i]).collect()
    }

    /// `Pi(x) = [2 c(x), g] T / 2`.
    pub fn pi(&self, x: f64) -> CMatrix {
        let n = self.n();
        let cv = self.c_vec(x);
        let mut left = CMatrix::zeros(n, 2);
        for i in 0..n {
            left[(i, 0)] = 2.0 * cv[i];
            left[(i, 1)] = self.g[i];
        }
        left * Example51::t() * re(0.5)
    }

    pub fn pi0(&self) -> CMatrix {
        self.pi(0.0)
    }

    /// `Pi J Pi* = c g* + g c*`.
    pub fn pjp(&self, x: f64) -> CMatrix {
        let n = self.n();
        let cv = self.c_vec(x);
        CMatrix::from_fn(n, n, |i, j| cv[i] * self.g[j].conj() + self.g[i] * cv[j].conj())
    }

    /// Entrywise solution of `A S - S A* = i Pi J Pi*` for diagonal `A`.
    pub fn s(&self, x: f64) -> Result<CMatrix> {
        let n = self.n();
        let pjp = self.pjp(x);
        let mut s = CMatrix::zeros(n, n);
        for i in 0..n {
            for j in 0..n {
                let denom = self.b[i] - self.b[j].conj();
                if denom.norm() < 1e-12 * (1.0 + self.b[i].norm()) {
                    return Err(Error::Degenerate(format!(
                        "b_{i} = conj(b_{j}); S has no closed form here, evolve it with the ODE engine instead"
                    )));
                }
                s[(i, j)] = (self.b[i] - x) * (self.b[j].conj() - x) / (I * denom) * pjp[(i, j)];
            }
        }
        Ok(s)
    }

    /// Parameters for the generic engine at the base point 0.
    pub fn params(&self) -> Result<GbdtParams> {
        Ok(GbdtParams { b: self.b_matrix(), s0: self.s(0.0)?, pi0: self.pi0(), xi: 0.0 })
    }
}

#[derive(Debug, Clone)]
pub struct ClosedForms {
    pub pi: CMatrix,
    pub pjp: CMatrix,
    pub s: CMatrix,
    pub w0: CMatrix,
    pub beta_tilde: CMatrix,
    pub h_tilde: CMatrix,
}

/// `Pi, Pi J Pi*, S, w0, beta~ = beta w0` and `H~ = beta~* beta~` at `x`.
pub fn example51_closed_forms(p: &DiagonalGbdt, x: f64) -> Result<ClosedForms> {
    let n = p.n();
    let pi = p.pi(x);
    let pjp = p.pjp(x);
    let s = p.s(x)?;
    let bx = p.b_matrix() - identity(n) * re(x);
    let core = solve(&s, &(&bx * &pi)).map_err(|e| match e {
        Error::Singular { cond } => Error::SingularS { x, cond },
        other => other,
    })?;
    let cv = p.c_vec(x);
    let mut rows = CMatrix::zeros(2, n);
    for i in 0..n {
        rows[(0, i)] = p.g[i].conj();
        rows[(1, i)] = 2.0 * cv[i].conj();
    }
    let w0 = identity(2) - Example51::t_inv() * rows * &core * I;
    let g_row = CMatrix::from_fn(1, n, |_, i| p.g[i].conj());
    let beta_tilde = Example51::beta() - g_row * &core * I;
    let h_tilde = beta_tilde.adjoint() * &beta_tilde;
    Ok(ClosedForms { pi, pjp, s, w0, beta_tilde, h_tilde })
}

#[derive(Debug, Clone)]
pub struct N1ClosedForms {
    pub s: C64,
    pub beta_tilde: CMatrix,
    /// The `h = 0` simplification, when it applies.
    pub beta_tilde_simplified: Option<CMatrix>,
    pub w0: CMatrix,
    pub wa: CMatrix,
    pub v: CMatrix,
}

struct N1Pieces {
    ell: C64,
    d: C64,
    /// `T^{-1} [conj g; 2 conj(i g ell + h)]`
    col: CMatrix,
    /// `[2 (i g ell + h), g] T`
    row: CMatrix,
}

fn n1_pieces(bb: C64, g: C64, h: C64, x: f64) -> Result<N1Pieces> {
    if bb.im == 0.0 {
        return Err(Error::Invalid("the scalar example needs B off the real axis".into()));
    }
    if g == C64::new(0.0, 0.0) {
        return Err(Error::SingularS { x, cond: f64::INFINITY });
    }
    let ell = LogBranch::new(bb).eval(x);
    // invertibility: Im ln(B - x) != Re(h / g)
    let gap = ell.im - (h / g).re;
    if gap.abs() < 1e-12 * (1.0 + ell.im.abs()) {
        return Err(Error::SingularS { x, cond: f64::INFINITY });
    }
    let d = g.norm_sqr() * (ell - ell.conj()) - I * h * g.conj() - I * g * h.conj();
    let cx = I * g * ell + h;
    let col = Example51::t_inv() * from_rows(&[[g.conj()], [2.0 * cx.conj()]]);
    let row = from_rows(&[[2.0 * cx, g]]) * Example51::t();
    Ok(N1Pieces { ell, d, col, row })
}

/// Scalar (`n = 1`) closed forms for `S, beta~, w0, w_A, v` with
/// `B = bb`, vectors `g, h`.
pub fn n1_closed_forms(bb: C64, g: C64, h: C64, x: f64, z: C64) -> Result<N1ClosedForms> {
    if z == bb {
        return Err(Error::OnSpectrum { re: z.re, im: z.im });
    }
    let N1Pieces { ell, d, col, row } = n1_pieces(bb, g, h, x)?;
    let bdiff = bb - bb.conj();
    let s = d * (bb - x) * (bb.conj() - x) / bdiff;
    let outer = &col * &row;
    let w0 = identity(2) - &outer * (I * bdiff / (2.0 * (bb.conj() - x) * d));
    let wa = identity(2) - &outer * (I * (x - z) * bdiff / (2.0 * (bb - z) * (bb.conj() - x) * d));
    let beta_tilde = Example51::beta() - &row * (I * g.conj() * bdiff / (2.0 * (bb.conj() - x) * d));
    let beta_tilde_simplified = (h == C64::new(0.0, 0.0)).then(|| {
        let r = from_rows(&[[2.0 * I * ell, re(1.0)]]) * Example51::t();
        Example51::beta() - r * (bdiff / (4.0 * (bb.conj() - x) * ell.im))
    });
    let j = Example51::j();
    let v = (identity(2) * (x - z) + &j * w0.adjoint() * &j * (bb - x)) / (bb - z);
    Ok(N1ClosedForms { s, beta_tilde, beta_tilde_simplified, w0, wa, v })
}

/// `v(x, z) = w0(x)^{-1} w_A(x, z)` from the closed forms, with
/// `w0^{-1} = J w0* J`.
fn v_closed(p: &DiagonalGbdt, forms: &ClosedForms, x: f64, z: C64) -> Result<CMatrix> {
    let n = p.n();
    let bz = p.b_matrix() - identity(n) * z;
    let res = (p.b_matrix() - identity(n) * re(x)) * solve(&bz, &forms.pi).map_err(|_| Error::OnSpectrum {
        re: z.re,
        im: z.im,
    })? * (x - z);
    let j = Example51::j();
    let wa = identity(2) - &j * forms.pi.adjoint() * solve(&forms.s, &res)? * I;
    Ok(&j * forms.w0.adjoint() * &j * wa)
}

/// `W~(x, z) = v(x, z) W(x, z) v(0, z)^{-1}` from closed forms only.
pub fn transformed_w_explicit(p: &DiagonalGbdt, x: f64, z: C64, b: f64) -> Result<CMatrix> {
    let w = example51_w(x, z, b)?;
    let vx = v_closed(p, &example51_closed_forms(p, x)?, x, z)?;
    let f0 = example51_closed_forms(p, 0.0)?;
    // v^{-1} = w_A^{-1} w0 = J w_A(conj z)* J w0
    let v0_conj = v_closed(p, &f0, 0.0, z.conj())?;
    let j = Example51::j();
    let wa0_conj = &f0.w0 * v0_conj;
    let v0_inv = &j * wa0_conj.adjoint() * &j * &f0.w0;
    Ok(vx * w * v0_inv)
}

/// Scalar variant of [`transformed_w_explicit`] built on `v` in the form
/// `((x - z) I + (B - x) J w0* J) / (B - z)`.
pub fn transformed_w_explicit_n1(bb: C64, g: C64, h: C64, x: f64, z: C64, b: f64) -> Result<CMatrix> {
    let w = example51_w(x, z, b)?;
    let at_x = n1_closed_forms(bb, g, h, x, z)?;
    let at_0 = n1_closed_forms(bb, g, h, 0.0, z.conj())?;
    let j = Example51::j();
    let v0_inv = &j * at_0.wa.adjoint() * &j * n1_closed_forms(bb, g, h, 0.0, z)?.w0;
    Ok(at_x.v * w * v0_inv)
}


#[cfg(test)]
mod tests {
    use super::*;
    use crate::matrix::{c, frobenius};

    fn sample_params() -> DiagonalGbdt {
        DiagonalGbdt::new(vec![c(0.3, 1.0), c(-0.5, -0.7), c(2.0, 0.4)], vec![c(1.0, 0.2), c(-0.4, 0.5), c(0.3, -0.8)], vec![
            c(0.1, -0.3),
            c(0.2, 0.2),
            c(-0.6, 0.1),
        ])
        .unwrap()
    }

    #[test]
    fn t_identities() {
        let t = Example51::t();
        let j = Example51::j();
        assert!(frobenius(&(&t * &j * t.adjoint() - &j * re(2.0))) == 0.0);
        assert!(frobenius(&(&t * Example51::t_inv() - identity(2))) == 0.0);
        let b = Example51::beta();
        assert!(frobenius(&(&b * &j * b.adjoint())) == 0.0);
    }

    #[test]
    fn w_at_zero_is_identity() {
        let w = example51_w(0.0, c(0.3, 0.8), 1.0).unwrap();
        assert!(frobenius(&(w - identity(2))) < 1e-15);
    }

    #[test]
    fn expanded_form_matches_stack_form() {
        for &(x, z) in &[(0.5, c(0.2, 1.0)), (1.0, c(-1.0, -0.3)), (0.7, c(3.0, 0.0))] {
            let a = example51_w(x, z, 1.0).unwrap();
            let b = example51_w_expanded(x, z).unwrap();
            assert!(frobenius(&(a - b)) < 1e-14);
        }
    }

    #[test]
    fn frozen_value_from_independent_oracle() {
        let w = example51_w(0.5, c(-1.0, 0.5), 1.0).unwrap();
        let want = from_rows(&[
            [c(0.65342640972002735, -0.14189705460416392), c(0.14189705460416392, -0.34657359027997265)],
            [c(0.14189705460416392, -0.34657359027997265), c(1.3465735902799727, 0.14189705460416392)],
        ]);
        assert!(frobenius(&(w - want)) < 1e-14);
    }

    #[test]
    fn evaluation_on_the_cut_is_rejected() {
        assert!(matches!(example51_w(0.8, re(0.3), 1.0), Err(Error::NearCut { .. })));
        // real z beyond x is fine
        assert!(example51_w(0.8, re(0.9), 1.0).is_ok());
    }

    #[test]
    fn jump_values() {
        let (r, r2) = example51_jump(0.3, 1.0).unwrap();
        let want_r = from_rows(&[[c(1.0, -PI), re(PI)], [re(PI), c(1.0, PI)]]);
        let want_r2 = from_rows(&[[c(1.0, -2.0 * PI), re(2.0 * PI)], [re(2.0 * PI), c(1.0, 2.0 * PI)]]);
        assert!(frobenius(&(&r - want_r)) < 1e-14);
        assert!(frobenius(&(&r2 - want_r2)) < 1e-14);
        assert!(frobenius(&(&r * &r - &r2)) < 1e-13);
        assert!(example51_jump(0.0, 1.0).is_err());
        assert!(example51_jump(1.0, 1.0).is_err());
    }

    #[test]
    fn g_h_round_trip() {
        let p = sample_params();
        let back = DiagonalGbdt::from_pi0(p.b.clone(), &p.pi0()).unwrap();
        for i in 0..p.n() {
            assert!((back.g[i] - p.g[i]).norm() < 1e-14);
            assert!((back.h[i] - p.h[i]).norm() < 1e-14);
        }
    }

    #[test]
    fn frozen_pi0_for_scalar_case() {
        let p = DiagonalGbdt::new(vec![I], vec![re(1.0)], vec![re(0.0)]).unwrap();
        let want = from_rows(&[[c(-PI / 2.0, 0.5), c(0.5, -PI / 2.0)]]);
        assert!(frobenius(&(p.pi0() - want)) < 1e-15);
        assert!((p.s(0.0).unwrap()[(0, 0)] - re(PI / 2.0)).norm() < 1e-15);
    }

    #[test]
    fn identity_and_w0_j_unitarity() {
        let p = sample_params();
        let j = Example51::j();
        for x in [0.0, 0.3, 0.7, 1.0] {
            let f = example51_closed_forms(&p, x).unwrap();
            let n = p.n();
            let a = crate::matrix::inverse(&(p.b_matrix() - identity(n) * re(x))).unwrap();
            let resid = &a * &f.s - &f.s * a.adjoint() - &f.pi * &j * f.pi.adjoint() * I;
            assert!(frobenius(&resid) <= 1e-12 * (1.0 + frobenius(&f.s)), "{x}: {}", frobenius(&resid));
            assert!(frobenius(&(&f.pjp - &f.pi * &j * f.pi.adjoint())) < 1e-13);
            assert!(frobenius(&(&f.w0 * &j * f.w0.adjoint() - &j)) <= 1e-10);
            assert!(frobenius(&(&f.h_tilde - f.w0.adjoint() * Example51::beta().adjoint() * Example51::beta() * &f.w0)) < 1e-11);
        }
    }

    #[test]
    fn closed_forms_satisfy_their_differential_relations() {
        let p = sample_params();
        let j = Example51::j();
        let hm = Example51::beta().adjoint() * Example51::beta();
        let n = p.n();
        let h = 1e-4;
        for x in [0.2, 0.5, 0.9] {
            let a = crate::matrix::inverse(&(p.b_matrix() - identity(n) * re(x))).unwrap();
            let pi = p.pi(x);
            let s = p.s(x).unwrap();
            let dpi = (p.pi(x + h) - p.pi(x - h)) / re(2.0 * h);
            let ds = (p.s(x + h).unwrap() - p.s(x - h).unwrap()) / re(2.0 * h);
            let rhs_pi = &a * &pi * &j * &hm * (-I);
            let rhs_s = &pi * &j * &hm * &j * pi.adjoint() - (&a * &s + &s * a.adjoint());
            assert!(frobenius(&(dpi - rhs_pi)) < 1e-6);
            assert!(frobenius(&(ds - rhs_s)) < 1e-6);
        }
    }

    #[test]
    fn branch_is_continuous() {
        for bi in [c(0.5, 0.05), c(-0.2, -0.5), c(-1.0, 0.0), c(3.0, 0.0)] {
            let br = LogBranch::new(bi);
            let mut prev = br.eval(0.0);
            assert!((prev - bi.ln()).norm() < 1e-15);
            for k in 1..=200 {
                let cur = br.eval(k as f64 / 200.0);
                assert!((cur.im - prev.im).abs() < 1.0, "jump at {k} for {bi}");
                prev = cur;
            }
        }
    }

    #[test]
    fn degenerate_b_rejected() {
        let p = DiagonalGbdt::new(vec![c(0.5, 1.0), c(0.5, -1.0)], vec![re(1.0), re(1.0)], vec![re(0.0), re(0.0)]).unwrap();
        assert!(matches!(p.s(0.2), Err(Error::Degenerate(_))));
    }

    #[test]
    fn scalar_forms_agree_with_general_forms() {
        let (bb, g, h) = (c(0.4, 0.9), c(0.8, -0.3), c(0.2, 0.1));
        let p = DiagonalGbdt::new(vec![bb], vec![g], vec![h]).unwrap();
        for x in [0.0, 0.4, 1.0] {
            let z = c(0.3, 2.0);
            let n1 = n1_closed_forms(bb, g, h, x, z).unwrap();
            let f = example51_closed_forms(&p, x).unwrap();
            assert!((n1.s - f.s[(0, 0)]).norm() < 1e-13);
            assert!(frobenius(&(&n1.w0 - &f.w0)) < 1e-12);
            assert!(frobenius(&(&n1.beta_tilde - &f.beta_tilde)) < 1e-12);
            assert!(n1.beta_tilde_simplified.is_none());
            let v = v_closed(&p, &f, x, z).unwrap();
            assert!(frobenius(&(&n1.v - v)) < 1e-12);
        }
    }

    #[test]
    fn simplified_beta_matches_when_h_vanishes() {
        for x in [0.0, 0.25, 0.5, 1.0] {
            let f = n1_closed_forms(I, re(1.0), re(0.0), x, c(0.0, 2.0)).unwrap();
            let simp = f.beta_tilde_simplified.unwrap();
            assert!(frobenius(&(simp - &f.beta_tilde)) < 1e-14);
        }
    }

    #[test]
    fn scalar_frozen_values() {
        // mpmath ODE integration (tests/oracles/closed_form_oracle.py)
        let f = n1_closed_forms(I, re(1.0), re(0.0), 0.5, c(0.0, 2.0)).unwrap();
        assert!((f.s - re(2.5430549197446284)).norm() < 1e-13);
        let v = from_rows(&[[c(2.0, 1.917678988530734), re(-2.1086049794162851)], [re(-2.2182878010404332), c(2.0, -1.917678988530734)]]);
        assert!(frobenius(&(&f.v - v)) < 1e-12);
        let bt = from_rows(&[[c(0.079756474996120328, -0.15951294999224066), c(0.55274079270844091, 0.27637039635422045)]]);
        assert!(frobenius(&(&f.beta_tilde - bt)) < 1e-13);
        let w0 = from_rows(&[
            [c(0.9670715954122936, -1.9341431908245872), c(1.6868839835330281, 0.84344199176651406)],
            [c(1.7746302408323465, 0.88731512041617327), c(-0.5670715954122936, 1.1341431908245872)],
        ]);
        assert!(frobenius(&(&f.w0 - w0)) < 1e-13);
    }

    #[test]
    fn invertibility_condition() {
        // h = 0, g != 0: S != 0 everywhere on [0, 1]
        for k in 0..=100 {
            let f = n1_closed_forms(I, re(1.0), re(0.0), k as f64 / 100.0, c(0.0, 2.0)).unwrap();
            assert!(f.s.norm() > 0.1);
        }
        // Re(h/g) = Im ln(i - x) at x = 0.5 makes S vanish there
        let ell = LogBranch::new(I).eval(0.5);
        assert!(matches!(n1_closed_forms(I, re(1.0), re(ell.im), 0.5, c(0.0, 2.0)), Err(Error::SingularS { .. })));
        assert!(n1_closed_forms(I, re(0.0), re(0.0), 0.5, c(0.0, 2.0)).is_err());
    }

    #[test]
    fn transformed_w_is_normalized() {
        let p = sample_params();
        let w = transformed_w_explicit(&p, 0.0, c(0.5, 1.0), 1.0).unwrap();
        assert!(frobenius(&(w - identity(2))) < 1e-12);
        let w = transformed_w_explicit_n1(I, re(1.0), re(0.0), 0.0, c(0.5, 1.0), 1.0).unwrap();
        assert!(frobenius(&(w - identity(2))) < 1e-12);
        let p1 = DiagonalGbdt::new(vec![I], vec![re(1.0)], vec![re(0.0)]).unwrap();
        let a = transformed_w_explicit(&p1, 0.7, c(0.5, 1.0), 1.0).unwrap();
        let b = transformed_w_explicit_n1(I, re(1.0), re(0.0), 0.7, c(0.5, 1.0), 1.0).unwrap();
        assert!(frobenius(&(a - b)) < 1e-12);
    }
}
