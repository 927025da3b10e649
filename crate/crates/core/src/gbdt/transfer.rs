use super::{GbdtState, GbdtTrajectory};
use crate::error::{Error, Result};
use crate::matrix::{cond1, eigenvalues, frobenius, identity, re, solve, CMatrix, C64, I};

/// Transfer matrix functions at one `(x, z)`.
#[derive(Debug, Clone)]
pub struct TransferEval {
    pub x: f64,
    pub z: C64,
    pub wa: CMatrix,
    pub w0: CMatrix,
    /// From the explicit inverse formula, not by inversion.
    pub w0_inv: CMatrix,
    /// `w0^{-1} w_A`
    pub v: CMatrix,
    /// `||w_A(x, conj z)* J w_A(x, z) - J||_F`
    pub j_defect: f64,
    /// `||w0 w0^{-1} - I||_F`
    pub w0_inverse_defect: f64,
    /// `||w0 J w0* - J||_F`
    pub w0_j_defect: f64,
    pub cond_s: f64,
    pub cond_v: f64,
}

fn check_spectrum(b: &CMatrix, z: C64) -> Result<()> {
    let scale = 1.0 + frobenius(b);
    for e in eigenvalues(b)? {
        if (e - z).norm() <= 1e-12 * scale || (e - z.conj()).norm() <= 1e-12 * scale {
            return Err(Error::OnSpectrum { re: z.re, im: z.im });
        }
    }
    Ok(())
}

/// `w_A(x, z) = I - i J Pi* S^{-1} (x - z)(B - x)(B - z)^{-1} Pi`
fn wa_of(st: &GbdtState, b: &CMatrix, j: &CMatrix, z: C64) -> Result<CMatrix> {
    let n = b.nrows();
    let bz = b - identity(n) * z;
    let resolved = solve(&bz, &st.pi).map_err(|_| Error::OnSpectrum { re: z.re, im: z.im })?;
    let res = st.a_inv(b) * resolved * (re(st.x) - z);
    Ok(identity(j.nrows()) - j * st.pi.adjoint() * st.s_solve(&res)? * I)
}

/// Transfer functions from a single state.
pub fn transfer_at(st: &GbdtState, b: &CMatrix, j: &CMatrix, z: C64) -> Result<TransferEval> {
    check_spectrum(b, z)?;
    let m = j.nrows();
    let wa = wa_of(st, b, j, z)?;
    let wa_conj = wa_of(st, b, j, z.conj())?;
    let w0 = st.w0(b, j)?;
    // w0^{-1} = I + i J Pi* (B - x)* S^{-1} Pi
    let w0_inv = identity(m) + j * st.pi.adjoint() * st.a_inv(b).adjoint() * st.s_solve(&st.pi)? * I;
    let v = &w0_inv * &wa;
    let j_defect = frobenius(&(wa_conj.adjoint() * j * &wa - j));
    let w0_inverse_defect = frobenius(&(&w0 * &w0_inv - identity(m)));
    let w0_j_defect = frobenius(&(&w0 * j * w0.adjoint() - j));
    Ok(TransferEval {
        x: st.x,
        z,
        cond_s: cond1(&st.s),
        cond_v: cond1(&v),
        wa,
        w0,
        w0_inv,
        v,
        j_defect,
        w0_inverse_defect,
        w0_j_defect,
    })
}

/// Transfer functions at `x` (re-integrated from the nearest sample when
/// `x` is off the trajectory grid).
pub fn transfer(traj: &GbdtTrajectory, x: f64, z: C64) -> Result<TransferEval> {
    let st = traj.state_at(x)?;
    transfer_at(&st, &traj.params.b, traj.j(), z)
}

impl TransferEval {
    /// `v^{-1} = w_A^{-1} w0 = J w_A(x, conj z)* J w0`, from the evaluation at `conj z`.
    pub fn v_inverse(&self, at_conj: &TransferEval, j: &CMatrix) -> CMatrix {
        j * at_conj.wa.adjoint() * j * &self.w0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::closed_form::{n1_closed_forms, DiagonalGbdt, Example51};
    use crate::gbdt::{evolve, GbdtParams};
    use crate::matrix::{c, from_rows};

    fn n1_traj() -> GbdtTrajectory {
        let sys = Example51::new(1.0).system();
        let p = DiagonalGbdt::new(vec![I], vec![re(1.0)], vec![re(0.0)]).unwrap().params().unwrap();
        evolve(&p, &sys, &[0.0, 0.25, 0.5, 0.75, 1.0], 1e-12).unwrap()
    }

    #[test]
    fn zero_pi_gives_identities() {
        let sys = Example51::new(1.0).system();
        let p = GbdtParams { b: from_rows(&[[re(2.0)]]), s0: identity(1), pi0: CMatrix::zeros(1, 2), xi: 0.0 };
        let t = evolve(&p, &sys, &[0.0, 0.5, 1.0], 1e-10).unwrap();
        let e = transfer(&t, 0.5, c(0.3, 1.0)).unwrap();
        for m in [&e.wa, &e.w0, &e.v, &e.w0_inv] {
            assert_eq!(frobenius(&(m - identity(2))), 0.0);
        }
    }

    #[test]
    fn n1_matches_closed_forms_and_oracle() {
        let t = n1_traj();
        let z = c(0.0, 2.0);
        let e = transfer(&t, 0.5, z).unwrap();
        let f = n1_closed_forms(I, re(1.0), re(0.0), 0.5, z).unwrap();
        assert!(frobenius(&(&e.wa - &f.wa)) <= 1e-9);
        assert!(frobenius(&(&e.v - &f.v)) <= 1e-9);
        assert!(frobenius(&(&e.w0 - &f.w0)) <= 1e-9);
        let wa = from_rows(&[
            [c(1.9012147862368808, -3.8847505839430276), c(2.9520469711827992, 2.5303259752995422)],
            [c(3.1056029214566065, 2.6619453612485198), c(-2.7012147862368808, 1.4847505839430276)],
        ]);
        let v = from_rows(&[
            [c(2.0, 1.917678988530734), re(-2.1086049794162851)],
            [re(-2.2182878010404332), c(2.0, -1.917678988530734)],
        ]);
        assert!(frobenius(&(&e.wa - wa)) <= 1e-9);
        assert!(frobenius(&(&e.v - v)) <= 1e-9);
    }

    #[test]
    fn j_properties() {
        let t = n1_traj();
        for &x in &[0.0, 0.25, 0.75, 1.0] {
            for z in [c(0.3, 0.4), c(-2.0, -1.0), re(3.0)] {
                let e = transfer(&t, x, z).unwrap();
                assert!(e.j_defect <= 1e-9 * e.cond_s, "{}", e.j_defect);
                assert!(e.w0_j_defect <= 1e-9 * e.cond_s);
                assert!(e.w0_inverse_defect <= 1e-9 * e.cond_s);
            }
        }
    }

    #[test]
    fn v_inverse_formula() {
        let t = n1_traj();
        let z = c(0.4, 0.7);
        let e = transfer(&t, 0.75, z).unwrap();
        let ec = transfer(&t, 0.75, z.conj()).unwrap();
        let inv = e.v_inverse(&ec, t.j());
        assert!(frobenius(&(&e.v * inv - identity(2))) < 1e-10);
    }

    #[test]
    fn large_z_approaches_w0() {
        let t = n1_traj();
        let e = transfer(&t, 0.5, c(1e6, 0.0)).unwrap();
        let corr = frobenius(&(&e.w0 - identity(2)));
        assert!(frobenius(&(&e.wa - &e.w0)) <= 1e-4 * corr);
    }

    #[test]
    fn spectrum_rejected() {
        let t = n1_traj();
        assert!(matches!(transfer(&t, 0.5, I), Err(Error::OnSpectrum { .. })));
        assert!(matches!(transfer(&t, 0.5, -I), Err(Error::OnSpectrum { .. })));
    }
}
