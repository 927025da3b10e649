use super::solution::sweep;
use super::CanonicalSystem;
use crate::error::{Error, Result};
use crate::matrix::{frobenius, identity, solve, CMatrix, C64};

#[derive(Debug, Clone, Copy)]
pub struct BoundaryOptions {
    /// Local error target for each integration at `s ± i eta`.
    pub tol: f64,
    /// Minimal distance of `s` from the endpoints of the cut.
    pub margin: f64,
}

impl Default for BoundaryOptions {
    fn default() -> Self {
        Self { tol: 1e-12, margin: 0.02 }
    }
}

/// Limit estimate from a Richardson tableau.
#[derive(Debug, Clone)]
pub struct Limit {
    pub value: CMatrix,
    pub error: f64,
    pub divergent: bool,
    pub etas: Vec<f64>,
}

/// Extrapolates `f(eta)` to `eta -> 0` from the halving sequence
/// `eta_j = eta0 2^{-j}`, eliminating the integer powers `eta, eta^2, ...`.
/// The error is the difference of the last two diagonal entries; the
/// result is flagged divergent when that difference grew over the
/// previous one.
pub fn richardson_limit(mut f: impl FnMut(f64) -> Result<CMatrix>, eta0: f64, levels: usize) -> Result<Limit> {
    if levels < 2 {
        return Err(Error::Invalid("Richardson extrapolation needs at least two levels".into()));
    }
    if !(eta0 > 0.0) {
        return Err(Error::Invalid("eta0 must be positive".into()));
    }
    let etas: Vec<f64> = (0..levels).map(|j| eta0 * 0.5f64.powi(j as i32)).collect();
    let mut table: Vec<Vec<CMatrix>> = Vec::with_capacity(levels);
    for (row, &eta) in etas.iter().enumerate() {
        let mut cur = vec![f(eta)?];
        for k in 1..=row {
            let factor = 2f64.powi(k as i32) - 1.0;
            let next = &cur[k - 1] + (&cur[k - 1] - &table[row - 1][k - 1]) * C64::new(1.0 / factor, 0.0);
            cur.push(next);
        }
        table.push(cur);
    }
    let diag: Vec<&CMatrix> = table.iter().enumerate().map(|(i, r)| &r[i]).collect();
    let diffs: Vec<f64> = diag.windows(2).map(|w| frobenius(&(w[1] - w[0]))).collect();
    let error = *diffs.last().expect("levels >= 2");
    let divergent = diffs.len() >= 2 && error > diffs[diffs.len() - 2];
    Ok(Limit { value: diag[levels - 1].clone(), error, divergent, etas })
}

/// Limits of `W(x, s ± i eta)` on the cut and the resulting jump data.
#[derive(Debug, Clone)]
pub struct BoundaryValueReport {
    pub x: f64,
    pub s: f64,
    pub w_plus: CMatrix,
    pub w_minus: CMatrix,
    /// `W+ - W-`
    pub v: CMatrix,
    /// `W-^{-1} W+`
    pub jump: CMatrix,
    pub eta_sequence: Vec<f64>,
    pub extrapolation_error: f64,
    pub divergent: bool,
}

impl BoundaryValueReport {
    pub(crate) fn from_limits(x: f64, s: f64, plus: Limit, minus: Limit) -> Result<Self> {
        let v = &plus.value - &minus.value;
        let jump = solve(&minus.value, &plus.value)?;
        Ok(Self {
            x,
            s,
            v,
            jump,
            eta_sequence: plus.etas,
            extrapolation_error: plus.error.max(minus.error),
            divergent: plus.divergent || minus.divergent,
            w_plus: plus.value,
            w_minus: minus.value,
        })
    }
}

/// Estimates the boundary values `W±(x, s)` on the cut between the base
/// point and `x`. Points `s` off the cut are allowed (the two limits then
/// coincide) but `s` must keep `opts.margin` away from the cut endpoints,
/// where the limits do not exist.
pub fn boundary_values(
    sys: &CanonicalSystem,
    x: f64,
    s: f64,
    eta0: f64,
    levels: usize,
    opts: &BoundaryOptions,
) -> Result<BoundaryValueReport> {
    let (a, b) = sys.interval();
    if x < a || x > b {
        return Err(Error::Invalid(format!("x = {x} outside [{a}, {b}]")));
    }
    let xi = sys.xi();
    check_margin(s, xi, x, opts.margin)?;
    let id = identity(sys.m());
    let at = |z: C64| -> Result<CMatrix> {
        let (mut v, _) = sweep(sys, z, xi, &id, &[x], opts.tol)?;
        Ok(v.pop().expect("one target"))
    };
    let plus = richardson_limit(|eta| at(C64::new(s, eta)), eta0, levels)?;
    let minus = richardson_limit(|eta| at(C64::new(s, -eta)), eta0, levels)?;
    BoundaryValueReport::from_limits(x, s, plus, minus)
}

pub(crate) fn check_margin(s: f64, xi: f64, x: f64, margin: f64) -> Result<()> {
    if (s - xi).abs() < margin || (s - x).abs() < margin {
        return Err(Error::Invalid(format!(
            "s = {s} is within {margin} of a cut endpoint ({xi} or {x}); boundary values do not exist there"
        )));
    }
    Ok(())
}
