//! Discretized triangular models `(A f)(x) = x f(x) + i int_a^x beta(x) J beta(t)* f(t) dt`
//! and their characteristic functions.

use crate::canonical::{fundamental_solution, CanonicalSystem, HamiltonianSpec, Sampled};
use crate::error::{Error, Result};
use crate::gbdt::GbdtTrajectory;
use crate::matrix::{eigenvalues, frobenius, hermitian_report_tol, identity, re, solve, CMatrix, C64, I};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quadrature {
    /// Midpoint nodes, `sqrt(w)`-symmetrized, half weight on the diagonal.
    Midpoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TriangularModel {
    pub j: CMatrix,
    /// `k x m` samples of `beta`
    pub beta: Sampled,
    pub a: f64,
    pub b: f64,
    pub quadrature: Quadrature,
}

impl TriangularModel {
    pub fn new(j: CMatrix, beta: Sampled, a: f64, b: f64) -> Result<Self> {
        if !(a < b) {
            return Err(Error::Invalid(format!("interval [{a}, {b}] is empty")));
        }
        if !j.is_square() || beta.shape().1 != j.nrows() {
            return Err(Error::Shape {
                op: "TriangularModel",
                detail: format!("beta is {:?}, J is {:?}", beta.shape(), j.shape()),
            });
        }
        let x = beta.nodes();
        if x[0] > a || x[x.len() - 1] < b {
            return Err(Error::Invalid("beta samples do not cover the interval".into()));
        }
        Ok(Self { j, beta, a, b, quadrature: Quadrature::Midpoint })
    }

    /// Model whose `beta` comes from a factored system.
    pub fn from_system(sys: &CanonicalSystem) -> Result<Self> {
        let beta = sys
            .hamiltonian()
            .beta()
            .ok_or_else(|| Error::Invalid("the triangular model needs a factored Hamiltonian H = beta* beta".into()))?;
        let (a, b) = sys.interval();
        Self::new(sys.j().clone(), beta.clone(), a, b)
    }

    pub fn k(&self) -> usize {
        self.beta.shape().0
    }

    pub fn m(&self) -> usize {
        self.j.nrows()
    }

    /// The canonical system with `H = beta* beta`, normalized at `a`.
    pub fn canonical_system(&self) -> Result<CanonicalSystem> {
        CanonicalSystem::new(self.j.clone(), (self.a, self.b), self.a, HamiltonianSpec::Factored(self.beta.clone()))
    }
}

/// Dense discretization of the model operator.
#[derive(Debug, Clone)]
pub struct DiscretizedOperator {
    pub nodes: Vec<f64>,
    pub weights: Vec<f64>,
    pub k: usize,
    pub m: usize,
    /// `(N k) x (N k)`, block lower triangular
    pub matrix: CMatrix,
    /// `(N k) x m`, block rows `sqrt(w_j) beta(x_j)`
    pub channel: CMatrix,
    pub j: CMatrix,
    betas: Vec<CMatrix>,
}

/// Nystrom discretization on `n` midpoint nodes.
pub fn discretize(model: &TriangularModel, n: usize) -> Result<DiscretizedOperator> {
    if n == 0 {
        return Err(Error::Invalid("at least one node is required".into()));
    }
    let (k, m) = (model.k(), model.m());
    let h = (model.b - model.a) / n as f64;
    let nodes: Vec<f64> = (0..n).map(|i| model.a + (i as f64 + 0.5) * h).collect();
    let weights = vec![h; n];
    let betas: Vec<CMatrix> = nodes.iter().map(|&x| model.beta.eval(x)).collect();
    let mut matrix = CMatrix::zeros(n * k, n * k);
    let mut channel = CMatrix::zeros(n * k, m);
    for jn in 0..n {
        let bj = &betas[jn] * &model.j;
        for l in 0..=jn {
            let scale = if l == jn { 0.5 * weights[jn] } else { (weights[jn] * weights[l]).sqrt() };
            let mut block = &bj * betas[l].adjoint() * (I * scale);
            if l == jn {
                block += identity(k) * re(nodes[jn]);
            }
            matrix.view_mut((jn * k, l * k), (k, k)).copy_from(&block);
        }
        channel.view_mut((jn * k, 0), (k, m)).copy_from(&(&betas[jn] * re(weights[jn].sqrt())));
    }
    Ok(DiscretizedOperator { nodes, weights, k, m, matrix, channel, j: model.j.clone(), betas })
}

impl DiscretizedOperator {
    pub fn n(&self) -> usize {
        self.nodes.len()
    }

    /// `||A - A* - i K J K*||_F`
    pub fn node_identity_defect(&self) -> f64 {
        let lhs = &self.matrix - self.matrix.adjoint();
        frobenius(&(lhs - &self.channel * &self.j * self.channel.adjoint() * I))
    }

    fn diag_block(&self, i: usize) -> CMatrix {
        self.matrix.view((i * self.k, i * self.k), (self.k, self.k)).into_owned()
    }

    /// Eigenvalues, read off the diagonal blocks (the matrix is block triangular).
    pub fn eigenvalues(&self) -> Result<Vec<C64>> {
        let mut out = Vec::with_capacity(self.n() * self.k);
        for i in 0..self.n() {
            out.extend(eigenvalues(&self.diag_block(i))?);
        }
        Ok(out)
    }

    /// Block forward substitution for `(A - z) X = K`; returns the blocks
    /// `X_j` (each `k x m`).
    pub fn resolvent_on_channel(&self, z: C64) -> Result<Vec<CMatrix>> {
        let (k, m) = (self.k, self.m);
        // acc = sum_{l < j} sqrt(w_l) beta_l* X_l
        let mut acc = CMatrix::zeros(m, m);
        let mut out = Vec::with_capacity(self.n());
        for i in 0..self.n() {
            let sw = self.weights[i].sqrt();
            let rhs = &self.betas[i] * (identity(m) - &self.j * &acc * I) * re(sw);
            let d = self.diag_block(i) - identity(k) * z;
            let x = solve(&d, &rhs)?;
            acc += self.betas[i].adjoint() * &x * re(sw);
            out.push(x);
        }
        Ok(out)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CharFnMethod {
    Resolvent,
    FundamentalSolution,
}

#[derive(Debug, Clone)]
pub struct CharFnSample {
    pub z: C64,
    pub value: CMatrix,
    pub method: CharFnMethod,
}

/// `W(z) = I - i J K* (A - z)^{-1} K`
pub fn char_fn(op: &DiscretizedOperator, z: C64) -> Result<CharFnSample> {
    let xs = op.resolvent_on_channel(z)?;
    let mut sum = CMatrix::zeros(op.m, op.m);
    for (i, x) in xs.iter().enumerate() {
        sum += op.betas[i].adjoint() * x * re(op.weights[i].sqrt());
    }
    Ok(CharFnSample { z, value: identity(op.m) - &op.j * sum * I, method: CharFnMethod::Resolvent })
}

/// `W(b, z)` of the associated canonical system.
pub fn char_fn_via_solution(model: &TriangularModel, z: C64, tol: f64) -> Result<CharFnSample> {
    let sys = model.canonical_system()?;
    let w = fundamental_solution(&sys, z, &[model.b], tol)?;
    Ok(CharFnSample { z, value: w.last().clone(), method: CharFnMethod::FundamentalSolution })
}

#[derive(Debug, Clone)]
pub struct ResolventReport {
    pub z: C64,
    /// max over nodes of `||[(A - z)^{-1} beta](x_j) - (x_j - z)^{-1} beta(x_j) W(x_j, z)||_F`
    pub max_residual: f64,
    pub argmax_node: f64,
}

/// Compares the discrete resolvent applied to `beta` with
/// `(x - z)^{-1} beta(x) W(x, z)` at the nodes.
pub fn resolvent_identity_check(op: &DiscretizedOperator, model: &TriangularModel, z: C64, tol: f64) -> Result<ResolventReport> {
    let sys = model.canonical_system()?;
    let w = fundamental_solution(&sys, z, &op.nodes, tol)?;
    let xs = op.resolvent_on_channel(z)?;
    let mut rep = ResolventReport { z, max_residual: 0.0, argmax_node: op.nodes[0] };
    for (i, x) in xs.iter().enumerate() {
        let lhs = x / C64::new(op.weights[i].sqrt(), 0.0);
        let rhs = &op.betas[i] * &w.values[i] / (re(op.nodes[i]) - z);
        let r = frobenius(&(lhs - rhs));
        if r > rep.max_residual {
            rep.max_residual = r;
            rep.argmax_node = op.nodes[i];
        }
    }
    Ok(rep)
}

fn model_grid(model: &TriangularModel, traj: &GbdtTrajectory) -> Result<Vec<f64>> {
    let g: Vec<f64> = traj.grid.iter().copied().filter(|&x| x >= model.a && x <= model.b).collect();
    if g.first() != Some(&model.a) || g.last() != Some(&model.b) {
        return Err(Error::Invalid("the trajectory grid must contain both model endpoints".into()));
    }
    Ok(g)
}

/// Model with `beta~ = beta w0`, sampled on the trajectory grid.
pub fn transform_model(model: &TriangularModel, traj: &GbdtTrajectory) -> Result<TriangularModel> {
    let grid = model_grid(model, traj)?;
    let mut vals = Vec::with_capacity(grid.len());
    for &x in &grid {
        vals.push(model.beta.eval(x) * traj.w0_at(x)?);
    }
    TriangularModel::new(model.j.clone(), Sampled::new(grid, vals)?, model.a, model.b)
}

/// Model with `beta~ = w0* beta w0` (square `beta`, unitary `w0`).
pub fn transform_model_unitary(model: &TriangularModel, traj: &GbdtTrajectory) -> Result<TriangularModel> {
    if model.k() != model.m() {
        return Err(Error::Invalid("the unitary variant needs a square beta".into()));
    }
    let grid = model_grid(model, traj)?;
    let mut vals = Vec::with_capacity(grid.len());
    for &x in &grid {
        let w0 = traj.w0_at(x)?;
        vals.push(w0.adjoint() * model.beta.eval(x) * w0);
    }
    TriangularModel::new(model.j.clone(), Sampled::new(grid, vals)?, model.a, model.b)
}

#[derive(Debug, Clone)]
pub struct SpectralReport {
    pub n: usize,
    pub max_abs_im: f64,
    /// Fraction of eigenvalues with real part in `[a - band, b + band]` and `|Im| <= band`.
    pub fraction_in_band: f64,
    pub band: f64,
    pub eigenvalues: Vec<C64>,
    /// Max difference to a full dense eigenvalue computation (small `N k` only).
    pub dense_check: Option<f64>,
}

/// Spectrum of the discretization for `J = I`, `beta >= 0`.
pub fn similarity_probe(model: &TriangularModel, n: usize, band: f64) -> Result<SpectralReport> {
    let m = model.m();
    if frobenius(&(&model.j - identity(m))) > 1e-12 || model.k() != m {
        return Err(Error::Invalid("the similarity probe needs J = I and square beta".into()));
    }
    let op = discretize(model, n)?;
    for (i, b) in op.betas.iter().enumerate() {
        let rep = hermitian_report_tol(b, 1e-10)?;
        if !rep.is_psd || rep.defect > 1e-10 {
            return Err(Error::Invalid(format!(
                "beta({}) is not positive semidefinite (min eigenvalue {:e}, Hermitian defect {:e})",
                op.nodes[i], rep.min_eig, rep.defect
            )));
        }
    }
    let eigs = op.eigenvalues()?;
    let max_abs_im = eigs.iter().map(|e| e.im.abs()).fold(0.0, f64::max);
    let inside = eigs
        .iter()
        .filter(|e| e.re >= model.a - band && e.re <= model.b + band && e.im.abs() <= band)
        .count();
    let dense_check = if n * m <= 128 {
        let mut dense = eigenvalues(&op.matrix)?;
        let mut tri = eigs.clone();
        let key = |a: &C64, b: &C64| a.re.total_cmp(&b.re).then(a.im.total_cmp(&b.im));
        dense.sort_by(key);
        tri.sort_by(key);
        Some(dense.iter().zip(&tri).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max))
    } else {
        None
    };
    Ok(SpectralReport {
        n,
        max_abs_im,
        fraction_in_band: inside as f64 / eigs.len() as f64,
        band,
        eigenvalues: eigs,
        dense_check,
    })
}
