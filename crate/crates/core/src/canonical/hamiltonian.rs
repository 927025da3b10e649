use crate::error::{Error, Result};
use crate::matrix::{hermitian_part, re, CMatrix};

/// A matrix-valued function sampled on an increasing grid and
/// interpolated piecewise-linearly entrywise. Outside the grid the end
/// samples are held constant.
#[derive(Debug, Clone, PartialEq)]
pub struct Sampled {
    x: Vec<f64>,
    values: Vec<CMatrix>,
}

impl Sampled {
    pub fn new(x: Vec<f64>, values: Vec<CMatrix>) -> Result<Self> {
        if x.is_empty() || x.len() != values.len() {
            return Err(Error::Invalid(format!("{} grid points for {} samples", x.len(), values.len())));
        }
        if x.windows(2).any(|w| !(w[1] > w[0])) || x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Invalid("sample grid must be finite and strictly increasing".into()));
        }
        let (r, c) = values[0].shape();
        if values.iter().any(|v| v.shape() != (r, c)) {
            return Err(Error::Invalid("samples have inconsistent shapes".into()));
        }
        if values.iter().any(|v| !crate::matrix::is_finite(v)) {
            return Err(Error::Invalid("samples contain non-finite entries".into()));
        }
        Ok(Self { x, values })
    }

    /// The same matrix at both ends of `[a, b]`.
    pub fn constant(value: CMatrix, a: f64, b: f64) -> Result<Self> {
        Self::new(vec![a, b], vec![value.clone(), value])
    }

    /// Samples `f` on `x`.
    pub fn from_fn(x: Vec<f64>, f: impl Fn(f64) -> CMatrix) -> Result<Self> {
        let values = x.iter().map(|&t| f(t)).collect();
        Self::new(x, values)
    }

    pub fn nodes(&self) -> &[f64] {
        &self.x
    }

    pub fn samples(&self) -> &[CMatrix] {
        &self.values
    }

    pub fn shape(&self) -> (usize, usize) {
        self.values[0].shape()
    }

    pub fn eval(&self, t: f64) -> CMatrix {
        let n = self.x.len();
        if n == 1 || t <= self.x[0] {
            return self.values[0].clone();
        }
        if t >= self.x[n - 1] {
            return self.values[n - 1].clone();
        }
        let j = self.x.partition_point(|&v| v <= t) - 1;
        let (x0, x1) = (self.x[j], self.x[j + 1]);
        let th = (t - x0) / (x1 - x0);
        &self.values[j] * re(1.0 - th) + &self.values[j + 1] * re(th)
    }

    /// Largest sample-to-sample slope `||v_{j+1} - v_j||_F / (x_{j+1} - x_j)`.
    pub fn lipschitz_estimate(&self) -> f64 {
        self.x
            .windows(2)
            .zip(self.values.windows(2))
            .map(|(x, v)| (&v[1] - &v[0]).norm() / (x[1] - x[0]))
            .fold(0.0, f64::max)
    }
}

/// The Hamiltonian of a canonical system, either sampled directly or in
/// the factored form `H = beta* beta`.
#[derive(Debug, Clone, PartialEq)]
pub enum HamiltonianSpec {
    Grid(Sampled),
    Factored(Sampled),
}

impl HamiltonianSpec {
    pub fn constant_beta(beta: CMatrix, a: f64, b: f64) -> Result<Self> {
        Ok(Self::Factored(Sampled::constant(beta, a, b)?))
    }

    /// Matrix dimension `m`.
    pub fn dim(&self) -> usize {
        match self {
            Self::Grid(s) => s.shape().0,
            Self::Factored(s) => s.shape().1,
        }
    }

    pub fn nodes(&self) -> &[f64] {
        match self {
            Self::Grid(s) | Self::Factored(s) => s.nodes(),
        }
    }

    pub fn is_factored(&self) -> bool {
        matches!(self, Self::Factored(_))
    }

    pub fn beta(&self) -> Option<&Sampled> {
        match self {
            Self::Factored(s) => Some(s),
            Self::Grid(_) => None,
        }
    }

    pub fn beta_at(&self, t: f64) -> Option<CMatrix> {
        self.beta().map(|s| s.eval(t))
    }

    /// `H(t)`. Grid data is projected onto its Hermitian part after
    /// interpolation; factored data is PSD by construction.
    pub fn eval(&self, t: f64) -> CMatrix {
        match self {
            Self::Grid(s) => hermitian_part(&s.eval(t)),
            Self::Factored(s) => {
                let b = s.eval(t);
                b.adjoint() * b
            }
        }
    }

    /// The sampled matrices `H(x_j)` at the grid nodes.
    pub fn sample_values(&self) -> Vec<CMatrix> {
        self.nodes().iter().map(|&t| self.eval(t)).collect()
    }

    /// `tau(x) = int_from^x H(t) dt`, exact for the piecewise-linear (grid)
    /// and piecewise-quadratic (factored) representations.
    pub fn cumulative(&self, from: f64, x: f64) -> CMatrix {
        let m = self.dim();
        if x == from {
            return CMatrix::zeros(m, m);
        }
        let (lo, hi, sign) = if x > from { (from, x, 1.0) } else { (x, from, -1.0) };
        let mut cuts = vec![lo];
        cuts.extend(self.nodes().iter().copied().filter(|&t| t > lo && t < hi));
        cuts.push(hi);
        let mut acc = CMatrix::zeros(m, m);
        for w in cuts.windows(2) {
            let (p, q) = (w[0], w[1]);
            let mid = 0.5 * (p + q);
            acc += (self.eval(p) + self.eval(mid) * re(4.0) + self.eval(q)) * re((q - p) / 6.0);
        }
        acc * re(sign)
    }
}
