//! Non-isospectral canonical systems, their GBDT transformations and
//! triangular operator models.

pub mod canonical;
pub mod closed_form;
pub mod error;
pub mod gbdt;
pub mod matrix;
pub mod ode;
pub mod sample;
pub mod triangular;

pub use canonical::{CanonicalSystem, FundamentalSolution, HamiltonianSpec, Sampled};
pub use error::{Error, Result};
pub use gbdt::{GbdtParams, GbdtTrajectory, TransferEval};
pub use matrix::{CMatrix, C64};
