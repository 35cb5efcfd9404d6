//! Min-max solvers: mountain pass, symmetric mountain pass with deflation,
//! and truncation–continuation.

mod continuation;
mod geometry;
mod mountain_pass;
mod symmetric;
mod valley;

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::fmt;

pub use continuation::{continuation_solve, BlowupRecord, ContinuationTrace, Schedule, StageRecord};
pub use geometry::{check_geometry, GeometryReport};
pub use mountain_pass::{mountain_pass_from, mountain_pass_solve};
pub use symmetric::{symmetric_mountain_pass, MultiConfig, MultiResult, DEFLATION_RADIUS};
pub use valley::{find_valley_endpoint, Valley, VALLEY_DOUBLINGS};

use crate::error::Error;
use crate::functional::PSRecord;
use crate::spectral::Field;

/// Path-deformation settings.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolveConfig {
    /// Nodes of the discrete path, endpoints included.
    pub path_points: usize,
    /// Stop once `|∇J|_m` at the path maximizer is at most this.
    pub tol: f64,
    pub max_iter: usize,
    /// Armijo sufficient-decrease constant.
    pub armijo: f64,
    /// Consecutive rejected deformations before giving up early.
    pub stall_limit: usize,
    /// Nominal dimension `N` used for the `f_norm` diagnostic; defaults to
    /// the grid dimension.
    pub nominal_n: Option<u32>,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            path_points: 64,
            tol: 1e-8,
            max_iter: 50_000,
            armijo: 1e-4,
            stall_limit: 50,
            nominal_n: None,
        }
    }
}

/// Diagnostics raised during a solve; never fatal.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case", tag = "kind"))]
pub enum SolverWarning {
    /// (H3) did not hold on the default sample; the valley search may fail.
    H3NotSatisfied,
    /// `|u|_m` exceeded `1e6` while growing monotonically: a Palais–Smale
    /// failure signature.
    NormGrowth { iteration: usize, norm: f64 },
    /// The deformation stalled before reaching the tolerance.
    Stalled { iteration: usize },
}

/// Record of one mountain-pass run.
#[derive(Debug, Clone)]
pub struct MinMaxTrace {
    /// Diagnostics at the path maximizer, one per iteration.
    pub records: Vec<PSRecord>,
    /// Refined maximal energy along the path, one per iteration.
    pub path_max_energy: Vec<f64>,
    /// `|∇J|_m` at the returned point, within the solve subspace.
    pub residual: f64,
    /// `|∇J|_m` at the returned point over all retained modes.
    pub full_residual: f64,
    pub iterations: usize,
    pub converged: bool,
    pub solution: Field,
    pub energy: f64,
    /// Largest `|u|_m` met along the iteration.
    pub max_sol_norm: f64,
    /// Scale `β` of the valley endpoint `βφ`.
    pub beta: f64,
    pub warnings: Vec<SolverWarning>,
}

#[derive(Debug, Clone)]
pub enum SolveError {
    /// `J(βφ₁) ≥ 0` for every tested `β`.
    ValleyNotFound { last_beta: f64, last_energy: f64 },
    MaxIterExceeded(Box<MinMaxTrace>),
    NotStopped(Box<ContinuationTrace>),
    /// Deflation exhausted the seeds; the distinct solutions found so far
    /// are attached.
    FewerFound { found: usize, requested: usize, traces: Vec<MinMaxTrace> },
    /// The symmetric mode requires `f(−s) = −f(s)`.
    NotOdd,
    Core(Error),
}

impl From<Error> for SolveError {
    fn from(e: Error) -> Self {
        SolveError::Core(e)
    }
}

impl fmt::Display for SolveError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            SolveError::ValleyNotFound {
                last_beta,
                last_energy,
            } => write!(
                f,
                "no valley endpoint: J(beta*phi1) = {last_energy:e} >= 0 up to beta = {last_beta:e}"
            ),
            SolveError::MaxIterExceeded(t) => write!(
                f,
                "mountain pass did not converge in {} iterations (residual {:e})",
                t.iterations, t.residual
            ),
            SolveError::NotStopped(t) => write!(
                f,
                "continuation did not stop within {} stages",
                t.stages.len()
            ),
            SolveError::FewerFound {
                found, requested, ..
            } => write!(f, "found {found} distinct pairs, {requested} requested"),
            SolveError::NotOdd => f.write_str("nonlinearity is not odd"),
            SolveError::Core(e) => write!(f, "{e}"),
        }
    }
}

impl core::error::Error for SolveError {}
