//! Truncation–continuation for nonlinearities with only an asymptotic
//! growth law.
//!
//! Stage `n` replaces `f` beyond `s_n` by a C¹ multiple of `s^p` and solves
//! the truncated problem by the mountain pass. The first stage whose solution
//! stays below its truncation level also solves the original problem.

use alloc::boxed::Box;
use alloc::sync::Arc;
use alloc::vec::Vec;

// inherent float methods shadow this whenever std is in the build graph
#[allow(unused_imports)]
use num_traits::Float;

use super::mountain_pass::mountain_pass_solve;
use super::{MinMaxTrace, SolveConfig, SolveError};
use crate::error::Error;
use crate::functional::riesz_gradient;
use crate::nonlinearity::{truncate_at, Law, NonlinearitySpec};
use crate::spectral::{Field, Grid, Order};

/// Geometric truncation levels `s_n = s₁ · ratio^{n−1}`, `n ≤ n_max`.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Schedule {
    pub s1: f64,
    pub ratio: f64,
    pub n_max: usize,
}

impl Default for Schedule {
    fn default() -> Self {
        Schedule {
            s1: 10.0,
            ratio: 10.0,
            n_max: 8,
        }
    }
}

impl Schedule {
    pub fn levels(&self) -> Vec<f64> {
        let mut out = Vec::with_capacity(self.n_max);
        let mut s = self.s1;
        for _ in 0..self.n_max {
            out.push(s);
            s *= self.ratio;
        }
        out
    }

    fn validate(&self) -> Result<(), Error> {
        let bad = |name, value, reason| Error::InvalidParameter {
            name,
            value,
            reason,
        };
        if !(self.s1 > 0.0) || !self.s1.is_finite() {
            return Err(bad("s1", self.s1, "must be positive"));
        }
        if !(self.ratio > 1.0) || !self.ratio.is_finite() {
            return Err(bad("ratio", self.ratio, "must exceed 1"));
        }
        if self.n_max == 0 {
            return Err(bad("n_max", 0.0, "must be at least 1"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct StageRecord {
    pub s_n: f64,
    /// `‖u_n‖_∞` on the quadrature grid.
    pub sup_norm: f64,
    pub stopped: bool,
    pub energy: f64,
    pub residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

/// Rescaling diagnostic of a stage that did not stop.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BlowupRecord {
    pub stage: usize,
    /// `λ_n` with `λ_n^{−β₁} = ‖u_n‖_∞`.
    pub lambda: f64,
    /// `2m/(p − 1)`.
    pub beta1: f64,
    /// `λ_n^{pβ₁}(f(s_n) − s_n f'(s_n)/p) + f'(s_n)/(p s_n^{p−1})`.
    pub q0: f64,
    /// Limit term `f'(s_n)/(p s_n^{p−1})` bounding `q0` from below.
    pub coeff: f64,
}

#[derive(Debug, Clone)]
pub struct ContinuationTrace {
    pub schedule: Vec<f64>,
    pub p: f64,
    pub stages: Vec<StageRecord>,
    pub blowup: Vec<BlowupRecord>,
    /// Index into `stages` of the stopping stage.
    pub stopped_at: Option<usize>,
    pub solution: Option<Field>,
    /// `|∇J|_m` of `solution` for the untruncated nonlinearity.
    pub untruncated_residual: Option<f64>,
    /// Mountain-pass trace of the stopping stage.
    pub final_trace: Option<MinMaxTrace>,
}

fn sup_norm(u: &Field) -> f64 {
    u.to_grid().iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

/// Runs the truncated problems along `schedule` until one stops.
pub fn continuation_solve(
    spec: &NonlinearitySpec,
    grid: &Arc<Grid>,
    m: Order,
    p: f64,
    schedule: &Schedule,
    cfg: &SolveConfig,
) -> Result<ContinuationTrace, SolveError> {
    schedule.validate()?;
    if !(p > 1.0) || !p.is_finite() {
        return Err(Error::InvalidExponent(p).into());
    }
    let levels = schedule.levels();
    let beta1 = 2.0 * f64::from(m.get()) / (p - 1.0);
    let mut trace = ContinuationTrace {
        schedule: levels.clone(),
        p,
        stages: Vec::new(),
        blowup: Vec::new(),
        stopped_at: None,
        solution: None,
        untruncated_residual: None,
        final_trace: None,
    };
    for (stage, &s_n) in levels.iter().enumerate() {
        let truncated = truncate_at(spec, s_n, p)?;
        let (t, converged) = match mountain_pass_solve(&truncated, grid, m, cfg) {
            Ok(t) => (t, true),
            Err(SolveError::MaxIterExceeded(t)) => (*t, false),
            Err(e) => return Err(e),
        };
        let sup = sup_norm(&t.solution);
        let stopped = converged && sup <= s_n;
        trace.stages.push(StageRecord {
            s_n,
            sup_norm: sup,
            stopped,
            energy: t.energy,
            residual: t.residual,
            iterations: t.iterations,
            converged,
        });
        if stopped {
            trace.untruncated_residual = Some(riesz_gradient(&t.solution, spec, m)?.norm_m(m));
            trace.stopped_at = Some(stage);
            trace.solution = Some(t.solution.clone());
            trace.final_trace = Some(t);
            return Ok(trace);
        }
        if let Law::Truncated(tr) = truncated.law() {
            trace.blowup.push(BlowupRecord {
                stage,
                lambda: sup.powf(-1.0 / beta1),
                beta1,
                q0: tr.offset() / sup.powf(p) + tr.coeff(),
                coeff: tr.coeff(),
            });
        }
    }
    Err(SolveError::NotStopped(Box::new(trace)))
}
