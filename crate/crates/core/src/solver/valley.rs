use alloc::sync::Arc;

use super::SolveError;
use crate::functional::{check_spec, energy};
use crate::nonlinearity::{check_hypothesis, HypothesisId, NonlinearitySpec, Sampling};
use crate::spectral::{first_eigenpair, Field, Grid, Order};

/// Doublings of `β` tried before giving up.
pub const VALLEY_DOUBLINGS: u32 = 60;

/// Endpoint `e = βφ₁` with `J(e) < 0`.
#[derive(Debug, Clone)]
pub struct Valley {
    pub beta: f64,
    pub endpoint: Field,
    pub energy: f64,
    /// Whether (H3) held on the default sample.
    pub h3_satisfied: bool,
}

/// First `β ∈ {1, 2, 4, …}` with `J(β v) < 0`.
pub(crate) fn valley_along(
    spec: &NonlinearitySpec,
    dir: &Field,
    m: Order,
) -> Result<(f64, Field, f64), SolveError> {
    check_spec(dir.grid(), spec)?;
    let mut beta = 1.0;
    let mut last = 0.0;
    for _ in 0..=VALLEY_DOUBLINGS {
        let e = dir.scaled(beta);
        let j = energy(&e, spec, m)?;
        if j < 0.0 {
            return Ok((beta, e, j));
        }
        last = j;
        beta *= 2.0;
    }
    Err(SolveError::ValleyNotFound {
        last_beta: beta / 2.0,
        last_energy: last,
    })
}

pub fn find_valley_endpoint(
    spec: &NonlinearitySpec,
    grid: &Arc<Grid>,
    m: Order,
) -> Result<Valley, SolveError> {
    let (lambda1, phi) = first_eigenpair(grid, m);
    let sampling = Sampling {
        lambda1: Some(lambda1),
        ..Sampling::default()
    };
    let h3_satisfied = check_hypothesis(spec, HypothesisId::H3, grid.dim() as u32, m.get(), &sampling)
        .map(|r| r.satisfied())
        .unwrap_or(false);
    let (beta, endpoint, energy) = valley_along(spec, &phi, m)?;
    Ok(Valley {
        beta,
        endpoint,
        energy,
        h3_satisfied,
    })
}
