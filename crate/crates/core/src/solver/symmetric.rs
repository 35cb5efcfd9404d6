//! Multiple solution pairs for odd nonlinearities.
//!
//! Seed `k` (in eigenvalue order) runs the mountain pass inside the span of
//! the modes `φ_j` whose multi-index is a componentwise multiple of that of
//! `φ_k`. Odd `f` maps this span into itself, so critical points found there
//! are critical points of the full problem. Candidates within `1e-4` of
//! `±u_j` for an earlier `u_j` are discarded.

use alloc::sync::Arc;
use alloc::vec::Vec;

// inherent float methods shadow this whenever std is in the build graph
#[allow(unused_imports)]
use num_traits::Float;

use super::mountain_pass::Problem;
use super::valley::valley_along;
use super::{MinMaxTrace, SolveConfig, SolveError};
use crate::nonlinearity::{critical_power, NonlinearitySpec};
use crate::spectral::{Field, Grid, Order};

/// Distance in `|·|_m` under which two solutions are the same pair.
pub const DEFLATION_RADIUS: f64 = 1e-4;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MultiConfig {
    /// Number of distinct pairs wanted.
    pub n_sol: usize,
    /// Seeds tried beyond `n_sol` before giving up.
    pub extra_seeds: usize,
    pub solve: SolveConfig,
}

impl Default for MultiConfig {
    fn default() -> Self {
        MultiConfig {
            n_sol: 3,
            extra_seeds: 8,
            solve: SolveConfig::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct MultiResult {
    /// One trace per distinct pair, by increasing energy.
    pub traces: Vec<MinMaxTrace>,
    pub energies_increasing: bool,
    /// Fitted `C₀` with `|F(s)| ≤ C₀(|s|^{2N/(N−2m)} + s²)` on a sample.
    pub c_f: Option<f64>,
    /// First position in eigenvalue order with `λ_k ≥ 4C₀`.
    pub k0_estimate: Option<usize>,
}

fn seed_mask(grid: &Grid, seed: usize) -> Vec<bool> {
    let k = grid.multi_index(seed);
    (0..grid.coeff_len())
        .map(|j| {
            let jj = grid.multi_index(j);
            (0..grid.dim()).all(|i| jj[i] % k[i] == 0)
        })
        .collect()
}

fn fit_c0(spec: &NonlinearitySpec, n: u32, m: u32) -> Option<f64> {
    if n <= 2 * m {
        return None;
    }
    let crit = 2.0 + critical_power(n, m);
    let mut c = 0.0f64;
    for i in -160..=160 {
        let s = 10f64.powf(i as f64 / 20.0);
        for x in [s, -s] {
            let r = spec.primitive(x).abs() / (x.abs().powf(crit) + x * x);
            if r.is_finite() {
                c = c.max(r);
            }
        }
    }
    Some(c)
}

/// Mountain pass from `βφ_k` for successive seeds `k`, with deflation.
pub fn symmetric_mountain_pass(
    spec: &NonlinearitySpec,
    grid: &Arc<Grid>,
    m: Order,
    cfg: &MultiConfig,
) -> Result<MultiResult, SolveError> {
    if !spec.is_odd_on_samples() {
        return Err(SolveError::NotOdd);
    }
    let n = cfg.solve.nominal_n.unwrap_or(grid.dim() as u32);
    let order = grid.eigen_order();
    let budget = (cfg.n_sol + cfg.extra_seeds).min(order.len());
    let mut found: Vec<MinMaxTrace> = Vec::new();
    for &seed in order.iter().take(budget) {
        if found.len() == cfg.n_sol {
            break;
        }
        let phi = Field::basis(grid, seed).scaled(1.0 / grid.mode_mass().sqrt());
        let (beta, endpoint, _) = match valley_along(spec, &phi, m) {
            Ok(v) => v,
            Err(SolveError::ValleyNotFound { .. }) => continue,
            Err(e) => return Err(e),
        };
        let problem = Problem::new(grid, spec, m, n, Some(seed_mask(grid, seed)));
        let trace = match problem.run(&endpoint, beta, &cfg.solve, Vec::new()) {
            Ok(t) => t,
            Err(SolveError::MaxIterExceeded(_)) => continue,
            Err(e) => return Err(e),
        };
        let u = &trace.solution;
        let duplicate = found.iter().any(|t| {
            let v = &t.solution;
            let minus = u.sub(v).map(|d| d.norm_m(m)).unwrap_or(f64::INFINITY);
            let plus = u.add_scaled(1.0, v).map(|d| d.norm_m(m)).unwrap_or(f64::INFINITY);
            minus.min(plus) < DEFLATION_RADIUS
        });
        if !duplicate && !u.is_zero() {
            found.push(trace);
        }
    }
    found.sort_by(|a, b| a.energy.total_cmp(&b.energy));
    if found.len() < cfg.n_sol {
        return Err(SolveError::FewerFound {
            found: found.len(),
            requested: cfg.n_sol,
            traces: found,
        });
    }
    let energies_increasing = found.windows(2).all(|w| w[0].energy < w[1].energy);
    let c_f = fit_c0(spec, n, m.get());
    let k0_estimate = c_f.and_then(|c| {
        order
            .iter()
            .position(|&k| grid.eigenvalue(k, m) >= 4.0 * c)
    });
    Ok(MultiResult {
        traces: found,
        energies_increasing,
        c_f,
        k0_estimate,
    })
}
