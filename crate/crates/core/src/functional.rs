//! Energy `J(u) = ½|u|_m² − ∫F(x,u)`, its Riesz gradient, Palais–Smale
//! diagnostics and the L^p bootstrap exponent chain.

use alloc::vec::Vec;

// inherent float methods shadow this whenever std is in the build graph
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::nonlinearity::NonlinearitySpec;
use crate::spectral::{apply_inverse_operator, lp_norm_of_samples, Field, Grid, Order};

/// Per-iterate Palais–Smale / Cerami quantities.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct PSRecord {
    pub energy: f64,
    /// `|∇J(u)|_m`, the dual norm of `J'(u)`.
    pub grad_norm: f64,
    pub sol_norm: f64,
    /// `∫(f(u)u − 2F(u))`.
    pub defect: f64,
    /// `‖f(u)‖_{L^{2N/(N+2m)}}`, only for `N > 2m`.
    pub f_norm: Option<f64>,
    /// `(1 + |u|_m)|∇J(u)|_m`.
    pub cerami: f64,
}

pub(crate) fn check_spec(grid: &Grid, spec: &NonlinearitySpec) -> Result<()> {
    match spec.modulation() {
        Some(g) if g.len() != grid.node_len() => Err(Error::GridMismatch),
        _ => Ok(()),
    }
}

/// `∫ g F(u)` from node samples.
pub(crate) fn potential(grid: &Grid, spec: &NonlinearitySpec, vals: &[f64]) -> f64 {
    let sum: f64 = vals
        .iter()
        .enumerate()
        .map(|(j, &v)| spec.weight(j) * spec.primitive(v))
        .sum();
    sum * grid.cell_volume()
}

/// `g f(u)` at the nodes.
pub(crate) fn source(spec: &NonlinearitySpec, vals: &[f64]) -> Vec<f64> {
    vals.iter()
        .enumerate()
        .map(|(j, &v)| spec.weight(j) * spec.f(v))
        .collect()
}

/// `∇J(u) = u − L(P f(u))` given the node values of `u`.
pub(crate) fn gradient_from_values(
    u: &Field,
    spec: &NonlinearitySpec,
    m: Order,
    vals: &[f64],
) -> Result<Field> {
    let load = Field::from_grid(u.grid(), &source(spec, vals))?;
    u.sub(&apply_inverse_operator(&load, m))
}

pub fn energy(u: &Field, spec: &NonlinearitySpec, m: Order) -> Result<f64> {
    check_spec(u.grid(), spec)?;
    let vals = u.to_grid();
    Ok(0.5 * u.norm_m(m).powi(2) - potential(u.grid(), spec, &vals))
}

/// The field `v` with `(v, φ)_m = J'(u)φ` for every retained `φ`.
pub fn riesz_gradient(u: &Field, spec: &NonlinearitySpec, m: Order) -> Result<Field> {
    check_spec(u.grid(), spec)?;
    gradient_from_values(u, spec, m, &u.to_grid())
}

/// `∫ g f(u) v` by the node rule.
pub fn load_pairing(u: &Field, v: &Field, spec: &NonlinearitySpec) -> Result<f64> {
    check_spec(u.grid(), spec)?;
    if u.grid() != v.grid() {
        return Err(Error::GridMismatch);
    }
    let fu = source(spec, &u.to_grid());
    let vv = v.to_grid();
    let sum: f64 = fu.iter().zip(&vv).map(|(a, b)| a * b).sum();
    Ok(sum * u.grid().cell_volume())
}

/// `max_k |(u, φ_k)_m − ∫ f(u) φ_k|` over the retained modes.
pub fn weak_residual(u: &Field, spec: &NonlinearitySpec, m: Order) -> Result<f64> {
    check_spec(u.grid(), spec)?;
    let grid = u.grid();
    let load = Field::from_grid(grid, &source(spec, &u.to_grid()))?;
    let mass = grid.mode_mass();
    let worst = (0..grid.coeff_len())
        .map(|k| {
            let lk = grid.eigenvalue(k, m);
            ((lk * u.coeffs()[k] - load.coeffs()[k]) * mass).abs()
        })
        .fold(0.0, f64::max);
    Ok(worst)
}

pub(crate) fn record_from_values(
    u: &Field,
    spec: &NonlinearitySpec,
    m: Order,
    n: u32,
    vals: &[f64],
) -> Result<(PSRecord, Field)> {
    let grid = u.grid();
    let fu = source(spec, vals);
    let load = Field::from_grid(grid, &fu)?;
    let grad = u.sub(&apply_inverse_operator(&load, m))?;
    let sol_norm = u.norm_m(m);
    let grad_norm = grad.norm_m(m);
    let pot = potential(grid, spec, vals);
    let fu_u: f64 = fu.iter().zip(vals).map(|(a, b)| a * b).sum::<f64>() * grid.cell_volume();
    let f_norm = if n > 2 * m.get() {
        let p = 2.0 * f64::from(n) / (f64::from(n) + 2.0 * f64::from(m.get()));
        Some(lp_norm_of_samples(grid, &fu, p)?)
    } else {
        None
    };
    let rec = PSRecord {
        energy: 0.5 * sol_norm * sol_norm - pot,
        grad_norm,
        sol_norm,
        defect: fu_u - 2.0 * pot,
        f_norm,
        cerami: (1.0 + sol_norm) * grad_norm,
    };
    Ok((rec, grad))
}

/// Diagnostics at `u` for nominal dimension `N`.
pub fn ps_diagnostics(u: &Field, spec: &NonlinearitySpec, m: Order, n: u32) -> Result<PSRecord> {
    check_spec(u.grid(), spec)?;
    Ok(record_from_values(u, spec, m, n, &u.to_grid())?.0)
}

/// Why the exponent chain stopped.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum BootstrapStatus {
    /// `p_k* ≥ p + 1` (or infinite).
    Reached,
    /// `p_{k+1} = p_k` to relative `1e−12`.
    FixedPoint,
    /// The chain stopped increasing.
    NotIncreasing,
    /// Iteration cap hit.
    Cap,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct BootstrapTrace {
    pub n: u32,
    pub m: u32,
    pub p: f64,
    pub p1: f64,
    /// `(p_k, p_k*)`, `k = 1, 2, …`; `p_k* = ∞` when `N ≤ 2m p_k`.
    pub chain: Vec<(f64, f64)>,
    pub terminated: bool,
    pub steps: usize,
    /// `p₁ > max(1, N(p−1)/(2mp))`.
    pub threshold_ok: bool,
    pub status: BootstrapStatus,
}

pub const BOOTSTRAP_CAP: usize = 10_000;

/// Sobolev conjugate `N q/(N − 2m q)`, infinite when `N ≤ 2m q`.
pub fn sobolev_conjugate(n: u32, m: u32, q: f64) -> f64 {
    let (nf, mf) = (f64::from(n), f64::from(m));
    if nf <= 2.0 * mf * q {
        f64::INFINITY
    } else {
        nf * q / (nf - 2.0 * mf * q)
    }
}

/// Iterates `p_{k+1} = p_k*/p` from `p₁` until `p_k* ≥ p + 1`.
pub fn bootstrap_chain(n: u32, m: u32, p: f64, p1: f64) -> Result<BootstrapTrace> {
    if n == 0 || m == 0 {
        return Err(Error::Precondition("N and m must be positive"));
    }
    if !(p.is_finite() && p >= 1.0) {
        return Err(Error::Precondition("p must be finite and >= 1"));
    }
    if n > 2 * m {
        let crit = (f64::from(n) + 2.0 * f64::from(m)) / (f64::from(n) - 2.0 * f64::from(m));
        if p >= crit {
            return Err(Error::Precondition("p must be subcritical, p < (N+2m)/(N-2m)"));
        }
    }
    if !(p1.is_finite() && p1 > 1.0) {
        return Err(Error::Precondition("p1 must be finite and > 1"));
    }
    let threshold = 1f64.max(f64::from(n) * (p - 1.0) / (2.0 * f64::from(m) * p));
    let mut chain = Vec::new();
    let mut status = BootstrapStatus::Cap;
    let mut pk = p1;
    for _ in 0..BOOTSTRAP_CAP {
        let star = sobolev_conjugate(n, m, pk);
        chain.push((pk, star));
        if star >= p + 1.0 {
            status = BootstrapStatus::Reached;
            break;
        }
        let next = star / p;
        if (next - pk).abs() <= 1e-12 * pk.abs() {
            status = BootstrapStatus::FixedPoint;
            break;
        }
        if next < pk {
            status = BootstrapStatus::NotIncreasing;
            break;
        }
        pk = next;
    }
    Ok(BootstrapTrace {
        n,
        m,
        p,
        p1,
        steps: chain.len(),
        chain,
        terminated: status == BootstrapStatus::Reached,
        threshold_ok: p1 > threshold,
        status,
    })
}
