//! Sphere bound `J ≥ α` near the origin.
//!
//! `C₀` is fitted so that `J(u) ≥ (¼ − C₀|u|_m^e)|u|_m²`, `e = 4m/(N−2m)`,
//! holds along the fit directions on a radius ladder. Then
//! `r = (8C₀)^{−1/e}` and `α = r²/8`, and the bound is probed on fresh
//! directions at radius `r`.

use alloc::vec::Vec;

// inherent float methods shadow this whenever std is in the build graph
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::functional::energy;
use crate::nonlinearity::{critical_power, NonlinearitySpec};
use crate::spectral::{Field, Order};

const LADDER_STEPS: i32 = 48;
const LADDER_SPAN_DECADES: f64 = 6.0;

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct GeometryReport {
    pub n: u32,
    pub m: u32,
    /// `4m/(N − 2m)`.
    pub exponent: f64,
    pub c0: f64,
    pub r: f64,
    pub alpha: f64,
    /// Largest radius on the fit ladder.
    pub fit_radius: f64,
    /// Smallest `J` over the probe directions at radius `r`.
    pub min_energy: f64,
    pub probes: usize,
    pub holds: bool,
}

fn unit(v: &Field, m: Order) -> Result<Field> {
    let n = v.norm_m(m);
    if !(n > 0.0) || !n.is_finite() {
        return Err(Error::Precondition("direction must be nonzero"));
    }
    Ok(v.scaled(1.0 / n))
}

fn fit(spec: &NonlinearitySpec, dirs: &[Field], m: Order, e: f64, top: f64) -> Result<f64> {
    let mut c0 = 0.0f64;
    for v in dirs {
        for j in 0..=LADDER_STEPS {
            let rho = top * 10f64.powf(-LADDER_SPAN_DECADES * j as f64 / LADDER_STEPS as f64);
            let j_val = energy(&v.scaled(rho), spec, m)?;
            let c = (0.25 - j_val / (rho * rho)) / rho.powf(e);
            if c.is_finite() {
                c0 = c0.max(c);
            }
        }
    }
    Ok(c0)
}

/// Fits `C₀` on `fit_dirs`, then checks `J ≥ α` on `|u|_m = r` along
/// `probe_dirs`. Directions are normalized first. Requires `N > 2m`.
pub fn check_geometry(
    spec: &NonlinearitySpec,
    m: Order,
    n: u32,
    fit_dirs: &[Field],
    probe_dirs: &[Field],
) -> Result<GeometryReport> {
    let mm = m.get();
    if n <= 2 * mm {
        return Err(Error::FormulaUndefined {
            what: "sphere radius",
            n,
            m: mm,
        });
    }
    if fit_dirs.is_empty() || probe_dirs.is_empty() {
        return Err(Error::Precondition("need fit and probe directions"));
    }
    let e = critical_power(n, mm);
    let fit_dirs: Vec<Field> = fit_dirs.iter().map(|v| unit(v, m)).collect::<Result<_>>()?;
    let probe_dirs: Vec<Field> = probe_dirs.iter().map(|v| unit(v, m)).collect::<Result<_>>()?;
    // widen the ladder until the fitted constant is positive and the radius
    // it produces lies on the ladder
    let mut top = 1.0f64;
    let mut c0 = 0.0;
    let mut r = top;
    for _ in 0..200 {
        c0 = fit(spec, &fit_dirs, m, e, top)?;
        if c0 > 0.0 {
            r = (8.0 * c0).powf(-1.0 / e);
            if r <= top {
                break;
            }
            top = (2.0 * top).max(2.0 * r);
        } else {
            r = top;
            top *= 2.0;
        }
    }
    let alpha = r * r / 8.0;
    let mut min_energy = f64::INFINITY;
    for v in &probe_dirs {
        min_energy = min_energy.min(energy(&v.scaled(r), spec, m)?);
    }
    Ok(GeometryReport {
        n,
        m: mm,
        exponent: e,
        c0,
        r,
        alpha,
        fit_radius: top,
        min_energy,
        probes: probe_dirs.len(),
        holds: c0 > 0.0 && r <= top && min_energy >= alpha,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::Law;
    use crate::spectral::Grid;

    #[test]
    fn cubic_sphere_bound() {
        let grid = Grid::with_modes(1, 16).unwrap();
        let m = Order::new(1).unwrap();
        let spec = NonlinearitySpec::new(Law::Power { q: 3.0 }).unwrap();
        let dirs: Vec<Field> = (0..6).map(|k| Field::basis(&grid, k)).collect();
        let rep = check_geometry(&spec, m, 5, &dirs, &dirs).unwrap();
        assert!(rep.holds, "{rep:?}");
        assert!((rep.alpha - rep.r * rep.r / 8.0).abs() < 1e-15);
    }

    #[test]
    fn low_dimension_rejected() {
        let grid = Grid::with_modes(1, 4).unwrap();
        let spec = NonlinearitySpec::new(Law::Power { q: 3.0 }).unwrap();
        let d = [Field::basis(&grid, 0)];
        assert!(check_geometry(&spec, Order::new(1).unwrap(), 2, &d, &d).is_err());
    }
}
