//! Sine-basis discretization of the box `(0, π)^d` with Navier conditions.
//!
//! A field is stored by its coefficients in the basis
//! `φ_k(x) = Π_i sin(k_i x_i)`, `k ∈ {1..M}^d`. Every basis function is an
//! eigenfunction of `(−Δ)^m` with eigenvalue `|k|^{2m}`, so the operator, its
//! inverse and the energy inner product are all diagonal.
//!
//! Nonlinear terms are evaluated pseudo-spectrally on the interior nodes
//! `x_j = jπ/(Q+1)`, `j = 1..Q`, where the rectangle rule is exact for
//! trigonometric polynomials of degree below `2(Q+1)`.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;
use core::f64::consts::PI;

// inherent float methods shadow this whenever std is in the build graph
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};

/// Minimum ratio between quadrature nodes and retained modes per dimension.
pub const DEALIAS_FACTOR: usize = 4;

/// Polyharmonic order `m ≥ 1` of `(−Δ)^m`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
#[cfg_attr(feature = "serde", derive(serde::Serialize, serde::Deserialize))]
pub struct Order(u32);

impl Order {
    pub fn new(m: u32) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidOrder(m));
        }
        Ok(Order(m))
    }

    pub fn get(self) -> u32 {
        self.0
    }
}

/// `(Σ k_i²)^m` for a multi-index of any length.
pub fn polyharmonic_eigenvalue(k: &[u32], m: Order) -> f64 {
    let sq: f64 = k.iter().map(|&ki| f64::from(ki) * f64::from(ki)).sum();
    sq.powi(m.get() as i32)
}

/// Uniform interior node set and mode table for `(0, π)^d`.
#[derive(Debug)]
pub struct Grid {
    dim: usize,
    modes: usize,
    nodes: usize,
    /// `sin(k x_j)` for `k = 1..M` (rows) and `j = 1..Q` (columns).
    sine: Vec<f64>,
    /// `|k|²` per coefficient slot.
    wavenumber_sq: Vec<f64>,
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.dim == other.dim && self.modes == other.modes && self.nodes == other.nodes
    }
}

impl Grid {
    /// Grid with `quad_points` interior nodes per dimension.
    pub fn new(dim: usize, modes: usize, quad_points: usize) -> Result<Arc<Grid>> {
        if dim != 1 && dim != 2 {
            return Err(Error::InvalidGrid("dimension must be 1 or 2"));
        }
        if modes == 0 {
            return Err(Error::InvalidGrid("at least one mode per dimension"));
        }
        if quad_points < DEALIAS_FACTOR * modes {
            return Err(Error::InvalidGrid("need at least 4 quadrature nodes per mode"));
        }
        let period = 2 * (quad_points + 1);
        // sin(π r/(Q+1)) for r in 0..2(Q+1), built so that the reflection
        // symmetries of the sine hold bit-for-bit.
        let half = quad_points + 1;
        let mut base = vec![0.0; half + 1];
        for r in 0..=half {
            base[r] = if 2 * r <= half {
                (PI * r as f64 / half as f64).sin()
            } else {
                base[half - r]
            };
        }
        base[half] = 0.0;
        let table: Vec<f64> = (0..period)
            .map(|r| if r <= half { base[r] } else { -base[r - half] })
            .collect();
        let mut sine = vec![0.0; modes * quad_points];
        for k in 1..=modes {
            for j in 1..=quad_points {
                sine[(k - 1) * quad_points + (j - 1)] = table[(k * j) % period];
            }
        }
        let wavenumber_sq = match dim {
            1 => (1..=modes).map(|k| (k * k) as f64).collect(),
            _ => {
                let mut w = Vec::with_capacity(modes * modes);
                for k1 in 1..=modes {
                    for k2 in 1..=modes {
                        w.push((k1 * k1 + k2 * k2) as f64);
                    }
                }
                w
            }
        };
        Ok(Arc::new(Grid {
            dim,
            modes,
            nodes: quad_points,
            sine,
            wavenumber_sq,
        }))
    }

    /// Grid with the minimal dealiasing node count `Q = 4M`.
    pub fn with_modes(dim: usize, modes: usize) -> Result<Arc<Grid>> {
        Grid::new(dim, modes, DEALIAS_FACTOR * modes)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn modes(&self) -> usize {
        self.modes
    }

    pub fn nodes_per_dim(&self) -> usize {
        self.nodes
    }

    /// Number of coefficients, `M^d`.
    pub fn coeff_len(&self) -> usize {
        self.modes.pow(self.dim as u32)
    }

    /// Number of quadrature nodes, `Q^d`.
    pub fn node_len(&self) -> usize {
        self.nodes.pow(self.dim as u32)
    }

    /// Node spacing `π/(Q+1)`.
    pub fn spacing(&self) -> f64 {
        PI / (self.nodes + 1) as f64
    }

    /// Quadrature weight of one node, `h^d`.
    pub fn cell_volume(&self) -> f64 {
        self.spacing().powi(self.dim as i32)
    }

    /// `‖φ_k‖²_{L²} = (π/2)^d`, identical for every mode.
    pub fn mode_mass(&self) -> f64 {
        (PI / 2.0).powi(self.dim as i32)
    }

    /// `|k|²` of coefficient slot `idx`.
    pub fn wavenumber_sq(&self, idx: usize) -> f64 {
        self.wavenumber_sq[idx]
    }

    /// Multi-index (1-based per component) of coefficient slot `idx`.
    pub fn multi_index(&self, idx: usize) -> [u32; 2] {
        match self.dim {
            1 => [(idx + 1) as u32, 0],
            _ => [(idx / self.modes + 1) as u32, (idx % self.modes + 1) as u32],
        }
    }

    /// Coordinates of node `idx` (unused components are zero).
    pub fn node_coords(&self, idx: usize) -> [f64; 2] {
        let h = self.spacing();
        match self.dim {
            1 => [(idx + 1) as f64 * h, 0.0],
            _ => [
                (idx / self.nodes + 1) as f64 * h,
                (idx % self.nodes + 1) as f64 * h,
            ],
        }
    }

    /// Coefficient slots sorted by eigenvalue, ties broken by slot order.
    pub fn eigen_order(&self) -> Vec<usize> {
        let mut idx: Vec<usize> = (0..self.coeff_len()).collect();
        idx.sort_by(|&a, &b| {
            self.wavenumber_sq[a]
                .partial_cmp(&self.wavenumber_sq[b])
                .unwrap()
                .then(a.cmp(&b))
        });
        idx
    }

    /// Eigenvalue `|k|^{2m}` of coefficient slot `idx`.
    pub fn eigenvalue(&self, idx: usize, m: Order) -> f64 {
        self.wavenumber_sq[idx].powi(m.get() as i32)
    }

    fn sine_row(&self, k: usize) -> &[f64] {
        &self.sine[k * self.nodes..(k + 1) * self.nodes]
    }

    /// Coefficients to node values.
    pub(crate) fn synthesize(&self, coeffs: &[f64], out: &mut [f64]) {
        let (m, q) = (self.modes, self.nodes);
        match self.dim {
            1 => {
                out.iter_mut().for_each(|v| *v = 0.0);
                for (k, &c) in coeffs.iter().enumerate() {
                    if c == 0.0 {
                        continue;
                    }
                    for (o, s) in out.iter_mut().zip(self.sine_row(k)) {
                        *o += c * s;
                    }
                }
            }
            _ => {
                // tmp[k1][j2] = Σ_k2 c[k1][k2] sin(k2 y_j2)
                let mut tmp = vec![0.0; m * q];
                for k1 in 0..m {
                    let row = &mut tmp[k1 * q..(k1 + 1) * q];
                    for k2 in 0..m {
                        let c = coeffs[k1 * m + k2];
                        if c == 0.0 {
                            continue;
                        }
                        for (o, s) in row.iter_mut().zip(self.sine_row(k2)) {
                            *o += c * s;
                        }
                    }
                }
                out.iter_mut().for_each(|v| *v = 0.0);
                for k1 in 0..m {
                    let sines = self.sine_row(k1);
                    let row = &tmp[k1 * q..(k1 + 1) * q];
                    for j1 in 0..q {
                        let s = sines[j1];
                        let dst = &mut out[j1 * q..(j1 + 1) * q];
                        for (o, t) in dst.iter_mut().zip(row) {
                            *o += s * t;
                        }
                    }
                }
            }
        }
    }

    /// Node values to coefficients (discrete L² projection).
    pub(crate) fn analyze(&self, values: &[f64], out: &mut [f64]) {
        let (m, q) = (self.modes, self.nodes);
        let scale = 2.0 / (q + 1) as f64;
        match self.dim {
            1 => {
                for (k, o) in out.iter_mut().enumerate() {
                    let acc: f64 = self
                        .sine_row(k)
                        .iter()
                        .zip(values)
                        .map(|(s, v)| s * v)
                        .sum();
                    *o = scale * acc;
                }
            }
            _ => {
                // tmp[k1][j2] = Σ_j1 sin(k1 x_j1) v[j1][j2]
                let mut tmp = vec![0.0; m * q];
                for k1 in 0..m {
                    let sines = self.sine_row(k1);
                    let row = &mut tmp[k1 * q..(k1 + 1) * q];
                    for j1 in 0..q {
                        let s = sines[j1];
                        for (o, v) in row.iter_mut().zip(&values[j1 * q..(j1 + 1) * q]) {
                            *o += s * v;
                        }
                    }
                }
                for k1 in 0..m {
                    let row = &tmp[k1 * q..(k1 + 1) * q];
                    for k2 in 0..m {
                        let acc: f64 = self.sine_row(k2).iter().zip(row).map(|(s, t)| s * t).sum();
                        out[k1 * m + k2] = scale * scale * acc;
                    }
                }
            }
        }
    }
}

/// A function on the box given by its sine coefficients.
#[derive(Debug, Clone)]
pub struct Field {
    grid: Arc<Grid>,
    coeffs: Vec<f64>,
}

fn same_grid(a: &Arc<Grid>, b: &Arc<Grid>) -> bool {
    Arc::ptr_eq(a, b) || **a == **b
}

impl Field {
    pub fn zeros(grid: &Arc<Grid>) -> Field {
        Field {
            grid: Arc::clone(grid),
            coeffs: vec![0.0; grid.coeff_len()],
        }
    }

    pub fn from_coeffs(grid: &Arc<Grid>, coeffs: Vec<f64>) -> Result<Field> {
        if coeffs.len() != grid.coeff_len() {
            return Err(Error::ShapeMismatch {
                expected: grid.coeff_len(),
                found: coeffs.len(),
            });
        }
        if coeffs.iter().any(|c| !c.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Field {
            grid: Arc::clone(grid),
            coeffs,
        })
    }

    /// Unnormalized basis function `φ_k` for coefficient slot `idx`.
    pub fn basis(grid: &Arc<Grid>, idx: usize) -> Field {
        let mut f = Field::zeros(grid);
        f.coeffs[idx] = 1.0;
        f
    }

    pub fn grid(&self) -> &Arc<Grid> {
        &self.grid
    }

    pub fn coeffs(&self) -> &[f64] {
        &self.coeffs
    }

    pub(crate) fn from_raw(grid: &Arc<Grid>, coeffs: Vec<f64>) -> Field {
        debug_assert_eq!(coeffs.len(), grid.coeff_len());
        Field {
            grid: Arc::clone(grid),
            coeffs,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.coeffs.iter().all(|&c| c == 0.0)
    }

    /// Samples on the `Q^d` interior nodes, row-major in `(x_1, x_2)`.
    pub fn to_grid(&self) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.node_len()];
        self.grid.synthesize(&self.coeffs, &mut out);
        out
    }

    /// Projects node samples onto the retained modes.
    pub fn from_grid(grid: &Arc<Grid>, values: &[f64]) -> Result<Field> {
        if values.len() != grid.node_len() {
            return Err(Error::ShapeMismatch {
                expected: grid.node_len(),
                found: values.len(),
            });
        }
        let mut coeffs = vec![0.0; grid.coeff_len()];
        grid.analyze(values, &mut coeffs);
        Field::from_coeffs(grid, coeffs)
    }

    fn check_grid(&self, other: &Field) -> Result<()> {
        if same_grid(&self.grid, &other.grid) {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// `(u, v)_m = Σ_k |k|^{2m} c_k(u) c_k(v) ‖φ_k‖²`.
    pub fn inner_m(&self, other: &Field, m: Order) -> Result<f64> {
        self.check_grid(other)?;
        Ok(self.inner_m_unchecked(other, m))
    }

    pub(crate) fn inner_m_unchecked(&self, other: &Field, m: Order) -> f64 {
        let e = m.get() as i32;
        let acc: f64 = self
            .coeffs
            .iter()
            .zip(&other.coeffs)
            .zip(&self.grid.wavenumber_sq)
            .map(|((a, b), w)| w.powi(e) * a * b)
            .sum();
        acc * self.grid.mode_mass()
    }

    /// `|u|_m`.
    pub fn norm_m(&self, m: Order) -> f64 {
        self.inner_m_unchecked(self, m).max(0.0).sqrt()
    }

    /// `∫ u v` from the coefficients (Parseval).
    pub fn inner_l2(&self, other: &Field) -> Result<f64> {
        self.check_grid(other)?;
        let acc: f64 = self.coeffs.iter().zip(&other.coeffs).map(|(a, b)| a * b).sum();
        Ok(acc * self.grid.mode_mass())
    }

    /// Rectangle-rule `(∫|u|^p)^{1/p}` on the interior nodes; `p = ∞` gives
    /// the largest node magnitude.
    pub fn lp_norm(&self, p: f64) -> Result<f64> {
        lp_norm_of_samples(&self.grid, &self.to_grid(), p)
    }

    pub fn scaled(&self, a: f64) -> Field {
        Field {
            grid: Arc::clone(&self.grid),
            coeffs: self.coeffs.iter().map(|c| a * c).collect(),
        }
    }

    /// `self + a·other`.
    pub fn add_scaled(&self, a: f64, other: &Field) -> Result<Field> {
        self.check_grid(other)?;
        Ok(Field {
            grid: Arc::clone(&self.grid),
            coeffs: self
                .coeffs
                .iter()
                .zip(&other.coeffs)
                .map(|(x, y)| x + a * y)
                .collect(),
        })
    }

    pub fn sub(&self, other: &Field) -> Result<Field> {
        self.add_scaled(-1.0, other)
    }
}

/// Rectangle-rule L^p norm of node samples on `grid`.
pub fn lp_norm_of_samples(grid: &Grid, samples: &[f64], p: f64) -> Result<f64> {
    if p.is_nan() || p < 1.0 {
        return Err(Error::InvalidExponent(p));
    }
    if p.is_infinite() {
        return Ok(samples.iter().fold(0.0, |acc: f64, v| acc.max(v.abs())));
    }
    let w = grid.cell_volume();
    let sum: f64 = if p == 2.0 {
        samples.iter().map(|v| v * v).sum()
    } else {
        samples.iter().map(|v| v.abs().powf(p)).sum()
    };
    Ok((w * sum).powf(1.0 / p))
}

/// `λ₁ = d^m` and `φ₁ = Π sin(x_i)` scaled to unit L² norm.
pub fn first_eigenpair(grid: &Arc<Grid>, m: Order) -> (f64, Field) {
    let lambda = (grid.dim() as f64).powi(m.get() as i32);
    let phi = Field::basis(grid, 0).scaled(1.0 / grid.mode_mass().sqrt());
    (lambda, phi)
}

/// Solution operator of `(u, φ)_m = ∫ h φ`: divides each coefficient by its
/// eigenvalue.
pub fn apply_inverse_operator(h: &Field, m: Order) -> Field {
    let e = m.get() as i32;
    let coeffs = h
        .coeffs
        .iter()
        .zip(&h.grid.wavenumber_sq)
        .map(|(c, w)| c / w.powi(e))
        .collect();
    Field::from_raw(&h.grid, coeffs)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(k: u32) -> Order {
        Order::new(k).unwrap()
    }

    #[test]
    fn eigenvalue_examples() {
        assert_eq!(polyharmonic_eigenvalue(&[1, 1], m(2)), 4.0);
        assert_eq!(polyharmonic_eigenvalue(&[2], m(1)), 4.0);
        assert_eq!(polyharmonic_eigenvalue(&[1, 2, 2], m(3)), 729.0);
    }

    #[test]
    fn order_zero_rejected() {
        assert_eq!(Order::new(0), Err(Error::InvalidOrder(0)));
    }

    #[test]
    fn grid_validation() {
        assert!(Grid::new(3, 4, 16).is_err());
        assert!(Grid::new(1, 8, 31).is_err());
        assert!(Grid::new(1, 8, 32).is_ok());
    }

    #[test]
    fn first_eigenpair_values() {
        for (d, order, lam) in [(2, 1, 2.0), (1, 2, 1.0), (2, 2, 4.0)] {
            let g = Grid::with_modes(d, 8).unwrap();
            let (l, phi) = first_eigenpair(&g, m(order));
            assert_eq!(l, lam);
            assert!((phi.lp_norm(2.0).unwrap() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn sin_samples_and_zero_field() {
        let g = Grid::with_modes(1, 8).unwrap();
        let vals = Field::basis(&g, 0).to_grid();
        for (j, v) in vals.iter().enumerate() {
            let x = g.node_coords(j)[0];
            assert!((v - x.sin()).abs() < 1e-14);
        }
        assert!(Field::zeros(&g).to_grid().iter().all(|&v| v == 0.0));
    }

    #[test]
    fn from_grid_shape_error() {
        let g = Grid::with_modes(1, 8).unwrap();
        assert_eq!(
            Field::from_grid(&g, &[0.0; 3]).unwrap_err(),
            Error::ShapeMismatch {
                expected: 32,
                found: 3
            }
        );
    }

    #[test]
    fn inner_product_examples() {
        let g2 = Grid::with_modes(2, 6).unwrap();
        let phi = Field::basis(&g2, 0);
        let unit = phi.scaled(1.0 / phi.lp_norm(2.0).unwrap());
        assert!((unit.inner_m(&unit, m(1)).unwrap() - 2.0).abs() < 1e-12);

        let g1 = Grid::with_modes(1, 6).unwrap();
        let s1 = Field::basis(&g1, 0);
        let s2 = Field::basis(&g1, 1);
        assert_eq!(s1.inner_m(&s2, m(1)).unwrap(), 0.0);
        assert!((s1.inner_m(&s1, m(1)).unwrap() - PI / 2.0).abs() < 1e-14);
        assert_eq!(s1.inner_m(&phi, m(1)), Err(Error::GridMismatch));
    }

    #[test]
    fn lp_norm_examples() {
        let g = Grid::with_modes(1, 128).unwrap();
        let s = Field::basis(&g, 0);
        assert!((s.lp_norm(2.0).unwrap() - (PI / 2.0).sqrt()).abs() < 1e-13);
        assert!((s.lp_norm(1.0).unwrap() - 2.0).abs() < 1e-5);
        assert!((s.lp_norm(4.0).unwrap() - (3.0 * PI / 8.0).powf(0.25)).abs() < 1e-13);
        assert!((s.lp_norm(f64::INFINITY).unwrap() - 1.0).abs() < 1e-4);
        assert!(s.lp_norm(0.5).is_err());
    }

    #[test]
    fn inverse_operator_examples() {
        let g2 = Grid::with_modes(2, 4).unwrap();
        let u = apply_inverse_operator(&Field::basis(&g2, 0), m(1));
        assert_eq!(u.coeffs()[0], 0.5);

        let g1 = Grid::with_modes(1, 4).unwrap();
        let u = apply_inverse_operator(&Field::basis(&g1, 1), m(2));
        assert_eq!(u.coeffs()[1], 1.0 / 16.0);

        let mut c = vec![0.0; 4];
        c[0] = 3.0;
        c[2] = 5.0;
        let h = Field::from_coeffs(&g1, c).unwrap();
        let u = apply_inverse_operator(&h, m(1));
        assert_eq!(u.coeffs()[0], 3.0);
        assert!((u.coeffs()[2] - 5.0 / 9.0).abs() < 1e-15);
    }

    #[test]
    fn eigen_order_sorts_by_wavenumber() {
        let g = Grid::with_modes(2, 3).unwrap();
        let order = g.eigen_order();
        let ks: Vec<[u32; 2]> = order.iter().take(4).map(|&i| g.multi_index(i)).collect();
        assert_eq!(ks, vec![[1, 1], [1, 2], [2, 1], [2, 2]]);
    }

    #[test]
    fn non_finite_rejected() {
        let g = Grid::with_modes(1, 4).unwrap();
        assert_eq!(
            Field::from_coeffs(&g, vec![0.0, f64::NAN, 0.0, 0.0]).unwrap_err(),
            Error::NonFinite
        );
    }
}
