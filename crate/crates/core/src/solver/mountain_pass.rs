//! Path-deformation realization of the mountain-pass min-max.
//!
//! A discrete path from `0` to a valley endpoint is kept in memory. Each
//! iteration finds the maximum of `J` along the path (exactly, by a 1-D
//! Newton search on the segments next to the highest node), takes an Armijo
//! step along `−∇J` from there and writes the result back into the path.

use alloc::sync::Arc;
use alloc::vec;
use alloc::vec::Vec;

// inherent float methods shadow this whenever std is in the build graph
#[allow(unused_imports)]
use num_traits::Float;

use super::valley::find_valley_endpoint;
use super::{MinMaxTrace, SolveConfig, SolveError, SolverWarning};
use crate::functional::{check_spec, potential, record_from_values, riesz_gradient};
use crate::nonlinearity::NonlinearitySpec;
use crate::spectral::{Field, Grid, Order};

const GL4: [(f64, f64); 4] = [
    (0.069_431_844_202_973_71, 0.173_927_422_568_726_9),
    (0.330_009_478_207_571_9, 0.326_072_577_431_273_1),
    (0.669_990_521_792_428_1, 0.326_072_577_431_273_1),
    (0.930_568_155_797_026_3, 0.173_927_422_568_726_9),
];
/// Reparametrize once the longest segment exceeds this multiple of the mean.
const SPACING_RATIO: f64 = 2.5;
const NORM_ALARM: f64 = 1e6;

pub(crate) struct Problem<'a> {
    grid: &'a Arc<Grid>,
    spec: &'a NonlinearitySpec,
    m: Order,
    n: u32,
    lam: Vec<f64>,
    mass: f64,
    h: f64,
    mask: Option<Vec<bool>>,
}

#[derive(Clone)]
struct Point {
    c: Vec<f64>,
    v: Vec<f64>,
    energy: f64,
}

struct Peak {
    /// Highest path node, or the insertion slot when the maximum lies
    /// inside a segment.
    node: usize,
    split: bool,
    at: Point,
}

impl<'a> Problem<'a> {
    pub(crate) fn new(
        grid: &'a Arc<Grid>,
        spec: &'a NonlinearitySpec,
        m: Order,
        n: u32,
        mask: Option<Vec<bool>>,
    ) -> Self {
        Problem {
            grid,
            spec,
            m,
            n,
            lam: (0..grid.coeff_len()).map(|k| grid.eigenvalue(k, m)).collect(),
            mass: grid.mode_mass(),
            h: grid.cell_volume(),
            mask,
        }
    }

    fn inner(&self, a: &[f64], b: &[f64]) -> f64 {
        let s: f64 = a
            .iter()
            .zip(b)
            .zip(&self.lam)
            .map(|((x, y), l)| l * x * y)
            .sum();
        s * self.mass
    }

    fn synth(&self, c: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; self.grid.node_len()];
        self.grid.synthesize(c, &mut out);
        out
    }

    fn energy(&self, c: &[f64], v: &[f64]) -> f64 {
        0.5 * self.inner(c, c) - potential(self.grid, self.spec, v)
    }

    fn point(&self, c: Vec<f64>, v: Vec<f64>) -> Point {
        let energy = self.energy(&c, &v);
        Point { c, v, energy }
    }

    /// `(ψ', ψ'')` for `ψ(t) = J(a + t d)`.
    fn dpsi(&self, av: &[f64], dv: &[f64], ad: f64, dd: f64, t: f64) -> (f64, f64) {
        let (mut s1, mut s2) = (0.0, 0.0);
        for (j, (&a, &d)) in av.iter().zip(dv).enumerate() {
            if d == 0.0 {
                continue;
            }
            let g = self.spec.weight(j);
            let x = a + t * d;
            s1 += g * self.spec.f(x) * d;
            s2 += g * self.spec.fprime(x) * d * d;
        }
        (ad + t * dd - self.h * s1, dd - self.h * s2)
    }

    /// `J(u + δ) − J(u)` without cancelling two large energies.
    fn delta_energy(&self, u: &Point, dc: &[f64], dv: &[f64]) -> f64 {
        let quad = self.inner(&u.c, dc) + 0.5 * self.inner(dc, dc);
        let umax = u.v.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let dmax = dv.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        let pot = if dmax <= 0.1 * (1.0 + umax) {
            let mut acc = 0.0;
            for (j, (&a, &d)) in u.v.iter().zip(dv).enumerate() {
                if d == 0.0 {
                    continue;
                }
                let mean: f64 = GL4.iter().map(|&(t, w)| w * self.spec.f(a + t * d)).sum();
                acc += self.spec.weight(j) * d * mean;
            }
            acc * self.h
        } else {
            let shifted: Vec<f64> = u.v.iter().zip(dv).map(|(a, d)| a + d).collect();
            potential(self.grid, self.spec, &shifted) - potential(self.grid, self.spec, &u.v)
        };
        quad - pot
    }

    /// Maximizer of `J` on the segment from `a` toward `b`, if it is not `a`.
    fn segment_max(&self, a: &Point, b: &Point) -> Option<Point> {
        let dc: Vec<f64> = b.c.iter().zip(&a.c).map(|(x, y)| x - y).collect();
        let dv: Vec<f64> = b.v.iter().zip(&a.v).map(|(x, y)| x - y).collect();
        let ad = self.inner(&a.c, &dc);
        let dd = self.inner(&dc, &dc);
        if dd == 0.0 {
            return None;
        }
        let d0 = self.dpsi(&a.v, &dv, ad, dd, 0.0).0;
        if d0 <= 0.0 {
            return None;
        }
        let mut lo = 0.0;
        let mut hi = 1.0;
        let mut found = false;
        for k in 1..=8 {
            let t = k as f64 / 8.0;
            if self.dpsi(&a.v, &dv, ad, dd, t).0 <= 0.0 {
                hi = t;
                found = true;
                break;
            }
            lo = t;
        }
        let t = if found {
            let mut t = 0.5 * (lo + hi);
            for _ in 0..100 {
                let (d1, d2) = self.dpsi(&a.v, &dv, ad, dd, t);
                if d1 > 0.0 {
                    lo = t;
                } else {
                    hi = t;
                }
                let newton = if d2 < 0.0 { t - d1 / d2 } else { f64::NAN };
                let next = if newton > lo && newton < hi {
                    newton
                } else {
                    0.5 * (lo + hi)
                };
                if (next - t).abs() <= 1e-15 || hi - lo <= 1e-15 {
                    t = next;
                    break;
                }
                t = next;
            }
            t
        } else {
            1.0
        };
        let c: Vec<f64> = a.c.iter().zip(&dc).map(|(x, d)| x + t * d).collect();
        let v: Vec<f64> = a.v.iter().zip(&dv).map(|(x, d)| x + t * d).collect();
        Some(self.point(c, v))
    }

    fn locate_max(&self, path: &[Point]) -> Peak {
        let last = path.len() - 1;
        let mut i = 1;
        for k in 2..last {
            if path[k].energy > path[i].energy {
                i = k;
            }
        }
        let mut best = Peak {
            node: i,
            split: false,
            at: path[i].clone(),
        };
        for nb in [i - 1, i + 1] {
            if let Some(p) = self.segment_max(&path[i], &path[nb]) {
                if p.energy > best.at.energy {
                    best = Peak {
                        node: i.max(nb),
                        split: true,
                        at: p,
                    };
                }
            }
        }
        best
    }

    /// Drops the interior node whose neighbours are closest together,
    /// away from `keep`.
    fn thin(&self, path: &mut Vec<Point>, keep: &[usize]) {
        let mut pick = None;
        let mut shortest = f64::INFINITY;
        for k in 1..path.len() - 1 {
            if keep.iter().any(|&q| k + 2 >= q && k <= q + 2) {
                continue;
            }
            let d: Vec<f64> = path[k + 1]
                .c
                .iter()
                .zip(&path[k - 1].c)
                .map(|(x, y)| x - y)
                .collect();
            let len = self.inner(&d, &d);
            if len < shortest {
                shortest = len;
                pick = Some(k);
            }
        }
        if let Some(k) = pick {
            path.remove(k);
        }
    }

    fn project(&self, g: &mut [f64]) {
        if let Some(mask) = &self.mask {
            for (x, &keep) in g.iter_mut().zip(mask) {
                if !keep {
                    *x = 0.0;
                }
            }
        }
    }

    fn segment_lengths(&self, path: &[Point]) -> Vec<f64> {
        path.windows(2)
            .map(|w| {
                let d: Vec<f64> = w[1].c.iter().zip(&w[0].c).map(|(x, y)| x - y).collect();
                self.inner(&d, &d).max(0.0).sqrt()
            })
            .collect()
    }

    /// Equal-arc-length resampling of the polyline.
    fn reparametrize(&self, path: &[Point]) -> Vec<Point> {
        let lens = self.segment_lengths(path);
        let total: f64 = lens.iter().sum();
        let p = path.len();
        let mut out = Vec::with_capacity(p);
        out.push(path[0].clone());
        let mut seg = 0;
        let mut start = 0.0;
        for k in 1..p - 1 {
            let target = total * k as f64 / (p - 1) as f64;
            while seg < lens.len() - 1 && start + lens[seg] < target {
                start += lens[seg];
                seg += 1;
            }
            let t = if lens[seg] > 0.0 {
                ((target - start) / lens[seg]).clamp(0.0, 1.0)
            } else {
                0.0
            };
            let (a, b) = (&path[seg], &path[seg + 1]);
            let c: Vec<f64> = a.c.iter().zip(&b.c).map(|(x, y)| x + t * (y - x)).collect();
            let v: Vec<f64> = a.v.iter().zip(&b.v).map(|(x, y)| x + t * (y - x)).collect();
            out.push(self.point(c, v));
        }
        out.push(path[p - 1].clone());
        out
    }

    pub(crate) fn run(
        &self,
        endpoint: &Field,
        beta: f64,
        cfg: &SolveConfig,
        mut warnings: Vec<SolverWarning>,
    ) -> Result<MinMaxTrace, SolveError> {
        check_spec(self.grid, self.spec)?;
        let p = cfg.path_points.max(3);
        let ec = endpoint.coeffs().to_vec();
        let ev = self.synth(&ec);
        let mut path: Vec<Point> = (0..p)
            .map(|k| {
                let t = k as f64 / (p - 1) as f64;
                self.point(
                    ec.iter().map(|x| t * x).collect(),
                    ev.iter().map(|x| t * x).collect(),
                )
            })
            .collect();
        let mut peak = self.locate_max(&path);
        let mut records = Vec::new();
        let mut path_max = Vec::new();
        let mut cap = 1.0f64;
        let mut stall = 0usize;
        let mut converged = false;
        let mut max_norm = 0.0f64;
        let mut growth_run = 0usize;
        let mut alarmed = false;
        let mut residual = f64::INFINITY;
        let mut iterations = 0usize;
        for iter in 0..cfg.max_iter {
            iterations = iter + 1;
            let u = Field::from_raw(self.grid, peak.at.c.clone());
            let (mut rec, grad) = record_from_values(&u, self.spec, self.m, self.n, &peak.at.v)?;
            let mut g = grad.coeffs().to_vec();
            if self.mask.is_some() {
                self.project(&mut g);
                rec.grad_norm = self.inner(&g, &g).max(0.0).sqrt();
                rec.cerami = (1.0 + rec.sol_norm) * rec.grad_norm;
            }
            residual = rec.grad_norm;
            if let Some(prev) = records.last().map(|r: &crate::functional::PSRecord| r.sol_norm) {
                growth_run = if rec.sol_norm > prev { growth_run + 1 } else { 0 };
            }
            max_norm = max_norm.max(rec.sol_norm);
            if !alarmed && rec.sol_norm > NORM_ALARM && growth_run >= 10 {
                warnings.push(SolverWarning::NormGrowth {
                    iteration: iter,
                    norm: rec.sol_norm,
                });
                alarmed = true;
            }
            records.push(rec);
            path_max.push(peak.at.energy);
            if residual <= cfg.tol {
                converged = true;
                break;
            }
            let gv = self.synth(&g);
            let g2 = self.inner(&g, &g);
            let mut alpha = cap;
            let mut step = None;
            for _ in 0..60 {
                let dc: Vec<f64> = g.iter().map(|x| -alpha * x).collect();
                let dv: Vec<f64> = gv.iter().map(|x| -alpha * x).collect();
                let dj = self.delta_energy(&peak.at, &dc, &dv);
                if dj <= -cfg.armijo * alpha * g2 {
                    step = Some((dc, dv));
                    break;
                }
                alpha *= 0.5;
            }
            let (dc, dv) = match step {
                Some(s) => s,
                None => {
                    stall += 1;
                    if stall >= cfg.stall_limit {
                        warnings.push(SolverWarning::Stalled { iteration: iter });
                        break;
                    }
                    continue;
                }
            };
            let c: Vec<f64> = peak.at.c.iter().zip(&dc).map(|(x, d)| x + d).collect();
            let v: Vec<f64> = peak.at.v.iter().zip(&dv).map(|(x, d)| x + d).collect();
            let moved = self.point(c, v);
            let pos = peak.node;
            let saved = if peak.split {
                path.insert(pos, moved);
                None
            } else {
                Some(core::mem::replace(&mut path[pos], moved))
            };
            let next = self.locate_max(&path);
            let slack = 1e-12 * (1.0 + peak.at.energy.abs());
            if next.at.energy > peak.at.energy + slack {
                match saved {
                    Some(old) => path[pos] = old,
                    None => {
                        path.remove(pos);
                    }
                }
                cap *= 0.5;
                stall += 1;
                if stall >= cfg.stall_limit {
                    warnings.push(SolverWarning::Stalled { iteration: iter });
                    break;
                }
                continue;
            }
            stall = 0;
            cap = (2.0 * cap).min(1.0);
            peak = next;
            if path.len() > p {
                self.thin(&mut path, &[pos, peak.node]);
                peak = self.locate_max(&path);
            }
            let lens = self.segment_lengths(&path);
            let mean = lens.iter().sum::<f64>() / lens.len() as f64;
            let longest = lens.iter().fold(0.0f64, |a, &b| a.max(b));
            if mean > 0.0 && longest > SPACING_RATIO * mean {
                let fresh = self.reparametrize(&path);
                let fresh_peak = self.locate_max(&fresh);
                if fresh_peak.at.energy <= peak.at.energy + slack {
                    path = fresh;
                    peak = fresh_peak;
                }
            }
        }
        let solution = Field::from_raw(self.grid, peak.at.c.clone());
        let full_residual = riesz_gradient(&solution, self.spec, self.m)?.norm_m(self.m);
        let trace = MinMaxTrace {
            records,
            path_max_energy: path_max,
            residual,
            full_residual,
            iterations,
            converged,
            energy: peak.at.energy,
            solution,
            max_sol_norm: max_norm,
            beta,
            warnings,
        };
        if converged {
            Ok(trace)
        } else {
            Err(SolveError::MaxIterExceeded(alloc::boxed::Box::new(trace)))
        }
    }
}

/// Mountain pass from `0` to the valley endpoint `βφ₁`.
pub fn mountain_pass_solve(
    spec: &NonlinearitySpec,
    grid: &Arc<Grid>,
    m: Order,
    cfg: &SolveConfig,
) -> Result<MinMaxTrace, SolveError> {
    let valley = find_valley_endpoint(spec, grid, m)?;
    let mut warnings = Vec::new();
    if !valley.h3_satisfied {
        warnings.push(SolverWarning::H3NotSatisfied);
    }
    let n = cfg.nominal_n.unwrap_or(grid.dim() as u32);
    Problem::new(grid, spec, m, n, None).run(&valley.endpoint, valley.beta, cfg, warnings)
}

/// Mountain pass from `0` to a caller-supplied endpoint with `J(e) < 0`.
pub fn mountain_pass_from(
    spec: &NonlinearitySpec,
    endpoint: &Field,
    m: Order,
    cfg: &SolveConfig,
) -> Result<MinMaxTrace, SolveError> {
    let grid = endpoint.grid();
    let n = cfg.nominal_n.unwrap_or(grid.dim() as u32);
    Problem::new(grid, spec, m, n, None).run(endpoint, 1.0, cfg, Vec::new())
}
