#![allow(dead_code)]

use polypass_core::{Field, Grid, Law, NonlinearitySpec};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::f64::consts::PI;
use std::sync::Arc;

/// Steps of the shooting integrator per grid interval.
const SUBSTEPS: usize = 40;

fn rk4(u: f64, v: f64, h: f64) -> (f64, f64) {
    // u' = v, v' = -u^3
    let f = |u: f64, v: f64| (v, -u * u * u);
    let (k1u, k1v) = f(u, v);
    let (k2u, k2v) = f(u + 0.5 * h * k1u, v + 0.5 * h * k1v);
    let (k3u, k3v) = f(u + 0.5 * h * k2u, v + 0.5 * h * k2v);
    let (k4u, k4v) = f(u + h * k3u, v + h * k3v);
    (
        u + h / 6.0 * (k1u + 2.0 * k2u + 2.0 * k3u + k4u),
        v + h / 6.0 * (k1v + 2.0 * k2v + 2.0 * k3v + k4v),
    )
}

/// Trajectory from `u(0) = 0, u'(0) = σ` sampled at `jπ/intervals`.
fn shoot(sigma: f64, intervals: usize) -> Vec<f64> {
    let h = PI / (intervals * SUBSTEPS) as f64;
    let mut out = Vec::with_capacity(intervals + 1);
    let (mut u, mut v) = (0.0, sigma);
    out.push(u);
    for _ in 0..intervals {
        for _ in 0..SUBSTEPS {
            (u, v) = rk4(u, v, h);
        }
        out.push(u);
    }
    out
}

fn zeros_upto_pi(traj: &[f64]) -> usize {
    let mut count = traj[1..]
        .windows(2)
        .filter(|w| w[0] != 0.0 && w[0].signum() != w[1].signum())
        .count();
    if *traj.last().unwrap() == 0.0 {
        count += 1;
    }
    count
}

/// Shooting solution of `−u″ = u³`, `u(0) = u(π) = 0`, with `zeros`
/// interior zeros and `u'(0) > 0`, sampled at the `nodes` interior grid
/// points `jπ/(nodes + 1)`.
pub fn cubic_oracle(zeros: usize, nodes: usize) -> Vec<f64> {
    let intervals = nodes + 1;
    let (mut lo, mut hi) = (1e-3, 1.0);
    while zeros_upto_pi(&shoot(hi, intervals)) <= zeros {
        hi *= 2.0;
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if zeros_upto_pi(&shoot(mid, intervals)) <= zeros {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    let traj = shoot(0.5 * (lo + hi), intervals);
    traj[1..intervals].to_vec()
}

pub fn sup_diff_up_to_sign(a: &[f64], b: &[f64]) -> f64 {
    let d = |s: f64| a.iter().zip(b).map(|(x, y)| (x - s * y).abs()).fold(0.0, f64::max);
    d(1.0).min(d(-1.0))
}

pub fn sign_changes(vals: &[f64]) -> usize {
    let peak = vals.iter().fold(0.0f64, |a, x| a.max(x.abs()));
    let signs: Vec<f64> = vals
        .iter()
        .filter(|x| x.abs() > 1e-8 * peak)
        .map(|x| x.signum())
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Band-limited field with coefficients decaying like `|k|^{-2}`.
pub fn random_field(grid: &Arc<Grid>, rng: &mut ChaCha8Rng, scale: f64) -> Field {
    let c: Vec<f64> = (0..grid.coeff_len())
        .map(|k| scale * rng.gen_range(-1.0..1.0) / grid.wavenumber_sq(k))
        .collect();
    Field::from_coeffs(grid, c).unwrap()
}

/// Every law kind, with parameters in their documented ranges.
pub fn catalog() -> Vec<(&'static str, NonlinearitySpec)> {
    let e2 = std::f64::consts::E * std::f64::consts::E;
    let laws = vec![
        ("cubic", Law::Power { q: 3.0 }),
        ("power-1.5", Law::Power { q: 1.5 }),
        ("linear", Law::Linear { a: 2.0 }),
        ("linear-minus-power", Law::LinearMinusPower { a: 2.0, alpha: 0.5 }),
        (
            "iterated-log",
            Law::IteratedLog {
                alpha: 1.0,
                depth: 2,
                shift: 0.0,
            },
        ),
        (
            "log-damped",
            Law::LogDampedCritical { n: 5, m: 1, q: 1.0 },
        ),
        (
            "oscillating",
            Law::Oscillating {
                p: 2.0,
                gamma: 1.0,
                q: 1.5,
                c: e2 + 1.0,
            },
        ),
        ("exponential", Law::Exponential { rate: 0.5 }),
        (
            "sum",
            Law::Sum(vec![Law::Power { q: 3.0 }, Law::Linear { a: 0.5 }]),
        ),
    ];
    laws.into_iter()
        .map(|(n, l)| (n, NonlinearitySpec::new(l).unwrap()))
        .collect()
}
