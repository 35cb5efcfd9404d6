//! Closed catalog of scalar nonlinearities `f(s)` with primitive `F` and
//! derivative `f'`.

use alloc::boxed::Box;
use alloc::vec::Vec;
use core::f64::consts::{E, FRAC_PI_4};

// inherent float methods shadow this whenever std is in the build graph
#[allow(unused_imports)]
use num_traits::Float;

use crate::error::{Error, Result};
use crate::quadrature::{integrate, Tolerance};

/// Largest supported nesting depth of the iterated logarithm.
pub const MAX_LOG_DEPTH: u32 = 4;

/// Default inner constant of the oscillating law, `e² + 1`.
pub const DEFAULT_OSCILLATION_SHIFT: f64 = E * E + 1.0;

/// A scalar nonlinearity. Parameters are checked by [`Law::validate`], which
/// [`super::NonlinearitySpec::new`] runs before any evaluation.
#[derive(Debug, Clone, PartialEq)]
pub enum Law {
    /// `|s|^{q−1} s`.
    Power { q: f64 },
    /// `a s`.
    Linear { a: f64 },
    /// `a s − |s|^{α−1} s`, `0 < α < 1`.
    LinearMinusPower { a: f64, alpha: f64 },
    /// `s ξ^α(|s| + shift)` with `ξ` the `depth`-fold logarithm, extended by
    /// zero below the point where `ξ` vanishes and blended in over one unit.
    IteratedLog { alpha: f64, depth: u32, shift: f64 },
    /// `|s|^{4m/(N−2m)} s / ln^q(|s| + 2)`.
    LogDampedCritical { n: u32, m: u32, q: f64 },
    /// `γ s^q + s^p (1 + sin(ln ln(s + c)))` for `s ≥ 0`, zero for `s < 0`.
    Oscillating { p: f64, gamma: f64, q: f64, c: f64 },
    /// `exp(rate·s)`.
    Exponential { rate: f64 },
    /// Finite sum of laws.
    Sum(Vec<Law>),
    /// `f⁺(s) = f(s)` for `s ≥ 0`, zero for `s < 0`.
    PositivePart(Box<Law>),
    /// C¹ continuation of `f` beyond a level by a multiple of `s^p`.
    Truncated(Box<Truncation>),
}

/// `f_n(s) = 0` for `s ≤ 0`, `f(s)` on `[0, level]` and
/// `f(level) − level f'(level)/p + f'(level)/(p level^{p−1}) s^p` beyond.
#[derive(Debug, Clone, PartialEq)]
pub struct Truncation {
    base: Law,
    level: f64,
    p: f64,
    offset: f64,
    coeff: f64,
    primitive_at_level: f64,
}

impl Truncation {
    pub fn base(&self) -> &Law {
        &self.base
    }

    pub fn level(&self) -> f64 {
        self.level
    }

    pub fn exponent(&self) -> f64 {
        self.p
    }

    /// Constant part `f(level) − level f'(level)/p` of the outer branch.
    pub fn offset(&self) -> f64 {
        self.offset
    }

    /// Coefficient `f'(level)/(p level^{p−1})` of `s^p` in the outer branch.
    pub fn coeff(&self) -> f64 {
        self.coeff
    }
}

fn bad(name: &'static str, value: f64, reason: &'static str) -> Error {
    Error::InvalidParameter {
        name,
        value,
        reason,
    }
}

fn finite(name: &'static str, v: f64) -> Result<()> {
    if v.is_finite() {
        Ok(())
    } else {
        Err(bad(name, v, "must be finite"))
    }
}

/// `exp` applied `depth − 1` times to 1: the point where the iterated log
/// crosses zero.
pub(crate) fn log_tower(depth: u32) -> f64 {
    (1..depth).fold(1.0, |acc, _| acc.exp())
}

fn quintic_step(t: f64) -> (f64, f64) {
    if t <= 0.0 {
        (0.0, 0.0)
    } else if t >= 1.0 {
        (1.0, 0.0)
    } else {
        let t2 = t * t;
        let t3 = t2 * t;
        (
            t3 * (10.0 - 15.0 * t + 6.0 * t2),
            30.0 * t2 * (t - 1.0) * (t - 1.0),
        )
    }
}

/// `(ξ^α w, d/dr[ξ^α w])` at `r`, with `w` the blend above the tower.
fn iterated_log_factor(r: f64, alpha: f64, depth: u32) -> (f64, f64) {
    let tower = log_tower(depth);
    let (w, dw) = quintic_step(r - tower);
    if w == 0.0 {
        return (0.0, 0.0);
    }
    let mut xi = r;
    let mut dxi = 1.0;
    for _ in 0..depth {
        dxi /= xi;
        xi = xi.ln();
    }
    if xi <= 0.0 {
        return (0.0, 0.0);
    }
    let xa = xi.powf(alpha);
    let g = xa * w;
    let dg = alpha * xa / xi * dxi * w + xa * dw;
    (g, dg)
}

/// `1 + sin(θ)` without cancellation near `θ = 3π/2`.
fn one_plus_sin(theta: f64) -> f64 {
    let s = (0.5 * theta + FRAC_PI_4).sin();
    2.0 * s * s
}

fn quad_tol() -> Tolerance {
    Tolerance::default()
}

impl Law {
    pub fn validate(&self) -> Result<()> {
        match self {
            Law::Power { q } => {
                finite("q", *q)?;
                if *q <= 0.0 {
                    return Err(bad("q", *q, "power exponent must be positive"));
                }
            }
            Law::Linear { a } => finite("a", *a)?,
            Law::LinearMinusPower { a, alpha } => {
                finite("a", *a)?;
                finite("alpha", *alpha)?;
                if !(*alpha > 0.0 && *alpha < 1.0) {
                    return Err(bad("alpha", *alpha, "requires 0 < alpha < 1"));
                }
            }
            Law::IteratedLog {
                alpha,
                depth,
                shift,
            } => {
                finite("alpha", *alpha)?;
                finite("shift", *shift)?;
                if *alpha <= 0.0 {
                    return Err(bad("alpha", *alpha, "must be positive"));
                }
                if *depth == 0 || *depth > MAX_LOG_DEPTH {
                    return Err(bad("depth", f64::from(*depth), "nesting depth must be 1..=4"));
                }
                if *shift < 0.0 {
                    return Err(bad("shift", *shift, "must be non-negative"));
                }
            }
            Law::LogDampedCritical { n, m, q } => {
                finite("q", *q)?;
                if *m == 0 || *n <= 2 * *m {
                    return Err(Error::FormulaUndefined {
                        what: "critical exponent 4m/(N-2m)",
                        n: *n,
                        m: *m,
                    });
                }
                if *q <= 0.0 {
                    return Err(bad("q", *q, "must be positive"));
                }
            }
            Law::Oscillating { p, gamma, q, c } => {
                for (name, v) in [("p", *p), ("gamma", *gamma), ("q", *q), ("c", *c)] {
                    finite(name, v)?;
                }
                if *p < 1.0 {
                    return Err(bad("p", *p, "must be >= 1"));
                }
                if *gamma < 0.0 {
                    return Err(bad("gamma", *gamma, "must be non-negative"));
                }
                if *q < 1.0 {
                    return Err(bad("q", *q, "must be >= 1"));
                }
                if *c <= E {
                    return Err(bad("c", *c, "ln ln(s + c) needs c > e"));
                }
            }
            Law::Exponential { rate } => {
                finite("rate", *rate)?;
                if *rate == 0.0 {
                    return Err(bad("rate", *rate, "must be non-zero"));
                }
            }
            Law::Sum(terms) => {
                if terms.is_empty() {
                    return Err(bad("terms", 0.0, "composite needs at least one term"));
                }
                for t in terms {
                    t.validate()?;
                }
            }
            Law::PositivePart(base) => base.validate()?,
            Law::Truncated(t) => {
                t.base.validate()?;
                finite("level", t.level)?;
                if t.level <= 0.0 {
                    return Err(bad("level", t.level, "truncation level must be positive"));
                }
                if t.p < 1.0 {
                    return Err(bad("p", t.p, "must be >= 1"));
                }
            }
        }
        Ok(())
    }

    /// Short catalog tag.
    pub fn kind_name(&self) -> &'static str {
        match self {
            Law::Power { .. } => "power",
            Law::Linear { .. } => "linear",
            Law::LinearMinusPower { .. } => "linear-minus-power",
            Law::IteratedLog { .. } => "iterated-log",
            Law::LogDampedCritical { .. } => "log-damped-critical",
            Law::Oscillating { .. } => "oscillating",
            Law::Exponential { .. } => "exponential",
            Law::Sum(_) => "composite",
            Law::PositivePart(_) => "positive-part",
            Law::Truncated(_) => "truncated",
        }
    }

    /// True when the law is identically zero on `s < 0` by construction.
    pub fn vanishes_on_negative(&self) -> bool {
        match self {
            Law::Oscillating { .. } | Law::PositivePart(_) | Law::Truncated(_) => true,
            Law::Sum(terms) => terms.iter().all(Law::vanishes_on_negative),
            _ => false,
        }
    }

    /// `f(s)`.
    pub fn value(&self, s: f64) -> f64 {
        match self {
            Law::Power { q } => s.signum() * s.abs().powf(*q),
            Law::Linear { a } => a * s,
            Law::LinearMinusPower { a, alpha } => {
                if s == 0.0 {
                    0.0
                } else {
                    a * s - s.signum() * s.abs().powf(*alpha)
                }
            }
            Law::IteratedLog {
                alpha,
                depth,
                shift,
            } => s * iterated_log_factor(s.abs() + shift, *alpha, *depth).0,
            Law::LogDampedCritical { n, m, q } => {
                let e = critical_power(*n, *m);
                let a = s.abs();
                if a == 0.0 {
                    return 0.0;
                }
                s.signum() * a.powf(e + 1.0) / (a + 2.0).ln().powf(*q)
            }
            Law::Oscillating { p, gamma, q, c } => {
                if s <= 0.0 {
                    return 0.0;
                }
                let osc = one_plus_sin((s + c).ln().ln());
                gamma * s.powf(*q) + s.powf(*p) * osc
            }
            Law::Exponential { rate } => (rate * s).exp(),
            Law::Sum(terms) => terms.iter().map(|t| t.value(s)).sum(),
            Law::PositivePart(base) => {
                if s < 0.0 {
                    0.0
                } else {
                    base.value(s)
                }
            }
            Law::Truncated(t) => {
                if s <= 0.0 {
                    0.0
                } else if s <= t.level {
                    t.base.value(s)
                } else {
                    t.offset + t.coeff * s.powf(t.p)
                }
            }
        }
    }

    /// `f'(s)`; one-sided from the right at kinks located at zero.
    pub fn derivative(&self, s: f64) -> f64 {
        match self {
            Law::Power { q } => {
                let a = s.abs();
                if a == 0.0 {
                    return if *q == 1.0 {
                        1.0
                    } else if *q > 1.0 {
                        0.0
                    } else {
                        f64::INFINITY
                    };
                }
                q * a.powf(q - 1.0)
            }
            Law::Linear { a } => *a,
            Law::LinearMinusPower { a, alpha } => {
                let x = s.abs();
                if x == 0.0 {
                    return f64::NEG_INFINITY;
                }
                a - alpha * x.powf(alpha - 1.0)
            }
            Law::IteratedLog {
                alpha,
                depth,
                shift,
            } => {
                let (g, dg) = iterated_log_factor(s.abs() + shift, *alpha, *depth);
                g + s.abs() * dg
            }
            Law::LogDampedCritical { n, m, q } => {
                let e = critical_power(*n, *m);
                let a = s.abs();
                if a == 0.0 {
                    return 0.0;
                }
                let l = (a + 2.0).ln();
                (e + 1.0) * a.powf(e) / l.powf(*q) - q * a.powf(e + 1.0) / (l.powf(q + 1.0) * (a + 2.0))
            }
            Law::Oscillating { p, gamma, q, c } => {
                if s < 0.0 {
                    return 0.0;
                }
                let lnr = (s + c).ln();
                let theta = lnr.ln();
                let dp = if s == 0.0 {
                    if *p == 1.0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    p * s.powf(p - 1.0)
                };
                let dq = if s == 0.0 {
                    if *q == 1.0 {
                        1.0
                    } else {
                        0.0
                    }
                } else {
                    q * s.powf(q - 1.0)
                };
                gamma * dq + dp * one_plus_sin(theta) + s.powf(*p) * theta.cos() / ((s + c) * lnr)
            }
            Law::Exponential { rate } => rate * (rate * s).exp(),
            Law::Sum(terms) => terms.iter().map(|t| t.derivative(s)).sum(),
            Law::PositivePart(base) => {
                if s < 0.0 {
                    0.0
                } else {
                    base.derivative(s)
                }
            }
            Law::Truncated(t) => {
                if s < 0.0 {
                    0.0
                } else if s <= t.level {
                    t.base.derivative(s)
                } else {
                    t.coeff * t.p * s.powf(t.p - 1.0)
                }
            }
        }
    }

    /// `F(s) = ∫_0^s f`, closed form where the catalog allows it.
    pub fn primitive(&self, s: f64) -> f64 {
        match self {
            Law::Power { q } => s.abs().powf(q + 1.0) / (q + 1.0),
            Law::Linear { a } => 0.5 * a * s * s,
            Law::LinearMinusPower { a, alpha } => {
                0.5 * a * s * s - s.abs().powf(alpha + 1.0) / (alpha + 1.0)
            }
            Law::IteratedLog { depth, shift, .. } => {
                // f is odd, so F is even; f vanishes below the tower.
                let x = s.abs();
                let start = (log_tower(*depth) - shift).max(0.0);
                if x <= start {
                    return 0.0;
                }
                integrate(|t| self.value(t), start, x, quad_tol()).0
            }
            Law::LogDampedCritical { .. } => {
                let x = s.abs();
                integrate(|t| self.value(t), 0.0, x, quad_tol()).0
            }
            Law::Oscillating { p, gamma, q, c } => {
                if s <= 0.0 {
                    return 0.0;
                }
                let smooth = gamma * s.powf(q + 1.0) / (q + 1.0);
                let osc = integrate(
                    |t: f64| if t <= 0.0 { 0.0 } else { t.powf(*p) * one_plus_sin((t + c).ln().ln()) },
                    0.0,
                    s,
                    quad_tol(),
                )
                .0;
                smooth + osc
            }
            Law::Exponential { rate } => (rate * s).exp_m1() / rate,
            Law::Sum(terms) => terms.iter().map(|t| t.primitive(s)).sum(),
            Law::PositivePart(base) => {
                if s < 0.0 {
                    0.0
                } else {
                    base.primitive(s)
                }
            }
            Law::Truncated(t) => {
                if s <= 0.0 {
                    0.0
                } else if s <= t.level {
                    t.base.primitive(s)
                } else {
                    t.primitive_at_level
                        + t.offset * (s - t.level)
                        + t.coeff * (s.powf(t.p + 1.0) - t.level.powf(t.p + 1.0)) / (t.p + 1.0)
                }
            }
        }
    }

    /// True when `primitive` avoids numerical quadrature.
    pub fn has_closed_primitive(&self) -> bool {
        match self {
            Law::IteratedLog { .. } | Law::LogDampedCritical { .. } | Law::Oscillating { .. } => {
                false
            }
            Law::Sum(terms) => terms.iter().all(Law::has_closed_primitive),
            Law::PositivePart(base) => base.has_closed_primitive(),
            Law::Truncated(t) => t.base.has_closed_primitive(),
            _ => true,
        }
    }

    pub(crate) fn positive_part(&self) -> Law {
        if self.vanishes_on_negative() {
            self.clone()
        } else {
            Law::PositivePart(Box::new(self.clone()))
        }
    }

    pub(crate) fn truncated(&self, level: f64, p: f64) -> Result<Law> {
        finite("level", level)?;
        if level <= 0.0 {
            return Err(bad("level", level, "truncation level must be positive"));
        }
        if !(p >= 1.0) || !p.is_finite() {
            return Err(bad("p", p, "must be >= 1"));
        }
        let f = self.value(level);
        let df = self.derivative(level);
        if !f.is_finite() || !df.is_finite() {
            return Err(bad("level", level, "f or f' not finite at the truncation level"));
        }
        let t = Truncation {
            base: self.clone(),
            level,
            p,
            offset: f - level * df / p,
            coeff: df / (p * level.powf(p - 1.0)),
            primitive_at_level: self.primitive(level),
        };
        Ok(Law::Truncated(Box::new(t)))
    }
}

/// `4m/(N − 2m)`.
pub(crate) fn critical_power(n: u32, m: u32) -> f64 {
    4.0 * f64::from(m) / (f64::from(n) - 2.0 * f64::from(m))
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn catalog() -> Vec<Law> {
        vec![
            Law::Power { q: 3.0 },
            Law::Power { q: 1.5 },
            Law::Linear { a: 3.0 },
            Law::LinearMinusPower { a: 2.0, alpha: 0.5 },
            Law::IteratedLog {
                alpha: 1.0,
                depth: 2,
                shift: 0.0,
            },
            Law::IteratedLog {
                alpha: 0.5,
                depth: 1,
                shift: 3.0,
            },
            Law::LogDampedCritical { n: 5, m: 1, q: 1.0 },
            Law::Oscillating {
                p: 2.0,
                gamma: 0.5,
                q: 1.5,
                c: DEFAULT_OSCILLATION_SHIFT,
            },
            Law::Exponential { rate: 0.7 },
            Law::Sum(vec![Law::Power { q: 3.0 }, Law::Linear { a: -0.5 }]),
        ]
    }

    #[test]
    fn examples() {
        let lin = Law::Linear { a: 3.0 };
        assert_eq!(lin.value(2.0), 6.0);
        assert_eq!(lin.primitive(2.0), 6.0);
        let cube = Law::Power { q: 3.0 };
        assert_eq!(cube.primitive(2.0), 4.0);
        let osc = Law::Oscillating {
            p: 2.0,
            gamma: 0.0,
            q: 2.0,
            c: 16.0,
        };
        assert_eq!(osc.value(-5.0), 0.0);
        assert_eq!(osc.primitive(-5.0), 0.0);
    }

    #[test]
    fn primitive_vanishes_at_zero() {
        for law in catalog() {
            assert_eq!(law.primitive(0.0), 0.0, "{}", law.kind_name());
        }
    }

    #[test]
    fn primitive_differentiates_back() {
        for law in catalog() {
            for &s in &[-7.3, -2.1, -0.4, 0.3, 1.7, 4.2, 12.5] {
                let h = 1e-4 * (1.0 + s.abs());
                let fd = (law.primitive(s + h) - law.primitive(s - h)) / (2.0 * h);
                let f = law.value(s);
                let err = (fd - f).abs() / f.abs().max(1.0);
                assert!(err < 1e-6, "{} at {s}: {fd} vs {f}", law.kind_name());
            }
        }
    }

    #[test]
    fn derivative_matches_finite_differences() {
        for law in catalog() {
            for &s in &[-6.1, -1.3, 0.6, 2.9, 9.7] {
                let h = 1e-5 * (1.0 + s.abs());
                let fd = (law.value(s + h) - law.value(s - h)) / (2.0 * h);
                let d = law.derivative(s);
                let err = (fd - d).abs() / d.abs().max(1.0);
                assert!(err < 1e-6, "{} at {s}: {fd} vs {d}", law.kind_name());
            }
        }
    }

    #[test]
    fn iterated_log_blend_is_c1() {
        let law = Law::IteratedLog {
            alpha: 0.5,
            depth: 2,
            shift: 0.0,
        };
        let tower = log_tower(2);
        assert_eq!(law.value(tower), 0.0);
        assert_eq!(law.value(1.0), 0.0);
        for &s in &[tower + 1e-3, tower + 0.5, tower + 1.0 - 1e-3, tower + 1.0 + 1e-3] {
            let h = 1e-7;
            let fd = (law.value(s + h) - law.value(s - h)) / (2.0 * h);
            assert!((fd - law.derivative(s)).abs() < 1e-5);
        }
    }

    #[test]
    fn oscillation_zero_is_resolved() {
        // ln ln(s + c) = 3π/2 makes 1 + sin vanish; the law must reach
        // (numerically) zero there instead of stalling at cancellation level.
        let c = DEFAULT_OSCILLATION_SHIFT;
        let law = Law::Oscillating {
            p: 2.0,
            gamma: 0.0,
            q: 2.0,
            c,
        };
        let l1 = (1.5 * core::f64::consts::PI).exp().exp();
        let v = law.value(l1 - c) / (l1 * l1);
        assert!(v < 1e-28, "{v}");
    }

    #[test]
    fn validation_catches_ranges() {
        assert!(Law::LinearMinusPower { a: 1.0, alpha: 1.0 }.validate().is_err());
        assert!(Law::Oscillating {
            p: 2.0,
            gamma: 0.0,
            q: 2.0,
            c: 2.0
        }
        .validate()
        .is_err());
        assert!(Law::LogDampedCritical { n: 2, m: 1, q: 1.0 }.validate().is_err());
        assert!(Law::IteratedLog {
            alpha: 1.0,
            depth: 5,
            shift: 0.0
        }
        .validate()
        .is_err());
        assert!(Law::Sum(vec![]).validate().is_err());
        for law in catalog() {
            law.validate().unwrap();
        }
    }
}
