//! Nonlinearities `f(x, s) = g(x) f(s)`: catalog, truncations and
//! on-sample hypothesis checks.

mod hypothesis;
mod law;

use alloc::vec::Vec;

pub use hypothesis::{
    check_hypothesis, hypothesis_suite, Constants, HypothesisId, HypothesisReport, SampleRange,
    Sampling, Sides, Verdict, Witness, WitnessKind, SLOPE_TOL,
};
pub use law::{Law, Truncation, DEFAULT_OSCILLATION_SHIFT, MAX_LOG_DEPTH};

pub(crate) use law::critical_power;

use crate::error::{Error, Result};

/// A validated nonlinearity with optional positive modulation `g` sampled on
/// the quadrature nodes of a grid.
#[derive(Debug, Clone, PartialEq)]
pub struct NonlinearitySpec {
    law: Law,
    modulation: Option<Vec<f64>>,
}

impl NonlinearitySpec {
    pub fn new(law: Law) -> Result<Self> {
        law.validate()?;
        Ok(NonlinearitySpec {
            law,
            modulation: None,
        })
    }

    /// Attach `g(x)` sampled on grid nodes (length `Grid::node_len`).
    pub fn with_modulation(mut self, values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(Error::ShapeMismatch {
                expected: 1,
                found: 0,
            });
        }
        for &g in &values {
            if !g.is_finite() {
                return Err(Error::NonFinite);
            }
            if g <= 0.0 {
                return Err(Error::InvalidParameter {
                    name: "modulation",
                    value: g,
                    reason: "g(x) must be positive",
                });
            }
        }
        self.modulation = Some(values);
        Ok(self)
    }

    pub fn law(&self) -> &Law {
        &self.law
    }

    pub fn modulation(&self) -> Option<&[f64]> {
        self.modulation.as_deref()
    }

    /// `(min g, max g)`; `(1, 1)` without modulation.
    pub fn modulation_range(&self) -> (f64, f64) {
        match &self.modulation {
            None => (1.0, 1.0),
            Some(g) => g
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                    (lo.min(v), hi.max(v))
                }),
        }
    }

    /// Weight at quadrature node `node`.
    #[inline]
    pub fn weight(&self, node: usize) -> f64 {
        match &self.modulation {
            None => 1.0,
            Some(g) => g[node],
        }
    }

    /// `f(s)` without the spatial factor.
    #[inline]
    pub fn f(&self, s: f64) -> f64 {
        self.law.value(s)
    }

    /// `F(s)` without the spatial factor.
    #[inline]
    pub fn primitive(&self, s: f64) -> f64 {
        self.law.primitive(s)
    }

    /// `f'(s)` without the spatial factor.
    #[inline]
    pub fn fprime(&self, s: f64) -> f64 {
        self.law.derivative(s)
    }

    /// Checks `f(−s) = −f(s)` on a fixed geometric sample and that the
    /// modulation does not break the symmetry (it never does, being a factor).
    pub fn is_odd_on_samples(&self) -> bool {
        let mut s = 1e-6;
        while s < 1e8 {
            let a = self.f(s);
            let b = self.f(-s);
            if (a + b).abs() > 1e-12 * (a.abs() + b.abs()).max(f64::MIN_POSITIVE) {
                return false;
            }
            s *= 1.37;
        }
        true
    }

    fn check_node(&self, s: f64, node: Option<usize>) -> Result<f64> {
        if !s.is_finite() {
            return Err(Error::NonFinite);
        }
        match (node, &self.modulation) {
            (None, _) => Ok(1.0),
            (Some(_), None) => Ok(1.0),
            (Some(j), Some(g)) => g.get(j).copied().ok_or(Error::ShapeMismatch {
                expected: g.len(),
                found: j + 1,
            }),
        }
    }
}

/// `g(x) f(s)` with `x` given as a quadrature node index.
pub fn eval_f(spec: &NonlinearitySpec, s: f64, node: Option<usize>) -> Result<f64> {
    Ok(spec.check_node(s, node)? * spec.f(s))
}

/// `g(x) F(s)`.
#[allow(non_snake_case)]
pub fn eval_F(spec: &NonlinearitySpec, s: f64, node: Option<usize>) -> Result<f64> {
    Ok(spec.check_node(s, node)? * spec.primitive(s))
}

/// `g(x) f'(s)`.
pub fn eval_fprime(spec: &NonlinearitySpec, s: f64, node: Option<usize>) -> Result<f64> {
    Ok(spec.check_node(s, node)? * spec.fprime(s))
}

/// `f⁺`: zero for `s < 0`, unchanged otherwise. Idempotent.
pub fn positive_truncation(spec: &NonlinearitySpec) -> NonlinearitySpec {
    NonlinearitySpec {
        law: spec.law.positive_part(),
        modulation: spec.modulation.clone(),
    }
}

/// C¹ truncation at level `s_n` with outer growth `s^p`.
pub fn truncate_at(spec: &NonlinearitySpec, s_n: f64, p: f64) -> Result<NonlinearitySpec> {
    Ok(NonlinearitySpec {
        law: spec.law.truncated(s_n, p)?,
        modulation: spec.modulation.clone(),
    })
}
