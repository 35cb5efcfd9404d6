//! On-sample verdicts for the growth and superlinearity conditions.
//!
//! Every verdict is a claim about a finite geometric sample, never a proof.
//! Limits at infinity are read off log–log slopes over the top decade of the
//! sample; limits at zero off the smallest sampled magnitudes.

use alloc::vec::Vec;
use core::cell::OnceCell;
use core::f64::consts::LN_10;
use core::fmt;
use core::str::FromStr;

// inherent float methods shadow this whenever std is in the build graph
#[allow(unused_imports)]
use num_traits::Float;

use super::NonlinearitySpec;
use crate::error::{Error, Result};
use crate::quadrature::{integrate, Tolerance};

/// Slope tolerance for all log–log trend decisions.
pub const SLOPE_TOL: f64 = 1e-3;
/// A refined local minimum of `f/s` this far below its surroundings counts
/// as a zero of `f`.
const ZERO_DEPTH: f64 = 1e-9;
/// Lowest admissible envelope exponent of `f/s^p` for (f2).
const ENVELOPE_FLOOR: f64 = -0.1;
/// Smallest admissible fitted `p` when `f` grows at most linearly.
const P_MARGIN: f64 = 1e-3;
const MAX_WITNESSES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub enum HypothesisId {
    #[cfg_attr(feature = "serde", serde(rename = "H"))]
    H,
    #[cfg_attr(feature = "serde", serde(rename = "H0"))]
    H0,
    #[cfg_attr(feature = "serde", serde(rename = "H1"))]
    H1,
    #[cfg_attr(feature = "serde", serde(rename = "H2"))]
    H2,
    #[cfg_attr(feature = "serde", serde(rename = "H3"))]
    H3,
    #[cfg_attr(feature = "serde", serde(rename = "H4"))]
    H4,
    #[cfg_attr(feature = "serde", serde(rename = "H'1"))]
    HPrime1,
    #[cfg_attr(feature = "serde", serde(rename = "H'4"))]
    HPrime4,
    #[cfg_attr(feature = "serde", serde(rename = "AR-i"))]
    ArI,
    #[cfg_attr(feature = "serde", serde(rename = "SUB-ii"))]
    SubIi,
    #[cfg_attr(feature = "serde", serde(rename = "SSL"))]
    Ssl,
    #[cfg_attr(feature = "serde", serde(rename = "f1"))]
    F1,
    #[cfg_attr(feature = "serde", serde(rename = "f2"))]
    F2,
    #[cfg_attr(feature = "serde", serde(rename = "f3"))]
    F3,
}

impl HypothesisId {
    pub const ALL: [HypothesisId; 14] = [
        HypothesisId::H,
        HypothesisId::H0,
        HypothesisId::H1,
        HypothesisId::H2,
        HypothesisId::H3,
        HypothesisId::H4,
        HypothesisId::HPrime1,
        HypothesisId::HPrime4,
        HypothesisId::ArI,
        HypothesisId::SubIi,
        HypothesisId::Ssl,
        HypothesisId::F1,
        HypothesisId::F2,
        HypothesisId::F3,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            HypothesisId::H => "H",
            HypothesisId::H0 => "H0",
            HypothesisId::H1 => "H1",
            HypothesisId::H2 => "H2",
            HypothesisId::H3 => "H3",
            HypothesisId::H4 => "H4",
            HypothesisId::HPrime1 => "H'1",
            HypothesisId::HPrime4 => "H'4",
            HypothesisId::ArI => "AR-i",
            HypothesisId::SubIi => "SUB-ii",
            HypothesisId::Ssl => "SSL",
            HypothesisId::F1 => "f1",
            HypothesisId::F2 => "f2",
            HypothesisId::F3 => "f3",
        }
    }

    /// Ids whose formula contains `(N+2m)/(N−2m)`.
    pub fn needs_critical_exponent(self) -> bool {
        matches!(self, HypothesisId::H | HypothesisId::H2)
    }
}

impl fmt::Display for HypothesisId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for HypothesisId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        HypothesisId::ALL
            .iter()
            .copied()
            .find(|id| id.as_str().eq_ignore_ascii_case(s))
            .ok_or(Error::UnknownHypothesis)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum Verdict {
    SatisfiedOnSample,
    Violated,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
#[cfg_attr(feature = "serde", serde(rename_all = "kebab-case"))]
pub enum WitnessKind {
    /// The measured ratio falls below the required bound.
    RatioBelowBound,
    /// A refined local minimum where `f` vanishes to rounding level.
    NumericalZero,
    /// A quantity required to be positive is not.
    Nonpositive,
    /// The top-decade trend goes the wrong way.
    TailTrend,
    /// A fitted exponent or limit misses its admissible range.
    Threshold,
    /// `f` overflowed on the sample.
    NonFinite,
}

/// `(s, measured quantity)`; `s` carries the sign of the sampled branch.
#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Witness {
    pub s: f64,
    pub value: f64,
    pub kind: WitnessKind,
}

/// Fitted constants; fields not meaningful for an id stay `None`.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct Constants {
    pub c: Option<f64>,
    pub s0: Option<f64>,
    pub theta: Option<f64>,
    pub p: Option<f64>,
    pub p1: Option<f64>,
    pub q: Option<f64>,
    pub mu: Option<f64>,
    pub limit: Option<f64>,
}

#[derive(Debug, Clone, Copy, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct SampleRange {
    pub s_min: f64,
    pub s_max: f64,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq)]
#[cfg_attr(feature = "serde", derive(serde::Serialize))]
pub struct HypothesisReport {
    pub id: HypothesisId,
    pub verdict: Verdict,
    pub witnesses: Vec<Witness>,
    pub constants: Constants,
    pub sample_range: SampleRange,
    pub n: u32,
    pub m: u32,
    pub notes: Vec<&'static str>,
}

impl HypothesisReport {
    pub fn satisfied(&self) -> bool {
        self.verdict == Verdict::SatisfiedOnSample
    }

    fn violate(&mut self, s: f64, value: f64, kind: WitnessKind) {
        self.verdict = Verdict::Violated;
        if self.witnesses.len() < MAX_WITNESSES {
            self.witnesses.push(Witness { s, value, kind });
        }
    }
}

/// Which signs of `s` enter the large-|s| sample.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sides {
    /// Positive only when the law vanishes on `s < 0`, both otherwise.
    Auto,
    Both,
    Positive,
}

/// Geometric sampling configuration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sampling {
    pub s_min: f64,
    pub s_max: f64,
    pub per_decade: usize,
    pub small_min: f64,
    pub small_max: f64,
    /// Growth exponent of (ii); fitted when absent.
    pub p: Option<f64>,
    /// Exponent of (H'1); fitted when absent.
    pub p1: Option<f64>,
    /// First eigenvalue used by (H3), (H4), (f1); defaults to `N^m`, the
    /// value on the box `(0,π)^N`.
    pub lambda1: Option<f64>,
    pub sides: Sides,
}

impl Default for Sampling {
    fn default() -> Self {
        Sampling {
            s_min: 10.0,
            s_max: 1e8,
            per_decade: 200,
            small_min: 1e-8,
            small_max: 1e-2,
            p: None,
            p1: None,
            lambda1: None,
            sides: Sides::Auto,
        }
    }
}

impl Sampling {
    fn validate(&self) -> Result<()> {
        let bad = |name, value, reason| {
            Err(Error::InvalidParameter {
                name,
                value,
                reason,
            })
        };
        if !(self.s_min > 0.0 && self.s_min.is_finite()) {
            return bad("s_min", self.s_min, "must be positive");
        }
        if !(self.s_max >= 100.0 * self.s_min && self.s_max.is_finite()) {
            return bad("s_max", self.s_max, "needs at least two decades above s_min");
        }
        if self.per_decade < 10 {
            return bad("per_decade", self.per_decade as f64, "needs at least 10 points per decade");
        }
        if !(self.small_min > 0.0 && self.small_max >= 10.0 * self.small_min && self.small_max <= 1.0)
        {
            return bad("small_min", self.small_min, "small-t range must span a decade inside (0, 1]");
        }
        if let Some(p) = self.p {
            if !(p > 1.0 && p.is_finite()) {
                return bad("p", p, "must exceed 1");
            }
        }
        if let Some(p1) = self.p1 {
            if !(p1 > 1.0 && p1.is_finite()) {
                return bad("p1", p1, "must exceed 1");
            }
        }
        if let Some(l) = self.lambda1 {
            if !(l > 0.0 && l.is_finite()) {
                return bad("lambda1", l, "must be positive");
            }
        }
        Ok(())
    }
}

fn geometric(lo: f64, hi: f64, per_decade: usize) -> Vec<f64> {
    let (a, b) = (lo.ln(), hi.ln());
    let count = ((b - a) / LN_10 * per_decade as f64).round() as usize;
    let count = count.max(2);
    let mut out: Vec<f64> = (0..=count)
        .map(|i| (a + (b - a) * i as f64 / count as f64).exp())
        .collect();
    out[0] = lo;
    out[count] = hi;
    out
}

/// Samples of one branch: `x = sign·s` and modulation weight `g`.
struct Table<'a> {
    spec: &'a NonlinearitySpec,
    sign: f64,
    g: f64,
    s: Vec<f64>,
    ln_s: Vec<f64>,
    f: Vec<f64>,
    overflow: Option<f64>,
    prim: OnceCell<Vec<f64>>,
    fp: OnceCell<Vec<f64>>,
}

impl<'a> Table<'a> {
    fn new(spec: &'a NonlinearitySpec, sign: f64, g: f64, samples: &[f64]) -> Self {
        let mut s = Vec::with_capacity(samples.len());
        let mut f = Vec::with_capacity(samples.len());
        let mut overflow = None;
        for &v in samples {
            let fv = g * spec.f(sign * v);
            if !fv.is_finite() {
                overflow = Some(sign * v);
                break;
            }
            s.push(v);
            f.push(fv);
        }
        let ln_s = s.iter().map(|v| v.ln()).collect();
        Table {
            spec,
            sign,
            g,
            s,
            ln_s,
            f,
            overflow,
            prim: OnceCell::new(),
            fp: OnceCell::new(),
        }
    }

    fn len(&self) -> usize {
        self.s.len()
    }

    fn x(&self, i: usize) -> f64 {
        self.sign * self.s[i]
    }

    /// `g F(x)`, accumulated panel by panel when `F` needs quadrature.
    fn prim(&self) -> &[f64] {
        self.prim.get_or_init(|| {
            let law = self.spec.law();
            if self.len() == 0 {
                return Vec::new();
            }
            if law.has_closed_primitive() {
                return (0..self.len()).map(|i| self.g * law.primitive(self.x(i))).collect();
            }
            let mut out = Vec::with_capacity(self.len());
            let mut acc = law.primitive(self.x(0));
            out.push(self.g * acc);
            for i in 1..self.len() {
                acc += integrate(|t| law.value(t), self.x(i - 1), self.x(i), Tolerance::default()).0;
                out.push(self.g * acc);
            }
            out
        })
    }

    fn fp(&self) -> &[f64] {
        self.fp
            .get_or_init(|| (0..self.len()).map(|i| self.g * self.spec.fprime(self.x(i))).collect())
    }

    fn hi(&self) -> f64 {
        *self.ln_s.last().unwrap_or(&0.0)
    }

    fn lo(&self) -> f64 {
        *self.ln_s.first().unwrap_or(&0.0)
    }

    /// Least-squares slope of `ly(i)` against `ln s` over `[a, b]`, skipping
    /// non-finite values.
    fn slope_in(&self, a: f64, b: f64, ly: impl Fn(usize) -> f64) -> Option<f64> {
        let (mut n, mut sx, mut sy, mut sxx, mut sxy) = (0.0, 0.0, 0.0, 0.0, 0.0);
        for i in 0..self.len() {
            let x = self.ln_s[i];
            if x < a - 1e-12 || x > b + 1e-12 {
                continue;
            }
            let y = ly(i);
            if !y.is_finite() {
                continue;
            }
            n += 1.0;
            sx += x;
            sy += y;
            sxx += x * x;
            sxy += x * y;
        }
        if n < 3.0 {
            return None;
        }
        let den = n * sxx - sx * sx;
        if den <= 0.0 {
            return None;
        }
        Some((n * sxy - sx * sy) / den)
    }

    fn top_slope(&self, ly: impl Fn(usize) -> f64) -> Option<f64> {
        let hi = self.hi();
        self.slope_in(hi - LN_10, hi, ly)
    }

    /// Exponent `γ` in `y ≈ s^γ`, extrapolated from the last two decades
    /// with the model `γ(s) = γ∞ − b/ln s`.
    fn limit_exponent(&self, ly: impl Fn(usize) -> f64 + Copy) -> Option<f64> {
        let hi = self.hi();
        let e1 = self.slope_in(hi - LN_10, hi, ly)?;
        let e2 = match self.slope_in(hi - 2.0 * LN_10, hi - LN_10, ly) {
            Some(e) => e,
            None => return Some(e1),
        };
        let l1 = hi - 0.5 * LN_10;
        let l2 = hi - 1.5 * LN_10;
        if l2 <= 1.0 {
            return Some(e1);
        }
        let b = (e1 - e2) / (1.0 / l2 - 1.0 / l1);
        Some(e1 + b / l1)
    }

    /// Max of `ly` over a decade window, with its index.
    fn window_max(&self, a: f64, b: f64, ly: impl Fn(usize) -> f64) -> Option<(usize, f64)> {
        let mut best: Option<(usize, f64)> = None;
        for i in 0..self.len() {
            let x = self.ln_s[i];
            if x < a - 1e-12 || x > b + 1e-12 {
                continue;
            }
            let y = ly(i);
            if y.is_nan() {
                continue;
            }
            if best.map_or(true, |(_, v)| y > v) {
                best = Some((i, y));
            }
        }
        best
    }
}

struct Ctx<'a> {
    spec: &'a NonlinearitySpec,
    n: u32,
    m: u32,
    lambda1: f64,
    sampling: Sampling,
    large: Vec<Table<'a>>,
    small: Vec<Table<'a>>,
    range: SampleRange,
    sub_p: OnceCell<f64>,
}

impl<'a> Ctx<'a> {
    fn new(spec: &'a NonlinearitySpec, n: u32, m: u32, sampling: &Sampling) -> Result<Self> {
        if m == 0 {
            return Err(Error::InvalidOrder(0));
        }
        if n == 0 {
            return Err(Error::InvalidParameter {
                name: "N",
                value: 0.0,
                reason: "nominal dimension must be positive",
            });
        }
        sampling.validate()?;
        let both = match sampling.sides {
            Sides::Both => true,
            Sides::Positive => false,
            Sides::Auto => !spec.law().vanishes_on_negative(),
        };
        let (g_lo, g_hi) = spec.modulation_range();
        let mut gs = alloc::vec![g_lo];
        if g_hi != g_lo {
            gs.push(g_hi);
        }
        let signs: &[f64] = if both { &[1.0, -1.0] } else { &[1.0] };
        let large_s = geometric(sampling.s_min, sampling.s_max, sampling.per_decade);
        let small_s = geometric(sampling.small_min, sampling.small_max, sampling.per_decade);
        let mut large = Vec::new();
        let mut small = Vec::new();
        for &sign in signs {
            for &g in &gs {
                large.push(Table::new(spec, sign, g, &large_s));
                small.push(Table::new(spec, sign, g, &small_s));
            }
        }
        let lambda1 = sampling
            .lambda1
            .unwrap_or_else(|| (n as f64).powi(m as i32));
        Ok(Ctx {
            spec,
            n,
            m,
            lambda1,
            sampling: *sampling,
            large,
            small,
            range: SampleRange {
                s_min: sampling.s_min,
                s_max: sampling.s_max,
                count: large_s.len() * signs.len(),
            },
            sub_p: OnceCell::new(),
        })
    }

    fn nf(&self) -> f64 {
        f64::from(self.n)
    }

    fn mf(&self) -> f64 {
        f64::from(self.m)
    }

    fn critical(&self) -> Option<f64> {
        if self.n > 2 * self.m {
            Some((self.nf() + 2.0 * self.mf()) / (self.nf() - 2.0 * self.mf()))
        } else {
            None
        }
    }

    fn report(&self, id: HypothesisId) -> HypothesisReport {
        HypothesisReport {
            id,
            verdict: Verdict::SatisfiedOnSample,
            witnesses: Vec::new(),
            constants: Constants::default(),
            sample_range: self.range,
            n: self.n,
            m: self.m,
            notes: Vec::new(),
        }
    }

    fn positive(&self) -> impl Iterator<Item = &Table<'a>> {
        self.large.iter().filter(|t| t.sign > 0.0)
    }

    fn g_min_positive(&self) -> &Table<'a> {
        // the first positive table carries g_min by construction
        self.positive().next().expect("positive branch is always sampled")
    }

    /// Growth exponent for (ii): supplied or extrapolated from the tail.
    fn growth_p(&self) -> f64 {
        if let Some(p) = self.sampling.p {
            return p;
        }
        *self.sub_p.get_or_init(|| {
            let mut p = f64::NEG_INFINITY;
            for t in &self.large {
                if let Some(e) = t.limit_exponent(|i| t.f[i].abs().ln()) {
                    p = p.max(e);
                }
            }
            if p > 1.0 + P_MARGIN {
                p
            } else {
                1.0 + P_MARGIN
            }
        })
    }

    fn run(&self, id: HypothesisId) -> Result<HypothesisReport> {
        if id.needs_critical_exponent() && self.critical().is_none() {
            return Err(Error::FormulaUndefined {
                what: "critical exponent (N+2m)/(N-2m)",
                n: self.n,
                m: self.m,
            });
        }
        Ok(match id {
            HypothesisId::H => self.check_h(),
            HypothesisId::H0 => self.check_h0(),
            HypothesisId::H1 => self.check_h1(),
            HypothesisId::H2 => self.check_h2(),
            HypothesisId::H3 => self.check_h3(),
            HypothesisId::H4 => self.check_h4(),
            HypothesisId::HPrime1 => self.check_hp1(),
            HypothesisId::HPrime4 => self.check_hp4(),
            HypothesisId::ArI => self.check_ar(),
            HypothesisId::SubIi => self.check_sub(),
            HypothesisId::Ssl => self.check_ssl(),
            HypothesisId::F1 => self.check_f1(),
            HypothesisId::F2 => self.check_f2(),
            HypothesisId::F3 => self.check_f3(),
        })
    }

    fn overflow_witness(&self, r: &mut HypothesisReport) -> bool {
        let mut hit = false;
        for t in &self.large {
            if let Some(s) = t.overflow {
                r.violate(s, f64::INFINITY, WitnessKind::NonFinite);
                hit = true;
            }
        }
        hit
    }

    /// Shared body of (H) and (H2): `|f|/|s|^crit` must not grow (H) or must
    /// decay (H2).
    fn critical_ratio(&self, id: HypothesisId, bound: f64) -> HypothesisReport {
        let crit = self.critical().expect("checked by run");
        let mut r = self.report(id);
        self.overflow_witness(&mut r);
        let mut c0 = 0.0f64;
        for t in &self.large {
            let ly = |i: usize| t.f[i].abs().ln() - crit * t.ln_s[i];
            for i in 0..t.len() {
                c0 = c0.max(ly(i).exp());
            }
            if let Some(slope) = t.top_slope(ly) {
                if slope > bound {
                    let last = t.len() - 1;
                    r.violate(t.x(last), ly(last).exp(), WitnessKind::TailTrend);
                }
            }
        }
        r.constants.c = Some(c0);
        r.constants.s0 = Some(self.sampling.s_min);
        r
    }

    fn check_h(&self) -> HypothesisReport {
        self.critical_ratio(HypothesisId::H, SLOPE_TOL)
    }

    fn check_h2(&self) -> HypothesisReport {
        let mut r = self.critical_ratio(HypothesisId::H2, -SLOPE_TOL);
        r.constants.c = None;
        r
    }

    fn check_h0(&self) -> HypothesisReport {
        let mut r = self.report(HypothesisId::H0);
        let law = self.spec.law();
        let samples = geometric(self.sampling.s_min, self.sampling.s_max, self.sampling.per_decade);
        let found = samples
            .iter()
            .copied()
            .find(|&s| law.primitive(s) > 0.0 && law.primitive(-s) > 0.0);
        match found {
            Some(s) => r.constants.s0 = Some(s),
            None => {
                let s = self.sampling.s_min;
                let v = law.primitive(s).min(law.primitive(-s));
                r.violate(s, v, WitnessKind::Nonpositive);
            }
        }
        r
    }

    /// `D = s f − 2F` per sample, or the first nonpositive sample.
    fn defect(t: &Table<'_>) -> (Vec<f64>, Option<usize>) {
        let prim = t.prim();
        let mut d = Vec::with_capacity(t.len());
        let mut bad = None;
        for i in 0..t.len() {
            let sf = t.x(i) * t.f[i];
            let v = sf - 2.0 * prim[i];
            if bad.is_none() && v <= 1e-9 * (sf.abs() + 2.0 * prim[i].abs()) {
                bad = Some(i);
            }
            d.push(v);
        }
        (d, bad)
    }

    fn check_h1(&self) -> HypothesisReport {
        let mut r = self.report(HypothesisId::H1);
        let expo = 2.0 * self.nf() / (self.nf() + 2.0 * self.mf());
        let mut c = f64::INFINITY;
        for t in &self.large {
            let (d, bad) = Self::defect(t);
            if let Some(i) = bad {
                r.violate(t.x(i), d[i], WitnessKind::Nonpositive);
                continue;
            }
            let ly = |i: usize| d[i].ln() - expo * t.f[i].abs().ln();
            for i in 0..t.len() {
                c = c.min(ly(i).exp());
            }
            if let Some(slope) = t.top_slope(ly) {
                if slope < -SLOPE_TOL {
                    let last = t.len() - 1;
                    r.violate(t.x(last), ly(last).exp(), WitnessKind::TailTrend);
                }
            }
        }
        if r.satisfied() {
            r.constants.c = Some(c);
        }
        r.constants.s0 = Some(self.sampling.s_min);
        r
    }

    fn check_hp1(&self) -> HypothesisReport {
        let mut r = self.report(HypothesisId::HPrime1);
        let p = self.growth_p();
        let threshold = 1.0f64.max(self.nf() * (p - 1.0) / (2.0 * self.mf() * p));
        let mut p1 = f64::INFINITY;
        let mut c = f64::INFINITY;
        let mut defects = Vec::new();
        for t in &self.large {
            let (d, bad) = Self::defect(t);
            if let Some(i) = bad {
                r.violate(t.x(i), d[i], WitnessKind::Nonpositive);
            }
            defects.push(d);
        }
        if !r.satisfied() {
            r.constants.p = Some(p);
            return r;
        }
        match self.sampling.p1 {
            Some(user) => {
                p1 = user;
                for (t, d) in self.large.iter().zip(&defects) {
                    let ly = |i: usize| d[i].ln() - user * t.f[i].abs().ln();
                    if let Some(slope) = t.top_slope(ly) {
                        if slope < -SLOPE_TOL {
                            let last = t.len() - 1;
                            r.violate(t.x(last), ly(last).exp(), WitnessKind::TailTrend);
                        }
                    }
                }
            }
            None => {
                for (t, d) in self.large.iter().zip(&defects) {
                    let sd = t.top_slope(|i| d[i].ln());
                    let sf = t.top_slope(|i| t.f[i].abs().ln());
                    if let (Some(sd), Some(sf)) = (sd, sf) {
                        if sf > SLOPE_TOL {
                            p1 = p1.min((sd + SLOPE_TOL) / sf);
                        }
                    }
                }
            }
        }
        if !(p1 > threshold) {
            r.violate(self.sampling.s_max, p1, WitnessKind::Threshold);
        }
        if p1.is_finite() {
            for (t, d) in self.large.iter().zip(&defects) {
                for i in 0..t.len() {
                    c = c.min((d[i].ln() - p1 * t.f[i].abs().ln()).exp());
                }
            }
            r.constants.c = Some(c);
        }
        r.constants.p = Some(p);
        r.constants.p1 = Some(p1);
        r.constants.s0 = Some(self.sampling.s_min);
        if self.sampling.p.is_none() {
            r.notes.push("p extrapolated from the sample tail");
        }
        r
    }

    fn check_h3(&self) -> HypothesisReport {
        let mut r = self.report(HypothesisId::H3);
        let t = self.g_min_positive();
        let lambda1 = self.lambda1;
        if t.overflow.is_some() {
            r.constants.limit = Some(f64::INFINITY);
        }
        let ratio = |i: usize| t.f[i] / t.s[i];
        if t.len() < 3 {
            return r;
        }
        let last = t.len() - 1;
        let limit = if t.overflow.is_some() {
            f64::INFINITY
        } else {
            match t.top_slope(|i| ratio(i).ln()) {
                Some(sl) if sl > SLOPE_TOL => f64::INFINITY,
                Some(sl) if sl < -SLOPE_TOL => 0.0,
                _ => ratio(last),
            }
        };
        r.constants.limit = Some(limit);
        if !(limit > lambda1) {
            r.violate(t.x(last), ratio(last), WitnessKind::RatioBelowBound);
        }
        let mid = 0.5 * (t.lo() + t.hi());
        let spec = self.spec;
        let g = t.g;
        let at = |ls: f64| {
            let s = ls.exp();
            g * spec.f(s) / s
        };
        for i in 1..last {
            let (a, b, c) = (ratio(i - 1), ratio(i), ratio(i + 1));
            if !(b < a && b <= c) {
                continue;
            }
            let (ls, rv) = golden_min(at, t.ln_s[i - 1], t.ln_s[i + 1]);
            let around = t
                .window_max(ls - LN_10, ls + LN_10, ratio)
                .map_or(0.0, |(_, v)| v);
            if rv <= ZERO_DEPTH * around {
                r.violate(ls.exp(), rv, WitnessKind::NumericalZero);
            } else if rv <= lambda1 && ls >= mid {
                r.violate(ls.exp(), rv, WitnessKind::RatioBelowBound);
            }
        }
        r
    }

    fn check_h4(&self) -> HypothesisReport {
        let mut r = self.report(HypothesisId::H4);
        let mut limit = f64::NEG_INFINITY;
        for t in &self.small {
            if t.len() == 0 {
                continue;
            }
            let v = t.f[0] / t.x(0);
            limit = limit.max(v);
            if !(v < self.lambda1) {
                r.violate(t.x(0), v, WitnessKind::Threshold);
            }
        }
        r.constants.limit = Some(limit);
        r.sample_range = SampleRange {
            s_min: self.sampling.small_min,
            s_max: self.sampling.small_max,
            count: self.small.iter().map(Table::len).sum(),
        };
        r
    }

    fn check_hp4(&self) -> HypothesisReport {
        let mut r = self.report(HypothesisId::HPrime4);
        let mut limit = 0.0f64;
        for t in &self.small {
            if t.overflow.is_some() || t.len() < 3 {
                r.violate(t.overflow.unwrap_or(0.0), f64::INFINITY, WitnessKind::NonFinite);
                continue;
            }
            let ratio = |i: usize| t.f[i] / t.x(i);
            let lo = t.lo();
            let v = ratio(0);
            if v.abs() > limit.abs() {
                limit = v;
            }
            match t.slope_in(lo, lo + LN_10, |i| ratio(i).abs().ln()) {
                Some(sl) if sl < -SLOPE_TOL => r.violate(t.x(0), v, WitnessKind::TailTrend),
                _ if !v.is_finite() => r.violate(t.x(0), v, WitnessKind::NonFinite),
                _ => {}
            }
        }
        r.constants.limit = Some(limit);
        r.sample_range = SampleRange {
            s_min: self.sampling.small_min,
            s_max: self.sampling.small_max,
            count: self.small.iter().map(Table::len).sum(),
        };
        r
    }

    fn check_ar(&self) -> HypothesisReport {
        let mut r = self.report(HypothesisId::ArI);
        let mut theta = f64::INFINITY;
        for t in &self.large {
            let prim = t.prim();
            if let Some(i) = (0..t.len()).find(|&i| !(prim[i] > 0.0)) {
                r.violate(t.x(i), prim[i], WitnessKind::Nonpositive);
                continue;
            }
            let th = |i: usize| t.x(i) * t.f[i] / prim[i];
            let mut arg = 0;
            for i in 0..t.len() {
                if th(i) < theta {
                    theta = th(i);
                    arg = i;
                }
            }
            if !(theta > 2.0) {
                r.violate(t.x(arg), theta, WitnessKind::RatioBelowBound);
                continue;
            }
            if let Some(slope) = t.top_slope(|i| (th(i) - 2.0).ln()) {
                if slope < -SLOPE_TOL {
                    let last = t.len() - 1;
                    r.violate(t.x(last), th(last), WitnessKind::TailTrend);
                }
            }
        }
        if theta.is_finite() {
            r.constants.theta = Some(theta);
        }
        r.constants.s0 = Some(self.sampling.s_min);
        r
    }

    fn check_sub(&self) -> HypothesisReport {
        let mut r = self.report(HypothesisId::SubIi);
        if self.overflow_witness(&mut r) {
            return r;
        }
        let p = self.growth_p();
        let mut c = 0.0f64;
        for t in &self.large {
            let ly = |i: usize| t.f[i].abs().ln() - p * t.ln_s[i];
            for i in 0..t.len() {
                c = c.max(ly(i).exp());
            }
            let hi = t.hi();
            let e1 = t.slope_in(hi - LN_10, hi, |i| t.f[i].abs().ln());
            let e2 = t.slope_in(hi - 2.0 * LN_10, hi - LN_10, |i| t.f[i].abs().ln());
            if let (Some(e1), Some(e2)) = (e1, e2) {
                // local exponent still increasing: faster than any power
                if e1 - e2 > 10.0 * SLOPE_TOL && e1 > 1.0 {
                    r.violate(t.x(t.len() - 1), e1, WitnessKind::TailTrend);
                }
            }
            if self.sampling.p.is_some() {
                if let Some(slope) = t.top_slope(ly) {
                    if slope > SLOPE_TOL {
                        let last = t.len() - 1;
                        r.violate(t.x(last), ly(last).exp(), WitnessKind::TailTrend);
                    }
                }
            }
        }
        if let Some(crit) = self.critical() {
            if !(p < crit - SLOPE_TOL) {
                r.violate(self.sampling.s_max, p, WitnessKind::Threshold);
            }
        }
        r.constants.p = Some(p);
        r.constants.c = Some(c);
        r.constants.s0 = Some(self.sampling.s_min);
        if self.sampling.p.is_none() {
            r.notes.push("p extrapolated from the sample tail");
        }
        r
    }

    fn check_ssl(&self) -> HypothesisReport {
        let mut r = self.report(HypothesisId::Ssl);
        let p = self.growth_p();
        let mut q = f64::INFINITY;
        for t in &self.large {
            if let Some(e) = t.limit_exponent(|i| t.f[i].abs().ln()) {
                q = q.min(e);
            }
        }
        let mut c = f64::INFINITY;
        if q.is_finite() {
            for t in &self.large {
                for i in 0..t.len() {
                    c = c.min((t.f[i].abs().ln() - q * t.ln_s[i]).exp());
                }
            }
        }
        if !(q > 1.0 + SLOPE_TOL && q <= p + SLOPE_TOL) {
            r.violate(self.sampling.s_max, q, WitnessKind::Threshold);
        } else if !(c > 0.0) {
            r.violate(self.sampling.s_max, c, WitnessKind::Nonpositive);
        }
        r.constants.q = Some(q);
        r.constants.p = Some(p);
        r.constants.c = Some(c);
        r.constants.s0 = Some(self.sampling.s_min);
        r
    }

    fn check_f1(&self) -> HypothesisReport {
        let mut r = self.report(HypothesisId::F1);
        let (_, g_hi) = self.spec.modulation_range();
        let f0 = self.spec.f(0.0);
        if f0.abs() > 1e-14 {
            r.violate(0.0, f0, WitnessKind::Threshold);
        }
        let d0 = g_hi * self.spec.fprime(0.0);
        if !(d0 < self.lambda1) {
            r.violate(0.0, d0, WitnessKind::Threshold);
        }
        r.constants.limit = Some(d0);
        for t in self.small.iter().chain(self.large.iter()).filter(|t| t.sign > 0.0) {
            if let Some(i) = (0..t.len()).find(|&i| t.f[i] < 0.0) {
                r.violate(t.x(i), t.f[i], WitnessKind::Nonpositive);
            }
        }
        if self.overflow_witness(&mut r) {
            return r;
        }
        let p = self.growth_p();
        let mut c = 0.0f64;
        for t in self.positive() {
            let fp = t.fp();
            for i in 0..t.len() {
                c = c.max(fp[i].abs() / (t.s[i].powf(p - 1.0) + 1.0));
            }
            let ly = |i: usize| fp[i].abs().ln() - (p - 1.0) * t.ln_s[i];
            if let Some(slope) = t.top_slope(ly) {
                if slope > SLOPE_TOL {
                    let last = t.len() - 1;
                    r.violate(t.x(last), fp[last], WitnessKind::TailTrend);
                }
            }
        }
        r.constants.p = Some(p);
        r.constants.c = Some(c);
        r
    }

    /// `(first-decade max, top-decade max with index, envelope exponent)` of
    /// `exp(ly)` over a positive table.
    fn envelope(t: &Table<'_>, ly: impl Fn(usize) -> f64 + Copy) -> Option<(f64, usize, f64, f64)> {
        let (lo, hi) = (t.lo(), t.hi());
        let (_, head) = t.window_max(lo, lo + LN_10, ly)?;
        let (i_top, top) = t.window_max(hi - LN_10, hi, ly)?;
        let span = hi - lo - LN_10;
        Some((head, i_top, top, (top - head) / span))
    }

    fn check_f2(&self) -> HypothesisReport {
        let mut r = self.report(HypothesisId::F2);
        let p = self.growth_p();
        let t = self.g_min_positive();
        let ly = |i: usize| t.f[i].ln() - p * t.ln_s[i];
        match Self::envelope(t, ly) {
            Some((_, i_top, top, slope)) => {
                let mu = top.exp();
                r.constants.mu = Some(mu);
                if !(mu > 0.0) || slope < ENVELOPE_FLOOR {
                    r.violate(t.x(i_top), mu, WitnessKind::TailTrend);
                }
            }
            None => r.violate(self.sampling.s_max, 0.0, WitnessKind::Nonpositive),
        }
        r.constants.p = Some(p);
        r.notes.push("mu taken from the top-decade maximum of f/s^p");
        r
    }

    fn check_f3(&self) -> HypothesisReport {
        let mut r = self.report(HypothesisId::F3);
        let p = self.growth_p();
        let t = self.g_min_positive();
        let fp = t.fp();
        let scale = (0..t.len())
            .map(|i| t.f[i].abs().ln() - p * t.ln_s[i])
            .fold(f64::NEG_INFINITY, f64::max);
        let ly = |i: usize| (t.s[i] * fp[i] - p * t.f[i]).abs().ln() - p * t.ln_s[i];
        match Self::envelope(t, ly) {
            Some((head, i_top, top, slope)) => {
                r.constants.limit = Some(top.exp());
                let vanishes = top <= scale + (1e-10f64).ln();
                if !vanishes && (slope >= -SLOPE_TOL || top >= head) {
                    r.violate(t.x(i_top), top.exp(), WitnessKind::TailTrend);
                }
            }
            None => r.violate(self.sampling.s_max, f64::NAN, WitnessKind::NonFinite),
        }
        r.constants.p = Some(p);
        r
    }
}

/// Golden-section minimum of `h` on `[a, b]`.
fn golden_min(h: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> (f64, f64) {
    let inv_phi = 0.5 * (5f64.sqrt() - 1.0);
    let mut c = b - inv_phi * (b - a);
    let mut d = a + inv_phi * (b - a);
    let (mut hc, mut hd) = (h(c), h(d));
    for _ in 0..200 {
        if (b - a).abs() <= 4.0 * f64::EPSILON * a.abs().max(b.abs()) {
            break;
        }
        if hc <= hd {
            b = d;
            d = c;
            hd = hc;
            c = b - inv_phi * (b - a);
            hc = h(c);
        } else {
            a = c;
            c = d;
            hc = hd;
            d = a + inv_phi * (b - a);
            hd = h(d);
        }
    }
    if hc <= hd {
        (c, hc)
    } else {
        (d, hd)
    }
}

/// Evaluate one hypothesis on the configured sample.
pub fn check_hypothesis(
    spec: &NonlinearitySpec,
    id: HypothesisId,
    n: u32,
    m: u32,
    sampling: &Sampling,
) -> Result<HypothesisReport> {
    Ctx::new(spec, n, m, sampling)?.run(id)
}

/// All ids valid for `(N, m)`; (H) and (H2) are skipped when `N ≤ 2m`.
/// Returns an empty list when the inputs themselves are invalid.
pub fn hypothesis_suite(
    spec: &NonlinearitySpec,
    n: u32,
    m: u32,
    sampling: &Sampling,
) -> Vec<HypothesisReport> {
    let ctx = match Ctx::new(spec, n, m, sampling) {
        Ok(c) => c,
        Err(_) => return Vec::new(),
    };
    HypothesisId::ALL
        .iter()
        .filter_map(|&id| ctx.run(id).ok())
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::nonlinearity::Law;

    fn spec(law: Law) -> NonlinearitySpec {
        NonlinearitySpec::new(law).unwrap()
    }

    fn quick() -> Sampling {
        Sampling {
            per_decade: 40,
            ..Sampling::default()
        }
    }

    #[test]
    fn ids_round_trip() {
        for id in HypothesisId::ALL {
            assert_eq!(id.as_str().parse::<HypothesisId>().unwrap(), id);
        }
        assert_eq!("H7".parse::<HypothesisId>(), Err(Error::UnknownHypothesis));
    }

    #[test]
    fn critical_ids_need_large_dimension() {
        let s = spec(Law::Power { q: 3.0 });
        let e = check_hypothesis(&s, HypothesisId::H2, 2, 1, &quick());
        assert!(matches!(e, Err(Error::FormulaUndefined { .. })));
        let names: Vec<_> = hypothesis_suite(&s, 2, 1, &quick()).iter().map(|r| r.id).collect();
        assert!(!names.contains(&HypothesisId::H));
        assert_eq!(names.len(), 12);
    }

    #[test]
    fn cubic_is_ambrosetti_rabinowitz() {
        let s = spec(Law::Power { q: 3.0 });
        let r = check_hypothesis(&s, HypothesisId::ArI, 5, 1, &quick()).unwrap();
        assert!(r.satisfied());
        assert!((r.constants.theta.unwrap() - 4.0).abs() < 1e-9);
    }

    #[test]
    fn linear_fails_h1_with_zero_defect() {
        let s = spec(Law::Linear { a: 1.0 });
        let r = check_hypothesis(&s, HypothesisId::H1, 5, 1, &quick()).unwrap();
        assert!(!r.satisfied());
        assert!(r.witnesses[0].value.abs() < 1e-6 * r.witnesses[0].s.powi(2));
    }

    #[test]
    fn linear_below_lambda_fails_h3() {
        let s = spec(Law::Linear { a: 0.5 });
        let r = check_hypothesis(&s, HypothesisId::H3, 1, 1, &quick()).unwrap();
        assert!(!r.satisfied());
        let s = spec(Law::Linear { a: 3.0 });
        assert!(check_hypothesis(&s, HypothesisId::H3, 1, 1, &quick()).unwrap().satisfied());
    }

    #[test]
    fn small_t_limits() {
        let cube = spec(Law::Power { q: 3.0 });
        assert!(check_hypothesis(&cube, HypothesisId::H4, 1, 1, &quick()).unwrap().satisfied());
        assert!(check_hypothesis(&cube, HypothesisId::HPrime4, 1, 1, &quick()).unwrap().satisfied());
        let sub = spec(Law::LinearMinusPower { a: 3.0, alpha: 0.5 });
        assert!(check_hypothesis(&sub, HypothesisId::H4, 1, 1, &quick()).unwrap().satisfied());
        assert!(!check_hypothesis(&sub, HypothesisId::HPrime4, 1, 1, &quick()).unwrap().satisfied());
        let ex = spec(Law::Exponential { rate: 1.0 });
        assert!(!check_hypothesis(&ex, HypothesisId::H4, 1, 1, &quick()).unwrap().satisfied());
    }

    #[test]
    fn growth_exponent_fit() {
        let s = spec(Law::Power { q: 1.5 });
        let r = check_hypothesis(&s, HypothesisId::SubIi, 5, 1, &quick()).unwrap();
        assert!(r.satisfied());
        assert!((r.constants.p.unwrap() - 1.5).abs() < 1e-9);
        let r = check_hypothesis(&s, HypothesisId::Ssl, 5, 1, &quick()).unwrap();
        assert!(r.satisfied());
    }

    #[test]
    fn exponential_is_not_polynomial() {
        let s = spec(Law::Exponential { rate: 1.0 });
        let r = check_hypothesis(&s, HypothesisId::SubIi, 2, 1, &quick()).unwrap();
        assert!(!r.satisfied());
    }

    #[test]
    fn golden_section_finds_parabola_vertex() {
        let (x, v) = golden_min(|x| (x - 0.3) * (x - 0.3) + 1.0, 0.0, 1.0);
        assert!((x - 0.3).abs() < 1e-7);
        assert!((v - 1.0).abs() < 1e-14);
    }
}
