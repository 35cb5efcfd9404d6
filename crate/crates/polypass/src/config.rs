//! Run configuration document (TOML).

use std::path::Path;

use anyhow::{bail, Context};
use polypass_core::nonlinearity::{Sampling, Sides, DEFAULT_OSCILLATION_SHIFT};
use polypass_core::solver::{MultiConfig, Schedule, SolveConfig};
use polypass_core::{Grid, Law, NonlinearitySpec};
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub problem: ProblemSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nonlinearity: Option<LawDoc>,
    #[serde(default)]
    pub solve: SolveSection,
    #[serde(default)]
    pub multi: MultiSection,
    #[serde(default)]
    pub truncate: TruncateSection,
    #[serde(default)]
    pub bootstrap: BootstrapSection,
    #[serde(default)]
    pub check: CheckSection,
    #[serde(default)]
    pub run: RunSection,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep: Option<SweepSection>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct ProblemSection {
    /// Spatial dimension of the box, 1 or 2.
    pub dim: usize,
    /// Polyharmonic order m.
    pub order: u32,
    /// Sine modes per dimension.
    pub modes: usize,
    /// Nominal dimension N for the hypothesis formulas; defaults to `dim`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub nominal_n: Option<u32>,
    /// `g(x) = 1 + a Π sin(x_i)` multiplies f when set; needs `a > −1`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub modulation_amplitude: Option<f64>,
}

impl Default for ProblemSection {
    fn default() -> Self {
        ProblemSection {
            dim: 1,
            order: 1,
            modes: 64,
            nominal_n: None,
            modulation_amplitude: None,
        }
    }
}

/// Nonlinearity document; mirrors [`Law`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case", deny_unknown_fields)]
pub enum LawDoc {
    Power {
        q: f64,
    },
    Linear {
        a: f64,
    },
    LinearMinusPower {
        a: f64,
        alpha: f64,
    },
    IteratedLog {
        alpha: f64,
        depth: u32,
        #[serde(default)]
        shift: f64,
    },
    LogDampedCritical {
        n: u32,
        m: u32,
        q: f64,
    },
    Oscillating {
        p: f64,
        #[serde(default)]
        gamma: f64,
        #[serde(default = "default_osc_q")]
        q: f64,
        #[serde(default = "default_osc_c")]
        c: f64,
    },
    Exponential {
        rate: f64,
    },
    Sum {
        terms: Vec<LawDoc>,
    },
    PositivePart {
        base: Box<LawDoc>,
    },
}

fn default_osc_q() -> f64 {
    2.0
}

fn default_osc_c() -> f64 {
    DEFAULT_OSCILLATION_SHIFT
}

impl LawDoc {
    pub fn to_law(&self) -> Law {
        match self {
            LawDoc::Power { q } => Law::Power { q: *q },
            LawDoc::Linear { a } => Law::Linear { a: *a },
            LawDoc::LinearMinusPower { a, alpha } => Law::LinearMinusPower {
                a: *a,
                alpha: *alpha,
            },
            LawDoc::IteratedLog {
                alpha,
                depth,
                shift,
            } => Law::IteratedLog {
                alpha: *alpha,
                depth: *depth,
                shift: *shift,
            },
            LawDoc::LogDampedCritical { n, m, q } => Law::LogDampedCritical {
                n: *n,
                m: *m,
                q: *q,
            },
            LawDoc::Oscillating { p, gamma, q, c } => Law::Oscillating {
                p: *p,
                gamma: *gamma,
                q: *q,
                c: *c,
            },
            LawDoc::Exponential { rate } => Law::Exponential { rate: *rate },
            LawDoc::Sum { terms } => Law::Sum(terms.iter().map(LawDoc::to_law).collect()),
            LawDoc::PositivePart { base } => Law::PositivePart(Box::new(base.to_law())),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolveSection {
    pub path_points: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub armijo: f64,
    pub stall_limit: usize,
}

impl Default for SolveSection {
    fn default() -> Self {
        let d = SolveConfig::default();
        SolveSection {
            path_points: d.path_points,
            tol: d.tol,
            max_iter: d.max_iter,
            armijo: d.armijo,
            stall_limit: d.stall_limit,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MultiSection {
    pub n_sol: usize,
    pub extra_seeds: usize,
}

impl Default for MultiSection {
    fn default() -> Self {
        let d = MultiConfig::default();
        MultiSection {
            n_sol: d.n_sol,
            extra_seeds: d.extra_seeds,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct TruncateSection {
    /// Outer growth exponent of the truncation.
    pub p: f64,
    pub s1: f64,
    pub ratio: f64,
    pub n_max: usize,
}

impl Default for TruncateSection {
    fn default() -> Self {
        let s = Schedule::default();
        TruncateSection {
            p: 2.0,
            s1: s.s1,
            ratio: s.ratio,
            n_max: s.n_max,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BootstrapSection {
    pub p: f64,
    pub p1: f64,
}

impl Default for BootstrapSection {
    fn default() -> Self {
        BootstrapSection { p: 2.0, p1: 1.3 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckSection {
    pub s_min: f64,
    pub s_max: f64,
    pub per_decade: usize,
    pub small_min: f64,
    pub small_max: f64,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub p1: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub lambda1: Option<f64>,
    /// Only sample `s > 0`.
    pub positive_only: bool,
    /// Subset of hypothesis names; all applicable ones when empty.
    pub hypotheses: Vec<String>,
    /// Random directions for the sphere check (only when N > 2m).
    pub geometry_directions: usize,
}

impl Default for CheckSection {
    fn default() -> Self {
        let s = Sampling::default();
        CheckSection {
            s_min: s.s_min,
            s_max: s.s_max,
            per_decade: s.per_decade,
            small_min: s.small_min,
            small_max: s.small_max,
            p: None,
            p1: None,
            lambda1: None,
            positive_only: false,
            hypotheses: Vec::new(),
            geometry_directions: 100,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields, default)]
pub struct RunSection {
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    /// Subcommand run for every job: check, solve, multi or truncate.
    pub command: String,
    /// Mode counts; the problem's own when empty.
    #[serde(default)]
    pub modes: Vec<usize>,
    /// Nonlinearities; the top-level one when empty.
    #[serde(default)]
    pub laws: Vec<LawDoc>,
}

impl RunConfig {
    pub fn load(path: &Path) -> anyhow::Result<Self> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("cannot read config {}", path.display()))?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> anyhow::Result<Self> {
        let cfg: RunConfig = toml::from_str(text).context("invalid config")?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> anyhow::Result<()> {
        let p = &self.problem;
        if !(1..=2).contains(&p.dim) {
            bail!("problem.dim must be 1 or 2, got {}", p.dim);
        }
        if p.order == 0 {
            bail!("problem.order must be at least 1");
        }
        if p.modes < 4 {
            bail!("problem.modes must be at least 4, got {}", p.modes);
        }
        if let Some(n) = p.nominal_n {
            if (n as usize) < p.dim {
                bail!("problem.nominal_n ({n}) must be at least problem.dim ({})", p.dim);
            }
        }
        if let Some(a) = p.modulation_amplitude {
            if !(a > -1.0) || !a.is_finite() {
                bail!("problem.modulation_amplitude must be finite and > -1, got {a}");
            }
        }
        if let Some(law) = &self.nonlinearity {
            law.to_law()
                .validate()
                .map_err(|e| anyhow::anyhow!("nonlinearity: {e}"))?;
        }
        let s = &self.solve;
        if s.path_points < 3 {
            bail!("solve.path_points must be at least 3");
        }
        if !(s.tol > 0.0) {
            bail!("solve.tol must be positive");
        }
        if !(s.armijo > 0.0 && s.armijo < 1.0) {
            bail!("solve.armijo must lie in (0, 1)");
        }
        if let Some(sw) = &self.sweep {
            if !["check", "solve", "multi", "truncate"].contains(&sw.command.as_str()) {
                bail!("sweep.command must be check, solve, multi or truncate");
            }
        }
        Ok(())
    }

    /// Canonical TOML with every default spelled out.
    pub fn to_toml(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// SHA-256 of the canonical TOML.
    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.to_toml().as_bytes()))
    }

    pub fn nominal_n(&self) -> u32 {
        self.problem.nominal_n.unwrap_or(self.problem.dim as u32)
    }

    pub fn grid(&self) -> anyhow::Result<std::sync::Arc<Grid>> {
        Grid::with_modes(self.problem.dim, self.problem.modes).map_err(|e| anyhow::anyhow!("{e}"))
    }

    /// Nonlinearity on `grid`, with the modulation sampled at its nodes.
    pub fn spec(&self, grid: &Grid) -> anyhow::Result<NonlinearitySpec> {
        let law = self
            .nonlinearity
            .as_ref()
            .context("missing field `nonlinearity`")?;
        let mut spec = NonlinearitySpec::new(law.to_law()).map_err(|e| anyhow::anyhow!("{e}"))?;
        if let Some(a) = self.problem.modulation_amplitude {
            let g: Vec<f64> = (0..grid.node_len())
                .map(|j| {
                    let x = grid.node_coords(j);
                    let bump: f64 = x[..grid.dim()].iter().map(|t| t.sin()).product();
                    1.0 + a * bump
                })
                .collect();
            spec = spec.with_modulation(g).map_err(|e| anyhow::anyhow!("{e}"))?;
        }
        Ok(spec)
    }

    pub fn solve_config(&self) -> SolveConfig {
        let s = &self.solve;
        SolveConfig {
            path_points: s.path_points,
            tol: s.tol,
            max_iter: s.max_iter,
            armijo: s.armijo,
            stall_limit: s.stall_limit,
            nominal_n: Some(self.nominal_n()),
        }
    }

    pub fn sampling(&self) -> Sampling {
        let c = &self.check;
        Sampling {
            s_min: c.s_min,
            s_max: c.s_max,
            per_decade: c.per_decade,
            small_min: c.small_min,
            small_max: c.small_max,
            p: c.p,
            p1: c.p1,
            lambda1: c.lambda1,
            sides: if c.positive_only {
                Sides::Positive
            } else {
                Sides::Auto
            },
        }
    }

    pub fn schedule(&self) -> Schedule {
        Schedule {
            s1: self.truncate.s1,
            ratio: self.truncate.ratio,
            n_max: self.truncate.n_max,
        }
    }
}
