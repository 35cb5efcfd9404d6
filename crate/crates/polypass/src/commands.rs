//! Subcommand bodies. Each writes its files under `out` and reports how
//! the run ended.

use std::fmt;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use polypass_core::functional::bootstrap_chain;
use polypass_core::nonlinearity::{check_hypothesis, hypothesis_suite, HypothesisId};
use polypass_core::solver::{
    check_geometry, continuation_solve, mountain_pass_solve, symmetric_mountain_pass,
    MultiConfig, SolveError,
};
use polypass_core::{Field, Grid, Order};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::output::{
    self, num, sign_changes, sup_norm, trace_summary, write_csv, write_json, write_run, Stamp,
};

#[derive(Debug)]
pub enum CliError {
    /// Bad or incomplete configuration.
    Config(anyhow::Error),
    Solve(SolveError),
    Io(anyhow::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Config(_) => 2,
            CliError::Solve(SolveError::ValleyNotFound { .. }) => 3,
            CliError::Solve(SolveError::MaxIterExceeded(_)) => 4,
            CliError::Solve(SolveError::NotStopped(_)) => 5,
            CliError::Solve(SolveError::FewerFound { .. }) => 6,
            CliError::Solve(SolveError::NotOdd) => 2,
            CliError::Solve(SolveError::Core(_)) => 2,
            CliError::Io(_) => 1,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(e) => write!(f, "config error: {e:#}"),
            CliError::Solve(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "{e:#}"),
        }
    }
}

impl std::error::Error for CliError {}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        CliError::Solve(e)
    }
}

type CmdResult = Result<(), CliError>;

fn io<T>(r: anyhow::Result<T>) -> Result<T, CliError> {
    r.map_err(CliError::Io)
}

fn cfg_err<T>(r: anyhow::Result<T>) -> Result<T, CliError> {
    r.map_err(CliError::Config)
}

fn order(cfg: &RunConfig) -> Result<Order, CliError> {
    Order::new(cfg.problem.order).map_err(|e| CliError::Config(anyhow::anyhow!("{e}")))
}

fn stamp(cfg: &RunConfig) -> Stamp {
    Stamp {
        config_sha256: cfg.hash(),
    }
}

fn prepare(out: &Path) -> CmdResult {
    io(fs::create_dir_all(out).map_err(|e| anyhow::anyhow!("cannot create {}: {e}", out.display())))
}

/// `count` band-limited directions with coefficients uniform in `[−1, 1]`
/// scaled by `|k|^{−2}`.
pub fn random_directions(grid: &Arc<Grid>, count: usize, seed: u64) -> Vec<Field> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..count)
        .map(|_| {
            let c: Vec<f64> = (0..grid.coeff_len())
                .map(|k| rng.gen_range(-1.0..1.0) / grid.wavenumber_sq(k))
                .collect();
            Field::from_coeffs(grid, c).expect("finite coefficients")
        })
        .collect()
}

pub fn cmd_check(cfg: &RunConfig, out: &Path) -> CmdResult {
    let grid = cfg_err(cfg.grid())?;
    let spec = cfg_err(cfg.spec(&grid))?;
    let m = order(cfg)?;
    let n = cfg.nominal_n();
    let sampling = cfg.sampling();
    let reports = if cfg.check.hypotheses.is_empty() {
        hypothesis_suite(&spec, n, m.get(), &sampling)
    } else {
        let mut v = Vec::new();
        for name in &cfg.check.hypotheses {
            let id: HypothesisId = name
                .parse()
                .map_err(|_| CliError::Config(anyhow::anyhow!("unknown hypothesis `{name}`")))?;
            v.push(
                check_hypothesis(&spec, id, n, m.get(), &sampling)
                    .map_err(|e| CliError::Config(anyhow::anyhow!("{name}: {e}")))?,
            );
        }
        v
    };
    let geometry = if n > 2 * m.get() && cfg.check.geometry_directions > 0 {
        let mut fit: Vec<Field> = grid
            .eigen_order()
            .into_iter()
            .take(8)
            .map(|k| Field::basis(&grid, k))
            .collect();
        fit.extend(random_directions(&grid, 16, cfg.run.seed ^ 0x5eed));
        let probe = random_directions(&grid, cfg.check.geometry_directions, cfg.run.seed);
        check_geometry(&spec, m, n, &fit, &probe)
            .ok()
            .map(|g| serde_json::to_value(g).expect("serializable"))
    } else {
        None
    };
    prepare(out)?;
    let st = stamp(cfg);
    let rows = reports.iter().map(|r| {
        vec![
            r.id.as_str().to_string(),
            if r.satisfied() {
                "satisfied-on-sample".into()
            } else {
                "violated".into()
            },
            r.witnesses.len().to_string(),
        ]
    });
    io(write_csv(&out.join("report.csv"), &st, &["hypothesis", "verdict", "witnesses"], rows))?;
    io(write_json(
        &out.join("report.json"),
        &st,
        json!({
            "command": "check",
            "n": n,
            "m": m.get(),
            "law": spec.law().kind_name(),
            "reports": reports,
            "geometry": geometry,
        }),
    ))?;
    for r in &reports {
        println!(
            "{:<7} {}",
            r.id.as_str(),
            if r.satisfied() {
                "satisfied-on-sample"
            } else {
                "violated"
            }
        );
    }
    Ok(())
}

pub fn cmd_solve(cfg: &RunConfig, out: &Path) -> CmdResult {
    let grid = cfg_err(cfg.grid())?;
    let spec = cfg_err(cfg.spec(&grid))?;
    let m = order(cfg)?;
    let st = stamp(cfg);
    let result = mountain_pass_solve(&spec, &grid, m, &cfg.solve_config());
    let trace = match &result {
        Ok(t) => Some(t),
        Err(SolveError::MaxIterExceeded(t)) => Some(t.as_ref()),
        Err(_) => None,
    };
    prepare(out)?;
    let body = match trace {
        Some(t) => {
            io(write_run(out, &st, t))?;
            let mut v = trace_summary(t);
            v["command"] = json!("solve");
            v
        }
        None => json!({ "command": "solve", "error": result.as_ref().err().map(|e| e.to_string()) }),
    };
    io(write_json(&out.join("meta.json"), &st, body))?;
    match result {
        Ok(t) => {
            println!(
                "converged in {} iterations: energy {:e}, residual {:e}",
                t.iterations, t.energy, t.residual
            );
            Ok(())
        }
        Err(e) => Err(e.into()),
    }
}

pub fn cmd_multi(cfg: &RunConfig, out: &Path) -> CmdResult {
    let grid = cfg_err(cfg.grid())?;
    let spec = cfg_err(cfg.spec(&grid))?;
    let m = order(cfg)?;
    let st = stamp(cfg);
    let mc = MultiConfig {
        n_sol: cfg.multi.n_sol,
        extra_seeds: cfg.multi.extra_seeds,
        solve: cfg.solve_config(),
    };
    let result = symmetric_mountain_pass(&spec, &grid, m, &mc);
    let (traces, extra) = match &result {
        Ok(r) => (
            r.traces.as_slice(),
            json!({
                "energies_increasing": r.energies_increasing,
                "c0_fit": r.c_f,
                "k0_estimate": r.k0_estimate,
            }),
        ),
        Err(SolveError::FewerFound { traces, .. }) => (traces.as_slice(), json!({})),
        Err(e) => return Err(CliError::Solve(e.clone())),
    };
    prepare(out)?;
    let one_d = grid.dim() == 1;
    let mut pairs = Vec::new();
    for (j, t) in traces.iter().enumerate() {
        io(write_run(&out.join(format!("pair_{}", j + 1)), &st, t))?;
        pairs.push(vec![
            (j + 1).to_string(),
            num(t.energy),
            num(t.residual),
            num(t.full_residual),
            num(sup_norm(&t.solution)),
            if one_d {
                sign_changes(&t.solution).to_string()
            } else {
                String::new()
            },
        ]);
    }
    io(write_csv(
        &out.join("pairs.csv"),
        &st,
        &["pair", "energy", "residual", "full_residual", "sup_norm", "sign_changes"],
        pairs,
    ))?;
    let mut body = json!({
        "command": "multi",
        "requested": cfg.multi.n_sol,
        "found": traces.len(),
        "pairs": traces.iter().map(trace_summary).collect::<Vec<Value>>(),
    });
    if let (Value::Object(b), Value::Object(e)) = (&mut body, extra) {
        b.extend(e);
    }
    io(write_json(&out.join("meta.json"), &st, body))?;
    match result {
        Ok(r) => {
            for (j, t) in r.traces.iter().enumerate() {
                println!("pair {}: energy {:e}, residual {:e}", j + 1, t.energy, t.residual);
            }
            Ok(())
        }
        Err(e) => Err(e.into()),
    }
}

pub fn cmd_truncate(cfg: &RunConfig, out: &Path) -> CmdResult {
    let grid = cfg_err(cfg.grid())?;
    let spec = cfg_err(cfg.spec(&grid))?;
    let m = order(cfg)?;
    let st = stamp(cfg);
    let result = continuation_solve(
        &spec,
        &grid,
        m,
        cfg.truncate.p,
        &cfg.schedule(),
        &cfg.solve_config(),
    );
    let trace = match &result {
        Ok(t) => t,
        Err(SolveError::NotStopped(t)) => t.as_ref(),
        Err(e) => return Err(CliError::Solve(e.clone())),
    };
    prepare(out)?;
    let rows = trace.stages.iter().enumerate().map(|(i, s)| {
        vec![
            (i + 1).to_string(),
            num(s.s_n),
            num(s.sup_norm),
            s.stopped.to_string(),
            num(s.energy),
            num(s.residual),
            s.iterations.to_string(),
            s.converged.to_string(),
        ]
    });
    io(write_csv(
        &out.join("stages.csv"),
        &st,
        &[
            "stage",
            "s_n",
            "sup_norm",
            "stopped",
            "energy",
            "residual",
            "iterations",
            "converged",
        ],
        rows,
    ))?;
    let rows = trace.blowup.iter().map(|b| {
        vec![
            (b.stage + 1).to_string(),
            num(b.lambda),
            num(b.beta1),
            num(b.q0),
            num(b.coeff),
        ]
    });
    io(write_csv(
        &out.join("blowup.csv"),
        &st,
        &["stage", "lambda", "beta1", "q0", "coeff"],
        rows,
    ))?;
    if let Some(t) = &trace.final_trace {
        io(write_run(out, &st, t))?;
    }
    io(write_json(
        &out.join("meta.json"),
        &st,
        json!({
            "command": "truncate",
            "p": trace.p,
            "schedule": trace.schedule,
            "stages": trace.stages,
            "blowup": trace.blowup,
            "stopped_at": trace.stopped_at.map(|k| k + 1),
            "untruncated_residual": trace.untruncated_residual,
            "final": trace.final_trace.as_ref().map(trace_summary),
        }),
    ))?;
    match result {
        Ok(t) => {
            println!(
                "stopped at stage {} (s_n = {})",
                t.stopped_at.unwrap() + 1,
                t.schedule[t.stopped_at.unwrap()]
            );
            Ok(())
        }
        Err(e) => Err(e.into()),
    }
}

pub fn cmd_bootstrap(cfg: &RunConfig, out: &Path) -> CmdResult {
    let n = cfg.nominal_n();
    let m = cfg.problem.order;
    let t = bootstrap_chain(n, m, cfg.bootstrap.p, cfg.bootstrap.p1)
        .map_err(|e| CliError::Config(anyhow::anyhow!("bootstrap: {e}")))?;
    prepare(out)?;
    let st = stamp(cfg);
    let rows = t
        .chain
        .iter()
        .enumerate()
        .map(|(k, (p, s))| vec![(k + 1).to_string(), num(*p), num(*s)]);
    io(write_csv(&out.join("chain.csv"), &st, &["k", "p_k", "p_k_star"], rows))?;
    io(write_json(
        &out.join("meta.json"),
        &st,
        json!({
            "command": "bootstrap",
            "n": t.n,
            "m": t.m,
            "p": t.p,
            "p1": t.p1,
            "steps": t.steps,
            "terminated": t.terminated,
            "threshold_ok": t.threshold_ok,
            "status": t.status,
        }),
    ))?;
    println!("{} steps, terminated={}", t.steps, t.terminated);
    Ok(())
}

pub fn run_command(name: &str, cfg: &RunConfig, out: &Path) -> CmdResult {
    match name {
        "check" => cmd_check(cfg, out),
        "solve" => cmd_solve(cfg, out),
        "multi" => cmd_multi(cfg, out),
        "truncate" => cmd_truncate(cfg, out),
        "bootstrap" => cmd_bootstrap(cfg, out),
        other => Err(CliError::Config(anyhow::anyhow!("unknown command `{other}`"))),
    }
}

/// Runs every (modes, law) combination of the `[sweep]` section in
/// parallel, one subdirectory per job, then writes `summary.csv`.
pub fn cmd_sweep(cfg: &RunConfig, out: &Path) -> CmdResult {
    let sweep = cfg
        .sweep
        .as_ref()
        .ok_or_else(|| CliError::Config(anyhow::anyhow!("missing field `sweep`")))?;
    let modes = if sweep.modes.is_empty() {
        vec![cfg.problem.modes]
    } else {
        sweep.modes.clone()
    };
    let laws = if sweep.laws.is_empty() {
        vec![cfg
            .nonlinearity
            .clone()
            .ok_or_else(|| CliError::Config(anyhow::anyhow!("missing field `nonlinearity`")))?]
    } else {
        sweep.laws.clone()
    };
    let mut jobs = Vec::new();
    for law in &laws {
        for &md in &modes {
            let mut c = cfg.clone();
            c.sweep = None;
            c.problem.modes = md;
            c.nonlinearity = Some(law.clone());
            cfg_err(c.validate())?;
            jobs.push(c);
        }
    }
    prepare(out)?;
    let outcomes: Vec<(i32, String)> = jobs
        .par_iter()
        .enumerate()
        .map(|(i, c)| {
            let dir = out.join(format!("job_{:03}", i + 1));
            let r = fs::create_dir_all(&dir)
                .map_err(|e| CliError::Io(e.into()))
                .and_then(|_| fs::write(dir.join("config.toml"), c.to_toml()).map_err(|e| CliError::Io(e.into())))
                .and_then(|_| run_command(&sweep.command, c, &dir));
            match r {
                Ok(()) => (0, String::new()),
                Err(e) => (e.exit_code(), e.to_string()),
            }
        })
        .collect();
    let st = stamp(cfg);
    let rows = jobs.iter().zip(&outcomes).enumerate().map(|(i, (c, (code, msg)))| {
        vec![
            format!("job_{:03}", i + 1),
            c.problem.modes.to_string(),
            c.nonlinearity
                .as_ref()
                .map(|l| l.to_law().kind_name().to_string())
                .unwrap_or_default(),
            code.to_string(),
            msg.clone(),
        ]
    });
    io(output::write_csv(
        &out.join("summary.csv"),
        &st,
        &["job", "modes", "law", "exit_code", "message"],
        rows,
    ))?;
    let failed = outcomes.iter().filter(|(c, _)| *c != 0).count();
    println!("{} jobs, {} failed", jobs.len(), failed);
    Ok(())
}
