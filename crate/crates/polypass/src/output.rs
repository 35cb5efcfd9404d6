//! CSV and JSON writers. Every file carries the tool version and the
//! config hash; nothing time- or host-dependent is written.

use std::fs;
use std::io::Write;
use std::path::Path;

use anyhow::Context;
use polypass_core::functional::PSRecord;
use polypass_core::solver::MinMaxTrace;
use polypass_core::Field;
use serde_json::{json, Value};

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone)]
pub struct Stamp {
    pub config_sha256: String,
}

impl Stamp {
    fn comment(&self) -> String {
        format!("# polypass {VERSION} config-sha256 {}\n", self.config_sha256)
    }
}

/// Shortest round-trip form; scientific outside `[1e-4, 1e15)`.
pub fn num(x: f64) -> String {
    let a = x.abs();
    if x == 0.0 || (1e-4..1e15).contains(&a) || !x.is_finite() {
        format!("{x}")
    } else {
        format!("{x:e}")
    }
}

pub fn write_csv<I>(path: &Path, stamp: &Stamp, header: &[&str], rows: I) -> anyhow::Result<()>
where
    I: IntoIterator<Item = Vec<String>>,
{
    let mut file =
        fs::File::create(path).with_context(|| format!("cannot create {}", path.display()))?;
    file.write_all(stamp.comment().as_bytes())?;
    let mut w = csv::Writer::from_writer(file);
    w.write_record(header)?;
    for row in rows {
        w.write_record(&row)?;
    }
    w.flush()?;
    Ok(())
}

/// `meta.json`-style document with the stamp merged in.
pub fn write_json(path: &Path, stamp: &Stamp, mut body: Value) -> anyhow::Result<()> {
    if let Value::Object(map) = &mut body {
        map.insert("tool".into(), json!("polypass"));
        map.insert("version".into(), json!(VERSION));
        map.insert("config_sha256".into(), json!(stamp.config_sha256));
    }
    let text = serde_json::to_string_pretty(&body)? + "\n";
    fs::write(path, text).with_context(|| format!("cannot write {}", path.display()))
}

/// Node values: `x[,y],u`.
pub fn write_solution(path: &Path, stamp: &Stamp, u: &Field) -> anyhow::Result<()> {
    let grid = u.grid();
    let vals = u.to_grid();
    let header: &[&str] = if grid.dim() == 1 {
        &["x", "u"]
    } else {
        &["x", "y", "u"]
    };
    let rows = vals.iter().enumerate().map(|(j, v)| {
        let x = grid.node_coords(j);
        let mut r: Vec<String> = x[..grid.dim()].iter().map(|t| num(*t)).collect();
        r.push(num(*v));
        r
    });
    write_csv(path, stamp, header, rows)
}

/// Sine coefficients: `k1[,k2],coeff`.
pub fn write_coeffs(path: &Path, stamp: &Stamp, u: &Field) -> anyhow::Result<()> {
    let grid = u.grid();
    let header: &[&str] = if grid.dim() == 1 {
        &["k1", "coeff"]
    } else {
        &["k1", "k2", "coeff"]
    };
    let rows = u.coeffs().iter().enumerate().map(|(j, c)| {
        let k = grid.multi_index(j);
        let mut r: Vec<String> = k[..grid.dim()].iter().map(|t| t.to_string()).collect();
        r.push(num(*c));
        r
    });
    write_csv(path, stamp, header, rows)
}

pub const TRACE_COLUMNS: [&str; 8] = [
    "iteration",
    "path_max_energy",
    "energy",
    "grad_norm",
    "sol_norm",
    "defect",
    "f_norm",
    "cerami",
];

pub fn write_trace(path: &Path, stamp: &Stamp, t: &MinMaxTrace) -> anyhow::Result<()> {
    let rows = t
        .records
        .iter()
        .zip(&t.path_max_energy)
        .enumerate()
        .map(|(i, (r, pm))| {
            vec![
                i.to_string(),
                num(*pm),
                num(r.energy),
                num(r.grad_norm),
                num(r.sol_norm),
                num(r.defect),
                r.f_norm.map(num).unwrap_or_default(),
                num(r.cerami),
            ]
        });
    write_csv(path, stamp, &TRACE_COLUMNS, rows)
}

pub fn trace_summary(t: &MinMaxTrace) -> Value {
    let records: Vec<&PSRecord> = t.records.iter().collect();
    json!({
        "converged": t.converged,
        "iterations": t.iterations,
        "residual": t.residual,
        "full_residual": t.full_residual,
        "energy": t.energy,
        "beta": t.beta,
        "max_sol_norm": t.max_sol_norm,
        "sup_norm": sup_norm(&t.solution),
        "min_value": t.solution.to_grid().iter().cloned().fold(f64::INFINITY, f64::min),
        "warnings": t.warnings,
        "records": records,
    })
}

/// Trace, solution and coefficients into `dir`.
pub fn write_run(dir: &Path, stamp: &Stamp, t: &MinMaxTrace) -> anyhow::Result<()> {
    fs::create_dir_all(dir).with_context(|| format!("cannot create {}", dir.display()))?;
    write_solution(&dir.join("solution.csv"), stamp, &t.solution)?;
    write_coeffs(&dir.join("coeffs.csv"), stamp, &t.solution)?;
    write_trace(&dir.join("trace.csv"), stamp, t)
}

pub fn sup_norm(u: &Field) -> f64 {
    u.to_grid().iter().fold(0.0f64, |a, x| a.max(x.abs()))
}

pub fn sign_changes(u: &Field) -> usize {
    let vals = u.to_grid();
    let peak = sup_norm(u);
    let signs: Vec<f64> = vals
        .iter()
        .filter(|x| x.abs() > 1e-8 * peak)
        .map(|x| x.signum())
        .collect();
    signs.windows(2).filter(|w| w[0] != w[1]).count()
}
