//! Output files. Every JSON document carries the library version, the
//! command, the resolved configuration and the master seed.

use std::fs;
use std::path::Path;

use serde::Serialize;

use blockmix::{ChainTrace, FitResult};

use crate::layout::{layout, LayoutKind};
use crate::CliError;

#[derive(Serialize)]
pub struct Envelope<'a, C: Serialize, R: Serialize> {
    pub version: &'static str,
    pub command: &'a str,
    pub seed: u64,
    pub config: &'a C,
    pub result: &'a R,
}

pub fn envelope<'a, C: Serialize, R: Serialize>(
    command: &'a str,
    seed: u64,
    config: &'a C,
    result: &'a R,
) -> Envelope<'a, C, R> {
    Envelope {
        version: blockmix::VERSION,
        command,
        seed,
        config,
        result,
    }
}

fn io_err(path: &Path, e: impl ToString) -> CliError {
    CliError::Io {
        path: path.display().to_string(),
        message: e.to_string(),
    }
}

pub fn ensure_dir(dir: &Path) -> Result<(), CliError> {
    fs::create_dir_all(dir).map_err(|e| io_err(dir, e))
}

pub fn write_json<T: Serialize>(dir: &Path, name: &str, value: &T) -> Result<(), CliError> {
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value).map_err(|e| io_err(&path, e))?;
    text.push('\n');
    fs::write(&path, text).map_err(|e| io_err(&path, e))
}

/// Header: `iteration,cdll,pi_1..,rho_mu_1..,rho_sigma_1..,mu_g_l..,sigma2_g_l..`
/// with 1-based cluster indices.
pub fn trace_header(trace: &ChainTrace) -> Vec<String> {
    let mut h = vec!["iteration".to_string(), "cdll".to_string()];
    let Some(first) = trace.entries.first() else {
        return h;
    };
    let s = first.theta.spec();
    h.extend((1..=s.g).map(|g| format!("pi_{g}")));
    h.extend((1..=s.l_mu).map(|l| format!("rho_mu_{l}")));
    h.extend((1..=s.l_sigma).map(|l| format!("rho_sigma_{l}")));
    for g in 1..=s.g {
        h.extend((1..=s.l_mu).map(|l| format!("mu_{g}_{l}")));
    }
    for g in 1..=s.g {
        h.extend((1..=s.l_sigma).map(|l| format!("sigma2_{g}_{l}")));
    }
    h
}

pub fn write_trace(dir: &Path, trace: &ChainTrace) -> Result<(), CliError> {
    let path = dir.join("trace.csv");
    let mut w = csv::Writer::from_path(&path).map_err(|e| io_err(&path, e))?;
    w.write_record(trace_header(trace))
        .map_err(|e| io_err(&path, e))?;
    for e in &trace.entries {
        let t = &e.theta;
        let mut rec = vec![e.iteration.to_string(), e.cdll.to_string()];
        let flat = t
            .pi()
            .iter()
            .chain(t.rho_mu())
            .chain(t.rho_sigma())
            .chain(t.mu().iter().flatten())
            .chain(t.sigma2().iter().flatten());
        rec.extend(flat.map(|v| v.to_string()));
        w.write_record(rec).map_err(|e| io_err(&path, e))?;
    }
    w.flush().map_err(|e| io_err(&path, e))
}

/// `result.json`, `trace.csv` and the three layout files for one fit.
pub fn write_fit<C: Serialize>(
    dir: &Path,
    command: &str,
    seed: u64,
    config: &C,
    fit: &FitResult,
) -> Result<(), CliError> {
    write_json(dir, "result.json", &envelope(command, seed, config, fit))?;
    write_trace(dir, &fit.trace)?;
    for (kind, name) in [
        (LayoutKind::Means, "layout_means.json"),
        (LayoutKind::Variances, "layout_variances.json"),
        (LayoutKind::Combined, "layout_combined.json"),
    ] {
        write_json(dir, name, &layout(&fit.partitions, kind))?;
    }
    Ok(())
}
