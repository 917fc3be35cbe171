//! `simulate`: runs a configured model and writes the run artifacts.

use std::collections::BTreeMap;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use nonlocalflow::evolve::{run, MuskatModel, PeskinModel, RunOptions, RunResult};
use serde_json::json;
use sha2::{Digest, Sha256};

use crate::config::{ModelConfig, RunConfig};
use crate::snapshot::write_state;
use crate::CliError;

fn hex_sha256(bytes: &[u8]) -> String {
    Sha256::digest(bytes)
        .iter()
        .fold(String::new(), |mut s, b| {
            let _ = write!(s, "{b:02x}");
            s
        })
}

/// Git-style content hash: SHA-256 of `blob <len>\0<bytes>`.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut framed = format!("blob {}\0", bytes.len()).into_bytes();
    framed.extend_from_slice(bytes);
    hex_sha256(&framed)
}

fn write(
    dir: &Path,
    name: &str,
    bytes: &[u8],
    hashes: &mut BTreeMap<String, String>,
) -> Result<(), CliError> {
    let path = dir.join(name);
    std::fs::write(&path, bytes).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    hashes.insert(name.to_string(), content_hash(bytes));
    Ok(())
}

fn state_name(step: usize) -> String {
    format!("state_{step:06}.csv")
}

fn plot_script(result: &RunResult, states: &[String], curve: bool) -> String {
    let header = result.trace.header();
    let mut s = String::from("set datafile separator ','\nset key autotitle columnhead\nset terminal pngcairo size 900,600\n\n");
    s.push_str("set output 'diag.png'\nset logscale y\nset xlabel 't'\nplot ");
    let cols: Vec<String> = (2..=header.len())
        .map(|c| format!("'diag.csv' using 1:{c} with lines"))
        .collect();
    s.push_str(&cols.join(", \\\n     "));
    s.push_str("\nunset logscale y\n\n");
    if let Some(last) = states.last() {
        s.push_str("set output 'state.png'\n");
        if curve {
            s.push_str("set size ratio -1\nset xlabel 'x1'\nset ylabel 'x2'\nplot ");
            let lines: Vec<String> = states
                .iter()
                .map(|f| format!("'{f}' using 2:3 with lines"))
                .collect();
            s.push_str(&lines.join(", \\\n     "));
        } else {
            s.push_str("set xlabel 'x'\nset ylabel 'f'\nplot ");
            let lines: Vec<String> = states
                .iter()
                .map(|f| format!("'{f}' using 1:2 with lines"))
                .collect();
            s.push_str(&lines.join(", \\\n     "));
        }
        let _ = write!(s, "\n# last state: {last}\n");
    }
    s
}

/// Output directory: `--out`, then `output.dir`, then `NONLOCALFLOW_OUT`.
pub fn resolve_out(
    flag: Option<PathBuf>,
    cfg: &RunConfig,
    env: Option<PathBuf>,
) -> Result<PathBuf, CliError> {
    flag.or_else(|| cfg.output.dir.clone())
        .or(env)
        .ok_or_else(|| {
            CliError::Config(
                "no output directory: pass --out, set output.dir or NONLOCALFLOW_OUT".into(),
            )
        })
}

pub struct SimulateOutcome {
    pub dir: PathBuf,
    pub aborted: Option<String>,
}

/// Runs `cfg` and writes `manifest.json`, `diag.csv`, `state_######.csv` and `plot.gp` into `dir`.
pub fn simulate(cfg: &RunConfig, input: &[u8], dir: &Path) -> Result<SimulateOutcome, CliError> {
    let prepared = cfg.prepare()?;
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Config(format!("{}: {e}", dir.display())))?;
    let opts = RunOptions {
        trace: prepared.trace.clone(),
        every_n_steps: cfg.diagnostics.every_n_steps,
        snapshots_every: cfg.output.snapshots_every,
        ..Default::default()
    };
    let runtime = |e: nonlocalflow::Error| CliError::Runtime(e.to_string());
    let result = match &cfg.model {
        ModelConfig::Muskat { rho0, .. } => {
            let model = MuskatModel::new(*rho0, &cfg.time, &prepared.initial).map_err(runtime)?;
            run(&model, &prepared.initial, &cfg.time, &opts).map_err(runtime)?
        }
        ModelConfig::Peskin { tension, .. } => {
            let model =
                PeskinModel::new(tension.clone(), &cfg.time, &prepared.initial).map_err(runtime)?;
            run(&model, &prepared.initial, &cfg.time, &opts).map_err(runtime)?
        }
    };

    let mut hashes = BTreeMap::new();
    let mut states = Vec::new();
    let mut snapshots: Vec<(usize, &nonlocalflow::PeriodicField)> =
        result.snapshots.iter().map(|(k, _, f)| (*k, f)).collect();
    let accepted_macro_steps = if result.aborted.is_some() {
        steps_completed(&result, cfg)
    } else {
        cfg.time.step_count()
    };
    if snapshots.last().map(|s| s.0) != Some(accepted_macro_steps) {
        snapshots.push((accepted_macro_steps, &result.state));
    }
    for (k, f) in snapshots {
        let name = state_name(k);
        let path = dir.join(&name);
        write_state(&path, f)?;
        let bytes = std::fs::read(&path).map_err(|e| CliError::Io(e.to_string()))?;
        hashes.insert(name.clone(), content_hash(&bytes));
        states.push(name);
    }
    write(
        dir,
        "diag.csv",
        result.trace.to_csv().as_bytes(),
        &mut hashes,
    )?;
    let curve = matches!(cfg.model, ModelConfig::Peskin { .. });
    write(
        dir,
        "plot.gp",
        plot_script(&result, &states, curve).as_bytes(),
        &mut hashes,
    )?;
    let manifest = json!({
        "tool": "nonlocalflow",
        "version": env!("CARGO_PKG_VERSION"),
        "config": cfg,
        "input_hash": content_hash(input),
        "outputs": hashes,
        "t_final": result.t,
        "accepted_steps": result.steps.len(),
        "max_halvings": result.steps.iter().map(|s| s.halvings).max().unwrap_or(0),
        "aborted": result.aborted,
    });
    let text =
        serde_json::to_string_pretty(&manifest).map_err(|e| CliError::Io(e.to_string()))? + "\n";
    let path = dir.join("manifest.json");
    std::fs::write(&path, text).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    Ok(SimulateOutcome {
        dir: dir.to_path_buf(),
        aborted: result.aborted,
    })
}

/// Macro steps fully accepted before an abort, recovered from the accepted time.
fn steps_completed(result: &RunResult, cfg: &RunConfig) -> usize {
    (result.t / cfg.time.dt + 1e-9).floor() as usize
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn content_hash_matches_git_framing() {
        // SHA-256 of "blob 0\0", as `git hash-object` computes it in SHA-256 repositories
        assert_eq!(
            content_hash(b""),
            "473a0f4c3be8a93681a267e3b1e9a7dcda1185436fe141f7749120a303721813"
        );
    }
}
