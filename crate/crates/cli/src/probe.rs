//! `kernel-probe`: bound reports and far-field decay of one symbol's kernel.

use std::path::Path;

use nonlocalflow::kernels::bounds::xi_lattice;
use nonlocalflow::kernels::physical::MAX_L1_MODES;
use nonlocalflow::kernels::{
    check_exp_bound, decay_fit, derivative_bound_stability, grid_wavenumbers, l1_scaling_spread,
    solve_kernel_fourier, BoundReport, DecayFit, KernelOptions, SymbolSpec,
};
use nonlocalflow::{Error, PeriodicGrid};
use serde::{Deserialize, Serialize};

use crate::CliError;

fn one() -> f64 {
    1.0
}

fn xi_max() -> f64 {
    6.0
}

fn dxi() -> f64 {
    0.25
}

fn orders() -> Vec<u32> {
    vec![1, 2]
}

fn decay_t() -> f64 {
    1e-3
}

fn decay_n() -> usize {
    256
}

fn sigmas() -> Vec<f64> {
    (0..6).map(|i| 0.01 * 10f64.powf(i as f64 / 5.0)).collect()
}

/// Probe settings; a bare symbol spec is accepted and gets every default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProbeConfig {
    pub symbol: SymbolSpec,
    /// Final time of the bound tables.
    #[serde(default = "one")]
    pub t: f64,
    #[serde(default = "xi_max")]
    pub xi_max: f64,
    #[serde(default = "dxi")]
    pub dxi: f64,
    /// `ξ`-derivative orders whose envelope constants are checked for refinement stability.
    #[serde(default = "orders")]
    pub derivative_orders: Vec<u32>,
    /// `t - τ` of the far-field decay fit.
    #[serde(default = "decay_t")]
    pub decay_t: f64,
    /// Starting grid of the decay fit; grown until the spectrum decays.
    #[serde(default = "decay_n")]
    pub decay_n: usize,
    /// `t - τ` values of the L¹ scaling check.
    #[serde(default = "sigmas")]
    pub l1_sigmas: Vec<f64>,
}

impl ProbeConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        match serde_json::from_str::<ProbeConfig>(text) {
            Ok(c) => Ok(c),
            Err(full) => serde_json::from_str::<SymbolSpec>(text)
                .map(|symbol| ProbeConfig {
                    symbol,
                    t: one(),
                    xi_max: xi_max(),
                    dxi: dxi(),
                    derivative_orders: orders(),
                    decay_t: decay_t(),
                    decay_n: decay_n(),
                    l1_sigmas: sigmas(),
                })
                .map_err(|_| CliError::Config(format!("symbol spec: {full}"))),
        }
    }
}

pub struct ProbeOutcome {
    pub reports: Vec<BoundReport>,
    pub decay: Option<DecayFit>,
}

impl ProbeOutcome {
    pub fn pass(&self) -> bool {
        self.reports.iter().all(|r| r.pass) && self.decay.as_ref().is_none_or(|d| d.pass)
    }
}

fn decay(sym: &SymbolSpec, sigma: f64, n0: usize) -> Result<DecayFit, Error> {
    let opts = KernelOptions {
        tau_count: 2,
        step_target: 0.01,
        ..KernelOptions::default()
    };
    let mut n = n0;
    loop {
        let g = PeriodicGrid::standard(n)?;
        let tab = solve_kernel_fourier(sym, sigma, 0.0, &grid_wavenumbers(&g), &opts)?;
        match decay_fit(&tab, 0, &g, 8) {
            Err(Error::InsufficientDecay { required_modes, .. })
                if required_modes > n && required_modes <= MAX_L1_MODES =>
            {
                n = required_modes;
            }
            other => return other,
        }
    }
}

/// Runs every applicable check; coercivity violations are configuration errors.
pub fn probe(cfg: &ProbeConfig) -> Result<ProbeOutcome, CliError> {
    let sym = &cfg.symbol;
    sym.validate()
        .map_err(|e| CliError::Config(e.to_string()))?;
    let runtime = |e: Error| CliError::Runtime(e.to_string());
    let opts = KernelOptions::accurate();
    let tab = solve_kernel_fourier(sym, cfg.t, 0.0, &xi_lattice(cfg.xi_max, cfg.dxi), &opts)
        .map_err(runtime)?;
    let mut reports = vec![check_exp_bound(&tab, sym.c0)];
    for &l in &cfg.derivative_orders {
        let s = derivative_bound_stability(sym, cfg.t, l, cfg.xi_max, cfg.dxi, &opts)
            .map_err(runtime)?;
        reports.push(BoundReport {
            id: format!("derivative_l{l}_refinement"),
            worst_ratio: s.relative_change,
            xi: s.fine.xi,
            tau: s.fine.tau,
            pass: s.pass,
            constant: s.fine.constant,
        });
    }
    let separable = sym.is_time_independent() && sym.is_x_independent();
    if separable && !cfg.l1_sigmas.is_empty() {
        let (spread, scaled) = l1_scaling_spread(sym, &cfg.l1_sigmas).map_err(runtime)?;
        let (i, _) = scaled
            .iter()
            .enumerate()
            .max_by(|a, b| (a.1 - scaled[0]).abs().total_cmp(&(b.1 - scaled[0]).abs()))
            .expect("non-empty sigmas");
        reports.push(BoundReport {
            id: "l1_scaling_spread".into(),
            worst_ratio: spread,
            xi: 0.0,
            tau: cfg.l1_sigmas[i],
            pass: spread <= 0.05,
            constant: Some(scaled[0]),
        });
    }
    let decay = if separable {
        Some(decay(sym, cfg.decay_t, cfg.decay_n).map_err(runtime)?)
    } else {
        None
    };
    Ok(ProbeOutcome { reports, decay })
}

pub fn write_outputs(dir: &Path, outcome: &ProbeOutcome) -> Result<(), CliError> {
    std::fs::create_dir_all(dir)
        .map_err(|e| CliError::Config(format!("{}: {e}", dir.display())))?;
    let mut csv = String::from(BoundReport::csv_header());
    csv.push('\n');
    for r in &outcome.reports {
        csv.push_str(&r.csv_row());
        csv.push('\n');
    }
    let path = dir.join("bounds.csv");
    std::fs::write(&path, csv).map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    if let Some(d) = &outcome.decay {
        let text = format!(
            "slope,threshold,points,pass\n{:.16e},{:.16e},{},{}\n",
            d.slope, d.threshold, d.points, d.pass
        );
        let path = dir.join("decay.csv");
        std::fs::write(&path, text)
            .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bare_symbol_gets_defaults() {
        let c = ProbeConfig::parse(
            r#"{"order": 2.0, "c0": 1.0, "c1": 2.1, "family": "scalar", "coefficient": 1.0}"#,
        )
        .unwrap();
        assert_eq!(
            c.symbol,
            SymbolSpec {
                c1: 2.1,
                ..SymbolSpec::heat()
            }
        );
        assert_eq!(c.derivative_orders, vec![1, 2]);
        assert!(ProbeConfig::parse(r#"{"symbol": {"order": 2.0}, "bogus": 1}"#).is_err());
    }

    #[test]
    fn wrong_coercivity_is_a_config_error() {
        let mut sym = SymbolSpec::heat();
        sym.c0 = 2.0;
        let cfg = ProbeConfig::parse(&serde_json::to_string(&sym).unwrap()).unwrap();
        assert!(matches!(probe(&cfg), Err(CliError::Config(_))));
    }
}
