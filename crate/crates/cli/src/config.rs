//! Run configuration: strict JSON, validated before any compute.

use std::f64::consts::TAU;
use std::path::{Path, PathBuf};

use nonlocalflow::evolve::{Model, MuskatModel, PeskinModel, Scheme, SchemeConfig};
use nonlocalflow::muskat::MuskatInitial;
use nonlocalflow::norms::{TraceSpec, WeightedOrder};
use nonlocalflow::peskin::{PeskinInitial, TensionLaw};
use nonlocalflow::spectral::{PeriodicField, PeriodicGrid};
use serde::{Deserialize, Serialize};

use crate::CliError;

fn two_pi() -> f64 {
    TAU
}

fn one() -> usize {
    1
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub n: usize,
    #[serde(default = "two_pi")]
    pub period: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelConfig {
    Muskat {
        #[serde(default)]
        rho0: f64,
        initial: MuskatInitial,
    },
    Peskin {
        tension: TensionLaw,
        initial: PeskinInitial,
    },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DiagnosticsConfig {
    /// Record a diagnostics row every this many steps; the endpoints are always recorded.
    #[serde(default = "one")]
    pub every_n_steps: usize,
    #[serde(default)]
    pub holder_orders: Vec<f64>,
    /// Time-weighted seminorms `t^weight ‖·‖_{Ċ^order}`.
    #[serde(default)]
    pub weights: Vec<WeightedOrder>,
    /// Exponent of the chord-slope column, Peskin only.
    #[serde(default)]
    pub q_eps: Option<f64>,
}

impl Default for DiagnosticsConfig {
    fn default() -> Self {
        Self {
            every_n_steps: 1,
            holder_orders: Vec::new(),
            weights: Vec::new(),
            q_eps: None,
        }
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputConfig {
    #[serde(default)]
    pub dir: Option<PathBuf>,
    /// Write a state snapshot every this many steps; the final state is always written.
    #[serde(default)]
    pub snapshots_every: usize,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub grid: GridConfig,
    pub time: SchemeConfig,
    pub model: ModelConfig,
    #[serde(default)]
    pub diagnostics: DiagnosticsConfig,
    #[serde(default)]
    pub output: OutputConfig,
}

/// A validated configuration's initial state and trace columns.
pub struct Prepared {
    pub initial: PeriodicField,
    pub trace: TraceSpec,
}

impl RunConfig {
    pub fn parse(text: &str) -> Result<Self, CliError> {
        serde_json::from_str(text).map_err(|e| CliError::Config(format!("config: {e}")))
    }

    pub fn load(path: &Path) -> Result<(Self, Vec<u8>), CliError> {
        let bytes = std::fs::read(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        let text = String::from_utf8(bytes.clone())
            .map_err(|e| CliError::Config(format!("config: {e}")))?;
        Ok((Self::parse(&text)?, bytes))
    }

    /// Replaces the seed of seeded initial data.
    pub fn apply_seed(&mut self, seed: u64) {
        if let ModelConfig::Muskat { initial, .. } = &mut self.model {
            match initial {
                MuskatInitial::RandomBesov { seed: s, .. } => *s = seed,
                MuskatInitial::Lacunary { seed: s, .. } => *s = Some(seed),
                _ => {}
            }
        }
    }

    /// Checks every field and builds the model once, so failures surface before the run.
    pub fn prepare(&self) -> Result<Prepared, CliError> {
        let config = |e: nonlocalflow::Error| CliError::Config(e.to_string());
        let grid = PeriodicGrid::new(self.grid.n, self.grid.period).map_err(config)?;
        self.time.validate().map_err(config)?;
        if self.time.scheme == Scheme::Picard {
            return Err(CliError::Config(
                "time.scheme: picard is an analysis iteration, not a time stepper; use imex or rk4"
                    .into(),
            ));
        }
        if self
            .diagnostics
            .holder_orders
            .iter()
            .any(|a| !(a.is_finite() && *a >= 0.0))
        {
            return Err(CliError::Config(
                "diagnostics.holder_orders must be finite and nonnegative".into(),
            ));
        }
        let mut trace = TraceSpec {
            holder_orders: self.diagnostics.holder_orders.clone(),
            weighted: self.diagnostics.weights.clone(),
            ..Default::default()
        };
        let initial = match &self.model {
            ModelConfig::Muskat { rho0, initial } => {
                if self.diagnostics.q_eps.is_some() {
                    return Err(CliError::Config(
                        "diagnostics.q_eps applies to peskin runs only".into(),
                    ));
                }
                let f0 = initial.sample(&grid).map_err(config)?;
                let model = MuskatModel::new(*rho0, &self.time, &f0).map_err(config)?;
                self.check_explicit_limit(&model, &f0)?;
                f0
            }
            ModelConfig::Peskin { tension, initial } => {
                let x0 = initial.sample(&grid).map_err(config)?;
                let model = PeskinModel::new(tension.clone(), &self.time, &x0).map_err(config)?;
                self.check_explicit_limit(&model, &x0)?;
                trace.arc_chord = true;
                trace.projection = true;
                trace.q_eps = self.diagnostics.q_eps;
                x0
            }
        };
        Ok(Prepared { initial, trace })
    }

    fn check_explicit_limit(&self, model: &impl Model, x0: &PeriodicField) -> Result<(), CliError> {
        if self.time.scheme != Scheme::Rk4 {
            return Ok(());
        }
        match model.explicit_limit(x0, self.time.cfl) {
            Some(limit) if self.time.dt > limit => Err(CliError::Config(format!(
                "time.dt {:e} exceeds the explicit RK4 limit {limit:e} for this grid",
                self.time.dt
            ))),
            _ => Ok(()),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MUSKAT: &str = r#"{
        "grid": {"n": 32},
        "time": {"dt": 0.01, "t_end": 0.1, "scheme": "imex"},
        "model": {"muskat": {"rho0": 1.0, "initial": {"type": "random_besov", "amplitude": 0.1, "slope": 2.0, "seed": 3}}},
        "diagnostics": {"holder_orders": [0.5], "weights": [{"order": 2.0, "weight": 0.5}]}
    }"#;

    #[test]
    fn parses_and_round_trips() {
        let c = RunConfig::parse(MUSKAT).unwrap();
        assert_eq!(c.grid.period, TAU);
        let echo = serde_json::to_string(&c).unwrap();
        assert_eq!(RunConfig::parse(&echo).unwrap(), c);
        assert!(c.prepare().is_ok());
    }

    #[test]
    fn unknown_keys_are_rejected() {
        for bad in [
            MUSKAT.replace("\"grid\"", "\"gird\""),
            MUSKAT.replace("\"n\": 32", "\"n\": 32, \"m\": 1"),
            MUSKAT.replace("\"rho0\"", "\"rho\""),
            MUSKAT.replace("\"seed\": 3", "\"seed\": 3, \"phase\": 1"),
        ] {
            assert!(
                matches!(RunConfig::parse(&bad), Err(CliError::Config(_))),
                "{bad}"
            );
        }
    }

    #[test]
    fn seed_override() {
        let mut c = RunConfig::parse(MUSKAT).unwrap();
        c.apply_seed(99);
        let ModelConfig::Muskat {
            initial: MuskatInitial::RandomBesov { seed, .. },
            ..
        } = c.model
        else {
            panic!("muskat config");
        };
        assert_eq!(seed, 99);
    }

    #[test]
    fn invalid_values_fail_validation() {
        let c = RunConfig::parse(&MUSKAT.replace("\"dt\": 0.01", "\"dt\": -1")).unwrap();
        assert!(matches!(c.prepare(), Err(CliError::Config(_))));
        let c = RunConfig::parse(&MUSKAT.replace("\"n\": 32", "\"n\": 3")).unwrap();
        assert!(matches!(c.prepare(), Err(CliError::Config(_))));
        let c = RunConfig::parse(&MUSKAT.replace("\"imex\"", "\"rk4\"")).unwrap();
        assert!(matches!(c.prepare(), Err(CliError::Config(_))));
    }
}
