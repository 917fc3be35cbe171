use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Imex,
    Rk4,
    Picard,
}

/// How the constant coefficient of the implicit part is chosen.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FreezePolicy {
    /// Re-frozen every step at the smallest coefficient over the torus.
    #[default]
    GlobalMin,
    /// Frozen once from the initial profile.
    Profile,
}

fn default_threshold() -> f64 {
    2.0
}

fn default_cfl() -> f64 {
    0.08
}

fn default_max_halvings() -> u32 {
    10
}

fn default_refine() -> usize {
    2
}

/// Time-integration controls.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SchemeConfig {
    pub scheme: Scheme,
    pub dt: f64,
    pub t_end: f64,
    #[serde(default)]
    pub freeze: FreezePolicy,
    #[serde(default)]
    pub dealias: bool,
    /// A step is rejected when the control norm grows by more than this factor.
    #[serde(default = "default_threshold")]
    pub halving_threshold: f64,
    /// RK4 on Muskat needs `dt ≤ cfl · h³`.
    #[serde(default = "default_cfl")]
    pub cfl: f64,
    #[serde(default = "default_max_halvings")]
    pub max_halvings: u32,
    /// Offset refinement of the principal-value quadrature.
    #[serde(default = "default_refine")]
    pub refine: usize,
}

impl SchemeConfig {
    pub fn imex(dt: f64, t_end: f64) -> Self {
        Self {
            scheme: Scheme::Imex,
            dt,
            t_end,
            freeze: FreezePolicy::GlobalMin,
            dealias: false,
            halving_threshold: default_threshold(),
            cfl: default_cfl(),
            max_halvings: default_max_halvings(),
            refine: default_refine(),
        }
    }

    pub fn rk4(dt: f64, t_end: f64) -> Self {
        Self {
            scheme: Scheme::Rk4,
            ..Self::imex(dt, t_end)
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.dt.is_finite() && self.dt > 0.0) {
            return Err(Error::arg("dt", "must be positive and finite"));
        }
        if !(self.t_end.is_finite() && self.t_end >= 0.0) {
            return Err(Error::arg("t_end", "must be non-negative and finite"));
        }
        if !(self.halving_threshold > 1.0) {
            return Err(Error::arg("halving_threshold", "must exceed 1"));
        }
        if !(self.cfl > 0.0) {
            return Err(Error::arg("cfl", "must be positive"));
        }
        if self.max_halvings > 30 {
            return Err(Error::arg("max_halvings", "at most 30"));
        }
        if self.refine == 0 {
            return Err(Error::arg("refine", "must be at least 1"));
        }
        Ok(())
    }

    /// Number of macro steps, the last one shortened to land on `t_end`.
    pub fn step_count(&self) -> usize {
        let k = self.t_end / self.dt;
        let r = k.round();
        if (k - r).abs() < 1e-9 * k.max(1.0) {
            r as usize
        } else {
            k.ceil() as usize
        }
    }
}
