use std::time::Instant;

use super::config::{Scheme, SchemeConfig};
use super::step::{step_rk4, Model};
use crate::error::{Error, Result};
use crate::norms::{DiagnosticsTrace, TraceSpec};
use crate::peskin::project_circle_space;
use crate::spectral::PeriodicField;

/// Control norms below this never trigger a rejection.
const GROWTH_FLOOR: f64 = 1e-12;

/// One accepted (sub)step.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct StepRecord {
    pub t: f64,
    pub dt: f64,
    pub halvings: u32,
}

#[derive(Clone, Debug, Default)]
pub struct RunOptions {
    pub trace: TraceSpec,
    /// Record diagnostics every this many macro steps; 0 records only the endpoints.
    pub every_n_steps: usize,
    /// Keep a snapshot every this many macro steps; 0 keeps none.
    pub snapshots_every: usize,
    /// Reject the first attempt of this macro step, forcing one halving.
    pub force_halving_at: Option<usize>,
    /// Replay these step sizes exactly instead of `dt`, with no rejection.
    pub schedule: Option<Vec<f64>>,
}

#[derive(Clone, Debug)]
pub struct RunResult {
    /// Last accepted state.
    pub state: PeriodicField,
    pub t: f64,
    pub trace: DiagnosticsTrace,
    pub steps: Vec<StepRecord>,
    /// `(macro step index, t, state)`.
    pub snapshots: Vec<(usize, f64, PeriodicField)>,
    pub wall_time: f64,
    /// Reason the run stopped early, if it did.
    pub aborted: Option<String>,
}

impl RunResult {
    /// Accepted step sizes, in order; feed back through [`RunOptions::schedule`].
    pub fn schedule(&self) -> Vec<f64> {
        self.steps.iter().map(|s| s.dt).collect()
    }
}

struct Driver<'a, M: Model> {
    model: &'a M,
    cfg: &'a SchemeConfig,
}

impl<M: Model> Driver<'_, M> {
    fn single(&self, t: f64, x: &PeriodicField, dt: f64) -> Result<PeriodicField> {
        match self.cfg.scheme {
            Scheme::Imex => self.model.step_imex(t, x, dt),
            Scheme::Rk4 => step_rk4(t, x, dt, |s, y| self.model.rhs(s, y)),
            Scheme::Picard => Err(Error::arg("scheme", "picard runs through picard_iterate")),
        }
    }

    fn accept(&self, old: f64, x: &PeriodicField) -> Result<()> {
        x.check_finite("state")?;
        self.model.admissible(x)?;
        let new = self.model.control_norm(x)?;
        if new > self.cfg.halving_threshold * old.max(GROWTH_FLOOR) {
            return Err(Error::arg(
                "state",
                format!("control norm grew from {old:.3e} to {new:.3e}"),
            ));
        }
        Ok(())
    }

    /// Advances by `dt`, splitting into halves on rejection.
    fn advance(
        &self,
        t: f64,
        x: &PeriodicField,
        dt: f64,
        depth: u32,
        force: bool,
        log: &mut Vec<StepRecord>,
    ) -> Result<PeriodicField> {
        let old = self.model.control_norm(x)?;
        let attempt = if force {
            Err(Error::arg("step", "forced rejection"))
        } else {
            self.single(t, x, dt)
                .and_then(|y| self.accept(old, &y).map(|_| y))
        };
        match attempt {
            Ok(y) => {
                log.push(StepRecord {
                    t,
                    dt,
                    halvings: depth,
                });
                Ok(y)
            }
            Err(e) if depth >= self.cfg.max_halvings => Err(Error::Aborted {
                t,
                reason: format!("step rejected after {depth} halvings: {e}"),
            }),
            Err(_) => {
                let half = 0.5 * dt;
                let mid = self.advance(t, x, half, depth + 1, false, log)?;
                self.advance(t + half, &mid, half, depth + 1, false, log)
            }
        }
    }
}

fn record(trace: &mut DiagnosticsTrace, t: f64, x: &PeriodicField) -> Result<()> {
    let proj = if trace.spec().projection {
        let p = project_circle_space(x)?;
        Some(([p.z0.re, p.z0.im], [p.z1.re, p.z1.im]))
    } else {
        None
    };
    trace.push(t, x, proj).map(|_| ())
}

/// Runs a model from `x0` to `cfg.t_end`; `observe` sees every accepted macro step.
pub fn run_with(
    model: &impl Model,
    x0: &PeriodicField,
    cfg: &SchemeConfig,
    opts: &RunOptions,
    mut observe: impl FnMut(f64, &PeriodicField) -> Result<()>,
) -> Result<RunResult> {
    cfg.validate()?;
    x0.check_finite("initial state")?;
    model.admissible(x0)?;
    if cfg.scheme == Scheme::Rk4 {
        if let Some(limit) = model.explicit_limit(x0, cfg.cfl) {
            if cfg.dt > limit {
                return Err(Error::arg(
                    "dt",
                    format!("{:.3e} exceeds the explicit limit {limit:.3e}", cfg.dt),
                ));
            }
        }
    }
    let started = Instant::now();
    let driver = Driver { model, cfg };
    let mut trace = DiagnosticsTrace::new(opts.trace.clone());
    record(&mut trace, 0.0, x0)?;
    observe(0.0, x0)?;
    let mut snapshots = Vec::new();
    if opts.snapshots_every > 0 {
        snapshots.push((0, 0.0, x0.clone()));
    }
    let macro_steps: Vec<f64> = match &opts.schedule {
        Some(s) => s.clone(),
        None => {
            let count = cfg.step_count();
            (0..count)
                .map(|k| (cfg.t_end - k as f64 * cfg.dt).min(cfg.dt))
                .collect()
        }
    };
    let replay = opts.schedule.is_some();
    let mut x = x0.clone();
    let mut t = 0.0;
    let mut steps = Vec::new();
    let mut aborted = None;
    for (k, &dt) in macro_steps.iter().enumerate() {
        let result = if replay {
            driver
                .single(t, &x, dt)
                .inspect(|_| steps.push(StepRecord { t, dt, halvings: 0 }))
        } else {
            let force = opts.force_halving_at == Some(k);
            driver.advance(t, &x, dt, 0, force, &mut steps)
        };
        let next = match result {
            Ok(y) => y,
            Err(e) => {
                aborted = Some(e.to_string());
                break;
            }
        };
        t = if replay || k + 1 < macro_steps.len() {
            t + dt
        } else {
            cfg.t_end
        };
        x = next;
        let last = k + 1 == macro_steps.len();
        let due = opts.every_n_steps > 0 && (k + 1) % opts.every_n_steps == 0;
        if due || last {
            if let Err(e) = record(&mut trace, t, &x) {
                aborted = Some(e.to_string());
                break;
            }
        }
        if opts.snapshots_every > 0 && ((k + 1) % opts.snapshots_every == 0 || last) {
            snapshots.push((k + 1, t, x.clone()));
        }
        if let Err(e) = observe(t, &x) {
            aborted = Some(e.to_string());
            break;
        }
    }
    Ok(RunResult {
        state: x,
        t,
        trace,
        steps,
        snapshots,
        wall_time: started.elapsed().as_secs_f64(),
        aborted,
    })
}

pub fn run(
    model: &impl Model,
    x0: &PeriodicField,
    cfg: &SchemeConfig,
    opts: &RunOptions,
) -> Result<RunResult> {
    run_with(model, x0, cfg, opts, |_, _| Ok(()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolve::step::MuskatModel;
    use crate::spectral::PeriodicGrid;

    fn data(n: usize) -> PeriodicField {
        let g = PeriodicGrid::standard(n).unwrap();
        PeriodicField::from_fn(&g, |x| 0.1 * x.cos() + 0.05 * (2.0 * x).sin())
    }

    #[test]
    fn forced_halving_matches_half_step_run() {
        let f0 = data(32);
        let cfg = SchemeConfig::imex(0.01, 0.01);
        let model = MuskatModel::new(0.0, &cfg, &f0).unwrap();
        let forced = run(
            &model,
            &f0,
            &cfg,
            &RunOptions {
                force_halving_at: Some(0),
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(forced.steps.len(), 2);
        let native = run(
            &model,
            &f0,
            &SchemeConfig::imex(0.005, 0.01),
            &RunOptions::default(),
        )
        .unwrap();
        assert!(forced.state.max_diff(&native.state).unwrap() < 1e-12);
    }

    #[test]
    fn schedule_replay_is_exact() {
        let f0 = data(32);
        let cfg = SchemeConfig::imex(0.01, 0.05);
        let model = MuskatModel::new(0.5, &cfg, &f0).unwrap();
        let first = run(
            &model,
            &f0,
            &cfg,
            &RunOptions {
                force_halving_at: Some(2),
                ..Default::default()
            },
        )
        .unwrap();
        let replay = run(
            &model,
            &f0,
            &cfg,
            &RunOptions {
                schedule: Some(first.schedule()),
                ..Default::default()
            },
        )
        .unwrap();
        assert!(first.state.max_diff(&replay.state).unwrap() <= 1e-12);
        assert!((first.t - 0.05).abs() < 1e-15 && (replay.t - 0.05).abs() < 1e-12);
    }

    #[test]
    fn rk4_limit_enforced() {
        let f0 = data(32);
        let cfg = SchemeConfig::rk4(0.01, 0.01);
        let model = MuskatModel::new(0.0, &cfg, &f0).unwrap();
        assert!(run(&model, &f0, &cfg, &RunOptions::default()).is_err());
    }

    #[test]
    fn trace_records_endpoints() {
        let f0 = data(32);
        let cfg = SchemeConfig::imex(0.01, 0.1);
        let model = MuskatModel::new(0.0, &cfg, &f0).unwrap();
        let r = run(
            &model,
            &f0,
            &cfg,
            &RunOptions {
                every_n_steps: 5,
                snapshots_every: 5,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!(r.trace.len(), 3);
        assert_eq!(r.snapshots.len(), 3);
        assert!(r.aborted.is_none());
        let lip = r.trace.column("lip").unwrap();
        assert!(lip[2] < lip[0]);
    }
}
