use super::config::SchemeConfig;
use super::run::{run_with, RunOptions, RunResult};
use super::step::{Model, MuskatModel, PeskinModel};
use crate::error::{Error, Result};
use crate::kernels::physical::least_squares_slope;
use crate::muskat::MuskatInitial;
use crate::norms::{arc_chord, seminorm};
use crate::peskin::{decay_diagnostic, project_circle_space, DecayReport, TensionLaw};
use crate::spectral::ops::derivative;
use crate::spectral::{PeriodicField, PeriodicGrid};

/// Slack below the parabolic-scaling prediction allowed for the fitted slope.
pub const SMOOTHING_SLACK: f64 = 0.3;
/// Default bound on the perturbation-growth ratio.
pub const STABILITY_BOUND: f64 = 10.0;
/// Arc-chord growth allowed along an accepted Peskin run.
pub const ARC_CHORD_GROWTH: f64 = 10.0;
/// Log-spaced samples used by the smoothing fit.
const FIT_SAMPLES: usize = 40;

#[derive(Clone, Debug)]
pub struct SmoothingSetup {
    pub grid: PeriodicGrid,
    pub initial: MuskatInitial,
    /// Regularity of the initial slope: `f₀′ ∈ Ċ^β`.
    pub beta: f64,
    /// Hölder order of `∂ₓf` being tracked; must exceed `β`.
    pub order: f64,
    pub rho0: f64,
    pub scheme: SchemeConfig,
}

impl SmoothingSetup {
    /// Lacunary data `f₀′ ∈ Ċ^β` of the given amplitude.
    pub fn lacunary(
        grid: PeriodicGrid,
        beta: f64,
        order: f64,
        amplitude: f64,
        scheme: SchemeConfig,
    ) -> Self {
        Self {
            grid,
            initial: MuskatInitial::Lacunary {
                amplitude,
                beta,
                seed: None,
            },
            beta,
            order,
            rho0: 0.0,
            scheme,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct SmoothingReport {
    pub slope: f64,
    pub r_squared: f64,
    /// `-(a - β)/3` for `‖∂ₓf‖_{Ċ^a}`.
    pub prediction: f64,
    pub window: (f64, f64),
    /// `(t, ‖∂ₓf(t)‖_{Ċ^a})` used in the fit.
    pub samples: Vec<(f64, f64)>,
    pub pass: bool,
}

/// Fits `d log‖∂ₓf(t)‖_{Ċ^a} / d log t` on `[10 dt, t_end/2]`.
pub fn experiment_smoothing(setup: &SmoothingSetup) -> Result<SmoothingReport> {
    if setup.order <= setup.beta {
        return Err(Error::arg(
            "order",
            "tracked order must exceed the initial regularity",
        ));
    }
    let f0 = setup.initial.sample(&setup.grid)?;
    let cfg = &setup.scheme;
    let (t_lo, t_hi) = (10.0 * cfg.dt, 0.5 * cfg.t_end);
    if t_hi < 10.0 * t_lo {
        return Err(Error::arg(
            "t_end",
            format!("fit window [{t_lo:e}, {t_hi:e}] spans less than a decade"),
        ));
    }
    let targets: Vec<f64> = (0..FIT_SAMPLES)
        .map(|i| t_lo * (t_hi / t_lo).powf(i as f64 / (FIT_SAMPLES - 1) as f64))
        .collect();
    let model = MuskatModel::new(setup.rho0, cfg, &f0)?;
    let mut next = 0;
    let mut samples = Vec::new();
    let result = run_with(&model, &f0, cfg, &RunOptions::default(), |t, f| {
        if next < targets.len() && t >= targets[next] * (1.0 - 1e-9) {
            while next < targets.len() && t >= targets[next] * (1.0 - 1e-9) {
                next += 1;
            }
            samples.push((t, seminorm(&derivative(f, 1)?, setup.order)?));
        }
        Ok(())
    })?;
    if let Some(reason) = result.aborted {
        return Err(Error::Aborted {
            t: result.t,
            reason,
        });
    }
    let prediction = -(setup.order - setup.beta) / 3.0;
    let window = (prediction - SMOOTHING_SLACK, 0.0);
    let pts: Vec<(f64, f64)> = samples.iter().filter(|s| s.1 > 0.0).copied().collect();
    if pts.len() < 5 {
        return Err(Error::arg(
            "samples",
            "too few positive samples in the fit window",
        ));
    }
    let xs: Vec<f64> = pts.iter().map(|p| p.0.ln()).collect();
    let ys: Vec<f64> = pts.iter().map(|p| p.1.ln()).collect();
    let (slope, _, r_squared) = least_squares_slope(&xs, &ys);
    Ok(SmoothingReport {
        slope,
        r_squared,
        prediction,
        window,
        samples,
        pass: slope >= window.0 && slope <= window.1,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    /// `(t, ‖(f - g)(t)‖_{Ẇ^{1,∞}} / ‖f₀ - g₀‖_{Ẇ^{1,∞}})`.
    pub ratios: Vec<(f64, f64)>,
    pub sup_ratio: f64,
    /// Identical data: trajectories coincide and the ratio is reported as 0.
    pub coincident: bool,
    pub bound: f64,
    pub pass: bool,
}

fn trajectory(
    model: &impl Model,
    x0: &PeriodicField,
    cfg: &SchemeConfig,
) -> Result<Vec<(f64, PeriodicField)>> {
    let mut states = Vec::new();
    let r = run_with(model, x0, cfg, &RunOptions::default(), |t, x| {
        states.push((t, x.clone()));
        Ok(())
    })?;
    if let Some(reason) = r.aborted {
        return Err(Error::Aborted { t: r.t, reason });
    }
    Ok(states)
}

/// Evolves `f₀` and `g₀` side by side and tracks the Lipschitz-distance growth.
pub fn experiment_stability(
    f0: &PeriodicField,
    g0: &PeriodicField,
    rho0: f64,
    cfg: &SchemeConfig,
    bound: f64,
) -> Result<StabilityReport> {
    f0.compatible(g0)?;
    let lip = |a: &PeriodicField, b: &PeriodicField| -> Result<f64> {
        Ok(derivative(&a.sub(b)?, 1)?.max_abs())
    };
    let d0 = lip(f0, g0)?;
    let (fa, fb) = rayon::join(
        || MuskatModel::new(rho0, cfg, f0).and_then(|m| trajectory(&m, f0, cfg)),
        || MuskatModel::new(rho0, cfg, g0).and_then(|m| trajectory(&m, g0, cfg)),
    );
    let (fa, fb) = (fa?, fb?);
    if fa.len() != fb.len() {
        return Err(Error::arg(
            "trajectories",
            "runs recorded different step counts",
        ));
    }
    let mut ratios = Vec::with_capacity(fa.len());
    let mut coincident = d0 == 0.0;
    for ((t, a), (_, b)) in fa.iter().zip(&fb) {
        let d = lip(a, b)?;
        if d0 == 0.0 {
            coincident &= d == 0.0;
            ratios.push((*t, if d == 0.0 { 0.0 } else { f64::INFINITY }));
        } else {
            ratios.push((*t, d / d0));
        }
    }
    let sup_ratio = ratios.iter().map(|r| r.1).fold(0.0, f64::max);
    Ok(StabilityReport {
        ratios,
        sup_ratio,
        coincident,
        bound,
        pass: sup_ratio <= bound,
    })
}

#[derive(Clone, Debug)]
pub struct PeskinDecayReport {
    /// `(t, ‖(Id - 𝒫)X(t)‖_{L²})`.
    pub residuals: Vec<(f64, f64)>,
    pub decay: DecayReport,
    /// `max_t Θ(t) / Θ(0)`.
    pub arc_chord_growth: f64,
    pub run: RunResult,
    pub pass: bool,
}

/// Runs a near-circle membrane and fits the decay of its distance to the circle space.
pub fn experiment_peskin_decay(
    x0: &PeriodicField,
    law: TensionLaw,
    cfg: &SchemeConfig,
) -> Result<PeskinDecayReport> {
    let model = PeskinModel::new(law, cfg, x0)?;
    let theta0 = arc_chord(x0)?;
    let mut residuals = Vec::new();
    let mut growth = 1.0f64;
    let result = run_with(&model, x0, cfg, &RunOptions::default(), |t, x| {
        residuals.push((t, project_circle_space(x)?.residual_l2()));
        growth = growth.max(arc_chord(x)? / theta0);
        Ok(())
    })?;
    if let Some(reason) = &result.aborted {
        return Err(Error::Aborted {
            t: result.t,
            reason: reason.clone(),
        });
    }
    let decay = decay_diagnostic(&residuals)?;
    let pass = decay.rate.is_some_and(|r| r > 0.0)
        && decay.r_squared >= 0.99
        && growth <= ARC_CHORD_GROWTH;
    Ok(PeskinDecayReport {
        residuals,
        decay,
        arc_chord_growth: growth,
        run: result,
        pass,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identical_data_coincide() {
        let g = PeriodicGrid::standard(32).unwrap();
        let f0 = PeriodicField::from_fn(&g, |x| 0.01 * x.sin());
        let r = experiment_stability(
            &f0,
            &f0,
            0.0,
            &SchemeConfig::imex(0.01, 0.05),
            STABILITY_BOUND,
        )
        .unwrap();
        assert!(r.coincident && r.pass && r.sup_ratio == 0.0);
    }

    #[test]
    fn smooth_data_barely_smooths() {
        let setup = SmoothingSetup {
            grid: PeriodicGrid::standard(32).unwrap(),
            initial: MuskatInitial::Cosine {
                amplitude: 1e-3,
                mode: 1,
            },
            beta: 1.5,
            order: 2.0,
            rho0: 0.0,
            scheme: SchemeConfig::imex(1e-4, 0.03),
        };
        let r = experiment_smoothing(&setup).unwrap();
        assert!(r.slope.abs() < 0.1, "{}", r.slope);
    }

    #[test]
    fn fit_window_must_span_a_decade() {
        let setup = SmoothingSetup::lacunary(
            PeriodicGrid::standard(32).unwrap(),
            0.2,
            2.0,
            1e-3,
            SchemeConfig::imex(1e-3, 0.05),
        );
        assert!(experiment_smoothing(&setup).is_err());
    }
}
