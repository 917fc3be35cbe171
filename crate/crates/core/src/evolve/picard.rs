use crate::error::{Error, Result};
use crate::kernels::symbol::derivative_bound_constant;
use crate::kernels::{duhamel_trajectory, KernelOptions, SymbolFamily, SymbolSpec};
use crate::muskat::{inv_bracket_cubed, rhs_reformulated};
use crate::norms::seminorm;
use crate::spectral::ops::{derivative, fractional_laplacian};
use crate::spectral::PeriodicField;

/// Successive differences below this are round-off; no factor is reported for them.
pub const CONVERGED_FLOOR: f64 = 1e-14;
/// Consecutive non-contracting iterates that count as divergence.
pub const DIVERGENCE_RUN: usize = 3;

/// Controls for the fixed-point map.
#[derive(Clone, Debug, PartialEq)]
pub struct PicardConfig {
    pub t_end: f64,
    /// Time nodes per trajectory, excluding `t = 0`.
    pub steps: usize,
    pub rho0: f64,
    pub refine: usize,
    /// Trace norm `sup_t ‖∂ₓh‖_∞ + t^{(m+κ)/3} ‖∂ₓh‖_{Ċ^{m+κ}}`.
    pub kappa: f64,
    pub m: u32,
}

impl Default for PicardConfig {
    fn default() -> Self {
        Self {
            t_end: 0.1,
            steps: 100,
            rho0: 0.0,
            refine: 2,
            kappa: 0.5,
            m: 1,
        }
    }
}

#[derive(Clone, Debug)]
pub struct PicardResult {
    /// `iterates[k][j]` is iterate `k` at `t_j`; iterate 0 is the constant-in-time seed.
    pub iterates: Vec<Vec<PeriodicField>>,
    /// `‖f_{k+1} - f_k‖_T`.
    pub differences: Vec<f64>,
    /// `differences[k] / differences[k-1]`, skipped once the previous difference is round-off.
    pub factors: Vec<f64>,
    pub diverged: bool,
    /// Relative plug-back residual of the last iterate against the full right-hand side.
    pub residual: f64,
}

impl PicardResult {
    /// Worst factor after the first iterate, `None` if there is none to report.
    pub fn worst_factor(&self) -> Option<f64> {
        self.factors.iter().skip(1).copied().reduce(f64::max)
    }
}

/// `‖h‖_T` over a trajectory sampled at `t_j = j dt`.
pub fn trace_norm(h: &[PeriodicField], dt: f64, kappa: f64, m: u32) -> Result<f64> {
    let order = m as f64 + kappa;
    let mut best = 0.0f64;
    for (j, hj) in h.iter().enumerate() {
        let d = derivative(hj, 1)?;
        let t = j as f64 * dt;
        let high = if t > 0.0 {
            t.powf(order / 3.0) * seminorm(&d, order)?
        } else {
            0.0
        };
        best = best.max(d.max_abs() + high);
    }
    Ok(best)
}

fn frozen_symbol(c: f64) -> SymbolSpec {
    SymbolSpec {
        order: 3.0,
        c0: c,
        c1: derivative_bound_constant(3.0, c),
        family: SymbolFamily::Scalar { coefficient: c },
    }
}

/// `(⟨s⟩⁻³ - ⟨g′⟩⁻³) Λ³g` for a reference slope `s`.
fn coefficient_gap(g: &PeriodicField, c: f64) -> Result<PeriodicField> {
    let w = derivative(g, 1)?.map(|a| c - inv_bracket_cubed(a));
    fractional_laplacian(g, 3.0)?.times_scalar_field(&w)
}

/// Fixed-point iteration `f_{k+1} = 𝒮 f_k`, where `𝒮g` solves
/// `∂ₜf + ⟨s⟩⁻³Λ³f = 𝖭[g] + (⟨s⟩⁻³ - ⟨g′⟩⁻³)Λ³g` with `f(0) = g₀` by the Duhamel formula.
///
/// `profile_slope` is the slope `s` of the linear reference profile.
pub fn picard_iterate(
    g0: &PeriodicField,
    profile_slope: f64,
    iterations: usize,
    cfg: &PicardConfig,
) -> Result<PicardResult> {
    if cfg.steps < 2 {
        return Err(Error::arg("steps", "need at least two time steps"));
    }
    if !(cfg.t_end > 0.0) {
        return Err(Error::arg("t_end", "must be positive"));
    }
    let c = inv_bracket_cubed(profile_slope);
    let sym = frozen_symbol(c);
    let dt = cfg.t_end / cfg.steps as f64;
    let opts = KernelOptions::default();
    let mut iterates = vec![vec![g0.clone(); cfg.steps + 1]];
    let mut differences = Vec::new();
    let mut factors = Vec::new();
    let mut streak = 0;
    let mut diverged = false;
    for _ in 0..iterations {
        let g = iterates.last().expect("seed present");
        let forcing: Vec<PeriodicField> = g
            .iter()
            .map(|gj| {
                let mut f = rhs_reformulated(gj, cfg.rho0, cfg.refine)?.nonlinearity()?;
                f.axpy(1.0, &coefficient_gap(gj, c)?)?;
                Ok(f)
            })
            .collect::<Result<_>>()?;
        let lookup = |t: f64| -> Result<PeriodicField> {
            let j = (t / dt).round() as usize;
            forcing
                .get(j)
                .cloned()
                .ok_or_else(|| Error::arg("t", format!("{t} outside the Picard window")))
        };
        let next = duhamel_trajectory(&sym, g0, Some(&lookup), cfg.t_end, cfg.steps, &opts)?;
        let diff: Vec<PeriodicField> = next
            .iter()
            .zip(g)
            .map(|(a, b)| a.sub(b))
            .collect::<Result<_>>()?;
        let d = trace_norm(&diff, dt, cfg.kappa, cfg.m)?;
        if let Some(&prev) = differences.last() {
            if prev > CONVERGED_FLOOR {
                let factor: f64 = d / prev;
                factors.push(factor);
                streak = if factor >= 1.0 { streak + 1 } else { 0 };
                diverged |= streak >= DIVERGENCE_RUN;
            }
        }
        differences.push(d);
        iterates.push(next);
    }
    let residual = plug_back_residual(
        iterates.last().expect("seed present"),
        dt,
        cfg.rho0,
        cfg.refine,
    )?;
    Ok(PicardResult {
        iterates,
        differences,
        factors,
        diverged,
        residual,
    })
}

/// `max_j ‖(f_{j+1} - f_{j-1})/2dt - RHS(f_j)‖_∞ / max_j ‖RHS(f_j)‖_∞`; 0 when the RHS vanishes.
pub fn plug_back_residual(
    traj: &[PeriodicField],
    dt: f64,
    rho0: f64,
    refine: usize,
) -> Result<f64> {
    let (mut num, mut den) = (0.0f64, 0.0f64);
    for j in 1..traj.len().saturating_sub(1) {
        let rhs = rhs_reformulated(&traj[j], rho0, refine)?.total;
        let dfdt = traj[j + 1].sub(&traj[j - 1])?.scaled(0.5 / dt);
        num = num.max(dfdt.max_diff(&rhs)?);
        den = den.max(rhs.max_abs());
    }
    Ok(if den > 0.0 { num / den } else { num })
}
