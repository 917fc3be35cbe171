use std::sync::Arc;

use nalgebra::{Matrix2, Vector2};
use num_complex::Complex64;

use super::config::{FreezePolicy, SchemeConfig};
use crate::error::{Error, Result};
use crate::muskat::{inv_bracket_cubed, rhs_reformulated};
use crate::norms::arc_chord;
use crate::peskin::{coeff_eigenvalues, coeff_matrix_a, rhs_contour, TensionLaw};
use crate::spectral::ops::{dealias, derivative, fractional_laplacian, MultiplierOp};
use crate::spectral::PeriodicField;

/// Additive source `F(t, ·)` on the right-hand side.
pub type SourceFn = Arc<dyn Fn(f64) -> Result<PeriodicField> + Send + Sync>;

/// Relative slack when checking `c̄ ≤ min w`.
const FREEZE_SLACK: f64 = 1e-12;

/// A model the run driver can advance.
pub trait Model: Sync {
    /// Full right-hand side at time `t`.
    fn rhs(&self, t: f64, x: &PeriodicField) -> Result<PeriodicField>;
    /// One IMEX step of size `dt` from time `t`.
    fn step_imex(&self, t: f64, x: &PeriodicField, dt: f64) -> Result<PeriodicField>;
    /// Norm whose growth triggers step rejection.
    fn control_norm(&self, x: &PeriodicField) -> Result<f64>;
    /// Largest stable explicit step, if the model is stiff.
    fn explicit_limit(&self, _x: &PeriodicField, _cfl: f64) -> Option<f64> {
        None
    }
    /// Geometric admissibility of a state; violations abort the step.
    fn admissible(&self, _x: &PeriodicField) -> Result<()> {
        Ok(())
    }
}

/// `min_x ⟨f′⟩⁻³`.
pub fn min_coefficient(f: &PeriodicField) -> Result<f64> {
    let w = derivative(f, 1)?.map(inv_bracket_cubed);
    Ok(w.values().iter().copied().fold(f64::INFINITY, f64::min))
}

/// `f̂ ↦ f̂ / (1 + dt c̄ |k|³)`.
fn implicit_solve(g: &PeriodicField, dt: f64, cbar: f64) -> Result<PeriodicField> {
    MultiplierOp::from_fn(g.grid(), false, |k| {
        Complex64::new(1.0 / (1.0 + dt * cbar * k.abs().powi(3)), 0.0)
    })
    .apply(g)
}

/// One IMEX step for the Muskat equation:
/// `(Id + dt c̄Λ³) f* = f + dt [𝖭[f] + (c̄ - ⟨f′⟩⁻³)Λ³f + F]`.
pub fn step_imex_muskat(
    f: &PeriodicField,
    dt: f64,
    cbar: f64,
    rho0: f64,
    refine: usize,
    dealiased: bool,
    source: Option<&PeriodicField>,
) -> Result<PeriodicField> {
    let wmin = min_coefficient(f)?;
    if !(cbar > 0.0 && cbar <= wmin * (1.0 + FREEZE_SLACK)) {
        return Err(Error::arg(
            "cbar",
            format!("{cbar} outside (0, min w = {wmin}]"),
        ));
    }
    let r = rhs_reformulated(f, rho0, refine)?;
    let mut explicit = r.total;
    explicit.axpy(cbar, &fractional_laplacian(f, 3.0)?)?;
    if let Some(s) = source {
        explicit.axpy(1.0, s)?;
    }
    if dealiased {
        explicit = dealias(&explicit)?;
    }
    let mut g = f.clone();
    g.axpy(dt, &explicit)?;
    let out = implicit_solve(&g, dt, cbar)?;
    out.check_finite("Muskat IMEX step")?;
    Ok(out)
}

/// Muskat model `∂ₜf = -⟨f′⟩⁻³Λ³f + 𝖭[f] + F`.
#[derive(Clone)]
pub struct MuskatModel {
    pub rho0: f64,
    pub refine: usize,
    pub dealias: bool,
    pub freeze: FreezePolicy,
    /// `c̄` frozen from the initial profile under [`FreezePolicy::Profile`].
    pub profile_coefficient: Option<f64>,
    pub source: Option<SourceFn>,
}

impl MuskatModel {
    pub fn new(rho0: f64, cfg: &SchemeConfig, f0: &PeriodicField) -> Result<Self> {
        let profile_coefficient = match cfg.freeze {
            FreezePolicy::Profile => Some(min_coefficient(f0)?),
            FreezePolicy::GlobalMin => None,
        };
        Ok(Self {
            rho0,
            refine: cfg.refine,
            dealias: cfg.dealias,
            freeze: cfg.freeze,
            profile_coefficient,
            source: None,
        })
    }

    pub fn with_source(mut self, source: SourceFn) -> Self {
        self.source = Some(source);
        self
    }

    /// The profile coefficient is capped by the current minimum to stay admissible.
    pub fn frozen_coefficient(&self, f: &PeriodicField) -> Result<f64> {
        let wmin = min_coefficient(f)?;
        Ok(match self.profile_coefficient {
            Some(c) => c.min(wmin),
            None => wmin,
        })
    }

    fn source_at(&self, t: f64) -> Result<Option<PeriodicField>> {
        self.source.as_ref().map(|s| s(t)).transpose()
    }
}

impl Model for MuskatModel {
    fn rhs(&self, t: f64, f: &PeriodicField) -> Result<PeriodicField> {
        let mut r = rhs_reformulated(f, self.rho0, self.refine)?.total;
        if let Some(s) = self.source_at(t)? {
            r.axpy(1.0, &s)?;
        }
        Ok(r)
    }

    fn step_imex(&self, t: f64, f: &PeriodicField, dt: f64) -> Result<PeriodicField> {
        let cbar = self.frozen_coefficient(f)?;
        let s = self.source_at(t)?;
        step_imex_muskat(
            f,
            dt,
            cbar,
            self.rho0,
            self.refine,
            self.dealias,
            s.as_ref(),
        )
    }

    fn control_norm(&self, f: &PeriodicField) -> Result<f64> {
        Ok(derivative(f, 1)?.max_abs())
    }

    fn explicit_limit(&self, f: &PeriodicField, cfl: f64) -> Option<f64> {
        let h = f.grid().spacing();
        let wmax = derivative(f, 1)
            .ok()?
            .map(inv_bracket_cubed)
            .values()
            .iter()
            .copied()
            .fold(0.0, f64::max);
        Some(cfl * h.powi(3) / wmax.max(f64::MIN_POSITIVE))
    }
}

/// `X′` at node `j`.
fn tangent(xp: &PeriodicField, j: usize) -> Vector2<f64> {
    Vector2::new(xp.get(0, j), xp.get(1, j))
}

/// Spatial mean of `𝖠(Φ′)`.
pub fn mean_coefficient(phi: &PeriodicField, law: &TensionLaw) -> Result<Matrix2<f64>> {
    let xp = derivative(phi, 1)?;
    let mut acc = Matrix2::zeros();
    for j in 0..phi.n() {
        acc += coeff_matrix_a(tangent(&xp, j), law)?;
    }
    Ok(acc / phi.n() as f64)
}

/// `min_x λ_min(𝖠(X′))`.
pub fn min_eigen_coefficient(x: &PeriodicField, law: &TensionLaw) -> Result<f64> {
    let xp = derivative(x, 1)?;
    let mut lo = f64::INFINITY;
    for j in 0..x.n() {
        lo = lo.min(coeff_eigenvalues(tangent(&xp, j), law)?[0]);
    }
    Ok(lo)
}

/// One IMEX step for the Peskin problem with a constant frozen matrix `Ā`:
/// `(Id + dt ĀΛ) X* = X + dt [u(X) + ĀΛX]`, one 2×2 solve per mode, where
/// `u` is the boundary-integral velocity.
pub fn step_imex_peskin(
    x: &PeriodicField,
    dt: f64,
    abar: &Matrix2<f64>,
    law: &TensionLaw,
    refine: usize,
    dealiased: bool,
) -> Result<PeriodicField> {
    let lam = fractional_laplacian(x, 1.0)?;
    let mut explicit = rhs_contour(x, law, refine)?;
    let mut frozen = PeriodicField::zeros(x.grid(), 2);
    for j in 0..x.n() {
        let v = abar * tangent(&lam, j);
        frozen.channel_mut(0)[j] = v[0];
        frozen.channel_mut(1)[j] = v[1];
    }
    explicit.axpy(1.0, &frozen)?;
    if dealiased {
        explicit = dealias(&explicit)?;
    }
    let mut g = x.clone();
    g.axpy(dt, &explicit)?;
    let coeffs = g.all_coefficients();
    let grid = x.grid();
    let nyq = grid.nyquist_slot();
    let mut out = vec![vec![Complex64::new(0.0, 0.0); grid.n()]; 2];
    for j in 0..grid.n() {
        let k = grid.wavenumber(j).abs();
        let m = Matrix2::identity() + abar * (dt * k);
        let inv = m
            .try_inverse()
            .ok_or_else(|| Error::arg("abar", "implicit matrix is singular"))?;
        let (a, b) = (coeffs[0][j], coeffs[1][j]);
        out[0][j] = a * inv[(0, 0)] + b * inv[(0, 1)];
        out[1][j] = a * inv[(1, 0)] + b * inv[(1, 1)];
        if j == nyq {
            out[0][j].im = 0.0;
            out[1][j].im = 0.0;
        }
    }
    let next = PeriodicField::from_coefficients(grid, &out);
    next.check_finite("Peskin IMEX step")?;
    Ok(next)
}

/// Peskin model `∂ₜX = u(X)`.
#[derive(Clone, Debug)]
pub struct PeskinModel {
    pub law: TensionLaw,
    pub refine: usize,
    pub dealias: bool,
    /// `Ā` frozen from the initial profile under [`FreezePolicy::Profile`].
    pub profile_matrix: Option<Matrix2<f64>>,
}

impl PeskinModel {
    pub fn new(law: TensionLaw, cfg: &SchemeConfig, x0: &PeriodicField) -> Result<Self> {
        let profile_matrix = match cfg.freeze {
            FreezePolicy::Profile => Some(mean_coefficient(x0, &law)?),
            FreezePolicy::GlobalMin => None,
        };
        Ok(Self {
            law,
            refine: cfg.refine,
            dealias: cfg.dealias,
            profile_matrix,
        })
    }

    pub fn frozen_matrix(&self, x: &PeriodicField) -> Result<Matrix2<f64>> {
        match self.profile_matrix {
            Some(m) => Ok(m),
            None => Ok(Matrix2::identity() * min_eigen_coefficient(x, &self.law)?),
        }
    }
}

impl Model for PeskinModel {
    fn rhs(&self, _t: f64, x: &PeriodicField) -> Result<PeriodicField> {
        rhs_contour(x, &self.law, self.refine)
    }

    fn step_imex(&self, _t: f64, x: &PeriodicField, dt: f64) -> Result<PeriodicField> {
        let abar = self.frozen_matrix(x)?;
        step_imex_peskin(x, dt, &abar, &self.law, self.refine, self.dealias)
    }

    fn control_norm(&self, x: &PeriodicField) -> Result<f64> {
        Ok(derivative(x, 1)?.sup_norm())
    }

    fn explicit_limit(&self, x: &PeriodicField, cfl: f64) -> Option<f64> {
        let amax = derivative(x, 1).ok().and_then(|xp| {
            (0..x.n())
                .map(|j| coeff_eigenvalues(tangent(&xp, j), &self.law).map(|e| e[1]))
                .try_fold(0.0f64, |m, e| e.map(|e| m.max(e)))
                .ok()
        })?;
        Some(cfl * x.grid().spacing() / amax.max(f64::MIN_POSITIVE))
    }

    fn admissible(&self, x: &PeriodicField) -> Result<()> {
        arc_chord(x).map(|_| ())
    }
}

/// Classical four-stage Runge-Kutta step.
pub fn step_rk4(
    t: f64,
    x: &PeriodicField,
    dt: f64,
    rhs: impl Fn(f64, &PeriodicField) -> Result<PeriodicField>,
) -> Result<PeriodicField> {
    let stage = |base: &PeriodicField, k: &PeriodicField, a: f64| -> Result<PeriodicField> {
        let mut y = base.clone();
        y.axpy(a, k)?;
        Ok(y)
    };
    let k1 = rhs(t, x)?;
    let k2 = rhs(t + 0.5 * dt, &stage(x, &k1, 0.5 * dt)?)?;
    let k3 = rhs(t + 0.5 * dt, &stage(x, &k2, 0.5 * dt)?)?;
    let k4 = rhs(t + dt, &stage(x, &k3, dt)?)?;
    let mut out = x.clone();
    out.axpy(dt / 6.0, &k1)?;
    out.axpy(dt / 3.0, &k2)?;
    out.axpy(dt / 3.0, &k3)?;
    out.axpy(dt / 6.0, &k4)?;
    out.check_finite("RK4 step")?;
    Ok(out)
}
