use super::rhs::rhs_reformulated;
use crate::error::{Error, Result};
use crate::norms::{besov_seminorm, seminorm};
use crate::spectral::PeriodicField;

/// Default Hölder gap `κ` below the dissipation order 3.
pub const DEFAULT_KAPPA: f64 = 2.9;
/// Default number of extra derivatives `m` in the high-order weight.
pub const DEFAULT_M: u32 = 3;
/// Allowed growth of the diagnostic under grid refinement.
pub const REFINEMENT_TOLERANCE: f64 = 0.3;

/// `Ċ^a` for `a ≥ 0`, `Ḃ^a_{∞,∞}` for negative `a`.
pub fn regularity_norm(f: &PeriodicField, a: f64) -> Result<f64> {
    if a < 0.0 {
        Ok(besov_seminorm(f, a)?.value)
    } else {
        seminorm(f, a)
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct NonlinearReport {
    /// `κ - 2` and `m + κ - 2`.
    pub orders: [f64; 2],
    /// Time weights `κ/3` and `(m + κ)/3`.
    pub weights: [f64; 2],
    /// `(t, t^{w₀}‖𝖭‖_{order₀}, t^{w₁}‖𝖭‖_{order₁})` per snapshot.
    pub rows: Vec<(f64, f64, f64)>,
    pub sup: [f64; 2],
    pub argmax_t: [f64; 2],
    /// Sum of the two suprema.
    pub value: f64,
}

impl NonlinearReport {
    pub fn is_finite(&self) -> bool {
        self.value.is_finite()
    }

    /// Finite on both grids and not growing by more than 30% on the finer one.
    pub fn refinement_stable(&self, fine: &NonlinearReport) -> bool {
        self.is_finite()
            && fine.is_finite()
            && fine.value <= (1.0 + REFINEMENT_TOLERANCE) * self.value.max(f64::MIN_POSITIVE)
    }
}

/// Weighted norms `sup_t t^{(j+κ)/3} ‖𝖭[f](t)‖_{Ċ^{j+κ-2}}` for `j ∈ {0, m}` over snapshots.
pub fn nonlinear_estimate_diagnostic(
    snapshots: &[(f64, PeriodicField)],
    rho0: f64,
    kappa: f64,
    m: u32,
    refine: usize,
) -> Result<NonlinearReport> {
    if snapshots.is_empty() {
        return Err(Error::arg("snapshots", "empty trace"));
    }
    let orders = [kappa - 2.0, m as f64 + kappa - 2.0];
    let weights = [kappa / 3.0, (m as f64 + kappa) / 3.0];
    let mut rows = Vec::with_capacity(snapshots.len());
    let mut sup = [0.0f64; 2];
    let mut argmax_t = [snapshots[0].0; 2];
    for (t, f) in snapshots {
        let nl = rhs_reformulated(f, rho0, refine)?.nonlinearity()?;
        let mut vals = [0.0; 2];
        for k in 0..2 {
            vals[k] = t.max(0.0).powf(weights[k]) * regularity_norm(&nl, orders[k])?;
            if vals[k] > sup[k] {
                sup[k] = vals[k];
                argmax_t[k] = *t;
            }
        }
        rows.push((*t, vals[0], vals[1]));
    }
    Ok(NonlinearReport {
        orders,
        weights,
        rows,
        sup,
        argmax_t,
        value: sup[0] + sup[1],
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::PeriodicGrid;

    #[test]
    fn zero_trace_gives_zero() {
        let g = PeriodicGrid::standard(32).unwrap();
        let snaps: Vec<(f64, PeriodicField)> = (0..4)
            .map(|k| (0.1 * k as f64, PeriodicField::zeros(&g, 1)))
            .collect();
        let r = nonlinear_estimate_diagnostic(&snaps, 0.0, DEFAULT_KAPPA, DEFAULT_M, 1).unwrap();
        assert_eq!(r.value, 0.0);
    }

    #[test]
    fn stationary_profile_grows_like_weight() {
        let g = PeriodicGrid::standard(64).unwrap();
        let f = PeriodicField::from_fn(&g, |x| 0.1 * x.sin());
        let ts = [0.5, 1.0, 2.0];
        let snaps: Vec<(f64, PeriodicField)> = ts.iter().map(|&t| (t, f.clone())).collect();
        let r = nonlinear_estimate_diagnostic(&snaps, 0.0, DEFAULT_KAPPA, DEFAULT_M, 2).unwrap();
        let c = r.rows[1].1;
        for (t, v, _) in &r.rows {
            assert!((v - c * t.powf(DEFAULT_KAPPA / 3.0)).abs() <= 1e-10 * c);
        }
        assert_eq!(r.argmax_t, [2.0, 2.0]);
    }
}
