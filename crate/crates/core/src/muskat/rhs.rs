use std::f64::consts::PI;

use crate::error::Result;
use crate::spectral::ops::{derivative, fractional_laplacian};
use crate::spectral::pv::{pv_quadrature, OffsetLattice, PvKernel, ShiftTable};
use crate::spectral::PeriodicField;

/// Offset refinement used when callers do not choose one.
pub const DEFAULT_REFINE: usize = 2;

/// Interface height with its time stamp and the gravity coefficient `ϱ₀`.
#[derive(Clone, Debug)]
pub struct MuskatState {
    pub t: f64,
    pub f: PeriodicField,
    pub rho0: f64,
}

/// Right-hand side split as `total = dissipation + n1 + n2 + rho0 · n3`.
#[derive(Clone, Debug)]
pub struct MuskatRhs {
    pub total: PeriodicField,
    /// `-Λ³f / ⟨f′⟩³`.
    pub dissipation: PeriodicField,
    pub n1: PeriodicField,
    pub n2: PeriodicField,
    /// Gravity nonlinearity before multiplication by `ϱ₀`.
    pub n3: PeriodicField,
    pub rho0: f64,
}

impl MuskatRhs {
    /// `𝖭[f] = n1 + n2 + ϱ₀ n3`.
    pub fn nonlinearity(&self) -> Result<PeriodicField> {
        let mut out = self.n1.add(&self.n2)?;
        out.axpy(self.rho0, &self.n3)?;
        Ok(out)
    }
}

/// `⟨a⟩⁻³ = (1 + a²)^{-3/2}`.
#[inline]
pub fn inv_bracket_cubed(a: f64) -> f64 {
    (1.0 + a * a).powf(-1.5)
}

/// `κ(f) = f″ / ⟨f′⟩³`, derivatives taken spectrally.
pub fn curvature(f: &PeriodicField) -> Result<PeriodicField> {
    let fp = derivative(f, 1)?;
    let fpp = derivative(f, 2)?;
    fpp.zip_map(&fp, |a, b| a * inv_bracket_cubed(b))
}

/// Channels `[f, f′, f″, ⟨f′⟩⁻³, ∂ₓκ(f)]` and their shifted copies.
struct Prepared {
    fields: PeriodicField,
    table: ShiftTable,
    lattice: OffsetLattice,
}

const F: usize = 0;
const FP: usize = 1;
const FPP: usize = 2;
const W: usize = 3;
const KP: usize = 4;

fn prepare(f: &PeriodicField, refine: usize) -> Result<Prepared> {
    f.check_finite("f")?;
    let fp = derivative(f, 1)?;
    let fpp = derivative(f, 2)?;
    let w = fp.map(inv_bracket_cubed);
    let kp = derivative(&fpp.times_scalar_field(&w)?, 1)?;
    let fields = PeriodicField::stack(&[f, &fp, &fpp, &w, &kp])?;
    let lattice = OffsetLattice::new(f.grid(), refine)?;
    let table = ShiftTable::new(&fields, &lattice)?;
    Ok(Prepared {
        fields,
        table,
        lattice,
    })
}

/// Nonlinearities `(𝖭₁, 𝖭₂, 𝖭₃)` with periodized kernels.
///
/// The difference quotient uses the periodized `1/α`, so that `1/π` times the
/// linear part is exactly the periodic Hilbert transform.
pub fn nonlinearity_parts(
    f: &PeriodicField,
    refine: usize,
) -> Result<(PeriodicField, PeriodicField, PeriodicField)> {
    let p = prepare(f, refine)?;
    let period = f.grid().period();
    let (fields, table) = (&p.fields, &p.table);
    let n13 = pv_quadrature(&p.lattice, PvKernel::HalfCot, |s| {
        let d =
            (fields.get(F, s.node) - table.at(F, s)) * PvKernel::HalfCot.weight(s.alpha, period);
        let b = d * (fields.get(FP, s.node) - d) / (1.0 + d * d);
        [b * table.at(KP, s) / PI, -b * table.at(FP, s) / PI]
    })?;
    let n2 = pv_quadrature(&p.lattice, PvKernel::InvFourSinSq, |s| {
        [-table.at(FPP, s) * (table.at(W, s) - fields.get(W, s.node)) / PI]
    })?;
    let n1 = n13.channel_field(0);
    let n3 = n13.channel_field(1).sub(&fractional_laplacian(f, 1.0)?)?;
    Ok((n1, n2, n3))
}

/// `-Λ³f / ⟨f′⟩³ + 𝖭₁ + 𝖭₂ + ϱ₀ 𝖭₃`, parts retained.
pub fn rhs_reformulated(f: &PeriodicField, rho0: f64, refine: usize) -> Result<MuskatRhs> {
    let (n1, n2, n3) = nonlinearity_parts(f, refine)?;
    let w = derivative(f, 1)?.map(inv_bracket_cubed);
    let dissipation = fractional_laplacian(f, 3.0)?
        .times_scalar_field(&w)?
        .scaled(-1.0);
    let mut total = dissipation.add(&n1)?;
    total.axpy(1.0, &n2)?;
    total.axpy(rho0, &n3)?;
    Ok(MuskatRhs {
        total,
        dissipation,
        n1,
        n2,
        n3,
        rho0,
    })
}

/// Contour form: `(1/π) P.V.∫ (1 + f′Δ)/⟨Δ⟩² ∂ₓ(κ(f) - ϱ₀f)(x - α) k(α) dα`,
/// with `Δ = δ_α f · k(α)` and `k` the periodized `1/α`.
pub fn rhs_original(f: &PeriodicField, rho0: f64, refine: usize) -> Result<PeriodicField> {
    let p = prepare(f, refine)?;
    let period = f.grid().period();
    let (fields, table) = (&p.fields, &p.table);
    pv_quadrature(&p.lattice, PvKernel::HalfCot, |s| {
        let d =
            (fields.get(F, s.node) - table.at(F, s)) * PvKernel::HalfCot.weight(s.alpha, period);
        let factor = (1.0 + fields.get(FP, s.node) * d) / (1.0 + d * d);
        [factor * (table.at(KP, s) - rho0 * table.at(FP, s)) / PI]
    })
}

/// `𝖦[g₁, g₂] = (⟨g₂′⟩⁻³ - ⟨g₁′⟩⁻³) Λ³g₁`.
pub fn coefficient_forcing(g1: &PeriodicField, g2: &PeriodicField) -> Result<PeriodicField> {
    g1.compatible(g2)?;
    let w1 = derivative(g1, 1)?.map(inv_bracket_cubed);
    let w2 = derivative(g2, 1)?.map(inv_bracket_cubed);
    let gap = w2.sub(&w1)?;
    fractional_laplacian(g1, 3.0)?.times_scalar_field(&gap)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::PeriodicGrid;

    fn grid(n: usize) -> PeriodicGrid {
        PeriodicGrid::standard(n).unwrap()
    }

    fn rel(a: &PeriodicField, b: &PeriodicField) -> f64 {
        a.max_diff(b).unwrap() / b.max_abs().max(1e-300)
    }

    #[test]
    fn constant_interface_is_stationary() {
        let f = PeriodicField::constant(&grid(32), 0.7);
        assert!(curvature(&f).unwrap().max_abs() < 1e-14);
        let r = rhs_reformulated(&f, 1.0, 2).unwrap();
        for part in [&r.total, &r.n1, &r.n2, &r.n3] {
            assert!(part.max_abs() < 1e-13);
        }
        assert!(rhs_original(&f, 1.0, 2).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn curvature_matches_pointwise_formula() {
        let eps = 0.3;
        let g = grid(64);
        let f = PeriodicField::from_fn(&g, |x| eps * x.sin());
        let k = curvature(&f).unwrap();
        let exact = PeriodicField::from_fn(&g, |x| {
            -eps * x.sin() / (1.0 + (eps * x.cos()).powi(2)).powf(1.5)
        });
        assert!(k.max_diff(&exact).unwrap() < 1e-13);
        assert!(k.get(0, 0).abs() < 1e-13);
        assert!((k.get(0, 16) + eps).abs() < 1e-13);
    }

    #[test]
    fn small_amplitude_curvature_is_linear() {
        let lambda = 1e-4;
        let g = grid(64);
        let f = PeriodicField::from_fn(&g, |x| lambda * (x.cos() + 0.5 * (2.0 * x).sin()));
        let k = curvature(&f).unwrap();
        let lin = derivative(&f, 2).unwrap();
        // cubic remainder: |κ - f″| ≤ (3/2) |f′|² |f″|
        assert!(k.max_diff(&lin).unwrap() < 3.0 * lambda.powi(3) * 8.0);
    }

    #[test]
    fn reformulation_identity_single_mode() {
        let f = PeriodicField::from_fn(&grid(64), |x| 0.1 * x.sin());
        let a = rhs_original(&f, 0.0, 2).unwrap();
        let b = rhs_reformulated(&f, 0.0, 2).unwrap();
        assert!(rel(&a, &b.total) < 1e-4, "{}", rel(&a, &b.total));
    }

    #[test]
    fn reformulation_identity_with_gravity() {
        let f = PeriodicField::from_fn(&grid(64), |x| 0.1 * x.sin() + 0.05 * (2.0 * x).sin());
        let a = rhs_original(&f, 1.0, 2).unwrap();
        let b = rhs_reformulated(&f, 1.0, 2).unwrap();
        assert!(rel(&a, &b.total) < 1e-4, "{}", rel(&a, &b.total));
    }

    #[test]
    fn parts_converge_under_offset_refinement() {
        let f = PeriodicField::from_fn(&grid(64), |x| 0.1 * x.sin());
        let (a1, a2, a3) = nonlinearity_parts(&f, 1).unwrap();
        let (b1, b2, b3) = nonlinearity_parts(&f, 4).unwrap();
        for (a, b) in [(&a1, &b1), (&a2, &b2), (&a3, &b3)] {
            assert!(a.max_diff(b).unwrap() <= 1e-4 * b.max_abs().max(1e-12));
        }
    }

    #[test]
    fn gravity_part_matches_generic_quadrature() {
        // 𝖭₃ rebuilt from the primitive: −(1/π)∫ B f′(x − α) k(α) dα − Λf
        let g = grid(64);
        let f = PeriodicField::from_fn(&g, |x| 0.1 * x.sin());
        let fp = derivative(&f, 1).unwrap();
        let lat = OffsetLattice::new(&g, 3).unwrap();
        let both = PeriodicField::stack(&[&f, &fp]).unwrap();
        let tab = ShiftTable::new(&both, &lat).unwrap();
        let integral = pv_quadrature(&lat, PvKernel::HalfCot, |s| {
            let d = (both.get(0, s.node) - tab.at(0, s)) * 0.5 / (0.5 * s.alpha).tan();
            let b = d * (both.get(1, s.node) - d) / (1.0 + d * d);
            [-b * tab.at(1, s) / PI]
        })
        .unwrap();
        let n3 = integral
            .sub(&fractional_laplacian(&f, 1.0).unwrap())
            .unwrap();
        let (_, _, ours) = nonlinearity_parts(&f, 2).unwrap();
        assert!(rel(&ours, &n3) < 1e-4);
    }

    #[test]
    fn dissipation_of_small_cosine() {
        let eps = 1e-3;
        let g = grid(32);
        let f = PeriodicField::from_fn(&g, |x| eps * x.cos());
        let r = rhs_reformulated(&f, 0.0, 1).unwrap();
        let lin = PeriodicField::from_fn(&g, |x| -eps * x.cos());
        assert!(r.dissipation.max_diff(&lin).unwrap() < 2.0 * eps.powi(3));
    }

    #[test]
    fn bookkeeping_identity() {
        let g = grid(64);
        let f = PeriodicField::from_fn(&g, |x| 0.2 * (x.cos() + 0.3 * (3.0 * x).sin()));
        let r = rhs_reformulated(&f, 0.7, 2).unwrap();
        let mut sum = r.dissipation.add(&r.nonlinearity().unwrap()).unwrap();
        sum.axpy(-1.0, &r.total).unwrap();
        assert!(sum.max_abs() <= 1e-12);
    }

    #[test]
    fn coefficient_forcing_collapses() {
        let g = grid(32);
        let a = PeriodicField::from_fn(&g, |x| 0.3 * x.sin());
        assert!(coefficient_forcing(&a, &a).unwrap().max_abs() == 0.0);
        let zero = PeriodicField::zeros(&g, 1);
        let got = coefficient_forcing(&a, &zero).unwrap();
        let w = derivative(&a, 1).unwrap().map(inv_bracket_cubed);
        let expected = fractional_laplacian(&a, 3.0)
            .unwrap()
            .times_scalar_field(&w.map(|v| 1.0 - v))
            .unwrap();
        assert!(got.max_diff(&expected).unwrap() < 1e-14);
    }
}
