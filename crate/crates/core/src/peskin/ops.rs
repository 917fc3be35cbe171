use std::f64::consts::PI;

use nalgebra::{Matrix2, SymmetricEigen, Vector2};

use super::tension::{TensionBounds, TensionLaw};
use crate::error::{Error, Result};
use crate::norms::arc_chord;
use crate::spectral::ops::{derivative, fractional_laplacian, hilbert_transform};
use crate::spectral::pv::{navot_defect, pv_quadrature, OffsetLattice, PvKernel, ShiftTable};
use crate::spectral::PeriodicField;

/// Vectors shorter than this are rejected by the pointwise operators.
pub const DEGENERATE_VECTOR: f64 = 1e-14;
/// Stretch `|X′|` below this aborts: the curve is losing its parametrization.
pub const MIN_STRETCH: f64 = 1e-6;
/// `c` in `Λ^{1/2} g = c ∫ (g(x) - g(x - α)) |α|^{-3/2} dα`.
pub const HALF_LAPLACIAN_CONSTANT: f64 = 0.199_471_140_200_716_35;

/// Offset refinement used when callers do not choose one.
pub const DEFAULT_REFINE: usize = 2;

/// Membrane state on the torus: `X` has two channels.
#[derive(Clone, Debug)]
pub struct PeskinState {
    pub t: f64,
    pub x: PeriodicField,
    pub tension: TensionLaw,
}

/// `G(Z) = (1/4π)(-log|Z| Id + Z⊗Z/|Z|²)`.
pub fn stokeslet(z: Vector2<f64>) -> Result<Matrix2<f64>> {
    let r2 = z.norm_squared();
    if r2.sqrt() < DEGENERATE_VECTOR {
        return Err(Error::arg("Z", "stokeslet needs |Z| > 1e-14"));
    }
    Ok((Matrix2::identity() * (-0.5 * r2.ln()) + z * z.transpose() / r2) / (4.0 * PI))
}

/// `𝖠(b) = ¼𝐓(|b|) Id + ¼𝐓′(|b|) b⊗b/|b|`.
pub fn coeff_matrix_a(b: Vector2<f64>, law: &TensionLaw) -> Result<Matrix2<f64>> {
    let r = b.norm();
    if r < DEGENERATE_VECTOR {
        return Err(Error::arg("b", "coefficient matrix needs |b| > 1e-14"));
    }
    Ok(Matrix2::identity() * (0.25 * law.big_t(r))
        + b * b.transpose() * (0.25 * law.big_t_prime(r) / r))
}

/// Eigenvalues of `𝖠(b)` in ascending order: `¼𝒯(|b|)/|b|` (normal) and `¼𝒯′(|b|)` (tangential).
pub fn coeff_eigenvalues(b: Vector2<f64>, law: &TensionLaw) -> Result<[f64; 2]> {
    let eig = SymmetricEigen::new(coeff_matrix_a(b, law)?).eigenvalues;
    Ok([eig.min(), eig.max()])
}

fn vec_at(f: &PeriodicField, c: usize, j: usize) -> Vector2<f64> {
    Vector2::new(f.get(c, j), f.get(c + 1, j))
}

/// `|X′|` range after checking the curve is admissible.
fn check_curve(x: &PeriodicField, law: &TensionLaw) -> Result<(PeriodicField, TensionBounds)> {
    if x.channels() != 2 {
        return Err(Error::arg("X", "expected a two-channel curve"));
    }
    x.check_finite("X")?;
    let xp = derivative(x, 1)?;
    let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
    for j in 0..x.n() {
        let s = xp.pointwise_norm(j);
        lo = lo.min(s);
        hi = hi.max(s);
    }
    if lo < MIN_STRETCH {
        return Err(Error::arg(
            "X",
            format!("stretch |X′| = {lo:.3e} below {MIN_STRETCH:e}"),
        ));
    }
    let bounds = law.validate_bracketing(lo, hi)?;
    Ok((xp, bounds))
}

/// `𝐓(|X′|) X′`.
pub fn tension_flux(xp: &PeriodicField, law: &TensionLaw) -> Result<PeriodicField> {
    let t = PeriodicField::from_values(
        xp.grid(),
        1,
        (0..xp.n())
            .map(|j| law.big_t(xp.pointwise_norm(j)))
            .collect(),
    )?;
    xp.times_scalar_field(&t)
}

/// Boundary-integral velocity `-∫ ∂_α G(δ_α X) δ_α(𝐓X′) dα`.
///
/// After the by-parts step the integrand extends smoothly through `α = 0`, so the
/// paired lattice sum is a plain trapezoid rule.
pub fn rhs_contour(x: &PeriodicField, law: &TensionLaw, refine: usize) -> Result<PeriodicField> {
    let (xp, _) = check_curve(x, law)?;
    arc_chord(x)?;
    let v = tension_flux(&xp, law)?;
    let fields = PeriodicField::stack(&[x, &xp, &v])?;
    let lattice = OffsetLattice::new(x.grid(), refine)?;
    let table = ShiftTable::new(&fields, &lattice)?;
    pv_quadrature(&lattice, PvKernel::Unit, |s| {
        let shifted = |c: usize| Vector2::new(table.at(c, s), table.at(c + 1, s));
        let z = vec_at(&fields, 0, s.node) - shifted(0);
        let zp = shifted(2);
        let dv = vec_at(&fields, 4, s.node) - shifted(4);
        let r2 = z.norm_squared();
        let zzp = z.dot(&zp);
        let dg = (-zzp / r2 * dv + (zp * z.dot(&dv) + z * zp.dot(&dv)) / r2
            - z * (2.0 * zzp * z.dot(&dv) / (r2 * r2)))
            / (4.0 * PI);
        [-dg[0], -dg[1]]
    })
}

/// `𝒩(X)`: the three-term remainder once `-¼ℋ(𝐓X′)` is split off the velocity.
///
/// With `k(α)` the periodized `1/α` and `E = X′(x - α) - k δ_αX`, the kernel
/// factors of `k` cancel against the normalized differences, leaving a smooth
/// integrand summed by the trapezoid rule.
pub fn nonlinearity_script_n(
    x: &PeriodicField,
    law: &TensionLaw,
    refine: usize,
) -> Result<PeriodicField> {
    let (xp, _) = check_curve(x, law)?;
    let v = tension_flux(&xp, law)?;
    let fields = PeriodicField::stack(&[x, &xp, &v])?;
    let lattice = OffsetLattice::new(x.grid(), refine)?;
    let table = ShiftTable::new(&fields, &lattice)?;
    let period = x.grid().period();
    pv_quadrature(&lattice, PvKernel::Unit, |s| {
        let shifted = |c: usize| Vector2::new(table.at(c, s), table.at(c + 1, s));
        let d = vec_at(&fields, 0, s.node) - shifted(0);
        let r2 = d.norm_squared();
        if r2.sqrt() < DEGENERATE_VECTOR {
            return [f64::NAN; 2];
        }
        let k = PvKernel::HalfCot.weight(s.alpha, period);
        let e = shifted(2) - d * k;
        let dv = vec_at(&fields, 4, s.node) - shifted(4);
        let de = d.dot(&e);
        let out = (dv * de - (e * d.dot(&dv) + d * e.dot(&dv))) / (4.0 * PI * r2)
            + d * (d.dot(&dv) * de / (2.0 * PI * r2 * r2));
        [out[0], out[1]]
    })
}

/// `-¼ℋ(𝐓X′) + 𝒩(X)`, the Hilbert-split form of the velocity.
pub fn rhs_split(x: &PeriodicField, law: &TensionLaw, refine: usize) -> Result<PeriodicField> {
    let (xp, _) = check_curve(x, law)?;
    let lin = hilbert_transform(&tension_flux(&xp, law)?)?.scaled(-0.25);
    lin.add(&nonlinearity_script_n(x, law, refine)?)
}

/// `𝖠(X′) Λ^{1/2} X′` pointwise.
pub fn principal_term(x: &PeriodicField, law: &TensionLaw) -> Result<PeriodicField> {
    let (xp, _) = check_curve(x, law)?;
    let lx = fractional_laplacian(&xp, 0.5)?;
    let mut out = PeriodicField::zeros(x.grid(), 2);
    for j in 0..x.n() {
        let y = coeff_matrix_a(vec_at(&xp, 0, j), law)? * vec_at(&lx, 0, j);
        out.channel_mut(0)[j] = y[0];
        out.channel_mut(1)[j] = y[1];
    }
    Ok(out)
}

/// Commutator remainder `𝖬` in `¼Λ^{1/2}(𝐓X′) = 𝖠(X′)Λ^{1/2}X′ + 𝖬`:
///
/// `𝖬 = ¼c[-∫ δT δX′ |α|^{-3/2} + X′ ∫ (δT - ∇𝐓·δX′) |α|^{-3/2}]`,
/// with `T = 𝐓(|X′|)`, `∇𝐓 = 𝐓′(|X′|) X′/|X′|` frozen at `x` and `c` the
/// `Λ^{1/2}` constant. Integrals over the line are periodized exactly; the
/// `|α|^{1/2}` cusp of the integrand is removed by the leading Navot term.
pub fn remainder_m(x: &PeriodicField, law: &TensionLaw, refine: usize) -> Result<PeriodicField> {
    let (xp, _) = check_curve(x, law)?;
    let grid = x.grid();
    let n = x.n();
    let stretch: Vec<f64> = (0..n).map(|j| xp.pointwise_norm(j)).collect();
    let t = PeriodicField::from_values(grid, 1, stretch.iter().map(|&r| law.big_t(r)).collect())?;
    let grad: Vec<Vector2<f64>> = (0..n)
        .map(|j| vec_at(&xp, 0, j) * (law.big_t_prime(stretch[j]) / stretch[j]))
        .collect();
    let fields = PeriodicField::stack(&[&t, &xp])?;
    let lattice = OffsetLattice::new(grid, refine)?;
    let table = ShiftTable::new(&fields, &lattice)?;
    let raw = pv_quadrature(&lattice, PvKernel::AbsPow(1.5), |s| {
        let dt = fields.get(0, s.node) - table.at(0, s);
        let dxp = vec_at(&fields, 1, s.node) - Vector2::new(table.at(1, s), table.at(2, s));
        [dt * dxp[0], dt * dxp[1], dt - grad[s.node].dot(&dxp)]
    })?;
    // paired integrands ≈ p₂ α²: 2 T_x X″ and -(T_xx - ∇𝐓·X‴)
    let tx = derivative(&t, 1)?;
    let txx = derivative(&t, 2)?;
    let x2 = derivative(x, 2)?;
    let x3 = derivative(x, 3)?;
    let h = lattice.step();
    let c = 0.25 * HALF_LAPLACIAN_CONSTANT;
    let mut out = PeriodicField::zeros(grid, 2);
    for j in 0..n {
        let p_first = vec_at(&x2, 0, j) * (2.0 * tx.get(0, j));
        let p_second = -(txx.get(0, j) - grad[j].dot(&vec_at(&x3, 0, j)));
        let first = Vector2::new(
            raw.get(0, j) - navot_defect(p_first[0], h),
            raw.get(1, j) - navot_defect(p_first[1], h),
        );
        let second = raw.get(2, j) - navot_defect(p_second, h);
        let m = (vec_at(&xp, 0, j) * second - first) * c;
        out.channel_mut(0)[j] = m[0];
        out.channel_mut(1)[j] = m[1];
    }
    Ok(out)
}

/// `‖¼Λ^{1/2}(𝐓X′) - 𝖠Λ^{1/2}X′ - 𝖬‖_∞` relative to `‖¼Λ^{1/2}(𝐓X′)‖_∞`.
pub fn decomposition_check(x: &PeriodicField, law: &TensionLaw, refine: usize) -> Result<f64> {
    let (xp, _) = check_curve(x, law)?;
    let lhs = fractional_laplacian(&tension_flux(&xp, law)?, 0.5)?.scaled(0.25);
    let rhs = principal_term(x, law)?.add(&remainder_m(x, law, refine)?)?;
    Ok(lhs.max_diff(&rhs)? / lhs.sup_norm().max(f64::MIN_POSITIVE))
}

/// Relative gap between the boundary-integral velocity and `-¼ℋ(𝐓X′) + 𝒩`.
pub fn two_path_check(x: &PeriodicField, law: &TensionLaw, refine: usize) -> Result<f64> {
    let a = rhs_contour(x, law, refine)?;
    let b = rhs_split(x, law, refine)?;
    Ok(a.max_diff(&b)? / a.sup_norm().max(f64::MIN_POSITIVE))
}

/// Relative gap in `Λ^{1/2}ℋ(velocity) = 𝖠Λ^{1/2}X′ + 𝖬 + Λ^{1/2}ℋ𝒩`.
pub fn half_order_check(x: &PeriodicField, law: &TensionLaw, refine: usize) -> Result<f64> {
    let lh = |f: &PeriodicField| -> Result<PeriodicField> {
        fractional_laplacian(&hilbert_transform(f)?, 0.5)
    };
    let lhs = lh(&rhs_contour(x, law, refine)?)?;
    let rhs = principal_term(x, law)?
        .add(&remainder_m(x, law, refine)?)?
        .add(&lh(&nonlinearity_script_n(x, law, refine)?)?)?;
    Ok(lhs.max_diff(&rhs)? / lhs.sup_norm().max(f64::MIN_POSITIVE))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::PeriodicGrid;
    use nalgebra::Rotation2;

    fn curve(n: usize, f: impl Fn(f64) -> [f64; 2]) -> PeriodicField {
        PeriodicField::from_fn2(&PeriodicGrid::standard(n).unwrap(), f)
    }

    fn asymmetric(n: usize) -> PeriodicField {
        curve(n, |x| {
            [
                x.cos() + 0.1 * (2.0 * x).cos() + 0.05 * (3.0 * x).sin(),
                1.2 * x.sin() + 0.08 * (2.0 * x).sin(),
            ]
        })
    }

    #[test]
    fn half_laplacian_constant() {
        assert!((HALF_LAPLACIAN_CONSTANT - 1.0 / (2.0 * (2.0 * PI).sqrt())).abs() < 1e-16);
    }

    #[test]
    fn stokeslet_basics() {
        let g = stokeslet(Vector2::new(1.0, 0.0)).unwrap();
        let expected = Matrix2::new(1.0, 0.0, 0.0, 0.0) / (4.0 * PI);
        assert!((g - expected).norm() < 1e-15);
        let z = Vector2::new(0.3, -1.7);
        assert!((stokeslet(z).unwrap() - stokeslet(-z).unwrap()).norm() < 1e-15);
        let r = Rotation2::new(0.83);
        let lhs = stokeslet(r * z).unwrap();
        let rhs = r.matrix() * stokeslet(z).unwrap() * r.matrix().transpose();
        assert!((lhs - rhs).norm() < 1e-14);
        assert!(stokeslet(Vector2::new(1e-15, 0.0)).is_err());
    }

    #[test]
    fn coefficient_matrix() {
        let b = Vector2::new(0.6, 1.1);
        let a = coeff_matrix_a(b, &TensionLaw::hookean()).unwrap();
        assert!((a - Matrix2::identity() * 0.25).norm() < 1e-15);
        let law = TensionLaw::power(1.7);
        let r = b.norm();
        let eig = coeff_eigenvalues(b, &law).unwrap();
        let mut expected = [0.25 * law.value(r) / r, 0.25 * law.derivative(1, r)];
        expected.sort_by(f64::total_cmp);
        assert!((eig[0] - expected[0]).abs() < 1e-14 && (eig[1] - expected[1]).abs() < 1e-14);
        let rot = Rotation2::new(-1.2);
        let lhs = coeff_matrix_a(rot * b, &law).unwrap();
        let rhs = rot.matrix() * coeff_matrix_a(b, &law).unwrap() * rot.matrix().transpose();
        assert!((lhs - rhs).norm() < 1e-14);
    }

    #[test]
    fn circles_are_stationary() {
        for law in [
            TensionLaw::hookean(),
            TensionLaw::power(1.5),
            TensionLaw::exponential(0.5),
        ] {
            let x = curve(64, |s| [0.3 + 2.0 * s.cos(), -1.0 + 2.0 * s.sin()]);
            let v = rhs_contour(&x, &law, 1).unwrap();
            assert!(v.sup_norm() < 1e-10, "{law:?}: {}", v.sup_norm());
        }
    }

    #[test]
    fn two_paths_agree() {
        let x = asymmetric(128);
        let law = TensionLaw::power(1.5);
        assert!(two_path_check(&x, &law, 2).unwrap() < 1e-8);
    }

    #[test]
    fn hookean_remainder_vanishes() {
        let x = asymmetric(64);
        let m = remainder_m(&x, &TensionLaw::hookean(), 1).unwrap();
        assert!(m.sup_norm() < 1e-14);
        assert!(decomposition_check(&x, &TensionLaw::hookean(), 1).unwrap() < 1e-12);
    }

    #[test]
    fn decomposition_holds_for_power_law() {
        let x = curve(128, |s| [s.cos(), 1.2 * s.sin()]);
        let law = TensionLaw::power(1.5);
        let coarse = decomposition_check(&x, &law, 1).unwrap();
        let fine = decomposition_check(&x, &law, 4).unwrap();
        assert!(coarse < 1e-3, "{coarse:e}");
        assert!(fine <= coarse.max(1e-9), "{fine:e} vs {coarse:e}");
    }

    #[test]
    fn half_order_identity() {
        let x = asymmetric(128);
        let law = TensionLaw::exponential(0.5);
        let gap = half_order_check(&x, &law, 2).unwrap();
        assert!(gap < 1e-3, "{gap:e}");
    }

    #[test]
    fn circle_nonlinearity_balances_hilbert_term() {
        let x = curve(64, |s| [s.cos(), s.sin()]);
        let law = TensionLaw::power(2.0);
        let n = nonlinearity_script_n(&x, &law, 2).unwrap();
        let xp = derivative(&x, 1).unwrap();
        let h = hilbert_transform(&tension_flux(&xp, &law).unwrap())
            .unwrap()
            .scaled(0.25);
        assert!(n.max_diff(&h).unwrap() < 1e-10);
    }

    #[test]
    fn rotation_equivariance() {
        let x = asymmetric(64);
        let law = TensionLaw::power(1.5);
        let rot = Rotation2::new(0.4);
        let rx = PeriodicField::from_fn2(x.grid(), |_| [0.0, 0.0]);
        let mut rx = rx;
        for j in 0..x.n() {
            let p = rot * vec_at(&x, 0, j);
            rx.channel_mut(0)[j] = p[0];
            rx.channel_mut(1)[j] = p[1];
        }
        let a = nonlinearity_script_n(&rx, &law, 1).unwrap();
        let b = nonlinearity_script_n(&x, &law, 1).unwrap();
        for j in 0..x.n() {
            let gap = vec_at(&a, 0, j) - rot * vec_at(&b, 0, j);
            assert!(gap.norm() < 1e-12);
        }
    }
}
