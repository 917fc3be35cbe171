//! Principal-value quadrature on a half-offset lattice.
//!
//! Offsets are `α_j = (j + ½) h_α` with `h_α = h / r` for a refinement factor
//! `r`, so `α = 0` is never sampled and `M h_α = L / 2` with `M = n r / 2`.
//! Each positive offset is paired with its mirror `-α_j`; for kernels with a
//! simple pole the leading singular parts cancel inside the pair.
//!
//! Kernels are periodized: for the 2π-torus `dα/α` becomes `½cot(α/2)` and
//! `dα/α²` becomes `1/(4 sin²(α/2))`. With these weights every paired
//! integrand built from smooth periodic fields is smooth and periodic in `α`,
//! so the midpoint rule converges spectrally.

use std::f64::consts::PI;

use rayon::prelude::*;

use super::field::PeriodicField;
use super::grid::PeriodicGrid;
use super::ops::MultiplierOp;
use crate::error::{Error, Result};

/// `ζ(-1/2)`.
pub const ZETA_MINUS_HALF: f64 = -0.207_886_225_077_354_5;

/// `ζ(-1/2, 1/2) = (2^{-1/2} - 1) ζ(-1/2)`: midpoint-rule defect of `∫₀ √α dα` per `h^{3/2}`.
pub const NAVOT_HALF: f64 = (std::f64::consts::FRAC_1_SQRT_2 - 1.0) * ZETA_MINUS_HALF;

/// Half-offset lattice for a grid and refinement factor.
#[derive(Clone, Debug)]
pub struct OffsetLattice {
    grid: PeriodicGrid,
    refine: usize,
}

impl OffsetLattice {
    pub fn new(grid: &PeriodicGrid, refine: usize) -> Result<Self> {
        if refine == 0 {
            return Err(Error::arg("refine", "refinement factor must be at least 1"));
        }
        Ok(Self {
            grid: grid.clone(),
            refine,
        })
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn refine(&self) -> usize {
        self.refine
    }

    /// Number of positive offsets `M`.
    pub fn len(&self) -> usize {
        self.grid.n() * self.refine / 2
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn step(&self) -> f64 {
        self.grid.spacing() / self.refine as f64
    }

    /// Positive offset `α_j`.
    pub fn offset(&self, j: usize) -> f64 {
        (j as f64 + 0.5) * self.step()
    }

    pub fn offsets(&self) -> Vec<f64> {
        (0..self.len()).map(|j| self.offset(j)).collect()
    }
}

/// Spectrally shifted copies of a field, so that `f(x_i ∓ α_j)` is a table lookup.
///
/// For `j = p r + ℓ`, `f(x_i - α_j) = f(· - (ℓ+½)h_α)(x_{i-p})`.
#[derive(Clone, Debug)]
pub struct ShiftTable {
    lattice: OffsetLattice,
    channels: usize,
    behind: Vec<PeriodicField>,
    ahead: Vec<PeriodicField>,
}

impl ShiftTable {
    pub fn new(f: &PeriodicField, lattice: &OffsetLattice) -> Result<Self> {
        if !f.grid().same_as(lattice.grid()) {
            return Err(Error::GridMismatch);
        }
        let r = lattice.refine();
        let h = lattice.step();
        let mut behind = Vec::with_capacity(r);
        let mut ahead = Vec::with_capacity(r);
        for l in 0..r {
            let a = (l as f64 + 0.5) * h;
            behind.push(MultiplierOp::shift(f.grid(), a).apply(f)?);
            ahead.push(MultiplierOp::shift(f.grid(), -a).apply(f)?);
        }
        Ok(Self {
            lattice: lattice.clone(),
            channels: f.channels(),
            behind,
            ahead,
        })
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    /// `f_c(x_i - α)` for the lattice sample `s`.
    #[inline]
    pub fn at(&self, c: usize, s: &Sample) -> f64 {
        let r = self.lattice.refine();
        let n = self.lattice.grid().n();
        let p = s.index / r;
        let l = s.index % r;
        if s.alpha > 0.0 {
            self.behind[l].get(c, (s.node + n - p % n) % n)
        } else {
            self.ahead[l].get(c, (s.node + p) % n)
        }
    }

    /// Two-channel value at `x_i - α`.
    #[inline]
    pub fn at2(&self, s: &Sample) -> [f64; 2] {
        [self.at(0, s), self.at(1, s)]
    }
}

/// One quadrature sample: node `x_i` and signed offset `±α_j`.
#[derive(Clone, Copy, Debug)]
pub struct Sample {
    pub node: usize,
    pub x: f64,
    pub index: usize,
    pub alpha: f64,
}

/// Periodized weight rules.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum PvKernel {
    /// Periodization of `1/α`: `(π/L) cot(πα/L)`.
    HalfCot,
    /// Periodization of `1/α²`: `(π/L)² / sin²(πα/L)`.
    InvFourSinSq,
    /// Periodization of `|α|^{-γ}` for `γ > 1`.
    AbsPow(f64),
    /// Plain trapezoid weight.
    Unit,
}

impl PvKernel {
    pub fn weight(&self, alpha: f64, period: f64) -> f64 {
        match *self {
            PvKernel::HalfCot => {
                let t = PI * alpha / period;
                (PI / period) / t.tan()
            }
            PvKernel::InvFourSinSq => {
                let t = PI * alpha / period;
                (PI / period).powi(2) / t.sin().powi(2)
            }
            PvKernel::AbsPow(gamma) => periodized_abs_pow(alpha, gamma, period),
            PvKernel::Unit => 1.0,
        }
    }

    pub fn is_odd(&self) -> bool {
        matches!(self, PvKernel::HalfCot)
    }
}

/// `Σ_k |α + kL|^{-γ} = L^{-γ} [ζ(γ, a) + ζ(γ, 1 - a)]` with `a = |α|/L` reduced to `(0, 1)`.
pub fn periodized_abs_pow(alpha: f64, gamma: f64, period: f64) -> f64 {
    let a = (alpha / period).rem_euclid(1.0);
    period.powf(-gamma) * (hurwitz_zeta(gamma, a) + hurwitz_zeta(gamma, 1.0 - a))
}

/// Hurwitz zeta `ζ(s, a) = Σ_{k≥0} (k + a)^{-s}` for `s > 1`, `a > 0`.
///
/// Direct sum of the first terms plus an Euler-Maclaurin tail; relative error
/// near machine precision for `s` in `(1, 10]`.
pub fn hurwitz_zeta(s: f64, a: f64) -> f64 {
    assert!(s > 1.0 && a > 0.0, "hurwitz_zeta needs s > 1 and a > 0");
    const N: usize = 12;
    // B_{2j} / (2j)!
    const B: [f64; 8] = [
        1.0 / 12.0,
        -1.0 / 720.0,
        1.0 / 30_240.0,
        -1.0 / 1_209_600.0,
        1.0 / 47_900_160.0,
        -691.0 / 1_307_674_368_000.0,
        1.0 / 74_724_249_600.0,
        -3617.0 / 10_670_622_842_880_000.0,
    ];
    let mut sum: f64 = (0..N).map(|k| (k as f64 + a).powf(-s)).sum();
    let x = N as f64 + a;
    sum += x.powf(1.0 - s) / (s - 1.0) + 0.5 * x.powf(-s);
    // rising factorial s (s+1) ... (s + 2j - 2)
    let mut rising = s;
    let mut power = x.powf(-s - 1.0);
    for (j, b) in B.iter().enumerate() {
        sum += b * rising * power;
        let m = 2.0 * j as f64;
        rising *= (s + m + 1.0) * (s + m + 2.0);
        power /= x * x;
    }
    sum
}

/// Leading midpoint-rule defect for `∫ P(α) |α|^{-3/2} dα` when the paired integrand is `P ≈ p₂ α²`.
///
/// Subtract the returned value from the lattice sum.
pub fn navot_defect(p2: f64, h: f64) -> f64 {
    p2 * NAVOT_HALF * h.powf(1.5)
}

/// Paired trapezoid sum `Σ_j Σ_± w(±α_j) g(x_i, ±α_j) h_α` at every node.
///
/// Returns a `D`-channel field. Any non-finite sample aborts with its `(x, α)`.
pub fn pv_quadrature<const D: usize, F>(
    lattice: &OffsetLattice,
    kernel: PvKernel,
    integrand: F,
) -> Result<PeriodicField>
where
    F: Fn(&Sample) -> [f64; D] + Sync,
{
    let grid = lattice.grid();
    let n = grid.n();
    let period = grid.period();
    let h = lattice.step();
    let weights: Vec<f64> = lattice
        .offsets()
        .iter()
        .map(|&a| kernel.weight(a, period) * h)
        .collect();
    let mirror = if kernel.is_odd() { -1.0 } else { 1.0 };

    let rows: Vec<Result<[f64; D]>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let x = grid.node(i);
            let mut acc = [0.0; D];
            for (j, &w) in weights.iter().enumerate() {
                let a = lattice.offset(j);
                for (alpha, wt) in [(a, w), (-a, mirror * w)] {
                    let s = Sample {
                        node: i,
                        x,
                        index: j,
                        alpha,
                    };
                    let g = integrand(&s);
                    for d in 0..D {
                        if !g[d].is_finite() {
                            return Err(Error::NonFiniteIntegrand { x, alpha });
                        }
                        acc[d] += wt * g[d];
                    }
                }
            }
            Ok(acc)
        })
        .collect();

    let mut values = vec![0.0; D * n];
    for (i, row) in rows.into_iter().enumerate() {
        let row = row?;
        for d in 0..D {
            values[d * n + i] = row[d];
        }
    }
    PeriodicField::from_values(grid, D, values)
}

/// `ℋf` by quadrature: `(1/π) Σ f(x - α) ½cot(α/2) h_α` on the 2π-torus.
pub fn hilbert_by_quadrature(f: &PeriodicField, refine: usize) -> Result<PeriodicField> {
    let lattice = OffsetLattice::new(f.grid(), refine)?;
    let table = ShiftTable::new(f, &lattice)?;
    let scale = 2.0 / f.grid().period();
    Ok(pv_quadrature::<1, _>(&lattice, PvKernel::HalfCot, |s| [table.at(0, s)])?.scaled(scale))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::ops::{fractional_laplacian, hilbert_transform};

    fn grid(n: usize) -> PeriodicGrid {
        PeriodicGrid::standard(n).unwrap()
    }

    #[test]
    fn hurwitz_reference_values() {
        assert!((hurwitz_zeta(2.0, 1.0) - PI * PI / 6.0).abs() < 1e-14);
        assert!((hurwitz_zeta(2.0, 0.5) - PI * PI / 2.0).abs() < 1e-13);
        assert!((hurwitz_zeta(1.5, 1.0) - 2.612_375_348_685_488).abs() < 1e-13);
        assert!((hurwitz_zeta(4.0, 1.0) - PI.powi(4) / 90.0).abs() < 1e-14);
    }

    #[test]
    fn periodized_pow_matches_direct_image_sum() {
        let l = 2.0 * PI;
        for &a in &[0.01, 0.7, 2.0, 3.1] {
            let k_max = 20_000i64;
            // images beyond ±k_max contribute about 2 (L k)^{-1.5} / 1.5 / L
            let tail = 2.0 * l.powf(-2.5) * (k_max as f64).powf(-1.5) / 1.5;
            let direct: f64 = (-k_max..=k_max)
                .map(|k| (a + k as f64 * l).abs().powf(-2.5))
                .sum::<f64>()
                + tail;
            let z = periodized_abs_pow(a, 2.5, l);
            assert!((z - direct).abs() < 1e-9 * z, "a = {a}: {z} vs {direct}");
        }
    }

    #[test]
    fn weights_are_periodized_kernels() {
        let l = 2.0 * PI;
        let a = 0.4;
        assert!((PvKernel::HalfCot.weight(a, l) - 0.5 / (a / 2.0).tan()).abs() < 1e-14);
        assert!(
            (PvKernel::InvFourSinSq.weight(a, l) - 0.25 / (a / 2.0).sin().powi(2)).abs() < 1e-13
        );
    }

    #[test]
    fn lattice_covers_half_period() {
        let g = grid(32);
        let lat = OffsetLattice::new(&g, 3).unwrap();
        assert_eq!(lat.len(), 48);
        assert!((lat.len() as f64 * lat.step() - PI).abs() < 1e-14);
        assert!(lat.offset(0) > 0.0);
    }

    #[test]
    fn shift_table_lookup_matches_direct_evaluation() {
        let g = grid(32);
        let f = PeriodicField::from_fn(&g, |x| (x.sin() + 0.5 * (3.0 * x).cos()).exp());
        let lat = OffsetLattice::new(&g, 3).unwrap();
        let table = ShiftTable::new(&f, &lat).unwrap();
        for &(i, j) in &[(0usize, 0usize), (5, 7), (31, 47), (17, 20)] {
            for sign in [1.0, -1.0] {
                let alpha = sign * lat.offset(j);
                let s = Sample {
                    node: i,
                    x: g.node(i),
                    index: j,
                    alpha,
                };
                let exact = f.interpolate(0, g.node(i) - alpha);
                assert!((table.at(0, &s) - exact).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn quadrature_hilbert_matches_multiplier() {
        let g = grid(256);
        let f = PeriodicField::from_fn(&g, |x| x.sin());
        let q = hilbert_by_quadrature(&f, 1).unwrap();
        let m = hilbert_transform(&f).unwrap();
        assert!(q.max_diff(&m).unwrap() < 1e-6);
    }

    #[test]
    fn odd_integrand_cancels() {
        let g = grid(64);
        let lat = OffsetLattice::new(&g, 2).unwrap();
        let q =
            pv_quadrature::<1, _>(&lat, PvKernel::Unit, |s| [s.alpha.sin() * (1.0 + s.x)]).unwrap();
        assert!(q.max_abs() < 1e-12);
        let q = pv_quadrature::<1, _>(&lat, PvKernel::HalfCot, |_| [1.0]).unwrap();
        assert!(q.max_abs() < 1e-12);
    }

    #[test]
    fn non_finite_sample_reports_location() {
        let g = grid(16);
        let lat = OffsetLattice::new(&g, 1).unwrap();
        let err = pv_quadrature::<1, _>(&lat, PvKernel::Unit, |s| {
            [if s.node == 3 && s.index == 2 {
                f64::NAN
            } else {
                0.0
            }]
        })
        .unwrap_err();
        match err {
            Error::NonFiniteIntegrand { x, alpha } => {
                assert!((x - g.node(3)).abs() < 1e-15);
                assert!((alpha.abs() - lat.offset(2)).abs() < 1e-15);
            }
            other => panic!("unexpected error {other:?}"),
        }
    }

    #[test]
    fn navot_corrected_half_laplacian() {
        // Λ^{1/2} g = c ∫ (g(x) - g(x - α)) |α|^{-3/2} dα, c = 1/(2√(2π)).
        let g = grid(64);
        let c = 1.0 / (2.0 * (2.0 * PI).sqrt());
        let f = PeriodicField::from_fn(&g, |x| x.cos() + 0.2 * (2.0 * x).sin());
        let exact = fractional_laplacian(&f, 0.5).unwrap();
        let lat = OffsetLattice::new(&g, 1).unwrap();
        let table = ShiftTable::new(&f, &lat).unwrap();
        let raw = pv_quadrature::<1, _>(&lat, PvKernel::AbsPow(1.5), |s| {
            [f.get(0, s.node) - table.at(0, s)]
        })
        .unwrap()
        .scaled(c);
        let f2 = crate::spectral::ops::derivative(&f, 2).unwrap();
        let corrected = PeriodicField::from_values(
            &g,
            1,
            (0..64)
                .map(|i| raw.get(0, i) - c * navot_defect(-f2.get(0, i), lat.step()))
                .collect(),
        )
        .unwrap();
        let e_raw = raw.max_diff(&exact).unwrap();
        let e_cor = corrected.max_diff(&exact).unwrap();
        assert!(e_cor < 1e-5, "corrected error {e_cor:e}");
        assert!(e_cor < 0.05 * e_raw, "raw {e_raw:e} corrected {e_cor:e}");
    }
}
