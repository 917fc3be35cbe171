//! Littlewood-Paley blocks on the torus.
//!
//! Cutoff `χ`: 1 on `[0, 3/4]`, 0 on `[11/10, ∞)`, and in between
//! `cos²(π/2 · ψ(u))` with `u = (r - 3/4) / (11/10 - 3/4)` and the smooth step
//! `ψ(u) = e^{-1/u} / (e^{-1/u} + e^{-1/(1-u)})`. Block profile
//! `φ(ξ) = χ(ξ/2) - χ(ξ)` is supported in `[3/4, 11/5]`, and the blocks
//! telescope to the identity on every resolvable nonzero mode.

use num_complex::Complex64;

use crate::error::Result;
use crate::spectral::{PeriodicField, PeriodicGrid};

pub const CUTOFF_INNER: f64 = 0.75;
pub const CUTOFF_OUTER: f64 = 1.1;

fn smooth_step(u: f64) -> f64 {
    if u <= 0.0 {
        return 0.0;
    }
    if u >= 1.0 {
        return 1.0;
    }
    let a = (-1.0 / u).exp();
    let b = (-1.0 / (1.0 - u)).exp();
    a / (a + b)
}

/// Radial cutoff `χ(r)`.
pub fn cutoff(r: f64) -> f64 {
    let r = r.abs();
    if r <= CUTOFF_INNER {
        1.0
    } else if r >= CUTOFF_OUTER {
        0.0
    } else {
        let u = (r - CUTOFF_INNER) / (CUTOFF_OUTER - CUTOFF_INNER);
        (std::f64::consts::FRAC_PI_2 * smooth_step(u)).cos().powi(2)
    }
}

/// Block profile `φ(ξ) = χ(ξ/2) - χ(ξ)`.
pub fn block_profile(xi: f64) -> f64 {
    cutoff(xi / 2.0) - cutoff(xi)
}

/// Dyadic indices whose blocks cover every nonzero mode of `grid`.
pub fn block_range(grid: &PeriodicGrid) -> (i32, i32) {
    let k_min = 2.0 * std::f64::consts::PI / grid.period();
    let k_max = k_min * (grid.n() / 2) as f64;
    let j_min = (k_min / CUTOFF_OUTER).log2().floor() as i32;
    let j_max = (k_max / CUTOFF_INNER).log2().ceil() as i32 - 1;
    (j_min, j_max)
}

/// `Δ̇_j f`.
pub fn block(f: &PeriodicField, j: i32) -> Result<PeriodicField> {
    let grid = f.grid();
    let scale = 2f64.powi(j);
    let coeffs: Vec<Vec<Complex64>> = f
        .all_coefficients()
        .into_iter()
        .map(|mut c| {
            for (slot, z) in c.iter_mut().enumerate() {
                *z *= block_profile(grid.wavenumber(slot).abs() / scale);
            }
            c
        })
        .collect();
    let out = PeriodicField::from_coefficients(grid, &coeffs);
    out.check_finite("Littlewood-Paley block")?;
    Ok(out)
}

#[derive(Clone, Debug, PartialEq)]
pub struct BesovReport {
    pub order: f64,
    /// `(j, 2^{js} ‖Δ̇_j f‖_∞)` over the resolvable range.
    pub blocks: Vec<(i32, f64)>,
    pub value: f64,
    pub argmax_block: i32,
}

/// `Ḃ^s_{∞,∞}` seminorm estimate `max_j 2^{js} ‖Δ̇_j f‖_∞`.
pub fn besov_seminorm(f: &PeriodicField, s: f64) -> Result<BesovReport> {
    let (j_min, j_max) = block_range(f.grid());
    let mut blocks = Vec::new();
    let mut value = 0.0;
    let mut argmax_block = j_min;
    for j in j_min..=j_max {
        let v = 2f64.powf(j as f64 * s) * block(f, j)?.sup_norm();
        if v > value {
            value = v;
            argmax_block = j;
        }
        blocks.push((j, v));
    }
    Ok(BesovReport {
        order: s,
        blocks,
        value,
        argmax_block,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn profile_support_and_value_at_one() {
        assert_eq!(block_profile(0.74), 0.0);
        assert_eq!(block_profile(2.21), 0.0);
        assert!((block_profile(1.0) - 0.971).abs() < 2e-3);
        for k in 0..1000 {
            let r = k as f64 * 0.003;
            let c = cutoff(r);
            assert!((0.0..=1.0).contains(&c));
        }
    }

    #[test]
    fn blocks_partition_every_mode() {
        for n in [16usize, 64, 256, 1024] {
            let g = PeriodicGrid::standard(n).unwrap();
            let (a, b) = block_range(&g);
            for m in 1..=(n / 2) {
                let total: f64 = (a..=b)
                    .map(|j| block_profile(m as f64 / 2f64.powi(j)))
                    .sum();
                assert!((total - 1.0).abs() <= 1e-10, "n={n} m={m} sum={total}");
            }
        }
    }

    #[test]
    fn single_dyadic_mode() {
        let g = PeriodicGrid::standard(256).unwrap();
        for j in 0..6 {
            let f = PeriodicField::from_fn(&g, |x| (2f64.powi(j) * x).cos());
            let r = besov_seminorm(&f, 0.0).unwrap();
            assert!((0.9..=1.1).contains(&r.value), "j={j}: {}", r.value);
            let r1 = besov_seminorm(&f, 1.0).unwrap();
            let ratio = r1.value / r.value;
            assert!((ratio - 2f64.powi(r1.argmax_block)).abs() < 1e-9 * ratio);
        }
    }

    #[test]
    fn constant_field_vanishes() {
        let g = PeriodicGrid::standard(64).unwrap();
        let f = PeriodicField::constant(&g, 3.0);
        assert!(besov_seminorm(&f, 0.7).unwrap().value < 1e-14);
    }
}
