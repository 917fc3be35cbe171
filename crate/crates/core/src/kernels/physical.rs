use num_complex::Complex64;

use super::symbol::SymbolSpec;
use super::table::{grid_wavenumbers, solve_kernel_fourier, KernelOptions, KernelTable};
use crate::error::{Error, Result};
use crate::spectral::{PeriodicField, PeriodicGrid};

/// Spectral tail allowed at the largest mode, relative to the peak.
pub const DECAY_TOLERANCE: f64 = 1e-10;
/// Far field starts at this many kernel widths `(t - τ)^{1/s}`.
pub const FAR_FIELD_START: f64 = 3.0;

/// `K(t, τ, x) = (1/L) Σ_k K̂(t, τ, |k|) e^{ikx}`, one channel per matrix entry (row-major).
#[derive(Clone, Debug)]
pub struct PhysicalKernel {
    pub field: PeriodicField,
    pub sigma: f64,
    pub order: f64,
    pub dim: usize,
}

fn check_lattice(tab: &KernelTable, grid: &PeriodicGrid) -> Result<()> {
    let expected = grid_wavenumbers(grid);
    let same = tab.xis.len() == expected.len()
        && tab
            .xis
            .iter()
            .zip(&expected)
            .all(|(a, b)| (a - b).abs() <= 1e-12 * b.max(1.0));
    if same {
        Ok(())
    } else {
        Err(Error::arg(
            "tab",
            "table ξ lattice must be the grid's nonnegative wavenumbers",
        ))
    }
}

fn check_decay(tab: &KernelTable, tau_index: usize, grid: &PeriodicGrid) -> Result<()> {
    let peak = (0..tab.xis.len())
        .map(|ix| tab.value(tau_index, ix).norm())
        .fold(0.0, f64::max);
    let last = tab.xis.len() - 1;
    let tail = tab.value(tau_index, last).norm();
    if tail <= DECAY_TOLERANCE * peak {
        return Ok(());
    }
    let sigma = tab.sigma(tau_index);
    // e^{-c₀ σ ξ^s} ≤ 10⁻¹⁰ needs c₀ σ ξ^s ≥ 23
    let xi_req = if sigma > 0.0 {
        (23.0 / (tab.c0 * sigma)).powf(1.0 / tab.order)
    } else {
        f64::INFINITY
    };
    let unit = 2.0 * std::f64::consts::PI / grid.period();
    let required_modes = if xi_req.is_finite() {
        ((2.0 * xi_req / unit).ceil() as usize + 2).next_power_of_two()
    } else {
        usize::MAX
    };
    Err(Error::InsufficientDecay {
        tail: tail / peak.max(f64::MIN_POSITIVE),
        required_modes,
    })
}

/// FFT-ordered coefficients of `∂^l K` for entry `e`, zero-padded to `oversample · n` slots.
fn padded_coefficients(
    tab: &KernelTable,
    tau_index: usize,
    grid: &PeriodicGrid,
    entry: usize,
    deriv: u32,
    big: &PeriodicGrid,
) -> Vec<Complex64> {
    let n = grid.n() as i64;
    let (r, c) = (entry / tab.dim, entry % tab.dim);
    let l = grid.period();
    let unit = 2.0 * std::f64::consts::PI / l;
    let mut coeffs = vec![Complex64::new(0.0, 0.0); big.n()];
    for m in -(n / 2)..=(n / 2) {
        let k = unit * m as f64;
        let mut v = tab.value(tau_index, m.unsigned_abs() as usize)[(r, c)] / l;
        if m.abs() == n / 2 {
            v *= 0.5;
        }
        let z = Complex64::new(0.0, k).powu(deriv) * v;
        coeffs[big.slot(m)] += z;
    }
    coeffs
}

fn oversampled_magnitude(
    tab: &KernelTable,
    tau_index: usize,
    grid: &PeriodicGrid,
    deriv: u32,
    oversample: usize,
) -> Result<(PeriodicGrid, Vec<f64>)> {
    check_lattice(tab, grid)?;
    check_decay(tab, tau_index, grid)?;
    let big = PeriodicGrid::new(grid.n() * oversample.max(1), grid.period())?;
    let mut mag2 = vec![0.0; big.n()];
    for e in 0..tab.dim * tab.dim {
        let coeffs = padded_coefficients(tab, tau_index, grid, e, deriv, &big);
        for (m, v) in mag2.iter_mut().zip(big.inverse_real(&coeffs)) {
            *m += v * v;
        }
    }
    Ok((big, mag2.into_iter().map(f64::sqrt).collect()))
}

/// Inverse transform of the `τ` slice on `grid`.
pub fn kernel_physical(
    tab: &KernelTable,
    tau_index: usize,
    grid: &PeriodicGrid,
) -> Result<PhysicalKernel> {
    check_lattice(tab, grid)?;
    check_decay(tab, tau_index, grid)?;
    let channels: Vec<Vec<Complex64>> = (0..tab.dim * tab.dim)
        .map(|e| padded_coefficients(tab, tau_index, grid, e, 0, grid))
        .collect();
    Ok(PhysicalKernel {
        field: PeriodicField::from_coefficients(grid, &channels),
        sigma: tab.sigma(tau_index),
        order: tab.order,
        dim: tab.dim,
    })
}

/// `‖∂_x^l K(t, τ)‖_{L¹}` with the pointwise Frobenius norm, on an oversampled grid.
pub fn kernel_l1(
    tab: &KernelTable,
    tau_index: usize,
    grid: &PeriodicGrid,
    deriv: u32,
    oversample: usize,
) -> Result<f64> {
    let (big, mag) = oversampled_magnitude(tab, tau_index, grid, deriv, oversample)?;
    Ok(mag.iter().sum::<f64>() * big.spacing())
}

/// Largest grid the adaptive L¹ evaluation will grow to.
pub const MAX_L1_MODES: usize = 1 << 16;

/// `‖∂ₓK(σ, 0)‖_{L¹}` on the standard torus, growing the grid until the spectrum has decayed.
pub fn gradient_l1(sym: &SymbolSpec, sigma: f64) -> Result<f64> {
    let opts = KernelOptions {
        tau_count: 2,
        ..KernelOptions::default()
    };
    let mut n = 256;
    loop {
        let g = PeriodicGrid::standard(n)?;
        let tab = solve_kernel_fourier(sym, sigma, 0.0, &grid_wavenumbers(&g), &opts)?;
        match kernel_l1(&tab, 0, &g, 1, 8) {
            Err(Error::InsufficientDecay { required_modes, .. })
                if required_modes > n && required_modes <= MAX_L1_MODES =>
            {
                n = required_modes;
            }
            other => return other,
        }
    }
}

/// `max/min - 1` of `‖∂ₓK(σ)‖_{L¹} σ^{1/s}` over `sigmas`, with the scaled values.
pub fn l1_scaling_spread(sym: &SymbolSpec, sigmas: &[f64]) -> Result<(f64, Vec<f64>)> {
    if !(sym.is_time_independent() && sym.is_x_independent()) {
        return Err(Error::arg(
            "sym",
            "L¹ scaling needs a time- and space-independent symbol",
        ));
    }
    let scaled: Vec<f64> = sigmas
        .iter()
        .map(|&sigma| Ok(gradient_l1(sym, sigma)? * sigma.powf(1.0 / sym.order)))
        .collect::<Result<_>>()?;
    let hi = scaled.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let lo = scaled.iter().copied().fold(f64::INFINITY, f64::min);
    Ok((hi / lo - 1.0, scaled))
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayFit {
    pub slope: f64,
    pub points: usize,
    /// `-(d + s) + 0.5` with `d = 1`.
    pub threshold: f64,
    pub pass: bool,
}

/// Least-squares slope of `log env|K|` against `log(1 + |x| / σ^{1/s})` over the far field.
///
/// `env` is the running maximum of `|K|` from the far end inward, so zeros of
/// an oscillating kernel do not bias the fit. The window stops at `L/4` to
/// keep periodic images small and at `10⁻¹³` of the peak to stay above round-off.
pub fn decay_fit(
    tab: &KernelTable,
    tau_index: usize,
    grid: &PeriodicGrid,
    oversample: usize,
) -> Result<DecayFit> {
    let (big, mag) = oversampled_magnitude(tab, tau_index, grid, 0, oversample)?;
    let sigma = tab.sigma(tau_index);
    if sigma <= 0.0 {
        return Err(Error::arg("tau", "decay fit needs t - τ > 0"));
    }
    let width = sigma.powf(1.0 / tab.order);
    let peak = mag.iter().fold(0.0f64, |m, v| m.max(*v));
    let x_end = big.period() / 4.0;
    let idx: Vec<usize> = (1..big.n() / 2)
        .filter(|&j| {
            let x = big.node(j);
            x >= FAR_FIELD_START * width && x <= x_end
        })
        .collect();
    let mut env = vec![0.0; idx.len()];
    let mut run: f64 = 0.0;
    for (k, &j) in idx.iter().enumerate().rev() {
        run = run.max(mag[j]);
        env[k] = run;
    }
    let (xs, ys): (Vec<f64>, Vec<f64>) = idx
        .iter()
        .zip(&env)
        .filter(|(_, &e)| e > 1e-13 * peak)
        .map(|(&j, &e)| ((1.0 + big.node(j) / width).ln(), e.ln()))
        .unzip();
    if xs.len() < 8 {
        return Err(Error::arg(
            "tab",
            format!(
                "insufficient scale separation: {} far-field points",
                xs.len()
            ),
        ));
    }
    let slope = least_squares_slope(&xs, &ys).0;
    let threshold = -(1.0 + tab.order) + 0.5;
    Ok(DecayFit {
        slope,
        points: xs.len(),
        threshold,
        pass: slope <= threshold,
    })
}

/// Slope and intercept of the least-squares line, plus `R²`.
pub fn least_squares_slope(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let mx = x.iter().sum::<f64>() / n;
    let my = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let syy: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let r2 = if syy > 0.0 {
        sxy * sxy / (sxx * syy)
    } else {
        1.0
    };
    (slope, intercept, r2)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::kernels::symbol::SymbolSpec;
    use crate::kernels::table::{solve_kernel_fourier, KernelOptions};

    fn table(sym: &SymbolSpec, grid: &PeriodicGrid, t: f64) -> KernelTable {
        let opts = KernelOptions {
            tau_count: 2,
            step_target: 0.01,
            ..KernelOptions::default()
        };
        solve_kernel_fourier(sym, t, 0.0, &grid_wavenumbers(grid), &opts).unwrap()
    }

    #[test]
    fn gradient_l1_matches_line_oracles() {
        // line values: s = 1 gives 2/(πσ) (Poisson), s = 2 gives 1/√(πσ) (Gauss)
        let sigma = 0.02;
        let poisson = gradient_l1(&SymbolSpec::fractional_heat(1.0), sigma).unwrap() * sigma;
        assert!(
            (poisson - 2.0 / std::f64::consts::PI).abs() < 1e-3,
            "{poisson}"
        );
        let gauss = gradient_l1(&SymbolSpec::heat(), sigma).unwrap() * sigma.sqrt();
        assert!(
            (gauss - 1.0 / std::f64::consts::PI.sqrt()).abs() < 1e-4,
            "{gauss}"
        );
        assert!(l1_scaling_spread(&SymbolSpec::modulated(2.0), &[0.1]).is_err());
    }

    #[test]
    fn heat_kernel_has_unit_mass() {
        let g = PeriodicGrid::standard(128).unwrap();
        let tab = table(&SymbolSpec::heat(), &g, 0.1);
        let l1 = kernel_l1(&tab, 0, &g, 0, 8).unwrap();
        assert!((l1 - 1.0).abs() < 1e-6, "{l1}");
        let k = kernel_physical(&tab, 0, &g).unwrap();
        let mass = k.field.values().iter().sum::<f64>() * g.spacing();
        assert!((mass - 1.0).abs() < 1e-12);
    }

    #[test]
    fn heat_gradient_scaling() {
        // ‖∂ₓ K(σ)‖_{L¹} = 1/√(πσ) on the line
        let g = PeriodicGrid::standard(256).unwrap();
        let vals: Vec<f64> = [0.05, 0.1, 0.2]
            .iter()
            .map(|&s| {
                let tab = table(&SymbolSpec::heat(), &g, s);
                kernel_l1(&tab, 0, &g, 1, 8).unwrap() * s.sqrt()
            })
            .collect();
        let oracle = 1.0 / std::f64::consts::PI.sqrt();
        for v in &vals {
            assert!((v / oracle - 1.0).abs() < 0.05, "{v} vs {oracle}");
        }
    }

    #[test]
    fn insufficient_decay_is_refused() {
        let g = PeriodicGrid::standard(32).unwrap();
        let tab = table(&SymbolSpec::fractional_heat(1.0), &g, 0.01);
        match kernel_physical(&tab, 0, &g) {
            Err(Error::InsufficientDecay { required_modes, .. }) => assert!(required_modes > 32),
            other => panic!("expected refusal, got {other:?}"),
        }
    }

    #[test]
    fn cubic_symbol_far_field() {
        let g = PeriodicGrid::standard(256).unwrap();
        let tab = table(&SymbolSpec::fractional_heat(3.0), &g, 1e-3);
        let fit = decay_fit(&tab, 0, &g, 8).unwrap();
        assert!(fit.pass, "{fit:?}");
        assert!(fit.slope <= -3.5);
    }
}
