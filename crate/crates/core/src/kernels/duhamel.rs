use nalgebra::DMatrix;
use num_complex::Complex64;

use super::symbol::SymbolSpec;
use super::table::{grid_wavenumbers, solve_kernel_fourier, KernelOptions, KernelTable};
use crate::error::{Error, Result};
use crate::spectral::{PeriodicField, PeriodicGrid};

/// Forcing `f(τ, ·)` sampled by the Duhamel integrator.
pub type Forcing<'a> = &'a (dyn Fn(f64) -> Result<PeriodicField> + Sync);

/// Below this `|z|` the product-integration weights use their Taylor series.
const SERIES_CUTOFF: f64 = 1e-3;
/// Stand-in exponent when the far end of an interval underflowed to zero.
const UNDERFLOW_EXPONENT: f64 = 745.0;

/// `u(t_end) = K(t_end, 0) ∗ u₀ + ∫₀^{t_end} K(t_end, τ) ∗ f(τ) dτ` in Fourier space.
///
/// The symbol must not depend on `x`, so the frozen kernel is exact. On each
/// `τ` interval, scalar kernels are treated as exponentials in `τ` and the
/// forcing as linear, which integrates the stiff high modes exactly; matrix
/// kernels use the trapezoid rule.
pub fn duhamel_evolve(
    sym: &SymbolSpec,
    u0: &PeriodicField,
    forcing: Option<Forcing<'_>>,
    t_end: f64,
    steps: usize,
    opts: &KernelOptions,
) -> Result<PeriodicField> {
    let traj = duhamel_trajectory_impl(sym, u0, forcing, t_end, steps, opts, true)?;
    Ok(traj
        .into_iter()
        .last()
        .expect("trajectory has a final state"))
}

/// States at every node `t_j = j t_end / steps`, `j = 0..=steps`.
pub fn duhamel_trajectory(
    sym: &SymbolSpec,
    u0: &PeriodicField,
    forcing: Option<Forcing<'_>>,
    t_end: f64,
    steps: usize,
    opts: &KernelOptions,
) -> Result<Vec<PeriodicField>> {
    duhamel_trajectory_impl(sym, u0, forcing, t_end, steps, opts, false)
}

fn duhamel_trajectory_impl(
    sym: &SymbolSpec,
    u0: &PeriodicField,
    forcing: Option<Forcing<'_>>,
    t_end: f64,
    steps: usize,
    opts: &KernelOptions,
    final_only: bool,
) -> Result<Vec<PeriodicField>> {
    if !sym.is_x_independent() {
        return Err(Error::arg(
            "sym",
            "x-dependent symbols have a nonzero frozen-coefficient remainder; use the IMEX evolver",
        ));
    }
    if u0.channels() != sym.dim() {
        return Err(Error::arg(
            "u0",
            format!(
                "{} channels for a {}×{} symbol",
                u0.channels(),
                sym.dim(),
                sym.dim()
            ),
        ));
    }
    if steps == 0 {
        return Err(Error::arg("steps", "need at least one step"));
    }
    u0.check_finite("u0")?;
    let grid = u0.grid().clone();
    let dt = t_end / steps as f64;
    let u0_hat = u0.all_coefficients();
    let f_hat: Vec<Vec<Vec<Complex64>>> = match forcing {
        Some(f) => (0..=steps)
            .map(|i| {
                let v = f(i as f64 * dt)?;
                v.compatible(u0)?;
                v.check_finite("forcing")?;
                Ok(v.all_coefficients())
            })
            .collect::<Result<_>>()?,
        None => Vec::new(),
    };
    let opts = KernelOptions {
        tau_count: steps + 1,
        ..opts.clone()
    };
    let xis = grid_wavenumbers(&grid);

    let targets: Vec<usize> = if final_only {
        vec![steps]
    } else {
        (0..=steps).collect()
    };
    let shared = if sym.is_time_independent() {
        Some(solve_kernel_fourier(sym, t_end, 0.0, &xis, &opts)?)
    } else {
        None
    };
    let mut out = Vec::with_capacity(targets.len());
    for &j in &targets {
        if j == 0 {
            out.push(u0.clone());
            continue;
        }
        // K̂(t_j, τ_i) for i ≤ j; a time-independent kernel depends on t_j - τ_i only
        let local;
        let (tab, shift): (&KernelTable, usize) = match &shared {
            Some(tab) => (tab, steps - j),
            None => {
                let o = KernelOptions {
                    tau_count: j + 1,
                    ..opts.clone()
                };
                local = solve_kernel_fourier(sym, j as f64 * dt, 0.0, &xis, &o)?;
                (&local, 0)
            }
        };
        out.push(assemble(&grid, &u0_hat, &f_hat, tab, shift, j, dt));
    }
    Ok(out)
}

fn assemble(
    grid: &PeriodicGrid,
    u0_hat: &[Vec<Complex64>],
    f_hat: &[Vec<Vec<Complex64>>],
    tab: &KernelTable,
    shift: usize,
    j: usize,
    dt: f64,
) -> PeriodicField {
    let dim = tab.dim;
    let kern = |i: usize, ix: usize| tab.value(i + shift, ix);
    let n = grid.n();
    let zero = Complex64::new(0.0, 0.0);
    let mut out = vec![vec![zero; n]; dim];
    let apply = |k: &DMatrix<f64>,
                 v: &[Vec<Complex64>],
                 slot: usize,
                 acc: &mut Vec<Vec<Complex64>>,
                 w: f64| {
        for r in 0..dim {
            for c in 0..dim {
                acc[r][slot] += v[c][slot] * (k[(r, c)] * w);
            }
        }
    };
    for slot in 0..n {
        let ix = grid.mode(slot).unsigned_abs() as usize;
        apply(kern(0, ix), u0_hat, slot, &mut out, 1.0);
        if f_hat.is_empty() {
            continue;
        }
        for i in 0..j {
            let (ka, kb) = (kern(i, ix), kern(i + 1, ix));
            if dim == 1 {
                let (a, b) = (ka[(0, 0)], kb[(0, 0)]);
                let (wa, wb) = exponential_weights(a, b, dt);
                out[0][slot] += f_hat[i][0][slot] * wa + f_hat[i + 1][0][slot] * wb;
            } else {
                apply(ka, &f_hat[i], slot, &mut out, 0.5 * dt);
                apply(kb, &f_hat[i + 1], slot, &mut out, 0.5 * dt);
            }
        }
    }
    PeriodicField::from_coefficients(grid, &out)
}

/// Weights `(w_a, w_b)` with `∫ K f ≈ w_a f_a + w_b f_b` on an interval of length `dt`,
/// where `K` is exponential between its endpoint values `a` (far) and `b` (near).
pub fn exponential_weights(a: f64, b: f64, dt: f64) -> (f64, f64) {
    if b == 0.0 {
        return (0.0, 0.0);
    }
    if !(a > 0.0 && b > 0.0) && a != 0.0 {
        return (0.5 * dt * a, 0.5 * dt * b);
    }
    let z = if a == 0.0 {
        UNDERFLOW_EXPONENT
    } else {
        (b / a).ln()
    };
    let (phi1, psi) = if z.abs() < SERIES_CUTOFF {
        (
            1.0 - z / 2.0 + z * z / 6.0 - z * z * z / 24.0,
            0.5 - z / 3.0 + z * z / 8.0 - z * z * z / 30.0,
        )
    } else {
        let e = (-z).exp();
        ((1.0 - e) / z, (1.0 - e - z * e) / (z * z))
    };
    (b * dt * psi, b * dt * (phi1 - psi))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn weights_integrate_exponential_times_linear() {
        // ∫₀¹ e^{-3u} (2 + u) du with a = e^{-3}, b = 1, f(u=1) = 3, f(u=0) = 2
        let (wa, wb) = exponential_weights((-3.0f64).exp(), 1.0, 1.0);
        let exact = 2.0 * (1.0 - (-3.0f64).exp()) / 3.0 + (1.0 - 4.0 * (-3.0f64).exp()) / 9.0;
        assert!((wa * 3.0 + wb * 2.0 - exact).abs() < 1e-14);
        let (sa, sb) = exponential_weights(1.0 - 1e-6, 1.0, 1.0);
        assert!((sa - 0.5).abs() < 1e-6 && (sb - 0.5).abs() < 1e-6);
    }

    #[test]
    fn heat_decays_cosine() {
        let g = PeriodicGrid::standard(32).unwrap();
        let u0 = PeriodicField::from_fn(&g, f64::cos);
        let u = duhamel_evolve(
            &SymbolSpec::heat(),
            &u0,
            None,
            1.0,
            10,
            &KernelOptions::accurate(),
        )
        .unwrap();
        let exact = PeriodicField::from_fn(&g, |x| (-1.0f64).exp() * x.cos());
        assert!(u.max_diff(&exact).unwrap() < 1e-6);
    }

    #[test]
    fn x_dependent_symbol_is_rejected() {
        let g = PeriodicGrid::standard(16).unwrap();
        let u0 = PeriodicField::from_fn(&g, f64::cos);
        let sym = SymbolSpec {
            order: 2.0,
            c0: 0.5,
            c1: 4.0,
            family: crate::kernels::symbol::SymbolFamily::Varying {
                coefficient: 1.0,
                amplitude: 0.2,
            },
        };
        assert!(duhamel_evolve(&sym, &u0, None, 0.1, 4, &KernelOptions::default()).is_err());
    }
}
