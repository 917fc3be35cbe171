use nalgebra::DMatrix;
use rayon::prelude::*;

use super::symbol::SymbolSpec;
use crate::error::{Error, Result};
use crate::spectral::PeriodicGrid;

/// Integration controls for [`solve_kernel_fourier`].
#[derive(Clone, Debug, PartialEq)]
pub struct KernelOptions {
    /// Number of `τ` lattice points in `[0, t]`, endpoints included.
    pub tau_count: usize,
    /// Substeps per `τ` interval are raised until `Δ c₁ |ξ|^s ≤ step_target`.
    pub step_target: f64,
    pub min_substeps: usize,
    /// Combine `m` and `2m` substeps as `2 K_{2m} - K_m`.
    pub richardson: bool,
    /// Use the substep count of the largest `|ξ|` for every `ξ`, so the
    /// discretization error is smooth across the `ξ` lattice.
    pub uniform_substeps: bool,
    /// Once `|K̂|` falls below this, the rest of the column is stored as zero.
    pub underflow: f64,
}

impl Default for KernelOptions {
    fn default() -> Self {
        Self {
            tau_count: 11,
            step_target: 0.1,
            min_substeps: 1,
            richardson: true,
            uniform_substeps: false,
            underflow: 1e-40,
        }
    }
}

impl KernelOptions {
    /// Tighter steps used by the bound checks.
    pub fn accurate() -> Self {
        Self {
            step_target: 0.005,
            ..Self::default()
        }
    }
}

/// `K̂(t, τ, ξ)` on a `(τ, ξ)` lattice for fixed `t` and base point `x₀`.
#[derive(Clone, Debug)]
pub struct KernelTable {
    pub t: f64,
    pub x0: f64,
    pub order: f64,
    pub c0: f64,
    pub c1: f64,
    pub dim: usize,
    pub taus: Vec<f64>,
    pub xis: Vec<f64>,
    /// Substeps per `τ` interval, per `ξ`.
    pub substeps: Vec<usize>,
    /// Largest Frobenius gap between the `m`- and `2m`-substep solutions.
    pub ode_error: f64,
    values: Vec<DMatrix<f64>>,
}

impl KernelTable {
    pub fn value(&self, tau_index: usize, xi_index: usize) -> &DMatrix<f64> {
        &self.values[tau_index * self.xis.len() + xi_index]
    }

    /// `t - τ`.
    pub fn sigma(&self, tau_index: usize) -> f64 {
        self.t - self.taus[tau_index]
    }

    pub fn tau_index(&self, tau: f64) -> Option<usize> {
        self.taus
            .iter()
            .position(|&x| (x - tau).abs() <= 1e-12 * self.t.max(1.0))
    }
}

/// Nonnegative angular wavenumbers `k_0, …, k_{n/2}` of a grid.
pub fn grid_wavenumbers(grid: &PeriodicGrid) -> Vec<f64> {
    let unit = 2.0 * std::f64::consts::PI / grid.period();
    (0..=grid.n() / 2).map(|m| unit * m as f64).collect()
}

/// Solves `∂_σ 𝒦 = -𝒦 𝖠(t - σ)`, `𝒦(0) = Id`, by implicit Euler products
/// `𝒦 ← 𝒦 (Id + Δ 𝖠)⁻¹`, and stores `K̂(t, τ, ξ) = 𝒦(t - τ)`.
pub fn solve_kernel_fourier(
    sym: &SymbolSpec,
    t: f64,
    x0: f64,
    xis: &[f64],
    opts: &KernelOptions,
) -> Result<KernelTable> {
    if !(t.is_finite() && t > 0.0) {
        return Err(Error::arg("t", format!("{t} must be positive")));
    }
    if opts.tau_count < 2 {
        return Err(Error::arg("tau_count", "need at least two τ points"));
    }
    if !(opts.step_target > 0.0) {
        return Err(Error::arg("step_target", "must be positive"));
    }
    let count = opts.tau_count;
    let taus: Vec<f64> = (0..count)
        .map(|i| t * i as f64 / (count - 1) as f64)
        .collect();
    let sigmas: Vec<f64> = (0..count)
        .map(|k| t * k as f64 / (count - 1) as f64)
        .collect();
    let interval = t / (count - 1) as f64;
    let substeps_for = |xi: f64| {
        let need = interval * sym.c1 * xi.abs().powf(sym.order) / opts.step_target;
        (need.ceil() as usize).max(opts.min_substeps).max(1)
    };
    let xi_max = xis.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let substeps: Vec<usize> = xis
        .iter()
        .map(|&xi| substeps_for(if opts.uniform_substeps { xi_max } else { xi }))
        .collect();

    let columns: Vec<Result<(Vec<DMatrix<f64>>, f64)>> = xis
        .par_iter()
        .zip(&substeps)
        .map(|(&xi, &m)| {
            let coarse = march(sym, t, x0, xi, &sigmas, m, opts.underflow)?;
            if !opts.richardson {
                return Ok((coarse, 0.0));
            }
            let fine = march(sym, t, x0, xi, &sigmas, 2 * m, opts.underflow)?;
            let mut gap: f64 = 0.0;
            let merged = coarse
                .into_iter()
                .zip(fine)
                .map(|(c, f)| {
                    gap = gap.max((&f - &c).norm());
                    f * 2.0 - c
                })
                .collect();
            Ok((merged, gap))
        })
        .collect();

    let nx = xis.len();
    let n = sym.dim();
    let mut values = vec![DMatrix::zeros(n, n); count * nx];
    let mut ode_error: f64 = 0.0;
    for (ix, col) in columns.into_iter().enumerate() {
        let (col, gap) = col?;
        ode_error = ode_error.max(gap);
        for (k, m) in col.into_iter().enumerate() {
            let i_tau = count - 1 - k;
            values[i_tau * nx + ix] = m;
        }
    }
    for v in &values {
        if v.iter().any(|x| !x.is_finite()) {
            return Err(Error::NonFinite("kernel table"));
        }
    }
    Ok(KernelTable {
        t,
        x0,
        order: sym.order,
        c0: sym.c0,
        c1: sym.c1,
        dim: n,
        taus,
        xis: xis.to_vec(),
        substeps,
        ode_error,
        values,
    })
}

/// Implicit Euler products along increasing `σ` nodes, `m` substeps per interval.
fn march(
    sym: &SymbolSpec,
    t: f64,
    x0: f64,
    xi: f64,
    sigmas: &[f64],
    m: usize,
    underflow: f64,
) -> Result<Vec<DMatrix<f64>>> {
    let n = sym.dim();
    let mut out = Vec::with_capacity(sigmas.len());
    out.push(DMatrix::identity(n, n));
    let singular = |s: f64| Error::SingularResolvent { xi, tau: t - s };
    let mut dead = false;
    match n {
        1 => {
            let mut k = 1.0;
            for w in sigmas.windows(2) {
                if !dead {
                    let d = (w[1] - w[0]) / m as f64;
                    for q in 1..=m {
                        let s = w[0] + q as f64 * d;
                        let a = sym.eval_scalar(t - s, x0, xi).expect("scalar symbol");
                        let den = 1.0 + d * a;
                        if den.abs() < 1e-300 {
                            return Err(singular(s));
                        }
                        k /= den;
                        if k.abs() < underflow {
                            break;
                        }
                    }
                    if k.abs() < underflow {
                        dead = true;
                        k = 0.0;
                    }
                }
                out.push(DMatrix::from_element(1, 1, k));
            }
        }
        2 => {
            let mut k = [1.0, 0.0, 0.0, 1.0];
            let mut a = [0.0; 4];
            for w in sigmas.windows(2) {
                if !dead {
                    let d = (w[1] - w[0]) / m as f64;
                    for q in 1..=m {
                        let s = w[0] + q as f64 * d;
                        sym.eval_into(t - s, x0, xi, &mut a);
                        let (m00, m01, m10, m11) =
                            (1.0 + d * a[0], d * a[1], d * a[2], 1.0 + d * a[3]);
                        let det = m00 * m11 - m01 * m10;
                        if det.abs() < 1e-300 {
                            return Err(singular(s));
                        }
                        let inv = [m11 / det, -m01 / det, -m10 / det, m00 / det];
                        k = [
                            k[0] * inv[0] + k[1] * inv[2],
                            k[0] * inv[1] + k[1] * inv[3],
                            k[2] * inv[0] + k[3] * inv[2],
                            k[2] * inv[1] + k[3] * inv[3],
                        ];
                    }
                    let norm = k.iter().map(|v| v * v).sum::<f64>().sqrt();
                    if norm < underflow {
                        dead = true;
                        k = [0.0; 4];
                    }
                }
                out.push(DMatrix::from_row_slice(2, 2, &k));
            }
        }
        _ => {
            let mut k = DMatrix::<f64>::identity(n, n);
            let id = DMatrix::<f64>::identity(n, n);
            for w in sigmas.windows(2) {
                if !dead {
                    let d = (w[1] - w[0]) / m as f64;
                    for q in 1..=m {
                        let s = w[0] + q as f64 * d;
                        let r = &id + sym.eval(t - s, x0, xi) * d;
                        let inv = r.try_inverse().ok_or_else(|| singular(s))?;
                        k = &k * inv;
                    }
                    if k.norm() < underflow {
                        dead = true;
                        k.fill(0.0);
                    }
                }
                out.push(k.clone());
            }
        }
    }
    Ok(out)
}

/// `e^{A}` by scaling and squaring with a degree-18 Taylor polynomial.
pub fn expm(a: &DMatrix<f64>) -> DMatrix<f64> {
    let n = a.nrows();
    let norm = a.abs().row_sum().max();
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = a / 2f64.powi(squarings as i32);
    let mut term = DMatrix::<f64>::identity(n, n);
    let mut sum = term.clone();
    for k in 1..=18 {
        term = &term * &scaled / k as f64;
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

/// Largest Frobenius gap between a table of a time-independent symbol and `e^{-σ𝖠(ξ)}`.
pub fn expm_cross_check(sym: &SymbolSpec, tab: &KernelTable) -> Result<f64> {
    if !sym.is_time_independent() {
        return Err(Error::arg(
            "sym",
            "matrix-exponential check needs a time-independent symbol",
        ));
    }
    let mut worst: f64 = 0.0;
    for (it, _) in tab.taus.iter().enumerate() {
        let sigma = tab.sigma(it);
        for (ix, &xi) in tab.xis.iter().enumerate() {
            let exact = expm(&(sym.eval(0.0, tab.x0, xi) * -sigma));
            worst = worst.max((tab.value(it, ix) - exact).norm());
        }
    }
    Ok(worst)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn opts(step_target: f64) -> KernelOptions {
        KernelOptions {
            step_target,
            ..KernelOptions::default()
        }
    }

    #[test]
    fn terminal_identity() {
        let sym = SymbolSpec::rotational(2.0, 2.0, 1.0);
        let tab = solve_kernel_fourier(&sym, 0.5, 0.0, &[0.0, 1.0, 3.0], &opts(0.1)).unwrap();
        let last = tab.taus.len() - 1;
        for ix in 0..3 {
            assert_eq!(tab.value(last, ix), &DMatrix::identity(2, 2));
        }
    }

    #[test]
    fn heat_matches_exponential() {
        let sym = SymbolSpec::heat();
        let xis = [0.5, 1.0, 1.5, 2.0];
        let mut o = opts(0.1);
        o.min_substeps = 1000;
        let tab = solve_kernel_fourier(&sym, 1.0, 0.0, &xis, &o).unwrap();
        for (ix, &xi) in xis.iter().enumerate() {
            let exact = (-xi * xi).exp();
            let v = tab.value(0, ix)[(0, 0)];
            assert!((v - exact).abs() <= 1e-6 * exact, "ξ={xi}: {v} vs {exact}");
        }
    }

    #[test]
    fn modulated_matches_exponent_integral() {
        let sym = SymbolSpec::modulated(1.0);
        let t: f64 = 2.0;
        let xis = [0.5, 1.0, 2.0];
        let tab = solve_kernel_fourier(&sym, t, 0.0, &xis, &opts(0.002)).unwrap();
        // ∫₀ᵗ (1 + ½ sin τ) dτ = t + ½ (1 - cos t)
        let integral = t + 0.5 * (1.0 - t.cos());
        for (ix, &xi) in xis.iter().enumerate() {
            let exact = (-xi * integral).exp();
            let v = tab.value(0, ix)[(0, 0)];
            assert!(
                (v - exact).abs() <= 1e-5 * exact.max(1e-3),
                "ξ={xi}: {v} vs {exact}"
            );
        }
    }

    #[test]
    fn rotational_matches_expm() {
        let sym = SymbolSpec::rotational(2.0, 2.0, 1.0);
        let tab = solve_kernel_fourier(&sym, 0.3, 0.0, &[0.5, 1.0, 1.5], &opts(0.002)).unwrap();
        assert!(expm_cross_check(&sym, &tab).unwrap() < 1e-5);
    }

    #[test]
    fn expm_of_rotation_generator() {
        let j = DMatrix::from_row_slice(2, 2, &[0.0, -1.0, 1.0, 0.0]);
        let r = expm(&(j * 0.7));
        assert!((r[(0, 0)] - 0.7f64.cos()).abs() < 1e-14);
        assert!((r[(1, 0)] - 0.7f64.sin()).abs() < 1e-14);
        let big = expm(&DMatrix::from_element(1, 1, -20.0));
        assert!((big[(0, 0)] / (-20f64).exp() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn richardson_raises_the_order() {
        // raw implicit Euler is first order: halving Δ halves the error
        let sym = SymbolSpec::heat();
        let xi = [1.5];
        let exact = (-2.25f64).exp();
        let err = |m: usize| {
            let o = KernelOptions {
                min_substeps: m,
                richardson: false,
                step_target: 1e9,
                ..KernelOptions::default()
            };
            let tab = solve_kernel_fourier(&sym, 1.0, 0.0, &xi, &o).unwrap();
            (tab.value(0, 0)[(0, 0)] - exact).abs()
        };
        let ratio = err(20) / err(40);
        assert!((1.7..=2.3).contains(&ratio), "ratio {ratio}");
    }
}
