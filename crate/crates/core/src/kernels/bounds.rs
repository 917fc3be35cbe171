use super::symbol::SymbolSpec;
use super::table::{solve_kernel_fourier, KernelOptions, KernelTable};
use crate::error::{Error, Result};

/// Lattice points whose envelope falls below this are not compared.
pub const ENVELOPE_FLOOR: f64 = 1e-20;
/// Tolerance on the exponential bound ratio.
pub const EXP_BOUND_SLACK: f64 = 1e-3;
/// Allowed relative change of the fitted derivative constant under refinement.
pub const DERIVATIVE_STABILITY: f64 = 0.2;

#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport {
    pub id: String,
    /// Largest measured / envelope ratio over the lattice.
    pub worst_ratio: f64,
    pub xi: f64,
    pub tau: f64,
    pub pass: bool,
    /// Fitted constant, for bounds stated up to a constant.
    pub constant: Option<f64>,
}

impl BoundReport {
    pub fn csv_header() -> &'static str {
        "bound_id,worst_ratio,xi,tau,pass"
    }

    pub fn csv_row(&self) -> String {
        format!(
            "{},{:.16e},{:.16e},{:.16e},{}",
            self.id, self.worst_ratio, self.xi, self.tau, self.pass
        )
    }
}

/// Worst ratio of `|K̂(t,τ,ξ)|_F` to `√N e^{-c₀ (t-τ) |ξ|^s}`; passes iff `≤ 1 + 10⁻³`.
pub fn check_exp_bound(tab: &KernelTable, c0: f64) -> BoundReport {
    let sqrt_n = (tab.dim as f64).sqrt();
    let mut worst = (0.0, 0.0, tab.t);
    for (it, &tau) in tab.taus.iter().enumerate() {
        let sigma = tab.sigma(it);
        for (ix, &xi) in tab.xis.iter().enumerate() {
            let envelope = sqrt_n * (-c0 * sigma * xi.abs().powf(tab.order)).exp();
            if envelope < ENVELOPE_FLOOR * sqrt_n {
                continue;
            }
            let r = tab.value(it, ix).norm() / envelope;
            if r > worst.0 {
                worst = (r, xi, tau);
            }
        }
    }
    BoundReport {
        id: format!("exp_bound_c0={c0}"),
        worst_ratio: worst.0,
        xi: worst.1,
        tau: worst.2,
        pass: worst.0 <= 1.0 + EXP_BOUND_SLACK,
        constant: None,
    }
}

/// Envelope `c₀^{-l} c₁^l σ |ξ|^{s-l} e^{-c₀ σ |ξ|^s / 2}`.
pub fn derivative_envelope(tab: &KernelTable, l: u32, sigma: f64, xi: f64) -> f64 {
    let s = tab.order;
    let li = l as i32;
    tab.c0.powi(-li)
        * tab.c1.powi(li)
        * sigma
        * xi.powf(s - l as f64)
        * (-0.5 * tab.c0 * sigma * xi.powf(s)).exp()
}

/// Fits the constant in the `l`-th `ξ`-derivative bound by centered differences.
///
/// The table must sit on a uniform positive `ξ` lattice. The reported constant
/// is the worst ratio; stability under refinement is judged by
/// [`derivative_bound_stability`].
pub fn check_derivative_bound(tab: &KernelTable, l: u32) -> Result<BoundReport> {
    if !(1..=3).contains(&l) {
        return Err(Error::arg("l", "derivative order must be 1, 2 or 3"));
    }
    let xis = &tab.xis;
    if xis.len() < 6 {
        return Err(Error::arg("xis", "need at least six ξ points"));
    }
    let d = xis[1] - xis[0];
    let uniform = xis
        .windows(2)
        .all(|w| ((w[1] - w[0]) - d).abs() <= 1e-9 * d);
    if !(d > 0.0 && xis[0] > 0.0 && uniform) {
        return Err(Error::arg(
            "xis",
            "derivative check needs a uniform positive ξ lattice",
        ));
    }
    let reach = if l == 3 { 2 } else { 1 };
    let mut worst = (0.0, 0.0, tab.t);
    for (it, &tau) in tab.taus.iter().enumerate() {
        let sigma = tab.sigma(it);
        if sigma <= 0.0 {
            continue;
        }
        for ix in reach..xis.len() - reach {
            let v = |k: isize| tab.value(it, (ix as isize + k) as usize);
            let deriv = match l {
                1 => (v(1) - v(-1)) / (2.0 * d),
                2 => (v(1) - v(0) * 2.0 + v(-1)) / (d * d),
                _ => (v(2) - v(1) * 2.0 + v(-1) * 2.0 - v(-2)) / (2.0 * d * d * d),
            };
            let env = derivative_envelope(tab, l, sigma, xis[ix]);
            if env < ENVELOPE_FLOOR {
                continue;
            }
            let r = deriv.norm() / env;
            if r > worst.0 {
                worst = (r, xis[ix], tau);
            }
        }
    }
    Ok(BoundReport {
        id: format!("derivative_l{l}"),
        worst_ratio: worst.0,
        xi: worst.1,
        tau: worst.2,
        pass: worst.0.is_finite(),
        constant: Some(worst.0),
    })
}

/// Fitted derivative constants on a `ξ` lattice and on its halving.
#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    pub coarse: BoundReport,
    pub fine: BoundReport,
    pub relative_change: f64,
    pub pass: bool,
}

/// Uniform lattice `dξ, 2dξ, …, ξ_max`.
pub fn xi_lattice(xi_max: f64, dxi: f64) -> Vec<f64> {
    let count = (xi_max / dxi).round() as usize;
    (1..=count).map(|k| k as f64 * dxi).collect()
}

/// Refits the derivative constant after halving `dξ`; passes iff it moves by at most 20%.
pub fn derivative_bound_stability(
    sym: &SymbolSpec,
    t: f64,
    l: u32,
    xi_max: f64,
    dxi: f64,
    opts: &KernelOptions,
) -> Result<StabilityReport> {
    let opts = KernelOptions {
        uniform_substeps: true,
        ..opts.clone()
    };
    let coarse_tab = solve_kernel_fourier(sym, t, 0.0, &xi_lattice(xi_max, dxi), &opts)?;
    let fine_tab = solve_kernel_fourier(sym, t, 0.0, &xi_lattice(xi_max, dxi / 2.0), &opts)?;
    let coarse = check_derivative_bound(&coarse_tab, l)?;
    let fine = check_derivative_bound(&fine_tab, l)?;
    let a = coarse.worst_ratio;
    let b = fine.worst_ratio;
    let relative_change = (a - b).abs() / a.max(b).max(f64::MIN_POSITIVE);
    Ok(StabilityReport {
        pass: coarse.pass && fine.pass && relative_change <= DERIVATIVE_STABILITY,
        coarse,
        fine,
        relative_change,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn heat_table(c1: f64) -> KernelTable {
        let mut sym = SymbolSpec::heat();
        sym.c1 = c1;
        let xis: Vec<f64> = (0..=16).map(|k| 0.25 * k as f64).collect();
        let opts = KernelOptions {
            step_target: 1e-4,
            ..KernelOptions::default()
        };
        solve_kernel_fourier(&sym, 1.0, 0.0, &xis, &opts).unwrap()
    }

    #[test]
    fn heat_exp_bound_is_sharp() {
        let tab = heat_table(2.1);
        let r = check_exp_bound(&tab, 1.0);
        assert!(r.pass);
        assert!(r.worst_ratio <= 1.0 + 1e-6, "{}", r.worst_ratio);
        let wrong = check_exp_bound(&tab, 2.0);
        assert!(!wrong.pass && wrong.worst_ratio > 1.0);
    }

    #[test]
    fn heat_first_derivative_constant() {
        // |∂_ξ e^{-σξ²}| = 2σξ e^{-σξ²} against c₁ σ ξ e^{-σξ²/2} with c₀ = 1
        let sym = SymbolSpec::heat();
        let opts = KernelOptions {
            step_target: 0.002,
            ..KernelOptions::default()
        };
        let tab = solve_kernel_fourier(&sym, 1.0, 0.0, &xi_lattice(6.0, 0.02), &opts).unwrap();
        let r = check_derivative_bound(&tab, 1).unwrap();
        assert!(r.pass);
        // worst ratio is (2/c₁) sup e^{-σξ²/2} → 2/c₁ as ξ → 0
        assert!(
            (r.worst_ratio * sym.c1 - 2.0).abs() < 0.01,
            "{}",
            r.worst_ratio * sym.c1
        );
    }

    #[test]
    fn heat_second_derivative_is_stable() {
        let sym = SymbolSpec::heat();
        let rep = derivative_bound_stability(&sym, 1.0, 2, 6.0, 0.05, &KernelOptions::accurate())
            .unwrap();
        assert!(rep.pass, "{rep:?}");
    }

    #[test]
    fn csv_row_shape() {
        let tab = heat_table(2.1);
        let r = check_exp_bound(&tab, 1.0);
        assert_eq!(r.csv_row().split(',').count(), 5);
    }
}
