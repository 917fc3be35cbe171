use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::kernels::physical::least_squares_slope;
use crate::spectral::{PeriodicField, PeriodicGrid};

/// `X = z₀ + z₁ e^{ix} + Y` with `Y ⟂ span{1, e^{ix}}`, identifying `X` with `X₁ + iX₂`.
#[derive(Clone, Debug)]
pub struct CircleProjection {
    pub z0: Complex64,
    pub z1: Complex64,
    pub residual: PeriodicField,
}

impl CircleProjection {
    /// `(∫ |Y|² dx)^{1/2}`.
    pub fn residual_l2(&self) -> f64 {
        self.residual.l2_mean() * self.residual.grid().period().sqrt()
    }
}

/// Normalized `L²` projection onto the circle space.
///
/// `z₀` and `z₁` are the Fourier coefficients of `Z` at modes 0 and 1, so the
/// projection is exactly idempotent.
pub fn project_circle_space(x: &PeriodicField) -> Result<CircleProjection> {
    if x.channels() != 2 {
        return Err(Error::arg("X", "expected a two-channel curve"));
    }
    let grid = x.grid();
    let n = x.n();
    let z: Vec<Complex64> = (0..n)
        .map(|j| Complex64::new(x.get(0, j), x.get(1, j)))
        .collect();
    let mut buf = z.clone();
    grid.forward_in_place(&mut buf);
    let (z0, z1) = (buf[0], buf[1]);
    let unit = 2.0 * std::f64::consts::PI / grid.period();
    let mut res = PeriodicField::zeros(grid, 2);
    for j in 0..n {
        let y = z[j] - z0 - z1 * Complex64::from_polar(1.0, unit * grid.node(j));
        res.channel_mut(0)[j] = y.re;
        res.channel_mut(1)[j] = y.im;
    }
    Ok(CircleProjection {
        z0,
        z1,
        residual: res,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct DecayReport {
    /// `-d log‖Y‖/dt`; `None` when the residual is at round-off throughout.
    pub rate: Option<f64>,
    pub r_squared: f64,
    /// Some step increased the residual.
    pub non_monotone: bool,
    pub points: usize,
}

/// Residuals below this are treated as exactly stationary.
pub const STATIONARY_FLOOR: f64 = 1e-13;

/// Fits `log‖Y(t)‖_{L²}` against `t` over the second half of the trace.
pub fn decay_diagnostic(trace: &[(f64, f64)]) -> Result<DecayReport> {
    if trace.len() < 4 {
        return Err(Error::arg("trace", "need at least four residual records"));
    }
    let non_monotone = trace.windows(2).any(|w| w[1].1 > w[0].1 * (1.0 + 1e-12));
    let t_end = trace[trace.len() - 1].0;
    let t_mid = trace[0].0 + 0.5 * (t_end - trace[0].0);
    let pts: Vec<(f64, f64)> = trace
        .iter()
        .filter(|(t, y)| *t >= t_mid && *y > STATIONARY_FLOOR)
        .map(|&(t, y)| (t, y.ln()))
        .collect();
    if pts.len() < 3 {
        return Ok(DecayReport {
            rate: None,
            r_squared: 0.0,
            non_monotone,
            points: pts.len(),
        });
    }
    let (ts, ys): (Vec<f64>, Vec<f64>) = pts.iter().copied().unzip();
    let (slope, _, r2) = least_squares_slope(&ts, &ys);
    Ok(DecayReport {
        rate: Some(-slope),
        r_squared: r2,
        non_monotone,
        points: pts.len(),
    })
}

/// Initial curves, selected by the `type` key of a config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum PeskinInitial {
    /// `center + radius · e^{ix}`.
    Circle {
        radius: f64,
        #[serde(default)]
        center: [f64; 2],
    },
    /// `(a cos x, b sin x)`.
    Ellipse { a: f64, b: f64 },
    /// `radius · e^{ix} + ε e^{i k x}`.
    PerturbedCircle {
        radius: f64,
        epsilon: f64,
        mode: i32,
    },
    /// `Σ c_k e^{ikx}` with complex `c_k = [re, im]`.
    Fourier { modes: Vec<(i32, [f64; 2])> },
}

impl PeskinInitial {
    pub fn sample(&self, grid: &PeriodicGrid) -> Result<PeriodicField> {
        let unit = 2.0 * std::f64::consts::PI / grid.period();
        let terms: Vec<(i32, Complex64)> = match self {
            PeskinInitial::Circle { radius, center } => vec![
                (0, Complex64::new(center[0], center[1])),
                (1, Complex64::new(*radius, 0.0)),
            ],
            PeskinInitial::Ellipse { a, b } => vec![
                (1, Complex64::new(0.5 * (a + b), 0.0)),
                (-1, Complex64::new(0.5 * (a - b), 0.0)),
            ],
            PeskinInitial::PerturbedCircle {
                radius,
                epsilon,
                mode,
            } => vec![
                (1, Complex64::new(*radius, 0.0)),
                (*mode, Complex64::new(*epsilon, 0.0)),
            ],
            PeskinInitial::Fourier { modes } => modes
                .iter()
                .map(|(k, c)| (*k, Complex64::new(c[0], c[1])))
                .collect(),
        };
        let nyq = (grid.n() / 2) as i32;
        if let Some((k, _)) = terms.iter().find(|(k, _)| k.abs() >= nyq) {
            return Err(Error::arg(
                "mode",
                format!("{k} not resolved on {} points", grid.n()),
            ));
        }
        Ok(PeriodicField::from_fn2(grid, |x| {
            let z: Complex64 = terms
                .iter()
                .map(|(k, c)| c * Complex64::from_polar(1.0, unit * *k as f64 * x))
                .sum();
            [z.re, z.im]
        }))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> PeriodicGrid {
        PeriodicGrid::standard(32).unwrap()
    }

    #[test]
    fn projection_of_circle_space() {
        let x = PeriodicField::from_fn2(&grid(), |s| [2.0 + 3.0 * s.cos(), 3.0 * s.sin()]);
        let p = project_circle_space(&x).unwrap();
        assert!((p.z0 - Complex64::new(2.0, 0.0)).norm() < 1e-14);
        assert!((p.z1 - Complex64::new(3.0, 0.0)).norm() < 1e-14);
        assert!(p.residual.sup_norm() < 1e-14);
    }

    #[test]
    fn backward_mode_is_orthogonal() {
        let x = PeriodicField::from_fn2(&grid(), |s| [s.cos(), -s.sin()]);
        let p = project_circle_space(&x).unwrap();
        assert!(p.z0.norm() < 1e-15 && p.z1.norm() < 1e-15);
        assert!(p.residual.max_diff(&x).unwrap() < 1e-15);
    }

    #[test]
    fn synthetic_exponential_rate() {
        let trace: Vec<(f64, f64)> = (0..=20)
            .map(|k| (0.1 * k as f64, 0.3 * (-0.1 * k as f64).exp()))
            .collect();
        let r = decay_diagnostic(&trace).unwrap();
        assert!((r.rate.unwrap() - 1.0).abs() < 0.01);
        assert!(r.r_squared > 0.999 && !r.non_monotone);
        let flat: Vec<(f64, f64)> = (0..10).map(|k| (k as f64, 1e-16)).collect();
        assert_eq!(decay_diagnostic(&flat).unwrap().rate, None);
    }

    #[test]
    fn ellipse_sample() {
        let x = PeskinInitial::Ellipse { a: 1.0, b: 1.2 }
            .sample(&grid())
            .unwrap();
        let g = grid();
        let expected = PeriodicField::from_fn2(&g, |s| [s.cos(), 1.2 * s.sin()]);
        assert!(x.max_diff(&expected).unwrap() < 1e-14);
    }
}
