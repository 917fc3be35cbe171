use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use num_complex::Complex64;
use rustfft::{Fft, FftPlanner};

use crate::error::{Error, Result};

/// Uniform grid on the torus of length `period` with `n` nodes `x_j = j L / n`.
///
/// Cloning is cheap: FFT plans live behind an `Arc` and are shared by every
/// field built on the grid.
#[derive(Clone)]
pub struct PeriodicGrid {
    inner: Arc<GridInner>,
}

struct GridInner {
    n: usize,
    period: f64,
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

impl PeriodicGrid {
    pub const MIN_POINTS: usize = 16;

    pub fn new(n: usize, period: f64) -> Result<Self> {
        if n < Self::MIN_POINTS || !n.is_power_of_two() {
            return Err(Error::InvalidGrid(format!(
                "n = {n} must be a power of two and at least {}",
                Self::MIN_POINTS
            )));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(Error::InvalidGrid(format!(
                "period {period} must be positive"
            )));
        }
        let mut planner = FftPlanner::new();
        let forward = planner.plan_fft_forward(n);
        let inverse = planner.plan_fft_inverse(n);
        Ok(Self {
            inner: Arc::new(GridInner {
                n,
                period,
                forward,
                inverse,
            }),
        })
    }

    /// Grid on the standard torus of length 2π.
    pub fn standard(n: usize) -> Result<Self> {
        Self::new(n, 2.0 * PI)
    }

    pub fn n(&self) -> usize {
        self.inner.n
    }

    pub fn period(&self) -> f64 {
        self.inner.period
    }

    pub fn spacing(&self) -> f64 {
        self.inner.period / self.inner.n as f64
    }

    pub fn node(&self, j: usize) -> f64 {
        j as f64 * self.spacing()
    }

    pub fn nodes(&self) -> Vec<f64> {
        (0..self.n()).map(|j| self.node(j)).collect()
    }

    /// Signed mode number of FFT slot `j`, in `[-n/2, n/2)`.
    pub fn mode(&self, j: usize) -> i64 {
        let n = self.n();
        if j < n / 2 {
            j as i64
        } else {
            j as i64 - n as i64
        }
    }

    /// FFT slot holding signed mode `m`.
    pub fn slot(&self, m: i64) -> usize {
        m.rem_euclid(self.n() as i64) as usize
    }

    pub fn nyquist_slot(&self) -> usize {
        self.n() / 2
    }

    /// Angular wavenumber of FFT slot `j`.
    pub fn wavenumber(&self, j: usize) -> f64 {
        2.0 * PI * self.mode(j) as f64 / self.period()
    }

    pub fn wavenumbers(&self) -> Vec<f64> {
        (0..self.n()).map(|j| self.wavenumber(j)).collect()
    }

    /// Torus distance `inf_k |a - b - kL|`.
    pub fn torus_distance(&self, a: f64, b: f64) -> f64 {
        let l = self.period();
        let d = (a - b).rem_euclid(l);
        d.min(l - d)
    }

    /// Coefficients `c_m` with `f(x) = sum_m c_m e^{i k_m x}`, in FFT order.
    pub fn forward(&self, values: &[f64]) -> Vec<Complex64> {
        assert_eq!(values.len(), self.n());
        let mut buf: Vec<Complex64> = values.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.forward_in_place(&mut buf);
        buf
    }

    pub fn forward_in_place(&self, buf: &mut [Complex64]) {
        self.inner.forward.process(buf);
        let scale = 1.0 / self.n() as f64;
        for c in buf.iter_mut() {
            *c *= scale;
        }
    }

    pub fn inverse_in_place(&self, buf: &mut [Complex64]) {
        self.inner.inverse.process(buf);
    }

    /// Real part of the synthesis `sum_m c_m e^{i k_m x_j}`.
    pub fn inverse_real(&self, coeffs: &[Complex64]) -> Vec<f64> {
        assert_eq!(coeffs.len(), self.n());
        let mut buf = coeffs.to_vec();
        self.inverse_in_place(&mut buf);
        buf.into_iter().map(|c| c.re).collect()
    }

    pub fn same_as(&self, other: &PeriodicGrid) -> bool {
        Arc::ptr_eq(&self.inner, &other.inner)
            || (self.n() == other.n() && self.period() == other.period())
    }
}

impl PartialEq for PeriodicGrid {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

impl fmt::Debug for PeriodicGrid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("PeriodicGrid")
            .field("n", &self.n())
            .field("period", &self.period())
            .finish()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rejects_bad_sizes() {
        assert!(PeriodicGrid::standard(8).is_err());
        assert!(PeriodicGrid::standard(48).is_err());
        assert!(PeriodicGrid::new(32, -1.0).is_err());
        assert!(PeriodicGrid::standard(16).is_ok());
    }

    #[test]
    fn nodes_and_modes() {
        let g = PeriodicGrid::standard(16).unwrap();
        let x = g.nodes();
        for w in x.windows(2) {
            assert!((w[1] - w[0] - g.spacing()).abs() < 1e-15);
        }
        assert_eq!(g.mode(7), 7);
        assert_eq!(g.mode(8), -8);
        assert_eq!(g.mode(15), -1);
        assert_eq!(g.slot(-1), 15);
        assert_eq!(g.slot(3), 3);
    }

    #[test]
    fn round_trip() {
        let g = PeriodicGrid::standard(64).unwrap();
        let f: Vec<f64> = g
            .nodes()
            .iter()
            .map(|&x| (3.0 * x).sin() + x.cos().exp())
            .collect();
        let back = g.inverse_real(&g.forward(&f));
        let err = f
            .iter()
            .zip(&back)
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max);
        assert!(err < 1e-13);
    }

    #[test]
    fn torus_distance_wraps() {
        let g = PeriodicGrid::standard(16).unwrap();
        assert!((g.torus_distance(0.1, 2.0 * PI - 0.1) - 0.2).abs() < 1e-14);
        assert!((g.torus_distance(PI, 0.0) - PI).abs() < 1e-14);
    }
}
