use num_complex::Complex64;

use super::grid::PeriodicGrid;
use crate::error::{Error, Result};

/// Real samples of a `channels`-component field on a [`PeriodicGrid`].
///
/// Values are stored channel-major: channel `c` occupies
/// `values[c * n .. (c + 1) * n]`.
#[derive(Clone, Debug)]
pub struct PeriodicField {
    grid: PeriodicGrid,
    channels: usize,
    values: Vec<f64>,
}

impl PeriodicField {
    pub fn zeros(grid: &PeriodicGrid, channels: usize) -> Self {
        assert!(channels >= 1, "a field needs at least one channel");
        Self {
            grid: grid.clone(),
            channels,
            values: vec![0.0; channels * grid.n()],
        }
    }

    pub fn constant(grid: &PeriodicGrid, value: f64) -> Self {
        Self::from_fn(grid, |_| value)
    }

    pub fn from_fn(grid: &PeriodicGrid, f: impl Fn(f64) -> f64) -> Self {
        let values = grid.nodes().into_iter().map(f).collect();
        Self {
            grid: grid.clone(),
            channels: 1,
            values,
        }
    }

    /// Two-channel field from a planar curve parametrization.
    pub fn from_fn2(grid: &PeriodicGrid, f: impl Fn(f64) -> [f64; 2]) -> Self {
        let n = grid.n();
        let mut values = vec![0.0; 2 * n];
        for (j, x) in grid.nodes().into_iter().enumerate() {
            let [a, b] = f(x);
            values[j] = a;
            values[n + j] = b;
        }
        Self {
            grid: grid.clone(),
            channels: 2,
            values,
        }
    }

    pub fn from_values(grid: &PeriodicGrid, channels: usize, values: Vec<f64>) -> Result<Self> {
        if channels == 0 || values.len() != channels * grid.n() {
            return Err(Error::arg(
                "values",
                format!(
                    "expected {} samples for {channels} channels, got {}",
                    channels * grid.n(),
                    values.len()
                ),
            ));
        }
        let field = Self {
            grid: grid.clone(),
            channels,
            values,
        };
        field.check_finite("field construction")?;
        Ok(field)
    }

    pub fn from_channels(grid: &PeriodicGrid, channels: Vec<Vec<f64>>) -> Result<Self> {
        let c = channels.len();
        Self::from_values(grid, c, channels.into_iter().flatten().collect())
    }

    /// Synthesizes a field from per-channel coefficients in FFT order.
    pub fn from_coefficients(grid: &PeriodicGrid, coeffs: &[Vec<Complex64>]) -> Self {
        let mut values = Vec::with_capacity(coeffs.len() * grid.n());
        for c in coeffs {
            values.extend(grid.inverse_real(c));
        }
        Self {
            grid: grid.clone(),
            channels: coeffs.len(),
            values,
        }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn n(&self) -> usize {
        self.grid.n()
    }

    pub fn channels(&self) -> usize {
        self.channels
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }

    pub fn channel(&self, c: usize) -> &[f64] {
        let n = self.n();
        &self.values[c * n..(c + 1) * n]
    }

    pub fn channel_mut(&mut self, c: usize) -> &mut [f64] {
        let n = self.n();
        &mut self.values[c * n..(c + 1) * n]
    }

    pub fn get(&self, c: usize, j: usize) -> f64 {
        self.values[c * self.n() + j]
    }

    /// Point `j` of a two-channel field.
    pub fn point(&self, j: usize) -> [f64; 2] {
        debug_assert_eq!(self.channels, 2);
        [self.values[j], self.values[self.n() + j]]
    }

    pub fn channel_field(&self, c: usize) -> PeriodicField {
        Self {
            grid: self.grid.clone(),
            channels: 1,
            values: self.channel(c).to_vec(),
        }
    }

    pub fn stack(parts: &[&PeriodicField]) -> Result<Self> {
        let first = parts.first().ok_or_else(|| Error::arg("parts", "empty"))?;
        let mut values = Vec::new();
        let mut channels = 0;
        for p in parts {
            if !p.grid.same_as(&first.grid) {
                return Err(Error::GridMismatch);
            }
            values.extend_from_slice(&p.values);
            channels += p.channels;
        }
        Ok(Self {
            grid: first.grid.clone(),
            channels,
            values,
        })
    }

    pub fn coefficients(&self, c: usize) -> Vec<Complex64> {
        self.grid.forward(self.channel(c))
    }

    pub fn all_coefficients(&self) -> Vec<Vec<Complex64>> {
        (0..self.channels).map(|c| self.coefficients(c)).collect()
    }

    pub fn check_finite(&self, what: &'static str) -> Result<()> {
        if self.values.iter().all(|v| v.is_finite()) {
            Ok(())
        } else {
            Err(Error::NonFinite(what))
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values.iter().all(|v| v.is_finite())
    }

    pub fn compatible(&self, other: &PeriodicField) -> Result<()> {
        if self.grid.same_as(&other.grid) && self.channels == other.channels {
            Ok(())
        } else {
            Err(Error::GridMismatch)
        }
    }

    /// Largest absolute sample over all channels.
    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Largest pointwise Euclidean norm across channels.
    pub fn sup_norm(&self) -> f64 {
        (0..self.n())
            .map(|j| self.pointwise_norm(j))
            .fold(0.0, f64::max)
    }

    pub fn pointwise_norm(&self, j: usize) -> f64 {
        (0..self.channels)
            .map(|c| self.get(c, j).powi(2))
            .sum::<f64>()
            .sqrt()
    }

    /// Root mean square over the period: `(1/L ∫ |f|^2)^{1/2}`.
    pub fn l2_mean(&self) -> f64 {
        (self.values.iter().map(|v| v * v).sum::<f64>() / self.n() as f64).sqrt()
    }

    pub fn mean(&self, c: usize) -> f64 {
        self.channel(c).iter().sum::<f64>() / self.n() as f64
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            channels: self.channels,
            values: self.values.iter().map(|&v| f(v)).collect(),
        }
    }

    pub fn zip_map(&self, other: &Self, f: impl Fn(f64, f64) -> f64) -> Result<Self> {
        self.compatible(other)?;
        Ok(Self {
            grid: self.grid.clone(),
            channels: self.channels,
            values: self
                .values
                .iter()
                .zip(&other.values)
                .map(|(&a, &b)| f(a, b))
                .collect(),
        })
    }

    pub fn add(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &Self) -> Result<Self> {
        self.zip_map(other, |a, b| a - b)
    }

    pub fn scaled(&self, s: f64) -> Self {
        self.map(|v| s * v)
    }

    /// `self += a * x`.
    pub fn axpy(&mut self, a: f64, x: &Self) -> Result<()> {
        self.compatible(x)?;
        for (y, &v) in self.values.iter_mut().zip(&x.values) {
            *y += a * v;
        }
        Ok(())
    }

    /// Multiplies every channel pointwise by the single-channel `w`.
    pub fn times_scalar_field(&self, w: &Self) -> Result<Self> {
        if w.channels != 1 || !w.grid.same_as(&self.grid) {
            return Err(Error::GridMismatch);
        }
        let n = self.n();
        let mut out = self.clone();
        for c in 0..self.channels {
            for j in 0..n {
                out.values[c * n + j] *= w.values[j];
            }
        }
        Ok(out)
    }

    /// Largest absolute difference to `other`.
    pub fn max_diff(&self, other: &Self) -> Result<f64> {
        self.compatible(other)?;
        Ok(self
            .values
            .iter()
            .zip(&other.values)
            .fold(0.0, |m, (a, b)| m.max((a - b).abs())))
    }

    /// Evaluates channel `c` at an arbitrary point by trigonometric interpolation.
    pub fn interpolate(&self, c: usize, x: f64) -> f64 {
        let coeffs = self.coefficients(c);
        evaluate_series(&self.grid, &coeffs, x)
    }
}

/// Evaluates the real trigonometric interpolant of FFT-ordered coefficients at `x`.
///
/// The Nyquist coefficient contributes `Re(c) cos(k_N x)`, the symmetric split.
pub fn evaluate_series(grid: &PeriodicGrid, coeffs: &[Complex64], x: f64) -> f64 {
    let n = grid.n();
    let mut acc = 0.0;
    for (j, c) in coeffs.iter().enumerate() {
        let k = grid.wavenumber(j);
        if j == n / 2 {
            acc += c.re * (k * x).cos();
        } else {
            acc += (c * Complex64::from_polar(1.0, k * x)).re;
        }
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn grid() -> PeriodicGrid {
        PeriodicGrid::standard(64).unwrap()
    }

    #[test]
    fn construction_checks_lengths_and_finiteness() {
        let g = grid();
        assert!(PeriodicField::from_values(&g, 1, vec![0.0; 63]).is_err());
        let mut v = vec![0.0; 64];
        v[3] = f64::NAN;
        assert!(matches!(
            PeriodicField::from_values(&g, 1, v),
            Err(Error::NonFinite(_))
        ));
    }

    #[test]
    fn channel_layout() {
        let g = grid();
        let f = PeriodicField::from_fn2(&g, |x| [x.cos(), x.sin()]);
        assert_eq!(f.channels(), 2);
        assert!((f.point(0)[0] - 1.0).abs() < 1e-15);
        assert!(f.point(0)[1].abs() < 1e-15);
        assert!((f.sup_norm() - 1.0).abs() < 1e-14);
    }

    #[test]
    fn interpolation_is_exact_for_band_limited() {
        let g = grid();
        let f = PeriodicField::from_fn(&g, |x| (2.0 * x).sin() + 0.3 * (5.0 * x).cos());
        let x: f64 = 0.123_456;
        let exact = (2.0 * x).sin() + 0.3 * (5.0 * x).cos();
        assert!((f.interpolate(0, x) - exact).abs() < 1e-13);
    }

    #[test]
    fn parseval() {
        let g = grid();
        let f = PeriodicField::from_fn(&g, |x| (x.sin() * 3.0).exp());
        let energy_x: f64 = f.values().iter().map(|v| v * v).sum::<f64>() / 64.0;
        let energy_k: f64 = f.coefficients(0).iter().map(|c| c.norm_sqr()).sum();
        assert!((energy_x - energy_k).abs() <= 1e-12 * energy_x);
    }
}
