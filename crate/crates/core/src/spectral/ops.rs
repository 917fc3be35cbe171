use num_complex::Complex64;

use super::field::PeriodicField;
use super::grid::PeriodicGrid;
use crate::error::{Error, Result};

pub const MAX_DERIVATIVE_ORDER: u32 = 12;

/// Diagonal Fourier multiplier: mode `k` is multiplied by `symbol[slot(k)]`.
///
/// Every constructor keeps `m(-k) = conj(m(k))` and a real Nyquist entry, so
/// real fields map to real fields.
#[derive(Clone, Debug)]
pub struct MultiplierOp {
    grid: PeriodicGrid,
    symbol: Vec<Complex64>,
}

impl MultiplierOp {
    /// Builds a multiplier from a function of the angular wavenumber.
    ///
    /// `odd` marks symbols with `m(-k) = -m(k)`; their unpaired Nyquist entry is zeroed.
    pub fn from_fn(grid: &PeriodicGrid, odd: bool, m: impl Fn(f64) -> Complex64) -> Self {
        let nyq = grid.nyquist_slot();
        let symbol = (0..grid.n())
            .map(|j| {
                let v = m(grid.wavenumber(j));
                if j == nyq {
                    if odd {
                        Complex64::new(0.0, 0.0)
                    } else {
                        Complex64::new(v.re, 0.0)
                    }
                } else {
                    v
                }
            })
            .collect();
        Self {
            grid: grid.clone(),
            symbol,
        }
    }

    /// `Λ^s`, the multiplier `|k|^s`.
    pub fn fractional_laplacian(grid: &PeriodicGrid, s: f64) -> Result<Self> {
        if !s.is_finite() || s < 0.0 {
            return Err(Error::arg(
                "s",
                format!("order {s} must be finite and non-negative"),
            ));
        }
        Ok(Self::from_fn(grid, false, |k| {
            if s == 0.0 {
                Complex64::new(1.0, 0.0)
            } else {
                Complex64::new(k.abs().powf(s), 0.0)
            }
        }))
    }

    /// `ℋ`, the multiplier `-i sgn(k)`.
    pub fn hilbert(grid: &PeriodicGrid) -> Self {
        Self::from_fn(grid, true, |k| {
            if k == 0.0 {
                Complex64::new(0.0, 0.0)
            } else {
                Complex64::new(0.0, -k.signum())
            }
        })
    }

    /// `∂^m`, the multiplier `(ik)^m`.
    pub fn derivative(grid: &PeriodicGrid, m: u32) -> Result<Self> {
        if m > MAX_DERIVATIVE_ORDER {
            return Err(Error::arg(
                "m",
                format!("derivative order {m} exceeds {MAX_DERIVATIVE_ORDER}"),
            ));
        }
        Ok(Self::from_fn(grid, m % 2 == 1, |k| {
            Complex64::new(0.0, k).powu(m)
        }))
    }

    /// Shift `f ↦ f(· - α)`, the multiplier `e^{-ikα}`; Nyquist keeps `cos(k_N α)`.
    pub fn shift(grid: &PeriodicGrid, alpha: f64) -> Self {
        Self::from_fn(grid, false, |k| Complex64::from_polar(1.0, -k * alpha))
    }

    /// Projection onto `|m| <= n/3`.
    pub fn dealias(grid: &PeriodicGrid) -> Self {
        let n = grid.n() as i64;
        let symbol = (0..grid.n())
            .map(|j| {
                let m = grid.mode(j);
                if 3 * m.abs() > n {
                    Complex64::new(0.0, 0.0)
                } else {
                    Complex64::new(1.0, 0.0)
                }
            })
            .collect();
        Self {
            grid: grid.clone(),
            symbol,
        }
    }

    pub fn grid(&self) -> &PeriodicGrid {
        &self.grid
    }

    pub fn symbol(&self) -> &[Complex64] {
        &self.symbol
    }

    /// `self ∘ other`.
    pub fn compose(&self, other: &MultiplierOp) -> Result<Self> {
        if !self.grid.same_as(&other.grid) {
            return Err(Error::GridMismatch);
        }
        Ok(Self {
            grid: self.grid.clone(),
            symbol: self
                .symbol
                .iter()
                .zip(&other.symbol)
                .map(|(a, b)| a * b)
                .collect(),
        })
    }

    pub fn apply_coefficients(&self, coeffs: &mut [Complex64]) {
        for (c, m) in coeffs.iter_mut().zip(&self.symbol) {
            *c *= m;
        }
    }

    /// Applies the multiplier channel-wise.
    pub fn apply(&self, f: &PeriodicField) -> Result<PeriodicField> {
        if !f.grid().same_as(&self.grid) {
            return Err(Error::GridMismatch);
        }
        let n = self.grid.n();
        let mut out = Vec::with_capacity(f.values().len());
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        for c in 0..f.channels() {
            for (b, &v) in buf.iter_mut().zip(f.channel(c)) {
                *b = Complex64::new(v, 0.0);
            }
            self.grid.forward_in_place(&mut buf);
            self.apply_coefficients(&mut buf);
            self.grid.inverse_in_place(&mut buf);
            out.extend(buf.iter().map(|z| z.re));
        }
        PeriodicField::from_values(&self.grid, f.channels(), out)
    }
}

pub fn fractional_laplacian(f: &PeriodicField, s: f64) -> Result<PeriodicField> {
    MultiplierOp::fractional_laplacian(f.grid(), s)?.apply(f)
}

pub fn hilbert_transform(f: &PeriodicField) -> Result<PeriodicField> {
    MultiplierOp::hilbert(f.grid()).apply(f)
}

pub fn derivative(f: &PeriodicField, m: u32) -> Result<PeriodicField> {
    MultiplierOp::derivative(f.grid(), m)?.apply(f)
}

/// `f(· - α)` by trigonometric interpolation.
pub fn shift(f: &PeriodicField, alpha: f64) -> Result<PeriodicField> {
    MultiplierOp::shift(f.grid(), alpha).apply(f)
}

/// `δ_α f = f - f(· - α)`.
pub fn finite_difference(f: &PeriodicField, alpha: f64) -> Result<PeriodicField> {
    if !alpha.is_finite() {
        return Err(Error::arg("alpha", "offset must be finite"));
    }
    f.sub(&shift(f, alpha)?)
}

/// `Δ_α f = δ_α f / α`.
pub fn slope_difference(f: &PeriodicField, alpha: f64) -> Result<PeriodicField> {
    if alpha == 0.0 {
        return Err(Error::arg(
            "alpha",
            "slope difference needs a non-zero offset",
        ));
    }
    Ok(finite_difference(f, alpha)?.scaled(1.0 / alpha))
}

pub fn dealias(f: &PeriodicField) -> Result<PeriodicField> {
    MultiplierOp::dealias(f.grid()).apply(f)
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn grid(n: usize) -> PeriodicGrid {
        PeriodicGrid::standard(n).unwrap()
    }

    fn close(a: &PeriodicField, b: &PeriodicField, tol: f64) {
        let d = a.max_diff(b).unwrap();
        assert!(d <= tol, "max diff {d:e} > {tol:e}");
    }

    #[test]
    fn fractional_laplacian_eigenfunctions() {
        let g = grid(64);
        let c = PeriodicField::from_fn(&g, |x| x.cos());
        close(&fractional_laplacian(&c, 3.0).unwrap(), &c, 1e-11);
        let k = PeriodicField::constant(&g, 2.5);
        assert!(fractional_laplacian(&k, 1.0).unwrap().max_abs() < 1e-14);
        close(&fractional_laplacian(&k, 0.0).unwrap(), &k, 1e-14);
        let s2 = PeriodicField::from_fn(&g, |x| (2.0 * x).sin());
        close(
            &fractional_laplacian(&s2, 0.5).unwrap(),
            &s2.scaled(2f64.sqrt()),
            1e-13,
        );
        assert!(fractional_laplacian(&c, -0.5).is_err());
    }

    #[test]
    fn hilbert_of_trig() {
        let g = grid(64);
        let s = PeriodicField::from_fn(&g, |x| x.sin());
        let c = PeriodicField::from_fn(&g, |x| x.cos());
        close(&hilbert_transform(&s).unwrap(), &c.scaled(-1.0), 1e-14);
        close(&hilbert_transform(&c).unwrap(), &s, 1e-14);
        let k = PeriodicField::constant(&g, 1.0);
        assert!(hilbert_transform(&k).unwrap().max_abs() < 1e-15);
    }

    #[test]
    fn derivatives_of_cos() {
        let g = grid(64);
        let c = PeriodicField::from_fn(&g, |x| x.cos());
        close(
            &derivative(&c, 1).unwrap(),
            &PeriodicField::from_fn(&g, |x| -x.sin()),
            1e-12,
        );
        close(&derivative(&c, 2).unwrap(), &c.scaled(-1.0), 1e-12);
        assert!(
            derivative(&PeriodicField::constant(&g, 3.0), 1)
                .unwrap()
                .max_abs()
                < 1e-14
        );
        assert!(derivative(&c, 13).is_err());
    }

    #[test]
    fn finite_differences() {
        let g = grid(64);
        let c = PeriodicField::from_fn(&g, |x| x.cos());
        close(&finite_difference(&c, PI).unwrap(), &c.scaled(2.0), 1e-13);
        let s = PeriodicField::from_fn(&g, |x| x.sin());
        let h = g.spacing();
        let fd = finite_difference(&s, h).unwrap();
        let n = g.n();
        let idx = PeriodicField::from_values(
            &g,
            1,
            (0..n)
                .map(|j| s.get(0, j) - s.get(0, (j + n - 1) % n))
                .collect(),
        )
        .unwrap();
        close(&fd, &idx, 1e-12);
        assert!(slope_difference(&s, 0.0).is_err());
    }

    #[test]
    fn dealias_behaviour() {
        let g = grid(256);
        let c = PeriodicField::from_fn(&g, |x| x.cos());
        close(&dealias(&c).unwrap(), &c, 1e-14);
        let hi = PeriodicField::from_fn(&g, |x| (127.0 * x).cos());
        assert!(dealias(&hi).unwrap().max_abs() < 1e-13);
    }

    #[test]
    fn nyquist_is_real_or_zero() {
        let g = grid(16);
        let h = MultiplierOp::hilbert(&g);
        assert_eq!(h.symbol()[8], Complex64::new(0.0, 0.0));
        let d3 = MultiplierOp::derivative(&g, 3).unwrap();
        assert_eq!(d3.symbol()[8], Complex64::new(0.0, 0.0));
        let sh = MultiplierOp::shift(&g, 0.3);
        assert_eq!(sh.symbol()[8].im, 0.0);
        for j in 1..8 {
            let a = sh.symbol()[j];
            let b = sh.symbol()[16 - j];
            assert!((a - b.conj()).norm() < 1e-15);
        }
    }
}
