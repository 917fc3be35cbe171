use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectral::{derivative, PeriodicField};

/// Grids above this size use a windowed offset scan by default.
pub const EXHAUSTIVE_LIMIT: usize = 512;
/// Default offset window, in grid steps, for grids above [`EXHAUSTIVE_LIMIT`].
pub const DEFAULT_WINDOW: usize = 128;

#[derive(Clone, Debug, PartialEq)]
pub struct HolderReport {
    pub order: f64,
    pub value: f64,
    /// Node and offset achieving the maximum.
    pub argmax_x: f64,
    pub argmax_alpha: f64,
    /// Largest offset scanned, in grid steps.
    pub window: usize,
}

/// Splits `a` into its integer part and a fractional part in `(0, 1)`.
fn split_order(a: f64) -> Result<(u32, f64)> {
    if !(a.is_finite() && a > 0.0) {
        return Err(Error::arg(
            "a",
            format!("Hölder order {a} must be positive"),
        ));
    }
    let whole = a.floor();
    let frac = a - whole;
    if frac < 1e-12 {
        return Err(Error::arg(
            "a",
            format!("integer order {a}: use derivative_sup_norm instead"),
        ));
    }
    Ok((whole as u32, frac))
}

/// `Ċ^a` seminorm estimate: `max |δ_α ∇^{[a]} f(x)| / |α|^{a - [a]}` over nodes and grid offsets.
///
/// Vector fields use the Euclidean norm of the difference. `window` bounds the
/// offset in grid steps; `None` picks the exhaustive scan up to
/// [`EXHAUSTIVE_LIMIT`] points and [`DEFAULT_WINDOW`] above.
pub fn holder_seminorm(f: &PeriodicField, a: f64, window: Option<usize>) -> Result<HolderReport> {
    let (whole, frac) = split_order(a)?;
    let g = if whole == 0 {
        f.clone()
    } else {
        derivative(f, whole)?
    };
    let n = f.n();
    let half = n / 2;
    let window = match window {
        Some(0) => return Err(Error::arg("window", "at least one grid step")),
        Some(w) => w.min(half),
        None if n <= EXHAUSTIVE_LIMIT => half,
        None => DEFAULT_WINDOW.min(half),
    };
    let h = f.grid().spacing();
    let channels = g.channels();

    let best = (1..=window)
        .into_par_iter()
        .map(|m| {
            let scale = (m as f64 * h).powf(-frac);
            let mut best = (0.0, 0usize);
            for i in 0..n {
                let k = (i + n - m) % n;
                let d2: f64 = (0..channels)
                    .map(|c| (g.get(c, i) - g.get(c, k)).powi(2))
                    .sum();
                let v = d2.sqrt() * scale;
                if v > best.0 {
                    best = (v, i);
                }
            }
            (best.0, best.1, m)
        })
        .reduce(|| (0.0, 0, 1), |a, b| if b.0 > a.0 { b } else { a });

    Ok(HolderReport {
        order: a,
        value: best.0,
        argmax_x: f.grid().node(best.1),
        argmax_alpha: best.2 as f64 * h,
        window,
    })
}

/// `‖∇^m f‖_∞`, the integer-order substitute for the Hölder seminorm.
pub fn derivative_sup_norm(f: &PeriodicField, m: u32) -> Result<f64> {
    if m == 0 {
        return Ok(f.sup_norm());
    }
    Ok(derivative(f, m)?.sup_norm())
}

/// Hölder seminorm for fractional orders, sup norm of the derivative for integer orders.
pub fn seminorm(f: &PeriodicField, a: f64) -> Result<f64> {
    if a >= 0.0 && (a - a.round()).abs() < 1e-12 {
        derivative_sup_norm(f, a.round() as u32)
    } else {
        Ok(holder_seminorm(f, a, None)?.value)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::PeriodicGrid;

    /// Brute-force oracle for `sup_α |δ_α cos| / |α|^{1/2}` = `sup_α 2 sin(α/2) / √α`,
    /// attained where `tan(α/2) = α`.
    fn cos_half_oracle() -> f64 {
        (1..200_000)
            .map(|k| {
                let a = k as f64 * std::f64::consts::PI / 200_000.0;
                2.0 * (a / 2.0).sin() / a.sqrt()
            })
            .fold(0.0, f64::max)
    }

    #[test]
    fn frozen_oracle_value() {
        assert!((cos_half_oracle() - 1.203_9).abs() < 1e-4);
    }

    #[test]
    fn cos_half_order_matches_oracle() {
        let g = PeriodicGrid::standard(256).unwrap();
        let f = PeriodicField::from_fn(&g, |x| x.cos());
        let r = holder_seminorm(&f, 0.5, None).unwrap();
        assert!((r.value - 1.203_9).abs() < 2e-3, "{}", r.value);
        assert!((r.argmax_alpha - 2.33).abs() < 0.05);
    }

    #[test]
    fn constant_is_zero_and_integers_rejected() {
        let g = PeriodicGrid::standard(64).unwrap();
        let f = PeriodicField::constant(&g, 4.0);
        assert_eq!(holder_seminorm(&f, 0.5, None).unwrap().value, 0.0);
        assert!(holder_seminorm(&f, 1.0, None).is_err());
        assert!(holder_seminorm(&f, 0.0, None).is_err());
    }

    #[test]
    fn order_chaining_through_derivative() {
        let g = PeriodicGrid::standard(128).unwrap();
        let f = PeriodicField::from_fn(&g, |x| x.cos());
        let df = PeriodicField::from_fn(&g, |x| -x.sin());
        let a = holder_seminorm(&f, 1.5, None).unwrap().value;
        let b = holder_seminorm(&df, 0.5, None).unwrap().value;
        assert!((a - b).abs() < 1e-12);
    }

    #[test]
    fn integer_orders_redirect() {
        let g = PeriodicGrid::standard(64).unwrap();
        let f = PeriodicField::from_fn(&g, |x| (2.0 * x).sin());
        assert!((seminorm(&f, 1.0).unwrap() - 2.0).abs() < 1e-12);
        assert!((seminorm(&f, 0.0).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn window_is_recorded() {
        let g = PeriodicGrid::standard(1024).unwrap();
        let f = PeriodicField::from_fn(&g, |x| x.sin());
        assert_eq!(
            holder_seminorm(&f, 0.5, None).unwrap().window,
            DEFAULT_WINDOW
        );
        assert_eq!(holder_seminorm(&f, 0.5, Some(10_000)).unwrap().window, 512);
    }
}
