use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Builtin matrix symbol families `𝖠(t, x₀, ξ)`; every family scales like `|ξ|^s`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum SymbolFamily {
    /// `a |ξ|^s`.
    Scalar { coefficient: f64 },
    /// `(1 + amplitude · sin(frequency · t)) |ξ|^s`.
    Modulated { amplitude: f64, frequency: f64 },
    /// `|ξ|^s (d Id + a J)` with `J` the quarter-turn rotation.
    Rotational { diagonal: f64, rotation: f64 },
    /// `|ξ|^s M` for a fixed square matrix `M` (rows).
    ConstantMatrix { matrix: Vec<Vec<f64>> },
    /// `(a + b cos x₀) |ξ|^s`; depends on the base point.
    Varying { coefficient: f64, amplitude: f64 },
}

/// Matrix symbol of order `s` with coercivity constant `c₀` and bound `c₁`.
///
/// Unknown keys are rejected by the flattened family, which sees every key
/// not consumed here.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolSpec {
    pub order: f64,
    pub c0: f64,
    pub c1: f64,
    #[serde(flatten)]
    pub family: SymbolFamily,
}

impl SymbolSpec {
    /// `|ξ|² Id` in one dimension.
    pub fn heat() -> Self {
        Self::fractional_heat(2.0)
    }

    /// `|ξ|^s`, with `c₁` large enough for the first three `ξ`-derivatives.
    pub fn fractional_heat(s: f64) -> Self {
        Self {
            order: s,
            c0: 1.0,
            c1: derivative_bound_constant(s, 1.0),
            family: SymbolFamily::Scalar { coefficient: 1.0 },
        }
    }

    /// `(1 + ½ sin t) |ξ|^s`.
    pub fn modulated(s: f64) -> Self {
        Self {
            order: s,
            c0: 0.5,
            c1: derivative_bound_constant(s, 1.5),
            family: SymbolFamily::Modulated {
                amplitude: 0.5,
                frequency: 1.0,
            },
        }
    }

    /// `|ξ|^s (d Id + a J)`.
    pub fn rotational(s: f64, d: f64, a: f64) -> Self {
        Self {
            order: s,
            c0: d,
            c1: derivative_bound_constant(s, (d * d + a * a).sqrt()),
            family: SymbolFamily::Rotational {
                diagonal: d,
                rotation: a,
            },
        }
    }

    pub fn dim(&self) -> usize {
        match &self.family {
            SymbolFamily::Rotational { .. } => 2,
            SymbolFamily::ConstantMatrix { matrix } => matrix.len(),
            _ => 1,
        }
    }

    pub fn is_time_independent(&self) -> bool {
        !matches!(self.family, SymbolFamily::Modulated { .. })
    }

    pub fn is_x_independent(&self) -> bool {
        !matches!(self.family, SymbolFamily::Varying { .. })
    }

    /// Scalar symbol value, for one-dimensional families.
    pub fn eval_scalar(&self, t: f64, x0: f64, xi: f64) -> Option<f64> {
        let p = xi.abs().powf(self.order);
        match &self.family {
            SymbolFamily::Scalar { coefficient } => Some(coefficient * p),
            SymbolFamily::Modulated {
                amplitude,
                frequency,
            } => Some((1.0 + amplitude * (frequency * t).sin()) * p),
            SymbolFamily::Varying {
                coefficient,
                amplitude,
            } => Some((coefficient + amplitude * x0.cos()) * p),
            SymbolFamily::ConstantMatrix { matrix } if matrix.len() == 1 => Some(matrix[0][0] * p),
            _ => None,
        }
    }

    /// Writes `𝖠(t, x₀, ξ)` row-major into `out` (length `N²`).
    pub fn eval_into(&self, t: f64, x0: f64, xi: f64, out: &mut [f64]) {
        let p = xi.abs().powf(self.order);
        match &self.family {
            SymbolFamily::Rotational { diagonal, rotation } => {
                out[0] = diagonal * p;
                out[1] = -rotation * p;
                out[2] = rotation * p;
                out[3] = diagonal * p;
            }
            SymbolFamily::ConstantMatrix { matrix } => {
                let n = matrix.len();
                for (i, row) in matrix.iter().enumerate() {
                    for (j, v) in row.iter().enumerate() {
                        out[i * n + j] = v * p;
                    }
                }
            }
            _ => out[0] = self.eval_scalar(t, x0, xi).expect("scalar family"),
        }
    }

    pub fn eval(&self, t: f64, x0: f64, xi: f64) -> DMatrix<f64> {
        let n = self.dim();
        let mut buf = vec![0.0; n * n];
        self.eval_into(t, x0, xi, &mut buf);
        DMatrix::from_row_slice(n, n, &buf)
    }

    /// Structural checks plus sampled coercivity and `ξ`-derivative bounds for `l ≤ 3`.
    pub fn validate(&self) -> Result<()> {
        if !(self.order.is_finite() && self.order > 0.0) {
            return Err(Error::arg(
                "order",
                format!("{} must be positive", self.order),
            ));
        }
        if !(self.c0 > 0.0 && self.c0 < self.c1) {
            return Err(Error::arg(
                "c0",
                format!("need 0 < c0 < c1, got c0 = {}, c1 = {}", self.c0, self.c1),
            ));
        }
        if let SymbolFamily::ConstantMatrix { matrix } = &self.family {
            let n = matrix.len();
            if n == 0 || matrix.iter().any(|r| r.len() != n) {
                return Err(Error::arg("matrix", "must be a non-empty square matrix"));
            }
        }
        let ts: Vec<f64> = (0..24)
            .map(|k| k as f64 * std::f64::consts::PI / 12.0)
            .collect();
        let x0s = [0.0, 1.0, std::f64::consts::PI];
        let xis: Vec<f64> = (1..=40).map(|k| 0.25 * k as f64).collect();
        for &t in &ts {
            for &x0 in &x0s {
                for &xi in &xis {
                    let a = self.eval(t, x0, xi);
                    let sym = (&a + a.transpose()) * 0.5;
                    let min_eig = sym.symmetric_eigenvalues().min();
                    let bound = self.c0 * xi.powf(self.order);
                    if min_eig < bound * (1.0 - 1e-12) {
                        return Err(Error::Coercivity {
                            xi,
                            t,
                            min_eig,
                            bound,
                        });
                    }
                    let dxi = 1e-2 * xi;
                    for l in 0..=3u32 {
                        let d = centered_difference(l, xi, dxi, |z| self.eval(t, x0, z));
                        let d = operator_norm(&d);
                        let claimed = self.c1 * xi.powf(self.order - l as f64);
                        if d > claimed * (1.0 + 1e-3) + 1e-8 {
                            return Err(Error::arg(
                                "c1",
                                format!(
                                    "|∇^{l} A| = {d:.3e} exceeds c1 |ξ|^(s-{l}) = {claimed:.3e} at ξ = {xi}, t = {t}"
                                ),
                            ));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// Largest singular value.
pub fn operator_norm(a: &DMatrix<f64>) -> f64 {
    if a.nrows() == 1 {
        return a[(0, 0)].abs();
    }
    a.clone().svd(false, false).singular_values.max()
}

/// Smallest `c₁` with `|∂^l (c |ξ|^s)| ≤ c₁ |ξ|^{s-l}` for `l ≤ 3`.
pub fn derivative_bound_constant(s: f64, c: f64) -> f64 {
    let falling = |l: u32| (0..l).map(|i| (s - i as f64).abs()).product::<f64>();
    let worst = (0..=3).map(falling).fold(1.0, f64::max);
    // slack keeps c₀ < c₁ strict and absorbs difference-quotient error
    1.05 * c * worst.max(1.0)
}

/// Centered difference approximation of the `l`-th derivative, second order in `h`.
pub fn centered_difference(
    l: u32,
    x: f64,
    h: f64,
    f: impl Fn(f64) -> DMatrix<f64>,
) -> DMatrix<f64> {
    let at = |k: f64| f(x + k * h);
    match l {
        0 => at(0.0),
        1 => (at(1.0) - at(-1.0)) / (2.0 * h),
        2 => (at(1.0) - at(0.0) * 2.0 + at(-1.0)) / (h * h),
        3 => (at(2.0) - at(1.0) * 2.0 + at(-1.0) * 2.0 - at(-2.0)) / (2.0 * h * h * h),
        _ => panic!("difference order {l} not supported"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn spec_json_round_trip_rejects_unknown_keys() {
        let sym = SymbolSpec::rotational(2.0, 1.0, 0.5);
        let text = serde_json::to_string(&sym).unwrap();
        assert_eq!(serde_json::from_str::<SymbolSpec>(&text).unwrap(), sym);
        let bad = text.replace("\"c0\"", "\"cee0\":1,\"c0\"");
        assert!(serde_json::from_str::<SymbolSpec>(&bad).is_err());
    }

    #[test]
    fn builtin_families_validate() {
        for sym in [
            SymbolSpec::heat(),
            SymbolSpec::fractional_heat(1.0),
            SymbolSpec::fractional_heat(3.0),
            SymbolSpec::modulated(1.0),
            SymbolSpec::rotational(2.0, 2.0, 1.0),
        ] {
            sym.validate().unwrap_or_else(|e| panic!("{sym:?}: {e}"));
        }
    }

    #[test]
    fn wrong_coercivity_is_rejected() {
        let mut sym = SymbolSpec::heat();
        sym.c0 = 1.5;
        sym.c1 = 10.0;
        assert!(matches!(sym.validate(), Err(Error::Coercivity { .. })));
    }

    #[test]
    fn rotational_shape() {
        let a = SymbolSpec::rotational(2.0, 2.0, 1.0).eval(0.0, 0.0, 2.0);
        assert_eq!(a[(0, 0)], 8.0);
        assert_eq!(a[(0, 1)], -4.0);
        assert_eq!(a[(1, 0)], 4.0);
    }
}
