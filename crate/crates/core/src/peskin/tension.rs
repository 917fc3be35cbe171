use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

fn one() -> f64 {
    1.0
}

/// Elastic tension `𝒯(r)` as a function of the stretch `r = |X′|`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case", deny_unknown_fields)]
pub enum TensionLaw {
    /// `𝒯(r) = k r`, so `𝐓 ≡ k`.
    Hookean {
        #[serde(default = "one")]
        stiffness: f64,
    },
    /// `𝒯(r) = k r^β`.
    Power {
        beta: f64,
        #[serde(default = "one")]
        stiffness: f64,
    },
    /// `𝒯(r) = (e^{ar} - 1)/a`.
    Exponential { a: f64 },
    /// Monotone cubic (Fritsch-Carlson) interpolant through `(r_i, 𝒯_i)`.
    Tabulated { r: Vec<f64>, tension: Vec<f64> },
}

/// Sampled constants `𝔠 ≤ min{𝒯′, 𝒯/r}` and `ℭ ≥ |𝒯^{(k)}|, k ≤ 3` on a stretch range.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct TensionBounds {
    pub r_min: f64,
    pub r_max: f64,
    pub lower: f64,
    pub upper: f64,
}

impl TensionLaw {
    pub fn hookean() -> Self {
        TensionLaw::Hookean { stiffness: 1.0 }
    }

    pub fn power(beta: f64) -> Self {
        TensionLaw::Power {
            beta,
            stiffness: 1.0,
        }
    }

    pub fn exponential(a: f64) -> Self {
        TensionLaw::Exponential { a }
    }

    /// `𝒯^{(k)}(r)` for `k ≤ 3`.
    pub fn derivative(&self, k: u32, r: f64) -> f64 {
        match self {
            TensionLaw::Hookean { stiffness } => match k {
                0 => stiffness * r,
                1 => *stiffness,
                _ => 0.0,
            },
            TensionLaw::Power { beta, stiffness } => {
                let falling: f64 = (0..k).map(|i| beta - i as f64).product();
                stiffness * falling * r.powf(beta - k as f64)
            }
            TensionLaw::Exponential { a } => {
                if k == 0 {
                    (a * r).exp_m1() / a
                } else {
                    a.powi(k as i32 - 1) * (a * r).exp()
                }
            }
            TensionLaw::Tabulated { r: rs, tension } => pchip(rs, tension, r, k),
        }
    }

    pub fn value(&self, r: f64) -> f64 {
        self.derivative(0, r)
    }

    /// `𝐓(r) = 𝒯(r)/r`.
    pub fn big_t(&self, r: f64) -> f64 {
        match self {
            TensionLaw::Hookean { stiffness } => *stiffness,
            _ => self.value(r) / r,
        }
    }

    /// `𝐓′(r) = (r𝒯′(r) - 𝒯(r))/r²`.
    pub fn big_t_prime(&self, r: f64) -> f64 {
        match self {
            TensionLaw::Hookean { .. } => 0.0,
            _ => (r * self.derivative(1, r) - self.value(r)) / (r * r),
        }
    }

    pub fn is_hookean(&self) -> bool {
        matches!(self, TensionLaw::Hookean { .. })
    }

    /// Samples the admissibility conditions on `[r_min, r_max]`; rejects the law on violation.
    pub fn validate(&self, r_min: f64, r_max: f64) -> Result<TensionBounds> {
        if !(r_min > 0.0 && r_max >= r_min && r_max.is_finite()) {
            return Err(Error::InvalidTension(format!(
                "stretch range [{r_min}, {r_max}] must be positive and ordered"
            )));
        }
        match self {
            TensionLaw::Hookean { stiffness } if !(*stiffness > 0.0) => {
                return Err(Error::InvalidTension("stiffness must be positive".into()))
            }
            TensionLaw::Power { beta, stiffness } if !(*beta > 0.0 && *stiffness > 0.0) => {
                return Err(Error::InvalidTension(
                    "power law needs β > 0 and k > 0".into(),
                ))
            }
            TensionLaw::Exponential { a } if !(*a > 0.0) => {
                return Err(Error::InvalidTension("exponential law needs a > 0".into()))
            }
            TensionLaw::Tabulated { r, tension } => {
                check_table(r, tension)?;
                if r_min < r[0] || r_max > r[r.len() - 1] {
                    return Err(Error::InvalidTension(format!(
                        "stretch range [{r_min}, {r_max}] leaves the table [{}, {}]",
                        r[0],
                        r[r.len() - 1]
                    )));
                }
            }
            _ => {}
        }
        let samples = 257;
        let mut lower = f64::INFINITY;
        let mut upper: f64 = 0.0;
        for i in 0..samples {
            let r = r_min + (r_max - r_min) * i as f64 / (samples - 1) as f64;
            let t1 = self.derivative(1, r);
            let ratio = self.value(r) / r;
            lower = lower.min(t1.min(ratio));
            for k in 0..=3 {
                upper = upper.max(self.derivative(k, r).abs());
            }
        }
        if !(lower > 0.0) || !upper.is_finite() {
            return Err(Error::InvalidTension(format!(
                "min(𝒯′, 𝒯/r) = {lower:.3e} on [{r_min}, {r_max}]"
            )));
        }
        Ok(TensionBounds {
            r_min,
            r_max,
            lower,
            upper,
        })
    }

    /// Validates on `[r_lo/2, 2 r_hi]`, a range bracketing the observed stretches.
    pub fn validate_bracketing(&self, r_lo: f64, r_hi: f64) -> Result<TensionBounds> {
        match self {
            TensionLaw::Tabulated { r, .. } if !r.is_empty() => {
                self.validate(r_lo.max(r[0]), r_hi.min(r[r.len() - 1]).max(r_lo.max(r[0])))
            }
            _ => self.validate(0.5 * r_lo, 2.0 * r_hi),
        }
    }
}

impl FromStr for TensionLaw {
    type Err = Error;

    /// `hookean`, `power:β` or `exponential:a`.
    fn from_str(s: &str) -> Result<Self> {
        let (name, param) = match s.split_once(':') {
            Some((a, b)) => (a.trim(), Some(b.trim())),
            None => (s.trim(), None),
        };
        let number = |p: Option<&str>| -> Result<f64> {
            p.ok_or_else(|| Error::InvalidTension(format!("{name} needs a parameter")))?
                .parse::<f64>()
                .map_err(|e| Error::InvalidTension(format!("{s}: {e}")))
        };
        match name {
            "hookean" if param.is_none() => Ok(TensionLaw::hookean()),
            "power" => Ok(TensionLaw::power(number(param)?)),
            "exponential" => Ok(TensionLaw::exponential(number(param)?)),
            _ => Err(Error::InvalidTension(format!("unknown tension law `{s}`"))),
        }
    }
}

fn check_table(r: &[f64], t: &[f64]) -> Result<()> {
    if r.len() < 3 || r.len() != t.len() {
        return Err(Error::InvalidTension(
            "table needs at least three (r, 𝒯) pairs of equal length".into(),
        ));
    }
    if r.windows(2).any(|w| !(w[1] > w[0])) || r[0] <= 0.0 {
        return Err(Error::InvalidTension(
            "table r must be positive and increasing".into(),
        ));
    }
    if t.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidTension(
            "table 𝒯 must be strictly increasing".into(),
        ));
    }
    Ok(())
}

/// Fritsch-Carlson node slopes, computed from neighbours only.
fn pchip_slope(r: &[f64], t: &[f64], i: usize) -> f64 {
    let n = r.len();
    let secant = |k: usize| (t[k + 1] - t[k]) / (r[k + 1] - r[k]);
    if i == 0 {
        return end_slope(r[1] - r[0], r[2] - r[1], secant(0), secant(1));
    }
    if i == n - 1 {
        return end_slope(
            r[n - 1] - r[n - 2],
            r[n - 2] - r[n - 3],
            secant(n - 2),
            secant(n - 3),
        );
    }
    let (d0, d1) = (secant(i - 1), secant(i));
    if d0 * d1 <= 0.0 {
        return 0.0;
    }
    let (h0, h1) = (r[i] - r[i - 1], r[i + 1] - r[i]);
    let (w1, w2) = (2.0 * h1 + h0, h1 + 2.0 * h0);
    (w1 + w2) / (w1 / d0 + w2 / d1)
}

/// Shape-preserving three-point end slope.
fn end_slope(h0: f64, h1: f64, d0: f64, d1: f64) -> f64 {
    let s = ((2.0 * h0 + h1) * d0 - h0 * d1) / (h0 + h1);
    if s * d0 <= 0.0 {
        0.0
    } else if d0 * d1 <= 0.0 && s.abs() > 3.0 * d0.abs() {
        3.0 * d0
    } else {
        s
    }
}

/// `k`-th derivative of the monotone Hermite cubic; constant extension of the end cubic outside.
fn pchip(r: &[f64], t: &[f64], x: f64, k: u32) -> f64 {
    let n = r.len();
    if n < 3 || n != t.len() {
        return f64::NAN;
    }
    let i = match r.partition_point(|&v| v <= x) {
        0 => 0,
        p if p >= n => n - 2,
        p => p - 1,
    };
    let h = r[i + 1] - r[i];
    let u = (x - r[i]) / h;
    let (m0, m1) = (pchip_slope(r, t, i) * h, pchip_slope(r, t, i + 1) * h);
    let (y0, y1) = (t[i], t[i + 1]);
    // Hermite basis derivatives in u, then chain rule 1/h^k
    let (b00, b10, b01, b11) = match k {
        0 => (
            2.0 * u.powi(3) - 3.0 * u * u + 1.0,
            u.powi(3) - 2.0 * u * u + u,
            -2.0 * u.powi(3) + 3.0 * u * u,
            u.powi(3) - u * u,
        ),
        1 => (
            6.0 * u * u - 6.0 * u,
            3.0 * u * u - 4.0 * u + 1.0,
            -6.0 * u * u + 6.0 * u,
            3.0 * u * u - 2.0 * u,
        ),
        2 => (
            12.0 * u - 6.0,
            6.0 * u - 4.0,
            -12.0 * u + 6.0,
            6.0 * u - 2.0,
        ),
        3 => (12.0, 6.0, -12.0, 6.0),
        _ => (0.0, 0.0, 0.0, 0.0),
    };
    (b00 * y0 + b10 * m0 + b01 * y1 + b11 * m1) / h.powi(k as i32)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_config_strings() {
        assert_eq!(
            "hookean".parse::<TensionLaw>().unwrap(),
            TensionLaw::hookean()
        );
        assert_eq!(
            "power:1.5".parse::<TensionLaw>().unwrap(),
            TensionLaw::power(1.5)
        );
        assert_eq!(
            "exponential:0.5".parse::<TensionLaw>().unwrap(),
            TensionLaw::exponential(0.5)
        );
        assert!("power".parse::<TensionLaw>().is_err());
        assert!("cubic:2".parse::<TensionLaw>().is_err());
    }

    #[test]
    fn derivatives_match_differences() {
        for law in [TensionLaw::power(1.5), TensionLaw::exponential(0.7)] {
            let r = 1.3;
            let h = 1e-5;
            for k in 0..3 {
                let fd = (law.derivative(k, r + h) - law.derivative(k, r - h)) / (2.0 * h);
                let d = law.derivative(k + 1, r);
                assert!((fd - d).abs() < 1e-6 * d.abs().max(1.0), "{law:?} k={k}");
            }
            let bt = (law.big_t(r + h) - law.big_t(r - h)) / (2.0 * h);
            assert!((bt - law.big_t_prime(r)).abs() < 1e-7);
        }
    }

    #[test]
    fn admissibility() {
        assert!(TensionLaw::hookean().validate(0.1, 10.0).is_ok());
        assert!(TensionLaw::power(2.0).validate(0.5, 2.0).is_ok());
        // 𝒯′ → 0 at the origin for β > 1
        assert!(TensionLaw::power(2.0).validate(1e-300, 1.0).is_err());
        assert!(TensionLaw::exponential(-1.0).validate(0.5, 2.0).is_err());
        let bounds = TensionLaw::exponential(1.0).validate(0.5, 2.0).unwrap();
        assert!((bounds.lower - 0.5f64.exp_m1() / 0.5).abs() < 1e-12);
    }

    #[test]
    fn tabulated_reproduces_smooth_law() {
        let law = TensionLaw::exponential(0.5);
        let r: Vec<f64> = (1..=60).map(|k| 0.05 * k as f64).collect();
        let tension: Vec<f64> = r.iter().map(|&x| law.value(x)).collect();
        let tab = TensionLaw::Tabulated { r, tension };
        tab.validate(0.2, 2.5).unwrap();
        for x in [0.33, 1.0, 1.77, 2.41] {
            assert!((tab.value(x) - law.value(x)).abs() < 1e-5);
            assert!((tab.derivative(1, x) - law.derivative(1, x)).abs() < 1e-3);
        }
        assert!(tab.validate(0.01, 2.5).is_err());
    }

    #[test]
    fn tabulated_rejects_non_monotone() {
        let tab = TensionLaw::Tabulated {
            r: vec![0.5, 1.0, 1.5, 2.0],
            tension: vec![0.5, 1.0, 0.9, 2.0],
        };
        assert!(tab.validate(0.6, 1.9).is_err());
    }
}
