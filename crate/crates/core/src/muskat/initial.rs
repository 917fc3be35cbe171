use std::f64::consts::PI;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectral::{PeriodicField, PeriodicGrid};

fn one() -> u32 {
    1
}

/// One Fourier component `a cos(kx) + b sin(kx)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Mode {
    pub k: u32,
    #[serde(default)]
    pub cos: f64,
    #[serde(default)]
    pub sin: f64,
}

/// Initial interface generators, selected by the `type` key of a config.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case", deny_unknown_fields)]
pub enum MuskatInitial {
    /// `amplitude · cos(mode · x)`.
    Cosine {
        amplitude: f64,
        #[serde(default = "one")]
        mode: u32,
    },
    MultiMode {
        modes: Vec<Mode>,
    },
    /// Random phases with `|f̂_k| = amplitude · k^{-slope}` for `1 ≤ k ≤ max_mode`.
    RandomBesov {
        amplitude: f64,
        slope: f64,
        seed: u64,
        /// Defaults to the dealiasing limit `n/3`.
        #[serde(default)]
        max_mode: Option<u32>,
    },
    /// `amplitude · Σ_j 2^{-j(1+β)} sin(2^j x + φ_j)` over `2^j ≤ n/4`;
    /// the slope `f′` sits exactly in `Ċ^β`.
    Lacunary {
        amplitude: f64,
        beta: f64,
        #[serde(default)]
        seed: Option<u64>,
    },
}

impl MuskatInitial {
    pub fn sample(&self, grid: &PeriodicGrid) -> Result<PeriodicField> {
        let unit = 2.0 * PI / grid.period();
        let nyq = (grid.n() / 2) as u32;
        match self {
            MuskatInitial::Cosine { amplitude, mode } => {
                check_mode(*mode, nyq)?;
                let k = unit * *mode as f64;
                Ok(PeriodicField::from_fn(grid, |x| amplitude * (k * x).cos()))
            }
            MuskatInitial::MultiMode { modes } => {
                for m in modes {
                    check_mode(m.k, nyq)?;
                }
                Ok(PeriodicField::from_fn(grid, |x| {
                    modes
                        .iter()
                        .map(|m| {
                            let kx = unit * m.k as f64 * x;
                            m.cos * kx.cos() + m.sin * kx.sin()
                        })
                        .sum()
                }))
            }
            MuskatInitial::RandomBesov {
                amplitude,
                slope,
                seed,
                max_mode,
            } => {
                let top = max_mode.unwrap_or((grid.n() / 3) as u32);
                check_mode(top, nyq)?;
                let mut rng = ChaCha8Rng::seed_from_u64(*seed);
                let comps: Vec<(f64, f64, f64)> = (1..=top)
                    .map(|k| {
                        let phase = rng.gen::<f64>() * 2.0 * PI;
                        (unit * k as f64, amplitude * (k as f64).powf(-slope), phase)
                    })
                    .collect();
                Ok(PeriodicField::from_fn(grid, |x| {
                    comps.iter().map(|(k, a, p)| a * (k * x + p).cos()).sum()
                }))
            }
            MuskatInitial::Lacunary {
                amplitude,
                beta,
                seed,
            } => {
                let mut rng = seed.map(ChaCha8Rng::seed_from_u64);
                let mut comps = Vec::new();
                let mut j = 0;
                while (1usize << j) <= grid.n() / 4 {
                    let phase = rng.as_mut().map_or(0.0, |r| r.gen::<f64>() * 2.0 * PI);
                    let k = (1u64 << j) as f64;
                    comps.push((unit * k, amplitude * k.powf(-(1.0 + beta)), phase));
                    j += 1;
                }
                Ok(PeriodicField::from_fn(grid, |x| {
                    comps.iter().map(|(k, a, p)| a * (k * x + p).sin()).sum()
                }))
            }
        }
    }
}

fn check_mode(k: u32, nyq: u32) -> Result<()> {
    if k == 0 || k >= nyq {
        return Err(Error::arg("mode", format!("{k} must lie in 1..{nyq}")));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn seeded_data_is_reproducible() {
        let g = PeriodicGrid::standard(64).unwrap();
        let spec = MuskatInitial::RandomBesov {
            amplitude: 0.01,
            slope: 2.0,
            seed: 7,
            max_mode: None,
        };
        let a = spec.sample(&g).unwrap();
        let b = spec.sample(&g).unwrap();
        assert_eq!(a.values(), b.values());
        let other = MuskatInitial::RandomBesov {
            amplitude: 0.01,
            slope: 2.0,
            seed: 8,
            max_mode: None,
        };
        assert_ne!(a.values(), other.sample(&g).unwrap().values());
    }

    #[test]
    fn spectrum_follows_slope() {
        let g = PeriodicGrid::standard(128).unwrap();
        let f = MuskatInitial::RandomBesov {
            amplitude: 1.0,
            slope: 1.5,
            seed: 1,
            max_mode: Some(40),
        }
        .sample(&g)
        .unwrap();
        let c = f.coefficients(0);
        for k in [1i64, 5, 40] {
            // real cosine of amplitude a has coefficient magnitude a/2
            let got = c[g.slot(k)].norm();
            assert!((got - 0.5 * (k as f64).powf(-1.5)).abs() < 1e-12);
        }
        assert!(c[g.slot(41)].norm() < 1e-14);
    }

    #[test]
    fn config_round_trip() {
        let spec: MuskatInitial =
            serde_json::from_str(r#"{"type":"cosine","amplitude":0.1}"#).unwrap();
        assert_eq!(
            spec,
            MuskatInitial::Cosine {
                amplitude: 0.1,
                mode: 1
            }
        );
        assert!(serde_json::from_str::<MuskatInitial>(
            r#"{"type":"cosine","amplitude":0.1,"x":1}"#
        )
        .is_err());
    }

    #[test]
    fn lacunary_slope_regularity() {
        let g = PeriodicGrid::standard(256).unwrap();
        let f = MuskatInitial::Lacunary {
            amplitude: 1.0,
            beta: 0.2,
            seed: None,
        }
        .sample(&g)
        .unwrap();
        let c = f.coefficients(0);
        assert!((c[g.slot(64)].norm() - 0.5 * 64f64.powf(-1.2)).abs() < 1e-12);
        assert!(c[g.slot(3)].norm() < 1e-14);
    }
}
