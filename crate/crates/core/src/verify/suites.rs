use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;
use std::sync::Arc;
use std::time::Instant;

use nalgebra::{Rotation2, Vector2};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use serde_json::json;

use super::{Check, SuiteReport};
use crate::error::{Error, Result};
use crate::evolve::{
    min_coefficient, picard_iterate, run, step_imex_muskat, MuskatModel, PeskinModel, PicardConfig,
    RunOptions, SchemeConfig,
};
use crate::kernels::bounds::xi_lattice;
use crate::kernels::{
    check_exp_bound, derivative_bound_stability, solve_kernel_fourier, KernelOptions, SymbolSpec,
};
use crate::muskat::{rhs_original, rhs_reformulated, MuskatInitial};
use crate::norms::{
    arc_chord, besov_seminorm, holder_seminorm, DiagnosticsTrace, TraceSpec, WeightedOrder,
};
use crate::peskin::{
    decomposition_check, half_order_check, remainder_m, rhs_contour, two_path_check, PeskinInitial,
    TensionLaw,
};
use crate::spectral::ops::{derivative, fractional_laplacian, hilbert_transform, shift};
use crate::spectral::pv::hilbert_by_quadrature;
use crate::spectral::{PeriodicField, PeriodicGrid};

/// Identities that hold to round-off.
const ROUND_OFF: f64 = 1e-12;
/// Reformulation and decomposition identities.
const IDENTITY_TOL: f64 = 1e-3;
/// Symmetries: exact in exact arithmetic, reordered sums in floating point.
const EQUIVARIANCE_TOL: f64 = 1e-10;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    Spectral,
    Norms,
    MuskatReformulation,
    Peskin,
    Kernels,
    Evolve,
    Equivariance,
    Determinism,
}

impl Suite {
    pub const ALL: [Suite; 8] = [
        Suite::Spectral,
        Suite::Norms,
        Suite::MuskatReformulation,
        Suite::Peskin,
        Suite::Kernels,
        Suite::Evolve,
        Suite::Equivariance,
        Suite::Determinism,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            Suite::Spectral => "spectral",
            Suite::Norms => "norms",
            Suite::MuskatReformulation => "muskat-reformulation",
            Suite::Peskin => "peskin",
            Suite::Kernels => "kernels",
            Suite::Evolve => "evolve",
            Suite::Equivariance => "equivariance",
            Suite::Determinism => "determinism",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::Parse(format!("unknown suite {s:?}")))
    }
}

fn default_seed() -> u64 {
    7
}

fn default_n() -> usize {
    256
}

/// Inputs the suites may be pointed at; every field has a default.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct VerifyConfig {
    #[serde(default = "default_seed")]
    pub seed: u64,
    /// Grid size for the reformulation and decomposition identities.
    #[serde(default = "default_n")]
    pub n: usize,
    /// Symbols for the kernel suite; defaults to heat, modulated and rotational.
    #[serde(default)]
    pub kernels: Option<Vec<SymbolSpec>>,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self {
            seed: default_seed(),
            n: default_n(),
            kernels: None,
        }
    }
}

/// The three builtin symbol families used when no symbols are configured.
pub fn default_symbols() -> Vec<SymbolSpec> {
    vec![
        SymbolSpec::heat(),
        SymbolSpec::modulated(2.0),
        SymbolSpec::rotational(2.0, 1.0, 0.5),
    ]
}

pub fn run_suite(suite: Suite, cfg: &VerifyConfig) -> SuiteReport {
    let started = Instant::now();
    let checks = match suite {
        Suite::Spectral => spectral(cfg),
        Suite::Norms => norms(cfg),
        Suite::MuskatReformulation => muskat_reformulation(cfg),
        Suite::Peskin => peskin(cfg),
        Suite::Kernels => kernels(cfg),
        Suite::Evolve => evolve(cfg),
        Suite::Equivariance => equivariance(cfg),
        Suite::Determinism => determinism(cfg),
    };
    SuiteReport {
        suite: suite.name().to_string(),
        checks,
        seconds: started.elapsed().as_secs_f64(),
    }
}

pub fn run_all(cfg: &VerifyConfig) -> Vec<SuiteReport> {
    Suite::ALL.iter().map(|&s| run_suite(s, cfg)).collect()
}

/// Turns a fallible measurement into a check; errors become failing checks.
fn measured(name: &str, f: impl FnOnce() -> Result<Check>) -> Check {
    f().unwrap_or_else(|e| Check::errored(name, e))
}

/// Random real trigonometric polynomial with `|f̂_k| ≤ k^{-decay}` for `1 ≤ k ≤ max_mode`.
pub fn random_field(grid: &PeriodicGrid, seed: u64, max_mode: usize, decay: f64) -> PeriodicField {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let terms: Vec<(f64, f64, f64)> = (1..=max_mode)
        .map(|k| {
            let a = rng.gen_range(-1.0..1.0) * (k as f64).powf(-decay);
            let b = rng.gen_range(-1.0..1.0) * (k as f64).powf(-decay);
            (k as f64, a, b)
        })
        .collect();
    PeriodicField::from_fn(grid, |x| {
        terms
            .iter()
            .map(|(k, a, b)| a * (k * x).cos() + b * (k * x).sin())
            .sum()
    })
}

fn rel(a: &PeriodicField, b: &PeriodicField) -> Result<f64> {
    Ok(a.max_diff(b)? / a.sup_norm().max(b.sup_norm()).max(f64::MIN_POSITIVE))
}

fn worst<I: IntoIterator<Item = Result<f64>>>(it: I) -> Result<f64> {
    it.into_iter().try_fold(0.0f64, |m, v| v.map(|v| m.max(v)))
}

fn grid(n: usize) -> Result<PeriodicGrid> {
    PeriodicGrid::standard(n)
}

fn spectral(cfg: &VerifyConfig) -> Vec<Check> {
    let fields = || -> Result<(PeriodicGrid, Vec<PeriodicField>)> {
        let g = grid(64)?;
        let fs = (0..4)
            .map(|i| random_field(&g, cfg.seed + i, 21, 1.0))
            .collect();
        Ok((g, fs))
    };
    let mut out = vec![
        measured("d/dx H = Lambda", || {
            let (_, fs) = fields()?;
            let e = worst(fs.iter().map(|f| {
                rel(
                    &derivative(&hilbert_transform(f)?, 1)?,
                    &fractional_laplacian(f, 1.0)?,
                )
            }))?;
            Ok(Check::at_most("d/dx H = Lambda", e, ROUND_OFF))
        }),
        measured("Lambda^1/2 Lambda^1/2 = Lambda", || {
            let (_, fs) = fields()?;
            let e = worst(fs.iter().map(|f| {
                rel(
                    &fractional_laplacian(&fractional_laplacian(f, 0.5)?, 0.5)?,
                    &fractional_laplacian(f, 1.0)?,
                )
            }))?;
            Ok(Check::at_most(
                "Lambda^1/2 Lambda^1/2 = Lambda",
                e,
                ROUND_OFF,
            ))
        }),
        measured("Lambda^a Lambda^b = Lambda^(a+b)", || {
            let (_, fs) = fields()?;
            let e = worst(fs.iter().map(|f| {
                rel(
                    &fractional_laplacian(&fractional_laplacian(f, 0.3)?, 1.2)?,
                    &fractional_laplacian(f, 1.5)?,
                )
            }))?;
            Ok(Check::at_most(
                "Lambda^a Lambda^b = Lambda^(a+b)",
                e,
                ROUND_OFF,
            ))
        }),
        measured("H H = -Id on mean-free data", || {
            let (_, fs) = fields()?;
            let e = worst(
                fs.iter()
                    .map(|f| rel(&hilbert_transform(&hilbert_transform(f)?)?.scaled(-1.0), f)),
            )?;
            Ok(Check::at_most("H H = -Id on mean-free data", e, ROUND_OFF))
        }),
        measured("Hilbert quadrature = multiplier", || {
            let (_, fs) = fields()?;
            let e = worst(
                fs.iter()
                    .map(|f| rel(&hilbert_by_quadrature(f, 2)?, &hilbert_transform(f)?)),
            )?;
            Ok(Check::at_most("Hilbert quadrature = multiplier", e, 1e-10))
        }),
        measured("shift group law", || {
            let (_, fs) = fields()?;
            let e = worst(
                fs.iter()
                    .map(|f| rel(&shift(&shift(f, 0.37)?, 1.1)?, &shift(f, 1.47)?)),
            )?;
            Ok(Check::at_most("shift group law", e, ROUND_OFF))
        }),
    ];
    out.push(measured("derivative of sin", || {
        let g = grid(64)?;
        let f = PeriodicField::from_fn(&g, |x| (3.0 * x).sin());
        let e = rel(
            &derivative(&f, 1)?,
            &PeriodicField::from_fn(&g, |x| 3.0 * (3.0 * x).cos()),
        )?;
        Ok(Check::at_most("derivative of sin", e, ROUND_OFF))
    }));
    out.push(measured("Parseval", || {
        let (_, fs) = fields()?;
        let e = worst(fs.iter().map(|f| {
            let physical = f.values().iter().map(|v| v * v).sum::<f64>() / f.n() as f64;
            let spectral: f64 = f.coefficients(0).iter().map(|c| c.norm_sqr()).sum();
            Ok((physical - spectral).abs() / physical)
        }))?;
        Ok(Check::at_most("Parseval", e, ROUND_OFF))
    }));
    out
}

/// `(max f - min f)`.
fn oscillation(f: &PeriodicField) -> f64 {
    let v = f.values();
    v.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - v.iter().copied().fold(f64::INFINITY, f64::min)
}

fn norms(cfg: &VerifyConfig) -> Vec<Check> {
    let family = || -> Result<Vec<PeriodicField>> {
        let g = grid(128)?;
        Ok((0..6)
            .map(|i| random_field(&g, cfg.seed + 100 + i, 12 + 4 * i as usize, 1.5))
            .collect())
    };
    vec![
        // ‖f′‖² ≤ 2 ‖f - c‖ ‖f″‖ for every constant c, sharpest at c = mid-range
        measured("Landau-Kolmogorov interpolation", || {
            let e = worst(family()?.iter().map(|f| {
                let d1 = derivative(f, 1)?.max_abs();
                let d2 = derivative(f, 2)?.max_abs();
                Ok(d1 * d1 / (oscillation(f) * d2))
            }))?;
            Ok(Check::at_most("Landau-Kolmogorov interpolation", e, 1.0))
        }),
        // |f|_{1/2} ≤ sup_d min(osc, ‖f′‖ d) / √d = √(osc ‖f′‖)
        measured("Holder interpolation C^1/2 between C^0 and C^1", || {
            let e = worst(family()?.iter().map(|f| {
                let h = holder_seminorm(f, 0.5, None)?.value;
                Ok(h / (oscillation(f) * derivative(f, 1)?.max_abs()).sqrt())
            }))?;
            Ok(Check::at_most(
                "Holder interpolation C^1/2 between C^0 and C^1",
                e,
                1.0,
            ))
        }),
        measured("arc-chord of circle is pi/2", || {
            let g = grid(128)?;
            let x = PeriodicField::from_fn2(&g, |s| [s.cos(), s.sin()]);
            Ok(Check::at_most(
                "arc-chord of circle is pi/2",
                (arc_chord(&x)? - PI / 2.0).abs(),
                0.01,
            ))
        }),
        measured("Besov norm vanishes on constants", || {
            let g = grid(64)?;
            let v = besov_seminorm(&PeriodicField::constant(&g, 3.0), 0.0)?.value;
            Ok(Check::at_most(
                "Besov norm vanishes on constants",
                v,
                ROUND_OFF,
            ))
        }),
        measured("weighted trace scaling", || {
            let g = grid(64)?;
            let f = PeriodicField::from_fn(&g, |x| x.cos());
            let mut tr = DiagnosticsTrace::new(TraceSpec {
                weighted: vec![WeightedOrder {
                    order: 0.5,
                    weight: 0.25,
                }],
                ..Default::default()
            });
            tr.push(1.0, &f, None)?;
            tr.push(16.0, &f, None)?;
            let w = tr.column("wnorm_0.5_0.25").expect("column exists");
            Ok(Check::at_most(
                "weighted trace scaling",
                (w[1] / w[0] - 2.0).abs(),
                ROUND_OFF,
            ))
        }),
    ]
}

/// Members of the smooth random family used by the Muskat identity.
pub fn muskat_family(grid: &PeriodicGrid, seed: u64) -> Result<PeriodicField> {
    MuskatInitial::RandomBesov {
        amplitude: 0.3,
        slope: 3.0,
        seed,
        max_mode: Some(24.min(grid.n() as u32 / 3)),
    }
    .sample(grid)
}

/// `‖original - reformulated‖_∞ / ‖original‖_∞`.
pub fn muskat_identity_error(f: &PeriodicField, rho0: f64, refine: usize) -> Result<f64> {
    let a = rhs_original(f, rho0, refine)?;
    let b = rhs_reformulated(f, rho0, refine)?.total;
    rel(&a, &b)
}

fn muskat_reformulation(cfg: &VerifyConfig) -> Vec<Check> {
    let mut out = Vec::new();
    for rho0 in [0.0, 1.0] {
        let name = format!("contour = parabolic form, n={}, rho0={rho0}", cfg.n);
        out.push(measured(&name, || {
            let g = grid(cfg.n)?;
            let mut worst_seed = (0.0, 0);
            for i in 0..4 {
                let f = muskat_family(&g, cfg.seed + i)?;
                let e = muskat_identity_error(&f, rho0, 2)?;
                if e > worst_seed.0 {
                    worst_seed = (e, cfg.seed + i);
                }
            }
            let c = Check::at_most(&name, worst_seed.0, IDENTITY_TOL);
            Ok(if c.pass() {
                c
            } else {
                c.with_detail(
                    json!({"family": "random_besov", "seed": worst_seed.1, "n": cfg.n}).to_string(),
                )
            })
        }));
    }
    out.push(measured("constants are stationary", || {
        let g = grid(64)?;
        let r = rhs_reformulated(&PeriodicField::constant(&g, 0.4), 1.0, 2)?.total;
        Ok(Check::at_most(
            "constants are stationary",
            r.max_abs(),
            ROUND_OFF,
        ))
    }));
    out
}

/// Smooth asymmetric test curve.
pub fn asymmetric_curve(grid: &PeriodicGrid) -> PeriodicField {
    PeriodicField::from_fn2(grid, |s| {
        [
            s.cos() + 0.1 * (2.0 * s).cos() + 0.05 * (3.0 * s).sin(),
            1.2 * s.sin() + 0.08 * (2.0 * s).sin(),
        ]
    })
}

fn peskin(cfg: &VerifyConfig) -> Vec<Check> {
    let mut out = Vec::new();
    let laws = [TensionLaw::power(1.5), TensionLaw::exponential(0.5)];
    for law in &laws {
        let tag = law_tag(law);
        let name = format!("boundary integral = Hilbert split, {tag}");
        out.push(measured(&name, || {
            let x = asymmetric_curve(&grid(cfg.n)?);
            Ok(Check::at_most(
                &name,
                two_path_check(&x, law, 2)?,
                IDENTITY_TOL,
            ))
        }));
        let name = format!("half-order decomposition, {tag}");
        out.push(measured(&name, || {
            let x = asymmetric_curve(&grid(cfg.n)?);
            Ok(Check::at_most(
                &name,
                decomposition_check(&x, law, 2)?,
                IDENTITY_TOL,
            ))
        }));
        let name = format!("half-order velocity identity, {tag}");
        out.push(measured(&name, || {
            let x = asymmetric_curve(&grid(cfg.n)?);
            Ok(Check::at_most(
                &name,
                half_order_check(&x, law, 2)?,
                IDENTITY_TOL,
            ))
        }));
        let name = format!("circle is stationary, {tag}");
        out.push(measured(&name, || {
            let x = PeskinInitial::Circle {
                radius: 1.3,
                center: [0.2, -0.4],
            }
            .sample(&grid(cfg.n)?)?;
            Ok(Check::at_most(
                &name,
                rhs_contour(&x, law, 1)?.sup_norm(),
                IDENTITY_TOL,
            ))
        }));
    }
    out.push(measured("Hookean commutator vanishes", || {
        let x = asymmetric_curve(&grid(64)?);
        Ok(Check::at_most(
            "Hookean commutator vanishes",
            remainder_m(&x, &TensionLaw::hookean(), 1)?.sup_norm(),
            ROUND_OFF,
        ))
    }));
    out
}

fn law_tag(law: &TensionLaw) -> String {
    match law {
        TensionLaw::Hookean { .. } => "hookean".into(),
        TensionLaw::Power { beta, .. } => format!("power:{beta}"),
        TensionLaw::Exponential { a } => format!("exponential:{a}"),
        TensionLaw::Tabulated { .. } => "tabulated".into(),
    }
}

fn symbol_tag(sym: &SymbolSpec) -> String {
    serde_json::to_string(sym).unwrap_or_else(|_| format!("{sym:?}"))
}

fn kernels(cfg: &VerifyConfig) -> Vec<Check> {
    let symbols = cfg.kernels.clone().unwrap_or_else(default_symbols);
    let opts = KernelOptions::accurate();
    let mut out = Vec::new();
    for sym in &symbols {
        let tag = symbol_tag(sym);
        let name = format!("exp bound {tag}");
        if let Err(e) = sym.validate() {
            let detail = match e {
                Error::Coercivity {
                    xi,
                    t,
                    min_eig,
                    bound,
                } => {
                    json!({"symbol": sym, "xi": xi, "tau": t, "min_eig": min_eig, "bound": bound})
                }
                other => json!({"symbol": sym, "error": other.to_string()}),
            };
            out.push(
                Check::holds(format!("admissible symbol {tag}"), false)
                    .with_detail(detail.to_string()),
            );
            continue;
        }
        out.push(measured(&name, || {
            let tab = solve_kernel_fourier(sym, 1.0, 0.0, &xi_lattice(6.0, 0.25), &opts)?;
            let r = check_exp_bound(&tab, sym.c0);
            let c = Check::at_most(&name, r.worst_ratio, 1.0 + 1e-3);
            Ok(if c.pass() {
                c
            } else {
                c.with_detail(json!({"symbol": sym, "xi": r.xi, "tau": r.tau}).to_string())
            })
        }));
        let name = format!("derivative constant refinement {tag}");
        out.push(measured(&name, || {
            let r = derivative_bound_stability(sym, 1.0, 1, 6.0, 0.25, &opts)?;
            Ok(Check::at_most(&name, r.relative_change, 0.2))
        }));
    }
    out
}

fn smooth_data(n: usize) -> Result<PeriodicField> {
    Ok(PeriodicField::from_fn(&grid(n)?, |x| {
        0.1 * x.cos() + 0.05 * (2.0 * x).sin()
    }))
}

/// Global error at `t = 1` of IMEX on `A e^{-t} cos x` with a compensating source.
pub fn manufactured_error(n: usize, dt: f64, rho0: f64) -> Result<f64> {
    let g = grid(n)?;
    let amp = 0.1;
    let exact =
        move |g: &PeriodicGrid, t: f64| PeriodicField::from_fn(g, |x| amp * (-t).exp() * x.cos());
    let gs = g.clone();
    let source: crate::evolve::SourceFn = Arc::new(move |t| {
        let f = exact(&gs, t);
        let mut s = f.scaled(-1.0);
        s.axpy(-1.0, &rhs_reformulated(&f, rho0, 2)?.total)?;
        Ok(s)
    });
    let f0 = exact(&g, 0.0);
    let cfg = SchemeConfig::imex(dt, 1.0);
    let model = MuskatModel::new(rho0, &cfg, &f0)?.with_source(source);
    let r = run(&model, &f0, &cfg, &RunOptions::default())?;
    if let Some(reason) = r.aborted {
        return Err(Error::Aborted { t: r.t, reason });
    }
    r.state.max_diff(&exact(&g, 1.0))
}

fn evolve(cfg: &VerifyConfig) -> Vec<Check> {
    let _ = cfg;
    vec![
        measured("IMEX agrees with RK4 over t=0.01", || {
            let f0 = smooth_data(32)?;
            let imex = SchemeConfig::imex(1e-4, 0.01);
            let rk4 = SchemeConfig::rk4(2e-4, 0.01);
            let a = run(
                &MuskatModel::new(1.0, &imex, &f0)?,
                &f0,
                &imex,
                &RunOptions::default(),
            )?;
            let b = run(
                &MuskatModel::new(1.0, &rk4, &f0)?,
                &f0,
                &rk4,
                &RunOptions::default(),
            )?;
            Ok(Check::at_most(
                "IMEX agrees with RK4 over t=0.01",
                a.state.max_diff(&b.state)?,
                1e-4,
            ))
        }),
        measured("IMEX first order on manufactured solution", || {
            let e1 = manufactured_error(32, 0.02, 0.0)?;
            let e2 = manufactured_error(32, 0.01, 0.0)?;
            let slope = (e1 / e2).log2();
            Ok(Check::at_most(
                "IMEX first order on manufactured solution",
                (slope - 1.0).abs(),
                0.2,
            )
            .with_detail(json!({"slope": slope}).to_string()))
        }),
        measured("forced halving reproduces half-step run", || {
            let f0 = smooth_data(32)?;
            let cfg = SchemeConfig::imex(0.01, 0.01);
            let model = MuskatModel::new(0.0, &cfg, &f0)?;
            let forced = run(
                &model,
                &f0,
                &cfg,
                &RunOptions {
                    force_halving_at: Some(0),
                    ..Default::default()
                },
            )?;
            let native = run(
                &model,
                &f0,
                &SchemeConfig::imex(0.005, 0.01),
                &RunOptions::default(),
            )?;
            Ok(Check::at_most(
                "forced halving reproduces half-step run",
                forced.state.max_diff(&native.state)?,
                1e-6,
            ))
        }),
        measured("accepted schedule replays the run", || {
            let f0 = smooth_data(32)?;
            let cfg = SchemeConfig::imex(0.01, 0.05);
            let model = MuskatModel::new(1.0, &cfg, &f0)?;
            let first = run(
                &model,
                &f0,
                &cfg,
                &RunOptions {
                    force_halving_at: Some(1),
                    ..Default::default()
                },
            )?;
            let replay = run(
                &model,
                &f0,
                &cfg,
                &RunOptions {
                    schedule: Some(first.schedule()),
                    ..Default::default()
                },
            )?;
            Ok(Check::at_most(
                "accepted schedule replays the run",
                first.state.max_diff(&replay.state)?,
                ROUND_OFF,
            ))
        }),
        measured("linear decay rate of one IMEX step", || {
            let (eps, dt) = (1e-6, 1e-4);
            let f = PeriodicField::from_fn(&grid(32)?, |x| eps * x.cos());
            let g = step_imex_muskat(&f, dt, min_coefficient(&f)?, 0.0, 2, false, None)?;
            let c_eff = -(2.0 * g.coefficients(0)[1].re / eps).ln() / dt;
            Ok(Check::at_most(
                "linear decay rate of one IMEX step",
                (c_eff - 1.0).abs(),
                1e-4,
            ))
        }),
        measured("Picard iterates of zero data vanish", || {
            let z = PeriodicField::zeros(&grid(32)?, 1);
            let r = picard_iterate(
                &z,
                0.0,
                2,
                &PicardConfig {
                    steps: 8,
                    ..Default::default()
                },
            )?;
            let m = r
                .iterates
                .iter()
                .flatten()
                .map(|f| f.max_abs())
                .fold(0.0, f64::max);
            Ok(Check::at_most(
                "Picard iterates of zero data vanish",
                m,
                0.0,
            ))
        }),
    ]
}

/// `f(· - x_k)` for a grid offset `k`: an exact index rotation.
fn roll(f: &PeriodicField, k: usize) -> Result<PeriodicField> {
    let n = f.n();
    let values = (0..f.channels())
        .flat_map(|c| (0..n).map(move |j| (c, (j + n - k) % n)))
        .map(|(c, j)| f.get(c, j))
        .collect();
    PeriodicField::from_values(f.grid(), f.channels(), values)
}

/// `f(-x)` on the grid.
fn reflect(f: &PeriodicField) -> Result<PeriodicField> {
    let n = f.n();
    let values = (0..f.channels())
        .flat_map(|c| (0..n).map(move |j| (c, (n - j) % n)))
        .map(|(c, j)| f.get(c, j))
        .collect();
    PeriodicField::from_values(f.grid(), f.channels(), values)
}

fn map_points(
    x: &PeriodicField,
    m: impl Fn(Vector2<f64>) -> Vector2<f64>,
) -> Result<PeriodicField> {
    let pts: Vec<Vector2<f64>> = (0..x.n())
        .map(|j| m(Vector2::new(x.get(0, j), x.get(1, j))))
        .collect();
    PeriodicField::from_channels(
        x.grid(),
        vec![
            pts.iter().map(|p| p[0]).collect(),
            pts.iter().map(|p| p[1]).collect(),
        ],
    )
}

fn equivariance(cfg: &VerifyConfig) -> Vec<Check> {
    let muskat = |rho0: f64| -> Result<(PeriodicField, PeriodicField)> {
        let f = muskat_family(&grid(64)?, cfg.seed)?;
        let r = rhs_reformulated(&f, rho0, 2)?.total;
        Ok((f, r))
    };
    let curve = || asymmetric_curve(&grid(64).expect("valid grid"));
    let law = TensionLaw::power(1.5);
    vec![
        measured("Muskat translation", || {
            let (f, r) = muskat(1.0)?;
            let rs = rhs_reformulated(&roll(&f, 5)?, 1.0, 2)?.total;
            Ok(Check::at_most(
                "Muskat translation",
                rel(&rs, &roll(&r, 5)?)?,
                EQUIVARIANCE_TOL,
            ))
        }),
        measured("Muskat reflection", || {
            let (f, r) = muskat(1.0)?;
            let rs = rhs_reformulated(&reflect(&f)?, 1.0, 2)?.total;
            Ok(Check::at_most(
                "Muskat reflection",
                rel(&rs, &reflect(&r)?)?,
                EQUIVARIANCE_TOL,
            ))
        }),
        measured("Muskat vertical shift", || {
            let (f, r) = muskat(1.0)?;
            let rs = rhs_reformulated(&f.map(|v| v + 0.7), 1.0, 2)?.total;
            Ok(Check::at_most(
                "Muskat vertical shift",
                rel(&rs, &r)?,
                EQUIVARIANCE_TOL,
            ))
        }),
        measured("Peskin rotation", || {
            let x = curve();
            let rot = Rotation2::new(0.7);
            let u = rhs_contour(&x, &law, 2)?;
            let ur = rhs_contour(&map_points(&x, |p| rot * p)?, &law, 2)?;
            Ok(Check::at_most(
                "Peskin rotation",
                rel(&ur, &map_points(&u, |p| rot * p)?)?,
                EQUIVARIANCE_TOL,
            ))
        }),
        measured("Peskin translation", || {
            let x = curve();
            let u = rhs_contour(&x, &law, 2)?;
            let ut = rhs_contour(&map_points(&x, |p| p + Vector2::new(3.0, -1.5))?, &law, 2)?;
            Ok(Check::at_most(
                "Peskin translation",
                rel(&ut, &u)?,
                EQUIVARIANCE_TOL,
            ))
        }),
        measured("Peskin parameter shift", || {
            let x = curve();
            let u = rhs_contour(&x, &law, 2)?;
            let us = rhs_contour(&roll(&x, 9)?, &law, 2)?;
            Ok(Check::at_most(
                "Peskin parameter shift",
                rel(&us, &roll(&u, 9)?)?,
                EQUIVARIANCE_TOL,
            ))
        }),
        measured("Peskin orientation reversal", || {
            let x = curve();
            let u = rhs_contour(&x, &law, 2)?;
            let ur = rhs_contour(&reflect(&x)?, &law, 2)?;
            Ok(Check::at_most(
                "Peskin orientation reversal",
                rel(&ur, &reflect(&u)?)?,
                EQUIVARIANCE_TOL,
            ))
        }),
        measured("Hookean Peskin scaling", || {
            let x = curve();
            let hook = TensionLaw::hookean();
            let u = rhs_contour(&x, &hook, 2)?;
            let us = rhs_contour(&x.scaled(2.5), &hook, 2)?;
            Ok(Check::at_most(
                "Hookean Peskin scaling",
                rel(&us, &u.scaled(2.5))?,
                EQUIVARIANCE_TOL,
            ))
        }),
    ]
}

fn determinism(cfg: &VerifyConfig) -> Vec<Check> {
    vec![
        measured("seeded initial data repeat", || {
            let g = grid(64)?;
            let a = muskat_family(&g, cfg.seed)?;
            let b = muskat_family(&g, cfg.seed)?;
            let c = muskat_family(&g, cfg.seed + 1)?;
            Ok(Check::holds(
                "seeded initial data repeat",
                a.values() == b.values() && a.values() != c.values(),
            ))
        }),
        measured("Muskat trace CSV is bit-identical", || {
            let f0 = smooth_data(32)?;
            let cfg = SchemeConfig::imex(0.01, 0.1);
            let opts = RunOptions {
                trace: TraceSpec {
                    holder_orders: vec![0.5, 2.0],
                    ..Default::default()
                },
                every_n_steps: 1,
                ..Default::default()
            };
            let model = MuskatModel::new(1.0, &cfg, &f0)?;
            let a = run(&model, &f0, &cfg, &opts)?.trace.to_csv();
            let b = run(&model, &f0, &cfg, &opts)?.trace.to_csv();
            Ok(Check::holds("Muskat trace CSV is bit-identical", a == b))
        }),
        measured("Peskin run is bit-identical", || {
            let x0 = asymmetric_curve(&grid(32)?);
            let cfg = SchemeConfig::imex(0.05, 0.25);
            let model = PeskinModel::new(TensionLaw::power(1.5), &cfg, &x0)?;
            let a = run(&model, &x0, &cfg, &RunOptions::default())?.state;
            let b = run(&model, &x0, &cfg, &RunOptions::default())?.state;
            Ok(Check::holds(
                "Peskin run is bit-identical",
                a.values() == b.values(),
            ))
        }),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
        }
        assert!("nope".parse::<Suite>().is_err());
    }

    #[test]
    fn spectral_suite_passes() {
        let r = run_suite(Suite::Spectral, &VerifyConfig::default());
        assert!(r.pass(), "{:?}", r.failures().collect::<Vec<_>>());
    }

    #[test]
    fn wrong_coercivity_constant_is_reported() {
        let mut heat = SymbolSpec::heat();
        heat.c0 = 1.5;
        let cfg = VerifyConfig {
            kernels: Some(vec![heat]),
            ..Default::default()
        };
        let r = run_suite(Suite::Kernels, &cfg);
        assert!(!r.pass());
        let detail: serde_json::Value =
            serde_json::from_str(r.checks[0].detail.as_deref().unwrap()).unwrap();
        assert!(detail["xi"].is_number() && detail["tau"].is_number());
    }

    #[test]
    fn config_rejects_unknown_keys() {
        assert!(serde_json::from_str::<VerifyConfig>(r#"{"seed":1,"bogus":2}"#).is_err());
        let c: VerifyConfig = serde_json::from_str("{}").unwrap();
        assert_eq!(c, VerifyConfig::default());
    }
}
