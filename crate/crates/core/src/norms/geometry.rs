use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::spectral::PeriodicField;

/// Chords shorter than this between distinct nodes count as self-intersection.
pub const DEGENERATE_CHORD: f64 = 1e-14;

#[derive(Clone, Debug, PartialEq)]
pub struct ArcChordReport {
    pub value: f64,
    pub x1: f64,
    pub x2: f64,
}

fn require_curve(x: &PeriodicField) -> Result<()> {
    if x.channels() != 2 {
        return Err(Error::arg(
            "X",
            format!("expected 2 channels, got {}", x.channels()),
        ));
    }
    Ok(())
}

/// `Θ = max |x₁ - x₂|_torus / |X(x₁) - X(x₂)|` over all node pairs.
pub fn arc_chord_report(x: &PeriodicField) -> Result<ArcChordReport> {
    require_curve(x)?;
    let n = x.n();
    let grid = x.grid();
    let rows: Vec<Result<(f64, usize, usize)>> = (0..n)
        .into_par_iter()
        .map(|i| {
            let p = x.point(i);
            let mut best = (0.0, i, i);
            for k in (i + 1)..n {
                let q = x.point(k);
                let chord = ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt();
                let (a, b) = (grid.node(i), grid.node(k));
                if chord < DEGENERATE_CHORD {
                    return Err(Error::DegenerateChord {
                        x1: a,
                        x2: b,
                        chord,
                    });
                }
                let r = grid.torus_distance(a, b) / chord;
                if r > best.0 {
                    best = (r, i, k);
                }
            }
            Ok(best)
        })
        .collect();
    let mut best = (0.0, 0, 0);
    for r in rows {
        let r = r?;
        if r.0 > best.0 {
            best = r;
        }
    }
    Ok(ArcChordReport {
        value: best.0,
        x1: grid.node(best.1),
        x2: grid.node(best.2),
    })
}

pub fn arc_chord(x: &PeriodicField) -> Result<f64> {
    Ok(arc_chord_report(x)?.value)
}

/// Time-weighted chord-slope deviation
/// `sup (|α|/t)^ε |1/|Δ_α X(t,x)| - 1/|Δ_α X(0,x)||` over records with `t > 0`.
///
/// `records[0]` is the reference state; its time is ignored.
pub fn q_quantity(records: &[(f64, &PeriodicField)], eps: f64) -> Result<f64> {
    if records.len() < 2 {
        return Err(Error::arg("records", "need at least two time records"));
    }
    let x0 = records[0].1;
    require_curve(x0)?;
    let mut q: f64 = 0.0;
    for &(t, xt) in &records[1..] {
        x0.compatible(xt)?;
        if t > 0.0 {
            q = q.max(q_at(x0, xt, t, eps)?);
        }
    }
    Ok(q)
}

/// One record's contribution to [`q_quantity`].
pub fn q_at(x0: &PeriodicField, xt: &PeriodicField, t: f64, eps: f64) -> Result<f64> {
    let n = x0.n();
    let grid = x0.grid();
    let h = grid.spacing();
    let rows: Vec<Result<f64>> = (1..=n / 2)
        .into_par_iter()
        .map(|m| {
            let alpha = m as f64 * h;
            let weight = (alpha / t).powf(eps);
            let mut best: f64 = 0.0;
            for i in 0..n {
                let k = (i + n - m) % n;
                let slope = |f: &PeriodicField| {
                    let (p, q) = (f.point(i), f.point(k));
                    ((p[0] - q[0]).powi(2) + (p[1] - q[1]).powi(2)).sqrt() / alpha
                };
                let (s0, st) = (slope(x0), slope(xt));
                if s0 * alpha < DEGENERATE_CHORD || st * alpha < DEGENERATE_CHORD {
                    return Err(Error::DegenerateChord {
                        x1: grid.node(i),
                        x2: grid.node(k),
                        chord: (s0.min(st)) * alpha,
                    });
                }
                best = best.max(weight * (1.0 / st - 1.0 / s0).abs());
            }
            Ok(best)
        })
        .collect();
    let mut q: f64 = 0.0;
    for r in rows {
        q = q.max(r?);
    }
    Ok(q)
}
