//! State snapshots as CSV: a node column followed by one column per channel.

use std::path::Path;

use nonlocalflow::norms::{
    arc_chord, besov_seminorm, derivative_sup_norm, format_csv_number, seminorm,
};
use nonlocalflow::{PeriodicField, PeriodicGrid};
use serde_json::{json, Map, Value};

use crate::CliError;

fn header(channels: usize) -> Vec<String> {
    let mut h = vec!["x".to_string()];
    if channels == 1 {
        h.push("f".into());
    } else {
        h.extend((1..=channels).map(|c| format!("x{c}")));
    }
    h
}

pub fn write_state(path: &Path, f: &PeriodicField) -> Result<(), CliError> {
    let mut w = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .from_path(path)
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))?;
    let io = |e: csv::Error| CliError::Io(format!("{}: {e}", path.display()));
    w.write_record(header(f.channels())).map_err(io)?;
    for j in 0..f.n() {
        let mut row = vec![format_csv_number(f.grid().node(j))];
        row.extend((0..f.channels()).map(|c| format_csv_number(f.get(c, j))));
        w.write_record(&row).map_err(io)?;
    }
    w.flush()
        .map_err(|e| CliError::Io(format!("{}: {e}", path.display())))
}

/// Reads a snapshot; the period is recovered as `n` times the node spacing.
pub fn read_state(path: &Path) -> Result<PeriodicField, CliError> {
    let bad = |msg: String| CliError::Config(format!("{}: {msg}", path.display()));
    let mut r = csv::Reader::from_path(path).map_err(|e| bad(e.to_string()))?;
    let channels = r
        .headers()
        .map_err(|e| bad(e.to_string()))?
        .len()
        .saturating_sub(1);
    if !(channels == 1 || channels == 2) {
        return Err(bad(
            "expected a node column and one or two value columns".into()
        ));
    }
    let mut nodes = Vec::new();
    let mut cols = vec![Vec::new(); channels];
    for rec in r.records() {
        let rec = rec.map_err(|e| bad(e.to_string()))?;
        let parse = |i: usize| -> Result<f64, CliError> {
            rec.get(i)
                .and_then(|s| s.trim().parse::<f64>().ok())
                .ok_or_else(|| bad(format!("unparsable cell in column {i}")))
        };
        nodes.push(parse(0)?);
        for (c, col) in cols.iter_mut().enumerate() {
            col.push(parse(c + 1)?);
        }
    }
    if nodes.len() < 2 {
        return Err(bad("need at least two rows".into()));
    }
    let n = nodes.len();
    let grid =
        PeriodicGrid::new(n, n as f64 * (nodes[1] - nodes[0])).map_err(|e| bad(e.to_string()))?;
    PeriodicField::from_channels(&grid, cols).map_err(|e| bad(e.to_string()))
}

/// One-shot norms of a snapshot: sup, Lipschitz, the requested Hölder orders,
/// the `Ḃ⁰_{∞,∞}` norm and, for curves, the arc-chord constant.
pub fn norms_report(f: &PeriodicField, orders: &[f64]) -> Result<Value, CliError> {
    let err = |e: nonlocalflow::Error| CliError::Config(e.to_string());
    let mut out = Map::new();
    out.insert("n".into(), json!(f.n()));
    out.insert("period".into(), json!(f.grid().period()));
    out.insert("linf".into(), json!(f.sup_norm()));
    out.insert("lip".into(), json!(derivative_sup_norm(f, 1).map_err(err)?));
    for &a in orders {
        out.insert(format!("holder_{a}"), json!(seminorm(f, a).map_err(err)?));
    }
    if f.channels() == 1 {
        out.insert(
            "besov_0".into(),
            json!(besov_seminorm(f, 0.0).map_err(err)?.value),
        );
    } else {
        out.insert("arcchord".into(), json!(arc_chord(f).map_err(err)?));
    }
    Ok(Value::Object(out))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn snapshot_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let g = PeriodicGrid::new(16, 3.0).unwrap();
        let f = PeriodicField::from_fn2(&g, |x| [x.sin() / 3.0, 1e-300 + x.cos()]);
        let p = dir.path().join("s.csv");
        write_state(&p, &f).unwrap();
        let back = read_state(&p).unwrap();
        assert_eq!(back.values(), f.values());
        assert!((back.grid().period() - 3.0).abs() < 1e-14);
    }
}
