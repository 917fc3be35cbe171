use std::fmt::Write as _;
use std::io::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};

use super::geometry::{arc_chord, q_at};
use super::holder::{derivative_sup_norm, seminorm};
use crate::error::{Error, Result};
use crate::spectral::PeriodicField;

/// A time-weighted seminorm `t^w ‖f‖_{Ċ^a}`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct WeightedOrder {
    pub order: f64,
    pub weight: f64,
}

/// Which columns a trace records. Fixed for the lifetime of a trace.
#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TraceSpec {
    #[serde(default)]
    pub holder_orders: Vec<f64>,
    #[serde(default)]
    pub weighted: Vec<WeightedOrder>,
    #[serde(default)]
    pub arc_chord: bool,
    /// Exponent `ε` of the chord-slope quantity; `None` omits the column.
    #[serde(default)]
    pub q_eps: Option<f64>,
    #[serde(default)]
    pub projection: bool,
}

#[derive(Clone, Debug, PartialEq)]
pub struct TraceRecord {
    pub t: f64,
    pub linf: f64,
    pub lip: f64,
    pub holder: Vec<f64>,
    pub wnorm: Vec<f64>,
    pub arcchord: Option<f64>,
    pub q: Option<f64>,
    pub z0: Option<[f64; 2]>,
    pub z1: Option<[f64; 2]>,
}

impl TraceRecord {
    fn all_finite(&self) -> bool {
        let opt = |v: Option<f64>| v.is_none_or(f64::is_finite);
        let opt2 = |v: Option<[f64; 2]>| v.is_none_or(|z| z.iter().all(|c| c.is_finite()));
        self.t.is_finite()
            && self.linf.is_finite()
            && self.lip.is_finite()
            && self.holder.iter().all(|v| v.is_finite())
            && self.wnorm.iter().all(|v| v.is_finite())
            && opt(self.arcchord)
            && opt(self.q)
            && opt2(self.z0)
            && opt2(self.z1)
    }
}

/// Append-only time series of diagnostics with strictly increasing `t`.
#[derive(Clone, Debug)]
pub struct DiagnosticsTrace {
    spec: TraceSpec,
    records: Vec<TraceRecord>,
    reference: Option<PeriodicField>,
    q_running: f64,
}

/// CSV number format: 17 significant digits, `.` decimal.
pub fn format_csv_number(v: f64) -> String {
    format!("{v:.16e}")
}

impl DiagnosticsTrace {
    pub fn new(spec: TraceSpec) -> Self {
        Self {
            spec,
            records: Vec::new(),
            reference: None,
            q_running: 0.0,
        }
    }

    pub fn spec(&self) -> &TraceSpec {
        &self.spec
    }

    pub fn records(&self) -> &[TraceRecord] {
        &self.records
    }

    pub fn last(&self) -> Option<&TraceRecord> {
        self.records.last()
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    /// Appends the record for time `t`. `projection` supplies `(z₀, z₁)` when the
    /// spec asks for projection columns.
    pub fn push(
        &mut self,
        t: f64,
        f: &PeriodicField,
        projection: Option<([f64; 2], [f64; 2])>,
    ) -> Result<&TraceRecord> {
        if let Some(prev) = self.records.last() {
            if t <= prev.t {
                return Err(Error::arg(
                    "t",
                    format!("time {t} does not exceed previous record {}", prev.t),
                ));
            }
        }
        let holder = self
            .spec
            .holder_orders
            .iter()
            .map(|&a| seminorm(f, a))
            .collect::<Result<Vec<_>>>()?;
        let wnorm = self
            .spec
            .weighted
            .iter()
            .map(|w| Ok(t.powf(w.weight) * seminorm(f, w.order)?))
            .collect::<Result<Vec<_>>>()?;
        let arcchord = if self.spec.arc_chord {
            Some(arc_chord(f)?)
        } else {
            None
        };
        let q = match self.spec.q_eps {
            None => None,
            Some(eps) => match &self.reference {
                None => {
                    self.reference = Some(f.clone());
                    Some(0.0)
                }
                Some(x0) => {
                    if t > 0.0 {
                        self.q_running = self.q_running.max(q_at(x0, f, t, eps)?);
                    }
                    Some(self.q_running)
                }
            },
        };
        let (z0, z1) = if self.spec.projection {
            let (a, b) = projection
                .ok_or_else(|| Error::arg("projection", "trace expects projection coefficients"))?;
            (Some(a), Some(b))
        } else {
            (None, None)
        };
        let record = TraceRecord {
            t,
            linf: f.sup_norm(),
            lip: derivative_sup_norm(f, 1)?,
            holder,
            wnorm,
            arcchord,
            q,
            z0,
            z1,
        };
        if !record.all_finite() {
            return Err(Error::NonFinite("diagnostics record"));
        }
        self.records.push(record);
        Ok(self.records.last().expect("just pushed"))
    }

    pub fn header(&self) -> Vec<String> {
        let mut h = vec!["t".to_string(), "linf".into(), "lip".into()];
        h.extend(
            self.spec
                .holder_orders
                .iter()
                .map(|a| format!("holder_{a}")),
        );
        h.extend(
            self.spec
                .weighted
                .iter()
                .map(|w| format!("wnorm_{}_{}", w.order, w.weight)),
        );
        if self.spec.arc_chord {
            h.push("arcchord".into());
        }
        if self.spec.q_eps.is_some() {
            h.push("q".into());
        }
        if self.spec.projection {
            h.extend(["z0_re", "z0_im", "z1_re", "z1_im"].map(String::from));
        }
        h
    }

    fn row(r: &TraceRecord) -> Vec<f64> {
        let mut v = vec![r.t, r.linf, r.lip];
        v.extend(&r.holder);
        v.extend(&r.wnorm);
        v.extend(r.arcchord);
        v.extend(r.q);
        if let (Some(a), Some(b)) = (r.z0, r.z1) {
            v.extend([a[0], a[1], b[0], b[1]]);
        }
        v
    }

    /// Column values by header name.
    pub fn column(&self, name: &str) -> Option<Vec<f64>> {
        let idx = self.header().iter().position(|h| h == name)?;
        Some(self.records.iter().map(|r| Self::row(r)[idx]).collect())
    }

    pub fn to_csv(&self) -> String {
        let mut out = self.header().join(",");
        out.push('\n');
        for r in &self.records {
            let cells: Vec<String> = Self::row(r).into_iter().map(format_csv_number).collect();
            let _ = writeln!(out, "{}", cells.join(","));
        }
        out
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut file = std::fs::File::create(path)?;
        file.write_all(self.to_csv().as_bytes())?;
        Ok(())
    }
}

/// Appends a record without projection data.
pub fn weighted_trace_update(
    trace: &mut DiagnosticsTrace,
    t: f64,
    f: &PeriodicField,
) -> Result<()> {
    trace.push(t, f, None).map(|_| ())
}
