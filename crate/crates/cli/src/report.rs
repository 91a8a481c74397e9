//! Report rows, the inequality audit, and JSON/CSV emission.

use std::io::Write;

use lsilab::{Direction, TargetConstant};
use serde::ser::{Serialize, SerializeStruct, Serializer};
use serde_json::value::RawValue;

use crate::CliError;

pub const CSV_HEADER: [&str; 9] = ["experiment", "instance", "constant", "method", "value", "direction", "pass", "seed", "wall_ms"];

#[derive(Debug, Clone, PartialEq)]
pub struct ReportRow {
    pub experiment: String,
    /// Grid parameters of the instance, as `key=value` pairs joined by commas.
    pub instance: String,
    /// `C_P`, `C_LS`, `C_T2`, or a diagnostic quantity name.
    pub constant: String,
    /// Formula id or estimator id.
    pub method: String,
    /// `None` on failed rows.
    pub value: Option<f64>,
    pub log_value: Option<f64>,
    pub direction: Direction,
    /// `None` when no inequality applies to the row.
    pub pass: Option<bool>,
    pub seed: u64,
    pub wall_ms: f64,
    pub error: Option<String>,
    pub warning: Option<String>,
}

impl ReportRow {
    pub fn target(&self) -> Option<TargetConstant> {
        [TargetConstant::Poincare, TargetConstant::LogSobolev, TargetConstant::Transport]
            .into_iter()
            .find(|c| c.as_str() == self.constant)
    }

    fn is_lower_side(&self) -> bool {
        matches!(self.direction, Direction::Lower | Direction::Estimate)
    }

    fn is_upper_side(&self) -> bool {
        matches!(self.direction, Direction::Upper | Direction::Estimate)
    }
}

/// Sets `pass` on every row of one instance.
///
/// A pair `(a, b)` is checked when `a` is a lower bound or estimate, `b` is an
/// upper bound or estimate, they are not both estimates, and `a`'s constant is
/// always below `b`'s (`C_P ≤ C_LS`, `C_T2 ≤ C_LS`, or equal). The check is
/// `a.value ≤ b.value·(1 + tol)`. A row fails if any of its checks fails, or
/// if it carries an error.
pub fn audit(rows: &mut [ReportRow], tol: f64) {
    let mut flags: Vec<Option<bool>> = rows.iter().map(|r| r.error.as_ref().map(|_| false)).collect();
    for i in 0..rows.len() {
        for j in 0..rows.len() {
            let (a, b) = (&rows[i], &rows[j]);
            if i == j || !a.is_lower_side() || !b.is_upper_side() {
                continue;
            }
            if a.direction == Direction::Estimate && b.direction == Direction::Estimate {
                continue;
            }
            let (Some(ca), Some(cb), Some(va), Some(vb)) = (a.target(), b.target(), a.value, b.value) else {
                continue;
            };
            if !TargetConstant::always_below(ca, cb) {
                continue;
            }
            let ok = vb == f64::INFINITY || va <= vb * (1.0 + tol);
            for k in [i, j] {
                flags[k] = Some(flags[k].unwrap_or(true) && ok);
            }
        }
    }
    for (row, flag) in rows.iter_mut().zip(flags) {
        row.pass = flag;
    }
}

/// Shortest text that parses back to the same `f64` in the instance key.
pub fn param_text(v: f64) -> String {
    if v == f64::INFINITY {
        "inf".into()
    } else {
        format!("{v}")
    }
}

/// 17 significant digits, `inf`/`-inf` for infinities.
pub fn number_text(v: f64) -> String {
    if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else if v.is_nan() {
        "nan".into()
    } else {
        format!("{v:.16e}")
    }
}

struct Num(Option<f64>);

impl Serialize for Num {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        match self.0 {
            None => s.serialize_none(),
            Some(v) if v.is_finite() => {
                let raw = RawValue::from_string(number_text(v)).map_err(serde::ser::Error::custom)?;
                raw.serialize(s)
            }
            Some(v) => s.serialize_str(&number_text(v)),
        }
    }
}

impl Serialize for ReportRow {
    fn serialize<S: Serializer>(&self, s: S) -> Result<S::Ok, S::Error> {
        let mut st = s.serialize_struct("ReportRow", 12)?;
        st.serialize_field("experiment", &self.experiment)?;
        st.serialize_field("instance", &self.instance)?;
        st.serialize_field("constant", &self.constant)?;
        st.serialize_field("method", &self.method)?;
        st.serialize_field("value", &Num(self.value))?;
        st.serialize_field("log_value", &Num(self.log_value))?;
        st.serialize_field("direction", self.direction.as_str())?;
        st.serialize_field("pass", &self.pass)?;
        st.serialize_field("seed", &self.seed)?;
        st.serialize_field("wall_ms", &self.wall_ms)?;
        st.serialize_field("error", &self.error)?;
        st.serialize_field("warning", &self.warning)?;
        st.end()
    }
}

pub fn write_json<W: Write>(rows: &[ReportRow], mut out: W) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut out, rows).map_err(|e| CliError::Serialize(e.to_string()))?;
    writeln!(out)?;
    Ok(())
}

pub fn write_csv<W: Write>(rows: &[ReportRow], out: W) -> Result<(), CliError> {
    let mut w = csv::Writer::from_writer(out);
    let ser = |e: csv::Error| CliError::Serialize(e.to_string());
    w.write_record(CSV_HEADER).map_err(ser)?;
    for r in rows {
        let pass = r.pass.map(|p| p.to_string()).unwrap_or_default();
        w.write_record([
            r.experiment.as_str(),
            &r.instance,
            &r.constant,
            &r.method,
            &r.value.map(number_text).unwrap_or_default(),
            r.direction.as_str(),
            &pass,
            &r.seed.to_string(),
            &format!("{:.3}", r.wall_ms),
        ])
        .map_err(ser)?;
    }
    w.flush()?;
    Ok(())
}

/// Plot table: one column per instance parameter, `r2_over_t` when both
/// `R` and `t` are present, then constant, method, value and log value.
pub fn write_plot_csv<W: Write>(rows: &[ReportRow], out: W) -> Result<(), CliError> {
    let mut keys: Vec<String> = Vec::new();
    let parsed: Vec<Vec<(String, String)>> = rows.iter().map(|r| parse_instance(&r.instance)).collect();
    for params in &parsed {
        for (k, _) in params {
            if !keys.contains(k) {
                keys.push(k.clone());
            }
        }
    }
    let with_ratio = keys.iter().any(|k| k == "R") && keys.iter().any(|k| k == "t");
    let mut header = keys.clone();
    if with_ratio {
        header.push("r2_over_t".into());
    }
    header.extend(["constant", "method", "value", "log_value"].map(String::from));

    let mut w = csv::Writer::from_writer(out);
    let ser = |e: csv::Error| CliError::Serialize(e.to_string());
    w.write_record(&header).map_err(ser)?;
    for (r, params) in rows.iter().zip(&parsed) {
        let lookup = |k: &str| params.iter().find(|(pk, _)| pk == k).map(|(_, v)| v.clone());
        let mut rec: Vec<String> = keys.iter().map(|k| lookup(k).unwrap_or_default()).collect();
        if with_ratio {
            let ratio = match (lookup("R").and_then(|v| v.parse::<f64>().ok()), lookup("t").and_then(|v| v.parse::<f64>().ok())) {
                (Some(r), Some(t)) => number_text(r * r / t),
                _ => String::new(),
            };
            rec.push(ratio);
        }
        rec.push(r.constant.clone());
        rec.push(r.method.clone());
        rec.push(r.value.map(number_text).unwrap_or_default());
        rec.push(r.log_value.map(number_text).unwrap_or_default());
        w.write_record(&rec).map_err(ser)?;
    }
    w.flush()?;
    Ok(())
}

fn parse_instance(s: &str) -> Vec<(String, String)> {
    s.split(',')
        .filter_map(|kv| kv.split_once('='))
        .map(|(k, v)| (k.to_string(), v.to_string()))
        .collect()
}

fn parse_number(v: &serde_json::Value, field: &str) -> Result<Option<f64>, CliError> {
    let bad = || CliError::Serialize(format!("field `{field}` is not a number"));
    match v {
        serde_json::Value::Null => Ok(None),
        serde_json::Value::Number(n) => n.as_f64().map(Some).ok_or_else(bad),
        serde_json::Value::String(s) => match s.as_str() {
            "inf" => Ok(Some(f64::INFINITY)),
            "-inf" => Ok(Some(f64::NEG_INFINITY)),
            "nan" => Ok(Some(f64::NAN)),
            _ => Err(bad()),
        },
        _ => Err(bad()),
    }
}

/// Parses a JSON report written by [`write_json`].
pub fn read_json(text: &str) -> Result<Vec<ReportRow>, CliError> {
    let values: Vec<serde_json::Map<String, serde_json::Value>> =
        serde_json::from_str(text).map_err(|e| CliError::Serialize(e.to_string()))?;
    values
        .into_iter()
        .map(|m| {
            let text = |k: &str| -> Result<String, CliError> {
                m.get(k)
                    .and_then(|v| v.as_str())
                    .map(String::from)
                    .ok_or_else(|| CliError::Serialize(format!("missing `{k}`")))
            };
            let opt_text = |k: &str| m.get(k).and_then(|v| v.as_str()).map(String::from);
            let direction = match text("direction")?.as_str() {
                "upper" => Direction::Upper,
                "lower" => Direction::Lower,
                "estimate" => Direction::Estimate,
                other => return Err(CliError::Serialize(format!("unknown direction `{other}`"))),
            };
            Ok(ReportRow {
                experiment: text("experiment")?,
                instance: text("instance")?,
                constant: text("constant")?,
                method: text("method")?,
                value: parse_number(m.get("value").unwrap_or(&serde_json::Value::Null), "value")?,
                log_value: parse_number(m.get("log_value").unwrap_or(&serde_json::Value::Null), "log_value")?,
                direction,
                pass: m.get("pass").and_then(|v| v.as_bool()),
                seed: m.get("seed").and_then(|v| v.as_u64()).unwrap_or(0),
                wall_ms: m.get("wall_ms").and_then(|v| v.as_f64()).unwrap_or(0.0),
                error: opt_text("error"),
                warning: opt_text("warning"),
            })
        })
        .collect()
}
