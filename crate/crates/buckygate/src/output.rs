//! Serialization: trajectory files, sweep tables, gate-time reports, and
//! per-figure CSV data.
//!
//! All numbers are written with Rust's shortest-round-trip float formatting,
//! so re-reading a file recovers the exact binary values and identical runs
//! produce byte-identical files. CSV is the canonical format; JSON mirrors
//! the same columns.

use std::fmt::Write as _;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::explore::SweepRecord;
use crate::observables::{concurrence, phase_series};
use crate::propagate::Trajectory;
use crate::quantities::PhysicalParams;

/// Output file format selector.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum OutputFormat {
    Csv,
    Json,
}

impl OutputFormat {
    pub fn extension(self) -> &'static str {
        match self {
            OutputFormat::Csv => "csv",
            OutputFormat::Json => "json",
        }
    }
}

impl FromStr for OutputFormat {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "csv" => Ok(OutputFormat::Csv),
            "json" => Ok(OutputFormat::Json),
            other => Err(Error::Config(format!(
                "format: expected \"csv\" or \"json\", got {other:?}"
            ))),
        }
    }
}

impl std::fmt::Display for OutputFormat {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.extension())
    }
}

/// Column layout of a trajectory file.
pub const TRAJECTORY_COLUMNS: [&str; 12] = [
    "t_ns", "c1_re", "c1_im", "c2_re", "c2_im", "c3_re", "c3_im", "c4_re", "c4_im", "norm",
    "theta_rad", "concurrence",
];

fn trajectory_rows(traj: &Trajectory) -> Result<Vec<[f64; 12]>> {
    let ps = phase_series(traj)?;
    let mut rows = Vec::with_capacity(traj.samples.len());
    for (k, s) in traj.samples.iter().enumerate() {
        rows.push([
            s.t_s * 1e9,
            s.c[0].re,
            s.c[0].im,
            s.c[1].re,
            s.c[1].im,
            s.c[2].re,
            s.c[2].im,
            s.c[3].re,
            s.c[3].im,
            s.norm,
            ps.theta_rad[k],
            concurrence(&s.c)?,
        ]);
    }
    Ok(rows)
}

/// Render a trajectory as CSV with the canonical column header.
pub fn trajectory_csv(traj: &Trajectory) -> Result<String> {
    let rows = trajectory_rows(traj)?;
    let mut out = String::with_capacity(rows.len() * 180 + 128);
    out.push_str(&TRAJECTORY_COLUMNS.join(","));
    out.push('\n');
    for row in rows {
        let mut first = true;
        for v in row {
            if !first {
                out.push(',');
            }
            write!(out, "{v}").expect("write to String cannot fail");
            first = false;
        }
        out.push('\n');
    }
    Ok(out)
}

/// Render a trajectory as JSON: the same columns, rows as number arrays.
pub fn trajectory_json(traj: &Trajectory) -> Result<String> {
    let rows: Vec<Vec<f64>> = trajectory_rows(traj)?
        .into_iter()
        .map(|r| r.to_vec())
        .collect();
    let doc = serde_json::json!({
        "columns": TRAJECTORY_COLUMNS,
        "rows": rows,
    });
    Ok(doc.to_string())
}

/// Column layout of a sweep table. Units live in the names.
pub const SWEEP_COLUMNS: [&str; 10] = [
    "Bt_T",
    "omega_rad_per_s",
    "r_nm",
    "status",
    "gate_time_ns",
    "concurrence_at_gate",
    "theta_min_rad",
    "theta_max_rad",
    "max_norm_drift",
    "detail",
];

fn push_opt(out: &mut String, v: Option<f64>) {
    if let Some(x) = v {
        write!(out, "{x}").expect("write to String cannot fail");
    }
}

/// Failure details may contain arbitrary error text; keep the CSV grid
/// intact by folding separators and newlines.
fn sanitize_detail(detail: &str) -> String {
    detail.replace(',', ";").replace(['\n', '\r'], " ")
}

/// Render sweep records as CSV (one row per grid point, empty cells where a
/// value does not apply).
pub fn sweep_csv(records: &[SweepRecord]) -> String {
    let mut out = String::with_capacity(records.len() * 120 + 128);
    out.push_str(&SWEEP_COLUMNS.join(","));
    out.push('\n');
    for r in records {
        write!(out, "{},{},{},{}", r.b_t_t, r.omega_rad_s, r.r_m * 1e9, r.status.label())
            .expect("write to String cannot fail");
        out.push(',');
        push_opt(&mut out, r.gate_time_s.map(|t| t * 1e9));
        out.push(',');
        push_opt(&mut out, r.concurrence_at_gate);
        out.push(',');
        push_opt(&mut out, r.theta_min_rad);
        out.push(',');
        push_opt(&mut out, r.theta_max_rad);
        write!(out, ",{},", r.max_norm_drift).expect("write to String cannot fail");
        if let Some(d) = &r.detail {
            out.push_str(&sanitize_detail(d));
        }
        out.push('\n');
    }
    out
}

/// Render sweep records as a JSON array with the same fields as the CSV.
pub fn sweep_json(records: &[SweepRecord]) -> String {
    let rows: Vec<serde_json::Value> = records
        .iter()
        .map(|r| {
            serde_json::json!({
                "Bt_T": r.b_t_t,
                "omega_rad_per_s": r.omega_rad_s,
                "r_nm": r.r_m * 1e9,
                "status": r.status.label(),
                "gate_time_ns": r.gate_time_s.map(|t| t * 1e9),
                "concurrence_at_gate": r.concurrence_at_gate,
                "theta_min_rad": r.theta_min_rad,
                "theta_max_rad": r.theta_max_rad,
                "max_norm_drift": r.max_norm_drift,
                "detail": r.detail,
            })
        })
        .collect();
    serde_json::Value::Array(rows).to_string()
}

/// A gate-time result with the parameters that produced it.
#[derive(Debug, Clone, Copy)]
pub struct GateTimeReport {
    pub target_rad: f64,
    pub tau_ns: f64,
    pub theta_at_tau_rad: f64,
    pub concurrence_at_tau: f64,
    pub max_norm_drift: f64,
    pub params: PhysicalParams,
}

fn gate_report_fields(report: &GateTimeReport) -> Vec<(&'static str, serde_json::Value)> {
    let p = &report.params;
    vec![
        ("target_rad", report.target_rad.into()),
        ("tau_ns", report.tau_ns.into()),
        ("theta_at_tau_rad", report.theta_at_tau_rad.into()),
        ("concurrence_at_tau", report.concurrence_at_tau.into()),
        ("max_norm_drift", report.max_norm_drift.into()),
        ("r_nm", (p.r_m * 1e9).into()),
        ("Bz_T", p.b_z_t.into()),
        ("Bg1_T", p.b_g1_t.into()),
        ("Bg2_T", p.b_g2_t.into()),
        ("Bt_T", p.b_t_t.into()),
        ("omega_GHz", p.omega_ghz_input().into()),
        (
            "omega_convention",
            p.omega_input_convention.label().into(),
        ),
        ("t_end_ns", (p.t_end_s * 1e9).into()),
        ("dt_fs", (p.dt_s * 1e15).into()),
    ]
}

/// Render a gate-time report as a two-line CSV (header + one row).
pub fn gate_report_csv(report: &GateTimeReport) -> String {
    let fields = gate_report_fields(report);
    let header: Vec<&str> = fields.iter().map(|(k, _)| *k).collect();
    let row: Vec<String> = fields
        .iter()
        .map(|(_, v)| match v {
            serde_json::Value::String(s) => s.clone(),
            other => other.to_string(),
        })
        .collect();
    format!("{}\n{}\n", header.join(","), row.join(","))
}

/// Render a gate-time report as a JSON object.
pub fn gate_report_json(report: &GateTimeReport) -> String {
    let mut map = serde_json::Map::new();
    for (k, v) in gate_report_fields(report) {
        map.insert(k.to_string(), v);
    }
    serde_json::Value::Object(map).to_string()
}

/// Render a two-column figure file: time in ns against one observable.
pub fn figure_csv(series: &[(f64, f64)], value_column: &str) -> String {
    let mut out = String::with_capacity(series.len() * 48 + 32);
    out.push_str("t_ns,");
    out.push_str(value_column);
    out.push('\n');
    for (t_s, v) in series {
        writeln!(out, "{},{}", t_s * 1e9, v).expect("write to String cannot fail");
    }
    out
}
