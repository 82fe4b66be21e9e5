//! Sweep execution and the file formats it writes.

mod config;
mod svg;
mod sweep;

pub use config::{parse_config, ConfigMap};
pub use svg::{render_svg, Panel, Series};
pub use sweep::{
    run_figures, run_sweep, write_sweep, FigureSpec, OutputFormat, SweepConfig, SweepOutput, FIGURES,
    FIGURE_A_MAX, FIGURE_STEPS,
};

use crate::measures::MeasurePoint;

/// Failures of a CLI-level run, split by the exit code they map to.
#[derive(Debug, thiserror::Error)]
pub enum RunError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{op} failed: {source}")]
    Numerical { op: String, source: crate::Error },
    #[error("i/o: {0}")]
    Io(String),
}

impl RunError {
    pub fn exit_code(&self) -> i32 {
        match self {
            RunError::Usage(_) => 2,
            RunError::Numerical { .. } | RunError::Io(_) => 3,
        }
    }
}

/// Value of a named CSV column for one point.
pub fn measure_value(p: &MeasurePoint, col: &str) -> Option<f64> {
    match col {
        "a" => Some(p.a),
        "S" => p.s,
        "dS_da" => p.ds_da,
        "d2S_da2" => p.d2s_da2,
        "F_R" => p.f_r,
        "RFS_fd" => p.rfs_fixed_delta,
        "RFS_d2" => p.rfs_second_derivative,
        "fps" => p.fidelity_per_site,
        "xi_long" => p.xi_long,
        "xi_trans" => p.xi_trans,
        "string_order" => p.string_order,
        "fluct_zz" => p.fluct_zz,
        "lambda1" => Some(p.lambda1),
        "limit_flag" => Some(if p.limit_flag { 1.0 } else { 0.0 }),
        _ => None,
    }
}

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

pub const CSV_COLUMNS: [&str; 14] = [
    "a",
    "S",
    "dS_da",
    "d2S_da2",
    "F_R",
    "RFS_fd",
    "RFS_d2",
    "fps",
    "xi_long",
    "xi_trans",
    "string_order",
    "fluct_zz",
    "lambda1",
    "limit_flag",
];

/// Twelve significant digits in exponent form; non-finite values spelled out.
pub fn format_float(v: f64) -> String {
    if v.is_nan() {
        "nan".into()
    } else if v.is_infinite() {
        if v > 0.0 { "inf".into() } else { "-inf".into() }
    } else {
        format!("{v:.11e}")
    }
}

fn field(v: Option<f64>) -> String {
    v.map(format_float).unwrap_or_default()
}

pub fn csv_row(p: &MeasurePoint) -> String {
    let cols = [
        format_float(p.a),
        field(p.s),
        field(p.ds_da),
        field(p.d2s_da2),
        field(p.f_r),
        field(p.rfs_fixed_delta),
        field(p.rfs_second_derivative),
        field(p.fidelity_per_site),
        field(p.xi_long),
        field(p.xi_trans),
        field(p.string_order),
        field(p.fluct_zz),
        format_float(p.lambda1),
        p.limit_flag.to_string(),
    ];
    cols.join(",")
}

/// CSV text: one `#` comment line, the column header, then one row per point.
pub fn to_csv(comment: &str, points: &[MeasurePoint]) -> String {
    let mut out = format!("# {comment}\n{}\n", CSV_COLUMNS.join(","));
    for p in points {
        out.push_str(&csv_row(p));
        out.push('\n');
    }
    out
}

/// Reads back a CSV written by [`to_csv`]. Empty fields become `None`.
pub fn parse_csv(text: &str) -> Result<Vec<Vec<Option<f64>>>, String> {
    let mut lines = text.lines().filter(|l| !l.starts_with('#'));
    let header = lines.next().ok_or("missing header")?;
    if header != CSV_COLUMNS.join(",") {
        return Err(format!("unexpected header '{header}'"));
    }
    lines
        .map(|line| {
            line.split(',')
                .map(|f| match f {
                    "" => Ok(None),
                    "true" => Ok(Some(1.0)),
                    "false" => Ok(Some(0.0)),
                    "inf" => Ok(Some(f64::INFINITY)),
                    "-inf" => Ok(Some(f64::NEG_INFINITY)),
                    _ => f.parse::<f64>().map(Some).map_err(|e| format!("bad field '{f}': {e}")),
                })
                .collect()
        })
        .collect()
}

/// Column of a parsed CSV by name.
pub fn column(rows: &[Vec<Option<f64>>], name: &str) -> Vec<Option<f64>> {
    let idx = CSV_COLUMNS.iter().position(|c| *c == name).expect("known column");
    rows.iter().map(|r| r[idx]).collect()
}
