use std::fs;
use std::path::{Path, PathBuf};

use serde::Serialize;

use super::{Summary, TrajectoryRecord};
use crate::error::{Error, Result};

pub const CSV_COLUMNS: [&str; 14] = [
    "replication",
    "t",
    "action",
    "outcome",
    "reward",
    "instant_regret",
    "expected_instant_regret",
    "info_gain_nats",
    "gamma",
    "gamma_bar_running",
    "optimum_entropy_nats",
    "prop1_bound",
    "structural_bound",
    "bound_ok",
];

const SIGNIFICANT_DIGITS: usize = 12;

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportPaths {
    pub trajectories_csv: PathBuf,
    pub summary_json: PathBuf,
}

/// Formats like C's `%.12g`: 12 significant digits, trailing zeros dropped,
/// exponent notation outside `[1e-5, 1e12)`.
pub fn format_number(x: f64) -> String {
    if x == 0.0 {
        return "0".into();
    }
    if !x.is_finite() {
        return x.to_string();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x);
    let (mantissa, exp) = sci.split_once('e').expect("exponent present");
    let exp: i32 = exp.parse().expect("integer exponent");
    if !(-5..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let mantissa = trim_zeros(mantissa);
        return format!("{mantissa}e{exp}");
    }
    let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
    trim_zeros(&format!("{x:.decimals$}")).to_string()
}

fn trim_zeros(s: &str) -> &str {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.')
    } else {
        s
    }
}

fn round_significant(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", SIGNIFICANT_DIGITS - 1, x)
        .parse()
        .unwrap_or(x)
}

fn round_json(v: &mut serde_json::Value) {
    match v {
        serde_json::Value::Number(n) if n.is_f64() => {
            if let Some(r) = n
                .as_f64()
                .map(round_significant)
                .and_then(serde_json::Number::from_f64)
            {
                *n = r;
            }
        }
        serde_json::Value::Array(items) => items.iter_mut().for_each(round_json),
        serde_json::Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

/// JSON text with every float rounded to 12 significant digits.
pub(crate) fn to_rounded_json<T: Serialize>(value: &T) -> Result<String> {
    let mut v = serde_json::to_value(value)?;
    round_json(&mut v);
    Ok(serde_json::to_string_pretty(&v)? + "\n")
}

fn opt(x: Option<f64>) -> String {
    x.map(format_number).unwrap_or_default()
}

/// Writes `trajectories.csv` and `summary.json` into `dir`, creating it if
/// needed.
pub fn emit_report(
    summary: &Summary,
    trajectories: &[TrajectoryRecord],
    dir: &Path,
) -> Result<ReportPaths> {
    fs::create_dir_all(dir).map_err(|source| Error::Io {
        path: dir.to_path_buf(),
        source,
    })?;
    let csv_path = dir.join("trajectories.csv");
    let csv_err = |source| Error::Csv {
        path: csv_path.clone(),
        source,
    };
    let mut w = csv::Writer::from_path(&csv_path).map_err(csv_err)?;
    w.write_record(CSV_COLUMNS).map_err(csv_err)?;
    for traj in trajectories {
        for row in &traj.rows {
            let rep = row.report.as_ref();
            w.write_record([
                traj.replication.to_string(),
                row.t.to_string(),
                row.action.to_string(),
                row.outcome.to_string(),
                format_number(row.reward),
                format_number(row.instant_regret),
                opt(rep.map(|r| r.expected_instant_regret)),
                opt(rep.map(|r| r.info_gain)),
                opt(rep.and_then(|r| r.ratio)),
                format_number(row.gamma_bar_running),
                opt(rep.map(|r| r.optimum_entropy)),
                format_number(row.regret_bound),
                opt(rep.map(|r| r.structural_bound)),
                row.bound_ok.map(|b| b.to_string()).unwrap_or_default(),
            ])
            .map_err(csv_err)?;
        }
    }
    w.flush().map_err(|source| Error::Io {
        path: csv_path.clone(),
        source,
    })?;

    let json_path = dir.join("summary.json");
    fs::write(&json_path, to_rounded_json(summary)?).map_err(|source| Error::Io {
        path: json_path.clone(),
        source,
    })?;
    Ok(ReportPaths {
        trajectories_csv: csv_path,
        summary_json: json_path,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn number_format() {
        assert_eq!(format_number(0.0), "0");
        assert_eq!(format_number(0.4), "0.4");
        assert_eq!(format_number(1.0), "1");
        assert_eq!(format_number(-2.5), "-2.5");
        assert_eq!(format_number(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_number(123456.0), "123456");
        assert_eq!(format_number(1e-7), "1e-7");
        assert_eq!(format_number(2.5e13), "2.5e13");
        assert_eq!(format_number(0.00012345678901234), "0.000123456789012");
    }

    #[test]
    fn rounding_keeps_twelve_digits() {
        let x = std::f64::consts::PI;
        let r = round_significant(x);
        assert_eq!(r.to_string(), "3.14159265359");
        assert_eq!(format_number(x).parse::<f64>().unwrap(), r);
    }
}
