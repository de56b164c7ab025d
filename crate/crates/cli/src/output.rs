//! CSV and JSON serialization of results with 12 significant digits.

use std::io::Write;

use plexsim::{CorrelationResult, Engine, LevelDiagram, PhotonStatistics, SpectrumResult, SweepResult};
use serde::Serialize;
use serde_json::Value;

use crate::CliError;

pub const SWEEP_HEADER: [&str; 9] = ["omega_eV", "param1", "param2", "g2", "g3", "mean_n", "regime", "engine", "error_code"];

const SIGNIFICANT_DIGITS: usize = 12;

/// Formats `v` with 12 significant digits, in plain notation where that stays short.
pub fn format_number(v: f64) -> String {
    if !v.is_finite() {
        return if v.is_nan() { "NaN".into() } else if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    if v == 0.0 {
        return "0".into();
    }
    let sci = format!("{:.*e}", SIGNIFICANT_DIGITS - 1, v);
    let (mantissa, exp) = sci.split_once('e').expect("scientific format");
    let exp: i32 = exp.parse().expect("exponent");
    if (-5..SIGNIFICANT_DIGITS as i32).contains(&exp) {
        let decimals = (SIGNIFICANT_DIGITS as i32 - 1 - exp).max(0) as usize;
        trim_zeros(format!("{:.*}", decimals, v))
    } else {
        format!("{}e{}", trim_zeros(mantissa.to_string()), exp)
    }
}

fn trim_zeros(s: String) -> String {
    if s.contains('.') {
        s.trim_end_matches('0').trim_end_matches('.').to_string()
    } else {
        s
    }
}

/// Rounds every number in a JSON tree to 12 significant digits.
pub fn round_json(value: &mut Value) {
    match value {
        Value::Number(n) => {
            if let Some(f) = n.as_f64().filter(|_| n.is_f64()) {
                let rounded: f64 = format_number(f).parse().unwrap_or(f);
                if let Some(r) = serde_json::Number::from_f64(rounded) {
                    *n = r;
                }
            }
        }
        Value::Array(items) => items.iter_mut().for_each(round_json),
        Value::Object(map) => map.values_mut().for_each(round_json),
        _ => {}
    }
}

pub fn to_json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut tree = serde_json::to_value(value).map_err(|e| CliError::Output(e.to_string()))?;
    round_json(&mut tree);
    let mut text = serde_json::to_string_pretty(&tree).map_err(|e| CliError::Output(e.to_string()))?;
    text.push('\n');
    Ok(text)
}

fn csv_error(e: csv::Error) -> CliError {
    CliError::Output(e.to_string())
}

fn finish(writer: csv::Writer<Vec<u8>>) -> Result<String, CliError> {
    let bytes = writer.into_inner().map_err(|e| CliError::Output(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Output(e.to_string()))
}

fn optional(v: Option<f64>) -> String {
    v.map(format_number).unwrap_or_default()
}

fn correlation_row(
    omega: f64,
    param1: Option<f64>,
    param2: Option<f64>,
    result: Option<&CorrelationResult>,
    engine: Engine,
    error_code: Option<&str>,
) -> [String; 9] {
    [
        format_number(omega),
        optional(param1),
        optional(param2),
        optional(result.map(|r| r.g2)),
        optional(result.map(|r| r.g3)),
        optional(result.map(|r| r.mean_n)),
        result.map(|r| r.regime.as_str().to_string()).unwrap_or_default(),
        engine.as_str().to_string(),
        error_code.unwrap_or_default().to_string(),
    ]
}

/// One row per grid point in grid-major order.
pub fn sweep_csv(result: &SweepResult) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_HEADER).map_err(csv_error)?;
    for p in &result.points {
        let row = correlation_row(
            p.drive_omega,
            Some(p.param1),
            p.param2,
            p.result.as_ref(),
            result.engine,
            p.error_code.as_deref(),
        );
        w.write_record(&row).map_err(csv_error)?;
    }
    finish(w)
}

pub fn correlation_csv(result: &CorrelationResult, engine: Engine) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(SWEEP_HEADER).map_err(csv_error)?;
    w.write_record(correlation_row(result.drive_omega, None, None, Some(result), engine, None))
        .map_err(csv_error)?;
    finish(w)
}

pub fn levels_csv(levels: &LevelDiagram) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["manifold", "index", "energy_eV"]).map_err(csv_error)?;
    for (k, energies) in &levels.manifolds {
        for (i, e) in energies.iter().enumerate() {
            w.write_record([k.to_string(), i.to_string(), format_number(*e)]).map_err(csv_error)?;
        }
    }
    finish(w)
}

pub fn spectrum_csv(spectrum: &SpectrumResult) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["omega_eV", "response"]).map_err(csv_error)?;
    for (o, r) in spectrum.omegas.iter().zip(&spectrum.response) {
        w.write_record([format_number(*o), format_number(*r)]).map_err(csv_error)?;
    }
    finish(w)
}

pub fn statistics_csv(stats: &PhotonStatistics) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["m", "probability", "delta"]).map_err(csv_error)?;
    for (m, p) in stats.probabilities.iter().enumerate() {
        let delta = stats.deltas.get(m).copied();
        w.write_record([m.to_string(), format_number(*p), optional(delta)]).map_err(csv_error)?;
    }
    finish(w)
}

pub fn phase_csv(omegas: &[f64], phases: &[Option<f64>]) -> Result<String, CliError> {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(["omega_eV", "delta_theta"]).map_err(csv_error)?;
    for (o, p) in omegas.iter().zip(phases) {
        w.write_record([format_number(*o), optional(*p)]).map_err(csv_error)?;
    }
    finish(w)
}

/// Writes `text` to `path`, or to stdout when no path is given.
pub fn emit(text: &str, path: Option<&str>) -> Result<(), CliError> {
    match path {
        Some(p) => std::fs::write(p, text).map_err(|e| CliError::Io(format!("{p}: {e}"))),
        None => std::io::stdout()
            .lock()
            .write_all(text.as_bytes())
            .map_err(|e| CliError::Io(format!("stdout: {e}"))),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twelve_significant_digits() {
        assert_eq!(format_number(0.35), "0.35");
        assert_eq!(format_number(2.0), "2");
        assert_eq!(format_number(1.0 / 3.0), "0.333333333333");
        assert_eq!(format_number(-2.0 / 3.0), "-0.666666666667");
        assert_eq!(format_number(123456.789), "123456.789");
        assert_eq!(format_number(1.5e-9), "1.5e-9");
        assert_eq!(format_number(6.02214076e23), "6.02214076e23");
        assert_eq!(format_number(0.0), "0");
    }

    #[test]
    fn formatted_numbers_round_trip_to_twelve_digits() {
        for v in [std::f64::consts::PI, 1.234567890123456e-7, 9.87654321e15, -0.2082466, 1e-300] {
            let back: f64 = format_number(v).parse().unwrap();
            assert!((back - v).abs() <= 5e-12 * v.abs(), "{v} -> {back}");
        }
    }

    #[test]
    fn json_numbers_are_rounded() {
        let mut v = serde_json::json!({"a": [1.0 / 3.0, 2], "b": {"c": 0.1 + 0.2}});
        round_json(&mut v);
        assert_eq!(v["a"][0].as_f64().unwrap(), 0.333333333333);
        assert_eq!(v["a"][1].as_i64().unwrap(), 2);
        assert_eq!(v["b"]["c"].as_f64().unwrap(), 0.3);
    }

    #[test]
    fn single_result_is_header_plus_one_row() {
        let r = CorrelationResult::new(2.0, 0.2, 2.6, 1e-3);
        let text = correlation_csv(&r, Engine::MasterEquation).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 2);
        assert_eq!(lines[0], SWEEP_HEADER.join(","));
        assert_eq!(lines[1], "2,,,0.2,2.6,0.001,UPB,master-equation,");
    }
}
