//! Reading inputs and writing outputs.

use crate::CliError;
use pforge::interval::{IntervalUnion, RayDirection};
use pforge::poly::IntPolynomial;
use serde_json::Value;
use std::fs;
use std::path::Path;

/// Reads a JSON file, reporting syntax errors with line and column.
pub fn read_json(path: &Path) -> Result<Value, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Usage(format!("cannot read {}: {e}", path.display())))?;
    serde_json::from_str(&text).map_err(|e| {
        CliError::Usage(format!(
            "{}: malformed JSON at line {}, column {}: {e}",
            path.display(),
            e.line(),
            e.column()
        ))
    })
}

pub fn read_sigma(path: &Path) -> Result<IntervalUnion, CliError> {
    Ok(IntervalUnion::from_json(&read_json(path)?)?)
}

/// `[0, inf)`, the default domain of the trace objective.
pub fn positive_ray() -> Result<IntervalUnion, CliError> {
    Ok(IntervalUnion::interval("0", "0")?.with_ray("0", RayDirection::Right)?)
}

fn entries(v: &Value) -> Result<&Vec<Value>, CliError> {
    v.as_array()
        .or_else(|| v.get("polynomials").and_then(Value::as_array))
        .ok_or_else(|| CliError::Usage("pool must be a list or an object with `polynomials`".into()))
}

/// A pool is a list of `{"coeffs": [...]}` entries, constant term first.
pub fn read_pool(path: &Path) -> Result<Vec<IntPolynomial>, CliError> {
    let v = read_json(path)?;
    entries(&v)?
        .iter()
        .map(|e| IntPolynomial::from_json(e).map_err(CliError::from))
        .collect()
}

/// Pool entries carrying a `weight` each.
pub fn read_weighted_pool(path: &Path) -> Result<Vec<(IntPolynomial, f64)>, CliError> {
    let v = read_json(path)?;
    entries(&v)?
        .iter()
        .map(|e| {
            let q = IntPolynomial::from_json(e)?;
            let w = match e.get("weight") {
                Some(Value::String(s)) => pforge::numeric::parse_f64(s)?,
                Some(Value::Number(n)) => n.as_f64().unwrap_or(f64::NAN),
                _ => return Err(CliError::Usage("weighted pool entries need `weight`".into())),
            };
            Ok((q, w))
        })
        .collect()
}

/// Writes to `out` or stdout; a `.csv` path asks for `csv` when the command has one.
pub fn emit(json: Value, csv: Option<String>, out: Option<&Path>) -> Result<(), CliError> {
    let wants_csv = out.is_some_and(|p| p.extension().is_some_and(|e| e == "csv"));
    let text = match (wants_csv, csv) {
        (true, Some(c)) => c,
        (true, None) => return Err(CliError::Usage("this command has no CSV form".into())),
        (false, _) => format!("{}\n", serde_json::to_string_pretty(&json).expect("serializable")),
    };
    match out {
        Some(p) => fs::write(p, text).map_err(|e| CliError::Usage(format!("cannot write {}: {e}", p.display()))),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}
