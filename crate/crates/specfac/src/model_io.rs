//! The JSON model document `{"A": [[...]], "B": [[...]], "C": [[...]], "D": [[...]]}`.
//!
//! Matrices are row-major nested arrays. The state dimension n is the row
//! count of A and the output dimension m the row count of D, so empty B or C
//! (n = 0) still get a definite shape.

use std::fmt;
use std::path::Path;

use serde_json::{Map, Value};
use specfac_core::{Matrix, StateSpaceModel};

use crate::json;

/// A document that is not a model. `at` locates the offending value, e.g. `B[1][0]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ParseError {
    pub at: String,
    pub message: String,
}

impl fmt::Display for ParseError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.at.is_empty() {
            write!(f, "{}", self.message)
        } else {
            write!(f, "{}: {}", self.at, self.message)
        }
    }
}

impl std::error::Error for ParseError {}

fn err(at: impl Into<String>, message: impl Into<String>) -> ParseError {
    ParseError { at: at.into(), message: message.into() }
}

const FIELDS: [&str; 4] = ["A", "B", "C", "D"];

fn rows<'a>(obj: &'a Map<String, Value>, name: &str) -> Result<&'a [Value], ParseError> {
    match obj.get(name) {
        None => Err(err(name, "missing field")),
        Some(Value::Array(rows)) => Ok(rows),
        Some(_) => Err(err(name, "expected an array of rows")),
    }
}

fn matrix(obj: &Map<String, Value>, name: &str, nrows: usize, ncols: usize) -> Result<Matrix, ParseError> {
    let rows = rows(obj, name)?;
    if rows.len() != nrows {
        return Err(err(name, format!("expected {nrows} rows, found {}", rows.len())));
    }
    let mut out = Matrix::zeros(nrows, ncols);
    for (i, row) in rows.iter().enumerate() {
        let row = row.as_array().ok_or_else(|| err(format!("{name}[{i}]"), "expected an array of numbers"))?;
        if row.len() != ncols {
            return Err(err(format!("{name}[{i}]"), format!("expected {ncols} entries, found {}", row.len())));
        }
        for (j, x) in row.iter().enumerate() {
            out[(i, j)] = x.as_f64().ok_or_else(|| err(format!("{name}[{i}][{j}]"), "expected a number"))?;
        }
    }
    Ok(out)
}

/// Parse a model document. Shapes are checked here, so the only
/// `StateSpaceModel::new` failure left is non-finite data, which JSON cannot carry.
pub fn parse_model(text: &str) -> Result<StateSpaceModel, ParseError> {
    let value: Value = serde_json::from_str(text).map_err(|e| err("", format!("malformed JSON: {e}")))?;
    let obj = value.as_object().ok_or_else(|| err("", "expected a JSON object with keys A, B, C, D"))?;
    if let Some(extra) = obj.keys().find(|k| !FIELDS.contains(&k.as_str())) {
        return Err(err(extra.as_str(), "unknown field"));
    }
    let n = rows(obj, "A")?.len();
    let m = rows(obj, "D")?.len();
    if m == 0 {
        return Err(err("D", "must be non-empty"));
    }
    let a = matrix(obj, "A", n, n)?;
    let b = matrix(obj, "B", n, m)?;
    let c = matrix(obj, "C", m, n)?;
    let d = matrix(obj, "D", m, m)?;
    StateSpaceModel::new(a, b, c, d).map_err(|e| err("", e.to_string()))
}

/// Read and parse a model file; IO failures are reported as parse errors on the path.
pub fn read_model(path: &Path) -> Result<StateSpaceModel, ParseError> {
    let text = std::fs::read_to_string(path).map_err(|e| err(path.display().to_string(), e.to_string()))?;
    parse_model(&text)
}

/// Nested row-major arrays.
pub fn matrix_value(m: &Matrix) -> Value {
    Value::Array((0..m.nrows()).map(|i| Value::Array((0..m.ncols()).map(|j| Value::from(m[(i, j)])).collect())).collect())
}

pub fn model_value(m: &StateSpaceModel) -> Value {
    let mut obj = Map::new();
    for (name, mat) in [("A", m.a()), ("B", m.b()), ("C", m.c()), ("D", m.d())] {
        obj.insert(name.to_string(), matrix_value(mat));
    }
    Value::Object(obj)
}

/// Canonical text of a model document.
pub fn model_to_string(m: &StateSpaceModel) -> String {
    json::to_canonical_string(&model_value(m))
}
