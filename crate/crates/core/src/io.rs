//! Fan file format.
//!
//! A fan file is a JSON object with three fields:
//!
//! ```text
//! {
//!   "rank": 3,
//!   "rays": [
//!     [1, 0, 0],
//!     [0, 1, 0],
//!     [0, 0, 1],
//!     [-1, -1, -1]
//!   ],
//!   "max_cones": [
//!     [0, 1, 2],
//!     [0, 1, 3],
//!     [0, 2, 3],
//!     [1, 2, 3]
//!   ]
//! }
//! ```
//!
//! Ray coordinates are decimal integers of any size. Ray indices in
//! `max_cones` are 0-based. Whitespace is insignificant and unknown fields are
//! rejected.

use std::fmt::Write as _;
use std::str::FromStr;

use itertools::Itertools;
use serde_json::{Map, Number, Value};
use thiserror::Error;

use crate::fan::{Fan, FanError};
use crate::{Int, LatticeVector};

#[derive(Debug, Error)]
pub enum ParseError {
    #[error("line {line}, column {column}: {message}")]
    Syntax {
        line: usize,
        column: usize,
        message: String,
    },
    #[error("field `{field}`: {message}")]
    Field { field: String, message: String },
    #[error(transparent)]
    Fan(#[from] FanError),
}

fn field_err(field: impl Into<String>, message: impl Into<String>) -> ParseError {
    ParseError::Field {
        field: field.into(),
        message: message.into(),
    }
}

fn parse_int(field: &str, v: &Value) -> Result<Int, ParseError> {
    match v {
        Value::Number(n) => {
            let text = n.to_string();
            Int::from_str(&text).map_err(|_| field_err(field, format!("`{text}` is not an integer")))
        }
        other => Err(field_err(field, format!("expected an integer, found {other}"))),
    }
}

fn parse_index(field: &str, v: &Value) -> Result<usize, ParseError> {
    let i = parse_int(field, v)?;
    usize::try_from(&i).map_err(|_| field_err(field, format!("`{i}` is not a valid ray index")))
}

fn array<'a>(field: &str, v: &'a Value) -> Result<&'a Vec<Value>, ParseError> {
    v.as_array()
        .ok_or_else(|| field_err(field, "expected an array"))
}

pub fn parse_fan(text: &str) -> Result<Fan, ParseError> {
    let doc: Value = serde_json::from_str(text).map_err(|e| ParseError::Syntax {
        line: e.line(),
        column: e.column(),
        message: e.to_string(),
    })?;
    let obj: &Map<String, Value> = doc
        .as_object()
        .ok_or_else(|| field_err("<root>", "expected an object"))?;
    if let Some(k) = obj.keys().find(|k| !["rank", "rays", "max_cones"].contains(&k.as_str())) {
        return Err(field_err(k.clone(), "unknown field"));
    }
    let get = |k: &str| obj.get(k).ok_or_else(|| field_err(k, "missing"));

    let rank = parse_index("rank", get("rank")?)?;
    let rays: Vec<LatticeVector> = array("rays", get("rays")?)?
        .iter()
        .enumerate()
        .map(|(i, r)| {
            let f = format!("rays[{i}]");
            array(&f, r)?.iter().map(|x| parse_int(&f, x)).collect()
        })
        .collect::<Result<_, _>>()?;
    let cones: Vec<Vec<usize>> = array("max_cones", get("max_cones")?)?
        .iter()
        .enumerate()
        .map(|(i, c)| {
            let f = format!("max_cones[{i}]");
            array(&f, c)?.iter().map(|x| parse_index(&f, x)).collect()
        })
        .collect::<Result<_, _>>()?;
    Ok(Fan::new(rank, rays, cones)?)
}

/// Deterministic rendering in the documented layout; parses back to `fan`.
pub fn print_fan(fan: &Fan) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{{");
    let _ = writeln!(out, "  \"rank\": {},", fan.rank());
    let _ = writeln!(out, "  \"rays\": [");
    let rays = fan
        .rays()
        .iter()
        .map(|r| format!("    [{}]", r.iter().join(", ")))
        .join(",\n");
    if !rays.is_empty() {
        let _ = writeln!(out, "{rays}");
    }
    let _ = writeln!(out, "  ],");
    let _ = writeln!(out, "  \"max_cones\": [");
    let cones = fan
        .max_cones()
        .iter()
        .map(|c| format!("    [{}]", c.iter().join(", ")))
        .join(",\n");
    if !cones.is_empty() {
        let _ = writeln!(out, "{cones}");
    }
    let _ = writeln!(out, "  ]");
    let _ = writeln!(out, "}}");
    out
}

/// JSON number for an arbitrary-precision integer.
pub fn int_to_json(x: &Int) -> Value {
    Value::Number(Number::from_str(&x.to_string()).expect("decimal integer is a JSON number"))
}
