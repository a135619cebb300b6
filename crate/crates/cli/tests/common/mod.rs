//! Shared helpers for the CLI integration tests: CSV fixtures and a small
//! JSON-schema checker covering the subset used by the shipped schemas
//! (type, required, properties, additionalProperties, items, enum).

use pdcov::DataMatrix;
use serde_json::Value;

pub fn matrix_csv(m: &DataMatrix, names: &[String]) -> String {
    use std::fmt::Write as _;
    let mut out = String::new();
    let _ = writeln!(out, "{}", names.join(","));
    for i in 0..m.n_rows() {
        let row: Vec<String> = (0..m.n_cols()).map(|j| format!("{}", m.get(i, j))).collect();
        let _ = writeln!(out, "{}", row.join(","));
    }
    out
}

fn type_matches(ty: &str, value: &Value) -> bool {
    match ty {
        "object" => value.is_object(),
        "array" => value.is_array(),
        "string" => value.is_string(),
        "number" => value.is_number(),
        "integer" => value.is_i64() || value.is_u64(),
        "boolean" => value.is_boolean(),
        "null" => value.is_null(),
        _ => false,
    }
}

/// Validates `value` against `schema`, returning the path of the first
/// violation.
pub fn validate_schema(schema: &Value, value: &Value, path: &str) -> Result<(), String> {
    if let Some(allowed) = schema.get("enum").and_then(|e| e.as_array()) {
        if !allowed.contains(value) {
            return Err(format!("{path}: {value} not in enum {allowed:?}"));
        }
    }
    if let Some(ty) = schema.get("type") {
        let ok = match ty {
            Value::String(s) => type_matches(s, value),
            Value::Array(options) => options
                .iter()
                .filter_map(|t| t.as_str())
                .any(|s| type_matches(s, value)),
            _ => return Err(format!("{path}: malformed schema type {ty}")),
        };
        if !ok {
            return Err(format!("{path}: {value} does not match type {ty}"));
        }
    }
    if let Some(required) = schema.get("required").and_then(|r| r.as_array()) {
        let obj = value
            .as_object()
            .ok_or_else(|| format!("{path}: required fields on a non-object"))?;
        for name in required.iter().filter_map(|n| n.as_str()) {
            if !obj.contains_key(name) {
                return Err(format!("{path}: missing required field {name:?}"));
            }
        }
    }
    if let Some(props) = schema.get("properties").and_then(|p| p.as_object()) {
        if let Some(obj) = value.as_object() {
            for (name, sub) in props {
                if let Some(field) = obj.get(name) {
                    validate_schema(sub, field, &format!("{path}.{name}"))?;
                }
            }
            if schema.get("additionalProperties") == Some(&Value::Bool(false)) {
                for key in obj.keys() {
                    if !props.contains_key(key) {
                        return Err(format!("{path}: unexpected field {key:?}"));
                    }
                }
            }
        }
    }
    if let Some(items) = schema.get("items") {
        if let Some(arr) = value.as_array() {
            for (idx, item) in arr.iter().enumerate() {
                validate_schema(items, item, &format!("{path}[{idx}]"))?;
            }
        }
    }
    Ok(())
}

pub fn assert_valid(schema_text: &str, json_text: &str) {
    let schema: Value = serde_json::from_str(schema_text).expect("schema parses");
    let value: Value = serde_json::from_str(json_text).expect("output parses");
    if let Err(msg) = validate_schema(&schema, &value, "$") {
        panic!("schema violation: {msg}\noutput was:\n{json_text}");
    }
}
