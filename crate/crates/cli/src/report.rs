//! Report rendering. JSON keeps struct field order, floats are cut to six
//! significant digits and money stays a decimal string. CSV is flattened from
//! the same JSON value, so both formats carry identical field values.

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::{Map, Number, Value};

#[derive(Debug, Clone, Copy, PartialEq, Eq, clap::ValueEnum)]
pub enum Format {
    Json,
    Csv,
}

pub fn round_sig(x: f64) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{x:.5e}").parse().expect("formatted float parses")
}

fn normalize(value: Value) -> Value {
    match value {
        Value::Number(n) if n.is_f64() => {
            let x = round_sig(n.as_f64().expect("f64 number"));
            Number::from_f64(x).map_or(Value::Null, Value::Number)
        }
        Value::Array(items) => Value::Array(items.into_iter().map(normalize).collect()),
        Value::Object(map) => {
            Value::Object(map.into_iter().map(|(k, v)| (k, normalize(v))).collect())
        }
        other => other,
    }
}

/// Serializes and normalizes floats.
pub fn to_value<T: Serialize>(x: &T) -> Result<Value> {
    Ok(normalize(
        serde_json::to_value(x).context("serializing report")?,
    ))
}

fn scalar_text(v: &Value) -> String {
    match v {
        Value::Null => String::new(),
        Value::String(s) => s.clone(),
        other => other.to_string(),
    }
}

/// Nested objects become dotted columns; arrays of scalars are joined with `;`.
fn flatten_into(prefix: &str, value: &Value, out: &mut Vec<(String, String)>) {
    let key = |k: &str| {
        if prefix.is_empty() {
            k.to_string()
        } else {
            format!("{prefix}.{k}")
        }
    };
    match value {
        Value::Object(map) => {
            for (k, v) in map {
                flatten_into(&key(k), v, out);
            }
        }
        Value::Array(items) if items.iter().all(|i| !i.is_object() && !i.is_array()) => {
            let joined: Vec<String> = items.iter().map(scalar_text).collect();
            out.push((prefix.to_string(), joined.join(";")));
        }
        Value::Array(items) => {
            for (i, v) in items.iter().enumerate() {
                flatten_into(&key(&i.to_string()), v, out);
            }
        }
        scalar => out.push((prefix.to_string(), scalar_text(scalar))),
    }
}

pub fn flatten(value: &Value) -> Vec<(String, String)> {
    let mut out = Vec::new();
    flatten_into("", value, &mut out);
    out
}

type Fields = Vec<(String, String)>;

/// A report whose `rows` array becomes one CSV line per element, with the
/// remaining top-level fields repeated on every line. Anything else is a
/// single line.
pub fn to_csv(value: &Value) -> Result<String> {
    let (shared, rows): (Fields, Vec<Fields>) = match value {
        Value::Object(map) if map.get("rows").is_some_and(Value::is_array) => {
            let mut top = Map::new();
            for (k, v) in map {
                if k != "rows" {
                    top.insert(k.clone(), v.clone());
                }
            }
            let rows = map["rows"]
                .as_array()
                .expect("checked")
                .iter()
                .map(flatten)
                .collect();
            (flatten(&Value::Object(top)), rows)
        }
        other => (Vec::new(), vec![flatten(other)]),
    };
    let mut header: Vec<String> = shared.iter().map(|(k, _)| k.clone()).collect();
    for row in &rows {
        for (k, _) in row {
            if !header.contains(k) {
                header.push(k.clone());
            }
        }
    }
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(&header)?;
    for row in &rows {
        let record: Vec<&str> = header
            .iter()
            .map(|h| {
                shared
                    .iter()
                    .chain(row)
                    .find(|(k, _)| k == h)
                    .map_or("", |(_, v)| v.as_str())
            })
            .collect();
        w.write_record(&record)?;
    }
    Ok(String::from_utf8(w.into_inner()?)?)
}

pub fn render(value: &Value, format: Format) -> Result<String> {
    match format {
        Format::Json => Ok(serde_json::to_string_pretty(value)? + "\n"),
        Format::Csv => to_csv(value),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use serde_json::json;

    #[test]
    fn six_significant_digits() {
        assert_eq!(round_sig(1.0 / 3.0), 0.333333);
        assert_eq!(round_sig(123456789.0), 123457000.0);
        assert_eq!(round_sig(0.00012), 0.00012);
        assert_eq!(round_sig(-2.5e-7), -2.5e-7);
        assert_eq!(round_sig(0.0), 0.0);
    }

    #[test]
    fn keys_keep_order_and_floats_are_cut() {
        let v = to_value(&json!({"z": 1.0 / 3.0, "a": "100.00", "m": 7})).unwrap();
        assert_eq!(
            serde_json::to_string(&v).unwrap(),
            r#"{"z":0.333333,"a":"100.00","m":7}"#
        );
    }

    #[test]
    fn csv_matches_json_fields() {
        let v = to_value(&json!({
            "seed": 42,
            "rows": [
                {"mechanism": "fpsb", "summary": {"mean": 0.5, "rent": null}, "absences": ["a", "b"]},
                {"mechanism": "share", "summary": {"mean": 0.25, "rent": 3.0}, "absences": []}
            ]
        }))
        .unwrap();
        let csv = to_csv(&v).unwrap();
        assert_eq!(
            csv,
            "seed,mechanism,summary.mean,summary.rent,absences\n42,fpsb,0.5,,a;b\n42,share,0.25,3.0,\n"
        );
    }

    #[test]
    fn single_object_is_one_line() {
        let v = json!({"a": {"b": true}, "c": "x,y"});
        assert_eq!(to_csv(&v).unwrap(), "a.b,c\ntrue,\"x,y\"\n");
    }
}
