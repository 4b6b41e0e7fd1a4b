//! Deterministic JSON: sorted keys, two-space indent, every float written
//! with 17 significant digits so that parsing restores the exact bits.

use std::fmt::Write;

use serde::de::{self, Deserializer, Visitor};
use serde::{Deserialize, Serialize, Serializer};
use serde_json::Value;

use crate::error::{CliError, Result};

/// `{:.16e}` of a finite float.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

pub fn to_string<T: Serialize>(value: &T) -> Result<String> {
    let v = serde_json::to_value(value).map_err(|e| CliError::Invalid(format!("serialization: {e}")))?;
    let mut out = String::new();
    write_value(&mut out, &v, 0)?;
    out.push('\n');
    Ok(out)
}

fn write_value(out: &mut String, v: &Value, indent: usize) -> Result<()> {
    match v {
        Value::Null => out.push_str("null"),
        Value::Bool(b) => out.push_str(if *b { "true" } else { "false" }),
        Value::Number(n) => {
            if let Some(u) = n.as_u64() {
                write!(out, "{u}").unwrap();
            } else if let Some(i) = n.as_i64() {
                write!(out, "{i}").unwrap();
            } else {
                let f = n.as_f64().expect("json numbers are u64, i64 or f64");
                out.push_str(&format_float(f));
            }
        }
        Value::String(s) => out.push_str(&serde_json::to_string(s).expect("strings serialize")),
        Value::Array(items) => {
            if items.is_empty() {
                out.push_str("[]");
                return Ok(());
            }
            // short arrays of scalars stay on one line
            let flat = items.iter().all(|x| !x.is_array() && !x.is_object());
            out.push('[');
            for (k, item) in items.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                if flat {
                    if k > 0 {
                        out.push(' ');
                    }
                } else {
                    newline(out, indent + 1);
                }
                write_value(out, item, indent + 1)?;
            }
            if !flat {
                newline(out, indent);
            }
            out.push(']');
        }
        Value::Object(map) => {
            if map.is_empty() {
                out.push_str("{}");
                return Ok(());
            }
            out.push('{');
            for (k, (key, item)) in map.iter().enumerate() {
                if k > 0 {
                    out.push(',');
                }
                newline(out, indent + 1);
                out.push_str(&serde_json::to_string(key).expect("strings serialize"));
                out.push_str(": ");
                write_value(out, item, indent + 1)?;
            }
            newline(out, indent);
            out.push('}');
        }
    }
    Ok(())
}

fn newline(out: &mut String, indent: usize) {
    out.push('\n');
    for _ in 0..indent {
        out.push_str("  ");
    }
}

/// A float that may be `±∞`, written as a number or as `"inf"` / `"-inf"`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExtFloat(pub f64);

impl Serialize for ExtFloat {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self.0 {
            f64::INFINITY => s.serialize_str("inf"),
            f64::NEG_INFINITY => s.serialize_str("-inf"),
            v if v.is_nan() => Err(serde::ser::Error::custom("NaN is not representable")),
            v => s.serialize_f64(v),
        }
    }
}

impl<'de> Deserialize<'de> for ExtFloat {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        struct V;
        impl Visitor<'_> for V {
            type Value = ExtFloat;

            fn expecting(&self, f: &mut std::fmt::Formatter) -> std::fmt::Result {
                f.write_str("a number, \"inf\" or \"-inf\"")
            }

            fn visit_f64<E: de::Error>(self, v: f64) -> std::result::Result<ExtFloat, E> {
                Ok(ExtFloat(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> std::result::Result<ExtFloat, E> {
                Ok(ExtFloat(v as f64))
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> std::result::Result<ExtFloat, E> {
                Ok(ExtFloat(v as f64))
            }

            fn visit_str<E: de::Error>(self, v: &str) -> std::result::Result<ExtFloat, E> {
                match v {
                    "inf" => Ok(ExtFloat(f64::INFINITY)),
                    "-inf" => Ok(ExtFloat(f64::NEG_INFINITY)),
                    other => Err(E::invalid_value(de::Unexpected::Str(other), &self)),
                }
            }
        }
        d.deserialize_any(V)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip_bit_exactly() {
        for v in [0.1f64, 1.0 / 3.0, -2.5e-300, 1e300, 5e-324, 0.0, 123456789.0] {
            let s = to_string(&v).unwrap();
            let back: f64 = serde_json::from_str(&s).unwrap();
            assert_eq!(back.to_bits(), v.to_bits(), "{s}");
        }
    }

    #[test]
    fn infinities_are_strings() {
        let s = to_string(&[ExtFloat(f64::INFINITY), ExtFloat(f64::NEG_INFINITY), ExtFloat(1.0)]).unwrap();
        assert_eq!(s, "[\"inf\", \"-inf\", 1.0000000000000000e0]\n");
        let back: Vec<ExtFloat> = serde_json::from_str(&s).unwrap();
        assert_eq!(back[0].0, f64::INFINITY);
        assert!(serde_json::from_str::<ExtFloat>("\"nan\"").is_err());
        assert!(to_string(&ExtFloat(f64::NAN)).is_err());
    }

    #[test]
    fn keys_are_sorted() {
        let v = serde_json::json!({"b": 1, "a": {"d": [], "c": true}});
        assert_eq!(to_string(&v).unwrap(), "{\n  \"a\": {\n    \"c\": true,\n    \"d\": []\n  },\n  \"b\": 1\n}\n");
    }
}
