//! Run reports and number formatting.
//!
//! Every float is written with 17 significant digits so it round-trips.
//! JSON has no infinity, so non-finite values become the strings `"inf"`,
//! `"-inf"` and `"nan"`.

use std::io::{self, Write};
use std::path::Path;

use serde::Serialize;
use serde_json::ser::{CompactFormatter, Formatter};
use serde_json::Value;
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

#[derive(Clone, Debug, Serialize)]
pub struct InputDigest {
    pub path: String,
    pub sha256: String,
}

impl InputDigest {
    pub fn of(path: &Path) -> Result<Self> {
        let bytes = std::fs::read(path).map_err(|e| Error::file(path, e))?;
        Ok(Self {
            path: path.display().to_string(),
            sha256: hex(&Sha256::digest(&bytes)),
        })
    }
}

fn hex(bytes: &[u8]) -> String {
    bytes.iter().map(|b| format!("{b:02x}")).collect()
}

#[derive(Clone, Debug, Serialize)]
pub struct RunReport {
    pub command: Vec<String>,
    pub inputs: Vec<InputDigest>,
    pub passed: bool,
    pub results: Value,
    /// Wall-clock seconds per phase; not covered by the determinism contract.
    pub timings: Value,
    pub version: &'static str,
}

impl RunReport {
    pub fn new(
        command: Vec<String>,
        inputs: Vec<InputDigest>,
        passed: bool,
        results: Value,
        timings: Value,
    ) -> Self {
        Self {
            command,
            inputs,
            passed,
            results,
            timings,
            version: env!("CARGO_PKG_VERSION"),
        }
    }

    pub fn to_json(&self) -> String {
        to_string_pretty(self)
    }
}

/// Writes floats as `{:.16e}` and non-finite floats as strings.
#[derive(Default)]
pub struct PreciseFormatter {
    inner: serde_json::ser::PrettyFormatter<'static>,
    compact: bool,
}

impl PreciseFormatter {
    pub fn compact() -> Self {
        Self {
            compact: true,
            ..Default::default()
        }
    }
}

fn write_float<W: ?Sized + Write>(w: &mut W, v: f64) -> io::Result<()> {
    if v.is_nan() {
        w.write_all(b"\"nan\"")
    } else if v.is_infinite() {
        w.write_all(if v > 0.0 { b"\"inf\"" } else { b"\"-inf\"" })
    } else {
        write!(w, "{v:.16e}")
    }
}

macro_rules! delegate {
    ($($name:ident($($arg:ident: $ty:ty),*);)*) => {
        $(fn $name<W: ?Sized + Write>(&mut self, w: &mut W $(, $arg: $ty)*) -> io::Result<()> {
            if self.compact {
                CompactFormatter.$name(w $(, $arg)*)
            } else {
                self.inner.$name(w $(, $arg)*)
            }
        })*
    };
}

impl Formatter for PreciseFormatter {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> io::Result<()> {
        write_float(w, v)
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> io::Result<()> {
        write_float(w, v as f64)
    }

    delegate! {
        begin_array();
        end_array();
        begin_array_value(first: bool);
        end_array_value();
        begin_object();
        end_object();
        begin_object_key(first: bool);
        end_object_key();
        begin_object_value();
        end_object_value();
    }
}

fn serialize_with<T: Serialize + ?Sized>(value: &T, f: PreciseFormatter) -> String {
    let mut out = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut out, f);
    to_value(value)
        .serialize(&mut ser)
        .expect("report serializes");
    String::from_utf8(out).expect("json is utf-8")
}

pub fn to_string_pretty<T: Serialize + ?Sized>(value: &T) -> String {
    serialize_with(value, PreciseFormatter::default())
}

pub fn to_string_compact<T: Serialize + ?Sized>(value: &T) -> String {
    serialize_with(value, PreciseFormatter::compact())
}

/// Converts to a `Value` keeping non-finite floats (as strings).
///
/// serde_json maps infinities to `null` before a formatter sees them, so
/// the conversion goes through `serde_value`, which keeps raw floats.
pub fn to_value<T: Serialize + ?Sized>(value: &T) -> Value {
    convert(serde_value::to_value(value).expect("report serializes"))
}

fn float(v: f64) -> Value {
    if v.is_nan() {
        Value::String("nan".into())
    } else if v.is_infinite() {
        Value::String(if v > 0.0 { "inf" } else { "-inf" }.into())
    } else {
        serde_json::Number::from_f64(v)
            .map(Value::Number)
            .expect("finite")
    }
}

fn convert(v: serde_value::Value) -> Value {
    use serde_value::Value as V;
    match v {
        V::Bool(b) => Value::Bool(b),
        V::U8(x) => x.into(),
        V::U16(x) => x.into(),
        V::U32(x) => x.into(),
        V::U64(x) => x.into(),
        V::I8(x) => x.into(),
        V::I16(x) => x.into(),
        V::I32(x) => x.into(),
        V::I64(x) => x.into(),
        V::F32(x) => float(x as f64),
        V::F64(x) => float(x),
        V::Char(c) => Value::String(c.to_string()),
        V::String(s) => Value::String(s),
        V::Unit | V::Option(None) => Value::Null,
        V::Option(Some(b)) | V::Newtype(b) => convert(*b),
        V::Seq(xs) => Value::Array(xs.into_iter().map(convert).collect()),
        V::Bytes(bs) => Value::Array(bs.into_iter().map(Value::from).collect()),
        V::Map(m) => Value::Object(
            m.into_iter()
                .map(|(k, v)| {
                    let key = match convert(k) {
                        Value::String(s) => s,
                        other => other.to_string(),
                    };
                    (key, convert(v))
                })
                .collect(),
        ),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_round_trip() {
        for x in [0.1, 1.0 / 3.0, 1e-300, -2.5e17, 0.0, f64::MIN_POSITIVE] {
            let s = to_string_compact(&x);
            assert_eq!(s.parse::<f64>().unwrap(), x, "{s}");
        }
    }

    #[test]
    fn non_finite_as_strings() {
        let s = to_string_compact(&vec![f64::INFINITY, f64::NEG_INFINITY, f64::NAN, 1.0]);
        assert_eq!(s, r#"["inf","-inf","nan",1.0000000000000000e0]"#);
        let v = to_value(&f64::INFINITY);
        assert_eq!(v, Value::String("inf".into()));
    }

    #[test]
    fn pretty_is_indented() {
        let s = to_string_pretty(&serde_json::json!({"a": [1.5]}));
        assert!(s.contains("\n  \"a\""), "{s}");
    }
}
