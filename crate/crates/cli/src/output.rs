use std::fmt::Write as _;
use std::fs;
use std::io::{self, Write};
use std::path::Path;

use selfsim::Scalar;
use serde_json::Value;

/// Scalars in JSON: exact values as `"p/q"` strings, floats as numbers.
pub fn json_scalar<T: Scalar>(x: &T) -> Value {
    if T::EXACT {
        Value::String(x.to_text())
    } else {
        json_f64(x.to_f64())
    }
}

/// Non-finite floats become `null`.
pub fn json_f64(x: f64) -> Value {
    serde_json::Number::from_f64(x).map_or(Value::Null, Value::Number)
}

/// CSV form of a float: shortest round-trip text, `-0` folded to `0`.
pub fn fmt_f64(x: f64) -> String {
    x.to_text()
}

pub fn json_text(value: &Value) -> String {
    let mut s = serde_json::to_string_pretty(value).expect("json values serialise");
    s.push('\n');
    s
}

#[derive(Debug, Default)]
pub struct Csv {
    buf: String,
}

impl Csv {
    pub fn with_header<S: AsRef<str>>(columns: &[S]) -> Self {
        let mut csv = Csv::default();
        csv.row(columns.iter().map(|c| c.as_ref().to_string()));
        csv
    }

    pub fn row<I: IntoIterator<Item = String>>(&mut self, cells: I) {
        let mut first = true;
        for cell in cells {
            if !first {
                self.buf.push(',');
            }
            first = false;
            let _ = write!(self.buf, "{cell}");
        }
        self.buf.push('\n');
    }

    pub fn into_string(self) -> String {
        self.buf
    }
}

pub fn emit(out: Option<&Path>, bytes: &[u8]) -> io::Result<()> {
    match out {
        Some(path) => fs::write(path, bytes),
        None => {
            let stdout = io::stdout();
            let mut lock = stdout.lock();
            lock.write_all(bytes)?;
            lock.flush()
        }
    }
}
