//! Deterministic output: JSON with every float printed to 17 significant
//! digits, so identical runs produce identical bytes.

use std::io::{self, Write};

use serde::Serialize;

struct SciFormatter;

impl serde_json::ser::Formatter for SciFormatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{value:.16e}")
    }

    fn write_f32<W>(&mut self, writer: &mut W, value: f32) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// Serialize to a JSON string with fixed float formatting and a trailing
/// newline.
pub fn to_json<T: Serialize>(value: &T) -> Result<String, serde_json::Error> {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, SciFormatter);
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

/// Fixed-format float for CSV cells.
pub fn fmt_f64(value: f64) -> String {
    format!("{value:.16e}")
}

/// One-line structured diagnostic for standard error.
pub fn diagnostic(kind: &str, message: &str) -> String {
    format!(
        "{{\"error\":{},\"kind\":\"{kind}\"}}",
        serde_json::to_string(message).unwrap_or_else(|_| "\"unprintable\"".to_string())
    )
}
