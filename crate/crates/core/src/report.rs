//! Report serialization helpers shared by the library and the CLI.
//!
//! CSV floats are printed with 17 significant digits so identical runs produce
//! byte-identical files and values round-trip exactly through parsing.

use crate::error::Result;
use serde::Serialize;
use std::fs;
use std::io::Write;
use std::path::Path;

/// 17 significant digits, scientific notation. Enough to round-trip any f64.
pub fn float17(x: f64) -> String {
    format!("{:.16e}", x)
}

/// Join already-formatted fields into one CSV record, quoting any field that
/// contains a comma, quote or line break.
pub fn csv_record<I, S>(fields: I) -> String
where
    I: IntoIterator<Item = S>,
    S: AsRef<str>,
{
    let mut out = String::new();
    for (i, f) in fields.into_iter().enumerate() {
        if i > 0 {
            out.push(',');
        }
        let f = f.as_ref();
        if f.contains([',', '"', '\n']) {
            out.push('"');
            out.push_str(&f.replace('"', "\"\""));
            out.push('"');
        } else {
            out.push_str(f);
        }
    }
    out
}

/// Write a CSV file with a header line and preformatted rows.
pub fn write_csv<P: AsRef<Path>>(path: P, header: &str, rows: &[String]) -> Result<()> {
    let mut buf = String::with_capacity(rows.len() * 64 + header.len() + 2);
    buf.push_str(header);
    buf.push('\n');
    for row in rows {
        buf.push_str(row);
        buf.push('\n');
    }
    fs::write(path, buf)?;
    Ok(())
}

struct Float17Formatter;

impl serde_json::ser::Formatter for Float17Formatter {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> std::io::Result<()>
    where
        W: ?Sized + Write,
    {
        write!(writer, "{value:.16e}")
    }
}

/// JSON with a trailing newline. Floats are printed with 17 significant
/// digits like the CSV emitters, so reruns are byte-identical and values
/// round-trip exactly.
pub fn json_string<T: Serialize>(value: &T) -> Result<String> {
    let mut out = Vec::with_capacity(256);
    let mut ser = serde_json::Serializer::with_formatter(&mut out, Float17Formatter);
    value.serialize(&mut ser)?;
    out.push(b'\n');
    Ok(String::from_utf8(out).expect("serde_json emits utf-8"))
}

pub fn write_json<P: AsRef<Path>, T: Serialize>(path: P, value: &T) -> Result<()> {
    let s = json_string(value)?;
    let mut file = fs::File::create(path)?;
    file.write_all(s.as_bytes())?;
    Ok(())
}
