use crate::CliError;
use qesmms_core::families::format_number;
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};
use serde_json::Value;
use std::io::{self, Write};
use std::path::Path;

/// Pretty JSON with every float at 17 significant digits.
struct Digits17<'a>(PrettyFormatter<'a>);

impl Formatter for Digits17<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        w.write_all(format_number(value).as_bytes())
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_array(w)
    }

    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array(w)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_array_value(w)
    }

    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object(w)
    }

    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object(w)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.begin_object_value(w)
    }

    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json<T: Serialize>(value: &T) -> String {
    let mut buf = Vec::new();
    let mut ser = serde_json::Serializer::with_formatter(&mut buf, Digits17(PrettyFormatter::new()));
    value.serialize(&mut ser).expect("serializing to memory");
    buf.push(b'\n');
    String::from_utf8(buf).expect("JSON is UTF-8")
}

/// A JSON number, or the tokens `"+inf"`, `"-inf"`, `"nan"`.
pub fn num(x: f64) -> Value {
    if x.is_finite() {
        Value::from(x)
    } else {
        Value::String(format_number(x))
    }
}

pub fn write_file(dir: &Path, name: &str, contents: &str) -> Result<(), CliError> {
    std::fs::create_dir_all(dir).map_err(|e| CliError::Input(format!("{}: {e}", dir.display())))?;
    let path = dir.join(name);
    std::fs::write(&path, contents).map_err(|e| CliError::Input(format!("{}: {e}", path.display())))
}

/// Writes `name` under `out`, or prints it when no directory is given.
pub fn emit(out: Option<&Path>, name: &str, contents: &str) -> Result<(), CliError> {
    match out {
        Some(dir) => write_file(dir, name, contents),
        None => print_stdout(contents),
    }
}

/// Prints to stdout; a closed pipe on the reading side is not an error.
pub fn print_stdout(contents: &str) -> Result<(), CliError> {
    let mut out = io::stdout().lock();
    match out.write_all(contents.as_bytes()).and_then(|_| out.flush()) {
        Err(e) if e.kind() != io::ErrorKind::BrokenPipe => Err(CliError::Input(format!("writing to stdout: {e}"))),
        _ => Ok(()),
    }
}

pub fn csv_row(cells: impl IntoIterator<Item = f64>) -> String {
    cells.into_iter().map(format_number).collect::<Vec<_>>().join(",")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_keep_seventeen_digits_and_round_trip() {
        let x = 0.1 + 0.2;
        let s = to_json(&serde_json::json!({ "x": x, "k": 3 }));
        assert!(s.contains("3.0000000000000004e-1"), "{s}");
        let back: Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["x"].as_f64().unwrap(), x);
        assert_eq!(back["k"].as_u64().unwrap(), 3);
    }

    #[test]
    fn non_finite_values_become_tokens() {
        assert_eq!(num(f64::INFINITY), Value::String("+inf".into()));
        assert_eq!(num(f64::NEG_INFINITY), Value::String("-inf".into()));
        assert_eq!(num(f64::NAN), Value::String("nan".into()));
    }
}
