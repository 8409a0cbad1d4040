//! Byte-stable rendering of result files.
//!
//! Every floating-point value is written with 17 significant digits
//! (scientific notation: one digit before the point, sixteen after),
//! which round-trips any finite f64 exactly, so reruns with the same
//! seed produce byte-identical files.

use std::io::{self, Write};
use std::path::Path;

use anyhow::{Context, Result};
use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

/// Renders a float with 17 significant digits.
pub fn float17(x: f64) -> String {
    format!("{x:.16e}")
}

/// Joins pre-rendered cells into CSV text with a trailing newline.  No
/// quoting: none of the emitted fields contain commas or quotes.
pub fn csv_text(header: &[&str], rows: &[Vec<String>]) -> String {
    let mut text = String::new();
    text.push_str(&header.join(","));
    text.push('\n');
    for row in rows {
        debug_assert_eq!(row.len(), header.len());
        text.push_str(&row.join(","));
        text.push('\n');
    }
    text
}

/// Writes `text` to `out`, or to standard output when `out` is `None`.
pub fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(path) => std::fs::write(path, text)
            .with_context(|| format!("writing {}", path.display())),
        None => io::stdout()
            .write_all(text.as_bytes())
            .context("writing to standard output"),
    }
}

/// Serializes `value` as pretty-printed JSON with every f64 rendered via
/// [`float17`] (non-finite values become null, as with the default
/// serde_json formatter) and writes it to `path` with a trailing newline.
pub fn write_json<T: Serialize>(path: &Path, value: &T) -> Result<()> {
    let mut buf = Vec::new();
    let mut serializer =
        serde_json::Serializer::with_formatter(&mut buf, Float17Pretty::new());
    value.serialize(&mut serializer).context("serializing JSON")?;
    buf.push(b'\n');
    std::fs::write(path, &buf).with_context(|| format!("writing {}", path.display()))
}

/// Pretty JSON formatter with [`float17`] floats.  Only the methods that
/// touch `PrettyFormatter`'s indentation state are delegated; the rest
/// keep their (layout-independent) defaults.
struct Float17Pretty<'a> {
    inner: PrettyFormatter<'a>,
}

impl Float17Pretty<'_> {
    fn new() -> Self {
        Float17Pretty {
            inner: PrettyFormatter::new(),
        }
    }
}

impl Formatter for Float17Pretty<'_> {
    fn write_f64<W>(&mut self, writer: &mut W, value: f64) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        if value.is_finite() {
            write!(writer, "{value:.16e}")
        } else {
            writer.write_all(b"null")
        }
    }

    fn begin_array<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.begin_array(writer)
    }

    fn end_array<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.end_array(writer)
    }

    fn begin_array_value<W>(&mut self, writer: &mut W, first: bool) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.begin_array_value(writer, first)
    }

    fn end_array_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.end_array_value(writer)
    }

    fn begin_object<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.begin_object(writer)
    }

    fn end_object<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.end_object(writer)
    }

    fn begin_object_key<W>(&mut self, writer: &mut W, first: bool) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.begin_object_key(writer, first)
    }

    fn begin_object_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.begin_object_value(writer)
    }

    fn end_object_value<W>(&mut self, writer: &mut W) -> io::Result<()>
    where
        W: ?Sized + Write,
    {
        self.inner.end_object_value(writer)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float17_round_trips_f64() {
        for &x in &[
            0.0,
            1.0,
            0.01690021472024339,
            0.774397636309918,
            -3.5e-12,
            1.7976931348623157e308,
            5e-324,
        ] {
            let rendered = float17(x);
            let back: f64 = rendered.parse().expect("parse back");
            assert_eq!(back.to_bits(), x.to_bits(), "{x} -> {rendered} -> {back}");
        }
    }

    #[test]
    fn csv_text_layout() {
        let text = csv_text(
            &["a", "b"],
            &[vec!["1".into(), "2".into()], vec!["3".into(), "4".into()]],
        );
        assert_eq!(text, "a,b\n1,2\n3,4\n");
    }

    #[test]
    fn json_renders_floats_at_full_precision_and_nonfinite_as_null() {
        #[derive(Serialize)]
        struct Sample {
            value: f64,
            diverged: f64,
            count: u64,
        }
        let file = tempfile::NamedTempFile::new().expect("temp file");
        write_json(
            file.path(),
            &Sample {
                value: 0.5,
                diverged: f64::INFINITY,
                count: 3097,
            },
        )
        .expect("write");
        let text = std::fs::read_to_string(file.path()).expect("read back");
        assert!(text.contains("\"value\": 5.0000000000000000e-1"), "{text}");
        assert!(text.contains("\"diverged\": null"), "{text}");
        assert!(text.contains("\"count\": 3097"), "{text}");
        assert!(text.ends_with('\n'));
    }
}
