//! JSON and CSV writers with every float printed to 17 significant digits.

use std::io::{self, Write};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::Result;

/// Pretty JSON whose floats use `{:.16e}`, so equal values print identically
/// and re-parse exactly.
pub struct Sig17<F = PrettyFormatter<'static>>(pub F);

macro_rules! delegate {
    ($($name:ident),*) => {$(
        fn $name<W: ?Sized + Write>(&mut self, w: &mut W) -> io::Result<()> {
            self.0.$name(w)
        }
    )*};
}

impl<F: Formatter> Formatter for Sig17<F> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, value: f64) -> io::Result<()> {
        write!(w, "{}", crate::fmt17(value))
    }

    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, value: f32) -> io::Result<()> {
        self.write_f64(w, value as f64)
    }

    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_array_value(w, first)
    }

    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> io::Result<()> {
        self.0.begin_object_key(w, first)
    }

    delegate!(
        begin_array,
        end_array,
        end_array_value,
        begin_object,
        end_object,
        begin_object_value,
        end_object_value
    );
}

pub fn to_json<T: Serialize + ?Sized>(value: &T, pretty: bool) -> Result<String> {
    let mut buf = Vec::new();
    if pretty {
        value.serialize(&mut serde_json::Serializer::with_formatter(
            &mut buf,
            Sig17(PrettyFormatter::new()),
        ))?;
    } else {
        value.serialize(&mut serde_json::Serializer::with_formatter(
            &mut buf,
            Sig17(serde_json::ser::CompactFormatter),
        ))?;
    }
    Ok(String::from_utf8(buf).expect("serde_json writes UTF-8"))
}

/// `# config: {...}` line followed by a CSV table.
pub fn csv_with_header<C: Serialize>(
    config: &C,
    header: &[&str],
    rows: &[Vec<String>],
) -> Result<String> {
    let mut out = format!("# config: {}\n", to_json(config, false)?).into_bytes();
    {
        let mut w = csv::Writer::from_writer(&mut out);
        w.write_record(header)?;
        for r in rows {
            w.write_record(r)?;
        }
        w.flush()?;
    }
    Ok(String::from_utf8(out).expect("csv writes UTF-8"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn floats_have_seventeen_digits() {
        let s = to_json(
            &serde_json::json!({"x": 0.1, "n": 3, "v": [1.0, -2.5e-300]}),
            false,
        )
        .unwrap();
        assert_eq!(
            s,
            r#"{"n":3,"v":[1.0000000000000000e0,-2.5000000000000000e-300],"x":1.0000000000000001e-1}"#
        );
        let back: serde_json::Value = serde_json::from_str(&s).unwrap();
        assert_eq!(back["x"].as_f64(), Some(0.1));
    }

    #[test]
    fn pretty_output_reparses() {
        let v = vec![(1.5f64, f64::MIN_POSITIVE), (std::f64::consts::PI, -0.0)];
        let s = to_json(&v, true).unwrap();
        assert!(s.contains('\n'));
        let back: Vec<(f64, f64)> = serde_json::from_str(&s).unwrap();
        assert_eq!(back, v);
    }
}
