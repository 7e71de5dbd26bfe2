//! Field CSV (`x,value`) with a `{n, half_length}` sidecar, and JSON with
//! every float written at 17 significant digits.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::ser::{Formatter, PrettyFormatter};

use crate::error::{Error, Result};
use crate::grid::{Field, Grid};

/// Pretty JSON formatter that prints floats as `{:.16e}` and non-finite
/// values as `null`, so equal inputs give byte-identical files.
struct FixedDigits<'a>(PrettyFormatter<'a>);

impl Formatter for FixedDigits<'_> {
    fn write_f64<W: ?Sized + Write>(&mut self, w: &mut W, v: f64) -> std::io::Result<()> {
        if v.is_finite() {
            write!(w, "{v:.16e}")
        } else {
            w.write_all(b"null")
        }
    }
    fn write_f32<W: ?Sized + Write>(&mut self, w: &mut W, v: f32) -> std::io::Result<()> {
        self.write_f64(w, v as f64)
    }
    fn begin_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_array(w)
    }
    fn end_array<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array(w)
    }
    fn begin_array_value<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_array_value(w, first)
    }
    fn end_array_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_array_value(w)
    }
    fn begin_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object(w)
    }
    fn end_object<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object(w)
    }
    fn begin_object_key<W: ?Sized + Write>(&mut self, w: &mut W, first: bool) -> std::io::Result<()> {
        self.0.begin_object_key(w, first)
    }
    fn begin_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.begin_object_value(w)
    }
    fn end_object_value<W: ?Sized + Write>(&mut self, w: &mut W) -> std::io::Result<()> {
        self.0.end_object_value(w)
    }
}

pub fn to_json_string<T: Serialize + ?Sized>(value: &T) -> Result<String> {
    let mut buf = Vec::new();
    let mut ser =
        serde_json::Serializer::with_formatter(&mut buf, FixedDigits(PrettyFormatter::new()));
    value.serialize(&mut ser)?;
    buf.push(b'\n');
    Ok(String::from_utf8(buf).expect("serde_json emits UTF-8"))
}

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<()> {
    fs::write(path, to_json_string(value)?)?;
    Ok(())
}

/// Path of the grid sidecar for a field CSV: `wave.csv` → `wave.grid.json`.
pub fn sidecar_path(csv: &Path) -> PathBuf {
    csv.with_extension("grid.json")
}

pub fn field_csv_string(f: &Field) -> String {
    let mut s = String::with_capacity(f.len() * 48 + 8);
    s.push_str("x,value\n");
    for (x, v) in f.grid().coords().iter().zip(f.values()) {
        s.push_str(&format!("{x:.16e},{v:.16e}\n"));
    }
    s
}

/// Writes the CSV and its grid sidecar; returns both paths.
pub fn write_field_csv(path: &Path, f: &Field) -> Result<Vec<PathBuf>> {
    fs::write(path, field_csv_string(f))?;
    let side = sidecar_path(path);
    write_json(&side, f.grid())?;
    Ok(vec![path.to_path_buf(), side])
}

/// Reads a field CSV. The grid comes from the sidecar when present, else it
/// is inferred from the sample count and the first abscissa `x₀ = −L`.
pub fn read_field_csv(path: &Path) -> Result<Field> {
    let bad = |message: String| Error::Parse {
        path: path.to_path_buf(),
        message,
    };
    let text = fs::read_to_string(path)?;
    let mut lines = text.lines();
    match lines.next() {
        Some(h) if h.trim() == "x,value" => {}
        other => return Err(bad(format!("expected header `x,value`, found {other:?}"))),
    }
    let mut xs = Vec::new();
    let mut vs = Vec::new();
    for (i, line) in lines.enumerate() {
        if line.trim().is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let mut next = || -> Result<f64> {
            parts
                .next()
                .ok_or_else(|| bad(format!("line {}: missing column", i + 2)))?
                .trim()
                .parse::<f64>()
                .map_err(|e| bad(format!("line {}: {e}", i + 2)))
        };
        xs.push(next()?);
        vs.push(next()?);
    }
    let side = sidecar_path(path);
    let grid = if side.exists() {
        serde_json::from_str::<Grid>(&fs::read_to_string(&side)?)?
    } else {
        let x0 = *xs.first().ok_or_else(|| bad("no samples".into()))?;
        Grid::new(vs.len(), -x0)?
    };
    if grid.n() != vs.len() {
        return Err(bad(format!(
            "{} samples but the grid has {}",
            vs.len(),
            grid.n()
        )));
    }
    Field::new(grid, vs)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_round_trip_is_exact() {
        let dir = tempfile::tempdir().unwrap();
        let g = Grid::new(64, 7.5).unwrap();
        let f = Field::from_fn(g, |x| (x / 3.0).sin() / (1.0 + x * x)).unwrap();
        let path = dir.path().join("f.csv");
        let written = write_field_csv(&path, &f).unwrap();
        assert_eq!(written.len(), 2);
        let back = read_field_csv(&path).unwrap();
        assert_eq!(back, f);
        std::fs::remove_file(sidecar_path(&path)).unwrap();
        assert_eq!(read_field_csv(&path).unwrap(), f);
    }

    #[test]
    fn json_digits_and_nonfinite() {
        let s = to_json_string(&(0.1f64, f64::NAN, 3u32)).unwrap();
        assert!(s.contains("1.0000000000000001e-1"));
        assert!(s.contains("null"));
        assert!(s.contains('3'));
        let v: (f64, Option<f64>, u32) = serde_json::from_str(&s).unwrap();
        assert_eq!(v.0, 0.1);
    }
}
