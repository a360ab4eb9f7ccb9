//! Text serialization shared by the CLI dumps and the sweep output.

use std::io::{self, Write};

use crate::{Complex64, ComplexMatrix};

/// Header of coordinate-format matrix dumps.
pub const COORDINATE_HEADER: &str = "row,col,re,im";

/// Round-trippable float with 17 significant digits.
pub fn format_float(v: f64) -> String {
    format!("{v:.16e}")
}

/// Writes `row,col,re,im` lines, header first, LF endings.
pub fn write_coordinate_csv<W, I>(mut out: W, entries: I) -> io::Result<()>
where
    W: Write,
    I: IntoIterator<Item = (usize, usize, Complex64)>,
{
    writeln!(out, "{COORDINATE_HEADER}")?;
    for (r, c, v) in entries {
        writeln!(out, "{r},{c},{},{}", format_float(v.re), format_float(v.im))?;
    }
    Ok(())
}

/// Every entry of a dense matrix, zeros included, in row-major order.
pub fn write_dense_csv<W: Write>(out: W, m: &ComplexMatrix) -> io::Result<()> {
    let (rows, cols) = m.shape();
    write_coordinate_csv(
        out,
        (0..rows).flat_map(|r| (0..cols).map(move |c| (r, c, m[(r, c)]))),
    )
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn float_format_is_exact_and_17_digits() {
        for v in [0.1, 1.0 / 3.0, -2.5e-300, 123456.789] {
            let s = format_float(v);
            assert_eq!(s.parse::<f64>().unwrap(), v);
            let mantissa = s.split('e').next().unwrap().trim_start_matches('-');
            assert_eq!(mantissa.chars().filter(char::is_ascii_digit).count(), 17);
        }
    }

    #[test]
    fn dense_dump_lines() {
        let m = ComplexMatrix::identity(3, 3);
        let mut buf = Vec::new();
        write_dense_csv(&mut buf, &m).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<_> = text.lines().collect();
        assert_eq!(lines[0], COORDINATE_HEADER);
        assert_eq!(lines.len(), 10);
        assert!(!text.contains('\r'));
        assert!(lines[1].starts_with("0,0,1.0000000000000000e0,"));
    }
}
