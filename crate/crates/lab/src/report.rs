//! JSON and CSV emission. Floats use the shortest round-trip form, so equal
//! inputs give byte-identical files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use serde::Serialize;

use crate::LabError;

pub fn write_json<T: Serialize + ?Sized>(path: &Path, value: &T) -> Result<(), LabError> {
    let mut text = serde_json::to_string_pretty(value).map_err(|e| LabError::Io(e.to_string()))?;
    text.push('\n');
    fs::write(path, text).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))
}

/// Comma-separated table with a header row.
pub fn render_csv<I, R>(header: &[&str], rows: I) -> String
where
    I: IntoIterator<Item = R>,
    R: AsRef<[f64]>,
{
    let mut s = header.join(",");
    s.push('\n');
    for row in rows {
        for (k, v) in row.as_ref().iter().enumerate() {
            if k > 0 {
                s.push(',');
            }
            let _ = write!(s, "{v:?}");
        }
        s.push('\n');
    }
    s
}

pub fn write_csv<I, R>(path: &Path, header: &[&str], rows: I) -> Result<(), LabError>
where
    I: IntoIterator<Item = R>,
    R: AsRef<[f64]>,
{
    fs::write(path, render_csv(header, rows)).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn csv_has_header_and_exact_floats() {
        let s = render_csv(&["a", "b"], [[0.1, 1.0 / 3.0], [2.0, -1e-20]]);
        assert_eq!(s, "a,b\n0.1,0.3333333333333333\n2.0,-1e-20\n");
        let back: f64 = s.lines().nth(1).unwrap().split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(back, 1.0 / 3.0);
    }
}
