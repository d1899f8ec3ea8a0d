//! Portable grid files.
//!
//! ```text
//! HOPFGRID 1
//! name potential
//! nx 3
//! ny 2
//! origin -1.0 -1.0
//! spacing 0.5 0.5
//! values
//! 0.0 0.25 NaN
//! 0.0 0.5 1.0
//! links 2
//! 1.0
//! 0.0
//! ```
//!
//! Rows run along x, bottom row first. Floats are written in the shortest
//! form that parses back to the same value. The `links` trailer holds the
//! boundary values at cut links and is optional.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;
use std::sync::Arc;

use hopf_core::{Grid, Point, ScalarField, Topology};

use crate::LabError;

const MAGIC: &str = "HOPFGRID 1";

#[derive(Debug, Clone, PartialEq)]
pub struct GridFile {
    pub name: String,
    pub grid: Grid,
    pub values: Vec<f64>,
    pub links: Option<Vec<f64>>,
}

impl GridFile {
    pub fn from_field(name: &str, field: &ScalarField) -> Self {
        GridFile { name: name.to_string(), grid: *field.grid(), values: field.values().to_vec(), links: Some(field.link_values().to_vec()) }
    }

    pub fn render(&self) -> String {
        let g = &self.grid;
        let mut s = String::with_capacity(24 * self.values.len() + 128);
        let _ = writeln!(s, "{MAGIC}");
        let _ = writeln!(s, "name {}", self.name);
        let _ = writeln!(s, "nx {}", g.nx);
        let _ = writeln!(s, "ny {}", g.ny);
        let _ = writeln!(s, "origin {:?} {:?}", g.origin.x, g.origin.y);
        let _ = writeln!(s, "spacing {:?} {:?}", g.dx, g.dy);
        s.push_str("values\n");
        for row in self.values.chunks(g.nx) {
            let mut first = true;
            for v in row {
                if !first {
                    s.push(' ');
                }
                first = false;
                let _ = write!(s, "{v:?}");
            }
            s.push('\n');
        }
        if let Some(links) = &self.links {
            let _ = writeln!(s, "links {}", links.len());
            for v in links {
                let _ = writeln!(s, "{v:?}");
            }
        }
        s
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        let mut lines = text.lines();
        if lines.next().map(str::trim) != Some(MAGIC) {
            return Err("missing HOPFGRID header".into());
        }
        let mut field = |key: &str| -> Result<Vec<String>, String> {
            let line = lines.next().ok_or_else(|| format!("missing {key}"))?;
            let mut parts = line.split_whitespace();
            if parts.next() != Some(key) {
                return Err(format!("expected {key}, found {line:?}"));
            }
            Ok(parts.map(str::to_string).collect())
        };
        let name = field("name")?.join(" ");
        let num = |v: &[String], k: usize| -> Result<f64, String> { v.get(k).ok_or("short header line")?.parse::<f64>().map_err(|e| e.to_string()) };
        let nx: usize = field("nx")?.first().ok_or("nx")?.parse().map_err(|_| "bad nx")?;
        let ny: usize = field("ny")?.first().ok_or("ny")?.parse().map_err(|_| "bad ny")?;
        let o = field("origin")?;
        let sp = field("spacing")?;
        let grid = Grid { nx, ny, origin: Point::new(num(&o, 0)?, num(&o, 1)?), dx: num(&sp, 0)?, dy: num(&sp, 1)? };
        field("values")?;
        let mut values = Vec::with_capacity(nx * ny);
        for j in 0..ny {
            let line = lines.next().ok_or_else(|| format!("missing row {j}"))?;
            let before = values.len();
            for tok in line.split_whitespace() {
                values.push(tok.parse::<f64>().map_err(|e| format!("row {j}: {e}"))?);
            }
            if values.len() - before != nx {
                return Err(format!("row {j} has {} values, expected {nx}", values.len() - before));
            }
        }
        let links = match lines.next() {
            None => None,
            Some(line) => {
                let mut parts = line.split_whitespace();
                if parts.next() != Some("links") {
                    return Err(format!("unexpected line {line:?}"));
                }
                let n: usize = parts.next().ok_or("links count")?.parse().map_err(|_| "bad links count")?;
                let mut v = Vec::with_capacity(n);
                for _ in 0..n {
                    let line = lines.next().ok_or("missing link value")?;
                    v.push(line.trim().parse::<f64>().map_err(|e| e.to_string())?);
                }
                Some(v)
            }
        };
        Ok(GridFile { name, grid, values, links })
    }

    pub fn write(&self, path: &Path) -> Result<(), LabError> {
        fs::write(path, self.render()).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))
    }

    /// `MissingArtifact` when the file does not exist.
    pub fn read(path: &Path) -> Result<Self, LabError> {
        if !path.is_file() {
            return Err(LabError::MissingArtifact(path.display().to_string()));
        }
        let text = fs::read_to_string(path).map_err(|e| LabError::Io(format!("{}: {e}", path.display())))?;
        Self::parse(&text).map_err(|e| LabError::Artifact(format!("{}: {e}", path.display())))
    }

    /// Field on `topo`; the grid must match exactly and the file must carry
    /// link values.
    pub fn into_field(self, topo: &Arc<Topology>) -> Result<ScalarField, LabError> {
        if self.grid != *topo.grid() {
            return Err(LabError::Artifact(format!("grid of {} does not match the configuration", self.name)));
        }
        let links = self.links.ok_or_else(|| LabError::Artifact(format!("{} has no link values", self.name)))?;
        ScalarField::from_parts(topo, self.values, links).ok_or_else(|| LabError::Artifact(format!("{} does not fit the ring", self.name)))
    }
}
