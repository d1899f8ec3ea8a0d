//! Run configuration: one TOML file with named sections.
//!
//! ```toml
//! seed = 7
//! stages = ["check", "solve", "verify"]
//!
//! [function]
//! kind = "power"        # power | minimal_surface | table
//! p = 3.0
//!
//! [modulus]
//! kind = "power"        # power | log_power | table
//! a = 0.5
//!
//! [geometry]
//! kind = "dini_cap"     # annulus | dini_cap
//! r_d = 0.25
//!
//! [grid]
//! resolution = 257
//! ```
//!
//! Relative table paths are resolved against the directory of the config
//! file.

use std::fs;
use std::path::{Path, PathBuf};

use hopf_core::geometry::{make_annulus, make_rings, ConvexRing, DiniModulus};
use hopf_core::orlicz::ConditionOptions;
use hopf_core::solver::{LinearSolver, SolveOptions};
use hopf_core::{ConvexDomain, Grid, OrliczFunction, Point};
use serde::{Deserialize, Serialize};

use crate::LabError;

pub const MIN_RESOLUTION: usize = 33;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Check,
    Solve,
    Verify,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum FunctionSpec {
    Power {
        p: f64,
    },
    MinimalSurface {
        #[serde(default = "default_t_max")]
        t_max: f64,
    },
    /// Two-column CSV `t,h` starting at `t = 0`.
    Table {
        table: PathBuf,
    },
}

fn default_t_max() -> f64 {
    1e3
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum ModulusSpec {
    Power {
        a: f64,
    },
    LogPower {
        q: f64,
    },
    /// Two-column CSV `t,eps`.
    Table {
        table: PathBuf,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case", tag = "kind", deny_unknown_fields)]
pub enum GeometrySpec {
    Annulus {
        r1: f64,
        r2: f64,
    },
    /// Inner ring `K ∖ B_{r_D/2}((0, r_D))` of the cap built from the
    /// modulus section.
    DiniCap {
        r_d: f64,
        /// Corner fillet radius; one grid cell when absent.
        fillet: Option<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridSpec {
    /// Square extent `[lo, hi]²`; derived from the geometry when absent.
    pub extent: Option<[f64; 2]>,
    pub resolution: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SolverSpec {
    pub delta_schedule: Vec<f64>,
    pub tol: f64,
    pub max_iter: usize,
    pub linear_solver: LinearSolverSpec,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LinearSolverSpec {
    ConjugateGradient,
    Banded,
}

impl Default for SolverSpec {
    fn default() -> Self {
        let d = SolveOptions::default();
        SolverSpec { delta_schedule: d.delta_schedule, tol: d.tol, max_iter: d.max_iter, linear_solver: LinearSolverSpec::ConjugateGradient }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct CheckSpec {
    /// Exponent of the coercivity comparison; `p` for power laws, else 2.
    pub p_guess: Option<f64>,
    pub range: [f64; 2],
    pub samples: usize,
    pub delta2_t0: f64,
    pub coercivity_max_spread: f64,
    pub delta2_cap: f64,
    /// Upper end of the Dini integral.
    pub dini_t1: Option<f64>,
}

impl Default for CheckSpec {
    fn default() -> Self {
        let d = ConditionOptions::default();
        CheckSpec {
            p_guess: None,
            range: [1e-3, 1e2],
            samples: d.samples,
            delta2_t0: d.delta2_t0,
            coercivity_max_spread: d.coercivity_max_spread,
            delta2_cap: d.delta2_cap,
            dini_t1: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ZetaSpec {
    Field,
    Modulus,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct VerifySpec {
    pub zeta: ZetaSpec,
    pub bins: usize,
    /// Constant of the second-derivative estimate, for `zeta = "modulus"`.
    pub c_d: f64,
    /// `(α, β)`; `(1, C)` for power laws, otherwise searched along flow lines.
    pub alpha: Option<f64>,
    pub beta: Option<f64>,
    pub flow_lines: usize,
    /// `f(1)`; the minimum of the potential on the inner boundary when absent.
    pub target: Option<f64>,
    pub hopf_point: Option<[f64; 2]>,
    pub hopf_radii: Option<Vec<f64>>,
    /// Comparison tolerance; twice the harmonic benchmark error when absent.
    pub tol_cmp: Option<f64>,
}

impl Default for VerifySpec {
    fn default() -> Self {
        VerifySpec {
            zeta: ZetaSpec::Field,
            bins: 100,
            c_d: 1.0,
            alpha: None,
            beta: None,
            flow_lines: 8,
            target: None,
            hopf_point: None,
            hopf_radii: None,
            tol_cmp: None,
        }
    }
}

fn default_stages() -> Vec<Stage> {
    vec![Stage::Check, Stage::Solve, Stage::Verify]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_stages")]
    pub stages: Vec<Stage>,
    /// Output directory; the command line takes precedence.
    pub out: Option<PathBuf>,
    pub function: FunctionSpec,
    pub modulus: Option<ModulusSpec>,
    pub geometry: GeometrySpec,
    pub grid: GridSpec,
    #[serde(default)]
    pub solver: SolverSpec,
    #[serde(default)]
    pub check: CheckSpec,
    #[serde(default)]
    pub verify: VerifySpec,
}

fn read_pairs(path: &Path) -> Result<(Vec<f64>, Vec<f64>), LabError> {
    let text = fs::read_to_string(path).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
    let (mut a, mut b) = (Vec::new(), Vec::new());
    for (k, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut it = line.split(',').map(str::trim);
        let (Some(x), Some(y), None) = (it.next(), it.next(), it.next()) else {
            return Err(LabError::Config(format!("{}:{}: expected two columns", path.display(), k + 1)));
        };
        match (x.parse::<f64>(), y.parse::<f64>()) {
            (Ok(x), Ok(y)) => {
                a.push(x);
                b.push(y);
            }
            // a header row
            _ if a.is_empty() => continue,
            _ => return Err(LabError::Config(format!("{}:{}: not a number", path.display(), k + 1))),
        }
    }
    Ok((a, b))
}

impl RunConfig {
    pub fn parse(text: &str, base: &Path) -> Result<Self, LabError> {
        let mut cfg: RunConfig = toml::from_str(text).map_err(|e| LabError::Config(e.to_string()))?;
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, LabError> {
        let text = fs::read_to_string(path).map_err(|e| LabError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Self::parse(&text, &base)
    }

    fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let FunctionSpec::Table { table } = &mut self.function {
            fix(table);
        }
        if let Some(ModulusSpec::Table { table }) = &mut self.modulus {
            fix(table);
        }
    }

    pub fn validate(&self) -> Result<(), LabError> {
        let bad = |m: &str| Err(LabError::Config(m.to_string()));
        if self.grid.resolution < MIN_RESOLUTION {
            return bad("grid resolution must be at least 33");
        }
        if self.stages.is_empty() || self.stages.windows(2).any(|s| s[1] <= s[0]) {
            return bad("stages must be a non-empty increasing subsequence of check, solve, verify");
        }
        for p in [self.table_path(), self.modulus_table_path()].into_iter().flatten() {
            if !p.is_file() {
                return Err(LabError::Config(format!("table file {} does not exist", p.display())));
            }
        }
        if matches!(self.geometry, GeometrySpec::DiniCap { .. }) && self.modulus.is_none() {
            return bad("a dini_cap geometry needs a [modulus] section");
        }
        if self.verify.zeta == ZetaSpec::Modulus && self.modulus.is_none() {
            return bad("zeta = \"modulus\" needs a [modulus] section");
        }
        if let Some([lo, hi]) = self.grid.extent {
            if !(hi > lo) {
                return bad("grid extent must be increasing");
            }
        }
        self.solve_options()?;
        Ok(())
    }

    fn table_path(&self) -> Option<&Path> {
        match &self.function {
            FunctionSpec::Table { table } => Some(table),
            _ => None,
        }
    }

    fn modulus_table_path(&self) -> Option<&Path> {
        match &self.modulus {
            Some(ModulusSpec::Table { table }) => Some(table),
            _ => None,
        }
    }

    /// Applies `--grid` and `--p` overrides.
    pub fn override_with(&mut self, grid: Option<usize>, p: Option<f64>) -> Result<(), LabError> {
        if let Some(n) = grid {
            self.grid.resolution = n;
        }
        if let Some(p) = p {
            match &mut self.function {
                FunctionSpec::Power { p: q } => *q = p,
                _ => return Err(LabError::Config("--p needs a power function".into())),
            }
        }
        self.validate()
    }

    pub fn needs(&self, stage: Stage) -> Result<(), LabError> {
        if self.stages.contains(&stage) {
            Ok(())
        } else {
            Err(LabError::Config(format!("stage {stage:?} is not listed in stages")))
        }
    }

    pub fn orlicz(&self) -> Result<OrliczFunction, LabError> {
        let r = match &self.function {
            FunctionSpec::Power { p } => OrliczFunction::power(*p),
            FunctionSpec::MinimalSurface { t_max } => OrliczFunction::minimal_surface(*t_max),
            FunctionSpec::Table { table } => {
                let (t, h) = read_pairs(table)?;
                OrliczFunction::from_table(t, h)
            }
        };
        r.map_err(|e| LabError::Config(format!("function: {e}")))
    }

    pub fn is_power(&self) -> bool {
        matches!(self.function, FunctionSpec::Power { .. })
    }

    pub fn p_guess(&self) -> f64 {
        match (self.check.p_guess, &self.function) {
            (Some(p), _) => p,
            (None, FunctionSpec::Power { p }) => *p,
            _ => 2.0,
        }
    }

    pub fn condition_options(&self) -> ConditionOptions {
        ConditionOptions {
            samples: self.check.samples,
            delta2_t0: self.check.delta2_t0,
            coercivity_max_spread: self.check.coercivity_max_spread,
            delta2_cap: self.check.delta2_cap,
        }
    }

    pub fn modulus(&self) -> Result<Option<DiniModulus>, LabError> {
        let r = match &self.modulus {
            None => return Ok(None),
            Some(ModulusSpec::Power { a }) => DiniModulus::power(*a),
            Some(ModulusSpec::LogPower { q }) => DiniModulus::log_power(*q),
            Some(ModulusSpec::Table { table }) => {
                let (t, e) = read_pairs(table)?;
                DiniModulus::table(t, e)
            }
        };
        r.map(Some).map_err(|e| LabError::Config(format!("modulus: {e}")))
    }

    pub fn solve_options(&self) -> Result<SolveOptions, LabError> {
        let opts = SolveOptions {
            delta_schedule: self.solver.delta_schedule.clone(),
            tol: self.solver.tol,
            max_iter: self.solver.max_iter,
            linear_solver: match self.solver.linear_solver {
                LinearSolverSpec::ConjugateGradient => LinearSolver::ConjugateGradientLike,
                LinearSolverSpec::Banded => LinearSolver::DirectBanded,
            },
        };
        opts.validate().map_err(|e| LabError::Config(format!("solver: {e}")))?;
        Ok(opts)
    }

    pub fn grid(&self) -> Result<Grid, LabError> {
        let [lo, hi] = match (self.grid.extent, &self.geometry) {
            (Some(e), _) => e,
            (None, GeometrySpec::Annulus { r2, .. }) => [-1.05 * r2, 1.05 * r2],
            (None, GeometrySpec::DiniCap { r_d, .. }) => [-4.0 * r_d, 4.0 * r_d],
        };
        Grid::square(lo, hi, self.grid.resolution).ok_or_else(|| LabError::Config("invalid grid".into()))
    }

    pub fn ring(&self) -> Result<ConvexRing, LabError> {
        let grid = self.grid()?;
        let geo = |e: hopf_core::GeometryError| LabError::Config(format!("geometry: {e}"));
        match &self.geometry {
            GeometrySpec::Annulus { r1, r2 } => make_annulus(*r1, *r2, grid).map_err(geo),
            GeometrySpec::DiniCap { r_d, fillet } => {
                let eps = self.modulus()?.ok_or_else(|| LabError::Config("dini_cap needs a modulus".into()))?;
                let k = ConvexDomain::dini_cap(*r_d, &eps, fillet.unwrap_or(grid.dx)).map_err(geo)?;
                Ok(make_rings(&k, *r_d, &grid).map_err(geo)?.inner_ring)
            }
        }
    }

    /// Boundary point of the Hopf estimate: the cap's tip or `(r2, 0)`.
    pub fn hopf_point(&self) -> Point {
        if let Some([x, y]) = self.verify.hopf_point {
            return Point::new(x, y);
        }
        match self.geometry {
            GeometrySpec::Annulus { r2, .. } => Point::new(r2, 0.0),
            GeometrySpec::DiniCap { .. } => Point::ORIGIN,
        }
    }

    pub fn hopf_radii(&self) -> Vec<f64> {
        if let Some(r) = &self.verify.hopf_radii {
            return r.clone();
        }
        let scale = match self.geometry {
            GeometrySpec::Annulus { r1, r2 } => r2 - r1,
            GeometrySpec::DiniCap { r_d, .. } => r_d,
        };
        [0.4, 0.2, 0.1, 0.05].iter().map(|f| f * scale).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const MINIMAL: &str = r#"
        [function]
        kind = "power"
        p = 3.0
        [geometry]
        kind = "annulus"
        r1 = 1.0
        r2 = 2.0
        [grid]
        resolution = 65
    "#;

    #[test]
    fn defaults_fill_in() {
        let cfg = RunConfig::parse(MINIMAL, Path::new(".")).unwrap();
        assert_eq!(cfg.stages, default_stages());
        assert_eq!(cfg.solver.max_iter, 200);
        assert_eq!(cfg.verify.bins, 100);
        assert_eq!(cfg.p_guess(), 3.0);
        assert_eq!(cfg.hopf_point(), Point::new(2.0, 0.0));
        let g = cfg.grid().unwrap();
        assert!((g.origin.x + 2.1).abs() < 1e-12);
    }

    #[test]
    fn rejects_small_grids_and_bad_stage_order() {
        let small = MINIMAL.replace("65", "17");
        assert!(matches!(RunConfig::parse(&small, Path::new(".")), Err(LabError::Config(_))));
        let order = format!("stages = [\"verify\", \"solve\"]\n{MINIMAL}");
        assert!(matches!(RunConfig::parse(&order, Path::new(".")), Err(LabError::Config(_))));
    }

    #[test]
    fn missing_table_is_a_config_error() {
        let text = MINIMAL.replace("kind = \"power\"\n        p = 3.0", "kind = \"table\"\n        table = \"nope.csv\"");
        let err = RunConfig::parse(&text, Path::new("/nonexistent")).unwrap_err();
        assert!(err.to_string().contains("nope.csv"));
    }

    #[test]
    fn unknown_keys_are_rejected() {
        let text = MINIMAL.replace("resolution = 65", "resolution = 65\nresolutoin = 3");
        assert!(RunConfig::parse(&text, Path::new(".")).is_err());
    }

    #[test]
    fn overrides_apply() {
        let mut cfg = RunConfig::parse(MINIMAL, Path::new(".")).unwrap();
        cfg.override_with(Some(129), Some(1.5)).unwrap();
        assert_eq!(cfg.grid.resolution, 129);
        assert_eq!(cfg.function, FunctionSpec::Power { p: 1.5 });
    }
}
