use std::fs;
use std::path::{Path, PathBuf};
use std::sync::Arc;

use hopf_core::barrier::{flow_line_weights, tune_m, verify_with, zeta_from_field, zeta_from_modulus, BarrierProfile, SubsolutionReport, ZetaProfile};
use hopf_core::field::Side;
use hopf_core::hopf::{comparison_check, hopf_constant, tol_cmp, ComparisonReport, HopfReport};
use hopf_core::orlicz::{check_condition_r, check_conditions, ConditionReport};
use hopf_core::solver::{gradient_bounds, level_diagnostics, solve_h_potential, solve_harmonic, GradientBounds, LevelDiagnostics, LogEntry, SolveError, Solved};
use hopf_core::{CellKind, OrliczFunction, ScalarField, Topology};
use serde::Serialize;
use serde_json::json;

use crate::config::{GeometrySpec, RunConfig, Stage, ZetaSpec};
use crate::gridio::GridFile;
use crate::report::{write_csv, write_json};
use crate::{LabError, EXIT_NONCONVERGENCE, EXIT_OK, EXIT_VERIFY};

pub const POTENTIAL: &str = "potential.grid";
pub const HARMONIC: &str = "harmonic.grid";

/// Exit code of a command and the lines it reports on stdout.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Outcome {
    pub code: u8,
    pub lines: Vec<String>,
}

impl Outcome {
    fn new() -> Self {
        Outcome { code: EXIT_OK, lines: Vec::new() }
    }

    fn line(&mut self, s: impl Into<String>) {
        self.lines.push(s.into());
    }

    fn verdict(&mut self, name: &str, pass: bool) {
        self.line(format!("{name}: {}", if pass { "pass" } else { "FAIL" }));
        if !pass && self.code == EXIT_OK {
            self.code = EXIT_VERIFY;
        }
    }
}

fn prepare(out: &Path) -> Result<PathBuf, LabError> {
    fs::create_dir_all(out).map_err(|e| LabError::Io(format!("{}: {e}", out.display())))?;
    Ok(out.to_path_buf())
}

/// Structural conditions on `F` and the Dini test of the modulus.
pub fn cmd_check(cfg: &RunConfig, out: &Path) -> Result<Outcome, LabError> {
    cfg.needs(Stage::Check)?;
    let out = prepare(out)?;
    let of = cfg.orlicz()?;
    let mut o = Outcome::new();
    let [lo, hi] = cfg.check.range;
    let hi = hi.min(0.5 * of.t_max());
    if !(lo > 0.0 && hi > lo) {
        return Err(LabError::Config("check range must lie in (0, t_max/2]".into()));
    }
    let reports = check_conditions(&of, cfg.p_guess(), (lo, hi), &cfg.condition_options());
    write_json(&out.join("conditions.json"), &json!({ "function": cfg.function, "p_guess": cfg.p_guess(), "range": [lo, hi], "reports": reports }))?;
    for r in &reports {
        o.verdict(&format!("{:?}", r.condition), r.pass);
    }
    if let Some(eps) = cfg.modulus()? {
        let t1 = cfg.check.dini_t1.unwrap_or(eps.t_cap);
        match eps.report(t1) {
            Ok(rep) => {
                write_json(&out.join("dini.json"), &json!({ "modulus": eps, "t1": t1, "report": rep }))?;
                o.line(format!("dini integral {:?} over (0, {t1:?}]", rep.integral));
                o.verdict("Dini", rep.converges);
                o.verdict("ConvexDini", rep.convex_dini);
            }
            Err(e) => {
                write_json(&out.join("dini.json"), &json!({ "modulus": eps, "t1": t1, "error": e.to_string() }))?;
                o.line(format!("dini: {e}"));
                o.verdict("Dini", false);
            }
        }
    }
    Ok(o)
}

fn mask_file(topo: &Topology) -> GridFile {
    let values = (0..topo.grid().len())
        .map(|c| match topo.kind(c) {
            CellKind::Interior => 0.0,
            CellKind::InnerBoundary => 1.0,
            CellKind::OuterBoundary => 2.0,
            CellKind::Outside => 3.0,
        })
        .collect();
    GridFile { name: "mask".into(), grid: *topo.grid(), values, links: None }
}

fn diag_file(name: &str, topo: &Topology, values: &[f64]) -> GridFile {
    GridFile { name: name.into(), grid: *topo.grid(), values: values.to_vec(), links: None }
}

fn write_log(path: &Path, log: &[LogEntry]) -> Result<(), LabError> {
    write_csv(path, &["iteration", "delta", "energy", "residual"], log.iter().map(|e| [e.iteration as f64, e.delta, e.energy, e.residual]))
}

#[derive(Serialize)]
struct SolveSummary {
    converged: bool,
    iterations: usize,
    energy: f64,
    residual: f64,
    error: Option<String>,
}

// Converged solve, or the last iterate of a non-converged one.
fn settle(r: Result<Solved, SolveError>) -> Result<(Solved, Option<String>), LabError> {
    match r {
        Ok(s) => Ok((s, None)),
        Err(e @ SolveError::NonConvergence { .. }) => {
            let msg = e.to_string();
            let SolveError::NonConvergence { last, .. } = e else { unreachable!() };
            Ok((*last, Some(msg)))
        }
        Err(e @ SolveError::LineSearchStall { .. }) => Err(LabError::Solver(e.to_string())),
        Err(e) => Err(LabError::Config(format!("solve: {e}"))),
    }
}

fn summary(s: &Solved, err: &Option<String>) -> SolveSummary {
    SolveSummary { converged: err.is_none(), iterations: s.log.last().map_or(0, |e| e.iteration), energy: s.energy, residual: s.residual, error: err.clone() }
}

/// Harmonic and H-potentials of the ring, their diagnostics and logs.
pub fn cmd_solve(cfg: &RunConfig, out: &Path) -> Result<Outcome, LabError> {
    cfg.needs(Stage::Solve)?;
    let out = prepare(out)?;
    let of = cfg.orlicz()?;
    let opts = cfg.solve_options()?;
    let ring = cfg.ring()?;
    let topo = Topology::new(&ring);
    let mut o = Outcome::new();
    write_json(&out.join("geometry.json"), &json!({ "geometry": cfg.geometry, "grid": ring.grid, "gap": ring.gap, "unknowns": topo.unknowns(), "links": topo.links().len() }))?;
    mask_file(&topo).write(&out.join("mask.grid"))?;

    let harmonic = solve_harmonic(&topo, &opts);
    let (w, w_err) = settle(harmonic)?;
    GridFile::from_field("harmonic", &w.field).write(&out.join(HARMONIC))?;
    let potential = solve_h_potential(&topo, &of, &opts);
    let (u, u_err) = settle(potential)?;
    GridFile::from_field("potential", &u.field).write(&out.join(POTENTIAL))?;
    write_log(&out.join("convergence.csv"), &u.log)?;

    let mut diagnostics = serde_json::Map::new();
    match level_diagnostics(&w.field, 1e-6) {
        Ok(d) => {
            diag_file("grad_norm", &topo, &d.grad_norm).write(&out.join("grad_norm.grid"))?;
            diag_file("inf_lap", &topo, &d.inf_lap).write(&out.join("inf_lap.grid"))?;
            diag_file("curvature", &topo, &d.curvature).write(&out.join("curvature.grid"))?;
            diagnostics.insert("excluded".into(), json!(d.excluded.len()));
        }
        Err(e) => {
            diagnostics.insert("error".into(), json!(e.to_string()));
        }
    }
    let bounds = gradient_bounds(&w.field).map_err(|e| e.to_string());
    write_json(
        &out.join("solve.json"),
        &json!({
            "harmonic": summary(&w, &w_err),
            "potential": summary(&u, &u_err),
            "gradient_bounds": bounds,
            "diagnostics": diagnostics,
        }),
    )?;
    o.line(format!("harmonic: residual {:?}", w.residual));
    o.line(format!("potential: {} iterations, residual {:?}", u.log.last().map_or(0, |e| e.iteration), u.residual));
    if let Ok(b) = &bounds {
        o.line(format!("gradient bounds: c = {:?}, C = {:?}", b.c, b.big_c));
    }
    for err in [&w_err, &u_err].into_iter().flatten() {
        o.line(format!("not converged: {err}"));
        o.code = EXIT_NONCONVERGENCE;
    }
    Ok(o)
}

fn load_fields(cfg: &RunConfig, out: &Path) -> Result<(Arc<Topology>, ScalarField, ScalarField), LabError> {
    let u_file = GridFile::read(&out.join(POTENTIAL))?;
    let w_file = GridFile::read(&out.join(HARMONIC))?;
    let topo = Topology::new(&cfg.ring()?);
    let u = u_file.into_field(&topo)?;
    let w = w_file.into_field(&topo)?;
    Ok((topo, u, w))
}

fn build_zeta(cfg: &RunConfig, w: &ScalarField, diag: &LevelDiagnostics, bounds: &GradientBounds) -> Result<ZetaProfile, String> {
    match cfg.verify.zeta {
        ZetaSpec::Field => zeta_from_field(w, diag, cfg.verify.bins).map_err(|e| e.to_string()),
        ZetaSpec::Modulus => {
            let eps = cfg.modulus().map_err(|e| e.to_string())?.ok_or("no modulus")?;
            zeta_from_modulus(&eps, bounds.c, bounds.big_c, cfg.verify.c_d).map_err(|e| format!("{e:?}: {e}"))
        }
    }
}

// (α, β): configured, the power-law choice (1, C), or a lattice search
// over flow-line weights.
fn alpha_beta(cfg: &RunConfig, of: &OrliczFunction, w: &ScalarField, big_c: f64) -> Result<(f64, f64, Option<ConditionReport>), String> {
    if let (Some(a), Some(b)) = (cfg.verify.alpha, cfg.verify.beta) {
        return Ok((a, b, None));
    }
    if cfg.is_power() {
        return Ok((cfg.verify.alpha.unwrap_or(1.0), cfg.verify.beta.unwrap_or(big_c), None));
    }
    let (weights, _) = flow_line_weights(w, cfg.verify.flow_lines).map_err(|e| e.to_string())?;
    let rep = check_condition_r(of, &weights, (1e-2, 1.0)).map_err(|e| e.to_string())?;
    let a = rep.constant("alpha").unwrap_or(1.0);
    let b = rep.constant("beta").unwrap_or(big_c);
    Ok((a, b, Some(rep)))
}

fn inner_minimum(u: &ScalarField) -> f64 {
    let topo = u.topology();
    topo.links().iter().zip(u.link_values()).filter(|(l, _)| l.side == Side::Inner).map(|(_, v)| *v).fold(f64::INFINITY, f64::min)
}

#[derive(Serialize)]
struct BarrierSummary {
    m: f64,
    alpha: f64,
    beta: f64,
    f1: f64,
    target: f64,
    f_prime_at_one: f64,
    zeta_l1_mass: f64,
}

fn barrier_summary(p: &BarrierProfile, target: f64) -> BarrierSummary {
    BarrierSummary { m: p.m, alpha: p.alpha, beta: p.beta, f1: p.f1, target, f_prime_at_one: p.f_prime_at_one(), zeta_l1_mass: p.zeta().l1_mass }
}

/// Barrier construction and certification, Hopf constant and comparison
/// on the fields written by [`cmd_solve`].
pub fn cmd_verify(cfg: &RunConfig, out: &Path) -> Result<Outcome, LabError> {
    cfg.needs(Stage::Verify)?;
    let (_, u, w) = load_fields(cfg, out)?;
    let of = cfg.orlicz()?;
    let mut o = Outcome::new();

    let diag = level_diagnostics(&w, 1e-6).map_err(|e| LabError::Artifact(format!("harmonic field: {e}")))?;
    let bounds = gradient_bounds(&w).map_err(|e| LabError::Artifact(format!("harmonic field: {e}")))?;

    // barrier
    let mut barrier: Option<BarrierProfile> = None;
    let zeta = build_zeta(cfg, &w, &diag, &bounds);
    let built = zeta.and_then(|z| {
        let (alpha, beta, cond) = alpha_beta(cfg, &of, &w, bounds.big_c)?;
        let target = cfg.verify.target.unwrap_or_else(|| inner_minimum(&u));
        let p = tune_m(&of, &z, alpha, beta, target).map_err(|e| format!("{e:?}: {e}"))?;
        Ok((p, target, cond))
    });
    match built {
        Ok((p, target, cond)) => {
            write_csv(&out.join("barrier.csv"), &["w", "f", "f_prime", "f_second"], p.table())?;
            write_json(&out.join("barrier.json"), &json!({ "profile": barrier_summary(&p, target), "gradient_bounds": bounds, "condition_r": cond }))?;
            o.line(format!("barrier: m = {:?}, f(1) = {:?}, f'(1) = {:?}", p.m, p.f1, p.f_prime_at_one()));
            barrier = Some(p);
        }
        Err(e) => {
            write_json(&out.join("barrier.json"), &json!({ "error": e }))?;
            o.line(format!("barrier: {e}"));
            o.verdict("barrier", false);
        }
    }

    // sub-solution
    if let Some(p) = &barrier {
        let rep: Result<SubsolutionReport, String> = verify_with(&w, &diag, p, &of).map_err(|e| e.to_string());
        match &rep {
            Ok(r) => {
                o.line(format!("subsolution: worst residual margin {:?} (threshold {:?})", r.residual.worst_margin, r.residual.threshold));
                o.verdict("subsolution", r.pass);
            }
            Err(e) => {
                o.line(format!("subsolution: {e}"));
                o.verdict("subsolution", false);
            }
        }
        write_json(&out.join("subsolution.json"), &rep)?;
    }

    // Hopf constant
    let hopf: Result<HopfReport, String> = hopf_constant(&u, cfg.hopf_point(), &cfg.hopf_radii()).map_err(|e| e.to_string());
    match &hopf {
        Ok(r) => {
            write_csv(&out.join("hopf.csv"), &["radius", "ratio"], r.table().into_iter().map(|(a, b)| [a, b]))?;
            o.line(format!("hopf: c = {:?} over {} radii ({} unresolved)", r.c_estimate, r.radii.len(), r.unresolved.len()));
            o.verdict("hopf", r.pass);
        }
        Err(e) => {
            o.line(format!("hopf: {e}"));
            o.verdict("hopf", false);
        }
    }
    write_json(&out.join("hopf.json"), &hopf)?;

    // comparison v = f(w) ≤ u
    if let Some(p) = &barrier {
        let tol = match cfg.verify.tol_cmp {
            Some(t) => t,
            None => tol_cmp(cfg.grid.resolution).map_err(|e| LabError::Config(format!("tol_cmp: {e}")))?,
        };
        let v = w.map(|x| p.f(x));
        let rep: Result<ComparisonReport, String> = comparison_check(&u, &v, &of, tol).map_err(|e| e.to_string());
        match &rep {
            Ok(r) => {
                o.line(format!("comparison: max(v - u) = {:?}, tol {:?}", r.max_violation, r.tol_cmp));
                o.verdict("comparison", r.pass);
            }
            Err(e) => {
                o.line(format!("comparison: {e}"));
                o.verdict("comparison", false);
            }
        }
        write_json(&out.join("comparison.json"), &rep)?;
    }
    let geometry = match cfg.geometry {
        GeometrySpec::Annulus { .. } => "annulus",
        GeometrySpec::DiniCap { .. } => "dini_cap",
    };
    write_json(&out.join("verify.json"), &json!({ "geometry": geometry, "pass": o.code == EXIT_OK, "lines": o.lines }))?;
    Ok(o)
}
