//! Configuration layer and the numerical studies behind the command line:
//! a demo solve with solution export, an H1 convergence-under-refinement
//! study, a Robin-parameter sensitivity study, and the polynomial
//! verifier run. Studies emit CSV files with fixed headers plus a
//! run-manifest echoing the configuration; identical inputs produce
//! byte-identical outputs.

use crate::error::{Error, Result};
use crate::fem_p1::{error_norms, manufactured_rhs, manufactured_solution, ScalarField2D};
use crate::legendre::run_appendix_scan;
use crate::mesh2d::{DiagonalRule, InterfaceDecl, InterfaceId, Point, Rect};
use crate::mortar::InterfaceGrid;
use crate::schwarz::{
    build_meshes, solve_gmres, solve_schwarz, DecompositionProblem, IterationRecord, SchwarzState,
    SolverReport,
};
use std::fmt::Write as _;
use std::path::Path;

pub const VERSION: &str = env!("CARGO_PKG_VERSION");

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaRule {
    Constant(f64),
    Min,
    Mean,
    Max,
    /// The optimized-parameter formula evaluated at the mean interface
    /// step (identical to `Mean`; on uniform conforming grids all four
    /// rules coincide).
    Opt,
}

impl std::fmt::Display for AlphaRule {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            AlphaRule::Constant(v) => write!(f, "constant {v}"),
            AlphaRule::Min => write!(f, "min"),
            AlphaRule::Mean => write!(f, "mean"),
            AlphaRule::Max => write!(f, "max"),
            AlphaRule::Opt => write!(f, "opt"),
        }
    }
}

impl std::str::FromStr for AlphaRule {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        let s = s.trim();
        match s {
            "min" => Ok(AlphaRule::Min),
            "mean" => Ok(AlphaRule::Mean),
            "max" => Ok(AlphaRule::Max),
            "opt" => Ok(AlphaRule::Opt),
            _ => {
                let rest = s.strip_prefix("constant").unwrap_or(s).trim();
                rest.parse::<f64>()
                    .map(AlphaRule::Constant)
                    .map_err(|_| format!("bad alpha rule: {s:?}"))
            }
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SolverKind {
    #[default]
    Schwarz,
    Gmres,
}

impl std::fmt::Display for SolverKind {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            SolverKind::Schwarz => write!(f, "schwarz"),
            SolverKind::Gmres => write!(f, "gmres"),
        }
    }
}

impl std::str::FromStr for SolverKind {
    type Err = String;
    fn from_str(s: &str) -> std::result::Result<Self, String> {
        match s.trim() {
            "schwarz" => Ok(SolverKind::Schwarz),
            "gmres" => Ok(SolverKind::Gmres),
            other => Err(format!("bad solver: {other:?} (schwarz|gmres)")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SubdomainSpec {
    pub rect: Rect,
    pub nx: usize,
    pub ny: usize,
}

/// Full description of a study run. The only built-in problem is the
/// manufactured one ("paper4"); other problems can be driven from code
/// via the solver API directly.
#[derive(Debug, Clone, PartialEq)]
pub struct StudyConfig {
    pub subdomains: Vec<SubdomainSpec>,
    pub interfaces: Vec<InterfaceDecl>,
    pub alpha_rule: AlphaRule,
    pub solver: SolverKind,
    pub tol: f64,
    pub max_iter: usize,
    pub refinements: usize,
    pub diagonal: DiagonalRule,
    pub problem: String,
}

impl StudyConfig {
    /// Line-oriented config text. Sections: one `[domain]`, then one
    /// `[subdomain]` per subdomain and one `[interface]` per interface.
    pub fn parse(text: &str) -> Result<Self> {
        #[derive(PartialEq)]
        enum Section {
            None,
            Domain,
            Subdomain,
            Interface,
        }
        let bad = |line: usize, msg: String| Error::Config { line, msg };
        let mut section = Section::None;
        let mut alpha_rule = AlphaRule::Mean;
        let mut solver = SolverKind::Schwarz;
        let mut tol = 1e-8;
        let mut max_iter = 1000usize;
        let mut refinements = 0usize;
        let mut diagonal = DiagonalRule::SameDirection;
        let mut problem = "paper4".to_string();
        let mut subdomains: Vec<SubdomainSpec> = Vec::new();
        // (segment, left, right, declaring line)
        type RawInterface = ([f64; 4], Option<usize>, Option<usize>, usize);
        let mut interfaces_raw: Vec<RawInterface> = Vec::new();

        for (ln, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let lno = ln + 1;
            if let Some(name) = line.strip_prefix('[').and_then(|l| l.strip_suffix(']')) {
                section = match name.trim() {
                    "domain" => Section::Domain,
                    "subdomain" => {
                        subdomains.push(SubdomainSpec {
                            rect: Rect::new(0.0, 0.0, 1.0, 1.0),
                            nx: 0,
                            ny: 0,
                        });
                        Section::Subdomain
                    }
                    "interface" => {
                        interfaces_raw.push(([f64::NAN; 4], None, None, lno));
                        Section::Interface
                    }
                    other => return Err(bad(lno, format!("unknown section [{other}]"))),
                };
                continue;
            }
            let (key, value) = line
                .split_once('=')
                .ok_or_else(|| bad(lno, format!("expected key = value, got {line:?}")))?;
            let key = key.trim();
            let value = value.trim();
            let nums = |v: &str| -> std::result::Result<Vec<f64>, Error> {
                v.split_whitespace()
                    .map(|t| {
                        t.parse::<f64>()
                            .map_err(|_| bad(lno, format!("bad number {t:?}")))
                    })
                    .collect()
            };
            match section {
                Section::Domain => match key {
                    "alpha" => {
                        alpha_rule = value.parse().map_err(|e| bad(lno, e))?;
                    }
                    "solver" => {
                        solver = value.parse().map_err(|e| bad(lno, e))?;
                    }
                    "tol" => {
                        tol = value
                            .parse()
                            .map_err(|_| bad(lno, format!("bad tol {value:?}")))?;
                    }
                    "max_iter" => {
                        max_iter = value
                            .parse()
                            .map_err(|_| bad(lno, format!("bad max_iter {value:?}")))?;
                    }
                    "refinements" => {
                        refinements = value
                            .parse()
                            .map_err(|_| bad(lno, format!("bad refinements {value:?}")))?;
                    }
                    "diagonal" => {
                        diagonal = match value {
                            "same" => DiagonalRule::SameDirection,
                            "alternating" => DiagonalRule::Alternating,
                            other => return Err(bad(lno, format!("bad diagonal {other:?}"))),
                        };
                    }
                    "problem" => {
                        problem = value.to_string();
                    }
                    other => return Err(bad(lno, format!("unknown domain key {other:?}"))),
                },
                Section::Subdomain => {
                    let sub = subdomains.last_mut().expect("inside [subdomain]");
                    match key {
                        "rect" => {
                            let v = nums(value)?;
                            if v.len() != 4 || v[0] >= v[2] || v[1] >= v[3] {
                                return Err(bad(lno, "rect needs x0 y0 x1 y1".into()));
                            }
                            sub.rect = Rect::new(v[0], v[1], v[2], v[3]);
                        }
                        "cells" => {
                            let v = nums(value)?;
                            if v.len() != 2 || v[0] < 1.0 || v[1] < 1.0 {
                                return Err(bad(lno, "cells needs nx ny >= 1".into()));
                            }
                            sub.nx = v[0] as usize;
                            sub.ny = v[1] as usize;
                        }
                        other => return Err(bad(lno, format!("unknown subdomain key {other:?}"))),
                    }
                }
                Section::Interface => {
                    let ifc = interfaces_raw.last_mut().expect("inside [interface]");
                    match key {
                        "segment" => {
                            let v = nums(value)?;
                            if v.len() != 4 {
                                return Err(bad(lno, "segment needs ax ay bx by".into()));
                            }
                            ifc.0 = [v[0], v[1], v[2], v[3]];
                        }
                        "left" => {
                            ifc.1 = Some(
                                value
                                    .parse()
                                    .map_err(|_| bad(lno, format!("bad left {value:?}")))?,
                            );
                        }
                        "right" => {
                            ifc.2 = Some(
                                value
                                    .parse()
                                    .map_err(|_| bad(lno, format!("bad right {value:?}")))?,
                            );
                        }
                        other => return Err(bad(lno, format!("unknown interface key {other:?}"))),
                    }
                }
                Section::None => {
                    return Err(bad(lno, "key outside any section".into()));
                }
            }
        }

        let mut interfaces = Vec::with_capacity(interfaces_raw.len());
        for (i, (seg, left, right, lno)) in interfaces_raw.iter().enumerate() {
            let (left, right) = match (left, right) {
                (Some(l), Some(r)) => (*l, *r),
                _ => {
                    return Err(bad(*lno, "interface needs left and right".into()));
                }
            };
            if seg.iter().any(|v| v.is_nan()) {
                return Err(bad(*lno, "interface needs a segment".into()));
            }
            interfaces.push(
                InterfaceDecl::new(
                    InterfaceId(i),
                    Point::new(seg[0], seg[1]),
                    Point::new(seg[2], seg[3]),
                    left,
                    right,
                )
                .map_err(|e| bad(*lno, e.to_string()))?,
            );
        }

        let config = Self {
            subdomains,
            interfaces,
            alpha_rule,
            solver,
            tol,
            max_iter,
            refinements,
            diagonal,
            problem,
        };
        config.validate()?;
        Ok(config)
    }

    /// Canonical serialization; `parse(serialize(c)) == c` and repeated
    /// serialization is byte-identical.
    pub fn serialize(&self) -> String {
        let mut s = String::new();
        writeln!(s, "[domain]").unwrap();
        writeln!(s, "problem = {}", self.problem).unwrap();
        writeln!(s, "alpha = {}", self.alpha_rule).unwrap();
        writeln!(s, "solver = {}", self.solver).unwrap();
        writeln!(s, "tol = {:e}", self.tol).unwrap();
        writeln!(s, "max_iter = {}", self.max_iter).unwrap();
        writeln!(s, "refinements = {}", self.refinements).unwrap();
        writeln!(s, "diagonal = {}", self.diagonal).unwrap();
        for sub in &self.subdomains {
            writeln!(s).unwrap();
            writeln!(s, "[subdomain]").unwrap();
            writeln!(
                s,
                "rect = {} {} {} {}",
                sub.rect.x0, sub.rect.y0, sub.rect.x1, sub.rect.y1
            )
            .unwrap();
            writeln!(s, "cells = {} {}", sub.nx, sub.ny).unwrap();
        }
        for ifc in &self.interfaces {
            writeln!(s).unwrap();
            writeln!(s, "[interface]").unwrap();
            writeln!(
                s,
                "segment = {} {} {} {}",
                ifc.a.x, ifc.a.y, ifc.b.x, ifc.b.y
            )
            .unwrap();
            writeln!(s, "left = {}", ifc.left_subdomain).unwrap();
            writeln!(s, "right = {}", ifc.right_subdomain).unwrap();
        }
        s
    }

    pub fn validate(&self) -> Result<()> {
        if self.subdomains.is_empty() {
            return Err(Error::InvalidArgument("no subdomains".into()));
        }
        if self.tol <= 0.0 {
            return Err(Error::InvalidArgument("tol must be positive".into()));
        }
        if let AlphaRule::Constant(v) = self.alpha_rule {
            if v <= 0.0 {
                return Err(Error::InvalidArgument(
                    "constant alpha must be positive".into(),
                ));
            }
        }
        for ifc in &self.interfaces {
            if ifc.left_subdomain >= self.subdomains.len()
                || ifc.right_subdomain >= self.subdomains.len()
            {
                return Err(Error::InterfaceMismatch(format!(
                    "interface {} references a missing subdomain",
                    ifc.id
                )));
            }
        }
        // the studies pose the problem on the unit square: the rects must
        // tile it edge-to-edge
        let (mut x0, mut y0) = (f64::INFINITY, f64::INFINITY);
        let (mut x1, mut y1) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
        let mut area = 0.0;
        for s in &self.subdomains {
            x0 = x0.min(s.rect.x0);
            y0 = y0.min(s.rect.y0);
            x1 = x1.max(s.rect.x1);
            y1 = y1.max(s.rect.y1);
            area += s.rect.area();
        }
        let unit = (x0.abs() <= 1e-12)
            && (y0.abs() <= 1e-12)
            && ((x1 - 1.0).abs() <= 1e-12)
            && ((y1 - 1.0).abs() <= 1e-12)
            && ((area - 1.0).abs() <= 1e-12);
        if !unit {
            return Err(Error::InvalidArgument(
                "subdomain rects must tile the unit square edge-to-edge".into(),
            ));
        }
        Ok(())
    }
}

/// Interface step-size statistics feeding the Robin-parameter formula.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AlphaFormulas {
    pub h_min: f64,
    pub h_mean: f64,
    pub h_max: f64,
}

impl AlphaFormulas {
    pub fn from_grids<'a>(grids: impl IntoIterator<Item = &'a InterfaceGrid>) -> Result<Self> {
        let mut lengths = Vec::new();
        for g in grids {
            lengths.extend(g.segment_lengths());
        }
        if lengths.is_empty() {
            return Err(Error::InvalidArgument(
                "no interface segments to derive alpha from".into(),
            ));
        }
        let h_min = lengths.iter().cloned().fold(f64::INFINITY, f64::min);
        let h_max = lengths.iter().cloned().fold(0.0f64, f64::max);
        let h_mean = lengths.iter().sum::<f64>() / lengths.len() as f64;
        Ok(Self {
            h_min,
            h_mean,
            h_max,
        })
    }
}

/// alpha(h) = [(pi^2 + 1)((pi/h)^2 + 1)]^(1/4).
pub fn alpha_formula(h: f64) -> f64 {
    let pi = std::f64::consts::PI;
    ((pi * pi + 1.0) * ((pi / h) * (pi / h) + 1.0)).powf(0.25)
}

/// Resolve an alpha rule against the interface grids of a decomposition.
pub fn alpha_from_rule<'a>(
    rule: AlphaRule,
    grids: impl IntoIterator<Item = &'a InterfaceGrid>,
) -> Result<f64> {
    match rule {
        AlphaRule::Constant(v) => Ok(v),
        rule => {
            let stats = AlphaFormulas::from_grids(grids)?;
            Ok(match rule {
                AlphaRule::Min => alpha_formula(stats.h_min),
                AlphaRule::Max => alpha_formula(stats.h_max),
                AlphaRule::Mean | AlphaRule::Opt => alpha_formula(stats.h_mean),
                AlphaRule::Constant(_) => unreachable!(),
            })
        }
    }
}

/// Named built-in decompositions. The non-conforming presets match the
/// reference experiments' per-subdomain node counts (81/153 for the
/// two-subdomain split, 189/81/45/153 for the four-subdomain one); the
/// exact cell aspect choices are this crate's own.
pub fn preset(name: &str) -> Option<StudyConfig> {
    let decl = |i: usize, a: (f64, f64), b: (f64, f64), l: usize, r: usize| {
        InterfaceDecl::new(
            InterfaceId(i),
            Point::new(a.0, a.1),
            Point::new(b.0, b.1),
            l,
            r,
        )
        .expect("preset interfaces are valid")
    };
    let sub = |rect: (f64, f64, f64, f64), nx: usize, ny: usize| SubdomainSpec {
        rect: Rect::new(rect.0, rect.1, rect.2, rect.3),
        nx,
        ny,
    };
    let base = StudyConfig {
        subdomains: vec![],
        interfaces: vec![],
        alpha_rule: AlphaRule::Mean,
        solver: SolverKind::Schwarz,
        tol: 1e-8,
        max_iter: 1000,
        refinements: 0,
        diagonal: DiagonalRule::SameDirection,
        problem: "paper4".to_string(),
    };
    match name {
        // 81 and 153 nodes on the two halves, non-matching on x = 1/2
        "two" => Some(StudyConfig {
            subdomains: vec![
                sub((0.0, 0.0, 0.5, 1.0), 8, 8),
                sub((0.5, 0.0, 1.0, 1.0), 8, 16),
            ],
            interfaces: vec![decl(0, (0.5, 0.0), (0.5, 1.0), 0, 1)],
            ..base
        }),
        // quarters with 189/81/45/153 nodes; three of the four interfaces
        // have non-matching grids
        "four" => Some(StudyConfig {
            subdomains: vec![
                sub((0.0, 0.0, 0.5, 0.5), 8, 20),
                sub((0.5, 0.0, 1.0, 0.5), 8, 8),
                sub((0.0, 0.5, 0.5, 1.0), 4, 8),
                sub((0.5, 0.5, 1.0, 1.0), 16, 8),
            ],
            interfaces: vec![
                decl(0, (0.5, 0.0), (0.5, 0.5), 0, 1),
                decl(1, (0.0, 0.5), (0.5, 0.5), 0, 2),
                decl(2, (0.5, 0.5), (1.0, 0.5), 1, 3),
                decl(3, (0.5, 0.5), (0.5, 1.0), 2, 3),
            ],
            ..base
        }),
        // uniform conforming 2x2 decomposition
        "conforming" => Some(StudyConfig {
            subdomains: vec![
                sub((0.0, 0.0, 0.5, 0.5), 4, 4),
                sub((0.5, 0.0, 1.0, 0.5), 4, 4),
                sub((0.0, 0.5, 0.5, 1.0), 4, 4),
                sub((0.5, 0.5, 1.0, 1.0), 4, 4),
            ],
            interfaces: vec![
                decl(0, (0.5, 0.0), (0.5, 0.5), 0, 1),
                decl(1, (0.0, 0.5), (0.5, 0.5), 0, 2),
                decl(2, (0.5, 0.5), (1.0, 0.5), 1, 3),
                decl(3, (0.5, 0.5), (0.5, 1.0), 2, 3),
            ],
            ..base
        }),
        // one subdomain: a plain FEM Dirichlet solve, no iteration
        "single" => Some(StudyConfig {
            subdomains: vec![sub((0.0, 0.0, 1.0, 1.0), 4, 4)],
            interfaces: vec![],
            ..base
        }),
        _ => None,
    }
}

fn problem_fields(config: &StudyConfig) -> Result<(ScalarField2D, ScalarField2D, ScalarField2D)> {
    match config.problem.as_str() {
        "paper4" => Ok((
            manufactured_rhs(),
            manufactured_solution(),
            manufactured_solution(),
        )),
        other => Err(Error::InvalidArgument(format!(
            "unknown problem {other:?} (only \"paper4\" is configurable)"
        ))),
    }
}

/// Interface grids of a decomposition at a refinement level, both sides.
fn interface_grids(config: &StudyConfig, refinement: usize) -> Result<Vec<InterfaceGrid>> {
    let subs: Vec<(Rect, usize, usize)> = config
        .subdomains
        .iter()
        .map(|s| (s.rect, s.nx, s.ny))
        .collect();
    let meshes = build_meshes(&subs, config.diagonal, &config.interfaces, refinement)?;
    let mut grids = Vec::new();
    for d in &config.interfaces {
        for k in [d.left_subdomain, d.right_subdomain] {
            let (coords, _) = crate::mesh2d::interface_trace(&meshes[k], d.id)?;
            grids.push(InterfaceGrid::new(d.id, k, coords)?);
        }
    }
    Ok(grids)
}

/// Resolve alpha for a config at a refinement level.
pub fn resolve_alpha(config: &StudyConfig, refinement: usize) -> Result<f64> {
    match config.alpha_rule {
        AlphaRule::Constant(v) => Ok(v),
        rule => {
            let grids = interface_grids(config, refinement)?;
            alpha_from_rule(rule, grids.iter())
        }
    }
}

/// Build the decomposition problem of a config at a refinement level,
/// with an optional override of the Robin parameter.
pub fn build_problem(
    config: &StudyConfig,
    refinement: usize,
    alpha_override: Option<f64>,
) -> Result<(DecompositionProblem, f64)> {
    config.validate()?;
    let alpha = match alpha_override {
        Some(a) => a,
        None => {
            if config.interfaces.is_empty() {
                // no interfaces: the value never enters, any positive works
                1.0
            } else {
                resolve_alpha(config, refinement)?
            }
        }
    };
    let subs: Vec<(Rect, usize, usize)> = config
        .subdomains
        .iter()
        .map(|s| (s.rect, s.nx, s.ny))
        .collect();
    let meshes = build_meshes(&subs, config.diagonal, &config.interfaces, refinement)?;
    let (f, g, _) = problem_fields(config)?;
    let mut problem = DecompositionProblem::new(meshes, &config.interfaces, alpha, &f, &g)?;
    problem.config_echo = format!(
        "alpha = {alpha} | refinement = {refinement}\n{}",
        config.serialize()
    );
    Ok((problem, alpha))
}

fn run_solver(
    config: &StudyConfig,
    problem: &DecompositionProblem,
    reference: Option<&SchwarzState>,
) -> Result<(SchwarzState, SolverReport)> {
    match config.solver {
        SolverKind::Schwarz => solve_schwarz(problem, None, config.tol, config.max_iter, reference),
        SolverKind::Gmres => solve_gmres(problem, config.tol, config.max_iter, reference),
    }
}

fn fmt_f(x: f64) -> String {
    format!("{x:.12e}")
}

fn history_csv(records: &[IterationRecord]) -> String {
    let mut s = String::from("iter,jump_residual,E,B,errH1,errLinf\n");
    for r in records {
        writeln!(
            s,
            "{},{},{},{},{},{}",
            r.iteration,
            fmt_f(r.jump_residual),
            fmt_f(r.energy),
            fmt_f(r.interface_energy),
            r.err_h1.map(fmt_f).unwrap_or_default(),
            r.err_linf.map(fmt_f).unwrap_or_default(),
        )
        .unwrap();
    }
    s
}

fn manifest(config: &StudyConfig, command: &str, extra: &[(String, String)]) -> String {
    let mut s = String::new();
    writeln!(s, "schwarz-mortar {VERSION}").unwrap();
    writeln!(s, "command = {command}").unwrap();
    for (k, v) in extra {
        writeln!(s, "{k} = {v}").unwrap();
    }
    writeln!(s, "\n# configuration\n{}", config.serialize()).unwrap();
    s
}

fn write_out(dir: &Path, name: &str, contents: &str) -> Result<()> {
    std::fs::create_dir_all(dir)?;
    std::fs::write(dir.join(name), contents)?;
    Ok(())
}

/// Demo run: one solve at the config's refinement level, with mesh and
/// nodal-solution export and an iteration history.
#[derive(Debug)]
pub struct DemoResult {
    pub report: SolverReport,
    pub alpha: f64,
    /// Per-subdomain H1 errors against the exact solution.
    pub per_subdomain_h1: Vec<f64>,
    /// Broken H1 norm of the exact solution over the whole domain.
    pub e_ex: f64,
    /// Relative broken H1 error of the converged solution.
    pub e_rel: f64,
    pub state: SchwarzState,
}

pub fn run_demo(config: &StudyConfig, out_dir: Option<&Path>) -> Result<DemoResult> {
    let (problem, alpha) = build_problem(config, config.refinements, None)?;
    let (state, report) = run_solver(config, &problem, None)?;
    let (_, _, exact) = problem_fields(config)?;
    let mut per_subdomain_h1 = Vec::new();
    let mut e_sq = 0.0;
    let mut ex_sq = 0.0;
    for sub in &problem.subdomains {
        let norms = error_norms(&sub.space, &state.u[sub.index], &exact)?;
        per_subdomain_h1.push(norms.h1);
        e_sq += norms.h1 * norms.h1;
        ex_sq += norms.h1_exact * norms.h1_exact;
    }
    let e_ex = ex_sq.sqrt();
    let e_rel = e_sq.sqrt() / e_ex;

    if let Some(dir) = out_dir {
        for sub in &problem.subdomains {
            write_out(
                dir,
                &format!("subdomain_{}.mesh", sub.index),
                &sub.space.mesh.dump(),
            )?;
            let mut sol = String::new();
            for v in &state.u[sub.index] {
                writeln!(sol, "{v:.17e}").unwrap();
            }
            write_out(dir, &format!("subdomain_{}.sol", sub.index), &sol)?;
        }
        write_out(dir, "demo_history.csv", &history_csv(&report.records))?;
        write_out(
            dir,
            "manifest.txt",
            &manifest(
                config,
                "demo",
                &[
                    ("alpha".into(), fmt_f(alpha)),
                    ("converged".into(), report.converged.to_string()),
                    ("iterations".into(), report.iterations_used.to_string()),
                    ("E_rel".into(), fmt_f(e_rel)),
                ],
            ),
        )?;
    }
    Ok(DemoResult {
        report,
        alpha,
        per_subdomain_h1,
        e_ex,
        e_rel,
        state,
    })
}

#[derive(Debug, Clone)]
pub struct ConvergenceRow {
    pub refinement: usize,
    /// Largest triangle diameter over the subdomain meshes.
    pub h: f64,
    pub e_rel: f64,
    /// log2(previous E_rel / this E_rel); absent on the first row.
    pub rate: Option<f64>,
    pub per_subdomain_h1: Vec<f64>,
    pub e_ex: f64,
    pub converged: bool,
    pub iterations: usize,
}

#[derive(Debug, Clone)]
pub struct ConvergenceStudy {
    pub rows: Vec<ConvergenceRow>,
}

impl ConvergenceStudy {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("refinement,h,E_rel,rate\n");
        for r in &self.rows {
            writeln!(
                s,
                "{},{},{},{}",
                r.refinement,
                fmt_f(r.h),
                fmt_f(r.e_rel),
                r.rate.map(fmt_f).unwrap_or_default()
            )
            .unwrap();
        }
        s
    }

    pub fn detail_csv(&self) -> String {
        let mut s = String::from("refinement,subdomain,E_sub,E_sub_rel\n");
        for r in &self.rows {
            for (k, e) in r.per_subdomain_h1.iter().enumerate() {
                writeln!(
                    s,
                    "{},{},{},{}",
                    r.refinement,
                    k,
                    fmt_f(*e),
                    fmt_f(e / r.e_ex)
                )
                .unwrap();
            }
        }
        s
    }
}

/// Solve at refinement levels 0..=config.refinements and report the
/// relative broken H1 error against the exact solution per level, with
/// the observed reduction rate between consecutive levels.
pub fn run_convergence_study(
    config: &StudyConfig,
    out_dir: Option<&Path>,
) -> Result<ConvergenceStudy> {
    let (_, _, exact) = problem_fields(config)?;
    let mut rows: Vec<ConvergenceRow> = Vec::new();
    for r in 0..=config.refinements {
        let (problem, _alpha) = build_problem(config, r, None)?;
        let (state, report) = run_solver(config, &problem, None)?;
        let mut per_subdomain_h1 = Vec::new();
        let mut e_sq = 0.0;
        let mut ex_sq = 0.0;
        let mut h: f64 = 0.0;
        for sub in &problem.subdomains {
            let norms = error_norms(&sub.space, &state.u[sub.index], &exact)?;
            per_subdomain_h1.push(norms.h1);
            e_sq += norms.h1 * norms.h1;
            ex_sq += norms.h1_exact * norms.h1_exact;
            h = h.max(sub.space.mesh.h_max);
        }
        let e_ex = ex_sq.sqrt();
        let e_rel = e_sq.sqrt() / e_ex;
        let rate = rows.last().map(|prev| (prev.e_rel / e_rel).log2());
        rows.push(ConvergenceRow {
            refinement: r,
            h,
            e_rel,
            rate,
            per_subdomain_h1,
            e_ex,
            converged: report.converged,
            iterations: report.iterations_used,
        });
    }
    let study = ConvergenceStudy { rows };
    if let Some(dir) = out_dir {
        write_out(dir, "convergence.csv", &study.to_csv())?;
        write_out(dir, "convergence_subdomains.csv", &study.detail_csv())?;
        write_out(dir, "manifest.txt", &manifest(config, "convergence", &[]))?;
    }
    Ok(study)
}

#[derive(Debug)]
pub struct AlphaStudyRow {
    pub alpha: f64,
    pub iterations: usize,
    pub final_residual: f64,
    pub converged: bool,
    /// History of the zero-initialized run measured against the converged
    /// solution at the same alpha.
    pub history: Vec<IterationRecord>,
}

#[derive(Debug)]
pub struct AlphaStudy {
    pub rows: Vec<AlphaStudyRow>,
}

impl AlphaStudy {
    pub fn summary_csv(&self) -> String {
        let mut s = String::from("alpha,iters,final_residual\n");
        for r in &self.rows {
            writeln!(
                s,
                "{},{},{}",
                fmt_f(r.alpha),
                r.iterations,
                fmt_f(r.final_residual)
            )
            .unwrap();
        }
        s
    }
}

/// For each alpha: converge once to get the discrete reference, then
/// replay the iteration from zero recording per-iterate H1 and Linf
/// distances to that reference.
pub fn run_alpha_study(
    config: &StudyConfig,
    alphas: &[f64],
    out_dir: Option<&Path>,
) -> Result<AlphaStudy> {
    if alphas.len() < 2 {
        return Err(Error::InvalidArgument(
            "alpha study needs at least 2 values".into(),
        ));
    }
    let mut rows = Vec::new();
    for &alpha in alphas {
        let (problem, _) = build_problem(config, config.refinements, Some(alpha))?;
        let (reference, ref_report) = run_solver(config, &problem, None)?;
        let (_, report) = match config.solver {
            SolverKind::Schwarz => solve_schwarz(
                &problem,
                None,
                config.tol,
                config.max_iter,
                Some(&reference),
            )?,
            SolverKind::Gmres => {
                solve_gmres(&problem, config.tol, config.max_iter, Some(&reference))?
            }
        };
        rows.push(AlphaStudyRow {
            alpha,
            iterations: report.iterations_used,
            final_residual: report.final_residual,
            converged: ref_report.converged && report.converged,
            history: report.records,
        });
    }
    let study = AlphaStudy { rows };
    if let Some(dir) = out_dir {
        write_out(dir, "alpha_study.csv", &study.summary_csv())?;
        for (i, row) in study.rows.iter().enumerate() {
            write_out(
                dir,
                &format!("alpha_{i:02}_history.csv"),
                &history_csv(&row.history),
            )?;
        }
        let extra: Vec<(String, String)> = study
            .rows
            .iter()
            .enumerate()
            .map(|(i, r)| (format!("alpha_{i:02}"), fmt_f(r.alpha)))
            .collect();
        write_out(
            dir,
            "manifest.txt",
            &manifest(config, "alpha-study", &extra),
        )?;
    }
    Ok(study)
}

/// Default alpha list for the sensitivity study: the mean-step formula
/// value scaled by {1/10, 1/2, 1, 2, 10}.
pub fn default_alpha_list(config: &StudyConfig) -> Result<Vec<f64>> {
    let mean = resolve_alpha(
        &StudyConfig {
            alpha_rule: AlphaRule::Mean,
            ..config.clone()
        },
        config.refinements,
    )?;
    Ok(vec![mean / 10.0, mean / 2.0, mean, 2.0 * mean, 10.0 * mean])
}

/// Run the polynomial verifier and write its CSV plus any witnesses.
pub fn run_verify_appendix(
    p_max: usize,
    samples: usize,
    seed: u64,
    out_dir: Option<&Path>,
) -> Result<crate::legendre::AppendixReport> {
    let report = run_appendix_scan(p_max, samples, seed)?;
    if let Some(dir) = out_dir {
        write_out(dir, "appendix.csv", &report.to_csv())?;
        if let Some(w) = report.witness_text() {
            write_out(dir, "witness.txt", &w)?;
        }
        let mut s = String::new();
        writeln!(s, "schwarz-mortar {VERSION}").unwrap();
        writeln!(s, "command = verify-appendix").unwrap();
        writeln!(s, "p_max = {p_max}").unwrap();
        writeln!(s, "samples = {samples}").unwrap();
        writeln!(s, "seed = {seed}").unwrap();
        write_out(dir, "manifest.txt", &s)?;
    }
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn alpha_formula_reference_value() {
        // h = 0.1 gives about 10.18
        let a = alpha_formula(0.1);
        assert!((a - 10.18).abs() < 0.01, "{a}");
    }

    #[test]
    fn alpha_rules() {
        let g1 = InterfaceGrid::new(InterfaceId(0), 0, vec![0.0, 0.5, 1.0]).unwrap();
        let g2 = InterfaceGrid::new(InterfaceId(0), 1, vec![0.0, 0.25, 0.5, 0.75, 1.0]).unwrap();
        assert_eq!(
            alpha_from_rule(AlphaRule::Constant(10.0), [&g1, &g2]).unwrap(),
            10.0
        );
        let stats = AlphaFormulas::from_grids([&g1, &g2]).unwrap();
        assert_eq!(stats.h_min, 0.25);
        assert_eq!(stats.h_max, 0.5);
        assert!((stats.h_mean - (0.5 * 2.0 + 0.25 * 4.0) / 6.0).abs() < 1e-15);
        assert!(stats.h_min <= stats.h_mean && stats.h_mean <= stats.h_max);
        // conforming grids: all rules agree
        let a_min = alpha_from_rule(AlphaRule::Min, [&g1]).unwrap();
        let a_mean = alpha_from_rule(AlphaRule::Mean, [&g1]).unwrap();
        let a_max = alpha_from_rule(AlphaRule::Max, [&g1]).unwrap();
        let a_opt = alpha_from_rule(AlphaRule::Opt, [&g1]).unwrap();
        assert_eq!(a_min, a_mean);
        assert_eq!(a_mean, a_max);
        assert_eq!(a_mean, a_opt);
    }

    #[test]
    fn config_round_trip() {
        for name in ["two", "four", "conforming", "single"] {
            let cfg = preset(name).unwrap();
            let text = cfg.serialize();
            let parsed = StudyConfig::parse(&text).unwrap();
            assert_eq!(parsed, cfg, "preset {name}");
            // serialization is stable
            assert_eq!(parsed.serialize(), text);
        }
    }

    #[test]
    fn config_parse_errors() {
        assert!(StudyConfig::parse("x = 1").is_err());
        assert!(StudyConfig::parse("[domain]\nbogus = 1").is_err());
        let missing_seg =
            "[domain]\n[subdomain]\nrect = 0 0 1 1\ncells = 2 2\n[interface]\nleft = 0\nright = 0";
        assert!(StudyConfig::parse(missing_seg).is_err());
    }

    #[test]
    fn config_with_comments_and_spacing() {
        let text = "\n# a comment\n[domain]\nalpha = constant 7.5  # robin\nsolver = gmres\ntol = 1e-9\n\n[subdomain]\nrect = 0 0 1 1\ncells = 3 4\n";
        let cfg = StudyConfig::parse(text).unwrap();
        assert_eq!(cfg.alpha_rule, AlphaRule::Constant(7.5));
        assert_eq!(cfg.solver, SolverKind::Gmres);
        assert_eq!(cfg.tol, 1e-9);
        assert_eq!(cfg.subdomains.len(), 1);
        assert_eq!((cfg.subdomains[0].nx, cfg.subdomains[0].ny), (3, 4));
    }

    #[test]
    fn preset_node_counts_match_reference() {
        let two = preset("two").unwrap();
        let counts: Vec<usize> = two
            .subdomains
            .iter()
            .map(|s| (s.nx + 1) * (s.ny + 1))
            .collect();
        assert_eq!(counts, vec![81, 153]);
        let four = preset("four").unwrap();
        let counts: Vec<usize> = four
            .subdomains
            .iter()
            .map(|s| (s.nx + 1) * (s.ny + 1))
            .collect();
        assert_eq!(counts, vec![189, 81, 45, 153]);
    }

    #[test]
    fn single_domain_demo_is_pure_fem() {
        let cfg = preset("single").unwrap();
        let demo = run_demo(&cfg, None).unwrap();
        assert!(demo.report.converged);
        assert_eq!(demo.report.iterations_used, 0);
        assert!(demo.e_rel < 0.3, "coarse FEM error {}", demo.e_rel);
    }

    #[test]
    fn demo_runs_deterministically() {
        let mut cfg = preset("two").unwrap();
        cfg.tol = 1e-6;
        let a = run_demo(&cfg, None).unwrap();
        let b = run_demo(&cfg, None).unwrap();
        assert_eq!(
            history_csv(&a.report.records),
            history_csv(&b.report.records)
        );
        assert_eq!(a.e_rel.to_bits(), b.e_rel.to_bits());
    }

    #[test]
    fn convergence_rows_consistent() {
        let mut cfg = preset("conforming").unwrap();
        cfg.refinements = 1;
        cfg.tol = 1e-9;
        let study = run_convergence_study(&cfg, None).unwrap();
        assert_eq!(study.rows.len(), 2);
        for r in &study.rows {
            assert!(r.converged);
            // E = sqrt(sum E_i^2) identity
            let total: f64 = r
                .per_subdomain_h1
                .iter()
                .map(|e| e * e)
                .sum::<f64>()
                .sqrt();
            assert!((total / r.e_ex - r.e_rel).abs() < 1e-15);
        }
        // h halves exactly
        assert_eq!(study.rows[0].h / study.rows[1].h, 2.0);
        assert!(study.rows[1].rate.is_some());
    }

    #[test]
    fn alpha_study_duplicates_and_monotonicity() {
        let mut cfg = preset("two").unwrap();
        cfg.tol = 1e-8;
        let study = run_alpha_study(&cfg, &[12.0, 12.0], None).unwrap();
        // duplicate values give identical rows
        assert_eq!(study.rows[0].iterations, study.rows[1].iterations);
        assert_eq!(
            history_csv(&study.rows[0].history),
            history_csv(&study.rows[1].history)
        );
        // error histories end far below where they start
        for row in &study.rows {
            assert!(row.converged);
            let first = row.history.first().unwrap().err_h1.unwrap();
            let last = row.history.last().unwrap().err_h1.unwrap();
            assert!(last < first, "history not decreasing: {first} -> {last}");
            let first = row.history.first().unwrap().err_linf.unwrap();
            let last = row.history.last().unwrap().err_linf.unwrap();
            assert!(last < first);
        }
    }

    #[test]
    fn four_subdomain_demo_at_alpha_ten() {
        let mut cfg = preset("four").unwrap();
        cfg.alpha_rule = AlphaRule::Constant(10.0);
        cfg.tol = 1e-8;
        let demo = run_demo(&cfg, None).unwrap();
        assert!(demo.report.converged);
        assert!(demo.report.final_residual < 1e-8);
        assert!(demo.e_rel < 0.25, "relative error {}", demo.e_rel);
        assert_eq!(demo.alpha, 10.0);
    }

    #[test]
    fn tiling_validation_rejects_gaps() {
        let mut cfg = preset("two").unwrap();
        cfg.subdomains[1].rect = Rect::new(0.6, 0.0, 1.0, 1.0);
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn csv_headers_are_pinned() {
        let study = ConvergenceStudy { rows: vec![] };
        assert!(study.to_csv().starts_with("refinement,h,E_rel,rate\n"));
        let astudy = AlphaStudy { rows: vec![] };
        assert!(astudy
            .summary_csv()
            .starts_with("alpha,iters,final_residual\n"));
        assert!(history_csv(&[]).starts_with("iter,jump_residual,E,B,errH1,errLinf\n"));
    }
}
