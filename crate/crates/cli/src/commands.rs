//! One function per subcommand. Each is a thin adapter: resolve the
//! problem file to core objects, call the engine, wrap the result in a
//! serializable report with a stable text rendering.
//!
//! Exit codes: 0 when the computation succeeded and the queried property
//! holds, 1 when the property fails, 2 on errors.

use crate::format::{BoxSpec, LoadError, ProblemFile, ProblemKind};
use jetc_core::frobenius::{self, GridBox, SolveOptions};
use jetc_core::phg::{prolong_equations, prolongation_surjective_at};
use jetc_core::{
    Connection, EpsilonSection, JetPoint, JetSpace, ZeroConfig, ZeroVerdict,
};
use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum CliError {
    #[error(transparent)]
    Load(#[from] LoadError),
    #[error("{0}")]
    Usage(String),
    #[error("{0}")]
    Engine(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

fn engine<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Engine(e.to_string())
}

/// Zero-test knobs shared by every verdict-producing command.
#[derive(Debug, Clone, Copy)]
pub struct Tolerances {
    pub tol: f64,
    pub samples: usize,
}

impl Tolerances {
    pub fn zero_config(&self) -> ZeroConfig {
        ZeroConfig::default()
            .with_tol(self.tol)
            .with_samples(self.samples)
    }
}

pub struct Report<T: Serialize> {
    pub body: T,
    pub text: String,
    pub exit: i32,
}

impl<T: Serialize> Report<T> {
    pub fn print(&self, json: bool, out: &mut impl std::io::Write) -> std::io::Result<()> {
        if json {
            let rendered =
                serde_json::to_string_pretty(&self.body).expect("reports serialize cleanly");
            writeln!(out, "{rendered}")
        } else {
            writeln!(out, "{}", self.text.trim_end())
        }
    }
}

const SCHEMA: u32 = 1;

fn verdict_string(v: &ZeroVerdict) -> (String, Option<String>) {
    match v {
        ZeroVerdict::NonZero(witness) => ("NonZero".to_string(), Some(witness.to_string())),
        other => (other.label().to_string(), None),
    }
}

// ------------------------------------------------------------ resolution

/// Every problem kind viewed as a first-order system when that is what a
/// command needs: connections as themselves, geometric tops assembled,
/// solved-form blocks reduced.
fn as_connection(file: &ProblemFile) -> (Connection, &'static str) {
    match &file.kind {
        ProblemKind::Connection(c) => (c.clone(), "connection"),
        ProblemKind::Geometric(spec) => (spec.clone().into_connection(), "geometric connection"),
        ProblemKind::Pde(pde) => (pde.reduce_to_first_order(), "reduced first-order system"),
        ProblemKind::Epsilon(eps) => (
            eps.pde().reduce_to_first_order(),
            "reduced first-order system",
        ),
    }
}

/// Extension for the epsilon-analysis commands; a bare solved-form block
/// gets its canonical extension.
fn as_epsilon(file: &ProblemFile) -> Result<(EpsilonSection, &'static str), CliError> {
    match &file.kind {
        ProblemKind::Epsilon(eps) => Ok((eps.clone(), "from file")),
        ProblemKind::Pde(pde) => Ok((pde.canonical_epsilon(), "canonical")),
        other => Err(CliError::Usage(format!(
            "this command needs a solved-form problem, the file holds a {}",
            other.label()
        ))),
    }
}

fn resolve_values(
    file: &ProblemFile,
    arg: &str,
    coords: &[String],
    what: &str,
) -> Result<Vec<f64>, CliError> {
    if let Some(binding) = file.points.get(arg) {
        return coords
            .iter()
            .map(|c| {
                binding.get(c).copied().ok_or_else(|| {
                    CliError::Usage(format!("point `{arg}` does not bind coordinate `{c}`"))
                })
            })
            .collect();
    }
    let parsed: Result<Vec<f64>, _> = arg.split(',').map(|s| s.trim().parse::<f64>()).collect();
    match parsed {
        Ok(values) if values.len() == coords.len() => Ok(values),
        Ok(values) => Err(CliError::Usage(format!(
            "{what} needs {} values in coordinate order ({}), got {}",
            coords.len(),
            coords.join(","),
            values.len()
        ))),
        Err(_) => Err(CliError::Usage(format!(
            "`{arg}` is neither a named point nor a comma-separated value list"
        ))),
    }
}

fn resolve_point(
    file: &ProblemFile,
    arg: &str,
    space: &JetSpace,
    what: &str,
) -> Result<JetPoint, CliError> {
    let values = resolve_values(file, arg, space.coordinates(), what)?;
    JetPoint::from_values(space, values).map_err(engine)
}

fn resolve_box(
    file: &ProblemFile,
    box_arg: Option<&str>,
    step_arg: Option<f64>,
    dim: usize,
) -> Result<GridBox, CliError> {
    let (spec, from_file) = match box_arg {
        None => {
            return Err(CliError::Usage(
                "a box is required (`--box a:b,...` or a named box)".into(),
            ))
        }
        Some(arg) => match file.boxes.get(arg) {
            Some(spec) => (spec.clone(), true),
            None => {
                let mut lo = Vec::new();
                let mut hi = Vec::new();
                for part in arg.split(',') {
                    let (a, b) = part.split_once(':').ok_or_else(|| {
                        CliError::Usage(format!("bad box range `{part}`, expected `lo:hi`"))
                    })?;
                    lo.push(a.trim().parse().map_err(|_| {
                        CliError::Usage(format!("bad box bound `{a}`"))
                    })?);
                    hi.push(b.trim().parse().map_err(|_| {
                        CliError::Usage(format!("bad box bound `{b}`"))
                    })?);
                }
                (BoxSpec { lo, hi, step: None }, false)
            }
        },
    };
    if spec.lo.len() != dim {
        return Err(CliError::Usage(format!(
            "box has {} axes, the base has {dim}",
            spec.lo.len()
        )));
    }
    let step = step_arg.or(spec.step).ok_or_else(|| {
        CliError::Usage(if from_file {
            "the named box carries no step; pass `--step`".into()
        } else {
            "`--step` is required".to_string()
        })
    })?;
    GridBox::new(spec.lo, spec.hi, step).map_err(engine)
}

// ----------------------------------------------------------- curvature

#[derive(Serialize)]
pub struct ComponentEntry {
    pub key: String,
    pub expr: String,
}

#[derive(Serialize)]
pub struct CurvatureBody {
    pub schema: u32,
    pub command: &'static str,
    pub file: String,
    pub problem: &'static str,
    pub components: Vec<ComponentEntry>,
    /// Components are taken in the file's fixed chart; no change-of-chart
    /// transformation law is applied or assumed.
    pub chart_note: &'static str,
}

const CHART_NOTE: &str =
    "components are chart-fixed; no transformation law is applied or assumed";

fn curvature_key(space: &JetSpace, coord: &jetc_core::jet::JetCoord, pair: (usize, usize)) -> String {
    format!(
        "R[{};{};({},{})]",
        space.fiber_names()[coord.fiber],
        coord.mu.digits(),
        pair.0,
        pair.1
    )
}

pub fn curvature(file: &ProblemFile) -> Result<Report<CurvatureBody>, CliError> {
    let (conn, problem) = as_connection(file);
    let curv = conn.curvature();
    let components: Vec<ComponentEntry> = curv
        .components()
        .iter()
        .map(|c| ComponentEntry {
            key: curvature_key(conn.space(), &c.coord, c.pair),
            expr: c.expr.to_string(),
        })
        .collect();
    let mut text = String::new();
    if components.is_empty() {
        text.push_str("no curvature components (single base axis)\n");
    }
    for c in &components {
        text.push_str(&format!("{} = {}\n", c.key, c.expr));
    }
    text.push_str(&format!("note: {CHART_NOTE}\n"));
    Ok(Report {
        body: CurvatureBody {
            schema: SCHEMA,
            command: "curvature",
            file: file.path.clone(),
            problem,
            components,
            chart_note: CHART_NOTE,
        },
        text,
        exit: 0,
    })
}

// ---------------------------------------------------------------- flat

#[derive(Serialize)]
pub struct VerdictEntry {
    pub key: String,
    pub expr: String,
    pub verdict: String,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub witness: Option<String>,
}

#[derive(Serialize)]
pub struct FlatBody {
    pub schema: u32,
    pub command: &'static str,
    pub file: String,
    pub problem: &'static str,
    pub flat: bool,
    pub symbolic: bool,
    pub components: Vec<VerdictEntry>,
}

pub fn flat(
    file: &ProblemFile,
    tolerances: &Tolerances,
    symbolic_only: bool,
) -> Result<Report<FlatBody>, CliError> {
    let (conn, problem) = as_connection(file);
    let report = conn.is_flat(&tolerances.zero_config()).map_err(engine)?;
    let components: Vec<VerdictEntry> = report
        .verdicts
        .iter()
        .map(|(c, v)| {
            let (verdict, witness) = verdict_string(v);
            VerdictEntry {
                key: curvature_key(conn.space(), &c.coord, c.pair),
                expr: c.expr.to_string(),
                verdict,
                witness,
            }
        })
        .collect();
    let flat = if symbolic_only {
        report.symbolic
    } else {
        report.flat
    };
    let mut text = String::new();
    for c in &components {
        match &c.witness {
            Some(w) => text.push_str(&format!("{}: {} at {w} ({})\n", c.key, c.verdict, c.expr)),
            None => text.push_str(&format!("{}: {}\n", c.key, c.verdict)),
        }
    }
    text.push_str(&if flat && report.symbolic {
        "FLAT (symbolic)".to_string()
    } else if flat {
        "FLAT (numeric)".to_string()
    } else {
        "NOT FLAT".to_string()
    });
    text.push('\n');
    let exit = if flat { 0 } else { 1 };
    Ok(Report {
        body: FlatBody {
            schema: SCHEMA,
            command: "flat",
            file: file.path.clone(),
            problem,
            flat,
            symbolic: report.symbolic,
            components,
        },
        text,
        exit,
    })
}

// ----------------------------------------------------------- geometric

#[derive(Serialize)]
pub struct GeometricBody {
    pub schema: u32,
    pub command: &'static str,
    pub file: String,
    pub geometric: bool,
    pub violations: Vec<String>,
}

pub fn geometric(
    file: &ProblemFile,
    tolerances: &Tolerances,
) -> Result<Report<GeometricBody>, CliError> {
    let (conn, _) = as_connection(file);
    let report = conn
        .is_geometric(&tolerances.zero_config())
        .map_err(engine)?;
    let violations: Vec<String> = report.violations.iter().map(|v| v.to_string()).collect();
    let mut text = String::new();
    for v in &violations {
        text.push_str(&format!("violation: {v}\n"));
    }
    text.push_str(if report.geometric {
        "GEOMETRIC\n"
    } else {
        "NOT GEOMETRIC\n"
    });
    let exit = if report.geometric { 0 } else { 1 };
    Ok(Report {
        body: GeometricBody {
            schema: SCHEMA,
            command: "geometric",
            file: file.path.clone(),
            geometric: report.geometric,
            violations,
        },
        text,
        exit,
    })
}

// ------------------------------------------------------------- prolong

#[derive(Serialize)]
pub struct RouteEntry {
    pub target: String,
    pub via: (usize, usize),
    pub rhs: String,
}

#[derive(Serialize)]
pub struct ProlongBody {
    pub schema: u32,
    pub command: &'static str,
    pub file: String,
    pub first_order: Vec<ComponentEntry>,
    pub second_order: Vec<RouteEntry>,
    pub route_discrepancies: Vec<ComponentEntry>,
}

pub fn prolong(file: &ProblemFile) -> Result<Report<ProlongBody>, CliError> {
    let conn = match &file.kind {
        ProblemKind::Connection(c) if c.space().order() == 0 => c.clone(),
        _ => {
            return Err(CliError::Usage(
                "`prolong` needs an order-0 connection file".into(),
            ))
        }
    };
    let sys = prolong_equations(&conn).map_err(engine)?;
    let space2 = sys.space().clone();
    let first_order: Vec<ComponentEntry> = sys
        .first_order()
        .iter()
        .map(|(fiber, j, rhs)| ComponentEntry {
            key: space2.jet_coord_name(*fiber, &jetc_core::MultiIndex::new([*j as u8])),
            expr: rhs.to_string(),
        })
        .collect();
    let second_order: Vec<RouteEntry> = sys
        .second_order()
        .iter()
        .map(|r| RouteEntry {
            target: space2.jet_coord_name(r.fiber, &r.target),
            via: r.via,
            rhs: r.rhs.to_string(),
        })
        .collect();
    let route_discrepancies: Vec<ComponentEntry> = sys
        .route_discrepancies()
        .iter()
        .map(|(fiber, target, d)| ComponentEntry {
            key: space2.jet_coord_name(*fiber, target),
            expr: d.to_string(),
        })
        .collect();
    let mut text = String::new();
    for e in &first_order {
        text.push_str(&format!("{} = {}\n", e.key, e.expr));
    }
    for r in &second_order {
        text.push_str(&format!(
            "{} = {}   [via ({},{})]\n",
            r.target, r.rhs, r.via.0, r.via.1
        ));
    }
    for d in &route_discrepancies {
        text.push_str(&format!("route discrepancy at {}: {}\n", d.key, d.expr));
    }
    Ok(Report {
        body: ProlongBody {
            schema: SCHEMA,
            command: "prolong",
            file: file.path.clone(),
            first_order,
            second_order,
            route_discrepancies,
        },
        text,
        exit: 0,
    })
}

// -------------------------------------------------------- surjective-at

#[derive(Serialize)]
pub struct SurjectiveBody {
    pub schema: u32,
    pub command: &'static str,
    pub file: String,
    pub point: Vec<f64>,
    pub surjective: bool,
    pub max_abs_curvature: f64,
}

pub fn surjective_at(
    file: &ProblemFile,
    at: &str,
    tolerances: &Tolerances,
) -> Result<Report<SurjectiveBody>, CliError> {
    let (conn, _) = as_connection(file);
    let point = resolve_point(file, at, conn.space(), "--at")?;
    let surjective =
        prolongation_surjective_at(&conn, &point, tolerances.tol).map_err(engine)?;
    let max_abs = conn
        .curvature()
        .max_abs_at(&point)
        .map_err(engine)?;
    let text = format!(
        "prolongation surjective at ({}): {}  (max |R| = {})\n",
        point
            .values()
            .iter()
            .map(|v| v.to_string())
            .collect::<Vec<_>>()
            .join(","),
        if surjective { "yes" } else { "no" },
        max_abs
    );
    Ok(Report {
        body: SurjectiveBody {
            schema: SCHEMA,
            command: "surjective-at",
            file: file.path.clone(),
            point: point.values().to_vec(),
            surjective,
            max_abs_curvature: max_abs,
        },
        text,
        exit: if surjective { 0 } else { 1 },
    })
}

// ----------------------------------------------------------------- solve

#[derive(Serialize)]
pub struct SolveBody {
    pub schema: u32,
    pub command: &'static str,
    pub file: String,
    pub problem: &'static str,
    pub init: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub step: f64,
    pub nodes: usize,
    pub integrator: &'static str,
    pub geometric: Option<bool>,
    pub flat: Option<bool>,
    pub holonomy_defect: Option<f64>,
    pub second_order_defect: Option<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub csv: Option<String>,
}

#[allow(clippy::too_many_arguments)]
pub fn solve(
    file: &ProblemFile,
    init_arg: &str,
    box_arg: Option<&str>,
    step_arg: Option<f64>,
    out_path: Option<&std::path::Path>,
    tolerances: &Tolerances,
    strict: bool,
) -> Result<Report<SolveBody>, CliError> {
    let (conn, problem) = as_connection(file);
    let space = conn.space().clone();
    let init = resolve_point(file, init_arg, &space, "--init")?;
    let grid = resolve_box(file, box_arg, step_arg, space.base_dim())?;

    let (trace, geometric_flag, flat_flag, holonomy, second) = if space.order() >= 1 {
        let options = SolveOptions {
            strict,
            zero_cfg: tolerances.zero_config(),
        };
        let sol =
            frobenius::solve_geometric(&conn, &init, &grid, &options).map_err(engine)?;
        (
            sol.trace,
            Some(sol.geometric.geometric),
            Some(sol.flat.flat),
            sol.holonomy_defect,
            sol.second_order_defect,
        )
    } else {
        let flat = conn.is_flat(&tolerances.zero_config()).map_err(engine)?;
        let trace = frobenius::integrate(&conn, &init, &grid).map_err(engine)?;
        (trace, None, Some(flat.flat), None, None)
    };
    let trace = trace.with_problem(file.path.clone());

    let csv = match out_path {
        Some(p) => {
            let mut f = std::fs::File::create(p)?;
            trace.write_csv(&mut f)?;
            Some(p.display().to_string())
        }
        None => None,
    };

    let mut text = format!(
        "integrated {} nodes with RK4, step {}\n",
        trace.grid().node_count(),
        grid.step()
    );
    if let Some(g) = geometric_flag {
        text.push_str(&format!("geometric: {g}\n"));
    }
    if let Some(fl) = flat_flag {
        text.push_str(&format!("flat: {fl}\n"));
    }
    if let Some(h) = holonomy {
        text.push_str(&format!("holonomy defect: {h}\n"));
    }
    if let Some(s) = second {
        text.push_str(&format!("second-order defect: {s}\n"));
    }
    if let Some(p) = &csv {
        text.push_str(&format!("trace written to {p}\n"));
    }

    Ok(Report {
        body: SolveBody {
            schema: SCHEMA,
            command: "solve",
            file: file.path.clone(),
            problem,
            init: init.values().to_vec(),
            lo: grid.lo().to_vec(),
            hi: grid.hi().to_vec(),
            step: grid.step(),
            nodes: trace.grid().node_count(),
            integrator: "RK4",
            geometric: geometric_flag,
            flat: flat_flag,
            holonomy_defect: holonomy,
            second_order_defect: second,
            csv,
        },
        text,
        exit: 0,
    })
}

// ----------------------------------------------------------------- paths

#[derive(Serialize)]
pub struct PathTerminal {
    pub order: Vec<usize>,
    pub values: Vec<f64>,
}

#[derive(Serialize)]
pub struct PathsBody {
    pub schema: u32,
    pub command: &'static str,
    pub file: String,
    pub init: Vec<f64>,
    pub corner: Vec<f64>,
    pub step: f64,
    pub max_discrepancy: f64,
    pub terminals: Vec<PathTerminal>,
}

pub fn paths(
    file: &ProblemFile,
    init_arg: &str,
    corner_arg: &str,
    step: f64,
) -> Result<Report<PathsBody>, CliError> {
    let (conn, _) = as_connection(file);
    let space = conn.space().clone();
    let init = resolve_point(file, init_arg, &space, "--init")?;
    let corner = resolve_values(file, corner_arg, space.base_names(), "--corner")?;
    let report =
        frobenius::path_dependence(&conn, &init, &corner, step).map_err(engine)?;
    let terminals: Vec<PathTerminal> = report
        .terminals
        .iter()
        .map(|(path, values)| PathTerminal {
            order: path.order().iter().map(|a| a + 1).collect(),
            values: values.clone(),
        })
        .collect();
    let mut text = String::new();
    for t in &terminals {
        text.push_str(&format!(
            "order {:?}: terminal = {:?}\n",
            t.order, t.values
        ));
    }
    text.push_str(&format!("max discrepancy: {}\n", report.max_discrepancy));
    Ok(Report {
        body: PathsBody {
            schema: SCHEMA,
            command: "paths",
            file: file.path.clone(),
            init: init.values().to_vec(),
            corner,
            step,
            max_discrepancy: report.max_discrepancy,
            terminals,
        },
        text,
        exit: 0,
    })
}

// ------------------------------------------------------------- eps-check

#[derive(Serialize)]
pub struct EpsBody {
    pub schema: u32,
    pub command: &'static str,
    pub file: String,
    pub epsilon: &'static str,
    pub is_connection: bool,
    pub defects: Vec<VerdictEntry>,
}

pub fn eps_check(
    file: &ProblemFile,
    tolerances: &Tolerances,
    symbolic_only: bool,
) -> Result<Report<EpsBody>, CliError> {
    let (eps, epsilon) = as_epsilon(file)?;
    let report = eps
        .is_connection(&tolerances.zero_config())
        .map_err(engine)?;
    let space = eps.pde().space().clone();
    let defects: Vec<VerdictEntry> = report
        .defects
        .iter()
        .map(|d| {
            let (verdict, witness) = verdict_string(&d.verdict);
            VerdictEntry {
                key: format!(
                    "defect[{};{};{}]",
                    space.fiber_names()[d.fiber],
                    d.nu.digits(),
                    d.j
                ),
                expr: d.expr.to_string(),
                verdict,
                witness,
            }
        })
        .collect();
    let is_connection = if symbolic_only {
        defects.iter().all(|d| d.verdict == "SymbolicZero")
    } else {
        report.is_connection
    };
    let mut text = format!("epsilon: {epsilon}\n");
    for d in &defects {
        text.push_str(&format!("{} = {}: {}\n", d.key, d.expr, d.verdict));
    }
    text.push_str(if is_connection {
        "EPSILON IS A CONNECTION\n"
    } else {
        "EPSILON IS NOT A CONNECTION\n"
    });
    Ok(Report {
        body: EpsBody {
            schema: SCHEMA,
            command: "eps-check",
            file: file.path.clone(),
            epsilon,
            is_connection,
            defects,
        },
        text,
        exit: if is_connection { 0 } else { 1 },
    })
}

// --------------------------------------------------------- phg-curvature

#[derive(Serialize)]
pub struct PhgBody {
    pub schema: u32,
    pub command: &'static str,
    pub file: String,
    pub epsilon: &'static str,
    pub zero: bool,
    pub rank: usize,
    pub connection_defects: Vec<VerdictEntry>,
    pub frobenius_defects: Vec<VerdictEntry>,
}

pub fn phg_curvature(
    file: &ProblemFile,
    tolerances: &Tolerances,
    symbolic_only: bool,
) -> Result<Report<PhgBody>, CliError> {
    let (eps, epsilon) = as_epsilon(file)?;
    let curv = eps.curvature();
    let report = curv.is_zero(&tolerances.zero_config()).map_err(engine)?;
    let space = eps.pde().space().clone();
    let connection_defects: Vec<VerdictEntry> = report
        .connection
        .iter()
        .map(|(d, v)| {
            let (verdict, witness) = verdict_string(v);
            VerdictEntry {
                key: format!(
                    "defect[{};{};{}]",
                    space.fiber_names()[d.fiber],
                    d.nu.digits(),
                    d.j
                ),
                expr: d.expr.to_string(),
                verdict,
                witness,
            }
        })
        .collect();
    let reduced_space = curv.reduced.space().clone();
    let frobenius_defects: Vec<VerdictEntry> = report
        .frobenius
        .iter()
        .map(|(c, v)| {
            let (verdict, witness) = verdict_string(v);
            VerdictEntry {
                key: format!(
                    "R[{};({},{})]",
                    reduced_space.fiber_names()[c.coord.fiber],
                    c.pair.0,
                    c.pair.1
                ),
                expr: c.expr.to_string(),
                verdict,
                witness,
            }
        })
        .collect();
    let zero = if symbolic_only {
        connection_defects
            .iter()
            .chain(&frobenius_defects)
            .all(|d| d.verdict == "SymbolicZero")
    } else {
        report.zero
    };
    let mut text = format!("epsilon: {epsilon}\n");
    for d in connection_defects.iter().chain(&frobenius_defects) {
        text.push_str(&format!("{} = {}: {}\n", d.key, d.expr, d.verdict));
    }
    text.push_str(&format!("obstruction rank: {}\n", curv.rank()));
    text.push_str(if zero {
        "CURVATURE VANISHES\n"
    } else {
        "CURVATURE DOES NOT VANISH\n"
    });
    Ok(Report {
        body: PhgBody {
            schema: SCHEMA,
            command: "phg-curvature",
            file: file.path.clone(),
            epsilon,
            zero,
            rank: curv.rank(),
            connection_defects,
            frobenius_defects,
        },
        text,
        exit: if zero { 0 } else { 1 },
    })
}

// ---------------------------------------------------------- exactness-at

#[derive(Serialize)]
pub struct ExactnessBody {
    pub schema: u32,
    pub command: &'static str,
    pub file: String,
    pub epsilon: &'static str,
    pub point: Vec<f64>,
    pub preimage_exists: bool,
    pub preimage_defect: f64,
    pub max_r: f64,
    pub agree: bool,
    pub r_components: Vec<(String, f64)>,
}

pub fn exactness_at(
    file: &ProblemFile,
    at: &str,
    tolerances: &Tolerances,
) -> Result<Report<ExactnessBody>, CliError> {
    let (eps, epsilon) = as_epsilon(file)?;
    let lower = eps.pde().lower_space().clone();
    let values = resolve_values(file, at, lower.coordinates(), "--at")?;
    let point = JetPoint::from_values(&lower, values).map_err(engine)?;
    let report = eps.exactness_at(&point, tolerances.tol).map_err(engine)?;
    let mut text = String::new();
    text.push_str(&format!("epsilon: {epsilon}\n"));
    for (key, value) in &report.r_components {
        text.push_str(&format!("{key} = {value}\n"));
    }
    text.push_str(&format!(
        "preimage exists: {} (defect {})\nmax |R| = {}\nverdicts agree: {}\n",
        report.preimage_exists, report.preimage_defect, report.max_r, report.agree
    ));
    Ok(Report {
        body: ExactnessBody {
            schema: SCHEMA,
            command: "exactness-at",
            file: file.path.clone(),
            epsilon,
            point: point.values().to_vec(),
            preimage_exists: report.preimage_exists,
            preimage_defect: report.preimage_defect,
            max_r: report.max_r,
            agree: report.agree,
            r_components: report.r_components,
        },
        text,
        exit: if report.preimage_exists { 0 } else { 1 },
    })
}
