//! The `.jet` problem-file format.
//!
//! Line-oriented, `#` starts a comment, whitespace-insensitive within a
//! line. A file declares a jet space and exactly one problem kind:
//!
//! ```text
//! base 2 x1 x2            # base dimension and names
//! fiber 1 y               # fiber dimension and names
//! order 0                 # jet order of the problem
//! c[y;;1] = y             # connection coefficients c[fiber;mu;j]
//! c[y;;2] = x1*y
//! point P: x1=0 x2=0 y=1  # optional named points
//! box B: 0:1,0:1 step=0.01
//! ```
//!
//! Problem kinds, keyed by their coefficient lines:
//! * `c[fiber;mu;j]` — a connection of the declared order (`mu` is the
//!   sorted digit string of the multi-index, empty at order 0);
//! * `f[fiber;nu]` — a solved-form PDE of the declared order (`|nu|` =
//!   order, right-hand sides over coordinates of order below), optionally
//!   extended by `g[fiber;sigma]` lines with `|sigma|` = order + 1;
//! * `ctop[fiber;sigma]` — top coefficients of a geometric connection of
//!   the declared order (`|sigma|` = order + 1).

use jetc_core::symexpr::ParseError;
use jetc_core::{
    Connection, EpsilonSection, Expr, GeometricSpec, JetSpace, MultiIndex, SolvedPde,
};
use std::collections::BTreeMap;
use std::path::Path;
use thiserror::Error;

#[derive(Debug, Error)]
pub enum LoadError {
    #[error("{path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("{path}:{line}:{col}: {message}")]
    Parse {
        path: String,
        line: usize,
        col: usize,
        message: String,
    },
    #[error("{path}:{line}: unknown coordinate `{name}`")]
    UnknownCoordinate {
        path: String,
        line: usize,
        name: String,
    },
    #[error("{path}:{line}: duplicate definition of {what}")]
    DuplicateDefinition {
        path: String,
        line: usize,
        what: String,
    },
    #[error("{path}: missing coefficient {key}")]
    MissingCoefficient { path: String, key: String },
}

/// A named box from the file; the step is optional and can be overridden
/// by the command line.
#[derive(Debug, Clone, PartialEq)]
pub struct BoxSpec {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    pub step: Option<f64>,
}

#[derive(Debug)]
pub enum ProblemKind {
    Connection(Connection),
    Pde(SolvedPde),
    Epsilon(EpsilonSection),
    Geometric(GeometricSpec),
}

impl ProblemKind {
    pub fn label(&self) -> &'static str {
        match self {
            ProblemKind::Connection(_) => "connection",
            ProblemKind::Pde(_) => "solved-pde",
            ProblemKind::Epsilon(_) => "solved-pde+epsilon",
            ProblemKind::Geometric(_) => "geometric",
        }
    }
}

#[derive(Debug)]
pub struct ProblemFile {
    pub path: String,
    pub space: JetSpace,
    pub kind: ProblemKind,
    /// Named points: partial bindings validated against the space.
    pub points: BTreeMap<String, BTreeMap<String, f64>>,
    pub boxes: BTreeMap<String, BoxSpec>,
}

pub fn load(path: impl AsRef<Path>) -> Result<ProblemFile, LoadError> {
    let path_str = path.as_ref().display().to_string();
    let text = std::fs::read_to_string(path.as_ref()).map_err(|source| LoadError::Io {
        path: path_str.clone(),
        source,
    })?;
    parse_problem(&path_str, &text)
}

struct RawCoefficient {
    line: usize,
    col: usize,
    fiber: String,
    index: String,
    direction: Option<usize>,
    expr_text: String,
    expr_col: usize,
}

pub fn parse_problem(path: &str, text: &str) -> Result<ProblemFile, LoadError> {
    let mut base: Option<(usize, Vec<String>)> = None;
    let mut fiber: Option<(usize, Vec<String>)> = None;
    let mut order: Option<(usize, usize)> = None;
    let mut c_lines: Vec<RawCoefficient> = Vec::new();
    let mut f_lines: Vec<RawCoefficient> = Vec::new();
    let mut g_lines: Vec<RawCoefficient> = Vec::new();
    let mut top_lines: Vec<RawCoefficient> = Vec::new();
    let mut points: BTreeMap<String, (usize, BTreeMap<String, f64>)> = BTreeMap::new();
    let mut boxes: BTreeMap<String, BoxSpec> = BTreeMap::new();

    let perr = |line: usize, col: usize, message: String| LoadError::Parse {
        path: path.to_string(),
        line,
        col,
        message,
    };

    for (lineno, raw_line) in text.lines().enumerate() {
        let lineno = lineno + 1;
        let line = match raw_line.find('#') {
            Some(pos) => &raw_line[..pos],
            None => raw_line,
        };
        let trimmed = line.trim();
        if trimmed.is_empty() {
            continue;
        }
        let col_of = |needle: &str| line.find(needle).map(|p| p + 1).unwrap_or(1);

        let mut words = trimmed.split_whitespace();
        let head = words.next().expect("nonempty line");
        match head {
            "base" | "fiber" => {
                let count: usize = words
                    .next()
                    .and_then(|w| w.parse().ok())
                    .ok_or_else(|| perr(lineno, 1, format!("`{head}` needs a count")))?;
                let names: Vec<String> = words.map(|s| s.to_string()).collect();
                if names.len() != count {
                    return Err(perr(
                        lineno,
                        1,
                        format!("`{head} {count}` must list exactly {count} name(s)"),
                    ));
                }
                let slot = if head == "base" { &mut base } else { &mut fiber };
                if slot.is_some() {
                    return Err(LoadError::DuplicateDefinition {
                        path: path.to_string(),
                        line: lineno,
                        what: format!("`{head}` header"),
                    });
                }
                *slot = Some((lineno, names));
            }
            "order" => {
                let k: usize = words
                    .next()
                    .and_then(|w| w.parse().ok())
                    .ok_or_else(|| perr(lineno, 1, "`order` needs an integer".to_string()))?;
                if order.is_some() {
                    return Err(LoadError::DuplicateDefinition {
                        path: path.to_string(),
                        line: lineno,
                        what: "`order` header".to_string(),
                    });
                }
                order = Some((lineno, k));
            }
            "point" => {
                let rest = trimmed.strip_prefix("point").unwrap().trim();
                let (name, body) = rest.split_once(':').ok_or_else(|| {
                    perr(lineno, col_of("point"), "expected `point NAME: ...`".into())
                })?;
                let name = name.trim().to_string();
                if name.is_empty() {
                    return Err(perr(lineno, 1, "point needs a name".into()));
                }
                let mut binding = BTreeMap::new();
                for pair in body.split_whitespace() {
                    let (coord, value) = pair.split_once('=').ok_or_else(|| {
                        perr(lineno, col_of(pair), format!("expected `name=value`, got `{pair}`"))
                    })?;
                    let value: f64 = value.parse().map_err(|_| {
                        perr(lineno, col_of(pair), format!("bad number `{value}`"))
                    })?;
                    binding.insert(coord.to_string(), value);
                }
                if points.insert(name.clone(), (lineno, binding)).is_some() {
                    return Err(LoadError::DuplicateDefinition {
                        path: path.to_string(),
                        line: lineno,
                        what: format!("point `{name}`"),
                    });
                }
            }
            "box" => {
                let rest = trimmed.strip_prefix("box").unwrap().trim();
                let (name, body) = rest
                    .split_once(':')
                    .ok_or_else(|| perr(lineno, 1, "expected `box NAME: a:b,...`".into()))?;
                let name = name.trim().to_string();
                let mut step = None;
                let mut ranges = None;
                for word in body.split_whitespace() {
                    if let Some(s) = word.strip_prefix("step=") {
                        step = Some(s.parse().map_err(|_| {
                            perr(lineno, col_of(word), format!("bad step `{s}`"))
                        })?);
                    } else {
                        ranges = Some(parse_ranges(word).map_err(|m| {
                            perr(lineno, col_of(word), m)
                        })?);
                    }
                }
                let (lo, hi) =
                    ranges.ok_or_else(|| perr(lineno, 1, "box needs ranges `a:b,...`".into()))?;
                if boxes.insert(name.clone(), BoxSpec { lo, hi, step }).is_some() {
                    return Err(LoadError::DuplicateDefinition {
                        path: path.to_string(),
                        line: lineno,
                        what: format!("box `{name}`"),
                    });
                }
            }
            _ => {
                // coefficient line: NAME[...] = expr
                let (lhs, rhs) = trimmed.split_once('=').ok_or_else(|| {
                    perr(lineno, 1, format!("unrecognized directive `{head}`"))
                })?;
                let lhs = lhs.trim();
                let expr_col = col_of("=") + 1;
                let open = lhs.find('[').ok_or_else(|| {
                    perr(lineno, 1, format!("unrecognized directive `{head}`"))
                })?;
                if !lhs.ends_with(']') {
                    return Err(perr(lineno, col_of(lhs), "missing `]` in key".into()));
                }
                let kind = &lhs[..open];
                let inner = &lhs[open + 1..lhs.len() - 1];
                let parts: Vec<&str> = inner.split(';').collect();
                let raw = match (kind, parts.as_slice()) {
                    ("c", [fiber_name, mu, j]) => RawCoefficient {
                        line: lineno,
                        col: 1,
                        fiber: fiber_name.trim().to_string(),
                        index: mu.trim().to_string(),
                        direction: Some(j.trim().parse().map_err(|_| {
                            perr(lineno, 1, format!("bad direction `{j}`"))
                        })?),
                        expr_text: rhs.trim().to_string(),
                        expr_col,
                    },
                    ("f" | "g" | "ctop", [fiber_name, idx]) => RawCoefficient {
                        line: lineno,
                        col: 1,
                        fiber: fiber_name.trim().to_string(),
                        index: idx.trim().to_string(),
                        direction: None,
                        expr_text: rhs.trim().to_string(),
                        expr_col,
                    },
                    _ => {
                        return Err(perr(
                            lineno,
                            1,
                            format!("bad key `{lhs}`: expected c[fiber;mu;j], f[fiber;nu], g[fiber;sigma], or ctop[fiber;sigma]"),
                        ))
                    }
                };
                match kind {
                    "c" => c_lines.push(raw),
                    "f" => f_lines.push(raw),
                    "g" => g_lines.push(raw),
                    "ctop" => top_lines.push(raw),
                    other => {
                        return Err(perr(lineno, 1, format!("unknown coefficient kind `{other}`")))
                    }
                }
            }
        }
    }

    let (base_line, base_names) =
        base.ok_or_else(|| perr(0, 0, "missing `base` header".into()))?;
    let (_, fiber_names) = fiber.ok_or_else(|| perr(0, 0, "missing `fiber` header".into()))?;
    let (_, k) = order.ok_or_else(|| perr(0, 0, "missing `order` header".into()))?;

    let space = JetSpace::with_names(base_names, fiber_names, k).map_err(|e| LoadError::Parse {
        path: path.to_string(),
        line: base_line,
        col: 1,
        message: e.to_string(),
    })?;
    space.check_names().map_err(|e| LoadError::Parse {
        path: path.to_string(),
        line: base_line,
        col: 1,
        message: e.to_string(),
    })?;

    // exactly one problem kind per file
    let kinds_present = [
        (!c_lines.is_empty(), "c"),
        (!f_lines.is_empty() || !g_lines.is_empty(), "f/g"),
        (!top_lines.is_empty(), "ctop"),
    ];
    let present: Vec<&str> = kinds_present
        .iter()
        .filter(|(p, _)| *p)
        .map(|(_, n)| *n)
        .collect();
    if present.len() > 1 {
        let line = [&c_lines, &f_lines, &g_lines, &top_lines]
            .iter()
            .filter_map(|v| v.first().map(|r| r.line))
            .max()
            .unwrap_or(0);
        return Err(LoadError::DuplicateDefinition {
            path: path.to_string(),
            line,
            what: format!("problem kind ({} and {})", present[0], present[1]),
        });
    }
    if present.is_empty() {
        return Err(perr(0, 0, "no problem definition (c, f, or ctop lines)".into()));
    }
    if !g_lines.is_empty() && f_lines.is_empty() {
        return Err(perr(
            g_lines[0].line,
            1,
            "epsilon lines `g[...]` require a solved-form block `f[...]`".into(),
        ));
    }

    let kind = if !c_lines.is_empty() {
        ProblemKind::Connection(build_connection(path, &space, &c_lines)?)
    } else if !f_lines.is_empty() {
        let pde = build_pde(path, &space, &f_lines)?;
        if g_lines.is_empty() {
            ProblemKind::Pde(pde)
        } else {
            ProblemKind::Epsilon(build_epsilon(path, pde, &g_lines)?)
        }
    } else {
        ProblemKind::Geometric(build_geometric(path, &space, &top_lines)?)
    };

    // validate named points against the space coordinates
    let mut out_points = BTreeMap::new();
    for (name, (lineno, binding)) in points {
        for coord in binding.keys() {
            if space.coord_index(coord).is_none() {
                return Err(LoadError::UnknownCoordinate {
                    path: path.to_string(),
                    line: lineno,
                    name: coord.clone(),
                });
            }
        }
        out_points.insert(name, binding);
    }

    Ok(ProblemFile {
        path: path.to_string(),
        space,
        kind,
        points: out_points,
        boxes,
    })
}

fn parse_ranges(word: &str) -> Result<(Vec<f64>, Vec<f64>), String> {
    let mut lo = Vec::new();
    let mut hi = Vec::new();
    for part in word.split(',') {
        let (a, b) = part
            .split_once(':')
            .ok_or_else(|| format!("expected `lo:hi`, got `{part}`"))?;
        lo.push(a.parse().map_err(|_| format!("bad number `{a}`"))?);
        hi.push(b.parse().map_err(|_| format!("bad number `{b}`"))?);
    }
    Ok((lo, hi))
}

fn fiber_index(path: &str, space: &JetSpace, raw: &RawCoefficient) -> Result<usize, LoadError> {
    space
        .fiber_names()
        .iter()
        .position(|f| f == &raw.fiber)
        .ok_or_else(|| LoadError::UnknownCoordinate {
            path: path.to_string(),
            line: raw.line,
            name: raw.fiber.clone(),
        })
}

fn parse_index(path: &str, raw: &RawCoefficient, n: usize) -> Result<MultiIndex, LoadError> {
    let mu = MultiIndex::from_digits(&raw.index).ok_or_else(|| LoadError::Parse {
        path: path.to_string(),
        line: raw.line,
        col: raw.col,
        message: format!("bad multi-index `{}`", raw.index),
    })?;
    if mu.entries().iter().any(|&e| e as usize > n) {
        return Err(LoadError::Parse {
            path: path.to_string(),
            line: raw.line,
            col: raw.col,
            message: format!("multi-index `{}` exceeds base dimension {n}", raw.index),
        });
    }
    Ok(mu)
}

fn parse_expr_line(
    path: &str,
    raw: &RawCoefficient,
    allowed: &JetSpace,
) -> Result<Expr, LoadError> {
    match allowed.parse_expr(&raw.expr_text) {
        Ok(e) => Ok(e),
        Err(ParseError::UnknownVariable { name, .. }) => Err(LoadError::UnknownCoordinate {
            path: path.to_string(),
            line: raw.line,
            name,
        }),
        Err(ParseError::Syntax {
            position,
            expected,
            found,
        }) => Err(LoadError::Parse {
            path: path.to_string(),
            line: raw.line,
            col: raw.expr_col + position,
            message: format!("expected {expected}, found {found}"),
        }),
    }
}

fn build_connection(
    path: &str,
    space: &JetSpace,
    lines: &[RawCoefficient],
) -> Result<Connection, LoadError> {
    let n = space.base_dim();
    let mut table: BTreeMap<(usize, MultiIndex, usize), Expr> = BTreeMap::new();
    for raw in lines {
        let fiber = fiber_index(path, space, raw)?;
        let mu = parse_index(path, raw, n)?;
        if mu.order() > space.order() {
            return Err(LoadError::Parse {
                path: path.to_string(),
                line: raw.line,
                col: raw.col,
                message: format!(
                    "multi-index `{}` has order {} but the space has order {}",
                    raw.index,
                    mu.order(),
                    space.order()
                ),
            });
        }
        let j = raw.direction.expect("c lines carry a direction");
        if j == 0 || j > n {
            return Err(LoadError::Parse {
                path: path.to_string(),
                line: raw.line,
                col: raw.col,
                message: format!("direction {j} outside 1..={n}"),
            });
        }
        let expr = parse_expr_line(path, raw, space)?;
        if table.insert((fiber, mu.clone(), j), expr).is_some() {
            return Err(LoadError::DuplicateDefinition {
                path: path.to_string(),
                line: raw.line,
                what: format!("c[{};{};{j}]", raw.fiber, mu.digits()),
            });
        }
    }
    // totality over the index range
    for jc in space.jet_coords() {
        for j in 1..=n {
            if !table.contains_key(&(jc.fiber, jc.mu.clone(), j)) {
                return Err(LoadError::MissingCoefficient {
                    path: path.to_string(),
                    key: format!(
                        "c[{};{};{j}]",
                        space.fiber_names()[jc.fiber],
                        jc.mu.digits()
                    ),
                });
            }
        }
    }
    let rows = space
        .jet_coords()
        .iter()
        .map(|jc| {
            (1..=n)
                .map(|j| table[&(jc.fiber, jc.mu.clone(), j)].clone())
                .collect()
        })
        .collect();
    Connection::from_rows(space.clone(), rows).map_err(|e| LoadError::Parse {
        path: path.to_string(),
        line: 0,
        col: 0,
        message: e.to_string(),
    })
}

fn collect_keyed(
    path: &str,
    space: &JetSpace,
    lines: &[RawCoefficient],
    expected_order: usize,
    allowed: &JetSpace,
    kind: &str,
) -> Result<BTreeMap<(usize, MultiIndex), Expr>, LoadError> {
    let n = space.base_dim();
    let mut table = BTreeMap::new();
    for raw in lines {
        let fiber = fiber_index(path, space, raw)?;
        let idx = parse_index(path, raw, n)?;
        if idx.order() != expected_order {
            return Err(LoadError::Parse {
                path: path.to_string(),
                line: raw.line,
                col: raw.col,
                message: format!(
                    "index `{}` must have order {expected_order} for `{kind}` lines",
                    raw.index
                ),
            });
        }
        let expr = parse_expr_line(path, raw, allowed)?;
        if table.insert((fiber, idx.clone()), expr).is_some() {
            return Err(LoadError::DuplicateDefinition {
                path: path.to_string(),
                line: raw.line,
                what: format!("{kind}[{};{}]", raw.fiber, idx.digits()),
            });
        }
    }
    // totality
    for fiber in 0..space.fiber_dim() {
        for idx in jetc_core::jet::multi_indices(n, expected_order) {
            if !table.contains_key(&(fiber, idx.clone())) {
                return Err(LoadError::MissingCoefficient {
                    path: path.to_string(),
                    key: format!("{kind}[{};{}]", space.fiber_names()[fiber], idx.digits()),
                });
            }
        }
    }
    Ok(table)
}

fn build_pde(
    path: &str,
    space: &JetSpace,
    lines: &[RawCoefficient],
) -> Result<SolvedPde, LoadError> {
    if space.order() < 1 {
        return Err(LoadError::Parse {
            path: path.to_string(),
            line: lines.first().map(|r| r.line).unwrap_or(0),
            col: 1,
            message: "solved-form blocks need `order` >= 1".into(),
        });
    }
    let lower = space.at_order(space.order() - 1);
    let table = collect_keyed(path, space, lines, space.order(), &lower, "f")?;
    let rows = (0..space.fiber_dim())
        .map(|fiber| {
            jetc_core::jet::multi_indices(space.base_dim(), space.order())
                .into_iter()
                .map(|nu| table[&(fiber, nu)].clone())
                .collect()
        })
        .collect();
    SolvedPde::from_rows(space.clone(), rows).map_err(|e| LoadError::Parse {
        path: path.to_string(),
        line: 0,
        col: 0,
        message: e.to_string(),
    })
}

fn build_epsilon(
    path: &str,
    pde: SolvedPde,
    lines: &[RawCoefficient],
) -> Result<EpsilonSection, LoadError> {
    let space = pde.space().clone();
    let lower = pde.lower_space().clone();
    let table = collect_keyed(path, &space, lines, space.order() + 1, &lower, "g")?;
    let rows = (0..space.fiber_dim())
        .map(|fiber| {
            jetc_core::jet::multi_indices(space.base_dim(), space.order() + 1)
                .into_iter()
                .map(|sigma| table[&(fiber, sigma)].clone())
                .collect()
        })
        .collect();
    EpsilonSection::from_rows(pde, rows).map_err(|e| LoadError::Parse {
        path: path.to_string(),
        line: 0,
        col: 0,
        message: e.to_string(),
    })
}

fn build_geometric(
    path: &str,
    space: &JetSpace,
    lines: &[RawCoefficient],
) -> Result<GeometricSpec, LoadError> {
    let table = collect_keyed(path, space, lines, space.order() + 1, space, "ctop")?;
    GeometricSpec::from_fn(space.clone(), |fiber, sigma| {
        table[&(fiber, sigma.clone())].clone()
    })
    .map_err(|e| LoadError::Parse {
        path: path.to_string(),
        line: 0,
        col: 0,
        message: e.to_string(),
    })
}
