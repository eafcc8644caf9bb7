//! Deterministic numeric integration of connections by axis-ordered RK4
//! sweeps, path-dependence measurement, and holonomy diagnostics.
//!
//! A connection prescribes every first partial of every fiber coordinate,
//! so along a single axis it is an ODE system. [`integrate`] fills a grid
//! box by sweeping axis 1 from the initial node, then axis 2 from every
//! filled node, and so on; for a flat connection the result approximates
//! the unique local solution through the initial point, and for a curved
//! one the sweep order is part of the definition. [`path_dependence`]
//! makes the order-dependence measurable, and [`holonomy_defect`] checks
//! whether a jet-valued solution is the jet of an actual section.

mod grid;
mod paths;

pub use grid::{GridBox, GridError};
pub use paths::{axis_permutations, integrate_along_path, path_dependence, PathDependence, PathSpec};

use crate::connection::{Connection, FlatReport, GeometricReport};
use crate::jet::{JetPoint, JetSpace};
use crate::symexpr::{Compiled, EvalError, ZeroConfig, ZeroTestError};
use std::io::{self, Write};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum IntegrateError {
    #[error("grid has {grid} axes but the base has {base}")]
    DimensionMismatch { grid: usize, base: usize },
    #[error("initial point does not sit on a grid node (axis {axis})")]
    InitOffGrid { axis: usize },
    #[error("corner must have {expected} coordinates, got {got}")]
    CornerLength { expected: usize, got: usize },
    #[error("state became non-finite at node {node:?}")]
    NonFiniteEncountered { node: Vec<usize> },
    #[error("evaluation failed at node {node:?}: {source}")]
    Eval {
        node: Vec<usize>,
        #[source]
        source: EvalError,
    },
    #[error("connection is not geometric ({violations} violation(s)); strict mode refused it")]
    NotGeometric { violations: usize },
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error(transparent)]
    Zero(#[from] ZeroTestError),
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum HolonomyError {
    #[error("holonomy defect requires jet order >= 1")]
    OrderZero,
    #[error("axis {axis} has only {nodes} nodes; at least 3 are required")]
    GridTooSmall { axis: usize, nodes: usize },
}

/// Gridded numeric section of `J^k(E) -> M` produced by a sweep.
///
/// Values are stored node-major (flat node order is lexicographic in the
/// node multi-index), jet-coordinate minor in the enumeration order of
/// the space. The initial node carries the initial condition exactly.
#[derive(Debug, Clone)]
pub struct SolutionTrace {
    space: JetSpace,
    grid: GridBox,
    data: Vec<f64>,
    init_node: Vec<usize>,
    problem: String,
}

impl SolutionTrace {
    /// Assemble a trace from raw node values (node-major, jet-coordinate
    /// minor). Useful for loading stored traces and for building exact
    /// reference sections in tests.
    pub fn from_parts(
        space: JetSpace,
        grid: GridBox,
        data: Vec<f64>,
        init_node: Vec<usize>,
    ) -> Result<Self, IntegrateError> {
        let fibers = space.jet_coords().len();
        if grid.dim() != space.base_dim() {
            return Err(IntegrateError::DimensionMismatch {
                grid: grid.dim(),
                base: space.base_dim(),
            });
        }
        if data.len() != grid.node_count() * fibers || init_node.len() != grid.dim() {
            return Err(IntegrateError::CornerLength {
                expected: grid.node_count() * fibers,
                got: data.len(),
            });
        }
        if let Some(pos) = data.iter().position(|v| !v.is_finite()) {
            let node = grid.multi_index(pos / fibers);
            return Err(IntegrateError::NonFiniteEncountered { node });
        }
        Ok(SolutionTrace {
            space,
            grid,
            data,
            init_node,
            problem: String::new(),
        })
    }

    pub fn space(&self) -> &JetSpace {
        &self.space
    }

    pub fn grid(&self) -> &GridBox {
        &self.grid
    }

    pub fn step(&self) -> f64 {
        self.grid.step()
    }

    pub fn init_node(&self) -> &[usize] {
        &self.init_node
    }

    /// Label of the problem that produced the trace (empty by default).
    pub fn problem(&self) -> &str {
        &self.problem
    }

    pub fn with_problem(mut self, label: impl Into<String>) -> Self {
        self.problem = label.into();
        self
    }

    pub fn integrator(&self) -> &'static str {
        "RK4"
    }

    pub fn fiber_count(&self) -> usize {
        self.space.jet_coords().len()
    }

    pub fn value(&self, node: &[usize], ci: usize) -> f64 {
        self.value_flat(self.grid.flat_index(node), ci)
    }

    pub fn value_flat(&self, flat: usize, ci: usize) -> f64 {
        self.data[flat * self.fiber_count() + ci]
    }

    pub fn node_values(&self, flat: usize) -> &[f64] {
        let f = self.fiber_count();
        &self.data[flat * f..(flat + 1) * f]
    }

    /// Full jet point (base coordinates and fiber values) at a node.
    pub fn jet_point_at(&self, node: &[usize]) -> JetPoint {
        let mut values = self.grid.node_coords(node);
        values.extend_from_slice(self.node_values(self.grid.flat_index(node)));
        JetPoint::from_values(&self.space, values).expect("trace values are finite")
    }

    /// CSV export: header is the coordinate list, one row per node in
    /// lexicographic node order, 17 significant digits.
    pub fn write_csv<W: Write>(&self, w: &mut W) -> io::Result<()> {
        writeln!(w, "{}", self.space.coordinates().join(","))?;
        let mut row = String::new();
        for flat in 0..self.grid.node_count() {
            row.clear();
            let idx = self.grid.multi_index(flat);
            for a in 0..self.grid.dim() {
                if a > 0 {
                    row.push(',');
                }
                row.push_str(&format!("{:.16e}", self.grid.coord(a, idx[a])));
            }
            for v in self.node_values(flat) {
                row.push(',');
                row.push_str(&format!("{v:.16e}"));
            }
            writeln!(w, "{row}")?;
        }
        Ok(())
    }

    pub fn to_csv_string(&self) -> String {
        let mut buf = Vec::new();
        self.write_csv(&mut buf).expect("writing to memory");
        String::from_utf8(buf).expect("CSV is ASCII")
    }
}

/// Fill a grid box with the axis-ordered RK4 sweep solution of the
/// first-order system the connection prescribes.
///
/// Sweep order is axis 1 from the initial node along the initial line,
/// then axis 2 from every node of that line, and so on; the initial point
/// must lie on a grid node. Output is bit-stable for fixed inputs.
pub fn integrate(
    conn: &Connection,
    init: &JetPoint,
    grid: &GridBox,
) -> Result<SolutionTrace, IntegrateError> {
    let space = conn.space();
    let n = space.base_dim();
    if grid.dim() != n {
        return Err(IntegrateError::DimensionMismatch {
            grid: grid.dim(),
            base: n,
        });
    }
    let comp = compile_table(conn)?;
    let fibers = space.jet_coords().len();
    let init_node = grid
        .node_of_point(&init.values()[..n])
        .map_err(|axis| IntegrateError::InitOffGrid { axis })?;

    let mut data = vec![f64::NAN; grid.node_count() * fibers];
    let init_flat = grid.flat_index(&init_node);
    data[init_flat * fibers..(init_flat + 1) * fibers].copy_from_slice(&init.values()[n..]);

    let mut ws = Workspace::new(n, fibers);
    for axis in 0..n {
        // every node of the slab already filled by the previous phases
        // seeds a 1-D integration along `axis`
        let mut counters = vec![0usize; axis];
        loop {
            let mut idx = init_node.clone();
            idx[..axis].copy_from_slice(&counters);
            march_line(
                conn, grid, &comp, &mut ws, &mut data, fibers, axis, &init_node, &mut idx,
            )?;
            if !bump(&mut counters, grid) {
                break;
            }
        }
    }

    Ok(SolutionTrace {
        space: space.clone(),
        grid: grid.clone(),
        data,
        init_node,
        problem: String::new(),
    })
}

pub(crate) fn compile_table(conn: &Connection) -> Result<Vec<Vec<Compiled>>, IntegrateError> {
    let space = conn.space();
    let coords = space.coordinates();
    let n = space.base_dim();
    (0..space.jet_coords().len())
        .map(|ci| {
            (1..=n)
                .map(|j| conn.coefficient(ci, j).compile(coords))
                .collect::<Result<Vec<_>, _>>()
        })
        .collect::<Result<Vec<_>, _>>()
        .map_err(|source| IntegrateError::Eval {
            node: Vec::new(),
            source,
        })
}

/// Odometer over the axes below the sweep axis; returns false when done.
fn bump(counters: &mut [usize], grid: &GridBox) -> bool {
    for a in (0..counters.len()).rev() {
        counters[a] += 1;
        if counters[a] < grid.nodes(a) {
            return true;
        }
        counters[a] = 0;
    }
    false
}

#[allow(clippy::too_many_arguments)]
fn march_line(
    _conn: &Connection,
    grid: &GridBox,
    comp: &[Vec<Compiled>],
    ws: &mut Workspace,
    data: &mut [f64],
    fibers: usize,
    axis: usize,
    init_node: &[usize],
    idx: &mut Vec<usize>,
) -> Result<(), IntegrateError> {
    let start = init_node[axis];
    let h = grid.step();
    // forward, then backward from the seed
    for (dir, stop) in [(1isize, grid.intervals(axis) as isize), (-1, 0)] {
        let mut t = start as isize;
        while t != stop {
            let next = t + dir;
            idx[axis] = t as usize;
            let from_flat = grid.flat_index(idx);
            let x0 = grid.coord(axis, t as usize);
            ws.load_state(&data[from_flat * fibers..(from_flat + 1) * fibers]);
            ws.rk4_step(comp, grid, idx, axis, x0, dir as f64 * h)
                .map_err(|source| IntegrateError::Eval {
                    node: idx.clone(),
                    source,
                })?;
            idx[axis] = next as usize;
            let to_flat = grid.flat_index(idx);
            if !ws.state.iter().all(|v| v.is_finite()) {
                return Err(IntegrateError::NonFiniteEncountered { node: idx.clone() });
            }
            data[to_flat * fibers..(to_flat + 1) * fibers].copy_from_slice(&ws.state);
            t = next;
        }
        idx[axis] = start;
    }
    Ok(())
}

pub(crate) struct Workspace {
    n: usize,
    pub(crate) state: Vec<f64>,
    vals: Vec<f64>,
    k1: Vec<f64>,
    k2: Vec<f64>,
    k3: Vec<f64>,
    k4: Vec<f64>,
    mid: Vec<f64>,
}

impl Workspace {
    pub(crate) fn new(n: usize, fibers: usize) -> Self {
        Workspace {
            n,
            state: vec![0.0; fibers],
            vals: vec![0.0; n + fibers],
            k1: vec![0.0; fibers],
            k2: vec![0.0; fibers],
            k3: vec![0.0; fibers],
            k4: vec![0.0; fibers],
            mid: vec![0.0; fibers],
        }
    }

    pub(crate) fn load_state(&mut self, u: &[f64]) {
        self.state.copy_from_slice(u);
    }

    fn set_base_from_grid(&mut self, grid: &GridBox, idx: &[usize], axis: usize, xa: f64) {
        for a in 0..self.n {
            self.vals[a] = if a == axis { xa } else { grid.coord(a, idx[a]) };
        }
    }

    pub(crate) fn set_base(&mut self, pos: &[f64], axis: usize, xa: f64) {
        for a in 0..self.n {
            self.vals[a] = if a == axis { xa } else { pos[a] };
        }
    }

    /// One classical RK4 step along `axis`, base position taken from the
    /// grid node; advances `self.state` in place.
    fn rk4_step(
        &mut self,
        comp: &[Vec<Compiled>],
        grid: &GridBox,
        idx: &[usize],
        axis: usize,
        x0: f64,
        h: f64,
    ) -> Result<(), EvalError> {
        self.set_base_from_grid(grid, idx, axis, x0);
        self.rk4_core(comp, axis, x0, h)
    }

    /// Same step with an explicit base position (used by path legs).
    pub(crate) fn rk4_step_at(
        &mut self,
        comp: &[Vec<Compiled>],
        pos: &[f64],
        axis: usize,
        x0: f64,
        h: f64,
    ) -> Result<(), EvalError> {
        self.set_base(pos, axis, x0);
        self.rk4_core(comp, axis, x0, h)
    }

    fn rk4_core(
        &mut self,
        comp: &[Vec<Compiled>],
        axis: usize,
        x0: f64,
        h: f64,
    ) -> Result<(), EvalError> {
        let f = self.state.len();
        let n = self.n;
        rhs_into(&mut self.vals, comp, axis, n, &self.state, &mut self.k1)?;
        for i in 0..f {
            self.mid[i] = self.state[i] + 0.5 * h * self.k1[i];
        }
        self.vals[axis] = x0 + 0.5 * h;
        rhs_into(&mut self.vals, comp, axis, n, &self.mid, &mut self.k2)?;
        for i in 0..f {
            self.mid[i] = self.state[i] + 0.5 * h * self.k2[i];
        }
        rhs_into(&mut self.vals, comp, axis, n, &self.mid, &mut self.k3)?;
        for i in 0..f {
            self.mid[i] = self.state[i] + h * self.k3[i];
        }
        self.vals[axis] = x0 + h;
        rhs_into(&mut self.vals, comp, axis, n, &self.mid, &mut self.k4)?;
        for i in 0..f {
            self.state[i] += h / 6.0
                * (self.k1[i] + 2.0 * self.k2[i] + 2.0 * self.k3[i] + self.k4[i]);
        }
        Ok(())
    }
}

fn rhs_into(
    vals: &mut [f64],
    comp: &[Vec<Compiled>],
    axis: usize,
    n: usize,
    u: &[f64],
    out: &mut [f64],
) -> Result<(), EvalError> {
    vals[n..].copy_from_slice(u);
    for (ci, row) in comp.iter().enumerate() {
        out[ci] = row[axis].eval(vals)?;
    }
    Ok(())
}

/// Worst failure of a trace to be holonomic: over interior nodes and all
/// below-top rows, the difference between the central difference of
/// `y^a_mu` along axis `j` and the stored `y^a_(mu+1_j)`.
pub fn holonomy_defect(trace: &SolutionTrace) -> Result<f64, HolonomyError> {
    let space = trace.space();
    let k = space.order();
    if k == 0 {
        return Err(HolonomyError::OrderZero);
    }
    let grid = trace.grid();
    let n = grid.dim();
    for axis in 0..n {
        if grid.nodes(axis) < 3 {
            return Err(HolonomyError::GridTooSmall {
                axis,
                nodes: grid.nodes(axis),
            });
        }
    }
    let h = grid.step();
    let mut worst: f64 = 0.0;
    let mut idx = vec![1usize; n];
    loop {
        for (ci, jc) in space.jet_coords().iter().enumerate() {
            if jc.mu_order == k {
                continue;
            }
            for j in 0..n {
                let target_ci = space
                    .jet_coord_index(jc.fiber, &jc.mu.plus((j + 1) as u8))
                    .expect("raised index stays in the space");
                let mut up = idx.clone();
                up[j] += 1;
                let mut down = idx.clone();
                down[j] -= 1;
                let cd = (trace.value(&up, ci) - trace.value(&down, ci)) / (2.0 * h);
                worst = worst.max((cd - trace.value(&idx, target_ci)).abs());
            }
        }
        // advance over the interior 1..intervals-1 of every axis
        let mut done = true;
        for a in (0..n).rev() {
            idx[a] += 1;
            if idx[a] <= grid.intervals(a) - 1 {
                done = false;
                break;
            }
            idx[a] = 1;
        }
        if done {
            break;
        }
    }
    Ok(worst)
}

/// Options for [`solve_geometric`].
#[derive(Debug, Clone, Default)]
pub struct SolveOptions {
    /// Refuse non-geometric connections instead of just reporting them.
    pub strict: bool,
    pub zero_cfg: ZeroConfig,
}

/// Trace plus the holonomy diagnostics for a (supposedly) geometric
/// connection.
#[derive(Debug)]
pub struct GeometricSolution {
    pub trace: SolutionTrace,
    pub geometric: GeometricReport,
    pub flat: FlatReport,
    /// None for order-0 connections, where holonomy is vacuous.
    pub holonomy_defect: Option<f64>,
    /// Order-1 only: worst difference between the central second
    /// difference of the order-0 rows and the top coefficients along the
    /// trace.
    pub second_order_defect: Option<f64>,
}

/// Integrate a geometric connection and report how holonomic the solution
/// is. With `strict` set, a non-geometric connection is an error; without
/// it the violation count is just carried in the report.
pub fn solve_geometric(
    conn: &Connection,
    init: &JetPoint,
    grid: &GridBox,
    options: &SolveOptions,
) -> Result<GeometricSolution, IntegrateError> {
    let geometric = conn.is_geometric(&options.zero_cfg)?;
    if options.strict && !geometric.geometric {
        return Err(IntegrateError::NotGeometric {
            violations: geometric.violations.len(),
        });
    }
    let flat = conn.is_flat(&options.zero_cfg)?;
    let trace = integrate(conn, init, grid)?;
    let k = conn.space().order();
    let holonomy = if k >= 1 {
        Some(holonomy_defect(&trace).expect("grid was validated at construction"))
    } else {
        None
    };
    let second = if k == 1 {
        Some(second_order_defect(conn, &trace).map_err(|source| IntegrateError::Eval {
            node: Vec::new(),
            source,
        })?)
    } else {
        None
    };
    Ok(GeometricSolution {
        trace,
        geometric,
        flat,
        holonomy_defect: holonomy,
        second_order_defect: second,
    })
}

/// Worst `|second difference of y^a - top coefficient|` over interior
/// nodes, diagonal and mixed pairs alike.
fn second_order_defect(conn: &Connection, trace: &SolutionTrace) -> Result<f64, EvalError> {
    let space = conn.space();
    let n = space.base_dim();
    let grid = trace.grid();
    let h = grid.step();
    let coords = space.coordinates();
    // compile the top coefficients once: rows with |mu| = 1
    let mut tops = Vec::new();
    for (ci, jc) in space.jet_coords().iter().enumerate() {
        if jc.mu_order != 1 {
            continue;
        }
        let r = jc.mu.entries()[0] as usize;
        for j in r..=n {
            tops.push((jc.fiber, r, j, conn.coefficient(ci, j).compile(coords)?));
        }
    }
    let mut worst: f64 = 0.0;
    let mut idx = vec![1usize; n];
    let mut vals = vec![0.0; space.coord_count()];
    loop {
        let flat = grid.flat_index(&idx);
        for a in 0..n {
            vals[a] = grid.coord(a, idx[a]);
        }
        vals[n..].copy_from_slice(trace.node_values(flat));
        for (fiber, r, j, top) in &tops {
            let base_ci = space
                .jet_coord_index(*fiber, &crate::jet::MultiIndex::empty())
                .expect("order-0 row exists");
            let dd = if r == j {
                let mut up = idx.clone();
                up[r - 1] += 1;
                let mut down = idx.clone();
                down[r - 1] -= 1;
                (trace.value(&up, base_ci) - 2.0 * trace.value(&idx, base_ci)
                    + trace.value(&down, base_ci))
                    / (h * h)
            } else {
                let mut pp = idx.clone();
                pp[r - 1] += 1;
                pp[j - 1] += 1;
                let mut pm = idx.clone();
                pm[r - 1] += 1;
                pm[j - 1] -= 1;
                let mut mp = idx.clone();
                mp[r - 1] -= 1;
                mp[j - 1] += 1;
                let mut mm = idx.clone();
                mm[r - 1] -= 1;
                mm[j - 1] -= 1;
                (trace.value(&pp, base_ci) - trace.value(&pm, base_ci)
                    - trace.value(&mp, base_ci)
                    + trace.value(&mm, base_ci))
                    / (4.0 * h * h)
            };
            worst = worst.max((dd - top.eval(&vals)?).abs());
        }
        let mut done = true;
        for a in (0..n).rev() {
            idx[a] += 1;
            if idx[a] <= grid.intervals(a) - 1 {
                done = false;
                break;
            }
            idx[a] = 1;
        }
        if done {
            break;
        }
    }
    Ok(worst)
}
