use super::{compile_table, IntegrateError, Workspace};
use crate::connection::Connection;
use crate::jet::JetPoint;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PathError {
    #[error("sweep order {0:?} is not a permutation of the axes")]
    NotAPermutation(Vec<usize>),
}

/// An ordered visit of every base axis exactly once; the direction of
/// each leg is determined by where the corner lies relative to the start.
#[derive(Debug, Clone, PartialEq)]
pub struct PathSpec {
    order: Vec<usize>,
}

impl PathSpec {
    /// `order` lists 0-based axes; each must appear exactly once.
    pub fn new(order: Vec<usize>) -> Result<Self, PathError> {
        let n = order.len();
        let mut seen = vec![false; n];
        for &a in &order {
            if a >= n || seen[a] {
                return Err(PathError::NotAPermutation(order.clone()));
            }
            seen[a] = true;
        }
        Ok(PathSpec { order })
    }

    pub fn default_order(n: usize) -> Self {
        PathSpec {
            order: (0..n).collect(),
        }
    }

    pub fn order(&self) -> &[usize] {
        &self.order
    }
}

/// All axis orders, lexicographically. `n` is capped by the space limits,
/// so this stays small.
pub fn axis_permutations(n: usize) -> Vec<PathSpec> {
    let mut out = Vec::new();
    let mut current = Vec::with_capacity(n);
    let mut used = vec![false; n];
    permute(n, &mut current, &mut used, &mut out);
    out
}

fn permute(n: usize, current: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<PathSpec>) {
    if current.len() == n {
        out.push(PathSpec {
            order: current.clone(),
        });
        return;
    }
    for a in 0..n {
        if !used[a] {
            used[a] = true;
            current.push(a);
            permute(n, current, used, out);
            current.pop();
            used[a] = false;
        }
    }
}

/// Integrate from the initial point to the base corner along one axis at
/// a time in the given order, with RK4 steps of magnitude at most `h`
/// (each leg divides its span into equal steps). Returns the terminal
/// fiber values.
pub fn integrate_along_path(
    conn: &Connection,
    init: &JetPoint,
    corner: &[f64],
    path: &PathSpec,
    h: f64,
) -> Result<Vec<f64>, IntegrateError> {
    let space = conn.space();
    let n = space.base_dim();
    if corner.len() != n {
        return Err(IntegrateError::CornerLength {
            expected: n,
            got: corner.len(),
        });
    }
    let comp = compile_table(conn)?;
    let fibers = space.jet_coords().len();
    let mut ws = Workspace::new(n, fibers);
    let mut pos: Vec<f64> = init.values()[..n].to_vec();
    ws.load_state(&init.values()[n..]);
    for &axis in path.order() {
        let delta = corner[axis] - pos[axis];
        if delta.abs() < 1e-14 {
            pos[axis] = corner[axis];
            continue;
        }
        let steps = ((delta.abs() / h) - 1e-9).ceil().max(1.0) as usize;
        let hs = delta / steps as f64;
        for s in 0..steps {
            let x0 = pos[axis] + s as f64 * hs;
            ws.rk4_step_at(&comp, &pos, axis, x0, hs)
                .map_err(|source| IntegrateError::Eval {
                    node: Vec::new(),
                    source,
                })?;
            if !ws.state.iter().all(|v| v.is_finite()) {
                return Err(IntegrateError::NonFiniteEncountered { node: Vec::new() });
            }
        }
        pos[axis] = corner[axis];
    }
    Ok(ws.state.clone())
}

/// Terminal values of every axis-order path and the worst pairwise
/// disagreement. For a flat connection the discrepancy decays with the
/// integrator order; for a curved one it converges to the genuine
/// holonomy of the loop.
#[derive(Debug, Clone)]
pub struct PathDependence {
    pub max_discrepancy: f64,
    pub terminals: Vec<(PathSpec, Vec<f64>)>,
}

pub fn path_dependence(
    conn: &Connection,
    init: &JetPoint,
    corner: &[f64],
    h: f64,
) -> Result<PathDependence, IntegrateError> {
    let n = conn.space().base_dim();
    let mut terminals = Vec::new();
    for path in axis_permutations(n) {
        let end = integrate_along_path(conn, init, corner, &path, h)?;
        terminals.push((path, end));
    }
    let mut max_discrepancy: f64 = 0.0;
    for a in 0..terminals.len() {
        for b in (a + 1)..terminals.len() {
            let d = terminals[a]
                .1
                .iter()
                .zip(&terminals[b].1)
                .fold(0.0f64, |acc, (x, y)| acc.max((x - y).abs()));
            max_discrepancy = max_discrepancy.max(d);
        }
    }
    Ok(PathDependence {
        max_discrepancy,
        terminals,
    })
}
