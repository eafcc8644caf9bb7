//! Solved-form PDEs presented as sections over a lower jet space, their
//! extensions by chosen higher-order data, and the obstruction calculus
//! that decides when such an extension admits unique holonomic solutions.
//!
//! A [`SolvedPde`] gives every top-order jet explicitly:
//! `y^a_nu = f^a_nu(x, y_(k-1))` for all `|nu| = k`, so the equation set is
//! the graph of a section over `J^(k-1)(E)` and in particular is bijective
//! to its projection. An [`EpsilonSection`] extends it by order-(k+1) data
//! `y^a_sigma = g^a_sigma(x, y_(k-1))`. Whether the extension is a
//! connection, and whether it admits unique holonomic solutions, is
//! measured by the two defect families computed here.

use crate::connection::{Connection, ConnectionError, Curvature};
use crate::jet::{multi_indices, JetPoint, JetSpace, MultiIndex};
use crate::symexpr::{is_zero, simplify, EvalError, Expr, ZeroConfig, ZeroTestError, ZeroVerdict};
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum PdeError {
    #[error("a solved-form PDE must have order at least 1")]
    OrderTooLow,
    #[error("{slot} uses `{variable}`, which is not a coordinate of order <= {max_order}")]
    ForeignVariable {
        slot: String,
        variable: String,
        max_order: usize,
    },
    #[error("equation table has wrong shape")]
    TableShape,
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
}

/// `y^a_nu = f^a_nu(x, y_(k-1))` for every order-k multi-index `nu`.
#[derive(Debug, Clone)]
pub struct SolvedPde {
    space: JetSpace,
    lower: JetSpace,
    nus: Vec<MultiIndex>,
    // rhs[fiber][position of nu]
    rhs: Vec<Vec<Expr>>,
}

impl SolvedPde {
    pub fn from_fn(
        space: JetSpace,
        mut f: impl FnMut(usize, &MultiIndex) -> Expr,
    ) -> Result<Self, PdeError> {
        let nus = multi_indices(space.base_dim(), space.order());
        let rows = (0..space.fiber_dim())
            .map(|fiber| nus.iter().map(|nu| f(fiber, nu)).collect())
            .collect();
        Self::from_rows(space, rows)
    }

    pub fn from_rows(space: JetSpace, rows: Vec<Vec<Expr>>) -> Result<Self, PdeError> {
        let k = space.order();
        if k < 1 {
            return Err(PdeError::OrderTooLow);
        }
        let nus = multi_indices(space.base_dim(), k);
        if rows.len() != space.fiber_dim() || rows.iter().any(|r| r.len() != nus.len()) {
            return Err(PdeError::TableShape);
        }
        let lower = space.at_order(k - 1);
        for (fiber, row) in rows.iter().enumerate() {
            for (pos, e) in row.iter().enumerate() {
                check_vars(e, &lower, || {
                    format!("f[{};{}]", space.fiber_names()[fiber], nus[pos].digits())
                })?;
            }
        }
        Ok(SolvedPde {
            space,
            lower,
            nus,
            rhs: rows,
        })
    }

    /// The ambient jet space `J^k(E)` the equations live in.
    pub fn space(&self) -> &JetSpace {
        &self.space
    }

    /// The parameter space `J^(k-1)(E)` the right-hand sides live on.
    pub fn lower_space(&self) -> &JetSpace {
        &self.lower
    }

    pub fn order(&self) -> usize {
        self.space.order()
    }

    pub fn top_indices(&self) -> &[MultiIndex] {
        &self.nus
    }

    pub fn rhs(&self, fiber: usize, nu: &MultiIndex) -> Option<&Expr> {
        let pos = self.nus.iter().position(|m| m == nu)?;
        Some(&self.rhs[fiber][pos])
    }

    /// Total derivative along the equation set: jets below the top raise
    /// as themselves, top-order jets are replaced by the right-hand sides,
    /// so the result stays on `J^(k-1)`.
    pub fn total_derivative(&self, e: &Expr, j: usize) -> Expr {
        let k = self.space.order();
        let mut acc = e.diff(self.lower.base_name(j));
        for jc in self.lower.jet_coords() {
            let name = self.lower.jet_coord_name(jc.fiber, &jc.mu);
            let d = e.diff(&name);
            if d.is_literal_zero() {
                continue;
            }
            let raised = jc.mu.plus(j as u8);
            let factor = if jc.mu_order < k - 1 {
                Expr::var(self.lower.jet_coord_name(jc.fiber, &raised))
            } else {
                self.rhs(jc.fiber, &raised)
                    .expect("raised top index is canonical")
                    .clone()
            };
            acc = Expr::add(acc, Expr::mul(d, factor));
        }
        acc
    }

    /// Rewrite the order-k system as an order-0 connection on an auxiliary
    /// fibered manifold whose fiber coordinates are all jets of order
    /// `< k`. Holonomic solutions of the PDE correspond exactly to
    /// solutions of this first-order system.
    pub fn reduce_to_first_order(&self) -> Connection {
        let k = self.space.order();
        let fiber_names: Vec<String> = self
            .lower
            .jet_coords()
            .iter()
            .map(|jc| self.lower.jet_coord_name(jc.fiber, &jc.mu))
            .collect();
        let aux = self.lower.at_order(0).with_fibers(fiber_names);
        let lower_coords = self.lower.jet_coords().to_vec();
        Connection::from_fn(aux, |jc, j| {
            let orig = &lower_coords[jc.fiber];
            let raised = orig.mu.plus(j as u8);
            if orig.mu_order < k - 1 {
                Expr::var(self.lower.jet_coord_name(orig.fiber, &raised))
            } else {
                self.rhs(orig.fiber, &raised)
                    .expect("raised top index is canonical")
                    .clone()
            }
        })
        .expect("right-hand sides are expressions over the auxiliary coordinates")
    }

    /// The extension obtained by total-differentiating each top equation
    /// once, resolving each order-(k+1) index through its decomposition
    /// with the largest final direction.
    pub fn canonical_epsilon(&self) -> EpsilonSection {
        let pde = self.clone();
        EpsilonSection::from_fn(pde, |fiber, sigma| {
            let j = *sigma.entries().last().expect("sigma has order k+1 >= 2");
            let nu = sigma.minus(j).expect("last entry is present");
            let f = self.rhs(fiber, &nu).expect("nu is a canonical top index");
            simplify(&self.total_derivative(f, j as usize))
        })
        .expect("derivatives stay on the lower space")
    }
}

fn check_vars(e: &Expr, allowed: &JetSpace, slot: impl Fn() -> String) -> Result<(), PdeError> {
    for var in e.free_vars() {
        if allowed.coord_index(&var).is_none() {
            return Err(PdeError::ForeignVariable {
                slot: slot(),
                variable: var,
                max_order: allowed.order(),
            });
        }
    }
    Ok(())
}

/// A solved-form PDE together with order-(k+1) data `g^a_sigma`,
/// parametrized over the same `J^(k-1)` coordinates.
#[derive(Debug, Clone)]
pub struct EpsilonSection {
    pde: SolvedPde,
    sigmas: Vec<MultiIndex>,
    // ext[fiber][position of sigma]
    ext: Vec<Vec<Expr>>,
}

impl EpsilonSection {
    pub fn from_fn(
        pde: SolvedPde,
        mut g: impl FnMut(usize, &MultiIndex) -> Expr,
    ) -> Result<Self, PdeError> {
        let sigmas = multi_indices(pde.space().base_dim(), pde.order() + 1);
        let rows: Vec<Vec<Expr>> = (0..pde.space().fiber_dim())
            .map(|fiber| sigmas.iter().map(|s| g(fiber, s)).collect())
            .collect();
        Self::from_rows(pde, rows)
    }

    pub fn from_rows(pde: SolvedPde, rows: Vec<Vec<Expr>>) -> Result<Self, PdeError> {
        let sigmas = multi_indices(pde.space().base_dim(), pde.order() + 1);
        if rows.len() != pde.space().fiber_dim() || rows.iter().any(|r| r.len() != sigmas.len()) {
            return Err(PdeError::TableShape);
        }
        for (fiber, row) in rows.iter().enumerate() {
            for (pos, e) in row.iter().enumerate() {
                check_vars(e, pde.lower_space(), || {
                    format!(
                        "g[{};{}]",
                        pde.space().fiber_names()[fiber],
                        sigmas[pos].digits()
                    )
                })?;
            }
        }
        Ok(EpsilonSection {
            pde,
            sigmas,
            ext: rows,
        })
    }

    pub fn pde(&self) -> &SolvedPde {
        &self.pde
    }

    pub fn extension_indices(&self) -> &[MultiIndex] {
        &self.sigmas
    }

    pub fn extension(&self, fiber: usize, sigma: &MultiIndex) -> Option<&Expr> {
        let pos = self.sigmas.iter().position(|m| m == sigma)?;
        Some(&self.ext[fiber][pos])
    }

    /// Is the extension a connection, i.e. does the extended set sit
    /// inside the prolongation of the base equations? Checked slot by
    /// slot: for every `(nu, j)` the data `g_(nu+1_j)` must equal
    /// `D^f_j f_nu`. Disagreeing decompositions of the same `sigma` are
    /// not reconciled; they simply show up as separate defects.
    pub fn is_connection(&self, cfg: &ZeroConfig) -> Result<EpsilonReport, ZeroTestError> {
        let mut defects = Vec::new();
        for fiber in 0..self.pde.space().fiber_dim() {
            for nu in self.pde.top_indices() {
                let f = self.pde.rhs(fiber, nu).expect("canonical index");
                for j in 1..=self.pde.space().base_dim() {
                    let derived = self.pde.total_derivative(f, j);
                    let g = self
                        .extension(fiber, &nu.plus(j as u8))
                        .expect("raised index is canonical");
                    let defect = simplify(&Expr::sub(g.clone(), derived));
                    let verdict = is_zero(&defect, cfg)?;
                    defects.push(EpsilonDefect {
                        fiber,
                        nu: nu.clone(),
                        j,
                        expr: defect,
                        verdict,
                    });
                }
            }
        }
        let is_connection = defects.iter().all(|d| d.verdict.is_zero());
        Ok(EpsilonReport {
            is_connection,
            defects,
        })
    }

    /// The full obstruction: the connection defects `D^f_j f_nu - g_(nu+1_j)`
    /// together with the curvature of the reduced first-order system of the
    /// base equations. Both vanish identically exactly when the extension
    /// has unique holonomic solutions through every admissible initial
    /// condition.
    pub fn curvature(&self) -> PhgCurvature {
        let mut defects = Vec::new();
        for fiber in 0..self.pde.space().fiber_dim() {
            for nu in self.pde.top_indices() {
                let f = self.pde.rhs(fiber, nu).expect("canonical index");
                for j in 1..=self.pde.space().base_dim() {
                    let derived = self.pde.total_derivative(f, j);
                    let g = self
                        .extension(fiber, &nu.plus(j as u8))
                        .expect("raised index is canonical");
                    defects.push(ConnectionDefect {
                        fiber,
                        nu: nu.clone(),
                        j,
                        expr: simplify(&Expr::sub(derived, g.clone())),
                    });
                }
            }
        }
        let reduced = self.pde.reduce_to_first_order();
        let frobenius_defect = reduced.curvature();
        PhgCurvature {
            connection_defects: defects,
            reduced,
            frobenius_defect,
        }
    }

    /// Pointwise exactness probe at a point of the extended equation set,
    /// given by its `(x, y_(k-1))` parameters.
    ///
    /// The preimage test is independent of the curvature representation:
    /// it formally total-differentiates both `f` and `g` at the point and
    /// brute-forces consistency of every decomposition — order-(k+1)
    /// candidates reached from `f` must match the chosen `g`, and all
    /// order-(k+2) candidates reached from `g` must agree wherever their
    /// canonical indices coincide. The report also carries the evaluated
    /// obstruction so the two verdicts can be compared.
    pub fn exactness_at(&self, point: &JetPoint, tol: f64) -> Result<ExactnessReport, PdeError> {
        let lower = self.pde.lower_space();
        let binding = point.to_binding(lower);
        let n = lower.base_dim();
        let mut preimage_defect: f64 = 0.0;

        // order-(k+1) candidates from f vs the chosen g
        for fiber in 0..self.pde.space().fiber_dim() {
            for nu in self.pde.top_indices() {
                let f = self.pde.rhs(fiber, nu).expect("canonical index");
                for j in 1..=n {
                    let candidate = self.pde.total_derivative(f, j).eval(&binding)?;
                    let chosen = self
                        .extension(fiber, &nu.plus(j as u8))
                        .expect("raised index is canonical")
                        .eval(&binding)?;
                    preimage_defect = preimage_defect.max((candidate - chosen).abs());
                }
            }
        }

        // order-(k+2) candidates from g, brute-forced over decompositions
        for fiber in 0..self.pde.space().fiber_dim() {
            for rho in multi_indices(n, self.pde.order() + 2) {
                let mut candidates = Vec::new();
                for j in rho.distinct_entries() {
                    let sigma = rho.minus(j).expect("distinct entry present");
                    let g = self.extension(fiber, &sigma).expect("canonical index");
                    candidates.push(self.pde.total_derivative(g, j as usize).eval(&binding)?);
                }
                for a in 0..candidates.len() {
                    for b in (a + 1)..candidates.len() {
                        preimage_defect =
                            preimage_defect.max((candidates[a] - candidates[b]).abs());
                    }
                }
            }
        }

        let preimage_exists = preimage_defect < tol;

        let curvature = self.curvature();
        let mut r_components = Vec::new();
        for d in &curvature.connection_defects {
            r_components.push((
                format!(
                    "defect[{};{};{}]",
                    self.pde.space().fiber_names()[d.fiber],
                    d.nu.digits(),
                    d.j
                ),
                d.expr.eval(&binding)?,
            ));
        }
        for c in curvature.frobenius_defect.components() {
            let name = curvature.reduced.space().fiber_names()[c.coord.fiber].clone();
            r_components.push((
                format!("R[{name};({},{})]", c.pair.0, c.pair.1),
                c.expr.eval(&binding)?,
            ));
        }
        let max_r = r_components
            .iter()
            .fold(0.0f64, |acc, (_, v)| acc.max(v.abs()));

        Ok(ExactnessReport {
            preimage_exists,
            preimage_defect,
            r_components,
            max_r,
            agree: preimage_exists == (max_r < tol),
        })
    }
}

#[derive(Debug, Clone)]
pub struct EpsilonDefect {
    pub fiber: usize,
    pub nu: MultiIndex,
    pub j: usize,
    /// `g_(nu+1_j) - D^f_j f_nu`, simplified.
    pub expr: Expr,
    pub verdict: ZeroVerdict,
}

#[derive(Debug, Clone)]
pub struct EpsilonReport {
    pub is_connection: bool,
    pub defects: Vec<EpsilonDefect>,
}

#[derive(Debug, Clone)]
pub struct ConnectionDefect {
    pub fiber: usize,
    pub nu: MultiIndex,
    pub j: usize,
    /// `D^f_j f_nu - g_(nu+1_j)`, simplified.
    pub expr: Expr,
}

/// The concrete obstruction attached to an extended solved-form PDE.
///
/// The abstract obstruction bundle is represented by its defect slots;
/// [`PhgCurvature::rank`] reports how many there are.
#[derive(Debug, Clone)]
pub struct PhgCurvature {
    pub connection_defects: Vec<ConnectionDefect>,
    /// The base equations rewritten as a first-order system.
    pub reduced: Connection,
    /// Curvature of that system.
    pub frobenius_defect: Curvature,
}

impl PhgCurvature {
    /// Tri-state verdicts for both defect families plus the aggregate.
    pub fn is_zero(&self, cfg: &ZeroConfig) -> Result<PhgCurvatureReport, ZeroTestError> {
        let mut connection = Vec::new();
        for d in &self.connection_defects {
            connection.push((d.clone(), is_zero(&d.expr, cfg)?));
        }
        let mut frobenius = Vec::new();
        for c in self.frobenius_defect.components() {
            frobenius.push((c.clone(), is_zero(&c.expr, cfg)?));
        }
        let zero = connection.iter().all(|(_, v)| v.is_zero())
            && frobenius.iter().all(|(_, v)| v.is_zero());
        Ok(PhgCurvatureReport {
            zero,
            connection,
            frobenius,
        })
    }

    pub fn rank(&self) -> usize {
        self.connection_defects.len() + self.frobenius_defect.components().len()
    }
}

#[derive(Debug, Clone)]
pub struct PhgCurvatureReport {
    pub zero: bool,
    pub connection: Vec<(ConnectionDefect, ZeroVerdict)>,
    pub frobenius: Vec<(crate::connection::CurvatureComponent, ZeroVerdict)>,
}

#[derive(Debug, Clone)]
pub struct ExactnessReport {
    pub preimage_exists: bool,
    pub preimage_defect: f64,
    pub r_components: Vec<(String, f64)>,
    pub max_r: f64,
    /// Whether the independent preimage verdict agrees with vanishing of
    /// the evaluated obstruction at the same tolerance.
    pub agree: bool,
}

// ----------------------------------------------------- prolongation (k=0)

/// One defining equation route of the prolonged system: the order-2
/// coordinate over `target` receives `D^c_(via.1) c^a_(via.0)`.
#[derive(Debug, Clone)]
pub struct SecondOrderRoute {
    pub fiber: usize,
    pub target: MultiIndex,
    /// `(coefficient direction, derivative direction)`.
    pub via: (usize, usize),
    pub rhs: Expr,
}

/// Defining equations of the prolongation of an order-0 connection inside
/// the second jet space: the first-order block pins `y^a_j` to the
/// coefficients, the second-order block lists every candidate for
/// `y^a_(jk)` produced by differentiating once and substituting back.
/// Routes sharing a canonical target disagree exactly by curvature.
#[derive(Debug, Clone)]
pub struct ProlongedSystem {
    space2: JetSpace,
    first_order: Vec<(usize, usize, Expr)>,
    second_order: Vec<SecondOrderRoute>,
}

impl ProlongedSystem {
    /// The ambient second jet space.
    pub fn space(&self) -> &JetSpace {
        &self.space2
    }

    pub fn first_order(&self) -> &[(usize, usize, Expr)] {
        &self.first_order
    }

    pub fn second_order(&self) -> &[SecondOrderRoute] {
        &self.second_order
    }

    /// All defining equations as residual expressions on the second jet
    /// space (one per first-order slot and per route).
    pub fn residuals(&self) -> Vec<Expr> {
        let mut out = Vec::new();
        for (fiber, j, rhs) in &self.first_order {
            let name = self
                .space2
                .jet_coord_name(*fiber, &MultiIndex::new([*j as u8]));
            out.push(Expr::sub(Expr::var(name), rhs.clone()));
        }
        for route in &self.second_order {
            let name = self.space2.jet_coord_name(route.fiber, &route.target);
            out.push(Expr::sub(Expr::var(name), route.rhs.clone()));
        }
        out
    }

    /// For every canonical target with two routes, the simplified
    /// difference `rhs(j,k) - rhs(k,j)` with `j < k`.
    pub fn route_discrepancies(&self) -> Vec<(usize, MultiIndex, Expr)> {
        let mut out = Vec::new();
        for a in self.second_order.iter() {
            for b in self.second_order.iter() {
                if a.fiber == b.fiber && a.target == b.target && a.via.0 < b.via.0 {
                    out.push((
                        a.fiber,
                        a.target.clone(),
                        simplify(&Expr::sub(a.rhs.clone(), b.rhs.clone())),
                    ));
                }
            }
        }
        out
    }
}

/// Defining equations of the prolongation of an order-0 connection:
/// `y^a_j = c^a_j` and, for every ordered direction pair `(j, k)`, the
/// candidate `y^a_(jk) = D^c_k c^a_j`, with the second-jet symmetry
/// imposed by the canonical multi-index.
pub fn prolong_equations(conn: &Connection) -> Result<ProlongedSystem, ConnectionError> {
    if conn.space().order() != 0 {
        return Err(ConnectionError::OrderMismatch {
            expected: 0,
            got: conn.space().order(),
        });
    }
    let n = conn.space().base_dim();
    let m = conn.space().fiber_dim();
    let space2 = conn.space().at_order(2);
    let mut first_order = Vec::new();
    let mut second_order = Vec::new();
    for fiber in 0..m {
        for j in 1..=n {
            first_order.push((fiber, j, conn.coefficient(fiber, j).clone()));
        }
        for j in 1..=n {
            for k in 1..=n {
                let rhs = simplify(&conn.total_derivative(conn.coefficient(fiber, j), k));
                second_order.push(SecondOrderRoute {
                    fiber,
                    target: MultiIndex::new([j as u8, k as u8]),
                    via: (j, k),
                    rhs,
                });
            }
        }
    }
    Ok(ProlongedSystem {
        space2,
        first_order,
        second_order,
    })
}

/// Direct surjectivity probe at a point: build both derivative candidates
/// for every (jet coordinate, unordered direction pair) slot from the
/// connection's own coefficients and check that a symmetric assignment
/// exists within `tol`. This does not consult [`Connection::curvature`];
/// agreement of the two is a tested equivalence, not an assumption.
pub fn prolongation_surjective_at(
    conn: &Connection,
    point: &JetPoint,
    tol: f64,
) -> Result<bool, EvalError> {
    let binding = point.to_binding(conn.space());
    let n = conn.space().base_dim();
    for (ci, _) in conn.space().jet_coords().iter().enumerate() {
        for r in 1..=n {
            for j in (r + 1)..=n {
                let via_r = conn
                    .total_derivative(conn.coefficient(ci, r), j)
                    .eval(&binding)?;
                let via_j = conn
                    .total_derivative(conn.coefficient(ci, j), r)
                    .eval(&binding)?;
                if (via_r - via_j).abs() >= tol {
                    return Ok(false);
                }
            }
        }
    }
    Ok(true)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::connection::Connection;

    fn exp_pde() -> SolvedPde {
        // y_1 = y, y_2 = y as a k=1 solved system on n=2
        let space = JetSpace::new(2, 1, 1).unwrap();
        SolvedPde::from_fn(space, |_, _| Expr::var("y")).unwrap()
    }

    fn shear_pde() -> SolvedPde {
        let space = JetSpace::new(2, 1, 1).unwrap();
        SolvedPde::from_fn(space, |_, nu| {
            if nu.entries() == [1] {
                Expr::var("y")
            } else {
                Expr::mul(Expr::var("x1"), Expr::var("y"))
            }
        })
        .unwrap()
    }

    #[test]
    fn rhs_must_stay_below_top_order() {
        let space = JetSpace::new(2, 1, 1).unwrap();
        let err = SolvedPde::from_fn(space, |_, _| Expr::var("y_1"));
        assert!(matches!(err, Err(PdeError::ForeignVariable { .. })));
    }

    #[test]
    fn reduction_of_second_order_ode() {
        // y'' = 0 reduces to y' = y_1, y_1' = 0.
        let space = JetSpace::new(1, 1, 2).unwrap();
        let pde = SolvedPde::from_fn(space, |_, _| Expr::zero()).unwrap();
        let reduced = pde.reduce_to_first_order();
        assert_eq!(reduced.space().order(), 0);
        assert_eq!(reduced.space().fiber_names(), &["y", "y_1"]);
        assert_eq!(reduced.coefficient(0, 1), &Expr::var("y_1"));
        assert_eq!(reduced.coefficient(1, 1), &Expr::zero());
    }

    #[test]
    fn reduction_identifies_first_order_systems() {
        // k=1 with no lower jets: the reduction is the original order-0
        // connection, coefficient by coefficient.
        let reduced = exp_pde().reduce_to_first_order();
        assert_eq!(reduced.space().fiber_names(), &["y"]);
        assert_eq!(reduced.coefficient(0, 1), &Expr::var("y"));
        assert_eq!(reduced.coefficient(0, 2), &Expr::var("y"));

        let shear = shear_pde().reduce_to_first_order();
        let curv = shear.curvature();
        assert_eq!(curv.components()[0].expr, Expr::neg(Expr::var("y")));
    }

    #[test]
    fn canonical_epsilon_prolongs_single_direction_exactly() {
        // k=1, n=1, f_1 = f(x, y): g_11 = f_x + f_y*f.
        let space = JetSpace::new(1, 1, 1).unwrap();
        let f = space.at_order(0).parse_expr("x1*y").unwrap();
        let pde = SolvedPde::from_rows(space, vec![vec![f]]).unwrap();
        let eps = pde.canonical_epsilon();
        let sigma = MultiIndex::new([1, 1]);
        let expected = pde
            .lower_space()
            .parse_expr("y + x1*(x1*y)")
            .map(|e| simplify(&e))
            .unwrap();
        assert_eq!(simplify(eps.extension(0, &sigma).unwrap()), expected);
        assert!(eps
            .is_connection(&ZeroConfig::default())
            .unwrap()
            .is_connection);
    }

    #[test]
    fn zero_extension_of_nonconstant_f_is_not_a_connection() {
        let space = JetSpace::new(1, 1, 1).unwrap();
        let f = space.at_order(0).parse_expr("x1").unwrap();
        let pde = SolvedPde::from_rows(space, vec![vec![f]]).unwrap();
        let eps = EpsilonSection::from_fn(pde, |_, _| Expr::zero()).unwrap();
        let report = eps.is_connection(&ZeroConfig::default()).unwrap();
        assert!(!report.is_connection);
        // defect = g - D^f f = 0 - 1 = -1
        assert_eq!(report.defects[0].expr, Expr::int(-1));
    }

    #[test]
    fn no_extension_of_curved_equations_is_a_connection() {
        let pde = shear_pde();
        let cfg = ZeroConfig::default();
        let canonical = pde.canonical_epsilon();
        assert!(!canonical.is_connection(&cfg).unwrap().is_connection);
        for seed in 0..5i64 {
            let eps = EpsilonSection::from_fn(pde.clone(), |_, sigma| {
                Expr::mul(Expr::int(seed + sigma.order() as i64), Expr::var("y"))
            })
            .unwrap();
            assert!(!eps.is_connection(&cfg).unwrap().is_connection);
        }
    }

    #[test]
    fn exp_extension_has_zero_obstruction() {
        let eps = EpsilonSection::from_fn(exp_pde(), |_, _| Expr::var("y")).unwrap();
        let curv = eps.curvature();
        for d in &curv.connection_defects {
            assert_eq!(d.expr, Expr::zero(), "defect for nu={} j={}", d.nu, d.j);
        }
        for c in curv.frobenius_defect.components() {
            assert_eq!(c.expr, Expr::zero());
        }
        assert!(curv.is_zero(&ZeroConfig::default()).unwrap().zero);
        assert_eq!(curv.rank(), 4 + 1);
    }

    #[test]
    fn shear_extension_keeps_frobenius_defect() {
        let eps = shear_pde().canonical_epsilon();
        let curv = eps.curvature();
        let frob = &curv.frobenius_defect.components()[0].expr;
        assert_eq!(*frob, Expr::neg(Expr::var("y")));
        assert!(!curv.is_zero(&ZeroConfig::default()).unwrap().zero);
    }

    #[test]
    fn trivial_equations_are_exact_everywhere() {
        let space = JetSpace::new(2, 1, 1).unwrap();
        let pde = SolvedPde::from_fn(space, |_, _| Expr::zero()).unwrap();
        let eps = EpsilonSection::from_fn(pde, |_, _| Expr::zero()).unwrap();
        let lower = eps.pde().lower_space().clone();
        for t in 0..10 {
            let v = t as f64 * 0.3 - 1.5;
            let p = JetPoint::from_values(&lower, vec![v, -v, v * v]).unwrap();
            let report = eps.exactness_at(&p, 1e-9).unwrap();
            assert!(report.preimage_exists);
            assert!(report.max_r < 1e-9);
            assert!(report.agree);
        }
    }

    #[test]
    fn shear_extension_fails_exactness_away_from_zero() {
        let eps = shear_pde().canonical_epsilon();
        let lower = eps.pde().lower_space().clone();
        let p = JetPoint::from_values(&lower, vec![0.0, 0.0, 1.0]).unwrap();
        let report = eps.exactness_at(&p, 1e-9).unwrap();
        assert!(!report.preimage_exists);
        assert!(report.max_r >= 1e-9);
        assert!(report.agree);
    }

    #[test]
    fn prolongation_equations_of_constant_connection() {
        let space = JetSpace::new(2, 1, 0).unwrap();
        let conn = Connection::from_rows(space, vec![vec![Expr::int(3), Expr::int(5)]]).unwrap();
        let sys = prolong_equations(&conn).unwrap();
        for (_, _, rhs) in sys.first_order() {
            assert!(matches!(rhs, Expr::Const(_)));
        }
        for route in sys.second_order() {
            assert_eq!(route.rhs, Expr::zero());
        }
        for (_, _, d) in sys.route_discrepancies() {
            assert_eq!(d, Expr::zero());
        }
    }

    #[test]
    fn prolongation_routes_disagree_by_curvature() {
        let space = JetSpace::new(2, 1, 0).unwrap();
        let c1 = space.parse_expr("y").unwrap();
        let c2 = space.parse_expr("x1*y").unwrap();
        let conn = Connection::from_rows(space, vec![vec![c1, c2]]).unwrap();
        let sys = prolong_equations(&conn).unwrap();
        let discrepancies = sys.route_discrepancies();
        assert_eq!(discrepancies.len(), 1);
        assert_eq!(discrepancies[0].2, Expr::neg(Expr::var("y")));

        // consistent flat case: every route of the exp example forces y
        let space = JetSpace::new(2, 1, 0).unwrap();
        let y = space.parse_expr("y").unwrap();
        let flat = Connection::from_rows(space, vec![vec![y.clone(), y]]).unwrap();
        let sys = prolong_equations(&flat).unwrap();
        for route in sys.second_order() {
            assert_eq!(route.rhs, Expr::var("y"));
        }
    }

    #[test]
    fn surjectivity_probe_matches_curvature_zeros() {
        let space = JetSpace::new(2, 1, 0).unwrap();
        let c1 = space.parse_expr("y").unwrap();
        let c2 = space.parse_expr("x1*y").unwrap();
        let conn = Connection::from_rows(space.clone(), vec![vec![c1, c2]]).unwrap();
        // curvature is -y: fails at y = 1, passes at y = 0
        let at = |y: f64| JetPoint::from_values(&space, vec![0.3, -0.2, y]).unwrap();
        assert!(!prolongation_surjective_at(&conn, &at(1.0), 1e-9).unwrap());
        assert!(prolongation_surjective_at(&conn, &at(0.0), 1e-9).unwrap());
    }
}
