//! Connections as coefficient tables and their curvature.
//!
//! A connection on `J^k(E) -> M` prescribes every first partial of every
//! jet coordinate: `d y^a_mu / d x^j = c^a_(mu,j)(x, y_k)`, one expression
//! per (jet coordinate, base direction) pair, each depending only on `J^k`
//! coordinates. `k = 0` is the classical case of a connection on the
//! fibered manifold itself.

use crate::jet::{multi_indices, JetCoord, JetPoint, JetSpace, MultiIndex};
use crate::symexpr::{
    exprs_equal, is_zero, simplify, EvalError, Expr, ZeroConfig, ZeroTestError, ZeroVerdict,
};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ConnectionError {
    #[error("coefficient {coefficient} uses `{variable}`, which is not a coordinate of this jet space")]
    ForeignVariable {
        coefficient: String,
        variable: String,
    },
    #[error("coefficient table has wrong shape: expected {expected} rows of {columns}, got {got}")]
    TableShape {
        expected: usize,
        columns: usize,
        got: usize,
    },
    #[error("operation requires a connection of order {expected}, this one has order {got}")]
    OrderMismatch { expected: usize, got: usize },
    #[error("tangent vector must have {expected} components, got {got}")]
    TangentLength { expected: usize, got: usize },
    #[error("evaluation failed: {0}")]
    Eval(#[from] EvalError),
}

/// Coefficient table of a connection on `J^k(E)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Connection {
    space: JetSpace,
    // coeffs[ci][j-1] is c^a_(mu,j) for jet coordinate ci = (a, mu)
    coeffs: Vec<Vec<Expr>>,
}

impl Connection {
    /// Build from a closure producing the coefficient for each jet
    /// coordinate and 1-based direction.
    pub fn from_fn(
        space: JetSpace,
        mut coefficient: impl FnMut(&JetCoord, usize) -> Expr,
    ) -> Result<Self, ConnectionError> {
        let n = space.base_dim();
        let rows = space
            .jet_coords()
            .iter()
            .map(|jc| (1..=n).map(|j| coefficient(jc, j)).collect())
            .collect();
        Self::from_rows(space, rows)
    }

    /// Build from an explicit table, one row per jet coordinate in
    /// enumeration order, one column per base direction.
    pub fn from_rows(space: JetSpace, rows: Vec<Vec<Expr>>) -> Result<Self, ConnectionError> {
        let n = space.base_dim();
        if rows.len() != space.jet_coords().len() || rows.iter().any(|r| r.len() != n) {
            return Err(ConnectionError::TableShape {
                expected: space.jet_coords().len(),
                columns: n,
                got: rows.len(),
            });
        }
        for (ci, row) in rows.iter().enumerate() {
            for (j0, e) in row.iter().enumerate() {
                for var in e.free_vars() {
                    if space.coord_index(&var).is_none() {
                        let jc = &space.jet_coords()[ci];
                        return Err(ConnectionError::ForeignVariable {
                            coefficient: format!(
                                "c[{};{};{}]",
                                space.fiber_names()[jc.fiber],
                                jc.mu.digits(),
                                j0 + 1
                            ),
                            variable: var,
                        });
                    }
                }
            }
        }
        Ok(Connection {
            space,
            coeffs: rows,
        })
    }

    pub fn space(&self) -> &JetSpace {
        &self.space
    }

    /// Coefficient for the `ci`-th jet coordinate, direction `j` (1-based).
    pub fn coefficient(&self, ci: usize, j: usize) -> &Expr {
        &self.coeffs[ci][j - 1]
    }

    pub fn coefficient_for(&self, fiber: usize, mu: &MultiIndex, j: usize) -> Option<&Expr> {
        let ci = self.space.jet_coord_index(fiber, mu)?;
        Some(self.coefficient(ci, j))
    }

    /// The connection-truncated total derivative `D^c_r`: replace each jet
    /// derivative by the coefficient the connection prescribes, so the
    /// result stays on `J^k`:
    /// `D^c_r e = d e / d x^r + sum c^b_(mu,r) * d e / d y^b_mu`.
    pub fn total_derivative(&self, e: &Expr, r: usize) -> Expr {
        let mut acc = e.diff(self.space.base_name(r));
        for (ci, jc) in self.space.jet_coords().iter().enumerate() {
            let name = self.space.jet_coord_name(jc.fiber, &jc.mu);
            let d = e.diff(&name);
            if !d.is_literal_zero() {
                acc = Expr::add(acc, Expr::mul(d, self.coefficient(ci, r).clone()));
            }
        }
        acc
    }

    /// Curvature components `R^a_(mu,(r,j)) = D^c_j c^a_(mu,r) - D^c_r c^a_(mu,j)`
    /// for `r < j`, simplified. The alternation is stored once per
    /// unordered pair; the swapped component is minus the stored one.
    pub fn curvature(&self) -> Curvature {
        let n = self.space.base_dim();
        let mut components = Vec::new();
        for (ci, jc) in self.space.jet_coords().iter().enumerate() {
            for r in 1..=n {
                for j in (r + 1)..=n {
                    let e = Expr::sub(
                        self.total_derivative(self.coefficient(ci, r), j),
                        self.total_derivative(self.coefficient(ci, j), r),
                    );
                    components.push(CurvatureComponent {
                        coord: jc.clone(),
                        coord_index: ci,
                        pair: (r, j),
                        expr: simplify(&e),
                    });
                }
            }
        }
        Curvature {
            space: self.space.clone(),
            components,
        }
    }

    /// Tri-state flatness verdict, component by component.
    pub fn is_flat(&self, cfg: &ZeroConfig) -> Result<FlatReport, ZeroTestError> {
        let curvature = self.curvature();
        let mut verdicts = Vec::new();
        for c in curvature.components() {
            let v = is_zero(&c.expr, cfg)?;
            verdicts.push((c.clone(), v));
        }
        let flat = verdicts.iter().all(|(_, v)| v.is_zero());
        let symbolic = verdicts
            .iter()
            .all(|(_, v)| matches!(v, ZeroVerdict::SymbolicZero));
        Ok(FlatReport {
            flat,
            symbolic,
            verdicts,
        })
    }

    /// Horizontal/vertical split of a tangent vector at a point of `E`
    /// (order-0 connections only): `v` decomposes as
    /// `(v^i, v^a - v^s c^a_s) + (0, v^s c^a_s)`.
    pub fn split(
        &self,
        q: &JetPoint,
        v: &[f64],
    ) -> Result<(Vec<f64>, Vec<f64>), ConnectionError> {
        if self.space.order() != 0 {
            return Err(ConnectionError::OrderMismatch {
                expected: 0,
                got: self.space.order(),
            });
        }
        let n = self.space.base_dim();
        let m = self.space.fiber_dim();
        if v.len() != n + m {
            return Err(ConnectionError::TangentLength {
                expected: n + m,
                got: v.len(),
            });
        }
        let binding = q.to_binding(&self.space);
        let mut horizontal = v.to_vec();
        let mut vertical = vec![0.0; n + m];
        for (ci, _) in self.space.jet_coords().iter().enumerate() {
            let mut pushed = 0.0;
            for s in 1..=n {
                pushed += v[s - 1] * self.coefficient(ci, s).eval(&binding)?;
            }
            horizontal[n + ci] -= pushed;
            vertical[n + ci] = pushed;
        }
        Ok((horizontal, vertical))
    }

    /// Check whether the connection is geometric: below the top order each
    /// coefficient must be the raised jet coordinate itself, and top-order
    /// coefficients must agree whenever their raised multi-indices
    /// coincide. Equality is symbolic-first with numeric fallback.
    ///
    /// Every order-0 connection is geometric by convention.
    pub fn is_geometric(&self, cfg: &ZeroConfig) -> Result<GeometricReport, ZeroTestError> {
        let k = self.space.order();
        let n = self.space.base_dim();
        let mut violations = Vec::new();
        if k == 0 {
            return Ok(GeometricReport {
                geometric: true,
                violations,
            });
        }
        for (ci, jc) in self.space.jet_coords().iter().enumerate() {
            if jc.mu_order == k {
                continue;
            }
            for j in 1..=n {
                let expected_name = self.space.jet_coord_name(jc.fiber, &jc.mu.plus(j as u8));
                let expected = Expr::var(expected_name.clone());
                let verdict = exprs_equal(self.coefficient(ci, j), &expected, cfg)?;
                if !verdict.is_zero() {
                    violations.push(GeometricViolation::Lower {
                        fiber: jc.fiber,
                        mu: jc.mu.clone(),
                        j,
                        expected: expected_name,
                        found: self.coefficient(ci, j).to_string(),
                    });
                }
            }
        }
        // top-order symmetry: group (mu, j) slots by the canonical raised index
        let mut groups: BTreeMap<(usize, MultiIndex), Vec<(usize, MultiIndex, usize)>> =
            BTreeMap::new();
        for (ci, jc) in self.space.jet_coords().iter().enumerate() {
            if jc.mu_order != k {
                continue;
            }
            for j in 1..=n {
                groups
                    .entry((jc.fiber, jc.mu.plus(j as u8)))
                    .or_default()
                    .push((ci, jc.mu.clone(), j));
            }
        }
        for ((fiber, _sigma), group) in groups.iter() {
            let (first_ci, first_mu, first_j) = &group[0];
            for (ci, mu, j) in &group[1..] {
                let verdict = exprs_equal(
                    self.coefficient(*first_ci, *first_j),
                    self.coefficient(*ci, *j),
                    cfg,
                )?;
                if !verdict.is_zero() {
                    violations.push(GeometricViolation::TopSymmetry {
                        fiber: *fiber,
                        a: (first_mu.clone(), *first_j),
                        b: (mu.clone(), *j),
                    });
                }
            }
        }
        Ok(GeometricReport {
            geometric: violations.is_empty(),
            violations,
        })
    }
}

/// One stored curvature component, for an unordered direction pair `r < j`.
#[derive(Debug, Clone, PartialEq)]
pub struct CurvatureComponent {
    pub coord: JetCoord,
    pub coord_index: usize,
    pub pair: (usize, usize),
    pub expr: Expr,
}

/// Curvature of a connection: expressions over `J^k` coordinates, one per
/// (jet coordinate, unordered direction pair). Antisymmetry in the pair is
/// structural; the accessor synthesizes the sign for swapped pairs.
///
/// Components are taken in the fixed chart of the space; no change-of-chart
/// transformation law is implemented or assumed.
#[derive(Debug, Clone)]
pub struct Curvature {
    space: JetSpace,
    components: Vec<CurvatureComponent>,
}

impl Curvature {
    pub fn space(&self) -> &JetSpace {
        &self.space
    }

    pub fn components(&self) -> &[CurvatureComponent] {
        &self.components
    }

    pub fn is_empty(&self) -> bool {
        self.components.is_empty()
    }

    /// Component for any ordered pair: `R_(r,j)` with the stored sign for
    /// `r < j`, negated for `r > j`, and literal zero on the diagonal.
    pub fn component(&self, coord_index: usize, r: usize, j: usize) -> Expr {
        if r == j {
            return Expr::zero();
        }
        let (lo, hi, flip) = if r < j { (r, j, false) } else { (j, r, true) };
        let found = self
            .components
            .iter()
            .find(|c| c.coord_index == coord_index && c.pair == (lo, hi))
            .expect("component indices in range");
        if flip {
            simplify(&Expr::neg(found.expr.clone()))
        } else {
            found.expr.clone()
        }
    }

    /// Evaluate every stored component at a point of `J^k`.
    pub fn eval_at(&self, p: &JetPoint) -> Result<Vec<f64>, EvalError> {
        let binding = p.to_binding(&self.space);
        self.components
            .iter()
            .map(|c| c.expr.eval(&binding))
            .collect()
    }

    pub fn max_abs_at(&self, p: &JetPoint) -> Result<f64, EvalError> {
        Ok(self
            .eval_at(p)?
            .into_iter()
            .fold(0.0f64, |acc, v| acc.max(v.abs())))
    }
}

/// Result of the per-component flatness test.
#[derive(Debug, Clone)]
pub struct FlatReport {
    pub flat: bool,
    /// True when every component vanished symbolically (no sampling).
    pub symbolic: bool,
    pub verdicts: Vec<(CurvatureComponent, ZeroVerdict)>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum GeometricViolation {
    /// A below-top coefficient differs from the raised jet coordinate.
    Lower {
        fiber: usize,
        mu: MultiIndex,
        j: usize,
        expected: String,
        found: String,
    },
    /// Two top-order slots with the same canonical raised index disagree.
    TopSymmetry {
        fiber: usize,
        a: (MultiIndex, usize),
        b: (MultiIndex, usize),
    },
}

impl std::fmt::Display for GeometricViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            GeometricViolation::Lower {
                fiber,
                mu,
                j,
                expected,
                found,
            } => write!(
                f,
                "coefficient (fiber {fiber}, mu {mu}, j {j}) should be {expected}, found {found}"
            ),
            GeometricViolation::TopSymmetry { fiber, a, b } => write!(
                f,
                "top coefficients disagree for fiber {fiber}: (mu {}, j {}) vs (mu {}, j {})",
                a.0, a.1, b.0, b.1
            ),
        }
    }
}

#[derive(Debug, Clone)]
pub struct GeometricReport {
    pub geometric: bool,
    pub violations: Vec<GeometricViolation>,
}

/// Top-order data for building a geometric connection: one expression per
/// fiber component and canonical order-(k+1) multi-index. Keying by the
/// canonical index makes the required symmetry structural.
#[derive(Debug, Clone)]
pub struct GeometricSpec {
    space: JetSpace,
    sigmas: Vec<MultiIndex>,
    // tops[fiber][sigma position]
    tops: Vec<Vec<Expr>>,
}

impl GeometricSpec {
    pub fn from_fn(
        space: JetSpace,
        mut top: impl FnMut(usize, &MultiIndex) -> Expr,
    ) -> Result<Self, ConnectionError> {
        let sigmas = multi_indices(space.base_dim(), space.order() + 1);
        let m = space.fiber_dim();
        let tops: Vec<Vec<Expr>> = (0..m)
            .map(|fiber| sigmas.iter().map(|s| top(fiber, s)).collect())
            .collect();
        for row in &tops {
            for e in row {
                for var in e.free_vars() {
                    if space.coord_index(&var).is_none() {
                        return Err(ConnectionError::ForeignVariable {
                            coefficient: "ctop".to_string(),
                            variable: var,
                        });
                    }
                }
            }
        }
        Ok(GeometricSpec {
            space,
            sigmas,
            tops,
        })
    }

    pub fn space(&self) -> &JetSpace {
        &self.space
    }

    pub fn sigmas(&self) -> &[MultiIndex] {
        &self.sigmas
    }

    pub fn top(&self, fiber: usize, sigma: &MultiIndex) -> Option<&Expr> {
        let pos = self.sigmas.iter().position(|s| s == sigma)?;
        Some(&self.tops[fiber][pos])
    }

    /// The geometric connection this data defines: below the top order the
    /// coefficient is the raised coordinate itself, the top order reads
    /// from the table through the canonical multi-index, so the result is
    /// geometric by construction.
    pub fn into_connection(self) -> Connection {
        let k = self.space.order();
        let space = self.space.clone();
        Connection::from_fn(self.space.clone(), |jc, j| {
            if jc.mu_order < k {
                Expr::var(space.jet_coord_name(jc.fiber, &jc.mu.plus(j as u8)))
            } else {
                let sigma = jc.mu.plus(j as u8);
                self.top(jc.fiber, &sigma)
                    .expect("canonical index of order k+1")
                    .clone()
            }
        })
        .expect("spec expressions were validated against the same space")
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::symexpr::ZeroVerdict;

    /// c_1 = y, c_2 = y on n=2, m=1: flat, solutions exp(x1+x2).
    pub(crate) fn exp_connection() -> Connection {
        let space = JetSpace::new(2, 1, 0).unwrap();
        let y = space.parse_expr("y").unwrap();
        Connection::from_rows(space, vec![vec![y.clone(), y]]).unwrap()
    }

    /// c_1 = y, c_2 = x1*y: curvature -y.
    pub(crate) fn shear_connection() -> Connection {
        let space = JetSpace::new(2, 1, 0).unwrap();
        let c1 = space.parse_expr("y").unwrap();
        let c2 = space.parse_expr("x1*y").unwrap();
        Connection::from_rows(space, vec![vec![c1, c2]]).unwrap()
    }

    #[test]
    fn truncated_total_derivative_examples() {
        let conn = exp_connection();
        // D^c_1(y) with c_1 = y gives y back.
        let d = conn.total_derivative(&Expr::var("y"), 1);
        assert_eq!(simplify(&d), Expr::var("y"));
        // D^c_r(x^s) is the Kronecker delta.
        let d11 = conn.total_derivative(&Expr::var("x1"), 1);
        let d12 = conn.total_derivative(&Expr::var("x1"), 2);
        assert_eq!(simplify(&d11), Expr::one());
        assert_eq!(simplify(&d12), Expr::zero());
    }

    #[test]
    fn truncated_derivative_on_first_order_space() {
        // k = 1: D^c_2(y_1) is the (mu=1, j=2) coefficient by definition.
        let space = JetSpace::new(2, 1, 1).unwrap();
        let conn = Connection::from_fn(space.clone(), |jc, j| {
            Expr::int((10 * (jc.mu.order() + 1) + j) as i64)
        })
        .unwrap();
        let d = conn.total_derivative(&Expr::var("y_1"), 2);
        let mu1 = MultiIndex::new([1]);
        assert_eq!(simplify(&d), conn.coefficient_for(0, &mu1, 2).unwrap().clone());
    }

    #[test]
    fn flat_example_has_symbolically_zero_curvature() {
        let curv = exp_connection().curvature();
        assert_eq!(curv.components().len(), 1);
        assert_eq!(curv.components()[0].expr, Expr::zero());
        let report = exp_connection().is_flat(&ZeroConfig::default()).unwrap();
        assert!(report.flat && report.symbolic);
    }

    #[test]
    fn shear_curvature_is_minus_y() {
        let curv = shear_connection().curvature();
        assert_eq!(curv.components().len(), 1);
        let expected = Expr::neg(Expr::var("y"));
        assert_eq!(curv.components()[0].expr, expected);
        let report = shear_connection().is_flat(&ZeroConfig::default()).unwrap();
        assert!(!report.flat);
        match &report.verdicts[0].1 {
            ZeroVerdict::NonZero(witness) => {
                assert!(witness.get("y").unwrap().abs() >= 1e-9);
            }
            other => panic!("expected NonZero, got {other:?}"),
        }
    }

    #[test]
    fn constant_coefficients_are_flat_at_any_order() {
        let space = JetSpace::new(3, 2, 1).unwrap();
        let conn = Connection::from_fn(space, |jc, j| {
            Expr::int((jc.fiber * 7 + jc.mu.order() * 3 + j) as i64)
        })
        .unwrap();
        for c in conn.curvature().components() {
            assert_eq!(c.expr, Expr::zero());
        }
    }

    #[test]
    fn antisymmetry_through_the_accessor() {
        let curv = shear_connection().curvature();
        let space = shear_connection().space().clone();
        let p = JetPoint::from_values(&space, vec![0.4, -0.3, 1.7]).unwrap();
        let b = p.to_binding(&space);
        let r12 = curv.component(0, 1, 2).eval(&b).unwrap();
        let r21 = curv.component(0, 2, 1).eval(&b).unwrap();
        assert_eq!(r12, -r21);
        assert_eq!(curv.component(0, 1, 1), Expr::zero());
    }

    #[test]
    fn split_reproduces_the_tangent_vector() {
        let conn = exp_connection();
        let space = conn.space().clone();
        // zero connection: split(v) = (v, 0)
        let zero_conn = Connection::from_rows(
            space.clone(),
            vec![vec![Expr::zero(), Expr::zero()]],
        )
        .unwrap();
        let q = JetPoint::from_values(&space, vec![0.0, 0.0, 2.0]).unwrap();
        let v = [1.0, 1.0, 0.0];
        let (h, vert) = zero_conn.split(&q, &v).unwrap();
        assert_eq!(h, vec![1.0, 1.0, 0.0]);
        assert_eq!(vert, vec![0.0, 0.0, 0.0]);
        // exp connection at y = 2: v^s c_s = 4
        let (h, vert) = conn.split(&q, &v).unwrap();
        assert_eq!(h, vec![1.0, 1.0, -4.0]);
        assert_eq!(vert, vec![0.0, 0.0, 4.0]);
        // vertical vectors stay vertical-free in the horizontal part
        let (h, vert) = conn.split(&q, &[0.0, 0.0, 5.0]).unwrap();
        assert_eq!(h, vec![0.0, 0.0, 5.0]);
        assert_eq!(vert, vec![0.0, 0.0, 0.0]);
        // sum of parts reproduces v
        let v2 = [0.3, -1.2, 0.8];
        let (h, vert) = conn.split(&q, &v2).unwrap();
        for i in 0..3 {
            assert!((h[i] + vert[i] - v2[i]).abs() < 1e-15);
        }
    }

    #[test]
    fn split_requires_order_zero() {
        let space = JetSpace::new(1, 1, 1).unwrap();
        let conn = Connection::from_fn(space.clone(), |_, _| Expr::zero()).unwrap();
        let q = JetPoint::from_values(&space, vec![0.0, 1.0, 2.0]).unwrap();
        assert!(matches!(
            conn.split(&q, &[1.0, 0.0, 0.0]),
            Err(ConnectionError::OrderMismatch { .. })
        ));
    }

    #[test]
    fn geometric_detection() {
        let cfg = ZeroConfig::default();
        // the second-order ODE y'' = 0 as a connection on J^1
        let space = JetSpace::new(1, 1, 1).unwrap();
        let ode = Connection::from_fn(space.clone(), |jc, _| {
            if jc.mu_order == 0 {
                Expr::var("y_1")
            } else {
                Expr::zero()
            }
        })
        .unwrap();
        assert!(ode.is_geometric(&cfg).unwrap().geometric);

        // planted top asymmetry on n = 2
        let space2 = JetSpace::new(2, 1, 1).unwrap();
        let asym = Connection::from_fn(space2.clone(), |jc, j| {
            if jc.mu_order == 0 {
                Expr::var(space2.jet_coord_name(0, &jc.mu.plus(j as u8)))
            } else if jc.mu.entries() == [1] && j == 2 {
                Expr::var("x1")
            } else if jc.mu.entries() == [2] && j == 1 {
                Expr::var("x2")
            } else {
                Expr::zero()
            }
        })
        .unwrap();
        let report = asym.is_geometric(&cfg).unwrap();
        assert!(!report.geometric);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, GeometricViolation::TopSymmetry { .. })));

        // wrong lower coefficient: c_(,1) = y instead of y_1
        let bad_lower = Connection::from_fn(space.clone(), |jc, _| {
            if jc.mu_order == 0 {
                Expr::var("y")
            } else {
                Expr::zero()
            }
        })
        .unwrap();
        let report = bad_lower.is_geometric(&cfg).unwrap();
        assert!(!report.geometric);
        assert!(report
            .violations
            .iter()
            .any(|v| matches!(v, GeometricViolation::Lower { .. })));
    }

    #[test]
    fn geometric_spec_roundtrips() {
        let cfg = ZeroConfig::default();
        let space = JetSpace::new(2, 1, 1).unwrap();
        let spec = GeometricSpec::from_fn(space.clone(), |_, sigma| {
            // an arbitrary polynomial top per canonical index
            let d = sigma.digits();
            space
                .parse_expr(&format!("x{}*y + y_{}", &d[..1], &d[1..]))
                .unwrap()
        })
        .unwrap();
        let conn = spec.into_connection();
        assert!(conn.is_geometric(&cfg).unwrap().geometric);
        // lower block of the curvature vanishes symbolically for
        // geometric connections
        for c in conn.curvature().components() {
            if c.coord.mu_order == 0 {
                assert_eq!(c.expr, Expr::zero());
            }
        }
    }

    #[test]
    fn foreign_variables_are_rejected() {
        let space = JetSpace::new(2, 1, 0).unwrap();
        let bad = Expr::var("y_1"); // a J^1 coordinate, not on J^0
        assert!(matches!(
            Connection::from_rows(space, vec![vec![bad, Expr::zero()]]),
            Err(ConnectionError::ForeignVariable { .. })
        ));
    }
}
