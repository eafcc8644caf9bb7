use super::multi_index::{multi_indices, MultiIndex};
use crate::symexpr::{parse, Binding, Expr, ParseError};
use std::collections::BTreeMap;
use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum JetError {
    #[error("base dimension {n} outside supported range 1..={max}")]
    BaseDimension { n: usize, max: usize },
    #[error("fiber dimension must be at least 1")]
    FiberDimension,
    #[error("jet order {k} exceeds cap {max}")]
    OrderTooHigh { k: usize, max: usize },
    #[error("name count mismatch: expected {expected}, got {got}")]
    NameCount { expected: usize, got: usize },
    #[error("duplicate coordinate name `{0}`")]
    DuplicateName(String),
    #[error("expected {expected} coordinate values, got {got}")]
    WrongLength { expected: usize, got: usize },
    #[error("non-finite value for coordinate `{0}`")]
    NonFiniteCoordinate(String),
    #[error("binding does not cover coordinate `{0}`")]
    MissingCoordinate(String),
    #[error("base index {j} outside 1..={n}")]
    BaseIndexOutOfRange { j: usize, n: usize },
}

/// Caps on the combinatorial growth of jet spaces. The defaults keep the
/// coordinate count explicit at desk scale; raise them deliberately when
/// a larger space is really wanted.
#[derive(Debug, Clone, Copy)]
pub struct SpaceLimits {
    pub max_base: usize,
    pub max_order: usize,
}

impl Default for SpaceLimits {
    fn default() -> Self {
        SpaceLimits {
            max_base: 4,
            max_order: 6,
        }
    }
}

/// One jet coordinate `y^alpha_mu`: a fiber component index (0-based) and
/// a symmetric multi-index.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct JetCoord {
    pub mu_order: usize,
    pub fiber: usize,
    pub mu: MultiIndex,
}

/// Coordinate chart of a jet bundle `J^k(E)` over an `n`-dimensional base
/// with an `m`-dimensional fiber.
///
/// The coordinate list is fixed and deterministic: base names first, then
/// jet coordinates sorted by (order of `mu`, fiber, `mu` lexicographic).
/// That makes every derived file and report byte-stable, and it makes the
/// coordinates of `J^k` a prefix of those of `J^{k+1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct JetSpace {
    base_names: Vec<String>,
    fiber_names: Vec<String>,
    order: usize,
    jet_coords: Vec<JetCoord>,
    coord_names: Vec<String>,
    index_by_name: BTreeMap<String, usize>,
}

/// `C(n+k, k)`: the number of jet slots per fiber component through order `k`.
pub fn jet_fiber_count(n: usize, k: usize) -> usize {
    // binomial via the multiplicative formula; sizes here are tiny
    let mut acc: usize = 1;
    for i in 1..=k {
        acc = acc * (n + i) / i;
    }
    acc
}

impl JetSpace {
    /// Space with default names: base `x1..xn`, fiber `y` for `m == 1`
    /// and `y1..ym` otherwise.
    pub fn new(n: usize, m: usize, order: usize) -> Result<Self, JetError> {
        let base = (1..=n).map(|i| format!("x{i}")).collect();
        let fiber = if m == 1 {
            vec!["y".to_string()]
        } else {
            (1..=m).map(|a| format!("y{a}")).collect()
        };
        Self::with_names(base, fiber, order)
    }

    pub fn with_names(
        base_names: Vec<String>,
        fiber_names: Vec<String>,
        order: usize,
    ) -> Result<Self, JetError> {
        Self::with_limits(base_names, fiber_names, order, SpaceLimits::default())
    }

    pub fn with_limits(
        base_names: Vec<String>,
        fiber_names: Vec<String>,
        order: usize,
        limits: SpaceLimits,
    ) -> Result<Self, JetError> {
        let n = base_names.len();
        if n < 1 || n > limits.max_base {
            return Err(JetError::BaseDimension {
                n,
                max: limits.max_base,
            });
        }
        if fiber_names.is_empty() {
            return Err(JetError::FiberDimension);
        }
        if order > limits.max_order {
            return Err(JetError::OrderTooHigh {
                k: order,
                max: limits.max_order,
            });
        }
        Ok(Self::build(base_names, fiber_names, order))
    }

    fn build(base_names: Vec<String>, fiber_names: Vec<String>, order: usize) -> Self {
        let n = base_names.len();
        let mut jet_coords = Vec::new();
        for l in 0..=order {
            for (fiber, _) in fiber_names.iter().enumerate() {
                for mu in multi_indices(n, l) {
                    jet_coords.push(JetCoord {
                        mu_order: l,
                        fiber,
                        mu,
                    });
                }
            }
        }
        let mut coord_names: Vec<String> = base_names.clone();
        for jc in &jet_coords {
            coord_names.push(jet_name(&fiber_names[jc.fiber], &jc.mu));
        }
        let index_by_name = coord_names
            .iter()
            .enumerate()
            .map(|(i, s)| (s.clone(), i))
            .collect();
        JetSpace {
            base_names,
            fiber_names,
            order,
            jet_coords,
            coord_names,
            index_by_name,
        }
    }

    /// Validate that all generated coordinate names are pairwise distinct.
    /// Separate from construction so callers with trusted names skip it.
    pub fn check_names(&self) -> Result<(), JetError> {
        let mut seen = BTreeMap::new();
        for name in &self.coord_names {
            if seen.insert(name.clone(), ()).is_some() {
                return Err(JetError::DuplicateName(name.clone()));
            }
        }
        Ok(())
    }

    pub fn base_dim(&self) -> usize {
        self.base_names.len()
    }

    pub fn fiber_dim(&self) -> usize {
        self.fiber_names.len()
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn base_names(&self) -> &[String] {
        &self.base_names
    }

    pub fn fiber_names(&self) -> &[String] {
        &self.fiber_names
    }

    /// Base coordinate name for the 1-based axis `j`.
    pub fn base_name(&self, j: usize) -> &str {
        &self.base_names[j - 1]
    }

    /// The full ordered coordinate list of `J^k(E)`.
    pub fn coordinates(&self) -> &[String] {
        &self.coord_names
    }

    /// Jet coordinates (everything past the base block), in order.
    pub fn jet_coords(&self) -> &[JetCoord] {
        &self.jet_coords
    }

    pub fn coord_count(&self) -> usize {
        self.coord_names.len()
    }

    pub fn coord_index(&self, name: &str) -> Option<usize> {
        self.index_by_name.get(name).copied()
    }

    /// Name of the jet coordinate `y^fiber_mu` (0-based fiber).
    pub fn jet_coord_name(&self, fiber: usize, mu: &MultiIndex) -> String {
        jet_name(&self.fiber_names[fiber], mu)
    }

    /// Position of `(fiber, mu)` within [`Self::jet_coords`].
    pub fn jet_coord_index(&self, fiber: usize, mu: &MultiIndex) -> Option<usize> {
        let name = self.jet_coord_name(fiber, mu);
        self.coord_index(&name)
            .map(|i| i - self.base_names.len())
    }

    /// Same chart at a different jet order (no cap check; used internally
    /// for raising and truncating).
    pub fn at_order(&self, order: usize) -> JetSpace {
        JetSpace::build(self.base_names.clone(), self.fiber_names.clone(), order)
    }

    /// Same base, different fiber names, same order. Used to build
    /// auxiliary fibered manifolds whose fibers are jet coordinates of
    /// another space; no dimension cap applies to the fiber count.
    pub fn with_fibers(&self, fiber_names: Vec<String>) -> JetSpace {
        JetSpace::build(self.base_names.clone(), fiber_names, self.order)
    }

    pub fn raise_order(&self, by: usize) -> JetSpace {
        self.at_order(self.order + by)
    }

    /// Parse an expression whose variables must be coordinates of this
    /// space.
    pub fn parse_expr(&self, text: &str) -> Result<Expr, ParseError> {
        parse(text, &self.coord_names)
    }

    /// Total derivative `D_j` on `J^k`, producing an expression on
    /// `J^{k+1}`:
    /// `D_j e = d e / d x^j + sum over (fiber, mu) of
    ///  (d e / d y^fiber_mu) * y^fiber_(mu + 1_j)`.
    ///
    /// Variables of `e` that are not coordinates of this space are treated
    /// as constants.
    pub fn total_derivative(&self, e: &Expr, j: usize) -> Expr {
        let mut acc = e.diff(self.base_name(j));
        for jc in &self.jet_coords {
            let name = self.jet_coord_name(jc.fiber, &jc.mu);
            let d = e.diff(&name);
            if !d.is_literal_zero() {
                let raised = self.jet_coord_name(jc.fiber, &jc.mu.plus(j as u8));
                acc = Expr::add(acc, Expr::mul(d, Expr::var(raised)));
            }
        }
        acc
    }
}

fn jet_name(fiber_name: &str, mu: &MultiIndex) -> String {
    if mu.order() == 0 {
        fiber_name.to_string()
    } else {
        format!("{fiber_name}_{}", mu.digits())
    }
}

/// A point of a jet space: one finite value per coordinate, aligned with
/// [`JetSpace::coordinates`].
#[derive(Debug, Clone, PartialEq)]
pub struct JetPoint {
    values: Vec<f64>,
}

impl JetPoint {
    pub fn from_values(space: &JetSpace, values: Vec<f64>) -> Result<Self, JetError> {
        if values.len() != space.coord_count() {
            return Err(JetError::WrongLength {
                expected: space.coord_count(),
                got: values.len(),
            });
        }
        for (i, v) in values.iter().enumerate() {
            if !v.is_finite() {
                return Err(JetError::NonFiniteCoordinate(
                    space.coordinates()[i].clone(),
                ));
            }
        }
        Ok(JetPoint { values })
    }

    pub fn from_binding(space: &JetSpace, binding: &Binding) -> Result<Self, JetError> {
        let mut values = Vec::with_capacity(space.coord_count());
        for name in space.coordinates() {
            let v = binding
                .get(name)
                .ok_or_else(|| JetError::MissingCoordinate(name.clone()))?;
            values.push(v);
        }
        Self::from_values(space, values)
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn get(&self, index: usize) -> f64 {
        self.values[index]
    }

    pub fn to_binding(&self, space: &JetSpace) -> Binding {
        space
            .coordinates()
            .iter()
            .cloned()
            .zip(self.values.iter().copied())
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn coordinate_enumeration_small_cases() {
        let s = JetSpace::new(2, 1, 1).unwrap();
        assert_eq!(s.coordinates(), &["x1", "x2", "y", "y_1", "y_2"]);
        assert_eq!(s.coord_count(), 2 + 1 * 3);

        let s = JetSpace::new(1, 1, 2).unwrap();
        assert_eq!(s.coordinates(), &["x1", "y", "y_1", "y_11"]);

        let s = JetSpace::new(2, 1, 2).unwrap();
        assert_eq!(s.coord_count(), 8);
        assert_eq!(
            s.coordinates()[2..].to_vec(),
            vec!["y", "y_1", "y_2", "y_11", "y_12", "y_22"]
        );
    }

    #[test]
    fn coordinate_count_matches_formula() {
        for n in 1..=4 {
            for m in 1..=3 {
                for k in 0..=4 {
                    let s = JetSpace::new(n, m, k).unwrap();
                    assert_eq!(
                        s.coord_count(),
                        n + m * jet_fiber_count(n, k),
                        "n={n} m={m} k={k}"
                    );
                }
            }
        }
    }

    #[test]
    fn ordering_interleaves_fibers_by_level() {
        let s = JetSpace::new(2, 2, 1).unwrap();
        assert_eq!(
            s.coordinates(),
            &["x1", "x2", "y1", "y2", "y1_1", "y1_2", "y2_1", "y2_2"]
        );
    }

    #[test]
    fn limits_are_enforced() {
        assert!(matches!(
            JetSpace::new(5, 1, 0),
            Err(JetError::BaseDimension { .. })
        ));
        assert!(matches!(
            JetSpace::new(2, 1, 7),
            Err(JetError::OrderTooHigh { .. })
        ));
        let relaxed = SpaceLimits {
            max_base: 6,
            max_order: 10,
        };
        let base = (1..=5).map(|i| format!("x{i}")).collect();
        assert!(JetSpace::with_limits(base, vec!["y".into()], 7, relaxed).is_ok());
    }

    #[test]
    fn name_collisions_are_detected() {
        let s = JetSpace::with_names(
            vec!["x1".into()],
            vec!["y".into(), "y_1".into()],
            1,
        )
        .unwrap();
        assert!(matches!(s.check_names(), Err(JetError::DuplicateName(_))));
    }

    #[test]
    fn total_derivative_base_case() {
        // D_1(y) on J^0 (n=2, m=1) is y_1.
        let s = JetSpace::new(2, 1, 0).unwrap();
        let d = s.total_derivative(&Expr::var("y"), 1);
        assert_eq!(d, Expr::var("y_1"));
    }

    #[test]
    fn total_derivative_product_case() {
        // D_2(x1*y_1) on J^1 is x1*y_12.
        let s = JetSpace::new(2, 1, 1).unwrap();
        let e = s.parse_expr("x1*y_1").unwrap();
        let d = s.total_derivative(&e, 2);
        let expected = s.raise_order(1).parse_expr("x1*y_12").unwrap();
        assert_eq!(crate::symexpr::simplify(&d), expected);
    }

    #[test]
    fn total_derivative_restricted_to_base_is_partial() {
        let s = JetSpace::new(2, 1, 1).unwrap();
        let e = s.parse_expr("x1^2*x2").unwrap();
        let d = s.total_derivative(&e, 1);
        let expected = e.diff("x1");
        assert_eq!(d, expected);
    }

    #[test]
    fn jet_point_validation() {
        let s = JetSpace::new(2, 1, 0).unwrap();
        assert!(JetPoint::from_values(&s, vec![0.0, 0.0, 1.0]).is_ok());
        assert!(matches!(
            JetPoint::from_values(&s, vec![0.0, 0.0]),
            Err(JetError::WrongLength { .. })
        ));
        assert!(matches!(
            JetPoint::from_values(&s, vec![0.0, f64::NAN, 1.0]),
            Err(JetError::NonFiniteCoordinate(_))
        ));
        let mut b = Binding::new();
        b.set("x1", 0.0).set("x2", 0.0);
        assert!(matches!(
            JetPoint::from_binding(&s, &b),
            Err(JetError::MissingCoordinate(_))
        ));
    }
}
