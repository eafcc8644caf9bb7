//! Coordinate-explicit jet calculus.
//!
//! The crate represents connections on fibered manifolds and on their jet
//! bundles as explicit coefficient tables of symbolic expressions, computes
//! curvature (the integrability obstruction of the associated first-order
//! system), tests prolongation surjectivity against curvature vanishing,
//! extends solved-form PDEs by chosen higher-order data, and integrates flat
//! systems numerically on structured grids.
//!
//! Layers, bottom up:
//!
//! * [`symexpr`] — the expression language: parsing, exact differentiation,
//!   simplification, evaluation, and randomized zero-testing.
//! * [`jet`] — multi-indices, jet-space coordinate bookkeeping, total
//!   derivatives, and the canonical inclusion of `J^{k+1}(E)` into
//!   `J^1(J^k(E))`.
//! * [`connection`] — connections as coefficient tables, their curvature,
//!   the horizontal/vertical split, and geometric connections.
//! * [`phg`] — solved-form PDEs, prolongation, epsilon-extensions, and the
//!   obstruction (defect) calculus that decides unique holonomic solvability.
//! * [`frobenius`] — deterministic RK4 sweep integration, path-dependence
//!   measurement, and holonomy diagnostics of numeric solutions.

pub mod connection;
pub mod frobenius;
pub mod jet;
pub mod phg;
pub mod symexpr;

pub use connection::{Connection, Curvature, FlatReport, GeometricReport, GeometricSpec};
pub use frobenius::{
    holonomy_defect, integrate, path_dependence, solve_geometric, GridBox, PathDependence,
    PathSpec, SolutionTrace,
};
pub use jet::{CanonicalInclusion, JetPoint, JetSpace, MultiIndex};
pub use phg::{
    prolong_equations, prolongation_surjective_at, EpsilonSection, ExactnessReport, PhgCurvature,
    ProlongedSystem, SolvedPde,
};
pub use symexpr::{
    is_zero, parse, simplify, Binding, Compiled, EvalError, Expr, ZeroConfig, ZeroVerdict,
};
