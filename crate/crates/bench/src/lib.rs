//! Shared fixtures for the benchmark targets.

use jetc_core::{Connection, Expr, GeometricSpec, GridBox, JetPoint, JetSpace};

/// The flat running example: `c_1 = c_2 = y` on two base axes.
pub fn exp_connection() -> Connection {
    let space = JetSpace::new(2, 1, 0).unwrap();
    let y = space.parse_expr("y").unwrap();
    Connection::from_rows(space, vec![vec![y.clone(), y]]).unwrap()
}

/// A dense first-order geometric system on three base axes.
pub fn geometric_system(n: usize, m: usize) -> Connection {
    let space = JetSpace::new(n, m, 1).unwrap();
    let coords: Vec<String> = space.coordinates().to_vec();
    GeometricSpec::from_fn(space, |fiber, sigma| {
        let a = &coords[fiber % coords.len()];
        let b = &coords[(sigma.order() + fiber) % coords.len()];
        Expr::mul(Expr::var(a.clone()), Expr::var(b.clone()))
    })
    .unwrap()
    .into_connection()
}

pub fn exp_setup() -> (Connection, JetPoint, GridBox) {
    let conn = exp_connection();
    let init = JetPoint::from_values(conn.space(), vec![0.0, 0.0, 1.0]).unwrap();
    let grid = GridBox::new(vec![0.0, 0.0], vec![1.0, 1.0], 0.02).unwrap();
    (conn, init, grid)
}
