//! Shared fixtures for the integration tests: deterministic RNG, random
//! polynomial coefficient tables, and a finite-difference curvature
//! oracle that never touches the symbolic differentiation path.

#![allow(dead_code)]

use jetc_core::symexpr::Number;
use jetc_core::{Compiled, Connection, Expr, GeometricSpec, JetPoint, JetSpace, SolvedPde};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Sparse random polynomial of degree <= 2 over the given coordinates:
/// a sum of up to `max_terms` monomials with small rational coefficients.
pub fn random_poly(rng: &mut ChaCha8Rng, coords: &[String], max_terms: usize) -> Expr {
    let terms = rng.gen_range(1..=max_terms);
    let mut acc = Expr::zero();
    for _ in 0..terms {
        let mut coef = 0i64;
        while coef == 0 {
            coef = rng.gen_range(-3..=3);
        }
        let mut term = Expr::Const(Number::ratio(coef, rng.gen_range(1..=2)));
        for _ in 0..rng.gen_range(0..=2usize) {
            let v = &coords[rng.gen_range(0..coords.len())];
            term = Expr::mul(term, Expr::var(v.clone()));
        }
        acc = Expr::add(acc, term);
    }
    acc
}

pub fn random_connection_k0(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Connection {
    let space = JetSpace::new(n, m, 0).unwrap();
    let coords = space.coordinates().to_vec();
    Connection::from_fn(space, |_, _| random_poly(rng, &coords, 3)).unwrap()
}

pub fn random_geometric_k1(rng: &mut ChaCha8Rng, n: usize, m: usize) -> Connection {
    let space = JetSpace::new(n, m, 1).unwrap();
    let coords = space.coordinates().to_vec();
    GeometricSpec::from_fn(space, |_, _| random_poly(rng, &coords, 3))
        .unwrap()
        .into_connection()
}

pub fn random_point(rng: &mut ChaCha8Rng, space: &JetSpace) -> JetPoint {
    let values = (0..space.coord_count())
        .map(|_| rng.gen_range(-1.0..=1.0))
        .collect();
    JetPoint::from_values(space, values).unwrap()
}

pub fn exp_conn() -> Connection {
    let space = JetSpace::new(2, 1, 0).unwrap();
    let y = space.parse_expr("y").unwrap();
    Connection::from_rows(space, vec![vec![y.clone(), y]]).unwrap()
}

pub fn shear_conn() -> Connection {
    let space = JetSpace::new(2, 1, 0).unwrap();
    let c1 = space.parse_expr("y").unwrap();
    let c2 = space.parse_expr("x1*y").unwrap();
    Connection::from_rows(space, vec![vec![c1, c2]]).unwrap()
}

pub fn shear_pde() -> SolvedPde {
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

/// First-order systems on n=2 built from a random potential so the
/// reduced curvature vanishes identically: `f_j = dP/dx_j * (y + c)`.
pub fn flat_potential_pde(rng: &mut ChaCha8Rng, m: usize) -> SolvedPde {
    let space = JetSpace::new(2, m, 1).unwrap();
    let base: Vec<String> = space.base_names().to_vec();
    let mut potentials = Vec::new();
    for _ in 0..m {
        let p = random_poly(rng, &base, 3);
        let c = rng.gen_range(-2..=2i64);
        potentials.push((p, c));
    }
    let fibers: Vec<String> = space.fiber_names().to_vec();
    SolvedPde::from_fn(space, |fiber, nu| {
        let j = nu.entries()[0] as usize;
        let (p, c) = &potentials[fiber];
        Expr::mul(
            p.diff(&base[j - 1]),
            Expr::add(Expr::var(fibers[fiber].clone()), Expr::int(*c)),
        )
    })
    .unwrap()
}

pub fn rel_err(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs()).max(1.0)
}

/// Curvature assembled purely from coefficient evaluations and central
/// finite differences; independent of `Connection::curvature`.
pub struct FdOracle {
    comp: Vec<Vec<Compiled>>,
    n: usize,
    fibers: usize,
}

impl FdOracle {
    pub fn new(conn: &Connection) -> Self {
        let space = conn.space();
        let coords = space.coordinates();
        let n = space.base_dim();
        let fibers = space.jet_coords().len();
        let comp = (0..fibers)
            .map(|ci| {
                (1..=n)
                    .map(|j| conn.coefficient(ci, j).compile(coords).unwrap())
                    .collect()
            })
            .collect();
        FdOracle { comp, n, fibers }
    }

    fn coeff(&self, ci: usize, j: usize, vals: &[f64]) -> f64 {
        self.comp[ci][j - 1].eval(vals).unwrap()
    }

    fn partial(&self, ci: usize, j: usize, vals: &[f64], slot: usize, h: f64) -> f64 {
        let mut up = vals.to_vec();
        up[slot] += h;
        let mut down = vals.to_vec();
        down[slot] -= h;
        (self.coeff(ci, j, &up) - self.coeff(ci, j, &down)) / (2.0 * h)
    }

    /// Numeric `D^c_dir c_(ci, coef_dir)` at the point.
    fn truncated_derivative(&self, vals: &[f64], ci: usize, coef_dir: usize, dir: usize, h: f64) -> f64 {
        let mut acc = self.partial(ci, coef_dir, vals, dir - 1, h);
        for ti in 0..self.fibers {
            acc += self.partial(ci, coef_dir, vals, self.n + ti, h) * self.coeff(ti, dir, vals);
        }
        acc
    }

    /// Numeric curvature component for the stored orientation `r < j`.
    pub fn component(&self, vals: &[f64], ci: usize, r: usize, j: usize, h: f64) -> f64 {
        self.truncated_derivative(vals, ci, r, j, h) - self.truncated_derivative(vals, ci, j, r, h)
    }
}
