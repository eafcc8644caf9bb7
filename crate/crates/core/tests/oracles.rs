//! Randomized cross-checks: symbolic curvature against finite-difference
//! assembly, the surjectivity probe against pointwise curvature
//! evaluation, and the defect calculus of extended solved-form PDEs
//! against its independent preimage search.

mod common;

use common::{
    exp_conn, flat_potential_pde, random_connection_k0, random_geometric_k1, random_point,
    random_poly, rel_err, rng, shear_conn, shear_pde, FdOracle,
};
use jetc_core::phg::prolongation_surjective_at;
use jetc_core::{
    Connection, EpsilonSection, Expr, GeometricSpec, JetSpace, SolvedPde, ZeroConfig,
};

const FD_STEP: f64 = 1e-5;

fn battery(seed: u64) -> Vec<Connection> {
    let mut r = rng(seed);
    let mut out = vec![exp_conn(), shear_conn()];
    for n in [2usize, 3] {
        for m in [1usize, 2] {
            out.push(random_connection_k0(&mut r, n, m));
            out.push(random_geometric_k1(&mut r, n, m));
        }
    }
    // a constant-coefficient and a zero-top geometric flat case
    let space = JetSpace::new(3, 1, 0).unwrap();
    out.push(Connection::from_fn(space, |_, j| Expr::int(j as i64)).unwrap());
    let space = JetSpace::new(2, 1, 1).unwrap();
    out.push(
        GeometricSpec::from_fn(space, |_, _| Expr::zero())
            .unwrap()
            .into_connection(),
    );
    out
}

#[test]
fn symbolic_curvature_matches_finite_differences() {
    let mut r = rng(11);
    for (which, conn) in battery(7).into_iter().enumerate() {
        let curv = conn.curvature();
        let oracle = FdOracle::new(&conn);
        let space = conn.space().clone();
        for _ in 0..20 {
            let p = random_point(&mut r, &space);
            let b = p.to_binding(&space);
            for c in curv.components() {
                let symbolic = c.expr.eval(&b).unwrap();
                let numeric = oracle.component(p.values(), c.coord_index, c.pair.0, c.pair.1, FD_STEP);
                assert!(
                    rel_err(symbolic, numeric) < 1e-6,
                    "system {which}, pair {:?}: symbolic {symbolic} vs fd {numeric}",
                    c.pair
                );
            }
        }
    }
}

#[test]
fn surjectivity_probe_agrees_with_curvature_everywhere() {
    let mut r = rng(23);
    for (which, conn) in battery(13).into_iter().enumerate() {
        let curv = conn.curvature();
        let space = conn.space().clone();
        for _ in 0..10 {
            let p = random_point(&mut r, &space);
            let direct = prolongation_surjective_at(&conn, &p, 1e-9).unwrap();
            let via_curvature = curv.max_abs_at(&p).unwrap() < 1e-9;
            assert_eq!(
                direct, via_curvature,
                "system {which}: probe and curvature disagree at {:?}",
                p.values()
            );
        }
    }
}

#[test]
fn reduction_reproduces_first_order_connections_verbatim() {
    // a k=1 solved PDE with no lower jets is itself a first-order system;
    // reduction must reproduce it coefficient by coefficient
    let mut r = rng(31);
    for _ in 0..10 {
        let space0 = JetSpace::new(2, 2, 0).unwrap();
        let coords = space0.coordinates().to_vec();
        let table: Vec<Vec<Expr>> = (0..2)
            .map(|_| (0..2).map(|_| random_poly(&mut r, &coords, 3)).collect())
            .collect();
        let conn = Connection::from_rows(space0.clone(), table.clone()).unwrap();
        let space1 = JetSpace::new(2, 2, 1).unwrap();
        let pde = SolvedPde::from_fn(space1, |fiber, nu| {
            table[fiber][nu.entries()[0] as usize - 1].clone()
        })
        .unwrap();
        let reduced = pde.reduce_to_first_order();
        assert_eq!(reduced.space().coordinates(), space0.coordinates());
        for ci in 0..2 {
            for j in 1..=2 {
                assert_eq!(reduced.coefficient(ci, j), conn.coefficient(ci, j));
            }
        }
    }
}

#[test]
fn canonical_extensions_are_connections_exactly_for_flat_bases() {
    let cfg = ZeroConfig::default();
    let mut r = rng(41);
    // n = 1: every base is vacuously flat, any f admits its canonical
    // extension as a connection
    for _ in 0..10 {
        let space = JetSpace::new(1, 1, 1).unwrap();
        let coords = space.at_order(0).coordinates().to_vec();
        let f = random_poly(&mut r, &coords, 3);
        let pde = SolvedPde::from_rows(space, vec![vec![f]]).unwrap();
        let eps = pde.canonical_epsilon();
        assert!(eps.is_connection(&cfg).unwrap().is_connection);

        // perturbing one slot by +1 breaks it
        let broken = EpsilonSection::from_fn(pde, |fiber, sigma| {
            let base = eps.extension(fiber, sigma).unwrap().clone();
            Expr::add(base, Expr::one())
        })
        .unwrap();
        assert!(!broken.is_connection(&cfg).unwrap().is_connection);
    }
    // n = 2: potential-built flat bases admit canonical extensions,
    // perturbed ones fail
    for _ in 0..10 {
        let pde = flat_potential_pde(&mut r, 1);
        assert!(
            pde.reduce_to_first_order()
                .is_flat(&cfg)
                .unwrap()
                .flat
        );
        let eps = pde.canonical_epsilon();
        assert!(eps.is_connection(&cfg).unwrap().is_connection);
        let broken = EpsilonSection::from_fn(pde, |fiber, sigma| {
            let base = eps.extension(fiber, sigma).unwrap().clone();
            if sigma.digits() == "12" {
                Expr::add(base, Expr::one())
            } else {
                base
            }
        })
        .unwrap();
        assert!(!broken.is_connection(&cfg).unwrap().is_connection);
    }
}

#[test]
fn curved_bases_admit_no_connection_extension() {
    let cfg = ZeroConfig::default();
    let pde = shear_pde();
    assert!(!pde
        .canonical_epsilon()
        .is_connection(&cfg)
        .unwrap()
        .is_connection);
    let mut r = rng(53);
    let lower = pde.lower_space().clone();
    for _ in 0..10 {
        let coords = lower.coordinates().to_vec();
        let eps = EpsilonSection::from_fn(pde.clone(), |_, _| random_poly(&mut r, &coords, 3))
            .unwrap();
        assert!(!eps.is_connection(&cfg).unwrap().is_connection);
    }
}

#[test]
fn epsilon_verdict_equals_connection_defect_vanishing() {
    // the two formulations are definitionally aligned; assert it across a
    // mixed battery
    let cfg = ZeroConfig::default();
    let mut r = rng(61);
    let mut cases: Vec<EpsilonSection> = Vec::new();
    cases.push(shear_pde().canonical_epsilon());
    for _ in 0..5 {
        let pde = flat_potential_pde(&mut r, 1);
        cases.push(pde.canonical_epsilon());
        let coords = pde.lower_space().coordinates().to_vec();
        cases.push(
            EpsilonSection::from_fn(pde, |_, _| random_poly(&mut r, &coords, 2)).unwrap(),
        );
    }
    for (which, eps) in cases.iter().enumerate() {
        let report = eps.is_connection(&cfg).unwrap();
        let curv = eps.curvature();
        let mut defects_vanish = true;
        for d in &curv.connection_defects {
            if !jetc_core::is_zero(&d.expr, &cfg).unwrap().is_zero() {
                defects_vanish = false;
            }
        }
        assert_eq!(report.is_connection, defects_vanish, "case {which}");
    }
}

#[test]
fn exactness_verdicts_agree_across_battery() {
    let mut r = rng(71);
    let mut cases: Vec<EpsilonSection> = Vec::new();
    // flat base, canonical extension: exact everywhere
    let exp_space = JetSpace::new(2, 1, 1).unwrap();
    let exp_pde = SolvedPde::from_fn(exp_space, |_, _| Expr::var("y")).unwrap();
    cases.push(EpsilonSection::from_fn(exp_pde.clone(), |_, _| Expr::var("y")).unwrap());
    // curved base
    cases.push(shear_pde().canonical_epsilon());
    // trivial equations
    let trivial_space = JetSpace::new(2, 1, 1).unwrap();
    let trivial = SolvedPde::from_fn(trivial_space, |_, _| Expr::zero()).unwrap();
    cases.push(EpsilonSection::from_fn(trivial, |_, _| Expr::zero()).unwrap());
    // second-order single-axis equations
    let ode_space = JetSpace::new(1, 1, 2).unwrap();
    let ode = SolvedPde::from_fn(ode_space, |_, _| Expr::zero()).unwrap();
    cases.push(ode.canonical_epsilon());
    // random flat bases, canonical and perturbed
    for _ in 0..4 {
        let pde = flat_potential_pde(&mut r, 1);
        cases.push(pde.canonical_epsilon());
        let canonical = pde.canonical_epsilon();
        cases.push(
            EpsilonSection::from_fn(pde, |fiber, sigma| {
                Expr::add(
                    canonical.extension(fiber, sigma).unwrap().clone(),
                    Expr::one(),
                )
            })
            .unwrap(),
        );
    }
    // random non-flat bases with canonical extensions
    for _ in 0..3 {
        let space = JetSpace::new(2, 1, 1).unwrap();
        let coords = space.at_order(0).coordinates().to_vec();
        let pde = SolvedPde::from_fn(space, |_, _| random_poly(&mut r, &coords, 3)).unwrap();
        cases.push(pde.canonical_epsilon());
    }

    let mut checked = 0;
    for (which, eps) in cases.iter().enumerate() {
        let lower = eps.pde().lower_space().clone();
        for _ in 0..8 {
            let p = random_point(&mut r, &lower);
            let report = eps.exactness_at(&p, 1e-9).unwrap();
            assert!(
                report.agree,
                "case {which}: preimage {} but max|R| = {} at {:?}",
                report.preimage_exists,
                report.max_r,
                p.values()
            );
            checked += 1;
        }
    }
    assert!(checked >= 100, "battery too small: {checked}");
}
