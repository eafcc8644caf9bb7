//! Grid-sweep integration behavior: accuracy against closed forms,
//! convergence orders, path dependence as the observable face of
//! curvature, and holonomy diagnostics.

mod common;

use common::{exp_conn, shear_conn};
use jetc_core::frobenius::{
    holonomy_defect, integrate, path_dependence, solve_geometric, GridBox, IntegrateError,
    SolveOptions,
};
use jetc_core::{Connection, Expr, GeometricSpec, JetPoint, JetSpace, SolutionTrace, ZeroConfig};

fn unit_box(n: usize, h: f64) -> GridBox {
    GridBox::new(vec![0.0; n], vec![1.0; n], h).unwrap()
}

fn max_error_vs<F: Fn(&[f64]) -> f64>(trace: &SolutionTrace, ci: usize, exact: F) -> f64 {
    let grid = trace.grid();
    let mut worst: f64 = 0.0;
    for flat in 0..grid.node_count() {
        let idx = grid.multi_index(flat);
        let x = grid.node_coords(&idx);
        worst = worst.max((trace.value_flat(flat, ci) - exact(&x)).abs());
    }
    worst
}

#[test]
fn exp_system_matches_closed_form() {
    let conn = exp_conn();
    let init = JetPoint::from_values(conn.space(), vec![0.0, 0.0, 1.0]).unwrap();
    let trace = integrate(&conn, &init, &unit_box(2, 0.01)).unwrap();
    let err = max_error_vs(&trace, 0, |x| (x[0] + x[1]).exp());
    assert!(err < 1e-6, "max error {err}");

    let finer = integrate(&conn, &init, &unit_box(2, 0.005)).unwrap();
    let err2 = max_error_vs(&finer, 0, |x| (x[0] + x[1]).exp());
    assert!(
        err / err2 >= 8.0,
        "halving the step should cut the error by >= 8x: {err} -> {err2}"
    );
}

#[test]
fn constant_coefficients_integrate_exactly() {
    let space = JetSpace::new(2, 1, 0).unwrap();
    let conn =
        Connection::from_rows(space.clone(), vec![vec![Expr::int(3), Expr::int(-2)]]).unwrap();
    let init = JetPoint::from_values(&space, vec![0.5, 0.5, 1.0]).unwrap();
    let grid = GridBox::new(vec![0.0, 0.0], vec![1.0, 1.0], 0.25).unwrap();
    let trace = integrate(&conn, &init, &grid).unwrap();
    let err = max_error_vs(&trace, 0, |x| 1.0 + 3.0 * (x[0] - 0.5) - 2.0 * (x[1] - 0.5));
    assert!(err < 1e-12, "affine solutions should be exact, err {err}");
    // the initial node carries the initial value exactly
    assert_eq!(trace.value(&[2, 2], 0), 1.0);
}

#[test]
fn affine_geometric_solution_is_holonomic() {
    let space = JetSpace::new(2, 1, 1).unwrap();
    let conn = GeometricSpec::from_fn(space.clone(), |_, _| Expr::zero())
        .unwrap()
        .into_connection();
    let init = JetPoint::from_values(&space, vec![0.0, 0.0, 1.0, 2.0, 3.0]).unwrap();
    let sol = solve_geometric(&conn, &init, &unit_box(2, 0.05), &SolveOptions::default()).unwrap();
    assert!(sol.geometric.geometric);
    assert!(sol.flat.flat && sol.flat.symbolic);
    let err = max_error_vs(&sol.trace, 0, |x| 1.0 + 2.0 * x[0] + 3.0 * x[1]);
    assert!(err < 1e-12);
    assert!(sol.holonomy_defect.unwrap() < 1e-10);
    assert!(sol.second_order_defect.unwrap() < 1e-10);
}

#[test]
fn oscillator_matches_cosine_and_defect_converges_quadratically() {
    // y'' = -y as a geometric connection on J^1, init (0, y=1, y_1=0)
    let space = JetSpace::new(1, 1, 1).unwrap();
    let conn = GeometricSpec::from_fn(space.clone(), |_, _| Expr::neg(Expr::var("y")))
        .unwrap()
        .into_connection();
    let init = JetPoint::from_values(&space, vec![0.0, 1.0, 0.0]).unwrap();

    let sol = solve_geometric(&conn, &init, &unit_box(1, 1e-3), &SolveOptions::default()).unwrap();
    let err = max_error_vs(&sol.trace, 0, |x| x[0].cos());
    assert!(err < 1e-6, "cosine error {err}");

    let coarse = solve_geometric(&conn, &init, &unit_box(1, 0.01), &SolveOptions::default())
        .unwrap()
        .holonomy_defect
        .unwrap();
    let fine = solve_geometric(&conn, &init, &unit_box(1, 0.005), &SolveOptions::default())
        .unwrap()
        .holonomy_defect
        .unwrap();
    let ratio = coarse / fine;
    assert!(
        (ratio - 4.0).abs() <= 0.8,
        "central-difference defect should scale like h^2, ratio {ratio}"
    );
}

#[test]
fn curved_flat_geometric_defect_ratio_on_two_axes() {
    // tops are the second partials of P = x1^3 + x1^2*x2 + x2^3, so the
    // system is flat with holonomic solution y = P + affine
    let space = JetSpace::new(2, 1, 1).unwrap();
    let tops = [
        ("11", "6*x1 + 2*x2"),
        ("12", "2*x1"),
        ("22", "6*x2"),
    ];
    let conn = GeometricSpec::from_fn(space.clone(), |_, sigma| {
        let text = tops
            .iter()
            .find(|(d, _)| *d == sigma.digits())
            .map(|(_, t)| *t)
            .unwrap();
        space.parse_expr(text).unwrap()
    })
    .unwrap()
    .into_connection();
    assert!(conn.is_flat(&ZeroConfig::default()).unwrap().flat);
    let init = JetPoint::from_values(&space, vec![0.0, 0.0, 0.0, 0.0, 0.0]).unwrap();
    let defect_at = |h: f64| {
        let sol = solve_geometric(&conn, &init, &unit_box(2, h), &SolveOptions::default()).unwrap();
        sol.holonomy_defect.unwrap()
    };
    let (coarse, fine) = (defect_at(0.1), defect_at(0.05));
    let ratio = coarse / fine;
    assert!(
        (ratio - 4.0).abs() <= 0.8,
        "expected second-order decay, got {coarse} / {fine} = {ratio}"
    );
}

#[test]
fn flat_path_discrepancy_decays_with_integrator_order() {
    // the exp system is symmetric in the axes, so both sweep orders do
    // literally the same arithmetic
    let conn = exp_conn();
    let init = JetPoint::from_values(conn.space(), vec![0.0, 0.0, 1.0]).unwrap();
    let corner = [1.0, 1.0];
    let d = path_dependence(&conn, &init, &corner, 0.1)
        .unwrap()
        .max_discrepancy;
    assert_eq!(d, 0.0);

    // a flat system with x-dependent coefficients: c_j = dP/dx_j * y for
    // P = x1^2*x2, solutions y = C*exp(P); the two orders now differ by
    // integrator error only
    let space = JetSpace::new(2, 1, 0).unwrap();
    let c1 = space.parse_expr("2*x1*x2*y").unwrap();
    let c2 = space.parse_expr("x1^2*y").unwrap();
    let conn = Connection::from_rows(space.clone(), vec![vec![c1, c2]]).unwrap();
    assert!(conn.is_flat(&ZeroConfig::default()).unwrap().flat);
    let init = JetPoint::from_values(&space, vec![0.0, 0.0, 1.0]).unwrap();
    let d1 = path_dependence(&conn, &init, &corner, 0.1)
        .unwrap()
        .max_discrepancy;
    let d2 = path_dependence(&conn, &init, &corner, 0.05)
        .unwrap()
        .max_discrepancy;
    assert!(d1 > 1e-12 && d2 > 0.0, "expected visible integrator error");
    assert!(
        d1 / d2 >= 8.0,
        "flat discrepancy is pure integrator error: {d1} vs {d2}"
    );
}

#[test]
fn shear_holonomy_is_stable_under_refinement() {
    let conn = shear_conn();
    let init = JetPoint::from_values(conn.space(), vec![0.0, 0.0, 1.0]).unwrap();
    let corner = [1.0, 1.0];
    let d = |h: f64| {
        path_dependence(&conn, &init, &corner, h)
            .unwrap()
            .max_discrepancy
    };
    let (d1, d2, d4) = (d(0.01), d(0.005), d(0.0025));
    assert!(d1 > 1e-3, "discrepancy {d1} should be macroscopic");
    // Richardson extrapolation of the fourth-order integrator
    let l1 = (16.0 * d2 - d1) / 15.0;
    let l2 = (16.0 * d4 - d2) / 15.0;
    let sigma = (l2 - l1).abs().max(1e-15);
    assert!(
        l2.abs() > 3.0 * sigma,
        "extrapolated limit {l2} should be nonzero at 3 sigma {sigma}"
    );
    // the genuine holonomy of the loop: e^2 - e
    let expected = (2.0f64).exp() - 1.0f64.exp();
    assert!((l2 - expected).abs() < 1e-6, "limit {l2} vs {expected}");
}

#[test]
fn single_axis_has_no_path_dependence() {
    let space = JetSpace::new(1, 1, 0).unwrap();
    let conn = Connection::from_rows(space.clone(), vec![vec![space.parse_expr("y").unwrap()]])
        .unwrap();
    let init = JetPoint::from_values(&space, vec![0.0, 1.0]).unwrap();
    let report = path_dependence(&conn, &init, &[1.0], 0.01).unwrap();
    assert_eq!(report.terminals.len(), 1);
    assert_eq!(report.max_discrepancy, 0.0);
}

#[test]
fn planted_nongeometric_connection_is_not_holonomic() {
    // flat but not geometric: dy/dx = 2*y_1 instead of y_1
    let space = JetSpace::new(1, 1, 1).unwrap();
    let conn = Connection::from_fn(space.clone(), |jc, _| {
        if jc.mu_order == 0 {
            Expr::mul(Expr::int(2), Expr::var("y_1"))
        } else {
            Expr::zero()
        }
    })
    .unwrap();
    let cfg = ZeroConfig::default();
    assert!(conn.is_flat(&cfg).unwrap().flat);
    assert!(!conn.is_geometric(&cfg).unwrap().geometric);
    let init = JetPoint::from_values(&space, vec![0.0, 0.0, 1.0]).unwrap();
    for h in [0.01, 0.005, 0.0025] {
        let trace = integrate(&conn, &init, &unit_box(1, h)).unwrap();
        let defect = holonomy_defect(&trace).unwrap();
        assert!(
            defect > 1e-2,
            "defect must stay bounded away from zero, got {defect} at h={h}"
        );
    }
    // strict mode refuses to call this solving a geometric system
    let strict = SolveOptions {
        strict: true,
        ..SolveOptions::default()
    };
    assert!(matches!(
        solve_geometric(&conn, &init, &unit_box(1, 0.01), &strict),
        Err(IntegrateError::NotGeometric { .. })
    ));
}

#[test]
fn holonomy_defect_of_exact_and_perturbed_sections() {
    // hand-built trace of the exact affine section y = 1 + 2x, y_1 = 2
    let space = JetSpace::new(1, 1, 1).unwrap();
    let grid = GridBox::new(vec![0.0], vec![1.0], 0.1).unwrap();
    let mut data = Vec::new();
    for i in 0..=10 {
        let x = i as f64 * 0.1;
        data.push(1.0 + 2.0 * x);
        data.push(2.0);
    }
    let trace = SolutionTrace::from_parts(space.clone(), grid.clone(), data.clone(), vec![0])
        .unwrap();
    assert!(holonomy_defect(&trace).unwrap() < 1e-13);

    // perturbing y_1 by +1 plants a defect of exactly 1
    let mut perturbed = data;
    for chunk in perturbed.chunks_mut(2) {
        chunk[1] += 1.0;
    }
    let trace = SolutionTrace::from_parts(space, grid, perturbed, vec![0]).unwrap();
    let defect = holonomy_defect(&trace).unwrap();
    assert!((defect - 1.0).abs() < 1e-12, "defect {defect}");
}

#[test]
fn traces_are_deterministic_and_csv_is_stable() {
    let conn = exp_conn();
    let init = JetPoint::from_values(conn.space(), vec![0.0, 0.0, 1.0]).unwrap();
    let grid = unit_box(2, 0.1);
    let a = integrate(&conn, &init, &grid).unwrap().to_csv_string();
    let b = integrate(&conn, &init, &grid).unwrap().to_csv_string();
    assert_eq!(a, b);
    let mut lines = a.lines();
    assert_eq!(lines.next().unwrap(), "x1,x2,y");
    assert_eq!(a.lines().count(), 1 + 11 * 11);
    // 17 significant digits, exponent notation
    let first = lines.next().unwrap();
    assert!(first.split(',').all(|f| f.contains('e')), "{first}");
}

#[test]
fn integration_failure_modes() {
    let conn = exp_conn();
    let off = JetPoint::from_values(conn.space(), vec![0.051, 0.0, 1.0]).unwrap();
    assert!(matches!(
        integrate(&conn, &off, &unit_box(2, 0.1)),
        Err(IntegrateError::InitOffGrid { axis: 0 })
    ));

    // dy/dx = y^2 from y(0) = 1 blows up at x = 1, inside [0, 2]
    let space = JetSpace::new(1, 1, 0).unwrap();
    let conn = Connection::from_rows(space.clone(), vec![vec![space
        .parse_expr("y^2")
        .unwrap()]])
    .unwrap();
    let init = JetPoint::from_values(&space, vec![0.0, 1.0]).unwrap();
    let grid = GridBox::new(vec![0.0], vec![2.0], 0.01).unwrap();
    match integrate(&conn, &init, &grid) {
        Err(IntegrateError::NonFiniteEncountered { .. }) | Err(IntegrateError::Eval { .. }) => {}
        other => panic!("expected blow-up to be reported, got {other:?}"),
    }
}
