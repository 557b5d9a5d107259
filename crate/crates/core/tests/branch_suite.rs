//! Branch equation and its materialized solutions: frozen high-precision
//! roots, the N=4 existence boundary, the high-dimensional fold against its
//! closed form, and the two-solution inequality suite.

use kirchhoff_core::branches::{
    branch_diagram, materialize_all, solve_branch, theorem_t1_checks, NehariClass,
};
use kirchhoff_core::constants::{a_crit_high_dim, a_star_bracket};
use kirchhoff_core::ground_state::{find_ground_state, DEFAULT_BISECT_TOL};
use kirchhoff_core::params::ProblemParams;
use kirchhoff_core::probes::class_sign_agrees;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn roots_match_the_forty_digit_solver() {
    // frozen from an mpmath bisection of b + a G K^((N-2)/2) - K = 0
    let cases: [(u32, f64, f64, f64, &[f64]); 4] = [
        (1, 0.7, 1.0, 1.2, &[1.65328843764908]),
        (3, 0.8, 1.3, 0.9, &[2.42007434623178]),
        (5, 0.15, 1.0, 2.0, &[1.61667166777179, 8.70490390727730]),
        (7, 0.1, 1.1, 0.9, &[1.26056756982863, 4.02474148692154]),
    ];
    for (n, a, b, g, expect) in cases {
        let p = if n >= 5 { 2.2 } else { 3.0 };
        let params = ProblemParams::autonomous(n, p, a, b, 1.0).unwrap();
        let roots = solve_branch(&params, g).unwrap();
        assert_eq!(roots.len(), expect.len(), "N={n}");
        for ((k, mult), want) in roots.iter().zip(expect) {
            assert!(rel(*k, *want) < 1e-12, "N={n}: root {k} vs {want}");
            assert_eq!(*mult, 1, "N={n}");
        }
    }
}

#[test]
fn two_and_four_dimensional_closed_forms() {
    // N=2: K = b + aG; N=3: sqrt(K) solves a quadratic; N=4: geometric sum
    let p2 = ProblemParams::autonomous(2, 3.0, 0.37, 1.4, 1.0).unwrap();
    let r2 = solve_branch(&p2, 2.1).unwrap();
    assert_eq!(r2.len(), 1);
    assert!(rel(r2[0].0, 1.4 + 0.37 * 2.1) < 1e-14);

    let p3 = ProblemParams::autonomous(3, 3.0, 0.8, 1.3, 1.0).unwrap();
    let r3 = solve_branch(&p3, 0.9).unwrap();
    let sk = (0.8 * 0.9 + (0.8f64 * 0.8 * 0.9 * 0.9 + 4.0 * 1.3).sqrt()) / 2.0;
    assert!(rel(r3[0].0, sk * sk) < 1e-12);

    let p4 = ProblemParams::autonomous(4, 3.0, 0.25, 1.0, 1.0).unwrap();
    assert!(rel(solve_branch(&p4, 2.0).unwrap()[0].0, 1.0 / (1.0 - 0.5)) < 1e-14);
    assert!(solve_branch(&p4, 4.0).unwrap().is_empty());
    assert!(solve_branch(&p4, 5.0).unwrap().is_empty());
}

#[test]
fn n4_existence_boundary_sits_at_the_reciprocal_dirichlet_norm() {
    // roots exist exactly while a G < 1; the diagram's bisection must localize
    // the transition to 1e-8 relative around 1/G
    let gs = find_ground_state(4, 3.0, 1.0, DEFAULT_BISECT_TOL).unwrap();
    let boundary = 1.0 / gs.g;
    assert!(rel(boundary, 1.2229218004751346e-3) < 1e-6);
    let params = ProblemParams::autonomous(4, 3.0, 0.0, 1.0, 1.0).unwrap();
    let a_grid: Vec<f64> = (0..13).map(|i| boundary * (0.7 + 0.05 * i as f64)).collect();
    let diagram = branch_diagram(&params, &gs, &a_grid).unwrap();
    let fold = diagram.fold.expect("the boundary crossing must be detected");
    assert!(rel(fold.a_fold, boundary) < 1e-8, "fold at {} vs {boundary}", fold.a_fold);
    assert!(rel(fold.closed_form.unwrap(), boundary) < 1e-14);
    // below the boundary one root with the geometric-series value, above none
    for row in &diagram.rows {
        if row.a < boundary {
            assert_eq!(row.roots.len(), 1, "a = {}", row.a);
            assert!(rel(row.roots[0].k, 1.0 / (1.0 - row.a * gs.g)) < 1e-10);
        } else {
            assert!(row.roots.is_empty(), "a = {}", row.a);
        }
    }
}

#[test]
fn high_dimensional_fold_matches_the_closed_form() {
    for (n, p) in [(5u32, 2.5), (6u32, 2.5)] {
        let gs = find_ground_state(n, p, 1.0, DEFAULT_BISECT_TOL).unwrap();
        let a_crit = a_crit_high_dim(n, 1.0, gs.g).unwrap();
        let params = ProblemParams::autonomous(n, p, 0.0, 1.0, 1.0).unwrap();
        let a_grid: Vec<f64> = (0..11).map(|i| a_crit * (0.5 + 0.1 * i as f64)).collect();
        let diagram = branch_diagram(&params, &gs, &a_grid).unwrap();
        let fold = diagram.fold.expect("fold inside the sampled window");
        assert!(
            rel(fold.a_fold, a_crit) < 1e-6,
            "N={n}: empirical fold {} vs closed form {a_crit}",
            fold.a_fold
        );
        assert!(rel(fold.closed_form.unwrap(), a_crit) < 1e-14);
        // the double-root dilation factor is b(N-2)/(N-4)
        let k_star = (n as f64 - 2.0) / (n as f64 - 4.0);
        assert!(rel(fold.k_fold.unwrap(), k_star) < 1e-6, "N={n}: K {:?}", fold.k_fold);
        // exactly at the critical coupling the solver reports one double root
        let at = solve_branch(&params.with_a(a_crit), gs.g).unwrap();
        assert_eq!(at.len(), 1);
        assert_eq!(at[0].1, 2);
        assert!(rel(at[0].0, k_star) < 1e-6);
    }
}

#[test]
fn n5_two_solution_suite_passes_all_five_inequalities() {
    let gs = find_ground_state(5, 2.5, 1.0, DEFAULT_BISECT_TOL).unwrap();
    let probe = ProblemParams::autonomous(5, 2.5, 0.0, 1.0, 1.0).unwrap();
    let lambda = {
        let br = a_star_bracket(&probe, &gs).unwrap();
        kirchhoff_core::constants::lambda(&probe, gs.s_p_p, Some(br.lower)).unwrap()
    };
    assert!(rel(lambda, 1.9108079574743202e-7) < 1e-6);
    for frac in [0.25, 0.5, 0.75] {
        let params = probe.with_a(frac * lambda);
        let report = theorem_t1_checks(&params, &gs).unwrap();
        assert_eq!(report.root_count, 2, "a = {}", params.a);
        assert_eq!(report.expected_roots, 2);
        // root-count entry plus the five displayed inequalities
        assert_eq!(report.checks.len(), 6, "a = {}", params.a);
        for c in &report.checks {
            assert!(c.pass, "a = {}: {} ({} vs {})", params.a, c.name, c.lhs, c.rhs);
        }
        assert!(report.all_pass);
    }
    // frozen cross-check of the materialized pair at the midpoint coupling
    let mid = probe.with_a(0.5 * lambda);
    let roots = solve_branch(&mid, gs.g).unwrap();
    assert!(rel(roots[0].0, 1.0023709069) < 1e-8);
    assert!(rel(roots[1].0, 1.7916431672e5) < 1e-8);
    let sols = materialize_all(&roots, &gs, &mid).unwrap();
    assert!(rel(sols[0].norm_h1, 2.22913304e2) < 1e-6);
    assert!(rel(sols[1].norm_h1, 5.79639529e8) < 1e-6);
    assert!(rel(sols[0].energy, 4.96020873e3) < 1e-6);
    assert!(rel(sols[1].energy, -1.67985366e16) < 1e-6);
    assert_eq!(sols[0].nehari_class, NehariClass::Minus);
    assert_eq!(sols[1].nehari_class, NehariClass::Plus);
    for s in &sols {
        assert!(class_sign_agrees(s, &mid));
    }
}

#[test]
fn low_dimensional_single_solution_checks() {
    // N=1, p=3 has the rational threshold 1/518.4
    let gs = find_ground_state(1, 3.0, 1.0, DEFAULT_BISECT_TOL).unwrap();
    let probe = ProblemParams::autonomous(1, 3.0, 0.0, 1.0, 1.0).unwrap();
    let lambda = kirchhoff_core::constants::lambda(&probe, gs.s_p_p, None).unwrap();
    assert!(rel(lambda, 1.0 / 518.4) < 1e-9, "lambda = {lambda}");
    for frac in [0.0, 0.5, 0.99] {
        let params = probe.with_a(frac * lambda);
        let report = theorem_t1_checks(&params, &gs).unwrap();
        assert_eq!(report.root_count, 1);
        assert!(report.all_pass, "a = {}: {:?}", params.a, report.checks);
        assert_eq!(report.solutions[0].nehari_class, NehariClass::Minus);
    }
    // at the threshold itself the precondition fails
    assert!(theorem_t1_checks(&probe.with_a(lambda), &gs).is_err());
}

#[test]
fn materialized_roots_carry_consistent_residuals() {
    let cases = [(1u32, 3.0, 0.7), (2, 3.0, 0.4), (3, 2.5, 1.1), (4, 3.0, 6e-4), (6, 2.8, 5e-6)];
    for (n, p, a) in cases {
        let gs = find_ground_state(n, p, 1.0, DEFAULT_BISECT_TOL).unwrap();
        let params = ProblemParams::autonomous(n, p, a, 1.0, 1.0).unwrap();
        let roots = solve_branch(&params, gs.g).unwrap();
        assert!(!roots.is_empty(), "N={n} a={a}");
        for sol in materialize_all(&roots, &gs, &params).unwrap() {
            assert!(sol.branch_residual <= 1e-10, "N={n}: {}", sol.branch_residual);
            assert!(sol.nehari_residual <= 1e-9, "N={n}: {}", sol.nehari_residual);
            assert!(class_sign_agrees(&sol, &params), "N={n} K={}", sol.k);
        }
    }
}
