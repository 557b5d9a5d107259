//! Fibering-map analysis: a frozen high-precision root pair, then a seeded
//! 500-draw property sweep covering derivative consistency, root residuals,
//! the sufficient-hypothesis ordering chain, scaling covariance, and the
//! filtration split.

use kirchhoff_core::constants::d_of_p;
use kirchhoff_core::fibering::{
    critical_points, fiber_derivatives, fiber_value, lemma_m3_roots, nehari_residual, t_f,
    FunctionData, Membership,
};
use kirchhoff_core::params::ProblemParams;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

#[test]
fn root_pair_matches_the_high_precision_solver() {
    // frozen from a 40-digit bisection of h1b + a dir_sq^2 t^2 - fp t^(p-2)
    let data = FunctionData::from_parts(1.1, 0.9, 1.6, 1.0);
    assert!((data.h1b_sq - 2.0).abs() < 1e-15);
    let params = ProblemParams::autonomous(3, 2.7, 0.1, 1.0, 1.0).unwrap();
    let report = critical_points(&data, &params).unwrap();
    let tm = report.t_minus.unwrap();
    let tp = report.t_plus.unwrap();
    assert!(rel(tm, 1.75631820819393) < 1e-10, "t_minus = {tm}");
    assert!(rel(tp, 4.82015830570435) < 1e-10, "t_plus = {tp}");
    assert!(!report.tangent);
    // both are genuine critical scales, max before min
    let (h1m, h2m) = fiber_derivatives(tm, &data, &params);
    let (h1p, h2p) = fiber_derivatives(tp, &data, &params);
    assert!(h1m.abs() < 1e-9 * data.fp * tm.powf(params.p - 1.0));
    assert!(h1p.abs() < 1e-9 * data.fp * tp.powf(params.p - 1.0));
    assert!(h2m < 0.0 && h2p > 0.0);
}

#[test]
fn zero_coupling_has_one_maximum_at_t_f() {
    let data = FunctionData::from_parts(0.7, 1.3, 2.0, 1.0);
    let params = ProblemParams::autonomous(2, 3.0, 0.0, 1.0, 1.0).unwrap();
    let report = critical_points(&data, &params).unwrap();
    let expect = t_f(&data, 3.0).unwrap();
    assert_eq!(report.t_minus, Some(expect));
    assert_eq!(report.t_plus, None);
    assert!(!report.tangent);
    // Nehari-normalized data puts the maximum exactly at t = 1
    let normalized = FunctionData::from_parts(0.7, 1.3, 2.0, 1.0);
    let t1 = t_f(&normalized, 3.0).unwrap();
    let on_nehari = normalized.scaled(t1, 3.0);
    assert!(nehari_residual(&on_nehari, &params) < 1e-12);
    let r2 = critical_points(&on_nehari, &params).unwrap();
    assert!(rel(r2.t_minus.unwrap(), 1.0) < 1e-12);
}

/// Scale-free root residual of h'(t) = 0 in the t^3-reduced form, finite for
/// every scale the root finder can produce.
fn reduced_residual(t: f64, data: &FunctionData, a: f64, p: f64) -> f64 {
    let d2 = data.dir_sq * data.dir_sq;
    let terms = [data.h1b_sq / (t * t), a * d2, data.fp * t.powf(p - 4.0)];
    (terms[0] + terms[1] - terms[2]).abs() / (terms[0] + terms[1] + terms[2])
}

#[test]
fn five_hundred_random_draws_pass_every_check() {
    let mut rng = ChaCha8Rng::seed_from_u64(0xC0FFEE);
    let mut hypothesis_hits = 0usize;
    let mut two_root_cases = 0usize;
    for draw in 0..500 {
        let dir_sq = 10f64.powf(rng.gen_range(-2.0..2.0));
        let mass = 10f64.powf(rng.gen_range(-2.0..2.0));
        let b = 10f64.powf(rng.gen_range(-0.5..0.5));
        let p = rng.gen_range(2.05..3.95);
        let a = if rng.gen_bool(0.25) { 0.0 } else { 10f64.powf(rng.gen_range(-6.0..1.0)) };
        // pin the semilinear scale to a moderate band so finite differences
        // stay inside representable energies; the extreme-scale loop below
        // covers the far tails
        let tf_draw = 10f64.powf(rng.gen_range(-1.0..1.0));
        let h1b = b * dir_sq + mass;
        let fp = h1b / tf_draw.powf(p - 2.0);
        let data = FunctionData::from_parts(dir_sq, mass, fp, b);
        let params = ProblemParams::autonomous(1, p, a, b, 1.0).unwrap();

        // derivative consistency by central differences at three scales
        let tf = t_f(&data, p).unwrap();
        assert!(rel(tf, tf_draw) < 1e-12);
        for factor in [0.31, 1.0, 2.9] {
            let t = factor * tf;
            let eps = 1e-5 * t;
            let hp = (fiber_value(t + eps, &data, &params) - fiber_value(t - eps, &data, &params))
                / (2.0 * eps);
            let (h1, h2) = fiber_derivatives(t, &data, &params);
            let scale1 =
                t * data.h1b_sq + a * t.powi(3) * dir_sq * dir_sq + fp * t.powf(p - 1.0);
            assert!(
                (hp - h1).abs() <= 1e-6 * scale1,
                "draw {draw}: h' fd {hp} vs {h1} (scale {scale1})"
            );
            let hpp = (fiber_derivatives(t + eps, &data, &params).0
                - fiber_derivatives(t - eps, &data, &params).0)
                / (2.0 * eps);
            let scale2 =
                data.h1b_sq + 3.0 * a * t * t * dir_sq * dir_sq + (p - 1.0) * fp * t.powf(p - 2.0);
            assert!(
                (hpp - h2).abs() <= 1e-6 * scale2,
                "draw {draw}: h'' fd {hpp} vs {h2} (scale {scale2})"
            );
        }

        let report = critical_points(&data, &params).unwrap();
        if report.hypothesis_ok && a > 0.0 {
            hypothesis_hits += 1;
            // the hypothesis is sufficient: both roots must exist
            assert!(
                report.t_minus.is_some() && report.t_plus.is_some() && !report.tangent,
                "draw {draw}: hypothesis held but roots missing"
            );
        }
        if let (Some(tm), Some(tp), false) = (report.t_minus, report.t_plus, report.tangent) {
            two_root_cases += 1;
            for t in [tm, tp] {
                let r = reduced_residual(t, &data, a, p);
                assert!(r <= 1e-8, "draw {draw}: residual {r} at t = {t}");
            }
            // covariance: roots of the scaled datum are the roots divided by
            // the scale factor
            let lam = 3.7;
            let scaled = data.scaled(lam, p);
            let r2 = critical_points(&scaled, &params).unwrap();
            assert!(rel(r2.t_minus.unwrap(), tm / lam) < 1e-9, "draw {draw}");
            assert!(rel(r2.t_plus.unwrap(), tp / lam) < 1e-9, "draw {draw}");

            if report.hypothesis_ok && a > 0.0 {
                let d = d_of_p(p).unwrap();
                let c_star = (2.0 / (4.0 - p)).powf(1.0 / (p - 2.0));
                let chain = report.t_f < tm
                    && tm < d.sqrt() * c_star * report.t_f
                    && d.sqrt() * c_star * report.t_f < c_star * report.t_f
                    && c_star * report.t_f < tp;
                assert!(chain, "draw {draw}: ordering chain broken");
                assert_eq!(report.ordering_ok, Some(true), "draw {draw}");
                assert!(
                    report.j_t_plus.unwrap() < 0.0,
                    "draw {draw}: J at the large root must be negative under the hypothesis"
                );
                let m3 = lemma_m3_roots(&data, &params).unwrap();
                assert!(m3.ordering_ok && m3.sign_ok, "draw {draw}");
            }
        }
    }
    assert!(hypothesis_hits >= 50, "only {hypothesis_hits} hypothesis cases sampled");
    assert!(two_root_cases >= 200, "only {two_root_cases} two-root cases sampled");
}

#[test]
fn extreme_scales_stay_sign_correct() {
    // roots can sit at astronomic ray scales when p approaches 4 with a tiny
    // coupling; the analysis must never emit NaN there
    let mut rng = ChaCha8Rng::seed_from_u64(0xFEED);
    for draw in 0..50 {
        let dir_sq = 10f64.powf(rng.gen_range(-2.0..2.0));
        let mass = 10f64.powf(rng.gen_range(-2.0..2.0));
        let fp = 10f64.powf(rng.gen_range(-2.0..2.0));
        let p = rng.gen_range(3.5..3.9);
        let a = 10f64.powf(rng.gen_range(-6.0..-4.0));
        let data = FunctionData::from_parts(dir_sq, mass, fp, 1.0);
        let params = ProblemParams::autonomous(1, p, a, 1.0, 1.0).unwrap();
        let report = critical_points(&data, &params).unwrap();
        assert!(!report.t_f.is_nan(), "draw {draw}");
        if let (Some(tm), Some(tp), false) = (report.t_minus, report.t_plus, report.tangent) {
            assert!(tm.is_finite() && tp.is_finite(), "draw {draw}");
            assert!(reduced_residual(tm, &data, a, p) <= 1e-8, "draw {draw}");
            assert!(reduced_residual(tp, &data, a, p) <= 1e-8, "draw {draw}");
            // the large-root energy may overflow, but only to the correct side
            let j = report.j_t_plus.unwrap();
            assert!(!j.is_nan(), "draw {draw}: NaN energy at t_plus = {tp}");
            if report.hypothesis_ok {
                assert!(j < 0.0, "draw {draw}: J(t_plus u) = {j}");
            }
        }
    }
}

#[test]
fn roots_appear_and_vanish_across_the_fold_coupling() {
    let data = FunctionData::from_parts(2.0, 1.0, 3.0, 1.0);
    let p = 3.0;
    // the shifted map min over t of (h1b t^-2 - fp t^(p-4)) sits at this scale
    let tf = t_f(&data, p).unwrap();
    let t_star = (2.0 / (4.0 - p)).powf(1.0 / (p - 2.0)) * tf;
    let m_min = data.h1b_sq / (t_star * t_star) - data.fp * t_star.powf(p - 4.0);
    let a_fold = -m_min / (data.dir_sq * data.dir_sq);
    assert!(a_fold > 0.0);
    let below = ProblemParams::autonomous(1, p, 0.995 * a_fold, 1.0, 1.0).unwrap();
    let rb = critical_points(&data, &below).unwrap();
    assert!(rb.t_minus.is_some() && rb.t_plus.is_some() && !rb.tangent);
    let above = ProblemParams::autonomous(1, p, 1.005 * a_fold, 1.0, 1.0).unwrap();
    let ra = critical_points(&data, &above).unwrap();
    assert!(ra.t_minus.is_none() && ra.t_plus.is_none());
}

#[test]
fn filtration_split_separates_small_and_large_norms() {
    use kirchhoff_core::fibering::filtration_split;
    use kirchhoff_core::ground_state::{find_ground_state, DEFAULT_BISECT_TOL};

    let gs = find_ground_state(1, 3.0, 1.0, DEFAULT_BISECT_TOL).unwrap();
    let lambda = kirchhoff_core::constants::lambda(
        &ProblemParams::autonomous(1, 3.0, 0.0, 1.0, 1.0).unwrap(),
        gs.s_p_p,
        None,
    )
    .unwrap();
    let params = ProblemParams::autonomous(1, 3.0, 0.25 * lambda, 1.0, 1.0).unwrap();
    let raw = FunctionData::from_parts(gs.g, gs.m, gs.f_inf * gs.p_moment, 1.0);
    let report = critical_points(&raw, &params).unwrap();
    let small = raw.scaled(report.t_minus.unwrap(), 3.0);
    let large = raw.scaled(report.t_plus.unwrap(), 3.0);
    let fs_small = filtration_split(&small, &params, gs.s_p_p).unwrap();
    assert_eq!(fs_small.membership, Membership::M1);
    assert!(fs_small.sandwich_lower_ok && fs_small.sandwich_upper_ok);
    assert!(fs_small.d1 < fs_small.d2);
    let fs_large = filtration_split(&large, &params, gs.s_p_p).unwrap();
    assert!(matches!(fs_large.membership, Membership::M2 | Membership::Outside));
    // off-Nehari data must be rejected
    assert!(filtration_split(&raw.scaled(1.7 * report.t_minus.unwrap(), 3.0), &params, gs.s_p_p)
        .is_err());
}
