use std::f64::consts::{FRAC_PI_2, PI};

use dslkit::angles::{
    lifted_angle, spacetime_angle, spacetime_angle_schur, spacetime_angle_spectral,
};
use dslkit::envelope::{
    rooftop_envelope, solve_dsl_dirichlet, BoundaryData, DslDirichletProblem, RooftopProblem,
};
use dslkit::error::DslError;
use dslkit::harness::sampling::{
    sample_in_branch, sample_orthogonal, sample_sym_with_angle, sample_vector,
};
use dslkit::harness::{run_suite, SuiteName, SuiteSpec};
use dslkit::linalg::{
    complex_det, eig_complex_spacetime, eig_sym, spacetime_pencil, SpaceTimeMatrix, SymMatrix,
};
use dslkit::subequations::{
    in_dual_f, in_f, in_fcal, in_p, plane_to_slice, AffinePlane2D, DslBranch, SlBranch,
};
use dslkit::transforms::{
    legendre_down, legendre_up, pullback_slice, shear_conjugate, tau_grid, uniform_grid,
    GridFunction1D, GridFunction2D,
};
use proptest::prelude::*;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn sym(n: usize, e: &[f64]) -> SymMatrix {
    let mut k = 0;
    SymMatrix::from_upper_fn(n, |_, _| {
        k += 1;
        e[k - 1]
    })
}

fn st(n: usize, e: &[f64]) -> SpaceTimeMatrix {
    SpaceTimeMatrix::from_sym(&sym(n + 1, e)).unwrap()
}

fn entries(order: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-3.0f64..3.0, order * (order + 1) / 2)
}

/// `(n, upper-triangle entries of an (n+1)×(n+1) matrix)`
fn spacetime() -> impl Strategy<Value = (usize, Vec<f64>)> {
    (1usize..=4).prop_flat_map(|n| (Just(n), entries(n + 1)))
}

fn rotate(a: &SpaceTimeMatrix, q: &[f64]) -> SpaceTimeMatrix {
    let n = a.n();
    SpaceTimeMatrix {
        a00: a.a00,
        a_vec: (0..n)
            .map(|j| (0..n).map(|k| q[k * n + j] * a.a_vec[k]).sum())
            .collect(),
        a_plus: a.a_plus.congruence(q),
    }
}

fn random_psd(order: usize, rng: &mut ChaCha8Rng) -> SymMatrix {
    let b: Vec<f64> = (0..order * order)
        .map(|_| rng.random_range(-1.0..1.0))
        .collect();
    SymMatrix::from_upper_fn(order, |i, j| {
        (0..order)
            .map(|k| b[i * order + k] * b[j * order + k])
            .sum()
    })
}

fn theta_2x2(a: f64, b: f64, c: f64) -> f64 {
    let m = 0.5 * (a + c);
    let r = (0.25 * (a - c) * (a - c) + b * b).sqrt();
    (m + r).atan() + (m - r).atan()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn eig_sym_is_orthogonally_invariant(n in 1usize..=5, e in prop::collection::vec(-3.0f64..3.0, 15), seed: u64) {
        let b = sym(n, &e);
        let q = sample_orthogonal(n, &mut ChaCha8Rng::seed_from_u64(seed));
        let (l0, l1) = (eig_sym(&b), eig_sym(&b.congruence(&q)));
        for (x, y) in l0.iter().zip(&l1) {
            prop_assert!((x - y).abs() <= 1e-10 * (1.0 + b.max_abs()));
        }
    }

    #[test]
    fn pencil_spectrum_right_half_plane((n, e) in spacetime(), bump in 0.1f64..1.0) {
        let mut a = st(n, &e);
        if a.a_vec_inf_norm() < 0.1 {
            a.a_vec[0] = bump;
        }
        let s = eig_complex_spacetime(&a).unwrap();
        for l in &s.values {
            prop_assert!(l.re > 1e-10, "{l}");
        }
    }

    #[test]
    fn pencil_nonsingular_when_time_slot_nonzero((n, e) in spacetime(), a00 in 0.1f64..3.0, sign: bool) {
        let mut a = st(n, &e);
        a.a00 = if sign { a00 } else { -a00 };
        for l in eig_complex_spacetime(&a).unwrap().values {
            prop_assert!(l.norm() > 1e-10);
        }
    }

    #[test]
    fn pencil_product_matches_determinant((n, e) in spacetime()) {
        let a = st(n, &e);
        let p = eig_complex_spacetime(&a).unwrap().product();
        let d = complex_det(&spacetime_pencil(&a));
        prop_assert!((p - d).norm() <= 1e-8 * d.norm().max(1e-300) + 1e-12, "{p} vs {d}");
    }

    #[test]
    fn angles_are_rotation_invariant((n, e) in spacetime(), seed: u64) {
        let a = st(n, &e);
        prop_assume!(a.a00.abs().max(a.a_vec_inf_norm()) > 1e-6);
        let q = sample_orthogonal(n, &mut ChaCha8Rng::seed_from_u64(seed));
        let b = &a.a_plus;
        prop_assert!((lifted_angle(b).radians - lifted_angle(&b.congruence(&q)).radians).abs() <= 1e-9);
        let t0 = spacetime_angle(&a).unwrap().radians;
        let t1 = spacetime_angle(&rotate(&a, &q)).unwrap().radians;
        prop_assert!((t0 - t1).abs() <= 1e-9, "{t0} vs {t1}");
    }

    #[test]
    fn angle_is_odd_off_singular_class((n, e) in spacetime()) {
        let a = st(n, &e);
        prop_assume!(a.a00.abs().max(a.a_vec_inf_norm()) > 1e-6);
        let t = spacetime_angle(&a).unwrap().radians;
        let m = spacetime_angle(&a.neg()).unwrap().radians;
        prop_assert!((t + m).abs() <= 1e-9, "{t} vs {m}");
    }

    #[test]
    fn psd_shift_does_not_lower_angle((n, e) in spacetime(), seed: u64) {
        let a = st(n, &e);
        let p = random_psd(n + 1, &mut ChaCha8Rng::seed_from_u64(seed));
        let ap = SpaceTimeMatrix::from_sym(&a.to_sym().add(&p)).unwrap();
        let t0 = spacetime_angle(&a).unwrap().radians;
        let t1 = spacetime_angle(&ap).unwrap().radians;
        prop_assert!(t1 >= t0 - 1e-9, "{t0} -> {t1}");
    }

    #[test]
    fn one_sided_limits_at_singular_class(n in 1usize..=4, e in prop::collection::vec(-3.0f64..3.0, 10)) {
        let ap = sym(n, &e);
        let base = lifted_angle(&ap).radians;
        let at = |eps: f64| spacetime_angle(&SpaceTimeMatrix::block_diag(eps, ap.clone())).unwrap().radians;
        prop_assert_eq!(at(0.0), base + FRAC_PI_2);
        for k in [3, 5, 7] {
            let eps = 10f64.powi(-k);
            prop_assert!((at(eps) - base - FRAC_PI_2).abs() <= 1e-6);
            prop_assert!((at(-eps) - base + FRAC_PI_2).abs() <= 1e-6);
        }
    }

    #[test]
    fn lifted_angle_range(n in 1usize..=5, e in prop::collection::vec(-50.0f64..50.0, 15)) {
        let t = lifted_angle(&sym(n, &e)).radians;
        let half = n as f64 * FRAC_PI_2;
        prop_assert!(t > -half && t < half);
    }

    #[test]
    fn shear_preserves_angle_on_both_routes((n, e) in spacetime(), v in prop::collection::vec(-2.0f64..2.0, 4)) {
        let a = st(n, &e);
        prop_assume!(a.a00.abs().max(a.a_vec_inf_norm()) > 1e-6);
        let v = &v[..n];
        let av = shear_conjugate(&a, v);
        prop_assert_eq!(&av.a_plus, &pullback_slice(&a, v));
        let d1 = spacetime_angle_spectral(&a).unwrap().radians - spacetime_angle_spectral(&av).unwrap().radians;
        let d2 = spacetime_angle_schur(&a).unwrap().radians - spacetime_angle_schur(&av).unwrap().radians;
        prop_assert!(d1.abs() <= 1e-8 && d2.abs() <= 1e-8, "{d1} {d2}");
    }

    #[test]
    fn pullback_is_linear((n, e) in spacetime(), f in prop::collection::vec(-3.0f64..3.0, 15), v in prop::collection::vec(-2.0f64..2.0, 4), s in -2.0f64..2.0) {
        let (a, b) = (st(n, &e), st(n, &f));
        let v = &v[..n];
        let combo = SpaceTimeMatrix::from_sym(&a.to_sym().add(&b.to_sym().scaled(s))).unwrap();
        let lhs = pullback_slice(&combo, v);
        let rhs = pullback_slice(&a, v).add(&pullback_slice(&b, v).scaled(s));
        for i in 0..n {
            for j in 0..n {
                prop_assert!((lhs.get(i, j) - rhs.get(i, j)).abs() <= 1e-12 * (1.0 + rhs.max_abs()));
            }
        }
    }

    #[test]
    fn legendre_down_is_monotone_and_up_down_below(vals in prop::collection::vec(-2.0f64..2.0, 9 * 5), bump in prop::collection::vec(0.0f64..1.0, 9 * 5)) {
        let (ts, xs) = (uniform_grid(0.0, 1.0, 9), uniform_grid(-1.0, 1.0, 5));
        let u = GridFunction2D::new(ts.clone(), xs.clone(), vals.clone()).unwrap();
        let w = GridFunction2D::new(ts.clone(), xs, vals.iter().zip(&bump).map(|(a, b)| a + b).collect()).unwrap();
        let taus = tau_grid(40.0, 33);
        let (us, ws) = (legendre_down(&u, &taus).unwrap(), legendre_down(&w, &taus).unwrap());
        for (a, b) in us.values.iter().zip(&ws.values) {
            prop_assert!(a <= b);
        }
        let uss = legendre_up(&us, &ts).unwrap();
        for (a, b) in uss.values.iter().zip(&u.values) {
            prop_assert!(*a <= b + 1e-12);
        }
    }

    #[test]
    fn dual_matches_set_theoretic_definition(a in -3.0f64..3.0, b in -3.0f64..3.0, c in -3.0f64..3.0, phase in -3.0f64..3.0) {
        let m = SymMatrix::from_rows(&[vec![a, b], vec![b, c]]).unwrap();
        let theta = theta_2x2(a, b, c);
        prop_assume!((theta + phase).abs() > 1e-9);
        // −A lies in the interior {θ̃ > c} of F_c
        let neg_interior = theta_2x2(-a, -b, -c) > phase;
        prop_assert_eq!(in_dual_f(&m, &SlBranch::new(2, phase).unwrap(), 0.0).unwrap(), !neg_interior);
    }

    #[test]
    fn upper_branches_are_psd(n in 1usize..=5, frac in 0.0f64..0.999, seed: u64) {
        let c = (n as f64 - 1.0) * FRAC_PI_2;
        let target = c + frac * FRAC_PI_2;
        let b = sample_sym_with_angle(n, target, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        prop_assert!(in_f(&b, &SlBranch::new(n, c).unwrap(), 1e-9).unwrap());
        prop_assert!(in_p(&b, 1e-9 * (1.0 + b.max_abs())));
    }

    #[test]
    fn branch_closed_under_psd_shift(n in 1usize..=3, top: bool, seed: u64) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let c = (n as f64 - 1.0 + if top { 1.0 } else { 0.0 }) * FRAC_PI_2;
        let br = DslBranch::new(n, c).unwrap();
        let a = sample_in_branch(&br, &mut rng).unwrap();
        let p = random_psd(n + 1, &mut rng);
        let ap = SpaceTimeMatrix::from_sym(&a.to_sym().add(&p)).unwrap();
        prop_assert!(in_fcal(&ap, &br, 1e-9).unwrap());
        let v = sample_vector(n, &mut rng, 3.0);
        let theta = spacetime_angle(&a).unwrap().radians;
        prop_assert!(lifted_angle(&pullback_slice(&a, &v)).radians >= theta - FRAC_PI_2 - 1e-8);
    }

    #[test]
    fn rooftop_is_feasible_and_maximal(h in prop::collection::vec(-1.0f64..1.0, 17), fl in -1.0f64..1.0, fr in -1.0f64..1.0, a in -1.2f64..1.2, seed: u64) {
        let xs = uniform_grid(-1.0, 1.0, 17);
        let p = RooftopProblem::new(-1.0, 1.0, GridFunction1D::new(xs, h).unwrap(), [fl, fr], a).unwrap();
        let w = rooftop_envelope(&p);
        let tol = 1e-8;
        let m = a.tan();
        let dx = w.xs[1] - w.xs[0];
        let barrier = p.barrier();
        let d2 = |v: &[f64], j: usize| v[j + 1] - 2.0 * v[j] + v[j - 1] - m * dx * dx;
        for (b, v) in barrier.iter().zip(&w.values) {
            prop_assert!(*v <= b.1 + tol);
        }
        for j in 1..w.len() - 1 {
            prop_assert!(d2(&w.values, j) >= -tol);
        }
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        for _ in 0..32 {
            let j = rng.random_range(1..w.len() - 1);
            let mut raised = w.values.clone();
            raised[j] += 10.0 * tol;
            let blocked = raised[j] > barrier[j].1 + tol || d2(&raised, j) < -tol;
            prop_assert!(blocked, "node {j} could be raised");
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn solver_is_monotone_in_data(c in 0.05f64..PI - 0.05, p in prop::collection::vec(-1.0f64..1.0, 4), bump in 0.0f64..0.5, k in 0.5f64..2.0) {
        let g = |t: f64, x: f64| p[0] * (t * t + x * x) + p[1] * t * x + p[2] * (2.0 * x + t).sin() + p[3] * t;
        let gp = |t: f64, x: f64| g(t, x) + bump * (1.0 + (k * (x - t)).sin().powi(2));
        let n = 17;
        let solve = |f: &dyn Fn(f64, f64) -> f64| {
            let b = BoundaryData::from_fn(-1.0, 1.0, n, n, f).unwrap();
            solve_dsl_dirichlet(&DslDirichletProblem::new(c, n, n, None, b).unwrap()).unwrap()
        };
        let (u, up) = (solve(&g), solve(&gp));
        for (a, b) in u.values.iter().zip(&up.values) {
            prop_assert!(*a <= b + 1e-9, "{a} > {b}");
        }
    }
}

#[test]
fn plane_to_slice_residual_on_random_planes() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for trial in 0..10_000 {
        let n = 2 + trial % 4;
        let mut draw = || -> (f64, Vec<f64>) {
            (rng.random_range(-2.0..2.0), sample_vector(n, &mut rng, 2.0))
        };
        let (base, h1, h2) = (draw(), draw(), draw());
        let plane = AffinePlane2D::new(base.clone(), h1.clone(), h2.clone()).unwrap();
        let s = plane_to_slice(&plane).unwrap();
        for (s_, r_) in [(0.0, 0.0), (1.0, 0.0), (0.0, 1.0), (0.7, -1.3)] {
            let (t, x) = plane.point(s_, r_);
            let on = s.t0 + s.v.iter().zip(&x).map(|(v, x)| v * x).sum::<f64>();
            let mag: f64 = s.t0.abs() + s.v.iter().zip(&x).map(|(v, x)| (v * x).abs()).sum::<f64>();
            assert!(
                (on - t).abs() <= 1e-10 * (1.0 + mag),
                "trial {trial}: {} vs {t}, mag {mag}",
                on
            );
        }
    }
}

#[test]
fn time_like_plane_has_no_slice() {
    let h = AffinePlane2D::new(
        (0.3, vec![1.0, 2.0]),
        (1.0, vec![0.0, 0.0]),
        (0.0, vec![1.0, 0.0]),
    )
    .unwrap();
    assert!(matches!(plane_to_slice(&h), Err(DslError::NoSlice)));
    let h = AffinePlane2D::new(
        (0.0, vec![0.0; 3]),
        (1.0, vec![1.0, 2.0, 0.0]),
        (0.0, vec![2.0, 4.0, 0.0]),
    )
    .unwrap();
    assert!(matches!(plane_to_slice(&h), Err(DslError::NoSlice)));
}

#[test]
fn suite_reports_are_reproducible() {
    for name in [SuiteName::StarProduct, SuiteName::RooftopProps] {
        let spec = SuiteSpec::new(name, vec![1, 2], 50, 9);
        let (mut a, mut b) = (run_suite(&spec).unwrap(), run_suite(&spec).unwrap());
        a.runtime_ms = 0;
        b.runtime_ms = 0;
        assert_eq!(
            serde_json::to_string(&a).unwrap(),
            serde_json::to_string(&b).unwrap()
        );
    }
}
