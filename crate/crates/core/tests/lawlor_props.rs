use fkm_cone::lawlor::{
    bound_f, germ_coefficient, limit_form, scaled_bound, vanishing_angle, vanishing_angle_with,
    Profile, SolverOptions, Termination, VanishingAngleQuery,
};
use proptest::prelude::*;

fn angle(k: usize, a2: f64, profile: Profile) -> Option<f64> {
    vanishing_angle(&VanishingAngleQuery::new(k, a2.sqrt(), profile).unwrap())
        .unwrap()
        .theta
}

/// RK4 from the same germ on the grid `h_i = min(h, t_i / 50)`, which is
/// geometric near 0 where the germ is unstable; the root is located by
/// bisection on a single step. `refine` splits every step into that many.
fn rk4_theta(k: usize, alpha: f64, profile: char, h: f64, refine: usize) -> Option<f64> {
    let kf = k as f64;
    let p = |t: f64| match profile {
        'b' => bound_f(alpha, t, k - 1).unwrap(),
        _ => limit_form(alpha, t),
    };
    let rhs = |t: f64, g: f64| {
        let pt = p(t);
        let rad = (pt * pt * (1.0 + t * t) - g * g).max(0.0);
        kf * (t * g - rad.sqrt()) / (1.0 + t * t)
    };
    let step = |t: f64, g: f64, h: f64| {
        let k1 = rhs(t, g);
        let k2 = rhs(t + h / 2.0, g + h / 2.0 * k1);
        let k3 = rhs(t + h / 2.0, g + h / 2.0 * k2);
        let k4 = rhs(t + h, g + h * k3);
        g + h / 6.0 * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    };
    let a = germ_coefficient(k, alpha * alpha)?;
    let mut t = 1e-5;
    let mut g = 1.0 - a * t * t;
    while t < 10.0 {
        let big = h.min(t / 50.0);
        let hs = big / refine as f64;
        for _ in 0..refine {
            let next = step(t, g, hs);
            if next <= 0.0 {
                let (mut lo, mut hi) = (0.0, hs);
                while hi - lo > 1e-15 {
                    let mid = 0.5 * (lo + hi);
                    if step(t, g, mid) > 0.0 {
                        lo = mid;
                    } else {
                        hi = mid;
                    }
                }
                return Some((t + 0.5 * (lo + hi)).atan());
            }
            g = next;
            t += hs;
        }
    }
    None
}

/// `(k, α², profile, θ)` with `θ` from an independent DOP853 integration of
/// the same germ at relative tolerance 1e-13.
const REFERENCE: &[(usize, f64, char, f64)] = &[
    (12, 0.0, 'b', 0.1389791944503954),
    (12, 10.0, 'b', 0.15204534993999455),
    (12, 17.85, 'b', 0.17755133509948579),
    (12, 17.85, 'l', 0.18232429148986964),
    (12, 19.0, 'l', 0.1955316373575538),
    (20, 40.0, 'b', 0.09310207187669656),
    (40, 100.0, 'l', 0.04259486168226175),
];

#[test]
fn adaptive_solver_matches_independent_integrators() {
    for &(k, a2, pr, reference) in REFERENCE {
        let alpha = a2.sqrt();
        let coarse = rk4_theta(k, alpha, pr, 2e-4, 1).unwrap();
        let fine = rk4_theta(k, alpha, pr, 2e-4, 2).unwrap();
        let rich = fine + (fine - coarse) / 15.0;
        let profile = if pr == 'b' {
            Profile::BoundF
        } else {
            Profile::Limit
        };
        let theta = angle(k, a2, profile).unwrap();
        assert!(
            (rich - reference).abs() < 1e-8,
            "k={k} a2={a2}: rk4 {rich} vs reference {reference}"
        );
        assert!(
            (theta - reference).abs() < 1e-7,
            "k={k} a2={a2}: {theta} vs reference {reference}"
        );
    }
}

#[test]
fn angle_stable_under_tolerance_refinement() {
    let q = VanishingAngleQuery::new(12, 0.0, Profile::BoundF).unwrap();
    let base = vanishing_angle(&q).unwrap().theta.unwrap();
    let finer = vanishing_angle_with(
        &q,
        &SolverOptions {
            rtol: 1e-13,
            ..Default::default()
        },
    )
    .unwrap()
    .theta
    .unwrap();
    assert!(base > 0.0);
    assert!((base - finer).abs() < 1e-8, "{base} vs {finer}");
}

#[test]
fn existence_and_angle_monotone_in_alpha() {
    for profile in [Profile::BoundF, Profile::Limit] {
        let mut prev: Option<f64> = Some(0.0);
        for i in 0..20 {
            let a2 = 1.0 + 24.0 * i as f64 / 19.0;
            let theta = angle(12, a2, profile.clone());
            match (prev, theta) {
                (None, Some(_)) => panic!("existence returned at a2 = {a2}"),
                (Some(p), Some(t)) => assert!(t > p, "a2 = {a2}: {t} <= {p}"),
                _ => {}
            }
            prev = theta;
        }
    }
}

#[test]
fn scaling_bound_is_strict() {
    for &k in &[14usize, 18, 24, 40] {
        for &inner in &[5.0f64, 10.0, 15.0, 17.85] {
            let alpha = inner.sqrt() * k as f64 / 12.0;
            let sb = scaled_bound(k, alpha).unwrap();
            let bound = sb.tan_bound.expect("inner angle exists");
            let direct = angle(k, alpha * alpha, Profile::Limit)
                .expect("direct angle exists")
                .tan();
            assert!(direct < bound, "k={k} inner={inner}: {direct} >= {bound}");
        }
    }
}

#[test]
fn no_germ_beyond_discriminant() {
    let r = vanishing_angle(&VanishingAngleQuery::new(12, 30f64.sqrt(), Profile::BoundF).unwrap())
        .unwrap();
    assert_eq!(r.termination, Termination::NoGerm);
    assert!(!r.exists && r.theta.is_none());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn limit_form_is_below_bound(alpha in 0.1f64..10.0, t in 0.0f64..2.0, d in 2usize..200) {
        let x = alpha * t;
        let b = bound_f(alpha, t, d).unwrap();
        let l = limit_form(alpha, t);
        prop_assume!(x * ((d as f64 - 1.0) / d as f64).sqrt() < 1.0);
        prop_assert!(l <= b + 1e-12 * (1.0 + b.abs()), "{l} > {b}");
    }

    #[test]
    fn bound_profile_gives_smaller_angle(a2 in 1.0f64..19.0) {
        let b = angle(12, a2, Profile::BoundF);
        let l = angle(12, a2, Profile::Limit);
        if let Some(l) = l {
            let b = b.expect("bound-F exists whenever the limit form does");
            prop_assert!(b <= l + 1e-12);
        }
    }

    #[test]
    fn angle_grows_with_alpha_at_fixed_dim(k in 13usize..40, f1 in 0.05f64..0.9, f2 in 0.05f64..0.9) {
        let top = ((k as f64 - 2.0) / 2.0).powi(2);
        let (lo, hi) = (f1.min(f2) * top * 0.5, f1.max(f2) * top * 0.5);
        prop_assume!(hi - lo > 1e-3);
        if let Some(t_hi) = angle(k, hi, Profile::BoundF) {
            let t_lo = angle(k, lo, Profile::BoundF).expect("existence is monotone");
            prop_assert!(t_lo < t_hi);
        }
    }
}

#[test]
fn numeric_bound_and_limit_angles_are_ordered() {
    use fkm_cone::clifford::build_system;
    use fkm_cone::foliation::sample_minimal_point;
    use fkm_cone::frames::{build_frame, profile_from_operators, shape_operators};
    use fkm_cone::lawlor::TabulatedProfile;

    for (m, k) in [(3usize, 3usize), (2, 6), (4, 3)] {
        let sys = build_system(m, k).unwrap();
        let (n, dim) = (sys.n(), 2 * sys.n());
        let a2 = 6.0 * (n as f64 - 1.0);
        let p = sample_minimal_point(&sys, 1, 0).unwrap();
        let ops = shape_operators(&sys, &build_frame(&sys, &p).unwrap()).unwrap();
        let tmax = 4.0 / a2.sqrt();
        let ts: Vec<f64> = (0..=400).map(|i| tmax * i as f64 / 400.0).collect();
        let ps = profile_from_operators(&ops, &ts)
            .iter()
            .map(|q| q.det_min)
            .collect();
        let tab = TabulatedProfile::new(a2, ts, ps).unwrap();
        let t0 = angle(dim, a2, Profile::Numeric(tab)).expect("numeric angle");
        let t1 = angle(dim, a2, Profile::BoundF).expect("bound-F angle");
        let t2 = angle(dim, a2, Profile::Limit).expect("limit angle");
        assert!(t0 <= t1 && t1 <= t2, "({m},{k}): {t0} {t1} {t2}");
    }
}
