use fkm_cone::certify::{
    certify_dimension, certify_fkm, certify_product, homogeneous_lists, ineq_large_c, ineq_small_c,
    sweep_fkm, to_csv, Verdict,
};
use fkm_cone::delta;
use proptest::prelude::*;

#[test]
fn sweep_is_monotone_in_n_and_rechecks() {
    let certs = sweep_fkm(2..=12, 1..=8).unwrap();
    for c in &certs {
        assert_eq!(c.recheck(), c.verdict, "{c:?}");
        if c.verdict == Verdict::Certified {
            assert!(c.margin.unwrap() > 0.0);
            assert!(c.corroboration.ineq_small_c.unwrap() > 0.0);
        }
    }
    for a in &certs {
        for b in &certs {
            let (Some(na), Some(nb)) = (a.n, b.n) else {
                continue;
            };
            if a.m == b.m
                && a.verdict == Verdict::Certified
                && nb >= na
                && b.verdict != Verdict::Invalid
            {
                // Margins need not grow: N shrinks with c = (m-1)/(n-1).
                assert_eq!(
                    b.verdict,
                    Verdict::Certified,
                    "{:?} vs {:?}",
                    (a.m, a.k),
                    (b.m, b.k)
                );
            }
        }
    }
}

#[test]
fn invalid_exactly_when_n_too_small() {
    for m in 2..=12 {
        for k in 1..=8 {
            let n = k * delta(m).unwrap() - 1;
            let c = certify_fkm(m, k).unwrap();
            assert_eq!(c.verdict == Verdict::Invalid, n < m + 1, "({m},{k})");
        }
    }
}

#[test]
fn csv_has_one_row_per_certificate() {
    let certs = sweep_fkm(2..=4, 1..=3).unwrap();
    let csv = to_csv(&certs).unwrap();
    assert_eq!(csv.lines().count(), certs.len() + 1);
    assert!(to_csv(&[]).unwrap().lines().count() == 1);
    assert!(sweep_fkm(5..=4, 1..=3).unwrap().is_empty());
}

#[test]
fn homogeneous_lists_have_requested_dimensions() {
    for f in homogeneous_lists(21..=100) {
        let d: usize = f.iter().map(|n| 2 * n - 1).sum::<usize>() + 1;
        assert!((21..=100).contains(&d));
        assert!(f.len() >= 2 && f.iter().all(|&n| n == f[0] && n >= 3));
    }
}

#[test]
fn small_products_are_not_certified() {
    assert_eq!(
        certify_product(&[3, 3]).unwrap().verdict,
        Verdict::Inconclusive
    );
    assert_eq!(certify_product(&[3]).unwrap().verdict, Verdict::Invalid);
    assert_eq!(certify_product(&[2, 5]).unwrap().verdict, Verdict::Invalid);
    assert_eq!(certify_dimension(9).unwrap().verdict, Verdict::Invalid);
}

proptest! {
    #[test]
    fn inequalities_positive_beyond_ten(n in 11u32..=10_000) {
        let n = n as f64;
        prop_assert!(ineq_large_c(n).unwrap() > 0.0);
        prop_assert!(ineq_small_c(n).unwrap() > 0.0);
    }

    #[test]
    fn product_certificates_recheck(factors in proptest::collection::vec(3usize..12, 2..5)) {
        let c = certify_product(&factors).unwrap();
        prop_assert_eq!(c.recheck(), c.verdict);
        let dim: usize = factors.iter().map(|n| 2 * n - 1).sum::<usize>() + 1;
        prop_assert_eq!(c.dim_cone, Some(dim));
        if dim >= 21 {
            prop_assert_eq!(c.verdict, Verdict::Certified);
        }
    }
}
