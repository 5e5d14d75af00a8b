use inlsv_core::exponents::{
    gamma_c, is_admissible, l4_splitting_pair, range_exponents, remark_pairs, sigma_c, Admissibility, Exponent,
    PairClass,
};
use num_rational::Ratio;
use proptest::prelude::*;

type Q = Ratio<i64>;

fn q(n: i64, d: i64) -> Q {
    Ratio::new(n, d)
}

#[test]
fn remark_pairs_exhaustive_sample() {
    let rules = Admissibility::DEFAULT;
    let mut checked = 0;
    for i in 0..20 {
        let b = (i as f64 + 0.5) / 20.0;
        let (lo, hi) = ((4.0 - 2.0 * b) / 3.0, 4.0 - 2.0 * b);
        for j in 0..20 {
            let alpha = lo + (hi - lo) * (j as f64 + 0.5) / 20.0;
            for k in 1..=10 {
                let theta = 0.005 * k as f64;
                let p = remark_pairs(theta, alpha, b, &rules).unwrap();
                assert!(
                    p.qr_in_s0 && p.kr_in_s_gamma && p.mr_in_s_minus_gamma,
                    "(theta, alpha, b) = ({theta}, {alpha}, {b}): {p:?}"
                );
                checked += 1;
            }
        }
    }
    assert_eq!(checked, 4000);
}

#[test]
fn remark_pairs_exact_points() {
    let rules = Admissibility::exact();
    let p = remark_pairs(q(0, 1), q(2, 1), q(1, 2), &rules).unwrap();
    assert_eq!((p.q, p.r), (q(16, 7), q(24, 5)));
    assert_eq!(q(2, 1) / p.q + q(3, 1) / p.r, q(3, 2));
    assert!(!p.r_in_2_3);
    let p = remark_pairs(q(0, 1), q(2, 1), q(0, 1), &rules).unwrap();
    assert_eq!((p.q, p.r), (q(8, 3), q(4, 1)));
    // strictly inside, exact membership for a small positive theta
    let p = remark_pairs(q(1, 100), q(2, 1), q(1, 2), &rules).unwrap();
    assert!(p.qr_in_s0 && p.kr_in_s_gamma && p.mr_in_s_minus_gamma && !p.r_in_2_3);
}

#[test]
fn admissibility_examples() {
    let rules = Admissibility::exact();
    let s0 = |a: Exponent<Q>, b: Exponent<Q>| is_admissible(a, b, PairClass::S0, q(2, 1), q(1, 2), &rules);
    assert!(s0(Exponent::Infinite, Exponent::Finite(q(2, 1))));
    assert!(!s0(Exponent::Finite(q(2, 1)), Exponent::Infinite));
    assert!(s0(Exponent::Finite(q(4, 1)), Exponent::Finite(q(3, 1))));
    assert!(!s0(Exponent::Finite(q(4, 1)), Exponent::Finite(q(4, 1))));
}

#[test]
fn exact_examples() {
    assert_eq!(gamma_c(q(2, 1), q(1, 2)), q(3, 4));
    assert_eq!(sigma_c(q(2, 1), q(0, 1)).unwrap(), q(1, 1));
    assert_eq!(sigma_c(q(2, 1), q(1, 2)).unwrap(), q(1, 3));
    assert!(sigma_c(q(1, 1), q(1, 2)).is_err());
    let r = range_exponents(q(1, 2));
    assert_eq!((r.two_star, r.two_lower_star), (q(3, 1), q(1, 1)));
}

proptest! {
    #[test]
    fn sigma_identity(b in 0.0f64..0.999, t in 0.001f64..0.999) {
        let alpha = (4.0 - 2.0 * b) * (1.0 / 3.0 + 2.0 / 3.0 * t);
        let g = gamma_c(alpha, b);
        prop_assert!((sigma_c(alpha, b).unwrap() - (1.0 - g) / g).abs() < 1e-12);
    }

    #[test]
    fn sigma_identity_rational(bn in 0i64..60, an in 1i64..60) {
        let b = q(bn, 60);
        let lo = (q(4, 1) - q(2, 1) * b) / q(3, 1);
        let alpha = lo + (q(4, 1) - q(2, 1) * b - lo) * q(an, 60);
        let g = gamma_c(alpha, b);
        prop_assert_eq!(sigma_c(alpha, b).unwrap(), (q(1, 1) - g) / g);
    }

    #[test]
    fn splitting_pair(num in 1i64..=1000) {
        let eps = q(num, 1000);
        let (a, r) = l4_splitting_pair(eps);
        prop_assert!(r >= q(2, 1) && r < q(3, 1));
        for alpha in [q(3, 2), q(2, 1), q(7, 2)] {
            prop_assert!(is_admissible(Exponent::Finite(a), Exponent::Finite(r), PairClass::S0, alpha, q(0, 1), &Admissibility::exact()));
        }
    }

    #[test]
    fn gamma_classes_scale(b in 0.01f64..0.99, t in 0.01f64..0.99, s in 0.01f64..0.99) {
        // any l strictly inside (3 alpha/(2-b), 6) yields a pair on each gamma line
        let alpha = (4.0 - 2.0 * b) * (1.0 / 3.0 + 2.0 / 3.0 * t);
        let lo = 3.0 * alpha / (2.0 - b);
        let l = lo + (6.0 - lo) * s;
        let target = (2.0 - b) / alpha;
        let k = 2.0 / (target - 3.0 / l);
        if k >= 1.0 {
            prop_assert!(is_admissible(Exponent::Finite(k), Exponent::Finite(l), PairClass::SGammaC, alpha, b, &Admissibility::DEFAULT));
        }
        prop_assert!(!is_admissible(Exponent::Finite(2.0), Exponent::Finite(6.0), PairClass::SGammaC, alpha, b, &Admissibility::DEFAULT));
    }
}
