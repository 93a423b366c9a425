use num_bigint::BigInt;
use num_rational::BigRational;
use proptest::prelude::*;
use rand::SeedableRng;
use rayon::prelude::*;
use rand_chacha::ChaCha12Rng;
use theta_core::expansion::{
    approximation_error, cylinder, digit_index, expand, gauss_map_apply,
    identity_check, orbit, reconstruct, Convergents,
};
use theta_core::monte_carlo::random_rational_seed;
use theta_core::{Error, QThetaNumber, ThetaParams};

fn params(m: u64) -> ThetaParams {
    ThetaParams::new(m).unwrap()
}

fn q(p: i64, d: i64, m: u64) -> QThetaNumber {
    QThetaNumber::from_ratio(p, d, m)
}

#[test]
fn params_validation() {
    assert!((params(10).theta() - 0.316228).abs() < 1e-6);
    assert!((params(17).theta() - 0.242536).abs() < 1e-6);
    for bad in [0, 1, 4, 9, 16, 100] {
        assert!(ThetaParams::new(bad).is_err(), "m = {bad}");
    }
    let p = params(7);
    let t = p.theta_exact();
    assert_eq!(&t * &t, q(1, 7, 7));
    assert!((p.theta() * p.theta() * 7.0 - 1.0).abs() <= 4.0 * f64::EPSILON);
}

#[test]
fn map_and_digit_examples() {
    let p = params(2);
    assert!(gauss_map_apply(&QThetaNumber::zero(2), &p).unwrap().is_zero());
    let quarter_inv = QThetaNumber::theta_multiple(4, 2).recip().unwrap();
    assert!(gauss_map_apply(&quarter_inv, &p).unwrap().is_zero());
    // T(1/2) = 2 - 2 theta
    let t = gauss_map_apply(&q(1, 2, 2), &p).unwrap();
    assert_eq!(t, QThetaNumber::new(BigRational::from_integer(2.into()), BigRational::from_integer((-2).into()), 2));
    assert!((t.to_f64() - 0.585786).abs() < 1e-6);
    assert_eq!(digit_index(&p.theta_exact(), &p).unwrap(), Some(2));
    assert_eq!(digit_index(&QThetaNumber::zero(2), &p).unwrap(), None);
    assert_eq!(digit_index(&q(1, 2, 2), &p).unwrap(), Some(2));
    assert!(matches!(digit_index(&q(99, 100, 2), &p), Err(Error::Domain { .. })));
    assert!(digit_index(&-0.1f64, &p).is_err());
}

#[test]
fn expansion_examples() {
    let p = params(2);
    let e = expand(&q(1, 2, 2), 3, &p).unwrap();
    assert_eq!(e.digits, vec![2, 2, 4]);
    assert!(!e.terminated);
    let one = expand(&QThetaNumber::theta_multiple(4, 2).recip().unwrap(), 5, &p).unwrap();
    assert_eq!(one.digits, vec![4]);
    assert!(one.terminated);
    let top = expand(&p.theta_exact(), 5, &p).unwrap();
    assert_eq!(top.digits, vec![2]);
    assert!(top.terminated);
}

#[test]
fn convergent_examples() {
    for m in [2u64, 3, 6] {
        let p = params(m);
        let c = Convergents::new(&[m], &p).unwrap();
        assert_eq!(c.pair(1).p, QThetaNumber::one(m));
        assert_eq!(c.pair(1).q, QThetaNumber::theta_multiple(m, m));
        assert_eq!(c.pair(1).p.checked_div(&c.pair(1).q).unwrap(), p.theta_exact());
        let c2 = Convergents::new(&[m, m], &p).unwrap();
        assert_eq!(c2.pair(2).p, QThetaNumber::theta_multiple(m, m));
        // m theta * m theta + 1 = m + 1
        assert_eq!(c2.pair(2).q, QThetaNumber::from_integer(m as i64 + 1, m));
    }
    assert!(matches!(Convergents::new(&[2, 1], &params(2)), Err(Error::DigitBelowMinimum { .. })));
}

#[test]
fn reconstruction_examples() {
    let p = params(2);
    let quarter_inv = QThetaNumber::theta_multiple(4, 2).recip().unwrap();
    assert_eq!(reconstruct(&[4], None, &p).unwrap(), quarter_inv);
    let o = orbit(&q(1, 2, 2), 3, &p).unwrap();
    assert_eq!(reconstruct(&[2, 2, 4], Some(&o.points[3]), &p).unwrap(), q(1, 2, 2));
    let left = reconstruct(&[2], Some(&p.theta_exact()), &p).unwrap();
    assert_eq!(left, QThetaNumber::theta_multiple(3, 2).recip().unwrap());
}

#[test]
fn cylinder_examples() {
    let p = params(2);
    let c = cylinder(&[2], &p).unwrap();
    // (sqrt2/3, theta]
    assert_eq!(c.lower, QThetaNumber::theta_multiple(3, 2).recip().unwrap());
    assert_eq!(c.upper, p.theta_exact());
    assert_eq!(c.normalized_measure(), q(1, 3, 2));
    assert!(c.contains(&p.theta_exact()));
    assert!(!c.contains(&c.lower));
}

#[test]
fn approximation_error_sign_and_zero() {
    let p = params(2);
    let x = q(1, 2, 2);
    let e1 = approximation_error(&x, 1, &p).unwrap();
    assert!(e1.holds());
    assert!(e1.direct.to_f64() < 0.0);
    let e2 = approximation_error(&x, 2, &p).unwrap();
    assert!(e2.holds() && e2.direct.to_f64() > 0.0);
    // a point whose expansion stops after two digits
    let x = reconstruct(&[3, 5], None, &p).unwrap();
    let e = approximation_error(&x, 2, &p).unwrap();
    assert!(e.direct.is_zero() && e.via_tail.is_zero());
}

#[test]
fn floor_examples() {
    assert_eq!(QThetaNumber::from_integer(3, 2).floor(), BigInt::from(3));
    assert_eq!(QThetaNumber::theta_multiple(4, 2).floor(), BigInt::from(2));
    let one_minus_theta = &QThetaNumber::one(2) - &QThetaNumber::theta(2);
    assert_eq!(one_minus_theta.floor(), BigInt::from(0));
    assert_eq!((-&QThetaNumber::theta(2)).floor(), BigInt::from(-1));
}

fn check_identities(x: &QThetaNumber, n_max: usize, p: &ThetaParams) {
    let c = identity_check(x, n_max, p).unwrap();
    assert!(c.all_hold(), "x = {x}: {c:?}");
    let o = orbit(x, n_max, p).unwrap();
    assert!(o.points.iter().skip(1).all(|t| t.to_f64() >= 0.0 && *t <= p.theta_exact()));
}

#[test]
fn exact_identities_on_random_rational_seeds() {
    for m in [2u64, 3, 5] {
        let p = params(m);
        let mut rng = ChaCha12Rng::seed_from_u64(1000 + m);
        let seeds: Vec<_> = (0..200).map(|_| random_rational_seed(&mut rng, &p)).collect();
        seeds.par_iter().for_each(|x| check_identities(x, 30, &p));
    }
}

fn point_in_range() -> impl Strategy<Value = (u64, i64, i64)> {
    (prop::sample::select(vec![2u64, 3, 5, 6, 7, 10]), 1i64..1_000_000, -50i64..50)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn identities_hold_on_quadratic_points((m, num, b) in point_in_range()) {
        let p = params(m);
        // a + b theta with small b, pulled into (0, theta) by scaling
        let raw = &q(num, 1_000_000, m) + &QThetaNumber::new(
            BigRational::from_integer(0.into()),
            BigRational::new(b.into(), 1000.into()),
            m,
        );
        let x = raw.abs();
        prop_assume!(!x.is_zero());
        let theta = p.theta_exact();
        let x = if x < theta { x } else { theta.checked_div(&(&x + &QThetaNumber::one(m))).unwrap() };
        prop_assume!(!x.is_zero() && x <= theta);
        check_identities(&x, 20, &p);
    }

    #[test]
    fn digits_and_map_stay_in_range(m in prop::sample::select(vec![2u64, 3, 5, 10, 17]), u in 1e-9f64..1.0) {
        let p = params(m);
        let x = u * p.theta();
        let a = digit_index(&x, &p).unwrap().unwrap();
        prop_assert!(a >= m);
        let tx = gauss_map_apply(&x, &p).unwrap();
        prop_assert!((0.0..=p.theta()).contains(&tx));
    }

    #[test]
    fn determinant_on_random_digit_strings(m in 2u64..12, extra in prop::collection::vec(0u64..40, 1..50)) {
        prop_assume!(((m as f64).sqrt() as u64).pow(2) != m);
        let p = params(m);
        let digits: Vec<u64> = extra.iter().map(|e| m + e).collect();
        let conv = Convergents::new(&digits, &p).unwrap();
        for n in 1..=digits.len() {
            let expected = if n % 2 == 1 { 1 } else { -1 };
            prop_assert_eq!(conv.determinant(n), QThetaNumber::from_integer(expected, m));
            prop_assert!(n < 2 || conv.pair(n).q > conv.pair(n - 1).q);
        }
    }
}
