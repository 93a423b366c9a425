use rand::SeedableRng;
use rand_chacha::ChaCha12Rng;
use theta_core::expansion::{expand, orbit, reconstruct, Convergents};
use theta_core::measure::{khintchin_product, levy_beta};
use theta_core::monte_carlo::{
    approx_error_statistic, arithmetic_mean_trend, digit_frequency, exact_orbit_stats, float_orbit,
    geometric_mean_statistic, levy_statistic, random_rational_seed, run_ergodic, DigitCounts,
    ErgodicConfig, RngConfig,
};
use theta_core::{Error, QThetaNumber, ThetaParams};

fn p2() -> ThetaParams {
    ThetaParams::new(2).unwrap()
}

fn small_config() -> ErgodicConfig {
    ErgodicConfig {
        exact_orbits: 6,
        exact_length: 60,
        float_orbits: 6,
        float_length: 5_000,
        checkpoints: vec![100, 1_000, 5_000],
        control_cap: 50,
    }
}

#[test]
fn orbit_examples() {
    let p = p2();
    let o = orbit(&QThetaNumber::from_ratio(1, 2, 2), 10, &p).unwrap();
    assert_eq!(&o.digits.digits[..3], &[2, 2, 4]);
    let one_digit = QThetaNumber::theta_multiple(5, 2).recip().unwrap();
    let e = expand(&one_digit, 10, &p).unwrap();
    assert!(e.terminated && e.digits == vec![5]);
    // float orbits agree with exact ones on a short prefix
    let f = float_orbit(0.5, 8, &p).unwrap();
    assert_eq!(&f.digits[..3], &[2, 2, 4]);
    assert!(float_orbit(0.9, 8, &p).is_err());
}

#[test]
fn levy_statistic_sandwich() {
    let p = p2();
    let t = p.theta();
    let mut rng = ChaCha12Rng::seed_from_u64(9);
    for _ in 0..20 {
        let x = random_rational_seed(&mut rng, &p);
        let n = 50;
        let Ok(levy) = levy_statistic(&x, n, &p) else { continue };
        let o = orbit(&x, n, &p).unwrap();
        let conv = Convergents::new(&o.digits.digits, &p).unwrap();
        let lq = conv.pair(n).q.ln_abs() / n as f64;
        assert!(2.0 * lq <= levy && levy <= 2.0 * lq + (1.0 + t).ln() / n as f64);
        let s = exact_orbit_stats(&x, n, &p).unwrap();
        assert!(s.cylinder_bounds_hold && s.error_bounds_hold && s.error_identity_holds);
        assert!((s.levy - levy).abs() < 1e-12);
        assert!((s.approx_error - approx_error_statistic(&x, n, &p).unwrap()).abs() < 1e-12);
    }
}

#[test]
fn terminating_seed_has_zero_error() {
    let p = p2();
    let x = reconstruct(&[3, 2, 7], None, &p).unwrap();
    // log of a zero error is reported as termination
    assert_eq!(
        approx_error_statistic(&x, 3, &p).unwrap_err(),
        Error::Terminated { at: 3, requested: 3 }
    );
    let e = theta_core::expansion::approximation_error(&x, 3, &p).unwrap();
    assert!(e.direct.is_zero());
}

#[test]
fn mean_statistics() {
    assert!((geometric_mean_statistic(&[7; 100]).unwrap() - 7.0).abs() < 1e-13);
    let p = p2();
    let f = float_orbit(0.3, 20_000, &p).unwrap();
    assert!(geometric_mean_statistic(&f.digits).unwrap() >= 2.0);
    let trend = arithmetic_mean_trend(&f.digits, &[10, 100, 1000], None);
    assert!(trend.iter().all(|t| t.mean >= 2.0));
    let capped = arithmetic_mean_trend(&f.digits, &[10, 100, 1000], Some(10));
    assert!(capped.iter().zip(&trend).all(|(c, t)| c.mean <= t.mean && c.mean <= 10.0));
}

#[test]
fn histogram_properties() {
    let p = p2();
    let f = float_orbit(0.123_456, 50_000, &p).unwrap();
    let h = digit_frequency(&DigitCounts::from_digits(&f.digits), &p).unwrap();
    let total: f64 = h.bins.iter().map(|b| b.frequency).sum();
    assert!((total - 1.0).abs() < 1e-12);
    assert_eq!(h.total, 50_000);
    assert!(h.bins.windows(2).all(|w| w[1].law < w[0].law));
    assert!((h.bins[0].law - 0.29048).abs() < 1e-5);
    let few = DigitCounts::from_digits(&f.digits[..9_999]);
    assert!(matches!(digit_frequency(&few, &p), Err(Error::InsufficientSamples { .. })));
}

#[test]
fn config_validation() {
    let mut c = small_config();
    c.float_length = 0;
    assert!(c.validate().is_err());
    let mut c = small_config();
    c.float_orbits = 1;
    c.float_length = 100;
    assert!(matches!(c.validate(), Err(Error::InsufficientSamples { .. })));
    let mut c = small_config();
    c.checkpoints = vec![100, 100];
    assert!(c.validate().is_err());
}

#[test]
fn report_is_identical_across_thread_pools() {
    let p = p2();
    let run = |threads| {
        rayon::ThreadPoolBuilder::new()
            .num_threads(threads)
            .build()
            .unwrap()
            .install(|| serde_json::to_string(&run_ergodic(&p, &small_config(), RngConfig::new(7)).unwrap()).unwrap())
    };
    let a = run(1);
    let b = run(4);
    assert_eq!(a, b);
    assert_eq!(a, run(1));
    let other = serde_json::to_string(&run_ergodic(&p, &small_config(), RngConfig::new(8)).unwrap()).unwrap();
    assert_ne!(a, other);
}

#[test]
fn full_ensemble_m2() {
    let p = p2();
    let r = run_ergodic(&p, &ErgodicConfig::default(), RngConfig::new(42)).unwrap();
    let beta = levy_beta(&p, 1e-12).unwrap().value;
    assert!((r.beta - beta).abs() < 1e-15);
    assert!(r.beta_schemes_gap < 1e-9);
    assert!(r.exact_orbits.len() + r.terminated_seeds.len() == 20);
    assert!(r.exact_orbits.len() >= 20);
    assert!(r.exact_bounds_hold);
    assert!((r.levy.estimate - 2.0 * beta).abs() <= 0.05 * 2.0 * beta, "{:?}", r.levy);
    assert!((r.approx_error.estimate + 2.0 * beta).abs() <= 0.05 * 2.0 * beta, "{:?}", r.approx_error);
    let k = khintchin_product(&p, 1e-10).unwrap().value;
    assert!((r.geo_mean.estimate - k).abs() <= 0.02 * k);
    assert!(r.digit_histogram.total >= 1_000_000);
    assert!(r.arith_mean_increasing);
    assert_eq!(r.float_orbits_terminated, 0);
}
