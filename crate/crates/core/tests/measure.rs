use theta_core::measure::{
    constants_report, contraction_km, contraction_q, digit_law, entropy, khintchin_product,
    levy_beta, rohlin_entropy, GammaTheta,
};
use theta_core::quadrature::adaptive_gk15;
use theta_core::series::CompensatedSum;
use theta_core::ThetaParams;

fn params(m: u64) -> ThetaParams {
    ThetaParams::new(m).unwrap()
}

fn ln_norm(m: u64) -> f64 {
    (1.0 / m as f64).ln_1p()
}

/// `beta` from the geometric expansion of `1/(1 + theta x)` over all of
/// `[0, theta]`, using `int_0^theta x^k log x = theta^(k+1) (log theta/(k+1) - 1/(k+1)^2)`.
fn beta_series(m: u64) -> f64 {
    let t = 1.0 / (m as f64).sqrt();
    let lt = t.ln();
    let mut acc = CompensatedSum::new();
    let mut pow = t * t; // theta^(2k+2)
    for k in 0..200 {
        let kp = (k + 1) as f64;
        let sign = if k % 2 == 0 { 1.0 } else { -1.0 };
        acc.add(sign * pow * (lt / kp - 1.0 / (kp * kp)));
        pow *= t * t;
    }
    -acc.value() / ln_norm(m)
}

// int_a^inf log x / x^n dx
fn log_power_tail(a: f64, n: i32) -> f64 {
    let n1 = (n - 1) as f64;
    a.powf(-n1) * (a.ln() / n1 + 1.0 / (n1 * n1))
}

/// Khintchin sum by brute force to `K`, then the midpoint-integral tail of
/// `log x / (x (x + 2))` expanded as `1/x^2 - 2/x^3 + 4/x^4`.
fn khintchin_direct(m: u64) -> f64 {
    const K: u64 = 1_000_000;
    let mut acc = CompensatedSum::new();
    for k in m..=K {
        let k = k as f64;
        acc.add(k.ln() * (1.0 / (k * (k + 2.0))).ln_1p());
    }
    let a = K as f64 + 0.5;
    acc.add(log_power_tail(a, 2) - 2.0 * log_power_tail(a, 3) + 4.0 * log_power_tail(a, 4));
    (acc.value() / ln_norm(m)).exp()
}

/// `q` by direct summation to `K` and a Simpson integral of the tail in `t = 1/x`.
fn q_direct(m: u64) -> f64 {
    const K: u64 = 100_000;
    let mf = m as f64;
    let term = |i: f64| mf / (i.powi(3) * (i + 1.0)) + (i + 1.0 - mf) / (i * (i + 1.0).powi(3));
    let mut acc = CompensatedSum::new();
    for i in m..=K {
        acc.add(term(i as f64));
    }
    let g = |t: f64| mf * t * t / (1.0 + t) + (1.0 + t - mf * t) * t / (1.0 + t).powi(3);
    let b = 1.0 / (K as f64 + 0.5);
    let n = 200;
    let h = b / n as f64;
    let mut simpson = g(0.0) + g(b);
    for j in 1..n {
        simpson += if j % 2 == 1 { 4.0 } else { 2.0 } * g(j as f64 * h);
    }
    acc.add(simpson * h / 3.0);
    mf * acc.value()
}

#[test]
fn gamma_cdf_examples_and_domain() {
    let g = GammaTheta::new(params(2));
    assert_eq!(g.cdf(0.0).unwrap(), 0.0);
    assert!((g.cdf(params(2).theta()).unwrap() - 1.0).abs() < 1e-15);
    let expect = (1.0 + 0.5 / 2f64.sqrt()).ln() / 1.5f64.ln();
    assert!((g.cdf(0.5).unwrap() - expect).abs() < 1e-15);
    assert!((g.cdf(0.5).unwrap() - 0.746632).abs() < 1e-6);
    assert!(g.cdf(0.8).is_err());
    assert!(g.cdf(-1e-3).is_err());
    assert!(g.gk_limit_cdf(2.0).is_err());
}

#[test]
fn gk_limit_equals_invariant_cdf() {
    for m in [2, 3, 5, 10, 17] {
        let g = GammaTheta::new(params(m));
        let t = params(m).theta();
        assert!(g.gk_limit_cdf(0.0).unwrap().abs() < 1e-15);
        for j in 0..=1000 {
            let x = t * j as f64 / 1000.0;
            let d = (g.gk_limit_cdf(x).unwrap() - g.cdf(x).unwrap()).abs();
            assert!(d < 1e-14, "m = {m}, x = {x}, diff = {d}");
        }
    }
}

#[test]
fn gamma_is_invariant_under_the_map() {
    // gamma(T^{-1}[0, x]) = sum_i [F(1/(i theta)) - F(1/(i theta + x))]; beyond N the
    // terms telescope to log((N + 1 + x/theta)/(N + 1))/log(1 + theta^2)
    const N: u64 = 2000;
    for m in [2, 3, 10] {
        let p = params(m);
        let t = p.theta();
        let g = GammaTheta::new(p);
        for j in 0..=20 {
            let x = t * j as f64 / 20.0;
            let mut acc = CompensatedSum::new();
            for i in m..=N {
                let it = i as f64 * t;
                acc.add(g.cdf((1.0 / it).min(t)).unwrap() - g.cdf(1.0 / (it + x)).unwrap());
            }
            let n1 = (N + 1) as f64;
            acc.add(((n1 + x / t) / n1).ln() / ln_norm(m));
            let d = (acc.value() - g.cdf(x).unwrap()).abs();
            assert!(d < 1e-10, "m = {m}, x = {x}, diff = {d}");
        }
    }
}

#[test]
fn digit_law_normalizes_and_decreases() {
    for m in [2, 3, 5, 10, 17] {
        const K: u64 = 100_000;
        let mut acc = CompensatedSum::new();
        let mut prev = f64::INFINITY;
        for k in m..=K {
            let p = digit_law(k, &params(m)).unwrap();
            assert!(p < prev && p > 0.0);
            prev = p;
            acc.add(p);
        }
        acc.add(((K + 2) as f64 / (K + 1) as f64).ln() / ln_norm(m));
        assert!((acc.value() - 1.0).abs() < 1e-12, "m = {m}: {}", acc.value());
        assert!(digit_law(m - 1, &params(m)).is_err());
    }
    let p = params(2);
    let t = p.theta();
    let law = digit_law(2, &p).unwrap();
    assert!((law - 0.29048).abs() < 1e-5);
    let g = GammaTheta::new(p);
    let q = adaptive_gk15(|x| g.density(x).unwrap(), 1.0 / (3.0 * t), 1.0 / (2.0 * t), 1e-14)
        .unwrap();
    assert!((q.value - law).abs() < 1e-13);
}

#[test]
fn beta_matches_series_oracle() {
    for m in [2, 3, 5, 10, 17] {
        let b = levy_beta(&params(m), 1e-12).unwrap();
        let oracle = beta_series(m);
        assert!(b.value > 0.0);
        assert!((b.value - oracle).abs() < 1e-11, "m = {m}: {} vs {oracle}", b.value);
        assert!(b.error < 1e-11);
    }
}

#[test]
fn entropy_is_twice_beta_and_matches_rohlin() {
    for m in [2, 3, 10] {
        let p = params(m);
        let b = levy_beta(&p, 1e-12).unwrap().value;
        let h = entropy(&p, 1e-12).unwrap().value;
        assert!((h - 2.0 * b).abs() < 1e-14);
        let r = rohlin_entropy(&p, 1e-12).unwrap().value;
        assert!((r - h).abs() < 1e-9, "m = {m}: {r} vs {h}");
        assert!(h > 0.0);
    }
}

#[test]
fn khintchin_matches_direct_sum() {
    for m in [2, 3, 10] {
        let k = khintchin_product(&params(m), 1e-10).unwrap();
        let direct = khintchin_direct(m);
        assert!(k.value > m as f64);
        assert!((k.value - direct).abs() < 1e-9 * direct, "m = {m}: {} vs {direct}", k.value);
    }
}

#[test]
fn q_matches_published_values() {
    let (q10, lt10) = contraction_q(&params(10), 1e-12).unwrap();
    assert!((q10.value - 0.0533201).abs() < 5e-7);
    assert!(lt10);
    let (q17, lt17) = contraction_q(&params(17), 1e-12).unwrap();
    assert!((q17.value - 0.0305636).abs() < 5e-7);
    assert!(lt17);
}

#[test]
fn q_matches_direct_sum() {
    for m in [2, 3, 5, 10, 17] {
        let (q, _) = contraction_q(&params(m), 1e-12).unwrap();
        let oracle = q_direct(m);
        assert!((q.value - oracle).abs() < 1e-11, "m = {m}: {} vs {oracle}", q.value);
    }
    let (q2, lt) = contraction_q(&params(2), 1e-12).unwrap();
    assert!(q2.value > 0.0 && lt && q2.value < params(2).theta());
}

#[test]
fn q_decreases_in_m() {
    let qs: Vec<f64> = [2, 3, 5, 6, 7, 8, 10]
        .iter()
        .map(|&m| contraction_q(&params(m), 1e-12).unwrap().0.value)
        .collect();
    assert!(qs.windows(2).all(|w| w[1] < w[0]), "{qs:?}");
}

#[test]
fn km_is_exact() {
    assert_eq!(contraction_km(&params(10)), num_rational::Ratio::new(1, 11));
    assert_eq!(contraction_km(&params(2)), num_rational::Ratio::new(1, 3));
}

#[test]
fn report_sweep() {
    let r = constants_report(&params(10), 1e-12).unwrap();
    assert!((r.q - 0.0533201).abs() < 5e-7);
    assert!((r.theta - 0.316228).abs() < 1e-6);
    assert_eq!(r.k_m, "1/11");
    assert!((r.entropy - 2.0 * r.beta).abs() < 1e-14);
    let json = serde_json::to_value(&r).unwrap();
    for key in ["m", "theta", "beta", "entropy", "khintchin_geo", "k_m", "q", "q_lt_theta", "tolerances"] {
        assert!(json.get(key).is_some(), "missing {key}");
    }
    // q < theta is reported per m, not assumed
    let mut below = 0;
    let mut total = 0;
    for m in 2..=100u64 {
        if let Ok(p) = ThetaParams::new(m) {
            let (q, lt) = contraction_q(&p, 1e-12).unwrap();
            assert_eq!(lt, q.value < p.theta());
            total += 1;
            below += lt as usize;
        }
    }
    assert_eq!(total, 90);
    println!("q < theta for {below} of {total} values of m");
}
