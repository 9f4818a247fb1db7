use codec_core::gauss::{
    convolution_score, from_normal_form, log_mean_exp, to_normal_form, NormalForm,
};
use codec_core::rng::rng;
use codec_core::DiagGaussian;
use proptest::prelude::*;

fn gaussian(d: usize, var_lo: f64, var_hi: f64) -> impl Strategy<Value = DiagGaussian> {
    (
        prop::collection::vec(-5.0f64..5.0, d),
        prop::collection::vec(var_lo..var_hi, d),
    )
        .prop_map(|(m, v)| DiagGaussian::new(m, v).unwrap())
}

fn pair(d: usize, var_lo: f64, var_hi: f64) -> impl Strategy<Value = (DiagGaussian, DiagGaussian)> {
    (gaussian(d, var_lo, var_hi), gaussian(d, var_lo, var_hi))
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-300)
}

/// `ln ∫ exp(f(z)) dz` over `center ± half`, with the integrand rescaled by
/// its value at `center` so the quadrature works near unit magnitude.
fn log_integral(f: impl Fn(f64) -> f64, center: f64, half: f64) -> f64 {
    let peak = f(center);
    let out = quadrature::integrate(|z| (f(z) - peak).exp(), center - half, center + half, 1e-14);
    peak + out.integral.ln()
}

/// `ln ∫ N(z; x) N(z; y) / N(z; 0, 1) dz` in one dimension.
fn convolution_by_quadrature(mx: f64, vx: f64, my: f64, vy: f64) -> f64 {
    let gx = DiagGaussian::new(vec![mx], vec![vx]).unwrap();
    let gy = DiagGaussian::new(vec![my], vec![vy]).unwrap();
    let prior = DiagGaussian::standard(1);
    let f = |z: f64| {
        gx.log_density(&[z]).unwrap() + gy.log_density(&[z]).unwrap()
            - prior.log_density(&[z]).unwrap()
    };
    // The integrand is Gaussian in z with precision 1/vx + 1/vy - 1.
    let prec = 1.0 / vx + 1.0 / vy - 1.0;
    let center = (mx / vx + my / vy) / prec;
    log_integral(f, center, 12.0 / prec.sqrt())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(200))]

    #[test]
    fn normal_form_round_trip(d in prop::sample::select(vec![1usize, 4, 64]), seed in any::<u64>()) {
        let mut r = rng(seed);
        use rand::Rng as _;
        let g = DiagGaussian::new(
            (0..d).map(|_| r.random_range(-50.0..50.0)).collect(),
            (0..d).map(|_| 10f64.powf(r.random_range(-4.0..4.0))).collect(),
        ).unwrap();
        let back = from_normal_form(&to_normal_form(&g)).unwrap();
        for i in 0..d {
            prop_assert!(rel(back.mean()[i], g.mean()[i]) <= 1e-12 || (back.mean()[i] - g.mean()[i]).abs() <= 1e-12);
            prop_assert!(rel(back.var()[i], g.var()[i]) <= 1e-12);
        }
        let nf = to_normal_form(&g);
        for i in 0..d {
            prop_assert!(nf.a[i] < 0.0);
            let implied = NormalForm::implied_c(nf.a[i], nf.b[i]);
            prop_assert!((implied - nf.c[i]).abs() <= 1e-9 * nf.c[i].abs().max(1.0));
        }
    }

    #[test]
    fn density_integrates_to_one(m in -20.0f64..20.0, v in 1e-3f64..100.0) {
        let g = DiagGaussian::new(vec![m], vec![v]).unwrap();
        let sd = v.sqrt();
        let out = quadrature::integrate(|z| g.log_density(&[z]).unwrap().exp(), m - 12.0 * sd, m + 12.0 * sd, 1e-13);
        prop_assert!((out.integral - 1.0).abs() <= 1e-9, "integral {}", out.integral);
    }

    #[test]
    fn kl_is_nonnegative_and_zero_on_self((a, b) in pair(5, 0.01, 10.0)) {
        prop_assert!(a.kl_divergence(&b).unwrap() >= 0.0);
        prop_assert!(b.kl_divergence(&a).unwrap() >= 0.0);
        prop_assert_eq!(a.kl_divergence(&a).unwrap(), 0.0);
    }

    #[test]
    fn convolution_matches_quadrature_in_one_dimension(
        mx in -3.0f64..3.0, vx in 0.05f64..1.5, my in -3.0f64..3.0, vy in 0.05f64..1.5, log_py in -40.0f64..0.0,
    ) {
        let gx = DiagGaussian::new(vec![mx], vec![vx]).unwrap();
        let gy = DiagGaussian::new(vec![my], vec![vy]).unwrap();
        let score = convolution_score(&gx, &gy, log_py).unwrap().total;
        let oracle = log_py + convolution_by_quadrature(mx, vx, my, vy);
        prop_assert!((score - oracle).abs() <= 1e-9, "{score} vs {oracle}");
    }

    #[test]
    fn convolution_matches_quadrature_per_dimension(d in 2usize..=8, seed in any::<u64>()) {
        use rand::Rng as _;
        let mut r = rng(seed);
        let mut draw = |lo: f64, hi: f64| -> Vec<f64> { (0..d).map(|_| r.random_range(lo..hi)).collect() };
        let (mx, vx, my, vy) = (draw(-3.0, 3.0), draw(0.05, 1.5), draw(-3.0, 3.0), draw(0.05, 1.5));
        let gx = DiagGaussian::new(mx.clone(), vx.clone()).unwrap();
        let gy = DiagGaussian::new(my.clone(), vy.clone()).unwrap();
        let score = convolution_score(&gx, &gy, -7.0).unwrap().total;
        let oracle = -7.0 + (0..d).map(|i| convolution_by_quadrature(mx[i], vx[i], my[i], vy[i])).sum::<f64>();
        prop_assert!((score - oracle).abs() <= 1e-6, "{score} vs {oracle}");
    }

    #[test]
    fn convolution_is_symmetric_without_prior_term((a, b) in pair(6, 0.05, 1.9)) {
        let ab = convolution_score(&a, &b, 0.0).unwrap().total;
        let ba = convolution_score(&b, &a, 0.0).unwrap().total;
        prop_assert!((ab - ba).abs() <= 1e-12 * ab.abs().max(1.0));
    }

    #[test]
    fn breakdown_sums_to_total((a, b) in pair(4, 0.05, 1.9), log_py in -100.0f64..0.0) {
        let s = convolution_score(&a, &b, log_py).unwrap();
        prop_assert_eq!(s.total, s.log_py + s.log_ratio_term + s.quad_terms);
    }
}

/// Closed-form KL against the mean of `ln g1(z) − ln g2(z)` over 10⁶ draws
/// from `g1`.
#[test]
fn kl_matches_monte_carlo() {
    let cases = [
        (
            vec![0.0, 1.0, -2.0],
            vec![1.0, 0.5, 2.0],
            vec![0.3, 0.0, -1.0],
            vec![2.0, 1.0, 0.7],
        ),
        (vec![1.0], vec![1.0], vec![0.0], vec![1.0]),
        (
            vec![0.0, 0.0],
            vec![0.25, 3.0],
            vec![0.5, -0.5],
            vec![1.0, 1.0],
        ),
    ];
    for (k, (m1, v1, m2, v2)) in cases.into_iter().enumerate() {
        let g1 = DiagGaussian::new(m1, v1).unwrap();
        let g2 = DiagGaussian::new(m2, v2).unwrap();
        let exact = g1.kl_divergence(&g2).unwrap();
        let n = 1_000_000;
        let mut r = rng(100 + k as u64);
        let mut z = vec![0.0; g1.dim()];
        let (mut sum, mut sum2) = (0.0, 0.0);
        for _ in 0..n {
            g1.sample_into(&mut r, &mut z);
            let x = g1.log_density(&z).unwrap() - g2.log_density(&z).unwrap();
            sum += x;
            sum2 += x * x;
        }
        let mean = sum / n as f64;
        let se = ((sum2 / n as f64 - mean * mean) / n as f64).sqrt();
        assert!(
            (mean - exact).abs() <= 3.0 * se,
            "case {k}: MC {mean} ± {se} vs {exact}"
        );
    }
}

#[test]
fn convolution_worked_examples() {
    let g = |m: f64, v: f64| DiagGaussian::new(vec![m], vec![v]).unwrap();
    assert!(
        convolution_score(&g(0.0, 1.0), &g(0.0, 1.0), 0.0)
            .unwrap()
            .total
            .abs()
            < 1e-15
    );
    assert!(
        convolution_score(&g(1.0, 1.0), &g(0.0, 1.0), 0.0)
            .unwrap()
            .total
            .abs()
            < 1e-15
    );
    let s = convolution_score(&g(0.0, 0.5), &g(0.0, 0.5), 0.0)
        .unwrap()
        .total;
    assert!((s - convolution_by_quadrature(0.0, 0.5, 0.0, 0.5)).abs() < 1e-12);
    assert!((s - 0.143_841_036_225_890_1).abs() < 1e-12);
}

/// Quadrature agrees with the `A = −1/(2σ²)` convention used by the score
/// and rejects the variant without the factor of two.
#[test]
fn quadrature_settles_the_normal_form_convention() {
    let (mx, vx, my, vy) = (0.4, 0.6, -0.3, 0.8);
    let oracle = convolution_by_quadrature(mx, vx, my, vy);
    let with = |scale: f64| {
        let (ax, ay) = (-1.0 / (scale * vx), -1.0 / (scale * vy));
        let (bx, by) = (mx / vx, my / vy);
        let s = ax + ay + 0.5;
        0.5 * (-2.0 * ax * ay / s).ln() + bx * bx / (4.0 * ax) + by * by / (4.0 * ay)
            - (bx + by) * (bx + by) / (4.0 * s)
    };
    assert!((with(2.0) - oracle).abs() < 1e-9);
    assert!((with(1.0) - oracle).abs() > 1e-2);
}

#[test]
fn log_mean_exp_is_stable() {
    let xs = [-1000.0, -1000.0 + 2f64.ln()];
    assert!((log_mean_exp(&xs) - (-1000.0 + 1.5f64.ln())).abs() < 1e-12);
    assert_eq!(log_mean_exp(&[]), f64::NEG_INFINITY);
}
