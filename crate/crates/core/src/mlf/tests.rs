use super::*;

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

fn close(got: Complex64, want: Complex64, rel: f64) -> bool {
    (got - want).norm() <= rel * want.norm().max(1e-300)
}

// Reference values from a 120–1200 digit series summation.
const HIGH_PRECISION: &[(f64, f64, (f64, f64), (f64, f64))] = &[
    (0.7, 1.3, (-50.0, 0.0), (0.013466067403204606754, 0.0)),
    (
        0.5,
        1.0,
        (0.0, 30.0),
        (-8.8376102692807091923e-112, 0.018816784868660727791),
    ),
    (0.5, 1.0, (-10.0, 0.0), (0.056140992743822585858, 0.0)),
    (0.75, 1.0, (-20.0, 0.0), (0.014527522154459504195, 0.0)),
    (
        0.75,
        2.0,
        (0.0, 15.0),
        (0.002507416579662715171, 0.073611756533822756189),
    ),
    (
        0.25,
        0.5,
        (0.0, 4.0),
        (0.0010955383488628858861, 0.07192552997515514467),
    ),
    (
        0.5,
        2.0,
        (-30.0, 10.0),
        (0.033061530755486333443, 0.010698451696316133331),
    ),
    (1.5, 1.0, (-40.0, 0.0), (-0.009930965478693434638, 0.0)),
    (1.5, 0.5, (-200.0, 0.0), (0.000026603245093638931049, 0.0)),
    (
        1.0,
        1.0,
        (0.0, 30.0),
        (0.15425144988758405072, -0.98803162409286178999),
    ),
    (
        1.2,
        0.8,
        (-25.0, 3.0),
        (-0.011308485638556590593, -0.0014458591274724544641),
    ),
    (0.3, 1.0, (-5.0, 0.0), (0.13708086902027063889, 0.0)),
    (
        0.6,
        0.6,
        (3.0, 4.0),
        (-6.2768999801081605196, 3.2125680097757206565),
    ),
];

#[test]
fn matches_high_precision_series() {
    for &(a, b, (zr, zi), (er, ei)) in HIGH_PRECISION {
        let got = ml_eval(MlParams::new(a, b), c(zr, zi)).unwrap();
        assert!(
            close(got, c(er, ei), 1e-10),
            "E_{{{a},{b}}}({zr}+{zi}i) = {got}, want {er}+{ei}i"
        );
    }
}

#[test]
fn series_examples() {
    let s = ml_series_truncated(MlParams::new(1.0, 1.0), c(0.0, 0.0), 10).unwrap();
    assert_eq!(s.value, c(1.0, 0.0));
    assert_eq!(s.terms, 1);

    let s = ml_series_truncated(MlParams::new(1.0, 1.0), c(1.0, 0.0), 100).unwrap();
    assert!((s.value.re - std::f64::consts::E).abs() <= s.error_bound.max(1e-15));
    assert!(s.error_bound < 1e-14);

    let s = ml_series_truncated(MlParams::new(2.0, 1.0), c(-4.0, 0.0), 100).unwrap();
    assert!((s.value.re - 2f64.cos()).abs() < 1e-14);
}

#[test]
fn series_refuses_large_argument() {
    let err = ml_series_truncated(MlParams::new(0.5, 1.0), c(-50.0, 0.0), 30).unwrap_err();
    assert!(matches!(err, Error::NonConverged { max_terms: 30, .. }));
    let err = ml_series_truncated(MlParams::new(0.0, 1.0), c(1.0, 0.0), 30).unwrap_err();
    assert!(matches!(err, Error::Domain(_)));
    let err = ml_series_truncated(MlParams::new(1.0, 1.0), c(f64::NAN, 0.0), 30).unwrap_err();
    assert!(matches!(err, Error::InvalidInput(_)));
}

#[test]
fn erfcx_closed_form() {
    // E_{1/2,1}(-x) = exp(x²) erfc(x)
    let got = ml_eval(MlParams::new(0.5, 1.0), c(-10.0, 0.0)).unwrap();
    assert!((got.re - 0.05614099274382258585751738722046831156516).abs() < 1e-15);
}

#[test]
fn exponential_identity_and_euler() {
    let p = MlParams::new(1.0, 1.0);
    for i in 0..200 {
        let x = -5.0 + 10.0 * i as f64 / 199.0;
        let e = ml_eval(p, c(x, 0.0)).unwrap().re;
        assert!((e - x.exp()).abs() <= 1e-10 * x.exp(), "x = {x}");
    }
    let e = ml_eval(p, c(0.0, 5.0)).unwrap();
    assert!(close(e, c(5f64.cos(), 5f64.sin()), 1e-12), "{e}");
}

#[test]
fn cosine_reduction() {
    let p = MlParams::new(1.999999999999, 1.0);
    let inner = MittagLeffler::new_inner(2.0, 1.0);
    for i in 0..=100 {
        let x = 10.0 * i as f64 / 100.0;
        assert!(
            (inner.eval_neg_real(-x * x).unwrap() - x.cos()).abs() <= 1e-9,
            "x = {x}"
        );
    }
    // the public evaluator stops short of α = 2
    assert!(ml_eval(MlParams::new(2.0, 1.0), c(-1.0, 0.0)).is_err());
    assert!(ml_eval(p, c(-1.0, 0.0)).is_ok());
}

#[test]
fn growth_sector_refused_beyond_series_radius() {
    let err = ml_eval(MlParams::new(0.9, 1.7), c(8.0, -12.0)).unwrap_err();
    assert!(matches!(err, Error::UnsupportedRegion { .. }));
    assert!(ml_eval(MlParams::new(0.9, 1.7), c(3.0, -3.0)).is_ok());
    assert!(matches!(
        ml_eval(MlParams::new(0.0, 1.0), c(1.0, 0.0)),
        Err(Error::Domain(_))
    ));
    assert!(matches!(
        ml_eval(MlParams::new(0.5, -1.0), c(1.0, 0.0)),
        Err(Error::Domain(_))
    ));
}

#[test]
fn imaginary_splitting_examples() {
    let v = ml_eval_imag(MlParams::new(1.0, 1.0), 1.0, 1.0).unwrap();
    assert!(close(v, c(1f64.cos(), 1f64.sin()), 1e-14));

    for &(a, b) in &[(0.3, 0.7), (1.0, 2.5), (0.5, 1.0)] {
        let v = ml_eval_imag(MlParams::new(a, b), 3.0, 0.0).unwrap();
        assert_eq!(v, c(rgamma(b), 0.0));
    }

    let p = MlParams::new(0.5, 1.0);
    let split = ml_eval_imag(p, 100.0, 0.3).unwrap();
    let direct = ml_eval(p, c(0.0, 30.0)).unwrap();
    let oracle = c(-8.8376102692807091923e-112, 0.018816784868660727791);
    assert!(close(split, oracle, 1e-9), "{split}");
    assert!(close(split, direct, 1e-9));
}

#[test]
fn faddeeva_on_imaginary_axis() {
    // E_{1/2,1}(iy) = exp(-y²) + (2i/√π) D(y), D(20) from a 40-digit reference.
    let dawson_20 = 0.0250313679264036719469949523478;
    let v = ml_eval_imag(MlParams::new(0.5, 1.0), 20.0, 1.0).unwrap();
    let want = c(
        (-400f64).exp(),
        2.0 / std::f64::consts::PI.sqrt() * dawson_20,
    );
    assert!(close(v, want, 1e-12), "{v} vs {want}");
}

#[test]
fn asymptotic_and_contour_agree() {
    // every large-|z| point is computable by both paths; compare them
    for &(a, b) in &[
        (0.25, 0.5),
        (0.5, 1.0),
        (0.75, 2.0),
        (1.0, 1.5),
        (1.5, 1.0),
        (1.5, 1.75),
        (2.0, 1.3),
    ] {
        let coeffs = asymptotic::coefficients(a, b);
        for &r in &[6.0, 20.0, 100.0, 1e3, 1e5] {
            for &theta in &[PI, 0.9 * PI, 0.75 * PI] {
                if theta < PI * a / 2.0 {
                    continue;
                }
                let z = Complex64::from_polar(r, theta);
                if let Some(asym) = asymptotic::try_eval(a, b, z, &coeffs) {
                    let cont = contour::invert(a, b, z);
                    let scale = asym.norm().max(1e-300);
                    assert!(
                        (asym - cont).norm() <= 1e-10 * scale + 1e-15,
                        "a={a} b={b} z={z}: {asym} vs {cont}"
                    );
                }
            }
        }
    }
}

#[test]
fn envelope_constant_examples() {
    let probe = SectorProbe {
        params: MlParams::new(1.0, 1.0),
        mu: 0.9 * PI,
        radius_grid: vec![1.0, 10.0, 100.0],
    };
    let c_hat = envelope_constant(&probe).unwrap();
    // largest value sits at r = 1 on the ray closest to the imaginary axis
    let want = 2.0 * (0.9 * PI).cos().exp();
    assert!((c_hat - want).abs() < 1e-12, "{c_hat}");
    assert!(c_hat >= 2.0 / std::f64::consts::E);

    let tiny = SectorProbe {
        params: MlParams::new(0.6, 2.0),
        mu: 1.2,
        radius_grid: vec![1e-300],
    };
    assert!((envelope_constant(&tiny).unwrap() - 1.0).abs() < 1e-12);

    let bad = SectorProbe {
        params: MlParams::new(0.5, 1.0),
        mu: 0.1,
        radius_grid: vec![1.0],
    };
    assert!(envelope_constant(&bad).is_err());
}

#[test]
fn envelope_constant_stable_under_refinement() {
    let params = MlParams::new(0.5, 1.0);
    let coarse = SectorProbe {
        params,
        mu: 0.3 * PI,
        radius_grid: geometric_grid(1.0, 1e6, 8),
    };
    let fine = SectorProbe {
        params,
        mu: 0.3 * PI,
        radius_grid: geometric_grid(1.0, 1e6, 16),
    };
    let (a, b) = (
        envelope_constant(&coarse).unwrap(),
        envelope_constant(&fine).unwrap(),
    );
    assert!(a.is_finite() && (a - b).abs() <= 0.05 * b, "{a} vs {b}");
}

mod properties {
    use super::*;
    use proptest::prelude::*;

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(200))]

        #[test]
        fn conjugation_symmetry(a in 0.1f64..1.9, b in 0.2f64..3.0, r in 0.0f64..200.0, t in 0.0f64..1.0) {
            let lo = PI * a / 2.0;
            let theta = if r > Z_DIRECT { lo + (PI - lo) * t } else { PI * t };
            let z = Complex64::from_polar(r, theta);
            let p = MlParams::new(a, b);
            let up = ml_eval(p, z).unwrap();
            let down = ml_eval(p, z.conj()).unwrap();
            prop_assert!((up.conj() - down).norm() <= 1e-12 * (1.0 + up.norm()));
        }

        #[test]
        fn error_bound_is_honest(a in 0.3f64..2.0, b in 0.1f64..3.0, r in 0.0f64..4.0, t in -PI..PI, n in 20usize..60) {
            let p = MlParams::new(a, b);
            let z = Complex64::from_polar(r, t);
            if let Ok(short) = ml_series_truncated(p, z, n) {
                let long = ml_series_truncated(p, z, 2 * n).unwrap();
                prop_assert!((short.value - long.value).norm() <= short.error_bound + long.error_bound);
            }
        }
    }
}

#[test]
fn imaginary_axis_constant_bounds_the_kernel() {
    for params in [
        MlParams::new(0.5, 1.0),
        MlParams::new(0.25, 2.0),
        MlParams::new(0.75, 0.5),
    ] {
        let c = imag_axis_constant(params).unwrap();
        let kernel = ImagKernel::new(params).unwrap();
        for y in geometric_grid(1e-2, 1e6, 7) {
            let v = kernel.eval(y).unwrap().norm() * (1.0 + y);
            assert!(v <= c, "{params:?} y={y}: {v} > {c}");
        }
    }
    // no finite constant at alpha = 1: the estimate is as large as the grid
    assert!(imag_axis_constant(MlParams::new(1.0, 1.0)).unwrap() > 1e11);
    assert!(imag_axis_constant(MlParams::new(1.5, 1.0)).is_err());
}

#[test]
fn split_kernel_reproduces_exponential() {
    let even = MittagLeffler::new_inner(2.0, 1.0);
    let odd = MittagLeffler::new_inner(2.0, 2.0);
    for y in [0.0, 0.3, 2.0, 17.0, 250.0, 4.0e3] {
        let z = Complex64::new(
            even.eval_neg_real(-y * y).unwrap(),
            y * odd.eval_neg_real(-y * y).unwrap(),
        );
        assert!(
            (z - Complex64::from_polar(1.0, y)).norm() < 1e-10,
            "{y}: {z}"
        );
    }
}
