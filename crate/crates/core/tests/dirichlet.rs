use cone_harmonic::link_spectrum::SampledModes;
use cone_harmonic::{
    build_spectrum, extend, BoundaryData, CustomSpectrum, EigenMode, Error, LinkKind, LinkPoint, LinkSpectrum,
    WarpingFunction,
};
use proptest::prelude::*;

fn builtins() -> [WarpingFunction; 3] {
    [
        WarpingFunction::euclidean(),
        WarpingFunction::hyperbolic(),
        WarpingFunction::bounded(),
    ]
}

fn circle(m_max: usize) -> LinkSpectrum {
    build_spectrum(LinkKind::Circle, 2, m_max).unwrap()
}

fn sphere(m_max: usize) -> LinkSpectrum {
    build_spectrum(LinkKind::RoundSphere2, 3, m_max).unwrap()
}

fn weighted_mean(s: &LinkSpectrum, h: &BoundaryData) -> f64 {
    let w = s.quadrature_weights().unwrap();
    let total: f64 = w.iter().sum();
    w.iter().zip(h.samples()).map(|(w, h)| w * h).sum::<f64>() / total
}

#[test]
fn tip_value_is_boundary_mean() {
    for (s, n) in [(circle(6), 2), (sphere(4), 3)] {
        for w in builtins() {
            for seed in 0..10u64 {
                let h = BoundaryData::random(&s, seed, 0).unwrap();
                let u = extend(&h, 5.0, &s, &w, n).unwrap();
                assert!((u.tip_value() - weighted_mean(&s, &h)).abs() < 1e-10);
                // the series at r = 0 reduces to the same value
                let at_tip = u.evaluate(0.0, &LinkPoint::Angle(0.0));
                if n == 2 {
                    assert!((at_tip.unwrap() - u.tip_value()).abs() < 1e-12);
                }
            }
        }
    }
}

#[test]
fn disc_modes_follow_power_law() {
    let s = circle(8);
    let w = WarpingFunction::euclidean();
    for m in 1..=8usize {
        let h = BoundaryData::single_mode(&s, EigenMode { m, k: 1 }, 1.0).unwrap();
        let u = extend(&h, 4.0, &s, &w, 2).unwrap();
        let sup_boundary = u.sup_norm(4.0, 0).unwrap();
        let sup_inner = u.sup_norm(1.0, 0).unwrap();
        let expected = 0.25f64.powi(m as i32);
        assert!(
            ((sup_inner / sup_boundary) - expected).abs() <= 1e-10 * expected,
            "m={m}"
        );
    }
}

#[test]
fn ball_harmonics_on_flat_three_cone() {
    // r cos θ and r² (3cos²θ − 1) are harmonic in R³
    let s = sphere(3);
    let w = WarpingFunction::euclidean();
    let big_r = 2.0;
    let h = BoundaryData::from_fn(&s, |p| match p {
        LinkPoint::Sphere { theta, .. } => big_r * theta.cos() + big_r * big_r * (3.0 * theta.cos().powi(2) - 1.0),
        _ => unreachable!(),
    })
    .unwrap();
    let u = extend(&h, big_r, &s, &w, 3).unwrap();
    for (r, theta, phi) in [(0.5, 0.3, 1.0), (1.2, 2.0, -0.4), (1.9, 1.57, 3.0)] {
        let exact = r * f64::cos(theta) + r * r * (3.0 * f64::cos(theta).powi(2) - 1.0);
        let got = u.evaluate(r, &LinkPoint::Sphere { theta, phi }).unwrap();
        assert!((got - exact).abs() < 1e-11, "{got} vs {exact}");
    }
}

/// Relative cone-Laplacian residual of a single-mode extension at radius r.
fn laplacian_residual(w: &WarpingFunction, n: usize, lambda_sq: f64, u: impl Fn(f64) -> f64, r: f64) -> f64 {
    let h = (1e-2 * r).min(2e-2);
    let v = [-2.0, -1.0, 0.0, 1.0, 2.0].map(|k| u(r + k * h));
    let d1 = (v[0] - 8.0 * v[1] + 8.0 * v[3] - v[4]) / (12.0 * h);
    let d2 = (-v[0] + 16.0 * v[1] - 30.0 * v[2] + 16.0 * v[3] - v[4]) / (12.0 * h * h);
    let friction = (n as f64 - 1.0) * w.log_derivative(r).unwrap() * d1;
    let angular = -lambda_sq * (-2.0 * w.ln_phi(r).unwrap()).exp() * v[2];
    let scale = [d2, friction, angular].iter().fold(0.0f64, |a, t| a.max(t.abs()));
    (d2 + friction + angular).abs() / scale
}

#[test]
fn single_mode_extensions_are_harmonic() {
    // beyond r ≈ 5 hyperbolic profiles are flat to within the resolution of
    // ln φ_m and finite differences only see rounding
    let big_r = 3.0;
    let cases = [
        (circle(4), 2, EigenMode { m: 3, k: 0 }),
        (sphere(3), 3, EigenMode { m: 2, k: 1 }),
    ];
    for (s, n, mode) in cases {
        let lambda_sq = s.lambda_sq(mode.m).unwrap();
        let point = s.quadrature_points().unwrap()[5];
        for w in builtins() {
            let h = BoundaryData::single_mode(&s, mode, 1.0).unwrap();
            let u = extend(&h, big_r, &s, &w, n).unwrap();
            let f = |r: f64| u.evaluate(r, &point).unwrap();
            for k in 1..=9 {
                let r = big_r * (0.1 + 0.8 * k as f64 / 9.0);
                let res = laplacian_residual(&w, n, lambda_sq, f, r.min(0.9 * big_r - 0.05));
                assert!(res <= 1e-5, "{} n={n} r={r}: {res:e}", w.name());
            }
        }
    }
}

#[test]
fn extension_errors() {
    let s = circle(3);
    let h = BoundaryData::constant(&s, 1.0).unwrap();
    let w = WarpingFunction::bounded();
    assert!(matches!(extend(&h, 2.0, &s, &w, 3), Err(Error::Config(_))));
    assert!(matches!(extend(&h, 0.0, &s, &w, 2), Err(Error::Domain(_))));
    assert!(matches!(extend(&h, 5e3, &s, &w, 2), Err(Error::Domain(_))));
    let u = extend(&h, 2.0, &s, &w, 2).unwrap();
    assert!(matches!(u.evaluate(2.5, &LinkPoint::Angle(0.0)), Err(Error::Domain(_))));
    assert!(matches!(
        BoundaryData::from_samples(&s, vec![1.0; 3]),
        Err(Error::Config(_))
    ));
}

#[test]
fn boundary_csv_round_trip() {
    for (s, _) in [(circle(3), 2), (sphere(2), 3)] {
        let h = BoundaryData::random(&s, 11, 1).unwrap();
        let mut buf = Vec::new();
        h.write_csv(&s, &mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let back = BoundaryData::from_csv_str(&s, &text).unwrap();
        for (a, b) in back.samples().iter().zip(h.samples()) {
            assert_eq!(a, b);
        }
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("h.csv");
        std::fs::write(&path, &text).unwrap();
        assert_eq!(BoundaryData::read_csv(&s, &path).unwrap().samples(), h.samples());

        // drop the last row: a node goes missing
        let truncated: String = text
            .lines()
            .take(text.lines().count() - 1)
            .map(|l| format!("{l}\n"))
            .collect();
        assert!(matches!(
            BoundaryData::from_csv_str(&s, &truncated),
            Err(Error::Config(_))
        ));
    }
}

/// Circle modes sampled on the uniform grid, wrapped as a custom link.
fn custom_circle(m_max: usize) -> LinkSpectrum {
    let reference = circle(m_max);
    let points = reference.quadrature_points().unwrap();
    let values = (0..points.len())
        .map(|node| {
            (0..reference.mode_count())
                .map(|j| reference.node_value(node, j).unwrap())
                .collect()
        })
        .collect();
    let samples = SampledModes {
        weights: reference.quadrature_weights().unwrap().to_vec(),
        values,
    };
    let mut text = String::from("m,lambda_sq,multiplicity\n");
    for (m, b) in reference.bands().iter().enumerate() {
        text.push_str(&format!("{m},{},{}\n", b.lambda_sq, b.multiplicity));
    }
    let custom = CustomSpectrum::from_csv_str(&text).unwrap().with_samples(samples);
    build_spectrum(LinkKind::Custom(custom), 2, m_max).unwrap()
}

#[test]
fn custom_link_matches_builtin_circle() {
    let reference = circle(4);
    let custom = custom_circle(4);
    let h_ref = BoundaryData::random(&reference, 3, 0).unwrap();
    let h_custom = BoundaryData::from_samples(&custom, h_ref.samples().to_vec()).unwrap();
    let w = WarpingFunction::hyperbolic();
    let a = extend(&h_ref, 3.0, &reference, &w, 2).unwrap();
    let b = extend(&h_custom, 3.0, &custom, &w, 2).unwrap();
    assert!((a.tip_value() - b.tip_value()).abs() < 1e-13);
    for node in [0usize, 4, 9] {
        let x = a.evaluate(1.3, &LinkPoint::Node(node)).unwrap();
        let y = b.evaluate(1.3, &LinkPoint::Node(node)).unwrap();
        assert!((x - y).abs() < 1e-12);
    }
    let mut buf = Vec::new();
    h_custom.write_csv(&custom, &mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("node_index,h\n"));
    assert_eq!(
        BoundaryData::from_csv_str(&custom, &text).unwrap().samples(),
        h_custom.samples()
    );
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn sup_norm_grows_outward(seed in 0u64..1000, which in 0usize..3, frac in 0.05f64..0.5) {
        let w = builtins()[which].clone();
        let s = circle(6);
        let h = BoundaryData::random(&s, seed, 0).unwrap();
        let u = extend(&h, 8.0, &s, &w, 2).unwrap();
        let r2 = 8.0 * (0.5 + frac);
        let r1 = r2 * frac;
        prop_assert!(u.sup_norm(r1, 256).unwrap() <= u.sup_norm(r2, 256).unwrap() + 1e-8);
    }

    #[test]
    fn sphere_sup_norm_grows_outward(seed in 0u64..1000, frac in 0.05f64..0.5) {
        let s = sphere(3);
        let h = BoundaryData::random(&s, seed, 0).unwrap();
        let u = extend(&h, 4.0, &s, &WarpingFunction::bounded(), 3).unwrap();
        let r2 = 4.0 * (0.5 + frac);
        prop_assert!(u.sup_norm(r2 * frac, 64).unwrap() <= u.sup_norm(r2, 64).unwrap() + 1e-8);
    }

    #[test]
    fn extension_is_linear(
        seeds in (0u64..1000, 0u64..1000),
        alpha in -3.0f64..3.0,
        beta in -3.0f64..3.0,
        which in 0usize..3,
        r in 0.0f64..6.0,
        theta in 0.0f64..std::f64::consts::TAU,
    ) {
        let w = builtins()[which].clone();
        let s = circle(5);
        let h1 = BoundaryData::random(&s, seeds.0, 0).unwrap();
        let h2 = BoundaryData::random(&s, seeds.1, 1).unwrap();
        let combined: Vec<f64> = h1.samples().iter().zip(h2.samples()).map(|(a, b)| alpha * a + beta * b).collect();
        let h = BoundaryData::from_samples(&s, combined).unwrap();
        let p = LinkPoint::Angle(theta);
        let u = extend(&h, 6.0, &s, &w, 2).unwrap().evaluate(r, &p).unwrap();
        let u1 = extend(&h1, 6.0, &s, &w, 2).unwrap().evaluate(r, &p).unwrap();
        let u2 = extend(&h2, 6.0, &s, &w, 2).unwrap().evaluate(r, &p).unwrap();
        prop_assert!((u - (alpha * u1 + beta * u2)).abs() <= 1e-9);
    }

    #[test]
    fn random_data_respects_min_band(seed in 0u64..10_000, min_band in 0usize..4) {
        let s = sphere(3);
        let h = BoundaryData::random(&s, seed, min_band).unwrap();
        let c = s.project(h.samples()).unwrap();
        for m in 0..min_band {
            for j in s.band_range(m) {
                prop_assert!(c.as_slice()[j].abs() < 1e-12);
            }
        }
        prop_assert_eq!(&h, &BoundaryData::random(&s, seed, min_band).unwrap());
    }
}
