use cone_harmonic::liouville::{divergence_verdict_with, prefactor, DivergenceOptions};
use cone_harmonic::radial::log_grid;
use cone_harmonic::{
    divergence_verdict, dominance_check, euclidean_exponent, growth_bound_general, growth_bound_nonneg,
    indicial_exponent, solve_profile, Error, GrowthBound, Regime, Verdict, WarpingFunction,
};
use proptest::prelude::*;

const SQRT2: f64 = std::f64::consts::SQRT_2;

/// `λ₁² min{1/(√2 λ₁), 1/2}` written out independently of the library.
fn c(lambda1: f64) -> f64 {
    if lambda1 >= SQRT2 {
        lambda1 / SQRT2
    } else {
        lambda1 * lambda1 / 2.0
    }
}

fn rel(a: f64, b: f64) -> f64 {
    if b == 0.0 {
        a.abs()
    } else {
        ((a - b) / b).abs()
    }
}

#[test]
fn flat_cone_general_bound_is_a_power_law() {
    let w = WarpingFunction::euclidean();
    for n in [3usize, 4, 5] {
        for lambda1 in [SQRT2, 1.6, 2.0, 3.5] {
            let b = GrowthBound::new(Regime::General, n, lambda1, &w).unwrap();
            for r in log_grid(1.0, 100.0, 7) {
                let expected = lambda1 / (SQRT2 * (n as f64 - 2.0)) * r.ln();
                assert!(
                    rel(b.log_value(r).unwrap(), expected) <= 1e-8 || r == 1.0,
                    "n={n} λ₁={lambda1} r={r}"
                );
            }
        }
        // min branch
        let b = GrowthBound::new(Regime::General, n, 1.0, &w).unwrap();
        let expected = 0.5 / (n as f64 - 2.0) * 50f64.ln();
        assert!(rel(b.log_value(50.0).unwrap(), expected) <= 1e-8);
    }
}

#[test]
fn hyperbolic_general_bound_closed_forms() {
    let w = WarpingFunction::hyperbolic();
    // n = 3: ∫ σ/sinh²σ dσ = ln sinh σ − σ coth σ
    let f3 = |s: f64| s.sinh().ln() - s / s.tanh();
    // n = 4: ∫ (cosh σ − 1)/sinh³σ dσ = ½ ln u − u²/4 with u = tanh(σ/2)
    let f4 = |s: f64| {
        let u = (s / 2.0).tanh();
        0.5 * u.ln() - u * u / 4.0
    };
    let b3 = GrowthBound::new(Regime::General, 3, 2.0, &w).unwrap();
    let b4 = GrowthBound::new(Regime::General, 4, 2.0, &w).unwrap();
    assert!(b3.hypotheses_hold());
    for r in [1.5f64, 3.0, 10.0, 40.0] {
        assert!(
            rel(b3.log_value(r).unwrap(), c(2.0) * (f3(r) - f3(1.0))) < 1e-9,
            "n=3 r={r}"
        );
        assert!(
            rel(b4.log_value(r).unwrap(), c(2.0) * (f4(r) - f4(1.0))) < 1e-9,
            "n=4 r={r}"
        );
    }
    // both converge: the values at 100 and r_max agree with the limits
    let limit3 = c(2.0) * (-f3(1.0) - 2f64.ln());
    assert!(rel(b3.log_value(1000.0).unwrap(), limit3) < 1e-9);
    let limit4 = c(2.0) * (-0.25 - f4(1.0));
    assert!(rel(b4.log_value(1000.0).unwrap(), limit4) < 1e-9);
}

#[test]
fn bounded_warping_closed_forms() {
    let w = WarpingFunction::bounded();
    // nonnegative regime: ∫₁ʳ (1+s)/s ds = (r − 1) + ln r
    let nonneg = GrowthBound::new(Regime::NonnegCurvature, 4, 1.2, &w).unwrap();
    assert!(nonneg.hypotheses_hold());
    // general regime applied formally, n = 3: ∫₁ʳ (1+σ)²/σ dσ
    let general = GrowthBound::new(Regime::General, 3, 1.2, &w).unwrap();
    assert!(!general.hypotheses_hold());
    for r in [2.0f64, 17.0, 900.0] {
        let a = c(1.2) * ((r - 1.0) + r.ln());
        assert!(rel(nonneg.log_value(r).unwrap(), a) < 1e-10);
        let g = c(1.2) * (r.ln() + 2.0 * (r - 1.0) + (r * r - 1.0) / 2.0);
        assert!(rel(general.log_value(r).unwrap(), g) < 1e-10);
    }
}

#[test]
fn nonneg_bound_on_other_warpings() {
    let e = GrowthBound::new(Regime::NonnegCurvature, 2, 0.9, &WarpingFunction::euclidean()).unwrap();
    let h = GrowthBound::new(Regime::NonnegCurvature, 3, 0.9, &WarpingFunction::hyperbolic()).unwrap();
    for r in [1.0f64, 2.0, 30.0, 1000.0] {
        assert!(rel(e.log_value(r).unwrap(), c(0.9) * r.ln()) < 1e-11);
        let oracle = c(0.9) * ((r / 2.0).tanh().ln() - 0.5f64.tanh().ln());
        assert!(rel(h.log_value(r).unwrap(), oracle) < 1e-10);
    }
}

#[test]
fn free_functions_and_errors() {
    let w = WarpingFunction::euclidean();
    assert_eq!(growth_bound_general(3, SQRT2, &w, 1.0).unwrap(), 1.0);
    assert!(rel(growth_bound_general(3, SQRT2, &w, 42.0).unwrap(), 42.0) < 1e-10);
    assert!(rel(growth_bound_nonneg(5, 2.0, &w, 10.0).unwrap(), 10f64.powf(SQRT2)) < 1e-10);
    assert!(matches!(
        growth_bound_general(3, SQRT2, &w, 0.99),
        Err(Error::Domain(_))
    ));
    assert!(matches!(growth_bound_nonneg(3, SQRT2, &w, 2e3), Err(Error::Domain(_))));
    assert!(matches!(
        growth_bound_general(2, SQRT2, &w, 2.0),
        Err(Error::Capability(_))
    ));
    assert!(GrowthBound::new(Regime::General, 3, 0.0, &w).is_err());
    let b = GrowthBound::new(Regime::General, 3, SQRT2, &w).unwrap();
    assert!(matches!(b.log_value(0.5), Err(Error::Domain(_))));
    assert!(matches!(divergence_verdict(&b, 1e4), Err(Error::Domain(_))));
    // overflow only appears when materializing A
    let hyper = WarpingFunction::hyperbolic();
    let huge = GrowthBound::new(Regime::General, 3, 2.0, &WarpingFunction::bounded()).unwrap();
    assert!(huge.log_value(1000.0).unwrap() > 7e5);
    assert_eq!(huge.value(1000.0).unwrap(), f64::INFINITY);
    assert!(GrowthBound::new(Regime::General, 6, 2.0, &hyper)
        .unwrap()
        .log_value(1000.0)
        .unwrap()
        .is_finite());
}

#[test]
fn exponent_never_beats_the_first_mode() {
    for n in 3..=10usize {
        let lambda1 = ((n - 1) as f64).sqrt();
        let bound = euclidean_exponent(n, lambda1).unwrap();
        let gamma = indicial_exponent(n, (n - 1) as f64);
        assert!((gamma - 1.0).abs() < 1e-15);
        if n == 3 {
            assert!((bound - gamma).abs() < 1e-12);
        } else {
            assert!(bound < gamma, "n={n}");
        }
        assert!(rel(bound, c(lambda1) / (n as f64 - 2.0)) < 1e-15);
    }
    assert!(matches!(euclidean_exponent(2, 1.0), Err(Error::Capability(_))));
}

#[test]
fn divergence_examples() {
    let flat = WarpingFunction::euclidean().with_r_max(1e30).unwrap();
    let b = GrowthBound::new(Regime::General, 3, SQRT2, &flat).unwrap();
    assert_eq!(divergence_verdict(&b, 1e30).unwrap(), Verdict::Diverges);
    assert_eq!(divergence_verdict(&b, 1e10).unwrap(), Verdict::Inconclusive);
    let loose = DivergenceOptions {
        threshold: 10.0,
        ..DivergenceOptions::default()
    };
    assert_eq!(divergence_verdict_with(&b, 1e10, &loose).unwrap(), Verdict::Diverges);

    let bounded = GrowthBound::new(Regime::NonnegCurvature, 3, SQRT2, &WarpingFunction::bounded()).unwrap();
    assert_eq!(divergence_verdict(&bounded, 1e3).unwrap(), Verdict::Diverges);

    let hyper = GrowthBound::new(Regime::NonnegCurvature, 3, SQRT2, &WarpingFunction::hyperbolic()).unwrap();
    assert_eq!(divergence_verdict(&hyper, 1e3).unwrap(), Verdict::Inconclusive);
    let relaxed = DivergenceOptions {
        threshold: 0.0,
        shrink_tolerance: 0.05,
    };
    // even without a threshold the increments collapse
    assert_eq!(
        divergence_verdict_with(&hyper, 1e3, &relaxed).unwrap(),
        Verdict::Inconclusive
    );
}

#[test]
fn dominance_report_on_flat_cone() {
    let w = WarpingFunction::euclidean();
    let b = GrowthBound::new(Regime::General, 3, SQRT2, &w).unwrap();
    let grid = log_grid(1.0, 1000.0, 4);
    let profiles: Vec<_> = (0..=3usize)
        .map(|m| solve_profile(&w, 3, (m * (m + 1)) as f64, &grid).unwrap())
        .collect();
    let report = dominance_check(&b, &profiles, &grid).unwrap();
    assert_eq!(report.modes.len(), 3);
    assert!(report.modes[0].boundary_case && !report.modes[0].dominant);
    for (j, m) in report.modes.iter().enumerate().skip(1) {
        assert!(m.dominant);
        assert!(rel(m.margin, j as f64 * 1000f64.ln()) < 1e-10);
    }
    assert!(!report.all_dominant);
    assert!(report.min_margin.abs() < 1e-10);
    for row in &report.rows {
        assert!(rel(row.gap[1], row.r.ln()) < 1e-10 || row.r == 1.0);
    }

    let mut buf = Vec::new();
    report.write_csv(&mut buf).unwrap();
    let text = String::from_utf8(buf).unwrap();
    assert!(text.starts_with("R,log_A,log_phi_1,log_phi_2,log_phi_3,gap_1,gap_2,gap_3\n"));
    assert_eq!(text.lines().count(), grid.len() + 1);

    // the hyperbolic cone's bounded A(r) is dominated by every mode
    let hw = WarpingFunction::hyperbolic();
    let hb = GrowthBound::new(Regime::General, 3, SQRT2, &hw).unwrap();
    let hp: Vec<_> = [2.0, 6.0]
        .iter()
        .map(|&l| solve_profile(&hw, 3, l, &grid).unwrap())
        .collect();
    let short = log_grid(1.0, 5.0, 8);
    assert!(dominance_check(&hb, &hp, &short).unwrap().all_dominant);

    assert!(matches!(dominance_check(&b, &profiles, &[2.0]), Err(Error::Config(_))));
    assert!(matches!(dominance_check(&hb, &profiles, &grid), Err(Error::Config(_))));
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn log_bound_is_monotone_from_zero(which in 0usize..3, n in 3usize..7, lambda1 in 0.2f64..4.0) {
        let w = [WarpingFunction::euclidean(), WarpingFunction::hyperbolic(), WarpingFunction::bounded()][which].clone();
        for regime in [Regime::General, Regime::NonnegCurvature] {
            let b = GrowthBound::new(regime, n, lambda1, &w).unwrap();
            prop_assert_eq!(b.log_value(1.0).unwrap(), 0.0);
            let table = b.table();
            prop_assert!(table.windows(2).all(|p| p[1].1 >= p[0].1));
            let mut last = 0.0;
            for r in log_grid(1.0, 1000.0, 3) {
                let v = b.log_value(r).unwrap();
                prop_assert!(v >= last);
                last = v;
            }
        }
    }

    #[test]
    fn prefactor_matches_branches(lambda1 in 0.01f64..10.0) {
        prop_assert!(rel(prefactor(lambda1), c(lambda1)) < 1e-15);
    }
}
