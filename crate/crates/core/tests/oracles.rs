use std::f64::consts::PI;

use conewave::cone_geometry::{CircularCone, ConeSpec, UnitVector};
use conewave::multiplier_engine::{apply_multiplier, GridField};
use conewave::quad::integrate_adaptive;
use conewave::sphere_profiles::{check_condition, Cap, SphericalProfile};
use conewave::symbols::{ComplexHomogeneousSymbol, FnSymbol, ShiftSymbol};
use conewave::witness::{
    expansion_crosscheck, f_lambda, oscillatory_tail, seeded_test_functions, validate_prop26_reduction, LemmaWitness,
    Part, WitnessConfig,
};
use num_complex::Complex64;

/// `∫_lambda^inf e^{-it} t^{-m} dt` along `t = lambda - i y`, where the
/// integrand decays like `e^{-y}`.
fn rotated_tail(lambda: f64, m: i32) -> Complex64 {
    let g = |y: f64| Complex64::new(lambda, -y).powi(-m) * (-y).exp();
    let body: Complex64 =
        integrate_adaptive(g, &[0.0, lambda.min(1.0), 5.0, 20.0, 60.0], 1e-15 * lambda.powi(-m).max(1.0), 20_000)
            .unwrap()
            .value;
    -Complex64::i() * Complex64::from_polar(1.0, -lambda) * body
}

#[test]
fn oscillatory_tail_matches_rotated_contour() {
    for lambda in [0.05, 0.3, 1.0, 4.0, 25.0, 300.0] {
        for m in 2..=5 {
            let got = oscillatory_tail(lambda, m).unwrap();
            let want = rotated_tail(lambda, m);
            let scale = lambda.powi(1 - m).max(1e-300);
            assert!((got - want).norm() <= 1e-10 * scale.max(1.0), "lambda {lambda}, m {m}: {got} vs {want}");
        }
    }
}

#[test]
fn f_lambda_matches_rotated_contour() {
    for lambda in [0.02, 0.5, 2.0, 10.0, 100.0] {
        let got = f_lambda(lambda).unwrap();
        let want = rotated_tail(lambda, 2);
        assert!((got - want).norm() <= 1e-10 * (1.0 / lambda).max(1.0), "lambda {lambda}");
    }
}

fn gaussian_1d(period: f64, size: usize, sigma2: f64, center: f64) -> GridField {
    GridField::from_fn(1, period, size, |x| Complex64::new((-(x[0] - center).powi(2) / (2.0 * sigma2)).exp(), 0.0))
        .unwrap()
}

#[test]
fn heat_multiplier_matches_gaussian_convolution() {
    let (period, size, s2, t) = (32.0, 512, 0.25, 0.3);
    let u = gaussian_1d(period, size, s2, 0.0);
    let heat = FnSymbol(|xi: &[f64]| Complex64::new((-t * xi[0] * xi[0]).exp(), 0.0));
    let out = apply_multiplier(&heat, &u).unwrap();
    // e^{-x^2/(2 s2)} * heat kernel of time t has variance s2 + 2t
    let spread = s2 + 2.0 * t;
    let want = gaussian_1d(period, size, spread, 0.0);
    let amp = (s2 / spread).sqrt();
    let err = out.values.iter().zip(&want.values).map(|(a, b)| (a - amp * b).norm()).fold(0.0, f64::max);
    assert!(err <= 1e-12, "max error {err}");
}

#[test]
fn shift_symbol_translates() {
    let (period, size) = (16.0, 256);
    let u = gaussian_1d(period, size, 0.2, 0.0);
    let a = 1.37;
    let out = apply_multiplier(&ShiftSymbol { shift: vec![a] }, &u).unwrap();
    let want = gaussian_1d(period, size, 0.2, a);
    assert!(out.max_abs_diff(&want) <= 1e-12);
}

fn witness_3d() -> WitnessConfig {
    let e1 = UnitVector::basis(3, 0);
    WitnessConfig {
        v: ConeSpec::circular(e1.clone(), 20f64.to_radians(), false).unwrap(),
        v_prime: ConeSpec::circular(e1.clone(), 70f64.to_radians(), true).unwrap(),
        v_double_prime: CircularCone::from_half_angle(e1.clone(), 30f64.to_radians(), true).unwrap(),
        profile: SphericalProfile::caps(vec![Cap::new(e1, 20.0, 1.0)]).unwrap(),
        r: 1.0,
        s: None,
        l_schedule: vec![16, 64, 256],
        tol: 1e-6,
        quad_tol: 1e-10,
        chi_axis: None,
    }
}

/// `∫_{cap} ∫ chi~(w') (w.w')^{-3} dw' dw` in polar coordinates about the
/// common axis; the azimuthal integral is periodic, so a trapezoid rule is used.
fn slope_oracle_3d(w: &LemmaWitness, cap: f64) -> f64 {
    let chi = w.test_function(64).unwrap();
    let (rho, p) = (chi.support_angle, chi.plateau_angle);
    let inner = |gamma: f64| -> f64 {
        let ring = |beta: f64| -> f64 {
            let m = 256;
            let mut acc = 0.0;
            for k in 0..m {
                let phi = 2.0 * PI * k as f64 / m as f64;
                let c = gamma.cos() * beta.cos() + gamma.sin() * beta.sin() * phi.cos();
                acc += c.powi(-3);
            }
            acc * 2.0 * PI / m as f64 * chi.angular_of(beta) * beta.sin()
        };
        integrate_adaptive(ring, &[0.0, p, rho], 1e-12, 5_000).unwrap().value
    };
    2.0 * PI * integrate_adaptive(|g: f64| inner(g) * g.sin(), &[0.0, cap], 1e-11, 5_000).unwrap().value
}

#[test]
fn three_dimensional_witness_beats_bound_with_oracle_slope() {
    let w = LemmaWitness::new(witness_3d()).unwrap();
    let rows = w.run().unwrap();
    assert!(rows.iter().all(|r| r.pass));
    assert!(rows.windows(2).all(|p| p[1].i_value > p[0].i_value));
    let c_star = w.slope_constant().unwrap();
    let oracle = slope_oracle_3d(&w, 20f64.to_radians());
    assert!((c_star - oracle).abs() <= 1e-7 * oracle, "C* {c_star} vs oracle {oracle}");
    let last = rows.last().unwrap().slope_estimate.unwrap();
    assert!((last - c_star).abs() <= 0.1 * c_star);
}

#[test]
fn expansion_agrees_for_other_seeds() {
    let cfg = WitnessConfig::default_2d();
    let base = cfg.v_double_prime.axis.clone();
    for seed in [1u64, 99] {
        for chi in seeded_test_functions(seed, 2, &base, cfg.r, 1.5).unwrap() {
            let e = expansion_crosscheck(&cfg.profile, &cfg.v, cfg.r, &chi).unwrap();
            assert!(e.rel_err <= 1e-5, "seed {seed}: {}", e.rel_err);
        }
    }
}

#[test]
fn empty_negative_support_reduces_to_positivity() {
    let e1 = UnitVector::basis(2, 0);
    let p = SphericalProfile::caps(vec![Cap::new(e1.clone(), 15.0, 0.7)]).unwrap();
    let v = ConeSpec::circular(e1.clone(), 20f64.to_radians(), false).unwrap();
    let vp = ConeSpec::circular(e1, 40f64.to_radians(), true).unwrap();
    let r = check_condition(&p, &v, &vp, false).unwrap();
    assert!(r.holds && r.kappa.is_none() && r.rhs_scaled == 0.0);
    assert!((r.lhs - 0.7 * 30f64.to_radians()).abs() <= 1e-12);
}

#[test]
fn reduction_picks_the_certifying_branch() {
    let e1 = UnitVector::basis(2, 0);
    let v = ConeSpec::circular(e1.clone(), 20f64.to_radians(), false).unwrap();
    let vp = ConeSpec::circular(e1.clone(), 40f64.to_radians(), true).unwrap();
    let cap = |x: f64| SphericalProfile::caps(vec![Cap::new(e1.clone(), 15.0, x)]).unwrap();

    let re_pos = ComplexHomogeneousSymbol::new(cap(1.0), cap(0.0), 1.0).unwrap();
    assert_eq!(validate_prop26_reduction(&re_pos, &v, &vp).unwrap().certified, Some((Part::Re, false)));

    let im_neg = ComplexHomogeneousSymbol::new(cap(0.0), cap(-2.0), 1.0).unwrap();
    assert_eq!(validate_prop26_reduction(&im_neg, &v, &vp).unwrap().certified, Some((Part::Im, true)));

    let zero = ComplexHomogeneousSymbol::new(cap(0.0), cap(0.0), 1.0).unwrap();
    assert_eq!(validate_prop26_reduction(&zero, &v, &vp).unwrap().certified, None);
}
