//! Acceptance run: one line per criterion, all must pass.

use std::f64::consts::PI;
use std::process::Command;
use std::time::{Duration, Instant};

use conewave::cone_geometry::{dual_cone, kappa0, kappa_v, random_direction, ConeSpec, PolyhedralCone, UnitVector};
use conewave::io::{FieldSpec, GridSpec};
use conewave::multiplier_engine::{
    apply_multiplier, blowup_probe, box_indicator, dft_forward, dft_inverse, ladder_trend,
    translation_commutation_check, GridField, PNorm, Region,
};
use conewave::quad::{integrate_adaptive, linear_fit};
use conewave::seeded_rng;
use conewave::sphere_profiles::{check_condition, Cap, SphericalProfile, SUPPORT_STEP};
use conewave::symbols::{
    BumpSpec, ComplexHomogeneousSymbol, ConstantSymbol, HomogeneousSymbol, OddRayCutoff, RadialBumpSymbol, ShiftSymbol,
    SignSymbol, SmoothCutoff, Symbol,
};
use conewave::wavefront::{
    angle_gap_deg, bump_window, mollification_check, projection_check, report_from, scan_points, singular_from,
    EDescriptor, ScanParams, Scanner,
};
use conewave::witness::{expansion_crosscheck, pv_pairing_1d, seeded_test_functions, LemmaWitness, WitnessConfig};
use num_complex::Complex64;
use rand::Rng;

struct Verdict {
    pass: bool,
    detail: String,
}

fn verdict(pass: bool, detail: String) -> Verdict {
    Verdict { pass, detail }
}

fn within(elapsed: Duration, limit_s: f64) -> bool {
    elapsed.as_secs_f64() < limit_s
}

fn pv_witness() -> Verdict {
    let ks = [8u32, 32, 128, 512, 2048];
    let mut vals = Vec::new();
    let mut bounds_ok = true;
    for &k in &ks {
        let v = pv_pairing_1d(k, &BumpSpec::pv_default(k).unwrap()).unwrap();
        let lo = (k as f64 / 2.0).ln();
        bounds_ok &= v >= lo && v <= lo + 2.0 * 2f64.ln();
        vals.push(v);
    }
    let xs: Vec<f64> = ks.iter().map(|&k| (k as f64).ln()).collect();
    let (slope, _, _) = linear_fit(&xs, &vals);
    let pass = bounds_ok && (0.97..=1.03).contains(&slope);
    verdict(pass, format!("bounds {bounds_ok}, slope {slope:.5}"))
}

/// `C*` for `phi_1 = 1` on the arc of half-width `a` around the axis of chi~:
/// `∫∫ chi~(beta) / cos^2(alpha - beta) d beta d alpha` by nested adaptive quadrature.
fn slope_oracle(w: &LemmaWitness, half_v: f64) -> f64 {
    let chi = w.test_function(64).unwrap();
    let (rho, p) = (chi.support_angle, chi.plateau_angle);
    let inner = |alpha: f64| -> f64 {
        integrate_adaptive(
            |beta: f64| chi.angular_of(beta.abs()) / (alpha - beta).cos().powi(2),
            &[-rho, -p, p, rho],
            1e-13,
            10_000,
        )
        .unwrap()
        .value
    };
    integrate_adaptive(inner, &[-half_v, 0.0, half_v], 1e-11, 10_000).unwrap().value
}

fn lemma_witness() -> Verdict {
    let cfg = WitnessConfig::default_2d();
    let w = LemmaWitness::new(cfg).unwrap();
    let rows = w.run().unwrap();
    let c_star = w.slope_constant().unwrap();
    let oracle = slope_oracle(&w, 20f64.to_radians());
    let all_pass = rows.iter().all(|r| r.i_value >= r.lower_bound - 1e-6);
    let increasing = rows.windows(2).all(|p| p[1].i_value > p[0].i_value);
    let at = |l: u32| rows.iter().find(|r| r.l == l).unwrap().i_value;
    let slope = (at(1024) - at(256)) / 4f64.ln();
    let slope_ok = (slope - c_star).abs() <= 0.1 * c_star;
    let oracle_ok = (c_star - oracle).abs() <= 1e-6 * oracle;
    let detail = format!(
        "I >= L - 1e-6: {all_pass}, increasing {increasing}, slope {slope:.6} vs C* {c_star:.7} (oracle {oracle:.7})"
    );
    verdict(all_pass && increasing && slope_ok && oracle_ok, detail)
}

fn expansion() -> Verdict {
    let cfg = WitnessConfig::default_2d();
    let w = LemmaWitness::new(cfg.clone()).unwrap();
    let base = cfg.v_double_prime.axis.clone();
    let chis = seeded_test_functions(7, 3, &base, cfg.r, w.s).unwrap();
    let mut worst = 0.0f64;
    for chi in &chis {
        let res = expansion_crosscheck(&cfg.profile, &cfg.v, cfg.r, chi).unwrap();
        worst = worst.max(res.rel_err);
    }
    verdict(worst <= 1e-5, format!("max relErr {worst:.3e} over {} test functions", chis.len()))
}

fn angle_of(deg: f64) -> UnitVector {
    UnitVector::from_angle(deg.to_radians())
}

fn circ(axis_deg: f64, half_deg: f64, open: bool) -> ConeSpec {
    ConeSpec::circular(angle_of(axis_deg), half_deg.to_radians(), open).unwrap()
}

/// `∫ max(±phi, 0)` over the circle by adaptive quadrature on the raw profile.
fn brute_parts(p: &SphericalProfile) -> (f64, f64) {
    let part = |sign: f64| {
        integrate_adaptive(|t: f64| (sign * p.eval(&[t.cos(), t.sin()])).max(0.0), &[-PI, 0.0, PI], 1e-11, 200_000)
            .unwrap()
            .value
    };
    (part(1.0), part(-1.0))
}

/// Directions at `step` degrees over the whole circle.
fn circle(step_deg: f64) -> Vec<[f64; 2]> {
    let m = (360.0 / step_deg).round() as usize;
    (0..m)
        .map(|k| {
            let t = (k as f64 * step_deg).to_radians();
            [t.cos(), t.sin()]
        })
        .collect()
}

fn brute_kappa0(p: &SphericalProfile, v_prime: &ConeSpec, step_deg: f64) -> f64 {
    let dirs = circle(step_deg);
    let neg: Vec<&[f64; 2]> = dirs.iter().filter(|w| p.eval(&w[..]) < 0.0).collect();
    dirs.iter()
        .filter(|w| v_prime.contains(&w[..]))
        .map(|w| neg.iter().map(|u| u[0] * w[0] + u[1] * w[1]).fold(f64::INFINITY, f64::min))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn brute_kappa_v(v: &ConeSpec, v_prime: &ConeSpec, step_deg: f64) -> f64 {
    let dirs = circle(step_deg);
    let inside: Vec<&[f64; 2]> = dirs.iter().filter(|w| v.contains(&w[..])).collect();
    dirs.iter()
        .filter(|w| v_prime.contains(&w[..]))
        .map(|w| inside.iter().map(|u| u[0] * w[0] + u[1] * w[1]).fold(f64::INFINITY, f64::min))
        .fold(f64::NEG_INFINITY, f64::max)
}

fn mixed_profile(neg_value: f64) -> SphericalProfile {
    SphericalProfile::caps(vec![Cap::new(angle_of(0.0), 10.0, 1.0), Cap::new(angle_of(40.0), 5.0, neg_value)]).unwrap()
}

fn mixed_sign() -> Verdict {
    let v = circ(20.0, 32.0, false);
    let vp = circ(20.0, 42.0, true);
    let bad = mixed_profile(-3.0);
    let good = mixed_profile(3.0);
    let rb = check_condition(&bad, &v, &vp, false).unwrap();
    let rg = check_condition(&good, &v, &vp, false).unwrap();
    let (lhs, rhs) = brute_parts(&bad);
    let (lhs_g, rhs_g) = brute_parts(&good);
    let agree = (rb.lhs - lhs).abs() <= 1e-8
        && (rb.rhs_raw - rhs).abs() <= 1e-8
        && (rg.lhs - lhs_g).abs() <= 1e-8
        && (rg.rhs_raw - rhs_g).abs() <= 1e-8;
    let pass = !rb.holds && rg.holds && agree;
    let detail = format!(
        "violating holds={}, flipped holds={}, lhs {:.10} (oracle {lhs:.10}), rhs {:.10} (oracle {rhs:.10})",
        rb.holds, rg.holds, rb.lhs, rb.rhs_raw
    );
    verdict(pass, detail)
}

fn random_field<R: Rng>(rng: &mut R, dim: usize) -> GridField {
    let size = [16usize, 32, 64][rng.random_range(0..3)];
    let period = rng.random_range(4.0..16.0);
    let values = (0..size.pow(dim as u32))
        .map(|_| Complex64::new(rng.random::<f64>() - 0.5, rng.random::<f64>() - 0.5))
        .collect();
    GridField::new(dim, period, size, values).unwrap()
}

fn random_symbol<R: Rng>(rng: &mut R, dim: usize) -> Box<dyn Symbol> {
    let pick = rng.random_range(0..if dim == 1 { 5 } else { 7 });
    match pick {
        0 => Box::new(ConstantSymbol(rng.random_range(-3.0..3.0))),
        1 => Box::new(ShiftSymbol { shift: (0..dim).map(|_| rng.random_range(-2.0..2.0)).collect() }),
        2 => Box::new(SignSymbol),
        3 => {
            let a = rng.random_range(0.0..1.0);
            Box::new(RadialBumpSymbol(BumpSpec::new(a, a + 1.0, a + 2.0, a + 4.0).unwrap()))
        }
        4 if dim == 1 => Box::new(OddRayCutoff { radius: rng.random_range(0.5..2.0) }),
        4 => {
            let axis = rng.random_range(0.0..360.0);
            let half = rng.random_range(5.0..40.0);
            Box::new(
                SmoothCutoff::new(
                    circ(axis, half, false),
                    circ(axis, half + 10.0, true),
                    rng.random_range(0.5..2.0),
                    1.0,
                )
                .unwrap(),
            )
        }
        5 => {
            let caps = (0..3)
                .map(|_| {
                    Cap::new(
                        angle_of(rng.random_range(0.0..360.0)),
                        rng.random_range(5.0..60.0),
                        rng.random_range(-2.0..2.0),
                    )
                })
                .collect();
            Box::new(HomogeneousSymbol::new(SphericalProfile::caps(caps).unwrap(), rng.random_range(0.1..2.0)).unwrap())
        }
        _ => {
            let mut profile = || {
                SphericalProfile::caps(vec![Cap::new(
                    angle_of(rng.random_range(0.0..360.0)),
                    rng.random_range(5.0..90.0),
                    rng.random_range(-2.0..2.0),
                )])
                .unwrap()
            };
            let (re, im) = (profile(), profile());
            Box::new(ComplexHomogeneousSymbol::new(re, im, 1.0).unwrap())
        }
    }
}

fn max_symbol_on_grid(sym: &dyn Symbol, f: &GridField) -> f64 {
    let spec = dft_forward(f);
    (0..spec.values.len()).map(|i| sym.eval(&spec.frequency(i)).norm()).fold(0.0, f64::max)
}

fn multiplier_invariants() -> Verdict {
    let mut rng = seeded_rng(2024);
    let mut plancherel_ok = 0;
    let mut roundtrip = 0.0f64;
    for i in 0..100 {
        let dim = 1 + i % 2;
        let f = random_field(&mut rng, dim);
        let sym = random_symbol(&mut rng, dim);
        let out = apply_multiplier(&sym, &f).unwrap();
        if out.l2_norm() <= max_symbol_on_grid(&*sym, &f) * f.l2_norm() + 1e-12 {
            plancherel_ok += 1;
        }
        let back = dft_inverse(&dft_forward(&f));
        let scale = f.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
        roundtrip = roundtrip.max(back.max_abs_diff(&f) / scale);
    }
    let mut commute = 0.0f64;
    for i in 0..20 {
        let dim = 1 + i % 2;
        let f = random_field(&mut rng, dim);
        let sym = random_symbol(&mut rng, dim);
        let shift: Vec<i64> = (0..dim).map(|_| rng.random_range(-(f.size as i64)..f.size as i64)).collect();
        commute = commute.max(translation_commutation_check(&sym, &f, &shift).unwrap());
    }
    let pass = plancherel_ok == 100 && commute <= 1e-10 && roundtrip <= 1e-12;
    let detail = format!("Plancherel {plancherel_ok}/100, commutation {commute:.2e}, roundtrip {roundtrip:.2e}");
    verdict(pass, detail)
}

/// Imaginary part of the periodic Hilbert pair of `1_[-1,1]` on a period `l`:
/// `(1/l) PV ∫_{-1}^{1} cot(pi (x - y) / l) dy`, with the `1/(x - y)` part
/// subtracted and integrated exactly.
fn hilbert_oracle(x: f64, l: f64) -> f64 {
    let k = PI / l;
    let smooth = |y: f64| {
        let t = x - y;
        if t.abs() < 1e-6 {
            -k * t / 3.0
        } else {
            1.0 / (k * t).tan() - 1.0 / (k * t)
        }
    };
    let regular = integrate_adaptive(smooth, &[-1.0, 1.0], 1e-14, 10_000).unwrap().value;
    let singular = ((x + 1.0) / (x - 1.0)).abs().ln() / k;
    (regular + singular) / l
}

fn hilbert_blowup() -> Verdict {
    let period = 16.0;
    let k = Region::cube(1, 2.0);
    let sizes: Vec<usize> = (10..=16).map(|j| 1usize << j).collect();
    let probes =
        blowup_probe(&OddRayCutoff { radius: 1.0 }, |n| box_indicator(1, period, n, 1.0), &sizes, &k, PNorm::Inf)
            .unwrap();
    let trend = ladder_trend(&probes).unwrap();
    let slope_ok = (0.25..=0.40).contains(&trend.slope);

    let n = 1usize << 14;
    let f = box_indicator(1, period, n, 1.0).unwrap();
    let out = apply_multiplier(&SignSymbol, &f).unwrap();
    let candidates: Vec<usize> = (0..n)
        .filter(|&j| {
            let x = f.coordinate(j);
            x.abs() <= 2.0 && (x - 1.0).abs().min((x + 1.0).abs()) >= 0.1
        })
        .collect();
    let stride = candidates.len() / 50;
    let points: Vec<usize> = candidates.iter().step_by(stride).take(50).copied().collect();
    let worst = points
        .iter()
        .map(|&j| {
            let x = f.coordinate(j);
            let got = out.values[j];
            (got.im - hilbert_oracle(x, period)).abs().max(got.re.abs())
        })
        .fold(0.0, f64::max);
    let pass = slope_ok && points.len() == 50 && worst <= 1e-3;
    verdict(
        pass,
        format!(
            "ladder slope {:.4} (R^2 {:.4}), pointwise max err {worst:.2e} at {} points",
            trend.slope,
            trend.r2,
            points.len()
        ),
    )
}

fn square_blowup() -> Verdict {
    let period = 8.0;
    let k = Region::cube(2, 2.0);
    let sizes = [1024usize, 2048, 4096, 8192];
    let cone = SmoothCutoff::new(circ(0.0, 10.0, false), circ(0.0, 20.0, true), 1.0, 1.0).unwrap();
    let family = |n: usize| box_indicator(2, period, n, 0.5);
    let main = ladder_trend(&blowup_probe(&cone, family, &sizes, &k, PNorm::One).unwrap()).unwrap();
    let control_sym = RadialBumpSymbol(BumpSpec::new(0.0, 1.0, 4.0, 8.0).unwrap());
    let control = ladder_trend(&blowup_probe(&control_sym, family, &sizes, &k, PNorm::One).unwrap()).unwrap();
    let pass = main.strictly_increasing && control.stabilizing();
    let detail = format!(
        "cone ladder increasing {} (slope {:.4}), control last change {:.2e}",
        main.strictly_increasing, main.slope, control.last_change
    );
    verdict(pass, detail)
}

/// Membership in the dual by brute force over sampled directions of the cone.
fn brute_dual_member(x: &[f64], samples: &[Vec<f64>]) -> bool {
    samples.iter().all(|y| y.iter().zip(x).map(|(a, b)| a * b).sum::<f64>() >= -1e-12)
}

/// Boundary and axis directions of a circular cone.
fn circular_samples(axis: &UnitVector, half: f64) -> Vec<Vec<f64>> {
    let a = axis.as_slice();
    if a.len() == 2 {
        let t = axis.angle();
        return [t - half, t, t + half].iter().map(|s| vec![s.cos(), s.sin()]).collect();
    }
    let helper = if a[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let cross =
        |u: &[f64], v: &[f64]| [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
    let mut t1 = cross(a, &helper);
    let nn = (t1[0] * t1[0] + t1[1] * t1[1] + t1[2] * t1[2]).sqrt();
    t1.iter_mut().for_each(|v| *v /= nn);
    let t2 = cross(a, &t1);
    let mut out = vec![a.to_vec()];
    for k in 0..7200 {
        let phi = 2.0 * PI * k as f64 / 7200.0;
        out.push((0..3).map(|i| half.cos() * a[i] + half.sin() * (phi.cos() * t1[i] + phi.sin() * t2[i])).collect());
    }
    out
}

fn cone_geometry() -> Verdict {
    let mut rng = seeded_rng(99);
    let mut worst_agree = 1.0f64;
    for c in 0..20 {
        let dim = 2 + c % 2;
        let axis = random_direction(dim, &mut rng);
        let (cone, samples) = if c < 10 {
            let count = rng.random_range(dim..dim + 4);
            let gens: Vec<UnitVector> = (0..count)
                .map(|_| loop {
                    let g = random_direction(dim, &mut rng);
                    if g.angle_to(&axis) < 60f64.to_radians() {
                        break g;
                    }
                })
                .collect();
            let samples = gens.iter().map(|g| g.as_slice().to_vec()).collect();
            (ConeSpec::Polyhedral(PolyhedralCone::new(gens).unwrap()), samples)
        } else {
            let half = rng.random_range(5f64..85.0).to_radians();
            (ConeSpec::circular(axis.clone(), half, false).unwrap(), circular_samples(&axis, half))
        };
        let dual = dual_cone(&cone).unwrap();
        let trials = 100_000;
        let mut agree = 0usize;
        for _ in 0..trials {
            let x = random_direction(dim, &mut rng);
            if dual.contains(x.as_slice()) == brute_dual_member(x.as_slice(), &samples) {
                agree += 1;
            }
        }
        worst_agree = worst_agree.min(agree as f64 / trials as f64);
    }

    let mut kappa_err = 0.0f64;
    let cases = [
        (mixed_profile(-3.0), circ(20.0, 32.0, false), circ(20.0, 42.0, true)),
        (
            SphericalProfile::caps(vec![Cap::new(angle_of(90.0), 15.0, 1.0), Cap::new(angle_of(60.0), 8.0, -0.5)])
                .unwrap(),
            circ(75.0, 35.0, false),
            circ(75.0, 50.0, true),
        ),
        (
            SphericalProfile::caps(vec![Cap::new(angle_of(-30.0), 12.0, 2.0), Cap::new(angle_of(0.0), 6.0, -1.0)])
                .unwrap(),
            circ(-15.0, 30.0, false),
            circ(-15.0, 70.0, true),
        ),
    ];
    let fine = SUPPORT_STEP.to_degrees() / 10.0;
    for (p, v, vp) in &cases {
        let neg = p.support_samples(SUPPORT_STEP, |x| x < 0.0);
        kappa_err = kappa_err.max((kappa0(&neg, vp).unwrap() - brute_kappa0(p, vp, fine)).abs());
        kappa_err = kappa_err.max((kappa_v(v, vp).unwrap() - brute_kappa_v(v, vp, fine)).abs());
    }
    let pass = worst_agree >= 0.999 && kappa_err <= 1e-4;
    verdict(pass, format!("worst dual agreement {:.5} over 20 cones, kappa max deviation {kappa_err:.2e}", worst_agree))
}

/// (globally flagged directions, projection of WF, singular support) -> ok
type ShapeCheck<'a> = dyn Fn(&[usize], &[[f64; 2]], &[[f64; 2]]) -> bool + 'a;

fn wavefront_suite() -> Verdict {
    let grid = GridSpec { n: 2, period: 16.0, size: 512 };
    let params = ScanParams::default();
    let step = params.step();
    let cell = 0.5;
    let line: Vec<[f64; 2]> = (-2..=2).map(|i| [i as f64 * cell, 0.0]).chain([[0.0, 1.0]]).collect();
    let mut notes = Vec::new();
    let mut pass = true;

    let mut run = |name: &str, field: FieldSpec, e: EDescriptor, check: &ShapeCheck<'_>| {
        let u = field.build(&grid).unwrap();
        let scanner = Scanner::new(e, params.clone()).unwrap();
        let global: Vec<usize> =
            scanner.sigma(&u).unwrap().iter().enumerate().filter(|(_, s)| s.in_sigma).map(|(i, _)| i).collect();
        let locals = scan_points(&u, e, &line, &params).unwrap();
        let report = report_from(e, &params, &line, &locals);
        let sing = singular_from(&locals);
        let proj = report.projection();
        let ok_shape = check(&global, &proj, &sing);
        let ok_proj = projection_check(&report, &sing, cell);
        let ok_moll = mollification_check(&u, bump_window([0.0, 0.0], 2.0), e, &params).unwrap();
        notes.push(format!(
            "{name}: {} flagged, shape {ok_shape}, projection {ok_proj}, mollification {ok_moll}",
            global.len()
        ));
        pass &= ok_shape && ok_proj && ok_moll;
    };

    run("gaussian", FieldSpec::Gaussian { sigma: 0.5, center: None }, EDescriptor::Sobolev(2.0), &|g, p, s| {
        g.is_empty() && p.is_empty() && s.is_empty()
    });
    let m = params.directions;
    run("delta", FieldSpec::Delta { at: None }, EDescriptor::Sobolev(0.0), &|g, p, _| {
        g.len() == m && p == [[0.0, 0.0]]
    });
    run("jump", FieldSpec::JumpSheet { radius: 3.0 }, EDescriptor::Sobolev(0.75), &|g, p, _| {
        let near_axis = g.iter().all(|&i| {
            let a = (i as f64 * step).to_degrees();
            angle_gap_deg(a, 0.0).min(angle_gap_deg(a, 180.0)) <= 15.0
        });
        !g.is_empty() && near_axis && !p.is_empty() && p.iter().all(|x| x[0].abs() <= cell && x[1].abs() <= 3.0)
    });
    verdict(pass, notes.join("; "))
}

fn refusal() -> Verdict {
    let dir = tempfile::tempdir().unwrap();
    let mut ok = true;
    let mut codes = Vec::new();
    for tag in ["L1", "Linf", "C0"] {
        let cfg = serde_json::json!({
            "field": {"kind": "gaussian", "sigma": 0.5},
            "grid": {"n": 2, "L": 16.0, "N": 64},
            "E": {"tag": tag},
            "xGrid": [[0.0, 0.0]],
        });
        let path = dir.path().join(format!("{tag}.json"));
        std::fs::write(&path, cfg.to_string()).unwrap();
        let out = Command::new(env!("CARGO_BIN_EXE_conewave"))
            .args(["wavefront", "estimate", "--config"])
            .arg(&path)
            .arg("--out")
            .arg(dir.path())
            .output()
            .unwrap();
        let stderr = String::from_utf8_lossy(&out.stderr);
        let code = out.status.code();
        ok &= code == Some(2) && stderr.contains("refused") && stderr.contains("not defined by conic cut-offs");
        codes.push(format!("{tag}->{code:?}"));
    }
    verdict(ok, codes.join(", "))
}

#[test]
fn acceptance() {
    type Criterion = (&'static str, f64, fn() -> Verdict);
    let criteria: [Criterion; 10] = [
        ("1 pv witness", 5.0, pv_witness),
        ("2 lemma witness n=2", 60.0, lemma_witness),
        ("3 expansion cross-check", 30.0, expansion),
        ("4 mixed-sign condition", f64::INFINITY, mixed_sign),
        ("5 multiplier invariants", f64::INFINITY, multiplier_invariants),
        ("6 hilbert blow-up", 60.0, hilbert_blowup),
        ("7 square blow-up n=2", 120.0, square_blowup),
        ("8 cone geometry oracle", f64::INFINITY, cone_geometry),
        ("9 wave front suite", 120.0, wavefront_suite),
        ("10 refusal", f64::INFINITY, refusal),
    ];
    let mut failed = Vec::new();
    for (name, limit, f) in criteria {
        let t = Instant::now();
        let v = f();
        let elapsed = t.elapsed();
        let pass = v.pass && within(elapsed, limit);
        println!(
            "{} criterion {name}: {} [{:.2} s{}]",
            if pass { "PASS" } else { "FAIL" },
            v.detail,
            elapsed.as_secs_f64(),
            if limit.is_finite() { format!(" < {limit} s") } else { String::new() }
        );
        if !pass {
            failed.push(name);
        }
    }
    assert!(failed.is_empty(), "failed criteria: {failed:?}");
}
