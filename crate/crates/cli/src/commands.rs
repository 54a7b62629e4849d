use std::path::Path;

use serde_json::{json, Value};

use conewave::cone_geometry::{dual_cone, kappa0, kappa_v, UnitVector};
use conewave::io::{
    parse_cone, parse_json, parse_witness_config, ApplyConfig, BlowupConfig, CommuteConfig, ExpansionConfig, GridSpec,
    KappaConfig, LadderExpectation, ProfileCheckConfig, WavefrontConfig, WindowSpec,
};
use conewave::multiplier_engine::{
    apply_multiplier, blowup_probe, dft_forward, ladder_trend, translation_commutation_check, GridField,
};
use conewave::sphere_profiles::{check_condition, SUPPORT_STEP};
use conewave::symbols::{make_test_sequence, BumpSpec, Symbol};
use conewave::wavefront::{
    bump_window, mollification_check, projection_check, report_from, scan_points, singular_from, EDescriptor,
};
use conewave::witness::{expansion_crosscheck, pv_pairing_1d, seeded_test_functions, LemmaWitness};

use crate::output::{num, read_config, Failure, Outcome, Output};

const PV_TOL: f64 = 1e-10;
const SLOPE_TOL: f64 = 0.10;

fn done(out: &Output, command: &str, summary: Value, accepted: bool) -> Result<Outcome, Failure> {
    let mut summary = summary;
    summary["accepted"] = json!(accepted);
    let path = out.json(command, &summary)?;
    summary["artifact"] = json!(path.display().to_string());
    Ok(Outcome { summary, accepted })
}

pub fn cone_dual(out: &Output, cfg: Option<&Path>) -> Result<Outcome, Failure> {
    let cone = parse_cone(&read_config(cfg, "cone dual")?)?;
    let dual = dual_cone(&cone)?;
    done(out, "cone-dual", json!({ "cone": cone, "dual": dual }), true)
}

pub fn cone_kappa(out: &Output, cfg: Option<&Path>) -> Result<Outcome, Failure> {
    let c: KappaConfig = parse_json(&read_config(cfg, "cone kappa")?)?;
    c.v_prime.validate()?;
    let neg = c.profile.support_samples(SUPPORT_STEP, |x| x < 0.0);
    let k0 = kappa0(&neg, &c.v_prime)?;
    let kv = match &c.v {
        Some(v) => {
            v.validate()?;
            Some(kappa_v(v, &c.v_prime)?)
        }
        None => None,
    };
    done(
        out,
        "cone-kappa",
        json!({ "kappa0": k0, "kappaV": kv, "negativeSupportSamples": neg.len(), "supportStepDeg": SUPPORT_STEP }),
        true,
    )
}

/// The verdict is reported; a failing condition is not an acceptance failure.
pub fn profile_check(out: &Output, cfg: Option<&Path>) -> Result<Outcome, Failure> {
    let c: ProfileCheckConfig = parse_json(&read_config(cfg, "profile check")?)?;
    c.v.validate()?;
    c.v_prime.validate()?;
    let report = check_condition(&c.profile, &c.v, &c.v_prime, c.use_kappa_v)?;
    done(out, "profile-check", json!({ "report": report, "useKappaV": c.use_kappa_v }), true)
}

pub fn witness_pv1d(out: &Output, ks: &[u32]) -> Result<Outcome, Failure> {
    let mut rows = Vec::new();
    let mut csv_rows = Vec::new();
    let mut accepted = true;
    for &k in ks {
        let bump = BumpSpec::pv_default(k)?;
        let value = pv_pairing_1d(k, &bump)?;
        let lower = (k as f64 / 2.0).ln();
        let upper = lower + 2.0 * 2f64.ln();
        let pass = value >= lower - PV_TOL && value <= upper + PV_TOL;
        accepted &= pass;
        csv_rows.push(vec![k.to_string(), num(value), num(lower), num(upper), num(PV_TOL), pass.to_string()]);
        rows.push(
            json!({ "k": k, "value": value, "lowerBound": lower, "upperBound": upper, "tol": PV_TOL, "pass": pass }),
        );
    }
    out.csv("witness-pv1d", &["k", "value", "lowerBound", "upperBound", "tol", "pass"], &csv_rows)?;
    let summary = if rows.len() == 1 { rows.pop().unwrap() } else { json!({ "rows": rows }) };
    done(out, "witness-pv1d", summary, accepted)
}

pub fn witness_lemma(out: &Output, cfg: Option<&Path>) -> Result<Outcome, Failure> {
    let config = parse_witness_config(&read_config(cfg, "witness lemma")?)?;
    let nonnegative = config.profile.negative_part().is_zero();
    let w = LemmaWitness::new(config)?;
    let rows = w.run()?;
    let c_star = w.slope_constant()?;
    let monotone = rows.windows(2).all(|p| p[1].i_value > p[0].i_value);
    let slope = rows.last().and_then(|r| r.slope_estimate.map(|s| (r.l, s)));
    let slope_check = slope.map(|(l, s)| {
        let rel = (s - c_star).abs() / c_star.abs();
        json!({ "l": l, "slope": s, "Cstar": c_star, "relErr": rel, "tol": SLOPE_TOL, "pass": rel <= SLOPE_TOL, "enforced": l >= 1024 })
    });
    let slope_ok =
        slope_check.as_ref().is_none_or(|c| !c["enforced"].as_bool().unwrap() || c["pass"].as_bool().unwrap());
    let accepted = rows.iter().all(|r| r.pass) && (!nonnegative || monotone) && slope_ok;
    let csv_rows: Vec<Vec<String>> = rows
        .iter()
        .map(|r| {
            vec![
                r.l.to_string(),
                num(r.i_value),
                num(r.lower_bound),
                num(r.margin),
                r.pass.to_string(),
                num(r.tol),
                r.slope_estimate.map(num).unwrap_or_default(),
                num(r.quad_error),
            ]
        })
        .collect();
    let csv =
        out.csv("witness-lemma", &["l", "I", "L", "margin", "pass", "tol", "slopeEstimate", "quadError"], &csv_rows)?;
    out.plot(
        "witness-lemma",
        &csv,
        "set logscale x\nset xlabel 'l'\nplot data using 1:2 with linespoints title 'I(l)', data using 1:3 with linespoints title 'L(l)'",
    )?;
    let summary = json!({
        "s": w.s,
        "kappa0Prime": w.kappa0_prime,
        "condition": w.condition,
        "Cstar": c_star,
        "rows": rows,
        "monotone": monotone,
        "monotoneRequired": nonnegative,
        "slopeCheck": slope_check,
        "csv": csv.display().to_string(),
    });
    done(out, "witness-lemma", summary, accepted)
}

pub fn witness_expansion(out: &Output, cfg: Option<&Path>, seed: u64) -> Result<Outcome, Failure> {
    let c: ExpansionConfig = parse_json(&read_config(cfg, "witness expansion")?)?;
    c.v.validate()?;
    let chis = if c.chi.is_empty() {
        let base = c.v.anchor().unwrap_or_else(|| UnitVector::basis(c.v.dim(), 0));
        seeded_test_functions(seed, c.count, &base, c.r, c.s)?
    } else {
        c.chi
            .iter()
            .map(|x| make_test_sequence(x.axis.clone(), &x.v_double_prime, c.r, c.s, x.l))
            .collect::<conewave::Result<Vec<_>>>()?
    };
    let mut rows = Vec::new();
    let mut csv_rows = Vec::new();
    let mut accepted = true;
    for (i, chi) in chis.iter().enumerate() {
        let e = expansion_crosscheck(&c.profile, &c.v, c.r, chi)?;
        let pass = e.rel_err <= c.tol;
        accepted &= pass;
        csv_rows.push(vec![
            i.to_string(),
            chi.l.to_string(),
            num(chi.axis.angle().to_degrees()),
            num(chi.support_angle.to_degrees()),
            num(e.direct.re),
            num(e.direct.im),
            num(e.expanded.re),
            num(e.expanded.im),
            num(e.rel_err),
            num(c.tol),
            pass.to_string(),
        ]);
        rows.push(json!({ "index": i, "testFunction": chi, "result": e, "tol": c.tol, "pass": pass }));
    }
    out.csv(
        "witness-expansion",
        &[
            "index",
            "l",
            "axisDeg",
            "supportDeg",
            "directRe",
            "directIm",
            "expandedRe",
            "expandedIm",
            "relErr",
            "tol",
            "pass",
        ],
        &csv_rows,
    )?;
    done(out, "witness-expansion", json!({ "seed": seed, "rows": rows }), accepted)
}

fn check_dims(symbol_dim: Option<usize>, n: usize) -> Result<(), Failure> {
    match symbol_dim {
        Some(d) if d != n => Err(Failure::Config(format!("symbol is {d}-dimensional but the grid is {n}-dimensional"))),
        _ => Ok(()),
    }
}

fn max_symbol(sym: &dyn Symbol, field: &GridField) -> Result<f64, Failure> {
    let spec = dft_forward(field);
    let mut m: f64 = 0.0;
    for i in 0..spec.values.len() {
        let xi = spec.frequency(i);
        let v = sym.eval(&xi);
        if !v.re.is_finite() || !v.im.is_finite() {
            return Err(conewave::Error::NonFinite(xi).into());
        }
        m = m.max(v.norm());
    }
    Ok(m)
}

pub fn multiplier_apply(out: &Output, cfg: Option<&Path>) -> Result<Outcome, Failure> {
    let c: ApplyConfig = parse_json(&read_config(cfg, "multiplier apply")?)?;
    check_dims(c.symbol.dim(), c.grid.n)?;
    let sym = c.symbol.build()?;
    let field = c.field.build(&c.grid)?;
    let result = apply_multiplier(&*sym, &field)?;
    let (n_in, n_out) = (field.l2_norm(), result.l2_norm());
    let max = max_symbol(&*sym, &field)?;
    let bound = max * n_in + c.tol;
    let pass = n_out <= bound;
    std::fs::create_dir_all(out.path("multiplier-apply", "bin").parent().unwrap())?;
    let bin = out.path("multiplier-apply", "bin");
    conewave::io::write_field(&bin, &result)?;
    let summary = json!({
        "inputNorm": n_in, "outputNorm": n_out, "maxSymbol": max, "bound": bound, "tol": c.tol, "pass": pass,
        "field": bin.display().to_string(),
    });
    done(out, "multiplier-apply", summary, pass)
}

pub fn multiplier_commute(out: &Output, cfg: Option<&Path>) -> Result<Outcome, Failure> {
    let c: CommuteConfig = parse_json(&read_config(cfg, "multiplier commute")?)?;
    check_dims(c.symbol.dim(), c.grid.n)?;
    let sym = c.symbol.build()?;
    let field = c.field.build(&c.grid)?;
    let mut rows = Vec::new();
    let mut accepted = true;
    for s in &c.shifts {
        let v = translation_commutation_check(&*sym, &field, s)?;
        let pass = v <= c.tol;
        accepted &= pass;
        let shift = s.iter().map(|x| x.to_string()).collect::<Vec<_>>().join(" ");
        rows.push(vec![shift, num(v), num(c.tol), pass.to_string()]);
    }
    let csv = out.csv("multiplier-commute", &["shift", "value", "tol", "pass"], &rows)?;
    done(out, "multiplier-commute", json!({ "shifts": c.shifts.len(), "csv": csv.display().to_string() }), accepted)
}

pub fn multiplier_blowup(out: &Output, cfg: Option<&Path>) -> Result<Outcome, Failure> {
    let c: BlowupConfig = parse_json(&read_config(cfg, "multiplier blowup")?)?;
    check_dims(c.symbol.dim(), c.n)?;
    if c.exponents.is_empty() || c.exponents.iter().any(|e| !(3..=16).contains(e)) {
        return Err(Failure::Config("exponents must lie in [3, 16]".into()));
    }
    let sym = c.symbol.build()?;
    let indices: Vec<usize> = c.exponents.iter().map(|e| *e as usize).collect();
    let family = |e: usize| c.field.build(&GridSpec { n: c.n, period: c.period, size: 1 << e });
    let probes = blowup_probe(&*sym, family, &indices, &c.k, c.p)?;
    let trend = ladder_trend(&probes)?;
    let accepted = match c.expect {
        LadderExpectation::Diverging => trend.diverging(),
        LadderExpectation::Increasing => trend.strictly_increasing,
        LadderExpectation::Stabilizing => trend.stabilizing(),
        LadderExpectation::None => true,
    };
    let rows: Vec<Vec<String>> = probes
        .iter()
        .map(|p| vec![p.index.to_string(), p.size.to_string(), p.p.to_string(), p.region.to_string(), num(p.value)])
        .collect();
    let csv = out.csv("multiplier-blowup", &["index", "N", "p", "K", "value"], &rows)?;
    out.plot(
        "multiplier-blowup",
        &csv,
        "set logscale x 2\nset xlabel 'N'\nplot data using 2:5 with linespoints title 'local norm'",
    )?;
    let summary = json!({
        "probes": probes, "trend": trend, "expect": c.expect,
        "criteria": { "diverging": "strictly increasing, slope > 0, r2 >= 0.9", "stabilizing": "last change <= 0.02" },
        "csv": csv.display().to_string(),
    });
    done(out, "multiplier-blowup", summary, accepted)
}

struct Scanned {
    e: EDescriptor,
    config: WavefrontConfig,
    field: GridField,
    locals: Vec<conewave::wavefront::LocalSigma>,
    x_grid: Vec<[f64; 2]>,
}

fn scan(cfg: Option<&Path>, command: &str) -> Result<Scanned, Failure> {
    let config: WavefrontConfig = parse_json(&read_config(cfg, command)?)?;
    let e = config.descriptor()?;
    if config.grid.n != 2 {
        return Err(Failure::Config(format!("wave front scans are planar, got n = {}", config.grid.n)));
    }
    let field = config.field.build(&config.grid)?;
    let x_grid = config.x_grid.points()?;
    let locals = scan_points(&field, e, &x_grid, &config.params)?;
    Ok(Scanned { e, config, field, locals, x_grid })
}

pub fn wavefront_estimate(out: &Output, cfg: Option<&Path>) -> Result<Outcome, Failure> {
    let s = scan(cfg, "wavefront estimate")?;
    let report = report_from(s.e, &s.config.params, &s.x_grid, &s.locals);
    let sing = singular_from(&s.locals);
    let step = s.config.params.step().to_degrees();
    let mut rows = Vec::new();
    for l in &s.locals {
        for (i, ex) in l.exponents.iter().enumerate() {
            rows.push(vec![
                num(l.x[0]),
                num(l.x[1]),
                num(i as f64 * step),
                ex.map(num).unwrap_or_else(|| "-inf".into()),
                l.flagged.contains(&i).to_string(),
            ]);
        }
    }
    let csv = out.csv("wavefront-estimate", &["x1", "x2", "angleDeg", "fittedExponent", "flagged"], &rows)?;
    out.plot(
        "wavefront-estimate",
        &csv,
        "set xlabel 'x1'\nset ylabel 'angle (deg)'\nplot data using 1:(stringcolumn(5) eq 'true' ? $3 : 1/0) with points pt 7 title 'flagged'",
    )?;
    let summary = json!({
        "E": s.e, "params": s.config.params, "report": report, "singSupp": sing,
        "membership": "fitted shell exponent >= -tauExp", "csv": csv.display().to_string(),
    });
    done(out, "wavefront-estimate", summary, true)
}

pub fn wavefront_check(out: &Output, cfg: Option<&Path>) -> Result<Outcome, Failure> {
    let s = scan(cfg, "wavefront check")?;
    let report = report_from(s.e, &s.config.params, &s.x_grid, &s.locals);
    let sing = singular_from(&s.locals);
    let cell = s.config.x_grid.cell();
    let projection = projection_check(&report, &sing, cell);
    let window = s.config.window.unwrap_or(WindowSpec { center: [0.0, 0.0], radius: s.config.params.window_radii[0] });
    let mollification =
        mollification_check(&s.field, bump_window(window.center, window.radius), s.e, &s.config.params)?;
    let summary = json!({
        "E": s.e, "params": s.config.params, "cell": cell, "window": window,
        "projectionCheck": projection, "mollificationCheck": mollification,
        "flagged": report.flagged.len(), "singSupp": sing,
    });
    done(out, "wavefront-check", summary, projection && mollification)
}
