//! Quantitative divergence witnesses: the one-dimensional principal value
//! pairing, the auxiliary oscillatory integral `f(lambda)`, the pairing
//! `I(l)` against its explicit logarithmic lower bound, the cross-check of
//! the integrated-by-parts expansion of `<F phi, chi>`, and the reduction of
//! complex symbols to real angular profiles.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cone_geometry::{frame_direction, kappa0_prime, tangent_frame, CircularCone, ConeSpec, UnitVector};
use crate::error::{invalid, Error, Result};
use crate::quad::{integrate_adaptive, log_panels, Chebyshev, GaussLegendre};
use crate::sphere_profiles::{
    check_condition, find_s, report, scaled_rhs, ConditionReport, ProfileQuadrature, SphericalProfile, SUPPORT_STEP,
};
use crate::symbols::{make_test_sequence, BumpSpec, ComplexHomogeneousSymbol, TestFunction};

const I: Complex64 = Complex64 { re: 0.0, im: 1.0 };
/// Radial panels per decade on the support of `theta_l`.
pub const RADIAL_PANELS_PER_DECADE: usize = 128;
const RADIAL_ORDER: usize = 6;
const CHEB_NODES: usize = 48;

/// `∫_0^1 chi_k(x) / x dx` by adaptive Gauss–Kronrod to absolute tolerance `1e-10`.
pub fn pv_pairing_1d(k: u32, bump: &BumpSpec) -> Result<f64> {
    if k < 3 {
        return invalid(format!("k must be at least 3, got {k}"));
    }
    if bump.a <= 0.0 || bump.d > 1.0 {
        return Err(Error::SupportViolation(format!("bump support ({}, {}) must lie in (0, 1]", bump.a, bump.d)));
    }
    let r = integrate_adaptive(|x| bump.eval(x) / x, &[bump.a, bump.b, bump.c, bump.d], 1e-10, 20_000)?;
    Ok(r.value)
}

/// `∫_T^inf e^{-i rho} rho^{-m} d rho` by three integrations by parts (for `T` large).
fn oscillatory_tail_asymptotic(t: f64, m: i32) -> Complex64 {
    let mf = m as f64;
    Complex64::from_polar(1.0, -t) * Complex64::new(mf * t.powi(-m - 1), -t.powi(-m) + mf * (mf + 1.0) * t.powi(-m - 2))
}

/// `∫_lambda^inf e^{-i rho} rho^{-m} d rho`, quadrature up to `lambda + 200 pi`
/// (geometric panels near small `lambda`, then half periods) plus an
/// asymptotic tail.
pub fn oscillatory_tail(lambda: f64, m: i32) -> Result<Complex64> {
    let end = lambda + 200.0 * PI;
    let mut br = vec![lambda];
    let mut x = lambda;
    while 2.0 * x < lambda + 2.0 * PI {
        x *= 2.0;
        br.push(x);
    }
    let mut x = lambda + 2.0 * PI;
    while x < end {
        br.push(x);
        x += PI;
    }
    br.push(end);
    let scale = lambda.powi(1 - m).max(1.0);
    let body = integrate_adaptive(|rho| Complex64::from_polar(rho.powi(-m), -rho), &br, 1e-14 * scale, 50_000)?;
    Ok(body.value + oscillatory_tail_asymptotic(end, m))
}

/// `f(lambda) = ∫_lambda^inf e^{-i rho} rho^{-2} d rho`, rewritten by two
/// integrations by parts as `-i e^{-i lambda}/lambda^2 + 2 e^{-i lambda}/lambda^3 - 6 R_4`.
pub fn f_lambda(lambda: f64) -> Result<Complex64> {
    if !(lambda > 0.0 && lambda.is_finite()) {
        return invalid(format!("f(lambda) needs lambda > 0, got {lambda}"));
    }
    let e = Complex64::from_polar(1.0, -lambda);
    let r4 = oscillatory_tail(lambda, 4)?;
    Ok(-I * e / (lambda * lambda) + 2.0 * e / lambda.powi(3) - 6.0 * r4)
}

fn default_tol() -> f64 {
    1e-6
}

fn default_quad_tol() -> f64 {
    1e-10
}

/// Inputs of the `n`-dimensional pairing witness.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessConfig {
    #[serde(rename = "V")]
    pub v: ConeSpec,
    #[serde(rename = "Vprime")]
    pub v_prime: ConeSpec,
    #[serde(rename = "Vdoubleprime")]
    pub v_double_prime: CircularCone,
    pub profile: SphericalProfile,
    pub r: f64,
    /// Fixed `s`; when absent the smallest admissible `1.5 * 2^j` is used.
    #[serde(default)]
    pub s: Option<f64>,
    #[serde(rename = "lSchedule")]
    pub l_schedule: Vec<u32>,
    /// Acceptance slack for `I(l) >= L(l) - tol`.
    #[serde(default = "default_tol")]
    pub tol: f64,
    /// Relative convergence tolerance of the angular quadratures.
    #[serde(rename = "quadTol", default = "default_quad_tol")]
    pub quad_tol: f64,
    /// Centre of `chi~`; defaults to the axis of `V''`.
    #[serde(rename = "chiAxis", default)]
    pub chi_axis: Option<UnitVector>,
}

impl WitnessConfig {
    /// `V = circ(e1, 20°)`, `phi_1 = 1` on it, `V' = int circ(e1, 70°)`,
    /// `V'' = circ(e1, 30°)`, `r = 1`, `l ∈ {16, 64, 256, 1024}`.
    pub fn default_2d() -> Self {
        let e1 = UnitVector::basis(2, 0);
        let deg = |x: f64| x.to_radians();
        Self {
            v: ConeSpec::circular(e1.clone(), deg(20.0), false).expect("valid"),
            v_prime: ConeSpec::circular(e1.clone(), deg(70.0), true).expect("valid"),
            v_double_prime: CircularCone::from_half_angle(e1.clone(), deg(30.0), true).expect("valid"),
            profile: SphericalProfile::caps(vec![crate::sphere_profiles::Cap::new(e1, 20.0, 1.0)]).expect("valid"),
            r: 1.0,
            s: None,
            l_schedule: vec![16, 64, 256, 1024],
            tol: default_tol(),
            quad_tol: default_quad_tol(),
            chi_axis: None,
        }
    }
}

/// One row of the witness table.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WitnessResult {
    pub l: u32,
    #[serde(rename = "I")]
    pub i_value: f64,
    #[serde(rename = "L")]
    pub lower_bound: f64,
    pub margin: f64,
    /// `(I(l) - I(l_prev)) / ln(l / l_prev)` along the schedule.
    #[serde(rename = "slopeEstimate")]
    pub slope_estimate: Option<f64>,
    #[serde(rename = "quadError")]
    pub quad_error: f64,
    pub tol: f64,
    pub pass: bool,
}

/// Validated witness with precomputed norms and constants.
#[derive(Debug, Clone)]
pub struct LemmaWitness {
    pub config: WitnessConfig,
    pub dim: usize,
    pub s: f64,
    pub kappa0_prime: f64,
    pub condition: ConditionReport,
}

/// Nodes `omega'` with weights `chi~(omega') d omega'`.
struct AngularRule {
    nodes: Vec<UnitVector>,
    weights: Vec<f64>,
}

fn angular_rule(chi: &TestFunction, order: usize) -> Result<AngularRule> {
    let gl = GaussLegendre::new(order);
    let (rho, p) = (chi.support_angle, chi.plateau_angle);
    let mut nodes = Vec::new();
    let mut weights = Vec::new();
    match chi.dim() {
        2 => {
            let base = chi.axis.angle();
            for (a, b) in [(-rho, -p), (-p, p), (p, rho)] {
                for (beta, w) in gl.mapped(a, b) {
                    nodes.push(UnitVector::from_angle(base + beta));
                    weights.push(w * chi.angular_of(beta.abs()));
                }
            }
        }
        3 => {
            let (t1, t2) = tangent_frame(&chi.axis);
            let m_az = 2 * order;
            for (a, b) in [(0.0, p), (p, rho)] {
                for (beta, w) in gl.mapped(a, b) {
                    let c = w * beta.sin() * chi.angular_of(beta) * 2.0 * PI / m_az as f64;
                    for k in 0..m_az {
                        let az = 2.0 * PI * k as f64 / m_az as f64;
                        nodes.push(frame_direction(&chi.axis, &t1, &t2, beta, az));
                        weights.push(c);
                    }
                }
            }
        }
        d => return Err(Error::UnsupportedDimension(d)),
    }
    Ok(AngularRule { nodes, weights })
}

/// Radial nodes `rho'` with weights `theta_l(rho') d rho'`.
fn radial_rule(bump: &BumpSpec) -> (Vec<f64>, Vec<f64>) {
    let gl = GaussLegendre::new(RADIAL_ORDER);
    let br = log_panels(bump.a, bump.d, RADIAL_PANELS_PER_DECADE, &[bump.b, bump.c]);
    let mut rho = Vec::new();
    let mut w = Vec::new();
    for p in br.windows(2) {
        for (x, wx) in gl.mapped(p[0], p[1]) {
            rho.push(x);
            w.push(wx * bump.eval(x));
        }
    }
    (rho, w)
}

/// A direction at angle `gamma` from `axis`.
fn polar_direction(axis: &UnitVector, gamma: f64) -> UnitVector {
    if axis.dim() == 2 {
        UnitVector::from_angle(axis.angle() + gamma)
    } else {
        let (t1, t2) = tangent_frame(axis);
        frame_direction(axis, &t1, &t2, gamma, 0.0)
    }
}

fn min_pair_dot(outer: &ProfileQuadrature, inner: &AngularRule) -> f64 {
    outer.nodes.iter().flat_map(|w| inner.nodes.iter().map(move |u| w.dot(u.as_slice()))).fold(f64::INFINITY, f64::min)
}

impl LemmaWitness {
    pub fn new(config: WitnessConfig) -> Result<Self> {
        let dim = config.profile.dim();
        for d in [config.v.dim(), config.v_prime.dim(), config.v_double_prime.dim()] {
            if d != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: d });
            }
        }
        if !(config.r > 0.0) {
            return invalid(format!("r must be positive, got {}", config.r));
        }
        config.profile.check_support(&config.v)?;
        let neg = config.profile.support_samples(SUPPORT_STEP, |x| x < 0.0);
        let k0p = kappa0_prime(&neg, &config.v_double_prime, &config.v_prime)?;
        let lhs = config.profile.positive_part().sphere_integral()?;
        let rhs = config.profile.negative_part().sphere_integral()?;
        let condition = report(lhs, rhs, k0p, dim);
        if !condition.holds {
            return Err(Error::Condition(format!(
                "condition fails with kappa0' = {k0p}: lhs {lhs} <= scaled rhs {}",
                condition.rhs_scaled
            )));
        }
        let s = match config.s {
            Some(s) => {
                if !(s > 1.0) || (1.0 / s).cos() * lhs <= condition.rhs_scaled {
                    return Err(Error::Condition(format!("s = {s} does not satisfy cos(1/s) lhs > scaled rhs")));
                }
                s
            }
            None => find_s(lhs, condition.rhs_scaled).ok_or_else(|| Error::Condition("no admissible s".into()))?,
        };
        if let Some(&l) = config.l_schedule.iter().find(|&&l| (l as f64) < 2.0 * s + 1.0) {
            return invalid(format!("schedule entry l = {l} is below 2s + 1 = {}", 2.0 * s + 1.0));
        }
        Ok(Self { config, dim, s, kappa0_prime: k0p, condition })
    }

    pub fn test_function(&self, l: u32) -> Result<TestFunction> {
        let axis = self.config.chi_axis.clone().unwrap_or_else(|| self.config.v_double_prime.axis.clone());
        make_test_sequence(axis, &self.config.v_double_prime, self.config.r, self.s, l)
    }

    /// `L(l) = |chi~|_1 (cos(1/s) |phi+|_1 ln(l/(2s)) - kappa0'^{-n} |phi-|_1 ln(2l/s))`.
    pub fn lower_bound(&self, l: u32) -> Result<f64> {
        let chi_l1 = self.test_function(l)?.angular_l1()?;
        let lf = l as f64;
        let pos = (1.0 / self.s).cos() * self.condition.lhs * (lf / (2.0 * self.s)).ln();
        let neg = scaled_rhs(self.kappa0_prime, self.dim, self.condition.rhs_raw) * (2.0 * lf / self.s).ln();
        Ok(chi_l1 * (pos - neg))
    }

    /// `∫∫ phi_1(w) chi~(w') (w.w')^{-n} K(r w.w') dw' dw` with converged
    /// angular quadrature; returns the value and the last change. The inner
    /// integral only depends on the angle between `w` and the axis of
    /// `chi~`, so it is tabulated once per order as a Chebyshev series.
    fn angular_pairing<K: Fn(f64) -> f64 + Sync>(&self, chi: &TestFunction, kernel: K) -> Result<(f64, f64)> {
        let n = self.dim as i32;
        let r = self.config.r;
        let mut prev: Option<f64> = None;
        let mut order = 16;
        loop {
            let outer = self.config.profile.quadrature(order, order);
            let inner = angular_rule(chi, order)?;
            let angles: Vec<f64> = outer.nodes.iter().map(|w| w.angle_to(&chi.axis)).collect();
            let max_angle = angles.iter().copied().fold(0.0, f64::max);
            if !outer.is_empty() && max_angle + chi.support_angle >= 0.5 * PI {
                return Err(Error::SupportViolation("w.w' must be positive on supp phi_1 x supp chi~".into()));
            }
            let inner_at = |gamma: f64| -> f64 {
                let w = polar_direction(&chi.axis, gamma);
                inner
                    .nodes
                    .iter()
                    .zip(&inner.weights)
                    .map(|(u, cu)| {
                        let t = w.dot(u.as_slice());
                        cu * t.powi(-n) * kernel(r * t)
                    })
                    .sum()
            };
            let hi = max_angle.max(1e-6);
            let mut nodes = 32;
            let g = loop {
                let g = Chebyshev::fit(0.0, hi, nodes, inner_at);
                if g.tail() <= 1e-3 * self.config.quad_tol * g.eval(0.0).abs().max(1e-300) || nodes >= 512 {
                    break g;
                }
                nodes *= 2;
            };
            let (value, scale) = angles
                .iter()
                .zip(&outer.weights)
                .map(|(a, c)| c * g.eval(*a))
                .fold((0.0, 0.0), |acc, x| (acc.0 + x, acc.1 + x.abs()));
            if let Some(p) = prev {
                let change = (value - p).abs();
                if change <= self.config.quad_tol * scale.max(1e-300) {
                    return Ok((value, change));
                }
                if order >= 256 {
                    return Err(Error::Quadrature { tol: self.config.quad_tol, estimate: change / scale.max(1e-300) });
                }
            }
            prev = Some(value);
            order *= 2;
        }
    }

    /// `I(l)` with `R(t) = ∫ cos(rho' t) theta_l(rho') / rho' d rho'`
    /// interpolated in `t ∈ [0, r]`.
    pub fn pairing(&self, l: u32) -> Result<WitnessResult> {
        let chi = self.test_function(l)?;
        let (rho, w) = radial_rule(&chi.radial);
        let radial = |t: f64| -> f64 { rho.iter().zip(&w).map(|(x, wx)| wx * (x * t).cos() / x).sum() };
        let cheb = Chebyshev::fit(0.0, self.config.r, CHEB_NODES, radial);
        let (value, change) = self.angular_pairing(&chi, |t| cheb.eval(t))?;
        let lower = self.lower_bound(l)?;
        Ok(WitnessResult {
            l,
            i_value: value,
            lower_bound: lower,
            margin: value - lower,
            slope_estimate: None,
            quad_error: change,
            tol: self.config.tol,
            pass: value >= lower - self.config.tol,
        })
    }

    /// All schedule entries, evaluated concurrently and merged in schedule order.
    pub fn run(&self) -> Result<Vec<WitnessResult>> {
        let mut rows: Vec<WitnessResult> =
            self.config.l_schedule.par_iter().map(|&l| self.pairing(l)).collect::<Result<_>>()?;
        for k in 1..rows.len() {
            let (a, b) = (&rows[k - 1], &rows[k]);
            let slope = (b.i_value - a.i_value) / (b.l as f64 / a.l as f64).ln();
            rows[k].slope_estimate = Some(slope);
        }
        Ok(rows)
    }

    /// `C* = ∫∫ phi_1(w) (w.w')^{-n} chi~(w') dw' dw`, the limiting slope of
    /// `I(l)` against `ln l`.
    pub fn slope_constant(&self) -> Result<f64> {
        let chi = self.test_function(*self.config.l_schedule.first().unwrap_or(&64))?;
        Ok(self.angular_pairing(&chi, |_| 1.0)?.0)
    }
}

/// Both evaluations of `<F phi, chi>`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ExpansionResult {
    pub direct: Complex64,
    pub expanded: Complex64,
    #[serde(rename = "relErr")]
    pub rel_err: f64,
}

/// Nodes `xi` with weights `chi(xi) d xi` for a planar test function.
fn test_function_rule(chi: &TestFunction, angular_order: usize) -> Result<(Vec<[f64; 2]>, Vec<f64>)> {
    let (rho, wr) = radial_rule(&chi.radial);
    let ang = angular_rule(chi, angular_order)?;
    let mut pts = Vec::with_capacity(rho.len() * ang.nodes.len());
    let mut w = Vec::with_capacity(pts.capacity());
    for (u, cu) in ang.nodes.iter().zip(&ang.weights) {
        for (x, wx) in rho.iter().zip(&wr) {
            pts.push([x * u.as_slice()[0], x * u.as_slice()[1]]);
            w.push(cu * wx * x);
        }
    }
    Ok((pts, w))
}

/// Compares the term-by-term expansion of `<F phi, chi>` (with
/// `∫_r^inf rho^m e^{-i rho t} d rho = e^{-irt} Σ_j m!/(m-j)! r^{m-j} (it)^{-j-1}`)
/// with an independent route: `<F phi_hom, chi> - ∫_{|x|<=r} phi F chi`,
/// where `phi_hom` is the untruncated homogeneous extension and `F chi` is
/// computed by quadrature. Planar case only.
pub fn expansion_crosscheck(
    profile: &SphericalProfile,
    v: &ConeSpec,
    r: f64,
    chi: &TestFunction,
) -> Result<ExpansionResult> {
    if profile.dim() != 2 || chi.dim() != 2 || v.dim() != 2 {
        return Err(Error::UnsupportedDimension(profile.dim().max(chi.dim())));
    }
    if !(r > 0.0) {
        return invalid(format!("r must be positive, got {r}"));
    }
    profile.check_support(v)?;
    let outer = profile.quadrature(32, 32);
    let (xi, cw) = test_function_rule(chi, 24)?;
    let inner = angular_rule(chi, 8)?;
    if !outer.is_empty() && min_pair_dot(&outer, &inner) <= 0.0 {
        return Err(Error::SupportViolation("w.xi must be positive on supp phi_1 x supp chi".into()));
    }
    let expanded: Complex64 = outer
        .nodes
        .par_iter()
        .zip(&outer.weights)
        .map(|(w, c)| {
            let w = w.as_slice();
            let s: Complex64 = xi
                .iter()
                .zip(&cw)
                .map(|(x, wx)| {
                    let t = w[0] * x[0] + w[1] * x[1];
                    let it = I * t;
                    // m = 1: r / (it) + 1 / (it)^2
                    let poly = r / it + 1.0 / (it * it);
                    Complex64::from_polar(*wx, -r * t) * poly
                })
                .sum();
            s * c
        })
        .sum();

    let gl = GaussLegendre::new(24);
    let homogeneous: Complex64 = outer
        .nodes
        .iter()
        .zip(&outer.weights)
        .map(|(w, c)| {
            let w = w.as_slice();
            let s: f64 = xi.iter().zip(&cw).map(|(x, wx)| wx / (w[0] * x[0] + w[1] * x[1]).powi(2)).sum();
            // (n-1)! (it)^{-n} with n = 2 gives -1/t^2
            Complex64::new(-s * c, 0.0)
        })
        .sum();
    let ball: Complex64 = outer
        .nodes
        .par_iter()
        .zip(&outer.weights)
        .map(|(w, c)| {
            let w = w.as_slice();
            let mut acc = Complex64::new(0.0, 0.0);
            for (rho, wr) in gl.mapped(0.0, r) {
                let f_chi: Complex64 = xi
                    .iter()
                    .zip(&cw)
                    .map(|(x, wx)| Complex64::from_polar(*wx, -rho * (w[0] * x[0] + w[1] * x[1])))
                    .sum();
                acc += f_chi * (wr * rho);
            }
            acc * c
        })
        .sum();
    let direct = homogeneous - ball;
    let denom = direct.norm();
    let rel_err = if denom == 0.0 && expanded.norm() == 0.0 { 0.0 } else { (direct - expanded).norm() / denom };
    Ok(ExpansionResult { direct, expanded, rel_err })
}

/// Planar test functions drawn from `seed`: `l ∈ {16, 32, 64, 128}`, `V''`
/// aperture in `[25°, 35°]` about `base`, centre tilted by at most 10°.
pub fn seeded_test_functions(seed: u64, count: usize, base: &UnitVector, r: f64, s: f64) -> Result<Vec<TestFunction>> {
    use rand::Rng;
    if base.dim() != 2 {
        return Err(Error::UnsupportedDimension(base.dim()));
    }
    let mut rng = crate::seeded_rng(seed);
    (0..count)
        .map(|_| {
            let l = [16, 32, 64, 128][rng.random_range(0..4)];
            let aperture = rng.random_range(25.0f64..35.0).to_radians();
            let tilt = rng.random_range(-10.0f64..10.0).to_radians();
            let vpp = CircularCone::from_half_angle(base.clone(), aperture, true)?;
            make_test_sequence(UnitVector::from_angle(base.angle() + tilt), &vpp, r, s, l)
        })
        .collect()
}

/// Which part of a complex symbol a branch inspects.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Part {
    Re,
    Im,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BranchResult {
    pub part: Part,
    pub negated: bool,
    pub report: ConditionReport,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReductionReport {
    pub branches: Vec<BranchResult>,
    /// First branch whose condition holds.
    pub certified: Option<(Part, bool)>,
}

/// Runs the divergence condition on `±Re psi` and `±Im psi` at infinity.
pub fn validate_prop26_reduction(
    psi: &ComplexHomogeneousSymbol,
    v: &ConeSpec,
    v_prime: &ConeSpec,
) -> Result<ReductionReport> {
    let mut branches = Vec::new();
    for (part, profile) in [(Part::Re, &psi.re), (Part::Im, &psi.im)] {
        for negated in [false, true] {
            let p = if negated { profile.scaled(-1.0) } else { profile.clone() };
            let report = check_condition(&p, v, v_prime, false)?;
            branches.push(BranchResult { part, negated, report });
        }
    }
    let certified = branches.iter().find(|b| b.report.holds).map(|b| (b.part, b.negated));
    Ok(ReductionReport { branches, certified })
}
