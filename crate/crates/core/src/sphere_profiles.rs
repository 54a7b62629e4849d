//! Bounded angular profiles on `S^1` and `S^2`: piecewise constant on caps
//! (first matching cap wins) or tabulated on a latitude/longitude grid.
//! Integration is exact in longitude and Gauss–Legendre in latitude, with
//! panels split wherever a cap boundary becomes tangent to a latitude circle
//! or two cap boundaries cross.

use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::cone_geometry::{
    angle_between, cap_grid, interior_nonempty, kappa0, kappa_v, ConeSpec, UnitVector, BOUNDARY_TOL,
};
use crate::error::{invalid, Error, Result};
use crate::quad::GaussLegendre;

const REL_TOL: f64 = 1e-8;
const MAX_ORDER: usize = 512;

/// A spherical cap (an arc when `n = 2`) carrying a constant value.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cap {
    pub axis: UnitVector,
    #[serde(rename = "halfAngleDeg")]
    pub half_angle_deg: f64,
    pub value: f64,
}

impl Cap {
    pub fn new(axis: UnitVector, half_angle_deg: f64, value: f64) -> Self {
        Self { axis, half_angle_deg, value }
    }

    fn half(&self) -> f64 {
        self.half_angle_deg.to_radians()
    }

    fn contains(&self, w: &[f64]) -> bool {
        angle_between(self.axis.as_slice(), w) <= self.half() + BOUNDARY_TOL
    }
}

/// Serialized form of a profile.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ProfileKind {
    Caps {
        caps: Vec<Cap>,
    },
    /// Cell values, row-major in (polar, azimuth). For `n = 2` only `n_theta`
    /// cells `[2 pi k / n_theta, 2 pi (k+1) / n_theta)` are used.
    Grid {
        dim: usize,
        #[serde(rename = "nTheta")]
        n_theta: usize,
        #[serde(rename = "nPhi", default)]
        n_phi: usize,
        #[serde(rename = "thetaPhiValues")]
        values: Vec<f64>,
    },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileSpec {
    #[serde(flatten)]
    pub kind: ProfileKind,
    #[serde(rename = "declaredSupport", default, skip_serializing_if = "Option::is_none")]
    pub declared_support: Option<ConeSpec>,
}

/// Validated angular profile `phi_1`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "ProfileSpec", into = "ProfileSpec")]
pub struct SphericalProfile {
    dim: usize,
    kind: ProfileKind,
    declared_support: Option<ConeSpec>,
}

impl TryFrom<ProfileSpec> for SphericalProfile {
    type Error = Error;
    fn try_from(spec: ProfileSpec) -> Result<Self> {
        let dim = match &spec.kind {
            ProfileKind::Caps { caps } => {
                let Some(first) = caps.first() else {
                    return invalid("caps profile needs at least one cap; use value 0 for the zero profile");
                };
                let dim = first.axis.dim();
                for c in caps {
                    if c.axis.dim() != dim {
                        return Err(Error::DimensionMismatch { expected: dim, got: c.axis.dim() });
                    }
                    if !(0.0..=180.0).contains(&c.half_angle_deg) || !c.value.is_finite() {
                        return invalid(format!(
                            "cap half-angle {} or value {} out of range",
                            c.half_angle_deg, c.value
                        ));
                    }
                }
                dim
            }
            ProfileKind::Grid { dim, n_theta, n_phi, values } => {
                let cells = match dim {
                    2 => *n_theta,
                    3 => n_theta * n_phi,
                    d => return Err(Error::UnsupportedDimension(*d)),
                };
                if cells == 0 || values.len() != cells {
                    return invalid(format!("grid expects {cells} values, got {}", values.len()));
                }
                if values.iter().any(|v| !v.is_finite()) {
                    return invalid("grid values must be finite");
                }
                *dim
            }
        };
        if !(2..=3).contains(&dim) {
            return Err(Error::UnsupportedDimension(dim));
        }
        if let Some(s) = &spec.declared_support {
            if s.dim() != dim {
                return Err(Error::DimensionMismatch { expected: dim, got: s.dim() });
            }
        }
        let profile = Self { dim, kind: spec.kind, declared_support: spec.declared_support };
        if let Some(s) = &profile.declared_support {
            profile.check_support(s)?;
        }
        Ok(profile)
    }
}

impl From<SphericalProfile> for ProfileSpec {
    fn from(p: SphericalProfile) -> Self {
        Self { kind: p.kind, declared_support: p.declared_support }
    }
}

/// Nodes and weights (profile values folded in) for `∫ phi_1(w) h(w) dw`.
#[derive(Debug, Clone, Default)]
pub struct ProfileQuadrature {
    pub nodes: Vec<UnitVector>,
    pub weights: Vec<f64>,
}

impl ProfileQuadrature {
    pub fn integrate<F: Fn(&UnitVector) -> f64>(&self, h: F) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(w, c)| c * h(w)).sum()
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }
}

impl SphericalProfile {
    pub fn caps(caps: Vec<Cap>) -> Result<Self> {
        ProfileSpec { kind: ProfileKind::Caps { caps }, declared_support: None }.try_into()
    }

    pub fn with_support(self, support: ConeSpec) -> Result<Self> {
        ProfileSpec { kind: self.kind, declared_support: Some(support) }.try_into()
    }

    pub fn from_json(text: &str) -> Result<Self> {
        Ok(serde_json::from_str(text)?)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &ProfileKind {
        &self.kind
    }

    pub fn declared_support(&self) -> Option<&ConeSpec> {
        self.declared_support.as_ref()
    }

    /// `sup |phi_1|`.
    pub fn bound(&self) -> f64 {
        match &self.kind {
            ProfileKind::Caps { caps } => caps.iter().map(|c| c.value.abs()).fold(0.0, f64::max),
            ProfileKind::Grid { values, .. } => values.iter().map(|v| v.abs()).fold(0.0, f64::max),
        }
    }

    pub fn is_zero(&self) -> bool {
        self.bound() == 0.0
    }

    pub fn eval(&self, w: &[f64]) -> f64 {
        match &self.kind {
            ProfileKind::Caps { caps } => caps.iter().find(|c| c.contains(w)).map_or(0.0, |c| c.value),
            ProfileKind::Grid { n_theta, n_phi, values, .. } => {
                let (i, j) = self.grid_cell(w, *n_theta, *n_phi);
                values[i * n_phi.max(&1) + j]
            }
        }
    }

    fn grid_cell(&self, w: &[f64], n_theta: usize, n_phi: usize) -> (usize, usize) {
        if self.dim == 2 {
            let t = w[1].atan2(w[0]).rem_euclid(2.0 * PI);
            let k = ((t / (2.0 * PI) * n_theta as f64) as usize).min(n_theta - 1);
            return (k, 0);
        }
        let (polar, az) = polar_azimuth(w);
        let i = ((polar / PI * n_theta as f64) as usize).min(n_theta - 1);
        let j = ((az / (2.0 * PI) * n_phi as f64) as usize).min(n_phi - 1);
        (i, j)
    }

    fn map_values(&self, f: impl Fn(f64) -> f64) -> Self {
        let kind = match &self.kind {
            ProfileKind::Caps { caps } => {
                ProfileKind::Caps { caps: caps.iter().map(|c| Cap { value: f(c.value), ..c.clone() }).collect() }
            }
            ProfileKind::Grid { dim, n_theta, n_phi, values } => ProfileKind::Grid {
                dim: *dim,
                n_theta: *n_theta,
                n_phi: *n_phi,
                values: values.iter().map(|&v| f(v)).collect(),
            },
        };
        Self { kind, ..self.clone() }
    }

    /// `max(phi_1, 0)`.
    pub fn positive_part(&self) -> Self {
        self.map_values(|v| v.max(0.0))
    }

    /// `max(-phi_1, 0)`.
    pub fn negative_part(&self) -> Self {
        self.map_values(|v| (-v).max(0.0))
    }

    pub fn scaled(&self, factor: f64) -> Self {
        self.map_values(|v| factor * v)
    }

    /// Verifies that `phi_1` vanishes outside `support` on sampled directions.
    pub fn check_support(&self, support: &ConeSpec) -> Result<()> {
        for w in self.support_samples(0.25_f64.to_radians(), |v| v != 0.0) {
            if !support.contains(w.as_slice()) {
                return Err(Error::SupportViolation(format!(
                    "profile is nonzero at {:?}, outside the declared cone",
                    w.as_slice()
                )));
            }
        }
        Ok(())
    }

    /// Directions where `keep(phi_1)` holds, sampled with angular step about `step`,
    /// cap boundaries included.
    pub fn support_samples(&self, step: f64, keep: impl Fn(f64) -> bool) -> Vec<UnitVector> {
        let mut candidates = Vec::new();
        match &self.kind {
            ProfileKind::Caps { caps } => {
                for c in caps.iter().filter(|c| keep(c.value)) {
                    let half = c.half();
                    if self.dim == 2 {
                        let base = c.axis.angle();
                        let m = (2.0 * half / step).ceil().max(1.0) as usize;
                        for k in 0..=m {
                            candidates.push(UnitVector::from_angle(base - half + 2.0 * half * k as f64 / m as f64));
                        }
                    } else {
                        candidates.extend(cap_grid(&c.axis, half, step));
                    }
                }
            }
            ProfileKind::Grid { n_theta, n_phi, .. } => {
                if self.dim == 2 {
                    let per = ((2.0 * PI / *n_theta as f64) / step).ceil().max(1.0) as usize;
                    for k in 0..*n_theta {
                        for q in 0..=per {
                            let t = 2.0 * PI * (k as f64 + q as f64 / per as f64 * (1.0 - 1e-12)) / *n_theta as f64;
                            candidates.push(UnitVector::from_angle(t));
                        }
                    }
                } else {
                    let dt = PI / *n_theta as f64;
                    let dp = 2.0 * PI / *n_phi as f64;
                    let per_t = (dt / step).ceil().max(1.0) as usize;
                    let per_p = (dp / step).ceil().max(1.0) as usize;
                    for i in 0..*n_theta {
                        for j in 0..*n_phi {
                            for a in 0..=per_t {
                                for b in 0..=per_p {
                                    let t = dt * (i as f64 + a as f64 / per_t as f64 * (1.0 - 1e-12));
                                    let p = dp * (j as f64 + b as f64 / per_p as f64 * (1.0 - 1e-12));
                                    candidates.push(UnitVector::from_spherical(t, p));
                                }
                            }
                        }
                    }
                }
            }
        }
        candidates.retain(|w| keep(self.eval(w.as_slice())));
        candidates
    }

    /// Quadrature for `∫ phi_1 h` with Gauss–Legendre order `theta_order` in
    /// latitude (or arc angle) and `phi_order` in longitude.
    pub fn quadrature(&self, theta_order: usize, phi_order: usize) -> ProfileQuadrature {
        let mut q = ProfileQuadrature::default();
        let gl_t = GaussLegendre::new(theta_order);
        let gl_p = GaussLegendre::new(phi_order);
        match (&self.kind, self.dim) {
            (_, 2) => {
                for (a, b) in self.circle_pieces() {
                    let v = self.eval(UnitVector::from_angle(0.5 * (a + b)).as_slice());
                    if v == 0.0 {
                        continue;
                    }
                    for (t, w) in gl_t.mapped(a, b) {
                        q.nodes.push(UnitVector::from_angle(t));
                        q.weights.push(w * v);
                    }
                }
            }
            (ProfileKind::Grid { n_theta, n_phi, values, .. }, _) => {
                let dt = PI / *n_theta as f64;
                let dp = 2.0 * PI / *n_phi as f64;
                for i in 0..*n_theta {
                    for j in 0..*n_phi {
                        let v = values[i * n_phi + j];
                        if v == 0.0 {
                            continue;
                        }
                        for (t, wt) in gl_t.mapped(dt * i as f64, dt * (i + 1) as f64) {
                            for (p, wp) in gl_p.mapped(dp * j as f64, dp * (j + 1) as f64) {
                                q.nodes.push(UnitVector::from_spherical(t, p));
                                q.weights.push(wt * wp * t.sin() * v);
                            }
                        }
                    }
                }
            }
            (ProfileKind::Caps { caps }, _) => {
                let lat = self.latitude_breaks(caps);
                for w in lat.windows(2) {
                    let (t0, t1) = (w[0], w[1]);
                    if t1 - t0 < 1e-15 {
                        continue;
                    }
                    for (u, wu) in gl_t.mapped(0.0, 1.0) {
                        // smoothstep substitution flattens square-root endpoint behaviour
                        let su = u * u * (3.0 - 2.0 * u);
                        let theta = t0 + (t1 - t0) * su;
                        let jac = (t1 - t0) * 6.0 * u * (1.0 - u) * theta.sin();
                        for (p0, p1) in longitude_pieces(caps, theta) {
                            let v = self.eval(UnitVector::from_spherical(theta, 0.5 * (p0 + p1)).as_slice());
                            if v == 0.0 {
                                continue;
                            }
                            for (p, wp) in gl_p.mapped(p0, p1) {
                                q.nodes.push(UnitVector::from_spherical(theta, p));
                                q.weights.push(wu * jac * wp * v);
                            }
                        }
                    }
                }
            }
        }
        q
    }

    /// Arc pieces of `[0, 2 pi)` on which the profile is constant (`n = 2`).
    fn circle_pieces(&self) -> Vec<(f64, f64)> {
        let mut br = vec![0.0, 2.0 * PI];
        match &self.kind {
            ProfileKind::Caps { caps } => {
                for c in caps {
                    if c.half() >= PI {
                        continue;
                    }
                    let base = c.axis.angle();
                    br.push((base - c.half()).rem_euclid(2.0 * PI));
                    br.push((base + c.half()).rem_euclid(2.0 * PI));
                }
            }
            ProfileKind::Grid { n_theta, .. } => {
                br.extend((1..*n_theta).map(|k| 2.0 * PI * k as f64 / *n_theta as f64));
            }
        }
        sorted_pieces(br)
    }

    fn latitude_breaks(&self, caps: &[Cap]) -> Vec<f64> {
        let mut br = vec![0.0, PI];
        for c in caps {
            let (polar, _) = polar_azimuth(c.axis.as_slice());
            for t in [polar - c.half(), polar + c.half(), c.half() - polar, 2.0 * PI - polar - c.half()] {
                if t > 0.0 && t < PI {
                    br.push(t);
                }
            }
        }
        for (i, a) in caps.iter().enumerate() {
            for b in &caps[i + 1..] {
                for x in circle_crossings(a, b) {
                    br.push(polar_azimuth(&x).0);
                }
            }
        }
        br.sort_by(f64::total_cmp);
        br.dedup_by(|a, b| (*a - *b).abs() < 1e-14);
        br
    }

    /// `∫_{S^{n-1}} phi_1`, converged to relative tolerance `1e-8`.
    pub fn sphere_integral(&self) -> Result<f64> {
        match (&self.kind, self.dim) {
            (ProfileKind::Grid { n_theta, n_phi, values, .. }, 3) => {
                let dt = PI / *n_theta as f64;
                let dp = 2.0 * PI / *n_phi as f64;
                let mut s = 0.0;
                for i in 0..*n_theta {
                    let band = ((dt * i as f64).cos() - (dt * (i + 1) as f64).cos()) * dp;
                    s += band * values[i * n_phi..(i + 1) * n_phi].iter().sum::<f64>();
                }
                Ok(s)
            }
            (_, 2) => Ok(self.quadrature(1, 1).weights.iter().sum()),
            _ => {
                let mut order = 8;
                let mut prev = self.quadrature(order, 1).weights.iter().sum::<f64>();
                while order < MAX_ORDER {
                    order *= 2;
                    let cur: f64 = self.quadrature(order, 1).weights.iter().sum();
                    if (cur - prev).abs() <= REL_TOL * cur.abs().max(1e-300) || cur == prev {
                        return Ok(cur);
                    }
                    prev = cur;
                }
                Err(Error::Quadrature { tol: REL_TOL, estimate: 0.0 })
            }
        }
    }

    /// Adaptive Gauss–Legendre order for quadratures of smooth weights.
    pub fn converged_quadrature<F: Fn(&UnitVector) -> f64>(
        &self,
        h: F,
        rel_tol: f64,
    ) -> Result<(f64, ProfileQuadrature)> {
        let mut order = 8;
        let mut q = self.quadrature(order, order);
        let mut prev = q.integrate(&h);
        while order < MAX_ORDER / 2 {
            order *= 2;
            let next = self.quadrature(order, order);
            let cur = next.integrate(&h);
            let scale = self.quadrature(order, order).integrate(|w| h(w).abs()).max(1e-300);
            q = next;
            if (cur - prev).abs() <= rel_tol * scale {
                return Ok((cur, q));
            }
            prev = cur;
        }
        Err(Error::Quadrature { tol: rel_tol, estimate: 0.0 })
    }
}

fn sorted_pieces(mut br: Vec<f64>) -> Vec<(f64, f64)> {
    br.sort_by(f64::total_cmp);
    br.dedup_by(|a, b| (*a - *b).abs() < 1e-15);
    br.windows(2).filter(|w| w[1] > w[0]).map(|w| (w[0], w[1])).collect()
}

/// Polar angle from `e_3` and azimuth in `[0, 2 pi)`.
pub(crate) fn polar_azimuth(w: &[f64]) -> (f64, f64) {
    let rho = w[0].hypot(w[1]);
    (rho.atan2(w[2]), w[1].atan2(w[0]).rem_euclid(2.0 * PI))
}

/// Longitude pieces of the latitude circle at polar angle `theta`, split at
/// every cap boundary crossing.
fn longitude_pieces(caps: &[Cap], theta: f64) -> Vec<(f64, f64)> {
    let mut br = vec![0.0, 2.0 * PI];
    let (st, ct) = theta.sin_cos();
    for c in caps {
        let (pa, aa) = polar_azimuth(c.axis.as_slice());
        let denom = st * pa.sin();
        if denom.abs() < 1e-15 {
            continue;
        }
        let x = (c.half().cos() - ct * pa.cos()) / denom;
        if x.abs() < 1.0 {
            let w = x.acos();
            br.push((aa - w).rem_euclid(2.0 * PI));
            br.push((aa + w).rem_euclid(2.0 * PI));
        }
    }
    sorted_pieces(br)
}

/// Intersection points of two cap boundary circles on `S^2`.
fn circle_crossings(a: &Cap, b: &Cap) -> Vec<Vec<f64>> {
    let (u, v) = (a.axis.as_slice(), b.axis.as_slice());
    let (ca, cb) = (a.half().cos(), b.half().cos());
    let g = u[0] * v[0] + u[1] * v[1] + u[2] * v[2];
    let det = 1.0 - g * g;
    if det < 1e-14 {
        return Vec::new();
    }
    // x = p u + q v + r (u x v)
    let p = (ca - g * cb) / det;
    let q = (cb - g * ca) / det;
    let base: Vec<f64> = (0..3).map(|i| p * u[i] + q * v[i]).collect();
    let rr = 1.0 - base.iter().map(|x| x * x).sum::<f64>();
    if rr < 0.0 {
        return Vec::new();
    }
    let cross = [u[1] * v[2] - u[2] * v[1], u[2] * v[0] - u[0] * v[2], u[0] * v[1] - u[1] * v[0]];
    let r = (rr / det).sqrt();
    [-1.0, 1.0].iter().map(|s| (0..3).map(|i| base[i] + s * r * cross[i]).collect()).collect()
}

/// Outcome of the divergence condition check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConditionReport {
    pub lhs: f64,
    pub rhs_raw: f64,
    /// `None` encodes `+inf`.
    pub kappa: Option<f64>,
    pub rhs_scaled: f64,
    pub holds: bool,
    pub s: Option<f64>,
    pub margin: f64,
}

/// `kappa^{-n}` with `+inf -> 0` and nonpositive `kappa -> +inf`.
pub fn kappa_power(kappa: f64, n: usize) -> f64 {
    if kappa == f64::INFINITY {
        0.0
    } else if kappa <= 0.0 {
        f64::INFINITY
    } else {
        kappa.powi(-(n as i32))
    }
}

/// `kappa^{-n} * rhs`, zero when `rhs = 0`.
pub fn scaled_rhs(kappa: f64, n: usize, rhs: f64) -> f64 {
    if rhs == 0.0 {
        0.0
    } else {
        kappa_power(kappa, n) * rhs
    }
}

/// Smallest `s = 1.5 * 2^j` with `cos(1/s) lhs > rhs_scaled`.
pub fn find_s(lhs: f64, rhs_scaled: f64) -> Option<f64> {
    if lhs <= rhs_scaled || !lhs.is_finite() {
        return None;
    }
    (0..64).map(|j| 1.5 * 2f64.powi(j)).find(|s| (1.0 / s).cos() * lhs > rhs_scaled)
}

/// Sampling step used for the negative support fed to `kappa0`.
pub const SUPPORT_STEP: f64 = 0.05 * PI / 180.0;

/// Evaluates the divergence condition for `phi_1` supported in `v`, with
/// `kappa0` (or `kappa_V` when `use_kappa_v`) computed over `v_prime`.
pub fn check_condition(
    p: &SphericalProfile,
    v: &ConeSpec,
    v_prime: &ConeSpec,
    use_kappa_v: bool,
) -> Result<ConditionReport> {
    if v.dim() != p.dim() || v_prime.dim() != p.dim() {
        return Err(Error::DimensionMismatch { expected: p.dim(), got: v.dim() });
    }
    if !interior_nonempty(v_prime) {
        return Err(Error::EmptyInterior);
    }
    p.check_support(v)?;
    let lhs = p.positive_part().sphere_integral()?;
    let rhs_raw = p.negative_part().sphere_integral()?;
    let kappa = if use_kappa_v {
        kappa_v(v, v_prime)?
    } else {
        let neg = p.support_samples(SUPPORT_STEP, |x| x < 0.0);
        kappa0(&neg, v_prime)?
    };
    Ok(report(lhs, rhs_raw, kappa, p.dim()))
}

pub(crate) fn report(lhs: f64, rhs_raw: f64, kappa: f64, n: usize) -> ConditionReport {
    let rhs_scaled = scaled_rhs(kappa, n, rhs_raw);
    let holds = lhs > rhs_scaled;
    let s = if holds && rhs_raw > 0.0 { find_s(lhs, rhs_scaled) } else { None };
    ConditionReport {
        lhs,
        rhs_raw,
        kappa: kappa.is_finite().then_some(kappa),
        rhs_scaled,
        holds,
        s,
        margin: lhs - rhs_scaled,
    }
}
