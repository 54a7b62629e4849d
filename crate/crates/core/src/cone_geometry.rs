//! Closed and open cones in `R^n`: circular cones, finitely generated
//! (polyhedral) cones and intersections of half-spaces. Provides dual cones,
//! interior tests and the angular constants `kappa0`, `kappa0_prime` and
//! `kappa_v` that control the divergence condition for conic multipliers.
//!
//! Sup/inf values over directions are computed by a uniform angular grid
//! (step at most 0.5 degrees) followed by local refinement: golden-section in
//! the plane, nested local grids on the 2-sphere.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quad::golden_section_max;

pub const MAX_DIM: usize = 8;
/// Boundary tolerance for membership tests.
pub const BOUNDARY_TOL: f64 = 1e-12;
const GRID_STEP: f64 = 0.5 * PI / 180.0;
const REFINE_TOL: f64 = 1e-10;

/// A direction in `R^n`, `1 <= n <= 8`, with Euclidean norm one.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct UnitVector(Vec<f64>);

impl UnitVector {
    /// Normalizes `coords`; fails on zero or non-finite input.
    pub fn new(coords: Vec<f64>) -> Result<Self> {
        if coords.is_empty() || coords.len() > MAX_DIM {
            return Err(Error::UnsupportedDimension(coords.len()));
        }
        if coords.iter().any(|c| !c.is_finite()) {
            return invalid("direction has non-finite coordinates");
        }
        let norm = norm(&coords);
        if norm < 1e-300 {
            return invalid("direction must be nonzero");
        }
        Ok(Self(coords.into_iter().map(|c| c / norm).collect()))
    }

    /// Standard basis vector `e_index` in `R^dim`.
    pub fn basis(dim: usize, index: usize) -> Self {
        let mut c = vec![0.0; dim];
        c[index] = 1.0;
        Self(c)
    }

    /// Point on the unit circle at polar angle `angle`.
    pub fn from_angle(angle: f64) -> Self {
        Self(vec![angle.cos(), angle.sin()])
    }

    /// Point on the 2-sphere from polar angle and azimuth.
    pub fn from_spherical(polar: f64, azimuth: f64) -> Self {
        Self(vec![polar.sin() * azimuth.cos(), polar.sin() * azimuth.sin(), polar.cos()])
    }

    pub fn dim(&self) -> usize {
        self.0.len()
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn dot(&self, other: &[f64]) -> f64 {
        dot(&self.0, other)
    }

    /// Angle in `[0, pi]` to another unit vector.
    pub fn angle_to(&self, other: &UnitVector) -> f64 {
        angle_between(&self.0, &other.0)
    }

    /// Polar angle in the plane (`n = 2`).
    pub fn angle(&self) -> f64 {
        self.0[1].atan2(self.0[0])
    }

    pub fn neg(&self) -> Self {
        Self(self.0.iter().map(|c| -c).collect())
    }

    /// Applies a row-major `n x n` rotation.
    pub fn rotated(&self, rotation: &[f64]) -> Self {
        let n = self.dim();
        let c = (0..n).map(|i| (0..n).map(|j| rotation[i * n + j] * self.0[j]).sum()).collect();
        Self(c)
    }
}

impl TryFrom<Vec<f64>> for UnitVector {
    type Error = Error;
    fn try_from(v: Vec<f64>) -> Result<Self> {
        Self::new(v)
    }
}

impl From<UnitVector> for Vec<f64> {
    fn from(u: UnitVector) -> Self {
        u.0
    }
}

pub(crate) fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

pub(crate) fn norm(a: &[f64]) -> f64 {
    dot(a, a).sqrt()
}

/// Numerically stable angle between two nonzero vectors.
pub(crate) fn angle_between(a: &[f64], b: &[f64]) -> f64 {
    let na = norm(a);
    let nb = norm(b);
    let c = dot(a, b) / (na * nb);
    if c.abs() < 0.9 {
        return c.acos();
    }
    // cross-norm form avoids acos cancellation near 0 and pi
    let d: f64 = a.iter().zip(b).map(|(x, y)| (x / na - y / nb).powi(2)).sum::<f64>().sqrt();
    let theta = 2.0 * (0.5 * d).min(1.0).asin();
    if c >= 0.0 {
        theta
    } else {
        theta.min(PI)
    }
}

/// `{x : x . axis >= cos_half |x|}`; `open` switches to the strict inequality
/// (and excludes the origin). `cos_half = -1` is the whole space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircularCone {
    pub axis: UnitVector,
    #[serde(rename = "cosHalf")]
    pub cos_half: f64,
    #[serde(default)]
    pub open: bool,
}

impl CircularCone {
    pub fn new(axis: UnitVector, cos_half: f64, open: bool) -> Result<Self> {
        if !(-1.0..=1.0).contains(&cos_half) || !cos_half.is_finite() {
            return invalid(format!("cosHalf {cos_half} outside [-1, 1]"));
        }
        Ok(Self { axis, cos_half, open })
    }

    /// Cone from a half-aperture in radians.
    pub fn from_half_angle(axis: UnitVector, half_angle: f64, open: bool) -> Result<Self> {
        if !(0.0..=PI).contains(&half_angle) {
            return invalid(format!("half-aperture {half_angle} outside [0, pi]"));
        }
        Self::new(axis, half_angle.cos(), open)
    }

    pub fn dim(&self) -> usize {
        self.axis.dim()
    }

    pub fn half_angle(&self) -> f64 {
        self.cos_half.clamp(-1.0, 1.0).acos()
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let r = norm(x);
        if r == 0.0 {
            return !self.open;
        }
        if self.dim() == 1 {
            // in R^1 every cosHalf > -1 describes the ray through the axis
            let s = self.axis.dot(x);
            if self.cos_half <= -1.0 {
                return !self.open || r > 0.0;
            }
            return s > 0.0 || (!self.open && s >= -BOUNDARY_TOL * r);
        }
        if self.cos_half <= -1.0 {
            return true;
        }
        let s = self.axis.dot(x);
        if self.open {
            s > self.cos_half * r + BOUNDARY_TOL * r
        } else {
            s >= self.cos_half * r - BOUNDARY_TOL * r
        }
    }
}

/// Conic hull of a nonempty list of generators (always closed).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PolyhedralCone {
    pub generators: Vec<UnitVector>,
}

impl PolyhedralCone {
    pub fn new(generators: Vec<UnitVector>) -> Result<Self> {
        let Some(first) = generators.first() else {
            return invalid("polyhedral cone needs at least one generator");
        };
        let n = first.dim();
        if let Some(g) = generators.iter().find(|g| g.dim() != n) {
            return Err(Error::DimensionMismatch { expected: n, got: g.dim() });
        }
        Ok(Self { generators })
    }

    pub fn dim(&self) -> usize {
        self.generators[0].dim()
    }

    /// Membership by a nonnegative least-squares feasibility solve.
    pub fn contains(&self, x: &[f64]) -> bool {
        let r = norm(x);
        if r == 0.0 {
            return true;
        }
        let a = generator_matrix(&self.generators);
        let b = DVector::from_column_slice(x);
        let lambda = nnls(&a, &b);
        let residual = (&a * &lambda - &b).norm();
        residual <= 1e-9 * r
    }

    fn rank(&self) -> usize {
        generator_matrix(&self.generators).rank(1e-10)
    }
}

/// `{x : x . g >= 0 for all normals g}` (strict when `open`). An empty normal
/// list is the whole space.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HalfspaceCone {
    pub dim: usize,
    pub normals: Vec<UnitVector>,
    #[serde(default)]
    pub open: bool,
}

impl HalfspaceCone {
    pub fn new(dim: usize, normals: Vec<UnitVector>, open: bool) -> Result<Self> {
        if dim == 0 || dim > MAX_DIM {
            return Err(Error::UnsupportedDimension(dim));
        }
        if let Some(g) = normals.iter().find(|g| g.dim() != dim) {
            return Err(Error::DimensionMismatch { expected: dim, got: g.dim() });
        }
        Ok(Self { dim, normals, open })
    }

    pub fn whole_space(dim: usize) -> Self {
        Self { dim, normals: Vec::new(), open: false }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        let r = norm(x);
        if r == 0.0 {
            return !self.open || self.normals.is_empty() && !self.open;
        }
        self.normals.iter().all(|g| {
            let s = g.dot(x);
            if self.open {
                s > BOUNDARY_TOL * r
            } else {
                s >= -BOUNDARY_TOL * r
            }
        })
    }

    /// A point with `x . g > 0` for every normal, if one exists: the
    /// projection of the origin onto the convex hull of the normals.
    pub fn strictly_feasible_point(&self) -> Option<Vec<f64>> {
        if self.normals.is_empty() {
            let mut e = vec![0.0; self.dim];
            e[0] = 1.0;
            return Some(e);
        }
        let m = self.normals.len();
        let weight = 1e4;
        let mut a = DMatrix::zeros(self.dim + 1, m);
        for (j, g) in self.normals.iter().enumerate() {
            for i in 0..self.dim {
                a[(i, j)] = g.as_slice()[i];
            }
            a[(self.dim, j)] = weight;
        }
        let mut b = DVector::zeros(self.dim + 1);
        b[self.dim] = weight;
        let lambda = nnls(&a, &b);
        let total: f64 = lambda.iter().sum();
        if total <= 0.0 {
            return None;
        }
        let mut p = vec![0.0; self.dim];
        for (j, g) in self.normals.iter().enumerate() {
            for (pi, gi) in p.iter_mut().zip(g.as_slice()) {
                *pi += lambda[j] * gi / total;
            }
        }
        let dist = norm(&p);
        if dist <= 1e-9 {
            return None;
        }
        if self.normals.iter().all(|g| g.dot(&p) > 0.5 * dist * dist) {
            Some(p)
        } else {
            None
        }
    }

    /// Extreme rays of a planar half-space intersection, sorted by angle.
    /// Returns `None` when the set is not a pointed sector (whole plane,
    /// half-plane, line or `{0}`).
    pub fn extreme_rays_2d(&self) -> Option<Vec<UnitVector>> {
        if self.dim != 2 || self.normals.is_empty() {
            return None;
        }
        // candidate rays are the boundary lines of each half-plane
        let mut candidates = Vec::new();
        for g in &self.normals {
            let (gx, gy) = (g.as_slice()[0], g.as_slice()[1]);
            candidates.push(vec![-gy, gx]);
            candidates.push(vec![gy, -gx]);
        }
        let closed = Self { open: false, ..self.clone() };
        let mut rays: Vec<UnitVector> =
            candidates.into_iter().filter(|c| closed.contains(c)).filter_map(|c| UnitVector::new(c).ok()).collect();
        rays.sort_by(|a, b| a.angle().total_cmp(&b.angle()));
        rays.dedup_by(|a, b| a.angle_to(b) < 1e-12);
        if rays.len() != 2 {
            return None;
        }
        // the sector must be the short arc between the rays
        let mid = [rays[0].as_slice()[0] + rays[1].as_slice()[0], rays[0].as_slice()[1] + rays[1].as_slice()[1]];
        if norm(&mid) < 1e-12 || !closed.contains(&mid) {
            return None;
        }
        Some(rays)
    }
}

/// Any cone handled by the toolkit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum ConeSpec {
    Circular(CircularCone),
    Polyhedral(PolyhedralCone),
    Halfspace(HalfspaceCone),
    /// The degenerate cone `{0}`.
    Zero {
        dim: usize,
    },
}

impl ConeSpec {
    pub fn circular(axis: UnitVector, half_angle: f64, open: bool) -> Result<Self> {
        Ok(Self::Circular(CircularCone::from_half_angle(axis, half_angle, open)?))
    }

    pub fn whole_space(dim: usize) -> Self {
        Self::Halfspace(HalfspaceCone::whole_space(dim))
    }

    /// Re-runs the constructor checks on a deserialized cone.
    pub fn validate(&self) -> Result<()> {
        match self {
            Self::Circular(c) => CircularCone::new(c.axis.clone(), c.cos_half, c.open).map(|_| ()),
            Self::Polyhedral(p) => PolyhedralCone::new(p.generators.clone()).map(|_| ()),
            Self::Halfspace(h) => HalfspaceCone::new(h.dim, h.normals.clone(), h.open).map(|_| ()),
            Self::Zero { dim } if (1..=MAX_DIM).contains(dim) => Ok(()),
            Self::Zero { dim } => Err(Error::UnsupportedDimension(*dim)),
        }
    }

    pub fn dim(&self) -> usize {
        match self {
            Self::Circular(c) => c.dim(),
            Self::Polyhedral(p) => p.dim(),
            Self::Halfspace(h) => h.dim,
            Self::Zero { dim } => *dim,
        }
    }

    pub fn contains(&self, x: &[f64]) -> bool {
        match self {
            Self::Circular(c) => c.contains(x),
            Self::Polyhedral(p) => p.contains(x),
            Self::Halfspace(h) => h.contains(x),
            Self::Zero { .. } => norm(x) <= BOUNDARY_TOL,
        }
    }

    pub fn is_open(&self) -> bool {
        match self {
            Self::Circular(c) => c.open,
            Self::Halfspace(h) => h.open,
            _ => false,
        }
    }

    /// Same cone with the open flag set (its interior for circular and
    /// half-space cones). Polyhedral cones are only returned as interiors
    /// through their half-space description in the plane.
    pub fn interior(&self) -> Result<Self> {
        match self {
            Self::Circular(c) => Ok(Self::Circular(CircularCone { open: true, ..c.clone() })),
            Self::Halfspace(h) => Ok(Self::Halfspace(HalfspaceCone { open: true, ..h.clone() })),
            Self::Polyhedral(p) if p.dim() == 2 => {
                let h = polyhedral_to_halfspace_2d(p)?;
                Ok(Self::Halfspace(HalfspaceCone { open: true, ..h }))
            }
            Self::Polyhedral(p) => Err(Error::UnsupportedDimension(p.dim())),
            Self::Zero { .. } => Err(Error::EmptyInterior),
        }
    }

    pub fn closure(&self) -> Self {
        match self {
            Self::Circular(c) => Self::Circular(CircularCone { open: false, ..c.clone() }),
            Self::Halfspace(h) => Self::Halfspace(HalfspaceCone { open: false, ..h.clone() }),
            other => other.clone(),
        }
    }

    /// Rotates every direction of the cone by the row-major `rotation`.
    pub fn rotated(&self, rotation: &[f64]) -> Self {
        match self {
            Self::Circular(c) => Self::Circular(CircularCone { axis: c.axis.rotated(rotation), ..c.clone() }),
            Self::Polyhedral(p) => Self::Polyhedral(PolyhedralCone {
                generators: p.generators.iter().map(|g| g.rotated(rotation)).collect(),
            }),
            Self::Halfspace(h) => Self::Halfspace(HalfspaceCone {
                normals: h.normals.iter().map(|g| g.rotated(rotation)).collect(),
                ..h.clone()
            }),
            Self::Zero { dim } => Self::Zero { dim: *dim },
        }
    }

    /// A direction guaranteed to lie in the closed cone, when one exists.
    pub fn anchor(&self) -> Option<UnitVector> {
        match self {
            Self::Circular(c) => Some(c.axis.clone()),
            Self::Polyhedral(p) => {
                let n = p.dim();
                let mut s = vec![0.0; n];
                for g in &p.generators {
                    for (si, gi) in s.iter_mut().zip(g.as_slice()) {
                        *si += gi;
                    }
                }
                UnitVector::new(s).ok().or_else(|| Some(p.generators[0].clone()))
            }
            Self::Halfspace(h) => h.strictly_feasible_point().and_then(|p| UnitVector::new(p).ok()),
            Self::Zero { .. } => None,
        }
    }
}

fn polyhedral_to_halfspace_2d(p: &PolyhedralCone) -> Result<HalfspaceCone> {
    // the dual of the dual of a planar polyhedral cone, expressed by normals
    let dual = HalfspaceCone::new(2, p.generators.clone(), false)?;
    match dual.extreme_rays_2d() {
        Some(rays) => HalfspaceCone::new(2, rays, false),
        None => {
            // generators span a half-plane or more
            if p.rank() < 2 {
                return Err(Error::EmptyInterior);
            }
            match dual.strictly_feasible_point() {
                None => Ok(HalfspaceCone::whole_space(2)),
                Some(x) => Ok(HalfspaceCone::new(2, vec![UnitVector::new(x)?], false)?),
            }
        }
    }
}

fn generator_matrix(generators: &[UnitVector]) -> DMatrix<f64> {
    let n = generators[0].dim();
    DMatrix::from_fn(n, generators.len(), |i, j| generators[j].as_slice()[i])
}

/// Lawson–Hanson nonnegative least squares: `min |A x - b|` subject to `x >= 0`.
pub(crate) fn nnls(a: &DMatrix<f64>, b: &DVector<f64>) -> DVector<f64> {
    let n = a.ncols();
    let mut x = DVector::zeros(n);
    let mut passive = vec![false; n];
    let tol = 1e-12 * (a.norm() * b.norm()).max(1e-300);
    for _outer in 0..(3 * n + 10) {
        let w = a.transpose() * (b - a * &x);
        let candidate = (0..n).filter(|&j| !passive[j] && w[j] > tol).max_by(|&i, &j| w[i].total_cmp(&w[j]));
        let Some(t) = candidate else { break };
        passive[t] = true;
        for _inner in 0..(3 * n + 10) {
            let idx: Vec<usize> = (0..n).filter(|&j| passive[j]).collect();
            let sub = DMatrix::from_fn(a.nrows(), idx.len(), |i, k| a[(i, idx[k])]);
            let z_sub = match sub.clone().svd(true, true).solve(b, 1e-14) {
                Ok(z) => z,
                Err(_) => return x,
            };
            let mut z = DVector::zeros(n);
            for (k, &j) in idx.iter().enumerate() {
                z[j] = z_sub[k];
            }
            if idx.iter().all(|&j| z[j] > 0.0) {
                x = z;
                break;
            }
            let mut alpha = f64::INFINITY;
            for &j in &idx {
                if z[j] <= 0.0 {
                    let denom = x[j] - z[j];
                    if denom > 0.0 {
                        alpha = alpha.min(x[j] / denom);
                    }
                }
            }
            if !alpha.is_finite() {
                alpha = 0.0;
            }
            x = &x + (&z - &x) * alpha;
            for &j in &idx {
                if x[j] <= 1e-15 {
                    x[j] = 0.0;
                    passive[j] = false;
                }
            }
        }
    }
    x
}

/// Dual cone `{x : x . y >= 0 for all y in C}`.
///
/// Circular cones of half-aperture `theta <= pi/2` map to the coaxial cone of
/// half-aperture `pi/2 - theta`; wider circular cones map to `{0}`. Polyhedral
/// cones map to the half-space intersection with their generators as normals,
/// and vice versa.
pub fn dual_cone(cone: &ConeSpec) -> Result<ConeSpec> {
    Ok(match cone {
        ConeSpec::Circular(c) => {
            if c.dim() == 1 {
                // rays in R^1 are self-dual
                ConeSpec::Circular(CircularCone { axis: c.axis.clone(), cos_half: 0.0, open: false })
            } else if c.cos_half >= 0.0 {
                let sin_half = (1.0 - c.cos_half * c.cos_half).max(0.0).sqrt();
                ConeSpec::Circular(CircularCone { axis: c.axis.clone(), cos_half: sin_half, open: false })
            } else {
                ConeSpec::Zero { dim: c.dim() }
            }
        }
        ConeSpec::Polyhedral(p) => ConeSpec::Halfspace(HalfspaceCone::new(p.dim(), p.generators.clone(), false)?),
        ConeSpec::Halfspace(h) => {
            if h.normals.is_empty() {
                ConeSpec::Zero { dim: h.dim }
            } else {
                ConeSpec::Polyhedral(PolyhedralCone::new(h.normals.clone())?)
            }
        }
        ConeSpec::Zero { dim } => ConeSpec::whole_space(*dim),
    })
}

/// Whether the cone has nonempty interior.
pub fn interior_nonempty(cone: &ConeSpec) -> bool {
    match cone {
        ConeSpec::Circular(c) => c.dim() == 1 || c.cos_half < 1.0 - BOUNDARY_TOL,
        ConeSpec::Polyhedral(p) => p.rank() == p.dim(),
        ConeSpec::Halfspace(h) => h.strictly_feasible_point().is_some(),
        ConeSpec::Zero { .. } => false,
    }
}

fn check_search_dim(dim: usize) -> Result<()> {
    if (1..=3).contains(&dim) {
        Ok(())
    } else {
        Err(Error::UnsupportedDimension(dim))
    }
}

/// Grid of directions covering `S^{n-1}` with angular step at most `step`.
pub fn sphere_grid(dim: usize, step: f64) -> Result<Vec<UnitVector>> {
    check_search_dim(dim)?;
    Ok(match dim {
        1 => vec![UnitVector(vec![1.0]), UnitVector(vec![-1.0])],
        2 => {
            let m = (2.0 * PI / step).ceil() as usize;
            (0..m).map(|k| UnitVector::from_angle(2.0 * PI * k as f64 / m as f64)).collect()
        }
        _ => cap_grid(&UnitVector::basis(3, 2), PI, step),
    })
}

/// Directions in the closed spherical cap of half-angle `half` about `axis`
/// (`n = 3`), with both polar and arc-length spacing at most `step`.
pub(crate) fn cap_grid(axis: &UnitVector, half: f64, step: f64) -> Vec<UnitVector> {
    let (t1, t2) = tangent_frame(axis);
    let rings = (half / step).ceil().max(1.0) as usize;
    let mut out = vec![axis.clone()];
    for i in 1..=rings {
        let polar = half * i as f64 / rings as f64;
        let count = ((2.0 * PI * polar.sin()) / step).ceil().max(1.0) as usize;
        for k in 0..count {
            let az = 2.0 * PI * k as f64 / count as f64;
            out.push(frame_direction(axis, &t1, &t2, polar, az));
        }
    }
    out
}

pub(crate) fn tangent_frame(axis: &UnitVector) -> (Vec<f64>, Vec<f64>) {
    let a = axis.as_slice();
    let helper = if a[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let d = dot(a, &helper);
    let mut t1: Vec<f64> = (0..3).map(|i| helper[i] - d * a[i]).collect();
    let n1 = norm(&t1);
    t1.iter_mut().for_each(|c| *c /= n1);
    let t2 = vec![a[1] * t1[2] - a[2] * t1[1], a[2] * t1[0] - a[0] * t1[2], a[0] * t1[1] - a[1] * t1[0]];
    (t1, t2)
}

pub(crate) fn frame_direction(axis: &UnitVector, t1: &[f64], t2: &[f64], polar: f64, az: f64) -> UnitVector {
    let (s, c) = polar.sin_cos();
    let (sa, ca) = az.sin_cos();
    let a = axis.as_slice();
    let v = (0..3).map(|i| c * a[i] + s * (ca * t1[i] + sa * t2[i])).collect();
    UnitVector(v)
}

/// `sup` of `objective` over `S^{n-1}` intersected with the closure of
/// `domain`, `n <= 3`. Returns the value and a maximizing direction.
pub fn sup_over_directions<F>(domain: &ConeSpec, objective: F) -> Result<(f64, UnitVector)>
where
    F: Fn(&UnitVector) -> f64,
{
    let dim = domain.dim();
    check_search_dim(dim)?;
    let closed = domain.closure();
    let member = |u: &UnitVector| closed.contains(u.as_slice());

    let mut candidates: Vec<UnitVector> = match (&closed, dim) {
        (ConeSpec::Circular(c), 3) if c.cos_half > -1.0 => cap_grid(&c.axis, c.half_angle(), GRID_STEP),
        (ConeSpec::Circular(c), 2) if c.cos_half > -1.0 => {
            let half = c.half_angle();
            let base = c.axis.angle();
            let m = (2.0 * half / GRID_STEP).ceil().max(1.0) as usize;
            (0..=m).map(|k| UnitVector::from_angle(base - half + 2.0 * half * k as f64 / m as f64)).collect()
        }
        _ => sphere_grid(dim, GRID_STEP)?,
    };
    if let Some(a) = closed.anchor() {
        candidates.push(a);
    }
    if let ConeSpec::Polyhedral(p) = &closed {
        candidates.extend(p.generators.iter().cloned());
    }
    let mut best: Option<(f64, UnitVector)> = None;
    for u in candidates.into_iter().filter(|u| member(u)) {
        let v = objective(&u);
        if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
            best = Some((v, u));
        }
    }
    let Some((best_val, best_dir)) = best else {
        return Err(Error::EmptyInterior);
    };

    Ok(match dim {
        1 => (best_val, best_dir),
        2 => refine_planar(&member, &objective, best_val, best_dir),
        _ => refine_spherical(&member, &objective, best_val, best_dir),
    })
}

fn refine_planar<M, F>(member: &M, objective: &F, best_val: f64, best_dir: UnitVector) -> (f64, UnitVector)
where
    M: Fn(&UnitVector) -> bool,
    F: Fn(&UnitVector) -> f64,
{
    let t0 = best_dir.angle();
    let edge = |dir: f64| -> f64 {
        // extent of the domain arc from t0 in direction `dir`, capped at one step
        let far = t0 + dir * GRID_STEP;
        if member(&UnitVector::from_angle(far)) {
            return far;
        }
        let (mut inside, mut outside) = (t0, far);
        for _ in 0..60 {
            let mid = 0.5 * (inside + outside);
            if member(&UnitVector::from_angle(mid)) {
                inside = mid;
            } else {
                outside = mid;
            }
        }
        inside
    };
    let lo = edge(-1.0);
    let hi = edge(1.0);
    let (t, v) = golden_section_max(|t| objective(&UnitVector::from_angle(t)), lo, hi, REFINE_TOL);
    if v >= best_val {
        (v, UnitVector::from_angle(t))
    } else {
        (best_val, best_dir)
    }
}

fn refine_spherical<M, F>(member: &M, objective: &F, mut best_val: f64, mut best_dir: UnitVector) -> (f64, UnitVector)
where
    M: Fn(&UnitVector) -> bool,
    F: Fn(&UnitVector) -> f64,
{
    // nested local grids in the tangent plane, shrinking 5x per level
    let mut span = 2.0 * GRID_STEP;
    while span > REFINE_TOL {
        let (t1, t2) = tangent_frame(&best_dir);
        let centre = best_dir.clone();
        let k = 10;
        for i in -k..=k {
            for j in -k..=k {
                let u = span * i as f64 / k as f64;
                let v = span * j as f64 / k as f64;
                let c = centre.as_slice();
                let p: Vec<f64> = (0..3).map(|d| c[d] + u * t1[d] + v * t2[d]).collect();
                let Ok(dir) = UnitVector::new(p) else { continue };
                if !member(&dir) {
                    continue;
                }
                let val = objective(&dir);
                if val > best_val {
                    best_val = val;
                    best_dir = dir;
                }
            }
        }
        span /= 5.0;
    }
    (best_val, best_dir)
}

/// `inf` of `omega . w` over `omega` in `S^{n-1} ∩ V`, for `V` circular or
/// polyhedral (`n <= 3`) or the given sample set.
pub fn inf_dot_over_cone(v: &ConeSpec, w: &UnitVector) -> Result<f64> {
    match v {
        ConeSpec::Circular(c) => {
            if c.cos_half <= -1.0 {
                return Ok(-1.0);
            }
            let gap = w.angle_to(&c.axis) + c.half_angle();
            Ok(gap.min(PI).cos())
        }
        ConeSpec::Polyhedral(p) => {
            check_search_dim(p.dim())?;
            if p.contains(w.neg().as_slice()) {
                return Ok(-1.0);
            }
            let mut best = f64::INFINITY;
            let gens = &p.generators;
            for (i, g) in gens.iter().enumerate() {
                best = best.min(g.dot(w.as_slice()));
                for h in &gens[i + 1..] {
                    best = best.min(min_dot_on_arc(g, h, w));
                }
            }
            Ok(best)
        }
        ConeSpec::Halfspace(_) | ConeSpec::Zero { .. } => {
            invalid("inf over a half-space cone needs its generators; pass a circular or polyhedral cone")
        }
    }
}

/// Minimum of `x . w` on the short great-circle arc from `g` to `h`.
fn min_dot_on_arc(g: &UnitVector, h: &UnitVector, w: &UnitVector) -> f64 {
    let total = g.angle_to(h);
    let a = g.dot(w.as_slice());
    let b_end = h.dot(w.as_slice());
    if !(1e-12..=PI - 1e-12).contains(&total) {
        return a.min(b_end);
    }
    // x(t) = cos t g + sin t u, u orthonormal to g in span{g, h}
    let gh = g.dot(h.as_slice());
    let u: Vec<f64> = (0..g.dim()).map(|i| (h.as_slice()[i] - gh * g.as_slice()[i]) / total.sin()).collect();
    let b = dot(&u, w.as_slice());
    let r = (a * a + b * b).sqrt();
    let t_min = b.atan2(a) + PI;
    let mut best = a.min(b_end);
    for shift in [-2.0 * PI, 0.0, 2.0 * PI] {
        let t = t_min + shift;
        if (0.0..=total).contains(&t) {
            best = best.min(-r);
        }
    }
    best
}

fn min_over_samples(samples: &[UnitVector], w: &UnitVector) -> f64 {
    samples.iter().map(|s| s.dot(w.as_slice())).fold(f64::INFINITY, f64::min)
}

/// `kappa0 = sup_{w in S ∩ V'} inf_{omega in supp} omega . w`, `+inf` when the
/// sampled negative support is empty.
pub fn kappa0(supp_neg: &[UnitVector], v_prime: &ConeSpec) -> Result<f64> {
    if !interior_nonempty(v_prime) {
        return Err(Error::EmptyInterior);
    }
    if supp_neg.is_empty() {
        return Ok(f64::INFINITY);
    }
    check_dims(supp_neg, v_prime.dim())?;
    let (v, _) = sup_over_directions(v_prime, |w| min_over_samples(supp_neg, w))?;
    Ok(v)
}

/// `inf` over the closed cone `V''` of the inner products with the sampled
/// negative support (1 when that support is empty). `V''` must close inside
/// `V' ∪ {0}`.
pub fn kappa0_prime(supp_neg: &[UnitVector], v_double_prime: &CircularCone, v_prime: &ConeSpec) -> Result<f64> {
    let dd = ConeSpec::Circular(CircularCone { open: false, ..v_double_prime.clone() });
    check_containment(&dd, v_prime, 10_000)?;
    if supp_neg.is_empty() {
        return Ok(1.0);
    }
    check_dims(supp_neg, v_double_prime.dim())?;
    let half = v_double_prime.half_angle();
    Ok(supp_neg.iter().map(|w| (w.angle_to(&v_double_prime.axis) + half).min(PI).cos()).fold(f64::INFINITY, f64::min))
}

/// `kappa_V = sup_{w in S ∩ V'} inf_{omega in S ∩ V} omega . w`.
pub fn kappa_v(v: &ConeSpec, v_prime: &ConeSpec) -> Result<f64> {
    if matches!(v, ConeSpec::Zero { .. }) || !interior_nonempty(v_prime) {
        return Err(Error::EmptyInterior);
    }
    if v.dim() != v_prime.dim() {
        return Err(Error::DimensionMismatch { expected: v.dim(), got: v_prime.dim() });
    }
    let (val, _) = sup_over_directions(v_prime, |w| inf_dot_over_cone(v, w).unwrap_or(f64::NEG_INFINITY))?;
    Ok(val)
}

fn check_dims(samples: &[UnitVector], dim: usize) -> Result<()> {
    match samples.iter().find(|s| s.dim() != dim) {
        Some(s) => Err(Error::DimensionMismatch { expected: dim, got: s.dim() }),
        None => Ok(()),
    }
}

/// Checks `inner \ {0} ⊆ outer` on `count` directions sampled from `inner`.
pub fn check_containment(inner: &ConeSpec, outer: &ConeSpec, count: usize) -> Result<()> {
    if inner.dim() != outer.dim() {
        return Err(Error::DimensionMismatch { expected: outer.dim(), got: inner.dim() });
    }
    let mut rng = crate::seeded_rng(0x5eed_c0de);
    let samples = sample_directions_in(inner, count, &mut rng);
    if let Some(bad) = samples.iter().find(|u| !outer.contains(u.as_slice())) {
        return Err(Error::Containment(format!("direction {:?} lies outside the outer cone", bad.as_slice())));
    }
    Ok(())
}

/// Uniformly random direction on `S^{n-1}`.
pub fn random_direction<R: Rng>(dim: usize, rng: &mut R) -> UnitVector {
    loop {
        let v: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
        if let Ok(u) = UnitVector::new(v) {
            return u;
        }
    }
}

/// Directions sampled from a closed cone, boundary included where it is known
/// in closed form.
pub fn sample_directions_in<R: Rng>(cone: &ConeSpec, count: usize, rng: &mut R) -> Vec<UnitVector> {
    let dim = cone.dim();
    match cone {
        ConeSpec::Zero { .. } => Vec::new(),
        ConeSpec::Circular(c) if dim == 1 => vec![c.axis.clone()],
        ConeSpec::Circular(c) if c.cos_half <= -1.0 => (0..count).map(|_| random_direction(dim, rng)).collect(),
        ConeSpec::Circular(c) => {
            let half = c.half_angle();
            let mut out = Vec::with_capacity(count);
            for k in 0..count {
                // every fourth sample on the boundary sphere
                let polar = if k % 4 == 0 { half } else { (1.0 - rng.random::<f64>() * (1.0 - c.cos_half)).acos() };
                out.push(direction_at_polar(&c.axis, polar, rng));
            }
            out
        }
        ConeSpec::Polyhedral(p) => {
            let mut out: Vec<UnitVector> = p.generators.clone();
            while out.len() < count {
                let n = p.dim();
                let mut v = vec![0.0; n];
                for g in &p.generators {
                    let w: f64 = rng.random::<f64>().powi(2);
                    for (vi, gi) in v.iter_mut().zip(g.as_slice()) {
                        *vi += w * gi;
                    }
                }
                if let Ok(u) = UnitVector::new(v) {
                    out.push(u);
                }
            }
            out
        }
        ConeSpec::Halfspace(h) => {
            let closed = ConeSpec::Halfspace(HalfspaceCone { open: false, ..h.clone() });
            let mut out = Vec::with_capacity(count);
            let mut attempts = 0usize;
            while out.len() < count && attempts < 200 * count {
                attempts += 1;
                let u = random_direction(dim, rng);
                if closed.contains(u.as_slice()) {
                    out.push(u);
                }
            }
            out
        }
    }
}

/// Random direction at the given angle from `axis`.
pub(crate) fn direction_at_polar<R: Rng>(axis: &UnitVector, polar: f64, rng: &mut R) -> UnitVector {
    let dim = axis.dim();
    let a = axis.as_slice();
    // random unit vector orthogonal to the axis
    let perp = loop {
        let r = random_direction(dim, rng);
        let d = r.dot(a);
        let p: Vec<f64> = (0..dim).map(|i| r.as_slice()[i] - d * a[i]).collect();
        if norm(&p) > 1e-6 {
            break UnitVector::new(p).expect("nonzero");
        }
    };
    let v = (0..dim).map(|i| polar.cos() * a[i] + polar.sin() * perp.as_slice()[i]).collect();
    UnitVector(v)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn deg(x: f64) -> f64 {
        x.to_radians()
    }

    fn e1(n: usize) -> UnitVector {
        UnitVector::basis(n, 0)
    }

    #[test]
    fn unit_vector_normalizes_and_rejects_zero() {
        let u = UnitVector::new(vec![3.0, 4.0]).unwrap();
        assert!((norm(u.as_slice()) - 1.0).abs() < 1e-12);
        assert!(UnitVector::new(vec![0.0, 0.0]).is_err());
        assert!(UnitVector::new(vec![1.0; 9]).is_err());
    }

    #[test]
    fn circular_dual_quarter_aperture_is_self_dual() {
        let c = ConeSpec::circular(e1(2), deg(45.0), false).unwrap();
        let ConeSpec::Circular(d) = dual_cone(&c).unwrap() else { panic!("expected circular dual") };
        assert!((d.half_angle() - deg(45.0)).abs() < 1e-12);
        assert_eq!(d.axis, e1(2));
    }

    #[test]
    fn dual_of_ray_is_half_plane() {
        let p = ConeSpec::Polyhedral(PolyhedralCone::new(vec![e1(2)]).unwrap());
        let d = dual_cone(&p).unwrap();
        assert_eq!(d, ConeSpec::Halfspace(HalfspaceCone::new(2, vec![e1(2)], false).unwrap()));
        assert!(d.contains(&[0.0, 5.0]));
        assert!(!d.contains(&[-0.1, 5.0]));
    }

    #[test]
    fn dual_of_half_space_is_ray() {
        let c = ConeSpec::circular(e1(3), deg(90.0), false).unwrap();
        let ConeSpec::Circular(d) = dual_cone(&c).unwrap() else { panic!() };
        assert!(d.half_angle().abs() < 1e-7);
    }

    #[test]
    fn wide_circular_cone_has_trivial_dual() {
        let c = ConeSpec::circular(e1(2), deg(120.0), false).unwrap();
        assert_eq!(dual_cone(&c).unwrap(), ConeSpec::Zero { dim: 2 });
    }

    #[test]
    fn interior_examples() {
        assert!(interior_nonempty(&ConeSpec::circular(e1(2), deg(60.0), false).unwrap()));
        assert!(!interior_nonempty(&ConeSpec::circular(e1(2), 0.0, false).unwrap()));
        let line = HalfspaceCone::new(2, vec![e1(2), e1(2).neg()], false).unwrap();
        assert!(!interior_nonempty(&ConeSpec::Halfspace(line)));
        let quadrant = HalfspaceCone::new(2, vec![e1(2), UnitVector::basis(2, 1)], false).unwrap();
        assert!(interior_nonempty(&ConeSpec::Halfspace(quadrant)));
        assert!(interior_nonempty(&ConeSpec::whole_space(3)));
    }

    #[test]
    fn polyhedral_membership_by_feasibility() {
        let p = PolyhedralCone::new(vec![e1(3), UnitVector::basis(3, 1)]).unwrap();
        assert!(p.contains(&[1.0, 2.0, 0.0]));
        assert!(!p.contains(&[1.0, -0.1, 0.0]));
        assert!(!p.contains(&[1.0, 1.0, 0.01]));
    }

    #[test]
    fn extreme_rays_recover_generators_in_plane() {
        let g1 = UnitVector::from_angle(deg(10.0));
        let g2 = UnitVector::from_angle(deg(70.0));
        let p = PolyhedralCone::new(vec![g1.clone(), g2.clone(), UnitVector::from_angle(deg(40.0))]).unwrap();
        let dual = HalfspaceCone::new(2, p.generators.clone(), false).unwrap();
        let h = HalfspaceCone::new(2, dual.extreme_rays_2d().unwrap(), false).unwrap();
        let rays = h.extreme_rays_2d().unwrap();
        assert!(rays[0].angle_to(&g1) < 1e-12 && rays[1].angle_to(&g2) < 1e-12);
    }

    #[test]
    fn kappa0_empty_support_is_infinite() {
        let vp = ConeSpec::circular(e1(2), deg(90.0), true).unwrap();
        assert_eq!(kappa0(&[], &vp).unwrap(), f64::INFINITY);
    }

    #[test]
    fn kappa0_single_direction() {
        let vp = ConeSpec::circular(e1(2), deg(90.0), true).unwrap();
        assert!((kappa0(&[e1(2)], &vp).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn kappa0_rejects_empty_interior() {
        let ray = ConeSpec::circular(e1(2), 0.0, false).unwrap();
        assert!(matches!(kappa0(&[e1(2)], &ray), Err(Error::EmptyInterior)));
    }

    #[test]
    fn kappa0_prime_examples() {
        let vp = ConeSpec::circular(e1(2), deg(60.0), true).unwrap();
        let dd = CircularCone::from_half_angle(e1(2), deg(30.0), true).unwrap();
        assert_eq!(kappa0_prime(&[], &dd, &vp).unwrap(), 1.0);
        assert!((kappa0_prime(&[e1(2)], &dd, &vp).unwrap() - deg(30.0).cos()).abs() < 1e-12);
        let arc: Vec<UnitVector> = (-20..=20).map(|d| UnitVector::from_angle(deg(d as f64))).collect();
        assert!((kappa0_prime(&arc, &dd, &vp).unwrap() - deg(50.0).cos()).abs() < 1e-12);
    }

    #[test]
    fn kappa0_prime_rejects_uncontained_cone() {
        let vp = ConeSpec::circular(e1(2), deg(20.0), true).unwrap();
        let dd = CircularCone::from_half_angle(e1(2), deg(30.0), true).unwrap();
        assert!(matches!(kappa0_prime(&[e1(2)], &dd, &vp), Err(Error::Containment(_))));
    }

    #[test]
    fn kappa_v_of_rays() {
        let ray2 = ConeSpec::Polyhedral(PolyhedralCone::new(vec![e1(2)]).unwrap());
        let half_plane = ConeSpec::circular(e1(2), deg(90.0), true).unwrap();
        assert!((kappa_v(&ray2, &half_plane).unwrap() - 1.0).abs() < 1e-12);
        let ray3 = ConeSpec::circular(e1(3), 0.0, false).unwrap();
        let vp3 = dual_cone(&ray3).unwrap().interior().unwrap();
        assert!((kappa_v(&ray3, &vp3).unwrap() - 1.0).abs() < 1e-12);
    }

    #[test]
    fn arc_minimum_matches_dense_sampling() {
        let g = UnitVector::from_spherical(deg(30.0), 0.0);
        let h = UnitVector::from_spherical(deg(60.0), deg(80.0));
        let w = UnitVector::from_spherical(deg(100.0), deg(200.0));
        let exact = min_dot_on_arc(&g, &h, &w);
        let total = g.angle_to(&h);
        let gh = g.dot(h.as_slice());
        let brute = (0..=100_000)
            .map(|k| {
                let t = total * k as f64 / 100_000.0;
                let v: Vec<f64> = (0..3)
                    .map(|i| {
                        t.cos() * g.as_slice()[i] + t.sin() * (h.as_slice()[i] - gh * g.as_slice()[i]) / total.sin()
                    })
                    .collect();
                dot(&v, w.as_slice())
            })
            .fold(f64::INFINITY, f64::min);
        assert!((exact - brute).abs() < 1e-9);
    }
}
