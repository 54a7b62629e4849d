//! Order-zero symbols: truncated homogeneous symbols, smooth conic cut-offs,
//! smooth bumps built from the `exp(-1/t)` bridge, the radial/angular test
//! functions `chi_l`, and finite-difference Mikhlin seminorm estimates.

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::cone_geometry::{
    angle_between, check_containment, norm, CircularCone, ConeSpec, HalfspaceCone, PolyhedralCone, UnitVector,
};
use crate::error::{invalid, Error, Result};
use crate::quad::integrate_adaptive;
use crate::sphere_profiles::SphericalProfile;

fn e(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else {
        (-1.0 / x).exp()
    }
}

/// Smooth step: 0 for `x <= 0`, 1 for `x >= 1`, all derivatives vanish at both ends.
pub fn bridge(x: f64) -> f64 {
    if x <= 0.0 {
        0.0
    } else if x >= 1.0 {
        1.0
    } else {
        let a = e(x);
        a / (a + e(1.0 - x))
    }
}

/// Smooth plateau function: 1 on `[b, c]`, 0 outside `(a, d)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BumpSpec {
    pub a: f64,
    pub b: f64,
    pub c: f64,
    pub d: f64,
}

impl BumpSpec {
    pub fn new(a: f64, b: f64, c: f64, d: f64) -> Result<Self> {
        if !(a < b && b <= c && c < d) || ![a, b, c, d].iter().all(|x| x.is_finite()) {
            return invalid(format!("bump needs a < b <= c < d, got ({a}, {b}, {c}, {d})"));
        }
        Ok(Self { a, b, c, d })
    }

    /// Default `chi_k` for the one-dimensional principal value: plateau `[1/k, 1/2]`,
    /// support `[1/(2k), 1]`.
    pub fn pv_default(k: u32) -> Result<Self> {
        let k = k as f64;
        Self::new(0.5 / k, 1.0 / k, 0.5, 1.0)
    }

    pub fn eval(&self, x: f64) -> f64 {
        if x <= self.a || x >= self.d {
            0.0
        } else if x < self.b {
            bridge((x - self.a) / (self.b - self.a))
        } else if x <= self.c {
            1.0
        } else {
            bridge((self.d - x) / (self.d - self.c))
        }
    }
}

/// Complex-valued Fourier multiplier symbol.
pub trait Symbol: Sync {
    fn eval(&self, xi: &[f64]) -> Complex64;
}

impl<S: Symbol + ?Sized> Symbol for &S {
    fn eval(&self, xi: &[f64]) -> Complex64 {
        (**self).eval(xi)
    }
}

impl<S: Symbol + ?Sized> Symbol for Box<S> {
    fn eval(&self, xi: &[f64]) -> Complex64 {
        (**self).eval(xi)
    }
}

/// Symbol given by a closure.
pub struct FnSymbol<F>(pub F);

impl<F: Fn(&[f64]) -> Complex64 + Sync> Symbol for FnSymbol<F> {
    fn eval(&self, xi: &[f64]) -> Complex64 {
        (self.0)(xi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstantSymbol(pub f64);

impl Symbol for ConstantSymbol {
    fn eval(&self, _xi: &[f64]) -> Complex64 {
        Complex64::new(self.0, 0.0)
    }
}

/// `exp(-i a . xi)`, the symbol of translation by `a`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ShiftSymbol {
    pub shift: Vec<f64>,
}

impl Symbol for ShiftSymbol {
    fn eval(&self, xi: &[f64]) -> Complex64 {
        let phase: f64 = self.shift.iter().zip(xi).map(|(a, x)| a * x).sum();
        Complex64::from_polar(1.0, -phase)
    }
}

/// `sgn(xi_1)`, zero at the origin.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SignSymbol;

impl Symbol for SignSymbol {
    fn eval(&self, xi: &[f64]) -> Complex64 {
        let x = xi[0];
        Complex64::new(
            if x > 0.0 {
                1.0
            } else if x < 0.0 {
                -1.0
            } else {
                0.0
            },
            0.0,
        )
    }
}

/// One-dimensional `psi(xi) - psi(-xi)` for the smooth cut-off `psi` of the
/// ray `[0, inf)`: `sgn(xi)` with the origin smoothed out below `|xi| = R`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OddRayCutoff {
    pub radius: f64,
}

impl Symbol for OddRayCutoff {
    fn eval(&self, xi: &[f64]) -> Complex64 {
        let x = xi[0];
        let ramp = bridge(2.0 * x.abs() / self.radius - 1.0);
        Complex64::new(x.signum() * ramp, 0.0)
    }
}

/// Real-valued radial bump `theta(|xi|)`, a compactly supported control symbol.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RadialBumpSymbol(pub BumpSpec);

impl Symbol for RadialBumpSymbol {
    fn eval(&self, xi: &[f64]) -> Complex64 {
        Complex64::new(self.0.eval(norm(xi)), 0.0)
    }
}

/// `phi_1(xi / |xi|) 1_{(r, inf)}(|xi|)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HomogeneousSymbol {
    pub profile: SphericalProfile,
    pub r: f64,
}

impl HomogeneousSymbol {
    pub fn new(profile: SphericalProfile, r: f64) -> Result<Self> {
        if !(r > 0.0 && r.is_finite()) {
            return invalid(format!("truncation radius must be positive, got {r}"));
        }
        Ok(Self { profile, r })
    }

    pub fn eval_real(&self, xi: &[f64]) -> f64 {
        let rho = norm(xi);
        if rho <= self.r {
            return 0.0;
        }
        let w: Vec<f64> = xi.iter().map(|x| x / rho).collect();
        self.profile.eval(&w)
    }
}

impl Symbol for HomogeneousSymbol {
    fn eval(&self, xi: &[f64]) -> Complex64 {
        Complex64::new(self.eval_real(xi), 0.0)
    }
}

/// Homogeneous symbol with independent real and imaginary angular profiles.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ComplexHomogeneousSymbol {
    pub re: SphericalProfile,
    pub im: SphericalProfile,
    pub r: f64,
}

impl ComplexHomogeneousSymbol {
    pub fn new(re: SphericalProfile, im: SphericalProfile, r: f64) -> Result<Self> {
        if re.dim() != im.dim() {
            return Err(Error::DimensionMismatch { expected: re.dim(), got: im.dim() });
        }
        if !(r > 0.0 && r.is_finite()) {
            return invalid(format!("truncation radius must be positive, got {r}"));
        }
        Ok(Self { re, im, r })
    }
}

impl Symbol for ComplexHomogeneousSymbol {
    fn eval(&self, xi: &[f64]) -> Complex64 {
        let rho = norm(xi);
        if rho <= self.r {
            return Complex64::new(0.0, 0.0);
        }
        let w: Vec<f64> = xi.iter().map(|x| x / rho).collect();
        Complex64::new(self.re.eval(&w), self.im.eval(&w))
    }
}

/// Smooth cut-off for the pair `(V0, Vouter)`: equals `c0` on `V0` beyond
/// `|xi| = R`, vanishes outside `Vouter`, homogeneous of order 0 beyond `R`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SmoothCutoff {
    pub v0: ConeSpec,
    pub vouter: ConeSpec,
    #[serde(rename = "R")]
    pub radius: f64,
    pub c0: f64,
}

/// Cone description used for angular distances.
enum DistanceCone {
    Everything,
    Circular(CircularCone),
    Polyhedral(PolyhedralCone),
    Halfspace(HalfspaceCone),
}

impl DistanceCone {
    fn from_spec(c: &ConeSpec) -> Result<Self> {
        Ok(match c {
            ConeSpec::Circular(c) if c.cos_half <= -1.0 => Self::Everything,
            ConeSpec::Circular(c) => Self::Circular(c.clone()),
            ConeSpec::Polyhedral(p) => Self::Polyhedral(p.clone()),
            ConeSpec::Halfspace(h) if h.normals.is_empty() => Self::Everything,
            ConeSpec::Halfspace(h) => Self::Halfspace(h.clone()),
            ConeSpec::Zero { .. } => return invalid("cut-off cones must not be {0}"),
        })
    }

    /// Angular distance from a unit vector to the closed cone.
    fn distance_to(&self, w: &[f64]) -> f64 {
        match self {
            Self::Everything => 0.0,
            Self::Circular(c) => (angle_between(c.axis.as_slice(), w) - c.half_angle()).max(0.0),
            Self::Polyhedral(p) => {
                if p.contains(w) {
                    return 0.0;
                }
                let proj = project_polyhedral(p, w);
                norm(&proj).min(1.0).acos()
            }
            Self::Halfspace(h) => {
                let closed = HalfspaceCone { open: false, ..h.clone() };
                if closed.contains(w) {
                    return 0.0;
                }
                // Moreau: P_H(w) = w + P_{cone(normals)}(-w)
                let gens = PolyhedralCone { generators: h.normals.clone() };
                let neg: Vec<f64> = w.iter().map(|x| -x).collect();
                let q = project_polyhedral(&gens, &neg);
                let proj: Vec<f64> = w.iter().zip(&q).map(|(a, b)| a + b).collect();
                norm(&proj).min(1.0).acos()
            }
        }
    }

    /// Angular distance from a unit vector inside the cone to its complement.
    fn depth(&self, w: &[f64]) -> f64 {
        match self {
            Self::Everything => f64::INFINITY,
            Self::Circular(c) => (c.half_angle() - angle_between(c.axis.as_slice(), w)).max(0.0),
            Self::Halfspace(h) => {
                h.normals.iter().map(|g| g.dot(w).clamp(-1.0, 1.0).asin().max(0.0)).fold(f64::INFINITY, f64::min)
            }
            Self::Polyhedral(_) => unreachable!("outer polyhedral cones are converted to half-spaces"),
        }
    }
}

fn project_polyhedral(p: &PolyhedralCone, w: &[f64]) -> Vec<f64> {
    use nalgebra::{DMatrix, DVector};
    let n = w.len();
    let a = DMatrix::from_fn(n, p.generators.len(), |i, j| p.generators[j].as_slice()[i]);
    let lambda = crate::cone_geometry::nnls(&a, &DVector::from_column_slice(w));
    (a * lambda).iter().copied().collect()
}

impl SmoothCutoff {
    pub fn new(v0: ConeSpec, vouter: ConeSpec, radius: f64, c0: f64) -> Result<Self> {
        if !(radius > 0.0 && c0 > 0.0 && radius.is_finite() && c0.is_finite()) {
            return invalid(format!("cut-off needs R > 0 and c0 > 0, got R={radius}, c0={c0}"));
        }
        if v0.dim() != vouter.dim() {
            return Err(Error::DimensionMismatch { expected: v0.dim(), got: vouter.dim() });
        }
        let vouter = match vouter {
            ConeSpec::Polyhedral(p) if p.dim() == 2 => ConeSpec::Polyhedral(p).interior()?,
            ConeSpec::Polyhedral(p) => return Err(Error::UnsupportedDimension(p.dim())),
            other => other,
        };
        DistanceCone::from_spec(&v0)?;
        DistanceCone::from_spec(&vouter)?;
        let open_outer = vouter.interior()?;
        check_containment(&v0, &open_outer, 10_000)?;
        Ok(Self { v0, vouter, radius, c0 })
    }

    pub fn dim(&self) -> usize {
        self.v0.dim()
    }

    /// Angular factor in `[0, 1]`: 1 near `V0`, 0 outside `Vouter`.
    pub fn angular(&self, w: &[f64]) -> f64 {
        let inner = DistanceCone::from_spec(&self.v0).expect("validated");
        let outer = DistanceCone::from_spec(&self.vouter).expect("validated");
        let d0 = inner.distance_to(w);
        if d0 == 0.0 {
            return 1.0;
        }
        let d1 = outer.depth(w);
        if d1 == 0.0 {
            return 0.0;
        }
        let t = if d1.is_infinite() { 0.0 } else { d0 / (d0 + d1) };
        bridge((0.9 - t) / 0.8)
    }

    /// Radial factor: 0 for `|xi| <= R/2`, 1 for `|xi| >= R`.
    pub fn radial(&self, rho: f64) -> f64 {
        bridge(2.0 * rho / self.radius - 1.0)
    }

    pub fn eval_real(&self, xi: &[f64]) -> f64 {
        let rho = norm(xi);
        let rad = self.radial(rho);
        if rad == 0.0 {
            return 0.0;
        }
        let w: Vec<f64> = xi.iter().map(|x| x / rho).collect();
        self.c0 * rad * self.angular(&w)
    }
}

impl Symbol for SmoothCutoff {
    fn eval(&self, xi: &[f64]) -> Complex64 {
        Complex64::new(self.eval_real(xi), 0.0)
    }
}

/// Pointwise product of cut-offs (a cut-off for the intersected pair).
#[derive(Debug, Clone, PartialEq)]
pub struct ProductCutoff(pub Vec<SmoothCutoff>);

impl Symbol for ProductCutoff {
    fn eval(&self, xi: &[f64]) -> Complex64 {
        Complex64::new(self.0.iter().map(|c| c.eval_real(xi)).product(), 0.0)
    }
}

/// `chi_l(xi) = chi~(xi/|xi|) theta_l(|xi|)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestFunction {
    pub axis: UnitVector,
    /// Angular radius of the support of `chi~` about `axis`.
    pub support_angle: f64,
    pub plateau_angle: f64,
    pub radial: BumpSpec,
    pub l: u32,
    pub s: f64,
    pub r: f64,
}

/// Builds `chi_l` centred at `axis` inside `V''`, radial plateau
/// `[1/(l(r+1)), 1/(2s(r+1))]`, support `(1/(2l(r+1)), 1/(s(r+1)))`.
pub fn make_test_sequence(axis: UnitVector, vdd: &CircularCone, r: f64, s: f64, l: u32) -> Result<TestFunction> {
    if axis.dim() != vdd.dim() {
        return Err(Error::DimensionMismatch { expected: vdd.dim(), got: axis.dim() });
    }
    if !(s > 1.0) || !(r > 0.0) {
        return invalid(format!("need s > 1 and r > 0, got s={s}, r={r}"));
    }
    if (l as f64) < 2.0 * s + 1.0 {
        return invalid(format!("l = {l} is below 2s + 1 = {}", 2.0 * s + 1.0));
    }
    let room = vdd.half_angle() - axis.angle_to(&vdd.axis);
    if room <= 0.0 {
        return Err(Error::Containment("test function axis must lie inside V''".into()));
    }
    let scale = r + 1.0;
    let lf = l as f64;
    let radial = BumpSpec::new(0.5 / (lf * scale), 1.0 / (lf * scale), 0.5 / (s * scale), 1.0 / (s * scale))?;
    Ok(TestFunction { axis, support_angle: room, plateau_angle: 0.4 * room, radial, l, s, r })
}

impl TestFunction {
    pub fn dim(&self) -> usize {
        self.axis.dim()
    }

    /// `chi~` as a function of the angle to the axis.
    pub fn angular_of(&self, beta: f64) -> f64 {
        let t = (self.support_angle - beta) / (self.support_angle - self.plateau_angle);
        (0.5 * PI * bridge(t)).sin().powi(2)
    }

    pub fn angular(&self, w: &[f64]) -> f64 {
        self.angular_of(angle_between(self.axis.as_slice(), w))
    }

    pub fn eval_real(&self, xi: &[f64]) -> f64 {
        let rho = norm(xi);
        let rad = self.radial.eval(rho);
        if rad == 0.0 {
            return 0.0;
        }
        let w: Vec<f64> = xi.iter().map(|x| x / rho).collect();
        rad * self.angular(&w)
    }

    /// `∫_{S^{n-1}} chi~`.
    pub fn angular_l1(&self) -> Result<f64> {
        let bp = [0.0, self.plateau_angle, self.support_angle];
        let v = match self.dim() {
            2 => 2.0 * integrate_adaptive(|b| self.angular_of(b), &bp, 1e-14, 4000)?.value,
            3 => 2.0 * PI * integrate_adaptive(|b| self.angular_of(b) * b.sin(), &bp, 1e-14, 4000)?.value,
            d => return Err(Error::UnsupportedDimension(d)),
        };
        Ok(v)
    }
}

impl Symbol for TestFunction {
    fn eval(&self, xi: &[f64]) -> Complex64 {
        Complex64::new(self.eval_real(xi), 0.0)
    }
}

/// Sampling plan for Mikhlin estimates: `radii` log-spaced on
/// `[R/4, 64 R]`, `angles` directions (circle) or polar rings (sphere).
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MikhlinGrid {
    pub radius: f64,
    pub radii: usize,
    pub angles: usize,
    pub rel_step: f64,
}

impl MikhlinGrid {
    pub fn new(radius: f64) -> Self {
        Self { radius, radii: 48, angles: 360, rel_step: 1e-4 }
    }

    /// Twice the density, half the difference step.
    pub fn refined(&self) -> Self {
        Self { radii: 2 * self.radii, angles: 2 * self.angles, rel_step: 0.5 * self.rel_step, ..*self }
    }

    fn points(&self, dim: usize) -> Result<Vec<Vec<f64>>> {
        let (lo, hi) = ((0.25 * self.radius).ln(), (64.0 * self.radius).ln());
        let radii: Vec<f64> =
            (0..self.radii).map(|k| (lo + (hi - lo) * k as f64 / (self.radii - 1).max(1) as f64).exp()).collect();
        let dirs: Vec<Vec<f64>> = match dim {
            1 => vec![vec![1.0], vec![-1.0]],
            2 => (0..self.angles)
                .map(|k| {
                    let t = 2.0 * PI * k as f64 / self.angles as f64;
                    vec![t.cos(), t.sin()]
                })
                .collect(),
            3 => {
                let rings = (self.angles / 2).max(2);
                let mut out = Vec::new();
                for i in 0..=rings {
                    let polar = PI * i as f64 / rings as f64;
                    let count = ((self.angles as f64 * polar.sin()).ceil() as usize).max(1);
                    for j in 0..count {
                        out.push(UnitVector::from_spherical(polar, 2.0 * PI * j as f64 / count as f64).into());
                    }
                }
                out
            }
            d => return Err(Error::UnsupportedDimension(d)),
        };
        Ok(radii.iter().flat_map(|r| dirs.iter().map(move |d| d.iter().map(|x| r * x).collect())).collect())
    }
}

/// Result of [`mikhlin_seminorm_estimate`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MikhlinEstimate {
    /// `max <xi>^k |d^alpha psi|` over `|alpha| = k`, for `k = 0..=max_order`.
    pub seminorms: Vec<f64>,
    /// Same quantities on the refined grid.
    pub refined: Vec<f64>,
    pub stable: bool,
    pub warning: Option<String>,
}

fn multi_indices(dim: usize, order: usize) -> Vec<Vec<usize>> {
    if dim == 1 {
        return vec![vec![order]];
    }
    (0..=order)
        .flat_map(|first| {
            multi_indices(dim - 1, order - first).into_iter().map(move |mut rest| {
                rest.insert(0, first);
                rest
            })
        })
        .collect()
}

fn binomial(n: usize, k: usize) -> f64 {
    (0..k).fold(1.0, |acc, i| acc * (n - i) as f64 / (i + 1) as f64)
}

/// Tensor central difference `d^alpha f(x)` with step `h`.
fn central_derivative<S: Symbol + ?Sized>(sym: &S, x: &[f64], alpha: &[usize], h: f64) -> Complex64 {
    let dim = x.len();
    let mut total = Complex64::new(0.0, 0.0);
    let mut idx = vec![0usize; dim];
    loop {
        let mut coeff = 1.0;
        let mut p = x.to_vec();
        for d in 0..dim {
            let k = alpha[d];
            let j = idx[d];
            coeff *= if j.is_multiple_of(2) { 1.0 } else { -1.0 } * binomial(k, j);
            p[d] += (0.5 * k as f64 - j as f64) * h;
        }
        total += sym.eval(&p) * coeff;
        let mut d = 0;
        loop {
            if d == dim {
                let order: usize = alpha.iter().sum();
                return total / h.powi(order as i32);
            }
            idx[d] += 1;
            if idx[d] <= alpha[d] {
                break;
            }
            idx[d] = 0;
            d += 1;
        }
    }
}

fn seminorms_on<S: Symbol + ?Sized>(sym: &S, dim: usize, max_order: usize, grid: &MikhlinGrid) -> Result<Vec<f64>> {
    use rayon::prelude::*;
    let pts = grid.points(dim)?;
    let alphas: Vec<Vec<Vec<usize>>> = (0..=max_order).map(|k| multi_indices(dim, k)).collect();
    let per_point: Vec<Vec<f64>> = pts
        .par_iter()
        .map(|x| {
            let bracket = (1.0 + norm(x) * norm(x)).sqrt();
            let h = grid.rel_step * bracket;
            alphas
                .iter()
                .enumerate()
                .map(|(k, set)| {
                    set.iter()
                        .map(|a| central_derivative(sym, x, a, h).norm() * bracket.powi(k as i32))
                        .fold(0.0, f64::max)
                })
                .collect()
        })
        .collect();
    Ok((0..=max_order).map(|k| per_point.iter().map(|v| v[k]).fold(0.0, f64::max)).collect())
}

/// Finite-difference estimate of `sup <xi>^{|alpha|} |d^alpha psi|` for
/// `|alpha| <= max_order` (at most 3), with a refinement stability check.
pub fn mikhlin_seminorm_estimate<S: Symbol + ?Sized>(
    sym: &S,
    dim: usize,
    max_order: usize,
    grid: &MikhlinGrid,
) -> Result<MikhlinEstimate> {
    if max_order > 3 {
        return invalid("Mikhlin estimates are limited to order 3");
    }
    let seminorms = seminorms_on(sym, dim, max_order, grid)?;
    let refined = seminorms_on(sym, dim, max_order, &grid.refined())?;
    let unstable: Vec<usize> = (0..=max_order)
        .filter(|&k| {
            let (a, b) = (seminorms[k], refined[k]);
            (b - a).abs() > 0.05 * a.max(b) && a.max(b) > 1e-8
        })
        .collect();
    let warning = (!unstable.is_empty())
        .then(|| format!("non-Mikhlin behaviour: orders {unstable:?} change by more than 5% under refinement"));
    Ok(MikhlinEstimate { seminorms, refined, stable: unstable.is_empty(), warning })
}
