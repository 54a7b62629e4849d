//! Finite-resolution estimates of `Sigma^E(u)`, `Sigma^E_x(u)`, `WF^E(u)` and
//! `sing supp_E(u)` for sampled planar fields.
//!
//! Membership `psi F u ∈ F E` is decided from dyadic shell energies of the
//! cut-off spectrum: the slope of `log2 e_j` against `j` over the usable
//! shells is compared with `-tau_exp`. Shells whose raw energy sits at the
//! round-off floor end the fit; a spectrum that reaches the floor before two
//! shells are available counts as decaying beyond resolution.

use std::f64::consts::PI;
use std::sync::OnceLock;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cone_geometry::{ConeSpec, UnitVector};
use crate::error::{invalid, Error, Result};
use crate::multiplier_engine::{dft_forward, GridField};
use crate::quad::linear_fit;
use crate::symbols::{bridge, ProductCutoff, SmoothCutoff, Symbol};

pub const TAU_EXP: f64 = 0.5;
pub const J_MIN: i32 = 2;
pub const MIN_SHELLS: usize = 4;
pub const MAX_DIRECTIONS: usize = 720;
/// Raw shell amplitudes below this fraction of `max |F u|` count as round-off.
pub const NOISE_REL: f64 = 1e-11;
const CUTOFF_RADIUS: f64 = 1.0;

/// Message attached to refused spaces.
pub const REFUSAL: &str = "smooth conic cut-offs do not preserve this space: there are f in L1_comp, \
g in Linf_comp and continuous compactly supported phi with psi(D) f not in L1_loc, psi(D) g not in Linf_loc \
and psi(D) phi not continuous, so wave front sets relative to L1, Linf or C0 are not defined by conic cut-offs";

/// Banach space `E` used in the regularity test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawDescriptor", into = "RawDescriptor")]
pub enum EDescriptor {
    /// `H^s`, shell sum of squares weighted by `<xi>^{2s}`.
    Sobolev(f64),
    /// `B^s_{inf,inf}`, shell supremum weighted by `2^{js}`.
    BesovInfInf(f64),
}

#[derive(Debug, Clone, Serialize, Deserialize)]
struct RawDescriptor {
    tag: String,
    #[serde(default)]
    s: Option<f64>,
}

impl TryFrom<RawDescriptor> for EDescriptor {
    type Error = Error;
    fn try_from(raw: RawDescriptor) -> Result<Self> {
        EDescriptor::parse(&raw.tag, raw.s)
    }
}

impl From<EDescriptor> for RawDescriptor {
    fn from(e: EDescriptor) -> Self {
        let (tag, s) = match e {
            EDescriptor::Sobolev(s) => ("Sobolev", s),
            EDescriptor::BesovInfInf(s) => ("BesovInfInf", s),
        };
        Self { tag: tag.into(), s: Some(s) }
    }
}

impl EDescriptor {
    /// Parses a tag; `L1`, `Linf` and `C0` are refused.
    pub fn parse(tag: &str, s: Option<f64>) -> Result<Self> {
        let t = tag.trim();
        match t.to_ascii_lowercase().as_str() {
            "l1" | "linf" | "l_inf" | "l∞" | "c0" | "c_0" => {
                return Err(Error::UnsupportedSpace(format!("E = {t} is refused: {REFUSAL}")));
            }
            _ => {}
        }
        let s = s.unwrap_or(0.0);
        if !s.is_finite() {
            return invalid(format!("smoothness index must be finite, got {s}"));
        }
        match t {
            "Sobolev" | "H" => Ok(Self::Sobolev(s)),
            "BesovInfInf" | "Besov" => Ok(Self::BesovInfInf(s)),
            "L2" => Ok(Self::Sobolev(0.0)),
            other => invalid(format!("unknown space tag {other:?} (expected Sobolev or BesovInfInf)")),
        }
    }

    pub fn s(&self) -> f64 {
        match *self {
            Self::Sobolev(s) | Self::BesovInfInf(s) => s,
        }
    }

    /// `<xi>^s`.
    pub fn weight(&self, rho: f64) -> f64 {
        (1.0 + rho * rho).powf(0.5 * self.s())
    }
}

impl std::fmt::Display for EDescriptor {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            Self::Sobolev(s) => write!(f, "Sobolev({s})"),
            Self::BesovInfInf(s) => write!(f, "BesovInfInf({s})"),
        }
    }
}

fn default_directions() -> usize {
    180
}

fn default_delta() -> f64 {
    10.0
}

fn default_tau() -> f64 {
    TAU_EXP
}

fn default_jmin() -> i32 {
    J_MIN
}

fn default_radii() -> Vec<f64> {
    vec![2.0, 1.0, 0.5]
}

/// Scan parameters; reported with every output.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScanParams {
    #[serde(rename = "M", default = "default_directions")]
    pub directions: usize,
    /// Cone half-angle `delta` in degrees.
    #[serde(rename = "deltaDeg", default = "default_delta")]
    pub delta_deg: f64,
    #[serde(rename = "tauExp", default = "default_tau")]
    pub tau_exp: f64,
    #[serde(rename = "jMin", default = "default_jmin")]
    pub j_min: i32,
    #[serde(rename = "windowRadii", default = "default_radii")]
    pub window_radii: Vec<f64>,
}

impl Default for ScanParams {
    fn default() -> Self {
        Self {
            directions: default_directions(),
            delta_deg: default_delta(),
            tau_exp: default_tau(),
            j_min: default_jmin(),
            window_radii: default_radii(),
        }
    }
}

impl ScanParams {
    /// Angular grid step in radians.
    pub fn step(&self) -> f64 {
        2.0 * PI / self.directions as f64
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DirectionScore {
    pub direction: UnitVector,
    #[serde(rename = "angleDeg")]
    pub angle_deg: f64,
    pub shells: Vec<i32>,
    #[serde(rename = "shellEnergies")]
    pub shell_energies: Vec<f64>,
    /// `None` when the spectrum reaches round-off before two shells.
    #[serde(rename = "fittedExponent")]
    pub fitted_exponent: Option<f64>,
    #[serde(rename = "inSigma")]
    pub in_sigma: bool,
}

struct Entry {
    xi: [f64; 2],
    unit: [f64; 2],
    shell: usize,
    amp: f64,
    weight: f64,
}

struct ShellTable {
    shells: Vec<i32>,
    entries: Vec<Entry>,
    max_amp: f64,
    cell: f64,
}

/// Usable shells `j_min <= j` with `2^{j+1}` at most the Nyquist frequency.
pub fn usable_shells(period: f64, size: usize, j_min: i32) -> Vec<i32> {
    let nyq = PI * size as f64 / period;
    (j_min..64).take_while(|&j| 2f64.powi(j + 1) <= nyq).collect()
}

fn shell_table(u: &GridField, e: &EDescriptor, params: &ScanParams) -> Result<ShellTable> {
    let shells = usable_shells(u.period, u.size, params.j_min);
    if shells.len() < MIN_SHELLS {
        return Err(Error::Resolution(format!(
            "only {} usable dyadic shells (need {MIN_SHELLS}); increase N or L",
            shells.len()
        )));
    }
    let spec = dft_forward(u);
    let max_amp = spec.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let (j0, j1) = (shells[0], *shells.last().unwrap());
    let entries = spec
        .values
        .iter()
        .enumerate()
        .filter_map(|(idx, v)| {
            let f = spec.frequency(idx);
            let rho = f[0].hypot(f[1]);
            if rho == 0.0 {
                return None;
            }
            let j = rho.log2().floor() as i32;
            if j < j0 || j > j1 {
                return None;
            }
            Some(Entry {
                xi: [f[0], f[1]],
                unit: [f[0] / rho, f[1] / rho],
                shell: (j - j0) as usize,
                amp: v.norm(),
                weight: match e {
                    EDescriptor::Sobolev(_) => e.weight(rho),
                    EDescriptor::BesovInfInf(s) => 2f64.powf(j as f64 * s),
                },
            })
        })
        .collect();
    Ok(ShellTable { shells, entries, max_amp, cell: (2.0 * PI / u.period).powi(2) })
}

/// Cut-off family: products of `(circ(w0, d/2), circ(w0, d))` cut-offs.
pub struct Scanner {
    pub e: EDescriptor,
    pub params: ScanParams,
    directions: Vec<UnitVector>,
    cutoffs: Vec<ProductCutoff>,
    support_cos: f64,
    cache: OnceLock<PsiCache>,
}

/// Cut-off values on the shell frequencies of one grid geometry.
struct PsiCache {
    period: f64,
    size: usize,
    per_direction: Vec<Vec<(u32, f64)>>,
}

impl Scanner {
    pub fn new(e: EDescriptor, params: ScanParams) -> Result<Self> {
        let delta = params.delta_deg;
        Self::with_product(e, params, &[delta])
    }

    /// Each direction uses the product of the cut-offs for the given half-angles (degrees).
    pub fn with_product(e: EDescriptor, params: ScanParams, deltas_deg: &[f64]) -> Result<Self> {
        let m = params.directions;
        if !(4..=MAX_DIRECTIONS).contains(&m) {
            return invalid(format!("angular resolution M must be in [4, {MAX_DIRECTIONS}], got {m}"));
        }
        if deltas_deg.is_empty() || deltas_deg.iter().any(|d| !(*d > 0.0 && *d < 90.0)) {
            return invalid(format!("cone half-angles must lie in (0, 90) degrees, got {deltas_deg:?}"));
        }
        if !(params.tau_exp.is_finite()) {
            return invalid("tau_exp must be finite");
        }
        let directions: Vec<UnitVector> =
            (0..m).map(|i| UnitVector::from_angle(2.0 * PI * i as f64 / m as f64)).collect();
        let cutoffs = directions
            .par_iter()
            .map(|w| {
                deltas_deg
                    .iter()
                    .map(|d| {
                        let d = d.to_radians();
                        SmoothCutoff::new(
                            ConeSpec::circular(w.clone(), 0.5 * d, false)?,
                            ConeSpec::circular(w.clone(), d, true)?,
                            CUTOFF_RADIUS,
                            1.0,
                        )
                    })
                    .collect::<Result<Vec<_>>>()
                    .map(ProductCutoff)
            })
            .collect::<Result<Vec<_>>>()?;
        let min_delta = deltas_deg.iter().copied().fold(f64::INFINITY, f64::min);
        Ok(Self { e, params, directions, cutoffs, support_cos: min_delta.to_radians().cos(), cache: OnceLock::new() })
    }

    pub fn directions(&self) -> &[UnitVector] {
        &self.directions
    }

    /// Scores every direction of the angular grid for `u`.
    pub fn sigma(&self, u: &GridField) -> Result<Vec<DirectionScore>> {
        if u.dim != 2 {
            return Err(Error::UnsupportedDimension(u.dim));
        }
        check_quarter_support(u)?;
        let table = shell_table(u, &self.e, &self.params)?;
        let fresh;
        let values = match self.cache.get() {
            Some(c) if c.period == u.period && c.size == u.size => &c.per_direction,
            _ => {
                let c = PsiCache { period: u.period, size: u.size, per_direction: self.cutoff_values(&table) };
                if self.cache.get().is_none() {
                    let _ = self.cache.set(c);
                    &self.cache.get().expect("just set").per_direction
                } else {
                    fresh = c;
                    &fresh.per_direction
                }
            }
        };
        Ok(self.directions.par_iter().zip(values).map(|(w, psi)| self.score(&table, w, psi)).collect())
    }

    fn cutoff_values(&self, table: &ShellTable) -> Vec<Vec<(u32, f64)>> {
        self.directions
            .par_iter()
            .zip(&self.cutoffs)
            .map(|(w, psi)| {
                let wv = w.as_slice();
                table
                    .entries
                    .iter()
                    .enumerate()
                    .filter(|(_, en)| wv[0] * en.unit[0] + wv[1] * en.unit[1] > self.support_cos)
                    .map(|(i, en)| (i as u32, psi.eval(&en.xi).re))
                    .filter(|&(_, c)| c != 0.0)
                    .collect()
            })
            .collect()
    }

    fn score(&self, table: &ShellTable, w: &UnitVector, psi: &[(u32, f64)]) -> DirectionScore {
        let k = table.shells.len();
        let mut energy = vec![0.0; k];
        let mut mass = vec![0.0; k];
        for &(i, c) in psi {
            let en = &table.entries[i as usize];
            match self.e {
                EDescriptor::Sobolev(_) => {
                    energy[en.shell] += (c * en.amp * en.weight).powi(2) * table.cell;
                    mass[en.shell] += c * c * table.cell;
                }
                EDescriptor::BesovInfInf(_) => {
                    energy[en.shell] = f64::max(energy[en.shell], c * en.amp * en.weight);
                    mass[en.shell] = f64::max(mass[en.shell], c);
                }
            }
        }
        // round-off floor on the unweighted shell quantity
        let floor = NOISE_REL * table.max_amp;
        let mut fit_j = Vec::new();
        let mut fit_e = Vec::new();
        for i in 0..k {
            let j = table.shells[i];
            let weight_j = match self.e {
                EDescriptor::Sobolev(_) => self.e.weight(2f64.powi(j + 1)).powi(2),
                EDescriptor::BesovInfInf(s) => 2f64.powf(j as f64 * s),
            };
            let raw_floor = match self.e {
                EDescriptor::Sobolev(_) => floor * floor * mass[i] * weight_j,
                EDescriptor::BesovInfInf(_) => floor * mass[i] * weight_j,
            };
            if energy[i] <= raw_floor || energy[i] == 0.0 {
                break;
            }
            fit_j.push(j as f64);
            fit_e.push(energy[i].log2());
        }
        let fitted = (fit_j.len() >= 2).then(|| linear_fit(&fit_j, &fit_e).0);
        let in_sigma = fitted.is_some_and(|s| s >= -self.params.tau_exp);
        DirectionScore {
            direction: w.clone(),
            angle_deg: w.angle().to_degrees().rem_euclid(360.0),
            shells: table.shells.clone(),
            shell_energies: energy,
            fitted_exponent: fitted,
            in_sigma,
        }
    }

    /// `Sigma^E_x(u)` as the intersection over nested bump windows centred at `x`.
    pub fn localized(&self, u: &GridField, x: [f64; 2]) -> Result<LocalSigma> {
        let radii = &self.params.window_radii;
        if radii.len() < 3 {
            return invalid(format!("need at least 3 window radii, got {}", radii.len()));
        }
        if radii.windows(2).any(|p| !(p[1] < p[0])) || radii.iter().any(|r| !(*r > 0.0)) {
            return invalid(format!("window radii must be positive and strictly decreasing, got {radii:?}"));
        }
        let half = 0.5 * u.period;
        if x.iter().any(|c| c.abs() + radii[0] > half) {
            return Err(Error::SupportViolation(format!(
                "window of radius {} at {x:?} exits the period box",
                radii[0]
            )));
        }
        let scores = radii.iter().map(|&r| self.sigma(&u.windowed(bump_window(x, r)))).collect::<Result<Vec<_>>>()?;
        let per_window: Vec<Vec<usize>> = scores.iter().map(|s| flagged_indices(s)).collect();
        let exponents = scores.last().unwrap().iter().map(|d| d.fitted_exponent).collect();
        let m = self.params.directions;
        let last = per_window.last().unwrap();
        let flagged =
            last.iter().copied().filter(|&i| per_window.iter().all(|set| within_one_step(set, i, m))).collect();
        let windows_nonempty = per_window.iter().all(|s| !s.is_empty());
        Ok(LocalSigma { x, flagged, windows_nonempty, exponents })
    }
}

fn check_quarter_support(u: &GridField) -> Result<()> {
    let max = u.values.iter().map(|v| v.norm()).fold(0.0, f64::max);
    let quarter = 0.25 * u.period;
    for (idx, v) in u.values.iter().enumerate() {
        if v.norm() > 1e-12 * max {
            let p = u.point(idx);
            if p.iter().any(|c| c.abs() > quarter + 1e-12) {
                return Err(Error::SupportViolation(format!(
                    "field is nonzero at {p:?}, outside the central box |x_i| <= L/4 = {quarter}"
                )));
            }
        }
    }
    Ok(())
}

/// Smooth window: 1 on `|y - x| <= r/2`, 0 for `|y - x| >= r`.
pub fn bump_window(x: [f64; 2], r: f64) -> impl Fn(&[f64]) -> f64 + Sync {
    move |y: &[f64]| {
        let d = (y[0] - x[0]).hypot(y[1] - x[1]);
        bridge(2.0 * (1.0 - d / r))
    }
}

pub fn flagged_indices(scores: &[DirectionScore]) -> Vec<usize> {
    scores.iter().enumerate().filter(|(_, s)| s.in_sigma).map(|(i, _)| i).collect()
}

fn within_one_step(set: &[usize], i: usize, m: usize) -> bool {
    set.iter().any(|&k| {
        let d = (k as i64 - i as i64).rem_euclid(m as i64);
        d <= 1 || d == m as i64 - 1
    })
}

/// `Sigma^E(u)` scores on `M` equally spaced directions.
pub fn sigma_e(u: &GridField, e: EDescriptor, params: &ScanParams) -> Result<Vec<DirectionScore>> {
    Scanner::new(e, params.clone())?.sigma(u)
}

/// Localized direction set at one point.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LocalSigma {
    pub x: [f64; 2],
    /// Direction indices flagged by every window (one grid step tolerance).
    pub flagged: Vec<usize>,
    /// Whether no window produced an empty set.
    #[serde(rename = "windowsNonempty")]
    pub windows_nonempty: bool,
    /// Fitted exponents of the smallest window, per direction.
    pub exponents: Vec<Option<f64>>,
}

pub fn sigma_e_localized(u: &GridField, x: [f64; 2], e: EDescriptor, params: &ScanParams) -> Result<LocalSigma> {
    Scanner::new(e, params.clone())?.localized(u, x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WFEntry {
    pub x: [f64; 2],
    #[serde(rename = "directionIndex")]
    pub direction_index: usize,
    #[serde(rename = "angleDeg")]
    pub angle_deg: f64,
    #[serde(rename = "fittedExponent")]
    pub fitted_exponent: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WFReport {
    #[serde(rename = "E")]
    pub e: EDescriptor,
    pub params: ScanParams,
    #[serde(rename = "xGrid")]
    pub x_grid: Vec<[f64; 2]>,
    pub flagged: Vec<WFEntry>,
}

impl WFReport {
    /// Base points carrying at least one flagged direction.
    pub fn projection(&self) -> Vec<[f64; 2]> {
        let mut out: Vec<[f64; 2]> = Vec::new();
        for f in &self.flagged {
            if out.last() != Some(&f.x) {
                out.push(f.x);
            }
        }
        out
    }
}

/// Localized scans over `x_grid`, in grid order.
pub fn scan_points(u: &GridField, e: EDescriptor, x_grid: &[[f64; 2]], params: &ScanParams) -> Result<Vec<LocalSigma>> {
    let scanner = Scanner::new(e, params.clone())?;
    x_grid.iter().map(|&x| scanner.localized(u, x)).collect()
}

/// Report assembled from localized scans.
pub fn report_from(e: EDescriptor, params: &ScanParams, x_grid: &[[f64; 2]], locals: &[LocalSigma]) -> WFReport {
    let step = params.step();
    let flagged = locals
        .iter()
        .flat_map(|l| {
            l.flagged.iter().map(move |&i| WFEntry {
                x: l.x,
                direction_index: i,
                angle_deg: (i as f64 * step).to_degrees(),
                fitted_exponent: l.exponents[i],
            })
        })
        .collect();
    WFReport { e, params: params.clone(), x_grid: x_grid.to_vec(), flagged }
}

/// Singular support from localized scans.
pub fn singular_from(locals: &[LocalSigma]) -> Vec<[f64; 2]> {
    locals.iter().filter(|l| l.windows_nonempty).map(|l| l.x).collect()
}

pub fn wavefront_set(u: &GridField, e: EDescriptor, x_grid: &[[f64; 2]], params: &ScanParams) -> Result<WFReport> {
    Ok(report_from(e, params, x_grid, &scan_points(u, e, x_grid, params)?))
}

/// Points where no window removes every direction.
pub fn sing_supp_e(u: &GridField, e: EDescriptor, x_grid: &[[f64; 2]], params: &ScanParams) -> Result<Vec<[f64; 2]>> {
    Ok(singular_from(&scan_points(u, e, x_grid, params)?))
}

/// Both outputs from one set of localized scans.
pub fn wavefront_and_sing_supp(
    u: &GridField,
    e: EDescriptor,
    x_grid: &[[f64; 2]],
    params: &ScanParams,
) -> Result<(WFReport, Vec<[f64; 2]>)> {
    let locals = scan_points(u, e, x_grid, params)?;
    Ok((report_from(e, params, x_grid, &locals), singular_from(&locals)))
}

fn dist(a: &[f64; 2], b: &[f64; 2]) -> f64 {
    (a[0] - b[0]).hypot(a[1] - b[1])
}

/// Points in exactly one of `pr_1(WF)` and `sing supp` must lie within
/// `cell` of a point in both.
pub fn projection_check(report: &WFReport, singsupp: &[[f64; 2]], cell: f64) -> bool {
    let pr = report.projection();
    let both: Vec<[f64; 2]> = pr.iter().filter(|p| singsupp.contains(p)).copied().collect();
    let sym_diff = pr.iter().filter(|p| !singsupp.contains(p)).chain(singsupp.iter().filter(|p| !pr.contains(p)));
    sym_diff.into_iter().all(|p| both.iter().any(|q| dist(p, q) <= cell * (1.0 + 1e-9)))
}

/// Every direction flagged for `window * u` is within one angular step of a
/// direction flagged for `u`.
pub fn mollification_check<W>(u: &GridField, window: W, e: EDescriptor, params: &ScanParams) -> Result<bool>
where
    W: Fn(&[f64]) -> f64 + Sync,
{
    let scanner = Scanner::new(e, params.clone())?;
    let base = flagged_indices(&scanner.sigma(u)?);
    let local = flagged_indices(&scanner.sigma(&u.windowed(window))?);
    Ok(local.iter().all(|&i| within_one_step(&base, i, params.directions)))
}

/// Angular distance in degrees between grid angles, modulo 360.
pub fn angle_gap_deg(a: f64, b: f64) -> f64 {
    let d = (a - b).rem_euclid(360.0);
    d.min(360.0 - d)
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    fn gaussian(n: usize) -> GridField {
        GridField::from_fn(2, 16.0, n, |x| Complex64::new((-2.0 * (x[0] * x[0] + x[1] * x[1])).exp(), 0.0)).unwrap()
    }

    #[test]
    fn refuses_l1_linf_c0() {
        for t in ["L1", "Linf", "C0", "linf"] {
            let err = EDescriptor::parse(t, None).unwrap_err();
            assert!(matches!(err, Error::UnsupportedSpace(_)), "{t}");
            assert!(err.to_string().contains("not continuous"));
        }
        let e: EDescriptor = serde_json::from_str(r#"{"tag":"Sobolev","s":0.75}"#).unwrap();
        assert_eq!(e, EDescriptor::Sobolev(0.75));
        assert!(serde_json::from_str::<EDescriptor>(r#"{"tag":"C0"}"#).is_err());
    }

    #[test]
    fn sobolev_zero_weight_is_one() {
        assert_eq!(EDescriptor::Sobolev(0.0).weight(123.0), 1.0);
        assert_eq!(EDescriptor::parse("L2", None).unwrap(), EDescriptor::Sobolev(0.0));
    }

    #[test]
    fn too_coarse_grid_is_a_resolution_error() {
        let p = ScanParams { directions: 8, ..Default::default() };
        assert!(matches!(sigma_e(&gaussian(32), EDescriptor::Sobolev(0.0), &p), Err(Error::Resolution(_))));
    }

    #[test]
    fn gaussian_is_regular() {
        let p = ScanParams { directions: 36, ..Default::default() };
        let s = sigma_e(&gaussian(512), EDescriptor::Sobolev(2.0), &p).unwrap();
        assert!(s.iter().all(|d| !d.in_sigma));
    }

    #[test]
    fn support_outside_quarter_box_is_rejected() {
        let u = GridField::from_fn(2, 16.0, 128, |x| Complex64::new(if x[0] > 5.0 { 1.0 } else { 0.0 }, 0.0)).unwrap();
        assert!(matches!(
            sigma_e(&u, EDescriptor::Sobolev(0.0), &ScanParams::default()),
            Err(Error::SupportViolation(_))
        ));
    }

    #[test]
    fn one_step_tolerance_wraps() {
        assert!(within_one_step(&[0], 179, 180));
        assert!(!within_one_step(&[0], 178, 180));
        assert_eq!(angle_gap_deg(358.0, 2.0), 4.0);
    }
}
