//! Parsers for JSON inputs and the binary field format.
//!
//! Fields are stored as little-endian `f32` pairs `(re, im)` in row-major
//! order, with a JSON sidecar `{"n": .., "L": .., "N": ..}` next to the data
//! file (`<path>.json`).

use std::path::{Path, PathBuf};

use num_complex::Complex64;
use serde::de::DeserializeOwned;
use serde::{Deserialize, Serialize};

use crate::cone_geometry::{CircularCone, ConeSpec, UnitVector};
use crate::error::{invalid, Error, Result};
use crate::multiplier_engine::{box_indicator, GridField, PNorm, Region};
use crate::sphere_profiles::SphericalProfile;
use crate::symbols::{
    bridge, BumpSpec, ComplexHomogeneousSymbol, ConstantSymbol, HomogeneousSymbol, OddRayCutoff, RadialBumpSymbol,
    ShiftSymbol, SignSymbol, SmoothCutoff, Symbol,
};
use crate::wavefront::{EDescriptor, ScanParams};
use crate::witness::WitnessConfig;

/// Largest accepted sample count per axis.
pub const MAX_SIZE: usize = 1 << 16;
/// Largest accepted total sample count.
pub const MAX_SAMPLES: usize = 1 << 26;

pub fn parse_json<T: DeserializeOwned>(text: &str) -> Result<T> {
    Ok(serde_json::from_str(text)?)
}

pub fn parse_cone(text: &str) -> Result<ConeSpec> {
    let c: ConeSpec = parse_json(text)?;
    c.validate()?;
    Ok(c)
}

pub fn parse_profile(text: &str) -> Result<SphericalProfile> {
    SphericalProfile::from_json(text)
}

pub fn parse_e_descriptor(text: &str) -> Result<EDescriptor> {
    // surface refusals as such rather than as JSON errors
    #[derive(Deserialize)]
    struct Raw {
        tag: String,
        #[serde(default)]
        s: Option<f64>,
    }
    let raw: Raw = parse_json(text)?;
    EDescriptor::parse(&raw.tag, raw.s)
}

pub fn parse_witness_config(text: &str) -> Result<WitnessConfig> {
    let cfg: WitnessConfig = parse_json(text)?;
    cfg.v.validate()?;
    cfg.v_prime.validate()?;
    if cfg.l_schedule.is_empty() {
        return invalid("lSchedule must not be empty");
    }
    if !(cfg.r.is_finite() && cfg.r > 0.0) {
        return invalid(format!("r must be positive, got {}", cfg.r));
    }
    Ok(cfg)
}

/// Sidecar of a binary field.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FieldMeta {
    pub n: usize,
    #[serde(rename = "L")]
    pub period: f64,
    #[serde(rename = "N")]
    pub size: usize,
}

impl FieldMeta {
    pub fn of(field: &GridField) -> Self {
        Self { n: field.dim, period: field.period, size: field.size }
    }

    fn samples(&self) -> Result<usize> {
        if !(1..=2).contains(&self.n) {
            return Err(Error::UnsupportedDimension(self.n));
        }
        if self.size > MAX_SIZE {
            return invalid(format!("N = {} exceeds {MAX_SIZE}", self.size));
        }
        let total = self.size.pow(self.n as u32);
        if total > MAX_SAMPLES {
            return invalid(format!("{total} samples exceed {MAX_SAMPLES}"));
        }
        Ok(total)
    }
}

pub fn parse_field_meta(text: &str) -> Result<FieldMeta> {
    let m: FieldMeta = parse_json(text)?;
    m.samples()?;
    Ok(m)
}

pub fn encode_field(field: &GridField) -> (Vec<u8>, FieldMeta) {
    let mut out = Vec::with_capacity(field.values.len() * 8);
    for v in &field.values {
        out.extend_from_slice(&(v.re as f32).to_le_bytes());
        out.extend_from_slice(&(v.im as f32).to_le_bytes());
    }
    (out, FieldMeta::of(field))
}

pub fn decode_field(bytes: &[u8], meta: &FieldMeta) -> Result<GridField> {
    let total = meta.samples()?;
    if bytes.len() != total * 8 {
        return invalid(format!("expected {} bytes for {total} complex samples, got {}", total * 8, bytes.len()));
    }
    let values = bytes
        .chunks_exact(8)
        .map(|c| {
            let re = f32::from_le_bytes([c[0], c[1], c[2], c[3]]);
            let im = f32::from_le_bytes([c[4], c[5], c[6], c[7]]);
            Complex64::new(re as f64, im as f64)
        })
        .collect();
    GridField::new(meta.n, meta.period, meta.size, values)
}

pub fn sidecar_path(path: &Path) -> PathBuf {
    let mut s = path.as_os_str().to_owned();
    s.push(".json");
    PathBuf::from(s)
}

pub fn write_field(path: &Path, field: &GridField) -> Result<()> {
    let (bytes, meta) = encode_field(field);
    std::fs::write(path, bytes)?;
    std::fs::write(sidecar_path(path), serde_json::to_string_pretty(&meta)?)?;
    Ok(())
}

pub fn read_field(path: &Path) -> Result<GridField> {
    let meta = parse_field_meta(&std::fs::read_to_string(sidecar_path(path))?)?;
    decode_field(&std::fs::read(path)?, &meta)
}

/// Sampling grid `[-L/2, L/2)^n` with `N` points per axis.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub n: usize,
    #[serde(rename = "L")]
    pub period: f64,
    #[serde(rename = "N")]
    pub size: usize,
}

impl GridSpec {
    pub fn meta(&self) -> FieldMeta {
        FieldMeta { n: self.n, period: self.period, size: self.size }
    }
}

fn default_jump_radius() -> f64 {
    3.0
}

/// Input fields by name.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum FieldSpec {
    /// `exp(-|x - c|^2 / (2 sigma^2))`.
    Gaussian {
        sigma: f64,
        #[serde(default)]
        center: Option<Vec<f64>>,
    },
    /// One nonzero sample `1 / h^n` at the grid point nearest `at` (default origin).
    Delta {
        #[serde(default)]
        at: Option<Vec<f64>>,
    },
    /// `H(x_1) b(x)` with a smooth bump `b` of the given radius (planar only).
    JumpSheet {
        #[serde(default = "default_jump_radius")]
        radius: f64,
    },
    /// Indicator of `[-a, a]^n`, half values on faces.
    BoxIndicator { a: f64 },
    /// Binary field with sidecar.
    File { path: PathBuf },
}

impl FieldSpec {
    pub fn build(&self, grid: &GridSpec) -> Result<GridField> {
        let meta = grid.meta();
        meta.samples()?;
        let (n, l, size) = (grid.n, grid.period, grid.size);
        let point = |v: &Option<Vec<f64>>| -> Result<Vec<f64>> {
            match v {
                None => Ok(vec![0.0; n]),
                Some(c) if c.len() == n && c.iter().all(|x| x.is_finite()) => Ok(c.clone()),
                Some(c) => Err(Error::DimensionMismatch { expected: n, got: c.len() }),
            }
        };
        match self {
            Self::Gaussian { sigma, center } => {
                if !(*sigma > 0.0 && sigma.is_finite()) {
                    return invalid(format!("sigma must be positive, got {sigma}"));
                }
                let c = point(center)?;
                let k = 0.5 / (sigma * sigma);
                GridField::from_fn(n, l, size, |x| {
                    let r2: f64 = x.iter().zip(&c).map(|(a, b)| (a - b) * (a - b)).sum();
                    Complex64::new((-k * r2).exp(), 0.0)
                })
            }
            Self::Delta { at } => {
                let c = point(at)?;
                let empty = GridField::from_fn(n, l, size, |_| Complex64::new(0.0, 0.0))?;
                let h = empty.step();
                let idx: Vec<usize> =
                    c.iter().map(|x| (((x + 0.5 * l) / h).round() as i64).rem_euclid(size as i64) as usize).collect();
                let flat = idx.iter().fold(0, |acc, i| acc * size + i);
                let mut values = empty.values;
                values[flat] = Complex64::new(h.powi(-(n as i32)), 0.0);
                GridField::new(n, l, size, values)
            }
            Self::JumpSheet { radius } => {
                if n != 2 {
                    return Err(Error::UnsupportedDimension(n));
                }
                if !(*radius > 0.0 && radius.is_finite()) {
                    return invalid(format!("radius must be positive, got {radius}"));
                }
                let r = *radius;
                GridField::from_fn(2, l, size, |x| {
                    let step = if x[0] > 0.0 {
                        1.0
                    } else if x[0] == 0.0 {
                        0.5
                    } else {
                        0.0
                    };
                    Complex64::new(step * bridge(2.0 * (1.0 - x[0].hypot(x[1]) / r)), 0.0)
                })
            }
            Self::BoxIndicator { a } => {
                if !(*a > 0.0 && a.is_finite()) {
                    return invalid(format!("half-width must be positive, got {a}"));
                }
                box_indicator(n, l, size, *a)
            }
            Self::File { path } => {
                let f = read_field(path)?;
                if FieldMeta::of(&f) != meta {
                    return invalid(format!("{} does not match the requested grid {meta:?}", path.display()));
                }
                Ok(f)
            }
        }
    }
}

/// Symbols by name; every variant is validated by its constructor.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "camelCase")]
pub enum SymbolSpec {
    Constant {
        value: f64,
    },
    Shift {
        shift: Vec<f64>,
    },
    Sign,
    OddRay {
        radius: f64,
    },
    RadialBump {
        bump: BumpSpec,
    },
    SmoothCutoff {
        #[serde(rename = "V0")]
        v0: ConeSpec,
        #[serde(rename = "Vouter")]
        vouter: ConeSpec,
        #[serde(rename = "R")]
        radius: f64,
        #[serde(default = "one")]
        c0: f64,
    },
    Homogeneous {
        profile: SphericalProfile,
        r: f64,
    },
    ComplexHomogeneous {
        re: SphericalProfile,
        im: SphericalProfile,
        r: f64,
    },
}

fn one() -> f64 {
    1.0
}

impl SymbolSpec {
    pub fn build(&self) -> Result<Box<dyn Symbol>> {
        Ok(match self {
            Self::Constant { value } if value.is_finite() => Box::new(ConstantSymbol(*value)),
            Self::Constant { value } => return invalid(format!("constant must be finite, got {value}")),
            Self::Shift { shift } => {
                if shift.is_empty() || shift.len() > 2 || shift.iter().any(|x| !x.is_finite()) {
                    return invalid("shift needs 1 or 2 finite components");
                }
                Box::new(ShiftSymbol { shift: shift.clone() })
            }
            Self::Sign => Box::new(SignSymbol),
            Self::OddRay { radius } if *radius > 0.0 && radius.is_finite() => {
                Box::new(OddRayCutoff { radius: *radius })
            }
            Self::OddRay { radius } => return invalid(format!("radius must be positive, got {radius}")),
            Self::RadialBump { bump } => Box::new(RadialBumpSymbol(BumpSpec::new(bump.a, bump.b, bump.c, bump.d)?)),
            Self::SmoothCutoff { v0, vouter, radius, c0 } => {
                v0.validate()?;
                vouter.validate()?;
                Box::new(SmoothCutoff::new(v0.clone(), vouter.clone(), *radius, *c0)?)
            }
            Self::Homogeneous { profile, r } => Box::new(HomogeneousSymbol::new(profile.clone(), *r)?),
            Self::ComplexHomogeneous { re, im, r } => {
                Box::new(ComplexHomogeneousSymbol::new(re.clone(), im.clone(), *r)?)
            }
        })
    }

    /// Dimension fixed by the symbol, when it has one.
    pub fn dim(&self) -> Option<usize> {
        match self {
            Self::Shift { shift } => Some(shift.len()),
            Self::Sign | Self::OddRay { .. } => Some(1),
            Self::SmoothCutoff { v0, .. } => Some(v0.dim()),
            Self::Homogeneous { profile, .. } | Self::ComplexHomogeneous { re: profile, .. } => Some(profile.dim()),
            Self::Constant { .. } | Self::RadialBump { .. } => None,
        }
    }
}

pub fn parse_symbol(text: &str) -> Result<Box<dyn Symbol>> {
    parse_json::<SymbolSpec>(text)?.build()
}

/// `cone kappa` input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KappaConfig {
    pub profile: SphericalProfile,
    #[serde(rename = "V", default)]
    pub v: Option<ConeSpec>,
    #[serde(rename = "Vprime")]
    pub v_prime: ConeSpec,
}

/// `profile check` input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProfileCheckConfig {
    pub profile: SphericalProfile,
    #[serde(rename = "V")]
    pub v: ConeSpec,
    #[serde(rename = "Vprime")]
    pub v_prime: ConeSpec,
    #[serde(rename = "useKappaV", default)]
    pub use_kappa_v: bool,
}

/// One test function of the expansion cross-check.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChiSpec {
    pub axis: UnitVector,
    #[serde(rename = "Vdoubleprime")]
    pub v_double_prime: CircularCone,
    pub l: u32,
}

fn default_expansion_tol() -> f64 {
    1e-5
}

/// `witness expansion` input. When `chi` is empty, `count` test functions
/// are drawn from the seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExpansionConfig {
    pub profile: SphericalProfile,
    #[serde(rename = "V")]
    pub v: ConeSpec,
    pub r: f64,
    #[serde(default = "default_s")]
    pub s: f64,
    #[serde(default)]
    pub chi: Vec<ChiSpec>,
    #[serde(default = "default_count")]
    pub count: usize,
    #[serde(default = "default_expansion_tol")]
    pub tol: f64,
}

fn default_s() -> f64 {
    1.5
}

fn default_count() -> usize {
    3
}

fn default_plancherel_tol() -> f64 {
    1e-12
}

/// `multiplier apply` input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ApplyConfig {
    pub symbol: SymbolSpec,
    pub field: FieldSpec,
    pub grid: GridSpec,
    #[serde(default = "default_plancherel_tol")]
    pub tol: f64,
}

fn default_commute_tol() -> f64 {
    1e-10
}

/// `multiplier commute` input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CommuteConfig {
    pub symbol: SymbolSpec,
    pub field: FieldSpec,
    pub grid: GridSpec,
    pub shifts: Vec<Vec<i64>>,
    #[serde(default = "default_commute_tol")]
    pub tol: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LadderExpectation {
    Diverging,
    /// Strictly increasing only.
    Increasing,
    Stabilizing,
    None,
}

/// `multiplier blowup` input: the field is resampled at `N = 2^e` per axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlowupConfig {
    pub symbol: SymbolSpec,
    pub field: FieldSpec,
    pub n: usize,
    #[serde(rename = "L")]
    pub period: f64,
    pub exponents: Vec<u32>,
    #[serde(rename = "K")]
    pub k: Region,
    pub p: PNorm,
    #[serde(default = "default_expect")]
    pub expect: LadderExpectation,
}

fn default_expect() -> LadderExpectation {
    LadderExpectation::None
}

/// Base points for wave front scans.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum XGrid {
    Points(Vec<[f64; 2]>),
    Lattice { lo: [f64; 2], hi: [f64; 2], step: f64 },
}

impl XGrid {
    pub fn points(&self) -> Result<Vec<[f64; 2]>> {
        match self {
            Self::Points(p) => Ok(p.clone()),
            Self::Lattice { lo, hi, step } => {
                if !(*step > 0.0) || (0..2).any(|i| !(lo[i] <= hi[i]) || !lo[i].is_finite() || !hi[i].is_finite()) {
                    return invalid("lattice needs lo <= hi and step > 0");
                }
                let count = |i: usize| ((hi[i] - lo[i]) / step + 1e-9).floor() as usize + 1;
                if count(0) * count(1) > 100_000 {
                    return invalid("lattice has more than 100000 points");
                }
                let mut out = Vec::new();
                for a in 0..count(0) {
                    for b in 0..count(1) {
                        out.push([lo[0] + a as f64 * step, lo[1] + b as f64 * step]);
                    }
                }
                Ok(out)
            }
        }
    }

    /// Cell size used by the projection check.
    pub fn cell(&self) -> f64 {
        match self {
            Self::Lattice { step, .. } => *step,
            Self::Points(p) => {
                let mut best = f64::INFINITY;
                for (i, a) in p.iter().enumerate() {
                    for b in &p[i + 1..] {
                        let d = (a[0] - b[0]).hypot(a[1] - b[1]);
                        if d > 0.0 {
                            best = best.min(d);
                        }
                    }
                }
                if best.is_finite() {
                    best
                } else {
                    0.0
                }
            }
        }
    }
}

/// Smooth bump window for the mollification check.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WindowSpec {
    pub center: [f64; 2],
    pub radius: f64,
}

/// `wavefront estimate` / `wavefront check` input.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WavefrontConfig {
    pub field: FieldSpec,
    pub grid: GridSpec,
    /// Kept raw so refused tags are reported as refusals.
    #[serde(rename = "E")]
    pub e: serde_json::Value,
    #[serde(default)]
    pub params: ScanParams,
    #[serde(rename = "xGrid")]
    pub x_grid: XGrid,
    #[serde(default)]
    pub window: Option<WindowSpec>,
}

impl WavefrontConfig {
    pub fn descriptor(&self) -> Result<EDescriptor> {
        parse_e_descriptor(&self.e.to_string())
    }
}
