//! Periodic sampled fields and Fourier multipliers `psi(D)` on the torus of
//! period `L`, using `Ff(xi) = ∫ e^{-i x xi} f(x) dx` and an inverse carrying
//! `(2 pi)^{-n}`. Samples sit at `x_j = -L/2 + j L/N`; spectra are stored in
//! FFT order at frequencies `2 pi k / L`, `k ∈ [-N/2, N/2)`.

use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::quad::linear_fit;
use crate::symbols::Symbol;

/// Column batch width for the second transform axis.
const COLUMN_BATCH: usize = 32;

/// Samples of a complex field on `[-L/2, L/2)^n`, `n ∈ {1, 2}`, row-major
/// with the first coordinate slowest.
#[derive(Debug, Clone, PartialEq)]
pub struct GridField {
    pub dim: usize,
    pub period: f64,
    pub size: usize,
    pub values: Vec<Complex64>,
}

/// Spectrum of a [`GridField`] in FFT order.
#[derive(Debug, Clone, PartialEq)]
pub struct Spectrum {
    pub dim: usize,
    pub period: f64,
    pub size: usize,
    pub values: Vec<Complex64>,
}

fn check_shape(dim: usize, period: f64, size: usize) -> Result<()> {
    if !(1..=2).contains(&dim) {
        return Err(Error::UnsupportedDimension(dim));
    }
    if size < 8 || !size.is_power_of_two() {
        return invalid(format!("samples per axis must be a power of two >= 8, got {size}"));
    }
    if !(period > 0.0 && period.is_finite()) {
        return invalid(format!("period must be positive, got {period}"));
    }
    Ok(())
}

impl GridField {
    pub fn new(dim: usize, period: f64, size: usize, values: Vec<Complex64>) -> Result<Self> {
        check_shape(dim, period, size)?;
        if values.len() != size.pow(dim as u32) {
            return invalid(format!("expected {} samples, got {}", size.pow(dim as u32), values.len()));
        }
        if let Some(v) = values.iter().find(|v| !v.re.is_finite() || !v.im.is_finite()) {
            return invalid(format!("field contains non-finite sample {v}"));
        }
        Ok(Self { dim, period, size, values })
    }

    /// Samples `f` at the grid points.
    pub fn from_fn<F>(dim: usize, period: f64, size: usize, f: F) -> Result<Self>
    where
        F: Fn(&[f64]) -> Complex64 + Sync,
    {
        check_shape(dim, period, size)?;
        let h = period / size as f64;
        let coord = |j: usize| -0.5 * period + j as f64 * h;
        let values = match dim {
            1 => (0..size).map(|j| f(&[coord(j)])).collect(),
            _ => {
                let mut v = vec![Complex64::new(0.0, 0.0); size * size];
                v.par_chunks_mut(size).enumerate().for_each(|(i, row)| {
                    let x0 = coord(i);
                    for (j, out) in row.iter_mut().enumerate() {
                        *out = f(&[x0, coord(j)]);
                    }
                });
                v
            }
        };
        Self::new(dim, period, size, values)
    }

    pub fn step(&self) -> f64 {
        self.period / self.size as f64
    }

    pub fn coordinate(&self, j: usize) -> f64 {
        -0.5 * self.period + j as f64 * self.step()
    }

    /// Grid point of a flat index.
    pub fn point(&self, index: usize) -> Vec<f64> {
        match self.dim {
            1 => vec![self.coordinate(index)],
            _ => vec![self.coordinate(index / self.size), self.coordinate(index % self.size)],
        }
    }

    pub fn l2_norm(&self) -> f64 {
        let cell = self.step().powi(self.dim as i32);
        (cell * self.values.iter().map(|v| v.norm_sqr()).sum::<f64>()).sqrt()
    }

    pub fn max_abs_diff(&self, other: &GridField) -> f64 {
        self.values.iter().zip(&other.values).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max)
    }

    /// Circular shift by whole samples: `(T f)(x) = f(x - shift h)`.
    pub fn shifted(&self, shift: &[i64]) -> Result<Self> {
        if shift.len() != self.dim {
            return Err(Error::DimensionMismatch { expected: self.dim, got: shift.len() });
        }
        let n = self.size as i64;
        let wrap = |j: usize, s: i64| ((j as i64 - s).rem_euclid(n)) as usize;
        let values = match self.dim {
            1 => (0..self.size).map(|j| self.values[wrap(j, shift[0])]).collect(),
            _ => (0..self.size * self.size)
                .map(|idx| {
                    let (i, j) = (idx / self.size, idx % self.size);
                    self.values[wrap(i, shift[0]) * self.size + wrap(j, shift[1])]
                })
                .collect(),
        };
        Ok(Self { values, ..self.clone() })
    }

    /// Pointwise product with a real window.
    pub fn windowed<F: Fn(&[f64]) -> f64 + Sync>(&self, window: F) -> Self {
        let values = self.values.par_iter().enumerate().map(|(idx, v)| v * window(&self.point(idx))).collect();
        Self { values, ..self.clone() }
    }
}

impl Spectrum {
    /// Frequency `2 pi k / L` of FFT index `m` along one axis.
    pub fn axis_frequency(&self, m: usize) -> f64 {
        axis_frequency(self.period, self.size, m)
    }

    pub fn frequency(&self, index: usize) -> Vec<f64> {
        match self.dim {
            1 => vec![self.axis_frequency(index)],
            _ => vec![self.axis_frequency(index / self.size), self.axis_frequency(index % self.size)],
        }
    }

    /// Nyquist frequency `pi N / L`.
    pub fn nyquist(&self) -> f64 {
        PI * self.size as f64 / self.period
    }
}

pub(crate) fn axis_frequency(period: f64, size: usize, m: usize) -> f64 {
    let k = if m < size / 2 { m as f64 } else { m as f64 - size as f64 };
    2.0 * PI * k / period
}

fn transform(values: &mut [Complex64], dim: usize, size: usize, inverse: bool) {
    let mut planner = FftPlanner::new();
    let fft: std::sync::Arc<dyn Fft<f64>> =
        if inverse { planner.plan_fft_inverse(size) } else { planner.plan_fft_forward(size) };
    let mut scratch = vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()];
    if dim == 1 {
        fft.process_with_scratch(values, &mut scratch);
        return;
    }
    values.par_chunks_mut(size).for_each_init(
        || vec![Complex64::new(0.0, 0.0); fft.get_inplace_scratch_len()],
        |s, row| fft.process_with_scratch(row, s),
    );
    let mut batch = vec![Complex64::new(0.0, 0.0); COLUMN_BATCH * size];
    for c0 in (0..size).step_by(COLUMN_BATCH) {
        let width = COLUMN_BATCH.min(size - c0);
        for i in 0..size {
            let row = &values[i * size + c0..i * size + c0 + width];
            for (b, v) in row.iter().enumerate() {
                batch[b * size + i] = *v;
            }
        }
        fft.process_with_scratch(&mut batch[..width * size], &mut scratch);
        for i in 0..size {
            for b in 0..width {
                values[i * size + c0 + b] = batch[b * size + i];
            }
        }
    }
}

fn parity_sign(index: usize, dim: usize, size: usize) -> f64 {
    let s = match dim {
        1 => index,
        _ => index / size + index % size,
    };
    if s % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

/// `Ff(2 pi k / L) ≈ h^n (-1)^{k} FFT(f)[k]`.
pub fn dft_forward(field: &GridField) -> Spectrum {
    let mut values = field.values.clone();
    transform(&mut values, field.dim, field.size, false);
    let scale = field.step().powi(field.dim as i32);
    let (dim, size) = (field.dim, field.size);
    values.par_iter_mut().enumerate().for_each(|(m, v)| *v *= scale * parity_sign(m, dim, size));
    Spectrum { dim, period: field.period, size, values }
}

/// Inverse of [`dft_forward`].
pub fn dft_inverse(spectrum: &Spectrum) -> GridField {
    let (dim, size) = (spectrum.dim, spectrum.size);
    let h = spectrum.period / size as f64;
    let scale = 1.0 / (h * size as f64).powi(dim as i32);
    let mut values: Vec<Complex64> =
        spectrum.values.par_iter().enumerate().map(|(m, v)| v * parity_sign(m, dim, size)).collect();
    transform(&mut values, dim, size, true);
    values.par_iter_mut().for_each(|v| *v *= scale);
    GridField { dim, period: spectrum.period, size, values }
}

/// Multiplies the FFT-ordered array in place by `psi` at the grid frequencies.
fn multiply_in_place<S: Symbol + ?Sized>(
    values: &mut [Complex64],
    dim: usize,
    period: f64,
    size: usize,
    sym: &S,
) -> Result<()> {
    let bad = std::sync::Mutex::new(None::<Vec<f64>>);
    let freqs: Vec<f64> = (0..size).map(|m| axis_frequency(period, size, m)).collect();
    values.par_chunks_mut(size).enumerate().for_each(|(i, row)| {
        for (j, v) in row.iter_mut().enumerate() {
            let buf = if dim == 1 { [freqs[j], 0.0] } else { [freqs[i], freqs[j]] };
            let xi = &buf[..dim];
            let p = sym.eval(xi);
            if !p.re.is_finite() || !p.im.is_finite() {
                bad.lock().expect("no poisoning").get_or_insert_with(|| xi.to_vec());
            }
            *v *= p;
        }
    });
    match bad.into_inner().expect("no poisoning") {
        Some(xi) => Err(Error::NonFinite(xi)),
        None => Ok(()),
    }
}

/// `psi(D) f = F^{-1}(psi Ff)` on the torus.
pub fn apply_multiplier<S: Symbol + ?Sized>(sym: &S, field: &GridField) -> Result<GridField> {
    apply_multiplier_owned(sym, field.clone())
}

/// [`apply_multiplier`] reusing the input buffer.
pub fn apply_multiplier_owned<S: Symbol + ?Sized>(sym: &S, mut field: GridField) -> Result<GridField> {
    let (dim, size) = (field.dim, field.size);
    transform(&mut field.values, dim, size, false);
    // the (-1)^k and h^n factors of forward and inverse cancel
    multiply_in_place(&mut field.values, dim, field.period, size, sym)?;
    transform(&mut field.values, dim, size, true);
    let norm = 1.0 / (size as f64).powi(dim as i32);
    field.values.par_iter_mut().for_each(|v| *v *= norm);
    Ok(field)
}

/// Which `L^p` norm to measure.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum PNorm {
    #[serde(rename = "1")]
    One,
    #[serde(rename = "2")]
    Two,
    #[serde(rename = "inf")]
    Inf,
}

impl std::fmt::Display for PNorm {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(match self {
            PNorm::One => "1",
            PNorm::Two => "2",
            PNorm::Inf => "inf",
        })
    }
}

/// Axis-aligned box `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
}

impl Region {
    pub fn cube(dim: usize, half: f64) -> Self {
        Self { lo: vec![-half; dim], hi: vec![half; dim] }
    }

    fn contains(&self, x: &[f64]) -> bool {
        x.iter().zip(self.lo.iter().zip(&self.hi)).all(|(v, (a, b))| *a <= *v && *v <= *b)
    }

    /// Trapezoid weight: 1/2 per coordinate sitting on a face of the box.
    fn edge_weight(&self, x: &[f64], h: f64) -> f64 {
        let tol = 1e-9 * h;
        x.iter()
            .zip(self.lo.iter().zip(&self.hi))
            .map(|(v, (a, b))| if (v - a).abs() <= tol || (v - b).abs() <= tol { 0.5 } else { 1.0 })
            .product()
    }
}

impl std::fmt::Display for Region {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        let parts: Vec<String> = self.lo.iter().zip(&self.hi).map(|(a, b)| format!("[{a};{b}]")).collect();
        f.write_str(&parts.join("x"))
    }
}

/// `L^p(K)` norm by the trapezoid rule over the samples inside `k` (samples on
/// faces of `k` carry half weight per face).
pub fn local_norm(field: &GridField, k: &Region, p: PNorm) -> Result<f64> {
    if k.lo.len() != field.dim || k.hi.len() != field.dim {
        return Err(Error::DimensionMismatch { expected: field.dim, got: k.lo.len() });
    }
    let half = 0.5 * field.period;
    if k.lo.iter().zip(&k.hi).any(|(a, b)| a > b || *a < -half || *b > half) {
        return invalid(format!("region {k} is empty or leaves the period box"));
    }
    let h = field.step();
    let cell = h.powi(field.dim as i32);
    let (count, acc) = field
        .values
        .par_iter()
        .enumerate()
        .filter_map(|(idx, v)| {
            let x = field.point(idx);
            k.contains(&x).then(|| (k.edge_weight(&x, h), v.norm()))
        })
        .map(|(w, a)| {
            (
                1usize,
                match p {
                    PNorm::One => w * a,
                    PNorm::Two => w * a * a,
                    PNorm::Inf => a,
                },
            )
        })
        .reduce(|| (0, 0.0), |x, y| (x.0 + y.0, if p == PNorm::Inf { x.1.max(y.1) } else { x.1 + y.1 }));
    if count == 0 {
        return invalid(format!("region {k} contains no samples"));
    }
    Ok(match p {
        PNorm::One => cell * acc,
        PNorm::Two => (cell * acc).sqrt(),
        PNorm::Inf => acc,
    })
}

/// Point mass `weight * delta_location`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Atom {
    pub location: Vec<f64>,
    pub weight: Complex64,
}

/// Finite Radon measure: atoms plus an optional density on the same grid.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MeasureSpec {
    pub atoms: Vec<Atom>,
    pub density: Option<GridField>,
}

impl MeasureSpec {
    pub fn total_variation(&self) -> f64 {
        let atoms: f64 = self.atoms.iter().map(|a| a.weight.norm()).sum();
        let dens = self
            .density
            .as_ref()
            .map_or(0.0, |d| d.step().powi(d.dim as i32) * d.values.iter().map(|v| v.norm()).sum::<f64>());
        atoms + dens
    }
}

/// `(f * mu)(x) = ∫ f(x - y) dmu(y)`: off-grid atoms by (bi)linear
/// interpolation, densities by spectral multiplication.
pub fn convolve_with_measure(field: &GridField, mu: &MeasureSpec) -> Result<GridField> {
    let mut out = vec![Complex64::new(0.0, 0.0); field.values.len()];
    let h = field.step();
    let half = 0.5 * field.period;
    for atom in &mu.atoms {
        if atom.location.len() != field.dim {
            return Err(Error::DimensionMismatch { expected: field.dim, got: atom.location.len() });
        }
        if atom.location.iter().any(|y| *y < -half || *y >= half) {
            return invalid(format!("atom at {:?} lies outside the period box", atom.location));
        }
        // split each coordinate into whole-sample shift and linear weights
        let splits: Vec<[(i64, f64); 2]> = atom
            .location
            .iter()
            .map(|y| {
                let s = y / h;
                let fl = s.floor();
                let frac = s - fl;
                [(fl as i64, 1.0 - frac), (fl as i64 + 1, frac)]
            })
            .collect();
        let combos: Vec<(Vec<i64>, f64)> = match field.dim {
            1 => splits[0].iter().map(|(s, w)| (vec![*s], *w)).collect(),
            _ => splits[0]
                .iter()
                .flat_map(|(s0, w0)| splits[1].iter().map(move |(s1, w1)| (vec![*s0, *s1], w0 * w1)))
                .collect(),
        };
        for (shift, w) in combos {
            if w == 0.0 {
                continue;
            }
            let shifted = field.shifted(&shift)?;
            for (o, v) in out.iter_mut().zip(&shifted.values) {
                *o += atom.weight * w * v;
            }
        }
    }
    if let Some(d) = &mu.density {
        if d.dim != field.dim || d.size != field.size || d.period != field.period {
            return invalid("density must share the field's grid");
        }
        let conv = density_convolution(field, d);
        for (o, v) in out.iter_mut().zip(&conv.values) {
            *o += v;
        }
    }
    Ok(GridField { values: out, ..field.clone() })
}

/// `f * g` through `F^{-1}(Ff Fg)`.
pub fn density_convolution(f: &GridField, g: &GridField) -> GridField {
    let mut sf = dft_forward(f);
    let sg = dft_forward(g);
    sf.values.iter_mut().zip(&sg.values).for_each(|(a, b)| *a *= b);
    dft_inverse(&sf)
}

/// `max |psi(D) T f - T psi(D) f|` for an integer-sample translation `T`.
pub fn translation_commutation_check<S: Symbol + ?Sized>(sym: &S, field: &GridField, shift: &[i64]) -> Result<f64> {
    let a = apply_multiplier(sym, &field.shifted(shift)?)?;
    let b = apply_multiplier(sym, field)?.shifted(shift)?;
    Ok(a.max_abs_diff(&b))
}

/// One entry of a blow-up ladder.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormProbe {
    pub index: usize,
    #[serde(rename = "N")]
    pub size: usize,
    pub p: PNorm,
    #[serde(rename = "K")]
    pub region: Region,
    pub value: f64,
}

/// Local norms of `psi(D) f_i` for each family member `f_i = family(i)`.
pub fn blowup_probe<S, F>(sym: &S, family: F, indices: &[usize], k: &Region, p: PNorm) -> Result<Vec<NormProbe>>
where
    S: Symbol + ?Sized,
    F: Fn(usize) -> Result<GridField>,
{
    indices
        .iter()
        .map(|&index| {
            let input = family(index)?;
            let size = input.size;
            let out = apply_multiplier_owned(sym, input)?;
            let value = local_norm(&out, k, p)?;
            Ok(NormProbe { index, size, p, region: k.clone(), value })
        })
        .collect()
}

/// Growth diagnostics of a probe ladder against `ln N`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LadderTrend {
    pub slope: f64,
    pub intercept: f64,
    pub r2: f64,
    pub strictly_increasing: bool,
    /// Relative change between the last two values.
    pub last_change: f64,
}

impl LadderTrend {
    /// Increasing and growing like `ln N` with `R^2 >= 0.9`.
    pub fn diverging(&self) -> bool {
        self.strictly_increasing && self.slope > 0.0 && self.r2 >= 0.9
    }

    /// Last two values within 2%.
    pub fn stabilizing(&self) -> bool {
        self.last_change <= 0.02
    }
}

pub fn ladder_trend(probes: &[NormProbe]) -> Result<LadderTrend> {
    if probes.len() < 2 {
        return invalid("a ladder needs at least two probes");
    }
    let xs: Vec<f64> = probes.iter().map(|p| (p.size as f64).ln()).collect();
    let ys: Vec<f64> = probes.iter().map(|p| p.value).collect();
    let (slope, intercept, r2) = linear_fit(&xs, &ys);
    let strictly_increasing = ys.windows(2).all(|w| w[1] > w[0]);
    let (a, b) = (ys[ys.len() - 2], ys[ys.len() - 1]);
    let last_change = (b - a).abs() / a.abs().max(b.abs()).max(1e-300);
    Ok(LadderTrend { slope, intercept, r2, strictly_increasing, last_change })
}

/// Indicator of `[-a, a]^n` sampled with value `1/2` on faces (`1/4` at corners).
pub fn box_indicator(dim: usize, period: f64, size: usize, a: f64) -> Result<GridField> {
    let h = period / size as f64;
    let edge = |x: f64| {
        let d = x.abs() - a;
        if d < -1e-9 * h {
            1.0
        } else if d <= 1e-9 * h {
            0.5
        } else {
            0.0
        }
    };
    GridField::from_fn(dim, period, size, |x| Complex64::new(x.iter().map(|&v| edge(v)).product(), 0.0))
}
