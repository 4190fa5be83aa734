//! Fourier-space operators on the periodic box `[0, 2π)²`.
//!
//! Fields are stored row-major with index `i1 * n + i2`, where `i1` runs
//! along `x1` and `i2` along `x2`. Spectral coefficients use the same layout
//! in FFT order: storage index `i` holds wavenumber `i` for `i < n/2` and
//! `i - n` otherwise, so every wavenumber lies in `[-n/2, n/2)`.
//!
//! The forward transform divides by `n²`, which makes the coefficients the
//! Fourier-series coefficients `f(x) = Σ_k c_k e^{i k·x}`. Multipliers can
//! then use integer wavevectors directly.
//!
//! Odd multipliers (`i k_j`, the Riesz transform, Biot-Savart) vanish on the
//! Nyquist line of the axis they differentiate. The Nyquist mode is its own
//! conjugate partner, so any other choice would break Hermitian symmetry.

use std::f64::consts::PI;
use std::fmt;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use thiserror::Error;

/// Relative L² defect tolerated in `c(-k) = conj(c(k))`.
pub const HERMITIAN_TOLERANCE: f64 = 1e-12;

/// Relative size of the zero mode tolerated by [`biot_savart`].
pub const MEAN_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SpectralError {
    #[error("grid size {0} must be even and at least 16")]
    InvalidGridSize(usize),
    #[error("expected {expected} samples, got {actual}")]
    LengthMismatch { expected: usize, actual: usize },
    #[error("non-finite sample at index {index}")]
    NonFinite { index: usize },
    #[error("spectral field breaks Hermitian symmetry (relative defect {defect:e})")]
    NotHermitian { defect: f64 },
    #[error("dissipation exponent {0} outside (0, 2]")]
    InvalidAlpha(f64),
    #[error("Lebesgue exponent {0} must be at least 1")]
    InvalidExponent(f64),
    #[error("vorticity has nonzero mean (relative zero mode {0:e})")]
    NonzeroMean(f64),
    #[error("fields live on different grids ({0} vs {1})")]
    GridMismatch(usize, usize),
}

pub type Result<T> = std::result::Result<T, SpectralError>;

struct Plans {
    forward: Arc<dyn Fft<f64>>,
    inverse: Arc<dyn Fft<f64>>,
}

/// Uniform `n × n` grid on the torus of side `2π`.
///
/// Cloning is cheap: FFT plans are shared.
#[derive(Clone)]
pub struct Grid {
    n: usize,
    plans: Arc<Plans>,
}

impl fmt::Debug for Grid {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.debug_struct("Grid").field("n", &self.n).finish()
    }
}

impl PartialEq for Grid {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
    }
}

impl Grid {
    pub fn new(n: usize) -> Result<Self> {
        if n < 16 || !n.is_multiple_of(2) {
            return Err(SpectralError::InvalidGridSize(n));
        }
        let mut planner = FftPlanner::new();
        let plans = Plans {
            forward: planner.plan_fft_forward(n),
            inverse: planner.plan_fft_inverse(n),
        };
        Ok(Self {
            n,
            plans: Arc::new(plans),
        })
    }

    pub fn n(&self) -> usize {
        self.n
    }

    /// Number of grid points (and of Fourier modes).
    pub fn len(&self) -> usize {
        self.n * self.n
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn spacing(&self) -> f64 {
        2.0 * PI / self.n as f64
    }

    pub fn cell_area(&self) -> f64 {
        let h = self.spacing();
        h * h
    }

    /// Physical coordinate of grid index `i` along either axis.
    pub fn coordinate(&self, i: usize) -> f64 {
        self.spacing() * i as f64
    }

    /// Wavenumber stored at FFT index `i`.
    pub fn wavenumber(&self, i: usize) -> i64 {
        let n = self.n as i64;
        let i = i as i64;
        if i < n / 2 {
            i
        } else {
            i - n
        }
    }

    /// FFT index holding wavenumber `k` (taken modulo `n`).
    pub fn index_of(&self, k: i64) -> usize {
        k.rem_euclid(self.n as i64) as usize
    }

    /// Wavevector of flat storage index `idx`.
    pub fn mode(&self, idx: usize) -> (i64, i64) {
        (self.wavenumber(idx / self.n), self.wavenumber(idx % self.n))
    }

    /// Flat storage index of wavevector `k`.
    pub fn flat_index(&self, k1: i64, k2: i64) -> usize {
        self.index_of(k1) * self.n + self.index_of(k2)
    }

    /// Flat index of `-k` for the mode stored at `idx`.
    pub fn conjugate_index(&self, idx: usize) -> usize {
        let (i1, i2) = (idx / self.n, idx % self.n);
        ((self.n - i1) % self.n) * self.n + (self.n - i2) % self.n
    }

    pub fn nyquist(&self) -> i64 {
        -(self.n as i64) / 2
    }

    /// Modes kept by the 2/3 rule satisfy `max(|k1|, |k2|) <= n/3`.
    pub fn is_resolved(&self, k1: i64, k2: i64) -> bool {
        3 * k1.abs().max(k2.abs()) <= self.n as i64
    }

    /// Largest wavenumber kept by the 2/3 rule.
    pub fn dealias_cutoff(&self) -> i64 {
        self.n as i64 / 3
    }

    fn fft2(&self, data: &mut [Complex64], forward: bool) {
        let fft = if forward {
            &self.plans.forward
        } else {
            &self.plans.inverse
        };
        let mut scratch = vec![Complex64::default(); fft.get_inplace_scratch_len()];
        fft.process_with_scratch(data, &mut scratch);
        transpose_square(data, self.n);
        fft.process_with_scratch(data, &mut scratch);
        transpose_square(data, self.n);
    }
}

fn transpose_square(data: &mut [Complex64], n: usize) {
    for i in 0..n {
        for j in (i + 1)..n {
            data.swap(i * n + j, j * n + i);
        }
    }
}

/// Point values of a real scalar field.
#[derive(Clone, Debug, PartialEq)]
pub struct PhysicalField {
    grid: Grid,
    data: Vec<f64>,
}

impl PhysicalField {
    pub fn new(grid: &Grid, data: Vec<f64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(SpectralError::LengthMismatch {
                expected: grid.len(),
                actual: data.len(),
            });
        }
        if let Some(index) = data.iter().position(|v| !v.is_finite()) {
            return Err(SpectralError::NonFinite { index });
        }
        Ok(Self {
            grid: grid.clone(),
            data,
        })
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            data: vec![0.0; grid.len()],
        }
    }

    /// Samples `f(x1, x2)` at the grid nodes.
    pub fn from_fn(grid: &Grid, f: impl Fn(f64, f64) -> f64) -> Self {
        let n = grid.n();
        let mut data = Vec::with_capacity(grid.len());
        for i1 in 0..n {
            let x1 = grid.coordinate(i1);
            for i2 in 0..n {
                data.push(f(x1, grid.coordinate(i2)));
            }
        }
        Self {
            grid: grid.clone(),
            data,
        }
    }

    pub(crate) fn from_raw(grid: &Grid, data: Vec<f64>) -> Self {
        debug_assert_eq!(data.len(), grid.len());
        Self {
            grid: grid.clone(),
            data,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn values(&self) -> &[f64] {
        &self.data
    }

    pub fn into_values(self) -> Vec<f64> {
        self.data
    }

    pub fn map(&self, f: impl Fn(f64) -> f64) -> Self {
        Self {
            grid: self.grid.clone(),
            data: self.data.iter().map(|&v| f(v)).collect(),
        }
    }

    /// Pointwise product.
    pub fn mul(&self, other: &PhysicalField) -> Self {
        Self {
            grid: self.grid.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a * b)
                .collect(),
        }
    }

    pub fn add(&self, other: &PhysicalField) -> Self {
        Self {
            grid: self.grid.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a + b)
                .collect(),
        }
    }

    pub fn sub(&self, other: &PhysicalField) -> Self {
        Self {
            grid: self.grid.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| a - b)
                .collect(),
        }
    }

    pub fn max_abs(&self) -> f64 {
        self.data.iter().fold(0.0, |m, v| m.max(v.abs()))
    }

    /// Box integral `∫ f dx` by the rectangle rule.
    pub fn integral(&self) -> f64 {
        self.data.iter().sum::<f64>() * self.grid.cell_area()
    }
}

/// Fourier-series coefficients of a real scalar field.
#[derive(Clone, Debug, PartialEq)]
pub struct SpectralField {
    grid: Grid,
    data: Vec<Complex64>,
}

impl SpectralField {
    pub fn zeros(grid: &Grid) -> Self {
        Self {
            grid: grid.clone(),
            data: vec![Complex64::default(); grid.len()],
        }
    }

    /// Wraps raw coefficients in FFT order. No symmetry check is made here;
    /// [`inverse_transform`] rejects non-Hermitian input.
    pub fn from_coeffs(grid: &Grid, data: Vec<Complex64>) -> Result<Self> {
        if data.len() != grid.len() {
            return Err(SpectralError::LengthMismatch {
                expected: grid.len(),
                actual: data.len(),
            });
        }
        Ok(Self {
            grid: grid.clone(),
            data,
        })
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn coeffs(&self) -> &[Complex64] {
        &self.data
    }

    pub fn coeffs_mut(&mut self) -> &mut [Complex64] {
        &mut self.data
    }

    pub fn coeff(&self, k1: i64, k2: i64) -> Complex64 {
        self.data[self.grid.flat_index(k1, k2)]
    }

    /// Sets `c(k) = value` and `c(-k) = conj(value)`.
    pub fn set_mode_pair(&mut self, k1: i64, k2: i64, value: Complex64) {
        let idx = self.grid.flat_index(k1, k2);
        let conj = self.grid.conjugate_index(idx);
        self.data[idx] = value;
        self.data[conj] = value.conj();
        if idx == conj {
            self.data[idx] = Complex64::new(value.re, 0.0);
        }
    }

    /// Relative L² distance between `c(-k)` and `conj(c(k))`.
    pub fn hermitian_defect(&self) -> f64 {
        let mut defect = 0.0;
        let mut norm = 0.0;
        for (idx, c) in self.data.iter().enumerate() {
            let partner = self.data[self.grid.conjugate_index(idx)];
            defect += (partner - c.conj()).norm_sqr();
            norm += c.norm_sqr();
        }
        if norm == 0.0 {
            0.0
        } else {
            (defect / norm).sqrt()
        }
    }

    pub fn is_finite(&self) -> bool {
        self.data.iter().all(|c| c.re.is_finite() && c.im.is_finite())
    }

    /// Applies a per-mode multiplier `m(k1, k2)`.
    pub fn apply(&self, m: impl Fn(i64, i64) -> Complex64) -> Self {
        let data = self
            .data
            .iter()
            .enumerate()
            .map(|(idx, c)| {
                let (k1, k2) = self.grid.mode(idx);
                c * m(k1, k2)
            })
            .collect();
        Self {
            grid: self.grid.clone(),
            data,
        }
    }

    /// Applies a real per-mode multiplier given as a table in storage order.
    pub fn apply_table(&self, table: &[f64]) -> Self {
        Self {
            grid: self.grid.clone(),
            data: self.data.iter().zip(table).map(|(c, m)| c * m).collect(),
        }
    }

    pub fn scale(&self, s: f64) -> Self {
        Self {
            grid: self.grid.clone(),
            data: self.data.iter().map(|c| c * s).collect(),
        }
    }

    pub fn add(&self, other: &SpectralField) -> Self {
        self.zip_with(other, |a, b| a + b)
    }

    pub fn sub(&self, other: &SpectralField) -> Self {
        self.zip_with(other, |a, b| a - b)
    }

    /// `self + s * other`.
    pub fn add_scaled(&self, other: &SpectralField, s: f64) -> Self {
        self.zip_with(other, |a, b| a + b * s)
    }

    pub fn add_assign(&mut self, other: &SpectralField) {
        for (a, b) in self.data.iter_mut().zip(&other.data) {
            *a += b;
        }
    }

    fn zip_with(&self, other: &SpectralField, f: impl Fn(Complex64, Complex64) -> Complex64) -> Self {
        debug_assert_eq!(self.grid, other.grid);
        Self {
            grid: self.grid.clone(),
            data: self
                .data
                .iter()
                .zip(&other.data)
                .map(|(a, b)| f(*a, *b))
                .collect(),
        }
    }

    /// `Σ_k |c_k|²`, i.e. the mean square of the field.
    pub fn coeff_norm_sqr(&self) -> f64 {
        self.data.iter().map(|c| c.norm_sqr()).sum()
    }

    /// Largest coefficient-wise distance to `other`.
    pub fn max_abs_diff(&self, other: &SpectralField) -> f64 {
        self.data
            .iter()
            .zip(&other.data)
            .fold(0.0, |m, (a, b)| m.max((a - b).norm()))
    }

    pub fn zero_mode(&self) -> Complex64 {
        self.data[0]
    }

    /// Converts to point values without the Hermitian check.
    pub(crate) fn to_physical(&self) -> PhysicalField {
        let mut buf = self.data.clone();
        self.grid.fft2(&mut buf, false);
        PhysicalField::from_raw(&self.grid, buf.into_iter().map(|c| c.re).collect())
    }
}

impl PhysicalField {
    /// Converts to coefficients without the finiteness check.
    pub(crate) fn to_spectral(&self) -> SpectralField {
        let mut buf: Vec<Complex64> = self.data.iter().map(|&v| Complex64::new(v, 0.0)).collect();
        self.grid.fft2(&mut buf, true);
        let scale = 1.0 / self.grid.len() as f64;
        for c in &mut buf {
            *c *= scale;
        }
        SpectralField {
            grid: self.grid.clone(),
            data: buf,
        }
    }
}

/// Pair of scalar fields on one grid, used for velocities and gradients.
#[derive(Clone, Debug)]
pub struct VectorField<F> {
    pub x1: F,
    pub x2: F,
}

impl<F> VectorField<F> {
    pub fn new(x1: F, x2: F) -> Self {
        Self { x1, x2 }
    }

    pub fn map<G>(&self, f: impl Fn(&F) -> G) -> VectorField<G> {
        VectorField {
            x1: f(&self.x1),
            x2: f(&self.x2),
        }
    }
}

impl VectorField<SpectralField> {
    pub fn to_physical(&self) -> VectorField<PhysicalField> {
        self.map(SpectralField::to_physical)
    }

    pub fn zeros(grid: &Grid) -> Self {
        Self::new(SpectralField::zeros(grid), SpectralField::zeros(grid))
    }
}

impl VectorField<PhysicalField> {
    pub fn to_spectral(&self) -> VectorField<SpectralField> {
        self.map(PhysicalField::to_spectral)
    }

    /// Grid maximum of the pointwise Euclidean length.
    pub fn max_magnitude(&self) -> f64 {
        self.x1
            .values()
            .iter()
            .zip(self.x2.values())
            .fold(0.0, |m, (a, b)| m.max(a.hypot(*b)))
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Axis {
    X1,
    X2,
}

pub fn forward_transform(f: &PhysicalField) -> Result<SpectralField> {
    if let Some(index) = f.values().iter().position(|v| !v.is_finite()) {
        return Err(SpectralError::NonFinite { index });
    }
    Ok(f.to_spectral())
}

pub fn inverse_transform(f: &SpectralField) -> Result<PhysicalField> {
    let defect = f.hermitian_defect();
    if !(defect <= HERMITIAN_TOLERANCE) {
        return Err(SpectralError::NotHermitian { defect });
    }
    Ok(f.to_physical())
}

fn modulus(k1: i64, k2: i64) -> f64 {
    ((k1 * k1 + k2 * k2) as f64).sqrt()
}

pub fn partial_derivative(f: &SpectralField, axis: Axis) -> SpectralField {
    let nyq = f.grid().nyquist();
    f.apply(|k1, k2| {
        let k = match axis {
            Axis::X1 => k1,
            Axis::X2 => k2,
        };
        if k == nyq {
            Complex64::default()
        } else {
            Complex64::new(0.0, k as f64)
        }
    })
}

/// `|D|^alpha` for `alpha` in `(0, 2]`.
pub fn fractional_dissipation(f: &SpectralField, alpha: f64) -> Result<SpectralField> {
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(SpectralError::InvalidAlpha(alpha));
    }
    Ok(abs_derivative_power(f, alpha))
}

/// `|D|^s` for any real `s`; the zero mode always maps to zero.
pub fn abs_derivative_power(f: &SpectralField, s: f64) -> SpectralField {
    f.apply(|k1, k2| {
        if k1 == 0 && k2 == 0 {
            Complex64::default()
        } else {
            Complex64::new(modulus(k1, k2).powf(s), 0.0)
        }
    })
}

/// Riesz transform `∂1 / |D|`, multiplier `i k1 / |k|`.
pub fn riesz(f: &SpectralField) -> SpectralField {
    let nyq = f.grid().nyquist();
    f.apply(|k1, k2| {
        if (k1 == 0 && k2 == 0) || k1 == nyq {
            Complex64::default()
        } else {
            Complex64::new(0.0, k1 as f64 / modulus(k1, k2))
        }
    })
}

/// Velocity `v = ∇^⊥ Δ^{-1} ω` with `∇^⊥ = (-∂2, ∂1)`.
pub fn biot_savart(omega: &SpectralField) -> Result<VectorField<SpectralField>> {
    let total = omega.coeff_norm_sqr().sqrt();
    let mean = omega.zero_mode().norm();
    if mean > MEAN_TOLERANCE * total {
        return Err(SpectralError::NonzeroMean(mean / total));
    }
    Ok(biot_savart_unchecked(omega))
}

pub(crate) fn biot_savart_unchecked(omega: &SpectralField) -> VectorField<SpectralField> {
    let nyq = omega.grid().nyquist();
    let v1 = omega.apply(|k1, k2| {
        if (k1 == 0 && k2 == 0) || k2 == nyq {
            Complex64::default()
        } else {
            Complex64::new(0.0, k2 as f64 / (k1 * k1 + k2 * k2) as f64)
        }
    });
    let v2 = omega.apply(|k1, k2| {
        if (k1 == 0 && k2 == 0) || k1 == nyq {
            Complex64::default()
        } else {
            Complex64::new(0.0, -(k1 as f64) / (k1 * k1 + k2 * k2) as f64)
        }
    });
    VectorField::new(v1, v2)
}

pub fn divergence(v: &VectorField<SpectralField>) -> SpectralField {
    partial_derivative(&v.x1, Axis::X1).add(&partial_derivative(&v.x2, Axis::X2))
}

/// Scalar curl `∂1 v2 - ∂2 v1`.
pub fn curl(v: &VectorField<SpectralField>) -> SpectralField {
    partial_derivative(&v.x2, Axis::X1).sub(&partial_derivative(&v.x1, Axis::X2))
}

pub fn gradient(f: &SpectralField) -> VectorField<SpectralField> {
    VectorField::new(
        partial_derivative(f, Axis::X1),
        partial_derivative(f, Axis::X2),
    )
}

/// 2/3 rule: zero every mode with `max(|k1|, |k2|) > n/3`.
pub fn dealias(f: &SpectralField) -> SpectralField {
    let mut out = f.clone();
    dealias_in_place(&mut out);
    out
}

pub(crate) fn dealias_in_place(f: &mut SpectralField) {
    let grid = f.grid.clone();
    for (idx, c) in f.data.iter_mut().enumerate() {
        let (k1, k2) = grid.mode(idx);
        if !grid.is_resolved(k1, k2) {
            *c = Complex64::default();
        }
    }
}

/// Dealiased spectral form of a pointwise product.
pub fn dealiased_product(a: &PhysicalField, b: &PhysicalField) -> SpectralField {
    let mut out = a.mul(b).to_spectral();
    dealias_in_place(&mut out);
    out
}

/// `v·∇f`, formed in physical space and dealiased.
pub fn advect(v: &VectorField<SpectralField>, f: &SpectralField) -> SpectralField {
    advect_physical(&v.to_physical(), f)
}

/// [`advect`] with the velocity already in physical space.
pub fn advect_physical(v: &VectorField<PhysicalField>, f: &SpectralField) -> SpectralField {
    let grad = gradient(f).to_physical();
    let product = v.x1.mul(&grad.x1).add(&v.x2.mul(&grad.x2));
    let mut out = product.to_spectral();
    dealias_in_place(&mut out);
    out
}

/// Grid-quadrature `L^p` norm over the box; `p = ∞` gives the grid maximum.
pub fn lp_norm(f: &PhysicalField, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(SpectralError::InvalidExponent(p));
    }
    Ok(lp_norm_slice(f.values(), p, f.grid().cell_area()))
}

pub(crate) fn lp_norm_slice(values: &[f64], p: f64, cell_area: f64) -> f64 {
    if p.is_infinite() {
        return values.iter().fold(0.0, |m, v| m.max(v.abs()));
    }
    let sum: f64 = if p == 2.0 {
        values.iter().map(|v| v * v).sum()
    } else {
        values.iter().map(|v| v.abs().powf(p)).sum()
    };
    (sum * cell_area).powf(1.0 / p)
}

/// `L^p` norm of the pointwise Euclidean length of a vector field.
pub fn vector_lp_norm(v: &VectorField<PhysicalField>, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(SpectralError::InvalidExponent(p));
    }
    let mag: Vec<f64> = v
        .x1
        .values()
        .iter()
        .zip(v.x2.values())
        .map(|(a, b)| a.hypot(*b))
        .collect();
    Ok(lp_norm_slice(&mag, p, v.x1.grid().cell_area()))
}

/// `L^p` norm of the pointwise Frobenius norm of `∇v`.
pub fn gradient_lp_norm(v: &VectorField<SpectralField>, p: f64) -> Result<f64> {
    if !(p >= 1.0) {
        return Err(SpectralError::InvalidExponent(p));
    }
    let parts = [
        partial_derivative(&v.x1, Axis::X1).to_physical(),
        partial_derivative(&v.x1, Axis::X2).to_physical(),
        partial_derivative(&v.x2, Axis::X1).to_physical(),
        partial_derivative(&v.x2, Axis::X2).to_physical(),
    ];
    let grid = v.x1.grid();
    let frob: Vec<f64> = (0..grid.len())
        .map(|i| parts.iter().map(|f| f.values()[i].powi(2)).sum::<f64>().sqrt())
        .collect();
    Ok(lp_norm_slice(&frob, p, grid.cell_area()))
}

/// `H^s` (or `Ḣ^s`) norm with the box measure, so that `s = 0` reproduces
/// the `L²` norm: `2π (Σ_k w(k)^{2s} |c_k|²)^{1/2}` with `w = |k|` in the
/// homogeneous case (zero mode dropped) and `w = (1 + |k|²)^{1/2}` otherwise.
pub fn sobolev_norm(f: &SpectralField, s: f64, homogeneous: bool) -> f64 {
    let grid = f.grid();
    let mut sum = 0.0;
    for (idx, c) in f.coeffs().iter().enumerate() {
        let (k1, k2) = grid.mode(idx);
        let k_sq = (k1 * k1 + k2 * k2) as f64;
        let weight = if homogeneous {
            if k_sq == 0.0 {
                continue;
            }
            k_sq.powf(s)
        } else {
            (1.0 + k_sq).powf(s)
        };
        sum += weight * c.norm_sqr();
    }
    2.0 * PI * sum.sqrt()
}

/// Box inner product `∫ f g dx` computed from coefficients.
pub fn inner_product(f: &SpectralField, g: &SpectralField) -> f64 {
    let sum: f64 = f
        .coeffs()
        .iter()
        .zip(g.coeffs())
        .map(|(a, b)| (a.conj() * b).re)
        .sum();
    4.0 * PI * PI * sum
}
