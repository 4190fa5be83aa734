//! Seeded random fields with a power-law spectral envelope.
//!
//! Each Fourier mode draws from its own generator, seeded by
//! `(seed, sample, stream, k1, k2)`. A field sampled on a finer grid is
//! therefore the coarse field plus the modes the coarse grid cannot hold,
//! which is what grid-refinement comparisons need.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use rustfft::num_complex::Complex64;

use crate::spectral::{biot_savart_unchecked, Grid, SpectralField, VectorField};

/// Identifies one random field: ensemble seed, sample index, and a stream
/// number separating the fields drawn for a single sample.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct SampleKey {
    pub seed: u64,
    pub sample: u64,
    pub stream: u64,
}

impl SampleKey {
    pub fn new(seed: u64, sample: u64, stream: u64) -> Self {
        Self {
            seed,
            sample,
            stream,
        }
    }
}

/// Amplitude envelope `amplitude · |k|^{-gamma}` on `max(|k1|,|k2|) <= kmax`.
///
/// `kmax = None` uses `n/6`, so quadratic products of such fields stay
/// inside the 2/3-rule band.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct FieldSpectrum {
    pub gamma: f64,
    pub amplitude: f64,
    pub kmax: Option<usize>,
}

impl Default for FieldSpectrum {
    fn default() -> Self {
        Self {
            gamma: 2.5,
            amplitude: 1.0,
            kmax: None,
        }
    }
}

impl FieldSpectrum {
    pub fn band_limit(&self, grid: &Grid) -> i64 {
        let cap = grid.dealias_cutoff();
        match self.kmax {
            Some(k) => (k as i64).min(cap),
            None => grid.n() as i64 / 6,
        }
    }
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn mode_rng(key: SampleKey, k1: i64, k2: i64) -> ChaCha8Rng {
    let mut h = splitmix(key.seed);
    for word in [key.sample, key.stream, k1 as u64, k2 as u64] {
        h = splitmix(h ^ word);
    }
    ChaCha8Rng::seed_from_u64(h)
}

/// Random real scalar field. With `mean_free` the zero mode is left at 0,
/// otherwise it gets a real Gaussian of size `amplitude`.
pub fn random_scalar(
    grid: &Grid,
    key: SampleKey,
    spectrum: &FieldSpectrum,
    mean_free: bool,
) -> SpectralField {
    let kmax = spectrum.band_limit(grid);
    let mut f = SpectralField::zeros(grid);
    for k1 in 0..=kmax {
        for k2 in -kmax..=kmax {
            // one representative per conjugate pair
            if k1 == 0 && k2 <= 0 {
                continue;
            }
            let mut rng = mode_rng(key, k1, k2);
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            let k = ((k1 * k1 + k2 * k2) as f64).sqrt();
            let a = spectrum.amplitude * k.powf(-spectrum.gamma) / std::f64::consts::SQRT_2;
            f.set_mode_pair(k1, k2, Complex64::new(a * re, a * im));
        }
    }
    if !mean_free {
        let mut rng = mode_rng(key, 0, 0);
        let re: f64 = rng.sample(StandardNormal);
        f.set_mode_pair(0, 0, Complex64::new(spectrum.amplitude * re, 0.0));
    }
    f
}

/// Random divergence-free velocity whose components follow `spectrum`.
///
/// Built as `∇^⊥ψ` from a stream function one power smoother, which is the
/// Leray projection of a solenoidal draw.
pub fn random_solenoidal(
    grid: &Grid,
    key: SampleKey,
    spectrum: &FieldSpectrum,
) -> VectorField<SpectralField> {
    let vorticity = random_scalar(grid, key, spectrum, true);
    // v = ∇^⊥Δ^{-1}ω has the same |k|^{-γ} envelope as ω shifted by one power;
    // multiply by |k| so the velocity itself carries the requested envelope.
    let omega = vorticity.apply(|k1, k2| {
        let k = ((k1 * k1 + k2 * k2) as f64).sqrt();
        Complex64::new(k, 0.0)
    });
    biot_savart_unchecked(&omega)
}

/// Leray projection of an arbitrary spectral vector field.
pub fn leray_project(v: &VectorField<SpectralField>) -> VectorField<SpectralField> {
    let grid = v.x1.grid().clone();
    let mut x1 = v.x1.clone();
    let mut x2 = v.x2.clone();
    for idx in 0..grid.len() {
        let (k1, k2) = grid.mode(idx);
        let k_sq = (k1 * k1 + k2 * k2) as f64;
        if k_sq == 0.0 {
            continue;
        }
        let a = v.x1.coeffs()[idx];
        let b = v.x2.coeffs()[idx];
        let dot = (a * k1 as f64 + b * k2 as f64) / k_sq;
        x1.coeffs_mut()[idx] = a - dot * k1 as f64;
        x2.coeffs_mut()[idx] = b - dot * k2 as f64;
    }
    VectorField::new(x1, x2)
}
