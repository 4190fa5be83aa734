//! Dyadic frequency decomposition on the torus.
//!
//! The cut-offs are built from one smooth transition `g`, equal to 1 on
//! `r <= 1` and to 0 on `r >= 2`:
//!
//! ```text
//! chi(k)   = g(|k|)
//! phi_q(k) = g(|k| / 2^{q+1}) - g(|k| / 2^q),   q = 0..=qmax
//! ```
//!
//! The sum telescopes to `g(|k| / 2^{qmax+1})`, which is 1 on every
//! wavevector of the grid, and `phi_q` is supported in `2^q < |k| < 2^{q+2}`.

use rustfft::num_complex::Complex64;
use thiserror::Error;

use crate::spectral::{
    dealias_in_place, lp_norm_slice, partial_derivative, riesz, Axis, Grid, PhysicalField,
    SpectralField, VectorField,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum LpError {
    #[error("band index {q} outside [{qmin}, {qmax}]")]
    BandOutOfRange { q: i32, qmin: i32, qmax: i32 },
    #[error("Besov exponents must satisfy p >= 1 and r >= 1 (got p = {p}, r = {r})")]
    InvalidExponents { p: f64, r: f64 },
}

/// `exp(-1/t)` for `t > 0`, zero otherwise.
fn bump(t: f64) -> f64 {
    if t > 0.0 {
        (-1.0 / t).exp()
    } else {
        0.0
    }
}

/// Smooth non-increasing transition: 1 for `r <= 1`, 0 for `r >= 2`.
pub fn transition(r: f64) -> f64 {
    if r <= 1.0 {
        1.0
    } else if r >= 2.0 {
        0.0
    } else {
        let a = bump(2.0 - r);
        a / (a + bump(r - 1.0))
    }
}

/// Sampled `chi` and `phi_q` multipliers for one grid.
#[derive(Clone, Debug)]
pub struct DyadicFilterBank {
    grid: Grid,
    qmax: i32,
    chi: Vec<f64>,
    phi: Vec<Vec<f64>>,
}

pub const QMIN: i32 = -1;

pub fn build_filter_bank(grid: &Grid) -> DyadicFilterBank {
    DyadicFilterBank::new(grid)
}

impl DyadicFilterBank {
    pub fn new(grid: &Grid) -> Self {
        let half = grid.n() as f64 / 2.0;
        let qmax = half.log2().ceil() as i32 + 1;
        let levels = (qmax + 2) as usize;
        // g(|k| / 2^j) for j = 0..=qmax+1
        let mut g = vec![vec![0.0; grid.len()]; levels];
        for idx in 0..grid.len() {
            let (k1, k2) = grid.mode(idx);
            let k = ((k1 * k1 + k2 * k2) as f64).sqrt();
            for (j, level) in g.iter_mut().enumerate() {
                level[idx] = transition(k / f64::powi(2.0, j as i32));
            }
        }
        let phi = (0..=qmax as usize)
            .map(|q| {
                g[q + 1]
                    .iter()
                    .zip(&g[q])
                    .map(|(outer, inner)| outer - inner)
                    .collect()
            })
            .collect();
        Self {
            grid: grid.clone(),
            qmax,
            chi: g.swap_remove(0),
            phi,
        }
    }

    pub fn grid(&self) -> &Grid {
        &self.grid
    }

    pub fn qmin(&self) -> i32 {
        QMIN
    }

    pub fn qmax(&self) -> i32 {
        self.qmax
    }

    pub fn bands(&self) -> std::ops::RangeInclusive<i32> {
        QMIN..=self.qmax
    }

    pub fn multiplier(&self, q: i32) -> Result<&[f64], LpError> {
        if q == QMIN {
            Ok(&self.chi)
        } else if (0..=self.qmax).contains(&q) {
            Ok(&self.phi[q as usize])
        } else {
            Err(LpError::BandOutOfRange {
                q,
                qmin: QMIN,
                qmax: self.qmax,
            })
        }
    }

    fn block_unchecked(&self, f: &SpectralField, q: i32) -> SpectralField {
        match self.multiplier(q) {
            Ok(m) => f.apply_table(m),
            Err(_) => SpectralField::zeros(f.grid()),
        }
    }

    /// All blocks of `f` in physical space, indexed from `q = -1`.
    pub fn physical_blocks(&self, f: &SpectralField) -> Vec<PhysicalField> {
        self.bands()
            .map(|q| self.block_unchecked(f, q).to_physical())
            .collect()
    }
}

/// `Δ_q f` for `q` in `[-1, qmax]`.
pub fn dyadic_block(
    f: &SpectralField,
    q: i32,
    bank: &DyadicFilterBank,
) -> Result<SpectralField, LpError> {
    Ok(f.apply_table(bank.multiplier(q)?))
}

/// `S_q f = Σ_{-1 <= p <= q-1} Δ_p f`; zero for `q <= -1`, all of `f` once
/// `q > qmax`.
pub fn partial_sum(f: &SpectralField, q: i32, bank: &DyadicFilterBank) -> SpectralField {
    let mut out = SpectralField::zeros(f.grid());
    for p in QMIN..q.min(bank.qmax() + 1) {
        out.add_assign(&bank.block_unchecked(f, p));
    }
    out
}

/// Exponents of a (discrete, band-truncated) Besov norm. Use
/// `f64::INFINITY` for `p = ∞` or `r = ∞`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct BesovSpec {
    pub s: f64,
    pub p: f64,
    pub r: f64,
    pub homogeneous: bool,
}

impl BesovSpec {
    pub fn new(s: f64, p: f64, r: f64) -> Result<Self, LpError> {
        if !(p >= 1.0 && r >= 1.0) {
            return Err(LpError::InvalidExponents { p, r });
        }
        Ok(Self {
            s,
            p,
            r,
            homogeneous: false,
        })
    }

    pub fn homogeneous(mut self) -> Self {
        self.homogeneous = true;
        self
    }
}

/// `ℓ^r` aggregation of nonnegative terms; `r = ∞` is a max.
pub fn lr_aggregate(terms: impl IntoIterator<Item = f64>, r: f64) -> f64 {
    if r.is_infinite() {
        terms.into_iter().fold(0.0, f64::max)
    } else if r == 1.0 {
        terms.into_iter().sum()
    } else {
        terms.into_iter().map(|a| a.powf(r)).sum::<f64>().powf(1.0 / r)
    }
}

/// Per-band terms `2^{qs} ‖Δ_q f‖_{L^p}` for `q = -1..=qmax`.
///
/// The homogeneous variant drops the zero mode; on the integer lattice the
/// remaining low block coincides with the annular block `φ(2·)`.
pub fn besov_terms(f: &SpectralField, spec: &BesovSpec, bank: &DyadicFilterBank) -> Vec<f64> {
    let mut f = f.clone();
    if spec.homogeneous {
        f.coeffs_mut()[0] = Complex64::default();
    }
    let area = f.grid().cell_area();
    bank.bands()
        .map(|q| {
            let block = bank.block_unchecked(&f, q).to_physical();
            f64::powi(2.0, q).powf(spec.s) * lp_norm_slice(block.values(), spec.p, area)
        })
        .collect()
}

pub fn besov_norm(f: &SpectralField, spec: &BesovSpec, bank: &DyadicFilterBank) -> f64 {
    lr_aggregate(besov_terms(f, spec, bank), spec.r)
}

/// Besov norm of a vector field: per-band `L^p` norm of the pointwise
/// Euclidean length.
pub fn besov_norm_vector(
    v: &VectorField<SpectralField>,
    spec: &BesovSpec,
    bank: &DyadicFilterBank,
) -> f64 {
    let mut v = v.clone();
    if spec.homogeneous {
        v.x1.coeffs_mut()[0] = Complex64::default();
        v.x2.coeffs_mut()[0] = Complex64::default();
    }
    let area = bank.grid().cell_area();
    let terms = bank.bands().map(|q| {
        let a = bank.block_unchecked(&v.x1, q).to_physical();
        let b = bank.block_unchecked(&v.x2, q).to_physical();
        let mag: Vec<f64> = a
            .values()
            .iter()
            .zip(b.values())
            .map(|(x, y)| x.hypot(*y))
            .collect();
        f64::powi(2.0, q).powf(spec.s) * lp_norm_slice(&mag, spec.p, area)
    });
    lr_aggregate(terms, spec.r)
}

/// Mixed space-time norm `L̃^ρ_T B^s_{p,r}`: for each band the time
/// `L^ρ` norm of `‖Δ_q u(t)‖_{L^p}` (trapezoid rule), then the weighted
/// `ℓ^r` sum over bands.
pub fn time_besov_norm(
    samples: &[(f64, SpectralField)],
    spec: &BesovSpec,
    rho: f64,
    bank: &DyadicFilterBank,
) -> f64 {
    let unweighted = BesovSpec { s: 0.0, ..*spec };
    let per_time: Vec<(f64, Vec<f64>)> = samples
        .iter()
        .map(|(t, f)| (*t, besov_terms(f, &unweighted, bank)))
        .collect();
    let terms = bank.bands().enumerate().map(|(i, q)| {
        let series: Vec<(f64, f64)> = per_time.iter().map(|(t, b)| (*t, b[i])).collect();
        f64::powi(2.0, q).powf(spec.s) * time_lp(&series, rho)
    });
    lr_aggregate(terms, spec.r)
}

/// `L^ρ` norm in time of a sampled nonnegative series (trapezoid rule).
pub fn time_lp(series: &[(f64, f64)], rho: f64) -> f64 {
    if rho.is_infinite() {
        return series.iter().fold(0.0, |m, (_, a)| m.max(*a));
    }
    let integral: f64 = series
        .windows(2)
        .map(|w| 0.5 * (w[1].0 - w[0].0) * (w[0].1.powf(rho) + w[1].1.powf(rho)))
        .sum();
    integral.powf(1.0 / rho)
}

/// Paraproducts and remainder of `u·w`.
#[derive(Clone, Debug)]
pub struct BonyParts {
    /// `T_u w = Σ_q S_{q-1}u · Δ_q w`
    pub t_u_w: SpectralField,
    /// `T_w u = Σ_q S_{q-1}w · Δ_q u`
    pub t_w_u: SpectralField,
    /// `R(u, w) = Σ_q Δ_q u · Δ̃_q w`
    pub remainder: SpectralField,
}

impl BonyParts {
    pub fn sum(&self) -> SpectralField {
        self.t_u_w.add(&self.t_w_u).add(&self.remainder)
    }
}

/// Bony splitting of the product, each part dealiased. The three parts add
/// up to the dealiased product of `u` and `w`.
pub fn bony_decompose(u: &SpectralField, w: &SpectralField, bank: &DyadicFilterBank) -> BonyParts {
    let grid = u.grid().clone();
    let bu = bank.physical_blocks(u);
    let bw = bank.physical_blocks(w);
    let nb = bu.len();
    let zero = PhysicalField::zeros(&grid);

    // low[i] = S_{q-1} with q = i - 1, i.e. the sum of blocks with index < i - 1
    let partial_sums = |blocks: &[PhysicalField]| {
        let mut out = Vec::with_capacity(nb);
        let mut acc = zero.clone();
        for i in 0..nb {
            if i >= 2 {
                acc = acc.add(&blocks[i - 2]);
            }
            out.push(acc.clone());
        }
        out
    };
    let su = partial_sums(&bu);
    let sw = partial_sums(&bw);

    let mut t_u_w = vec![0.0; grid.len()];
    let mut t_w_u = vec![0.0; grid.len()];
    let mut rem = vec![0.0; grid.len()];
    for i in 0..nb {
        accumulate_product(&mut t_u_w, &su[i], &bw[i]);
        accumulate_product(&mut t_w_u, &sw[i], &bu[i]);
        for j in i.saturating_sub(1)..(i + 2).min(nb) {
            accumulate_product(&mut rem, &bu[i], &bw[j]);
        }
    }
    let finish = |data: Vec<f64>| {
        let mut s = PhysicalField::from_raw(&grid, data).to_spectral();
        dealias_in_place(&mut s);
        s
    };
    BonyParts {
        t_u_w: finish(t_u_w),
        t_w_u: finish(t_w_u),
        remainder: finish(rem),
    }
}

fn accumulate_product(acc: &mut [f64], a: &PhysicalField, b: &PhysicalField) {
    for ((out, x), y) in acc.iter_mut().zip(a.values()).zip(b.values()) {
        *out += x * y;
    }
}

/// Componentwise `[R, v^i]θ = R(v^i θ) - v^i Rθ`, dealiased.
pub fn commutator_riesz(
    v: &VectorField<SpectralField>,
    theta: &SpectralField,
) -> VectorField<SpectralField> {
    let theta_phys = theta.to_physical();
    let r_theta = riesz(theta).to_physical();
    let vp = v.to_physical();
    let component = |vi: &PhysicalField| {
        let mut a = vi.mul(&theta_phys).to_spectral();
        dealias_in_place(&mut a);
        let mut b = vi.mul(&r_theta).to_spectral();
        dealias_in_place(&mut b);
        riesz(&a).sub(&b)
    };
    VectorField::new(component(&vp.x1), component(&vp.x2))
}

/// `[R, v·∇]θ` evaluated as `div([R, v]θ)`.
pub fn riesz_transport_commutator(
    v: &VectorField<SpectralField>,
    theta: &SpectralField,
) -> SpectralField {
    let c = commutator_riesz(v, theta);
    partial_derivative(&c.x1, Axis::X1).add(&partial_derivative(&c.x2, Axis::X2))
}

/// `[Δ_q, v·∇]f = Δ_q(v·∇f) - v·∇(Δ_q f)`, dealiased.
pub fn commutator_block(
    v: &VectorField<SpectralField>,
    f: &SpectralField,
    q: i32,
    bank: &DyadicFilterBank,
) -> Result<SpectralField, LpError> {
    let vp = v.to_physical();
    let transported = crate::spectral::advect_physical(&vp, f);
    let block = dyadic_block(f, q, bank)?;
    let lhs = dyadic_block(&transported, q, bank)?;
    Ok(lhs.sub(&crate::spectral::advect_physical(&vp, &block)))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::random::{random_scalar, random_solenoidal, FieldSpectrum, SampleKey};
    use crate::spectral::{
        advect, dealiased_product, forward_transform, sobolev_norm, PhysicalField,
    };

    fn setup(n: usize) -> (Grid, DyadicFilterBank) {
        let g = Grid::new(n).unwrap();
        let b = build_filter_bank(&g);
        (g, b)
    }

    fn rel(a: &SpectralField, b: &SpectralField) -> f64 {
        let s = b.coeff_norm_sqr().sqrt();
        let d = a.sub(b).coeff_norm_sqr().sqrt();
        if s == 0.0 {
            d
        } else {
            d / s
        }
    }

    fn scalar(g: &Grid, seed: u64, stream: u64) -> SpectralField {
        random_scalar(g, SampleKey::new(seed, 0, stream), &FieldSpectrum::default(), false)
    }

    #[test]
    fn transition_shape() {
        assert_eq!(transition(0.0), 1.0);
        assert_eq!(transition(1.0), 1.0);
        assert_eq!(transition(2.0), 0.0);
        assert!((transition(1.5) - 0.5).abs() < 1e-15);
        let mut prev = 1.0;
        for i in 0..=100 {
            let v = transition(1.0 + i as f64 / 100.0);
            assert!(v <= prev);
            prev = v;
        }
    }

    #[test]
    fn band_range_for_common_grids() {
        assert_eq!(build_filter_bank(&Grid::new(128).unwrap()).qmax(), 7);
        assert_eq!(build_filter_bank(&Grid::new(256).unwrap()).qmax(), 8);
        assert_eq!(build_filter_bank(&Grid::new(100).unwrap()).qmax(), 7);
    }

    #[test]
    fn partition_of_unity_everywhere() {
        let (g, bank) = setup(64);
        for idx in 0..g.len() {
            let mut sum = bank.multiplier(-1).unwrap()[idx];
            for q in 0..=bank.qmax() {
                sum += bank.multiplier(q).unwrap()[idx];
            }
            assert!((sum - 1.0).abs() <= 2.0 * f64::EPSILON, "{:?}", g.mode(idx));
        }
        assert_eq!(bank.multiplier(-1).unwrap()[0], 1.0);
    }

    #[test]
    fn sum_at_seven_three_is_one() {
        let (g, bank) = setup(64);
        let idx = g.flat_index(7, 3);
        let total: f64 = bank.bands().map(|q| bank.multiplier(q).unwrap()[idx]).sum();
        assert!((total - 1.0).abs() <= f64::EPSILON);
    }

    #[test]
    fn annuli_two_apart_are_disjoint() {
        let (g, bank) = setup(128);
        for q in 0..=bank.qmax() - 2 {
            let a = bank.multiplier(q).unwrap();
            let b = bank.multiplier(q + 2).unwrap();
            assert!(a.iter().zip(b).all(|(x, y)| x * y == 0.0));
        }
        for q in 0..=bank.qmax() {
            let m = bank.multiplier(q).unwrap();
            for idx in 0..g.len() {
                if m[idx] != 0.0 {
                    let (k1, k2) = g.mode(idx);
                    let k = ((k1 * k1 + k2 * k2) as f64).sqrt();
                    let lo = f64::powi(2.0, q);
                    assert!(k >= lo && k <= 4.0 * lo);
                    assert!(m[idx] > 0.0);
                }
            }
        }
    }

    #[test]
    fn blocks_reconstruct_field() {
        let (g, bank) = setup(64);
        let f = scalar(&g, 1, 0);
        let mut sum = SpectralField::zeros(&g);
        for q in bank.bands() {
            sum.add_assign(&dyadic_block(&f, q, &bank).unwrap());
        }
        assert!(rel(&sum, &f) < 1e-12);
        assert!(rel(&partial_sum(&f, bank.qmax() + 1, &bank), &f) < 1e-12);
        assert!(rel(&partial_sum(&f, 0, &bank), &dyadic_block(&f, -1, &bank).unwrap()) == 0.0);
        assert!(dyadic_block(&f, bank.qmax() + 1, &bank).is_err());
        assert!(dyadic_block(&f, -2, &bank).is_err());
    }

    #[test]
    fn block_support_for_cos_4x() {
        let (g, bank) = setup(64);
        let f = forward_transform(&PhysicalField::from_fn(&g, |x, _| (4.0 * x).cos())).unwrap();
        for q in bank.bands() {
            let b = dyadic_block(&f, q, &bank).unwrap();
            let inside = q >= 0 && 4.0 > f64::powi(2.0, q) && 4.0 < f64::powi(2.0, q + 2);
            if !inside {
                assert!(b.coeff_norm_sqr().sqrt() < 1e-15, "q = {q}");
            }
        }
        let c = forward_transform(&PhysicalField::from_fn(&g, |_, _| 2.0)).unwrap();
        assert!(rel(&dyadic_block(&c, -1, &bank).unwrap(), &c) == 0.0);
    }

    #[test]
    fn partial_sum_support() {
        let (g, bank) = setup(64);
        let f = scalar(&g, 2, 0);
        for q in 0..=bank.qmax() {
            let s = partial_sum(&f, q, &bank);
            let limit = f64::powi(2.0, q + 1);
            for idx in 0..g.len() {
                let (k1, k2) = g.mode(idx);
                if (((k1 * k1 + k2 * k2) as f64).sqrt()) > limit {
                    assert_eq!(s.coeffs()[idx], Complex64::default());
                }
            }
        }
    }

    #[test]
    fn besov_of_single_band_field() {
        let (g, bank) = setup(128);
        let f = scalar(&g, 3, 0);
        // isolate band 3 exactly: keep only modes where phi_3 = 1 and others vanish
        let m = bank.multiplier(3).unwrap();
        let mut pure = SpectralField::zeros(&g);
        for (idx, c) in pure.coeffs_mut().iter_mut().enumerate() {
            if m[idx] == 1.0 {
                *c = f.coeffs()[idx];
            }
        }
        assert!(pure.coeff_norm_sqr() > 0.0);
        for s in [-1.0, 0.0, 0.5] {
            let spec = BesovSpec::new(s, 2.0, f64::INFINITY).unwrap();
            let norm = besov_norm(&pure, &spec, &bank);
            let expected = f64::powi(2.0, 3).powf(s) * sobolev_norm(&pure, 0.0, false);
            assert!((norm - expected).abs() <= 1e-12 * expected);
        }
        let spec = BesovSpec::new(0.3, 3.0, 1.0).unwrap();
        assert_eq!(besov_norm(&SpectralField::zeros(&g), &spec, &bank), 0.0);
    }

    #[test]
    fn besov_b0_22_brackets_l2() {
        // Σ_q φ_q² lies in [1/2, 1] pointwise, so the B^0_{2,2} norm sits in
        // [‖f‖/√2, ‖f‖]; the brute-force band sum must agree with the
        // Parseval-side evaluation of Σ_k (Σ_q φ_q(k)²)|c_k|².
        let (g, bank) = setup(128);
        for stream in 0..8 {
            let f = scalar(&g, 4, stream);
            let spec = BesovSpec::new(0.0, 2.0, 2.0).unwrap();
            let b = besov_norm(&f, &spec, &bank);
            let l2 = sobolev_norm(&f, 0.0, false);
            assert!(b <= l2 * (1.0 + 1e-12) && b >= l2 / 2f64.sqrt() * (1.0 - 1e-12));
            let mut weighted = 0.0;
            for (idx, c) in f.coeffs().iter().enumerate() {
                let w: f64 = bank.bands().map(|q| bank.multiplier(q).unwrap()[idx].powi(2)).sum();
                weighted += w * c.norm_sqr();
            }
            let parseval = 2.0 * std::f64::consts::PI * weighted.sqrt();
            assert!((b - parseval).abs() <= 1e-10 * parseval);
        }
    }

    #[test]
    fn besov_r_monotone() {
        let (g, bank) = setup(64);
        let f = scalar(&g, 5, 0);
        for (s, p) in [(0.0, 2.0), (-0.5, f64::INFINITY), (1.0, 4.0)] {
            let hi = besov_norm(&f, &BesovSpec::new(s, p, f64::INFINITY).unwrap(), &bank);
            let lo = besov_norm(&f, &BesovSpec::new(s, p, 1.0).unwrap(), &bank);
            assert!(hi <= lo);
        }
    }

    #[test]
    fn homogeneous_besov_ignores_mean() {
        let (g, bank) = setup(64);
        let f = scalar(&g, 6, 0);
        let mut shifted = f.clone();
        shifted.coeffs_mut()[0] += Complex64::new(10.0, 0.0);
        let spec = BesovSpec::new(0.5, 2.0, 2.0).unwrap().homogeneous();
        let a = besov_norm(&f, &spec, &bank);
        let b = besov_norm(&shifted, &spec, &bank);
        assert!((a - b).abs() <= 1e-12 * a);
    }

    #[test]
    fn bony_reconstructs_product() {
        let (g, bank) = setup(64);
        let u = scalar(&g, 7, 0);
        let w = scalar(&g, 7, 1);
        let parts = bony_decompose(&u, &w, &bank);
        let product = dealiased_product(&u.to_physical(), &w.to_physical());
        assert!(rel(&parts.sum(), &product) < 1e-10);
    }

    #[test]
    fn bony_with_constant_factor() {
        let (g, bank) = setup(64);
        let u = forward_transform(&PhysicalField::from_fn(&g, |_, _| 3.0)).unwrap();
        let w = scalar(&g, 8, 0);
        let parts = bony_decompose(&u, &w, &bank);
        assert!(parts.t_w_u.coeff_norm_sqr().sqrt() < 1e-14);
        // R(u, w) = u · (Δ_{-1} + Δ_0) w only sees |k| < 4
        for idx in 0..g.len() {
            let (k1, k2) = g.mode(idx);
            if k1 * k1 + k2 * k2 >= 16 {
                assert!(parts.remainder.coeffs()[idx].norm() < 1e-14);
            }
        }
        let zero = SpectralField::zeros(&g);
        let z = bony_decompose(&zero, &zero, &bank);
        assert_eq!(z.sum().coeff_norm_sqr(), 0.0);
    }

    #[test]
    fn riesz_commutator_trivial_cases() {
        let g = Grid::new(64).unwrap();
        let theta = scalar(&g, 9, 0);
        let constant_v = VectorField::new(
            forward_transform(&PhysicalField::from_fn(&g, |_, _| 1.5)).unwrap(),
            forward_transform(&PhysicalField::from_fn(&g, |_, _| -0.5)).unwrap(),
        );
        let c = commutator_riesz(&constant_v, &theta);
        assert!(c.x1.coeff_norm_sqr().sqrt() < 1e-14);
        assert!(c.x2.coeff_norm_sqr().sqrt() < 1e-14);
        let v = random_solenoidal(&g, SampleKey::new(9, 0, 1), &FieldSpectrum::default());
        let z = commutator_riesz(&v, &SpectralField::zeros(&g));
        assert_eq!(z.x1.coeff_norm_sqr() + z.x2.coeff_norm_sqr(), 0.0);
    }

    #[test]
    fn divergence_of_riesz_commutator_matches_direct_form() {
        let g = Grid::new(64).unwrap();
        for sample in 0..4 {
            let v = random_solenoidal(&g, SampleKey::new(10, sample, 0), &FieldSpectrum::default());
            let theta = random_scalar(&g, SampleKey::new(10, sample, 1), &FieldSpectrum::default(), false);
            let via_div = riesz_transport_commutator(&v, &theta);
            let direct = riesz(&advect(&v, &theta)).sub(&advect(&v, &riesz(&theta)));
            assert!(rel(&via_div, &direct) < 1e-9);
        }
    }

    #[test]
    fn riesz_commutator_is_bilinear() {
        let g = Grid::new(64).unwrap();
        let spec = FieldSpectrum::default();
        let v1 = random_solenoidal(&g, SampleKey::new(12, 0, 0), &spec);
        let v2 = random_solenoidal(&g, SampleKey::new(12, 0, 1), &spec);
        let t1 = random_scalar(&g, SampleKey::new(12, 0, 2), &spec, false);
        let t2 = random_scalar(&g, SampleKey::new(12, 0, 3), &spec, false);
        let (a, b) = (0.7, -1.3);
        let v_mix = VectorField::new(
            v1.x1.scale(a).add_scaled(&v2.x1, b),
            v1.x2.scale(a).add_scaled(&v2.x2, b),
        );
        let lhs = commutator_riesz(&v_mix, &t1);
        let c1 = commutator_riesz(&v1, &t1);
        let c2 = commutator_riesz(&v2, &t1);
        assert!(rel(&lhs.x1, &c1.x1.scale(a).add_scaled(&c2.x1, b)) < 1e-10);
        assert!(rel(&lhs.x2, &c1.x2.scale(a).add_scaled(&c2.x2, b)) < 1e-10);
        let t_mix = t1.scale(a).add_scaled(&t2, b);
        let lhs = commutator_riesz(&v1, &t_mix);
        let d2 = commutator_riesz(&v1, &t2);
        assert!(rel(&lhs.x1, &c1.x1.scale(a).add_scaled(&d2.x1, b)) < 1e-10);
        assert!(rel(&lhs.x2, &c1.x2.scale(a).add_scaled(&d2.x2, b)) < 1e-10);
    }

    #[test]
    fn block_commutator_cases() {
        let (g, bank) = setup(64);
        let f = scalar(&g, 13, 0);
        let constant_v = VectorField::new(
            forward_transform(&PhysicalField::from_fn(&g, |_, _| 0.8)).unwrap(),
            forward_transform(&PhysicalField::from_fn(&g, |_, _| 0.3)).unwrap(),
        );
        for q in bank.bands() {
            let c = commutator_block(&constant_v, &f, q, &bank).unwrap();
            assert!(c.coeff_norm_sqr().sqrt() < 1e-13);
        }
        // v and f at low frequency, block far above: both terms vanish
        let low = FieldSpectrum {
            kmax: Some(1),
            ..FieldSpectrum::default()
        };
        let v = random_solenoidal(&g, SampleKey::new(13, 1, 0), &low);
        let f_low = random_scalar(&g, SampleKey::new(13, 1, 1), &low, false);
        let c = commutator_block(&v, &f_low, 4, &bank).unwrap();
        assert!(c.coeff_norm_sqr().sqrt() <= 1e-10);
        let v = random_solenoidal(&g, SampleKey::new(13, 2, 0), &FieldSpectrum::default());
        let c = commutator_block(&v, &f, 2, &bank).unwrap();
        assert!(c.is_finite() && c.coeff_norm_sqr() > 0.0);
    }

    #[test]
    fn bernstein_ratio_on_bands() {
        let (g, bank) = setup(128);
        let area = g.cell_area();
        for stream in 0..8 {
            let f = scalar(&g, 14, stream);
            for q in 0..=3 {
                let b = dyadic_block(&f, q, &bank).unwrap();
                let grad = crate::spectral::gradient(&b).to_physical();
                let gl2 = (lp_norm_slice(grad.x1.values(), 2.0, area).powi(2)
                    + lp_norm_slice(grad.x2.values(), 2.0, area).powi(2))
                .sqrt();
                let bl2 = lp_norm_slice(b.to_physical().values(), 2.0, area);
                let ratio = gl2 / (f64::powi(2.0, q) * bl2);
                assert!((0.5..=8.0).contains(&ratio), "q={q} ratio={ratio}");
            }
        }
    }

    #[test]
    fn time_norm_of_constant_series() {
        let (g, bank) = setup(32);
        let f = scalar(&g, 15, 0);
        let spec = BesovSpec::new(0.5, 2.0, 1.0).unwrap();
        let samples: Vec<(f64, SpectralField)> =
            (0..=4).map(|i| (i as f64 * 0.25, f.clone())).collect();
        let tilde = time_besov_norm(&samples, &spec, 1.0, &bank);
        let direct = besov_norm(&f, &spec, &bank);
        assert!((tilde - direct).abs() <= 1e-12 * direct);
        let tilde_inf = time_besov_norm(&samples, &spec, f64::INFINITY, &bank);
        assert!((tilde_inf - direct).abs() <= 1e-12 * direct);
    }
}
