//! Ensemble checks of functional inequalities.
//!
//! Each suite has a `*_sides` function returning `(lhs, rhs)` for explicit
//! fields and a `verify_*` driver that evaluates it on a seeded random
//! ensemble. The implicit constants are unknown, so the report is the
//! distribution of `lhs / rhs`.

use std::f64::consts::PI;
use std::io::{self, Write};

use rayon::prelude::*;
use thiserror::Error;

use crate::littlewood_paley::{
    besov_norm, build_filter_bank, commutator_block, commutator_riesz, dyadic_block,
    riesz_transport_commutator, BesovSpec, DyadicFilterBank, LpError,
};
use crate::random::{random_scalar, random_solenoidal, FieldSpectrum, SampleKey};
use crate::spectral::{
    abs_derivative_power, advect, gradient, gradient_lp_norm, lp_norm_slice, sobolev_norm,
    vector_lp_norm, Grid, SpectralError, SpectralField, VectorField,
};

/// Samples whose right-hand side is at most this are excluded.
pub const DEGENERATE_RHS: f64 = 1e-14;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum VerifyError {
    #[error("ensemble needs at least one sample")]
    EmptyEnsemble,
    #[error("parameter {name} = {value} outside {range}")]
    Parameter {
        name: &'static str,
        value: f64,
        range: &'static str,
    },
    #[error(transparent)]
    Spectral(#[from] SpectralError),
    #[error(transparent)]
    Bands(#[from] LpError),
}

fn check_param(name: &'static str, value: f64, ok: bool, range: &'static str) -> Result<(), VerifyError> {
    if ok {
        Ok(())
    } else {
        Err(VerifyError::Parameter { name, value, range })
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnsembleSpec {
    pub seed: u64,
    pub count: usize,
    pub n: usize,
    pub spectrum_gamma: f64,
    pub amplitude: f64,
    /// Band limit of the random fields. A fixed value keeps the sampled
    /// functions identical across grid sizes.
    pub kmax: usize,
}

impl EnsembleSpec {
    pub fn new(seed: u64, count: usize, n: usize) -> Self {
        Self {
            seed,
            count,
            n,
            spectrum_gamma: 2.5,
            amplitude: 1.0,
            kmax: 21,
        }
    }

    fn spectrum(&self) -> FieldSpectrum {
        FieldSpectrum {
            gamma: self.spectrum_gamma,
            amplitude: self.amplitude,
            kmax: Some(self.kmax),
        }
    }

    fn key(&self, sample: usize, stream: u64) -> SampleKey {
        SampleKey::new(self.seed, sample as u64, stream)
    }

    fn velocity(&self, grid: &Grid, sample: usize) -> VectorField<SpectralField> {
        random_solenoidal(grid, self.key(sample, 0), &self.spectrum())
    }

    fn scalar(&self, grid: &Grid, sample: usize, stream: u64) -> SpectralField {
        random_scalar(grid, self.key(sample, stream), &self.spectrum(), false)
    }

    fn mean_free_scalar(&self, grid: &Grid, sample: usize, stream: u64) -> SpectralField {
        random_scalar(grid, self.key(sample, stream), &self.spectrum(), true)
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RatioSample {
    pub id: usize,
    pub lhs: f64,
    pub rhs: f64,
    /// `None` for excluded samples.
    pub ratio: Option<f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct RatioReport {
    pub suite: String,
    pub params: Vec<(String, String)>,
    pub samples: Vec<RatioSample>,
    pub excluded: usize,
    pub max_ratio: f64,
    pub median_ratio: f64,
    pub min_ratio: f64,
}

impl RatioReport {
    pub fn from_sides(suite: &str, params: Vec<(String, String)>, sides: Vec<(f64, f64)>) -> Self {
        let samples: Vec<RatioSample> = sides
            .into_iter()
            .enumerate()
            .map(|(id, (lhs, rhs))| RatioSample {
                id,
                lhs,
                rhs,
                ratio: (rhs > DEGENERATE_RHS).then(|| lhs / rhs),
            })
            .collect();
        let mut ratios: Vec<f64> = samples.iter().filter_map(|s| s.ratio).collect();
        ratios.sort_by(f64::total_cmp);
        let median = match ratios.len() {
            0 => f64::NAN,
            m if m % 2 == 1 => ratios[m / 2],
            m => 0.5 * (ratios[m / 2 - 1] + ratios[m / 2]),
        };
        Self {
            suite: suite.to_string(),
            params,
            excluded: samples.len() - ratios.len(),
            max_ratio: ratios.last().copied().unwrap_or(f64::NAN),
            min_ratio: ratios.first().copied().unwrap_or(f64::NAN),
            median_ratio: median,
            samples,
        }
    }

    /// All sides and ratios are finite and nonnegative.
    pub fn all_finite(&self) -> bool {
        self.samples.iter().all(|s| {
            s.lhs.is_finite()
                && s.rhs.is_finite()
                && s.lhs >= 0.0
                && s.rhs >= 0.0
                && s.ratio.is_none_or(f64::is_finite)
        })
    }

    pub fn summary(&self) -> String {
        format!(
            "suite={} samples={} excluded={} max={} median={} min={}",
            self.suite,
            self.samples.len(),
            self.excluded,
            self.max_ratio,
            self.median_ratio,
            self.min_ratio
        )
    }

    /// CSV with `#` header comments, one row per sample, and a trailing
    /// `# summary` comment.
    pub fn write_csv(&self, mut out: impl Write) -> io::Result<()> {
        writeln!(out, "# bq {} verification report", env!("CARGO_PKG_VERSION"))?;
        writeln!(out, "# suite = {}", self.suite)?;
        for (k, v) in &self.params {
            writeln!(out, "# {k} = {v}")?;
        }
        writeln!(
            out,
            "# fields live on the periodic box [0,2pi)^2; whole-plane effects are not represented"
        )?;
        {
            let mut w = csv::Writer::from_writer(&mut out);
            w.write_record(["sample_id", "lhs", "rhs", "ratio"])?;
            for s in &self.samples {
                w.write_record([
                    s.id.to_string(),
                    s.lhs.to_string(),
                    s.rhs.to_string(),
                    s.ratio.map(|r| r.to_string()).unwrap_or_default(),
                ])?;
            }
            w.flush()?;
        }
        writeln!(out, "# summary: {}", self.summary())
    }
}

fn base_params(e: &EnsembleSpec) -> Vec<(String, String)> {
    vec![
        ("seed".into(), e.seed.to_string()),
        ("count".into(), e.count.to_string()),
        ("n".into(), e.n.to_string()),
        ("spectrum_gamma".into(), e.spectrum_gamma.to_string()),
        ("amplitude".into(), e.amplitude.to_string()),
        ("kmax".into(), e.kmax.to_string()),
    ]
}

fn run_ensemble(
    suite: &str,
    ensemble: &EnsembleSpec,
    extra: Vec<(String, String)>,
    sides: impl Fn(&Grid, &DyadicFilterBank, usize) -> (f64, f64) + Sync,
) -> Result<RatioReport, VerifyError> {
    if ensemble.count == 0 {
        return Err(VerifyError::EmptyEnsemble);
    }
    let grid = Grid::new(ensemble.n)?;
    let bank = build_filter_bank(&grid);
    let values: Vec<(f64, f64)> = (0..ensemble.count)
        .into_par_iter()
        .map(|i| sides(&grid, &bank, i))
        .collect();
    let mut params = base_params(ensemble);
    params.extend(extra);
    Ok(RatioReport::from_sides(suite, params, values))
}

fn besov(s: f64, p: f64, r: f64) -> BesovSpec {
    BesovSpec {
        s,
        p,
        r,
        homogeneous: false,
    }
}

fn l2(f: &SpectralField) -> f64 {
    sobolev_norm(f, 0.0, false)
}

fn vector_l2(v: &VectorField<SpectralField>) -> f64 {
    l2(&v.x1).hypot(l2(&v.x2))
}

fn lp(f: &SpectralField, p: f64) -> f64 {
    lp_norm_slice(f.to_physical().values(), p, f.grid().cell_area())
}

/// `‖[R,v]θ‖_{H^s}` against `‖∇v‖_{L²}‖θ‖_{B^{s-1}_{∞,2}} + ‖v‖_{L²}‖θ‖_{L²}`.
pub fn commutator_hs_sides(
    v: &VectorField<SpectralField>,
    theta: &SpectralField,
    s: f64,
    bank: &DyadicFilterBank,
) -> Result<(f64, f64), VerifyError> {
    let c = commutator_riesz(v, theta);
    let lhs = sobolev_norm(&c.x1, s, false).hypot(sobolev_norm(&c.x2, s, false));
    let rhs = gradient_lp_norm(v, 2.0)? * besov_norm(theta, &besov(s - 1.0, f64::INFINITY, 2.0), bank)
        + vector_l2(v) * l2(theta);
    Ok((lhs, rhs))
}

pub fn verify_commutator_hs(ensemble: &EnsembleSpec, s: f64) -> Result<RatioReport, VerifyError> {
    check_param("s", s, s > 0.0 && s < 1.0, "(0, 1)")?;
    run_ensemble("commutator-hs", ensemble, vec![("s".into(), s.to_string())], |g, bank, i| {
        let v = ensemble.velocity(g, i);
        let theta = ensemble.scalar(g, i, 1);
        commutator_hs_sides(&v, &theta, s, bank).expect("valid exponents")
    })
}

/// `‖[R,v·∇]θ‖_{B^0_{p,∞}}` against
/// `‖∇v‖_{L^p}‖θ‖_{B^0_{∞,∞}} + ‖v‖_{L²}‖θ‖_{L²}`.
pub fn commutator_bp_sides(
    v: &VectorField<SpectralField>,
    theta: &SpectralField,
    p: f64,
    bank: &DyadicFilterBank,
) -> Result<(f64, f64), VerifyError> {
    let c = riesz_transport_commutator(v, theta);
    let lhs = besov_norm(&c, &besov(0.0, p, f64::INFINITY), bank);
    let rhs = gradient_lp_norm(v, p)? * besov_norm(theta, &besov(0.0, f64::INFINITY, f64::INFINITY), bank)
        + vector_l2(v) * l2(theta);
    Ok((lhs, rhs))
}

pub fn verify_commutator_bp(ensemble: &EnsembleSpec, p: f64) -> Result<RatioReport, VerifyError> {
    check_param("p", p, p >= 2.0, "[2, inf]")?;
    run_ensemble("commutator-bp", ensemble, vec![("p".into(), p.to_string())], |g, bank, i| {
        let v = ensemble.velocity(g, i);
        let theta = ensemble.scalar(g, i, 1);
        commutator_bp_sides(&v, &theta, p, bank).expect("valid exponents")
    })
}

/// `∫ |x| |h(x)| dx` for the band-`q` kernel `h` with `h ⋆ f = Δ_q f`,
/// using the periodic displacement in `[-π, π)²`.
pub fn kernel_moment(q: i32, bank: &DyadicFilterBank) -> Result<f64, VerifyError> {
    let grid = bank.grid();
    let m = bank.multiplier(q)?;
    let coeffs: Vec<_> = m
        .iter()
        .map(|&w| rustfft::num_complex::Complex64::new(w / (4.0 * PI * PI), 0.0))
        .collect();
    let h = SpectralField::from_coeffs(grid, coeffs)?.to_physical();
    let n = grid.n();
    let wrap = |i: usize| {
        let x = grid.coordinate(i);
        if i >= n / 2 {
            x - 2.0 * PI
        } else {
            x
        }
    };
    let mut total = 0.0;
    for i1 in 0..n {
        for i2 in 0..n {
            total += wrap(i1).hypot(wrap(i2)) * h.values()[i1 * n + i2].abs();
        }
    }
    Ok(total * grid.cell_area())
}

/// `‖Δ_q(fg) - fΔ_q g‖_{L^p}` against `‖xh‖_{L¹}‖∇f‖_{L^p}‖g‖_{L^∞}`.
pub fn kernel_commutator_sides(
    f: &SpectralField,
    g: &SpectralField,
    q: i32,
    p: f64,
    moment: f64,
    bank: &DyadicFilterBank,
) -> Result<(f64, f64), VerifyError> {
    let fp = f.to_physical();
    let gp = g.to_physical();
    let lhs_field = dyadic_block(&fp.mul(&gp).to_spectral(), q, bank)?
        .to_physical()
        .sub(&fp.mul(&dyadic_block(g, q, bank)?.to_physical()));
    let lhs = lp_norm_slice(lhs_field.values(), p, f.grid().cell_area());
    let grad = gradient(f).to_physical();
    let rhs = moment * vector_lp_norm(&grad, p)? * gp.max_abs();
    Ok((lhs, rhs))
}

pub fn verify_kernel_commutator(ensemble: &EnsembleSpec, q: i32, p: f64) -> Result<RatioReport, VerifyError> {
    check_param("p", p, p >= 1.0, "[1, inf]")?;
    let grid = Grid::new(ensemble.n)?;
    let moment = kernel_moment(q, &build_filter_bank(&grid))?;
    let extra = vec![
        ("q".into(), q.to_string()),
        ("p".into(), p.to_string()),
        ("kernel_moment".into(), moment.to_string()),
    ];
    run_ensemble("kernel", ensemble, extra, |g, bank, i| {
        let f = ensemble.scalar(g, i, 0);
        let h = ensemble.scalar(g, i, 1);
        kernel_commutator_sides(&f, &h, q, p, moment, bank).expect("band checked")
    })
}

/// `‖|u|^{β-2}u‖_{Ḣ^s}` against `‖u‖^{β-2}_{L^{2β}}‖u‖_{Ḣ^{s+1-2/β}}`.
pub fn power_map_sides(u: &SpectralField, beta: f64, s: f64) -> (f64, f64) {
    let up = u.to_physical();
    let mapped = up.map(|x| x.abs().powf(beta - 2.0) * x).to_spectral();
    let lhs = sobolev_norm(&mapped, s, true);
    let rhs = lp_norm_slice(up.values(), 2.0 * beta, u.grid().cell_area()).powf(beta - 2.0)
        * sobolev_norm(u, s + 1.0 - 2.0 / beta, true);
    (lhs, rhs)
}

pub fn verify_power_map(ensemble: &EnsembleSpec, beta: f64, s: f64) -> Result<RatioReport, VerifyError> {
    check_param("beta", beta, beta >= 2.0 && beta.is_finite(), "[2, inf)")?;
    check_param("s", s, s > 0.0 && s < 1.0, "(0, 1)")?;
    let extra = vec![("beta".into(), beta.to_string()), ("s".into(), s.to_string())];
    run_ensemble("power-map", ensemble, extra, |g, _, i| {
        power_map_sides(&ensemble.mean_free_scalar(g, i, 0), beta, s)
    })
}

/// `‖v‖_{L²}` against `‖v‖_{B^0_{2,∞}} log(e + ‖v‖_{H¹}/‖v‖_{B^0_{2,∞}})`.
pub fn log_interpolation_sides(v: &SpectralField, bank: &DyadicFilterBank) -> (f64, f64) {
    let b = besov_norm(v, &besov(0.0, 2.0, f64::INFINITY), bank);
    let rhs = if b > 0.0 {
        b * (std::f64::consts::E + sobolev_norm(v, 1.0, false) / b).ln()
    } else {
        0.0
    };
    (l2(v), rhs)
}

pub fn verify_log_interpolation(ensemble: &EnsembleSpec) -> Result<RatioReport, VerifyError> {
    run_ensemble("log-interp", ensemble, Vec::new(), |g, bank, i| {
        log_interpolation_sides(&ensemble.scalar(g, i, 0), bank)
    })
}

/// `∫(|D|Γ_q)|Γ_q|^{r-2}Γ_q dx` against `2^q ‖Γ_q‖^r_{L^r}`, so the ratio
/// is the constant `c` of the lower bound.
pub fn generalized_bernstein_sides(block: &SpectralField, q: i32, r: f64) -> (f64, f64) {
    let area = block.grid().cell_area();
    let gp = block.to_physical();
    let dg = abs_derivative_power(block, 1.0).to_physical();
    let lhs: f64 = dg
        .values()
        .iter()
        .zip(gp.values())
        .map(|(d, g)| d * g.abs().powf(r - 2.0) * g)
        .sum::<f64>()
        * area;
    let rhs = f64::powi(2.0, q) * lp_norm_slice(gp.values(), r, area).powf(r);
    (lhs, rhs)
}

pub fn verify_generalized_bernstein(ensemble: &EnsembleSpec, q: i32, r: f64) -> Result<RatioReport, VerifyError> {
    check_param("q", q as f64, q >= 0, "[0, qmax]")?;
    check_param("r", r, r >= 2.0 && r.is_finite(), "[2, inf)")?;
    let extra = vec![("q".into(), q.to_string()), ("r".into(), r.to_string())];
    let grid = Grid::new(ensemble.n)?;
    build_filter_bank(&grid).multiplier(q)?;
    run_ensemble("gen-bernstein", ensemble, extra, |g, bank, i| {
        let block = dyadic_block(&ensemble.scalar(g, i, 0), q, bank).expect("band checked");
        generalized_bernstein_sides(&block, q, r)
    })
}

/// `‖v·∇f‖_{B^s_{2,∞}}` against `‖v‖_{L²}‖f‖_{B^{1+s}_{∞,1}}`.
pub fn product_transport_sides(
    v: &VectorField<SpectralField>,
    f: &SpectralField,
    s: f64,
    bank: &DyadicFilterBank,
) -> (f64, f64) {
    let lhs = besov_norm(&advect(v, f), &besov(s, 2.0, f64::INFINITY), bank);
    let rhs = vector_l2(v) * besov_norm(f, &besov(1.0 + s, f64::INFINITY, 1.0), bank);
    (lhs, rhs)
}

pub fn verify_product_transport(ensemble: &EnsembleSpec, s: f64) -> Result<RatioReport, VerifyError> {
    check_param("s", s, (-1.0..=0.0).contains(&s), "[-1, 0]")?;
    run_ensemble("product", ensemble, vec![("s".into(), s.to_string())], |g, bank, i| {
        product_transport_sides(&ensemble.velocity(g, i), &ensemble.scalar(g, i, 1), s, bank)
    })
}

/// `‖[Δ_q, v·∇]f‖_{L^p}` against `‖∇v‖_{L^p}‖f‖_{B^0_{∞,∞}}`.
pub fn block_commutator_sides(
    v: &VectorField<SpectralField>,
    f: &SpectralField,
    q: i32,
    p: f64,
    bank: &DyadicFilterBank,
) -> Result<(f64, f64), VerifyError> {
    let lhs = lp(&commutator_block(v, f, q, bank)?, p);
    let rhs = gradient_lp_norm(v, p)? * besov_norm(f, &besov(0.0, f64::INFINITY, f64::INFINITY), bank);
    Ok((lhs, rhs))
}

/// `‖[Δ_q, v·∇]f‖_{L^a}` against `‖∇v‖_{L^r}‖f‖_{B^{2/a}_{a,1}}`.
pub fn block_commutator_besov_sides(
    v: &VectorField<SpectralField>,
    f: &SpectralField,
    q: i32,
    a: f64,
    r: f64,
    bank: &DyadicFilterBank,
) -> Result<(f64, f64), VerifyError> {
    let lhs = lp(&commutator_block(v, f, q, bank)?, a);
    let rhs = gradient_lp_norm(v, r)? * besov_norm(f, &besov(2.0 / a, a, 1.0), bank);
    Ok((lhs, rhs))
}

pub fn verify_block_commutator(ensemble: &EnsembleSpec, q: i32, p: f64) -> Result<RatioReport, VerifyError> {
    check_param("p", p, p >= 1.0, "[1, inf]")?;
    Grid::new(ensemble.n).map(|g| build_filter_bank(&g).multiplier(q).map(|_| ()))??;
    let extra = vec![("q".into(), q.to_string()), ("p".into(), p.to_string())];
    run_ensemble("block-commutator", ensemble, extra, |g, bank, i| {
        let v = ensemble.velocity(g, i);
        block_commutator_sides(&v, &ensemble.scalar(g, i, 1), q, p, bank).expect("band checked")
    })
}

/// Variant with the Besov norm `B^{2/a}_{a,1}` on `f`; the velocity
/// gradient is measured in `L^r`, by default `r = a`.
pub fn verify_block_commutator_besov(
    ensemble: &EnsembleSpec,
    q: i32,
    a: f64,
    r: Option<f64>,
) -> Result<RatioReport, VerifyError> {
    check_param("a", a, a >= 1.0, "[1, inf]")?;
    let r = r.unwrap_or(a);
    check_param("r", r, r >= 1.0, "[1, inf]")?;
    Grid::new(ensemble.n).map(|g| build_filter_bank(&g).multiplier(q).map(|_| ()))??;
    let extra = vec![
        ("q".into(), q.to_string()),
        ("a".into(), a.to_string()),
        ("r".into(), r.to_string()),
    ];
    run_ensemble("block-commutator-besov", ensemble, extra, |g, bank, i| {
        let v = ensemble.velocity(g, i);
        block_commutator_besov_sides(&v, &ensemble.scalar(g, i, 1), q, a, r, bank).expect("band checked")
    })
}

/// Default parameters for each named suite, as used by the command line
/// and the acceptance run.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Suite {
    CommutatorHs,
    CommutatorBp,
    Kernel,
    PowerMap,
    LogInterp,
    GenBernstein,
    Product,
    BlockCommutator,
    BlockCommutatorBesov,
}

impl Suite {
    pub const ALL: [Suite; 9] = [
        Suite::CommutatorHs,
        Suite::CommutatorBp,
        Suite::Kernel,
        Suite::PowerMap,
        Suite::LogInterp,
        Suite::GenBernstein,
        Suite::Product,
        Suite::BlockCommutator,
        Suite::BlockCommutatorBesov,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::CommutatorHs => "commutator-hs",
            Suite::CommutatorBp => "commutator-bp",
            Suite::Kernel => "kernel",
            Suite::PowerMap => "power-map",
            Suite::LogInterp => "log-interp",
            Suite::GenBernstein => "gen-bernstein",
            Suite::Product => "product",
            Suite::BlockCommutator => "block-commutator",
            Suite::BlockCommutatorBesov => "block-commutator-besov",
        }
    }

    pub fn from_name(name: &str) -> Option<Self> {
        Self::ALL.into_iter().find(|s| s.name() == name)
    }

    /// Runs with the default parameters: `s = 1/2`, `p = 2`, `q = 3`,
    /// `β = 4`, `r = 3`, `a = 3`.
    pub fn run_default(self, ensemble: &EnsembleSpec) -> Result<RatioReport, VerifyError> {
        match self {
            Suite::CommutatorHs => verify_commutator_hs(ensemble, 0.5),
            Suite::CommutatorBp => verify_commutator_bp(ensemble, 2.0),
            Suite::Kernel => verify_kernel_commutator(ensemble, 3, 2.0),
            Suite::PowerMap => verify_power_map(ensemble, 4.0, 0.5),
            Suite::LogInterp => verify_log_interpolation(ensemble),
            Suite::GenBernstein => verify_generalized_bernstein(ensemble, 3, 3.0),
            Suite::Product => verify_product_transport(ensemble, -0.5),
            Suite::BlockCommutator => verify_block_commutator(ensemble, 3, 2.0),
            Suite::BlockCommutatorBesov => verify_block_commutator_besov(ensemble, 3, 3.0, None),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::spectral::{forward_transform, PhysicalField};

    fn small(count: usize) -> EnsembleSpec {
        EnsembleSpec {
            kmax: 8,
            ..EnsembleSpec::new(42, count, 64)
        }
    }

    fn constant_velocity(g: &Grid) -> VectorField<SpectralField> {
        VectorField::new(
            forward_transform(&PhysicalField::from_fn(g, |_, _| 1.0)).unwrap(),
            forward_transform(&PhysicalField::from_fn(g, |_, _| -0.5)).unwrap(),
        )
    }

    fn setup() -> (Grid, DyadicFilterBank) {
        let g = Grid::new(64).unwrap();
        let b = build_filter_bank(&g);
        (g, b)
    }

    #[test]
    fn degenerate_inputs_give_zero_lhs() {
        let (g, bank) = setup();
        let e = small(1);
        let theta = e.scalar(&g, 0, 1);
        let v = e.velocity(&g, 0);
        let cv = constant_velocity(&g);
        let zero = SpectralField::zeros(&g);
        assert!(commutator_hs_sides(&cv, &theta, 0.5, &bank).unwrap().0 < 1e-13);
        assert_eq!(commutator_hs_sides(&v, &zero, 0.5, &bank).unwrap().0, 0.0);
        assert!(commutator_bp_sides(&cv, &theta, 2.0, &bank).unwrap().0 < 1e-12);
        let one = forward_transform(&PhysicalField::from_fn(&g, |_, _| 1.0)).unwrap();
        let m = kernel_moment(3, &bank).unwrap();
        assert!(kernel_commutator_sides(&one, &theta, 3, 2.0, m, &bank).unwrap().0 < 1e-13);
        assert_eq!(kernel_commutator_sides(&theta, &zero, 3, 2.0, m, &bank).unwrap().0, 0.0);
        assert_eq!(power_map_sides(&zero, 4.0, 0.5), (0.0, 0.0));
        assert!(product_transport_sides(&v, &one, -0.5, &bank).0 < 1e-13);
        assert!(block_commutator_sides(&cv, &theta, 3, 2.0, &bank).unwrap().0 < 1e-12);
        assert_eq!(block_commutator_sides(&v, &zero, 3, 2.0, &bank).unwrap().0, 0.0);
        assert_eq!(log_interpolation_sides(&zero, &bank), (0.0, 0.0));
    }

    #[test]
    fn power_map_identity_at_beta_two() {
        let (g, _) = setup();
        let u = small(1).mean_free_scalar(&g, 0, 0);
        let (lhs, rhs) = power_map_sides(&u, 2.0, 0.5);
        assert!((lhs / rhs - 1.0).abs() < 1e-12);
    }

    #[test]
    fn bernstein_parseval_case() {
        let (g, bank) = setup();
        let e = small(4);
        for i in 0..4 {
            let block = dyadic_block(&e.scalar(&g, i, 0), 2, &bank).unwrap();
            let (lhs, rhs) = generalized_bernstein_sides(&block, 2, 2.0);
            let expected = sobolev_norm(&block, 0.5, true).powi(2);
            assert!((lhs - expected).abs() < 1e-10 * expected);
            let c = lhs / rhs;
            assert!((1.0..=4.0).contains(&c), "c = {c}");
        }
    }

    #[test]
    fn product_transport_single_mode() {
        let (g, bank) = setup();
        let v = VectorField::new(
            forward_transform(&PhysicalField::from_fn(&g, |_, _| 1.0)).unwrap(),
            SpectralField::zeros(&g),
        );
        let f = forward_transform(&PhysicalField::from_fn(&g, |x, _| (4.0 * x).cos())).unwrap();
        for s in [-1.0, -0.5, 0.0] {
            // only band 1 sees |k| = 4, with weight 1:
            // lhs = 2^s · 4 · π√2, rhs = 2π · 2^{1+s}
            let (lhs, rhs) = product_transport_sides(&v, &f, s, &bank);
            assert!((lhs - f64::powf(2.0, s) * 4.0 * PI * 2f64.sqrt()).abs() < 1e-10);
            assert!((rhs - 2.0 * PI * f64::powf(2.0, 1.0 + s)).abs() < 1e-10);
        }
    }

    #[test]
    fn log_interpolation_single_band() {
        let (g, bank) = setup();
        // |k| = 8 sits where phi_2 = 1 and the other bands vanish
        let v = forward_transform(&PhysicalField::from_fn(&g, |x, _| (8.0 * x).sin())).unwrap();
        let (lhs, rhs) = log_interpolation_sides(&v, &bank);
        let expected = 1.0 / (std::f64::consts::E + 65f64.sqrt()).ln();
        assert!((lhs / rhs - expected).abs() < 1e-12);
        assert!(lhs / rhs <= 4.0);
    }

    #[test]
    fn kernel_moment_scales_like_inverse_frequency() {
        let (_, bank) = setup();
        let m2 = kernel_moment(2, &bank).unwrap();
        let m3 = kernel_moment(3, &bank).unwrap();
        assert!(m2 > 0.0 && m3 > 0.0);
        assert!((m2 / m3 - 2.0).abs() < 0.2, "{m2} {m3}");
    }

    #[test]
    fn ratio_invariant_under_scaling_theta() {
        let (g, bank) = setup();
        let e = small(1);
        let v = e.velocity(&g, 0);
        let theta = e.scalar(&g, 0, 1);
        let (a, b) = commutator_hs_sides(&v, &theta, 0.5, &bank).unwrap();
        let (c, d) = commutator_hs_sides(&v, &theta.scale(3.7), 0.5, &bank).unwrap();
        assert!(((a / b) / (c / d) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn ensembles_are_deterministic_and_finite() {
        let e = small(6);
        for suite in Suite::ALL {
            let a = suite.run_default(&e).unwrap();
            let b = suite.run_default(&e).unwrap();
            assert_eq!(a, b);
            assert!(a.all_finite(), "{}", suite.name());
            assert_eq!(a.samples.len(), 6);
            assert!(a.max_ratio.is_finite());
        }
        assert_eq!(Suite::from_name("kernel"), Some(Suite::Kernel));
        assert_eq!(Suite::from_name("nope"), None);
    }

    #[test]
    fn parameter_errors() {
        let e = small(2);
        assert!(verify_commutator_hs(&e, 1.0).is_err());
        assert!(verify_commutator_bp(&e, 1.5).is_err());
        assert!(verify_power_map(&e, 1.0, 0.5).is_err());
        assert!(verify_product_transport(&e, 0.5).is_err());
        assert!(verify_generalized_bernstein(&e, 3, 1.0).is_err());
        assert!(verify_block_commutator(&e, 99, 2.0).is_err());
        assert!(matches!(
            verify_log_interpolation(&EnsembleSpec { count: 0, ..e }),
            Err(VerifyError::EmptyEnsemble)
        ));
    }

    #[test]
    fn excluded_samples_are_counted() {
        let r = RatioReport::from_sides("x", vec![], vec![(1.0, 2.0), (0.0, 0.0), (3.0, 1.0)]);
        assert_eq!(r.excluded, 1);
        assert_eq!(r.max_ratio, 3.0);
        assert_eq!(r.median_ratio, 1.75);
        let mut buf = Vec::new();
        r.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        assert!(text.contains("sample_id,lhs,rhs,ratio\n0,1,2,0.5\n1,0,0,\n2,3,1,3\n"));
        assert!(text.trim_end().ends_with("min=0.5"));
    }
}
