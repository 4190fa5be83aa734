//! Two-trajectory continuous-dependence experiment.
//!
//! A base state and a seeded perturbation of it are evolved side by side and
//! compared in
//!
//! ```text
//! X(t) = ‖θ1 - θ2‖_{B^{-1}_{2,∞}} + ‖v1 - v2‖_{B^0_{2,∞}}.
//! ```
//!
//! Repeating with perturbation sizes `δ` and `δ/4` gives a Hölder exponent
//! `γ(t) = log(X_δ(t)/X_{δ/4}(t)) / log(X_δ(0)/X_{δ/4}(0))`.

use crate::dynamics::{SimError, SimState};
use crate::littlewood_paley::{besov_norm, besov_norm_vector, build_filter_bank, BesovSpec, DyadicFilterBank};
use crate::random::{random_scalar, FieldSpectrum, SampleKey};
use crate::run::{evolve, StepSize};
use crate::spectral::{biot_savart_unchecked, dealias, SpectralField};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum PerturbedFields {
    Both,
    VorticityOnly,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilitySettings {
    /// A CFL step is frozen to its value at the base initial state so both
    /// trajectories share the same time grid.
    pub step: StepSize,
    pub t_end: f64,
    /// Number of evenly spaced comparison times after `t = 0`.
    pub samples: usize,
    pub seed: u64,
    pub fields: PerturbedFields,
}

fn b0_2_inf() -> BesovSpec {
    BesovSpec {
        s: 0.0,
        p: 2.0,
        r: f64::INFINITY,
        homogeneous: false,
    }
}

fn bminus1_2_inf() -> BesovSpec {
    BesovSpec { s: -1.0, ..b0_2_inf() }
}

/// `X` between two states on the same grid.
pub fn separation(a: &SimState, b: &SimState, bank: &DyadicFilterBank) -> f64 {
    let dtheta = a.theta_hat.sub(&b.theta_hat);
    let dv = biot_savart_unchecked(&a.omega_hat.sub(&b.omega_hat));
    besov_norm(&dtheta, &bminus1_2_inf(), bank) + besov_norm_vector(&dv, &b0_2_inf(), bank)
}

/// Seeded perturbation `(δω, δθ)` with `‖δv‖_{B^0_{2,∞}} = δ` and, when
/// the temperature is perturbed, `‖δθ‖_{B^0_{2,∞}} = δ`.
pub fn perturbation(
    base: &SimState,
    seed: u64,
    delta: f64,
    fields: PerturbedFields,
    bank: &DyadicFilterBank,
) -> (SpectralField, SpectralField) {
    let grid = base.grid();
    let spectrum = FieldSpectrum::default();
    let omega = dealias(&random_scalar(grid, SampleKey::new(seed, 0, 0), &spectrum, true));
    let v_size = besov_norm_vector(&biot_savart_unchecked(&omega), &b0_2_inf(), bank);
    let d_omega = omega.scale(delta / v_size);
    let d_theta = match fields {
        PerturbedFields::VorticityOnly => SpectralField::zeros(grid),
        PerturbedFields::Both => {
            let theta = dealias(&random_scalar(grid, SampleKey::new(seed, 0, 1), &spectrum, true));
            let size = besov_norm(&theta, &b0_2_inf(), bank);
            theta.scale(delta / size)
        }
    };
    (d_omega, d_theta)
}

#[derive(Clone, Debug, PartialEq)]
pub struct SeparationSeries {
    pub delta: f64,
    pub times: Vec<f64>,
    pub separation: Vec<f64>,
}

fn sample_times(settings: &StabilitySettings) -> Vec<f64> {
    let m = settings.samples.max(1);
    (1..=m)
        .map(|i| settings.t_end * i as f64 / m as f64)
        .collect()
}

fn frozen_step(base: &SimState, step: StepSize) -> StepSize {
    StepSize::Fixed(step.dt(base))
}

fn trajectory(
    start: &SimState,
    step: StepSize,
    t_end: f64,
    times: &[f64],
) -> Result<Vec<SimState>, SimError> {
    let mut out = vec![start.clone()];
    evolve(start, step, t_end, times, |s, _| {
        if times.contains(&s.t) {
            out.push(s.clone());
        }
    })?;
    Ok(out)
}

fn separation_from(
    base_path: &[SimState],
    base: &SimState,
    delta: f64,
    settings: &StabilitySettings,
    step: StepSize,
    times: &[f64],
    bank: &DyadicFilterBank,
) -> Result<SeparationSeries, SimError> {
    let (d_omega, d_theta) = perturbation(base, settings.seed, delta, settings.fields, bank);
    let mut start = base.clone();
    start.omega_hat.add_assign(&d_omega);
    start.theta_hat.add_assign(&d_theta);
    let path = trajectory(&start, step, settings.t_end, times)?;
    let mut all_times = vec![base.t];
    all_times.extend_from_slice(times);
    Ok(SeparationSeries {
        delta,
        times: all_times,
        separation: base_path
            .iter()
            .zip(&path)
            .map(|(a, b)| separation(a, b, bank))
            .collect(),
    })
}

/// `X(t)` for one perturbation size, at `t = 0` and the sample times.
pub fn separation_series(
    base: &SimState,
    delta: f64,
    settings: &StabilitySettings,
) -> Result<SeparationSeries, SimError> {
    let bank = build_filter_bank(base.grid());
    let step = frozen_step(base, settings.step);
    let times = sample_times(settings);
    let base_path = trajectory(base, step, settings.t_end, &times)?;
    separation_from(&base_path, base, delta, settings, step, &times, &bank)
}

#[derive(Clone, Debug, PartialEq)]
pub struct StabilityReport {
    pub coarse: SeparationSeries,
    pub fine: SeparationSeries,
    /// `γ(t)` at each sample time after 0.
    pub exponents: Vec<f64>,
    /// `γ` at the final time.
    pub exponent: f64,
    pub passed: bool,
}

/// Runs the `δ` / `δ/4` pair and fits the exponent; passes when every
/// `γ(t)` is positive and finite.
pub fn stability_experiment(
    base: &SimState,
    delta: f64,
    settings: &StabilitySettings,
) -> Result<StabilityReport, SimError> {
    let bank = build_filter_bank(base.grid());
    let step = frozen_step(base, settings.step);
    let times = sample_times(settings);
    let base_path = trajectory(base, step, settings.t_end, &times)?;
    let coarse = separation_from(&base_path, base, delta, settings, step, &times, &bank)?;
    let fine = separation_from(&base_path, base, delta / 4.0, settings, step, &times, &bank)?;
    let initial = (coarse.separation[0] / fine.separation[0]).ln();
    let exponents: Vec<f64> = coarse
        .separation
        .iter()
        .zip(&fine.separation)
        .skip(1)
        .map(|(a, b)| (a / b).ln() / initial)
        .collect();
    let exponent = exponents.last().copied().unwrap_or(f64::NAN);
    let passed = !exponents.is_empty() && exponents.iter().all(|g| g.is_finite() && *g > 0.0);
    Ok(StabilityReport {
        coarse,
        fine,
        exponents,
        exponent,
        passed,
    })
}

/// Largest relative increase between consecutive entries.
pub fn max_relative_increase(series: &[f64]) -> f64 {
    series
        .windows(2)
        .map(|w| if w[0] > 0.0 { w[1] / w[0] - 1.0 } else if w[1] > 0.0 { f64::INFINITY } else { 0.0 })
        .fold(f64::NEG_INFINITY, f64::max)
}
