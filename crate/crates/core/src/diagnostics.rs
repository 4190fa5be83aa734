//! Norm tracking along trajectories and the checks built on top of it.

use std::f64::consts::PI;

use thiserror::Error;

use crate::dynamics::{gamma, SimState};
use crate::fit::{fit_integrated_exponential, minimal_envelope_constant, Envelope, ExponentialFit};
use crate::littlewood_paley::{besov_norm, BesovSpec, DyadicFilterBank};
use crate::spectral::{
    inner_product, lp_norm_slice, partial_derivative, sobolev_norm, Axis, SpectralField, VectorField,
};

/// Relative tolerance of the `L^p` maximum-principle and energy checks.
pub const DRIFT_TOLERANCE: f64 = 1e-3;
/// Minimum `R²` for the `Γ` envelope fit.
pub const ENVELOPE_R_SQUARED: f64 = 0.95;
/// Largest growth rate searched by the envelope fit.
pub const MAX_FIT_RATE: f64 = 50.0;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum DiagnosticsError {
    #[error("temperature norms are tracked for p = 2, 4, inf only (got {0})")]
    UntrackedExponent(f64),
    #[error("empty diagnostics series")]
    EmptySeries,
}

/// One time slice of tracked quantities. `*_cum` columns are trapezoid
/// integrals from the start of the run.
#[derive(Clone, Copy, Debug, PartialEq, Default)]
pub struct DiagnosticsRecord {
    pub t: f64,
    pub l2_v: f64,
    pub hhalf_v_sq_cum: f64,
    pub l2_theta: f64,
    pub l4_theta: f64,
    pub linf_theta: f64,
    pub l2_omega: f64,
    pub lr_omega: f64,
    pub l2_gamma: f64,
    pub hhalf_gamma_sq_cum: f64,
    pub besov_theta: f64,
    pub besov_omega_cum: f64,
    pub lip_v: f64,
    pub v_t: f64,
    pub energy_residual: f64,
    pub hhalf_omega_sq_cum: f64,
}

impl DiagnosticsRecord {
    pub const COLUMNS: [&'static str; 16] = [
        "t",
        "l2_v",
        "hhalf_v_sq_cum",
        "l2_theta",
        "l4_theta",
        "linf_theta",
        "l2_omega",
        "lr_omega",
        "l2_gamma",
        "hhalf_gamma_sq_cum",
        "besov_theta",
        "besov_omega_cum",
        "lip_v",
        "V_t",
        "energy_residual",
        "hhalf_omega_sq_cum",
    ];

    pub fn values(&self) -> [f64; 16] {
        [
            self.t,
            self.l2_v,
            self.hhalf_v_sq_cum,
            self.l2_theta,
            self.l4_theta,
            self.linf_theta,
            self.l2_omega,
            self.lr_omega,
            self.l2_gamma,
            self.hhalf_gamma_sq_cum,
            self.besov_theta,
            self.besov_omega_cum,
            self.lip_v,
            self.v_t,
            self.energy_residual,
            self.hhalf_omega_sq_cum,
        ]
    }

    pub fn from_values(v: [f64; 16]) -> Self {
        Self {
            t: v[0],
            l2_v: v[1],
            hhalf_v_sq_cum: v[2],
            l2_theta: v[3],
            l4_theta: v[4],
            linf_theta: v[5],
            l2_omega: v[6],
            lr_omega: v[7],
            l2_gamma: v[8],
            hhalf_gamma_sq_cum: v[9],
            besov_theta: v[10],
            besov_omega_cum: v[11],
            lip_v: v[12],
            v_t: v[13],
            energy_residual: v[14],
            hhalf_omega_sq_cum: v[15],
        }
    }

    pub fn is_finite(&self) -> bool {
        self.values().iter().all(|v| v.is_finite())
    }
}

/// Integrands sampled at one instant.
#[derive(Clone, Copy, Debug)]
struct Instant {
    t: f64,
    energy: f64,
    hhalf_v_sq: f64,
    hhalf_gamma_sq: f64,
    hhalf_omega_sq: f64,
    besov_omega: f64,
    lip: f64,
    // ‖v‖²_{Ḣ^{α/2}} - ∫θ v2
    budget: f64,
}

/// `Σ |k|^{2s} |c_k|²` with the box factor, i.e. `‖f‖²_{Ḣ^s}`.
fn homogeneous_sq(f: &SpectralField, s: f64) -> f64 {
    let grid = f.grid();
    let sum: f64 = f
        .coeffs()
        .iter()
        .enumerate()
        .map(|(idx, c)| {
            let (k1, k2) = grid.mode(idx);
            let k_sq = (k1 * k1 + k2 * k2) as f64;
            if k_sq == 0.0 {
                0.0
            } else {
                k_sq.powf(s) * c.norm_sqr()
            }
        })
        .sum();
    4.0 * PI * PI * sum
}

fn vector_sq(v: &VectorField<SpectralField>, s: f64) -> f64 {
    homogeneous_sq(&v.x1, s) + homogeneous_sq(&v.x2, s)
}

/// Grid max over the four first derivatives of `v`.
pub fn lipschitz_seminorm(v: &VectorField<SpectralField>) -> f64 {
    [
        partial_derivative(&v.x1, Axis::X1),
        partial_derivative(&v.x1, Axis::X2),
        partial_derivative(&v.x2, Axis::X1),
        partial_derivative(&v.x2, Axis::X2),
    ]
    .iter()
    .map(|d| d.to_physical().max_abs())
    .fold(0.0, f64::max)
}

/// Computes [`DiagnosticsRecord`]s for a sequence of states, carrying the
/// running time integrals.
#[derive(Clone, Debug)]
pub struct Recorder {
    bank: DyadicFilterBank,
    lr_exponent: f64,
    previous: Option<(Instant, DiagnosticsRecord)>,
}

impl Recorder {
    pub fn new(bank: DyadicFilterBank, lr_exponent: f64) -> Self {
        Self {
            bank,
            lr_exponent,
            previous: None,
        }
    }

    pub fn record(&mut self, state: &SimState) -> DiagnosticsRecord {
        let area = state.grid().cell_area();
        let v = state.velocity();
        let theta = state.theta_hat.to_physical();
        let omega = state.omega_hat.to_physical();
        let g = gamma(state);
        let besov_0_inf_1 = BesovSpec {
            s: 0.0,
            p: f64::INFINITY,
            r: 1.0,
            homogeneous: false,
        };

        let energy = vector_sq(&v, 0.0);
        let now = Instant {
            t: state.t,
            energy,
            hhalf_v_sq: vector_sq(&v, 0.5),
            hhalf_gamma_sq: homogeneous_sq(&g, 0.5),
            hhalf_omega_sq: homogeneous_sq(&state.omega_hat, 0.5),
            besov_omega: besov_norm(&state.omega_hat, &besov_0_inf_1, &self.bank),
            lip: lipschitz_seminorm(&v),
            budget: vector_sq(&v, 0.5 * state.alpha) - inner_product(&state.theta_hat, &v.x2),
        };

        let mut rec = DiagnosticsRecord {
            t: state.t,
            l2_v: energy.sqrt(),
            l2_theta: lp_norm_slice(theta.values(), 2.0, area),
            l4_theta: lp_norm_slice(theta.values(), 4.0, area),
            linf_theta: lp_norm_slice(theta.values(), f64::INFINITY, area),
            l2_omega: lp_norm_slice(omega.values(), 2.0, area),
            lr_omega: lp_norm_slice(omega.values(), self.lr_exponent, area),
            l2_gamma: sobolev_norm(&g, 0.0, false),
            besov_theta: besov_norm(&state.theta_hat, &besov_0_inf_1, &self.bank),
            lip_v: now.lip,
            ..DiagnosticsRecord::default()
        };

        if let Some((prev, prev_rec)) = &self.previous {
            let dt = now.t - prev.t;
            let trap = |a: f64, b: f64| 0.5 * dt * (a + b);
            rec.hhalf_v_sq_cum = prev_rec.hhalf_v_sq_cum + trap(prev.hhalf_v_sq, now.hhalf_v_sq);
            rec.hhalf_gamma_sq_cum =
                prev_rec.hhalf_gamma_sq_cum + trap(prev.hhalf_gamma_sq, now.hhalf_gamma_sq);
            rec.hhalf_omega_sq_cum =
                prev_rec.hhalf_omega_sq_cum + trap(prev.hhalf_omega_sq, now.hhalf_omega_sq);
            rec.besov_omega_cum =
                prev_rec.besov_omega_cum + trap(prev.besov_omega, now.besov_omega);
            rec.v_t = prev_rec.v_t + trap(prev.lip, now.lip);
            rec.energy_residual = if dt > 0.0 {
                0.5 * (now.energy - prev.energy) / dt + 0.5 * (prev.budget + now.budget)
            } else {
                0.0
            };
        }
        self.previous = Some((now, rec));
        rec
    }
}

fn tracked_theta(rec: &DiagnosticsRecord, p: f64) -> Result<f64, DiagnosticsError> {
    if p == 2.0 {
        Ok(rec.l2_theta)
    } else if p == 4.0 {
        Ok(rec.l4_theta)
    } else if p.is_infinite() && p > 0.0 {
        Ok(rec.linf_theta)
    } else {
        Err(DiagnosticsError::UntrackedExponent(p))
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct MaxPrincipleReport {
    pub p: f64,
    pub initial: f64,
    /// `max_t ‖θ(t)‖/‖θ0‖ - 1`
    pub drift: f64,
    pub passed: bool,
}

/// Non-increase of `‖θ(t)‖_{L^p}` up to [`DRIFT_TOLERANCE`] relative drift.
pub fn check_max_principle(
    series: &[DiagnosticsRecord],
    p: f64,
) -> Result<MaxPrincipleReport, DiagnosticsError> {
    let first = series.first().ok_or(DiagnosticsError::EmptySeries)?;
    let initial = tracked_theta(first, p)?;
    let mut drift = 0.0f64;
    for rec in series {
        let value = tracked_theta(rec, p)?;
        let d = if initial > 0.0 {
            value / initial - 1.0
        } else if value == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        drift = drift.max(if d.is_nan() { f64::INFINITY } else { d });
    }
    Ok(MaxPrincipleReport {
        p,
        initial,
        drift,
        passed: drift <= DRIFT_TOLERANCE,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct EnergyReport {
    /// Largest `‖v(t)‖ / (‖v0‖ + t‖θ0‖) - 1` over the series.
    pub max_excess: f64,
    /// Smallest `C0` with `‖v‖² + ∫‖v‖²_{Ḣ^{1/2}} <= C0 (1 + t²)`.
    pub quadratic_c0: f64,
    /// Largest `|energy_residual|` over the series.
    pub max_energy_residual: f64,
    pub passed: bool,
}

/// `‖v(t)‖_{L²} <= ‖v0‖_{L²} + t‖θ0‖_{L²}` at every sample, relative
/// tolerance [`DRIFT_TOLERANCE`].
pub fn check_energy(series: &[DiagnosticsRecord]) -> Result<EnergyReport, DiagnosticsError> {
    let first = series.first().ok_or(DiagnosticsError::EmptySeries)?;
    let mut max_excess = f64::NEG_INFINITY;
    let mut passed = true;
    let mut quadratic_c0 = 0.0f64;
    let mut max_residual = 0.0f64;
    for rec in series {
        let bound = first.l2_v + (rec.t - first.t) * first.l2_theta;
        if !(rec.l2_v <= bound * (1.0 + DRIFT_TOLERANCE)) {
            passed = false;
        }
        let excess = if bound > 0.0 {
            rec.l2_v / bound - 1.0
        } else if rec.l2_v == 0.0 {
            0.0
        } else {
            f64::INFINITY
        };
        max_excess = max_excess.max(excess);
        quadratic_c0 = quadratic_c0.max((rec.l2_v.powi(2) + rec.hhalf_v_sq_cum) / (1.0 + rec.t * rec.t));
        max_residual = max_residual.max(rec.energy_residual.abs());
    }
    Ok(EnergyReport {
        max_excess,
        quadratic_c0,
        max_energy_residual: max_residual,
        passed,
    })
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct SmoothingReport {
    /// Integrated-exponential fit of `∫‖Γ‖²_{Ḣ^{1/2}}`.
    pub gamma_fit: Option<ExponentialFit>,
    /// The same fit applied to `∫‖ω‖²_{Ḣ^{1/2}}`, for contrast.
    pub omega_fit: Option<ExponentialFit>,
    /// Smallest `C0` with `‖ω(t)‖² + ∫‖Γ‖²_{Ḣ^{1/2}} <= C0 e^{C0 t}`.
    pub envelope_c0: Option<f64>,
    pub passed: bool,
}

fn fit_column(series: &[DiagnosticsRecord], column: impl Fn(&DiagnosticsRecord) -> f64) -> Option<ExponentialFit> {
    let t0 = series.first()?.t;
    let ts: Vec<f64> = series.iter().map(|r| r.t - t0).collect();
    let ys: Vec<f64> = series.iter().map(column).collect();
    fit_integrated_exponential(&ts, &ys, MAX_FIT_RATE)
}

/// Fits `∫₀ᵗ‖Γ‖²_{Ḣ^{1/2}}` by the time integral of a single exponential,
/// `A (e^{Bt} - 1)/B`; passes when the fit reaches [`ENVELOPE_R_SQUARED`].
pub fn check_gamma_smoothing(series: &[DiagnosticsRecord]) -> Result<SmoothingReport, DiagnosticsError> {
    if series.is_empty() {
        return Err(DiagnosticsError::EmptySeries);
    }
    let gamma_fit = fit_column(series, |r| r.hhalf_gamma_sq_cum);
    let omega_fit = fit_column(series, |r| r.hhalf_omega_sq_cum);
    let envelope: Vec<(f64, f64)> = series
        .iter()
        .map(|r| (r.t, r.l2_omega.powi(2) + r.hhalf_gamma_sq_cum))
        .collect();
    let envelope_c0 = minimal_envelope_constant(&envelope, Envelope::SingleExponential);
    let passed = envelope_c0.is_some()
        && gamma_fit.is_some_and(|f| f.r_squared >= ENVELOPE_R_SQUARED);
    Ok(SmoothingReport {
        gamma_fit,
        omega_fit,
        envelope_c0,
        passed,
    })
}

/// `∫₀ᵗ ‖e^{-|D|^α τ}Γ0‖²_{Ḣ^{1/2}} dτ`, summed mode by mode.
pub fn linear_gamma_smoothing(gamma0: &SpectralField, alpha: f64, t: f64) -> f64 {
    let grid = gamma0.grid();
    let sum: f64 = gamma0
        .coeffs()
        .iter()
        .enumerate()
        .map(|(idx, c)| {
            let (k1, k2) = grid.mode(idx);
            let k = ((k1 * k1 + k2 * k2) as f64).sqrt();
            if k == 0.0 {
                return 0.0;
            }
            let rate = k.powf(alpha);
            k * c.norm_sqr() * -(-2.0 * rate * t).exp_m1() / (2.0 * rate)
        })
        .sum();
    4.0 * PI * PI * sum
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LipschitzReport {
    /// `C0` of the tightest `C0 e^{C0 t}` above `∫‖ω‖_{B^0_{∞,1}}`.
    pub besov_omega_phi1: Option<f64>,
    /// `C0` of the tightest `C0 e^{C0 t}` above `V(t) = ∫‖∇v‖_{L^∞}`.
    pub v_t_phi1: Option<f64>,
    /// `C0` of the tightest `C0 e^{e^{C0 t}}` above `‖ω(t)‖_{L^r}`.
    pub lr_omega_phi2: Option<f64>,
    /// Largest relative increase of `‖ω‖_{L^r}` between samples.
    pub lr_omega_max_increase: f64,
    pub passed: bool,
}

/// Finiteness of the Lipschitz-type quantities and their fitted envelopes.
pub fn check_lipschitz(series: &[DiagnosticsRecord]) -> Result<LipschitzReport, DiagnosticsError> {
    if series.is_empty() {
        return Err(DiagnosticsError::EmptySeries);
    }
    let column = |f: fn(&DiagnosticsRecord) -> f64| -> Vec<(f64, f64)> {
        series.iter().map(|r| (r.t, f(r))).collect()
    };
    let besov_omega_phi1 =
        minimal_envelope_constant(&column(|r| r.besov_omega_cum), Envelope::SingleExponential);
    let v_t_phi1 = minimal_envelope_constant(&column(|r| r.v_t), Envelope::SingleExponential);
    let lr_omega_phi2 =
        minimal_envelope_constant(&column(|r| r.lr_omega), Envelope::DoubleExponential);
    let lr_omega_max_increase = series
        .windows(2)
        .map(|w| {
            if w[0].lr_omega > 0.0 {
                w[1].lr_omega / w[0].lr_omega - 1.0
            } else if w[1].lr_omega == 0.0 {
                0.0
            } else {
                f64::INFINITY
            }
        })
        .fold(0.0, f64::max);
    let passed = besov_omega_phi1.is_some()
        && v_t_phi1.is_some()
        && lr_omega_phi2.is_some()
        && series.iter().all(DiagnosticsRecord::is_finite);
    Ok(LipschitzReport {
        besov_omega_phi1,
        v_t_phi1,
        lr_omega_phi2,
        lr_omega_max_increase,
        passed,
    })
}

/// Modulus of continuity in the Osgood inequality.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Modulus {
    /// `μ(r) = r`
    Linear,
    /// `μ(r) = r(1 - log r)`
    LogLinear,
}

/// Piecewise-constant coefficient: `values[i]` on `[breaks[i], breaks[i+1])`,
/// with the last value extended to the right and zero before `breaks[0]`.
#[derive(Clone, Debug, PartialEq)]
pub struct PiecewiseConstant {
    pub breaks: Vec<f64>,
    pub values: Vec<f64>,
}

impl PiecewiseConstant {
    pub fn constant(value: f64) -> Self {
        Self {
            breaks: vec![0.0],
            values: vec![value],
        }
    }

    /// `∫₀ᵗ γ`.
    pub fn integral(&self, t: f64) -> f64 {
        let mut total = 0.0;
        for (i, &v) in self.values.iter().enumerate() {
            let start = self.breaks[i].max(0.0);
            let end = self.breaks.get(i + 1).copied().unwrap_or(f64::INFINITY).min(t);
            if end > start {
                total += v * (end - start);
            }
        }
        total
    }
}

/// Upper bound for `ρ(t)` when `ρ(t) <= a + ∫₀ᵗ γ μ(ρ)`. `None` marks a
/// vacuous bound: the log-linear case needs `a <= e^{1 - exp∫γ}`.
pub fn osgood_bound(a: f64, gamma: &PiecewiseConstant, modulus: Modulus, times: &[f64]) -> Vec<Option<f64>> {
    times
        .iter()
        .map(|&t| {
            let g = gamma.integral(t);
            match modulus {
                Modulus::Linear => Some(a * g.exp()),
                Modulus::LogLinear => {
                    if a == 0.0 {
                        Some(0.0)
                    } else if a <= (1.0 - g.exp()).exp() {
                        let e = (-g).exp();
                        Some(a.powf(e) * (1.0 - e).exp())
                    } else {
                        None
                    }
                }
            }
        })
        .collect()
}
