//! Time integration of the vorticity–temperature system
//!
//! ```text
//! ∂tω + v·∇ω + |D|^α ω = ∂1θ,    ∂tθ + v·∇θ = 0,    v = ∇^⊥Δ^{-1}ω
//! ```
//!
//! with an integrating-factor RK4 scheme: the dissipation is applied exactly
//! per mode through `e^{-|k|^α dt}`, the rest goes through classical RK4.

use rustfft::num_complex::Complex64;
use thiserror::Error;

use crate::spectral::{
    abs_derivative_power, advect, advect_physical, biot_savart_unchecked, partial_derivative,
    riesz, sobolev_norm, Axis, Grid, SpectralError, SpectralField, VectorField,
};
use crate::littlewood_paley::riesz_transport_commutator;

/// Grid-max velocity beyond which a run is declared blown up.
pub const BLOW_UP_VELOCITY: f64 = 1e6;
/// Velocity floor in the CFL formula.
pub const CFL_VELOCITY_FLOOR: f64 = 1e-8;

#[derive(Debug, Error)]
pub enum SimError {
    #[error("solution blew up at t = {t}")]
    BlowUp { t: f64, last_good: Box<SimState> },
    #[error("time step must be positive and finite, got {0}")]
    InvalidTimeStep(f64),
    #[error("vorticity and temperature live on different grids")]
    GridMismatch,
    #[error(transparent)]
    Spectral(#[from] SpectralError),
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimState {
    pub t: f64,
    pub omega_hat: SpectralField,
    pub theta_hat: SpectralField,
    pub alpha: f64,
}

impl SimState {
    pub fn new(
        omega_hat: SpectralField,
        theta_hat: SpectralField,
        alpha: f64,
    ) -> Result<Self, SimError> {
        if omega_hat.grid() != theta_hat.grid() {
            return Err(SimError::GridMismatch);
        }
        if !(alpha > 0.0 && alpha <= 2.0) {
            return Err(SpectralError::InvalidAlpha(alpha).into());
        }
        Ok(Self {
            t: 0.0,
            omega_hat,
            theta_hat,
            alpha,
        })
    }

    pub fn zero(grid: &Grid, alpha: f64) -> Self {
        Self {
            t: 0.0,
            omega_hat: SpectralField::zeros(grid),
            theta_hat: SpectralField::zeros(grid),
            alpha,
        }
    }

    pub fn grid(&self) -> &Grid {
        self.omega_hat.grid()
    }

    pub fn velocity(&self) -> VectorField<SpectralField> {
        biot_savart_unchecked(&self.omega_hat)
    }

    pub fn is_finite(&self) -> bool {
        self.t.is_finite() && self.omega_hat.is_finite() && self.theta_hat.is_finite()
    }
}

/// Right-hand side without the dissipation:
/// `(-v·∇ω + ∂1θ, -v·∇θ)`.
pub fn rhs(state: &SimState) -> (SpectralField, SpectralField) {
    nonlinear(&state.omega_hat, &state.theta_hat)
}

fn nonlinear(omega: &SpectralField, theta: &SpectralField) -> (SpectralField, SpectralField) {
    let v = biot_savart_unchecked(omega).to_physical();
    let mut domega = advect_physical(&v, omega).scale(-1.0);
    domega.add_assign(&partial_derivative(theta, Axis::X1));
    let dtheta = advect_physical(&v, theta).scale(-1.0);
    (domega, dtheta)
}

/// `Γ = ω - Rθ`.
pub fn gamma(state: &SimState) -> SpectralField {
    state.omega_hat.sub(&riesz(&state.theta_hat))
}

/// Largest step allowed by `dt · max|v| <= cfl · (2π/n)`.
pub fn cfl_dt(state: &SimState, cfl: f64) -> f64 {
    let vmax = state.velocity().to_physical().max_magnitude();
    cfl * state.grid().spacing() / vmax.max(CFL_VELOCITY_FLOOR)
}

/// Per-mode integrating factors for one step size.
#[derive(Clone, Debug)]
struct Factors {
    dt: f64,
    full: Vec<f64>,
    half: Vec<f64>,
}

impl Factors {
    fn new(grid: &Grid, alpha: f64, dt: f64) -> Self {
        let mut full = Vec::with_capacity(grid.len());
        let mut half = Vec::with_capacity(grid.len());
        for idx in 0..grid.len() {
            let (k1, k2) = grid.mode(idx);
            let rate = ((k1 * k1 + k2 * k2) as f64).sqrt().powf(alpha);
            full.push((-rate * dt).exp());
            half.push((-rate * dt * 0.5).exp());
        }
        Self { dt, full, half }
    }
}

/// Integrating-factor RK4 stepper; caches the exponential tables for the
/// most recent step size.
#[derive(Clone, Debug, Default)]
pub struct Stepper {
    cache: Option<(f64, Factors)>,
}

/// `out[i] = a[i]·x[i] + c · b[i]·y[i]` style combination helper.
fn combine(
    terms: &[(&SpectralField, Option<&[f64]>, f64)],
    grid: &Grid,
) -> SpectralField {
    let mut out = vec![Complex64::default(); grid.len()];
    for (field, table, weight) in terms {
        match table {
            Some(t) => {
                for ((o, c), e) in out.iter_mut().zip(field.coeffs()).zip(t.iter()) {
                    *o += c * (e * weight);
                }
            }
            None => {
                for (o, c) in out.iter_mut().zip(field.coeffs()) {
                    *o += c * *weight;
                }
            }
        }
    }
    SpectralField::from_coeffs(grid, out).expect("length matches grid")
}

impl Stepper {
    pub fn new() -> Self {
        Self::default()
    }

    fn factors(&mut self, grid: &Grid, alpha: f64, dt: f64) -> &Factors {
        let stale = match &self.cache {
            Some((a, f)) => *a != alpha || f.dt != dt || f.full.len() != grid.len(),
            None => true,
        };
        if stale {
            self.cache = Some((alpha, Factors::new(grid, alpha, dt)));
        }
        &self.cache.as_ref().expect("just filled").1
    }

    /// One step of size `dt`. Fails with [`SimError::BlowUp`] when the new
    /// state is non-finite or its velocity exceeds [`BLOW_UP_VELOCITY`].
    pub fn step(&mut self, state: &SimState, dt: f64) -> Result<SimState, SimError> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(SimError::InvalidTimeStep(dt));
        }
        let grid = state.grid().clone();
        let f = self.factors(&grid, state.alpha, dt).clone();
        let (e, e2) = (Some(f.full.as_slice()), Some(f.half.as_slice()));
        let (w, th) = (&state.omega_hat, &state.theta_hat);

        let (k1w, k1t) = nonlinear(w, th);
        let wa = combine(&[(w, e2, 1.0), (&k1w, e2, 0.5 * dt)], &grid);
        let ta = combine(&[(th, None, 1.0), (&k1t, None, 0.5 * dt)], &grid);
        let (k2w, k2t) = nonlinear(&wa, &ta);
        let wb = combine(&[(w, e2, 1.0), (&k2w, None, 0.5 * dt)], &grid);
        let tb = combine(&[(th, None, 1.0), (&k2t, None, 0.5 * dt)], &grid);
        let (k3w, k3t) = nonlinear(&wb, &tb);
        let wc = combine(&[(w, e, 1.0), (&k3w, e2, dt)], &grid);
        let tc = combine(&[(th, None, 1.0), (&k3t, None, dt)], &grid);
        let (k4w, k4t) = nonlinear(&wc, &tc);

        let sixth = dt / 6.0;
        let omega = combine(
            &[
                (w, e, 1.0),
                (&k1w, e, sixth),
                (&k2w, e2, 2.0 * sixth),
                (&k3w, e2, 2.0 * sixth),
                (&k4w, None, sixth),
            ],
            &grid,
        );
        let theta = combine(
            &[
                (th, None, 1.0),
                (&k1t, None, sixth),
                (&k2t, None, 2.0 * sixth),
                (&k3t, None, 2.0 * sixth),
                (&k4t, None, sixth),
            ],
            &grid,
        );
        let next = SimState {
            t: state.t + dt,
            omega_hat: omega,
            theta_hat: theta,
            alpha: state.alpha,
        };
        let blown = !next.is_finite()
            || next.velocity().to_physical().max_magnitude() > BLOW_UP_VELOCITY;
        if blown {
            return Err(SimError::BlowUp {
                t: next.t,
                last_good: Box::new(state.clone()),
            });
        }
        Ok(next)
    }
}

/// Convenience wrapper around a fresh [`Stepper`].
pub fn step(state: &SimState, dt: f64) -> Result<SimState, SimError> {
    Stepper::new().step(state, dt)
}

/// `L²` norm of the defect in the `Γ` equation
///
/// ```text
/// ∂tΓ + v·∇Γ + |D|^α Γ - [R, v·∇]θ - (∂1θ - |D|^α Rθ)
/// ```
///
/// between two nearby states: `∂tΓ` by the difference quotient, the other
/// terms at the averaged state, so the defect is second order in the gap.
/// The last bracket vanishes for `α = 1`.
pub fn gamma_residual(earlier: &SimState, later: &SimState) -> f64 {
    let dt = later.t - earlier.t;
    if dt == 0.0 {
        return 0.0;
    }
    let dgamma = gamma(later).sub(&gamma(earlier)).scale(1.0 / dt);
    let omega = earlier.omega_hat.add(&later.omega_hat).scale(0.5);
    let theta = earlier.theta_hat.add(&later.theta_hat).scale(0.5);
    let alpha = later.alpha;
    let r_theta = riesz(&theta);
    let g = omega.sub(&r_theta);
    let v = biot_savart_unchecked(&omega);
    let mut defect = dgamma;
    defect.add_assign(&advect(&v, &g));
    defect.add_assign(&abs_derivative_power(&g, alpha));
    defect = defect.sub(&riesz_transport_commutator(&v, &theta));
    defect = defect.sub(&partial_derivative(&theta, Axis::X1));
    defect.add_assign(&abs_derivative_power(&r_theta, alpha));
    sobolev_norm(&defect, 0.0, false)
}

/// Solution of the system with the transport terms dropped:
/// `θ(t) = θ0` and, per mode, `ω̂(t) = ω̂* + e^{-|k|^α t}(ω̂0 - ω̂*)` with the
/// steady state `ω̂* = i k1 θ̂0 / |k|^α`. For `α = 1` this is
/// `Γ(t) = e^{-|D|t}Γ0`, `ω = Γ + Rθ0`.
pub fn linear_exact_solution(
    omega0: &SpectralField,
    theta0: &SpectralField,
    alpha: f64,
    t: f64,
) -> (SpectralField, SpectralField) {
    let grid = omega0.grid();
    let nyq = grid.nyquist();
    let mut out = omega0.clone();
    for (idx, c) in out.coeffs_mut().iter_mut().enumerate() {
        let (k1, k2) = grid.mode(idx);
        if k1 == 0 && k2 == 0 {
            continue;
        }
        let rate = ((k1 * k1 + k2 * k2) as f64).sqrt().powf(alpha);
        let steady = if k1 == nyq {
            Complex64::default()
        } else {
            theta0.coeffs()[idx] * Complex64::new(0.0, k1 as f64 / rate)
        };
        *c = steady + (*c - steady) * (-rate * t).exp();
    }
    (out, theta0.clone())
}
