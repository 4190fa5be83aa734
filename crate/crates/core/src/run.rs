//! Driving a state to a final time with diagnostics and checkpoints.

use crate::diagnostics::{DiagnosticsRecord, Recorder};
use crate::dynamics::{cfl_dt, SimError, SimState, Stepper};
use crate::littlewood_paley::build_filter_bank;

/// Steps that land within this fraction of a step of an event are stretched
/// to hit it, so no sliver steps are taken.
const EVENT_SNAP: f64 = 1e-9;

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StepSize {
    Fixed(f64),
    /// CFL number
    Cfl(f64),
    /// CFL number, with steps never longer than `dt_max`
    CflCapped { cfl: f64, dt_max: f64 },
}

impl StepSize {
    /// Step to take from `state`.
    pub fn dt(self, state: &SimState) -> f64 {
        match self {
            StepSize::Fixed(dt) => dt,
            StepSize::Cfl(c) => cfl_dt(state, c),
            StepSize::CflCapped { cfl, dt_max } => cfl_dt(state, cfl).min(dt_max),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunPlan {
    pub step: StepSize,
    pub t_end: f64,
    /// Record diagnostics every this many steps (and at `t_end`).
    pub diag_cadence: usize,
    /// Times at which to hand back a copy of the state.
    pub checkpoint_times: Vec<f64>,
    /// Lebesgue exponent of the `lr_omega` column.
    pub lr_exponent: f64,
}

impl RunPlan {
    pub fn new(step: StepSize, t_end: f64) -> Self {
        Self {
            step,
            t_end,
            diag_cadence: 10,
            checkpoint_times: Vec::new(),
            lr_exponent: 3.0,
        }
    }
}

#[derive(Clone, Debug)]
pub struct RunOutput {
    pub records: Vec<DiagnosticsRecord>,
    pub final_state: SimState,
    pub checkpoints: Vec<SimState>,
    pub steps: usize,
}

#[derive(Debug)]
pub struct RunFailure {
    pub error: SimError,
    /// Diagnostics recorded before the failure.
    pub records: Vec<DiagnosticsRecord>,
}

impl std::fmt::Display for RunFailure {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        write!(f, "{} after {} records", self.error, self.records.len())
    }
}

impl std::error::Error for RunFailure {
    fn source(&self) -> Option<&(dyn std::error::Error + 'static)> {
        Some(&self.error)
    }
}

/// Advances `state` to `t_end`, calling `observe(state, step_index)` after
/// every step and stopping exactly at each of `stops` on the way.
pub fn evolve(
    initial: &SimState,
    step: StepSize,
    t_end: f64,
    stops: &[f64],
    mut observe: impl FnMut(&SimState, usize),
) -> Result<SimState, SimError> {
    let mut events: Vec<f64> = stops
        .iter()
        .copied()
        .filter(|&t| t > initial.t && t < t_end)
        .collect();
    events.push(t_end);
    events.sort_by(f64::total_cmp);
    events.dedup();

    let mut stepper = Stepper::new();
    let mut state = initial.clone();
    let mut count = 0;
    for target in events {
        while state.t < target {
            let dt = step.dt(&state);
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(SimError::InvalidTimeStep(dt));
            }
            let remaining = target - state.t;
            let landing = remaining <= dt * (1.0 + EVENT_SNAP);
            let mut next = stepper.step(&state, if landing { remaining } else { dt })?;
            if landing {
                next.t = target;
            }
            state = next;
            count += 1;
            observe(&state, count);
        }
    }
    Ok(state)
}

/// Runs `plan` from `initial`, recording diagnostics at step 0, every
/// `diag_cadence` steps, and at the final time.
pub fn run(initial: &SimState, plan: &RunPlan) -> Result<RunOutput, RunFailure> {
    let bank = build_filter_bank(initial.grid());
    let mut recorder = Recorder::new(bank, plan.lr_exponent);
    let mut records = vec![recorder.record(initial)];
    let mut checkpoints = Vec::new();
    let mut steps = 0;
    let cadence = plan.diag_cadence.max(1);
    let mut last_recorded = 0;
    let mut wanted: Vec<f64> = plan.checkpoint_times.clone();
    wanted.sort_by(f64::total_cmp);
    if wanted.contains(&initial.t) {
        checkpoints.push(initial.clone());
    }
    let result = evolve(initial, plan.step, plan.t_end, &wanted, |s, n| {
        steps = n;
        if n % cadence == 0 {
            records.push(recorder.record(s));
            last_recorded = n;
        }
        if wanted.contains(&s.t) && checkpoints.last().map(|c: &SimState| c.t) != Some(s.t) {
            checkpoints.push(s.clone());
        }
    });
    let final_state = match result {
        Ok(s) => s,
        Err(error) => return Err(RunFailure { error, records }),
    };
    if last_recorded != steps {
        records.push(recorder.record(&final_state));
    }
    Ok(RunOutput {
        records,
        final_state,
        checkpoints,
        steps,
    })
}
