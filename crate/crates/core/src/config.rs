//! Flat `key = value` run configuration and initial-data presets.

use std::collections::BTreeMap;
use std::f64::consts::PI;
use std::path::PathBuf;

use thiserror::Error;

use crate::checkpoint::{read_checkpoint, CheckpointError};
use crate::dynamics::SimState;
use crate::littlewood_paley::{besov_norm, build_filter_bank, BesovSpec};
use crate::random::{random_scalar, FieldSpectrum, SampleKey};
use crate::run::{RunPlan, StepSize};
use crate::spectral::{
    dealias, forward_transform, gradient_lp_norm, sobolev_norm, Grid, PhysicalField,
    SpectralField,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum ConfigError {
    #[error("line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("unknown key `{0}`")]
    UnknownKey(String),
    #[error("key `{0}` given more than once")]
    DuplicateKey(String),
    #[error("missing required key `{0}`")]
    MissingKey(&'static str),
    #[error("invalid value `{value}` for key `{key}`: {reason}")]
    Invalid {
        key: &'static str,
        value: String,
        reason: String,
    },
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Preset {
    Zero,
    TaylorGreen,
    Blob,
    TaylorGreenBlob,
    Random,
    Checkpoint,
}

impl Preset {
    pub const ALL: [Preset; 6] = [
        Preset::Zero,
        Preset::TaylorGreen,
        Preset::Blob,
        Preset::TaylorGreenBlob,
        Preset::Random,
        Preset::Checkpoint,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Preset::Zero => "zero",
            Preset::TaylorGreen => "taylor-green",
            Preset::Blob => "blob",
            Preset::TaylorGreenBlob => "taylor-green+blob",
            Preset::Random => "random",
            Preset::Checkpoint => "checkpoint",
        }
    }
}

/// Parameters of every preset; each preset reads the ones it needs.
#[derive(Clone, Debug, PartialEq)]
pub struct PresetParams {
    pub tg_amplitude: f64,
    pub blob_amplitude: f64,
    pub blob_width: f64,
    pub blob_center: (f64, f64),
    pub blob_mean_subtract: bool,
    pub random_gamma: f64,
    pub random_amplitude: f64,
    pub random_kmax: Option<usize>,
    pub checkpoint_path: Option<PathBuf>,
}

impl Default for PresetParams {
    fn default() -> Self {
        Self {
            tg_amplitude: 1.0,
            blob_amplitude: 1.0,
            blob_width: 0.5,
            blob_center: (PI, PI),
            blob_mean_subtract: false,
            random_gamma: 2.5,
            random_amplitude: 1.0,
            random_kmax: None,
            checkpoint_path: None,
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub n: usize,
    pub alpha: f64,
    pub step: StepSize,
    pub t_end: f64,
    pub preset: Preset,
    pub params: PresetParams,
    pub seed: u64,
    pub diag_cadence: usize,
    pub output_dir: PathBuf,
    pub lr_exponent: f64,
    pub checkpoint_times: Vec<f64>,
}

const KEYS: [&str; 22] = [
    "n",
    "alpha",
    "cfl",
    "dt",
    "dt_max",
    "t_end",
    "preset",
    "seed",
    "diag_cadence",
    "output_dir",
    "lr_exponent",
    "checkpoint_times",
    "tg_amplitude",
    "blob_amplitude",
    "blob_width",
    "blob_center_x1",
    "blob_center_x2",
    "blob_mean_subtract",
    "random_gamma",
    "random_amplitude",
    "random_kmax",
    "checkpoint_path",
];

fn invalid(key: &'static str, value: &str, reason: impl Into<String>) -> ConfigError {
    ConfigError::Invalid {
        key,
        value: value.to_string(),
        reason: reason.into(),
    }
}

struct Entries(BTreeMap<String, String>);

impl Entries {
    fn raw(&self, key: &'static str) -> Option<&str> {
        self.0.get(key).map(String::as_str)
    }

    fn parse<T: std::str::FromStr>(&self, key: &'static str) -> Result<Option<T>, ConfigError> {
        match self.raw(key) {
            None => Ok(None),
            Some(v) => v
                .parse::<T>()
                .map(Some)
                .map_err(|_| invalid(key, v, format!("expected {}", std::any::type_name::<T>()))),
        }
    }

    fn float(&self, key: &'static str, default: f64) -> Result<f64, ConfigError> {
        let v = self.parse::<f64>(key)?.unwrap_or(default);
        if v.is_nan() {
            return Err(invalid(key, "NaN", "expected a number"));
        }
        Ok(v)
    }

    fn required<T: std::str::FromStr>(&self, key: &'static str) -> Result<T, ConfigError> {
        self.parse(key)?.ok_or(ConfigError::MissingKey(key))
    }
}

/// Parses `key = value` lines; `#` starts a comment, blank lines are
/// ignored, unknown and repeated keys are errors.
pub fn parse_config(text: &str) -> Result<RunConfig, ConfigError> {
    let mut map = BTreeMap::new();
    for (i, line) in text.lines().enumerate() {
        let content = line.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let (k, v) = content.split_once('=').ok_or_else(|| ConfigError::Syntax {
            line: i + 1,
            text: line.to_string(),
        })?;
        let (k, v) = (k.trim(), v.trim());
        if k.is_empty() {
            return Err(ConfigError::Syntax {
                line: i + 1,
                text: line.to_string(),
            });
        }
        if !KEYS.contains(&k) {
            return Err(ConfigError::UnknownKey(k.to_string()));
        }
        if map.insert(k.to_string(), v.to_string()).is_some() {
            return Err(ConfigError::DuplicateKey(k.to_string()));
        }
    }
    let e = Entries(map);

    let n: usize = e.required("n")?;
    if n < 16 || !n.is_multiple_of(2) {
        return Err(invalid("n", &n.to_string(), "grid size must be even and at least 16"));
    }
    let alpha = e.float("alpha", 1.0)?;
    if !(alpha > 0.0 && alpha <= 2.0) {
        return Err(invalid("alpha", &alpha.to_string(), "must lie in (0, 2]"));
    }
    let t_end: f64 = e.required("t_end")?;
    if !(t_end >= 0.0 && t_end.is_finite()) {
        return Err(invalid("t_end", &t_end.to_string(), "must be finite and >= 0"));
    }
    let step = match (e.raw("dt"), e.raw("cfl")) {
        (Some(_), Some(_)) => {
            return Err(invalid("dt", e.raw("dt").unwrap_or(""), "give either dt or cfl, not both"))
        }
        (Some(_), None) => {
            if let Some(v) = e.raw("dt_max") {
                return Err(invalid("dt_max", v, "only applies with cfl"));
            }
            let dt = e.float("dt", 0.0)?;
            if !(dt > 0.0 && dt.is_finite()) {
                return Err(invalid("dt", &dt.to_string(), "must be positive"));
            }
            StepSize::Fixed(dt)
        }
        _ => {
            let cfl = e.float("cfl", 0.5)?;
            if !(cfl > 0.0 && cfl.is_finite()) {
                return Err(invalid("cfl", &cfl.to_string(), "must be positive"));
            }
            match e.parse::<f64>("dt_max")? {
                None => StepSize::Cfl(cfl),
                Some(dt_max) if dt_max > 0.0 && dt_max.is_finite() => StepSize::CflCapped { cfl, dt_max },
                Some(dt_max) => return Err(invalid("dt_max", &dt_max.to_string(), "must be positive")),
            }
        }
    };
    let preset_name: String = e.required("preset")?;
    let preset = Preset::ALL
        .into_iter()
        .find(|p| p.name() == preset_name)
        .ok_or_else(|| {
            let known: Vec<_> = Preset::ALL.iter().map(|p| p.name()).collect();
            invalid("preset", &preset_name, format!("known presets: {}", known.join(", ")))
        })?;
    let diag_cadence: usize = e.parse("diag_cadence")?.unwrap_or(10);
    if diag_cadence == 0 {
        return Err(invalid("diag_cadence", "0", "must be at least 1"));
    }
    let lr_exponent = e.float("lr_exponent", 3.0)?;
    if !(lr_exponent >= 1.0) {
        return Err(invalid("lr_exponent", &lr_exponent.to_string(), "must be >= 1"));
    }
    let checkpoint_times = match e.raw("checkpoint_times") {
        None | Some("") => Vec::new(),
        Some(list) => list
            .split(',')
            .map(|s| {
                s.trim()
                    .parse::<f64>()
                    .ok()
                    .filter(|t| *t >= 0.0 && t.is_finite())
                    .ok_or_else(|| invalid("checkpoint_times", s.trim(), "expected times >= 0"))
            })
            .collect::<Result<_, _>>()?,
    };

    let defaults = PresetParams::default();
    let blob_width = e.float("blob_width", defaults.blob_width)?;
    if !(blob_width > 0.0) {
        return Err(invalid("blob_width", &blob_width.to_string(), "must be positive"));
    }
    let random_gamma = e.float("random_gamma", defaults.random_gamma)?;
    let params = PresetParams {
        tg_amplitude: e.float("tg_amplitude", defaults.tg_amplitude)?,
        blob_amplitude: e.float("blob_amplitude", defaults.blob_amplitude)?,
        blob_width,
        blob_center: (
            e.float("blob_center_x1", defaults.blob_center.0)?,
            e.float("blob_center_x2", defaults.blob_center.1)?,
        ),
        blob_mean_subtract: e.parse("blob_mean_subtract")?.unwrap_or(false),
        random_gamma,
        random_amplitude: e.float("random_amplitude", defaults.random_amplitude)?,
        random_kmax: e.parse("random_kmax")?,
        checkpoint_path: e.raw("checkpoint_path").map(PathBuf::from),
    };
    if preset == Preset::Checkpoint && params.checkpoint_path.is_none() {
        return Err(ConfigError::MissingKey("checkpoint_path"));
    }

    Ok(RunConfig {
        n,
        alpha,
        step,
        t_end,
        preset,
        params,
        seed: e.parse("seed")?.unwrap_or(0),
        diag_cadence,
        output_dir: e.raw("output_dir").map(PathBuf::from).unwrap_or_else(|| "out".into()),
        lr_exponent,
        checkpoint_times,
    })
}

impl RunConfig {
    /// Canonical `key = value` listing of every setting, defaults included.
    pub fn echo(&self) -> Vec<(String, String)> {
        let p = &self.params;
        let mut out = vec![
            ("n".to_string(), self.n.to_string()),
            ("alpha".into(), self.alpha.to_string()),
        ];
        match self.step {
            StepSize::Fixed(dt) => out.push(("dt".into(), dt.to_string())),
            StepSize::Cfl(c) => out.push(("cfl".into(), c.to_string())),
            StepSize::CflCapped { cfl, dt_max } => out.extend([
                ("cfl".into(), cfl.to_string()),
                ("dt_max".into(), dt_max.to_string()),
            ]),
        }
        out.extend([
            ("t_end".into(), self.t_end.to_string()),
            ("preset".into(), self.preset.name().to_string()),
            ("seed".into(), self.seed.to_string()),
            ("diag_cadence".into(), self.diag_cadence.to_string()),
            ("output_dir".into(), self.output_dir.display().to_string()),
            ("lr_exponent".into(), self.lr_exponent.to_string()),
            (
                "checkpoint_times".into(),
                self.checkpoint_times
                    .iter()
                    .map(f64::to_string)
                    .collect::<Vec<_>>()
                    .join(","),
            ),
            ("tg_amplitude".into(), p.tg_amplitude.to_string()),
            ("blob_amplitude".into(), p.blob_amplitude.to_string()),
            ("blob_width".into(), p.blob_width.to_string()),
            ("blob_center_x1".into(), p.blob_center.0.to_string()),
            ("blob_center_x2".into(), p.blob_center.1.to_string()),
            ("blob_mean_subtract".into(), p.blob_mean_subtract.to_string()),
            ("random_gamma".into(), p.random_gamma.to_string()),
            ("random_amplitude".into(), p.random_amplitude.to_string()),
        ]);
        if let Some(k) = p.random_kmax {
            out.push(("random_kmax".into(), k.to_string()));
        }
        if let Some(path) = &p.checkpoint_path {
            out.push(("checkpoint_path".into(), path.display().to_string()));
        }
        out
    }

    pub fn plan(&self) -> RunPlan {
        RunPlan {
            step: self.step,
            t_end: self.t_end,
            diag_cadence: self.diag_cadence,
            checkpoint_times: self.checkpoint_times.clone(),
            lr_exponent: self.lr_exponent,
        }
    }
}

#[derive(Debug, Error)]
pub enum InitError {
    #[error(transparent)]
    Checkpoint(#[from] CheckpointError),
    #[error("checkpoint grid n = {found} does not match configured n = {expected}")]
    GridMismatch { expected: usize, found: usize },
    #[error(transparent)]
    Config(#[from] ConfigError),
}

/// Periodic Gaussian bump `A exp(-d²/w²)` with `d` the distance to the
/// nearest periodic copy of the center.
fn blob(grid: &Grid, p: &PresetParams) -> SpectralField {
    let wrap = |d: f64| {
        let d = d.rem_euclid(2.0 * PI);
        d.min(2.0 * PI - d)
    };
    let field = PhysicalField::from_fn(grid, |x1, x2| {
        let d1 = wrap(x1 - p.blob_center.0);
        let d2 = wrap(x2 - p.blob_center.1);
        p.blob_amplitude * (-(d1 * d1 + d2 * d2) / (p.blob_width * p.blob_width)).exp()
    });
    let mut hat = forward_transform(&field).expect("finite samples");
    if p.blob_mean_subtract {
        hat.coeffs_mut()[0] = Default::default();
    }
    hat
}

fn taylor_green(grid: &Grid, amplitude: f64) -> SpectralField {
    let field = PhysicalField::from_fn(grid, |x1, x2| amplitude * x1.sin() * x2.sin());
    forward_transform(&field).expect("finite samples")
}

/// Initial state of a configuration. Fields are dealiased; the vorticity
/// has zero mean.
pub fn make_initial_data(config: &RunConfig) -> Result<SimState, InitError> {
    let grid = Grid::new(config.n).map_err(|e| invalid("n", &config.n.to_string(), e.to_string()))?;
    let p = &config.params;
    let zero = SpectralField::zeros(&grid);
    let (omega, theta) = match config.preset {
        Preset::Zero => (zero.clone(), zero),
        Preset::TaylorGreen => (taylor_green(&grid, p.tg_amplitude), zero),
        Preset::Blob => (zero, blob(&grid, p)),
        Preset::TaylorGreenBlob => (taylor_green(&grid, p.tg_amplitude), blob(&grid, p)),
        Preset::Random => {
            let spectrum = FieldSpectrum {
                gamma: p.random_gamma,
                amplitude: p.random_amplitude,
                kmax: p.random_kmax,
            };
            (
                random_scalar(&grid, SampleKey::new(config.seed, 0, 0), &spectrum, true),
                random_scalar(&grid, SampleKey::new(config.seed, 0, 1), &spectrum, false),
            )
        }
        Preset::Checkpoint => {
            let path = p
                .checkpoint_path
                .as_ref()
                .ok_or(ConfigError::MissingKey("checkpoint_path"))?;
            let state = read_checkpoint(path)?;
            if state.grid().n() != config.n {
                return Err(InitError::GridMismatch {
                    expected: config.n,
                    found: state.grid().n(),
                });
            }
            return Ok(state);
        }
    };
    let mut omega = dealias(&omega);
    omega.coeffs_mut()[0] = Default::default();
    Ok(SimState {
        t: 0.0,
        omega_hat: omega,
        theta_hat: dealias(&theta),
        alpha: config.alpha,
    })
}

/// Norms of the initial data that enter the global well-posedness
/// hypotheses: `‖v‖_{H¹}`, `‖∇v‖_{L^p}`, `‖θ‖_{L²}`, `‖θ‖_{B^0_{∞,1}}`.
pub fn initial_norms(state: &SimState, p: f64) -> Vec<(String, f64)> {
    let v = state.velocity();
    let bank = build_filter_bank(state.grid());
    let b = BesovSpec {
        s: 0.0,
        p: f64::INFINITY,
        r: 1.0,
        homogeneous: false,
    };
    vec![
        (
            "v_h1".into(),
            sobolev_norm(&v.x1, 1.0, false).hypot(sobolev_norm(&v.x2, 1.0, false)),
        ),
        (format!("grad_v_l{p}"), gradient_lp_norm(&v, p).unwrap_or(f64::NAN)),
        ("theta_l2".into(), sobolev_norm(&state.theta_hat, 0.0, false)),
        ("theta_b0_inf_1".into(), besov_norm(&state.theta_hat, &b, &bank)),
    ]
}
