//! `bq` command-line driver.
//!
//! Exit codes: 0 when every check passes, 1 when a check fails or a run
//! blows up, 2 on usage, configuration or IO errors.

use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use anyhow::{anyhow, bail, Context};
use clap::{Parser, Subcommand};

use bq_core::checkpoint::{read_checkpoint, write_checkpoint};
use bq_core::config::{initial_norms, make_initial_data, parse_config, RunConfig};
use bq_core::diagnostics::{check_energy, check_max_principle};
use bq_core::io::write_diagnostics_csv;
use bq_core::littlewood_paley::{besov_norm, besov_norm_vector, build_filter_bank, BesovSpec};
use bq_core::run::run;
use bq_core::stability::{stability_experiment, PerturbedFields, StabilitySettings};
use bq_core::verify::{EnsembleSpec, Suite};

pub const OUTPUT_DIR_VAR: &str = "BQ_OUTPUT_DIR";

/// Largest sampled ratio allowed for the kernel-commutator suite.
pub const KERNEL_RATIO_LIMIT: f64 = 1.05;

#[derive(Debug, Parser)]
#[command(name = "bq", version, about = "Boussinesq simulator and estimate checks")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Debug, Subcommand)]
enum Command {
    /// Evolve the initial data of a config file and check the a priori bounds.
    Run {
        #[arg(long)]
        config: PathBuf,
    },
    /// Sample an inequality on a seeded random ensemble.
    Verify {
        #[arg(long)]
        suite: String,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 128)]
        n: usize,
        #[arg(long, default_value_t = 64)]
        count: usize,
        /// Used when BQ_OUTPUT_DIR is unset.
        #[arg(long, default_value = "out")]
        output_dir: PathBuf,
    },
    /// Besov norms of the fields stored in a checkpoint.
    Norms {
        #[arg(long)]
        checkpoint: PathBuf,
        /// `s,p,r`; `inf` is accepted for `p` and `r`.
        #[arg(long)]
        besov: String,
        #[arg(long)]
        homogeneous: bool,
        /// Used when BQ_OUTPUT_DIR is unset.
        #[arg(long, default_value = "out")]
        output_dir: PathBuf,
    },
    /// Hölder-exponent experiment with perturbations of size `delta` and `delta/4`.
    Stability {
        #[arg(long)]
        config: PathBuf,
        #[arg(long)]
        delta: f64,
        #[arg(long, default_value_t = 10)]
        samples: usize,
    },
}

enum Failure {
    Check(anyhow::Error),
    Usage(anyhow::Error),
}

impl From<anyhow::Error> for Failure {
    fn from(e: anyhow::Error) -> Self {
        Failure::Usage(e)
    }
}

type Outcome = Result<bool, Failure>;

/// Runs one invocation. `output_override` plays the role of
/// `BQ_OUTPUT_DIR`; everything printed goes to `out`/`err`.
pub fn run_cli<I, T>(
    args: I,
    output_override: Option<PathBuf>,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    let ctx = Ctx {
        output_override,
        out,
    };
    let result = dispatch(cli.command, ctx);
    match result {
        Ok(true) => 0,
        Ok(false) => 1,
        Err(Failure::Check(e)) => {
            let _ = writeln!(err, "error: {e:#}");
            1
        }
        Err(Failure::Usage(e)) => {
            let _ = writeln!(err, "error: {e:#}");
            2
        }
    }
}

struct Ctx<'a> {
    output_override: Option<PathBuf>,
    out: &'a mut dyn Write,
}

impl Ctx<'_> {
    fn output_dir(&self, fallback: &Path) -> anyhow::Result<PathBuf> {
        let dir = self
            .output_override
            .clone()
            .unwrap_or_else(|| fallback.to_path_buf());
        fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
        Ok(dir)
    }

    fn say(&mut self, line: impl AsRef<str>) {
        let _ = writeln!(self.out, "{}", line.as_ref());
    }
}

fn dispatch(command: Command, mut ctx: Ctx<'_>) -> Outcome {
    match command {
        Command::Run { config } => cmd_run(&mut ctx, &config),
        Command::Verify {
            suite,
            seed,
            n,
            count,
            output_dir,
        } => cmd_verify(&mut ctx, &suite, EnsembleSpec::new(seed, count, n), &output_dir),
        Command::Norms {
            checkpoint,
            besov,
            homogeneous,
            output_dir,
        } => cmd_norms(&mut ctx, &checkpoint, &besov, homogeneous, &output_dir),
        Command::Stability {
            config,
            delta,
            samples,
        } => cmd_stability(&mut ctx, &config, delta, samples),
    }
}

fn load_config(path: &Path) -> anyhow::Result<RunConfig> {
    let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
    parse_config(&text).with_context(|| format!("in {}", path.display()))
}

fn create(path: &Path) -> anyhow::Result<BufWriter<File>> {
    Ok(BufWriter::new(
        File::create(path).with_context(|| format!("creating {}", path.display()))?,
    ))
}

fn header(config: &RunConfig) -> Vec<(String, String)> {
    let mut h = vec![("bq_version".to_string(), env!("CARGO_PKG_VERSION").to_string())];
    h.extend(config.echo().into_iter().map(|(k, v)| (format!("config.{k}"), v)));
    h
}

fn cmd_run(ctx: &mut Ctx<'_>, config_path: &Path) -> Outcome {
    let config = load_config(config_path)?;
    let dir = ctx.output_dir(&config.output_dir)?;
    let initial = make_initial_data(&config).map_err(anyhow::Error::from)?;
    let mut comments = header(&config);
    for (name, value) in initial_norms(&initial, config.lr_exponent) {
        comments.push((format!("initial.{name}"), value.to_string()));
    }
    let csv_path = dir.join("diagnostics.csv");
    let (records, output) = match run(&initial, &config.plan()) {
        Ok(o) => (o.records.clone(), Ok(o)),
        Err(f) => {
            comments.push(("failure".into(), f.error.to_string()));
            (f.records, Err(f.error))
        }
    };
    let mut w = create(&csv_path)?;
    write_diagnostics_csv(&mut w, &comments, &records).map_err(anyhow::Error::from)?;
    w.flush().context("writing diagnostics")?;
    ctx.say(format!("wrote {} ({} records)", csv_path.display(), records.len()));
    let output = output.map_err(|e| Failure::Check(anyhow!("run stopped: {e}")))?;
    for (i, state) in output.checkpoints.iter().enumerate() {
        let path = dir.join(format!("checkpoint_{i:03}.bqsf"));
        write_checkpoint(state, &path).with_context(|| format!("writing {}", path.display()))?;
        ctx.say(format!("wrote {} (t = {})", path.display(), state.t));
    }
    let final_path = dir.join("final.bqsf");
    write_checkpoint(&output.final_state, &final_path)
        .with_context(|| format!("writing {}", final_path.display()))?;
    ctx.say(format!("wrote {} (t = {}, {} steps)", final_path.display(), output.final_state.t, output.steps));

    let mut passed = true;
    let mut lines = Vec::new();
    for p in [2.0, 4.0, f64::INFINITY] {
        let r = check_max_principle(&records, p).map_err(|e| Failure::Check(e.into()))?;
        passed &= r.passed;
        lines.push(format!(
            "{} max_principle p={} initial={} drift={}",
            verdict(r.passed),
            p,
            r.initial,
            r.drift
        ));
    }
    let e = check_energy(&records).map_err(|e| Failure::Check(e.into()))?;
    passed &= e.passed;
    lines.push(format!(
        "{} energy_bound max_excess={} quadratic_c0={} max_energy_residual={}",
        verdict(e.passed),
        e.max_excess,
        e.quadratic_c0,
        e.max_energy_residual
    ));
    write_report(ctx, &dir.join("checks.txt"), &lines)?;
    Ok(passed)
}

fn verdict(passed: bool) -> &'static str {
    if passed {
        "PASS"
    } else {
        "FAIL"
    }
}

fn write_report(ctx: &mut Ctx<'_>, path: &Path, lines: &[String]) -> anyhow::Result<()> {
    let mut w = create(path)?;
    for line in lines {
        writeln!(w, "{line}")?;
        ctx.say(line);
    }
    w.flush()?;
    Ok(())
}

fn cmd_verify(ctx: &mut Ctx<'_>, suite_name: &str, ensemble: EnsembleSpec, fallback: &Path) -> Outcome {
    let suite = Suite::from_name(suite_name).ok_or_else(|| {
        let names: Vec<_> = Suite::ALL.iter().map(|s| s.name()).collect();
        anyhow!("unknown suite `{suite_name}` (expected one of {})", names.join(", "))
    })?;
    if ensemble.count == 0 {
        return Err(anyhow!("--count must be positive").into());
    }
    bq_core::spectral::Grid::new(ensemble.n).context("--n")?;
    let dir = ctx.output_dir(fallback)?;
    let report = suite
        .run_default(&ensemble)
        .map_err(|e| Failure::Usage(e.into()))?;
    let path = dir.join(format!(
        "verify_{}_n{}_seed{}.csv",
        suite.name(),
        ensemble.n,
        ensemble.seed
    ));
    let mut w = create(&path)?;
    report.write_csv(&mut w).context("writing report")?;
    w.flush().context("writing report")?;
    let mut passed = report.all_finite();
    if suite == Suite::Kernel {
        passed &= report.max_ratio <= KERNEL_RATIO_LIMIT;
    }
    ctx.say(format!("wrote {}", path.display()));
    ctx.say(format!("{} {}", verdict(passed), report.summary()));
    Ok(passed)
}

fn parse_besov(text: &str, homogeneous: bool) -> anyhow::Result<BesovSpec> {
    let parts: Vec<&str> = text.split(',').map(str::trim).collect();
    let [s, p, r] = parts.as_slice() else {
        bail!("--besov expects `s,p,r`, got `{text}`");
    };
    let num = |name: &str, v: &str| -> anyhow::Result<f64> {
        v.parse::<f64>()
            .ok()
            .filter(|x| !x.is_nan())
            .ok_or_else(|| anyhow!("--besov: bad {name} `{v}`"))
    };
    let s = num("s", s)?;
    if !s.is_finite() {
        bail!("--besov: s must be finite");
    }
    BesovSpec::new(s, num("p", p)?, num("r", r)?)
        .map(|b| BesovSpec { homogeneous, ..b })
        .context("--besov")
}

fn cmd_norms(
    ctx: &mut Ctx<'_>,
    checkpoint: &Path,
    besov: &str,
    homogeneous: bool,
    fallback: &Path,
) -> Outcome {
    let spec = parse_besov(besov, homogeneous)?;
    let state = read_checkpoint(checkpoint).with_context(|| format!("reading {}", checkpoint.display()))?;
    let dir = ctx.output_dir(fallback)?;
    let bank = build_filter_bank(state.grid());
    let rows = [
        ("theta", besov_norm(&state.theta_hat, &spec, &bank)),
        ("omega", besov_norm(&state.omega_hat, &spec, &bank)),
        ("velocity", besov_norm_vector(&state.velocity(), &spec, &bank)),
    ];
    let stem = checkpoint
        .file_stem()
        .map(|s| s.to_string_lossy().into_owned())
        .unwrap_or_else(|| "checkpoint".into());
    let path = dir.join(format!("norms_{stem}.csv"));
    let mut w = create(&path)?;
    writeln!(w, "# bq_version = {}", env!("CARGO_PKG_VERSION")).context("writing norms")?;
    writeln!(w, "# checkpoint = {}", checkpoint.display()).context("writing norms")?;
    writeln!(w, "# t = {}", state.t).context("writing norms")?;
    writeln!(w, "# n = {}", state.grid().n()).context("writing norms")?;
    writeln!(w, "# alpha = {}", state.alpha).context("writing norms")?;
    writeln!(w, "# besov = {},{},{} homogeneous={}", spec.s, spec.p, spec.r, spec.homogeneous)
        .context("writing norms")?;
    writeln!(w, "field,norm").context("writing norms")?;
    for (name, value) in rows {
        writeln!(w, "{name},{value}").context("writing norms")?;
        ctx.say(format!("{name} {value}"));
    }
    w.flush().context("writing norms")?;
    ctx.say(format!("wrote {}", path.display()));
    Ok(rows.iter().all(|(_, v)| v.is_finite()))
}

fn cmd_stability(ctx: &mut Ctx<'_>, config_path: &Path, delta: f64, samples: usize) -> Outcome {
    if !(delta > 0.0 && delta.is_finite()) {
        return Err(anyhow!("--delta must be positive").into());
    }
    if samples == 0 {
        return Err(anyhow!("--samples must be positive").into());
    }
    let config = load_config(config_path)?;
    let dir = ctx.output_dir(&config.output_dir)?;
    let base = make_initial_data(&config).map_err(anyhow::Error::from)?;
    let settings = StabilitySettings {
        step: config.step,
        t_end: config.t_end,
        samples,
        seed: config.seed,
        fields: PerturbedFields::Both,
    };
    let report = stability_experiment(&base, delta, &settings).map_err(|e| Failure::Check(e.into()))?;
    let path = dir.join("stability.csv");
    let mut w = create(&path)?;
    let mut comments = header(&config);
    comments.push(("delta".into(), delta.to_string()));
    comments.push(("samples".into(), samples.to_string()));
    for (k, v) in &comments {
        writeln!(w, "# {k} = {v}").context("writing stability")?;
    }
    writeln!(w, "t,separation_delta,separation_delta_quarter,exponent").context("writing stability")?;
    for (i, t) in report.coarse.times.iter().enumerate() {
        let exponent = if i == 0 {
            String::new()
        } else {
            report.exponents[i - 1].to_string()
        };
        writeln!(
            w,
            "{t},{},{},{exponent}",
            report.coarse.separation[i], report.fine.separation[i]
        )
        .context("writing stability")?;
    }
    w.flush().context("writing stability")?;
    ctx.say(format!("wrote {}", path.display()));
    ctx.say(format!("{} stability exponent={}", verdict(report.passed), report.exponent));
    Ok(report.passed)
}
