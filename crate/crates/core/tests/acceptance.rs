//! Acceptance suite: one PASS/FAIL line per criterion, nonzero exit if any
//! criterion fails.

use std::time::{Duration, Instant};

use bq_core::checkpoint::{read_state, write_state};
use bq_core::config::{make_initial_data, parse_config, RunConfig};
use bq_core::diagnostics::{check_energy, check_gamma_smoothing, check_max_principle, DiagnosticsRecord};
use bq_core::dynamics::{linear_exact_solution, SimState, Stepper};
use bq_core::io::write_diagnostics_csv;
use bq_core::littlewood_paley::{bony_decompose, build_filter_bank, dyadic_block};
use bq_core::random::{random_scalar, FieldSpectrum, SampleKey};
use bq_core::run::{run, RunOutput, StepSize};
use bq_core::spectral::{
    abs_derivative_power, biot_savart, dealias, dealiased_product, forward_transform,
    fractional_dissipation, inverse_transform, riesz, Grid, PhysicalField, SpectralField,
};
use bq_core::stability::{
    max_relative_increase, separation_series, stability_experiment, PerturbedFields,
    StabilitySettings,
};
use bq_core::verify::{EnsembleSpec, Suite};

struct Verdict {
    passed: bool,
    detail: String,
}

fn rel(a: &SpectralField, b: &SpectralField) -> f64 {
    a.sub(b).coeff_norm_sqr().sqrt() / b.coeff_norm_sqr().sqrt()
}

fn field(g: &Grid, f: impl Fn(f64, f64) -> f64) -> SpectralField {
    forward_transform(&PhysicalField::from_fn(g, f)).unwrap()
}

fn config(text: &str) -> RunConfig {
    parse_config(text).unwrap()
}

fn simulate(text: &str) -> (SimState, RunOutput) {
    let c = config(text);
    let initial = make_initial_data(&c).unwrap();
    let out = run(&initial, &c.plan()).unwrap_or_else(|f| panic!("run failed: {f}"));
    (initial, out)
}

const TG_BLOB: &str = "n = 128\ncfl = 0.5\nt_end = 1\npreset = taylor-green+blob\ndiag_cadence = 1\n";

fn spectral_exactness() -> Verdict {
    let start = Instant::now();
    let g = Grid::new(128).unwrap();
    let cos = field(&g, |x, _| x.cos());
    let sin = field(&g, |x, _| x.sin());
    let e_riesz = rel(&riesz(&cos), &sin.scale(-1.0));

    let mode = field(&g, |x, y| (3.0 * x + 4.0 * y).cos());
    let mut e_power = 0.0f64;
    for alpha in [0.5, 1.0, 1.5, 2.0] {
        let scaled = mode.scale(5f64.powf(alpha));
        e_power = e_power
            .max(rel(&abs_derivative_power(&mode, alpha), &scaled))
            .max(rel(&fractional_dissipation(&mode, alpha).unwrap(), &scaled));
    }

    let v = biot_savart(&sin).unwrap();
    let e_bs = v.x1.coeff_norm_sqr().sqrt() / sin.coeff_norm_sqr().sqrt();
    let e_bs = e_bs.max(rel(&v.x2, &cos.scale(-1.0)));
    let elapsed = start.elapsed();
    let worst = e_riesz.max(e_power).max(e_bs);
    Verdict {
        passed: worst <= 1e-10 && elapsed < Duration::from_secs(1),
        detail: format!(
            "riesz {e_riesz:.1e}, |D|^a on |k|=5 {e_power:.1e}, biot-savart {e_bs:.1e}; {:.3} s",
            elapsed.as_secs_f64()
        ),
    }
}

fn linear_oracle() -> Verdict {
    let start = Instant::now();
    let g = Grid::new(64).unwrap();
    let spectrum = FieldSpectrum {
        amplitude: 1e-8,
        ..FieldSpectrum::default()
    };
    let omega = dealias(&random_scalar(&g, SampleKey::new(5, 0, 0), &spectrum, true));
    let theta = dealias(&random_scalar(&g, SampleKey::new(5, 0, 1), &spectrum, false));
    let s0 = SimState::new(omega, theta, 1.0).unwrap();
    let mut stepper = Stepper::new();
    let mut s = s0.clone();
    for _ in 0..1000 {
        s = stepper.step(&s, 1e-3).unwrap();
    }
    let (w, th) = linear_exact_solution(&s0.omega_hat, &s0.theta_hat, 1.0, s.t);
    let err = rel(&s.omega_hat, &w).max(rel(&s.theta_hat, &th));
    let elapsed = start.elapsed();
    Verdict {
        passed: err <= 1e-6 && (s.t - 1.0).abs() < 1e-9 && elapsed < Duration::from_secs(30),
        detail: format!("relative error {err:.2e} at t = {}; {:.1} s", s.t, elapsed.as_secs_f64()),
    }
}

fn max_principle(records: &[DiagnosticsRecord], elapsed: Duration) -> Verdict {
    let mut passed = elapsed < Duration::from_secs(300);
    let mut parts = Vec::new();
    let columns: [(f64, fn(&DiagnosticsRecord) -> f64); 3] = [
        (2.0, |r| r.l2_theta),
        (4.0, |r| r.l4_theta),
        (f64::INFINITY, |r| r.linf_theta),
    ];
    for (p, column) in columns {
        let r = check_max_principle(records, p).unwrap();
        passed &= r.passed;
        let lowest = records.iter().map(column).fold(f64::INFINITY, f64::min);
        parts.push(format!(
            "L{p} drift {:.2e} (largest decrease {:.2e})",
            r.drift,
            1.0 - lowest / r.initial
        ));
    }
    Verdict {
        passed,
        detail: format!("{}; run {:.1} s", parts.join(", "), elapsed.as_secs_f64()),
    }
}

fn max_residual(records: &[DiagnosticsRecord]) -> f64 {
    records.iter().map(|r| r.energy_residual.abs()).fold(0.0, f64::max)
}

fn energy_bound(records: &[DiagnosticsRecord]) -> Verdict {
    let report = check_energy(records).unwrap();
    let (_, fine) = simulate(&TG_BLOB.replace("cfl = 0.5", "cfl = 0.25"));
    let coarse_res = max_residual(records);
    let fine_res = max_residual(&fine.records);
    let ratio = coarse_res / fine_res;
    Verdict {
        passed: report.passed && ratio >= 3.5,
        detail: format!(
            "max excess {:.2e} over {} samples; residual {coarse_res:.3e} -> {fine_res:.3e} (x{ratio:.2}) when dt halves",
            report.max_excess,
            records.len()
        ),
    }
}

fn partition_and_bony() -> Verdict {
    let start = Instant::now();
    let g = Grid::new(128).unwrap();
    let bank = build_filter_bank(&g);
    let spectrum = FieldSpectrum::default();
    let mut unity = 0.0f64;
    for idx in 0..g.len() {
        let total: f64 = bank.bands().map(|q| bank.multiplier(q).unwrap()[idx]).sum();
        unity = unity.max((total - 1.0).abs());
    }
    let mut recon = 0.0f64;
    let mut bony = 0.0f64;
    for sample in 0..64 {
        let u = random_scalar(&g, SampleKey::new(42, sample, 0), &spectrum, false);
        let w = random_scalar(&g, SampleKey::new(42, sample, 1), &spectrum, false);
        let mut sum = SpectralField::zeros(&g);
        for q in bank.bands() {
            sum.add_assign(&dyadic_block(&u, q, &bank).unwrap());
        }
        recon = recon.max(rel(&sum, &u));
        let parts = bony_decompose(&u, &w, &bank);
        let product = dealiased_product(&inverse_transform(&u).unwrap(), &inverse_transform(&w).unwrap());
        bony = bony.max(rel(&parts.sum(), &product));
    }
    let elapsed = start.elapsed();
    Verdict {
        passed: unity <= 1e-12 && recon <= 1e-12 && bony <= 1e-10 && elapsed < Duration::from_secs(60),
        detail: format!(
            "multiplier sum {unity:.1e}, block sum {recon:.1e}, bony {bony:.1e} over 64 fields; {:.1} s",
            elapsed.as_secs_f64()
        ),
    }
}

fn inequality_suites() -> Verdict {
    let start = Instant::now();
    let mut passed = true;
    let mut parts = Vec::new();
    for suite in Suite::ALL {
        let coarse = suite.run_default(&EnsembleSpec::new(42, 64, 128)).unwrap();
        let fine = suite.run_default(&EnsembleSpec::new(42, 64, 256)).unwrap();
        let change = (fine.max_ratio / coarse.max_ratio - 1.0).abs();
        let mut ok = coarse.all_finite() && fine.all_finite() && change <= 0.2;
        if suite == Suite::Kernel {
            ok &= coarse.max_ratio <= 1.05 && fine.max_ratio <= 1.05;
        }
        passed &= ok;
        parts.push(format!(
            "{}{} {:.3e}->{:.3e}",
            if ok { "" } else { "!" },
            suite.name(),
            coarse.max_ratio,
            fine.max_ratio
        ));
    }
    let elapsed = start.elapsed();
    Verdict {
        passed: passed && elapsed < Duration::from_secs(900),
        detail: format!("max ratio n=128->256: {}; {:.1} s", parts.join(", "), elapsed.as_secs_f64()),
    }
}

fn gamma_smoothing() -> Verdict {
    let (_, out) = simulate("n = 128\ncfl = 0.5\ndt_max = 0.01\nt_end = 2\npreset = blob\ndiag_cadence = 5\n");
    let report = check_gamma_smoothing(&out.records).unwrap();
    let fit = |f: Option<bq_core::fit::ExponentialFit>| match f {
        Some(f) => format!("A={:.3e} B={:.3} R2={:.4}", f.amplitude, f.rate, f.r_squared),
        None => "no fit".into(),
    };
    let stride = ((out.records.len() - 1) / 4).max(1);
    let curve: Vec<String> = out
        .records
        .iter()
        .step_by(stride)
        .map(|r| format!("{:.2}:{:.3e}/{:.3e}", r.t, r.hhalf_gamma_sq_cum, r.hhalf_omega_sq_cum))
        .collect();
    Verdict {
        passed: report.passed,
        detail: format!(
            "gamma fit {}; omega fit {}; t:gamma/omega {}",
            fit(report.gamma_fit),
            fit(report.omega_fit),
            curve.join(" ")
        ),
    }
}

fn stability() -> Verdict {
    let base = make_initial_data(&config(TG_BLOB)).unwrap();
    let settings = StabilitySettings {
        step: StepSize::Cfl(0.5),
        t_end: 1.0,
        samples: 10,
        seed: 0,
        fields: PerturbedFields::Both,
    };
    let report = stability_experiment(&base, 1e-4, &settings).unwrap();
    let zero = SimState::zero(base.grid(), 1.0);
    let linear = StabilitySettings {
        step: StepSize::Fixed(0.01),
        fields: PerturbedFields::VorticityOnly,
        ..settings
    };
    let series = separation_series(&zero, 1e-8, &linear).unwrap();
    let increase = max_relative_increase(&series.separation);
    let decreasing = increase <= 1e-6 && series.separation.last() < series.separation.first();
    let min_gamma = report.exponents.iter().copied().fold(f64::INFINITY, f64::min);
    Verdict {
        passed: report.passed && decreasing,
        detail: format!(
            "exponent at t=1 {:.4} (min {min_gamma:.4}); linear regime max relative increase {increase:.1e}",
            report.exponent
        ),
    }
}

fn artifacts(text: &str) -> (Vec<u8>, Vec<Vec<u8>>, RunOutput) {
    let c = config(text);
    let (initial, out) = simulate(text);
    let comments: Vec<(String, String)> = c.echo();
    let mut csv = Vec::new();
    write_diagnostics_csv(&mut csv, &comments, &out.records).unwrap();
    let mut states = Vec::new();
    for s in out.checkpoints.iter().chain([&initial, &out.final_state]) {
        let mut buf = Vec::new();
        write_state(s, &mut buf).unwrap();
        states.push(buf);
    }
    (csv, states, out)
}

fn determinism() -> Verdict {
    let text = "n = 64\ncfl = 0.5\nt_end = 0.5\npreset = random\nseed = 7\ncheckpoint_times = 0.25\n";
    let (csv_a, states_a, out) = artifacts(text);
    let (csv_b, states_b, _) = artifacts(text);
    let identical = csv_a == csv_b && states_a == states_b;

    let resumed_from = read_state(states_a[0].as_slice()).unwrap();
    let plan = config(text).plan();
    let resumed = run(&resumed_from, &plan).unwrap().final_state;
    let scale = out.final_state.omega_hat.coeff_norm_sqr().sqrt();
    let diff = out
        .final_state
        .omega_hat
        .max_abs_diff(&resumed.omega_hat)
        .max(out.final_state.theta_hat.max_abs_diff(&resumed.theta_hat))
        / scale;
    Verdict {
        passed: identical && diff <= 1e-12 && resumed.t == out.final_state.t,
        detail: format!(
            "artifacts bit-identical: {identical}; resume from t={} differs by {diff:.1e}",
            resumed_from.t
        ),
    }
}

fn report(id: usize, name: &str, f: impl FnOnce() -> Verdict) -> bool {
    let start = Instant::now();
    let v = f();
    println!(
        "{} {id} {name}: {} [{:.1} s]",
        if v.passed { "PASS" } else { "FAIL" },
        v.detail,
        start.elapsed().as_secs_f64()
    );
    v.passed
}

fn main() {
    // Whole-run lengths are included in the budgets of the criteria that use
    // them, so the shared run is timed on its own.
    let start = Instant::now();
    let (_, shared) = simulate(TG_BLOB);
    let shared_elapsed = start.elapsed();

    let results = [
        report(1, "spectral exactness", spectral_exactness),
        report(2, "linear oracle", linear_oracle),
        report(3, "maximum principle", || max_principle(&shared.records, shared_elapsed)),
        report(4, "energy bound", || energy_bound(&shared.records)),
        report(5, "partition of unity and Bony reconstruction", partition_and_bony),
        report(6, "inequality suites", inequality_suites),
        report(7, "gamma smoothing", gamma_smoothing),
        report(8, "stability", stability),
        report(9, "determinism and IO", determinism),
    ];
    let failed = results.iter().filter(|p| !**p).count();
    println!("acceptance: {} passed, {failed} failed", results.len() - failed);
    if failed > 0 {
        std::process::exit(1);
    }
}
