//! Small least-squares fits used by the trajectory checks.

/// Straight line `y = slope·x + intercept`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct LineFit {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
}

pub fn linear_regression(xs: &[f64], ys: &[f64]) -> Option<LineFit> {
    let n = xs.len();
    if n < 2 || n != ys.len() {
        return None;
    }
    let mx = xs.iter().sum::<f64>() / n as f64;
    let my = ys.iter().sum::<f64>() / n as f64;
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    if sxx == 0.0 {
        return None;
    }
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    Some(LineFit {
        slope,
        intercept,
        r_squared: r_squared(ys, xs.iter().map(|x| slope * x + intercept)),
    })
}

/// Coefficient of determination of `predicted` against `observed`.
/// A constant observation that is reproduced exactly scores 1.
pub fn r_squared(observed: &[f64], predicted: impl Iterator<Item = f64>) -> f64 {
    let mean = observed.iter().sum::<f64>() / observed.len() as f64;
    let ss_tot: f64 = observed.iter().map(|y| (y - mean).powi(2)).sum();
    let ss_res: f64 = observed
        .iter()
        .zip(predicted)
        .map(|(y, p)| (y - p).powi(2))
        .sum();
    if ss_tot == 0.0 {
        if ss_res == 0.0 {
            1.0
        } else {
            f64::NEG_INFINITY
        }
    } else {
        1.0 - ss_res / ss_tot
    }
}

/// `y = amplitude · (e^{rate·t} - 1) / rate`, the integral of a single
/// exponential `amplitude·e^{rate·t}` from 0 (linear in `t` when
/// `rate = 0`).
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct ExponentialFit {
    pub amplitude: f64,
    pub rate: f64,
    pub r_squared: f64,
}

impl ExponentialFit {
    pub fn eval(&self, t: f64) -> f64 {
        self.amplitude * growth_basis(self.rate, t)
    }
}

fn growth_basis(rate: f64, t: f64) -> f64 {
    if rate.abs() * t < 1e-12 {
        t
    } else {
        (rate * t).exp_m1() / rate
    }
}

/// Best amplitude for a fixed rate, and the resulting residual sum.
fn profile(ts: &[f64], ys: &[f64], rate: f64) -> (f64, f64) {
    let basis: Vec<f64> = ts.iter().map(|&t| growth_basis(rate, t)).collect();
    let bb: f64 = basis.iter().map(|b| b * b).sum();
    if bb == 0.0 {
        return (0.0, ys.iter().map(|y| y * y).sum());
    }
    let amp = basis.iter().zip(ys).map(|(b, y)| b * y).sum::<f64>() / bb;
    let sse = basis
        .iter()
        .zip(ys)
        .map(|(b, y)| (y - amp * b).powi(2))
        .sum();
    (amp, sse)
}

/// Least-squares fit of the integrated-exponential model. The rate is
/// searched on `[-max_rate, max_rate]` by a coarse scan followed by golden
/// section refinement; the amplitude is solved in closed form.
pub fn fit_integrated_exponential(ts: &[f64], ys: &[f64], max_rate: f64) -> Option<ExponentialFit> {
    if ts.len() < 3 || ts.len() != ys.len() || !ys.iter().all(|y| y.is_finite()) {
        return None;
    }
    let t_span = ts.iter().fold(0.0f64, |m, t| m.max(t.abs()));
    if t_span == 0.0 {
        return None;
    }
    let scan = 400;
    let grid_rate = |i: usize| -max_rate + 2.0 * max_rate * i as f64 / scan as f64;
    let best = (0..=scan)
        .map(|i| (i, profile(ts, ys, grid_rate(i)).1))
        .min_by(|a, b| a.1.total_cmp(&b.1))?
        .0;
    let mut lo = grid_rate(best.saturating_sub(1));
    let mut hi = grid_rate((best + 1).min(scan));
    let phi = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..100 {
        let a = hi - phi * (hi - lo);
        let b = lo + phi * (hi - lo);
        if profile(ts, ys, a).1 <= profile(ts, ys, b).1 {
            hi = b;
        } else {
            lo = a;
        }
    }
    let rate = 0.5 * (lo + hi);
    let (amplitude, _) = profile(ts, ys, rate);
    let fit = ExponentialFit {
        amplitude,
        rate,
        r_squared: 0.0,
    };
    Some(ExponentialFit {
        r_squared: r_squared(ys, ts.iter().map(|&t| fit.eval(t))),
        ..fit
    })
}

/// Envelope shapes `C·exp(C t)` and `C·exp(exp(C t))`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Envelope {
    SingleExponential,
    DoubleExponential,
}

impl Envelope {
    pub fn eval(self, c: f64, t: f64) -> f64 {
        match self {
            Envelope::SingleExponential => c * (c * t).exp(),
            Envelope::DoubleExponential => c * (c * t).exp().exp(),
        }
    }
}

/// Smallest `C >= 0` with `envelope(C, t) >= y` at every sample; `None`
/// when no finite constant exists (non-finite samples).
pub fn minimal_envelope_constant(series: &[(f64, f64)], envelope: Envelope) -> Option<f64> {
    let mut worst = 0.0f64;
    for &(t, y) in series {
        if !y.is_finite() || !t.is_finite() {
            return None;
        }
        if y <= 0.0 {
            continue;
        }
        let mut hi = 1.0f64;
        while envelope.eval(hi, t) < y {
            hi *= 2.0;
            if !hi.is_finite() {
                return None;
            }
        }
        let mut lo = 0.0;
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if envelope.eval(mid, t) >= y {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        worst = worst.max(hi);
    }
    Some(worst)
}
