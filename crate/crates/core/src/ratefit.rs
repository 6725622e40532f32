//! Least-squares decay fits of energy histories: `log E` against `t`
//! (exponential) or against `log t` (power law).
//!
//! Any fixed discretization decays exponentially in the end, so slow decay
//! shows up only in a pre-asymptotic window.

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FitKind {
    Exponential,
    Power,
}

impl FitKind {
    pub fn label(self) -> &'static str {
        match self {
            FitKind::Exponential => "exponential",
            FitKind::Power => "power",
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct DecayFit {
    pub kind: FitKind,
    /// Decay rate `−d log E/dt`, or exponent `d log E/d log t`.
    pub rate_or_exponent: f64,
    pub r_squared: f64,
    pub window: (f64, f64),
    pub samples: usize,
}

pub const MIN_SAMPLES: usize = 10;

/// Skips the first 10% of the horizon and stops before the energy drops
/// under `1e−13·E(0)`.
pub fn default_window(times: &[f64], energies: &[f64]) -> Result<(f64, f64)> {
    check_series(times, energies)?;
    let (t0, t1) = (times[0], times[times.len() - 1]);
    let start = t0 + 0.1 * (t1 - t0);
    let floor = 1e-13 * energies[0];
    let end = times
        .iter()
        .zip(energies)
        .take_while(|(_, e)| **e >= floor)
        .map(|(t, _)| *t)
        .last()
        .unwrap_or(t0);
    if end <= start {
        return Err(Error::Fit(format!(
            "energy reaches the floor at t = {end}, before the window start {start}"
        )));
    }
    Ok((start, end))
}

fn check_series(times: &[f64], energies: &[f64]) -> Result<()> {
    if times.len() != energies.len() {
        return Err(Error::Fit(format!(
            "{} times but {} energies",
            times.len(),
            energies.len()
        )));
    }
    if times.is_empty() {
        return Err(Error::Fit("empty series".into()));
    }
    if times.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::Fit("times must increase strictly".into()));
    }
    Ok(())
}

fn select(
    times: &[f64],
    energies: &[f64],
    window: Option<(f64, f64)>,
) -> Result<(Vec<f64>, Vec<f64>, (f64, f64))> {
    check_series(times, energies)?;
    let w = match window {
        Some(w) => w,
        None => default_window(times, energies)?,
    };
    let (first, last) = (times[0], times[times.len() - 1]);
    let slack = 1e-12 * (last - first).abs().max(1.0);
    if !(w.0 < w.1 && w.0 >= first - slack && w.1 <= last + slack) {
        return Err(Error::Fit(format!(
            "window [{}, {}] is not inside [{first}, {last}]",
            w.0, w.1
        )));
    }
    let (mut t, mut e) = (Vec::new(), Vec::new());
    for (&ti, &ei) in times.iter().zip(energies) {
        if ti >= w.0 - slack && ti <= w.1 + slack {
            if !(ei > 0.0 && ei.is_finite()) {
                return Err(Error::Fit(format!(
                    "energy {ei} at t = {ti} is not positive"
                )));
            }
            t.push(ti);
            e.push(ei);
        }
    }
    if t.len() < MIN_SAMPLES {
        return Err(Error::Fit(format!(
            "{} samples in the window, need {MIN_SAMPLES}",
            t.len()
        )));
    }
    Ok((t, e, w))
}

/// Slope and coefficient of determination of the least-squares line.
pub fn linear_fit(x: &[f64], y: &[f64]) -> (f64, f64, f64) {
    let n = x.len() as f64;
    let xm = x.iter().sum::<f64>() / n;
    let ym = y.iter().sum::<f64>() / n;
    let sxx: f64 = x.iter().map(|v| (v - xm) * (v - xm)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - xm) * (b - ym)).sum();
    let syy: f64 = y.iter().map(|v| (v - ym) * (v - ym)).sum();
    if y.iter().all(|v| *v == y[0]) {
        return (0.0, y[0], 1.0);
    }
    let slope = sxy / sxx;
    let intercept = ym - slope * xm;
    let r2 = ((sxy * sxy) / (sxx * syy)).clamp(0.0, 1.0);
    (slope, intercept, r2)
}

pub fn fit_exponential(
    times: &[f64],
    energies: &[f64],
    window: Option<(f64, f64)>,
) -> Result<DecayFit> {
    let (t, e, w) = select(times, energies, window)?;
    let y: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let (slope, _, r2) = linear_fit(&t, &y);
    Ok(DecayFit {
        kind: FitKind::Exponential,
        rate_or_exponent: -slope,
        r_squared: r2,
        window: w,
        samples: t.len(),
    })
}

pub fn fit_power(times: &[f64], energies: &[f64], window: Option<(f64, f64)>) -> Result<DecayFit> {
    let (t, e, w) = select(times, energies, window)?;
    if t[0] <= 0.0 {
        return Err(Error::Fit(format!(
            "power fit needs t > 0, window starts at {}",
            t[0]
        )));
    }
    let x: Vec<f64> = t.iter().map(|v| v.ln()).collect();
    let y: Vec<f64> = e.iter().map(|v| v.ln()).collect();
    let (slope, _, r2) = linear_fit(&x, &y);
    Ok(DecayFit {
        kind: FitKind::Power,
        rate_or_exponent: slope,
        r_squared: r2,
        window: w,
        samples: t.len(),
    })
}
