//! Parameter extraction: Lorentzian line fits, weighted linear regression,
//! control-power calibration of the Raman linewidth, and the `S η_act`
//! calibration table.
//!
//! All fits are deterministic; initial guesses come from fixed rules so that
//! repeated runs give bit-identical results.

use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::spectra::Spectrum;

const MAX_ITERATIONS: usize = 200;
const PARAM_TOLERANCE: f64 = 1e-8;

/// Result of a damped least-squares run.
#[derive(Debug, Clone, Copy)]
pub(crate) struct LmOutcome<const P: usize> {
    pub params: [f64; P],
    pub iterations: usize,
    pub converged: bool,
}

/// Levenberg–Marquardt on `Σ (y − model(x))²`. `model` returns the value and
/// the gradient with respect to the parameters.
pub(crate) fn levenberg_marquardt<const P: usize, F>(
    x: &[f64],
    y: &[f64],
    init: [f64; P],
    model: F,
) -> LmOutcome<P>
where
    F: Fn(f64, &[f64; P]) -> (f64, [f64; P]),
{
    let cost = |p: &[f64; P]| -> f64 {
        x.iter()
            .zip(y)
            .map(|(&xi, &yi)| {
                let r = yi - model(xi, p).0;
                r * r
            })
            .sum()
    };
    let mut params = init;
    let mut current = cost(&params);
    let mut lambda = 1e-3;

    for iteration in 1..=MAX_ITERATIONS {
        let mut jtj = [[0.0; P]; P];
        let mut jtr = [0.0; P];
        for (&xi, &yi) in x.iter().zip(y) {
            let (v, g) = model(xi, &params);
            let r = yi - v;
            for a in 0..P {
                jtr[a] += g[a] * r;
                for b in a..P {
                    jtj[a][b] += g[a] * g[b];
                }
            }
        }
        for a in 0..P {
            for b in 0..a {
                jtj[a][b] = jtj[b][a];
            }
        }

        loop {
            let mut damped = jtj;
            for (a, row) in damped.iter_mut().enumerate() {
                row[a] += lambda * jtj[a][a].max(1e-300);
            }
            let Some(step) = solve(damped, jtr) else {
                lambda *= 10.0;
                if lambda > 1e20 {
                    return LmOutcome { params, iterations: iteration, converged: false };
                }
                continue;
            };
            let small = step
                .iter()
                .zip(&params)
                .all(|(s, p)| s.abs() <= PARAM_TOLERANCE * p.abs().max(1.0));
            let mut trial = params;
            for a in 0..P {
                trial[a] += step[a];
            }
            let trial_cost = cost(&trial);
            if trial_cost.is_finite() && trial_cost <= current {
                params = trial;
                current = trial_cost;
                lambda = (lambda * 0.1).max(1e-12);
                if small {
                    return LmOutcome { params, iterations: iteration, converged: true };
                }
                break;
            }
            if small {
                // no further decrease is possible at this resolution
                return LmOutcome { params, iterations: iteration, converged: true };
            }
            lambda *= 10.0;
            if lambda > 1e20 {
                return LmOutcome { params, iterations: iteration, converged: false };
            }
        }
    }
    LmOutcome { params, iterations: MAX_ITERATIONS, converged: false }
}

/// Gaussian elimination with partial pivoting.
fn solve<const P: usize>(mut a: [[f64; P]; P], mut b: [f64; P]) -> Option<[f64; P]> {
    for col in 0..P {
        let pivot = (col..P).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[pivot][col].abs() < 1e-300 || !a[pivot][col].is_finite() {
            return None;
        }
        a.swap(col, pivot);
        b.swap(col, pivot);
        for row in col + 1..P {
            let factor = a[row][col] / a[col][col];
            for k in col..P {
                a[row][k] -= factor * a[col][k];
            }
            b[row] -= factor * b[col];
        }
    }
    let mut x = [0.0; P];
    for row in (0..P).rev() {
        let tail: f64 = (row + 1..P).map(|k| a[row][k] * x[k]).sum();
        x[row] = (b[row] - tail) / a[row][row];
    }
    x.iter().all(|v| v.is_finite()).then_some(x)
}

/// `y = A / (1 + ((x − x₀)/h)²) + B` with `fwhm = 2h`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LorentzianFit {
    pub amplitude: f64,
    pub center: f64,
    pub fwhm: f64,
    pub baseline: f64,
    /// RMS residual divided by `|amplitude|`.
    pub rms_residual: f64,
    pub iterations: usize,
    pub converged: bool,
}

impl LorentzianFit {
    pub fn eval(&self, x: f64) -> f64 {
        let u = 2.0 * (x - self.center) / self.fwhm;
        self.amplitude / (1.0 + u * u) + self.baseline
    }
}

fn lorentzian(x: f64, p: &[f64; 4]) -> (f64, [f64; 4]) {
    let [a, x0, h, b] = *p;
    let u = (x - x0) / h;
    let q = 1.0 / (1.0 + u * u);
    let dq = 2.0 * a * u * q * q / h;
    (a * q + b, [q, dq, dq * u, 1.0])
}

/// Damped least-squares Lorentzian fit. Initial guesses: baseline from the
/// mean of the outer 5% of samples on each side, centre at the extreme
/// deviation, half-width from the interpolated half-maximum crossings.
pub fn fit_lorentzian(x: &[f64], y: &[f64]) -> Result<LorentzianFit> {
    let n = x.len();
    if n != y.len() {
        return Err(invalid("y", "x and y lengths differ"));
    }
    if n < 8 {
        return Err(invalid("x", format!("need at least 8 points, got {n}")));
    }
    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(l, h), &v| (l.min(v), h.max(v)));
    let x_mid = 0.5 * (lo + hi);
    let x_scale = 0.5 * (hi - lo);
    let y_scale = y.iter().fold(0.0f64, |m, v| m.max(v.abs()));
    if !(x_scale > 0.0) {
        return Err(Error::DegenerateData("all abscissae are equal"));
    }
    if y.iter().all(|&v| v == y[0]) || y_scale == 0.0 {
        return Err(Error::DegenerateData("constant ordinate"));
    }
    let xs: Vec<f64> = x.iter().map(|v| (v - x_mid) / x_scale).collect();
    let ys: Vec<f64> = y.iter().map(|v| v / y_scale).collect();

    let edge = (n / 20).max(1);
    let baseline = (ys[..edge].iter().sum::<f64>() + ys[n - edge..].iter().sum::<f64>())
        / (2 * edge) as f64;
    let (peak, amp) = ys
        .iter()
        .map(|v| v - baseline)
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .unwrap();
    if peak == 0 || peak == n - 1 {
        return Err(Error::PeakAtEdge { index: peak, len: n });
    }
    let half = 0.5 * amp.abs();
    let crossing = |range: &mut dyn Iterator<Item = usize>| -> Option<f64> {
        let mut prev = peak;
        for i in range {
            let dev = (ys[i] - baseline) * amp.signum();
            if dev < half {
                let dprev = (ys[prev] - baseline) * amp.signum();
                let t = (dprev - half) / (dprev - dev);
                return Some(xs[prev] + t * (xs[i] - xs[prev]));
            }
            prev = i;
        }
        None
    };
    let left = crossing(&mut (0..peak).rev()).unwrap_or(xs[0]);
    let right = crossing(&mut (peak + 1..n)).unwrap_or(xs[n - 1]);
    let mut h0 = 0.5 * (right - left).abs();
    if !(h0 > 0.0) {
        h0 = (xs[1] - xs[0]).abs();
    }

    let out = levenberg_marquardt(&xs, &ys, [amp, xs[peak], h0, baseline], lorentzian);
    let [a, x0, h, b] = out.params;
    let residual_sq: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(&xi, &yi)| {
            let r = yi - lorentzian(xi, &out.params).0;
            r * r
        })
        .sum();
    let fit = LorentzianFit {
        amplitude: a * y_scale,
        center: x0 * x_scale + x_mid,
        fwhm: 2.0 * h.abs() * x_scale,
        baseline: b * y_scale,
        rms_residual: (residual_sq / n as f64).sqrt() / a.abs(),
        iterations: out.iterations,
        converged: out.converged,
    };
    if !out.converged {
        return Err(Error::NonConvergence {
            iterations: out.iterations,
            best: Box::new(fit),
        });
    }
    Ok(fit)
}

/// Weighted least-squares line `y = slope·x + intercept`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LinearFit {
    pub slope: f64,
    pub intercept: f64,
    /// Standard errors; `None` with only two points.
    pub slope_stderr: Option<f64>,
    pub intercept_stderr: Option<f64>,
    pub r_squared: f64,
}

impl LinearFit {
    pub fn eval(&self, x: f64) -> f64 {
        self.slope * x + self.intercept
    }
}

pub fn linear_fit(x: &[f64], y: &[f64], weights: Option<&[f64]>) -> Result<LinearFit> {
    let n = x.len();
    if y.len() != n {
        return Err(invalid("y", "x and y lengths differ"));
    }
    if let Some(w) = weights {
        if w.len() != n {
            return Err(invalid("weights", "length differs from x"));
        }
        if w.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(invalid("weights", "must be finite and > 0"));
        }
    }
    if n < 2 {
        return Err(invalid("x", "need at least 2 points"));
    }
    let weight = |i: usize| weights.map_or(1.0, |w| w[i]);
    let total: f64 = (0..n).map(weight).sum();
    let x_mean = (0..n).map(|i| weight(i) * x[i]).sum::<f64>() / total;
    let y_mean = (0..n).map(|i| weight(i) * y[i]).sum::<f64>() / total;
    let sxx: f64 = (0..n).map(|i| weight(i) * (x[i] - x_mean).powi(2)).sum();
    let sxy: f64 = (0..n)
        .map(|i| weight(i) * (x[i] - x_mean) * (y[i] - y_mean))
        .sum();
    if x.iter().all(|&v| v == x[0]) || !(sxx > 0.0) {
        return Err(Error::RankDeficient);
    }
    let slope = sxy / sxx;
    let intercept = y_mean - slope * x_mean;
    let ss_res: f64 = (0..n)
        .map(|i| weight(i) * (y[i] - slope * x[i] - intercept).powi(2))
        .sum();
    let ss_tot: f64 = (0..n).map(|i| weight(i) * (y[i] - y_mean).powi(2)).sum();
    let r_squared = if ss_tot > 0.0 { 1.0 - ss_res / ss_tot } else { 1.0 };
    let (slope_stderr, intercept_stderr) = if n > 2 {
        let s2 = ss_res / (n - 2) as f64;
        (
            Some((s2 / sxx).sqrt()),
            Some((s2 * (1.0 / total + x_mean * x_mean / sxx)).sqrt()),
        )
    } else {
        (None, None)
    };
    Ok(LinearFit {
        slope,
        intercept,
        slope_stderr,
        intercept_stderr,
        r_squared,
    })
}

/// Piecewise-linear `(P_c, S η_act)` table, clamped outside its range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SEtaTable {
    points: Vec<(f64, f64)>,
}

impl SEtaTable {
    pub fn new(mut points: Vec<(f64, f64)>) -> Result<Self> {
        if points.is_empty() {
            return Err(invalid("s_eta_table", "table is empty"));
        }
        if points.iter().any(|(p, v)| !p.is_finite() || !v.is_finite()) {
            return Err(invalid("s_eta_table", "entries must be finite"));
        }
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        if points.windows(2).any(|w| w[0].0 == w[1].0) {
            return Err(invalid("s_eta_table", "duplicate power entries"));
        }
        Ok(Self { points })
    }

    pub fn points(&self) -> &[(f64, f64)] {
        &self.points
    }

    pub fn interpolate(&self, power: f64) -> f64 {
        let pts = &self.points;
        if power <= pts[0].0 {
            return pts[0].1;
        }
        let last = pts[pts.len() - 1];
        if power >= last.0 {
            return last.1;
        }
        let i = pts.partition_point(|p| p.0 <= power) - 1;
        let (p0, v0) = pts[i];
        let (p1, v1) = pts[i + 1];
        v0 + (v1 - v0) * (power - p0) / (p1 - p0)
    }
}

/// Linear map from control power to on-resonance broadening, `Ω² = κ P_c`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PowerCalibration {
    /// Rabi frequency squared per unit power, rad²/s² per mW.
    pub kappa: f64,
    /// Raman decoherence rate from the zero-power intercept, rad/s.
    pub gamma_extrapolated: f64,
    pub gamma_1p: f64,
    /// Half-width `γ + Re Γ` against power.
    pub line: LinearFit,
    /// Measured `(P_c, half-width)` pairs.
    pub widths: Vec<(f64, f64)>,
    pub s_eta: Option<SEtaTable>,
}

impl PowerCalibration {
    /// On-resonance power broadening `Γ = 2 κ P_c / γ₁ₚ`.
    pub fn gamma_power(&self, power: f64) -> f64 {
        2.0 * self.kappa * power / self.gamma_1p
    }

    pub fn rabi(&self, power: f64) -> f64 {
        (self.kappa * power).max(0.0).sqrt()
    }
}

/// Fits each Δ = 0 generation spectrum to a Lorentzian and regresses its
/// half-width on control power. The intercept is `γ`; the slope is `2κ/γ₁ₚ`.
/// Valid for weak EIT; at larger `S η_act` the generation line is narrowed by
/// roughly `1 − S f/2`.
pub fn calibrate_power(spectra: &[(f64, Spectrum)], gamma_1p: f64) -> Result<PowerCalibration> {
    if spectra.len() < 3 {
        return Err(invalid(
            "spectra",
            format!("need at least 3 powers, got {}", spectra.len()),
        ));
    }
    if !(gamma_1p > 0.0) {
        return Err(invalid("gamma_1p", "must be > 0"));
    }
    let widths = spectra
        .iter()
        .map(|(power, sp)| {
            let fit = fit_lorentzian(&sp.grid.omegas(), &sp.power_signal)?;
            Ok((*power, 0.5 * fit.fwhm))
        })
        .collect::<Result<Vec<_>>>()?;
    let (p, w): (Vec<f64>, Vec<f64>) = widths.iter().copied().unzip();
    let line = linear_fit(&p, &w, None)?;
    if !(line.intercept > 0.0) {
        return Err(Error::Inconsistent(format!(
            "zero-power linewidth intercept {:e} rad/s is not positive",
            line.intercept
        )));
    }
    let kappa = line.slope * gamma_1p / 2.0;
    if !(kappa > 0.0) {
        return Err(Error::Inconsistent(format!(
            "linewidth does not grow with power (slope {:e})",
            line.slope
        )));
    }
    Ok(PowerCalibration {
        kappa,
        gamma_extrapolated: line.intercept,
        gamma_1p,
        line,
        widths,
        s_eta: None,
    })
}

/// Quadratic interpolation through the three samples nearest `omega`.
fn sample_at(sp: &Spectrum, y: &[f64], omega: f64) -> f64 {
    let n = sp.grid.len();
    let pos = (omega - sp.grid.start()) / sp.grid.step();
    let i = (pos.round() as isize).clamp(1, n as isize - 2) as usize;
    let t = pos - i as f64;
    let (a, b, c) = (y[i - 1], y[i], y[i + 1]);
    b + 0.5 * t * (c - a) + 0.5 * t * t * (a - 2.0 * b + c)
}

/// Extracts `S η_act` at each power from Δ = 0 spectra.
///
/// On resonance `t_s / t_p = tanh(x/2)` with `x = S f(0) = S η_act Γ/(γ + Γ)`,
/// so `x` follows from the two measured powers without knowing the optical
/// depth. `Γ` and `γ` come from `calibration`.
pub fn calibrate_s_eta(
    spectra: &[(f64, Spectrum)],
    calibration: &PowerCalibration,
) -> Result<SEtaTable> {
    if spectra.is_empty() {
        return Err(invalid("spectra", "no spectra given"));
    }
    let rows = spectra
        .iter()
        .map(|(power, sp)| {
            if !(*power > 0.0) {
                return Err(invalid("power", format!("must be > 0, got {power}")));
            }
            let fit = fit_lorentzian(&sp.grid.omegas(), &sp.power_signal)?;
            let p_s = sample_at(sp, &sp.power_signal, fit.center).max(0.0);
            let p_p = sample_at(sp, &sp.power_probe, fit.center);
            if !(p_p > 0.0) {
                return Err(Error::DegenerateData("probe fully absorbed on resonance"));
            }
            let ratio = (p_s / p_p).sqrt();
            if ratio >= 1.0 {
                return Err(Error::OutOfValidity(f64::INFINITY));
            }
            let x = 2.0 * ratio.atanh();
            if x > 0.3 {
                return Err(Error::OutOfValidity(x));
            }
            let broadening = calibration.gamma_power(*power);
            let width = calibration.gamma_extrapolated + broadening;
            Ok((*power, x * width / broadening))
        })
        .collect::<Result<Vec<_>>>()?;
    SEtaTable::new(rows)
}
