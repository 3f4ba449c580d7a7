//! Two-photon frequency scans of the transmitted probe and generated signal,
//! line contrast, and lineshape symmetry diagnostics.

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::model::{efficiency, DriveState, MediumParams, TransferModel};

/// Half-linewidths covered on either side of resonance by the default grid.
pub const DEFAULT_SPAN_HALF_WIDTHS: f64 = 20.0;
pub const DEFAULT_GRID_POINTS: usize = 4096;

/// Uniform grid of two-photon detunings, rad/s.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    start: f64,
    step: f64,
    count: usize,
}

impl FrequencyGrid {
    /// `count` points from `start` to `stop` inclusive.
    pub fn new(start: f64, stop: f64, count: usize) -> Result<Self> {
        if count < 3 {
            return Err(invalid("count", format!("need at least 3 points, got {count}")));
        }
        if !(start.is_finite() && stop.is_finite() && stop > start) {
            return Err(invalid("grid", format!("need finite start < stop, got [{start}, {stop}]")));
        }
        Ok(Self {
            start,
            step: (stop - start) / (count - 1) as f64,
            count,
        })
    }

    pub fn centered(center: f64, half_span: f64, count: usize) -> Result<Self> {
        Self::new(center - half_span, center + half_span, count)
    }

    /// ±20 half-linewidths around the light-shifted resonance, 4096 points.
    pub fn default_for(model: &TransferModel) -> Result<Self> {
        Self::centered(
            model.resonance(),
            DEFAULT_SPAN_HALF_WIDTHS * model.half_linewidth(),
            DEFAULT_GRID_POINTS,
        )
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    pub fn start(&self) -> f64 {
        self.start
    }

    pub fn stop(&self) -> f64 {
        self.omega(self.count - 1)
    }

    pub fn omega(&self, i: usize) -> f64 {
        self.start + self.step * i as f64
    }

    pub fn omegas(&self) -> Vec<f64> {
        (0..self.count).map(|i| self.omega(i)).collect()
    }

    /// Linear interpolation of `y` (sampled on this grid) at `omega`.
    pub fn interpolate(&self, y: &[f64], omega: f64) -> f64 {
        let pos = ((omega - self.start) / self.step).clamp(0.0, (self.count - 1) as f64);
        let i = (pos.floor() as usize).min(self.count - 2);
        let frac = pos - i as f64;
        y[i] * (1.0 - frac) + y[i + 1] * frac
    }
}

/// Probe transmission `|t_p|²` and generation `|t_s|²` over a grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub grid: FrequencyGrid,
    pub power_probe: Vec<f64>,
    pub power_signal: Vec<f64>,
}

pub fn scan_spectrum(
    medium: &MediumParams,
    drive: &DriveState,
    grid: &FrequencyGrid,
) -> Result<Spectrum> {
    let model = TransferModel::new(medium, drive)?;
    let (power_probe, power_signal) = (0..grid.len())
        .map(|i| {
            let a = model.amplitudes(grid.omega(i));
            (a.t_p.norm_sqr(), a.t_s.norm_sqr())
        })
        .unzip();
    Ok(Spectrum {
        grid: *grid,
        power_probe,
        power_signal,
    })
}

/// Line contrast `|P_r − P_∞| / (P_r + P_∞)`.
pub fn contrast(power_on_resonance: f64, power_off_resonance: f64) -> Result<f64> {
    if power_on_resonance < 0.0 || power_off_resonance < 0.0 {
        return Err(invalid("power", "powers must be >= 0"));
    }
    let sum = power_on_resonance + power_off_resonance;
    if sum == 0.0 {
        return Err(Error::UndefinedContrast);
    }
    Ok((power_on_resonance - power_off_resonance).abs() / sum)
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ContrastOptions {
    /// Two-photon detuning for the off-resonance reading. `None` takes the
    /// `ω → ∞` asymptote, where `f` vanishes.
    pub off_resonance_omega: Option<f64>,
    /// Detector floor added to both signal readings.
    pub noise_floor: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ContrastPoint {
    pub probe: f64,
    pub signal: f64,
    /// Generated power on resonance, without the noise floor.
    pub peak_efficiency: f64,
    /// `|S f|` on resonance.
    pub weak_parameter: f64,
}

/// Probe and signal contrast for each drive. The on-resonance reading sits at
/// the light-shifted line centre `ω = Im Γ`.
pub fn contrast_sweep(
    medium: &MediumParams,
    drives: &[DriveState],
    options: &ContrastOptions,
) -> Result<Vec<ContrastPoint>> {
    if !(options.noise_floor >= 0.0) {
        return Err(invalid("noise_floor", "must be >= 0"));
    }
    drives
        .iter()
        .map(|drive| {
            let model = TransferModel::new(medium, drive)?;
            let center = model.resonance();
            let off = options.off_resonance_omega.unwrap_or(f64::INFINITY);
            let linewidth = 2.0 * model.half_linewidth();
            if (off - center).abs() < 20.0 * linewidth {
                warn!(
                    "off-resonance detuning {off:e} rad/s is within 20 linewidths ({:e} rad/s) of resonance",
                    20.0 * linewidth
                );
            }
            let on = model.amplitudes(center);
            let far = model.amplitudes(off);
            let peak = efficiency(on.t_s);
            let probe = contrast(on.t_p.norm_sqr(), far.t_p.norm_sqr())?;
            let signal = contrast(
                peak + options.noise_floor,
                efficiency(far.t_s) + options.noise_floor,
            )?;
            Ok(ContrastPoint {
                probe,
                signal,
                peak_efficiency: peak,
                weak_parameter: model.weak_parameter(center),
            })
        })
        .collect()
}

/// Mirror-symmetry residual of a line about its centre; 0 for an even line.
///
/// The baseline is the mean of the two end samples. The centre is the
/// deviation-weighted centroid of the samples within 10% of the extreme
/// deviation, and the residual is the RMS of `y(ω₀+δ) − y(ω₀−δ)` over all
/// grid-step offsets that stay inside the grid, divided by the extreme
/// deviation.
pub fn lineshape_asymmetry(y: &[f64], grid: &FrequencyGrid) -> Result<f64> {
    let n = grid.len();
    if y.len() != n {
        return Err(invalid("spectrum", format!("{} samples for a {n}-point grid", y.len())));
    }
    let baseline = 0.5 * (y[0] + y[n - 1]);
    let (peak_idx, peak_dev) = y
        .iter()
        .map(|v| v - baseline)
        .enumerate()
        .max_by(|a, b| a.1.abs().total_cmp(&b.1.abs()))
        .unwrap();
    if peak_dev == 0.0 {
        return Err(Error::DegenerateData("flat spectrum has no line"));
    }
    if peak_idx == 0 || peak_idx == n - 1 {
        return Err(Error::PeakAtEdge { index: peak_idx, len: n });
    }
    let sign = peak_dev.signum();
    let scale = peak_dev.abs();
    let mut weight = 0.0;
    let mut moment = 0.0;
    for (i, v) in y.iter().enumerate() {
        let dev = sign * (v - baseline);
        if dev >= 0.9 * scale {
            if i == 0 || i == n - 1 {
                return Err(Error::PeakAtEdge { index: i, len: n });
            }
            weight += dev;
            moment += dev * grid.omega(i);
        }
    }
    let center = moment / weight;
    let h = grid.step();
    let reach = (center - grid.start()).min(grid.stop() - center);
    let pairs = (reach / h).floor() as usize;
    if pairs < 1 {
        return Err(Error::PeakAtEdge { index: peak_idx, len: n });
    }
    let sum_sq: f64 = (1..=pairs)
        .map(|j| {
            let delta = j as f64 * h;
            let diff = grid.interpolate(y, center + delta) - grid.interpolate(y, center - delta);
            diff * diff
        })
        .sum();
    Ok((sum_sq / pairs as f64).sqrt() / scale)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use std::f64::consts::PI;

    fn medium() -> MediumParams {
        MediumParams {
            d: 2.5,
            gamma_1p: 2.0 * PI * 300e6,
            gamma: 1.0 / 3e-3,
            eta_act: 0.3,
            diffusion: 0.0,
        }
    }

    #[test]
    fn grid_construction() {
        let g = FrequencyGrid::new(-1.0, 1.0, 5).unwrap();
        assert_eq!(g.omegas(), vec![-1.0, -0.5, 0.0, 0.5, 1.0]);
        assert!(FrequencyGrid::new(0.0, 1.0, 2).is_err());
        assert!(FrequencyGrid::new(1.0, 0.0, 10).is_err());
        assert_relative_eq!(g.interpolate(&[0.0, 1.0, 2.0, 3.0, 4.0], 0.25), 2.5);
    }

    #[test]
    fn no_control_no_signal() {
        let m = medium();
        let grid = FrequencyGrid::centered(0.0, 1e4, 101).unwrap();
        let sp = scan_spectrum(&m, &DriveState::new(0.0, 0.0), &grid).unwrap();
        assert!(sp.power_signal.iter().all(|&p| p == 0.0));
        let base = (-2.0 * m.d).exp();
        for p in &sp.power_probe {
            assert_relative_eq!(*p, base, max_relative = 1e-14);
        }
    }

    #[test]
    fn resonant_signal_is_symmetric() {
        let m = medium();
        let drive = DriveState::resonant_with_broadening(&m, m.gamma);
        let grid = FrequencyGrid::centered(0.0, 5e3, 401).unwrap();
        let sp = scan_spectrum(&m, &drive, &grid).unwrap();
        let n = grid.len();
        for i in 0..n / 2 {
            assert_relative_eq!(
                sp.power_signal[i],
                sp.power_signal[n - 1 - i],
                max_relative = 1e-12
            );
        }
    }

    #[test]
    fn width_230_hz_line() {
        // half-width π·230 rad/s ⇒ |f|² FWHM = 2π·230 rad/s = 230 Hz; weak EIT
        let m = MediumParams { d: 0.1, eta_act: 0.05, ..medium() };
        let target = PI * 230.0;
        let drive = DriveState::resonant_with_broadening(&m, target - m.gamma);
        let model = TransferModel::new(&m, &drive).unwrap();
        let grid = FrequencyGrid::default_for(&model).unwrap();
        let sp = scan_spectrum(&m, &drive, &grid).unwrap();
        let fit = crate::fitting::fit_lorentzian(&grid.omegas(), &sp.power_signal).unwrap();
        let hz = fit.fwhm / (2.0 * PI);
        assert!((hz / 230.0 - 1.0).abs() < 0.01, "fwhm = {hz} Hz");
    }

    #[test]
    fn contrast_examples() {
        assert_eq!(contrast(0.3, 0.0).unwrap(), 1.0);
        assert_eq!(contrast(0.2, 0.2).unwrap(), 0.0);
        assert_relative_eq!(contrast(3.0, 1.0).unwrap(), 0.5);
        assert!(matches!(contrast(0.0, 0.0), Err(Error::UndefinedContrast)));
        assert!(contrast(-1.0, 1.0).is_err());
    }

    #[test]
    fn contrast_sweep_behaviour() {
        let m = medium();
        let drives: Vec<DriveState> = [1e-4, 1e-2, 1.0]
            .iter()
            .map(|r| DriveState::resonant_with_broadening(&m, r * m.gamma))
            .collect();
        let pts = contrast_sweep(&m, &drives, &ContrastOptions::default()).unwrap();
        for p in &pts {
            assert_eq!(p.signal, 1.0);
        }
        assert!(pts[0].probe < pts[1].probe && pts[1].probe < pts[2].probe);
        assert!(pts[0].probe < 0.05);

        let strong = &drives[2..];
        let peak = pts[2].peak_efficiency;
        let noisy = ContrastOptions { noise_floor: 10.0 * peak, ..Default::default() };
        let p = contrast_sweep(&m, strong, &noisy).unwrap()[0];
        // (β + N) vs (0 + N) with N = 10β
        assert_relative_eq!(p.signal, 1.0 / 21.0, max_relative = 1e-12);
        assert!(p.signal < 1.0);
    }

    #[test]
    fn contrast_at_finite_offset() {
        let m = medium();
        let drive = DriveState::resonant_with_broadening(&m, m.gamma);
        let a = 2.0 * m.gamma;
        let opts = ContrastOptions { off_resonance_omega: Some(400.0 * a), noise_floor: 0.0 };
        let p = contrast_sweep(&m, &[drive], &opts).unwrap()[0];
        assert!(p.signal > 0.9999 && p.signal < 1.0);
    }

    fn lorentz(grid: &FrequencyGrid, x0: f64, h: f64) -> Vec<f64> {
        grid.omegas()
            .iter()
            .map(|w| 1.0 / (1.0 + ((w - x0) / h).powi(2)))
            .collect()
    }

    #[test]
    fn asymmetry_of_even_line() {
        let grid = FrequencyGrid::centered(0.0, 20.0, 4096).unwrap();
        let y = lorentz(&grid, 0.0123, 1.0);
        assert!(lineshape_asymmetry(&y, &grid).unwrap() < 1e-3);
    }

    #[test]
    fn asymmetry_of_ramp() {
        let grid = FrequencyGrid::centered(0.0, 20.0, 4096).unwrap();
        let y: Vec<f64> = lorentz(&grid, 0.0, 1.0)
            .iter()
            .zip(grid.omegas())
            .map(|(l, w)| l + 0.01 * w)
            .collect();
        assert!(lineshape_asymmetry(&y, &grid).unwrap() > 1e-2);
    }

    #[test]
    fn asymmetry_edge_errors() {
        let grid = FrequencyGrid::centered(0.0, 20.0, 101).unwrap();
        let y: Vec<f64> = grid.omegas().iter().map(|w| (w + 20.0).powi(4)).collect();
        assert!(matches!(lineshape_asymmetry(&y, &grid), Err(Error::PeakAtEdge { .. })));
        assert!(lineshape_asymmetry(&vec![1.0; 101], &grid).is_err());
    }

    #[test]
    fn generation_symmetric_probe_fano_when_detuned() {
        let m = MediumParams { eta_act: 0.1, ..medium() };
        let drive0 = DriveState::resonant_with_broadening(&m, m.gamma);
        let drive = DriveState { delta: 2.0 * PI * 880e6, ..drive0 };
        let model = TransferModel::new(&m, &drive).unwrap();
        let grid = FrequencyGrid::default_for(&model).unwrap();
        let sp = scan_spectrum(&m, &drive, &grid).unwrap();
        let gen = lineshape_asymmetry(&sp.power_signal, &grid).unwrap();
        let probe = lineshape_asymmetry(&sp.power_probe, &grid).unwrap();
        assert!(gen < 1e-2, "gen = {gen}");
        assert!(probe > 10.0 * gen, "probe = {probe}, gen = {gen}");
    }

    #[test]
    fn baselines_far_from_resonance() {
        let m = medium();
        let drive = DriveState::new(2.0e5, 2.0 * PI * 440e6);
        let model = TransferModel::new(&m, &drive).unwrap();
        let far = 1e7 * model.half_linewidth();
        let grid = FrequencyGrid::centered(0.0, far, 3).unwrap();
        let sp = scan_spectrum(&m, &drive, &grid).unwrap();
        let base = (-2.0 * model.s.re).exp();
        for i in [0, 2] {
            assert_relative_eq!(sp.power_probe[i], base, max_relative = 1e-6);
            assert!(sp.power_signal[i] < 1e-12 * base);
        }
    }
}
