//! Group delays of the transmitted probe and the generated signal.
//!
//! Three routes are provided and cross-checked:
//! * closed-form weak-EIT delays at `ω = 0`,
//! * the central-difference phase slope `Im ∂ω ln t(ω)` of the exact transfer
//!   functions,
//! * FFT propagation of a Gaussian pulse and the shift of its intensity
//!   centroid.
//!
//! Envelopes evolve as `e^{−iωt}`, so a pure delay `τ₀` is the transfer
//! function `e^{iωτ₀}` and `1/(γ + Γ − iω)` delays by `1/(γ + Γ)`.

use std::f64::consts::PI;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fourier;
use crate::model::{DriveState, MediumParams, TransferModel, C64};

/// Uniformly sampled complex envelope.
#[derive(Debug, Clone, PartialEq)]
pub struct Pulse {
    /// Sample spacing, s.
    pub dt: f64,
    /// Time of the first sample, s.
    pub t0: f64,
    pub samples: Vec<C64>,
}

impl Pulse {
    pub fn new(dt: f64, t0: f64, samples: Vec<C64>) -> Result<Self> {
        if !(dt > 0.0 && dt.is_finite()) {
            return Err(invalid("dt", format!("must be finite and > 0, got {dt}")));
        }
        if !t0.is_finite() {
            return Err(invalid("t0", "must be finite"));
        }
        if samples.is_empty() {
            return Err(invalid("samples", "pulse has no samples"));
        }
        Ok(Self { dt, t0, samples })
    }

    /// Gaussian envelope whose intensity falls to `1/e` at `center ± duration/2`.
    pub fn gaussian(center: f64, duration: f64, dt: f64, len: usize) -> Result<Self> {
        if !(duration > 0.0) {
            return Err(invalid("duration", "must be > 0"));
        }
        let half = 0.5 * duration;
        let samples = (0..len)
            .map(|j| {
                let u = (j as f64 * dt - center) / half;
                C64::new((-0.5 * u * u).exp(), 0.0)
            })
            .collect();
        Self::new(dt, 0.0, samples)
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn time(&self, j: usize) -> f64 {
        self.t0 + self.dt * j as f64
    }

    pub fn window(&self) -> f64 {
        self.dt * self.samples.len() as f64
    }

    /// `Σ |E|² dt`.
    pub fn energy(&self) -> f64 {
        self.samples.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.dt
    }

    /// Gaussian-equivalent `1/e` full duration of the intensity, `2√2 σ_t`.
    pub fn duration(&self) -> Result<f64> {
        let c = pulse_centroid(self)?;
        let (m2, w) = self
            .samples
            .iter()
            .enumerate()
            .fold((0.0, 0.0), |(m2, w), (j, v)| {
                let p = v.norm_sqr();
                (m2 + p * (self.time(j) - c).powi(2), w + p)
            });
        Ok(2.0 * (2.0 * m2 / w).sqrt())
    }

    /// Gaussian-equivalent `1/e` half-width of the power spectrum, `√2 σ_ω`.
    pub fn bandwidth(&self) -> f64 {
        let n = self.samples.len();
        let mut spec = self.samples.clone();
        fourier::forward(&mut spec);
        let omega = |j: usize| -2.0 * PI * fourier::signed_index(j, n) as f64 / (n as f64 * self.dt);
        let total: f64 = spec.iter().map(|v| v.norm_sqr()).sum();
        if total == 0.0 {
            return 0.0;
        }
        let mean: f64 = spec
            .iter()
            .enumerate()
            .map(|(j, v)| omega(j) * v.norm_sqr())
            .sum::<f64>()
            / total;
        let var: f64 = spec
            .iter()
            .enumerate()
            .map(|(j, v)| (omega(j) - mean).powi(2) * v.norm_sqr())
            .sum::<f64>()
            / total;
        (2.0 * var).sqrt()
    }
}

/// Intensity centroid `Σ t |E|² / Σ |E|²`.
pub fn pulse_centroid(pulse: &Pulse) -> Result<f64> {
    let (num, den) = pulse
        .samples
        .iter()
        .enumerate()
        .fold((0.0, 0.0), |(n, d), (j, v)| {
            let p = v.norm_sqr();
            (n + pulse.time(j) * p, d + p)
        });
    if den == 0.0 {
        return Err(Error::ZeroEnergy);
    }
    Ok(num / den)
}

/// Time and frequency scales of a filter, used to check a pulse against it.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FilterScale {
    /// FWHM of the filter line, rad/s.
    pub linewidth: f64,
    /// Longest delay the filter is expected to impose, s.
    pub max_delay: f64,
}

/// Filters a pulse through `transfer(ω)` in the frequency domain.
///
/// The record is zero-padded to a power of two. With `scale`, the pulse
/// bandwidth is checked against `linewidth/10` (warning) and the padded window
/// against `duration + max_delay` (error).
pub fn propagate_pulse<F>(pulse: &Pulse, transfer: F, scale: Option<&FilterScale>) -> Result<Pulse>
where
    F: Fn(f64) -> C64,
{
    let n = pulse.samples.len().next_power_of_two();
    let mut buf = pulse.samples.clone();
    buf.resize(n, C64::new(0.0, 0.0));
    let padded = Pulse { samples: buf, ..pulse.clone() };

    if let Some(scale) = scale {
        let duration = padded.duration()?;
        let window = padded.window();
        if window < duration + scale.max_delay {
            return Err(Error::Aliasing {
                window,
                duration,
                delay: scale.max_delay,
            });
        }
        let bw = padded.bandwidth();
        if bw > scale.linewidth / 10.0 {
            warn!(
                "pulse bandwidth {bw:e} rad/s exceeds a tenth of the filter linewidth {:e} rad/s; expect distortion",
                scale.linewidth
            );
        }
    }

    let response: Vec<C64> = (0..n)
        .map(|j| transfer(-2.0 * PI * fourier::signed_index(j, n) as f64 / (n as f64 * pulse.dt)))
        .collect();
    if response.iter().all(|&r| r == C64::new(1.0, 0.0)) {
        return Ok(padded);
    }
    let mut spec = padded.samples;
    fourier::forward(&mut spec);
    for (s, r) in spec.iter_mut().zip(&response) {
        *s *= r;
    }
    fourier::inverse(&mut spec);
    Pulse::new(pulse.dt, pulse.t0, spec)
}

/// Central-difference phase slope `Im[ln t(ω₀+δ) − ln t(ω₀−δ)] / 2δ`.
pub fn numeric_group_delay<F>(transfer: F, omega0: f64, delta_omega: f64) -> Result<f64>
where
    F: Fn(f64) -> C64,
{
    if !(delta_omega > 0.0) {
        return Err(invalid("delta_omega", "must be > 0"));
    }
    let sample = |w: f64| {
        let t = transfer(w);
        if t.norm() == 0.0 || !t.is_finite() {
            Err(Error::ZeroTransfer(w))
        } else {
            Ok(t)
        }
    };
    let hi = sample(omega0 + delta_omega)?;
    let lo = sample(omega0 - delta_omega)?;
    // arg of the ratio is the branch-continuous phase difference
    let jump = (hi / lo).arg();
    if jump.abs() > PI / 2.0 {
        return Err(Error::PhaseJump { jump });
    }
    Ok(jump / (2.0 * delta_omega))
}

/// Numeric group delay with step `half_width/100`, checked against the
/// estimate at half that step (agreement to 0.1%).
pub fn group_delay<F>(transfer: F, omega0: f64, half_width: f64) -> Result<f64>
where
    F: Fn(f64) -> C64,
{
    if !(half_width > 0.0) {
        return Err(invalid("half_width", "must be > 0"));
    }
    let step = half_width / 100.0;
    let coarse = numeric_group_delay(&transfer, omega0, step)?;
    let fine = numeric_group_delay(&transfer, omega0, 0.5 * step)?;
    let tolerance = 1e-3 * coarse.abs().max(fine.abs()) + 1e-9 / half_width;
    if (coarse - fine).abs() > tolerance {
        return Err(Error::StepUnresolved { coarse, fine });
    }
    Ok(fine)
}

/// Signal delay `Re[1/(γ + Γ)]` at `ω = 0`.
pub fn analytic_tau_s(medium: &MediumParams, drive: &DriveState) -> Result<f64> {
    let model = TransferModel::new(medium, drive)?;
    Ok((1.0 / (medium.gamma + model.gamma_power)).re)
}

/// Weak-EIT probe delay `Re[(S/2) η Γ / (γ + Γ)²]` at `ω = 0`.
pub fn analytic_tau_p(medium: &MediumParams, drive: &DriveState) -> Result<f64> {
    let model = TransferModel::new(medium, drive)?;
    let pole = medium.gamma + model.gamma_power;
    Ok((0.5 * model.s * medium.eta_act * model.gamma_power / (pole * pole)).re)
}

/// Probe delay with a calibrated `S η_act` in place of the model product.
pub fn analytic_tau_p_with_s_eta(s_eta: f64, medium: &MediumParams, drive: &DriveState) -> Result<f64> {
    let model = TransferModel::new(medium, drive)?;
    let pole = medium.gamma + model.gamma_power;
    Ok((0.5 * s_eta * model.gamma_power / (pole * pole)).re)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum DelayMethod {
    Analytic,
    Numeric,
    PulseCentroid,
}

impl DelayMethod {
    pub fn as_str(&self) -> &'static str {
        match self {
            DelayMethod::Analytic => "analytic",
            DelayMethod::Numeric => "numeric",
            DelayMethod::PulseCentroid => "pulse-centroid",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DelayResult {
    pub tau_p: f64,
    pub tau_s: f64,
    pub method: DelayMethod,
}

/// Pulse through the medium: input, transmitted probe and generated signal.
#[derive(Debug, Clone)]
pub struct PulseMeasurement {
    pub input: Pulse,
    pub probe: Pulse,
    pub signal: Pulse,
    pub tau_p: f64,
    pub tau_s: f64,
}

/// Gaussian probe with intensity `1/e` full duration `duration`, 64 samples
/// per duration, centred two durations into a window of `max(20 durations,
/// 2(duration + max_delay))`.
pub fn probe_pulse(duration: f64, max_delay: f64) -> Result<Pulse> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(invalid("duration", "must be finite and > 0"));
    }
    let dt = duration / 64.0;
    let window = (20.0 * duration).max(2.0 * (duration + max_delay));
    let len = ((window / dt).ceil() as usize).next_power_of_two();
    Pulse::gaussian(2.0 * duration, duration, dt, len)
}

/// Default probe for a line with expected signal delay `tau`: duration `40 τ`.
pub fn default_probe_pulse(tau: f64, max_delay: f64) -> Result<Pulse> {
    if !(tau > 0.0 && tau.is_finite()) {
        return Err(invalid("tau", "expected delay must be finite and > 0"));
    }
    probe_pulse(40.0 * tau, max_delay)
}

/// Longest delay the medium can impose: `2/γ`, or `2/(γ + Re Γ)` when `γ = 0`.
pub fn max_delay(model: &TransferModel) -> f64 {
    if model.medium.gamma > 0.0 {
        2.0 / model.medium.gamma
    } else {
        2.0 / model.half_linewidth()
    }
}

/// Sends the default probe pulse (or `input`) through both channels at the
/// bare two-photon resonance `ω = 0`.
pub fn measure_pulse(
    medium: &MediumParams,
    drive: &DriveState,
    input: Option<&Pulse>,
) -> Result<PulseMeasurement> {
    let model = TransferModel::new(medium, drive)?;
    let scale = FilterScale {
        linewidth: 2.0 * model.half_linewidth(),
        max_delay: max_delay(&model),
    };
    let input = match input {
        Some(p) => p.clone(),
        None => default_probe_pulse(1.0 / model.half_linewidth(), scale.max_delay)?,
    };
    let probe = propagate_pulse(&input, |w| model.probe(w), Some(&scale))?;
    let signal = propagate_pulse(&input, |w| model.signal(w), Some(&scale))?;
    let reference = pulse_centroid(&input)?;
    let tau_p = pulse_centroid(&probe)? - reference;
    let tau_s = pulse_centroid(&signal)? - reference;
    Ok(PulseMeasurement {
        input,
        probe,
        signal,
        tau_p,
        tau_s,
    })
}

pub fn delay(medium: &MediumParams, drive: &DriveState, method: DelayMethod) -> Result<DelayResult> {
    let (tau_p, tau_s) = match method {
        DelayMethod::Analytic => (analytic_tau_p(medium, drive)?, analytic_tau_s(medium, drive)?),
        DelayMethod::Numeric => {
            let model = TransferModel::new(medium, drive)?;
            let a = model.half_linewidth();
            (
                group_delay(|w| model.probe(w), 0.0, a)?,
                group_delay(|w| model.signal(w), 0.0, a)?,
            )
        }
        DelayMethod::PulseCentroid => {
            let m = measure_pulse(medium, drive, None)?;
            (m.tau_p, m.tau_s)
        }
    };
    Ok(DelayResult { tau_p, tau_s, method })
}

/// Probe and signal delays for each drive.
pub fn delay_sweep(
    medium: &MediumParams,
    drives: &[DriveState],
    method: DelayMethod,
) -> Result<Vec<DelayResult>> {
    drives.iter().map(|d| delay(medium, d, method)).collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;
    use proptest::prelude::*;

    fn medium() -> MediumParams {
        MediumParams {
            d: 2.5,
            gamma_1p: 2.0 * PI * 300e6,
            gamma: 1.0 / 3e-3,
            eta_act: 0.5,
            diffusion: 0.0,
        }
    }

    /// Drive with real on-resonance broadening `Γ = ratio·γ`.
    fn drive(m: &MediumParams, ratio: f64) -> DriveState {
        DriveState::resonant_with_broadening(m, ratio * m.gamma)
    }

    #[test]
    fn tau_s_examples() {
        let m = medium();
        assert_relative_eq!(
            analytic_tau_s(&m, &DriveState::new(0.0, 0.0)).unwrap(),
            3e-3,
            max_relative = 1e-12
        );
        assert_relative_eq!(
            analytic_tau_s(&m, &drive(&m, 1.0)).unwrap(),
            0.5 / m.gamma,
            max_relative = 1e-12
        );
        // Δ = γ₁ₚ with Ω² = γγ₁ₚ gives Γ = γ(1 + i)
        let d = DriveState::new((m.gamma * m.gamma_1p).sqrt(), m.gamma_1p);
        assert_relative_eq!(analytic_tau_s(&m, &d).unwrap(), 0.4 / m.gamma, max_relative = 1e-12);
    }

    #[test]
    fn tau_p_examples() {
        let m = medium();
        assert_eq!(analytic_tau_p(&m, &DriveState::new(0.0, 0.0)).unwrap(), 0.0);
        assert_relative_eq!(
            analytic_tau_p(&m, &drive(&m, 1.0)).unwrap(),
            m.d * m.eta_act / (8.0 * m.gamma),
            max_relative = 1e-12
        );
        // scan oracle: τ_p(Γ) peaks at Γ = γ
        let ratios: Vec<f64> = (0..2001).map(|i| 10f64.powf(-2.0 + 4.0 * i as f64 / 2000.0)).collect();
        let best = ratios
            .iter()
            .map(|&r| (r, analytic_tau_p(&m, &drive(&m, r)).unwrap()))
            .max_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        assert!((best.0 - 1.0).abs() < 5e-3, "max at Γ/γ = {}", best.0);
    }

    #[test]
    fn tau_p_with_table_matches_model() {
        let m = medium();
        let d = drive(&m, 0.7);
        assert_relative_eq!(
            analytic_tau_p_with_s_eta(m.d * m.eta_act, &m, &d).unwrap(),
            analytic_tau_p(&m, &d).unwrap(),
            max_relative = 1e-14
        );
    }

    #[test]
    fn degenerate_pole_rejected() {
        let m = MediumParams { gamma: 0.0, ..medium() };
        assert!(matches!(
            analytic_tau_s(&m, &DriveState::new(0.0, 0.0)),
            Err(Error::DegeneratePole(_))
        ));
    }

    #[test]
    fn single_pole_delay() {
        let a = 420.0;
        let t = |w: f64| 1.0 / C64::new(a, -w);
        let tau = numeric_group_delay(t, 0.0, a / 100.0).unwrap();
        assert_relative_eq!(tau, 1.0 / a, max_relative = 1e-4);
        assert_relative_eq!(group_delay(t, 0.0, a).unwrap(), 1.0 / a, max_relative = 1e-4);
    }

    #[test]
    fn numeric_errors() {
        assert!(matches!(
            numeric_group_delay(|_| C64::new(0.0, 0.0), 0.0, 1.0),
            Err(Error::ZeroTransfer(_))
        ));
        assert!(matches!(
            numeric_group_delay(|w| C64::from_polar(1.0, 2.0 * w), 0.0, 1.0),
            Err(Error::PhaseJump { .. })
        ));
    }

    #[test]
    fn exact_signal_delay_at_weak_eit() {
        // exact t_s delay = (1/a)·x eˣ/(eˣ − 1) with x = S f(0); the weak form drops x/2
        let m = MediumParams { d: 0.5, ..medium() };
        for x in [0.0099, 0.01] {
            let eta = x * 2.0 / m.d; // Γ = γ ⇒ f(0) = η/2
            let mm = MediumParams { eta_act: eta, ..m };
            let d = drive(&mm, 1.0);
            let model = TransferModel::new(&mm, &d).unwrap();
            assert_relative_eq!(model.weak_parameter(0.0), x, max_relative = 1e-12);
            let numeric = group_delay(|w| model.signal(w), 0.0, model.half_linewidth()).unwrap();
            let analytic = analytic_tau_s(&mm, &d).unwrap();
            let rel = numeric / analytic - 1.0;
            let oracle = x * x.exp() / x.exp_m1() - 1.0;
            assert!((rel - oracle).abs() < 1e-5, "rel {rel} vs oracle {oracle}");
            if x < 0.01 {
                assert!(rel.abs() < 5e-3);
            }
        }
    }

    #[test]
    fn probe_delay_vanishes_without_control() {
        let m = medium();
        let d = drive(&m, 1e-8);
        let model = TransferModel::new(&m, &d).unwrap();
        let tau = group_delay(|w| model.probe(w), 0.0, model.half_linewidth()).unwrap();
        assert!(tau.abs() < 1e-9 * 3e-3 * 1e3);
    }

    #[test]
    fn gaussian_pulse_shape() {
        let p = Pulse::gaussian(5e-3, 1e-3, 1e-5, 1024).unwrap();
        assert_relative_eq!(pulse_centroid(&p).unwrap(), 5e-3, max_relative = 1e-10);
        assert_relative_eq!(p.duration().unwrap(), 1e-3, max_relative = 1e-6);
        assert_relative_eq!(p.bandwidth(), 2.0 / 1e-3, max_relative = 1e-6);
    }

    #[test]
    fn centroid_of_two_spikes() {
        let mut s = vec![C64::new(0.0, 0.0); 3];
        s[0] = C64::new(1.0, 0.0);
        s[2] = C64::new(0.0, 1.0);
        let p = Pulse::new(1.0, 0.0, s).unwrap();
        assert_relative_eq!(pulse_centroid(&p).unwrap(), 1.0);
        let z = Pulse::new(1.0, 0.0, vec![C64::new(0.0, 0.0); 4]).unwrap();
        assert!(matches!(pulse_centroid(&z), Err(Error::ZeroEnergy)));
    }

    #[test]
    fn identity_filter_is_bit_exact() {
        let p = Pulse::gaussian(1.0, 0.3, 0.01, 512).unwrap();
        let out = propagate_pulse(&p, |_| C64::new(1.0, 0.0), None).unwrap();
        assert_eq!(out, p);
    }

    #[test]
    fn pure_delay_shifts_centroid() {
        let dt = 1e-4;
        let p = Pulse::gaussian(0.05, 0.01, dt, 2048).unwrap();
        let tau0 = 0.0123;
        let out = propagate_pulse(&p, |w| C64::from_polar(1.0, w * tau0), None).unwrap();
        let shift = pulse_centroid(&out).unwrap() - pulse_centroid(&p).unwrap();
        assert!((shift - tau0).abs() < dt / 10.0, "shift {shift}");
        assert_relative_eq!(out.energy(), p.energy(), max_relative = 1e-12);
    }

    #[test]
    fn pads_to_power_of_two() {
        let p = Pulse::gaussian(0.5, 0.1, 0.01, 100).unwrap();
        let out = propagate_pulse(&p, |w| C64::from_polar(0.5, w * 0.01), None).unwrap();
        assert_eq!(out.len(), 128);
        assert!(out.energy() <= p.energy());
    }

    #[test]
    fn aliasing_detected() {
        let p = Pulse::gaussian(0.5, 0.2, 0.01, 128).unwrap();
        let scale = FilterScale { linewidth: 1e3, max_delay: 2.0 };
        assert!(matches!(
            propagate_pulse(&p, |_| C64::new(0.5, 0.0), Some(&scale)),
            Err(Error::Aliasing { .. })
        ));
    }

    #[test]
    fn pulse_delay_matches_analytic() {
        let m = MediumParams { d: 0.2, eta_act: 0.1, ..medium() };
        let d = drive(&m, 0.5);
        let meas = measure_pulse(&m, &d, None).unwrap();
        let analytic = analytic_tau_s(&m, &d).unwrap();
        assert!((meas.tau_s / analytic - 1.0).abs() < 0.02);
        assert!(meas.signal.energy() <= meas.input.energy());
        assert!(meas.probe.energy() <= meas.input.energy());
    }

    #[test]
    fn sweep_methods_agree() {
        let m = MediumParams { d: 0.2, eta_act: 0.1, ..medium() };
        let drives = [drive(&m, 0.1), drive(&m, 1.0), drive(&m, 5.0)];
        let a = delay_sweep(&m, &drives, DelayMethod::Analytic).unwrap();
        let n = delay_sweep(&m, &drives, DelayMethod::Numeric).unwrap();
        let p = delay_sweep(&m, &drives, DelayMethod::PulseCentroid).unwrap();
        for i in 0..drives.len() {
            assert!((n[i].tau_s / a[i].tau_s - 1.0).abs() < 0.02);
            assert!((p[i].tau_s / a[i].tau_s - 1.0).abs() < 0.02);
            assert_eq!(p[i].method, DelayMethod::PulseCentroid);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(64))]

        #[test]
        fn tau_s_bounded(om in 0.0..1e7f64, delta in -1e10..1e10f64) {
            let m = medium();
            let tau = analytic_tau_s(&m, &DriveState::new(om, delta)).unwrap();
            prop_assert!(tau > 0.0);
            prop_assert!(tau <= 1.0 / m.gamma * (1.0 + 1e-12));
        }

        #[test]
        fn tau_s_intensive(d in 0.0..6.0f64, eta in 0.0..=1.0f64, om in 0.0..1e6f64) {
            let base = medium();
            let other = MediumParams { d, eta_act: eta, ..base };
            let dr = DriveState::new(om, 0.0);
            prop_assert_eq!(analytic_tau_s(&base, &dr).unwrap(), analytic_tau_s(&other, &dr).unwrap());
        }

        #[test]
        fn method_triangle(ratio in 0.05..5.0f64, x in 1e-4..0.03f64) {
            // |S f(0)| = x; analytic vs exact differ by ≈ x/2
            let base = MediumParams { d: 0.5, ..medium() };
            let f0 = ratio / (1.0 + ratio);
            let eta = (x / (base.d * f0)).min(1.0);
            let m = MediumParams { eta_act: eta, ..base };
            let dr = drive(&m, ratio);
            let a = delay(&m, &dr, DelayMethod::Analytic).unwrap();
            let n = delay(&m, &dr, DelayMethod::Numeric).unwrap();
            let p = delay(&m, &dr, DelayMethod::PulseCentroid).unwrap();
            prop_assert!((n.tau_s / a.tau_s - 1.0).abs() < 0.02);
            prop_assert!((p.tau_s / a.tau_s - 1.0).abs() < 0.02);
            prop_assert!((p.tau_s / n.tau_s - 1.0).abs() < 0.02);
        }
    }
}
