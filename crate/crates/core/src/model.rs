//! Closed-form steady-state response of the double-V medium.
//!
//! The control fields couple the ground state to one superposition of the two
//! excited states, so the probe splits into a bright normal mode that sees EIT
//! and a dark one that sees plain absorption. With the one-photon response
//! `S = d γ₁ₚ/(γ₁ₚ − iΔ)` and the two-photon response `f = η Γ/(γ + Γ − iω)`,
//! the two modes leave the medium with amplitudes
//!
//! ```text
//! 2 g₊ = exp(−S (1 − f))        2 g₋ = exp(−S)
//! ```
//!
//! and recombine into the transmitted probe `t_p = g₊ + g₋` and the generated
//! signal `t_s = g₊ − g₋ = e^{−S} (e^{S f} − 1) / 2`.
//!
//! All rates and detunings are angular (rad/s).

use std::f64::consts::PI;

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};

pub type C64 = Complex64;

/// Static medium constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MediumParams {
    /// Half of the resonant optical depth.
    pub d: f64,
    /// One-photon decoherence rate, rad/s.
    pub gamma_1p: f64,
    /// Raman (two-photon) decoherence rate, rad/s.
    pub gamma: f64,
    /// Fraction of atoms inside the Λ system.
    pub eta_act: f64,
    /// Diffusion coefficient, mm²/s.
    pub diffusion: f64,
}

impl MediumParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.d >= 0.0 && self.d.is_finite()) {
            return Err(invalid("d", format!("must be finite and >= 0, got {}", self.d)));
        }
        if !(self.gamma_1p > 0.0 && self.gamma_1p.is_finite()) {
            return Err(invalid(
                "gamma_1p",
                format!("must be finite and > 0, got {}", self.gamma_1p),
            ));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(invalid("gamma", format!("must be finite and >= 0, got {}", self.gamma)));
        }
        if !(0.0..=1.0).contains(&self.eta_act) {
            return Err(invalid("eta_act", format!("must lie in [0, 1], got {}", self.eta_act)));
        }
        if !(self.diffusion >= 0.0 && self.diffusion.is_finite()) {
            return Err(invalid(
                "diffusion",
                format!("must be finite and >= 0, got {}", self.diffusion),
            ));
        }
        Ok(())
    }
}

/// Control-field state.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DriveState {
    /// Control Rabi frequency Ω, rad/s (both controls assumed equal).
    pub omega_rabi: f64,
    /// One-photon detuning Δ, rad/s.
    pub delta: f64,
}

impl DriveState {
    pub fn new(omega_rabi: f64, delta: f64) -> Self {
        Self { omega_rabi, delta }
    }

    /// Drive whose on-resonance power broadening is `gamma_power` (real, Δ = 0).
    pub fn resonant_with_broadening(medium: &MediumParams, gamma_power: f64) -> Self {
        Self {
            omega_rabi: (gamma_power * medium.gamma_1p / 2.0).max(0.0).sqrt(),
            delta: 0.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.omega_rabi >= 0.0 && self.omega_rabi.is_finite()) {
            return Err(invalid(
                "omega_rabi",
                format!("must be finite and >= 0, got {}", self.omega_rabi),
            ));
        }
        if !self.delta.is_finite() {
            return Err(invalid("delta", "must be finite"));
        }
        Ok(())
    }
}

/// `S`, `Γ` and `f` evaluated at one two-photon detuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ComplexResponse {
    pub s: C64,
    pub gamma_power: C64,
    pub f: C64,
}

/// Mode amplitudes at the medium exit, normalised to the incoming probe.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Amplitudes {
    pub g_plus: C64,
    pub g_minus: C64,
    /// Transmitted probe, `g₊ + g₋`.
    pub t_p: C64,
    /// Generated signal, `g₊ − g₋`, exact exponential form.
    pub t_s: C64,
    /// Weak-EIT diagnostic `e^{−S} S f / 2`.
    pub t_s_weak: C64,
}

/// Probe and signal amplitudes at one two-photon detuning.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TransferPair {
    pub omega: f64,
    pub t_p: C64,
    pub t_s: C64,
}

pub fn compute_s(medium: &MediumParams, delta: f64) -> Result<C64> {
    if !(medium.gamma_1p > 0.0) {
        return Err(invalid("gamma_1p", "must be > 0"));
    }
    Ok(medium.d * medium.gamma_1p / C64::new(medium.gamma_1p, -delta))
}

/// Complex power broadening `Γ = 2Ω²/(γ₁ₚ − iΔ)`. The real part broadens the
/// Raman line, the imaginary part is the light shift.
pub fn compute_gamma(drive: &DriveState, medium: &MediumParams) -> Result<C64> {
    if !(medium.gamma_1p > 0.0) {
        return Err(invalid("gamma_1p", "must be > 0"));
    }
    if !(drive.omega_rabi >= 0.0) {
        return Err(invalid("omega_rabi", "must be >= 0"));
    }
    let omega2 = drive.omega_rabi * drive.omega_rabi;
    Ok(2.0 * omega2 / C64::new(medium.gamma_1p, -drive.delta))
}

pub fn compute_f(medium: &MediumParams, gamma_power: C64, omega: f64) -> Result<C64> {
    f_with_extra_width(medium, gamma_power, omega, 0.0)
}

/// `η Γ / (γ + w + Γ − iω)`; `w` is an additional Raman width such as `D k²`.
pub(crate) fn f_with_extra_width(
    medium: &MediumParams,
    gamma_power: C64,
    omega: f64,
    extra: f64,
) -> Result<C64> {
    let pole = medium.gamma + extra + gamma_power.re;
    if !(pole > 0.0) {
        return Err(Error::DegeneratePole(pole));
    }
    if omega.is_infinite() {
        return Ok(C64::new(0.0, 0.0));
    }
    Ok(medium.eta_act * gamma_power / (medium.gamma + extra + gamma_power - C64::new(0.0, omega)))
}

/// `e^z − 1` without cancellation for small `|z|`.
pub fn exp_m1(z: C64) -> C64 {
    let (s, c) = z.im.sin_cos();
    let half = (0.5 * z.im).sin();
    C64::new(z.re.exp_m1() * c - 2.0 * half * half, z.re.exp() * s)
}

pub fn transfer_amplitudes(s: C64, f: C64) -> Amplitudes {
    let absorb = (-s).exp();
    let g_minus = 0.5 * absorb;
    let g_plus = 0.5 * (-s * (1.0 - f)).exp();
    let t_s = 0.5 * absorb * exp_m1(s * f);
    Amplitudes {
        g_plus,
        g_minus,
        t_p: g_plus + g_minus,
        t_s,
        t_s_weak: 0.5 * absorb * s * f,
    }
}

/// Generation efficiency `β = |t_s|²`.
pub fn efficiency(t_s: C64) -> f64 {
    t_s.norm_sqr()
}

/// Half-width of the two-photon line, `γ + Re Γ`, rad/s.
pub fn half_linewidth(medium: &MediumParams, gamma_power: C64) -> f64 {
    medium.gamma + gamma_power.re
}

/// FWHM in Hz of a Lorentzian power line with angular half-width `half_width`.
pub fn fwhm_hz(half_width: f64) -> f64 {
    2.0 * half_width / (2.0 * PI)
}

/// Precomputed `S` and `Γ` for one medium/drive pair; evaluates the transfer
/// functions at arbitrary two-photon detuning and transverse wavenumber.
#[derive(Debug, Clone, Copy)]
pub struct TransferModel {
    pub medium: MediumParams,
    pub drive: DriveState,
    pub s: C64,
    pub gamma_power: C64,
}

impl TransferModel {
    pub fn new(medium: &MediumParams, drive: &DriveState) -> Result<Self> {
        medium.validate()?;
        drive.validate()?;
        let s = compute_s(medium, drive.delta)?;
        let gamma_power = compute_gamma(drive, medium)?;
        let pole = medium.gamma + gamma_power.re;
        if !(pole > 0.0) {
            return Err(Error::DegeneratePole(pole));
        }
        Ok(Self {
            medium: *medium,
            drive: *drive,
            s,
            gamma_power,
        })
    }

    pub fn half_linewidth(&self) -> f64 {
        half_linewidth(&self.medium, self.gamma_power)
    }

    /// Light-shifted two-photon resonance, `Im Γ`.
    pub fn resonance(&self) -> f64 {
        self.gamma_power.im
    }

    pub fn f(&self, omega: f64) -> C64 {
        self.f_k(omega, 0.0)
    }

    /// Diffusion-broadened `f⁽ᵏ⁾`, `k` in rad/mm.
    pub fn f_k(&self, omega: f64, k: f64) -> C64 {
        let extra = self.medium.diffusion * k * k;
        // the pole is positive by construction and D k² >= 0
        f_with_extra_width(&self.medium, self.gamma_power, omega, extra)
            .unwrap_or(C64::new(0.0, 0.0))
    }

    pub fn response(&self, omega: f64) -> ComplexResponse {
        ComplexResponse {
            s: self.s,
            gamma_power: self.gamma_power,
            f: self.f(omega),
        }
    }

    pub fn amplitudes(&self, omega: f64) -> Amplitudes {
        transfer_amplitudes(self.s, self.f(omega))
    }

    pub fn pair(&self, omega: f64) -> TransferPair {
        let a = self.amplitudes(omega);
        TransferPair {
            omega,
            t_p: a.t_p,
            t_s: a.t_s,
        }
    }

    pub fn probe(&self, omega: f64) -> C64 {
        self.amplitudes(omega).t_p
    }

    pub fn signal(&self, omega: f64) -> C64 {
        self.amplitudes(omega).t_s
    }

    /// `|S f(ω)|`, the weak-EIT parameter.
    pub fn weak_parameter(&self, omega: f64) -> f64 {
        (self.s * self.f(omega)).norm()
    }
}

pub fn transfer_pair(medium: &MediumParams, drive: &DriveState, omega: f64) -> Result<TransferPair> {
    Ok(TransferModel::new(medium, drive)?.pair(omega))
}
