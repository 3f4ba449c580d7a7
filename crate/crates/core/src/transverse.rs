//! Transverse response: diffusion adds `D k²` to the Raman width of each
//! transverse Fourier mode, so the medium acts as a low-pass filter in k-space
//! and the generated beam spreads as `w² = w₀² + 4 D τ_s`.
//!
//! Beam widths `w` are field `1/e` radii; intensity falls as `e^{−2r²/w²}`.
//! Lengths are mm and wavenumbers rad/mm.

use std::f64::consts::PI;

use log::warn;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::fitting::levenberg_marquardt;
use crate::fourier;
use crate::model::{f_with_extra_width, transfer_amplitudes, DriveState, MediumParams, TransferModel, C64};

pub const DEFAULT_GRID: usize = 256;
pub const DEFAULT_PITCH_MM: f64 = 0.0625;
const EDGE_LIMIT: f64 = 1e-6;

/// `N × N` row-major complex envelope sampled at `pitch` mm.
#[derive(Debug, Clone, PartialEq)]
pub struct BeamProfile {
    pub pitch: f64,
    pub n: usize,
    pub samples: Vec<C64>,
}

impl BeamProfile {
    pub fn new(pitch: f64, n: usize, samples: Vec<C64>) -> Result<Self> {
        if !(pitch > 0.0 && pitch.is_finite()) {
            return Err(invalid("pitch", format!("must be finite and > 0, got {pitch}")));
        }
        if n < 2 || !n.is_power_of_two() {
            return Err(invalid("n", format!("must be a power of two >= 2, got {n}")));
        }
        if samples.len() != n * n {
            return Err(invalid("samples", format!("expected {} samples, got {}", n * n, samples.len())));
        }
        Ok(Self { pitch, n, samples })
    }

    /// Coordinate of pixel index `i` along either axis; the grid centre is 0.
    pub fn coordinate(&self, i: usize) -> f64 {
        (i as f64 - (self.n / 2) as f64) * self.pitch
    }

    fn from_fn(pitch: f64, n: usize, field: impl Fn(f64, f64) -> f64) -> Result<Self> {
        let half = (n / 2) as f64;
        let samples = (0..n * n)
            .map(|idx| {
                let x = ((idx % n) as f64 - half) * pitch;
                let y = ((idx / n) as f64 - half) * pitch;
                C64::new(field(x, y), 0.0)
            })
            .collect();
        Self::new(pitch, n, samples)
    }

    /// Centred Gaussian with field `1/e` radius `w`.
    pub fn gaussian(w: f64, pitch: f64, n: usize) -> Result<Self> {
        if !(w > 0.0) {
            return Err(invalid("w", "must be > 0"));
        }
        Self::from_fn(pitch, n, |x, y| (-(x * x + y * y) / (w * w)).exp())
    }

    /// Uniform disk of the given radius.
    pub fn flat_top(radius: f64, pitch: f64, n: usize) -> Result<Self> {
        if !(radius > 0.0) {
            return Err(invalid("radius", "must be > 0"));
        }
        Self::from_fn(pitch, n, |x, y| if x * x + y * y <= radius * radius { 1.0 } else { 0.0 })
    }

    /// `Σ |E|² · pitch²`.
    pub fn power(&self) -> f64 {
        self.samples.iter().map(|v| v.norm_sqr()).sum::<f64>() * self.pitch * self.pitch
    }

    /// Fraction of the power in the outer band of `max(1, N/16)` pixels.
    pub fn edge_power_fraction(&self) -> f64 {
        let n = self.n;
        let band = (n / 16).max(1);
        let (mut edge, mut total) = (0.0, 0.0);
        for (idx, v) in self.samples.iter().enumerate() {
            let (i, j) = (idx % n, idx / n);
            let p = v.norm_sqr();
            total += p;
            if i < band || j < band || i >= n - band || j >= n - band {
                edge += p;
            }
        }
        if total == 0.0 {
            0.0
        } else {
            edge / total
        }
    }

    fn wavenumber(&self, j: usize) -> f64 {
        2.0 * PI * fourier::signed_index(j, self.n) as f64 / (self.n as f64 * self.pitch)
    }
}

/// Fitted Gaussian width of an intensity profile.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WidthMeasurement {
    /// Field `1/e` radius, mm.
    pub w: f64,
    /// Normalised inner product of fitted and measured intensity, in `[0, 1]`.
    pub gaussian_overlap: f64,
    pub amplitude: f64,
    pub baseline: f64,
    /// Intensity centroid, mm.
    pub center: (f64, f64),
}

impl WidthMeasurement {
    pub fn w2(&self) -> f64 {
        self.w * self.w
    }

    /// `π w²`, mm².
    pub fn area(&self) -> f64 {
        PI * self.w2()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KFilter {
    /// `η Γ/(γ + D k² + Γ − iω)`.
    Exact,
    /// `f(ω) e^{−τ_s D k²}`.
    Gaussian,
}

/// Diffusion-broadened two-photon response of transverse mode `k`.
pub fn f_k(medium: &MediumParams, gamma_power: C64, omega: f64, k: f64) -> Result<C64> {
    f_with_extra_width(medium, gamma_power, omega, medium.diffusion * k * k)
}

/// Gaussian approximation `f(ω) e^{−τ_s D k²}` with `τ_s = Re[1/(γ + Γ)]`.
pub fn f_k_gaussian(medium: &MediumParams, gamma_power: C64, omega: f64, k: f64) -> Result<C64> {
    let f0 = f_with_extra_width(medium, gamma_power, omega, 0.0)?;
    let tau_s = (1.0 / (medium.gamma + gamma_power)).re;
    Ok(f0 * (-tau_s * medium.diffusion * k * k).exp())
}

/// Filters `beam_in` through the generated-signal transfer `t_s(ω, k)`.
pub fn propagate_beam(
    beam_in: &BeamProfile,
    medium: &MediumParams,
    drive: &DriveState,
    omega: f64,
    filter: KFilter,
) -> Result<BeamProfile> {
    let model = TransferModel::new(medium, drive)?;
    let edge = beam_in.edge_power_fraction();
    if edge > EDGE_LIMIT {
        return Err(Error::EdgeLeakage(edge));
    }
    if beam_in.power() == 0.0 {
        return Err(invalid("beam_in", "input beam carries no power"));
    }
    let n = beam_in.n;
    let mut spec = beam_in.samples.clone();
    fourier::transform_2d(&mut spec, n, false);

    if filter == KFilter::Gaussian {
        let (num, den) = spec.iter().enumerate().fold((0.0, 0.0), |(a, b), (idx, v)| {
            let kx = beam_in.wavenumber(idx % n);
            let ky = beam_in.wavenumber(idx / n);
            (a + (kx * kx + ky * ky) * v.norm_sqr(), b + v.norm_sqr())
        });
        let k2_rms = num / den;
        let a = model.half_linewidth();
        if medium.diffusion * k2_rms > 0.1 * a {
            warn!(
                "beam not confined: D k_rms^2 = {:e} rad/s exceeds a tenth of the linewidth {a:e} rad/s",
                medium.diffusion * k2_rms
            );
        }
    }

    let kx: Vec<f64> = (0..n).map(|j| beam_in.wavenumber(j)).collect();
    for (idx, v) in spec.iter_mut().enumerate() {
        let k = (kx[idx % n].powi(2) + kx[idx / n].powi(2)).sqrt();
        let f = match filter {
            KFilter::Exact => f_k(medium, model.gamma_power, omega, k)?,
            KFilter::Gaussian => f_k_gaussian(medium, model.gamma_power, omega, k)?,
        };
        *v *= transfer_amplitudes(model.s, f).t_s;
    }
    fourier::transform_2d(&mut spec, n, true);
    BeamProfile::new(beam_in.pitch, n, spec)
}

fn gaussian_intensity(r: f64, p: &[f64; 3]) -> (f64, [f64; 3]) {
    let [a, w, b] = *p;
    let e = (-2.0 * r * r / (w * w)).exp();
    (a * e + b, [e, a * e * 4.0 * r * r / (w * w * w), 1.0])
}

/// Least-squares fit of `A e^{−2r²/w²} + B` to the radially binned intensity
/// about the intensity centroid. Bins are one pixel wide, stop at the
/// inscribed circle of the grid; each bin is compared with the
/// pixel average of the model over that bin.
pub fn fit_gaussian_width(beam: &BeamProfile) -> Result<WidthMeasurement> {
    let n = beam.n;
    let intensity: Vec<f64> = beam.samples.iter().map(|v| v.norm_sqr()).collect();
    let total: f64 = intensity.iter().sum();
    if total == 0.0 {
        return Err(Error::ZeroEnergy);
    }
    let (mut cx, mut cy) = (0.0, 0.0);
    for (idx, &p) in intensity.iter().enumerate() {
        cx += beam.coordinate(idx % n) * p;
        cy += beam.coordinate(idx / n) * p;
    }
    cx /= total;
    cy /= total;
    let r_of = |idx: usize| {
        let dx = beam.coordinate(idx % n) - cx;
        let dy = beam.coordinate(idx / n) - cy;
        (dx * dx + dy * dy).sqrt()
    };
    let second_moment: f64 = intensity
        .iter()
        .enumerate()
        .map(|(idx, &p)| r_of(idx).powi(2) * p)
        .sum::<f64>()
        / total;
    let w0 = (2.0 * second_moment).sqrt();
    if !(w0 > 0.0) {
        return Err(Error::DegenerateData("intensity concentrated in one pixel"));
    }

    let bins = n / 2;
    let mut radii: Vec<Vec<f64>> = vec![Vec::new(); bins];
    let mut sum_i = vec![0.0; bins];
    for (idx, &p) in intensity.iter().enumerate() {
        let r = r_of(idx);
        let b = (r / beam.pitch) as usize;
        if b < bins {
            radii[b].push(r / w0);
            sum_i[b] += p;
        }
    }
    let peak = intensity.iter().fold(0.0f64, |m, &v| m.max(v));
    let (mut xs, mut ys) = (Vec::new(), Vec::new());
    for b in 0..bins {
        if !radii[b].is_empty() {
            xs.push(b as f64);
            ys.push(sum_i[b] / radii[b].len() as f64 / peak);
        }
    }
    // bin model is the pixel average of the profile, so ring curvature adds no bias
    let bin_model = |x: f64, p: &[f64; 3]| -> (f64, [f64; 3]) {
        let ring = &radii[x as usize];
        let mut acc = (0.0, [0.0; 3]);
        for &r in ring {
            let (v, g) = gaussian_intensity(r, p);
            acc.0 += v;
            for (a, gi) in acc.1.iter_mut().zip(g) {
                *a += gi;
            }
        }
        let m = ring.len() as f64;
        (acc.0 / m, acc.1.map(|g| g / m))
    };
    let base0 = *ys.last().unwrap_or(&0.0);
    let out = levenberg_marquardt(&xs, &ys, [ys[0] - base0, 1.0, base0], bin_model);
    let [a, w, b] = out.params;
    let w_mm = w.abs() * w0;

    let (mut dot, mut fit_sq, mut meas_sq) = (0.0, 0.0, 0.0);
    for (idx, &p) in intensity.iter().enumerate() {
        let model = a * peak * (-2.0 * r_of(idx).powi(2) / (w_mm * w_mm)).exp() + b * peak;
        dot += model * p;
        fit_sq += model * model;
        meas_sq += p * p;
    }
    let overlap = if fit_sq > 0.0 {
        (dot / (fit_sq * meas_sq).sqrt()).clamp(0.0, 1.0)
    } else {
        0.0
    };
    if !(overlap >= 0.5) || !w_mm.is_finite() {
        return Err(Error::FitFailure(overlap));
    }
    Ok(WidthMeasurement {
        w: w_mm,
        gaussian_overlap: overlap,
        amplitude: a * peak,
        baseline: b * peak,
        center: (cx, cy),
    })
}

/// One point of a diffusion sweep.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DiffusionPoint {
    /// Analytic signal delay at `ω = 0`, s.
    pub tau_s: f64,
    /// Squared fitted width of the generated beam, mm².
    pub w2: f64,
    pub gaussian_overlap: f64,
}

/// Propagates `beam_in` at `ω = 0` for each drive and fits the output width.
pub fn diffusion_sweep(
    medium: &MediumParams,
    drives: &[DriveState],
    beam_in: &BeamProfile,
    filter: KFilter,
) -> Result<Vec<DiffusionPoint>> {
    drives
        .iter()
        .map(|drive| {
            let model = TransferModel::new(medium, drive)?;
            let tau_s = (1.0 / (medium.gamma + model.gamma_power)).re;
            let out = propagate_beam(beam_in, medium, drive, 0.0, filter)?;
            let fit = fit_gaussian_width(&out)?;
            Ok(DiffusionPoint {
                tau_s,
                w2: fit.w2(),
                gaussian_overlap: fit.gaussian_overlap,
            })
        })
        .collect()
}

/// Drive at `Δ = 0` whose analytic signal delay is `tau_s`.
pub fn drive_for_delay(medium: &MediumParams, tau_s: f64) -> Result<DriveState> {
    let gamma_power = 1.0 / tau_s - medium.gamma;
    if !(tau_s > 0.0) || gamma_power < 0.0 {
        return Err(invalid(
            "tau_s",
            format!("delay {tau_s:e} s not reachable: must lie in (0, 1/gamma]"),
        ));
    }
    Ok(DriveState::resonant_with_broadening(medium, gamma_power))
}
