//! JSON scenario configuration.
//!
//! Every physical quantity is a string with an explicit unit suffix, e.g.
//! `"333.3 /s_angular"`, `"53.05 Hz"`, `"2 mW"`, `"1050 mm2/s"`. Frequencies in
//! Hz, kHz, MHz and GHz are converted to angular rates by `2π`; `rad/s` and
//! `/s_angular` are taken as given. Dimensionless numbers are plain JSON
//! numbers.

use std::f64::consts::PI;
use std::fmt;
use std::path::{Path, PathBuf};

use delaylight::temporal::DelayMethod;
use delaylight::transverse::{BeamProfile, KFilter, DEFAULT_GRID, DEFAULT_PITCH_MM};
use delaylight::{DriveState, MediumParams, TransferModel};
use serde::{Deserialize, Serialize};

/// Raw document as written by the user.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawConfig {
    pub scenario: Option<String>,
    pub output_dir: Option<String>,
    pub medium: Option<RawMedium>,
    pub drive: Option<RawDrive>,
    pub spectrum: Option<RawSpectrum>,
    pub pulse: Option<RawPulse>,
    pub beam: Option<RawBeam>,
    /// `analytic`, `numeric`, `pulse-centroid` or `all`.
    pub delay_method: Option<String>,
    pub noise_floor: Option<f64>,
    /// Off-resonance reference detuning for contrast; absent means `ω → ∞`.
    pub off_resonance: Option<String>,
    /// CSV `P_c_mW,value` of calibrated `S η_act`.
    pub s_eta_table: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawMedium {
    pub d: Option<f64>,
    pub gamma_1p: Option<String>,
    pub gamma: Option<String>,
    pub eta_act: Option<f64>,
    pub diffusion: Option<String>,
}

/// Exactly one of `powers`, `rabi`, `broadening` lists the drive points;
/// `deltas` (or the single `delta`) is crossed with it.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawDrive {
    /// `Ω² = κ P_c`, unit `rad2/s2/mW`.
    pub kappa: Option<String>,
    pub powers: Option<Vec<String>>,
    pub rabi: Option<Vec<String>>,
    /// On-resonance power broadening `Γ(Δ = 0)`; sets `Ω² = Γ γ₁ₚ / 2`.
    pub broadening: Option<Vec<String>>,
    pub delta: Option<String>,
    pub deltas: Option<Vec<String>>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawSpectrum {
    pub span_half_widths: Option<f64>,
    pub points: Option<usize>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawPulse {
    /// Intensity `1/e` full duration; absent means 40 signal delays.
    pub duration: Option<String>,
}

#[derive(Debug, Clone, Default, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RawBeam {
    pub n: Option<usize>,
    pub pitch: Option<String>,
    pub w_in: Option<String>,
    /// `exact` or `gaussian`.
    pub filter: Option<String>,
    /// Target signal delays; replaces the drive list for beam runs.
    pub delays: Option<Vec<String>>,
    pub write_profiles: Option<bool>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Scenario {
    Spectrum,
    Contrast,
    Delay,
    Pulse,
    Beam,
    Calibrate,
    Fig2a,
    Fig2b,
    Fig3a,
    Fig3b,
    Fig4,
}

impl Scenario {
    pub const NAMES: [&'static str; 11] = [
        "spectrum", "contrast", "delay", "pulse", "beam", "calibrate", "fig2a", "fig2b", "fig3a",
        "fig3b", "fig4",
    ];

    pub fn parse(name: &str) -> Option<Self> {
        Some(match name {
            "spectrum" => Scenario::Spectrum,
            "contrast" => Scenario::Contrast,
            "delay" => Scenario::Delay,
            "pulse" => Scenario::Pulse,
            "beam" => Scenario::Beam,
            "calibrate" => Scenario::Calibrate,
            "fig2a" => Scenario::Fig2a,
            "fig2b" => Scenario::Fig2b,
            "fig3a" => Scenario::Fig3a,
            "fig3b" => Scenario::Fig3b,
            "fig4" => Scenario::Fig4,
            _ => return None,
        })
    }

    pub fn name(self) -> &'static str {
        Self::NAMES[self as usize]
    }

    /// Computation a figure preset runs.
    pub fn kind(self) -> Scenario {
        match self {
            Scenario::Fig2a => Scenario::Spectrum,
            Scenario::Fig2b => Scenario::Contrast,
            Scenario::Fig3a | Scenario::Fig3b => Scenario::Delay,
            Scenario::Fig4 => Scenario::Beam,
            other => other,
        }
    }
}

/// One validated drive point.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DrivePoint {
    pub power_mw: Option<f64>,
    pub omega_rabi_rad_s: f64,
    pub delta_rad_s: f64,
}

impl DrivePoint {
    pub fn state(&self) -> DriveState {
        DriveState::new(self.omega_rabi_rad_s, self.delta_rad_s)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSettings {
    pub span_half_widths: f64,
    pub points: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BeamSettings {
    pub n: usize,
    pub pitch_mm: f64,
    pub w_in_mm: f64,
    pub filter: KFilter,
    pub delays_s: Vec<f64>,
    pub write_profiles: bool,
}

/// Validated configuration in internal units (rad/s, s, mm).
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioConfig {
    pub scenario: Scenario,
    pub output_dir: Option<PathBuf>,
    pub medium: MediumParams,
    pub kappa_rad2_s2_per_mw: Option<f64>,
    pub drives: Vec<DrivePoint>,
    pub spectrum: SpectrumSettings,
    pub pulse_duration_s: Option<f64>,
    pub beam: BeamSettings,
    pub delay_methods: Vec<DelayMethod>,
    pub noise_floor: f64,
    pub off_resonance_rad_s: Option<f64>,
    pub s_eta_table: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct FieldError {
    pub field: String,
    pub message: String,
}

/// All field-level problems found in one document.
#[derive(Debug, Clone, PartialEq)]
pub struct ConfigError(pub Vec<FieldError>);

impl ConfigError {
    pub fn single(field: &str, message: impl Into<String>) -> Self {
        ConfigError(vec![FieldError {
            field: field.to_string(),
            message: message.into(),
        }])
    }
}

impl fmt::Display for ConfigError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "invalid configuration:")?;
        for e in &self.0 {
            writeln!(f, "  {}: {}", e.field, e.message)?;
        }
        Ok(())
    }
}

impl std::error::Error for ConfigError {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Quantity {
    Rate,
    Power,
    Length,
    Diffusivity,
    Time,
    Kappa,
}

impl Quantity {
    fn scale(self, unit: &str) -> Option<f64> {
        let two_pi = 2.0 * PI;
        Some(match (self, unit) {
            (Quantity::Rate, "rad/s" | "/s_angular") => 1.0,
            (Quantity::Rate, "Hz") => two_pi,
            (Quantity::Rate, "kHz") => two_pi * 1e3,
            (Quantity::Rate, "MHz") => two_pi * 1e6,
            (Quantity::Rate, "GHz") => two_pi * 1e9,
            (Quantity::Power, "mW") => 1.0,
            (Quantity::Power, "uW") => 1e-3,
            (Quantity::Power, "W") => 1e3,
            (Quantity::Length, "mm") => 1.0,
            (Quantity::Length, "um") => 1e-3,
            (Quantity::Diffusivity, "mm2/s") => 1.0,
            (Quantity::Diffusivity, "cm2/s") => 100.0,
            (Quantity::Time, "s") => 1.0,
            (Quantity::Time, "ms") => 1e-3,
            (Quantity::Time, "us") => 1e-6,
            (Quantity::Kappa, "rad2/s2/mW") => 1.0,
            _ => return None,
        })
    }

    fn units(self) -> &'static str {
        match self {
            Quantity::Rate => "rad/s, /s_angular, Hz, kHz, MHz, GHz",
            Quantity::Power => "mW, uW, W",
            Quantity::Length => "mm, um",
            Quantity::Diffusivity => "mm2/s, cm2/s",
            Quantity::Time => "s, ms, us",
            Quantity::Kappa => "rad2/s2/mW",
        }
    }
}

/// Parses `"<number> <unit>"` into internal units.
pub fn parse_quantity(text: &str, kind: Quantity) -> Result<f64, String> {
    let mut parts = text.split_whitespace();
    let (Some(value), Some(unit), None) = (parts.next(), parts.next(), parts.next()) else {
        return Err(format!(
            "expected \"<number> <unit>\" with unit one of [{}], got {text:?}",
            kind.units()
        ));
    };
    let value: f64 = value
        .parse()
        .map_err(|_| format!("{value:?} is not a number"))?;
    if !value.is_finite() {
        return Err(format!("{value} is not finite"));
    }
    let scale = kind
        .scale(unit)
        .ok_or_else(|| format!("unit {unit:?} not accepted here; use one of [{}]", kind.units()))?;
    Ok(value * scale)
}

struct Collector(Vec<FieldError>);

impl Collector {
    fn push(&mut self, field: impl Into<String>, message: impl Into<String>) {
        self.0.push(FieldError {
            field: field.into(),
            message: message.into(),
        });
    }

    fn quantity(&mut self, field: &str, text: Option<&String>, kind: Quantity) -> Option<f64> {
        let text = text?;
        match parse_quantity(text, kind) {
            Ok(v) => Some(v),
            Err(m) => {
                self.push(field, m);
                None
            }
        }
    }

    fn required<T>(&mut self, field: &str, value: Option<T>) -> Option<T> {
        if value.is_none() {
            self.push(field, "missing required field");
        }
        value
    }

    fn list(&mut self, field: &str, items: &[String], kind: Quantity) -> Vec<f64> {
        items
            .iter()
            .enumerate()
            .filter_map(|(i, t)| self.quantity(&format!("{field}[{i}]"), Some(t), kind))
            .collect()
    }
}

/// Checks every field, fills defaults and converts units. `scenario`
/// overrides the document's own selector.
pub fn validate_config(
    raw: &RawConfig,
    scenario: Option<Scenario>,
    base_dir: Option<&Path>,
) -> Result<ScenarioConfig, ConfigError> {
    let mut c = Collector(Vec::new());

    let scenario = match (scenario, raw.scenario.as_deref()) {
        (Some(s), _) => Some(s),
        (None, Some(name)) => {
            let parsed = Scenario::parse(name);
            if parsed.is_none() {
                c.push("scenario", format!("unknown scenario {name:?}; expected one of {:?}", Scenario::NAMES));
            }
            parsed
        }
        (None, None) => {
            c.push("scenario", "no scenario selected (set `scenario` or use a subcommand)");
            None
        }
    };

    let medium = raw.medium.clone().unwrap_or_default();
    if raw.medium.is_none() {
        c.push("medium", "missing required section");
    }
    let d = c.required("medium.d", medium.d);
    let gamma_1p = c.required("medium.gamma_1p", medium.gamma_1p.as_ref());
    let gamma_1p = c.quantity("medium.gamma_1p", gamma_1p, Quantity::Rate);
    let gamma = c.required("medium.gamma", medium.gamma.as_ref());
    let gamma = c.quantity("medium.gamma", gamma, Quantity::Rate);
    let eta_act = c.required("medium.eta_act", medium.eta_act);
    let diffusion = match &medium.diffusion {
        Some(t) => c.quantity("medium.diffusion", Some(t), Quantity::Diffusivity),
        None => Some(0.0),
    };
    let medium = match (d, gamma_1p, gamma, eta_act, diffusion) {
        (Some(d), Some(gamma_1p), Some(gamma), Some(eta_act), Some(diffusion)) => {
            let m = MediumParams {
                d,
                gamma_1p,
                gamma,
                eta_act,
                diffusion,
            };
            match m.validate() {
                Ok(()) => Some(m),
                Err(e) => {
                    c.push("medium", e.to_string());
                    None
                }
            }
        }
        _ => None,
    };

    let beam_raw = raw.beam.clone().unwrap_or_default();
    let delays_s = beam_raw
        .delays
        .as_ref()
        .map(|v| c.list("beam.delays", v, Quantity::Time))
        .unwrap_or_default();
    let beam_by_delay = scenario.map(|s| s.kind()) == Some(Scenario::Beam) && beam_raw.delays.is_some();

    let (kappa, drives) = match (&raw.drive, medium) {
        (Some(drive), m) => parse_drives(&mut c, drive, m.as_ref()),
        (None, _) if beam_by_delay => (None, Vec::new()),
        (None, _) => {
            c.push("drive", "missing required section");
            (None, Vec::new())
        }
    };

    let spectrum = raw.spectrum.clone().unwrap_or_default();
    let span = spectrum
        .span_half_widths
        .unwrap_or(delaylight::spectra::DEFAULT_SPAN_HALF_WIDTHS);
    if !(span > 0.0 && span.is_finite()) {
        c.push("spectrum.span_half_widths", "must be finite and > 0");
    }
    let points = spectrum.points.unwrap_or(delaylight::spectra::DEFAULT_GRID_POINTS);
    if points < 8 {
        c.push("spectrum.points", "need at least 8 points for a line fit");
    }

    let pulse_duration_s = raw
        .pulse
        .as_ref()
        .and_then(|p| c.quantity("pulse.duration", p.duration.as_ref(), Quantity::Time));
    if let Some(t) = pulse_duration_s {
        if !(t > 0.0) {
            c.push("pulse.duration", "must be > 0");
        }
    }

    let n = beam_raw.n.unwrap_or(DEFAULT_GRID);
    if n < 8 || !n.is_power_of_two() {
        c.push("beam.n", format!("must be a power of two >= 8, got {n}"));
    }
    let pitch_mm = match &beam_raw.pitch {
        Some(t) => c.quantity("beam.pitch", Some(t), Quantity::Length),
        None => Some(DEFAULT_PITCH_MM),
    }
    .unwrap_or(DEFAULT_PITCH_MM);
    if !(pitch_mm > 0.0) {
        c.push("beam.pitch", "must be > 0");
    }
    let w_in_mm = match &beam_raw.w_in {
        Some(t) => c.quantity("beam.w_in", Some(t), Quantity::Length),
        None => Some(0.5),
    }
    .unwrap_or(0.5);
    if !(w_in_mm > 0.0) {
        c.push("beam.w_in", "must be > 0");
    }
    let filter = match beam_raw.filter.as_deref() {
        None | Some("exact") => KFilter::Exact,
        Some("gaussian") => KFilter::Gaussian,
        Some(other) => {
            c.push("beam.filter", format!("expected \"exact\" or \"gaussian\", got {other:?}"));
            KFilter::Exact
        }
    };
    if scenario.map(|s| s.kind()) == Some(Scenario::Beam) && n.is_power_of_two() && n >= 8 && pitch_mm > 0.0 && w_in_mm > 0.0 {
        if let Ok(b) = BeamProfile::gaussian(w_in_mm, pitch_mm, n) {
            let edge = b.edge_power_fraction();
            if edge > 1e-6 {
                c.push("beam.w_in", format!("input beam edge power fraction {edge:e} exceeds 1e-6; enlarge the grid"));
            }
        }
    }
    if let Some(m) = medium {
        for (i, &t) in delays_s.iter().enumerate() {
            if let Err(e) = delaylight::transverse::drive_for_delay(&m, t) {
                c.push(format!("beam.delays[{i}]"), e.to_string());
            }
        }
    }
    if beam_raw.delays.as_ref().is_some_and(|v| v.is_empty()) {
        c.push("beam.delays", "delay list is empty");
    }

    let delay_methods = match raw.delay_method.as_deref() {
        None | Some("analytic") => vec![DelayMethod::Analytic],
        Some("numeric") => vec![DelayMethod::Numeric],
        Some("pulse-centroid") => vec![DelayMethod::PulseCentroid],
        Some("all") => vec![DelayMethod::Analytic, DelayMethod::Numeric, DelayMethod::PulseCentroid],
        Some(other) => {
            c.push(
                "delay_method",
                format!("expected analytic, numeric, pulse-centroid or all, got {other:?}"),
            );
            Vec::new()
        }
    };

    let noise_floor = raw.noise_floor.unwrap_or(0.0);
    if !(noise_floor >= 0.0 && noise_floor.is_finite()) {
        c.push("noise_floor", "must be finite and >= 0");
    }
    let off_resonance_rad_s = c.quantity("off_resonance", raw.off_resonance.as_ref(), Quantity::Rate);

    let s_eta_table = raw.s_eta_table.as_ref().and_then(|p| {
        let path = match base_dir {
            Some(dir) if Path::new(p).is_relative() => dir.join(p),
            _ => PathBuf::from(p),
        };
        match read_table(&path) {
            Ok(t) => Some(t),
            Err(m) => {
                c.push("s_eta_table", m);
                None
            }
        }
    });
    if s_eta_table.is_some() && drives.iter().any(|d| d.power_mw.is_none()) {
        c.push("s_eta_table", "the table is indexed by power; give the drive as `powers`");
    }

    if !c.0.is_empty() {
        return Err(ConfigError(c.0));
    }
    Ok(ScenarioConfig {
        scenario: scenario.expect("checked above"),
        output_dir: raw.output_dir.as_ref().map(PathBuf::from),
        medium: medium.expect("checked above"),
        kappa_rad2_s2_per_mw: kappa,
        drives,
        spectrum: SpectrumSettings {
            span_half_widths: span,
            points,
        },
        pulse_duration_s,
        beam: BeamSettings {
            n,
            pitch_mm,
            w_in_mm,
            filter,
            delays_s,
            write_profiles: beam_raw.write_profiles.unwrap_or(false),
        },
        delay_methods,
        noise_floor,
        off_resonance_rad_s,
        s_eta_table,
    })
}

/// Unit errors are reported even without a valid medium; the medium is needed
/// only for `broadening` and the pole check.
fn parse_drives(
    c: &mut Collector,
    raw: &RawDrive,
    medium: Option<&MediumParams>,
) -> (Option<f64>, Vec<DrivePoint>) {
    let kappa = c.quantity("drive.kappa", raw.kappa.as_ref(), Quantity::Kappa);
    if let Some(k) = kappa {
        if !(k > 0.0) {
            c.push("drive.kappa", "must be > 0");
        }
    }
    let deltas = match (&raw.delta, &raw.deltas) {
        (Some(_), Some(_)) => {
            c.push("drive", "give either `delta` or `deltas`, not both");
            return (kappa, Vec::new());
        }
        (Some(t), None) => c.quantity("drive.delta", Some(t), Quantity::Rate).into_iter().collect(),
        (None, Some(v)) => {
            if v.is_empty() {
                c.push("drive.deltas", "detuning list is empty");
            }
            c.list("drive.deltas", v, Quantity::Rate)
        }
        (None, None) => vec![0.0],
    };

    let given = [raw.powers.is_some(), raw.rabi.is_some(), raw.broadening.is_some()]
        .iter()
        .filter(|&&b| b)
        .count();
    if given != 1 {
        c.push("drive", "give exactly one of `powers`, `rabi`, `broadening`");
        return (kappa, Vec::new());
    }
    let base: Vec<(Option<f64>, f64)> = if let Some(p) = &raw.powers {
        let powers = c.list("drive.powers", p, Quantity::Power);
        match kappa {
            Some(k) if k > 0.0 => powers.iter().map(|&p| (Some(p), (k * p).max(0.0).sqrt())).collect(),
            Some(_) => Vec::new(),
            None => {
                c.push("drive.kappa", "required when the drive is given as `powers`");
                Vec::new()
            }
        }
    } else if let Some(r) = &raw.rabi {
        c.list("drive.rabi", r, Quantity::Rate).into_iter().map(|o| (None, o)).collect()
    } else {
        let b = raw.broadening.as_ref().expect("one list is present");
        let rates = c.list("drive.broadening", b, Quantity::Rate);
        match medium {
            Some(m) => rates
                .into_iter()
                .map(|g| (None, (g * m.gamma_1p / 2.0).max(0.0).sqrt()))
                .collect(),
            None => Vec::new(),
        }
    };
    let list_len = raw
        .powers
        .as_ref()
        .or(raw.rabi.as_ref())
        .or(raw.broadening.as_ref())
        .map_or(0, |v| v.len());
    if list_len == 0 {
        c.push("drive", "drive list is empty");
    }

    let mut drives = Vec::new();
    for &(power_mw, omega) in &base {
        if let Some(p) = power_mw {
            if p < 0.0 {
                c.push("drive.powers", format!("power {p} mW is negative"));
            }
        }
        for &delta in &deltas {
            let point = DrivePoint {
                power_mw,
                omega_rabi_rad_s: omega,
                delta_rad_s: delta,
            };
            if let Some(m) = medium {
                if let Err(e) = TransferModel::new(m, &point.state()) {
                    c.push("drive", e.to_string());
                }
            }
            drives.push(point);
        }
    }
    (kappa, drives)
}

/// Reads a headed two-column CSV `P_c_mW,value`.
pub fn read_table(path: &Path) -> Result<Vec<(f64, f64)>, String> {
    let text = std::fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
    let mut rows = Vec::new();
    for (i, line) in text.lines().enumerate().skip(1) {
        if line.trim().is_empty() {
            continue;
        }
        let cols: Vec<&str> = line.split(',').map(str::trim).collect();
        let parsed = match cols.as_slice() {
            [a, b] => a.parse::<f64>().ok().zip(b.parse::<f64>().ok()),
            _ => None,
        };
        match parsed {
            Some(r) => rows.push(r),
            None => return Err(format!("{}:{}: expected two numeric columns", path.display(), i + 1)),
        }
    }
    delaylight::SEtaTable::new(rows.clone()).map_err(|e| format!("{}: {e}", path.display()))?;
    Ok(rows)
}

pub fn parse_document(text: &str) -> Result<RawConfig, ConfigError> {
    serde_json::from_str(text).map_err(|e| ConfigError::single("<document>", e.to_string()))
}
