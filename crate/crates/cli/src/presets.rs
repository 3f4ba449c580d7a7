//! Built-in configurations for the figure scenarios.
//!
//! Shared medium: `d = 2.5`, `γ₁ₚ = 2π·300 MHz`, `γ = (3 ms)⁻¹`,
//! `η_act = 0.5`, with `κ` chosen so that `Γ(2 mW) = 20 γ`. Presets that need
//! weak generation override the medium where they are defined.

use std::f64::consts::PI;

use crate::config::{RawBeam, RawConfig, RawDrive, RawMedium, Scenario};

const GAMMA: f64 = 1.0 / 3e-3;
const GAMMA_1P: f64 = 2.0 * PI * 300e6;

fn rate(v: f64) -> String {
    format!("{v:e} rad/s")
}

fn medium() -> RawMedium {
    RawMedium {
        d: Some(2.5),
        gamma_1p: Some("300 MHz".into()),
        gamma: Some(rate(GAMMA)),
        eta_act: Some(0.5),
        diffusion: None,
    }
}

/// `Γ(2 mW) = 20 γ` with `Γ = 2 κ P / γ₁ₚ`.
fn kappa() -> String {
    format!("{:e} rad2/s2/mW", 20.0 * GAMMA * GAMMA_1P / 4.0)
}

fn log_powers(lo: f64, hi: f64, count: usize) -> Vec<String> {
    (0..count)
        .map(|i| {
            let p = lo * (hi / lo).powf(i as f64 / (count - 1) as f64);
            format!("{p:e} mW")
        })
        .collect()
}

pub fn preset(scenario: Scenario) -> Option<RawConfig> {
    let base = RawConfig {
        scenario: Some(scenario.name().to_string()),
        medium: Some(medium()),
        ..RawConfig::default()
    };
    Some(match scenario {
        // γ + Γ = 2π·115 rad/s and weak generation: a 230 Hz generation line
        Scenario::Fig2a => RawConfig {
            medium: Some(RawMedium {
                eta_act: Some(0.002),
                ..medium()
            }),
            drive: Some(RawDrive {
                broadening: Some(vec![rate(2.0 * PI * 115.0 - GAMMA)]),
                deltas: Some(
                    ["0 Hz", "440 MHz", "-440 MHz", "880 MHz", "-880 MHz"]
                        .iter()
                        .map(|s| s.to_string())
                        .collect(),
                ),
                ..RawDrive::default()
            }),
            ..base
        },
        Scenario::Fig2b => RawConfig {
            drive: Some(RawDrive {
                kappa: Some(kappa()),
                powers: Some(log_powers(1e-4, 2.0, 15)),
                ..RawDrive::default()
            }),
            ..base
        },
        Scenario::Fig3a => RawConfig {
            drive: Some(RawDrive {
                kappa: Some(kappa()),
                powers: Some(log_powers(1e-3, 2.0, 21)),
                ..RawDrive::default()
            }),
            delay_method: Some("all".into()),
            ..base
        },
        Scenario::Fig3b => RawConfig {
            drive: Some(RawDrive {
                kappa: Some(kappa()),
                powers: Some(vec!["1 mW".into()]),
                deltas: Some((-4..=4).map(|i| format!("{} MHz", 220 * i)).collect()),
                ..RawDrive::default()
            }),
            delay_method: Some("all".into()),
            ..base
        },
        // weak generation and γ = (30 ms)⁻¹ so that every target delay keeps Γ > 0
        Scenario::Fig4 => RawConfig {
            medium: Some(RawMedium {
                d: Some(0.5),
                gamma: Some(rate(1.0 / 30e-3)),
                eta_act: Some(0.02),
                diffusion: Some("1050 mm2/s".into()),
                ..medium()
            }),
            beam: Some(RawBeam {
                n: Some(256),
                pitch: Some("0.0625 mm".into()),
                w_in: Some("0.5 mm".into()),
                filter: Some("gaussian".into()),
                delays: Some(["0.5 ms", "1 ms", "2 ms", "3 ms"].iter().map(|s| s.to_string()).collect()),
                write_profiles: None,
            }),
            ..base
        },
        _ => return None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::validate_config;

    #[test]
    fn presets_validate() {
        for name in ["fig2a", "fig2b", "fig3a", "fig3b", "fig4"] {
            let s = Scenario::parse(name).unwrap();
            let raw = preset(s).unwrap();
            validate_config(&raw, None, None).unwrap_or_else(|e| panic!("{name}: {e}"));
        }
        assert!(preset(Scenario::Delay).is_none());
    }

    #[test]
    fn kappa_gives_twenty_gamma_at_two_milliwatts() {
        let raw = preset(Scenario::Fig3a).unwrap();
        let cfg = validate_config(&raw, None, None).unwrap();
        let k = cfg.kappa_rad2_s2_per_mw.unwrap();
        let broadening = 2.0 * k * 2.0 / cfg.medium.gamma_1p;
        assert!((broadening / (20.0 * cfg.medium.gamma) - 1.0).abs() < 1e-9);
    }
}
