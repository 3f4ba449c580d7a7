//! Scenario execution. Sweep points run on the rayon pool; files are written
//! afterwards in drive order so outputs are deterministic.

use std::path::PathBuf;

use delaylight::spectra::lineshape_asymmetry;
use delaylight::temporal::{
    analytic_tau_p_with_s_eta, delay, max_delay, measure_pulse, probe_pulse, DelayMethod,
};
use delaylight::transverse::{drive_for_delay, fit_gaussian_width, propagate_beam, BeamProfile};
use delaylight::{
    calibrate_power, calibrate_s_eta, contrast_sweep, fit_lorentzian, fwhm_hz, linear_fit,
    scan_spectrum, ContrastOptions, DriveState, FrequencyGrid, SEtaTable, Spectrum, TransferModel,
};
use rayon::prelude::*;
use serde_json::json;
use thiserror::Error;

use crate::config::{DrivePoint, Scenario, ScenarioConfig};
use crate::output::{num, RunDir};

#[derive(Debug, Error)]
pub enum RunError {
    #[error(transparent)]
    Numerical(#[from] delaylight::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

type Result<T> = std::result::Result<T, RunError>;

/// Label and value of the swept quantity for the `P_c_or_Delta` column.
fn sweep_axis(drives: &[DrivePoint]) -> (&'static str, Vec<f64>) {
    let powers: Vec<Option<f64>> = drives.iter().map(|d| d.power_mw).collect();
    let varies = |v: Vec<f64>| v.windows(2).any(|w| w[0] != w[1]);
    let deltas: Vec<f64> = drives.iter().map(|d| d.delta_rad_s).collect();
    if powers.iter().all(Option::is_some) && varies(powers.iter().map(|p| p.unwrap()).collect()) {
        ("P_c_mW", powers.into_iter().map(Option::unwrap).collect())
    } else if varies(deltas.clone()) {
        ("Delta_rad_s", deltas)
    } else if powers.iter().all(Option::is_some) {
        ("P_c_mW", powers.into_iter().map(Option::unwrap).collect())
    } else {
        ("Omega_rad_s", drives.iter().map(|d| d.omega_rabi_rad_s).collect())
    }
}

fn states(cfg: &ScenarioConfig) -> Vec<DriveState> {
    cfg.drives.iter().map(DrivePoint::state).collect()
}

fn grid_for(cfg: &ScenarioConfig, model: &TransferModel) -> delaylight::Result<FrequencyGrid> {
    FrequencyGrid::centered(
        model.resonance(),
        cfg.spectrum.span_half_widths * model.half_linewidth(),
        cfg.spectrum.points,
    )
}

/// Runs `cfg` into `out`, returning the summary path.
pub fn run(cfg: &ScenarioConfig, out: PathBuf) -> Result<PathBuf> {
    let mut dir = RunDir::create(&out)?;
    let outcome = match cfg.scenario.kind() {
        Scenario::Spectrum => spectrum(cfg, &mut dir),
        Scenario::Contrast => contrast(cfg, &mut dir),
        Scenario::Delay => delays(cfg, &mut dir),
        Scenario::Pulse => pulse(cfg, &mut dir),
        Scenario::Beam => beam(cfg, &mut dir),
        Scenario::Calibrate => calibrate(cfg, &mut dir),
        _ => unreachable!("figure presets map onto a base scenario"),
    };
    match outcome {
        Ok(()) => Ok(dir.finish(cfg.scenario.name(), cfg)?),
        Err(e) => {
            crate::output::mark_failed(&out, &e.to_string());
            Err(e)
        }
    }
}

fn spectrum(cfg: &ScenarioConfig, dir: &mut RunDir) -> Result<()> {
    let medium = cfg.medium;
    let computed = cfg
        .drives
        .par_iter()
        .map(|point| {
            let model = TransferModel::new(&medium, &point.state())?;
            let grid = grid_for(cfg, &model)?;
            let sp = scan_spectrum(&medium, &point.state(), &grid)?;
            let fit = fit_lorentzian(&grid.omegas(), &sp.power_signal)?;
            let asym_signal = lineshape_asymmetry(&sp.power_signal, &grid)?;
            let asym_probe = lineshape_asymmetry(&sp.power_probe, &grid)?;
            Ok((model, sp, fit, asym_signal, asym_probe))
        })
        .collect::<delaylight::Result<Vec<_>>>()?;

    let mut lines = Vec::new();
    for (i, (point, (model, sp, fit, asym_s, asym_p))) in cfg.drives.iter().zip(computed).enumerate() {
        let name = format!("spectrum_{i:03}.csv");
        dir.csv(&name, &["omega_rad_s", "power_probe", "power_signal"], spectrum_rows(&sp))?;
        let tau_s = (1.0 / (medium.gamma + model.gamma_power)).re;
        let fit_hz = fit.fwhm / (2.0 * std::f64::consts::PI);
        lines.push(json!({
            "file": name,
            "power_mW": point.power_mw,
            "omega_rabi_rad_s": point.omega_rabi_rad_s,
            "delta_rad_s": point.delta_rad_s,
            "signal_fwhm_hz": fit_hz,
            "model_fwhm_hz": fwhm_hz(model.half_linewidth()),
            "signal_center_rad_s": fit.center,
            "signal_fit_rms_residual": fit.rms_residual,
            "signal_asymmetry": asym_s,
            "probe_asymmetry": asym_p,
            "tau_s_s": tau_s,
            "fwhm_tau_pi": fit_hz * tau_s * std::f64::consts::PI,
        }));
    }
    dir.result("lines", lines);
    Ok(())
}

fn spectrum_rows(sp: &Spectrum) -> impl Iterator<Item = Vec<String>> + '_ {
    (0..sp.grid.len()).map(move |i| {
        vec![
            num(sp.grid.omega(i)),
            num(sp.power_probe[i]),
            num(sp.power_signal[i]),
        ]
    })
}

fn contrast(cfg: &ScenarioConfig, dir: &mut RunDir) -> Result<()> {
    let options = ContrastOptions {
        off_resonance_omega: cfg.off_resonance_rad_s,
        noise_floor: cfg.noise_floor,
    };
    let points = cfg
        .drives
        .par_iter()
        .map(|d| contrast_sweep(&cfg.medium, &[d.state()], &options).map(|v| v[0]))
        .collect::<delaylight::Result<Vec<_>>>()?;
    let (axis, xs) = sweep_axis(&cfg.drives);
    dir.csv(
        "contrast.csv",
        &["P_c_or_Delta", "probe_contrast", "signal_contrast", "peak_efficiency", "weak_parameter"],
        xs.iter().zip(&points).map(|(x, p)| {
            vec![num(*x), num(p.probe), num(p.signal), num(p.peak_efficiency), num(p.weak_parameter)]
        }),
    )?;
    dir.result("sweep_axis", axis);
    let fold = |f: fn(&delaylight::ContrastPoint) -> f64| points.iter().map(f).fold(f64::INFINITY, f64::min);
    dir.result("min_probe_contrast", fold(|p| p.probe));
    dir.result("min_signal_contrast", fold(|p| p.signal));
    dir.result("noise_floor", cfg.noise_floor);
    Ok(())
}

fn delays(cfg: &ScenarioConfig, dir: &mut RunDir) -> Result<()> {
    let table = cfg.s_eta_table.clone().map(SEtaTable::new).transpose()?;
    let jobs: Vec<(usize, DelayMethod)> = cfg
        .delay_methods
        .iter()
        .flat_map(|&m| (0..cfg.drives.len()).map(move |i| (i, m)))
        .collect();
    let results = jobs
        .par_iter()
        .map(|&(i, method)| {
            let point = &cfg.drives[i];
            let mut r = delay(&cfg.medium, &point.state(), method)?;
            if let (DelayMethod::Analytic, Some(t), Some(p)) = (method, &table, point.power_mw) {
                r.tau_p = analytic_tau_p_with_s_eta(t.interpolate(p), &cfg.medium, &point.state())?;
            }
            Ok(r)
        })
        .collect::<delaylight::Result<Vec<_>>>()?;
    let (axis, xs) = sweep_axis(&cfg.drives);
    dir.csv(
        "delays.csv",
        &["P_c_or_Delta", "tau_p_s", "tau_s_s", "method"],
        jobs.iter()
            .zip(&results)
            .map(|(&(i, _), r)| vec![num(xs[i]), num(r.tau_p), num(r.tau_s), r.method.as_str().to_string()]),
    )?;
    dir.result("sweep_axis", axis);
    for method in &cfg.delay_methods {
        let rows: Vec<_> = jobs
            .iter()
            .zip(&results)
            .filter(|((_, m), _)| m == method)
            .map(|((i, _), r)| (xs[*i], r))
            .collect();
        let (x_at_max, best) = rows
            .iter()
            .max_by(|a, b| a.1.tau_p.total_cmp(&b.1.tau_p))
            .map(|(x, r)| (*x, r.tau_p))
            .unwrap_or((f64::NAN, f64::NAN));
        dir.result(
            method.as_str(),
            json!({
                "tau_s_first_s": rows.first().map(|r| r.1.tau_s),
                "tau_s_last_s": rows.last().map(|r| r.1.tau_s),
                "tau_p_max_s": best,
                "tau_p_max_at": x_at_max,
            }),
        );
    }
    if table.is_some() {
        dir.result("s_eta_table", "analytic tau_p uses the calibrated S*eta_act table");
    }
    Ok(())
}

fn pulse(cfg: &ScenarioConfig, dir: &mut RunDir) -> Result<()> {
    let runs = cfg
        .drives
        .par_iter()
        .map(|point| {
            let input = match cfg.pulse_duration_s {
                Some(duration) => {
                    let model = TransferModel::new(&cfg.medium, &point.state())?;
                    Some(probe_pulse(duration, max_delay(&model))?)
                }
                None => None,
            };
            measure_pulse(&cfg.medium, &point.state(), input.as_ref())
        })
        .collect::<delaylight::Result<Vec<_>>>()?;
    let (axis, xs) = sweep_axis(&cfg.drives);
    for (i, m) in runs.iter().enumerate() {
        dir.csv(
            &format!("pulse_{i:03}.csv"),
            &["t_s", "input_intensity", "probe_intensity", "signal_intensity"],
            (0..m.input.len()).map(|j| {
                vec![
                    num(m.input.time(j)),
                    num(m.input.samples[j].norm_sqr()),
                    num(m.probe.samples[j].norm_sqr()),
                    num(m.signal.samples[j].norm_sqr()),
                ]
            }),
        )?;
    }
    dir.csv(
        "delays.csv",
        &["P_c_or_Delta", "tau_p_s", "tau_s_s", "method"],
        xs.iter().zip(&runs).map(|(x, m)| {
            vec![num(*x), num(m.tau_p), num(m.tau_s), DelayMethod::PulseCentroid.as_str().to_string()]
        }),
    )?;
    dir.result("sweep_axis", axis);
    dir.result(
        "energy_ratio_signal",
        runs.iter().map(|m| m.signal.energy() / m.input.energy()).collect::<Vec<_>>(),
    );
    Ok(())
}

fn beam(cfg: &ScenarioConfig, dir: &mut RunDir) -> Result<()> {
    let medium = cfg.medium;
    let drives: Vec<DriveState> = if cfg.beam.delays_s.is_empty() {
        states(cfg)
    } else {
        cfg.beam
            .delays_s
            .iter()
            .map(|&t| drive_for_delay(&medium, t))
            .collect::<delaylight::Result<_>>()?
    };
    let beam_in = BeamProfile::gaussian(cfg.beam.w_in_mm, cfg.beam.pitch_mm, cfg.beam.n)?;
    let outs = drives
        .par_iter()
        .map(|d| {
            let model = TransferModel::new(&medium, d)?;
            let tau_s = (1.0 / (medium.gamma + model.gamma_power)).re;
            let out = propagate_beam(&beam_in, &medium, d, 0.0, cfg.beam.filter)?;
            let fit = fit_gaussian_width(&out)?;
            Ok((tau_s, out, fit))
        })
        .collect::<delaylight::Result<Vec<_>>>()?;
    dir.csv(
        "widths.csv",
        &["tau_s_s", "w2_mm2"],
        outs.iter().map(|(t, _, f)| vec![num(*t), num(f.w2())]),
    )?;
    if cfg.beam.write_profiles {
        dir.beam_grid("beam_in.csv", &beam_in)?;
        for (i, (_, out, _)) in outs.iter().enumerate() {
            dir.beam_grid(&format!("beam_out_{i:03}.csv"), out)?;
        }
    }
    let tau: Vec<f64> = outs.iter().map(|o| o.0).collect();
    let w2: Vec<f64> = outs.iter().map(|o| o.2.w2()).collect();
    dir.result("w2_mm2", w2.clone());
    dir.result("area_mm2", outs.iter().map(|o| o.2.area()).collect::<Vec<_>>());
    dir.result(
        "min_gaussian_overlap",
        outs.iter().map(|o| o.2.gaussian_overlap).fold(f64::INFINITY, f64::min),
    );
    if tau.len() >= 2 {
        let line = linear_fit(&tau, &w2, None)?;
        dir.result("fitted_diffusion_mm2_s", line.slope / 4.0);
        dir.result("fitted_w0_squared_mm2", line.intercept);
        dir.result("r_squared", line.r_squared);
    }
    dir.result("filter", if cfg.beam.filter == delaylight::KFilter::Exact { "exact" } else { "gaussian" });
    Ok(())
}

fn calibrate(cfg: &ScenarioConfig, dir: &mut RunDir) -> Result<()> {
    let medium = cfg.medium;
    let resonant: Vec<&DrivePoint> = cfg.drives.iter().filter(|d| d.delta_rad_s == 0.0).collect();
    let spectra = resonant
        .par_iter()
        .map(|point| {
            let model = TransferModel::new(&medium, &point.state())?;
            let grid = grid_for(cfg, &model)?;
            Ok((point.power_mw.unwrap_or(0.0), scan_spectrum(&medium, &point.state(), &grid)?))
        })
        .collect::<delaylight::Result<Vec<(f64, Spectrum)>>>()?;
    if resonant.iter().any(|d| d.power_mw.is_none()) {
        return Err(delaylight::Error::InvalidParameter {
            name: "drive",
            reason: "calibration needs the drive given as `powers`".into(),
        }
        .into());
    }
    let calibration = calibrate_power(&spectra, medium.gamma_1p)?;
    dir.csv(
        "calibration_halfwidth.csv",
        &["P_c_mW", "value"],
        calibration.widths.iter().map(|(p, w)| vec![num(*p), num(*w)]),
    )?;
    dir.result("kappa_rad2_s2_per_mW", calibration.kappa);
    dir.result("gamma_extrapolated_rad_s", calibration.gamma_extrapolated);
    dir.result("gamma_extrapolated_inverse_s", 1.0 / calibration.gamma_extrapolated);
    if let Some(k) = cfg.kappa_rad2_s2_per_mw {
        dir.result("kappa_relative_error", calibration.kappa / k - 1.0);
    }
    dir.result("gamma_relative_error", calibration.gamma_extrapolated / medium.gamma - 1.0);

    let positive: Vec<(f64, Spectrum)> = spectra.into_iter().filter(|(p, _)| *p > 0.0).collect();
    match calibrate_s_eta(&positive, &calibration) {
        Ok(table) => {
            dir.csv(
                "s_eta.csv",
                &["P_c_mW", "value"],
                table.points().iter().map(|(p, v)| vec![num(*p), num(*v)]),
            )?;
            dir.result("s_eta_model", medium.d * medium.eta_act);
        }
        Err(delaylight::Error::OutOfValidity(x)) => {
            log::warn!("S*eta_act table skipped: |S f| = {x:.3} outside weak EIT");
            dir.result("s_eta_skipped", format!("|S f| = {x:.3} exceeds 0.3"));
        }
        Err(e) => return Err(e.into()),
    }
    Ok(())
}
