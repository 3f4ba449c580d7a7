//! Steady-state transfer-function model of delayed-light generation by
//! four-wave mixing in a double-V Raman medium.
//!
//! * [`model`]: one- and two-photon responses and the probe/signal transfer
//!   amplitudes.
//! * [`spectra`]: frequency scans, contrast and lineshape diagnostics.
//! * [`temporal`]: group delays by closed form, phase slope and pulse
//!   propagation.
//! * [`transverse`]: diffusion as a k-space filter and Gaussian width fits.
//! * [`fitting`]: Lorentzian and linear fits, power and `S η` calibration.
//!
//! Rates and detunings are angular (rad/s), times in s, lengths in mm.

pub mod error;
pub mod fitting;
mod fourier;
pub mod model;
pub mod spectra;
pub mod temporal;
pub mod transverse;

pub use error::{Error, Result};
pub use fitting::{
    calibrate_power, calibrate_s_eta, fit_lorentzian, linear_fit, LinearFit, LorentzianFit,
    PowerCalibration, SEtaTable,
};
pub use model::{
    efficiency, fwhm_hz, transfer_amplitudes, transfer_pair, Amplitudes, ComplexResponse,
    DriveState, MediumParams, TransferModel, TransferPair, C64,
};
pub use spectra::{
    contrast, contrast_sweep, lineshape_asymmetry, scan_spectrum, ContrastOptions, ContrastPoint,
    FrequencyGrid, Spectrum,
};
pub use temporal::{
    analytic_tau_p, analytic_tau_s, delay_sweep, group_delay, measure_pulse, propagate_pulse,
    DelayMethod, DelayResult, Pulse,
};
pub use transverse::{
    diffusion_sweep, fit_gaussian_width, propagate_beam, BeamProfile, DiffusionPoint, KFilter,
    WidthMeasurement,
};
