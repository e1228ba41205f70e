//! Figures of merit from correlator output: response fits, Y factors,
//! noise temperatures, Allan variance and closed-form SNR oracles.

mod allan;
mod noise_temp;
mod oracles;
pub mod tables;

pub use allan::{allan_variance, allan_variance_with, AllanOptions, AllanResult};
pub use noise_temp::{
    fit_response, fit_response_weighted, occupation, radiometer_sigma, t_rec_from_power,
    t_sys_ac_closed_form, t_sys_cc_closed_form, y_factor, NoiseTempResult, ResponseCurve, YFactor,
};
pub use oracles::{snr_oracles, OracleInputs, SignalNoise, SnrOracles};
