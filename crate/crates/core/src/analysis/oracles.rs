//! Closed-form signal-to-noise expressions for heterodyne auto- and
//! cross-correlation, in their general form and their strong-LO limits.

use serde::{Deserialize, Serialize};

use crate::constants::{responsivity, BOLTZMANN, ELEMENTARY_CHARGE, PLANCK};
use crate::error::{Error, Result};

/// Photon-number variance assumed for the signal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum SignalNoise {
    /// `n_s`, as in the single-receiver expression.
    #[default]
    Poissonian,
    /// `n_s (n_s + 1)`, as in the cross-correlation expression.
    BoseEinstein,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OracleInputs {
    pub n_s: f64,
    pub n_lo: f64,
    #[serde(rename = "dnu_s_hz")]
    pub dnu_s: f64,
    #[serde(rename = "dnu_lo_hz")]
    pub dnu_lo: f64,
    /// Post-detection bandwidth.
    #[serde(rename = "df_hz")]
    pub df: f64,
    pub gamma_mag: f64,
    pub c_lo: f64,
    pub fano: f64,
    pub eta: f64,
    #[serde(rename = "frequency_hz")]
    pub frequency: f64,
    #[serde(rename = "amp_temp_kelvin")]
    pub amp_temp: f64,
    #[serde(rename = "z_load_ohms")]
    pub z_load: f64,
    #[serde(rename = "dark_current_amps")]
    pub dark_current: f64,
    #[serde(default)]
    pub signal_noise: SignalNoise,
}

impl Default for OracleInputs {
    fn default() -> Self {
        let frequency =
            crate::constants::frequency_from_wavelength(crate::constants::DEFAULT_WAVELENGTH_M);
        let dnu_lo = 1e6;
        OracleInputs {
            n_s: 1.0,
            // 1 mW of LO over the LO linewidth.
            n_lo: 1e-3 / (PLANCK * frequency * dnu_lo),
            dnu_s: 6.25e6,
            dnu_lo,
            df: 1.0,
            gamma_mag: 1.0,
            c_lo: 0.047,
            fano: 1.0,
            eta: 0.75,
            frequency,
            amp_temp: 300.0,
            z_load: 50.0,
            dark_current: 0.0,
            signal_noise: SignalNoise::Poissonian,
        }
    }
}

impl OracleInputs {
    pub fn p_s(&self) -> f64 {
        PLANCK * self.frequency * self.n_s * self.dnu_s
    }

    pub fn p_lo(&self) -> f64 {
        PLANCK * self.frequency * self.n_lo * self.dnu_lo
    }

    fn signal_variance(&self) -> f64 {
        match self.signal_noise {
            SignalNoise::Poissonian => self.n_s,
            SignalNoise::BoseEinstein => self.n_s * (self.n_s + 1.0),
        }
    }

    fn validate(&self) -> Result<()> {
        let positive = [
            ("dnu_s_hz", self.dnu_s),
            ("dnu_lo_hz", self.dnu_lo),
            ("df_hz", self.df),
            ("fano", self.fano),
            ("eta", self.eta),
            ("frequency_hz", self.frequency),
            ("z_load_ohms", self.z_load),
            ("n_lo", self.n_lo),
        ];
        for (name, v) in positive {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::field(name, "must be > 0"));
            }
        }
        let non_negative = [
            ("n_s", self.n_s),
            ("gamma_mag", self.gamma_mag),
            ("c_lo", self.c_lo),
            ("amp_temp_kelvin", self.amp_temp),
            ("dark_current_amps", self.dark_current),
        ];
        for (name, v) in non_negative {
            if !(v >= 0.0 && v.is_finite()) {
                return Err(Error::field(name, "must be >= 0"));
            }
        }
        if self.eta > 1.0 {
            return Err(Error::field("eta", "must be <= 1"));
        }
        Ok(())
    }
}

/// Every oracle with its strong-LO limit alongside.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SnrOracles {
    pub snr_het_pre: f64,
    pub snr_het_pre_limit: f64,
    pub snr_cc_pre: f64,
    pub snr_cc_pre_limit: f64,
    pub nr_het: f64,
    pub nr_het_limit: f64,
    /// Post-detection SNR of the single receiver, `snr_het_pre / (1 + nr_het)`.
    pub snr_post: f64,
    pub snr_het_el: f64,
    pub snr_het_el_limit: f64,
    /// W/Hz
    pub nespd: f64,
}

pub fn snr_oracles(p: &OracleInputs) -> Result<SnrOracles> {
    p.validate()?;
    let hv = PLANCK * p.frequency;
    let resp = responsivity(p.eta, p.frequency);
    let ratio = p.dnu_s / p.df;
    let sig_var = p.signal_variance();
    let lo = p.n_lo * p.dnu_lo;

    let snr_het_pre = 2.0 * p.n_s * p.dnu_s * lo / ((sig_var * p.dnu_s + lo) * 2.0 * p.df);
    let snr_het_pre_limit = p.n_s * ratio;

    let cc_den = p.c_lo * p.fano + p.gamma_mag * sig_var * p.dnu_s / lo;
    let snr_cc_pre = if cc_den > 0.0 {
        p.gamma_mag * p.n_s / cc_den * ratio
    } else {
        f64::INFINITY
    };
    let snr_cc_pre_limit = if p.c_lo > 0.0 {
        p.gamma_mag / p.c_lo * p.n_s / p.fano * ratio
    } else {
        f64::INFINITY
    };

    let p_lo = p.p_lo();
    let i_ph = resp * p_lo;
    let e = ELEMENTARY_CHARGE;
    let n_el = (BOLTZMANN * p.amp_temp
        + p.z_load * 2.0 * e * (p.dark_current + (1.0 - p.eta) * i_ph))
        * p.df;
    let n_pre = p.z_load
        * resp
        * resp
        * hv
        * hv
        * (p.n_s * (p.n_s + 1.0) * p.dnu_s + p.fano * lo)
        * 2.0
        * p.df;
    let nr_het = n_el / n_pre;
    let nr_het_limit = (BOLTZMANN * p.amp_temp + p.z_load * 2.0 * e * p.dark_current)
        / (2.0 * p.z_load * resp * resp * hv * p.fano * p_lo)
        + (1.0 - p.eta) / (p.fano * p.eta);

    let psd_s = p.n_s * hv;
    let snr_het_el =
        resp * psd_s / (p.fano * e + BOLTZMANN * p.amp_temp / (2.0 * p.z_load * resp * p_lo));
    let snr_het_el_limit = resp * psd_s / (p.fano * e);

    Ok(SnrOracles {
        snr_het_pre,
        snr_het_pre_limit,
        snr_cc_pre,
        snr_cc_pre_limit,
        nr_het,
        nr_het_limit,
        snr_post: snr_het_pre / (1.0 + nr_het),
        snr_het_el,
        snr_het_el_limit,
        nespd: p.fano * hv / p.eta,
    })
}
