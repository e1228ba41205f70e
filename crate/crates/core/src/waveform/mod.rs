//! Time-domain receiver chain: post-detection IF voltages of the two
//! receivers, amplification, and ADC quantization.

pub mod adc;
mod hilbert;
pub mod synth;

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use rustfft::{num_complex::Complex64, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::constants;
use crate::error::{Error, Result};

pub use adc::{
    adc_quantize, amplify, clip_probability, optimum_gain_db, optimum_gain_db_explicit,
    quantization_ceiling_db, quantize_in_place, Quantized,
};
pub use hilbert::hilbert_transform;
pub use synth::{
    heterodyne_pd_currents, synth_receiver_pair, BeatParams, PairSynthesizer, SynthOptions,
};

/// Real samples at a fixed rate. All samples are finite.
#[derive(Debug, Clone, PartialEq)]
pub struct WaveformSegment {
    samples: Vec<f64>,
    sample_rate: f64,
}

impl WaveformSegment {
    pub fn new(samples: Vec<f64>, sample_rate: f64) -> Result<Self> {
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(Error::arg(format!(
                "sample_rate must be > 0, got {sample_rate}"
            )));
        }
        if let Some(i) = samples.iter().position(|x| !x.is_finite()) {
            return Err(Error::arg(format!("non-finite sample at index {i}")));
        }
        Ok(WaveformSegment {
            samples,
            sample_rate,
        })
    }

    pub fn samples(&self) -> &[f64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<f64> {
        self.samples
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    pub fn mean_square(&self) -> f64 {
        self.samples.iter().map(|x| x * x).sum::<f64>() / self.samples.len() as f64
    }

    /// Write `<base>.f32` (little-endian 32-bit floats) and `<base>.hdr`
    /// (sample rate, length, label). Returns both paths.
    pub fn write_raw(&self, base: &Path, label: &str) -> Result<(PathBuf, PathBuf)> {
        let data_path = base.with_extension("f32");
        let hdr_path = base.with_extension("hdr");
        let mut bytes = Vec::with_capacity(self.samples.len() * 4);
        for &x in &self.samples {
            bytes.extend_from_slice(&(x as f32).to_le_bytes());
        }
        fs::write(&data_path, bytes)?;
        let mut hdr = fs::File::create(&hdr_path)?;
        writeln!(hdr, "format=f32le")?;
        writeln!(hdr, "sample_rate_hz={:e}", self.sample_rate)?;
        writeln!(hdr, "length={}", self.samples.len())?;
        writeln!(hdr, "label={}", label.replace('\n', " "))?;
        Ok((data_path, hdr_path))
    }

    /// Inverse of [`write_raw`](Self::write_raw). Returns the segment and its
    /// label.
    pub fn read_raw(base: &Path) -> Result<(Self, String)> {
        let hdr = fs::read_to_string(base.with_extension("hdr"))?;
        let mut rate = None;
        let mut len = None;
        let mut label = String::new();
        for line in hdr.lines() {
            let Some((k, v)) = line.split_once('=') else {
                continue;
            };
            match k.trim() {
                "format" if v.trim() != "f32le" => {
                    return Err(Error::Parse(format!("unsupported raw format `{v}`")))
                }
                "sample_rate_hz" => {
                    rate = Some(
                        v.trim()
                            .parse::<f64>()
                            .map_err(|e| Error::Parse(e.to_string()))?,
                    )
                }
                "length" => {
                    len = Some(
                        v.trim()
                            .parse::<usize>()
                            .map_err(|e| Error::Parse(e.to_string()))?,
                    )
                }
                "label" => label = v.to_string(),
                _ => {}
            }
        }
        let rate = rate.ok_or_else(|| Error::Parse("header lacks sample_rate_hz".into()))?;
        let len = len.ok_or_else(|| Error::Parse("header lacks length".into()))?;
        let bytes = fs::read(base.with_extension("f32"))?;
        if bytes.len() != len * 4 {
            return Err(Error::Parse(format!(
                "raw file holds {} bytes, header says {len} samples",
                bytes.len()
            )));
        }
        let samples = bytes
            .chunks_exact(4)
            .map(|b| f32::from_le_bytes([b[0], b[1], b[2], b[3]]) as f64)
            .collect();
        Ok((WaveformSegment::new(samples, rate)?, label))
    }
}

/// How the LO reaches the two detectors of a receiver pair.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum LoMode {
    /// Each receiver is a balanced photodiode pair; shot noise is
    /// independent between receivers.
    #[default]
    BalancedPair,
    /// Control setup: one splitter feeds two single photodiodes whose LO
    /// noise is fully shared.
    SinglePdPair,
}

/// One heterodyne receiver: detector, LO drive and amplifier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReceiverSpec {
    pub eta: f64,
    #[serde(rename = "optical_frequency_hz")]
    pub optical_frequency: f64,
    #[serde(rename = "z_load_ohms")]
    pub z_load: f64,
    /// LO power at the balanced pair.
    #[serde(rename = "p_lo_watts")]
    pub p_lo: f64,
    pub fano_lo: f64,
    /// Reflectance of the balancing splitter.
    pub splitter_r: f64,
    pub amp_gain_db: f64,
    #[serde(rename = "amp_temp_kelvin")]
    pub amp_temp: f64,
    #[serde(rename = "dark_current_amps")]
    pub dark_current: f64,
}

impl Default for ReceiverSpec {
    fn default() -> Self {
        ReceiverSpec {
            eta: 0.75,
            optical_frequency: constants::frequency_from_wavelength(
                constants::DEFAULT_WAVELENGTH_M,
            ),
            z_load: 50.0,
            p_lo: 1e-3,
            fano_lo: 1.0,
            splitter_r: 0.5,
            amp_gain_db: 97.0,
            amp_temp: 300.0,
            dark_current: 0.0,
        }
    }
}

impl ReceiverSpec {
    /// `eta e / (h nu)` in A/W.
    pub fn responsivity(&self) -> f64 {
        constants::responsivity(self.eta, self.optical_frequency)
    }

    pub fn amplitude_gain(&self) -> f64 {
        10f64.powf(self.amp_gain_db / 20.0)
    }

    pub fn validate(&self, prefix: &str) -> Result<()> {
        let f = |name: &str| format!("{prefix}.{name}");
        if !(self.eta > 0.0 && self.eta <= 1.0) {
            return Err(Error::field(f("eta"), "must lie in (0, 1]"));
        }
        if !(self.optical_frequency > 0.0 && self.optical_frequency.is_finite()) {
            return Err(Error::field(f("optical_frequency_hz"), "must be > 0"));
        }
        if !(self.z_load > 0.0 && self.z_load.is_finite()) {
            return Err(Error::field(f("z_load_ohms"), "must be > 0"));
        }
        if !(self.p_lo > 0.0 && self.p_lo.is_finite()) {
            return Err(Error::field(f("p_lo_watts"), "must be > 0"));
        }
        if !(self.fano_lo >= 1.0 && self.fano_lo.is_finite()) {
            return Err(Error::field(f("fano_lo"), "must be >= 1"));
        }
        if !(0.0..=1.0).contains(&self.splitter_r) {
            return Err(Error::field(f("splitter_r"), "must lie in [0, 1]"));
        }
        if !self.amp_gain_db.is_finite() {
            return Err(Error::field(f("amp_gain_db"), "must be finite"));
        }
        if !(self.amp_temp >= 0.0 && self.amp_temp.is_finite()) {
            return Err(Error::field(f("amp_temp_kelvin"), "must be >= 0"));
        }
        if !(self.dark_current >= 0.0 && self.dark_current.is_finite()) {
            return Err(Error::field(f("dark_current_amps"), "must be >= 0"));
        }
        Ok(())
    }

    /// Effective Fano factor of the detected LO noise per photoelectron.
    ///
    /// For a balanced pair this is the balanced-output Fano factor divided by
    /// `eta` (it is 1 for a 50/50 splitter); a single photodiode sees the raw
    /// laser Fano factor.
    pub fn effective_fano(&self, mode: LoMode) -> f64 {
        match mode {
            LoMode::BalancedPair => {
                crate::photon::fano_balanced_closed_form(self.eta, self.splitter_r, self.fano_lo)
                    / self.eta
            }
            LoMode::SinglePdPair => self.fano_lo,
        }
    }

    /// One-sided pre-amplifier voltage PSD (V^2/Hz) of the heterodyne signal
    /// for a source spectral density `psd` (W/Hz): `2 Z^2 R^2 psd P_LO`.
    pub fn signal_voltage_psd(&self, psd: f64) -> f64 {
        let r = self.responsivity();
        2.0 * self.z_load * self.z_load * r * r * psd * self.p_lo
    }

    /// LO shot noise `Z^2 F_eff 2 e R P_LO`.
    pub fn shot_voltage_psd(&self, mode: LoMode) -> f64 {
        self.z_load
            * self.z_load
            * self.effective_fano(mode)
            * 2.0
            * constants::ELEMENTARY_CHARGE
            * self.responsivity()
            * self.p_lo
    }

    /// Amplifier thermal noise `k_B T Z`.
    pub fn thermal_voltage_psd(&self) -> f64 {
        constants::BOLTZMANN * self.amp_temp * self.z_load
    }

    /// Dark-current shot noise `2 e I_dark Z^2`.
    pub fn dark_voltage_psd(&self) -> f64 {
        2.0 * constants::ELEMENTARY_CHARGE * self.dark_current * self.z_load * self.z_load
    }

    /// Total zero-signal floor.
    pub fn floor_voltage_psd(&self, mode: LoMode) -> f64 {
        self.shot_voltage_psd(mode) + self.thermal_voltage_psd() + self.dark_voltage_psd()
    }
}

/// The test source shared by both receivers.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SourceSpec {
    /// Spectral power density of the source at the LO frequency, W/Hz.
    #[serde(rename = "psd_w_per_hz")]
    pub psd: f64,
    /// Simulated IF band.
    #[serde(rename = "band_hz")]
    pub band: f64,
    /// Magnitude of the complex visibility between the two receivers.
    pub gamma_magnitude: f64,
    #[serde(rename = "gamma_phase_rad")]
    pub gamma_phase: f64,
    /// Random-walk rate of the inter-receiver phase.
    #[serde(rename = "phase_jitter_rad_per_sqrt_s")]
    pub phase_jitter_rms: f64,
    pub lo_mode: LoMode,
}

impl Default for SourceSpec {
    fn default() -> Self {
        SourceSpec {
            psd: 0.0,
            band: 8e6,
            gamma_magnitude: 1.0,
            gamma_phase: 0.0,
            phase_jitter_rms: 0.0,
            lo_mode: LoMode::BalancedPair,
        }
    }
}

impl SourceSpec {
    pub fn gamma(&self) -> Complex64 {
        Complex64::from_polar(self.gamma_magnitude, self.gamma_phase)
    }

    pub fn validate(&self, prefix: &str) -> Result<()> {
        let f = |name: &str| format!("{prefix}.{name}");
        if !(self.psd >= 0.0 && self.psd.is_finite()) {
            return Err(Error::field(f("psd_w_per_hz"), "must be >= 0"));
        }
        if !(self.band > 0.0 && self.band.is_finite()) {
            return Err(Error::field(f("band_hz"), "must be > 0"));
        }
        if !(0.0..=1.0).contains(&self.gamma_magnitude) {
            return Err(Error::field(f("gamma_magnitude"), "must lie in [0, 1]"));
        }
        if !self.gamma_phase.is_finite() {
            return Err(Error::field(f("gamma_phase_rad"), "must be finite"));
        }
        if !(self.phase_jitter_rms >= 0.0 && self.phase_jitter_rms.is_finite()) {
            return Err(Error::field(
                f("phase_jitter_rad_per_sqrt_s"),
                "must be >= 0",
            ));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum ClipPolicy {
    /// Out-of-range samples take the extreme codes.
    #[default]
    Saturate,
}

/// Uniform mid-rise ADC spanning `[-full_scale/2, +full_scale/2]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AdcSpec {
    pub bits: u32,
    #[serde(rename = "full_scale_volts")]
    pub full_scale: f64,
    #[serde(default)]
    pub clip_policy: ClipPolicy,
}

impl Default for AdcSpec {
    fn default() -> Self {
        AdcSpec {
            bits: 8,
            full_scale: 1.6,
            clip_policy: ClipPolicy::Saturate,
        }
    }
}

impl AdcSpec {
    pub fn validate(&self, prefix: &str) -> Result<()> {
        if !(1..=32).contains(&self.bits) {
            return Err(Error::field(format!("{prefix}.bits"), "must lie in 1..=32"));
        }
        if !(self.full_scale > 0.0 && self.full_scale.is_finite()) {
            return Err(Error::field(
                format!("{prefix}.full_scale_volts"),
                "must be > 0",
            ));
        }
        Ok(())
    }

    pub fn step(&self) -> f64 {
        self.full_scale / 2f64.powi(self.bits as i32)
    }
}

/// One-sided PSD estimate (V^2/Hz) for frequencies `k fs / n`, `k = 0..=n/2`,
/// averaged over non-overlapping rectangular-window chunks of length `n`.
///
/// DC and Nyquist bins carry single weight, so that `sum(psd) * fs / n`
/// equals the mean square of the analysed samples.
pub fn estimate_psd(seg: &WaveformSegment, fft_length: usize) -> Result<Vec<f64>> {
    if fft_length < 2 || !fft_length.is_power_of_two() {
        return Err(Error::arg("fft_length must be a power of two >= 2"));
    }
    let n_chunks = seg.len() / fft_length;
    if n_chunks == 0 {
        return Err(Error::arg("segment shorter than one chunk"));
    }
    let fft = FftPlanner::new().plan_fft_forward(fft_length);
    let mut acc = vec![0.0; fft_length / 2 + 1];
    let mut buf = vec![Complex64::new(0.0, 0.0); fft_length];
    for chunk in seg.samples.chunks_exact(fft_length) {
        for (b, &x) in buf.iter_mut().zip(chunk) {
            *b = Complex64::new(x, 0.0);
        }
        fft.process(&mut buf);
        for (k, a) in acc.iter_mut().enumerate() {
            *a += buf[k].norm_sqr();
        }
    }
    let n = fft_length as f64;
    let scale = 1.0 / (n_chunks as f64 * n * seg.sample_rate);
    for (k, a) in acc.iter_mut().enumerate() {
        let w = if k == 0 || k == fft_length / 2 {
            1.0
        } else {
            2.0
        };
        *a *= w * scale;
    }
    Ok(acc)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::RngStream;

    #[test]
    fn segment_rejects_bad_input() {
        assert!(WaveformSegment::new(vec![1.0], 0.0).is_err());
        assert!(WaveformSegment::new(vec![1.0, f64::NAN], 1.0).is_err());
        assert!(WaveformSegment::new(vec![f64::INFINITY], 1.0).is_err());
    }

    #[test]
    fn parseval_on_psd_estimate() {
        let mut s = RngStream::new(1).sampler();
        let xs: Vec<f64> = (0..64 * 256)
            .map(|i| s.standard_normal() + 0.3 * (i as f64 * 0.01).sin() + 0.2)
            .collect();
        let seg = WaveformSegment::new(xs, 2e6).unwrap();
        let psd = estimate_psd(&seg, 256).unwrap();
        let integral: f64 = psd.iter().sum::<f64>() * seg.sample_rate() / 256.0;
        let ms = seg.mean_square();
        assert!((integral / ms - 1.0).abs() < 1e-6, "{integral} vs {ms}");
    }

    #[test]
    fn raw_roundtrip_is_bit_exact_in_f32() {
        let dir = tempfile::tempdir().unwrap();
        let xs: Vec<f64> = (0..1000)
            .map(|i| ((i as f32) * 0.37).sin() as f64)
            .collect();
        let seg = WaveformSegment::new(xs, 16e6).unwrap();
        let base = dir.path().join("wave");
        seg.write_raw(&base, "rx a").unwrap();
        let (back, label) = WaveformSegment::read_raw(&base).unwrap();
        assert_eq!(label, "rx a");
        assert_eq!(back, seg);
        let bytes = std::fs::read(base.with_extension("f32")).unwrap();
        assert_eq!(&bytes[4..8], &(seg.samples()[1] as f32).to_le_bytes());
    }

    #[test]
    fn receiver_validation_names_field() {
        let rx = ReceiverSpec {
            p_lo: -1.0,
            ..Default::default()
        };
        match rx.validate("rx_a") {
            Err(Error::Validation { field, .. }) => assert_eq!(field, "rx_a.p_lo_watts"),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn effective_fano_balanced_is_unity_at_50_50() {
        let rx = ReceiverSpec {
            fano_lo: 10.0,
            ..Default::default()
        };
        assert!((rx.effective_fano(LoMode::BalancedPair) - 1.0).abs() < 1e-12);
        assert_eq!(rx.effective_fano(LoMode::SinglePdPair), 10.0);
    }
}
