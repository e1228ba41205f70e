use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::correlator::ChunkSpec;
use crate::error::{Error, Result};
use crate::waveform::{AdcSpec, LoMode, ReceiverSpec, SourceSpec};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "mode", rename_all = "snake_case", deny_unknown_fields)]
pub enum Switching {
    #[default]
    None,
    Dicke {
        rate_hz: f64,
    },
}

/// A complete, runnable description of one simulated measurement.
///
/// Scalars come before tables so the struct serializes to valid TOML.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioConfig {
    pub seed: u64,
    pub sample_rate_hz: f64,
    /// Simulated time per sweep point.
    pub duration_s: f64,
    /// Zero-signal fraction of the floor shared by both receivers.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub injected_c_lo: Option<f64>,
    #[serde(default)]
    pub gain_drift_per_sqrt_s: f64,
    /// Source spectral densities to step through; overrides `source.psd`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub sweep_psd_w_per_hz: Option<Vec<f64>>,
    /// Chunks per readout of the time series; no series when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub readout_chunks: Option<usize>,
    /// Channel recorded in the time series (default: the middle channel).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub series_channel: Option<usize>,
    /// Half-open channel range averaged for band results
    /// (default: every channel but DC).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub band_channels: Option<[usize; 2]>,
    /// Chunks synthesized per work unit.
    #[serde(default = "default_chunks_per_block")]
    pub chunks_per_block: usize,
    #[serde(default)]
    pub write_waveforms: bool,
    pub source: SourceSpec,
    pub rx_a: ReceiverSpec,
    pub rx_b: ReceiverSpec,
    pub adc: AdcSpec,
    pub chunk: ChunkSpec,
    #[serde(default)]
    pub switching: Switching,
}

fn default_chunks_per_block() -> usize {
    64
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        ScenarioConfig {
            seed: 1,
            sample_rate_hz: 16e6,
            duration_s: 3.3,
            injected_c_lo: None,
            gain_drift_per_sqrt_s: 0.0,
            sweep_psd_w_per_hz: None,
            readout_chunks: None,
            series_channel: None,
            band_channels: None,
            chunks_per_block: default_chunks_per_block(),
            write_waveforms: false,
            source: SourceSpec::default(),
            rx_a: ReceiverSpec::default(),
            rx_b: ReceiverSpec::default(),
            adc: AdcSpec::default(),
            chunk: ChunkSpec::default(),
            switching: Switching::None,
        }
    }
}

impl ScenarioConfig {
    pub fn from_toml_str(s: &str) -> Result<Self> {
        let cfg: ScenarioConfig = toml::from_str(s).map_err(|e| Error::Parse(e.to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        Self::from_toml_str(&std::fs::read_to_string(path)?)
    }

    pub fn to_toml_string(&self) -> Result<String> {
        toml::to_string(self).map_err(|e| Error::Parse(e.to_string()))
    }

    pub fn n_channels(&self) -> usize {
        self.chunk.n_channels()
    }

    pub fn channel_width(&self) -> f64 {
        self.chunk.channel_width(self.sample_rate_hz)
    }

    /// Number of full chunks per sweep point.
    pub fn chunks_per_point(&self) -> usize {
        (self.duration_s * self.sample_rate_hz).round() as usize / self.chunk.fft_length
    }

    pub fn band(&self) -> std::ops::Range<usize> {
        match self.band_channels {
            Some([a, b]) => a..b,
            None => 1..self.n_channels(),
        }
    }

    pub fn series_channel(&self) -> usize {
        self.series_channel.unwrap_or(self.n_channels() / 2)
    }

    /// Source densities of every sweep point, in order.
    pub fn sweep_points(&self) -> Vec<f64> {
        self.sweep_psd_w_per_hz
            .clone()
            .unwrap_or_else(|| vec![self.source.psd])
    }

    pub fn validate(&self) -> Result<()> {
        if self.seed > i64::MAX as u64 {
            return Err(Error::field(
                "seed",
                "must be below 2^63 to fit a TOML integer",
            ));
        }
        if !(self.sample_rate_hz > 0.0 && self.sample_rate_hz.is_finite()) {
            return Err(Error::field("sample_rate_hz", "must be > 0"));
        }
        if !(self.duration_s > 0.0 && self.duration_s.is_finite()) {
            return Err(Error::field("duration_s", "must be > 0"));
        }
        self.source.validate("source")?;
        self.rx_a.validate("rx_a")?;
        self.rx_b.validate("rx_b")?;
        self.adc.validate("adc")?;
        self.chunk.validate()?;
        if self.chunks_per_point() == 0 {
            return Err(Error::field("duration_s", "shorter than one chunk"));
        }
        if self.chunks_per_block == 0 {
            return Err(Error::field("chunks_per_block", "must be > 0"));
        }
        if let Some(c) = self.injected_c_lo {
            if !(0.0..=1.0).contains(&c) {
                return Err(Error::field("injected_c_lo", "must lie in [0, 1]"));
            }
            if self.source.lo_mode == LoMode::SinglePdPair {
                return Err(Error::field(
                    "injected_c_lo",
                    "only applies to lo_mode = balanced_pair",
                ));
            }
        }
        if !(self.gain_drift_per_sqrt_s >= 0.0 && self.gain_drift_per_sqrt_s.is_finite()) {
            return Err(Error::field("gain_drift_per_sqrt_s", "must be >= 0"));
        }
        if let Some(sweep) = &self.sweep_psd_w_per_hz {
            if sweep.is_empty() {
                return Err(Error::field("sweep_psd_w_per_hz", "must not be empty"));
            }
            if sweep.iter().any(|v| !(*v >= 0.0 && v.is_finite())) {
                return Err(Error::field("sweep_psd_w_per_hz", "values must be >= 0"));
            }
            if sweep.windows(2).any(|w| !(w[1] > w[0])) {
                return Err(Error::field(
                    "sweep_psd_w_per_hz",
                    "must be strictly increasing",
                ));
            }
        }
        if let Some(k) = self.readout_chunks {
            if k == 0 {
                return Err(Error::field("readout_chunks", "must be > 0"));
            }
            if self.chunks_per_point() / k < 16 {
                return Err(Error::field(
                    "readout_chunks",
                    "fewer than 16 readouts fit in duration_s",
                ));
            }
        }
        if self.series_channel() >= self.n_channels() {
            return Err(Error::field("series_channel", "beyond the last channel"));
        }
        let band = self.band();
        if band.is_empty() || band.end > self.n_channels() {
            return Err(Error::field(
                "band_channels",
                "must be a non-empty range of channels",
            ));
        }
        if let Switching::Dicke { rate_hz } = self.switching {
            if !(rate_hz > 0.0 && rate_hz.is_finite()) {
                return Err(Error::field("switching.rate_hz", "must be > 0"));
            }
            let half = self.sample_rate_hz / (2.0 * rate_hz);
            if half < self.chunk.fft_length as f64 {
                return Err(Error::field(
                    "switching.rate_hz",
                    "half period is shorter than one chunk",
                ));
            }
        }
        Ok(())
    }
}
