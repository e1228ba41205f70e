//! Chunked FX correlator with double-precision accumulation.
//!
//! Channel `k` of a chunk of length `N` is `X_k = sqrt(2)/N * DFT_k`, for
//! `k = 0..N/2`. A sine of amplitude `A` centred on a channel gives
//! `|X_k|^2 = A^2 / 2`; white noise of variance `s^2` gives `s^2 / (N/2)` per
//! channel.

mod dicke;
mod xf;

use std::io::{BufRead, Write};
use std::ops::Range;
use std::sync::Arc;

use rustfft::num_complex::Complex64;
use rustfft::{Fft, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::waveform::WaveformSegment;

pub use dicke::{dicke_difference, dicke_phase_is_on, DickeAccumulator, DickeDifference};
pub use xf::xf_correlate;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum Window {
    #[default]
    Rectangular,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ChunkSpec {
    pub fft_length: usize,
    #[serde(default)]
    pub window: Window,
}

impl Default for ChunkSpec {
    fn default() -> Self {
        ChunkSpec {
            fft_length: 512,
            window: Window::Rectangular,
        }
    }
}

impl ChunkSpec {
    pub fn new(fft_length: usize) -> Result<Self> {
        let spec = ChunkSpec {
            fft_length,
            window: Window::Rectangular,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.fft_length < 2 || !self.fft_length.is_power_of_two() {
            return Err(Error::field(
                "chunk.fft_length",
                format!("must be a power of two >= 2, got {}", self.fft_length),
            ));
        }
        Ok(())
    }

    pub fn n_channels(&self) -> usize {
        self.fft_length / 2
    }

    pub fn channel_width(&self, sample_rate: f64) -> f64 {
        sample_rate / self.fft_length as f64
    }
}

/// Reusable FFT plan plus scratch for one chunk geometry.
#[derive(Clone)]
pub struct Channelizer {
    spec: ChunkSpec,
    fft: Arc<dyn Fft<f64>>,
    scale: f64,
}

impl std::fmt::Debug for Channelizer {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("Channelizer")
            .field("spec", &self.spec)
            .finish()
    }
}

impl Channelizer {
    pub fn new(spec: ChunkSpec) -> Result<Self> {
        spec.validate()?;
        let fft = FftPlanner::new().plan_fft_forward(spec.fft_length);
        Ok(Channelizer {
            spec,
            fft,
            scale: std::f64::consts::SQRT_2 / spec.fft_length as f64,
        })
    }

    pub fn spec(&self) -> ChunkSpec {
        self.spec
    }

    /// Positive-frequency channels of one chunk, written into `out`
    /// (`n_channels` long). `buf` is scratch of length `fft_length`.
    pub fn chunk_into(&self, chunk: &[f64], buf: &mut [Complex64], out: &mut [Complex64]) {
        for (b, &x) in buf.iter_mut().zip(chunk) {
            *b = Complex64::new(x, 0.0);
        }
        self.fft.process(buf);
        for (o, b) in out.iter_mut().zip(buf.iter()) {
            *o = b * self.scale;
        }
    }

    /// Channelize both inputs chunk by chunk and accumulate. Trailing
    /// samples that do not fill a chunk are ignored.
    pub fn accumulate_samples(
        &self,
        a: &[f64],
        b: &[f64],
        acc: &mut SpectrumAccumulator,
    ) -> Result<()> {
        if a.len() != b.len() {
            return Err(Error::arg("inputs differ in length"));
        }
        if acc.n_channels() != self.spec.n_channels() {
            return Err(Error::arg(
                "accumulator channel count does not match chunk spec",
            ));
        }
        let n = self.spec.fft_length;
        let mut buf = vec![Complex64::new(0.0, 0.0); n];
        let mut xa = vec![Complex64::new(0.0, 0.0); n / 2];
        let mut xb = xa.clone();
        for (ca, cb) in a.chunks_exact(n).zip(b.chunks_exact(n)) {
            self.chunk_into(ca, &mut buf, &mut xa);
            self.chunk_into(cb, &mut buf, &mut xb);
            acc.add_chunk(&xa, &xb);
        }
        Ok(())
    }
}

/// Channel spectra of every full chunk of `seg`.
pub fn channelize(seg: &WaveformSegment, spec: ChunkSpec) -> Result<Vec<Vec<Complex64>>> {
    let ch = Channelizer::new(spec)?;
    let n = spec.fft_length;
    if seg.len() < n {
        return Err(Error::arg(format!(
            "segment of {} samples is shorter than one chunk ({n})",
            seg.len()
        )));
    }
    let mut buf = vec![Complex64::new(0.0, 0.0); n];
    Ok(seg
        .samples()
        .chunks_exact(n)
        .map(|c| {
            let mut out = vec![Complex64::new(0.0, 0.0); n / 2];
            ch.chunk_into(c, &mut buf, &mut out);
            out
        })
        .collect())
}

/// Running sums of auto and cross powers per channel.
#[derive(Debug, Clone, PartialEq)]
pub struct SpectrumAccumulator {
    pub auto_a: Vec<f64>,
    pub auto_b: Vec<f64>,
    pub cross: Vec<Complex64>,
    pub chunk_count: u64,
    /// Channel spacing in Hz, carried for export.
    pub channel_width: f64,
}

impl SpectrumAccumulator {
    pub fn new(n_channels: usize, channel_width: f64) -> Self {
        SpectrumAccumulator {
            auto_a: vec![0.0; n_channels],
            auto_b: vec![0.0; n_channels],
            cross: vec![Complex64::new(0.0, 0.0); n_channels],
            chunk_count: 0,
            channel_width,
        }
    }

    pub fn for_spec(spec: ChunkSpec, sample_rate: f64) -> Self {
        Self::new(spec.n_channels(), spec.channel_width(sample_rate))
    }

    pub fn n_channels(&self) -> usize {
        self.auto_a.len()
    }

    pub fn add_chunk(&mut self, a: &[Complex64], b: &[Complex64]) {
        for k in 0..self.auto_a.len() {
            self.auto_a[k] += a[k].norm_sqr();
            self.auto_b[k] += b[k].norm_sqr();
            self.cross[k] += a[k] * b[k].conj();
        }
        self.chunk_count += 1;
    }

    /// Add another partial accumulator of the same shape.
    pub fn merge(&mut self, other: &SpectrumAccumulator) -> Result<()> {
        if other.n_channels() != self.n_channels() {
            return Err(Error::arg("cannot merge accumulators of different shape"));
        }
        for k in 0..self.n_channels() {
            self.auto_a[k] += other.auto_a[k];
            self.auto_b[k] += other.auto_b[k];
            self.cross[k] += other.cross[k];
        }
        self.chunk_count += other.chunk_count;
        Ok(())
    }

    fn require_chunks(&self) -> Result<f64> {
        if self.chunk_count == 0 {
            return Err(Error::arg("accumulator holds no chunks"));
        }
        Ok(self.chunk_count as f64)
    }

    pub fn mean_auto_a(&self) -> Result<Vec<f64>> {
        let n = self.require_chunks()?;
        Ok(self.auto_a.iter().map(|v| v / n).collect())
    }

    pub fn mean_auto_b(&self) -> Result<Vec<f64>> {
        let n = self.require_chunks()?;
        Ok(self.auto_b.iter().map(|v| v / n).collect())
    }

    pub fn mean_cross(&self) -> Result<Vec<Complex64>> {
        let n = self.require_chunks()?;
        Ok(self.cross.iter().map(|v| v / n).collect())
    }

    /// Per-chunk mean powers summed over `channels`. The complex cross is
    /// summed before any magnitude is taken.
    pub fn band(&self, channels: Range<usize>) -> Result<BandPowers> {
        let n = self.require_chunks()?;
        if channels.is_empty() || channels.end > self.n_channels() {
            return Err(Error::arg(format!(
                "channel range {channels:?} invalid for {} channels",
                self.n_channels()
            )));
        }
        let width = channels.len() as f64;
        let mut out = BandPowers {
            auto_a: 0.0,
            auto_b: 0.0,
            cross: Complex64::new(0.0, 0.0),
        };
        for k in channels {
            out.auto_a += self.auto_a[k];
            out.auto_b += self.auto_b[k];
            out.cross += self.cross[k];
        }
        let s = 1.0 / (n * width);
        out.auto_a *= s;
        out.auto_b *= s;
        out.cross *= s;
        Ok(out)
    }

    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(w, "# hetcorr-spectrum v1")?;
        writeln!(w, "# n_channels={}", self.n_channels())?;
        writeln!(w, "# chunk_count={}", self.chunk_count)?;
        writeln!(w, "# channel_width_hz={:e}", self.channel_width)?;
        writeln!(w, "channel,auto_a,auto_b,cross_re,cross_im")?;
        for k in 0..self.n_channels() {
            writeln!(
                w,
                "{k},{:e},{:e},{:e},{:e}",
                self.auto_a[k], self.auto_b[k], self.cross[k].re, self.cross[k].im
            )?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut n_channels = None;
        let mut chunk_count = None;
        let mut width = None;
        let mut rows = Vec::new();
        let perr = |m: String| Error::Parse(m);
        for line in r.lines() {
            let line = line?;
            if let Some(h) = line.strip_prefix("# ") {
                if let Some((k, v)) = h.split_once('=') {
                    match k {
                        "n_channels" => {
                            n_channels = Some(v.parse::<usize>().map_err(|e| perr(e.to_string()))?)
                        }
                        "chunk_count" => {
                            chunk_count = Some(v.parse::<u64>().map_err(|e| perr(e.to_string()))?)
                        }
                        "channel_width_hz" => {
                            width = Some(v.parse::<f64>().map_err(|e| perr(e.to_string()))?)
                        }
                        _ => {}
                    }
                }
                continue;
            }
            if line.starts_with("channel") || line.trim().is_empty() {
                continue;
            }
            let f: Vec<f64> = line
                .split(',')
                .skip(1)
                .map(|s| {
                    s.trim()
                        .parse::<f64>()
                        .map_err(|e| perr(format!("{e} in `{line}`")))
                })
                .collect::<Result<_>>()?;
            if f.len() != 4 {
                return Err(perr(format!("expected 5 columns in `{line}`")));
            }
            rows.push(f);
        }
        let n = n_channels.ok_or_else(|| perr("missing n_channels".into()))?;
        if rows.len() != n {
            return Err(perr(format!(
                "header says {n} channels, found {}",
                rows.len()
            )));
        }
        let mut acc = SpectrumAccumulator::new(
            n,
            width.ok_or_else(|| perr("missing channel_width_hz".into()))?,
        );
        acc.chunk_count = chunk_count.ok_or_else(|| perr("missing chunk_count".into()))?;
        for (k, f) in rows.iter().enumerate() {
            acc.auto_a[k] = f[0];
            acc.auto_b[k] = f[1];
            acc.cross[k] = Complex64::new(f[2], f[3]);
        }
        Ok(acc)
    }
}

/// Band-averaged per-chunk powers.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BandPowers {
    pub auto_a: f64,
    pub auto_b: f64,
    pub cross: Complex64,
}

impl BandPowers {
    pub fn coefficient(&self, mode: CoefficientMode) -> Result<f64> {
        coefficient(self.auto_a, self.auto_b, self.cross, mode)
    }
}

/// Accumulate pre-channelized spectra.
pub fn accumulate(
    spectra_a: &[Vec<Complex64>],
    spectra_b: &[Vec<Complex64>],
    acc: &mut SpectrumAccumulator,
) -> Result<()> {
    if spectra_a.len() != spectra_b.len() {
        return Err(Error::arg("chunk counts differ"));
    }
    let n = acc.n_channels();
    if spectra_a.iter().chain(spectra_b).any(|s| s.len() != n) {
        return Err(Error::arg("channel count differs from accumulator"));
    }
    for (a, b) in spectra_a.iter().zip(spectra_b) {
        acc.add_chunk(a, b);
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CoefficientMode {
    /// `|cross| / mean(auto_a, auto_b)`
    PowerRatio,
    /// `|cross| / sqrt(auto_a auto_b)`
    NormalizedAmplitude,
}

fn coefficient(a: f64, b: f64, cross: Complex64, mode: CoefficientMode) -> Result<f64> {
    if !(a > 0.0 && b > 0.0) {
        return Err(Error::Undefined("auto power is zero".into()));
    }
    Ok(match mode {
        CoefficientMode::PowerRatio => cross.norm() / (0.5 * (a + b)),
        CoefficientMode::NormalizedAmplitude => cross.norm() / (a * b).sqrt(),
    })
}

/// Per-channel correlation coefficient.
pub fn correlation_coefficient(
    acc: &SpectrumAccumulator,
    mode: CoefficientMode,
) -> Result<Vec<f64>> {
    if acc.chunk_count == 0 {
        return Err(Error::arg("accumulator holds no chunks"));
    }
    (0..acc.n_channels())
        .map(|k| coefficient(acc.auto_a[k], acc.auto_b[k], acc.cross[k], mode))
        .collect()
}
