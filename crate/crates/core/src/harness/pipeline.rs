//! synth -> quantize -> channelize -> accumulate, block-parallel.
//!
//! Blocks are processed by the rayon pool in any order; their partial
//! results are merged strictly in block order, so the outcome is bit-identical
//! for any worker count.

use num_complex::Complex64;
use rayon::prelude::*;

use super::config::{ScenarioConfig, Switching};
use crate::correlator::{Channelizer, DickeAccumulator, SpectrumAccumulator};
use crate::error::{Error, Result};
use crate::rng::RngStream;
use crate::waveform::{quantize_in_place, PairSynthesizer, SynthOptions, WaveformSegment};

const STREAM_POINTS: u64 = 0x5EED;

/// Channel powers of one readout of the time series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Readout {
    pub ac_a: f64,
    pub ac_b: f64,
    pub cross: Complex64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointOutcome {
    pub psd: f64,
    /// Every chunk of the point.
    pub spectrum: SpectrumAccumulator,
    pub dicke: Option<DickeAccumulator>,
    /// Fraction of samples outside the ADC range, per receiver.
    pub clip_fraction: [f64; 2],
    /// RMS voltage at the ADC input, per receiver.
    pub adc_rms: [f64; 2],
    pub series: Option<Vec<Readout>>,
    /// Quantized leading block, when waveforms are requested.
    pub waveforms: Option<(WaveformSegment, WaveformSegment)>,
}

impl PointOutcome {
    /// Accumulator to analyse for source response: the "on" phase when
    /// switching, else all chunks.
    pub fn response_spectrum(&self) -> &SpectrumAccumulator {
        self.dicke.as_ref().map_or(&self.spectrum, |d| &d.on)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimulationOutcome {
    pub points: Vec<PointOutcome>,
}

struct BlockPartial {
    spectrum: SpectrumAccumulator,
    dicke: Option<DickeAccumulator>,
    clipped: [usize; 2],
    sumsq: [f64; 2],
    samples: usize,
    per_chunk: Vec<Readout>,
    waveforms: Option<(Vec<f64>, Vec<f64>)>,
}

/// Run every sweep point of `config`. `workers = None` uses the global pool.
pub fn simulate(config: &ScenarioConfig, workers: Option<usize>) -> Result<SimulationOutcome> {
    config.validate()?;
    match workers {
        Some(0) => Err(Error::arg("workers must be > 0")),
        Some(n) => {
            let pool = rayon::ThreadPoolBuilder::new()
                .num_threads(n)
                .build()
                .map_err(|e| Error::arg(format!("thread pool: {e}")))?;
            pool.install(|| simulate_inner(config))
        }
        None => simulate_inner(config),
    }
}

fn simulate_inner(config: &ScenarioConfig) -> Result<SimulationOutcome> {
    let root = RngStream::new(config.seed).child(STREAM_POINTS);
    let points = config
        .sweep_points()
        .iter()
        .enumerate()
        .map(|(i, &psd)| simulate_point(config, psd, &root.child(i as u64)))
        .collect::<Result<Vec<_>>>()?;
    Ok(SimulationOutcome { points })
}

fn simulate_point(config: &ScenarioConfig, psd: f64, rng: &RngStream) -> Result<PointOutcome> {
    let n = config.chunk.fft_length;
    let n_chunks = config.chunks_per_point();
    let cpb = config.chunks_per_block;
    let n_blocks = n_chunks.div_ceil(cpb);
    let mut source = config.source.clone();
    source.psd = psd;
    let gate = match config.switching {
        Switching::None => None,
        Switching::Dicke { rate_hz } => Some((n, rate_hz)),
    };
    let synth = PairSynthesizer::new(
        &source,
        [&config.rx_a, &config.rx_b],
        config.sample_rate_hz,
        cpb * n,
        n_blocks,
        SynthOptions {
            injected_c_lo: config.injected_c_lo,
            gain_drift: config.gain_drift_per_sqrt_s,
            drift_resolution: n,
            source_gate: gate,
        },
        rng,
    )?;
    let channelizer = Channelizer::new(config.chunk)?;
    let want_series = config.readout_chunks.is_some();
    let series_ch = config.series_channel();

    let partials: Vec<BlockPartial> = (0..n_blocks)
        .into_par_iter()
        .map(|b| {
            let chunks = cpb.min(n_chunks - b * cpb);
            let (mut xa, mut xb) = synth.block(b)?;
            xa.truncate(chunks * n);
            xb.truncate(chunks * n);
            let sumsq = [
                xa.iter().map(|v| v * v).sum::<f64>(),
                xb.iter().map(|v| v * v).sum::<f64>(),
            ];
            let clipped = [
                quantize_in_place(&mut xa, &config.adc),
                quantize_in_place(&mut xb, &config.adc),
            ];
            let mut spectrum = SpectrumAccumulator::for_spec(config.chunk, config.sample_rate_hz);
            let mut dicke = match config.switching {
                Switching::None => None,
                Switching::Dicke { rate_hz } => Some(DickeAccumulator::new(
                    config.n_channels(),
                    n,
                    config.sample_rate_hz,
                    rate_hz,
                )?),
            };
            let mut buf = vec![Complex64::new(0.0, 0.0); n];
            let mut sa = vec![Complex64::new(0.0, 0.0); n / 2];
            let mut sb = sa.clone();
            let mut per_chunk = Vec::with_capacity(if want_series { chunks } else { 0 });
            for c in 0..chunks {
                channelizer.chunk_into(&xa[c * n..(c + 1) * n], &mut buf, &mut sa);
                channelizer.chunk_into(&xb[c * n..(c + 1) * n], &mut buf, &mut sb);
                spectrum.add_chunk(&sa, &sb);
                if let Some(d) = dicke.as_mut() {
                    d.add_chunk((b * cpb + c) as u64, &sa, &sb);
                }
                if want_series {
                    per_chunk.push(Readout {
                        ac_a: sa[series_ch].norm_sqr(),
                        ac_b: sb[series_ch].norm_sqr(),
                        cross: sa[series_ch] * sb[series_ch].conj(),
                    });
                }
            }
            let waveforms = (config.write_waveforms && b == 0).then_some((xa, xb));
            Ok(BlockPartial {
                spectrum,
                dicke,
                clipped,
                sumsq,
                samples: chunks * n,
                per_chunk,
                waveforms,
            })
        })
        .collect::<Result<_>>()?;

    let mut spectrum = SpectrumAccumulator::for_spec(config.chunk, config.sample_rate_hz);
    let mut dicke: Option<DickeAccumulator> = None;
    let mut clipped = [0usize; 2];
    let mut sumsq = [0.0; 2];
    let mut samples = 0usize;
    let mut chunk_series = Vec::new();
    let mut waveforms = None;
    for p in partials {
        spectrum.merge(&p.spectrum)?;
        match (&mut dicke, p.dicke) {
            (Some(d), Some(pd)) => d.merge(&pd)?,
            (None, Some(pd)) => dicke = Some(pd),
            _ => {}
        }
        for k in 0..2 {
            clipped[k] += p.clipped[k];
            sumsq[k] += p.sumsq[k];
        }
        samples += p.samples;
        chunk_series.extend(p.per_chunk);
        if let Some((a, b)) = p.waveforms {
            waveforms = Some((
                WaveformSegment::new(a, config.sample_rate_hz)?,
                WaveformSegment::new(b, config.sample_rate_hz)?,
            ));
        }
    }

    let series = config.readout_chunks.map(|k| {
        chunk_series
            .chunks_exact(k)
            .map(|rs| {
                let inv = 1.0 / k as f64;
                let mut out = Readout {
                    ac_a: 0.0,
                    ac_b: 0.0,
                    cross: Complex64::new(0.0, 0.0),
                };
                for r in rs {
                    out.ac_a += r.ac_a;
                    out.ac_b += r.ac_b;
                    out.cross += r.cross;
                }
                out.ac_a *= inv;
                out.ac_b *= inv;
                out.cross *= inv;
                out
            })
            .collect()
    });

    let s = samples as f64;
    Ok(PointOutcome {
        psd,
        spectrum,
        dicke,
        clip_fraction: [clipped[0] as f64 / s, clipped[1] as f64 / s],
        adc_rms: [(sumsq[0] / s).sqrt(), (sumsq[1] / s).sqrt()],
        series,
        waveforms,
    })
}
