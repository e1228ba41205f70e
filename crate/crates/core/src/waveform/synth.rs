//! Gaussian synthesis of the two receivers' IF voltages.
//!
//! Work is split into fixed-length blocks. Every block draws from its own
//! stream (`root / SYNTH / block`), and the only sequential state (the
//! inter-receiver phase walk and the common gain drift) is laid down in a
//! cheap pre-pass, so blocks can be produced in any order or in parallel and
//! still give identical samples.

use std::f64::consts::PI;

use crate::correlator::dicke_phase_is_on;
use crate::error::{Error, Result};
use crate::rng::RngStream;

use super::hilbert::hilbert_transform;
use super::{LoMode, ReceiverSpec, SourceSpec, WaveformSegment};

const STREAM_SYNTH: u64 = 1;
const STREAM_PHASE: u64 = 2;
const STREAM_DRIFT: u64 = 3;

/// Deterministic photocurrents of a balanced pair driven by a signal tone and
/// the LO.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BeatParams {
    pub p_signal: f64,
    pub p_lo: f64,
    pub f_if: f64,
    pub phase: f64,
    pub splitter_r: f64,
    pub eta: f64,
    pub optical_frequency: f64,
}

/// Photocurrents `(i1, i2)` of the two photodiodes, sampled over `duration`.
pub fn heterodyne_pd_currents(
    p: &BeatParams,
    duration: f64,
    sample_rate: f64,
) -> Result<(WaveformSegment, WaveformSegment)> {
    if !(p.p_signal >= 0.0 && p.p_lo >= 0.0) {
        return Err(Error::arg("optical powers must be >= 0"));
    }
    if !(0.0..=1.0).contains(&p.splitter_r) || !(0.0..=1.0).contains(&p.eta) {
        return Err(Error::arg("splitter_r and eta must lie in [0, 1]"));
    }
    if !(duration > 0.0 && sample_rate > 0.0) {
        return Err(Error::arg("duration and sample_rate must be > 0"));
    }
    let n = (duration * sample_rate).round() as usize;
    let resp = crate::constants::responsivity(p.eta, p.optical_frequency);
    let r = p.splitter_r;
    let t = 1.0 - r;
    let beat = 2.0 * (r * t * p.p_signal * p.p_lo).sqrt();
    let w = 2.0 * PI * p.f_if;
    let mut i1 = Vec::with_capacity(n);
    let mut i2 = Vec::with_capacity(n);
    for k in 0..n {
        let arg = w * k as f64 / sample_rate + p.phase;
        i1.push(resp * (r * p.p_signal + t * p.p_lo + beat * (arg - PI / 2.0).cos()));
        i2.push(resp * (t * p.p_signal + r * p.p_lo + beat * (arg + PI / 2.0).cos()));
    }
    Ok((
        WaveformSegment::new(i1, sample_rate)?,
        WaveformSegment::new(i2, sample_rate)?,
    ))
}

/// Optional impairments beyond the nominal chain.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SynthOptions {
    /// Fraction of the zero-signal floor shared by the two receivers
    /// (balanced mode only).
    pub injected_c_lo: Option<f64>,
    /// Random-walk rate of the common log power gain, per sqrt(second).
    pub gain_drift: f64,
    /// Samples per gain-drift step.
    pub drift_resolution: usize,
    /// Switch the source on and off: `(chunk_len, switch_rate_hz)`. The
    /// source is present in chunks where the Dicke phase is "on".
    pub source_gate: Option<(usize, f64)>,
}

/// Per-sample standard deviations of the synthesized terms (after gain).
#[derive(Debug, Clone, Copy)]
struct Levels {
    signal: [f64; 2],
    independent: [f64; 2],
    common: [f64; 2],
}

#[derive(Debug, Clone)]
pub struct PairSynthesizer {
    root: RngStream,
    sample_rate: f64,
    block_len: usize,
    n_blocks: usize,
    levels: Levels,
    gamma_mag: f64,
    gamma_phase: f64,
    /// Phase walk value at each block boundary (`n_blocks + 1` entries).
    phase_ends: Vec<f64>,
    phase_step: f64,
    /// Common log power gain per drift step, if enabled.
    drift: Option<(usize, Vec<f64>)>,
    source_gate: Option<(usize, f64)>,
}

impl PairSynthesizer {
    pub fn new(
        source: &SourceSpec,
        rx: [&ReceiverSpec; 2],
        sample_rate: f64,
        block_len: usize,
        n_blocks: usize,
        options: SynthOptions,
        rng: &RngStream,
    ) -> Result<Self> {
        source.validate("source")?;
        rx[0].validate("rx_a")?;
        rx[1].validate("rx_b")?;
        if !(sample_rate > 0.0 && sample_rate.is_finite()) {
            return Err(Error::field("sample_rate_hz", "must be > 0"));
        }
        if block_len == 0 {
            return Err(Error::arg("block_len must be > 0"));
        }
        if let Some(c) = options.injected_c_lo {
            if !(0.0..=1.0).contains(&c) {
                return Err(Error::field("injected_c_lo", "must lie in [0, 1]"));
            }
            if source.lo_mode == LoMode::SinglePdPair {
                return Err(Error::field(
                    "injected_c_lo",
                    "only applies to lo_mode = balanced_pair",
                ));
            }
        }
        if !(options.gain_drift >= 0.0 && options.gain_drift.is_finite()) {
            return Err(Error::field("gain_drift_per_sqrt_s", "must be >= 0"));
        }
        if let Some((len, rate)) = options.source_gate {
            if len == 0 || !(rate > 0.0 && rate.is_finite()) {
                return Err(Error::field("switching.rate_hz", "must be > 0"));
            }
        }

        let var = |psd: f64| psd * sample_rate / 2.0;
        let mut levels = Levels {
            signal: [0.0; 2],
            independent: [0.0; 2],
            common: [0.0; 2],
        };
        for (i, r) in rx.iter().enumerate() {
            let g = r.amplitude_gain();
            levels.signal[i] = g * var(r.signal_voltage_psd(source.psd)).sqrt();
            let floor = r.floor_voltage_psd(source.lo_mode);
            let (ind, com) = match source.lo_mode {
                LoMode::BalancedPair => {
                    let c = options.injected_c_lo.unwrap_or(0.0);
                    ((1.0 - c) * floor, c * floor)
                }
                LoMode::SinglePdPair => {
                    let shot = r.shot_voltage_psd(source.lo_mode);
                    (floor - shot, shot)
                }
            };
            levels.independent[i] = g * var(ind).sqrt();
            levels.common[i] = g * var(com).sqrt();
        }

        let block_seconds = block_len as f64 / sample_rate;
        let mut phase_ends = vec![0.0; n_blocks + 1];
        if source.phase_jitter_rms > 0.0 {
            let mut s = rng.child(STREAM_PHASE).sampler();
            let sd = source.phase_jitter_rms * block_seconds.sqrt();
            for i in 0..n_blocks {
                phase_ends[i + 1] = phase_ends[i] + sd * s.standard_normal();
            }
        }

        let drift = if options.gain_drift > 0.0 {
            let res = options.drift_resolution.max(1);
            let steps = (n_blocks * block_len).div_ceil(res);
            let sd = options.gain_drift * (res as f64 / sample_rate).sqrt();
            let mut s = rng.child(STREAM_DRIFT).sampler();
            let mut walk = Vec::with_capacity(steps);
            let mut g = 0.0;
            for _ in 0..steps {
                g += sd * s.standard_normal();
                walk.push(g);
            }
            Some((res, walk))
        } else {
            None
        };

        Ok(PairSynthesizer {
            root: rng.clone(),
            sample_rate,
            block_len,
            n_blocks,
            levels,
            gamma_mag: source.gamma_magnitude,
            gamma_phase: source.gamma_phase,
            phase_ends,
            phase_step: source.phase_jitter_rms / sample_rate.sqrt(),
            drift,
            source_gate: options.source_gate,
        })
    }

    pub fn block_len(&self) -> usize {
        self.block_len
    }

    pub fn n_blocks(&self) -> usize {
        self.n_blocks
    }

    pub fn sample_rate(&self) -> f64 {
        self.sample_rate
    }

    /// Amplified voltages of both receivers for block `index`.
    pub fn block(&self, index: usize) -> Result<(Vec<f64>, Vec<f64>)> {
        if index >= self.n_blocks {
            return Err(Error::arg(format!(
                "block {index} out of range (n_blocks = {})",
                self.n_blocks
            )));
        }
        let n = self.block_len;
        let lv = &self.levels;
        let mut s = self.root.child(STREAM_SYNTH).child(index as u64).sampler();

        let mut u = vec![0.0; n];
        s.fill_standard_normal(&mut u);
        let mut a: Vec<f64> = u.iter().map(|x| lv.signal[0] * x).collect();
        let mut b = vec![0.0; n];
        if lv.signal[1] > 0.0 {
            let hu = if self.gamma_mag > 0.0 {
                hilbert_transform(&u)
            } else {
                vec![0.0; n]
            };
            let mut w = vec![0.0; n];
            let incoherent = (1.0 - self.gamma_mag * self.gamma_mag).max(0.0).sqrt();
            if incoherent > 0.0 {
                s.fill_standard_normal(&mut w);
            }
            let phases = self.block_phases(index, &mut s);
            for j in 0..n {
                let phi = self.gamma_phase + phases.as_ref().map_or(0.0, |p| p[j]);
                let coh = phi.cos() * u[j] + phi.sin() * hu[j];
                b[j] = lv.signal[1] * (self.gamma_mag * coh + incoherent * w[j]);
            }
        }

        if let Some((len, rate)) = self.source_gate {
            let first = index * n;
            for j in 0..n {
                let chunk = ((first + j) / len) as u64;
                if !dicke_phase_is_on(chunk, len, self.sample_rate, rate) {
                    a[j] = 0.0;
                    b[j] = 0.0;
                }
            }
        }

        let mut z = vec![0.0; n];
        for (out, k) in [(&mut a, 0), (&mut b, 1)] {
            s.fill_standard_normal(&mut z);
            for (o, x) in out.iter_mut().zip(&z) {
                *o += lv.independent[k] * x;
            }
        }
        if lv.common[0] > 0.0 || lv.common[1] > 0.0 {
            s.fill_standard_normal(&mut z);
            for j in 0..n {
                a[j] += lv.common[0] * z[j];
                b[j] += lv.common[1] * z[j];
            }
        }

        if let Some((res, walk)) = &self.drift {
            let start = index * n;
            for j in 0..n {
                let f = (0.5 * walk[(start + j) / res]).exp();
                a[j] *= f;
                b[j] *= f;
            }
        }
        Ok((a, b))
    }

    /// Brownian bridge of the phase walk across one block, or `None` when
    /// the walk is disabled.
    fn block_phases(&self, index: usize, s: &mut crate::rng::Sampler) -> Option<Vec<f64>> {
        if self.phase_step == 0.0 {
            return None;
        }
        let n = self.block_len;
        let mut walk = vec![0.0; n];
        let mut acc = 0.0;
        for w in walk.iter_mut() {
            acc += self.phase_step * s.standard_normal();
            *w = acc;
        }
        let start = self.phase_ends[index];
        let end = self.phase_ends[index + 1];
        let total = walk[n - 1];
        for (j, w) in walk.iter_mut().enumerate() {
            let frac = (j + 1) as f64 / n as f64;
            *w = start + frac * (end - start) + (*w - frac * total);
        }
        Some(walk)
    }
}

/// Block length used by [`synth_receiver_pair`].
pub const DEFAULT_BLOCK_LEN: usize = 1 << 14;

/// Amplified voltages of the two receivers over `duration` seconds.
pub fn synth_receiver_pair(
    source: &SourceSpec,
    rx_a: &ReceiverSpec,
    rx_b: &ReceiverSpec,
    duration: f64,
    sample_rate: f64,
    rng: &RngStream,
) -> Result<(WaveformSegment, WaveformSegment)> {
    if !(duration > 0.0 && duration.is_finite()) {
        return Err(Error::field("duration_s", "must be > 0"));
    }
    let n = (duration * sample_rate).round() as usize;
    if n == 0 {
        return Err(Error::field("duration_s", "shorter than one sample"));
    }
    let n_blocks = n.div_ceil(DEFAULT_BLOCK_LEN);
    let synth = PairSynthesizer::new(
        source,
        [rx_a, rx_b],
        sample_rate,
        DEFAULT_BLOCK_LEN,
        n_blocks,
        SynthOptions::default(),
        rng,
    )?;
    let mut a = Vec::with_capacity(n_blocks * DEFAULT_BLOCK_LEN);
    let mut b = Vec::with_capacity(n_blocks * DEFAULT_BLOCK_LEN);
    for i in 0..n_blocks {
        let (x, y) = synth.block(i)?;
        a.extend(x);
        b.extend(y);
    }
    a.truncate(n);
    b.truncate(n);
    Ok((
        WaveformSegment::new(a, sample_rate)?,
        WaveformSegment::new(b, sample_rate)?,
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::waveform::estimate_psd;

    fn unity_rx() -> ReceiverSpec {
        ReceiverSpec {
            amp_gain_db: 0.0,
            ..Default::default()
        }
    }

    #[test]
    fn balanced_difference_carries_four_sqrt_rt_beat() {
        let p = BeatParams {
            p_signal: 1e-9,
            p_lo: 1e-3,
            f_if: 1e6,
            phase: 0.3,
            splitter_r: 0.5,
            eta: 0.75,
            optical_frequency: 1.9e14,
        };
        let (i1, i2) = heterodyne_pd_currents(&p, 1e-5, 64e6).unwrap();
        let resp = crate::constants::responsivity(0.75, 1.9e14);
        let amp = 2.0 * resp * (1e-9f64 * 1e-3).sqrt();
        for k in 0..i1.len() {
            let t = k as f64 / 64e6;
            let d = i1.samples()[k] - i2.samples()[k];
            let want = amp * (2.0 * PI * 1e6 * t + 0.3).sin();
            assert!((d - want).abs() < 1e-9 * amp.max(1.0));
        }
        let mean_sum: f64 = i1
            .samples()
            .iter()
            .zip(i2.samples())
            .map(|(a, b)| a + b)
            .sum::<f64>()
            / i1.len() as f64;
        assert!((mean_sum / (resp * (1e-3 + 1e-9)) - 1.0).abs() < 1e-9);
    }

    #[test]
    fn thermal_only_psd_matches_kt_z() {
        let rx = ReceiverSpec {
            p_lo: 1e-15,
            ..unity_rx()
        };
        let src = SourceSpec::default();
        let (a, _) = synth_receiver_pair(&src, &rx, &rx, 0.02, 1e6, &RngStream::new(3)).unwrap();
        let psd = estimate_psd(&a, 256).unwrap();
        let mean: f64 = psd[1..128].iter().sum::<f64>() / 127.0;
        let want = rx.floor_voltage_psd(LoMode::BalancedPair);
        assert!((mean / want - 1.0).abs() < 0.03, "{mean} vs {want}");
    }

    #[test]
    fn signal_psd_adds_on_top_of_floor() {
        let rx = unity_rx();
        let src = SourceSpec {
            psd: 1e-18,
            ..Default::default()
        };
        let (a, b) = synth_receiver_pair(&src, &rx, &rx, 0.02, 1e6, &RngStream::new(4)).unwrap();
        let want = rx.floor_voltage_psd(LoMode::BalancedPair) + rx.signal_voltage_psd(1e-18);
        for seg in [a, b] {
            let got = seg.mean_square() / (seg.sample_rate() / 2.0);
            assert!((got / want - 1.0).abs() < 0.03, "{got} vs {want}");
        }
    }

    #[test]
    fn coherent_signal_cross_has_gamma_phase() {
        let rx = ReceiverSpec {
            p_lo: 1e-15,
            amp_temp: 0.0,
            ..unity_rx()
        };
        let src = SourceSpec {
            psd: 1e-6,
            gamma_phase: 0.7,
            ..Default::default()
        };
        let (a, b) = synth_receiver_pair(&src, &rx, &rx, 0.01, 1e6, &RngStream::new(5)).unwrap();
        use rustfft::{num_complex::Complex64, FftPlanner};
        let n = 1024;
        let fft = FftPlanner::new().plan_fft_forward(n);
        let mut cross = Complex64::new(0.0, 0.0);
        for (ca, cb) in a.samples().chunks_exact(n).zip(b.samples().chunks_exact(n)) {
            let mut xa: Vec<Complex64> = ca.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            let mut xb: Vec<Complex64> = cb.iter().map(|&v| Complex64::new(v, 0.0)).collect();
            fft.process(&mut xa);
            fft.process(&mut xb);
            for k in 1..n / 2 {
                cross += xa[k] * xb[k].conj();
            }
        }
        assert!((cross.arg() - 0.7).abs() < 0.01, "{}", cross.arg());
    }

    #[test]
    fn injected_common_floor_sets_zero_lag_correlation() {
        let rx = unity_rx();
        let synth = PairSynthesizer::new(
            &SourceSpec::default(),
            [&rx, &rx],
            1e6,
            4096,
            8,
            SynthOptions {
                injected_c_lo: Some(0.3),
                ..Default::default()
            },
            &RngStream::new(6),
        )
        .unwrap();
        let (mut sab, mut saa) = (0.0, 0.0);
        for i in 0..8 {
            let (a, b) = synth.block(i).unwrap();
            sab += a.iter().zip(&b).map(|(x, y)| x * y).sum::<f64>();
            saa += a.iter().map(|x| x * x).sum::<f64>();
        }
        assert!((sab / saa - 0.3).abs() < 0.02, "{}", sab / saa);
    }

    #[test]
    fn single_pd_mode_shares_shot_noise() {
        let rx = ReceiverSpec {
            amp_temp: 0.0,
            ..unity_rx()
        };
        let src = SourceSpec {
            lo_mode: LoMode::SinglePdPair,
            ..Default::default()
        };
        let (a, b) = synth_receiver_pair(&src, &rx, &rx, 0.005, 1e6, &RngStream::new(7)).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn blocks_are_order_independent() {
        let rx = unity_rx();
        let src = SourceSpec {
            psd: 1e-18,
            phase_jitter_rms: 10.0,
            ..Default::default()
        };
        let opts = SynthOptions {
            gain_drift: 1.0,
            drift_resolution: 64,
            ..Default::default()
        };
        let mk = || {
            PairSynthesizer::new(&src, [&rx, &rx], 1e6, 512, 6, opts, &RngStream::new(8)).unwrap()
        };
        let s1 = mk();
        let s2 = mk();
        let fwd: Vec<_> = (0..6).map(|i| s1.block(i).unwrap()).collect();
        let rev: Vec<_> = (0..6).rev().map(|i| s2.block(i).unwrap()).collect();
        for (i, f) in fwd.iter().enumerate() {
            assert_eq!(f, &rev[5 - i]);
        }
    }

    #[test]
    fn bridge_hits_block_endpoints() {
        let rx = unity_rx();
        let src = SourceSpec {
            psd: 1e-18,
            phase_jitter_rms: 3.0,
            ..Default::default()
        };
        let synth = PairSynthesizer::new(
            &src,
            [&rx, &rx],
            1e6,
            256,
            4,
            SynthOptions::default(),
            &RngStream::new(9),
        )
        .unwrap();
        let mut s = RngStream::new(0).sampler();
        let p = synth.block_phases(2, &mut s).unwrap();
        assert!((p[255] - synth.phase_ends[3]).abs() < 1e-12);
    }

    #[test]
    fn gate_removes_source_in_off_phase() {
        let rx = ReceiverSpec {
            p_lo: 1e-15,
            amp_temp: 0.0,
            ..unity_rx()
        };
        let src = SourceSpec {
            psd: 1e-6,
            ..Default::default()
        };
        let opts = SynthOptions {
            source_gate: Some((64, 1e6 / 256.0)),
            ..Default::default()
        };
        let synth =
            PairSynthesizer::new(&src, [&rx, &rx], 1e6, 512, 1, opts, &RngStream::new(10)).unwrap();
        let (a, _) = synth.block(0).unwrap();
        let on: f64 = a[..128].iter().map(|x| x * x).sum();
        let off: f64 = a[128..256].iter().map(|x| x * x).sum();
        assert!(on > 0.0);
        assert!(off < 1e-12 * on);
    }

    #[test]
    fn rejects_c_lo_in_single_pd_mode() {
        let rx = unity_rx();
        let src = SourceSpec {
            lo_mode: LoMode::SinglePdPair,
            ..Default::default()
        };
        let opts = SynthOptions {
            injected_c_lo: Some(0.1),
            ..Default::default()
        };
        let err = PairSynthesizer::new(&src, [&rx, &rx], 1e6, 64, 1, opts, &RngStream::new(0))
            .unwrap_err();
        assert!(matches!(err, Error::Validation { .. }));
    }
}
