use crate::constants::{power_ratio_to_db, PLANCK};
use crate::error::{Error, Result};

use super::{AdcSpec, ReceiverSpec, WaveformSegment};

/// Scale by `10^(gain_db / 20)`.
pub fn amplify(seg: &WaveformSegment, gain_db: f64) -> Result<WaveformSegment> {
    if !gain_db.is_finite() {
        return Err(Error::arg("gain_db must be finite"));
    }
    let g = 10f64.powf(gain_db / 20.0);
    WaveformSegment::new(
        seg.samples().iter().map(|x| x * g).collect(),
        seg.sample_rate(),
    )
}

#[derive(Debug, Clone, PartialEq)]
pub struct Quantized {
    pub waveform: WaveformSegment,
    pub clip_fraction: f64,
    pub step: f64,
}

pub fn adc_quantize(seg: &WaveformSegment, adc: &AdcSpec) -> Result<Quantized> {
    adc.validate("adc")?;
    let mut xs = seg.samples().to_vec();
    let clipped = quantize_in_place(&mut xs, adc);
    Ok(Quantized {
        waveform: WaveformSegment::new(xs, seg.sample_rate())?,
        clip_fraction: if seg.is_empty() {
            0.0
        } else {
            clipped as f64 / seg.len() as f64
        },
        step: adc.step(),
    })
}

/// Mid-rise quantization in place. Returns the number of samples that lay
/// outside `[-full_scale/2, +full_scale/2]`.
pub fn quantize_in_place(xs: &mut [f64], adc: &AdcSpec) -> usize {
    let step = adc.step();
    let half = adc.full_scale / 2.0;
    let top = 2f64.powi(adc.bits as i32 - 1);
    let mut clipped = 0;
    for x in xs.iter_mut() {
        if x.abs() > half {
            clipped += 1;
        }
        let code = (*x / step).floor().clamp(-top, top - 1.0);
        *x = (code + 0.5) * step;
    }
    clipped
}

/// Probability that a narrowband Gaussian envelope exceeds `ratio * V_rms`:
/// `exp(-ratio^2 / 2)`.
pub fn clip_probability(ratio: f64) -> Result<f64> {
    if !(ratio >= 0.0) {
        return Err(Error::arg(format!("ratio must be >= 0, got {ratio}")));
    }
    Ok((-0.5 * ratio * ratio).exp())
}

/// Gain (dB) that brings LO shot noise over `bandwidth` to `target_rms`:
/// `G = V^2 / ((Z R)^2 h nu B P_LO)`.
pub fn optimum_gain_db_explicit(
    target_rms: f64,
    z_load: f64,
    responsivity: f64,
    optical_frequency: f64,
    bandwidth: f64,
    p_lo: f64,
) -> Result<f64> {
    let all = [
        target_rms,
        z_load,
        responsivity,
        optical_frequency,
        bandwidth,
        p_lo,
    ];
    if all.iter().any(|v| !(*v > 0.0 && v.is_finite())) {
        return Err(Error::arg("optimum gain inputs must all be positive"));
    }
    let zr = z_load * responsivity;
    let g = target_rms * target_rms / (zr * zr * PLANCK * optical_frequency * bandwidth * p_lo);
    Ok(power_ratio_to_db(g))
}

/// [`optimum_gain_db_explicit`] for a receiver; the target must sit inside
/// the ADC range.
pub fn optimum_gain_db(
    rx: &ReceiverSpec,
    adc: &AdcSpec,
    bandwidth: f64,
    target_rms: f64,
) -> Result<f64> {
    rx.validate("rx")?;
    adc.validate("adc")?;
    if target_rms >= adc.full_scale / 2.0 {
        return Err(Error::arg("target_rms must be below the ADC clip level"));
    }
    optimum_gain_db_explicit(
        target_rms,
        rx.z_load,
        rx.responsivity(),
        rx.optical_frequency,
        bandwidth,
        rx.p_lo,
    )
}

/// Quantization SNR ceiling when the noise occupies the lowest two bits:
/// `(2^(bits-2))^2` in dB.
pub fn quantization_ceiling_db(bits: u32) -> Result<f64> {
    if !(2..=32).contains(&bits) {
        return Err(Error::arg("bits must lie in 2..=32"));
    }
    let levels = 2f64.powi(bits as i32 - 2);
    Ok(power_ratio_to_db(levels * levels))
}
