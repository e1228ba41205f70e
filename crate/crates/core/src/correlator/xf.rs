use rustfft::num_complex::Complex64;

use super::ChunkSpec;
use crate::error::{Error, Result};
use crate::waveform::WaveformSegment;

/// Lag-domain (XF) cross-spectrum, averaged over the same chunks as the FX
/// path.
///
/// Per chunk, `C(tau) = sum_t a[t] b[t + tau]` is formed directly for
/// `|tau| < N` and transformed with an explicit sum
/// `sum_tau C(tau) exp(+2 pi i k tau / N)`, which equals `A_k conj(B_k)`.
/// No FFT is used, so this is an independent check of the FX correlator.
pub fn xf_correlate(
    seg_a: &WaveformSegment,
    seg_b: &WaveformSegment,
    spec: ChunkSpec,
) -> Result<Vec<Complex64>> {
    spec.validate()?;
    if seg_a.len() != seg_b.len() {
        return Err(Error::arg("segments differ in length"));
    }
    let n = spec.fft_length;
    let n_ch = n / 2;
    let chunks = seg_a.len() / n;
    if chunks == 0 {
        return Err(Error::arg("segment shorter than one chunk"));
    }
    let twiddle: Vec<Complex64> = (0..n)
        .map(|m| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * m as f64 / n as f64))
        .collect();
    let mut out = vec![Complex64::new(0.0, 0.0); n_ch];
    let mut lag = vec![0.0; 2 * n - 1];
    for (a, b) in seg_a
        .samples()
        .chunks_exact(n)
        .zip(seg_b.samples().chunks_exact(n))
    {
        for (i, c) in lag.iter_mut().enumerate() {
            let tau = i as isize - (n as isize - 1);
            let (t0, t1) = if tau >= 0 {
                (0, n - tau as usize)
            } else {
                ((-tau) as usize, n)
            };
            *c = (t0..t1)
                .map(|t| a[t] * b[(t as isize + tau) as usize])
                .sum();
        }
        for (k, o) in out.iter_mut().enumerate() {
            let mut s = Complex64::new(0.0, 0.0);
            for (i, c) in lag.iter().enumerate() {
                let tau = i as isize - (n as isize - 1);
                let m = (k as isize * tau).rem_euclid(n as isize) as usize;
                s += twiddle[m] * c;
            }
            *o += s;
        }
    }
    let scale = 2.0 / (n as f64 * n as f64) / chunks as f64;
    for o in out.iter_mut() {
        *o *= scale;
    }
    Ok(out)
}
