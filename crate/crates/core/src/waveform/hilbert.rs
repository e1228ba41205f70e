use rustfft::{num_complex::Complex64, FftPlanner};

/// Discrete Hilbert transform of a real block (periodic, via FFT).
///
/// Positive-frequency bins are multiplied by `-i`, negative ones by `+i`;
/// DC and Nyquist are zeroed. `cos` maps to `sin`.
pub fn hilbert_transform(x: &[f64]) -> Vec<f64> {
    let n = x.len();
    if n == 0 {
        return Vec::new();
    }
    let mut planner = FftPlanner::new();
    let mut buf: Vec<Complex64> = x.iter().map(|&v| Complex64::new(v, 0.0)).collect();
    planner.plan_fft_forward(n).process(&mut buf);
    let half = n / 2;
    for (k, b) in buf.iter_mut().enumerate() {
        if k == 0 || (n.is_multiple_of(2) && k == half) {
            *b = Complex64::new(0.0, 0.0);
        } else if k < n.div_ceil(2) {
            *b *= Complex64::new(0.0, -1.0);
        } else {
            *b *= Complex64::new(0.0, 1.0);
        }
    }
    planner.plan_fft_inverse(n).process(&mut buf);
    let inv = 1.0 / n as f64;
    buf.iter().map(|c| c.re * inv).collect()
}
