//! Noise temperatures from measured response curves and their closed forms.

use serde::Serialize;

use crate::constants::{quantum_temperature, quantum_temperature_dsb, BOLTZMANN, PLANCK};
use crate::error::{Error, Result};

/// Bose-Einstein occupation `1 / (exp(h nu / k T) - 1)`.
pub fn occupation(t_source: f64, frequency: f64) -> Result<f64> {
    if !(t_source >= 0.0) || !(frequency > 0.0) {
        return Err(Error::arg("t_source must be >= 0 and frequency > 0"));
    }
    if t_source == 0.0 {
        return Ok(0.0);
    }
    Ok(1.0 / (PLANCK * frequency / (BOLTZMANN * t_source)).exp_m1())
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct YFactor {
    pub y: f64,
    pub t_rec: f64,
}

/// Hot/cold load measurement: `Y = p_hot / p_cold`,
/// `T_rec = (T_hot - Y T_cold) / (Y - 1)`.
pub fn y_factor(p_hot: f64, p_cold: f64, t_hot: f64, t_cold: f64) -> Result<YFactor> {
    if !(p_cold > 0.0) {
        return Err(Error::arg("p_cold must be > 0"));
    }
    if !(t_hot > t_cold) {
        return Err(Error::arg("t_hot must exceed t_cold"));
    }
    let y = p_hot / p_cold;
    if !(y > 1.0) {
        return Err(Error::InconsistentData(format!(
            "Y = {y} <= 1 although the hot load is hotter"
        )));
    }
    Ok(YFactor {
        y,
        t_rec: (t_hot - y * t_cold) / (y - 1.0),
    })
}

/// Receiver temperature from the source power needed to reach factor `y`
/// over a channel of width `channel_bw`.
pub fn t_rec_from_power(p_s_y: f64, y: f64, channel_bw: f64) -> Result<f64> {
    if !(y > 1.0) {
        return Err(Error::arg("y must be > 1"));
    }
    if !(channel_bw > 0.0) {
        return Err(Error::arg("channel_bw must be > 0"));
    }
    Ok(p_s_y / ((y - 1.0) * BOLTZMANN * channel_bw))
}

/// Output power against source spectral density.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResponseCurve {
    /// `(psd W/Hz, output power)` with strictly increasing psd.
    pub points: Vec<(f64, f64)>,
    /// `None` for a band average.
    pub channel: Option<usize>,
}

impl ResponseCurve {
    pub fn new(points: Vec<(f64, f64)>, channel: Option<usize>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::arg("a response curve needs at least 2 points"));
        }
        if points.windows(2).any(|w| !(w[1].0 > w[0].0)) {
            return Err(Error::arg("source psd values must be strictly increasing"));
        }
        if points.iter().any(|p| !p.0.is_finite() || !p.1.is_finite()) {
            return Err(Error::arg("response curve contains non-finite values"));
        }
        Ok(ResponseCurve { points, channel })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct NoiseTempResult {
    pub t_rec: f64,
    pub intercept: f64,
    /// Output units per kelvin of source temperature.
    pub slope: f64,
    /// `t_rec / (T_Q / 2)`.
    pub quantum_ratio: f64,
    /// RMS deviation from the line relative to the mean output.
    pub fit_residual: f64,
    pub channel_bw: f64,
}

/// Least-squares line through `(T_S, output)` with `T_S = psd / k_B`.
pub fn fit_response(
    curve: &ResponseCurve,
    channel_bw: f64,
    frequency: f64,
) -> Result<NoiseTempResult> {
    fit_response_weighted(curve, None, channel_bw, frequency)
}

/// As [`fit_response`], optionally weighting each point by `1 / sigma^2`.
pub fn fit_response_weighted(
    curve: &ResponseCurve,
    sigmas: Option<&[f64]>,
    channel_bw: f64,
    frequency: f64,
) -> Result<NoiseTempResult> {
    if curve.points.iter().any(|p| !(p.1 > 0.0)) {
        return Err(Error::arg("outputs must be positive"));
    }
    let weights: Vec<f64> = match sigmas {
        None => vec![1.0; curve.points.len()],
        Some(s) => {
            if s.len() != curve.points.len() || s.iter().any(|v| !(*v > 0.0)) {
                return Err(Error::arg("sigmas must be positive, one per point"));
            }
            s.iter().map(|v| 1.0 / (v * v)).collect()
        }
    };
    let xs: Vec<f64> = curve.points.iter().map(|p| p.0 / BOLTZMANN).collect();
    let ys: Vec<f64> = curve.points.iter().map(|p| p.1).collect();
    let (intercept, slope) = weighted_line(&xs, &ys, &weights);
    if !(slope > 0.0) {
        return Err(Error::FitFailure(format!("non-positive slope {slope}")));
    }
    let n = xs.len() as f64;
    let mean_y = ys.iter().sum::<f64>() / n;
    let ss: f64 = xs
        .iter()
        .zip(&ys)
        .map(|(x, y)| (y - intercept - slope * x).powi(2))
        .sum();
    let t_rec = intercept / slope;
    Ok(NoiseTempResult {
        t_rec,
        intercept,
        slope,
        quantum_ratio: t_rec / quantum_temperature_dsb(frequency),
        fit_residual: (ss / n).sqrt() / mean_y,
        channel_bw,
    })
}

/// Weighted least squares `y = a + b x`; returns `(a, b)`.
pub(crate) fn weighted_line(xs: &[f64], ys: &[f64], w: &[f64]) -> (f64, f64) {
    let sw: f64 = w.iter().sum();
    let mx = xs.iter().zip(w).map(|(x, w)| x * w).sum::<f64>() / sw;
    let my = ys.iter().zip(w).map(|(y, w)| y * w).sum::<f64>() / sw;
    let mut sxx = 0.0;
    let mut sxy = 0.0;
    for ((x, y), w) in xs.iter().zip(ys).zip(w) {
        sxx += w * (x - mx) * (x - mx);
        sxy += w * (x - mx) * (y - my);
    }
    let b = sxy / sxx;
    (my - b * mx, b)
}

/// Auto-correlation system temperature
/// `(F / eta) T_Q + T / (2 Z R^2 P_LO)`.
pub fn t_sys_ac_closed_form(
    fano: f64,
    eta: f64,
    amp_temp: f64,
    z_load: f64,
    responsivity: f64,
    p_lo: f64,
    frequency: f64,
) -> Result<f64> {
    if !(fano > 0.0
        && eta > 0.0
        && z_load > 0.0
        && responsivity > 0.0
        && p_lo > 0.0
        && frequency > 0.0)
        || !(amp_temp >= 0.0)
    {
        return Err(Error::arg("closed-form inputs must be positive"));
    }
    Ok(fano / eta * quantum_temperature(frequency)
        + amp_temp / (2.0 * z_load * responsivity * responsivity * p_lo))
}

/// Cross-correlation system temperature `(c_LO F) / (|gamma| eta) T_Q`.
pub fn t_sys_cc_closed_form(
    c_lo: f64,
    gamma_mag: f64,
    fano: f64,
    eta: f64,
    frequency: f64,
) -> Result<f64> {
    if gamma_mag == 0.0 {
        return Err(Error::Undefined("no fringe: |gamma| = 0".into()));
    }
    if !(gamma_mag > 0.0 && c_lo >= 0.0 && fano > 0.0 && eta > 0.0 && frequency > 0.0) {
        return Err(Error::arg("closed-form inputs must be positive"));
    }
    Ok(c_lo * fano / (gamma_mag * eta) * quantum_temperature(frequency))
}

/// Radiometer scatter `t_rec / sqrt(dnu dt)`.
pub fn radiometer_sigma(t_rec: f64, dnu: f64, dt: f64) -> Result<f64> {
    if !(dnu > 0.0 && dt > 0.0) {
        return Err(Error::arg("dnu and dt must be > 0"));
    }
    Ok(t_rec / (dnu * dt).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::constants::responsivity;

    const NU: f64 = 1.926_676e14;

    #[test]
    fn occupation_examples() {
        let t = PLANCK * NU / BOLTZMANN / 2f64.ln();
        assert!((occupation(t, NU).unwrap() - 1.0).abs() < 1e-12);
        let n = occupation(300.0, 1.927e14).unwrap();
        assert!(n > 1e-14 && n < 1e-13, "{n}");
        let tq = quantum_temperature(NU);
        let rj = occupation(100.0 * tq, NU).unwrap();
        assert!((rj / 100.0 - 1.0).abs() < 0.01);
        assert_eq!(occupation(0.0, NU).unwrap(), 0.0);
        assert!(occupation(-1.0, NU).is_err());
    }

    #[test]
    fn occupation_is_bracketed_by_rayleigh_jeans() {
        let tq = quantum_temperature(NU);
        for k in 1..200 {
            let t = tq * 0.1 * k as f64;
            let n = occupation(t, NU).unwrap();
            assert!(n > t / tq - 0.5 && n < t / tq);
            if t > 10.0 * tq {
                assert!((n / (t / tq) - 1.0).abs() < 0.1);
            }
        }
    }

    #[test]
    fn y_factor_examples() {
        let r = y_factor(2.0, 1.0, 500.0, 0.0).unwrap();
        assert!((r.t_rec - 500.0).abs() < 1e-12);
        let r = y_factor(3.0, 1.0, 300.0, 77.0).unwrap();
        assert!((r.t_rec - 34.5).abs() < 1e-12);
        let t_true = 1234.0;
        let p = |t: f64| 7.0 * (t + t_true);
        let r = y_factor(p(10.0 * t_true), p(0.0), 10.0 * t_true, 0.0).unwrap();
        assert!((r.y - 11.0).abs() < 1e-12);
        assert!((r.t_rec / t_true - 1.0).abs() < 1e-12);
        assert!(matches!(
            y_factor(0.9, 1.0, 300.0, 77.0),
            Err(Error::InconsistentData(_))
        ));
    }

    #[test]
    fn t_rec_from_power_examples() {
        let t = t_rec_from_power(135e-15, 2.0, 6.25e6).unwrap();
        assert!((t / 1565.0 - 1.0).abs() < 0.01, "{t}");
        let t2 = t_rec_from_power(2160e-15, 2.0, 6.25e6).unwrap();
        assert!((t2 / 25040.0 - 1.0).abs() < 0.01, "{t2}");
        let half = t_rec_from_power(135e-15, 2.0, 3.125e6).unwrap();
        assert!((half / t - 2.0).abs() < 1e-12);
    }

    #[test]
    fn exact_line_recovers_t_rec() {
        let a = 3.7e-9;
        let t_rec = 15_000.0;
        let pts: Vec<(f64, f64)> = (0..6)
            .map(|i| {
                let psd = i as f64 * 1e-19;
                (psd, a * (t_rec + psd / BOLTZMANN))
            })
            .collect();
        let r = fit_response(&ResponseCurve::new(pts.clone(), None).unwrap(), 6.25e6, NU).unwrap();
        assert!((r.t_rec / t_rec - 1.0).abs() < 1e-12);
        assert!((r.t_rec * r.slope / r.intercept - 1.0).abs() < 1e-12);
        assert!(r.fit_residual < 1e-12);
        // Two-point Y factor agrees with the fit.
        let y = y_factor(pts[5].1, pts[0].1, pts[5].0 / BOLTZMANN, 0.0).unwrap();
        assert!((y.t_rec / r.t_rec - 1.0).abs() < 1e-9);
    }

    #[test]
    fn fit_rejects_falling_curve() {
        let c = ResponseCurve::new(vec![(0.0, 2.0), (1e-20, 1.0)], Some(3)).unwrap();
        assert!(matches!(
            fit_response(&c, 1.0, NU),
            Err(Error::FitFailure(_))
        ));
        assert!(ResponseCurve::new(vec![(1.0, 1.0), (1.0, 2.0)], None).is_err());
        assert!(ResponseCurve::new(vec![(1.0, 1.0)], None).is_err());
    }

    #[test]
    fn weighted_fit_ignores_low_weight_outlier() {
        let mut pts: Vec<(f64, f64)> = (0..5).map(|i| (i as f64 * 1e-20, 1.0 + i as f64)).collect();
        pts.push((5e-20, 100.0));
        let c = ResponseCurve::new(pts, None).unwrap();
        let sig = [1.0, 1.0, 1.0, 1.0, 1.0, 1e6];
        let r = fit_response_weighted(&c, Some(&sig), 1.0, NU).unwrap();
        assert!((r.t_rec - 1e-20 / BOLTZMANN).abs() / r.t_rec < 1e-6);
    }

    #[test]
    fn t_sys_ac_examples() {
        let resp = responsivity(0.75, NU);
        let tq = quantum_temperature(NU);
        let t = t_sys_ac_closed_form(1.0, 0.75, 300.0, 50.0, resp, 1e-3, NU).unwrap();
        assert!((t / tq - 1.70).abs() < 0.0085, "{}", t / tq);
        let ideal = t_sys_ac_closed_form(1.0, 1.0, 0.0, 50.0, resp, 1e-3, NU).unwrap();
        assert!((ideal / tq - 1.0).abs() < 1e-12);
        let strong = t_sys_ac_closed_form(2.0, 0.5, 300.0, 50.0, resp, 1e6, NU).unwrap();
        assert!((strong / (4.0 * tq) - 1.0).abs() < 1e-6);
    }

    #[test]
    fn t_sys_cc_examples() {
        let ac = 1.0 / 0.75 * quantum_temperature(NU);
        let cc = t_sys_cc_closed_form(1.0, 1.0, 1.0, 0.75, NU).unwrap();
        assert!((cc / ac - 1.0).abs() < 1e-12);
        let cc = t_sys_cc_closed_form(0.047, 1.0, 1.0, 0.75, NU).unwrap();
        assert!((ac / cc - 21.28).abs() < 0.01);
        assert_eq!(t_sys_cc_closed_form(0.0, 1.0, 1.0, 0.75, NU).unwrap(), 0.0);
        assert!(matches!(
            t_sys_cc_closed_form(0.1, 0.0, 1.0, 0.75, NU),
            Err(Error::Undefined(_))
        ));
    }

    #[test]
    fn radiometer_examples() {
        assert!((radiometer_sigma(10_000.0, 6.25e6, 1.0).unwrap() - 4.0).abs() < 1e-12);
        let a = radiometer_sigma(1.0, 1.0, 1.0).unwrap();
        let b = radiometer_sigma(1.0, 1.0, 4.0).unwrap();
        assert!((a / b - 2.0).abs() < 1e-12);
    }
}
