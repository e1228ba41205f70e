use num_complex::Complex64;
use serde::Serialize;

use super::config::ScenarioConfig;
use super::pipeline::{PointOutcome, Readout, SimulationOutcome};
use crate::analysis::{
    allan_variance, fit_response, radiometer_sigma, AllanResult, NoiseTempResult, ResponseCurve,
};
use crate::constants::BOLTZMANN;
use crate::correlator::{dicke_difference, CoefficientMode};
use crate::error::Result;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PointSummary {
    pub psd_w_per_hz: f64,
    pub t_source_kelvin: f64,
    /// Band-averaged per-channel powers (V^2).
    pub ac_a: f64,
    pub ac_b: f64,
    pub cross_re: f64,
    pub cross_im: f64,
    pub cross_mag: f64,
    /// `|cross| / mean(auto)` over the band.
    pub c_lo: f64,
    pub clip_fraction_a: f64,
    pub clip_fraction_b: f64,
    pub adc_rms_a: f64,
    pub adc_rms_b: f64,
    pub chunks: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ResponseSummary {
    /// Mean of both auto spectra.
    pub ac: NoiseTempResult,
    pub ac_a: NoiseTempResult,
    pub ac_b: NoiseTempResult,
    /// Magnitude of the band-averaged cross spectrum.
    pub cc: NoiseTempResult,
    pub slope_ratio_cc_over_ac: f64,
    pub t_rec_ratio_cc_over_ac: f64,
    pub improvement_factor: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeriesSummary {
    pub channel: usize,
    pub readouts: usize,
    pub readout_interval_s: f64,
    pub mean_ac: f64,
    /// Mean cross power projected on its average phase.
    pub mean_cc: f64,
    pub ac_allan: AllanResult,
    pub cc_allan: AllanResult,
    /// Log-log slope of the AC Allan variance over the first four octaves.
    pub white_slope_ac: f64,
    /// Relative readout scatter expected from the radiometer formula.
    pub radiometer_relative: f64,
    /// Measured relative scatter divided by the expectation.
    pub scatter_ratio: f64,
    /// Longest averaging time with at least 7 differences.
    pub long_tau_s: f64,
    pub allan_ratio_cc_over_ac: f64,
    pub floor_ratio_squared: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DickeSummary {
    pub on_chunks: u64,
    pub off_chunks: u64,
    pub band_auto_a: f64,
    pub band_auto_b: f64,
    pub band_cross_re: f64,
    pub band_cross_im: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ScenarioSummary {
    pub channel_width_hz: f64,
    pub band_channels: [usize; 2],
    pub points: Vec<PointSummary>,
    pub zero_signal_c_lo: Option<f64>,
    pub response: Option<ResponseSummary>,
    pub series: Option<SeriesSummary>,
    pub dicke: Vec<DickeSummary>,
}

pub fn summarize(config: &ScenarioConfig, outcome: &SimulationOutcome) -> Result<ScenarioSummary> {
    let band = config.band();
    let points = outcome
        .points
        .iter()
        .map(|p| point_summary(config, p))
        .collect::<Result<Vec<_>>>()?;
    let zero_signal_c_lo = points
        .iter()
        .find(|p| p.psd_w_per_hz == 0.0)
        .map(|p| p.c_lo);
    let response = if points.len() >= 2 {
        Some(response_summary(config, &points)?)
    } else {
        None
    };
    let series = match (
        config.readout_chunks,
        outcome.points.first().and_then(|p| p.series.as_ref()),
    ) {
        (Some(k), Some(s)) => Some(series_summary(config, k, s)?),
        _ => None,
    };
    let dicke = outcome
        .points
        .iter()
        .filter_map(|p| p.dicke.as_ref())
        .map(|d| {
            let diff = dicke_difference(d)?;
            let w = band.len() as f64;
            Ok(DickeSummary {
                on_chunks: d.on.chunk_count,
                off_chunks: d.off.chunk_count,
                band_auto_a: diff.auto_a[band.clone()].iter().sum::<f64>() / w,
                band_auto_b: diff.auto_b[band.clone()].iter().sum::<f64>() / w,
                band_cross_re: diff.cross[band.clone()].iter().map(|c| c.re).sum::<f64>() / w,
                band_cross_im: diff.cross[band.clone()].iter().map(|c| c.im).sum::<f64>() / w,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ScenarioSummary {
        channel_width_hz: config.channel_width(),
        band_channels: [band.start, band.end],
        points,
        zero_signal_c_lo,
        response,
        series,
        dicke,
    })
}

fn point_summary(config: &ScenarioConfig, p: &PointOutcome) -> Result<PointSummary> {
    let acc = p.response_spectrum();
    let b = acc.band(config.band())?;
    Ok(PointSummary {
        psd_w_per_hz: p.psd,
        t_source_kelvin: p.psd / BOLTZMANN,
        ac_a: b.auto_a,
        ac_b: b.auto_b,
        cross_re: b.cross.re,
        cross_im: b.cross.im,
        cross_mag: b.cross.norm(),
        c_lo: b.coefficient(CoefficientMode::PowerRatio)?,
        clip_fraction_a: p.clip_fraction[0],
        clip_fraction_b: p.clip_fraction[1],
        adc_rms_a: p.adc_rms[0],
        adc_rms_b: p.adc_rms[1],
        chunks: acc.chunk_count,
    })
}

fn response_summary(config: &ScenarioConfig, points: &[PointSummary]) -> Result<ResponseSummary> {
    let bw = config.channel_width();
    let nu = config.rx_a.optical_frequency;
    let curve = |f: &dyn Fn(&PointSummary) -> f64| {
        ResponseCurve::new(
            points.iter().map(|p| (p.psd_w_per_hz, f(p))).collect(),
            None,
        )
    };
    let ac = fit_response(&curve(&|p| 0.5 * (p.ac_a + p.ac_b))?, bw, nu)?;
    let ac_a = fit_response(&curve(&|p| p.ac_a)?, bw, nu)?;
    let ac_b = fit_response(&curve(&|p| p.ac_b)?, bw, nu)?;
    let cc = fit_response(&curve(&|p| p.cross_mag)?, bw, nu)?;
    Ok(ResponseSummary {
        slope_ratio_cc_over_ac: cc.slope / ac.slope,
        t_rec_ratio_cc_over_ac: cc.t_rec / ac.t_rec,
        improvement_factor: ac.t_rec / cc.t_rec,
        ac,
        ac_a,
        ac_b,
        cc,
    })
}

/// Cross readouts projected on the phase of their mean.
pub fn projected_cross(series: &[Readout]) -> Vec<f64> {
    let total: Complex64 = series.iter().map(|r| r.cross).sum();
    let rot = Complex64::from_polar(1.0, -total.arg());
    series.iter().map(|r| (r.cross * rot).re).collect()
}

fn series_summary(config: &ScenarioConfig, k: usize, series: &[Readout]) -> Result<SeriesSummary> {
    let interval = (k * config.chunk.fft_length) as f64 / config.sample_rate_hz;
    let ac: Vec<f64> = series.iter().map(|r| r.ac_a).collect();
    let cc = projected_cross(series);
    let n = series.len() as f64;
    let mean_ac = ac.iter().sum::<f64>() / n;
    let mean_cc = cc.iter().sum::<f64>() / n;
    let ac_allan = allan_variance(&ac, interval)?;
    let cc_allan = allan_variance(&cc, interval)?;
    let white_slope_ac = ac_allan.loglog_slope(interval, 8.0 * interval)?;
    let radiometer_relative = radiometer_sigma(1.0, config.channel_width(), interval)?;
    let scatter_ratio = ac_allan.variances[0].sqrt() / mean_ac / radiometer_relative;
    let long = ac_allan.counts.iter().rposition(|c| *c >= 7).unwrap_or(0);
    Ok(SeriesSummary {
        channel: config.series_channel(),
        readouts: series.len(),
        readout_interval_s: interval,
        mean_ac,
        mean_cc,
        white_slope_ac,
        radiometer_relative,
        scatter_ratio,
        long_tau_s: ac_allan.taus[long],
        allan_ratio_cc_over_ac: cc_allan.variances[long] / ac_allan.variances[long],
        floor_ratio_squared: (mean_cc / mean_ac).powi(2),
        ac_allan,
        cc_allan,
    })
}
