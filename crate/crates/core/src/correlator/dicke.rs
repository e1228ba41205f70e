use rustfft::num_complex::Complex64;

use super::SpectrumAccumulator;
use crate::error::{Error, Result};

/// Whether chunk `index` falls in the "on" half of the switching cycle.
/// The cycle starts "on" at t = 0 and lasts `1 / rate` seconds.
pub fn dicke_phase_is_on(index: u64, chunk_len: usize, sample_rate: f64, rate: f64) -> bool {
    let t = index as f64 * chunk_len as f64 / sample_rate;
    ((2.0 * t * rate).floor() as u64).is_multiple_of(2)
}

/// On/off accumulators of a switched measurement.
#[derive(Debug, Clone, PartialEq)]
pub struct DickeAccumulator {
    pub on: SpectrumAccumulator,
    pub off: SpectrumAccumulator,
    pub switch_rate: f64,
    chunk_len: usize,
    sample_rate: f64,
}

impl DickeAccumulator {
    pub fn new(
        n_channels: usize,
        chunk_len: usize,
        sample_rate: f64,
        switch_rate: f64,
    ) -> Result<Self> {
        if !(switch_rate > 0.0 && switch_rate.is_finite()) {
            return Err(Error::field("switching.rate_hz", "must be > 0"));
        }
        let half_period_chunks = sample_rate / (2.0 * switch_rate) / chunk_len as f64;
        if half_period_chunks < 1.0 {
            return Err(Error::field(
                "switching.rate_hz",
                "half period is shorter than one chunk",
            ));
        }
        let width = sample_rate / chunk_len as f64;
        Ok(DickeAccumulator {
            on: SpectrumAccumulator::new(n_channels, width),
            off: SpectrumAccumulator::new(n_channels, width),
            switch_rate,
            chunk_len,
            sample_rate,
        })
    }

    pub fn is_on(&self, index: u64) -> bool {
        dicke_phase_is_on(index, self.chunk_len, self.sample_rate, self.switch_rate)
    }

    /// Add the spectra of chunk `index` (global chunk number since t = 0).
    pub fn add_chunk(&mut self, index: u64, a: &[Complex64], b: &[Complex64]) {
        if self.is_on(index) {
            self.on.add_chunk(a, b);
        } else {
            self.off.add_chunk(a, b);
        }
    }

    pub fn merge(&mut self, other: &DickeAccumulator) -> Result<()> {
        self.on.merge(&other.on)?;
        self.off.merge(&other.off)
    }
}

/// Mean on-minus-off spectra.
#[derive(Debug, Clone, PartialEq)]
pub struct DickeDifference {
    pub auto_a: Vec<f64>,
    pub auto_b: Vec<f64>,
    pub cross: Vec<Complex64>,
}

pub fn dicke_difference(acc: &DickeAccumulator) -> Result<DickeDifference> {
    if acc.on.chunk_count == 0 || acc.off.chunk_count == 0 {
        return Err(Error::arg("both switching phases need at least one chunk"));
    }
    let sub = |x: Vec<f64>, y: Vec<f64>| x.iter().zip(&y).map(|(p, q)| p - q).collect();
    Ok(DickeDifference {
        auto_a: sub(acc.on.mean_auto_a()?, acc.off.mean_auto_a()?),
        auto_b: sub(acc.on.mean_auto_b()?, acc.off.mean_auto_b()?),
        cross: acc
            .on
            .mean_cross()?
            .iter()
            .zip(acc.off.mean_cross()?)
            .map(|(p, q)| p - q)
            .collect(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(v: f64) -> Complex64 {
        Complex64::new(v.sqrt(), 0.0)
    }

    #[test]
    fn phases_alternate_at_rate() {
        // 100 chunks per half period.
        let on: Vec<bool> = (0..400)
            .map(|i| dicke_phase_is_on(i, 10, 2000.0, 1.0))
            .collect();
        assert!(on[..100].iter().all(|x| *x));
        assert!(on[100..200].iter().all(|x| !*x));
        assert!(on[200..300].iter().all(|x| *x));
    }

    #[test]
    fn counts_differ_by_at_most_one_block() {
        let mut d = DickeAccumulator::new(1, 10, 2000.0, 1.0).unwrap();
        for i in 0..1234 {
            d.add_chunk(i, &[c(1.0)], &[c(1.0)]);
        }
        let diff = d.on.chunk_count.abs_diff(d.off.chunk_count);
        assert!(diff <= 100, "{diff}");
    }

    #[test]
    fn source_only_in_on_phase_survives_difference() {
        let mut d = DickeAccumulator::new(1, 10, 2000.0, 1.0).unwrap();
        for i in 0..800 {
            let p = if d.is_on(i) { 1.3 } else { 1.0 };
            d.add_chunk(i, &[c(p)], &[c(p)]);
        }
        let diff = dicke_difference(&d).unwrap();
        assert!((diff.auto_a[0] - 0.3).abs() < 1e-12);
        assert!((diff.cross[0].re - 0.3).abs() < 1e-12);
    }

    #[test]
    fn gain_ramp_bias_is_suppressed() {
        let floor = 1.0;
        let source = 0.05;
        let slope = 1e-4;
        let n = 4000;
        let mut d = DickeAccumulator::new(1, 10, 2000.0, 1.0).unwrap();
        let mut unswitched = 0.0;
        for i in 0..n {
            let g = 1.0 + slope * i as f64;
            let p = if d.is_on(i) {
                g * (floor + source)
            } else {
                g * floor
            };
            d.add_chunk(i, &[c(p)], &[c(p)]);
            unswitched += g * (floor + source);
        }
        // Unswitched: on-source mean minus a floor calibrated at t = 0.
        let unswitched_bias = (unswitched / n as f64 - floor - source).abs();
        let switched_bias = (dicke_difference(&d).unwrap().auto_a[0] - source).abs();
        assert!(
            switched_bias < 0.1 * unswitched_bias,
            "{switched_bias} vs {unswitched_bias}"
        );
    }

    #[test]
    fn empty_phase_is_rejected() {
        let mut d = DickeAccumulator::new(1, 10, 2000.0, 1.0).unwrap();
        d.add_chunk(0, &[c(1.0)], &[c(1.0)]);
        assert!(dicke_difference(&d).is_err());
        assert!(DickeAccumulator::new(1, 10, 2000.0, 1000.0).is_err());
    }
}
