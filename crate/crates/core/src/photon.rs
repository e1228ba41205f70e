//! Counting-mode Monte Carlo of photon deletion at splitters and detectors,
//! plus the closed-form Fano and cross-residual expressions it is checked
//! against.
//!
//! A laser stream is split (each photon independently reflected with
//! probability `r`), each output is thinned by the detector quantum
//! efficiency, and the balanced output is the per-bin difference
//! `transmitted - reflected`.

use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::rng::RngStream;

/// Photon or photoelectron counts per time bin. Counts are signed so that
/// balanced differences fit the same type.
#[derive(Debug, Clone, PartialEq)]
pub struct PhotonCountStream {
    pub counts: Vec<i64>,
    bin_duration: f64,
    pub label: String,
}

impl PhotonCountStream {
    pub fn new(counts: Vec<i64>, bin_duration: f64, label: impl Into<String>) -> Result<Self> {
        if !(bin_duration > 0.0 && bin_duration.is_finite()) {
            return Err(Error::arg(format!(
                "bin_duration must be > 0, got {bin_duration}"
            )));
        }
        Ok(PhotonCountStream {
            counts,
            bin_duration,
            label: label.into(),
        })
    }

    pub fn bin_duration(&self) -> f64 {
        self.bin_duration
    }

    pub fn len(&self) -> usize {
        self.counts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.counts.is_empty()
    }

    pub fn is_non_negative(&self) -> bool {
        self.counts.iter().all(|&c| c >= 0)
    }

    pub fn mean(&self) -> f64 {
        self.counts.iter().map(|&c| c as f64).sum::<f64>() / self.counts.len() as f64
    }

    /// Columnar text: two header lines, then one count per line.
    pub fn write_text<W: Write>(&self, mut w: W) -> Result<()> {
        writeln!(
            w,
            "# hetcorr-counts v1 bin_duration_s={:e}",
            self.bin_duration
        )?;
        writeln!(w, "# label={}", self.label.replace('\n', " "))?;
        for c in &self.counts {
            writeln!(w, "{c}")?;
        }
        Ok(())
    }

    pub fn read_text<R: BufRead>(r: R) -> Result<Self> {
        let mut bin_duration = None;
        let mut label = String::new();
        let mut counts = Vec::new();
        for (lineno, line) in r.lines().enumerate() {
            let line = line?;
            let line = line.trim();
            if let Some(rest) = line.strip_prefix('#') {
                let rest = rest.trim();
                if let Some(v) = rest.strip_prefix("label=") {
                    label = v.to_string();
                } else if let Some(pos) = rest.find("bin_duration_s=") {
                    let v = &rest[pos + "bin_duration_s=".len()..];
                    bin_duration = Some(v.trim().parse::<f64>().map_err(|e| {
                        Error::Parse(format!("line {}: bin duration: {e}", lineno + 1))
                    })?);
                }
                continue;
            }
            if line.is_empty() {
                continue;
            }
            counts.push(
                line.parse::<i64>()
                    .map_err(|e| Error::Parse(format!("line {}: {e}", lineno + 1)))?,
            );
        }
        let bin_duration =
            bin_duration.ok_or_else(|| Error::Parse("missing bin_duration_s header".into()))?;
        PhotonCountStream::new(counts, bin_duration, label)
    }
}

/// Lossless power splitter; transmittance is derived as `1 - r`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitterSpec {
    r: f64,
}

impl SplitterSpec {
    pub fn new(reflectance: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&reflectance) {
            return Err(Error::arg(format!(
                "reflectance must lie in [0, 1], got {reflectance}"
            )));
        }
        Ok(SplitterSpec { r: reflectance })
    }

    pub fn r(&self) -> f64 {
        self.r
    }

    pub fn t(&self) -> f64 {
        1.0 - self.r
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct DetectorSpec {
    eta: f64,
    dark_rate: f64,
}

impl DetectorSpec {
    pub fn new(eta: f64, dark_rate: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::arg(format!(
                "quantum efficiency must lie in [0, 1], got {eta}"
            )));
        }
        if !(dark_rate >= 0.0 && dark_rate.is_finite()) {
            return Err(Error::arg(format!(
                "dark rate must be >= 0, got {dark_rate}"
            )));
        }
        Ok(DetectorSpec { eta, dark_rate })
    }

    /// Detector without dark counts.
    pub fn ideal_dark(eta: f64) -> Result<Self> {
        Self::new(eta, 0.0)
    }

    pub fn eta(&self) -> f64 {
        self.eta
    }

    pub fn dark_rate(&self) -> f64 {
        self.dark_rate
    }
}

/// Variance-to-mean ratio with the mean it was normalized by.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct FanoEstimate {
    pub fano: f64,
    /// Standard error from the chi-squared law of the sample variance.
    pub std_err: f64,
    pub mean_ref: f64,
}

/// Sample covariance of two equal-length streams.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct CovarianceEstimate {
    pub covariance: f64,
    /// Large-sample standard error, `sqrt((var_a var_b + cov^2) / (n - 1))`.
    pub std_err: f64,
}

/// Laser counts with Fano factor `fano >= 1`.
///
/// Each bin draws a latent mean `m = mean (1 + g)` with `g ~ N(0, (F-1)/mean)`
/// and then a Poisson count of mean `m`, giving white excess noise and total
/// variance `F mean`. Latent means are clamped at zero, which only matters for
/// `(F - 1) / mean` of order one.
pub fn gen_laser_counts(
    mean_per_bin: f64,
    fano: f64,
    n_bins: usize,
    bin_duration: f64,
    rng: &RngStream,
) -> Result<PhotonCountStream> {
    if !(mean_per_bin > 0.0 && mean_per_bin.is_finite()) {
        return Err(Error::arg(format!(
            "mean_per_bin must be > 0, got {mean_per_bin}"
        )));
    }
    if !(fano >= 1.0 && fano.is_finite()) {
        return Err(Error::arg(format!(
            "fano must be >= 1 (sub-Poissonian sources are not modeled), got {fano}"
        )));
    }
    let mut s = rng.sampler();
    let excess_sd = ((fano - 1.0) / mean_per_bin).sqrt();
    let mut counts = Vec::with_capacity(n_bins);
    for _ in 0..n_bins {
        let latent = if fano > 1.0 {
            (mean_per_bin * (1.0 + excess_sd * s.standard_normal())).max(0.0)
        } else {
            mean_per_bin
        };
        counts.push(s.poisson(latent)? as i64);
    }
    PhotonCountStream::new(
        counts,
        bin_duration,
        format!("laser mean={mean_per_bin} F={fano}"),
    )
}

/// Single-mode thermal counts, Bose-Einstein distributed with mean
/// `occupation` (variance `n(n + 1)`).
pub fn gen_thermal_counts(
    occupation: f64,
    n_bins: usize,
    bin_duration: f64,
    rng: &RngStream,
) -> Result<PhotonCountStream> {
    let mut s = rng.sampler();
    let counts = (0..n_bins)
        .map(|_| s.bose_einstein(occupation).map(|c| c as i64))
        .collect::<Result<Vec<_>>>()?;
    PhotonCountStream::new(counts, bin_duration, format!("thermal n={occupation}"))
}

fn require_non_negative(s: &PhotonCountStream, what: &str) -> Result<()> {
    if s.is_non_negative() {
        Ok(())
    } else {
        Err(Error::arg(format!("{what} requires non-negative counts")))
    }
}

/// Assign every photon independently to the reflected port with probability
/// `r`; the rest are transmitted. `reflected + transmitted == input` per bin.
pub fn split(
    input: &PhotonCountStream,
    spec: SplitterSpec,
    rng: &RngStream,
) -> Result<(PhotonCountStream, PhotonCountStream)> {
    require_non_negative(input, "split")?;
    let mut s = rng.sampler();
    let mut refl = Vec::with_capacity(input.len());
    let mut trans = Vec::with_capacity(input.len());
    for &c in &input.counts {
        let k = s.binomial(c as u64, spec.r())? as i64;
        refl.push(k);
        trans.push(c - k);
    }
    let dt = input.bin_duration;
    Ok((
        PhotonCountStream::new(refl, dt, format!("{} | reflected", input.label))?,
        PhotonCountStream::new(trans, dt, format!("{} | transmitted", input.label))?,
    ))
}

/// Binomial deletion with probability `eta` per photon plus Poisson dark
/// counts of mean `dark_rate * bin_duration`.
pub fn thin(
    input: &PhotonCountStream,
    det: DetectorSpec,
    rng: &RngStream,
) -> Result<PhotonCountStream> {
    require_non_negative(input, "thin")?;
    let mut s = rng.sampler();
    let dark_mean = det.dark_rate * input.bin_duration;
    let mut out = Vec::with_capacity(input.len());
    for &c in &input.counts {
        let mut k = s.binomial(c as u64, det.eta)?;
        if dark_mean > 0.0 {
            k += s.poisson(dark_mean)?;
        }
        out.push(k as i64);
    }
    PhotonCountStream::new(
        out,
        input.bin_duration,
        format!("{} | detected", input.label),
    )
}

/// Per-bin `pd1 - pd2`.
pub fn balanced_difference(
    pd1: &PhotonCountStream,
    pd2: &PhotonCountStream,
) -> Result<PhotonCountStream> {
    if pd1.len() != pd2.len() {
        return Err(Error::arg(format!(
            "stream lengths differ: {} vs {}",
            pd1.len(),
            pd2.len()
        )));
    }
    if pd1.bin_duration != pd2.bin_duration {
        return Err(Error::arg("stream bin durations differ"));
    }
    let counts = pd1
        .counts
        .iter()
        .zip(&pd2.counts)
        .map(|(a, b)| a - b)
        .collect();
    PhotonCountStream::new(counts, pd1.bin_duration, "balanced difference")
}

fn moments(counts: &[i64]) -> (f64, f64) {
    let n = counts.len() as f64;
    let mean = counts.iter().map(|&c| c as f64).sum::<f64>() / n;
    let var = counts
        .iter()
        .map(|&c| {
            let d = c as f64 - mean;
            d * d
        })
        .sum::<f64>()
        / (n - 1.0);
    (mean, var)
}

/// Sample variance divided by `mean_ref`, or by the absolute sample mean when
/// no reference is given.
pub fn fano_estimate(stream: &PhotonCountStream, mean_ref: Option<f64>) -> Result<FanoEstimate> {
    if stream.len() < 2 {
        return Err(Error::arg("Fano estimate needs at least two bins"));
    }
    let (mean, var) = moments(&stream.counts);
    let mean_ref = mean_ref.unwrap_or(mean.abs());
    if !(mean_ref > 0.0) {
        return Err(Error::Undefined("Fano normalization mean is zero".into()));
    }
    let fano = var / mean_ref;
    let std_err = fano * (2.0 / (stream.len() as f64 - 1.0)).sqrt();
    Ok(FanoEstimate {
        fano,
        std_err,
        mean_ref,
    })
}

pub fn cross_covariance(
    a: &PhotonCountStream,
    b: &PhotonCountStream,
) -> Result<CovarianceEstimate> {
    if a.len() != b.len() || a.len() < 2 {
        return Err(Error::arg(
            "covariance needs two equal-length streams of >= 2 bins",
        ));
    }
    let (ma, va) = moments(&a.counts);
    let (mb, vb) = moments(&b.counts);
    let n = a.len() as f64;
    let cov = a
        .counts
        .iter()
        .zip(&b.counts)
        .map(|(&x, &y)| (x as f64 - ma) * (y as f64 - mb))
        .sum::<f64>()
        / (n - 1.0);
    Ok(CovarianceEstimate {
        covariance: cov,
        std_err: ((va * vb + cov * cov) / (n - 1.0)).sqrt(),
    })
}

/// Balanced-output Fano factor normalized to the photon number before the
/// balancing splitter:
/// `eta [1 + eta (4 T R - 1)] + eta^2 (1 - 2R)^2 F_LO`.
pub fn fano_balanced_closed_form(eta: f64, r: f64, fano_lo: f64) -> f64 {
    let t = 1.0 - r;
    eta * (1.0 + eta * (4.0 * t * r - 1.0)) + eta * eta * (1.0 - 2.0 * r).powi(2) * fano_lo
}

/// Coefficient of `n` in the cross-covariance of two balanced outputs whose
/// inputs carry a common fluctuation of variance `F_LO n`:
/// `eta^2 (1 - 2R_A)(1 - 2R_B) F_LO`.
pub fn cross_residual_closed_form(eta: f64, r_a: f64, r_b: f64, fano_lo: f64) -> f64 {
    eta * eta * (1.0 - 2.0 * r_a) * (1.0 - 2.0 * r_b) * fano_lo
}

/// Cross-covariance coefficient when the two balanced receivers are fed from
/// the two ports of one distribution splitter with reflectance `r_dist`,
/// per photon *before* that splitter.
///
/// The distribution splitter's own partition noise anticorrelates the two
/// feeds, so only the excess `F_LO - 1` survives:
/// `eta^2 (1 - 2R_A)(1 - 2R_B) R_dist T_dist (F_LO - 1)`.
pub fn cross_residual_distributed(eta: f64, r_a: f64, r_b: f64, fano_lo: f64, r_dist: f64) -> f64 {
    eta * eta * (1.0 - 2.0 * r_a) * (1.0 - 2.0 * r_b) * r_dist * (1.0 - r_dist) * (fano_lo - 1.0)
}

/// Normalized LO-noise correlation between two balanced receivers implied by
/// the closed forms: cross residual over the geometric mean of the two
/// balanced Fano factors.
pub fn lo_correlation_closed_form(eta: f64, r_a: f64, r_b: f64, fano_lo: f64) -> f64 {
    let cross = cross_residual_closed_form(eta, r_a, r_b, fano_lo);
    let fa = fano_balanced_closed_form(eta, r_a, fano_lo);
    let fb = fano_balanced_closed_form(eta, r_b, fano_lo);
    cross / (fa * fb).sqrt()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn rng(id: u64) -> RngStream {
        RngStream::new(2024).child(id)
    }

    fn lag1_autocorr(s: &PhotonCountStream) -> f64 {
        let (m, v) = moments(&s.counts);
        let n = s.len();
        let c: f64 = (0..n - 1)
            .map(|i| (s.counts[i] as f64 - m) * (s.counts[i + 1] as f64 - m))
            .sum::<f64>()
            / (n - 1) as f64;
        c / v
    }

    #[test]
    fn laser_rejects_sub_poissonian() {
        assert!(gen_laser_counts(100.0, 0.5, 10, 1.0, &rng(0)).is_err());
        assert!(gen_laser_counts(0.0, 1.0, 10, 1.0, &rng(0)).is_err());
    }

    #[test]
    fn laser_shot_noise_limit() {
        let s = gen_laser_counts(1000.0, 1.0, 1_000_000, 1e-9, &rng(1)).unwrap();
        let f = fano_estimate(&s, None).unwrap();
        assert!((0.99..=1.01).contains(&f.fano), "{f:?}");
    }

    #[test]
    fn laser_excess_noise_white() {
        let n = 1_000_000;
        let s = gen_laser_counts(1000.0, 10.0, n, 1e-9, &rng(2)).unwrap();
        let f = fano_estimate(&s, None).unwrap();
        assert!((f.fano - 10.0).abs() < 0.1, "{f:?}");
        assert!(lag1_autocorr(&s).abs() < 4.0 / (n as f64).sqrt());
    }

    #[test]
    fn thermal_limits() {
        let s = gen_thermal_counts(1e-3, 1_000_000, 1.0, &rng(3)).unwrap();
        let f = fano_estimate(&s, None).unwrap();
        assert!((f.fano - 1.001).abs() < 0.02, "{f:?}");
        let s = gen_thermal_counts(100.0, 1_000_000, 1.0, &rng(4)).unwrap();
        let (_, v) = moments(&s.counts);
        assert!((v / 10_100.0 - 1.0).abs() < 0.02, "{v}");
    }

    #[test]
    fn split_conserves_photons() {
        let input = gen_laser_counts(500.0, 3.0, 10_000, 1.0, &rng(5)).unwrap();
        let (r, t) = split(&input, SplitterSpec::new(0.3).unwrap(), &rng(6)).unwrap();
        for i in 0..input.len() {
            assert_eq!(r.counts[i] + t.counts[i], input.counts[i]);
        }
    }

    #[test]
    fn split_poisson_invariance() {
        let input = gen_laser_counts(1000.0, 1.0, 1_000_000, 1.0, &rng(7)).unwrap();
        let (r, t) = split(&input, SplitterSpec::new(0.5).unwrap(), &rng(8)).unwrap();
        for out in [&r, &t] {
            let f = fano_estimate(out, None).unwrap();
            assert!((f.fano - 1.0).abs() < 0.01, "{f:?}");
        }
    }

    #[test]
    fn split_excess_noise_partition() {
        // var = T R n + T^2 F n = 250 + 2500, Fano w.r.t. 500 is 5.5
        let input = gen_laser_counts(1000.0, 10.0, 1_000_000, 1.0, &rng(9)).unwrap();
        let (r, t) = split(&input, SplitterSpec::new(0.5).unwrap(), &rng(10)).unwrap();
        for out in [&r, &t] {
            let f = fano_estimate(out, Some(500.0)).unwrap();
            assert!((f.fano / 5.5 - 1.0).abs() < 0.02, "{f:?}");
        }
        // cross-covariance: -T R n + T R F n = 0.25 * 9 * 1000
        let c = cross_covariance(&r, &t).unwrap();
        assert!((c.covariance - 2250.0).abs() < 3.0 * c.std_err, "{c:?}");
    }

    #[test]
    fn split_partition_anticorrelated_for_poisson() {
        // Poisson in: partition term -TRn cancels the common term TRn exactly
        let input = gen_laser_counts(1000.0, 1.0, 500_000, 1.0, &rng(11)).unwrap();
        let (r, t) = split(&input, SplitterSpec::new(0.3).unwrap(), &rng(12)).unwrap();
        let c = cross_covariance(&r, &t).unwrap();
        assert!(c.covariance.abs() < 3.0 * c.std_err, "{c:?}");
    }

    #[test]
    fn thin_identity_and_errors() {
        let input = gen_laser_counts(100.0, 2.0, 1000, 1.0, &rng(13)).unwrap();
        let out = thin(&input, DetectorSpec::ideal_dark(1.0).unwrap(), &rng(14)).unwrap();
        assert_eq!(out.counts, input.counts);
        let neg = PhotonCountStream::new(vec![1, -1], 1.0, "x").unwrap();
        assert!(thin(&neg, DetectorSpec::ideal_dark(0.5).unwrap(), &rng(0)).is_err());
        assert!(split(&neg, SplitterSpec::new(0.5).unwrap(), &rng(0)).is_err());
        assert!(DetectorSpec::new(1.2, 0.0).is_err());
        assert!(DetectorSpec::new(0.5, -1.0).is_err());
        assert!(SplitterSpec::new(-0.1).is_err());
    }

    #[test]
    fn thin_burgess_variance() {
        // 0.75*0.25*1000 + 0.5625*10000 = 5812.5 -> Fano 7.75 w.r.t. 750
        let input = gen_laser_counts(1000.0, 10.0, 1_000_000, 1.0, &rng(15)).unwrap();
        let out = thin(&input, DetectorSpec::ideal_dark(0.75).unwrap(), &rng(16)).unwrap();
        let f = fano_estimate(&out, Some(750.0)).unwrap();
        assert!((f.fano / 7.75 - 1.0).abs() < 0.02, "{f:?}");
        // Poisson stays Poisson
        let input = gen_laser_counts(1000.0, 1.0, 1_000_000, 1.0, &rng(17)).unwrap();
        let out = thin(&input, DetectorSpec::ideal_dark(0.3).unwrap(), &rng(18)).unwrap();
        let f = fano_estimate(&out, None).unwrap();
        assert!((f.fano - 1.0).abs() < 0.01, "{f:?}");
    }

    #[test]
    fn thin_dark_counts_add_poisson() {
        let input = PhotonCountStream::new(vec![0; 200_000], 1e-3, "dark").unwrap();
        let out = thin(&input, DetectorSpec::new(0.5, 5e4).unwrap(), &rng(19)).unwrap();
        let (m, v) = moments(&out.counts);
        assert!((m - 50.0).abs() < 0.2);
        assert!((v / m - 1.0).abs() < 0.02);
    }

    #[test]
    fn difference_basics() {
        let a = PhotonCountStream::new(vec![3, 4, 5], 1.0, "a").unwrap();
        let d = balanced_difference(&a, &a).unwrap();
        assert!(d.counts.iter().all(|&c| c == 0));
        let b = PhotonCountStream::new(vec![3, 4], 1.0, "b").unwrap();
        assert!(balanced_difference(&a, &b).is_err());
        let c = PhotonCountStream::new(vec![1, 2, 3], 2.0, "c").unwrap();
        assert!(balanced_difference(&a, &c).is_err());
    }

    #[test]
    fn fano_estimate_edges() {
        let c = PhotonCountStream::new(vec![7; 100], 1.0, "const").unwrap();
        assert_eq!(fano_estimate(&c, None).unwrap().fano, 0.0);
        let one = PhotonCountStream::new(vec![7], 1.0, "one").unwrap();
        assert!(fano_estimate(&one, None).is_err());
        let empty = PhotonCountStream::new(vec![], 1.0, "none").unwrap();
        assert!(fano_estimate(&empty, None).is_err());
        assert!(PhotonCountStream::new(vec![], 0.0, "bad").is_err());
    }

    #[test]
    fn balanced_pipeline_removes_excess_noise() {
        let n_bar = 1000.0;
        let laser = gen_laser_counts(n_bar, 10.0, 500_000, 1.0, &rng(20)).unwrap();
        let (r, t) = split(&laser, SplitterSpec::new(0.5).unwrap(), &rng(21)).unwrap();
        let det = DetectorSpec::ideal_dark(1.0).unwrap();
        let d = balanced_difference(
            &thin(&t, det, &rng(22)).unwrap(),
            &thin(&r, det, &rng(23)).unwrap(),
        )
        .unwrap();
        let f = fano_estimate(&d, Some(laser.mean())).unwrap();
        assert!((f.fano - 1.0).abs() < 0.02, "{f:?}");
    }

    #[test]
    fn closed_forms() {
        assert_eq!(fano_balanced_closed_form(1.0, 0.5, 10.0), 1.0);
        assert_eq!(fano_balanced_closed_form(1.0, 0.5, 1.0), 1.0);
        assert!((fano_balanced_closed_form(1.0, 0.4, 10.0) - 1.36).abs() < 1e-12);
        assert_eq!(fano_balanced_closed_form(0.0, 0.4, 10.0), 0.0);
        // eta = 0.75, R = 0.5: eta [1 + eta (1 - 1)] = 0.75
        assert!((fano_balanced_closed_form(0.75, 0.5, 10.0) - 0.75).abs() < 1e-12);

        assert_eq!(cross_residual_closed_form(1.0, 0.5, 0.5, 10.0), 0.0);
        assert!((cross_residual_closed_form(1.0, 0.4, 0.4, 10.0) - 0.4).abs() < 1e-12);
        assert!((cross_residual_closed_form(0.75, 0.4, 0.4, 10.0) - 0.225).abs() < 1e-12);
        assert_eq!(cross_residual_distributed(1.0, 0.4, 0.4, 1.0, 0.5), 0.0);

        // 0.225 / 0.9525
        let c = lo_correlation_closed_form(0.75, 0.4, 0.4, 10.0);
        assert!((c - 0.225 / 0.9525).abs() < 1e-12, "{c}");
    }

    #[test]
    fn text_roundtrip() {
        let s = PhotonCountStream::new(vec![1, -2, 30], 2.5e-9, "pd diff").unwrap();
        let mut buf = Vec::new();
        s.write_text(&mut buf).unwrap();
        let back = PhotonCountStream::read_text(buf.as_slice()).unwrap();
        assert_eq!(back, s);
    }
}
