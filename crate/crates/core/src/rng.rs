//! Deterministic, hierarchically splittable random streams and the elementary
//! samplers built on them.
//!
//! An [`RngStream`] is an immutable descriptor `(seed, path)`. The path names
//! the consumer (component, then sub-draw, e.g. `[SYNTH, block_index]`) and is
//! hashed together with the seed into a ChaCha8 key, so any number of workers
//! can derive their own sub-streams without sharing mutable state. Sampling
//! happens through a [`Sampler`], created fresh from a stream for each logical
//! consumer.

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution, Geometric, Poisson, StandardNormal};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// A complex noise phasor. Drawn samples have zero mean and unit total
/// variance, i.e. variance 1/2 per quadrature.
pub type NoisePhasor = Complex64;

/// Immutable descriptor of one deterministic random stream.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct RngStream {
    seed: u64,
    path: Vec<u64>,
}

impl RngStream {
    pub fn new(seed: u64) -> Self {
        RngStream {
            seed,
            path: Vec::new(),
        }
    }

    /// Sub-stream one level deeper in the hierarchy.
    pub fn child(&self, id: u64) -> Self {
        let mut path = self.path.clone();
        path.push(id);
        RngStream {
            seed: self.seed,
            path,
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn path(&self) -> &[u64] {
        &self.path
    }

    fn key(&self) -> [u8; 32] {
        let mut h = Sha256::new();
        h.update(b"hetcorr-rng-v1");
        h.update(self.seed.to_le_bytes());
        h.update((self.path.len() as u64).to_le_bytes());
        for id in &self.path {
            h.update(id.to_le_bytes());
        }
        h.finalize().into()
    }

    pub fn sampler(&self) -> Sampler {
        self.sampler_with(SamplerConfig::default())
    }

    pub fn sampler_with(&self, config: SamplerConfig) -> Sampler {
        Sampler {
            rng: ChaCha8Rng::from_seed(self.key()),
            config,
        }
    }
}

/// Thresholds above which the count samplers switch to their Gaussian
/// approximations.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerConfig {
    pub poisson_gaussian_above: f64,
    pub binomial_gaussian_above: u64,
}

impl Default for SamplerConfig {
    fn default() -> Self {
        SamplerConfig {
            poisson_gaussian_above: 1e4,
            binomial_gaussian_above: 10_000,
        }
    }
}

impl SamplerConfig {
    /// Never use the Gaussian branches.
    pub fn exact() -> Self {
        SamplerConfig {
            poisson_gaussian_above: f64::INFINITY,
            binomial_gaussian_above: u64::MAX,
        }
    }
}

// The binomial Gaussian branch additionally needs enough expected successes
// and failures; for p near 0 or 1 the normal approximation is poor even at
// large n.
const BINOMIAL_GAUSSIAN_MIN_TAIL: f64 = 50.0;

/// Per-consumer sampling state derived from an [`RngStream`].
#[derive(Debug, Clone)]
pub struct Sampler {
    rng: ChaCha8Rng,
    config: SamplerConfig,
}

impl Sampler {
    pub fn config(&self) -> SamplerConfig {
        self.config
    }

    /// Uniform on `[0, 1)`.
    pub fn uniform(&mut self) -> f64 {
        self.rng.random::<f64>()
    }

    pub fn standard_normal(&mut self) -> f64 {
        StandardNormal.sample(&mut self.rng)
    }

    /// Fill `out` with independent standard normal draws.
    pub fn fill_standard_normal(&mut self, out: &mut [f64]) {
        for x in out {
            *x = StandardNormal.sample(&mut self.rng);
        }
    }

    /// Circular complex Gaussian phasor: uniform phase, Rayleigh amplitude,
    /// `E|z|^2 = 1`.
    pub fn gaussian_phasor(&mut self) -> NoisePhasor {
        let s = std::f64::consts::FRAC_1_SQRT_2;
        Complex64::new(s * self.standard_normal(), s * self.standard_normal())
    }

    /// Poisson count with the given mean. Above
    /// [`SamplerConfig::poisson_gaussian_above`] the rounded normal
    /// approximation `N(mean, mean)` is used.
    pub fn poisson(&mut self, mean: f64) -> Result<u64> {
        check_mean(mean)?;
        if mean > self.config.poisson_gaussian_above {
            Ok(self.poisson_gaussian_unchecked(mean))
        } else {
            Ok(self.poisson_exact_unchecked(mean))
        }
    }

    /// Exact Poisson draw regardless of the configured threshold.
    pub fn poisson_exact(&mut self, mean: f64) -> Result<u64> {
        check_mean(mean)?;
        Ok(self.poisson_exact_unchecked(mean))
    }

    /// Gaussian-approximation Poisson draw regardless of the configured
    /// threshold.
    pub fn poisson_gaussian(&mut self, mean: f64) -> Result<u64> {
        check_mean(mean)?;
        Ok(self.poisson_gaussian_unchecked(mean))
    }

    fn poisson_exact_unchecked(&mut self, mean: f64) -> u64 {
        if mean == 0.0 {
            return 0;
        }
        // Poisson::new only fails for non-positive or non-finite means,
        // both excluded by check_mean.
        let d = Poisson::new(mean).expect("validated Poisson mean");
        d.sample(&mut self.rng) as u64
    }

    fn poisson_gaussian_unchecked(&mut self, mean: f64) -> u64 {
        let x = mean + mean.sqrt() * self.standard_normal();
        x.round().max(0.0) as u64
    }

    /// Binomial count of `n` trials with success probability `p`.
    pub fn binomial(&mut self, n: u64, p: f64) -> Result<u64> {
        check_probability(p)?;
        if p == 0.0 || n == 0 {
            return Ok(0);
        }
        if p == 1.0 {
            return Ok(n);
        }
        let nf = n as f64;
        let tail = (nf * p).min(nf * (1.0 - p));
        if n > self.config.binomial_gaussian_above && tail >= BINOMIAL_GAUSSIAN_MIN_TAIL {
            let sd = (nf * p * (1.0 - p)).sqrt();
            let x = (nf * p + sd * self.standard_normal()).round();
            return Ok(x.clamp(0.0, nf) as u64);
        }
        let d = Binomial::new(n, p).expect("validated binomial parameters");
        Ok(d.sample(&mut self.rng))
    }

    /// Bose-Einstein (geometric) occupation of a single thermal mode with the
    /// given mean: `P(k) = m^k / (1 + m)^(k+1)`.
    pub fn bose_einstein(&mut self, mean: f64) -> Result<u64> {
        check_mean(mean)?;
        if mean == 0.0 {
            return Ok(0);
        }
        let d = Geometric::new(1.0 / (1.0 + mean))
            .map_err(|e| Error::arg(format!("geometric parameter: {e}")))?;
        Ok(d.sample(&mut self.rng))
    }
}

fn check_mean(mean: f64) -> Result<()> {
    if !mean.is_finite() || mean < 0.0 {
        return Err(Error::arg(format!(
            "mean must be finite and >= 0, got {mean}"
        )));
    }
    Ok(())
}

fn check_probability(p: f64) -> Result<()> {
    if !(0.0..=1.0).contains(&p) {
        return Err(Error::arg(format!(
            "probability must lie in [0, 1], got {p}"
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn mean_var(xs: &[f64]) -> (f64, f64) {
        let n = xs.len() as f64;
        let m = xs.iter().sum::<f64>() / n;
        let v = xs.iter().map(|x| (x - m) * (x - m)).sum::<f64>() / (n - 1.0);
        (m, v)
    }

    #[test]
    fn same_descriptor_same_sequence() {
        let s = RngStream::new(42).child(3).child(7);
        let mut a = s.sampler();
        let mut b = s.clone().sampler();
        for _ in 0..1000 {
            assert_eq!(a.uniform().to_bits(), b.uniform().to_bits());
        }
    }

    #[test]
    fn path_and_seed_both_matter() {
        let first = |s: &RngStream| s.sampler().uniform();
        let base = RngStream::new(1);
        assert_ne!(first(&base.child(0)), first(&base.child(1)));
        assert_ne!(
            first(&RngStream::new(1).child(0)),
            first(&RngStream::new(2).child(0))
        );
        // [0, 1] and [1, 0] are different streams
        assert_ne!(
            first(&base.child(0).child(1)),
            first(&base.child(1).child(0))
        );
    }

    #[test]
    fn distinct_streams_uncorrelated() {
        let n = 1_000_000;
        let mut a = RngStream::new(9).child(0).sampler();
        let mut b = RngStream::new(9).child(1).sampler();
        let xs: Vec<f64> = (0..n).map(|_| a.standard_normal()).collect();
        let ys: Vec<f64> = (0..n).map(|_| b.standard_normal()).collect();
        let (mx, vx) = mean_var(&xs);
        let (my, vy) = mean_var(&ys);
        let cov = xs
            .iter()
            .zip(&ys)
            .map(|(x, y)| (x - mx) * (y - my))
            .sum::<f64>()
            / n as f64;
        let r = cov / (vx * vy).sqrt();
        assert!(r.abs() < 4.0 / (n as f64).sqrt(), "r = {r}");
    }

    #[test]
    fn phasor_moments() {
        let n = 1_000_000;
        let mut s = RngStream::new(5).sampler();
        let (mut sre, mut sim, mut spow) = (0.0, 0.0, 0.0);
        for _ in 0..n {
            let z = s.gaussian_phasor();
            sre += z.re;
            sim += z.im;
            spow += z.norm_sqr();
        }
        let nf = n as f64;
        // per-quadrature sd is 1/sqrt(2) < 1, so 5/sqrt(N) is conservative
        assert!((sre / nf).abs() < 5.0 / nf.sqrt());
        assert!((sim / nf).abs() < 5.0 / nf.sqrt());
        assert!((spow / nf - 1.0).abs() < 0.005, "{}", spow / nf);
    }

    #[test]
    fn phasor_amplitude_is_rayleigh() {
        // Kolmogorov-Smirnov against F(a) = 1 - exp(-a^2)
        let n = 1_000_000;
        let mut s = RngStream::new(6).sampler();
        let mut amps: Vec<f64> = (0..n).map(|_| s.gaussian_phasor().norm()).collect();
        amps.sort_by(f64::total_cmp);
        let nf = n as f64;
        let mut d: f64 = 0.0;
        for (i, a) in amps.iter().enumerate() {
            let cdf = 1.0 - (-a * a).exp();
            d = d
                .max((cdf - i as f64 / nf).abs())
                .max(((i + 1) as f64 / nf - cdf).abs());
        }
        assert!(d < 0.002, "KS = {d}");
    }

    #[test]
    fn poisson_zero_mean_and_negative() {
        let mut s = RngStream::new(1).sampler();
        for _ in 0..100 {
            assert_eq!(s.poisson(0.0).unwrap(), 0);
        }
        assert!(matches!(s.poisson(-1.0), Err(Error::InvalidArgument(_))));
        assert!(s.poisson(f64::NAN).is_err());
    }

    #[test]
    fn poisson_fano_unity() {
        let mut s = RngStream::new(2).sampler();
        let xs: Vec<f64> = (0..1_000_000)
            .map(|_| s.poisson(100.0).unwrap() as f64)
            .collect();
        let (m, v) = mean_var(&xs);
        let f = v / m;
        assert!((0.99..=1.01).contains(&f), "fano {f}");
    }

    #[test]
    fn poisson_gaussian_branch_matches_exact() {
        let mean = 1e4;
        let n = 2_000_000;
        let mut s = RngStream::new(3).sampler();
        let exact: Vec<f64> = (0..n)
            .map(|_| s.poisson_exact(mean).unwrap() as f64)
            .collect();
        let approx: Vec<f64> = (0..n)
            .map(|_| s.poisson_gaussian(mean).unwrap() as f64)
            .collect();
        let (me, ve) = mean_var(&exact);
        let (ma, va) = mean_var(&approx);
        assert!((me / ma - 1.0).abs() < 0.005);
        assert!((ve / va - 1.0).abs() < 0.005, "{ve} vs {va}");
        // and the high-flux default path is the Gaussian one
        let mut s = RngStream::new(4).sampler();
        let big: Vec<f64> = (0..n).map(|_| s.poisson(1e6).unwrap() as f64).collect();
        let (mb, vb) = mean_var(&big);
        assert!((mb / 1e6 - 1.0).abs() < 1e-4);
        assert!((vb / 1e6 - 1.0).abs() < 0.01);
    }

    #[test]
    fn binomial_edges_and_errors() {
        let mut s = RngStream::new(1).sampler();
        assert_eq!(s.binomial(1234, 1.0).unwrap(), 1234);
        assert_eq!(s.binomial(1234, 0.0).unwrap(), 0);
        assert_eq!(s.binomial(0, 0.3).unwrap(), 0);
        assert!(s.binomial(10, 1.5).is_err());
        assert!(s.binomial(10, -0.1).is_err());
    }

    #[test]
    fn binomial_variance() {
        let mut s = RngStream::new(8).sampler();
        let xs: Vec<f64> = (0..100_000)
            .map(|_| s.binomial(1000, 0.75).unwrap() as f64)
            .collect();
        let (m, v) = mean_var(&xs);
        assert!((m - 750.0).abs() < 0.5);
        assert!((v / 187.5 - 1.0).abs() < 0.03, "var {v}");
    }

    #[test]
    fn binomial_gaussian_branch_matches_exact() {
        let (n, p) = (40_000u64, 0.3);
        let mut approx = RngStream::new(10).sampler();
        let mut exact = RngStream::new(11).sampler_with(SamplerConfig::exact());
        let k = 200_000;
        let a: Vec<f64> = (0..k)
            .map(|_| approx.binomial(n, p).unwrap() as f64)
            .collect();
        let e: Vec<f64> = (0..k)
            .map(|_| exact.binomial(n, p).unwrap() as f64)
            .collect();
        let (ma, va) = mean_var(&a);
        let (me, ve) = mean_var(&e);
        assert!((ma / me - 1.0).abs() < 0.005);
        assert!((va / ve - 1.0).abs() < 0.02, "{va} vs {ve}");
    }

    #[test]
    fn bose_einstein_variance() {
        for (mean, want) in [(100.0, 10100.0), (1.0, 2.0)] {
            let mut s = RngStream::new(12).sampler();
            let xs: Vec<f64> = (0..1_000_000)
                .map(|_| s.bose_einstein(mean).unwrap() as f64)
                .collect();
            let (_, v) = mean_var(&xs);
            assert!((v / want - 1.0).abs() < 0.02, "mean {mean}: var {v}");
        }
    }
}
