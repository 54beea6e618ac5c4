//! Seeded Monte Carlo over independent standard Gaussians.
//!
//! Sample `i` is a pure function of `(seed, i)`: a ChaCha8 stream keyed by
//! the seed is positioned at word `i * words_per_sample`, and consecutive
//! pairs of 53-bit uniforms go through Box-Muller,
//!
//! ```text
//! u1 = 1 - a·2⁻⁵³ ∈ (0, 1],  u2 = b·2⁻⁵³ ∈ [0, 1)
//! z1 = √(-2 ln u1) cos(2π u2),  z2 = √(-2 ln u1) sin(2π u2)
//! ```
//!
//! Samples are accumulated in fixed blocks of [`BLOCK_SIZE`] indices and the
//! block summaries are merged in index order, so every estimate is
//! bit-identical for any worker count.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const BLOCK_SIZE: u64 = 4096;
pub const MIN_SAMPLES: usize = 1000;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct McConfig {
    pub n_samples: usize,
    pub seed: u64,
    pub confidence_multiplier: f64,
    pub n_workers: usize,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            n_samples: 100_000,
            seed: 42,
            confidence_multiplier: 4.0,
            n_workers: 1,
        }
    }
}

impl McConfig {
    pub fn new(n_samples: usize, seed: u64) -> Self {
        Self {
            n_samples,
            seed,
            ..Self::default()
        }
    }

    pub fn with_workers(mut self, n_workers: usize) -> Self {
        self.n_workers = n_workers;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_samples < MIN_SAMPLES {
            return Err(Error::InvalidConfig(format!(
                "n_samples must be at least {MIN_SAMPLES}, got {}",
                self.n_samples
            )));
        }
        if self.n_workers == 0 {
            return Err(Error::InvalidConfig("n_workers must be positive".into()));
        }
        if !(self.confidence_multiplier > 0.0 && self.confidence_multiplier.is_finite()) {
            return Err(Error::InvalidConfig(
                "confidence_multiplier must be positive and finite".into(),
            ));
        }
        Ok(())
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub mean: f64,
    pub std_error: f64,
    pub n_used: u64,
    pub n_rejected: u64,
}

/// Random-access source of standard Gaussian vectors in dimension `d`.
#[derive(Clone, Copy, Debug)]
pub struct GaussianSampler {
    seed: u64,
    dim: usize,
}

impl GaussianSampler {
    pub fn new(seed: u64, dim: usize) -> Self {
        Self { seed, dim }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    fn words_per_sample(&self) -> u128 {
        // two u64 (four u32 words) per Box-Muller pair
        4 * self.dim.div_ceil(2) as u128
    }

    fn rng_at(&self, index: u64) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_word_pos(index as u128 * self.words_per_sample());
        rng
    }

    fn fill_next(&self, rng: &mut ChaCha8Rng, out: &mut [f64]) {
        const SCALE: f64 = 1.0 / (1u64 << 53) as f64;
        let mut k = 0;
        while k < self.dim {
            let u1 = 1.0 - (rng.next_u64() >> 11) as f64 * SCALE;
            let u2 = (rng.next_u64() >> 11) as f64 * SCALE;
            let r = (-2.0 * u1.ln()).sqrt();
            let (s, c) = (std::f64::consts::TAU * u2).sin_cos();
            out[k] = r * c;
            if k + 1 < self.dim {
                out[k + 1] = r * s;
            }
            k += 2;
        }
    }

    /// Sample number `index`.
    pub fn sample(&self, index: u64, out: &mut [f64]) {
        let mut rng = self.rng_at(index);
        self.fill_next(&mut rng, out);
    }

    /// Visits samples `start..start + count` in order.
    pub fn for_each_in(&self, start: u64, count: u64, mut f: impl FnMut(&[f64])) {
        let mut rng = self.rng_at(start);
        let mut buf = vec![0.0; self.dim];
        for _ in 0..count {
            self.fill_next(&mut rng, &mut buf);
            f(&buf);
        }
    }
}

/// The first `cfg.n_samples` standard Gaussian vectors of the configured seed.
pub fn sample_standard_gaussians(cfg: &McConfig, d: usize) -> impl Iterator<Item = Vec<f64>> {
    let sampler = GaussianSampler::new(cfg.seed, d);
    let mut rng = sampler.rng_at(0);
    (0..cfg.n_samples).map(move |_| {
        let mut v = vec![0.0; d];
        sampler.fill_next(&mut rng, &mut v);
        v
    })
}

/// Running count, mean and sum of squared deviations.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct Moments {
    pub n: u64,
    pub mean: f64,
    pub m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.n += 1;
        let delta = x - self.mean;
        self.mean += delta / self.n as f64;
        self.m2 += delta * (x - self.mean);
    }

    pub fn merge(&self, other: &Self) -> Self {
        if self.n == 0 {
            return *other;
        }
        if other.n == 0 {
            return *self;
        }
        let n = self.n + other.n;
        let delta = other.mean - self.mean;
        let mean = self.mean + delta * other.n as f64 / n as f64;
        let m2 = self.m2 + other.m2 + delta * delta * (self.n as f64 * other.n as f64) / n as f64;
        Self { n, mean, m2 }
    }

    pub fn variance(&self) -> f64 {
        if self.n < 2 {
            0.0
        } else {
            self.m2 / (self.n - 1) as f64
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.n == 0 {
            0.0
        } else {
            (self.variance() / self.n as f64).sqrt()
        }
    }
}

#[derive(Clone, Debug)]
struct BlockSummary {
    moments: Vec<Moments>,
    rejected: u64,
}

/// Estimates `E[g_k(ξ)]` for several outputs in one pass.
///
/// `eval` fills the output slice and returns `false` to reject the sample.
/// A rejected sample is excluded from every output.
pub fn estimate_many<F>(d: usize, n_outputs: usize, cfg: &McConfig, eval: F) -> Result<Vec<EstimateReport>>
where
    F: Fn(&[f64], &mut [f64]) -> bool + Sync,
{
    cfg.validate()?;
    let sampler = GaussianSampler::new(cfg.seed, d);
    let total = cfg.n_samples as u64;
    let n_blocks = total.div_ceil(BLOCK_SIZE);
    let run_block = |b: u64| {
        let start = b * BLOCK_SIZE;
        let count = BLOCK_SIZE.min(total - start);
        let mut moments = vec![Moments::default(); n_outputs];
        let mut out = vec![0.0; n_outputs];
        let mut rejected = 0;
        sampler.for_each_in(start, count, |x| {
            if eval(x, &mut out) {
                for (m, &v) in moments.iter_mut().zip(&out) {
                    m.push(v);
                }
            } else {
                rejected += 1;
            }
        });
        BlockSummary { moments, rejected }
    };
    let blocks: Vec<BlockSummary> = if cfg.n_workers == 1 {
        (0..n_blocks).map(run_block).collect()
    } else {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.n_workers)
            .build()
            .map_err(|e| Error::InvalidConfig(e.to_string()))?;
        pool.install(|| (0..n_blocks).into_par_iter().map(run_block).collect())
    };
    let mut acc = vec![Moments::default(); n_outputs];
    let mut rejected = 0;
    for b in &blocks {
        for (a, m) in acc.iter_mut().zip(&b.moments) {
            *a = a.merge(m);
        }
        rejected += b.rejected;
    }
    if rejected == total {
        return Err(Error::AllSamplesRejected(cfg.n_samples));
    }
    Ok(acc
        .iter()
        .map(|m| EstimateReport {
            mean: m.mean,
            std_error: m.std_error(),
            n_used: m.n,
            n_rejected: rejected,
        })
        .collect())
}

/// `E[eval(ξ)]`; `None` rejects the sample.
pub fn estimate_expectation_rejecting<F>(d: usize, cfg: &McConfig, eval: F) -> Result<EstimateReport>
where
    F: Fn(&[f64]) -> Option<f64> + Sync,
{
    let mut r = estimate_many(d, 1, cfg, |x, out| match eval(x) {
        Some(v) => {
            out[0] = v;
            true
        }
        None => false,
    })?;
    Ok(r.remove(0))
}

/// `E[eval(ξ)]` over `d` independent standard Gaussians.
pub fn estimate_expectation<F>(d: usize, cfg: &McConfig, eval: F) -> Result<EstimateReport>
where
    F: Fn(&[f64]) -> f64 + Sync,
{
    estimate_expectation_rejecting(d, cfg, |x| Some(eval(x)))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ZTest {
    pub pass: bool,
    pub z: f64,
}

/// Passes when `|exact - mean| ≤ k·SE`, or when both the gap and the standard
/// error are below `1e-12`.
pub fn z_test_compare(exact: f64, est: &EstimateReport, cfg: &McConfig) -> ZTest {
    let gap = (exact - est.mean).abs();
    if gap < 1e-12 && est.std_error < 1e-12 {
        return ZTest { pass: true, z: 0.0 };
    }
    let z = if est.std_error > 0.0 {
        gap / est.std_error
    } else {
        f64::INFINITY
    };
    ZTest {
        pass: gap <= cfg.confidence_multiplier * est.std_error,
        z,
    }
}
