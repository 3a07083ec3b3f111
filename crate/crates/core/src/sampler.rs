//! Chaos game: random iteration of the maps, and Monte Carlo integrals of `ν`.
//!
//! Randomness comes from ChaCha20 ([`RNG_ALGORITHM`]): the 32-byte key is the
//! seed as 8 little-endian bytes followed by 24 zero bytes, stream 0, and
//! outputs are consumed as little-endian `u64` words. A word `w` becomes the
//! double `(w >> 11) · 2⁻⁵³` in `[0, 1)`; map `i` is chosen as the first index
//! whose cumulative probability exceeds that value.

use rand_chacha::ChaCha20Rng;
use rand_core::{RngCore, SeedableRng};
use serde::Serialize;

use crate::error::{Error, Result};
use crate::ifs::{IfsModel, Support};
use crate::poly::Polynomial;
use crate::stats::mean;

pub const RNG_ALGORITHM: &str = "chacha20/key=seed-u64-le+24-zero-bytes/stream=0/u64-le/53-bit";
pub const DEFAULT_BURN_IN: usize = 64;
pub const BATCHES: usize = 32;

pub fn seeded_rng(seed: u64) -> ChaCha20Rng {
    let mut key = [0u8; 32];
    key[..8].copy_from_slice(&seed.to_le_bytes());
    ChaCha20Rng::from_seed(key)
}

/// Top 53 bits of `w` as a double in `[0, 1)`.
pub fn unit_f64(w: u64) -> f64 {
    (w >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SampleConfig {
    pub seed: u64,
    /// Number of emitted points, not counting the burn-in.
    pub count: usize,
    pub burn_in: usize,
    pub bins: usize,
}

impl SampleConfig {
    pub fn new(seed: u64, count: usize) -> Self {
        SampleConfig {
            seed,
            count,
            burn_in: DEFAULT_BURN_IN,
            bins: 2000,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.count <= self.burn_in {
            return Err(Error::InvalidConfig(format!(
                "count {} must exceed burn-in {}",
                self.count, self.burn_in
            )));
        }
        if self.bins == 0 {
            return Err(Error::InvalidConfig("bins must be at least 1".into()));
        }
        Ok(())
    }
}

/// Deterministic stream of chaos-game points.
#[derive(Debug, Clone)]
pub struct ChaosGame {
    maps: Vec<(f64, f64)>,
    cumulative: Vec<f64>,
    rng: ChaCha20Rng,
    x: f64,
    remaining: usize,
}

impl ChaosGame {
    fn step(&mut self) -> f64 {
        let u = unit_f64(self.rng.next_u64());
        let last = self.maps.len() - 1;
        let i = self.cumulative.iter().position(|c| u < *c).unwrap_or(last);
        let (t, v) = self.maps[i];
        self.x = t * self.x + v;
        self.x
    }
}

impl Iterator for ChaosGame {
    type Item = f64;

    fn next(&mut self) -> Option<f64> {
        if self.remaining == 0 {
            return None;
        }
        self.remaining -= 1;
        Some(self.step())
    }

    fn size_hint(&self) -> (usize, Option<usize>) {
        (self.remaining, Some(self.remaining))
    }
}

impl ExactSizeIterator for ChaosGame {}

/// Starts at the support midpoint, discards `burn_in` points, then yields `count`.
pub fn chaos_game(model: &IfsModel<f64>, cfg: &SampleConfig) -> Result<ChaosGame> {
    cfg.validate()?;
    let mut acc = 0.0;
    let cumulative = model
        .probs()
        .iter()
        .map(|p| {
            acc += p;
            acc
        })
        .collect();
    let mut game = ChaosGame {
        maps: model.maps().iter().map(|m| (m.t, m.v)).collect(),
        cumulative,
        rng: seeded_rng(cfg.seed),
        x: model.support().midpoint(),
        remaining: cfg.count,
    };
    for _ in 0..cfg.burn_in {
        game.step();
    }
    Ok(game)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct Estimate {
    pub mean: f64,
    /// Batch-means standard error over [`BATCHES`] consecutive batches.
    pub std_error: f64,
}

/// Batch-means estimate of `ν(f)`.
pub fn estimate_nu(model: &IfsModel<f64>, f: &Polynomial<f64>, cfg: &SampleConfig) -> Result<Estimate> {
    let values: Vec<f64> = chaos_game(model, cfg)?.map(|x| f.eval(&x)).collect();
    Ok(batch_means(&values))
}

/// Estimates `ν(f_j)` for several functions from one shared stream.
pub fn estimate_nu_many(
    model: &IfsModel<f64>,
    fs: &[Polynomial<f64>],
    cfg: &SampleConfig,
) -> Result<Vec<Estimate>> {
    let points: Vec<f64> = chaos_game(model, cfg)?.collect();
    Ok(fs
        .iter()
        .map(|f| batch_means(&f.eval_many(&points)))
        .collect())
}

pub fn batch_means(values: &[f64]) -> Estimate {
    let n = values.len();
    let batches = BATCHES.min(n.max(1));
    let means: Vec<f64> = (0..batches)
        .map(|b| mean(&values[b * n / batches..(b + 1) * n / batches]))
        .collect();
    let grand = mean(values);
    let spread = if batches > 1 {
        let var = means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / (batches - 1) as f64;
        (var / batches as f64).sqrt()
    } else {
        0.0
    };
    Estimate {
        mean: grand,
        std_error: spread,
    }
}

/// Equal-width bins over the support, scaled to integrate to one. Points
/// outside the hull (float rounding) go to the edge bins.
pub fn histogram(points: impl IntoIterator<Item = f64>, support: &Support<f64>, bins: usize) -> Vec<(f64, f64)> {
    assert!(bins >= 1, "bins must be at least 1");
    let (lo, hi) = (support.lo, support.hi);
    let width = (hi - lo) / bins as f64;
    let mut counts = vec![0usize; bins];
    let mut total = 0usize;
    for x in points {
        let idx = ((x - lo) / width).floor();
        let idx = if idx.is_nan() { 0 } else { (idx.max(0.0) as usize).min(bins - 1) };
        counts[idx] += 1;
        total += 1;
    }
    let norm = if total == 0 { 0.0 } else { 1.0 / (total as f64 * width) };
    counts
        .iter()
        .enumerate()
        .map(|(i, c)| (lo + width * (i as f64 + 0.5), *c as f64 * norm))
        .collect()
}
