//! Sample streams (seeded uniform and Halton), free-space rejection
//! sampling, and a brute-force dispersion meter.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::{distance, AaBox, Config, Scenario};

/// SplitMix64 finalizer.
pub fn mix64(mut z: u64) -> u64 {
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

/// Per-trial seed: `mix64(base_seed + (trial_index + 1) * 0x9E3779B97F4A7C15)`.
pub fn derive_seed(base_seed: u64, trial_index: u64) -> u64 {
    mix64(base_seed.wrapping_add(trial_index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15)))
}

/// The first `d` primes.
pub fn first_primes(d: usize) -> Vec<u64> {
    let mut primes = Vec::with_capacity(d);
    let mut candidate = 2u64;
    while primes.len() < d {
        if primes
            .iter()
            .take_while(|p| *p * *p <= candidate)
            .all(|p| !candidate.is_multiple_of(*p))
        {
            primes.push(candidate);
        }
        candidate += 1;
    }
    primes
}

/// Van der Corput radical inverse of `index` in `base`.
pub fn radical_inverse(base: u64, mut index: u64) -> f64 {
    let inv = 1.0 / base as f64;
    let mut f = inv;
    let mut r = 0.0;
    while index > 0 {
        r += (index % base) as f64 * f;
        index /= base;
        f *= inv;
    }
    r
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase", tag = "kind")]
pub enum StreamKind {
    Uniform { seed: u64 },
    Halton { bases: Vec<u64>, start_index: u64 },
}

/// A stateful, single-owner source of configurations.
///
/// Besides configuration samples, every stream carries an auxiliary
/// generator for the other random choices a planner makes (goal bias,
/// controls, durations), so a whole run is a pure function of the stream.
#[derive(Clone, Debug)]
pub struct SampleStream {
    dim: usize,
    kind: StreamKind,
    rng: ChaCha8Rng,
    index: u64,
    aux: ChaCha8Rng,
}

const AUX_SALT: u64 = 0xA076_1D64_78BD_642F;

impl SampleStream {
    pub fn uniform(dim: usize, seed: u64) -> Self {
        SampleStream {
            dim,
            kind: StreamKind::Uniform { seed },
            rng: ChaCha8Rng::seed_from_u64(seed),
            index: 0,
            aux: ChaCha8Rng::seed_from_u64(mix64(seed ^ AUX_SALT)),
        }
    }

    /// Halton sequence over the first `dim` primes, starting at index 1.
    pub fn halton(dim: usize) -> Self {
        Self::halton_from(dim, 1)
    }

    pub fn halton_from(dim: usize, start_index: u64) -> Self {
        let start_index = start_index.max(1);
        SampleStream {
            dim,
            kind: StreamKind::Halton {
                bases: first_primes(dim),
                start_index,
            },
            rng: ChaCha8Rng::seed_from_u64(0),
            index: start_index,
            aux: ChaCha8Rng::seed_from_u64(AUX_SALT),
        }
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn kind(&self) -> &StreamKind {
        &self.kind
    }

    pub fn is_deterministic(&self) -> bool {
        matches!(self.kind, StreamKind::Halton { .. })
    }

    /// Next point of the stream scaled into `domain`.
    pub fn next_sample(&mut self, domain: &AaBox) -> Config {
        assert_eq!(domain.dim(), self.dim, "stream dimension must match domain");
        let unit: Vec<f64> = match &self.kind {
            StreamKind::Uniform { .. } => (0..self.dim).map(|_| self.rng.random::<f64>()).collect(),
            StreamKind::Halton { bases, .. } => {
                let i = self.index;
                self.index += 1;
                bases.iter().map(|b| radical_inverse(*b, i)).collect()
            }
        };
        Config(
            unit.iter()
                .zip(domain.min.iter().zip(domain.max.iter()))
                .map(|(u, (lo, hi))| lo + u * (hi - lo))
                .collect(),
        )
    }

    /// Auxiliary generator for non-configuration random choices.
    pub fn aux(&mut self) -> &mut ChaCha8Rng {
        &mut self.aux
    }

    /// Uniform draw in `[lo, hi]` from the auxiliary generator.
    pub fn aux_uniform(&mut self, lo: f64, hi: f64) -> f64 {
        if hi <= lo {
            return lo;
        }
        lo + self.aux.random::<f64>() * (hi - lo)
    }
}

/// First sample of the stream that is valid in `scenario`.
pub fn sample_free(stream: &mut SampleStream, scenario: &Scenario, max_attempts: usize) -> Result<Config> {
    if max_attempts == 0 {
        return Err(Error::usage("max_attempts must be at least 1"));
    }
    for _ in 0..max_attempts {
        let q = stream.next_sample(&scenario.domain);
        if scenario.is_free(&q) {
            return Ok(q);
        }
    }
    Err(Error::Saturation { attempts: max_attempts })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DispersionReport {
    pub n: usize,
    pub dispersion: f64,
    pub grid_resolution: f64,
}

impl DispersionReport {
    pub fn to_csv_line(&self) -> String {
        format!("{},{},{}", self.n, self.dispersion, self.grid_resolution)
    }
}

/// Largest distance from a grid point of `domain` (spacing `<= grid_resolution`)
/// to its nearest sample.
pub fn measure_dispersion(samples: &[Config], domain: &AaBox, grid_resolution: f64) -> Result<DispersionReport> {
    if samples.is_empty() {
        return Err(Error::usage("dispersion needs at least one sample"));
    }
    if !(grid_resolution > 0.0) {
        return Err(Error::usage("grid_resolution must be positive"));
    }
    let d = domain.dim();
    let counts: Vec<usize> = (0..d)
        .map(|i| (((domain.max[i] - domain.min[i]) / grid_resolution).ceil() as usize).max(1))
        .collect();
    let mut idx = vec![0usize; d];
    let mut g = vec![0.0; d];
    let mut worst = 0.0f64;
    loop {
        for i in 0..d {
            let t = idx[i] as f64 / counts[i] as f64;
            g[i] = domain.min[i] + t * (domain.max[i] - domain.min[i]);
        }
        let nearest = samples.iter().map(|s| distance(&g, s)).fold(f64::INFINITY, f64::min);
        worst = worst.max(nearest);

        // odometer increment over the grid
        let mut axis = 0;
        loop {
            if axis == d {
                return Ok(DispersionReport {
                    n: samples.len(),
                    dispersion: worst,
                    grid_resolution,
                });
            }
            idx[axis] += 1;
            if idx[axis] <= counts[axis] {
                break;
            }
            idx[axis] = 0;
            axis += 1;
        }
    }
}
