//! Per-trajectory random streams and Poisson variates.
//!
//! # Stream derivation
//!
//! Stream `(master_seed, stream_id)` is the ChaCha8 generator keyed by
//! `rand_chacha::ChaCha8Rng::seed_from_u64(master_seed)` (the seed is
//! expanded to 32 key bytes by `rand_core`'s PCG32 routine) with its 64-bit
//! stream word set to `stream_id` and the word position at zero. Different
//! ids select disjoint keystreams of the same key; nothing is shared
//! between streams, so trajectories can run in any order on any thread.
//!
//! Uniforms are `(next_u64() >> 11) * 2^-53`, in `[0, 1)`.
//!
//! # Poisson draw pattern
//!
//! * mean `0`: returns 0, consumes nothing.
//! * mean `< 10`: sequential-search inversion, exactly one uniform.
//! * mean `>= 10`: Hörmann's transformed rejection with squeeze (PTRS),
//!   two uniforms per attempt `(U, V)`, in that order.

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Means below this use inversion; at or above, transformed rejection.
pub const INVERSION_CUTOFF: f64 = 10.0;

#[derive(Debug, Clone)]
pub struct RngStream {
    master_seed: u64,
    stream_id: u64,
    inner: ChaCha8Rng,
}

impl RngStream {
    pub fn new(master_seed: u64, stream_id: u64) -> Self {
        let mut inner = ChaCha8Rng::seed_from_u64(master_seed);
        inner.set_stream(stream_id);
        inner.set_word_pos(0);
        Self {
            master_seed,
            stream_id,
            inner,
        }
    }

    pub fn master_seed(&self) -> u64 {
        self.master_seed
    }

    pub fn stream_id(&self) -> u64 {
        self.stream_id
    }

    #[inline]
    pub fn next_u64(&mut self) -> u64 {
        self.inner.next_u64()
    }

    /// Uniform in `[0, 1)` with 53 random bits.
    #[inline]
    pub fn uniform(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Exponential waiting time with the given rate (> 0).
    #[inline]
    pub fn exponential(&mut self, rate: f64) -> f64 {
        // 1 - U lies in (0, 1]
        -(1.0 - self.uniform()).ln() / rate
    }

    /// Poisson variate; `mean` must be finite and nonnegative.
    pub fn poisson(&mut self, mean: f64) -> Result<u64> {
        if !(mean.is_finite() && mean >= 0.0) {
            return Err(Error::usage(format!(
                "Poisson mean must be finite and nonnegative, got {mean}"
            )));
        }
        Ok(self.poisson_unchecked(mean))
    }

    #[inline]
    pub(crate) fn poisson_unchecked(&mut self, mean: f64) -> u64 {
        debug_assert!(mean.is_finite() && mean >= 0.0);
        if mean == 0.0 {
            0
        } else if mean < INVERSION_CUTOFF {
            self.poisson_inversion(mean)
        } else {
            self.poisson_ptrs(mean)
        }
    }

    fn poisson_inversion(&mut self, mean: f64) -> u64 {
        let u = self.uniform();
        let mut k = 0u64;
        let mut p = (-mean).exp();
        let mut cdf = p;
        while u > cdf {
            k += 1;
            p *= mean / k as f64;
            if p == 0.0 {
                // u landed in the rounding gap at the far tail
                break;
            }
            cdf += p;
        }
        k
    }

    /// W. Hörmann, "The transformed rejection method for generating Poisson
    /// random variables", Insurance: Mathematics and Economics 12 (1993).
    fn poisson_ptrs(&mut self, mean: f64) -> u64 {
        let slam = mean.sqrt();
        let loglam = mean.ln();
        let b = 0.931 + 2.53 * slam;
        let a = -0.059 + 0.02483 * b;
        let inv_alpha = 1.1239 + 1.1328 / (b - 3.4);
        let vr = 0.9277 - 3.6224 / (b - 2.0);
        loop {
            let u = self.uniform() - 0.5;
            let v = self.uniform();
            let us = 0.5 - u.abs();
            let k = ((2.0 * a / us + b) * u + mean + 0.43).floor();
            if us >= 0.07 && v <= vr {
                return k as u64;
            }
            if k < 0.0 || (us < 0.013 && v > us) {
                continue;
            }
            let lhs = v.ln() + inv_alpha.ln() - (a / (us * us) + b).ln();
            let rhs = -mean + k * loglam - libm::lgamma(k + 1.0);
            if lhs <= rhs {
                return k as u64;
            }
        }
    }
}

/// Draws one Poisson variate from `rng`.
pub fn sample_poisson(rng: &mut RngStream, mean: f64) -> Result<u64> {
    rng.poisson(mean)
}
