//! Seeded, counter-based random number generation.
//!
//! Every sampler in this crate draws from [`StreamRng`], a thin wrapper over
//! ChaCha8 keyed by a 64-bit seed. ChaCha is counter-based, so a `(seed,
//! stream)` pair addresses an independent substream without any sequential
//! dependence between streams. Unit-cell samplers (Brownian bridges, grid
//! increments) take one substream per cell, which makes parallel sampling
//! order-independent: the values drawn for cell `j` do not depend on how many
//! cells were sampled before it.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// A deterministic RNG addressed by `(seed, stream)`.
pub struct StreamRng {
    inner: ChaCha8Rng,
    spare: Option<f64>,
}

impl StreamRng {
    /// Root stream for a seed.
    pub fn new(seed: u64) -> Self {
        Self::with_stream(seed, 0)
    }

    /// Substream `stream` of `seed`. Distinct streams are independent.
    pub fn with_stream(seed: u64, stream: u64) -> Self {
        let mut key = [0u8; 32];
        key[..8].copy_from_slice(&seed.to_le_bytes());
        // Domain separation so that seed k, stream 0 differs from seed 0, stream k.
        key[8..16].copy_from_slice(&0x9e37_79b9_7f4a_7c15u64.to_le_bytes());
        let mut inner = ChaCha8Rng::from_seed(key);
        inner.set_stream(stream);
        StreamRng { inner, spare: None }
    }

    /// Substream addressed by a signed index (unit cells live on all of ℤ).
    pub fn for_cell(seed: u64, cell: i64) -> Self {
        // Offset so negative cells get streams distinct from the root stream 0.
        Self::with_stream(seed, (cell as u64) ^ 0x8000_0000_0000_0000)
    }

    pub fn u64(&mut self) -> u64 {
        self.inner.gen()
    }

    /// Uniform in [0, 1), 53 random bits.
    pub fn f64(&mut self) -> f64 {
        (self.inner.gen::<u64>() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }

    /// Uniform in {0, .., n-1}, exact (no modulo bias).
    pub fn below(&mut self, n: u64) -> u64 {
        self.inner.gen_range(0..n)
    }

    /// Fair coin.
    pub fn coin(&mut self) -> bool {
        self.inner.gen::<u64>() & 1 == 1
    }

    /// Geometric on {0, 1, 2, ...} with success probability 1/2, sampled
    /// exactly from the bit pattern of uniform words.
    pub fn geometric_half(&mut self) -> u64 {
        let mut total = 0u64;
        loop {
            let w = self.inner.gen::<u64>();
            let ones = w.trailing_zeros() as u64;
            total += ones;
            if ones < 64 {
                return total;
            }
        }
    }

    /// Standard normal via the Marsaglia polar method.
    pub fn normal(&mut self) -> f64 {
        if let Some(z) = self.spare.take() {
            return z;
        }
        loop {
            let u = 2.0 * self.f64() - 1.0;
            let v = 2.0 * self.f64() - 1.0;
            let s = u * u + v * v;
            if s > 0.0 && s < 1.0 {
                let f = (-2.0 * s.ln() / s).sqrt();
                self.spare = Some(v * f);
                return u * f;
            }
        }
    }

    /// Correlated standard-normal pair with correlation `rho`.
    pub fn normal_pair(&mut self, rho: f64) -> (f64, f64) {
        let z1 = self.normal();
        let z2 = self.normal();
        (z1, rho * z1 + (1.0 - rho * rho).sqrt() * z2)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic_streams() {
        let a: Vec<u64> = (0..8).map(|_| StreamRng::new(7).u64()).collect();
        assert!(a.iter().all(|&x| x == a[0]));
        let mut r1 = StreamRng::with_stream(7, 1);
        let mut r2 = StreamRng::with_stream(7, 2);
        assert_ne!(r1.u64(), r2.u64());
    }

    #[test]
    fn geometric_half_moments() {
        let mut r = StreamRng::new(11);
        let n = 200_000;
        let mean: f64 = (0..n).map(|_| r.geometric_half() as f64).sum::<f64>() / n as f64;
        // E = 1, Var = 2; 5 sigma band.
        assert!((mean - 1.0).abs() < 5.0 * (2.0f64 / n as f64).sqrt());
    }

    #[test]
    fn normal_moments() {
        let mut r = StreamRng::new(3);
        let n = 200_000;
        let (mut s, mut s2) = (0.0, 0.0);
        for _ in 0..n {
            let z = r.normal();
            s += z;
            s2 += z * z;
        }
        assert!((s / n as f64).abs() < 0.02);
        assert!((s2 / n as f64 - 1.0).abs() < 0.02);
    }
}
