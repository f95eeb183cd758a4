//! Seeded random streams.
//!
//! A [`RandomStream`] is a `(seed, stream_id)` pair mapped onto a ChaCha8
//! generator: the seed keys the generator and the stream id selects one of its
//! 2^64 independent streams. Replicate `r` of any parallel job uses
//! `stream_id = r`, so draws never depend on scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Bernoulli, Distribution as _, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RandomStream {
    pub seed: u64,
    pub stream_id: u64,
}

fn splitmix64(mut z: u64) -> u64 {
    z = z.wrapping_add(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

impl RandomStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        Self { seed, stream_id }
    }

    /// Fresh generator positioned at the start of this stream.
    pub fn rng(&self) -> ChaCha8Rng {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream_id);
        rng
    }

    /// Independent child stream keyed by `tag`; keeps the stream id.
    pub fn derive(&self, tag: u64) -> Self {
        Self {
            seed: splitmix64(self.seed ^ splitmix64(tag)),
            stream_id: self.stream_id,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Dist {
    Normal { mean: f64, sd: f64 },
    Bernoulli { p: f64 },
}

/// `n` i.i.d. draws from `dist` on `stream`. Bernoulli draws are 0.0 / 1.0.
pub fn sample(dist: Dist, stream: RandomStream, n: usize) -> Result<Vec<f64>> {
    let mut rng = stream.rng();
    match dist {
        Dist::Normal { mean, sd } => {
            if !(sd > 0.0 && sd.is_finite() && mean.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "normal(mean = {mean}, sd = {sd})"
                )));
            }
            Ok((0..n)
                .map(|_| mean + sd * rng.sample::<f64, _>(StandardNormal))
                .collect())
        }
        Dist::Bernoulli { p } => {
            let b = Bernoulli::new(p)
                .map_err(|_| Error::InvalidParameter(format!("bernoulli(p = {p})")))?;
            Ok((0..n).map(|_| f64::from(u8::from(b.sample(&mut rng)))).collect())
        }
    }
}

/// `n` standard normal draws.
pub fn standard_normal(stream: RandomStream, n: usize) -> Vec<f64> {
    let mut rng = stream.rng();
    (0..n).map(|_| rng.sample(StandardNormal)).collect()
}

/// `n` uniform draws on `[0, 1)`.
pub fn uniform(stream: RandomStream, n: usize) -> Vec<f64> {
    let mut rng = stream.rng();
    (0..n).map(|_| rng.random::<f64>()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn deterministic() {
        let s = RandomStream::new(42, 7);
        let a = sample(Dist::Normal { mean: 0.0, sd: 1.0 }, s, 100).unwrap();
        let b = sample(Dist::Normal { mean: 0.0, sd: 1.0 }, s, 100).unwrap();
        assert_eq!(
            a.iter().map(|v| v.to_bits()).collect::<Vec<_>>(),
            b.iter().map(|v| v.to_bits()).collect::<Vec<_>>()
        );
        let c = sample(Dist::Normal { mean: 0.0, sd: 1.0 }, RandomStream::new(42, 8), 100).unwrap();
        assert_ne!(a, c);
        assert_ne!(s.derive(1), s.derive(2));
    }

    #[test]
    fn normal_mean_bound() {
        let n = 100_000;
        let x = sample(Dist::Normal { mean: 0.0, sd: 1.0 }, RandomStream::new(1, 0), n).unwrap();
        let mean = x.iter().sum::<f64>() / n as f64;
        assert!(mean.abs() < 4.0 / (n as f64).sqrt(), "{mean}");
    }

    #[test]
    fn bernoulli_proportion_bound() {
        let n = 100_000;
        let x = sample(Dist::Bernoulli { p: 0.5 }, RandomStream::new(2, 0), n).unwrap();
        assert!(x.iter().all(|&v| v == 0.0 || v == 1.0));
        let prop = x.iter().sum::<f64>() / n as f64;
        assert!((prop - 0.5).abs() < 4.0 * 0.5 / (n as f64).sqrt(), "{prop}");
    }

    #[test]
    fn invalid_parameters() {
        let s = RandomStream::new(0, 0);
        assert!(sample(Dist::Normal { mean: 0.0, sd: 0.0 }, s, 1).is_err());
        assert!(sample(Dist::Bernoulli { p: 1.5 }, s, 1).is_err());
    }
}
