//! Deterministic random-number streams.
//!
//! Every consumer of randomness (one stream per node, one for traffic) owns
//! its own [`RngStream`], keyed by `(seed, stream_id)`. Streams are backed by
//! ChaCha12, a fixed, platform-independent generator with published reference
//! outputs, so identical keys yield identical sequences on every platform and
//! node trajectories do not depend on node-count ordering.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha12Rng;
use rand_distr::{Distribution, Normal};

/// Stream id reserved for traffic generation.
pub const TRAFFIC_STREAM: u64 = 0;

/// Stream id for a node's mobility draws.
pub fn node_stream_id(node_id: u32) -> u64 {
    u64::from(node_id) + 1
}

/// A reproducible stream of random variates.
#[derive(Debug, Clone)]
pub struct RngStream {
    chacha: ChaCha12Rng,
}

impl RngStream {
    pub fn new(seed: u64, stream_id: u64) -> Self {
        let mut chacha = ChaCha12Rng::seed_from_u64(seed);
        chacha.set_stream(stream_id);
        Self { chacha }
    }

    /// Uniform variate in `[0, 1)`.
    pub fn next_uniform(&mut self) -> f64 {
        self.chacha.random::<f64>()
    }

    /// Uniform variate in `[lo, hi)`.
    pub fn uniform_in(&mut self, lo: f64, hi: f64) -> f64 {
        lo + (hi - lo) * self.next_uniform()
    }

    /// Normal variate with the given mean and standard deviation.
    pub fn normal(&mut self, mean: f64, std_dev: f64) -> f64 {
        Normal::new(mean, std_dev)
            .expect("std_dev must be finite and positive")
            .sample(&mut self.chacha)
    }
}
