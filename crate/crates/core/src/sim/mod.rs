//! Seeded Monte Carlo simulation of sequential entanglement distribution.
//!
//! Randomness comes from ChaCha8 keyed by the user seed; each independent
//! unit of work (a one-shot trial, the arrival process or one queue's
//! service process) reads its own ChaCha stream, so results are
//! bit-identical for a given seed no matter how work is scheduled.

mod one_shot;
mod rng;
mod service;
mod stats;
mod stream;

pub use one_shot::{simulate_one_shot, simulate_one_shot_block, OneShotBlock, ONE_SHOT_BLOCK};
pub use rng::{substream, unit_open, SimRng};
pub use service::{sample_lleg_time, LlegSampler, ServiceModel};
pub use stats::{estimate_skr, Estimate, FidelityReport, Moments, QueueStats};
pub use stream::{simulate_stream, simulate_stream_detailed, Request};

/// Run parameters shared by the one-shot and stream simulators.
#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    /// Independent one-shot trials.
    pub trials: u64,
    /// Poisson arrivals generated for a stream run, warmup included.
    pub requests: u64,
    /// Fraction of stream arrivals discarded before measuring.
    pub warmup: f64,
    /// Extra unmeasured traffic after the last measured arrival, as a
    /// fraction of the measurement window. Measured requests still queued
    /// when it runs out are reported as incomplete.
    pub cooldown: f64,
    pub seed: u64,
    pub service: ServiceModel,
    /// Batches for batch-means standard errors in stream runs.
    pub batches: usize,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            trials: 100_000,
            requests: 100_000,
            warmup: 0.2,
            cooldown: 0.25,
            seed: 0,
            service: ServiceModel::GeometricAttempts,
            batches: 32,
        }
    }
}

impl SimConfig {
    pub fn validate(&self) -> crate::Result<()> {
        if self.trials == 0 {
            return Err(crate::model::invalid("sim.trials", "must be >= 1"));
        }
        if !(0.0..1.0).contains(&self.warmup) {
            return Err(crate::model::invalid("sim.warmup", "must be in [0, 1)"));
        }
        if !(self.cooldown >= 0.0) {
            return Err(crate::model::invalid("sim.cooldown", "must be >= 0"));
        }
        if self.batches < 2 {
            return Err(crate::model::invalid("sim.batches", "must be >= 2"));
        }
        Ok(())
    }
}
