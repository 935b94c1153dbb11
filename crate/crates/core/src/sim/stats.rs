use alloc::vec::Vec;

use crate::analytic::secret_key_rate;

/// Two-sided 95% normal quantile.
const Z95: f64 = 1.959_963_984_540_054;

/// Streaming mean and variance (Welford), mergeable.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct Moments {
    count: u64,
    mean: f64,
    m2: f64,
}

impl Moments {
    pub fn push(&mut self, x: f64) {
        self.count += 1;
        let d = x - self.mean;
        self.mean += d / self.count as f64;
        self.m2 += d * (x - self.mean);
    }

    /// Chan et al. pairwise combination.
    pub fn merge(&mut self, other: &Moments) {
        if other.count == 0 {
            return;
        }
        if self.count == 0 {
            *self = *other;
            return;
        }
        let n = self.count + other.count;
        let d = other.mean - self.mean;
        let w = other.count as f64 / n as f64;
        self.mean += d * w;
        self.m2 += other.m2 + d * d * self.count as f64 * w;
        self.count = n;
    }

    pub fn count(&self) -> u64 {
        self.count
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Unbiased sample variance.
    pub fn variance(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            (self.m2 / (self.count - 1) as f64).max(0.0)
        }
    }

    pub fn std_error(&self) -> f64 {
        if self.count < 2 {
            0.0
        } else {
            libm::sqrt(self.variance() / self.count as f64)
        }
    }

    pub fn estimate(&self) -> Estimate {
        Estimate::new(self.mean, self.std_error(), self.count)
    }
}

/// Point estimate with a standard error and 95% normal interval.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Estimate {
    pub mean: f64,
    pub std_error: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub samples: u64,
}

impl Estimate {
    pub fn new(mean: f64, std_error: f64, samples: u64) -> Self {
        Estimate {
            mean,
            std_error,
            ci_low: mean - Z95 * std_error,
            ci_high: mean + Z95 * std_error,
            samples,
        }
    }

    /// Signed distance from `reference` in standard errors.
    pub fn z_score(&self, reference: f64) -> f64 {
        if self.std_error == 0.0 {
            if self.mean == reference {
                0.0
            } else {
                libm::copysign(f64::INFINITY, self.mean - reference)
            }
        } else {
            (self.mean - reference) / self.std_error
        }
    }
}

/// Per-queue statistics of a stream run, over the measurement window.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QueueStats {
    /// Sojourn time of measured requests, batch-means standard error.
    pub sojourn: Estimate,
    /// Time-average number of requests waiting at the node.
    pub mean_in_system: f64,
    /// Arrivals per second into this queue.
    pub arrival_rate: f64,
    /// Inter-departure times of consecutive departures.
    pub inter_departure: Moments,
}

impl QueueStats {
    /// `L / (λ W)`; one when Little's law holds.
    pub fn little_ratio(&self) -> f64 {
        self.mean_in_system / (self.arrival_rate * self.sojourn.mean)
    }
}

/// Empirical fidelity of delivered end-to-end pairs.
#[derive(Debug, Clone, PartialEq)]
pub struct FidelityReport {
    pub fidelity: Estimate,
    /// `E[exp(-τ)]`, the quantity the analytic transforms predict at 1.
    pub decay: Estimate,
    /// Completed requests per second (stream runs only).
    pub throughput: Option<f64>,
    pub queues: Vec<QueueStats>,
    /// Measured requests still waiting when the run stopped.
    pub incomplete: u64,
    /// Arrival rate at or above some service rate, or requests left behind.
    pub non_stationary: bool,
}

/// Key rate from the empirical mean fidelity. Stream reports use the
/// achieved throughput when it falls short of `lambda`.
pub fn estimate_skr(report: &FidelityReport, lambda: f64) -> f64 {
    let rate = match report.throughput {
        Some(t) => lambda.min(t),
        None => lambda,
    };
    secret_key_rate(rate, report.fidelity.mean)
}
