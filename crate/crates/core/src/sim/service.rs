use rand_core::RngCore;

use super::rng::unit_open;
use crate::model::{service_rate, LinkSpec, RateMode};
use crate::Result;

/// Law of the random part of an LLEG time.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ServiceModel {
    /// `β X`, X geometric on {1, 2, ..} with success probability `p`.
    GeometricAttempts,
    /// Exponential with a rate fitted to the attempts.
    Exponential(RateMode),
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Law {
    Geometric { log_fail: f64, beta: f64 },
    Exponential { mu: f64 },
}

/// Precomputed sampler for one link.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LlegSampler {
    law: Law,
    kappa: f64,
}

impl LlegSampler {
    pub fn new(link: &LinkSpec, model: ServiceModel) -> Result<Self> {
        let law = match model {
            ServiceModel::GeometricAttempts => Law::Geometric {
                log_fail: libm::log1p(-link.p),
                beta: link.beta,
            },
            ServiceModel::Exponential(mode) => Law::Exponential {
                mu: service_rate(link, mode)?,
            },
        };
        Ok(LlegSampler {
            law,
            kappa: link.kappa(),
        })
    }

    pub fn kappa(&self) -> f64 {
        self.kappa
    }

    /// Long-run completion rate of back-to-back generation.
    pub fn rate(&self) -> f64 {
        match self.law {
            Law::Geometric { log_fail, beta } => {
                if log_fail == f64::NEG_INFINITY {
                    1.0 / beta
                } else {
                    -libm::expm1(log_fail) / beta
                }
            }
            Law::Exponential { mu } => mu,
        }
    }

    /// Random part only: `β X` or `Y`.
    pub fn sample_service<R: RngCore>(&self, rng: &mut R) -> f64 {
        let u = unit_open(rng);
        match self.law {
            Law::Geometric { log_fail, beta } => {
                // p = 1 gives log_fail = -inf and a single attempt
                let extra = if log_fail == f64::NEG_INFINITY {
                    0.0
                } else {
                    libm::floor(libm::log(u) / log_fail)
                };
                beta * (1.0 + extra)
            }
            Law::Exponential { mu } => -libm::log(u) / mu,
        }
    }

    /// Full LLEG time `κ + random part`.
    pub fn sample<R: RngCore>(&self, rng: &mut R) -> f64 {
        self.kappa + self.sample_service(rng)
    }
}

pub fn sample_lleg_time<R: RngCore>(
    link: &LinkSpec,
    model: ServiceModel,
    rng: &mut R,
) -> Result<f64> {
    Ok(LlegSampler::new(link, model)?.sample(rng))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sim::{substream, Moments};

    fn link(p: f64, beta: f64) -> LinkSpec {
        LinkSpec {
            length_km: 1.0,
            p,
            beta,
            kappa_s: beta + 0.25,
            kappa_p: 0.0,
            kappa_h: 0.0,
            werner_w: 1.0,
        }
    }

    #[test]
    fn deterministic_when_p_is_one() {
        let l = link(1.0, 0.4);
        let mut rng = substream(3, 0);
        for _ in 0..100 {
            let t = sample_lleg_time(&l, ServiceModel::GeometricAttempts, &mut rng).unwrap();
            assert!((t - (0.25 + 0.4)).abs() < 1e-15);
        }
    }

    #[test]
    fn geometric_mean() {
        let mut l = link(0.5, 1.0);
        l.kappa_s = 1.0;
        let s = LlegSampler::new(&l, ServiceModel::GeometricAttempts).unwrap();
        let mut rng = substream(11, 0);
        let mut m = Moments::default();
        for _ in 0..1_000_000 {
            m.push(s.sample(&mut rng));
        }
        assert!((m.mean() - 2.0).abs() < 0.01, "{}", m.mean());
        assert!((s.rate() - 0.5).abs() < 1e-15);
    }

    #[test]
    fn geometric_distribution_shape() {
        // P(X = k) = (1 - p)^{k - 1} p
        let l = link(0.3, 1.0);
        let s = LlegSampler::new(&l, ServiceModel::GeometricAttempts).unwrap();
        let mut rng = substream(5, 0);
        let mut counts = [0u32; 6];
        let n = 200_000;
        for _ in 0..n {
            let k = s.sample_service(&mut rng) as usize;
            if k <= 5 {
                counts[k] += 1;
            }
        }
        assert_eq!(counts[0], 0);
        for (k, &c) in counts.iter().enumerate().skip(1) {
            let expected = 0.7f64.powi(k as i32 - 1) * 0.3;
            let freq = c as f64 / n as f64;
            assert!((freq - expected).abs() < 0.004, "{k}: {freq} vs {expected}");
        }
    }

    #[test]
    fn exponential_upper_bound_mean() {
        let mut l = link(0.5, 1.0);
        l.kappa_s = 1.0;
        let s = LlegSampler::new(&l, ServiceModel::Exponential(RateMode::UpperBound)).unwrap();
        let mut rng = substream(12, 0);
        let mut m = Moments::default();
        for _ in 0..1_000_000 {
            m.push(s.sample(&mut rng));
        }
        assert!(
            (m.mean() - 1.0 / core::f64::consts::LN_2).abs() < 0.01,
            "{}",
            m.mean()
        );
    }

    #[test]
    fn upper_bound_rejects_certain_success() {
        let l = link(1.0, 1.0);
        assert!(LlegSampler::new(&l, ServiceModel::Exponential(RateMode::UpperBound)).is_err());
        assert!(LlegSampler::new(&l, ServiceModel::Exponential(RateMode::MeanMatch)).is_ok());
    }
}
