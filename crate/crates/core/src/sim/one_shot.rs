use core::ops::Range;

use alloc::vec::Vec;

use super::{substream, FidelityReport, LlegSampler, Moments, SimConfig};
use crate::analytic::{delta, EffectiveRates};
use crate::channel::{fidelity, final_state};
use crate::model::{chi, ChainSpec};
use crate::Result;

/// Trials per merge block. Blocks are merged in index order, so a parallel
/// driver that splits on block boundaries reproduces the serial result.
pub const ONE_SHOT_BLOCK: u64 = 1 << 16;

#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct OneShotBlock {
    pub fidelity: Moments,
    pub decay: Moments,
}

impl OneShotBlock {
    pub fn merge(&mut self, other: &OneShotBlock) {
        self.fidelity.merge(&other.fidelity);
        self.decay.merge(&other.decay);
    }

    pub fn into_report(self) -> FidelityReport {
        FidelityReport {
            fidelity: self.fidelity.estimate(),
            decay: self.decay.estimate(),
            throughput: None,
            queues: Vec::new(),
            incomplete: 0,
            non_stationary: false,
        }
    }
}

/// Trials `trials`; trial `t` draws from stream `t` of the seed.
pub fn simulate_one_shot_block(
    chain: &ChainSpec,
    cfg: &SimConfig,
    trials: Range<u64>,
) -> Result<OneShotBlock> {
    chain.validate()?;
    let chi = chi(chain);
    let delta = delta(chain);
    let rates = EffectiveRates::from_chain(chain);
    let stages = (1..chain.n_links())
        .map(|j| {
            Ok((
                rates.for_link(j),
                LlegSampler::new(&chain.links[j], cfg.service)?,
            ))
        })
        .collect::<Result<Vec<_>>>()?;

    let mut block = OneShotBlock::default();
    for t in trials {
        let mut rng = substream(cfg.seed, t);
        let tau: f64 = stages.iter().map(|(g, s)| g * s.sample(&mut rng)).sum();
        block
            .fidelity
            .push(fidelity(&final_state(chi, delta, tau, chain.noise)));
        block.decay.push(libm::exp(-tau));
    }
    Ok(block)
}

/// Single request on an idle chain: the pair held by `v_0` and `v_j` waits
/// one LLEG on link `j` before the next swap.
pub fn simulate_one_shot(chain: &ChainSpec, cfg: &SimConfig) -> Result<FidelityReport> {
    cfg.validate()?;
    let mut total = OneShotBlock::default();
    let mut start = 0;
    while start < cfg.trials {
        let end = (start + ONE_SHOT_BLOCK).min(cfg.trials);
        total.merge(&simulate_one_shot_block(chain, cfg, start..end)?);
        start = end;
    }
    Ok(total.into_report())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytic::one_shot_fidelity;
    use crate::model::{HomogeneousChain, NoiseModel};

    #[test]
    fn deterministic_links_have_zero_variance() {
        let mut chain = HomogeneousChain {
            links: 3,
            total_length_km: 60.0,
            ..Default::default()
        }
        .build()
        .unwrap();
        chain.links.iter_mut().for_each(|l| l.p = 1.0);
        let cfg = SimConfig {
            trials: 1000,
            ..Default::default()
        };
        let r = simulate_one_shot(&chain, &cfg).unwrap();
        assert_eq!(r.fidelity.std_error, 0.0);
        assert!((r.fidelity.mean - one_shot_fidelity(&chain)).abs() < 1e-14);
    }

    #[test]
    fn fully_mixed_chain() {
        for noise in [NoiseModel::Dephasing, NoiseModel::Depolarizing] {
            let chain = HomogeneousChain {
                links: 3,
                werner_w: 0.0,
                noise,
                ..Default::default()
            }
            .build()
            .unwrap();
            let r = simulate_one_shot(
                &chain,
                &SimConfig {
                    trials: 5000,
                    ..Default::default()
                },
            )
            .unwrap();
            assert_eq!(r.fidelity.mean, 0.25);
            assert_eq!(r.fidelity.std_error, 0.0);
        }
    }

    #[test]
    fn blocks_reproduce_serial_result() {
        let chain = HomogeneousChain {
            links: 4,
            total_length_km: 100.0,
            ..Default::default()
        }
        .build()
        .unwrap();
        let cfg = SimConfig {
            trials: 3 * ONE_SHOT_BLOCK / 2,
            seed: 99,
            ..Default::default()
        };
        let serial = simulate_one_shot(&chain, &cfg).unwrap();
        let mut merged = simulate_one_shot_block(&chain, &cfg, 0..ONE_SHOT_BLOCK).unwrap();
        merged.merge(&simulate_one_shot_block(&chain, &cfg, ONE_SHOT_BLOCK..cfg.trials).unwrap());
        assert_eq!(merged.into_report(), serial);
        assert_eq!(simulate_one_shot(&chain, &cfg).unwrap(), serial);
    }
}
