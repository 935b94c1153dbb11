use super::{EffectiveRates, LstEvaluator, QueueParams};
use crate::model::{chi, classical_delay, ChainSpec, NoiseModel, RateMode};
use crate::{Error, Result};

/// Decoherence exponent accumulated by the end nodes while they wait for
/// the last swap outcome.
pub fn delta(chain: &ChainSpec) -> f64 {
    EffectiveRates::from_chain(chain).gamma_prime_end * classical_delay(chain)
}

/// Mean fidelity given `chi`, `delta` and `E[exp(-τ)]`.
pub fn fidelity_from_moment(noise: NoiseModel, chi: f64, delta: f64, l_tau_at_1: f64) -> f64 {
    let decay = libm::exp(-delta) * l_tau_at_1;
    match noise {
        NoiseModel::Dephasing => chi * (1.0 + decay) / 2.0 + (1.0 - chi) / 4.0,
        NoiseModel::Depolarizing => (1.0 + 3.0 * chi * decay) / 4.0,
    }
}

pub fn expected_fidelity(chain: &ChainSpec, l_tau_at_1: f64) -> f64 {
    fidelity_from_moment(chain.noise, chi(chain), delta(chain), l_tau_at_1)
}

pub fn one_shot_fidelity(chain: &ChainSpec) -> f64 {
    let rates = EffectiveRates::from_chain(chain);
    expected_fidelity(chain, LstEvaluator::one_shot(chain, &rates).eval(1.0))
}

/// Mean fidelity under a Poisson stream of rate `lambda`. An unstable OQF
/// queue means unbounded waits, so the transform is taken as zero.
pub fn queue_fidelity(chain: &ChainSpec, lambda: f64, mode: RateMode) -> Result<f64> {
    let rates = EffectiveRates::from_chain(chain);
    let q = QueueParams::from_chain(chain, lambda, mode)?;
    let l = match LstEvaluator::queue(chain, &q, &rates) {
        Ok(lst) => lst.eval(1.0),
        Err(Error::UnstableQueue { .. }) => 0.0,
        Err(e) => return Err(e),
    };
    Ok(expected_fidelity(chain, l))
}
