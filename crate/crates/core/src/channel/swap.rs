use alloc::vec::Vec;

use super::{apply, BellDiagonalState, BellIndex, Channel};
use crate::model::NoiseModel;
use crate::{Error, Result};

/// Entanglement fidelity with `Φ+`.
pub fn fidelity(s: &BellDiagonalState) -> f64 {
    s.weight(BellIndex::PhiPlus)
}

/// Swap two Bell-diagonal pairs with a measurement whose noise is a
/// depolarizing channel of parameter `alpha` on the outgoing pair.
///
/// Corrections are perfect and every outcome is equally likely, so the
/// outgoing error is the product of the two incoming errors.
pub fn noisy_bsm(a: &BellDiagonalState, b: &BellDiagonalState, alpha: f64) -> BellDiagonalState {
    apply(Channel::DiscreteDepolarizing { alpha }, &a.convolve(b))
}

/// Swap `pairs` (ordered along the chain) at the junctions listed in `order`.
///
/// Junction `j` joins pair `j` and pair `j + 1` and measures with
/// `alphas[j]`. `order` must be a permutation of `0..pairs.len() - 1`.
pub fn swap_chain(
    pairs: &[BellDiagonalState],
    alphas: &[f64],
    order: &[usize],
) -> Result<BellDiagonalState> {
    let junctions = pairs.len().saturating_sub(1);
    if pairs.is_empty() || alphas.len() != junctions || order.len() != junctions {
        return Err(Error::InvalidParameter {
            field: "swap.order",
            reason: "need one alpha and one order entry per junction",
        });
    }
    // segment_of[i]: index into `segments` covering pair i; merged slots are None.
    let mut segments: Vec<Option<BellDiagonalState>> = pairs.iter().copied().map(Some).collect();
    let mut owner: Vec<usize> = (0..pairs.len()).collect();
    let mut done = alloc::vec![false; junctions];
    for &j in order {
        if j >= junctions || core::mem::replace(&mut done[j], true) {
            return Err(Error::InvalidParameter {
                field: "swap.order",
                reason: "must be a permutation of the junctions",
            });
        }
        let (left, right) = (owner[j], owner[j + 1]);
        let a = segments[left].take().expect("live segment");
        let b = segments[right].take().expect("live segment");
        segments[left] = Some(noisy_bsm(&a, &b, alphas[j]));
        for o in owner.iter_mut().filter(|o| **o == right) {
            *o = left;
        }
    }
    Ok(segments[owner[0]].expect("single remaining segment"))
}

/// End-to-end state after the combined depolarizing parameter `chi`, the
/// classical-delay exponent `delta` and the memory exponent `tau`.
pub fn final_state(chi: f64, delta: f64, tau: f64, noise: NoiseModel) -> BellDiagonalState {
    let decay = libm::exp(-(delta + tau));
    let mixed = (1.0 - chi) / 4.0;
    let weights = match noise {
        NoiseModel::Dephasing => [
            chi * (1.0 + decay) / 2.0 + mixed,
            chi * (1.0 - decay) / 2.0 + mixed,
            mixed,
            mixed,
        ],
        NoiseModel::Depolarizing => {
            let w = chi * decay;
            let off = (1.0 - w) / 4.0;
            [w + off, off, off, off]
        }
    };
    BellDiagonalState::from_weights_unchecked(weights)
}
