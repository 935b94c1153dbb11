use super::BellDiagonalState;
use crate::{Error, Result};

/// Single-qubit Pauli channel, applied to one half of a Bell pair.
///
/// Time-parametrized channels carry the dimensionless exponent `tau = Γ t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Channel {
    TimeDephasing { tau: f64 },
    TimeDepolarizing { tau: f64 },
    DiscreteDepolarizing { alpha: f64 },
}

impl Channel {
    pub fn identity() -> Self {
        Channel::DiscreteDepolarizing { alpha: 1.0 }
    }

    pub fn validate(&self) -> Result<()> {
        match *self {
            Channel::TimeDephasing { tau } | Channel::TimeDepolarizing { tau } if !(tau >= 0.0) => {
                Err(Error::InvalidParameter {
                    field: "channel.tau",
                    reason: "must be >= 0",
                })
            }
            Channel::DiscreteDepolarizing { alpha } if !(0.0..=1.0).contains(&alpha) => {
                Err(Error::InvalidParameter {
                    field: "channel.alpha",
                    reason: "must be in [0, 1]",
                })
            }
            _ => Ok(()),
        }
    }

    /// Contraction factor of the Bloch vector along the affected axes.
    pub fn contraction(&self) -> f64 {
        match *self {
            Channel::TimeDephasing { tau } | Channel::TimeDepolarizing { tau } => libm::exp(-tau),
            Channel::DiscreteDepolarizing { alpha } => alpha,
        }
    }

    /// Error distribution over `(I, Z, X, Y)`.
    pub fn pauli_weights(&self) -> [f64; 4] {
        let c = self.contraction();
        match self {
            Channel::TimeDephasing { .. } => [(1.0 + c) / 2.0, (1.0 - c) / 2.0, 0.0, 0.0],
            _ => {
                let off = (1.0 - c) / 4.0;
                [c + off, off, off, off]
            }
        }
    }
}

/// `a ∘ b` within one channel family.
///
/// Dephasing exponents add, depolarizing contractions multiply. A time
/// depolarizing channel is a discrete one with `alpha = e^{-tau}`, so mixed
/// depolarizing pairs compose to a discrete channel.
pub fn compose(a: Channel, b: Channel) -> Result<Channel> {
    use Channel::*;
    match (a, b) {
        (TimeDephasing { tau: t1 }, TimeDephasing { tau: t2 }) => {
            Ok(TimeDephasing { tau: t1 + t2 })
        }
        (TimeDepolarizing { tau: t1 }, TimeDepolarizing { tau: t2 }) => {
            Ok(TimeDepolarizing { tau: t1 + t2 })
        }
        (DiscreteDepolarizing { alpha: a1 }, DiscreteDepolarizing { alpha: a2 }) => {
            Ok(DiscreteDepolarizing { alpha: a1 * a2 })
        }
        (DiscreteDepolarizing { alpha }, TimeDepolarizing { tau })
        | (TimeDepolarizing { tau }, DiscreteDepolarizing { alpha }) => Ok(DiscreteDepolarizing {
            alpha: alpha * libm::exp(-tau),
        }),
        _ => Err(Error::HeterogeneousComposition),
    }
}

pub fn apply(ch: Channel, s: &BellDiagonalState) -> BellDiagonalState {
    let w = s.weights();
    let c = ch.contraction();
    let out = match ch {
        Channel::TimeDephasing { .. } => {
            let keep = (1.0 + c) / 2.0;
            let flip = (1.0 - c) / 2.0;
            [
                keep * w[0] + flip * w[1],
                flip * w[0] + keep * w[1],
                keep * w[2] + flip * w[3],
                flip * w[2] + keep * w[3],
            ]
        }
        _ => {
            let mixed = (1.0 - c) / 4.0;
            [
                c * w[0] + mixed,
                c * w[1] + mixed,
                c * w[2] + mixed,
                c * w[3] + mixed,
            ]
        }
    };
    BellDiagonalState::from_weights_unchecked(out)
}
