//! Closed-form transforms of the memory decoherence exponent and the
//! fidelity and key-rate formulas built on them.

mod fidelity;
mod lst;
mod skr;

pub use fidelity::{
    delta, expected_fidelity, fidelity_from_moment, one_shot_fidelity, queue_fidelity,
};
pub use lst::{
    lst_busy_period, lst_link_oneshot, lst_sojourn_oqf, lst_tau_oneshot, lst_tau_queue,
    EffectiveRates, LstEvaluator, QueueParams, Regime,
};
pub use skr::{binary_entropy, secret_key_rate, skr_threshold_fidelity};
