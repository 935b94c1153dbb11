use crate::{Error, Result};

/// Bell basis label. The discriminant is the position in the weight vector
/// and the Pauli error that maps `Φ+` to this state.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
#[repr(usize)]
pub enum BellIndex {
    PhiPlus = 0,
    PhiMinus = 1,
    PsiPlus = 2,
    PsiMinus = 3,
}

impl BellIndex {
    pub const ALL: [BellIndex; 4] = [
        BellIndex::PhiPlus,
        BellIndex::PhiMinus,
        BellIndex::PsiPlus,
        BellIndex::PsiMinus,
    ];
}

const NORM_TOL: f64 = 1e-12;

/// Probability vector over `(Φ+, Φ−, Ψ+, Ψ−)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BellDiagonalState {
    weights: [f64; 4],
}

impl BellDiagonalState {
    pub fn new(weights: [f64; 4]) -> Result<Self> {
        if weights
            .iter()
            .any(|w| !(-NORM_TOL..=1.0 + NORM_TOL).contains(w))
        {
            return Err(Error::InvalidParameter {
                field: "bell.weights",
                reason: "each weight must be in [0, 1]",
            });
        }
        let total: f64 = weights.iter().sum();
        if libm::fabs(total - 1.0) > NORM_TOL {
            return Err(Error::InvalidParameter {
                field: "bell.weights",
                reason: "weights must sum to 1",
            });
        }
        Ok(BellDiagonalState { weights })
    }

    pub(crate) fn from_weights_unchecked(weights: [f64; 4]) -> Self {
        BellDiagonalState { weights }
    }

    pub fn phi_plus() -> Self {
        BellDiagonalState {
            weights: [1.0, 0.0, 0.0, 0.0],
        }
    }

    pub fn maximally_mixed() -> Self {
        BellDiagonalState { weights: [0.25; 4] }
    }

    /// `w Φ+ + (1 − w) 1/4`.
    pub fn werner(w: f64) -> Self {
        let off = (1.0 - w) / 4.0;
        BellDiagonalState {
            weights: [w + off, off, off, off],
        }
    }

    pub fn weights(&self) -> [f64; 4] {
        self.weights
    }

    pub fn weight(&self, index: BellIndex) -> f64 {
        self.weights[index as usize]
    }

    /// Distribution of the product of two independent Pauli errors.
    pub fn convolve(&self, other: &Self) -> Self {
        let mut out = [0.0; 4];
        for (k, slot) in out.iter_mut().enumerate() {
            *slot = (0..4).map(|i| self.weights[i] * other.weights[i ^ k]).sum();
        }
        BellDiagonalState { weights: out }
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        self.weights
            .iter()
            .zip(other.weights.iter())
            .map(|(a, b)| libm::fabs(a - b))
            .fold(0.0, f64::max)
    }
}
