use core::fmt;

#[derive(Debug, Clone, PartialEq)]
pub enum Error {
    /// A field is outside its physical domain.
    InvalidParameter {
        field: &'static str,
        reason: &'static str,
    },
    /// `p = 1` makes the CDF-matched exponential service degenerate.
    DeterministicService,
    /// Dephasing and depolarizing channels do not compose into one family.
    HeterogeneousComposition,
    /// OQF sojourn law requires `lambda < mu` at every decohering queue.
    UnstableQueue {
        link: usize,
        lambda: f64,
        mu: f64,
    },
    InvalidDensityMatrix(&'static str),
    /// Not enough post-warmup samples to form an estimate.
    InsufficientSamples,
}

impl fmt::Display for Error {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Error::InvalidParameter { field, reason } => write!(f, "invalid {field}: {reason}"),
            Error::DeterministicService => {
                f.write_str("deterministic service (p = 1); exponential model degenerate")
            }
            Error::HeterogeneousComposition => {
                f.write_str("heterogeneous composition not closed; use apply")
            }
            Error::UnstableQueue { link, lambda, mu } => {
                write!(
                    f,
                    "unstable queue at link {link}: lambda {lambda} >= mu {mu}"
                )
            }
            Error::InvalidDensityMatrix(why) => write!(f, "invalid density matrix: {why}"),
            Error::InsufficientSamples => f.write_str("insufficient samples after warmup"),
        }
    }
}

impl core::error::Error for Error {}
