use alloc::vec::Vec;

use crate::model::{service_rate, ChainSpec, LinkSpec, Policy, RateMode};
use crate::{Error, Result};

/// Above this argument `exp(-a)` is treated as exactly zero.
const UNDERFLOW_ARG: f64 = 700.0;

/// Decoherence rates of the pairs held between `v_0` and each later node.
///
/// The pair between `v_0` and `v_j` sits in the memories of both nodes, so it
/// decoheres at `Γ_0 + Γ_j`.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveRates {
    /// `Γ'_1 ..= Γ'_{n-1}`; entry `j - 1` belongs to link `j`.
    pub gamma_prime: Vec<f64>,
    /// `Γ'_n`, the rate during the classical delay.
    pub gamma_prime_end: f64,
}

impl EffectiveRates {
    pub fn from_chain(chain: &ChainSpec) -> Self {
        let n = chain.n_links();
        let g0 = chain.nodes[0].gamma;
        EffectiveRates {
            gamma_prime: chain.nodes[1..n].iter().map(|v| g0 + v.gamma).collect(),
            gamma_prime_end: g0 + chain.nodes[n].gamma,
        }
    }

    /// `Γ'_j` for link `j` in `1..n`.
    pub fn for_link(&self, j: usize) -> f64 {
        self.gamma_prime[j - 1]
    }
}

/// Poisson request stream and per-link exponential service rates.
#[derive(Debug, Clone, PartialEq)]
pub struct QueueParams {
    pub lambda: f64,
    /// One rate per link, `mu[j]` for link `j`.
    pub mu: Vec<f64>,
    pub mode: RateMode,
}

impl QueueParams {
    pub fn from_chain(chain: &ChainSpec, lambda: f64, mode: RateMode) -> Result<Self> {
        if !(lambda > 0.0) {
            return Err(Error::InvalidParameter {
                field: "workload.lambda",
                reason: "must be > 0",
            });
        }
        let mu = chain
            .links
            .iter()
            .map(|l| service_rate(l, mode))
            .collect::<Result<Vec<_>>>()?;
        Ok(QueueParams { lambda, mu, mode })
    }

    /// Smallest service rate over the links that contribute decoherence.
    pub fn bottleneck(&self) -> f64 {
        self.mu[1..].iter().copied().fold(f64::INFINITY, f64::min)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Regime {
    OneShot,
    QueueOqf,
    QueueYqf,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum Waiting {
    Geometric { p: f64, beta: f64 },
    Sojourn { lambda: f64, mu: f64 },
    BusyPeriod { lambda: f64, mu: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
struct Factor {
    waiting: Waiting,
    kappa: f64,
    gamma: f64,
}

impl Factor {
    fn eval(&self, x: f64) -> f64 {
        let y = x * self.gamma;
        let delay = clamped_exp(self.kappa * y);
        let rest = match self.waiting {
            Waiting::Geometric { p, beta } => geometric(p, beta, y),
            Waiting::Sojourn { lambda, mu } => sojourn(lambda, mu, y),
            Waiting::BusyPeriod { lambda, mu } => busy_period(lambda, mu, y),
        };
        delay * rest
    }
}

/// `x ↦ E[exp(-x τ)]` for the accumulated memory exponent `τ`, as a product
/// of independent per-link factors.
#[derive(Debug, Clone, PartialEq)]
pub struct LstEvaluator {
    regime: Regime,
    factors: Vec<Factor>,
}

impl LstEvaluator {
    /// Idle chain: each stored pair waits for one LLEG on the next link.
    pub fn one_shot(chain: &ChainSpec, rates: &EffectiveRates) -> Self {
        let factors = (1..chain.n_links())
            .map(|j| {
                let link = &chain.links[j];
                Factor {
                    waiting: Waiting::Geometric {
                        p: link.p,
                        beta: link.beta,
                    },
                    kappa: link.kappa(),
                    gamma: rates.for_link(j),
                }
            })
            .collect();
        LstEvaluator {
            regime: Regime::OneShot,
            factors,
        }
    }

    /// Tandem M/M/1 queues under the chain's scheduling policy. OQF needs
    /// `lambda < mu_j` on every decohering link.
    pub fn queue(chain: &ChainSpec, q: &QueueParams, rates: &EffectiveRates) -> Result<Self> {
        let lambda = q.lambda;
        let factors = (1..chain.n_links())
            .map(|j| {
                let mu = q.mu[j];
                let waiting = match chain.policy {
                    Policy::Oqf => {
                        if lambda >= mu {
                            return Err(Error::UnstableQueue {
                                link: j,
                                lambda,
                                mu,
                            });
                        }
                        Waiting::Sojourn { lambda, mu }
                    }
                    Policy::Yqf => Waiting::BusyPeriod { lambda, mu },
                };
                Ok(Factor {
                    waiting,
                    kappa: chain.links[j].kappa(),
                    gamma: rates.for_link(j),
                })
            })
            .collect::<Result<Vec<_>>>()?;
        let regime = match chain.policy {
            Policy::Oqf => Regime::QueueOqf,
            Policy::Yqf => Regime::QueueYqf,
        };
        Ok(LstEvaluator { regime, factors })
    }

    pub fn regime(&self) -> Regime {
        self.regime
    }

    pub fn eval(&self, x: f64) -> f64 {
        self.factors.iter().map(|f| f.eval(x)).product()
    }

    /// Value of each per-link factor at `x`, link 1 first.
    pub fn factor_values(&self, x: f64) -> Vec<f64> {
        self.factors.iter().map(|f| f.eval(x)).collect()
    }
}

fn clamped_exp(a: f64) -> f64 {
    if a > UNDERFLOW_ARG {
        0.0
    } else {
        libm::exp(-a)
    }
}

/// `p e^{-βy} / (1 − (1 − p) e^{-βy})`, written as `p / (e^{βy} − 1 + p)`.
fn geometric(p: f64, beta: f64, y: f64) -> f64 {
    let a = beta * y;
    if a > UNDERFLOW_ARG {
        return 0.0;
    }
    p / (libm::expm1(a) + p)
}

fn sojourn(lambda: f64, mu: f64, y: f64) -> f64 {
    (mu - lambda) / (mu - lambda + y)
}

/// Smaller root of `λ z² − (μ + λ + y) z + μ = 0`, in the cancellation-free
/// form `2μ / ((μ + λ + y) + sqrt(...))`.
fn busy_period(lambda: f64, mu: f64, y: f64) -> f64 {
    let s = mu + lambda + y;
    let disc = y * y + 2.0 * y * (lambda + mu) + (lambda - mu) * (lambda - mu);
    2.0 * mu / (s + libm::sqrt(disc))
}

/// Transform of one link's LLEG time `κ + β X`, X geometric on {1, 2, ..}.
pub fn lst_link_oneshot(link: &LinkSpec, x: f64) -> f64 {
    clamped_exp(link.kappa() * x) * geometric(link.p, link.beta, x)
}

/// Transform of `τ = Σ_{j=1}^{n-1} Γ'_j G_j` for a single request on an idle chain.
pub fn lst_tau_oneshot(chain: &ChainSpec, rates: &EffectiveRates, x: f64) -> f64 {
    LstEvaluator::one_shot(chain, rates).eval(x)
}

/// Transform of `κ + S` where `S` is an FCFS M/M/1 sojourn time.
pub fn lst_sojourn_oqf(lambda: f64, mu: f64, kappa: f64, x: f64) -> Result<f64> {
    if lambda >= mu {
        return Err(Error::UnstableQueue {
            link: 0,
            lambda,
            mu,
        });
    }
    Ok(clamped_exp(kappa * x) * sojourn(lambda, mu, x))
}

/// Transform of the M/M/1 busy period. For `lambda > mu` it is the
/// transform of the defective law and equals `mu / lambda` at zero.
pub fn lst_busy_period(lambda: f64, mu: f64, x: f64) -> f64 {
    busy_period(lambda, mu, x)
}

pub fn lst_tau_queue(
    chain: &ChainSpec,
    q: &QueueParams,
    rates: &EffectiveRates,
    x: f64,
) -> Result<f64> {
    Ok(LstEvaluator::queue(chain, q, rates)?.eval(x))
}
