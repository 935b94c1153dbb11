//! Repeater-chain data model.
//!
//! Units are seconds, kilometers and rates in 1/s throughout. A chain
//! `v_0 .. v_n` has `n` links; link `j` joins `v_j` and `v_{j+1}`.

use alloc::vec::Vec;

use crate::{Error, Result};

/// Speed of light in optical fiber, km/s.
pub const DEFAULT_LIGHT_SPEED_KM_S: f64 = 2.0e5;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NodeSpec {
    /// Memory decoherence rate, 1/s.
    pub gamma: f64,
    /// Depolarizing parameter of the Bell-state measurement performed here.
    /// Ignored for the two end nodes.
    pub alpha: f64,
}

impl NodeSpec {
    pub fn new(gamma: f64, alpha: f64) -> Result<Self> {
        let node = NodeSpec { gamma, alpha };
        node.validate()?;
        Ok(node)
    }

    /// Node whose memories have coherence time `t_star` seconds.
    pub fn from_coherence_time(t_star: f64, alpha: f64) -> Result<Self> {
        if !(t_star > 0.0) {
            return Err(invalid("node.coherence_time_s", "must be > 0"));
        }
        Self::new(1.0 / t_star, alpha)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.gamma >= 0.0) || !self.gamma.is_finite() {
            return Err(invalid("node.gamma", "must be finite and >= 0"));
        }
        if !(0.0..=1.0).contains(&self.alpha) {
            return Err(invalid("node.alpha", "must be in [0, 1]"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LinkSpec {
    pub length_km: f64,
    /// LLEG success probability per attempt.
    pub p: f64,
    /// Attempt period, seconds.
    pub beta: f64,
    /// Classical coordination delay.
    pub kappa_s: f64,
    /// Photon propagation delay.
    pub kappa_p: f64,
    /// Heralding delay.
    pub kappa_h: f64,
    /// Werner parameter of the generated pair.
    pub werner_w: f64,
}

impl LinkSpec {
    /// Fixed part of the LLEG time `G = kappa + beta * X`, X geometric on {1, 2, ..}.
    pub fn kappa(&self) -> f64 {
        self.kappa_s + self.kappa_p + self.kappa_h - self.beta
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.length_km > 0.0) || !self.length_km.is_finite() {
            return Err(invalid("link.length_km", "must be finite and > 0"));
        }
        if !(self.p > 0.0 && self.p <= 1.0) {
            return Err(invalid("link.p", "must be in (0, 1]"));
        }
        if !(self.beta > 0.0) || !self.beta.is_finite() {
            return Err(invalid("link.beta", "must be finite and > 0"));
        }
        for (field, v) in [
            ("link.kappa_s", self.kappa_s),
            ("link.kappa_p", self.kappa_p),
            ("link.kappa_h", self.kappa_h),
        ] {
            if !(v >= 0.0) || !v.is_finite() {
                return Err(invalid(field, "must be finite and >= 0"));
            }
        }
        if !(0.0..=1.0).contains(&self.werner_w) {
            return Err(invalid("link.werner_w", "must be in [0, 1]"));
        }
        if self.kappa() + self.beta < 0.0 {
            return Err(invalid("link.kappa", "kappa + beta must be >= 0"));
        }
        Ok(())
    }
}

/// Where the entangled-photon source sits on a link.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum SourcePlacement {
    #[default]
    AtNode,
    SourceMiddle,
    MeetMiddle,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum NoiseModel {
    Dephasing,
    #[default]
    Depolarizing,
}

/// Swap scheduling at each repeater: oldest-qubit-first (FIFO) or
/// youngest-qubit-first (LIFO).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Policy {
    Oqf,
    #[default]
    Yqf,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ChainSpec {
    pub nodes: Vec<NodeSpec>,
    pub links: Vec<LinkSpec>,
    pub light_speed: f64,
    pub placement: SourcePlacement,
    pub noise: NoiseModel,
    pub policy: Policy,
}

impl ChainSpec {
    pub fn new(
        nodes: Vec<NodeSpec>,
        links: Vec<LinkSpec>,
        light_speed: f64,
        placement: SourcePlacement,
        noise: NoiseModel,
        policy: Policy,
    ) -> Result<Self> {
        let chain = ChainSpec {
            nodes,
            links,
            light_speed,
            placement,
            noise,
            policy,
        };
        chain.validate()?;
        Ok(chain)
    }

    pub fn validate(&self) -> Result<()> {
        if self.links.is_empty() || self.nodes.len() != self.links.len() + 1 {
            return Err(invalid("chain", "need n >= 1 links and n + 1 nodes"));
        }
        if !(self.light_speed > 0.0) {
            return Err(invalid("chain.light_speed", "must be > 0"));
        }
        self.nodes.iter().try_for_each(NodeSpec::validate)?;
        self.links.iter().try_for_each(LinkSpec::validate)
    }

    /// Number of links `n`.
    pub fn n_links(&self) -> usize {
        self.links.len()
    }

    pub fn total_length_km(&self) -> f64 {
        self.links.iter().map(|l| l.length_km).sum()
    }
}

/// Sets the propagation and heralding delays of `link` from its length and
/// the source placement. `kappa_s` is left as is.
pub fn derive_kappas(link: LinkSpec, placement: SourcePlacement, c: f64) -> LinkSpec {
    let one_way = link.length_km / c;
    let (kappa_p, kappa_h) = match placement {
        SourcePlacement::AtNode => (one_way, one_way),
        SourcePlacement::SourceMiddle => (one_way / 2.0, one_way),
        SourcePlacement::MeetMiddle => (one_way / 2.0, one_way / 2.0),
    };
    LinkSpec {
        kappa_p,
        kappa_h,
        ..link
    }
}

/// Combined depolarizing parameter of every link state and every swap.
/// Independent of the swap order.
pub fn chi(chain: &ChainSpec) -> f64 {
    let n = chain.n_links();
    let swaps: f64 = chain.nodes[1..n].iter().map(|v| v.alpha).product();
    let links: f64 = chain.links.iter().map(|e| e.werner_w).product();
    swaps * links
}

/// Time between the last swap and both end nodes holding its outcome.
pub fn classical_delay(chain: &ChainSpec) -> f64 {
    let c = chain.light_speed;
    let n = chain.n_links();
    let last = chain.links[n - 1].length_km / c;
    if n == 1 {
        return last;
    }
    let rest: f64 = chain.links[..n - 1].iter().map(|l| l.length_km / c).sum();
    last.max(rest)
}

/// Heralded success probability `efficiency^2 * exp(-length / attenuation)`.
pub fn lleg_success_probability(length_km: f64, efficiency: f64, attenuation_km: f64) -> f64 {
    efficiency * efficiency * libm::exp(-length_km / attenuation_km)
}

/// Exponential rate whose CDF agrees with the geometric attempt count at
/// every attempt boundary. Gives an upper bound on fidelity.
pub fn mu_upper_bound(link: &LinkSpec) -> Result<f64> {
    if link.p >= 1.0 {
        return Err(Error::DeterministicService);
    }
    Ok(-libm::log1p(-link.p) / link.beta)
}

/// Exponential rate with the same mean as `beta * X`.
pub fn mu_mean_match(link: &LinkSpec) -> f64 {
    link.p / link.beta
}

/// How an exponential service rate is fitted to geometric LLEG attempts.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum RateMode {
    #[default]
    UpperBound,
    MeanMatch,
}

pub fn service_rate(link: &LinkSpec, mode: RateMode) -> Result<f64> {
    match mode {
        RateMode::UpperBound => mu_upper_bound(link),
        RateMode::MeanMatch => Ok(mu_mean_match(link)),
    }
}

/// Equidistant chain with identical hardware on every node and link.
#[derive(Debug, Clone, PartialEq)]
pub struct HomogeneousChain {
    pub links: usize,
    pub total_length_km: f64,
    /// Memory coherence time `T*`; decoherence rate is `1 / T*`.
    pub coherence_time_s: f64,
    pub werner_w: f64,
    pub alpha: f64,
    pub beta_s: f64,
    pub efficiency: f64,
    pub attenuation_km: f64,
    pub kappa_s: f64,
    pub light_speed: f64,
    pub placement: SourcePlacement,
    pub noise: NoiseModel,
    pub policy: Policy,
}

impl Default for HomogeneousChain {
    fn default() -> Self {
        HomogeneousChain {
            links: 10,
            total_length_km: 500.0,
            coherence_time_s: 1.0,
            werner_w: 0.995,
            alpha: 0.996,
            beta_s: 1e-5,
            efficiency: 0.7,
            attenuation_km: 22.0,
            kappa_s: 0.0,
            light_speed: DEFAULT_LIGHT_SPEED_KM_S,
            placement: SourcePlacement::AtNode,
            noise: NoiseModel::Depolarizing,
            policy: Policy::Yqf,
        }
    }
}

impl HomogeneousChain {
    pub fn link_length_km(&self) -> f64 {
        self.total_length_km / self.links as f64
    }

    pub fn build(&self) -> Result<ChainSpec> {
        if self.links == 0 {
            return Err(invalid("chain.links", "must be >= 1"));
        }
        if !(self.efficiency > 0.0 && self.efficiency <= 1.0) {
            return Err(invalid("link.efficiency", "must be in (0, 1]"));
        }
        if !(self.attenuation_km > 0.0) {
            return Err(invalid("link.attenuation_km", "must be > 0"));
        }
        let node = NodeSpec::from_coherence_time(self.coherence_time_s, self.alpha)?;
        let length_km = self.link_length_km();
        let link = derive_kappas(
            LinkSpec {
                length_km,
                p: lleg_success_probability(length_km, self.efficiency, self.attenuation_km),
                beta: self.beta_s,
                kappa_s: self.kappa_s,
                kappa_p: 0.0,
                kappa_h: 0.0,
                werner_w: self.werner_w,
            },
            self.placement,
            self.light_speed,
        );
        ChainSpec::new(
            alloc::vec![node; self.links + 1],
            alloc::vec![link; self.links],
            self.light_speed,
            self.placement,
            self.noise,
            self.policy,
        )
    }
}

pub(crate) fn invalid(field: &'static str, reason: &'static str) -> Error {
    Error::InvalidParameter { field, reason }
}
