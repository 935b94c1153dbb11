//! Flat `key = value` experiment configuration.
//!
//! Lines are `section.key = value`; `#` starts a comment. Grids are either
//! comma-separated lists or `lin:start:end:count` / `log:start:end:count`.
//! Per-link and per-node overrides use an index after the section name,
//! e.g. `link.3.werner_w = 0.99` or `node.0.coherence_time_s = 2`.

use std::collections::BTreeMap;
use std::fmt;
use std::path::{Path, PathBuf};

use repeater_core::model::{
    derive_kappas, lleg_success_probability, ChainSpec, HomogeneousChain, NodeSpec, NoiseModel,
    Policy, RateMode, SourcePlacement,
};
use repeater_core::sim::{ServiceModel, SimConfig};

/// Environment variable naming the directory searched for relative config
/// paths and for `default.cfg`.
pub const CONFIG_DIR_ENV: &str = "REPEATER_CONFIG_DIR";

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
#[error("{field}: {message}")]
pub struct ConfigError {
    pub field: String,
    pub message: String,
}

impl ConfigError {
    pub fn new(field: impl Into<String>, message: impl fmt::Display) -> Self {
        ConfigError {
            field: field.into(),
            message: message.to_string(),
        }
    }
}

impl From<repeater_core::Error> for ConfigError {
    fn from(e: repeater_core::Error) -> Self {
        match e {
            repeater_core::Error::InvalidParameter { field, reason } => {
                ConfigError::new(field, reason)
            }
            other => ConfigError::new("chain", other),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Engine {
    Analytic,
    Simulate,
    Both,
}

impl Engine {
    pub fn analytic(self) -> bool {
        matches!(self, Engine::Analytic | Engine::Both)
    }

    pub fn simulate(self) -> bool {
        matches!(self, Engine::Simulate | Engine::Both)
    }
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct LinkOverride {
    pub length_km: Option<f64>,
    pub p: Option<f64>,
    pub beta_s: Option<f64>,
    pub kappa_s: Option<f64>,
    pub werner_w: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct NodeOverride {
    pub coherence_time_s: Option<f64>,
    pub alpha: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Homogeneous template; `chain.policy` is replaced by each entry of
    /// `policies` in sweeps.
    pub chain: HomogeneousChain,
    pub link_overrides: BTreeMap<usize, LinkOverride>,
    pub node_overrides: BTreeMap<usize, NodeOverride>,
    /// Single arrival rate for `stream`, distance optimization and heatmaps.
    pub lambda: f64,
    pub lambda_grid: Vec<f64>,
    /// Chain sizes (links) swept by `sweep-lambda`.
    pub sweep_links: Vec<usize>,
    pub policies: Vec<Policy>,
    pub engine: Engine,
    /// Exponential rate used by the analytic queue model.
    pub rate_mode: RateMode,
    pub sim: SimConfig,
    pub distance_grid: Vec<f64>,
    /// Node counts (end nodes included) searched when optimizing.
    pub nodes_min: usize,
    pub nodes_max: usize,
    pub heatmap_coherence: Vec<f64>,
    pub heatmap_alpha: Vec<f64>,
    pub output: Option<PathBuf>,
}

impl Default for ExperimentConfig {
    fn default() -> Self {
        ExperimentConfig {
            chain: HomogeneousChain::default(),
            link_overrides: BTreeMap::new(),
            node_overrides: BTreeMap::new(),
            lambda: 2000.0,
            lambda_grid: log_grid(10.0, 30_000.0, 48),
            sweep_links: vec![5, 10, 20],
            policies: vec![Policy::Yqf, Policy::Oqf],
            engine: Engine::Analytic,
            rate_mode: RateMode::UpperBound,
            sim: SimConfig {
                service: ServiceModel::Exponential(RateMode::UpperBound),
                ..SimConfig::default()
            },
            distance_grid: lin_grid(50.0, 1000.0, 20),
            nodes_min: 2,
            nodes_max: 100,
            heatmap_coherence: log_grid(0.01, 10.0, 13),
            heatmap_alpha: lin_grid(0.99, 0.999, 10),
            output: None,
        }
    }
}

pub fn lin_grid(start: f64, end: f64, count: usize) -> Vec<f64> {
    if count == 1 {
        return vec![start];
    }
    let step = (end - start) / (count - 1) as f64;
    (0..count).map(|i| start + step * i as f64).collect()
}

pub fn log_grid(start: f64, end: f64, count: usize) -> Vec<f64> {
    lin_grid(start.ln(), end.ln(), count)
        .into_iter()
        .map(f64::exp)
        .collect()
}

fn parse_f64(field: &str, v: &str) -> Result<f64, ConfigError> {
    let x: f64 = v
        .parse()
        .map_err(|_| ConfigError::new(field, format!("expected a number, got {v:?}")))?;
    if !x.is_finite() {
        return Err(ConfigError::new(field, "must be finite"));
    }
    Ok(x)
}

/// Accepts plain integers as well as `1e6`-style notation.
pub fn parse_count(field: &str, v: &str) -> Result<u64, ConfigError> {
    if let Ok(n) = v.parse::<u64>() {
        return Ok(n);
    }
    let x = parse_f64(field, v)?;
    if x < 0.0 || x.fract() != 0.0 || x > u64::MAX as f64 {
        return Err(ConfigError::new(
            field,
            format!("expected a non-negative integer, got {v:?}"),
        ));
    }
    Ok(x as u64)
}

fn parse_usize(field: &str, v: &str) -> Result<usize, ConfigError> {
    parse_count(field, v).map(|n| n as usize)
}

fn parse_grid(field: &str, v: &str) -> Result<Vec<f64>, ConfigError> {
    let parts: Vec<&str> = v.split(':').map(str::trim).collect();
    let grid = match parts.as_slice() {
        [kind @ ("lin" | "log"), a, b, n] => {
            let (a, b) = (parse_f64(field, a)?, parse_f64(field, b)?);
            let n = parse_usize(field, n)?;
            if n == 0 {
                return Err(ConfigError::new(field, "grid must be non-empty"));
            }
            if *kind == "log" {
                if a <= 0.0 || b <= 0.0 {
                    return Err(ConfigError::new(field, "log grid bounds must be > 0"));
                }
                log_grid(a, b, n)
            } else {
                lin_grid(a, b, n)
            }
        }
        _ => v
            .split(',')
            .map(|s| parse_f64(field, s.trim()))
            .collect::<Result<Vec<_>, _>>()?,
    };
    check_sorted(field, &grid)?;
    Ok(grid)
}

fn parse_int_grid(field: &str, v: &str) -> Result<Vec<usize>, ConfigError> {
    let grid = v
        .split(',')
        .map(|s| parse_usize(field, s.trim()))
        .collect::<Result<Vec<_>, _>>()?;
    let as_f: Vec<f64> = grid.iter().map(|&n| n as f64).collect();
    check_sorted(field, &as_f)?;
    Ok(grid)
}

fn check_sorted(field: &str, grid: &[f64]) -> Result<(), ConfigError> {
    if grid.is_empty() {
        return Err(ConfigError::new(field, "grid must be non-empty"));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(ConfigError::new(field, "grid must be strictly increasing"));
    }
    Ok(())
}

fn parse_policy(field: &str, v: &str) -> Result<Policy, ConfigError> {
    match v.to_ascii_lowercase().as_str() {
        "oqf" => Ok(Policy::Oqf),
        "yqf" => Ok(Policy::Yqf),
        _ => Err(ConfigError::new(
            field,
            format!("expected oqf or yqf, got {v:?}"),
        )),
    }
}

pub fn parse_engine(field: &str, v: &str) -> Result<Engine, ConfigError> {
    match v.to_ascii_lowercase().as_str() {
        "analytic" => Ok(Engine::Analytic),
        "simulate" | "sim" => Ok(Engine::Simulate),
        "both" => Ok(Engine::Both),
        _ => Err(ConfigError::new(
            field,
            format!("expected analytic, simulate or both, got {v:?}"),
        )),
    }
}

fn parse_rate_mode(field: &str, v: &str) -> Result<RateMode, ConfigError> {
    match v {
        "upper-bound" => Ok(RateMode::UpperBound),
        "mean-match" => Ok(RateMode::MeanMatch),
        _ => Err(ConfigError::new(
            field,
            format!("expected upper-bound or mean-match, got {v:?}"),
        )),
    }
}

impl ExperimentConfig {
    /// Parse a config file body on top of the defaults.
    pub fn parse(text: &str) -> Result<Self, ConfigError> {
        let mut cfg = ExperimentConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| {
                ConfigError::new(format!("line {}", i + 1), "expected `key = value`")
            })?;
            cfg.set(k.trim(), v.trim())?;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| ConfigError::new("config", format!("{}: {e}", path.display())))?;
        Self::parse(&text)
    }

    /// Apply one `key = value` assignment.
    pub fn set(&mut self, key: &str, v: &str) -> Result<(), ConfigError> {
        let c = &mut self.chain;
        match key {
            "chain.links" => c.links = parse_usize(key, v)?,
            "chain.total_length_km" => c.total_length_km = parse_f64(key, v)?,
            "chain.light_speed_km_s" => c.light_speed = parse_f64(key, v)?,
            "chain.placement" => {
                c.placement = match v {
                    "at-node" => SourcePlacement::AtNode,
                    "source-middle" => SourcePlacement::SourceMiddle,
                    "meet-middle" => SourcePlacement::MeetMiddle,
                    _ => {
                        return Err(ConfigError::new(
                            key,
                            format!("expected at-node, source-middle or meet-middle, got {v:?}"),
                        ))
                    }
                }
            }
            "chain.noise" => {
                c.noise = match v {
                    "depolarizing" => NoiseModel::Depolarizing,
                    "dephasing" => NoiseModel::Dephasing,
                    _ => return Err(ConfigError::new(key, format!("expected depolarizing or dephasing, got {v:?}"))),
                }
            }
            "node.coherence_time_s" => c.coherence_time_s = parse_f64(key, v)?,
            "node.alpha" => c.alpha = parse_f64(key, v)?,
            "link.werner_w" => c.werner_w = parse_f64(key, v)?,
            "link.beta_s" => c.beta_s = parse_f64(key, v)?,
            "link.efficiency" => c.efficiency = parse_f64(key, v)?,
            "link.attenuation_km" => c.attenuation_km = parse_f64(key, v)?,
            "link.kappa_s" => c.kappa_s = parse_f64(key, v)?,
            "workload.lambda" => self.lambda = parse_f64(key, v)?,
            "workload.lambda_grid" => self.lambda_grid = parse_grid(key, v)?,
            "workload.policy" => {
                self.policies = if v == "both" {
                    vec![Policy::Yqf, Policy::Oqf]
                } else {
                    v.split(',').map(|s| parse_policy(key, s.trim())).collect::<Result<_, _>>()?
                };
                c.policy = self.policies[0];
            }
            "workload.rate_mode" => self.rate_mode = parse_rate_mode(key, v)?,
            "sweep.links" => self.sweep_links = parse_int_grid(key, v)?,
            "engine" => self.engine = parse_engine(key, v)?,
            "sim.trials" => self.sim.trials = parse_count(key, v)?,
            "sim.requests" => self.sim.requests = parse_count(key, v)?,
            "sim.warmup" => self.sim.warmup = parse_f64(key, v)?,
            "sim.cooldown" => self.sim.cooldown = parse_f64(key, v)?,
            "sim.batches" => self.sim.batches = parse_usize(key, v)?,
            "sim.seed" => self.sim.seed = parse_count(key, v)?,
            "sim.service" => {
                self.sim.service = match v {
                    "geometric" => ServiceModel::GeometricAttempts,
                    "exponential-upper-bound" => ServiceModel::Exponential(RateMode::UpperBound),
                    "exponential-mean-match" => ServiceModel::Exponential(RateMode::MeanMatch),
                    _ => {
                        return Err(ConfigError::new(
                            key,
                            format!("expected geometric, exponential-upper-bound or exponential-mean-match, got {v:?}"),
                        ))
                    }
                }
            }
            "optimize.distance_km" => self.distance_grid = parse_grid(key, v)?,
            "optimize.nodes_min" => self.nodes_min = parse_usize(key, v)?,
            "optimize.nodes_max" => self.nodes_max = parse_usize(key, v)?,
            "heatmap.coherence_time_s" => self.heatmap_coherence = parse_grid(key, v)?,
            "heatmap.alpha" => self.heatmap_alpha = parse_grid(key, v)?,
            "output.path" => self.output = Some(PathBuf::from(v)),
            _ => return self.set_indexed(key, v),
        }
        Ok(())
    }

    fn set_indexed(&mut self, key: &str, v: &str) -> Result<(), ConfigError> {
        let unknown = || ConfigError::new(key, "unknown key");
        let mut parts = key.splitn(3, '.');
        let (Some(section), Some(idx), Some(field)) = (parts.next(), parts.next(), parts.next())
        else {
            return Err(unknown());
        };
        let idx: usize = idx.parse().map_err(|_| unknown())?;
        match section {
            "link" => {
                let o = self.link_overrides.entry(idx).or_default();
                let x = Some(parse_f64(key, v)?);
                match field {
                    "length_km" => o.length_km = x,
                    "p" => o.p = x,
                    "beta_s" => o.beta_s = x,
                    "kappa_s" => o.kappa_s = x,
                    "werner_w" => o.werner_w = x,
                    _ => return Err(unknown()),
                }
            }
            "node" => {
                let o = self.node_overrides.entry(idx).or_default();
                let x = Some(parse_f64(key, v)?);
                match field {
                    "coherence_time_s" => o.coherence_time_s = x,
                    "alpha" => o.alpha = x,
                    _ => return Err(unknown()),
                }
            }
            _ => return Err(unknown()),
        }
        Ok(())
    }

    pub fn validate(&self) -> Result<(), ConfigError> {
        self.build_chain(self.chain.links, self.chain.policy)?;
        self.sim.validate()?;
        if self.lambda.is_nan() || self.lambda <= 0.0 {
            return Err(ConfigError::new("workload.lambda", "must be > 0"));
        }
        if self.lambda_grid.iter().any(|&l| l <= 0.0) {
            return Err(ConfigError::new(
                "workload.lambda_grid",
                "rates must be > 0",
            ));
        }
        if self.sweep_links.contains(&0) {
            return Err(ConfigError::new("sweep.links", "chain sizes must be >= 1"));
        }
        if self.distance_grid.iter().any(|&d| d <= 0.0) {
            return Err(ConfigError::new(
                "optimize.distance_km",
                "distances must be > 0",
            ));
        }
        if self.nodes_min < 2 || self.nodes_max < self.nodes_min {
            return Err(ConfigError::new(
                "optimize.nodes_min",
                "need 2 <= nodes_min <= nodes_max",
            ));
        }
        if self.heatmap_coherence.iter().any(|&t| t <= 0.0) {
            return Err(ConfigError::new("heatmap.coherence_time_s", "must be > 0"));
        }
        if self.heatmap_alpha.iter().any(|a| !(0.0..=1.0).contains(a)) {
            return Err(ConfigError::new("heatmap.alpha", "must be in [0, 1]"));
        }
        Ok(())
    }

    /// Chain with `links` links and the template hardware, with the index
    /// overrides applied. Overrides past the end of the chain are an error.
    pub fn build_chain(&self, links: usize, policy: Policy) -> Result<ChainSpec, ConfigError> {
        let template = HomogeneousChain {
            links,
            policy,
            ..self.chain.clone()
        };
        let mut chain = template.build()?;
        for (&i, o) in &self.link_overrides {
            let name = format!("link.{i}");
            let link = chain
                .links
                .get_mut(i)
                .ok_or_else(|| ConfigError::new(&name, format!("chain has {links} links")))?;
            if let Some(l) = o.length_km {
                link.length_km = l;
                link.p = lleg_success_probability(l, template.efficiency, template.attenuation_km);
            }
            if let Some(p) = o.p {
                link.p = p;
            }
            if let Some(b) = o.beta_s {
                link.beta = b;
            }
            if let Some(k) = o.kappa_s {
                link.kappa_s = k;
            }
            if let Some(w) = o.werner_w {
                link.werner_w = w;
            }
            *link = derive_kappas(*link, template.placement, template.light_speed);
            link.validate().map_err(|e| prefixed(&name, e))?;
        }
        for (&i, o) in &self.node_overrides {
            let name = format!("node.{i}");
            let node = chain
                .nodes
                .get_mut(i)
                .ok_or_else(|| ConfigError::new(&name, format!("chain has {} nodes", links + 1)))?;
            let t = o.coherence_time_s.unwrap_or(template.coherence_time_s);
            let a = o.alpha.unwrap_or(node.alpha);
            *node = NodeSpec::from_coherence_time(t, a).map_err(|e| prefixed(&name, e))?;
        }
        chain.validate()?;
        Ok(chain)
    }

    /// Template hardware with a different node count and total distance.
    pub fn with_geometry(&self, nodes: usize, total_length_km: f64) -> HomogeneousChain {
        HomogeneousChain {
            links: nodes - 1,
            total_length_km,
            ..self.chain.clone()
        }
    }
}

fn prefixed(prefix: &str, e: repeater_core::Error) -> ConfigError {
    match e {
        repeater_core::Error::InvalidParameter { field, reason } => {
            let leaf = field.rsplit('.').next().unwrap_or(field);
            ConfigError::new(format!("{prefix}.{leaf}"), reason)
        }
        other => ConfigError::new(prefix, other),
    }
}

/// Resolve a config path: as given if it exists, otherwise relative to
/// `$REPEATER_CONFIG_DIR`. With no path, `$REPEATER_CONFIG_DIR/default.cfg`
/// is used when present.
pub fn resolve_config_path(path: Option<&Path>) -> Option<PathBuf> {
    let dir = std::env::var_os(CONFIG_DIR_ENV).map(PathBuf::from);
    match path {
        Some(p) if p.exists() || p.is_absolute() => Some(p.to_path_buf()),
        Some(p) => Some(
            dir.map(|d| d.join(p))
                .filter(|c| c.exists())
                .unwrap_or_else(|| p.to_path_buf()),
        ),
        None => dir.map(|d| d.join("default.cfg")).filter(|c| c.exists()),
    }
}
