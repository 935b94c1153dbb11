//! Experiment drivers. Grid points run on the rayon pool and results are
//! assembled by grid index, so output does not depend on scheduling.

use rayon::prelude::*;

use repeater_core::analytic::{one_shot_fidelity, queue_fidelity, secret_key_rate};
use repeater_core::model::{service_rate, ChainSpec, HomogeneousChain, Policy, RateMode};
use repeater_core::sim::{
    estimate_skr, simulate_one_shot_block, simulate_stream, FidelityReport, OneShotBlock,
    SimConfig, ONE_SHOT_BLOCK,
};

use crate::config::{ConfigError, ExperimentConfig};
use crate::output::{SweepResult, SweepRow};

#[derive(Debug, thiserror::Error)]
pub enum ExperimentError {
    #[error("config: {0}")]
    Config(#[from] ConfigError),
    #[error(transparent)]
    Model(#[from] repeater_core::Error),
}

pub type Result<T> = std::result::Result<T, ExperimentError>;

pub fn policy_name(p: Policy) -> &'static str {
    match p {
        Policy::Oqf => "oqf",
        Policy::Yqf => "yqf",
    }
}

/// Rate at which pairs can actually be delivered: `lambda`, capped by the
/// slowest link (the first included, since it still has to serve every
/// request even though it adds no memory decoherence).
pub fn achieved_rate(chain: &ChainSpec, lambda: f64, mode: RateMode) -> Result<f64> {
    let mut rate = lambda;
    for link in &chain.links {
        rate = rate.min(service_rate(link, mode)?);
    }
    Ok(rate)
}

/// Analytic fidelity and key rate under a stream of rate `lambda`.
pub fn analytic_point(chain: &ChainSpec, lambda: f64, mode: RateMode) -> Result<(f64, f64)> {
    let f = queue_fidelity(chain, lambda, mode)?;
    Ok((f, secret_key_rate(achieved_rate(chain, lambda, mode)?, f)))
}

/// One-shot Monte Carlo split into fixed blocks; blocks merge in index
/// order, so the result equals the serial run bit for bit.
pub fn parallel_one_shot(chain: &ChainSpec, sim: &SimConfig) -> Result<FidelityReport> {
    sim.validate()?;
    let blocks: Vec<_> = (0..sim.trials.div_ceil(ONE_SHOT_BLOCK))
        .map(|b| b * ONE_SHOT_BLOCK..((b + 1) * ONE_SHOT_BLOCK).min(sim.trials))
        .collect();
    let parts = blocks
        .into_par_iter()
        .map(|r| simulate_one_shot_block(chain, sim, r))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    let mut total = OneShotBlock::default();
    for p in &parts {
        total.merge(p);
    }
    Ok(total.into_report())
}

fn fill_sim(row: &mut SweepRow, report: &FidelityReport, lambda: Option<f64>) {
    row.fidelity_sim = Some(report.fidelity.mean);
    row.ci_low = Some(report.fidelity.ci_low);
    row.ci_high = Some(report.fidelity.ci_high);
    row.skr_sim = lambda.map(|l| estimate_skr(report, l));
    if report.throughput.is_some() {
        row.incomplete = Some(report.incomplete);
    }
}

/// Single request on an idle chain, the configured chain size and policy.
pub fn run_one_shot(cfg: &ExperimentConfig) -> Result<SweepResult> {
    let chain = cfg.build_chain(cfg.chain.links, cfg.chain.policy)?;
    let mut row = SweepRow {
        links: Some(chain.n_links() as u64),
        distance_km: Some(chain.total_length_km()),
        alpha: Some(cfg.chain.alpha),
        coherence_time_s: Some(cfg.chain.coherence_time_s),
        ..Default::default()
    };
    if cfg.engine.analytic() {
        row.fidelity_analytic = Some(one_shot_fidelity(&chain));
    }
    if cfg.engine.simulate() {
        fill_sim(&mut row, &parallel_one_shot(&chain, &cfg.sim)?, None);
    }
    Ok(SweepResult {
        rows: vec![row.quantized()],
    })
}

fn stream_row(cfg: &ExperimentConfig, chain: &ChainSpec, lambda: f64) -> Result<SweepRow> {
    let mut row = SweepRow {
        policy: Some(policy_name(chain.policy).into()),
        links: Some(chain.n_links() as u64),
        distance_km: Some(chain.total_length_km()),
        lambda: Some(lambda),
        ..Default::default()
    };
    if cfg.engine.analytic() {
        let (f, skr) = analytic_point(chain, lambda, cfg.rate_mode)?;
        row.fidelity_analytic = Some(f);
        row.skr_analytic = Some(skr);
    }
    if cfg.engine.simulate() {
        // far past stability no measured request may finish; the point
        // then has no simulated value
        match simulate_stream(chain, lambda, &cfg.sim) {
            Ok(report) => fill_sim(&mut row, &report, Some(lambda)),
            Err(repeater_core::Error::InsufficientSamples) => {}
            Err(e) => return Err(e.into()),
        }
    }
    Ok(row.quantized())
}

/// Poisson stream at `workload.lambda` through the configured chain.
pub fn run_stream(cfg: &ExperimentConfig) -> Result<SweepResult> {
    let chain = cfg.build_chain(cfg.chain.links, cfg.chain.policy)?;
    Ok(SweepResult {
        rows: vec![stream_row(cfg, &chain, cfg.lambda)?],
    })
}

/// Fidelity and key rate over the λ grid for every chain size and policy.
/// Rows are ordered by (links, policy, λ).
pub fn run_lambda_sweep(cfg: &ExperimentConfig) -> Result<SweepResult> {
    let mut points = Vec::new();
    for &links in &cfg.sweep_links {
        for &policy in &cfg.policies {
            let chain = cfg.build_chain(links, policy)?;
            points.extend(cfg.lambda_grid.iter().map(|&l| (chain.clone(), l)));
        }
    }
    let rows = points
        .par_iter()
        .map(|(chain, lambda)| stream_row(cfg, chain, *lambda))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { rows })
}

/// Best analytic key rate over node counts `nodes_min..=nodes_max` for
/// a template at fixed distance. Only counts whose every link keeps up with
/// `lambda` are candidates. Ties go to the smaller node count; when no
/// candidate yields a positive rate the count is `None`.
pub fn optimize_nodes(
    cfg: &ExperimentConfig,
    template: &HomogeneousChain,
    lambda: f64,
) -> Result<(Option<usize>, f64, Option<f64>)> {
    let mut best = (None, 0.0, None);
    for nodes in cfg.nodes_min..=cfg.nodes_max {
        let chain = HomogeneousChain {
            links: nodes - 1,
            ..template.clone()
        }
        .build()?;
        if achieved_rate(&chain, lambda, cfg.rate_mode)? < lambda {
            continue;
        }
        let (f, skr) = analytic_point(&chain, lambda, cfg.rate_mode)?;
        if skr > best.1 {
            best = (Some(nodes), skr, Some(f));
        }
    }
    Ok(best)
}

fn optimum_row(
    cfg: &ExperimentConfig,
    template: HomogeneousChain,
    lambda: f64,
) -> Result<SweepRow> {
    let (nodes, skr, f) = optimize_nodes(cfg, &template, lambda)?;
    Ok(SweepRow {
        policy: Some(policy_name(template.policy).into()),
        links: nodes.map(|n| n as u64 - 1),
        distance_km: Some(template.total_length_km),
        lambda: Some(lambda),
        coherence_time_s: Some(template.coherence_time_s),
        alpha: Some(template.alpha),
        fidelity_analytic: f,
        skr_analytic: Some(skr),
        n_repeaters_opt: nodes.map(|n| n as u64),
        ..Default::default()
    }
    .quantized())
}

/// Optimal node count and key rate at every distance of the grid, using
/// the first configured policy and `workload.lambda`.
pub fn run_distance_optimization(cfg: &ExperimentConfig) -> Result<SweepResult> {
    let rows = cfg
        .distance_grid
        .par_iter()
        .map(|&d| optimum_row(cfg, cfg.with_geometry(2, d), cfg.lambda))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { rows })
}

/// Optimized key rate over the (coherence time, α) grid at the template
/// distance, row-major with coherence time as the outer axis.
pub fn run_hardware_heatmap(cfg: &ExperimentConfig) -> Result<SweepResult> {
    let mut cells = Vec::new();
    for &t in &cfg.heatmap_coherence {
        for &a in &cfg.heatmap_alpha {
            cells.push(HomogeneousChain {
                coherence_time_s: t,
                alpha: a,
                ..cfg.with_geometry(2, cfg.chain.total_length_km)
            });
        }
    }
    let rows = cells
        .into_par_iter()
        .map(|c| optimum_row(cfg, c, cfg.lambda))
        .collect::<Result<Vec<_>>>()?;
    Ok(SweepResult { rows })
}
