use alloc::collections::{BinaryHeap, VecDeque};
use alloc::vec;
use alloc::vec::Vec;
use core::cmp::Ordering;

use super::{
    substream, unit_open, Estimate, FidelityReport, LlegSampler, Moments, QueueStats, SimConfig,
    SimRng,
};
use crate::analytic::{delta, EffectiveRates};
use crate::channel::{fidelity, final_state};
use crate::model::{chi, ChainSpec, Policy};
use crate::{Error, Result};

/// A measured request that completed.
#[derive(Debug, Clone, PartialEq)]
pub struct Request {
    pub id: u64,
    pub arrival_time: f64,
    /// Sojourn at every queue `0..n`, including the non-decohering first one.
    pub sojourns: Vec<f64>,
    /// `Σ_{j>=1} Γ'_j (S_j + κ_j)`.
    pub tau: f64,
    /// Last service completion plus the last link's fixed delay.
    pub completion_time: f64,
    pub fidelity: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
enum EventKind {
    Arrival,
    ServiceDone(usize),
    Transit { queue: usize, req: u32 },
}

#[derive(Debug, Clone, Copy)]
struct Event {
    time: f64,
    seq: u64,
    kind: EventKind,
}

impl PartialEq for Event {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Event {}

impl PartialOrd for Event {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Event {
    // reversed: BinaryHeap is a max-heap
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .time
            .total_cmp(&self.time)
            .then_with(|| other.seq.cmp(&self.seq))
    }
}

struct Tracked {
    queue_arrival: f64,
    arrival_time: f64,
    tau: f64,
    sojourns: Vec<f64>,
    measured: bool,
}

struct Node {
    waiting: VecDeque<u32>,
    busy: bool,
    sampler: LlegSampler,
    rng: SimRng,
    area: f64,
    last_change: f64,
    arrivals_in_window: u64,
    last_departure: Option<f64>,
    inter_departure: Moments,
}

/// Batch accumulator: sum and count per batch.
struct Batches {
    sums: Vec<f64>,
    counts: Vec<u64>,
}

impl Batches {
    fn new(b: usize) -> Self {
        Batches {
            sums: vec![0.0; b],
            counts: vec![0; b],
        }
    }

    fn push(&mut self, batch: usize, x: f64) {
        self.sums[batch] += x;
        self.counts[batch] += 1;
    }

    /// Overall mean with a batch-means standard error.
    fn estimate(&self) -> Estimate {
        let total: u64 = self.counts.iter().sum();
        let mean = self.sums.iter().sum::<f64>() / total as f64;
        let mut m = Moments::default();
        for (s, &c) in self.sums.iter().zip(self.counts.iter()) {
            if c > 0 {
                m.push(s / c as f64);
            }
        }
        let se = if m.count() < 2 {
            0.0
        } else {
            libm::sqrt(m.variance() / m.count() as f64)
        };
        Estimate::new(mean, se, total)
    }
}

struct Window {
    start: Option<f64>,
    end: Option<f64>,
}

impl Window {
    /// Overlap of `[a, b]` with the window, treating an unknown end as open.
    fn overlap(&self, a: f64, b: f64) -> f64 {
        let Some(start) = self.start else { return 0.0 };
        let lo = a.max(start);
        let hi = match self.end {
            Some(end) => b.min(end),
            None => b,
        };
        (hi - lo).max(0.0)
    }

    fn contains(&self, t: f64) -> bool {
        match (self.start, self.end) {
            (Some(s), Some(e)) => t >= s && t <= e,
            (Some(s), None) => t >= s,
            _ => false,
        }
    }
}

pub fn simulate_stream(chain: &ChainSpec, lambda: f64, cfg: &SimConfig) -> Result<FidelityReport> {
    run(chain, lambda, cfg, false).map(|(r, _)| r)
}

/// As [`simulate_stream`], also returning every completed measured request
/// in completion order.
pub fn simulate_stream_detailed(
    chain: &ChainSpec,
    lambda: f64,
    cfg: &SimConfig,
) -> Result<(FidelityReport, Vec<Request>)> {
    run(chain, lambda, cfg, true)
}

/// Poisson arrivals at `v_0` traverse one queue per link. A queue runs LLEG
/// whenever it holds a request; each success is consumed by the oldest (OQF)
/// or newest (YQF) waiting request, which then moves on after the link's
/// fixed delay. Queue 0 adds no decoherence.
fn run(
    chain: &ChainSpec,
    lambda: f64,
    cfg: &SimConfig,
    keep_requests: bool,
) -> Result<(FidelityReport, Vec<Request>)> {
    chain.validate()?;
    cfg.validate()?;
    if !(lambda > 0.0) || !lambda.is_finite() {
        return Err(crate::model::invalid(
            "workload.lambda",
            "must be finite and > 0",
        ));
    }
    let total = cfg.requests;
    let warm = (libm::floor(cfg.warmup * total as f64) as u64).min(total);
    let measured_count = total - warm;
    if measured_count < cfg.batches as u64 {
        return Err(Error::InsufficientSamples);
    }

    let n = chain.n_links();
    let chi = chi(chain);
    let delta = delta(chain);
    let rates = EffectiveRates::from_chain(chain);
    let gamma: Vec<f64> = (0..n)
        .map(|j| if j == 0 { 0.0 } else { rates.for_link(j) })
        .collect();
    let mut nodes = chain
        .links
        .iter()
        .enumerate()
        .map(|(j, link)| {
            Ok(Node {
                waiting: VecDeque::new(),
                busy: false,
                sampler: LlegSampler::new(link, cfg.service)?,
                rng: substream(cfg.seed, 1 + j as u64),
                area: 0.0,
                last_change: 0.0,
                arrivals_in_window: 0,
                last_departure: None,
                inter_departure: Moments::default(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let non_stationary_rates = nodes.iter().any(|q| lambda >= q.sampler.rate());

    let mut arrivals = substream(cfg.seed, 0);
    let mut requests: Vec<Tracked> = Vec::new();
    let mut heap = BinaryHeap::new();
    let mut seq = 0u64;
    let mut push = |heap: &mut BinaryHeap<Event>, time: f64, kind: EventKind| {
        heap.push(Event { time, seq, kind });
        seq += 1;
    };

    let batches = cfg.batches;
    let batch_of =
        |id: u64| ((id - warm) as u128 * batches as u128 / measured_count as u128) as usize;
    let mut fid = Batches::new(batches);
    let mut decay = Batches::new(batches);
    let mut sojourn: Vec<Batches> = (0..n).map(|_| Batches::new(batches)).collect();
    let mut done: Vec<Request> = Vec::new();

    let mut window = Window {
        start: None,
        end: None,
    };
    let mut stop_at = f64::INFINITY;
    let mut pending_measured = measured_count;
    let mut completions_in_window = 0u64;

    push(
        &mut heap,
        -libm::log(unit_open(&mut arrivals)) / lambda,
        EventKind::Arrival,
    );

    while let Some(ev) = heap.pop() {
        let now = ev.time;
        if now > stop_at || (window.end.is_some() && pending_measured == 0) {
            break;
        }
        match ev.kind {
            EventKind::Arrival => {
                let id = requests.len() as u64;
                let measured = id >= warm && id < total;
                if id == warm {
                    window.start = Some(now);
                    for q in nodes.iter_mut() {
                        q.last_change = q.last_change.max(now);
                    }
                }
                if id + 1 == total {
                    window.end = Some(now);
                    let span = now - window.start.unwrap_or(now);
                    stop_at = now + cfg.cooldown * span;
                }
                requests.push(Tracked {
                    queue_arrival: now,
                    arrival_time: now,
                    tau: 0.0,
                    sojourns: if measured {
                        Vec::with_capacity(n)
                    } else {
                        Vec::new()
                    },
                    measured,
                });
                enqueue(
                    &mut nodes,
                    0,
                    id as u32,
                    now,
                    &window,
                    &mut requests,
                    &mut heap,
                    &mut push,
                );
                push(
                    &mut heap,
                    now - libm::log(unit_open(&mut arrivals)) / lambda,
                    EventKind::Arrival,
                );
            }
            EventKind::Transit { queue, req } => {
                enqueue(
                    &mut nodes,
                    queue,
                    req,
                    now,
                    &window,
                    &mut requests,
                    &mut heap,
                    &mut push,
                );
            }
            EventKind::ServiceDone(j) => {
                let node = &mut nodes[j];
                account(node, now, &window);
                let req = match chain.policy {
                    Policy::Oqf => node.waiting.pop_front(),
                    Policy::Yqf => node.waiting.pop_back(),
                }
                .expect("service only runs on a non-empty queue");
                if window.contains(now) {
                    if let Some(last) = node.last_departure {
                        node.inter_departure.push(now - last);
                    }
                    node.last_departure = Some(now);
                }
                if node.waiting.is_empty() {
                    node.busy = false;
                } else {
                    let t = now + node.sampler.sample_service(&mut node.rng);
                    push(&mut heap, t, EventKind::ServiceDone(j));
                }
                let kappa = node.sampler.kappa();

                let r = &mut requests[req as usize];
                let s = now - r.queue_arrival;
                r.tau += gamma[j] * (s + kappa);
                if r.measured {
                    r.sojourns.push(s);
                    sojourn[j].push(batch_of(req as u64), s);
                }
                let leave = now + kappa.max(0.0);
                if j + 1 < n {
                    push(&mut heap, leave, EventKind::Transit { queue: j + 1, req });
                } else {
                    if window.contains(leave) {
                        completions_in_window += 1;
                    }
                    if r.measured {
                        pending_measured -= 1;
                        let f = fidelity(&final_state(chi, delta, r.tau, chain.noise));
                        let b = batch_of(req as u64);
                        fid.push(b, f);
                        decay.push(b, libm::exp(-r.tau));
                        if keep_requests {
                            done.push(Request {
                                id: req as u64,
                                arrival_time: r.arrival_time,
                                sojourns: core::mem::take(&mut r.sojourns),
                                tau: r.tau,
                                completion_time: leave,
                                fidelity: f,
                            });
                        } else {
                            r.sojourns = Vec::new();
                        }
                    }
                }
            }
        }
    }

    let completed = measured_count - pending_measured;
    if completed < 2 {
        return Err(Error::InsufficientSamples);
    }
    let (start, end) = (window.start.unwrap_or(0.0), window.end.unwrap_or(0.0));
    let span = end - start;
    // close the time integrals at the window end
    for q in nodes.iter_mut() {
        let len = q.waiting.len() as f64;
        q.area += len * window.overlap(q.last_change, end);
        q.last_change = end;
    }
    let queues = nodes
        .iter()
        .zip(sojourn.iter())
        .map(|(q, s)| QueueStats {
            sojourn: s.estimate(),
            mean_in_system: q.area / span,
            arrival_rate: q.arrivals_in_window as f64 / span,
            inter_departure: q.inter_departure,
        })
        .collect();
    let report = FidelityReport {
        fidelity: fid.estimate(),
        decay: decay.estimate(),
        throughput: Some(completions_in_window as f64 / span),
        queues,
        incomplete: pending_measured,
        non_stationary: non_stationary_rates || pending_measured > 0,
    };
    Ok((report, done))
}

fn account(node: &mut Node, now: f64, window: &Window) {
    node.area += node.waiting.len() as f64 * window.overlap(node.last_change, now);
    node.last_change = now;
}

#[allow(clippy::too_many_arguments)]
fn enqueue(
    nodes: &mut [Node],
    j: usize,
    req: u32,
    now: f64,
    window: &Window,
    requests: &mut [Tracked],
    heap: &mut BinaryHeap<Event>,
    push: &mut impl FnMut(&mut BinaryHeap<Event>, f64, EventKind),
) {
    let node = &mut nodes[j];
    account(node, now, window);
    if window.contains(now) {
        node.arrivals_in_window += 1;
    }
    requests[req as usize].queue_arrival = now;
    node.waiting.push_back(req);
    if !node.busy {
        node.busy = true;
        let t = now + node.sampler.sample_service(&mut node.rng);
        push(heap, t, EventKind::ServiceDone(j));
    }
}
