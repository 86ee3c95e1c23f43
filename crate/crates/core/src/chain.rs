//! End-to-end chain runs: parallel link generation, threshold-triggered
//! purification and log-depth parallel swapping on a single event clock.
//!
//! The engine is generic over [`PairState`] so the same schedule drives both
//! full density matrices and their Werner-weight shadow.

use rand::Rng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::{ChainConfig, PurificationSuccessMode, Representation, TimeModel};
use crate::error::{Result, SimError};
use crate::link::{generate_raw_link, link_params, AttemptMode, LinkParams};
use crate::purification::{
    bbpssw_step, cost_total, reset_after_purification, rounds_to_reach, CostLedger, PairingMode, PurificationPlan,
};
use crate::quantum::{depolarize, fidelity_phi_plus, swap_links, to_werner_form, DensityMatrix4, WernerForm};
use crate::rng::{link_stream, purification_stream};

/// Operations the engine needs from a stored pair.
pub trait PairState: Clone + std::fmt::Debug {
    fn from_matrix(rho: &DensityMatrix4) -> Self;
    fn fidelity(&self) -> f64;
    fn depolarized(&self, t_ms: f64, t_depol_ms: f64) -> Result<Self>;
    fn swapped_with(&self, other: &Self) -> Result<Self>;
    fn purified_to(f_new: f64) -> Result<Self>;
}

impl PairState for DensityMatrix4 {
    fn from_matrix(rho: &DensityMatrix4) -> Self {
        rho.clone()
    }
    fn fidelity(&self) -> f64 {
        fidelity_phi_plus(self)
    }
    fn depolarized(&self, t_ms: f64, t_depol_ms: f64) -> Result<Self> {
        depolarize(self, t_ms, t_depol_ms)
    }
    fn swapped_with(&self, other: &Self) -> Result<Self> {
        swap_links(self, other)
    }
    fn purified_to(f_new: f64) -> Result<Self> {
        reset_after_purification(f_new)
    }
}

impl PairState for WernerForm {
    fn from_matrix(rho: &DensityMatrix4) -> Self {
        to_werner_form(rho)
    }
    fn fidelity(&self) -> f64 {
        WernerForm::fidelity(self)
    }
    fn depolarized(&self, t_ms: f64, t_depol_ms: f64) -> Result<Self> {
        WernerForm::depolarized(*self, t_ms, t_depol_ms)
    }
    fn swapped_with(&self, other: &Self) -> Result<Self> {
        Ok(WernerForm::swapped_with(*self, *other))
    }
    fn purified_to(f_new: f64) -> Result<Self> {
        WernerForm::from_fidelity(f_new)
    }
}

#[derive(Debug, Clone)]
pub struct LinkState<S> {
    pub left_node: usize,
    pub right_node: usize,
    pub state: S,
    /// Clock time up to which `state` has been evolved.
    pub last_touched: f64,
}

impl<S: PairState> LinkState<S> {
    /// Lets the stored pair idle in memory until `clock`.
    fn advance_to(&mut self, clock: f64, t_depol: f64) -> Result<()> {
        let idle = clock - self.last_touched;
        if idle > 0.0 {
            self.state = self.state.depolarized(idle, t_depol)?;
            self.last_touched = clock;
        }
        Ok(())
    }

    /// Number of elementary segments this link covers.
    pub fn span(&self) -> usize {
        self.right_node - self.left_node
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LayerTrace {
    pub layer: usize,
    pub links: usize,
    pub threshold: f64,
    /// Lowest link fidelity when the layer starts.
    pub min_fidelity_before: f64,
    /// Most purification rounds any link of the layer needed.
    pub max_rounds: u32,
    /// Werner pairs held by the links of this layer.
    pub pairs: f64,
    /// Lowest link fidelity after the swap.
    pub min_fidelity_after: f64,
    pub duration_ms: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RunMetrics {
    pub generation_time: f64,
    pub final_fidelity: f64,
    pub cost: CostLedger,
    pub swap_rounds: usize,
    pub per_layer_trace: Vec<LayerTrace>,
    pub feasible: bool,
    /// Clock value when every elementary link is up.
    pub sync_time: f64,
    pub purification_time: f64,
    pub swap_time: f64,
    /// Purification tries summed over all links and layers.
    pub purification_attempts: u64,
    /// BK attempts summed over all elementary links.
    pub raw_attempts: f64,
    /// Why the run is infeasible, if it is.
    pub shortfall: Option<String>,
}

/// Builds the elementary links and synchronizes them at the slowest herald.
pub fn run_generation_phase<S: PairState>(config: &ChainConfig) -> Result<(Vec<LinkState<S>>, f64, f64)> {
    config.validate()?;
    let params = segment_params(config)?;
    let mut links = Vec::with_capacity(config.segment_count());
    let mut attempts = 0.0;
    for index in 0..config.segment_count() {
        let mut rng = link_stream(config.seed, index as u64);
        let (state, sample) = generate_raw_link(&params, config.t_depol, config.attempt_mode, &mut rng)?;
        attempts += sample.attempts;
        links.push(LinkState {
            left_node: index,
            right_node: index + 1,
            state: S::from_matrix(&state),
            last_touched: sample.elapsed_ms,
        });
    }
    let sync_time = links.iter().map(|l| l.last_touched).fold(0.0, f64::max);
    for link in &mut links {
        link.advance_to(sync_time, config.t_depol)?;
    }
    Ok((links, sync_time, attempts))
}

fn segment_params(config: &ChainConfig) -> Result<LinkParams> {
    link_params(config.segment_length(), config.attenuation_length, config.light_speed)
}

struct Purified {
    successes: u32,
    attempts: u32,
    pairs: f64,
}

struct LayerPurification {
    duration: f64,
    max_rounds: u32,
    pairs: f64,
    attempts: u32,
}

struct SwapEngine<'a> {
    config: &'a ChainConfig,
    tau_seg: f64,
    clock: f64,
    rng: ChaCha8Rng,
    shortfall: Option<String>,
}

impl SwapEngine<'_> {
    fn round_duration(&self, span: usize) -> f64 {
        match self.config.time_model {
            TimeModel::PaperFaithful => self.config.op_latency + self.tau_seg,
            TimeModel::DistanceAware => self.config.op_latency + self.tau_seg * span as f64,
        }
    }

    fn note_shortfall(&mut self, reason: String) {
        self.shortfall.get_or_insert(reason);
    }

    /// Runs the ideal number of rounds on one link, decohering after each.
    fn purify<S: PairState>(&mut self, link: &mut LinkState<S>, threshold: f64, duration: f64) -> Result<Purified> {
        let cfg = self.config;
        let f_in = link.state.fidelity();
        let target_rounds = match rounds_to_reach(f_in, threshold, cfg.round_cap) {
            Ok(r) => r,
            Err(err @ (SimError::Unreachable { .. } | SimError::Stalled { .. })) => {
                self.note_shortfall(err.to_string());
                cfg.round_cap
            }
            Err(err) => return Err(err),
        };
        let mut attempts = 0;
        let mut pairs = 1.0;
        for _ in 0..target_rounds {
            let f = link.state.fidelity();
            let step = bbpssw_step(f)?;
            let tries = match cfg.purification_success_mode {
                PurificationSuccessMode::Deterministic => 1,
                PurificationSuccessMode::Stochastic => self.tries_until_success(step.success_probability),
            };
            attempts += tries;
            // a failed try loses both pairs; the kept pair is replaced by a fresh copy
            pairs = match cfg.pairing_mode {
                PairingMode::Pumping => pairs + 2.0 * tries as f64 - 1.0,
                PairingMode::Nesting => pairs * 2.0 * tries as f64,
            };
            let start = link.last_touched;
            link.state = S::purified_to(step.fidelity)?;
            link.advance_to(start + duration * tries as f64, cfg.t_depol)?;
        }
        Ok(Purified {
            successes: target_rounds,
            attempts,
            pairs,
        })
    }

    fn tries_until_success(&mut self, p: f64) -> u32 {
        let mut tries = 1;
        while self.rng.random::<f64>() >= p {
            tries += 1;
        }
        tries
    }

    /// Purifies every link below `threshold` in parallel; returns the layer duration.
    fn purify_layer<S: PairState>(&mut self, links: &mut [LinkState<S>], threshold: f64) -> Result<LayerPurification> {
        let mut attempts = 0;
        let mut layer_pairs = 0.0;
        let mut max_rounds = 0;
        let mut layer_time: f64 = 0.0;
        let start = self.clock;
        for link in links.iter_mut() {
            if !self.config.purification_enabled || link.state.fidelity() >= threshold {
                layer_pairs += 1.0;
                continue;
            }
            let duration = self.round_duration(link.span());
            let done = self.purify(link, threshold, duration)?;
            layer_pairs += done.pairs;
            attempts += done.attempts;
            max_rounds = max_rounds.max(done.successes);
            layer_time = layer_time.max(link.last_touched - start);
        }
        self.clock = start + layer_time;
        for link in links.iter_mut() {
            link.advance_to(self.clock, self.config.t_depol)?;
        }
        Ok(LayerPurification {
            duration: layer_time,
            max_rounds,
            pairs: layer_pairs,
            attempts,
        })
    }

    /// One parallel swap round: idle for the round duration, then join neighbours.
    fn swap_layer<S: PairState>(&mut self, links: Vec<LinkState<S>>) -> Result<(Vec<LinkState<S>>, f64)> {
        let longest = links
            .chunks(2)
            .filter(|pair| pair.len() == 2)
            .map(|pair| pair[0].span() + pair[1].span())
            .max()
            .unwrap_or(0);
        let duration = self.round_duration(longest);
        self.clock += duration;
        let mut next = Vec::with_capacity(links.len().div_ceil(2));
        let mut iter = links.into_iter();
        while let Some(mut left) = iter.next() {
            left.advance_to(self.clock, self.config.t_depol)?;
            match iter.next() {
                Some(mut right) => {
                    right.advance_to(self.clock, self.config.t_depol)?;
                    next.push(LinkState {
                        left_node: left.left_node,
                        right_node: right.right_node,
                        state: left.state.swapped_with(&right.state)?,
                        last_touched: self.clock,
                    });
                }
                None => next.push(left),
            }
        }
        Ok((next, duration))
    }
}

fn min_fidelity<S: PairState>(links: &[LinkState<S>]) -> f64 {
    links.iter().map(|l| l.state.fidelity()).fold(f64::INFINITY, f64::min)
}

/// Runs the `K` purify-then-swap rounds until one Alice–Bob link remains.
pub fn run_swap_rounds<S: PairState>(
    links: Vec<LinkState<S>>,
    plan: &PurificationPlan,
    config: &ChainConfig,
    sync_time: f64,
) -> Result<(LinkState<S>, RunMetrics)> {
    if links.is_empty() {
        return Err(SimError::Config("no links to swap".into()));
    }
    for pair in links.windows(2) {
        if pair[0].right_node != pair[1].left_node {
            return Err(SimError::Config("links do not cover the chain contiguously".into()));
        }
    }
    let tau_seg = segment_params(config)?.tau_ms;
    let mut engine = SwapEngine {
        config,
        tau_seg,
        clock: sync_time,
        rng: purification_stream(config.seed),
        shortfall: None,
    };
    let mut links = links;
    let mut trace = Vec::with_capacity(plan.k_layers);
    let mut layer_costs = Vec::with_capacity(plan.k_layers + 1);
    let (mut purification_time, mut swap_time) = (0.0, 0.0);
    let mut purification_attempts = 0;
    for layer in 0..plan.k_layers {
        let threshold = plan.layer_min_fidelity[layer];
        let count = links.len();
        let min_fidelity_before = min_fidelity(&links);
        let purified = engine.purify_layer(&mut links, threshold)?;
        let (next, swap_duration) = engine.swap_layer(links)?;
        links = next;
        let (pur_time, pairs) = (purified.duration, purified.pairs);
        purification_time += pur_time;
        purification_attempts += purified.attempts as u64;
        swap_time += swap_duration;
        layer_costs.push(pairs);
        trace.push(LayerTrace {
            layer,
            links: count,
            threshold,
            min_fidelity_before,
            max_rounds: purified.max_rounds,
            pairs,
            min_fidelity_after: min_fidelity(&links),
            duration_ms: pur_time + swap_duration,
        });
    }
    if links.len() != 1 {
        return Err(SimError::Config(format!(
            "{} links remain after {} swap rounds",
            links.len(),
            plan.k_layers
        )));
    }
    let final_link = links.pop().expect("one link");
    layer_costs.push(1.0);
    let final_fidelity = final_link.state.fidelity();
    if engine.shortfall.is_none() && final_fidelity < plan.target() {
        engine.note_shortfall(format!(
            "final fidelity {final_fidelity:.6} is below the target {}",
            plan.target()
        ));
    }
    let metrics = RunMetrics {
        generation_time: engine.clock,
        final_fidelity,
        cost: cost_total(&layer_costs)?,
        swap_rounds: plan.k_layers,
        per_layer_trace: trace,
        feasible: engine.shortfall.is_none(),
        sync_time,
        purification_time,
        swap_time,
        purification_attempts,
        raw_attempts: 0.0,
        shortfall: engine.shortfall,
    };
    Ok((final_link, metrics))
}

fn run_with<S: PairState>(config: &ChainConfig) -> Result<RunMetrics> {
    let plan = PurificationPlan::new(config.f_target, config.segment_count())?;
    let (links, sync_time, attempts) = run_generation_phase::<S>(config)?;
    let (_, mut metrics) = run_swap_rounds(links, &plan, config, sync_time)?;
    metrics.raw_attempts = attempts;
    Ok(metrics)
}

/// Generation, purification and swapping for one configuration.
pub fn run_chain(config: &ChainConfig) -> Result<RunMetrics> {
    config.validate()?;
    match config.representation {
        Representation::Matrix => run_with::<DensityMatrix4>(config),
        Representation::WernerScalar => run_with::<WernerForm>(config),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryPoint {
    pub t_depol: f64,
    pub final_fidelity: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BoundaryReport {
    /// Smallest feasible `T_depol` on the grid, if any.
    pub boundary: Option<f64>,
    pub points: Vec<BoundaryPoint>,
}

/// Scans `grid` (ascending) for the smallest memory lifetime that meets `f_target`.
/// Runs in expected-attempt, deterministic-purification mode.
pub fn noise_tolerance_search(template: &ChainConfig, f_target: f64, grid: &[f64]) -> Result<BoundaryReport> {
    if grid.len() < 2 {
        return Err(SimError::Config("boundary grid needs at least two values".into()));
    }
    if grid.windows(2).any(|w| !(w[0] <= w[1])) {
        return Err(SimError::Config("boundary grid must be sorted ascending".into()));
    }
    let mut config = template.clone();
    config.f_target = f_target;
    config.attempt_mode = AttemptMode::Expected;
    config.purification_success_mode = PurificationSuccessMode::Deterministic;
    let mut points = Vec::with_capacity(grid.len());
    for &t_depol in grid {
        config.t_depol = t_depol;
        let metrics = run_chain(&config)?;
        points.push(BoundaryPoint {
            t_depol,
            final_fidelity: metrics.final_fidelity,
            feasible: metrics.feasible && metrics.final_fidelity >= f_target,
        });
    }
    let boundary = points.iter().find(|p| p.feasible).map(|p| p.t_depol);
    Ok(BoundaryReport { boundary, points })
}
