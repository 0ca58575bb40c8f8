//! Independent Cascade (IC) and First-Influencer (FI) diffusion.
//!
//! Both models run in discrete slots starting from a seed set. Influence
//! travels from a followee to its followers along graph edges, with the
//! per-edge success probability taken from [`EdgeProbabilities`].
//!
//! Under IC every newly active node makes an independent attempt on each
//! inactive follower, and a node can be attempted again in later slots.
//! Under FI each newly active node draws a timer; a susceptible node is
//! attempted only by its newly active followee with the smallest timer, and
//! on failure it becomes insusceptible. With `epsilon > 0` an insusceptible
//! node is not locked out but is activated with probability `epsilon` by
//! later first-arriving attempts.
//!
//! Spreads are reported both with and without the seeds counted.

mod exact;
mod sim;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use exact::{
    exact_spread_fi, exact_spread_ic, ExactSpread, EXACT_FI_MAX_NEWLY, EXACT_FI_MAX_NODES,
    EXACT_IC_MAX_EDGES,
};
pub(crate) use sim::{ActivationLog, Recorder, Scratch};
pub use sim::{FiTrace, SlotState, TimerResolution, TracedActivation};

use crate::error::{Error, Result};
use crate::graph::{CommunityGraph, NodeId};
use crate::probs::EdgeProbabilities;
use crate::rng::{derive_seed, SimRng};
use rand::SeedableRng;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Model {
    Fi,
    Ic,
}

impl Model {
    pub fn name(self) -> &'static str {
        match self {
            Model::Fi => "fi",
            Model::Ic => "ic",
        }
    }
}

impl std::fmt::Display for Model {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SpreadEstimate {
    pub mean_inclusive: f64,
    pub mean_exclusive: f64,
    pub std_error: f64,
    pub rounds: u64,
}

/// A graph with edge probabilities, ready to simulate.
#[derive(Copy, Clone, Debug)]
pub struct Diffusion<'a> {
    graph: &'a CommunityGraph,
    probs: &'a EdgeProbabilities,
    epsilon: f64,
}

impl<'a> Diffusion<'a> {
    pub fn new(graph: &'a CommunityGraph, probs: &'a EdgeProbabilities) -> Self {
        assert_eq!(
            graph.edge_count(),
            probs.len(),
            "probabilities do not match the graph"
        );
        Diffusion {
            graph,
            probs,
            epsilon: 0.0,
        }
    }

    /// Activation probability for insusceptible nodes under FI (default 0).
    pub fn with_epsilon(mut self, epsilon: f64) -> Self {
        assert!((0.0..=1.0).contains(&epsilon));
        self.epsilon = epsilon;
        self
    }

    pub fn graph(&self) -> &'a CommunityGraph {
        self.graph
    }

    pub fn probs(&self) -> &'a EdgeProbabilities {
        self.probs
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn check_seeds(&self, seeds: &[NodeId]) -> Result<usize> {
        let mut uniq: Vec<NodeId> = seeds.to_vec();
        for &s in &uniq {
            self.graph.check(s)?;
        }
        uniq.sort_unstable();
        uniq.dedup();
        Ok(uniq.len())
    }

    pub(crate) fn run<R: Recorder>(
        &self,
        model: Model,
        seeds: &[NodeId],
        rng: &mut SimRng,
        scratch: &mut Scratch,
        timers: TimerResolution,
        recorder: &mut R,
    ) -> usize {
        match model {
            Model::Fi => sim::run_fi(self, seeds, rng, scratch, timers, recorder),
            Model::Ic => sim::run_ic(self, seeds, rng, scratch, timers, recorder),
        }
    }

    /// Activated nodes of one run, sorted.
    pub fn simulate(&self, model: Model, seeds: &[NodeId], rng_seed: u64) -> Result<Vec<NodeId>> {
        self.check_seeds(seeds)?;
        let mut scratch = Scratch::new(self.graph.node_count());
        let mut rng = SimRng::seed_from_u64(rng_seed);
        self.run(
            model,
            seeds,
            &mut rng,
            &mut scratch,
            TimerResolution::Continuous,
            &mut (),
        );
        let mut active = scratch.activated().to_vec();
        active.sort_unstable();
        Ok(active)
    }

    /// Per-slot state and attempt counts of one FI run.
    pub fn trace_fi(&self, seeds: &[NodeId], rng_seed: u64) -> Result<FiTrace> {
        self.check_seeds(seeds)?;
        let mut scratch = Scratch::new(self.graph.node_count());
        let mut rng = SimRng::seed_from_u64(rng_seed);
        let mut trace = FiTrace::new(self.graph.node_count());
        self.run(
            Model::Fi,
            seeds,
            &mut rng,
            &mut scratch,
            TimerResolution::Continuous,
            &mut trace,
        );
        Ok(trace)
    }

    /// Sum and sum of squares of activated-set sizes over rounds
    /// `0..rounds`, each seeded from `(master_seed, round)`.
    pub(crate) fn size_moments_sequential(
        &self,
        model: Model,
        seeds: &[NodeId],
        rounds: u64,
        master_seed: u64,
        scratch: &mut Scratch,
    ) -> (u64, u128) {
        let mut acc = (0u64, 0u128);
        for r in 0..rounds {
            let mut rng = SimRng::seed_from_u64(derive_seed(master_seed, r));
            let k = self.run(
                model,
                seeds,
                &mut rng,
                scratch,
                TimerResolution::Continuous,
                &mut (),
            ) as u64;
            acc.0 += k;
            acc.1 += (k as u128) * (k as u128);
        }
        acc
    }

    fn summarize(&self, seeds: usize, rounds: u64, (sum, sum_sq): (u64, u128)) -> SpreadEstimate {
        let n = rounds as f64;
        let mean = sum as f64 / n;
        let std_error = if rounds > 1 {
            // exact integer numerator: rounds * sum_sq - sum^2
            let num = (rounds as u128 * sum_sq - (sum as u128) * (sum as u128)) as f64;
            let var = num / (n * (n - 1.0));
            (var / n).sqrt()
        } else {
            0.0
        };
        SpreadEstimate {
            mean_inclusive: mean,
            mean_exclusive: mean - seeds as f64,
            std_error,
            rounds,
        }
    }

    /// Monte Carlo spread estimate over independent rounds. Rounds run in
    /// parallel; the result does not depend on the thread count.
    pub fn estimate(
        &self,
        model: Model,
        seeds: &[NodeId],
        rounds: u64,
        master_seed: u64,
    ) -> Result<SpreadEstimate> {
        let k = self.check_seeds(seeds)?;
        if rounds == 0 {
            return Err(Error::InvalidArgument("rounds must be at least 1".into()));
        }
        const CHUNK: u64 = 256;
        let chunks = rounds.div_ceil(CHUNK);
        let n = self.graph.node_count();
        let moments = (0..chunks)
            .into_par_iter()
            .map_init(
                || Scratch::new(n),
                |scratch, c| {
                    let mut acc = (0u64, 0u128);
                    for r in c * CHUNK..((c + 1) * CHUNK).min(rounds) {
                        let mut rng = SimRng::seed_from_u64(derive_seed(master_seed, r));
                        let s = self.run(
                            model,
                            seeds,
                            &mut rng,
                            scratch,
                            TimerResolution::Continuous,
                            &mut (),
                        ) as u64;
                        acc.0 += s;
                        acc.1 += (s as u128) * (s as u128);
                    }
                    acc
                },
            )
            .reduce(|| (0, 0), |a, b| (a.0 + b.0, a.1 + b.1));
        Ok(self.summarize(k, rounds, moments))
    }

    pub(crate) fn estimate_sequential(
        &self,
        model: Model,
        seeds: &[NodeId],
        rounds: u64,
        master_seed: u64,
        scratch: &mut Scratch,
    ) -> Result<SpreadEstimate> {
        let k = self.check_seeds(seeds)?;
        if rounds == 0 {
            return Err(Error::InvalidArgument("rounds must be at least 1".into()));
        }
        let moments = self.size_moments_sequential(model, seeds, rounds, master_seed, scratch);
        Ok(self.summarize(k, rounds, moments))
    }
}

pub fn simulate_fi(
    g: &CommunityGraph,
    p: &EdgeProbabilities,
    seeds: &[NodeId],
    rng_seed: u64,
) -> Result<Vec<NodeId>> {
    Diffusion::new(g, p).simulate(Model::Fi, seeds, rng_seed)
}

pub fn simulate_ic(
    g: &CommunityGraph,
    p: &EdgeProbabilities,
    seeds: &[NodeId],
    rng_seed: u64,
) -> Result<Vec<NodeId>> {
    Diffusion::new(g, p).simulate(Model::Ic, seeds, rng_seed)
}

pub fn estimate_spread(
    g: &CommunityGraph,
    p: &EdgeProbabilities,
    seeds: &[NodeId],
    model: Model,
    rounds: u64,
    master_seed: u64,
) -> Result<SpreadEstimate> {
    Diffusion::new(g, p).estimate(model, seeds, rounds, master_seed)
}

#[cfg(test)]
mod tests;
