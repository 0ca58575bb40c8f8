//! Exact expected spreads on small graphs, used as test oracles.
//!
//! FI: recursion over slots. Timer orderings of the newly active nodes are
//! equally likely, so each slot enumerates all orderings, derives the first
//! attempter of every target and then every success/failure outcome.
//! The process is Markov in (active, insusceptible, newly active), which is
//! memoised as three bitmasks.
//!
//! IC: live-edge enumeration. Each edge is live independently with its
//! probability; the spread is the expected number of nodes reachable from the
//! seeds over live edges.

use std::collections::HashMap;

use itertools::Itertools;
use serde::{Deserialize, Serialize};

use super::Diffusion;
use crate::error::{Error, Result};
use crate::graph::{CommunityGraph, NodeId};
use crate::probs::EdgeProbabilities;

pub const EXACT_FI_MAX_NODES: usize = 16;
pub const EXACT_FI_MAX_NEWLY: usize = 8;
pub const EXACT_IC_MAX_EDGES: usize = 22;

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ExactSpread {
    pub inclusive: f64,
    pub exclusive: f64,
}

fn seed_mask(g: &CommunityGraph, seeds: &[NodeId]) -> Result<u64> {
    let mut mask = 0u64;
    for &s in seeds {
        g.check(s)?;
        mask |= 1 << s.index();
    }
    Ok(mask)
}

struct FiOracle<'a> {
    d: &'a Diffusion<'a>,
    // followees as bitmask, per node
    followee_mask: Vec<u32>,
    memo: HashMap<(u32, u32, u32), f64>,
}

impl FiOracle<'_> {
    /// Expected number of activations after the current slot.
    fn future(&mut self, active: u32, blocked: u32, newly: u32) -> Result<f64> {
        if newly == 0 {
            return Ok(0.0);
        }
        if let Some(&v) = self.memo.get(&(active, blocked, newly)) {
            return Ok(v);
        }
        let g = self.d.graph;
        let eps = self.d.epsilon;
        let n = g.node_count();
        let members: Vec<usize> = (0..n).filter(|i| newly >> i & 1 == 1).collect();
        if members.len() > EXACT_FI_MAX_NEWLY {
            return Err(Error::OracleTooLarge {
                model: "FI",
                reason: format!(
                    "{} newly active nodes in one slot (limit {EXACT_FI_MAX_NEWLY})",
                    members.len()
                ),
            });
        }
        let targets: Vec<usize> = (0..n)
            .filter(|&v| {
                active >> v & 1 == 0
                    && (eps > 0.0 || blocked >> v & 1 == 0)
                    && self.followee_mask[v] & newly != 0
            })
            .collect();
        if targets.is_empty() {
            self.memo.insert((active, blocked, newly), 0.0);
            return Ok(0.0);
        }

        // distinct first-attempter assignments with their ordering counts
        let mut assignments: HashMap<Vec<usize>, u64> = HashMap::new();
        let mut total = 0u64;
        for order in members.iter().copied().permutations(members.len()) {
            let assignment = targets
                .iter()
                .map(|&v| {
                    *order
                        .iter()
                        .find(|&&u| self.followee_mask[v] >> u & 1 == 1)
                        .expect("target has a newly active followee")
                })
                .collect();
            *assignments.entry(assignment).or_default() += 1;
            total += 1;
        }

        let mut expected = 0.0;
        for (assignment, count) in assignments {
            let weight = count as f64 / total as f64;
            let q: Vec<f64> = targets
                .iter()
                .zip(&assignment)
                .map(|(&v, &u)| {
                    if blocked >> v & 1 == 1 {
                        eps
                    } else {
                        let e = g
                            .edge_id(NodeId(u as u32), NodeId(v as u32))
                            .expect("followee edge");
                        self.d.probs.p(e)
                    }
                })
                .collect();
            for outcome in 0u32..(1 << targets.len()) {
                let mut prob = weight;
                let mut won = 0u32;
                let mut lost = 0u32;
                for (j, &v) in targets.iter().enumerate() {
                    if outcome >> j & 1 == 1 {
                        prob *= q[j];
                        won |= 1 << v;
                    } else {
                        prob *= 1.0 - q[j];
                        lost |= 1 << v;
                    }
                }
                if prob == 0.0 {
                    continue;
                }
                let next = self.future(active | won, (blocked | lost) & !won, won)?;
                expected += prob * (won.count_ones() as f64 + next);
            }
        }
        self.memo.insert((active, blocked, newly), expected);
        Ok(expected)
    }
}

impl Diffusion<'_> {
    pub fn exact_fi(&self, seeds: &[NodeId]) -> Result<ExactSpread> {
        let g = self.graph;
        if g.node_count() > EXACT_FI_MAX_NODES {
            return Err(Error::OracleTooLarge {
                model: "FI",
                reason: format!("{} nodes (limit {EXACT_FI_MAX_NODES})", g.node_count()),
            });
        }
        let seeds = seed_mask(g, seeds)? as u32;
        let followee_mask = g
            .nodes()
            .map(|v| g.followees(v).iter().fold(0u32, |m, u| m | 1 << u.index()))
            .collect();
        let mut oracle = FiOracle {
            d: self,
            followee_mask,
            memo: HashMap::new(),
        };
        let exclusive = oracle.future(seeds, 0, seeds)?;
        Ok(ExactSpread {
            inclusive: exclusive + seeds.count_ones() as f64,
            exclusive,
        })
    }

    pub fn exact_ic(&self, seeds: &[NodeId]) -> Result<ExactSpread> {
        let g = self.graph;
        if g.edge_count() > EXACT_IC_MAX_EDGES {
            return Err(Error::OracleTooLarge {
                model: "IC",
                reason: format!("{} edges (limit {EXACT_IC_MAX_EDGES})", g.edge_count()),
            });
        }
        if g.node_count() > 64 {
            return Err(Error::OracleTooLarge {
                model: "IC",
                reason: format!("{} nodes (limit 64)", g.node_count()),
            });
        }
        let seeds = seed_mask(g, seeds)?;
        let edges: Vec<(usize, usize, f64)> = g
            .influence_edges()
            .enumerate()
            .map(|(e, (u, v))| (u.index(), v.index(), self.probs.p(e)))
            .collect();
        let mut live = vec![0u64; g.node_count()];
        let inclusive = live_edge_sum(&edges, 0, 1.0, &mut live, seeds);
        Ok(ExactSpread {
            inclusive,
            exclusive: inclusive - seeds.count_ones() as f64,
        })
    }
}

fn reach(live: &[u64], seeds: u64) -> u64 {
    let mut seen = seeds;
    let mut frontier = seeds;
    while frontier != 0 {
        let mut next = 0u64;
        let mut f = frontier;
        while f != 0 {
            let u = f.trailing_zeros() as usize;
            f &= f - 1;
            next |= live[u];
        }
        frontier = next & !seen;
        seen |= next;
    }
    seen
}

fn live_edge_sum(
    edges: &[(usize, usize, f64)],
    i: usize,
    weight: f64,
    live: &mut [u64],
    seeds: u64,
) -> f64 {
    if weight == 0.0 {
        return 0.0;
    }
    let Some(&(u, v, p)) = edges.get(i) else {
        return weight * reach(live, seeds).count_ones() as f64;
    };
    let dead = live_edge_sum(edges, i + 1, weight * (1.0 - p), live, seeds);
    live[u] |= 1 << v;
    let alive = live_edge_sum(edges, i + 1, weight * p, live, seeds);
    live[u] &= !(1 << v);
    dead + alive
}

pub fn exact_spread_fi(
    g: &CommunityGraph,
    p: &EdgeProbabilities,
    seeds: &[NodeId],
) -> Result<ExactSpread> {
    Diffusion::new(g, p).exact_fi(seeds)
}

pub fn exact_spread_ic(
    g: &CommunityGraph,
    p: &EdgeProbabilities,
    seeds: &[NodeId],
) -> Result<ExactSpread> {
    Diffusion::new(g, p).exact_ic(seeds)
}
