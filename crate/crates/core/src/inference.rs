//! Frequency estimates of edge influence probabilities from a cascade log.
//!
//! Each cascade is an independent observation. When an activator `u` posts,
//! every follower `v` that has not yet activated is exposed. The two models
//! differ in which exposures count as attempts:
//!
//! * FI: only the earliest-posting followee of `v` makes an attempt (ties by
//!   smaller node id);
//! * IC: every exposure is an attempt, so one retweet can credit several
//!   followees.
//!
//! An attempt by `u` succeeds when `v` activates no more than `window`
//! seconds after `u`. Edges that are never attempted get probability zero.

use rayon::prelude::*;

use crate::cascade::{Cascade, CascadeLog};
use crate::diffusion::Model;
use crate::error::Result;
use crate::graph::{CommunityGraph, EdgeId, NodeId};
use crate::probs::EdgeProbabilities;

/// Per-edge attempt and success counts.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct EdgeCounts {
    pub attempts: Vec<u64>,
    pub successes: Vec<u64>,
}

impl EdgeCounts {
    pub fn new(edge_count: usize) -> Self {
        EdgeCounts {
            attempts: vec![0; edge_count],
            successes: vec![0; edge_count],
        }
    }

    #[inline]
    fn record(&mut self, e: EdgeId, success: bool) {
        self.attempts[e] += 1;
        self.successes[e] += success as u64;
    }

    fn merge(mut self, other: EdgeCounts) -> Self {
        for (a, b) in self.attempts.iter_mut().zip(other.attempts) {
            *a += b;
        }
        for (a, b) in self.successes.iter_mut().zip(other.successes) {
            *a += b;
        }
        self
    }

    pub fn into_probabilities(self) -> EdgeProbabilities {
        EdgeProbabilities::from_counts(self.attempts, &self.successes)
    }
}

/// Reusable per-thread buffers for walking cascades.
pub(crate) struct TallyScratch {
    time_of: Vec<i64>,
    claimed: Vec<bool>,
    touched: Vec<NodeId>,
    order: Vec<(i64, NodeId)>,
}

impl TallyScratch {
    pub(crate) fn new(node_count: usize) -> Self {
        TallyScratch {
            time_of: vec![i64::MAX; node_count],
            claimed: vec![false; node_count],
            touched: Vec::new(),
            order: Vec::new(),
        }
    }
}

/// Calls `record(edge, success)` once per attempt made in `cascade`.
pub(crate) fn tally_cascade(
    model: Model,
    g: &CommunityGraph,
    cascade: &Cascade,
    window: i64,
    s: &mut TallyScratch,
    mut record: impl FnMut(EdgeId, bool),
) {
    s.order.clear();
    for a in &cascade.activations {
        s.time_of[a.node.index()] = a.time;
        s.order.push((a.time, a.node));
    }
    s.order.sort_unstable();

    for &(tu, u) in &s.order {
        let followers = g.followers(u);
        for (e, &v) in g.follower_edge_range(u).zip(followers) {
            let tv = s.time_of[v.index()];
            if tv <= tu {
                continue;
            }
            if model == Model::Fi {
                if s.claimed[v.index()] {
                    continue;
                }
                s.claimed[v.index()] = true;
                s.touched.push(v);
            }
            record(e, tv != i64::MAX && tv - tu <= window);
        }
    }

    for a in &cascade.activations {
        s.time_of[a.node.index()] = i64::MAX;
    }
    for v in s.touched.drain(..) {
        s.claimed[v.index()] = false;
    }
}

/// Attempt and success counts over a subset of the log's cascades.
pub fn count_attempts<'a, I>(
    model: Model,
    cascades: I,
    g: &CommunityGraph,
    window: i64,
) -> EdgeCounts
where
    I: IntoParallelIterator<Item = &'a Cascade>,
{
    let m = g.edge_count();
    cascades
        .into_par_iter()
        .fold(
            || (EdgeCounts::new(m), TallyScratch::new(g.node_count())),
            |(mut counts, mut scratch), c| {
                tally_cascade(model, g, c, window, &mut scratch, |e, ok| {
                    counts.record(e, ok)
                });
                (counts, scratch)
            },
        )
        .map(|(counts, _)| counts)
        .reduce(|| EdgeCounts::new(m), EdgeCounts::merge)
}

pub fn infer(
    model: Model,
    log: &CascadeLog,
    g: &CommunityGraph,
    window: i64,
) -> Result<EdgeProbabilities> {
    log.check_against(g)?;
    Ok(count_attempts(model, &log.cascades, g, window).into_probabilities())
}

pub fn infer_fi(log: &CascadeLog, g: &CommunityGraph, window: i64) -> Result<EdgeProbabilities> {
    infer(Model::Fi, log, g, window)
}

pub fn infer_ic(log: &CascadeLog, g: &CommunityGraph, window: i64) -> Result<EdgeProbabilities> {
    infer(Model::Ic, log, g, window)
}
