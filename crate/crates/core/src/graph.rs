//! Directed follower graph of a community.
//!
//! An edge `(u, v)` means "u follows v". Influence flows the other way, from
//! a followee to its followers, so the natural iteration order for diffusion
//! is over a node's followers. Every follow edge therefore gets an *edge id*
//! equal to its position in the follower adjacency; per-edge data such as
//! influence probabilities is stored in flat vectors indexed by that id.

use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Dense node index, `0 <= id < node_count`.
#[derive(Copy, Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct NodeId(pub u32);

impl NodeId {
    #[inline]
    pub fn index(self) -> usize {
        self.0 as usize
    }
}

impl fmt::Display for NodeId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl From<u32> for NodeId {
    fn from(v: u32) -> Self {
        NodeId(v)
    }
}

/// Position of an influence edge in [`CommunityGraph::followers`] order.
pub type EdgeId = usize;

/// Counts of input edges that were dropped while building a graph.
#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct BuildReport {
    pub self_loops: usize,
    pub duplicates: usize,
}

/// Immutable compressed adjacency for both directions.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct CommunityGraph {
    node_count: usize,
    follower_offsets: Vec<usize>,
    followers: Vec<NodeId>,
    followee_offsets: Vec<usize>,
    followees: Vec<NodeId>,
    // edge id of (followee -> follower) for each entry of `followees`
    followee_edge: Vec<EdgeId>,
}

impl CommunityGraph {
    pub fn empty(node_count: usize) -> Self {
        Self::from_follows(node_count, std::iter::empty())
            .expect("empty edge list is always valid")
            .0
    }

    /// Builds a graph from `(follower, followee)` pairs. Self-loops and
    /// repeated pairs are dropped and counted in the returned report.
    pub fn from_follows<I>(node_count: usize, follows: I) -> Result<(Self, BuildReport)>
    where
        I: IntoIterator<Item = (NodeId, NodeId)>,
    {
        assert!(
            node_count <= u32::MAX as usize,
            "node count exceeds u32 range"
        );
        let mut report = BuildReport::default();
        let mut pairs = Vec::new();
        for (follower, followee) in follows {
            for n in [follower, followee] {
                if n.index() >= node_count {
                    return Err(Error::UnknownNode(n.0 as u64));
                }
            }
            if follower == followee {
                report.self_loops += 1;
                continue;
            }
            pairs.push((followee, follower));
        }
        pairs.sort_unstable();
        let before = pairs.len();
        pairs.dedup();
        report.duplicates = before - pairs.len();

        // follower adjacency, grouped by followee; edge id = index in `pairs`
        let mut follower_offsets = vec![0usize; node_count + 1];
        for &(followee, _) in &pairs {
            follower_offsets[followee.index() + 1] += 1;
        }
        for i in 0..node_count {
            follower_offsets[i + 1] += follower_offsets[i];
        }
        let followers: Vec<NodeId> = pairs.iter().map(|&(_, follower)| follower).collect();

        let mut followee_offsets = vec![0usize; node_count + 1];
        for &(_, follower) in &pairs {
            followee_offsets[follower.index() + 1] += 1;
        }
        for i in 0..node_count {
            followee_offsets[i + 1] += followee_offsets[i];
        }
        let mut cursor = followee_offsets.clone();
        let mut followees = vec![NodeId(0); pairs.len()];
        let mut followee_edge = vec![0; pairs.len()];
        // `pairs` is sorted by followee, so each follower's list comes out sorted
        for (edge, &(followee, follower)) in pairs.iter().enumerate() {
            let slot = &mut cursor[follower.index()];
            followees[*slot] = followee;
            followee_edge[*slot] = edge;
            *slot += 1;
        }

        Ok((
            CommunityGraph {
                node_count,
                follower_offsets,
                followers,
                followee_offsets,
                followees,
                followee_edge,
            },
            report,
        ))
    }

    #[inline]
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    #[inline]
    pub fn edge_count(&self) -> usize {
        self.followers.len()
    }

    pub fn nodes(&self) -> impl Iterator<Item = NodeId> + '_ {
        (0..self.node_count as u32).map(NodeId)
    }

    pub fn contains(&self, u: NodeId) -> bool {
        u.index() < self.node_count
    }

    pub fn check(&self, u: NodeId) -> Result<()> {
        if self.contains(u) {
            Ok(())
        } else {
            Err(Error::UnknownNode(u.0 as u64))
        }
    }

    /// Followers of `u`, sorted. Panics on an out-of-range id.
    #[inline]
    pub fn followers(&self, u: NodeId) -> &[NodeId] {
        &self.followers[self.follower_offsets[u.index()]..self.follower_offsets[u.index() + 1]]
    }

    /// Edge ids of `u`'s outgoing influence edges, parallel to [`Self::followers`].
    #[inline]
    pub fn follower_edge_range(&self, u: NodeId) -> std::ops::Range<EdgeId> {
        self.follower_offsets[u.index()]..self.follower_offsets[u.index() + 1]
    }

    /// Followees of `u`, sorted. Panics on an out-of-range id.
    #[inline]
    pub fn followees(&self, u: NodeId) -> &[NodeId] {
        &self.followees[self.followee_offsets[u.index()]..self.followee_offsets[u.index() + 1]]
    }

    /// `(followee, edge id)` for every influence edge into `v`.
    pub fn followee_edges(&self, v: NodeId) -> impl Iterator<Item = (NodeId, EdgeId)> + '_ {
        let range = self.followee_offsets[v.index()]..self.followee_offsets[v.index() + 1];
        self.followees[range.clone()]
            .iter()
            .copied()
            .zip(self.followee_edge[range].iter().copied())
    }

    /// Nodes that follow `u` (u's followers).
    pub fn out_neighbors(&self, u: NodeId) -> Result<&[NodeId]> {
        self.check(u)?;
        Ok(self.followers(u))
    }

    /// Nodes that `u` follows (u's followees).
    pub fn in_neighbors(&self, u: NodeId) -> Result<&[NodeId]> {
        self.check(u)?;
        Ok(self.followees(u))
    }

    /// Followers of `u` that `u` follows back.
    pub fn mutual_followers(&self, u: NodeId) -> Result<Vec<NodeId>> {
        self.check(u)?;
        Ok(sorted_intersection(self.followers(u), self.followees(u)))
    }

    /// `|E| / (n (n - 1))`.
    pub fn density(&self) -> Result<f64> {
        let n = self.node_count;
        if n < 2 {
            return Err(Error::DensityUndefined(n));
        }
        Ok(self.edge_count() as f64 / (n as f64 * (n as f64 - 1.0)))
    }

    /// Does `follower` follow `followee`?
    pub fn follows(&self, follower: NodeId, followee: NodeId) -> bool {
        self.edge_id(followee, follower).is_some()
    }

    /// Edge id of the influence edge `influencer -> target`, which exists when
    /// `target` follows `influencer`.
    pub fn edge_id(&self, influencer: NodeId, target: NodeId) -> Option<EdgeId> {
        if !self.contains(influencer) || !self.contains(target) {
            return None;
        }
        let start = self.follower_offsets[influencer.index()];
        self.followers(influencer)
            .binary_search(&target)
            .ok()
            .map(|i| start + i)
    }

    /// `(influencer, target)` for every edge, in edge id order.
    pub fn influence_edges(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.nodes()
            .flat_map(move |u| self.followers(u).iter().map(move |&v| (u, v)))
    }

    /// `(follower, followee)` pairs sorted by follower then followee.
    pub fn follow_pairs(&self) -> impl Iterator<Item = (NodeId, NodeId)> + '_ {
        self.nodes()
            .flat_map(move |u| self.followees(u).iter().map(move |&v| (u, v)))
    }
}

pub(crate) fn sorted_intersection(a: &[NodeId], b: &[NodeId]) -> Vec<NodeId> {
    let (mut i, mut j) = (0, 0);
    let mut out = Vec::new();
    while i < a.len() && j < b.len() {
        match a[i].cmp(&b[j]) {
            std::cmp::Ordering::Less => i += 1,
            std::cmp::Ordering::Greater => j += 1,
            std::cmp::Ordering::Equal => {
                out.push(a[i]);
                i += 1;
                j += 1;
            }
        }
    }
    out
}
