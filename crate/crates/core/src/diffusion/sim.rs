use std::collections::HashMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use super::Diffusion;
use crate::graph::{CommunityGraph, NodeId};
use crate::rng::SimRng;

#[derive(Copy, Clone, Debug, PartialEq, Eq)]
#[repr(u8)]
pub(crate) enum NodeState {
    Susceptible = 0,
    Active = 1,
    Insusceptible = 2,
}

impl NodeState {
    #[inline]
    fn from_u8(x: u8) -> Self {
        match x {
            0 => NodeState::Susceptible,
            1 => NodeState::Active,
            _ => NodeState::Insusceptible,
        }
    }
}

/// How FI timers are drawn. `Continuous` is the model proper; `Discrete(k)`
/// draws uniformly from `0..k`, which lets generated logs carry the timer
/// order exactly in whole-second timestamps. Ties go to the smaller node id.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub enum TimerResolution {
    Continuous,
    Discrete(u32),
}

impl TimerResolution {
    #[inline]
    fn draw(self, rng: &mut SimRng) -> u64 {
        match self {
            // 53 random bits, the precision of a uniform f64 in [0, 1)
            TimerResolution::Continuous => rng.gen::<u64>() >> 11,
            TimerResolution::Discrete(k) => rng.gen_range(0..k as u64),
        }
    }
}

/// Observer of simulation events. All methods default to no-ops.
pub(crate) trait Recorder {
    /// Whether IC runs should draw per-node timers too.
    const TIMERS: bool = false;
    /// Whether attempts and activations are observed at all.
    const OBSERVES: bool = true;

    fn slot(&mut self, _slot: u32, _state: &[NodeState], _newly: &[NodeId]) {}
    fn timer(&mut self, _node: NodeId, _slot: u32, _timer: u64) {}
    fn activate(&mut self, _node: NodeId, _slot: u32, _by: Option<NodeId>) {}
    fn attempt(&mut self, _target: NodeId) {}
}

impl Recorder for () {
    const OBSERVES: bool = false;
}

/// Buffers reused across runs on the same graph.
pub(crate) struct Scratch {
    state: Vec<NodeState>,
    // slot stamp of the last failed attempt on an insusceptible node
    claimed: Vec<u64>,
    stamp: u64,
    activated: Vec<NodeId>,
    blocked: Vec<NodeId>,
    newly: Vec<NodeId>,
    next: Vec<NodeId>,
    order: Vec<(u64, NodeId)>,
    hit_buf: Vec<NodeId>,
    miss_buf: Vec<NodeId>,
}

impl Scratch {
    pub(crate) fn new(node_count: usize) -> Self {
        Scratch {
            state: vec![NodeState::Susceptible; node_count],
            claimed: vec![0; node_count],
            stamp: 0,
            activated: Vec::new(),
            blocked: Vec::new(),
            newly: Vec::new(),
            next: Vec::new(),
            order: Vec::new(),
            hit_buf: vec![NodeId(0); node_count + 1],
            miss_buf: vec![NodeId(0); node_count + 1],
        }
    }

    /// Nodes activated by the last run, in activation order.
    pub(crate) fn activated(&self) -> &[NodeId] {
        &self.activated
    }

    fn reset<R: Recorder>(&mut self, seeds: &[NodeId], recorder: &mut R) {
        for v in self.activated.drain(..).chain(self.blocked.drain(..)) {
            self.state[v.index()] = NodeState::Susceptible;
        }
        self.newly.clear();
        for &s in seeds {
            if self.state[s.index()] == NodeState::Susceptible {
                self.state[s.index()] = NodeState::Active;
                self.activated.push(s);
                self.newly.push(s);
                recorder.activate(s, 0, None);
            }
        }
    }
}

pub(super) fn run_fi<R: Recorder>(
    d: &Diffusion<'_>,
    seeds: &[NodeId],
    rng: &mut SimRng,
    s: &mut Scratch,
    timers: TimerResolution,
    rec: &mut R,
) -> usize {
    let g = d.graph;
    let p = d.probs.as_slice();
    let eps = d.epsilon;
    s.reset(seeds, rec);
    let mut slot = 0u32;
    while !s.newly.is_empty() {
        rec.slot(slot, &s.state, &s.newly);
        s.order.clear();
        for &u in &s.newly {
            let t = timers.draw(rng);
            s.order.push((t, u));
            rec.timer(u, slot, t);
        }
        // attempts in timer order: the first newly active followee to reach
        // a target claims it, and the target settles within the slot
        s.order.sort_unstable();

        s.next.clear();
        if eps == 0.0 {
            fi_slot_locked(g, p, slot, s, rng, rec);
        } else {
            fi_slot_eps(g, p, eps, slot, s, rng, rec);
        }
        std::mem::swap(&mut s.newly, &mut s.next);
        slot += 1;
    }
    s.activated.len()
}

// Branch-free over the target state: every visit draws, and only a draw on a
// susceptible target counts. Random states make branches mispredict often.
fn fi_slot_locked<R: Recorder>(
    g: &CommunityGraph,
    p: &[f64],
    slot: u32,
    s: &mut Scratch,
    rng: &mut SimRng,
    rec: &mut R,
) {
    let (mut hits, mut misses) = (0usize, 0usize);
    for &(_, u) in &s.order {
        for (e, &v) in g.follower_edge_range(u).zip(g.followers(u)) {
            let st = s.state[v.index()] as u8;
            let sus = st == NodeState::Susceptible as u8;
            let hit = sus & (rng.gen::<f64>() < p[e]);
            let miss = sus & !hit;
            if R::OBSERVES && sus {
                rec.attempt(v);
                if hit {
                    rec.activate(v, slot + 1, Some(u));
                }
            }
            s.state[v.index()] = NodeState::from_u8(
                st + hit as u8 * NodeState::Active as u8
                    + miss as u8 * NodeState::Insusceptible as u8,
            );
            s.hit_buf[hits] = v;
            s.miss_buf[misses] = v;
            hits += hit as usize;
            misses += miss as usize;
        }
    }
    s.next.extend_from_slice(&s.hit_buf[..hits]);
    s.activated.extend_from_slice(&s.hit_buf[..hits]);
    s.blocked.extend_from_slice(&s.miss_buf[..misses]);
}

fn fi_slot_eps<R: Recorder>(
    g: &CommunityGraph,
    p: &[f64],
    eps: f64,
    slot: u32,
    s: &mut Scratch,
    rng: &mut SimRng,
    rec: &mut R,
) {
    s.stamp += 1;
    for &(_, u) in &s.order {
        for (e, &v) in g.follower_edge_range(u).zip(g.followers(u)) {
            let susceptible = s.state[v.index()] == NodeState::Susceptible;
            let q = if susceptible {
                p[e]
            } else if s.state[v.index()] == NodeState::Insusceptible
                && s.claimed[v.index()] != s.stamp
            {
                eps
            } else {
                continue;
            };
            rec.attempt(v);
            if rng.gen::<f64>() < q {
                s.state[v.index()] = NodeState::Active;
                s.activated.push(v);
                s.next.push(v);
                rec.activate(v, slot + 1, Some(u));
            } else {
                s.claimed[v.index()] = s.stamp;
                if susceptible {
                    s.state[v.index()] = NodeState::Insusceptible;
                    s.blocked.push(v);
                }
            }
        }
    }
}

pub(super) fn run_ic<R: Recorder>(
    d: &Diffusion<'_>,
    seeds: &[NodeId],
    rng: &mut SimRng,
    s: &mut Scratch,
    timers: TimerResolution,
    rec: &mut R,
) -> usize {
    let g = d.graph;
    let p = d.probs.as_slice();
    s.reset(seeds, rec);
    let mut slot = 0u32;
    while !s.newly.is_empty() {
        rec.slot(slot, &s.state, &s.newly);
        if R::TIMERS {
            for &u in &s.newly {
                rec.timer(u, slot, timers.draw(rng));
            }
        }
        s.next.clear();
        let mut hits = 0usize;
        for &u in &s.newly {
            for (e, &v) in g.follower_edge_range(u).zip(g.followers(u)) {
                let st = s.state[v.index()] as u8;
                let sus = st == NodeState::Susceptible as u8;
                let hit = sus & (rng.gen::<f64>() < p[e]);
                if R::OBSERVES && sus {
                    rec.attempt(v);
                    if hit {
                        rec.activate(v, slot + 1, Some(u));
                    }
                }
                s.state[v.index()] = NodeState::from_u8(st + hit as u8 * NodeState::Active as u8);
                s.hit_buf[hits] = v;
                hits += hit as usize;
            }
        }
        s.next.extend_from_slice(&s.hit_buf[..hits]);
        s.activated.extend_from_slice(&s.hit_buf[..hits]);
        std::mem::swap(&mut s.newly, &mut s.next);
        slot += 1;
    }
    s.activated.len()
}

/// Node partition at the start of a slot.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct SlotState {
    pub slot: u32,
    pub active: Vec<NodeId>,
    pub insusceptible: Vec<NodeId>,
    pub susceptible: Vec<NodeId>,
    pub newly_active: Vec<NodeId>,
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FiTrace {
    pub slots: Vec<SlotState>,
    /// Number of activation attempts received by each node.
    pub attempts: Vec<u32>,
}

impl FiTrace {
    pub(crate) fn new(node_count: usize) -> Self {
        FiTrace {
            slots: Vec::new(),
            attempts: vec![0; node_count],
        }
    }
}

impl Recorder for FiTrace {
    fn slot(&mut self, slot: u32, state: &[NodeState], newly: &[NodeId]) {
        let pick = |want: NodeState| {
            state
                .iter()
                .enumerate()
                .filter(|(_, &s)| s == want)
                .map(|(i, _)| NodeId(i as u32))
                .collect::<Vec<_>>()
        };
        let mut newly_active = newly.to_vec();
        newly_active.sort_unstable();
        self.slots.push(SlotState {
            slot,
            active: pick(NodeState::Active),
            insusceptible: pick(NodeState::Insusceptible),
            susceptible: pick(NodeState::Susceptible),
            newly_active,
        });
    }

    fn attempt(&mut self, target: NodeId) {
        self.attempts[target.index()] += 1;
    }
}

/// One activation with the slot it happened in, the timer the node drew when
/// it became newly active and the node whose attempt activated it.
#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct TracedActivation {
    pub node: NodeId,
    pub slot: u32,
    pub timer: u64,
    pub activator: Option<NodeId>,
}

#[derive(Default)]
pub(crate) struct ActivationLog {
    pub(crate) activations: Vec<TracedActivation>,
    position: HashMap<NodeId, usize>,
}

impl ActivationLog {
    pub(crate) fn clear(&mut self) {
        self.activations.clear();
        self.position.clear();
    }
}

impl Recorder for ActivationLog {
    const TIMERS: bool = true;

    fn timer(&mut self, node: NodeId, _slot: u32, timer: u64) {
        let i = self.position[&node];
        self.activations[i].timer = timer;
    }

    fn activate(&mut self, node: NodeId, slot: u32, by: Option<NodeId>) {
        self.position.insert(node, self.activations.len());
        self.activations.push(TracedActivation {
            node,
            slot,
            timer: 0,
            activator: by,
        });
    }
}
