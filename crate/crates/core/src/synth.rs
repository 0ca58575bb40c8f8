//! Synthetic communities with known ground truth: a random follower graph,
//! DI scores, edge probabilities and a cascade log generated by simulation.
//!
//! Generated tweets carry timestamps `SYNTH_EPOCH + slot * SLOT_SECS + timer`,
//! where `timer` is the node's FI timer drawn in whole seconds within the
//! hour. Earliest-followee attribution over these timestamps picks exactly
//! the first influencer of the FI simulation, so extracting cascades from the
//! emitted tweets reproduces the generated log.

use std::collections::HashSet;
use std::fs::File;
use std::io::BufWriter;
use std::path::Path;

use rand::seq::SliceRandom;
use rand::Rng;
use rand_distr::{Beta, Distribution};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cascade::{
    attribute_message, write_cascade_log, Cascade, CascadeLog, DEFAULT_WINDOW_SECS,
};
use crate::diffusion::{ActivationLog, Diffusion, Model, Scratch, TimerResolution};
use crate::error::{Error, Result};
use crate::graph::{CommunityGraph, NodeId};
use crate::ingest::{Dataset, ProfileRecord, TweetRecord};
use crate::probs::EdgeProbabilities;
use crate::rng::{derive_seed, stream_rng};

/// 2012-01-01T00:00:00Z
pub const SYNTH_EPOCH: i64 = 1_325_376_000;
pub const SLOT_SECS: i64 = 3600;
pub const TRUE_PROBS_FILE: &str = "true_probs.csv";
pub const CASCADES_FILE: &str = "cascades.txt";

const GRAPH_STREAM: u64 = 1;
const SCORE_STREAM: u64 = 2;
const PROB_STREAM: u64 = 3;
const MESSAGE_STREAM: u64 = 4;

#[derive(Copy, Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "law", rename_all = "lowercase")]
pub enum EdgeProbLaw {
    Uniform { a: f64, b: f64 },
    Constant { c: f64 },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SynthConfig {
    pub node_count: usize,
    pub target_density: f64,
    /// Probability that a generated follow is mirrored.
    pub reciprocity: f64,
    pub di_alpha: f64,
    pub di_beta: f64,
    pub edge_prob_law: EdgeProbLaw,
    pub message_count: usize,
    pub model: Model,
    pub master_seed: u64,
}

impl Default for SynthConfig {
    fn default() -> Self {
        SynthConfig {
            node_count: 2000,
            target_density: 5e-3,
            reciprocity: 0.5,
            di_alpha: 3.0,
            di_beta: 5.0,
            edge_prob_law: EdgeProbLaw::Uniform { a: 0.05, b: 0.3 },
            message_count: 50_000,
            model: Model::Fi,
            master_seed: 42,
        }
    }
}

impl SynthConfig {
    pub fn validate(&self) -> Result<()> {
        let bad = |msg: String| Err(Error::InfeasibleConfig(msg));
        if self.node_count < 2 {
            return bad(format!("node_count {} is below 2", self.node_count));
        }
        if !(self.target_density > 0.0 && self.target_density <= 1.0) {
            return bad(format!("density {} outside (0, 1]", self.target_density));
        }
        if self.target_edge_count() == 0 {
            return bad(format!(
                "density {} gives no edges on {} nodes",
                self.target_density, self.node_count
            ));
        }
        if !(0.0..=1.0).contains(&self.reciprocity) {
            return bad(format!("reciprocity {} outside [0, 1]", self.reciprocity));
        }
        if !(self.di_alpha > 0.0 && self.di_beta > 0.0)
            || !self.di_alpha.is_finite()
            || !self.di_beta.is_finite()
        {
            return bad(format!(
                "beta shapes must be positive, got ({}, {})",
                self.di_alpha, self.di_beta
            ));
        }
        match self.edge_prob_law {
            EdgeProbLaw::Uniform { a, b } if !(0.0 <= a && a <= b && b <= 1.0) => {
                bad(format!("uniform({a}, {b}) is not within [0, 1]"))
            }
            EdgeProbLaw::Constant { c } if !(0.0..=1.0).contains(&c) => {
                bad(format!("constant {c} outside [0, 1]"))
            }
            _ => Ok(()),
        }
    }

    pub fn target_edge_count(&self) -> usize {
        let n = self.node_count as f64;
        (self.target_density * n * (n - 1.0)).round() as usize
    }
}

/// Random directed graph with `round(density * n * (n - 1))` follows (one
/// more when the last follow is mirrored).
pub fn gen_graph(cfg: &SynthConfig) -> Result<CommunityGraph> {
    cfg.validate()?;
    let n = cfg.node_count as u32;
    let target = cfg.target_edge_count();
    let mut rng = stream_rng(cfg.master_seed, GRAPH_STREAM);
    let mut edges: HashSet<(u32, u32)> = HashSet::with_capacity(target + 1);
    let add = |edges: &mut HashSet<(u32, u32)>, rng: &mut crate::rng::SimRng, u: u32, v: u32| {
        if edges.insert((u, v)) && rng.gen::<f64>() < cfg.reciprocity {
            edges.insert((v, u));
        }
    };

    if cfg.target_density < 0.25 {
        while edges.len() < target {
            let u = rng.gen_range(0..n);
            let v = rng.gen_range(0..n - 1);
            let v = if v >= u { v + 1 } else { v };
            add(&mut edges, &mut rng, u, v);
        }
    } else {
        let mut pairs: Vec<(u32, u32)> = (0..n)
            .flat_map(|u| (0..n).filter(move |&v| v != u).map(move |v| (u, v)))
            .collect();
        pairs.shuffle(&mut rng);
        for (u, v) in pairs {
            if edges.len() >= target {
                break;
            }
            add(&mut edges, &mut rng, u, v);
        }
    }

    let mut follows: Vec<(u32, u32)> = edges.into_iter().collect();
    follows.sort_unstable();
    let (g, _) = CommunityGraph::from_follows(
        cfg.node_count,
        follows.into_iter().map(|(a, b)| (NodeId(a), NodeId(b))),
    )?;
    Ok(g)
}

/// DI per node: `100 * Beta(alpha, beta)` clamped to `[10, 100]`.
pub fn gen_scores(cfg: &SynthConfig) -> Result<Vec<f64>> {
    cfg.validate()?;
    let dist = Beta::new(cfg.di_alpha, cfg.di_beta)
        .map_err(|e| Error::InfeasibleConfig(format!("beta shapes: {e}")))?;
    let mut rng = stream_rng(cfg.master_seed, SCORE_STREAM);
    Ok((0..cfg.node_count)
        .map(|_| (100.0 * dist.sample(&mut rng)).clamp(10.0, 100.0))
        .collect())
}

/// One probability per edge, drawn in edge id order.
pub fn gen_edge_probs(g: &CommunityGraph, cfg: &SynthConfig) -> Result<EdgeProbabilities> {
    cfg.validate()?;
    let mut rng = stream_rng(cfg.master_seed, PROB_STREAM);
    let probs = (0..g.edge_count())
        .map(|_| match cfg.edge_prob_law {
            EdgeProbLaw::Uniform { a, b } if a < b => rng.gen_range(a..b),
            EdgeProbLaw::Uniform { a, .. } => a,
            EdgeProbLaw::Constant { c } => c,
        })
        .collect();
    EdgeProbabilities::from_vec(g, probs)
}

pub fn external_id(u: NodeId) -> String {
    format!("u{}", u.0)
}

fn tweet_id(message: usize, u: NodeId) -> String {
    format!("m{message}-{}", u.0)
}

/// Simulates message `index` and returns its posts as `(node, time, tweet id)`
/// sorted by time then node.
fn simulate_message(
    d: &Diffusion<'_>,
    model: Model,
    master: u64,
    index: usize,
    scratch: &mut Scratch,
    trace: &mut ActivationLog,
) -> Vec<(NodeId, i64, String)> {
    let mut rng = stream_rng(master, index as u64);
    let root = NodeId(rng.gen_range(0..d.graph().node_count() as u32));
    trace.clear();
    d.run(
        model,
        &[root],
        &mut rng,
        scratch,
        TimerResolution::Discrete(SLOT_SECS as u32),
        trace,
    );
    let mut posts: Vec<(NodeId, i64, String)> = trace
        .activations
        .iter()
        .map(|a| {
            let time = SYNTH_EPOCH + a.slot as i64 * SLOT_SECS + a.timer as i64;
            (a.node, time, tweet_id(index, a.node))
        })
        .collect();
    posts.sort_by_key(|a| (a.1, a.0));
    posts
}

fn cascade_tweets(index: usize, c: &Cascade) -> impl Iterator<Item = TweetRecord> + '_ {
    c.activations.iter().map(move |a| TweetRecord {
        tweet_id: tweet_id(index, a.node),
        author: external_id(a.node),
        timestamp: a.time,
        retweet_of: a.first_influencer.map(|u| tweet_id(index, u)),
        hashtags: Vec::new(),
        reply_to: None,
    })
}

/// Cascades, and the message each one came from, of `cfg.message_count`
/// simulated messages, each started from a uniformly drawn root.
pub fn gen_cascade_log(
    g: &CommunityGraph,
    p: &EdgeProbabilities,
    cfg: &SynthConfig,
) -> Result<(CascadeLog, Vec<usize>)> {
    cfg.validate()?;
    if g.node_count() == 0 {
        return Err(Error::InfeasibleConfig("empty graph".into()));
    }
    let d = Diffusion::new(g, p);
    let master = derive_seed(cfg.master_seed, MESSAGE_STREAM);
    let mut messages: Vec<(Vec<Cascade>, usize)> = (0..cfg.message_count)
        .into_par_iter()
        .map_init(
            || (Scratch::new(g.node_count()), ActivationLog::default()),
            |(scratch, trace), i| {
                let posts = simulate_message(&d, cfg.model, master, i, scratch, trace);
                (attribute_message(g, &posts, DEFAULT_WINDOW_SECS), i)
            },
        )
        .collect();
    // the order extraction produces: first post time, then root tweet id
    messages.sort_by(|a, b| {
        let ka = (a.0[0].activations[0].time, &a.0[0].message_id);
        let kb = (b.0[0].activations[0].time, &b.0[0].message_id);
        ka.cmp(&kb)
    });
    let mut cascades = Vec::with_capacity(messages.len());
    let mut message_of = Vec::with_capacity(messages.len());
    for (c, i) in messages {
        message_of.extend(std::iter::repeat_n(i, c.len()));
        cascades.extend(c);
    }
    Ok((CascadeLog::new(cascades)?, message_of))
}

/// Everything generated from one [`SynthConfig`].
#[derive(Clone, Debug)]
pub struct SyntheticCommunity {
    pub config: SynthConfig,
    pub graph: CommunityGraph,
    pub di: Vec<f64>,
    pub probs: EdgeProbabilities,
    pub log: CascadeLog,
    /// Index of the simulated message behind each cascade of `log`.
    pub message_of: Vec<usize>,
}

pub fn generate(cfg: &SynthConfig) -> Result<SyntheticCommunity> {
    let graph = gen_graph(cfg)?;
    let di = gen_scores(cfg)?;
    let probs = gen_edge_probs(&graph, cfg)?;
    let (log, message_of) = gen_cascade_log(&graph, &probs, cfg)?;
    Ok(SyntheticCommunity {
        config: cfg.clone(),
        graph,
        di,
        probs,
        log,
        message_of,
    })
}

impl SyntheticCommunity {
    pub fn profiles(&self) -> Vec<ProfileRecord> {
        self.di
            .iter()
            .enumerate()
            .map(|(i, &di)| ProfileRecord {
                external_id: external_id(NodeId(i as u32)),
                created_at: SYNTH_EPOCH - 365 * 86_400,
                is_private: false,
                klout: Some(di),
                peerindex: Some(di),
            })
            .collect()
    }

    /// One tweet per activation; a retweet points at its first
    /// influencer's tweet.
    pub fn tweets(&self) -> Vec<TweetRecord> {
        self.log
            .cascades
            .iter()
            .zip(&self.message_of)
            .flat_map(|(c, &i)| cascade_tweets(i, c))
            .collect()
    }

    pub fn dataset(&self) -> Result<Dataset> {
        Dataset::from_parts(self.profiles(), self.graph.clone(), self.tweets())
    }

    /// Writes the dataset files plus the generated cascade log and the true
    /// edge probabilities.
    pub fn write_to_dir(&self, dir: &Path) -> Result<()> {
        self.dataset()?.write_to_dir(dir)?;
        write_cascade_log(
            &self.log,
            BufWriter::new(File::create(dir.join(CASCADES_FILE))?),
        )?;
        self.probs.write_csv(
            &self.graph,
            BufWriter::new(File::create(dir.join(TRUE_PROBS_FILE))?),
        )?;
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::cascade::extract_cascades;

    fn small(seed: u64) -> SynthConfig {
        SynthConfig {
            node_count: 60,
            target_density: 0.06,
            message_count: 400,
            master_seed: seed,
            ..SynthConfig::default()
        }
    }

    #[test]
    fn graph_density_and_reciprocity() {
        let cfg = SynthConfig {
            node_count: 1000,
            target_density: 0.01,
            reciprocity: 0.3,
            ..SynthConfig::default()
        };
        let g = gen_graph(&cfg).unwrap();
        let m = g.edge_count() as f64;
        assert!((m / 9990.0 - 1.0).abs() <= 0.05, "{m}");
        assert!(g.nodes().all(|u| !g.follows(u, u)));

        let all = SynthConfig {
            reciprocity: 1.0,
            ..cfg
        };
        let g = gen_graph(&all).unwrap();
        assert!(g.follow_pairs().all(|(a, b)| g.follows(b, a)));

        let complete = SynthConfig {
            node_count: 4,
            target_density: 1.0,
            ..SynthConfig::default()
        };
        assert_eq!(gen_graph(&complete).unwrap().edge_count(), 12);
    }

    #[test]
    fn infeasible_configs() {
        for cfg in [
            SynthConfig {
                target_density: 0.0,
                ..SynthConfig::default()
            },
            SynthConfig {
                target_density: 1.5,
                ..SynthConfig::default()
            },
            SynthConfig {
                node_count: 10,
                target_density: 1e-4,
                ..SynthConfig::default()
            },
            SynthConfig {
                node_count: 1,
                ..SynthConfig::default()
            },
            SynthConfig {
                di_alpha: 0.0,
                ..SynthConfig::default()
            },
            SynthConfig {
                edge_prob_law: EdgeProbLaw::Uniform { a: 0.4, b: 0.2 },
                ..SynthConfig::default()
            },
            SynthConfig {
                edge_prob_law: EdgeProbLaw::Constant { c: 1.2 },
                ..SynthConfig::default()
            },
        ] {
            assert!(
                matches!(gen_graph(&cfg), Err(Error::InfeasibleConfig(_))),
                "{cfg:?}"
            );
        }
    }

    #[test]
    fn score_means() {
        let cfg = SynthConfig {
            node_count: 100_000,
            di_alpha: 2.0,
            di_beta: 4.0,
            ..SynthConfig::default()
        };
        let s = gen_scores(&cfg).unwrap();
        let mean = s.iter().sum::<f64>() / s.len() as f64;
        assert!((31.0..=35.0).contains(&mean), "{mean}");
        assert!(s.iter().all(|x| (10.0..=100.0).contains(x)));
        assert_eq!(s, gen_scores(&cfg).unwrap());

        let sym = SynthConfig {
            di_alpha: 3.0,
            di_beta: 3.0,
            ..cfg
        };
        let s = gen_scores(&sym).unwrap();
        let mean = s.iter().sum::<f64>() / s.len() as f64;
        assert!((mean - 50.0).abs() <= 1.0, "{mean}");
    }

    #[test]
    fn zero_probabilities_give_singletons() {
        let cfg = SynthConfig {
            edge_prob_law: EdgeProbLaw::Constant { c: 0.0 },
            ..small(3)
        };
        let g = gen_graph(&cfg).unwrap();
        let p = gen_edge_probs(&g, &cfg).unwrap();
        let (log, message_of) = gen_cascade_log(&g, &p, &cfg).unwrap();
        assert_eq!(log.len(), 400);
        assert!(log.cascades.iter().all(|c| c.len() == 1));
        let mut seen = message_of.clone();
        seen.sort_unstable();
        assert_eq!(seen, (0..400).collect::<Vec<_>>());
    }

    #[test]
    fn certain_single_edge() {
        let g = CommunityGraph::from_follows(2, [(NodeId(1), NodeId(0))])
            .unwrap()
            .0;
        let p = EdgeProbabilities::constant(&g, 1.0);
        for model in [Model::Fi, Model::Ic] {
            let cfg = SynthConfig {
                node_count: 2,
                target_density: 0.5,
                model,
                message_count: 200,
                ..SynthConfig::default()
            };
            let (log, _) = gen_cascade_log(&g, &p, &cfg).unwrap();
            for c in &log.cascades {
                assert_eq!(c.len(), if c.root == NodeId(0) { 2 } else { 1 });
            }
        }
    }

    #[test]
    fn extraction_round_trip() {
        for model in [Model::Fi, Model::Ic] {
            let community = generate(&SynthConfig { model, ..small(11) }).unwrap();
            assert!(
                community.log.activation_count() > community.log.len(),
                "cascades never spread"
            );
            let extracted =
                extract_cascades(&community.dataset().unwrap(), DEFAULT_WINDOW_SECS).unwrap();
            assert_eq!(extracted, community.log);
        }
    }

    #[test]
    fn fi_attribution_is_the_simulated_first_influencer() {
        let cfg = small(5);
        let g = gen_graph(&cfg).unwrap();
        let p = gen_edge_probs(&g, &cfg).unwrap();
        let d = Diffusion::new(&g, &p);
        let master = derive_seed(cfg.master_seed, MESSAGE_STREAM);
        let (mut scratch, mut trace) = (Scratch::new(g.node_count()), ActivationLog::default());
        for i in 0..cfg.message_count {
            let posts = simulate_message(&d, Model::Fi, master, i, &mut scratch, &mut trace);
            let cascades = attribute_message(&g, &posts, DEFAULT_WINDOW_SECS);
            assert_eq!(cascades.len(), 1);
            for a in &cascades[0].activations {
                let simulated = trace.activations.iter().find(|t| t.node == a.node).unwrap();
                assert_eq!(a.first_influencer, simulated.activator);
            }
        }
    }

    #[test]
    fn deterministic_and_thread_independent() {
        let cfg = small(8);
        let a = generate(&cfg).unwrap();
        let b = rayon::ThreadPoolBuilder::new()
            .num_threads(3)
            .build()
            .unwrap()
            .install(|| generate(&cfg).unwrap());
        assert_eq!(a.graph, b.graph);
        assert_eq!(a.probs, b.probs);
        assert_eq!(a.log, b.log);
        assert_eq!(a.tweets(), b.tweets());
        assert_ne!(generate(&small(9)).unwrap().log, a.log);
    }

    #[test]
    fn files_load_back() {
        let dir = tempfile::tempdir().unwrap();
        let community = generate(&small(2)).unwrap();
        community.write_to_dir(dir.path()).unwrap();
        let (ds, report) = Dataset::load_dir(dir.path(), &Default::default()).unwrap();
        assert_eq!(report, Default::default());
        assert_eq!(ds.graph, community.graph);
        assert_eq!(ds, community.dataset().unwrap());
        let probs = EdgeProbabilities::read_csv(
            &ds.graph,
            File::open(dir.path().join(TRUE_PROBS_FILE)).unwrap(),
        )
        .unwrap();
        assert_eq!(probs.as_slice(), community.probs.as_slice());
    }
}
