//! Cascade reconstruction from tweet logs.
//!
//! Tweets are grouped into messages by following `retweet_of` links to the
//! root tweet. Within a message each user is activated by their first post.
//! An activation is attributed to the followee that posted the message
//! earliest, among followees that posted strictly before the user and no more
//! than `window` seconds before. Users without such a followee root a new
//! cascade of the same message.
//!
//! # Log format
//!
//! One cascade per line: the message id followed by comma-separated
//! `node:time:influencer` triples in activation order, where `node` and
//! `influencer` are dense node ids, `time` is Unix seconds and the influencer
//! is empty for the root:
//!
//! ```text
//! m17,4:1325376000:,9:1325376420:4,12:1325379900:9
//! ```

use std::collections::{BTreeMap, HashMap, HashSet};
use std::io::{BufRead, Write};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CommunityGraph, NodeId};
use crate::ingest::{Dataset, TweetRecord};

pub const DEFAULT_WINDOW_SECS: i64 = 7 * 86_400;

#[derive(Copy, Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Activation {
    pub node: NodeId,
    pub time: i64,
    pub first_influencer: Option<NodeId>,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Cascade {
    pub message_id: String,
    pub root: NodeId,
    pub activations: Vec<Activation>,
}

impl Cascade {
    pub fn len(&self) -> usize {
        self.activations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.activations.is_empty()
    }

    /// Checks the structural invariants that do not need the graph.
    pub fn validate(&self) -> std::result::Result<(), String> {
        let first = self.activations.first().ok_or("empty cascade")?;
        if first.node != self.root || first.first_influencer.is_some() {
            return Err("first activation must be the root, without influencer".into());
        }
        let mut seen: HashMap<NodeId, i64> = HashMap::with_capacity(self.activations.len());
        let mut last = i64::MIN;
        for a in &self.activations {
            if a.time < last {
                return Err(format!("activation of {} out of time order", a.node));
            }
            last = a.time;
            if let Some(inf) = a.first_influencer {
                match seen.get(&inf) {
                    Some(&t) if t < a.time => {}
                    _ => {
                        return Err(format!(
                            "influencer {inf} of {} did not activate earlier",
                            a.node
                        ))
                    }
                }
            } else if a.node != self.root {
                return Err(format!("non-root activation {} without influencer", a.node));
            }
            if seen.insert(a.node, a.time).is_some() {
                return Err(format!("node {} activated twice", a.node));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CascadeLog {
    pub cascades: Vec<Cascade>,
}

impl CascadeLog {
    pub fn new(cascades: Vec<Cascade>) -> Result<Self> {
        let mut ids = HashSet::with_capacity(cascades.len());
        for c in &cascades {
            if !ids.insert(c.message_id.as_str()) {
                return Err(Error::DuplicateId(c.message_id.clone()));
            }
        }
        Ok(CascadeLog { cascades })
    }

    pub fn len(&self) -> usize {
        self.cascades.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cascades.is_empty()
    }

    pub fn activation_count(&self) -> usize {
        self.cascades.iter().map(Cascade::len).sum()
    }

    /// Every attributed influencer must be a followee of the activated node.
    pub fn check_against(&self, g: &CommunityGraph) -> Result<()> {
        for c in &self.cascades {
            for a in &c.activations {
                g.check(a.node)?;
                if let Some(inf) = a.first_influencer {
                    g.check(inf)?;
                    if !g.follows(a.node, inf) {
                        return Err(Error::EdgeNotInGraph {
                            influencer: inf,
                            target: a.node,
                        });
                    }
                }
            }
        }
        Ok(())
    }
}

/// First post of each user for one message: `(node, time, tweet id)`,
/// sorted by time then node.
pub(crate) type MessagePosts = Vec<(NodeId, i64, String)>;

/// Splits one message's posts into cascades by earliest-followee attribution.
pub(crate) fn attribute_message(
    g: &CommunityGraph,
    posts: &[(NodeId, i64, String)],
    window: i64,
) -> Vec<Cascade> {
    let mut activated: HashMap<NodeId, (i64, usize)> = HashMap::with_capacity(posts.len());
    let mut cascades: Vec<Cascade> = Vec::new();
    for (node, time, tweet_id) in posts {
        let (node, time) = (*node, *time);
        let mut best: Option<(i64, NodeId, usize)> = None;
        for &followee in g.followees(node) {
            if let Some(&(t, idx)) = activated.get(&followee) {
                if t < time
                    && time - t <= window
                    && best.is_none_or(|(bt, bn, _)| (t, followee) < (bt, bn))
                {
                    best = Some((t, followee, idx));
                }
            }
        }
        let idx = match best {
            Some((_, influencer, idx)) => {
                cascades[idx].activations.push(Activation {
                    node,
                    time,
                    first_influencer: Some(influencer),
                });
                idx
            }
            None => {
                cascades.push(Cascade {
                    message_id: tweet_id.clone(),
                    root: node,
                    activations: vec![Activation {
                        node,
                        time,
                        first_influencer: None,
                    }],
                });
                cascades.len() - 1
            }
        };
        activated.insert(node, (time, idx));
    }
    cascades
}

/// Resolves each tweet to the root of its `retweet_of` chain. A link to a
/// tweet that is not in the log makes the linked id the root.
fn message_roots(tweets: &[TweetRecord]) -> Result<Vec<String>> {
    let mut by_id: HashMap<&str, usize> = HashMap::with_capacity(tweets.len());
    for (i, t) in tweets.iter().enumerate() {
        if by_id.insert(t.tweet_id.as_str(), i).is_some() {
            return Err(Error::DuplicateId(t.tweet_id.clone()));
        }
    }
    let mut root: Vec<Option<String>> = vec![None; tweets.len()];
    for start in 0..tweets.len() {
        if root[start].is_some() {
            continue;
        }
        let mut path = vec![start];
        let mut on_path: HashSet<usize> = HashSet::from([start]);
        let resolved = loop {
            let cur = *path.last().unwrap();
            match &tweets[cur].retweet_of {
                None => break tweets[cur].tweet_id.clone(),
                Some(parent) => match by_id.get(parent.as_str()) {
                    None => break parent.clone(),
                    Some(&p) => {
                        if let Some(r) = &root[p] {
                            break r.clone();
                        }
                        if !on_path.insert(p) {
                            let from = path.iter().position(|&x| x == p).unwrap();
                            return Err(Error::RetweetCycle(
                                path[from..]
                                    .iter()
                                    .map(|&i| tweets[i].tweet_id.clone())
                                    .collect(),
                            ));
                        }
                        path.push(p);
                    }
                },
            }
        };
        for i in path {
            root[i] = Some(resolved.clone());
        }
    }
    Ok(root.into_iter().map(Option::unwrap).collect())
}

pub fn extract_cascades(dataset: &Dataset, window: i64) -> Result<CascadeLog> {
    let roots = message_roots(&dataset.tweets)?;
    let mut groups: HashMap<&str, Vec<usize>> = HashMap::new();
    for (i, r) in roots.iter().enumerate() {
        groups.entry(r.as_str()).or_default().push(i);
    }

    let mut messages: Vec<MessagePosts> = Vec::with_capacity(groups.len());
    for (_, idxs) in groups {
        let mut first: HashMap<NodeId, (i64, usize)> = HashMap::with_capacity(idxs.len());
        for i in idxs {
            let t = &dataset.tweets[i];
            let node = dataset
                .node(&t.author)
                .ok_or_else(|| Error::UnknownAuthor(t.author.clone()))?;
            let e = first.entry(node).or_insert((t.timestamp, i));
            if (t.timestamp, i) < *e {
                *e = (t.timestamp, i);
            }
        }
        let mut posts: MessagePosts = first
            .into_iter()
            .map(|(n, (time, i))| (n, time, dataset.tweets[i].tweet_id.clone()))
            .collect();
        posts.sort_by_key(|a| (a.1, a.0));
        messages.push(posts);
    }
    // messages ordered by first post time, then root tweet id
    messages.sort_by(|a, b| (a[0].1, &a[0].2).cmp(&(b[0].1, &b[0].2)));

    let g = &dataset.graph;
    let cascades: Vec<Cascade> = messages
        .par_iter()
        .flat_map_iter(|posts| attribute_message(g, posts, window))
        .collect();
    CascadeLog::new(cascades)
}

/// Mean cascade size (root included) per root node.
pub fn ground_truth_sigma(log: &CascadeLog) -> BTreeMap<NodeId, f64> {
    let mut acc: BTreeMap<NodeId, (usize, usize)> = BTreeMap::new();
    for c in &log.cascades {
        let e = acc.entry(c.root).or_default();
        e.0 += c.len();
        e.1 += 1;
    }
    acc.into_iter()
        .map(|(n, (total, count))| (n, total as f64 / count as f64))
        .collect()
}

pub fn write_cascade_log<W: Write>(log: &CascadeLog, mut w: W) -> Result<()> {
    for c in &log.cascades {
        if c.message_id.is_empty() || c.message_id.contains([',', '\n', '\r']) {
            return Err(Error::InvalidArgument(format!(
                "message id {:?} cannot be written to a cascade log",
                c.message_id
            )));
        }
        w.write_all(c.message_id.as_bytes())?;
        for a in &c.activations {
            match a.first_influencer {
                Some(inf) => write!(w, ",{}:{}:{}", a.node, a.time, inf)?,
                None => write!(w, ",{}:{}:", a.node, a.time)?,
            }
        }
        w.write_all(b"\n")?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_cascade_log<R: BufRead>(reader: R) -> Result<CascadeLog> {
    let mut cascades = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.is_empty() {
            continue;
        }
        let err = |message: String| Error::Parse {
            path: "<cascade log>".into(),
            line: i + 1,
            message,
        };
        let mut fields = line.split(',');
        let message_id = fields.next().unwrap_or_default().to_string();
        let mut activations = Vec::new();
        for f in fields {
            let mut parts = f.split(':');
            let (Some(n), Some(t), Some(inf), None) =
                (parts.next(), parts.next(), parts.next(), parts.next())
            else {
                return Err(err(format!("bad activation {f:?}")));
            };
            let node = n
                .parse::<u32>()
                .map_err(|_| err(format!("bad node {n:?}")))?;
            let time = t
                .parse::<i64>()
                .map_err(|_| err(format!("bad time {t:?}")))?;
            let first_influencer = if inf.is_empty() {
                None
            } else {
                Some(NodeId(
                    inf.parse::<u32>()
                        .map_err(|_| err(format!("bad influencer {inf:?}")))?,
                ))
            };
            activations.push(Activation {
                node: NodeId(node),
                time,
                first_influencer,
            });
        }
        let root = activations
            .first()
            .map(|a| a.node)
            .ok_or_else(|| err("empty cascade".into()))?;
        let cascade = Cascade {
            message_id,
            root,
            activations,
        };
        cascade.validate().map_err(err)?;
        cascades.push(cascade);
    }
    CascadeLog::new(cascades)
}
