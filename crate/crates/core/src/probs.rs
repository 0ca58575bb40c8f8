//! Per-edge influence probabilities, stored densely in edge id order.
//!
//! The CSV form has the header `u,v,p,attempts`, one row per graph edge, where
//! `u` is the influencer (followee) and `v` the influenced follower, both as
//! dense node ids. On input, edges that are not listed get probability zero
//! and an empty `attempts` field reads as zero.

use std::io::{Read, Write};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{CommunityGraph, EdgeId, NodeId};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EdgeProbabilities {
    probs: Vec<f64>,
    attempts: Vec<u64>,
}

impl EdgeProbabilities {
    pub fn zeros(g: &CommunityGraph) -> Self {
        Self::constant(g, 0.0)
    }

    pub fn constant(g: &CommunityGraph, p: f64) -> Self {
        assert!((0.0..=1.0).contains(&p), "probability {p} outside [0, 1]");
        EdgeProbabilities {
            probs: vec![p; g.edge_count()],
            attempts: vec![0; g.edge_count()],
        }
    }

    /// Probabilities in edge id order.
    pub fn from_vec(g: &CommunityGraph, probs: Vec<f64>) -> Result<Self> {
        if probs.len() != g.edge_count() {
            return Err(Error::LengthMismatch {
                left: probs.len(),
                right: g.edge_count(),
            });
        }
        if let Some(p) = probs.iter().find(|p| !(0.0..=1.0).contains(*p)) {
            return Err(Error::InvalidArgument(format!(
                "probability {p} outside [0, 1]"
            )));
        }
        let attempts = vec![0; probs.len()];
        Ok(EdgeProbabilities { probs, attempts })
    }

    /// Frequency estimates `successes / attempts`, zero where nothing was attempted.
    pub fn from_counts(attempts: Vec<u64>, successes: &[u64]) -> Self {
        assert_eq!(attempts.len(), successes.len());
        let probs = attempts
            .iter()
            .zip(successes)
            .map(|(&a, &s)| if a == 0 { 0.0 } else { s as f64 / a as f64 })
            .collect();
        EdgeProbabilities { probs, attempts }
    }

    /// Sets `p(influencer -> target)`.
    pub fn set(
        &mut self,
        g: &CommunityGraph,
        influencer: NodeId,
        target: NodeId,
        p: f64,
    ) -> Result<()> {
        if !(0.0..=1.0).contains(&p) {
            return Err(Error::InvalidArgument(format!(
                "probability {p} outside [0, 1]"
            )));
        }
        let e = g
            .edge_id(influencer, target)
            .ok_or(Error::EdgeNotInGraph { influencer, target })?;
        self.probs[e] = p;
        Ok(())
    }

    pub fn get(&self, g: &CommunityGraph, influencer: NodeId, target: NodeId) -> Option<f64> {
        g.edge_id(influencer, target).map(|e| self.probs[e])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.probs
    }

    #[inline]
    pub fn p(&self, e: EdgeId) -> f64 {
        self.probs[e]
    }

    pub fn attempts(&self) -> &[u64] {
        &self.attempts
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn write_csv<W: Write>(&self, g: &CommunityGraph, writer: W) -> Result<()> {
        let mut w = csv::Writer::from_writer(writer);
        w.write_record(["u", "v", "p", "attempts"])?;
        for (e, (u, v)) in g.influence_edges().enumerate() {
            w.write_record([
                u.to_string(),
                v.to_string(),
                self.probs[e].to_string(),
                self.attempts[e].to_string(),
            ])?;
        }
        w.flush()?;
        Ok(())
    }

    pub fn read_csv<R: Read>(g: &CommunityGraph, reader: R) -> Result<Self> {
        let mut out = Self::zeros(g);
        let mut rdr = csv::ReaderBuilder::new()
            .trim(csv::Trim::All)
            .from_reader(reader);
        for rec in rdr.records() {
            let rec = rec?;
            let line = rec.position().map_or(0, |p| p.line() as usize);
            let err = |message: String| Error::Parse {
                path: "<probabilities>".into(),
                line,
                message,
            };
            if rec.len() != 4 {
                return Err(err(format!("expected 4 fields, found {}", rec.len())));
            }
            let node = |s: &str| {
                s.parse::<u32>()
                    .map(NodeId)
                    .map_err(|_| err(format!("bad node id {s:?}")))
            };
            let (u, v) = (node(&rec[0])?, node(&rec[1])?);
            let p: f64 = rec[2]
                .parse()
                .map_err(|_| err(format!("bad probability {:?}", &rec[2])))?;
            let attempts: u64 = if rec[3].is_empty() {
                0
            } else {
                rec[3]
                    .parse()
                    .map_err(|_| err(format!("bad attempt count {:?}", &rec[3])))?
            };
            out.set(g, u, v, p)?;
            let e = g.edge_id(u, v).expect("checked by set");
            out.attempts[e] = attempts;
        }
        Ok(out)
    }
}
