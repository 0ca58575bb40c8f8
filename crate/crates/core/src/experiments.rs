//! Model comparison on a cascade log.
//!
//! Stability: shuffle the cascades, split them into two halves, infer edge
//! probabilities from each half and measure the RMSE between the two
//! vectors. A model whose estimates depend less on which cascades were seen
//! gives a smaller RMSE.
//!
//! Prediction: infer probabilities from the whole log, estimate the spread of
//! every node that roots a cascade by Monte Carlo simulation and compare with
//! the mean observed cascade size of that node.

use std::collections::BTreeMap;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::cascade::{ground_truth_sigma, Cascade, CascadeLog};
use crate::diffusion::{Diffusion, Model, Scratch};
use crate::error::{Error, Result};
use crate::graph::{CommunityGraph, NodeId};
use crate::inference::{count_attempts, infer};
use crate::metrics::Histogram;
use crate::probs::EdgeProbabilities;
use crate::rng::{derive_seed, stream_rng};

pub const PROB_BIN_WIDTH: f64 = 0.05;
pub const SIGMA_BIN_WIDTH: f64 = 1.0;

/// Root mean square difference of two equal-length vectors.
pub fn rmse(a: &[f64], b: &[f64]) -> Result<f64> {
    if a.len() != b.len() {
        return Err(Error::LengthMismatch {
            left: a.len(),
            right: b.len(),
        });
    }
    if a.is_empty() {
        return Err(Error::InvalidArgument("rmse of empty vectors".into()));
    }
    let sq: f64 = a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum();
    Ok((sq / a.len() as f64).sqrt())
}

fn mean_std(xs: &[f64]) -> (f64, f64) {
    let n = xs.len() as f64;
    let mean = xs.iter().sum::<f64>() / n;
    let std = if xs.len() > 1 {
        (xs.iter().map(|x| (x - mean).powi(2)).sum::<f64>() / (n - 1.0)).sqrt()
    } else {
        0.0
    };
    (mean, std)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StabilityResult {
    pub model: Model,
    pub rmse_mean: f64,
    /// Sample standard deviation over rounds; 0 for a single round.
    pub rmse_std: f64,
    pub rounds: usize,
    pub per_round: Vec<f64>,
}

/// The two halves of round `round`: a shuffle seeded from
/// `(split_seed, round)`, with the extra cascade of an odd log in the first.
pub fn split_halves(
    cascade_count: usize,
    split_seed: u64,
    round: usize,
) -> (Vec<usize>, Vec<usize>) {
    let mut idx: Vec<usize> = (0..cascade_count).collect();
    idx.shuffle(&mut stream_rng(split_seed, round as u64));
    let second = idx.split_off(cascade_count.div_ceil(2));
    (idx, second)
}

fn half_probs(
    model: Model,
    log: &CascadeLog,
    half: &[usize],
    g: &CommunityGraph,
    window: i64,
) -> EdgeProbabilities {
    let cascades: Vec<&Cascade> = half.iter().map(|&i| &log.cascades[i]).collect();
    count_attempts(model, cascades, g, window).into_probabilities()
}

pub fn stability_experiment(
    log: &CascadeLog,
    g: &CommunityGraph,
    model: Model,
    rounds: usize,
    split_seed: u64,
    window: i64,
) -> Result<StabilityResult> {
    if log.len() < 2 {
        return Err(Error::TooFewCascades(log.len()));
    }
    if rounds == 0 {
        return Err(Error::InvalidArgument("rounds must be at least 1".into()));
    }
    if g.edge_count() == 0 {
        return Err(Error::InvalidArgument("graph has no edges".into()));
    }
    log.check_against(g)?;
    let per_round = (0..rounds)
        .into_par_iter()
        .map(|r| {
            let (a, b) = split_halves(log.len(), split_seed, r);
            let pa = half_probs(model, log, &a, g, window);
            let pb = half_probs(model, log, &b, g, window);
            rmse(pa.as_slice(), pb.as_slice())
        })
        .collect::<Result<Vec<f64>>>()?;
    let (rmse_mean, rmse_std) = mean_std(&per_round);
    Ok(StabilityResult {
        model,
        rmse_mean,
        rmse_std,
        rounds,
        per_round,
    })
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionResult {
    pub model: Model,
    pub rmse_vs_truth: f64,
    /// Seed-inclusive spread estimate per root node.
    pub per_node_sigma: BTreeMap<NodeId, f64>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionReport {
    pub fi: PredictionResult,
    pub ic: PredictionResult,
    pub truth: BTreeMap<NodeId, f64>,
    pub truth_mean: f64,
    pub mc_rounds: u64,
    pub histograms: PredictionHistograms,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PredictionHistograms {
    pub prob_fi: Histogram,
    pub prob_ic: Histogram,
    pub sigma_truth: Histogram,
    pub sigma_fi: Histogram,
    pub sigma_ic: Histogram,
}

/// Histogram of the probabilities of edges that were attempted at least once.
pub fn probability_histogram(p: &EdgeProbabilities) -> Histogram {
    let values = p
        .as_slice()
        .iter()
        .zip(p.attempts())
        .filter(|(_, &a)| a > 0)
        .map(|(&x, _)| x);
    Histogram::fixed_width(values, 0.0, 1.0, PROB_BIN_WIDTH)
}

/// Histogram of spreads with unit bins from 1 up to the largest value.
pub fn sigma_histogram(values: &BTreeMap<NodeId, f64>, hi: f64) -> Histogram {
    Histogram::fixed_width(
        values.values().copied(),
        1.0,
        hi.ceil().max(2.0),
        SIGMA_BIN_WIDTH,
    )
}

/// Seed-inclusive spread of every node in `roots`, each from its own seed
/// stream.
pub fn predict_sigma(
    g: &CommunityGraph,
    p: &EdgeProbabilities,
    model: Model,
    roots: &[NodeId],
    mc_rounds: u64,
    seed: u64,
) -> Result<BTreeMap<NodeId, f64>> {
    let d = Diffusion::new(g, p);
    let n = g.node_count();
    roots
        .par_iter()
        .map_init(
            || Scratch::new(n),
            |scratch, &u| {
                let est = d.estimate_sequential(
                    model,
                    &[u],
                    mc_rounds,
                    derive_seed(seed, u.0 as u64),
                    scratch,
                )?;
                Ok((u, est.mean_inclusive))
            },
        )
        .collect()
}

fn sigma_rmse(pred: &BTreeMap<NodeId, f64>, truth: &BTreeMap<NodeId, f64>) -> Result<f64> {
    let a: Vec<f64> = truth.keys().map(|u| pred[u]).collect();
    let b: Vec<f64> = truth.values().copied().collect();
    rmse(&a, &b)
}

pub fn prediction_experiment(
    log: &CascadeLog,
    g: &CommunityGraph,
    mc_rounds: u64,
    seed: u64,
    window: i64,
) -> Result<PredictionReport> {
    if log.is_empty() {
        return Err(Error::InvalidArgument("empty cascade log".into()));
    }
    if mc_rounds == 0 {
        return Err(Error::InvalidArgument(
            "mc_rounds must be at least 1".into(),
        ));
    }
    let truth = ground_truth_sigma(log);
    let roots: Vec<NodeId> = truth.keys().copied().collect();
    let p_fi = infer(Model::Fi, log, g, window)?;
    let p_ic = infer(Model::Ic, log, g, window)?;

    let run = |model: Model, p: &EdgeProbabilities| -> Result<PredictionResult> {
        let stream = match model {
            Model::Fi => 1,
            Model::Ic => 2,
        };
        let per_node_sigma =
            predict_sigma(g, p, model, &roots, mc_rounds, derive_seed(seed, stream))?;
        Ok(PredictionResult {
            model,
            rmse_vs_truth: sigma_rmse(&per_node_sigma, &truth)?,
            per_node_sigma,
        })
    };
    let fi = run(Model::Fi, &p_fi)?;
    let ic = run(Model::Ic, &p_ic)?;

    let truth_mean = truth.values().sum::<f64>() / truth.len() as f64;
    let hi = truth
        .values()
        .chain(fi.per_node_sigma.values())
        .chain(ic.per_node_sigma.values())
        .fold(1.0f64, |m, &x| m.max(x));
    let histograms = PredictionHistograms {
        prob_fi: probability_histogram(&p_fi),
        prob_ic: probability_histogram(&p_ic),
        sigma_truth: sigma_histogram(&truth, hi),
        sigma_fi: sigma_histogram(&fi.per_node_sigma, hi),
        sigma_ic: sigma_histogram(&ic.per_node_sigma, hi),
    };
    Ok(PredictionReport {
        fi,
        ic,
        truth,
        truth_mean,
        mc_rounds,
        histograms,
    })
}
