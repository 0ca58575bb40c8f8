//! Predicting cascade sizes with FI and IC parameters learned from the log.

use fi_diffusion::cascade::DEFAULT_WINDOW_SECS;
use fi_diffusion::experiments::prediction_experiment;
use fi_diffusion::synth::{generate, SynthConfig};
use fi_diffusion::Result;

fn main() -> Result<()> {
    let cfg = SynthConfig {
        node_count: 500,
        target_density: 0.01,
        message_count: 5_000,
        ..SynthConfig::default()
    };
    let c = generate(&cfg)?;
    let r = prediction_experiment(&c.log, &c.graph, 500, 1, DEFAULT_WINDOW_SECS)?;
    println!(
        "{} root nodes, observed mean cascade size {:.2}",
        r.truth.len(),
        r.truth_mean
    );
    println!(
        "RMSE of predicted size: FI {:.3}, IC {:.3}",
        r.fi.rmse_vs_truth, r.ic.rmse_vs_truth
    );
    for (u, truth) in r.truth.iter().take(5) {
        println!(
            "  node {:>4}: observed {truth:>7.2}  FI {:>7.2}  IC {:>7.2}",
            u.0, r.fi.per_node_sigma[u], r.ic.per_node_sigma[u]
        );
    }
    Ok(())
}
