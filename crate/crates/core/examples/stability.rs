//! Split-half stability of FI and IC inference.

use fi_diffusion::cascade::DEFAULT_WINDOW_SECS;
use fi_diffusion::diffusion::Model;
use fi_diffusion::experiments::stability_experiment;
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
    for model in [Model::Fi, Model::Ic] {
        let r = stability_experiment(&c.log, &c.graph, model, 20, 1, DEFAULT_WINDOW_SECS)?;
        println!(
            "{model}: RMSE between halves {:.4} ± {:.4} over {} rounds",
            r.rmse_mean, r.rmse_std, r.rounds
        );
    }
    Ok(())
}
