//! Learning edge probabilities from a synthetic FI cascade log and
//! comparing FI and IC inference against the generating values.

use fi_diffusion::cascade::DEFAULT_WINDOW_SECS;
use fi_diffusion::experiments::rmse;
use fi_diffusion::inference::{infer_fi, infer_ic};
use fi_diffusion::synth::{generate, SynthConfig};
use fi_diffusion::Result;

fn main() -> Result<()> {
    let cfg = SynthConfig {
        node_count: 500,
        target_density: 0.01,
        message_count: 10_000,
        ..SynthConfig::default()
    };
    let c = generate(&cfg)?;
    println!(
        "{} edges, {} cascades, {} activations",
        c.graph.edge_count(),
        c.log.len(),
        c.log.activation_count()
    );

    let fi = infer_fi(&c.log, &c.graph, DEFAULT_WINDOW_SECS)?;
    let ic = infer_ic(&c.log, &c.graph, DEFAULT_WINDOW_SECS)?;
    let truth = c.probs.as_slice();
    let mean = |xs: &[f64]| xs.iter().sum::<f64>() / xs.len() as f64;
    println!(
        "mean p: true {:.4}, FI {:.4}, IC {:.4}",
        mean(truth),
        mean(fi.as_slice()),
        mean(ic.as_slice())
    );
    println!(
        "RMSE to truth: FI {:.4}, IC {:.4}",
        rmse(fi.as_slice(), truth)?,
        rmse(ic.as_slice(), truth)?
    );

    let busiest = (0..truth.len()).max_by_key(|&e| fi.attempts()[e]).unwrap();
    println!(
        "busiest edge: {} FI attempts, true p {:.3}, FI {:.3}, IC {:.3}",
        fi.attempts()[busiest],
        truth[busiest],
        fi.as_slice()[busiest],
        ic.as_slice()[busiest]
    );
    Ok(())
}
