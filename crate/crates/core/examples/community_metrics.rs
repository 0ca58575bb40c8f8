//! Structural metrics of a synthetic community: follow balance, reciprocity,
//! DI distribution, hierarchy and homophily.

use fi_diffusion::metrics::{
    di_beta_fit, follower_followee_summary, hierarchy_deltas, homophily_deltas,
    reciprocal_histogram, reciprocal_levels,
};
use fi_diffusion::synth::{generate, SynthConfig};
use fi_diffusion::Result;

fn main() -> Result<()> {
    let cfg = SynthConfig {
        node_count: 1000,
        target_density: 0.01,
        message_count: 0,
        ..SynthConfig::default()
    };
    let ds = generate(&cfg)?.dataset()?;
    let g = &ds.graph;
    println!(
        "{} nodes, {} edges, density {:.4}",
        g.node_count(),
        g.edge_count(),
        g.density()?
    );

    let follow = follower_followee_summary(g);
    println!(
        "more followees {:.1}%, more followers {:.1}%, equal {:.1}%",
        follow.above_pct, follow.below_pct, follow.diagonal_pct
    );

    let levels = reciprocal_levels(g);
    let hist = reciprocal_histogram(&levels);
    let mean = levels.iter().map(|(_, r)| r).sum::<f64>() / levels.len() as f64;
    println!(
        "mean reciprocal level {mean:.3} over {} nodes ({} bins)",
        levels.len(),
        hist.counts.len()
    );

    let fit = di_beta_fit(&ds.di)?;
    println!(
        "DI ~ Beta({:.2}, {:.2}) on the unit scale",
        fit.alpha, fit.beta
    );

    let h = hierarchy_deltas(g, &ds.di);
    let avg = |xs: &mut dyn Iterator<Item = f64>| {
        let v: Vec<f64> = xs.collect();
        v.iter().sum::<f64>() / v.len() as f64
    };
    println!(
        "hierarchy: mean delta_r {:.2}, mean delta_e {:.2}",
        avg(&mut h.iter().map(|d| d.delta_r)),
        avg(&mut h.iter().map(|d| d.delta_e))
    );
    let m = homophily_deltas(g, &ds.di);
    println!(
        "homophily: mean delta_re {:.2}, mean delta_nre {:.2}",
        avg(&mut m.iter().map(|d| d.delta_re)),
        avg(&mut m.iter().map(|d| d.delta_nre))
    );
    Ok(())
}
