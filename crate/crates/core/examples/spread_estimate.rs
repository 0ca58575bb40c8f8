//! Monte Carlo spread of a few seeds under IC, FI and FI with epsilon.

use fi_diffusion::diffusion::{Diffusion, Model};
use fi_diffusion::synth::{gen_edge_probs, gen_graph, SynthConfig};
use fi_diffusion::{NodeId, Result};

fn main() -> Result<()> {
    let cfg = SynthConfig {
        node_count: 500,
        target_density: 0.01,
        master_seed: 3,
        ..SynthConfig::default()
    };
    let g = gen_graph(&cfg)?;
    let p = gen_edge_probs(&g, &cfg)?;
    let seeds = [NodeId(0), NodeId(1), NodeId(2)];
    println!(
        "{} nodes, {} edges, seeds {:?}",
        g.node_count(),
        g.edge_count(),
        seeds
    );

    let d = Diffusion::new(&g, &p);
    for (label, d, model) in [
        ("IC", d, Model::Ic),
        ("FI", d, Model::Fi),
        ("FI eps=0.05", d.with_epsilon(0.05), Model::Fi),
    ] {
        let est = d.estimate(model, &seeds, 20_000, 7)?;
        println!(
            "{label:>12}: {:.2} ± {:.2} activated besides the seeds",
            est.mean_exclusive, est.std_error
        );
    }

    let run = d.simulate(Model::Fi, &seeds, 11)?;
    println!("one FI run activated {} nodes", run.len());
    let trace = d.trace_fi(&seeds, 11)?;
    println!("it lasted {} slots", trace.slots.len());
    Ok(())
}
