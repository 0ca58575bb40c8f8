//! The two FI counterexamples, computed exactly and checked by simulation.
//!
//! Adding a seed can shrink the FI spread, and the marginal loss of a seed
//! can be smaller on a larger set.

use fi_diffusion::diffusion::{exact_spread_fi, exact_spread_ic, Diffusion, Model};
use fi_diffusion::{CommunityGraph, EdgeProbabilities, NodeId, Result};

fn star(sources: &[(u32, f64)], target: u32) -> Result<(CommunityGraph, EdgeProbabilities)> {
    let n = target as usize + 1;
    let (g, _) =
        CommunityGraph::from_follows(n, sources.iter().map(|&(s, _)| (NodeId(target), NodeId(s))))?;
    let mut p = EdgeProbabilities::zeros(&g);
    for &(s, q) in sources {
        p.set(&g, NodeId(s), NodeId(target), q)?;
    }
    Ok((g, p))
}

fn main() -> Result<()> {
    let (g, p) = star(&[(0, 0.8), (1, 0.2)], 2)?;
    println!("u1 -0.8-> u3 <-0.2- u2");
    for seeds in [vec![NodeId(0)], vec![NodeId(0), NodeId(1)]] {
        let fi = exact_spread_fi(&g, &p, &seeds)?;
        let ic = exact_spread_ic(&g, &p, &seeds)?;
        let mc = Diffusion::new(&g, &p).estimate(Model::Fi, &seeds, 100_000, 1)?;
        println!(
            "  seeds {:?}: FI {:.4} (simulated {:.4} ± {:.4}), IC {:.4}",
            seeds.iter().map(|s| s.0 + 1).collect::<Vec<_>>(),
            fi.exclusive,
            mc.mean_exclusive,
            mc.std_error,
            ic.exclusive
        );
    }

    let (g, p) = star(&[(0, 0.9), (1, 0.1), (2, 0.1)], 3)?;
    let sigma = |s: &[u32]| -> Result<f64> {
        let seeds: Vec<NodeId> = s.iter().copied().map(NodeId).collect();
        Ok(exact_spread_fi(&g, &p, &seeds)?.exclusive)
    };
    println!("u1, u2, u3 -> u4 with p = 0.9, 0.1, 0.1");
    println!(
        "  gain of u3 on {{u1}}:     {:+.4}",
        sigma(&[0, 2])? - sigma(&[0])?
    );
    println!(
        "  gain of u3 on {{u1, u2}}: {:+.4}",
        sigma(&[0, 1, 2])? - sigma(&[0, 1])?
    );
    Ok(())
}
