//! Writing a synthetic community to disk and loading it back through the
//! ingest path, with private profiles and trending-tag spam filtered.

use std::collections::HashSet;

use fi_diffusion::ingest::LoadConfig;
use fi_diffusion::synth::{generate, SynthConfig};
use fi_diffusion::{Dataset, Result};

fn main() -> Result<()> {
    let cfg = SynthConfig {
        node_count: 300,
        target_density: 0.02,
        message_count: 1_000,
        ..SynthConfig::default()
    };
    let community = generate(&cfg)?;
    let dir = std::env::temp_dir().join(format!("fidiff-synth-{}", std::process::id()));
    community.write_to_dir(&dir)?;
    println!("wrote {}", dir.display());
    for entry in std::fs::read_dir(&dir)? {
        let entry = entry?;
        println!(
            "  {:<20} {:>9} bytes",
            entry.file_name().to_string_lossy(),
            entry.metadata()?.len()
        );
    }

    let (mut ds, report) = Dataset::load_dir(&dir, &LoadConfig::default())?;
    println!(
        "loaded {} nodes, {} edges, {} tweets; {report:?}",
        ds.graph.node_count(),
        ds.graph.edge_count(),
        ds.tweets.len()
    );
    let dropped = ds.filter_spam(&HashSet::from(["#trending".to_string()]))?;
    println!("{dropped} spam tweets dropped");
    std::fs::remove_dir_all(&dir)?;
    Ok(())
}
