//! Enrich a catalog offline: map public titles onto private tasks, cluster
//! them, and attach generated paraphrases.

use context_asr::augment::{build_augmented_catalog, expand_partial_matches, AugmentConfig, Provenance, TemplateGenerator};
use context_asr::retrieval::{TaskCatalog, TaskEntry, TrigramEmbedder};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let private = TaskCatalog::new(vec![
        TaskEntry::new("mosquitoes", "kill mosquitoes"),
        TaskEntry::new("computer", "start a computer"),
        TaskEntry::new("bread", "bake bread"),
    ]);
    let public: Vec<String> = ["Kill mosquitoes!", "start the computer", "bake a loaf of bread", "learn to juggle"]
        .map(String::from)
        .to_vec();
    let config = AugmentConfig { n_clusters: 2, k_variations: 2, ..Default::default() };
    let out = build_augmented_catalog(&public, &private, &config, &TrigramEmbedder::default(), &TemplateGenerator)?;

    println!("{:?}", out.stats);
    for r in out.map.records() {
        println!("  {:<14} {:<32} -> {}", format!("{:?}", r.provenance), r.text, r.target);
    }
    println!("generated forms: {}", out.map.count(Provenance::Generated));

    let options: Vec<String> = ["how to care for indoor plants", "how to water indoor plants", "how to fertilize indoor plants"]
        .map(String::from)
        .to_vec();
    println!("\nshort partial matches for the plant options:");
    for p in expand_partial_matches(&options).into_iter().filter(|p| !p.partial.contains(' ')) {
        println!("  {:<10} -> {}", p.partial, p.option);
    }
    Ok(())
}
