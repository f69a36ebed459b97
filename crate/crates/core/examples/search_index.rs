//! Build the bundled task index, round-trip it through bytes, and query it.
//!
//!     cargo run --example search_index -- "repair my faucet"

use context_asr::retrieval::{build_index, SearchIndex, TaskCatalog, TrigramEmbedder};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let query = std::env::args().nth(1).unwrap_or_else(|| "how do i repair a leaking faucet".into());
    let embedder = TrigramEmbedder::default();
    let index = build_index(&TaskCatalog::bundled(), &embedder)?;
    let bytes = index.to_bytes();
    let index = SearchIndex::read_from(bytes.as_slice())?;
    println!(
        "{} tasks, {} surface forms, {} tokens indexed, {} bytes on disk",
        index.entries().len(),
        index.surface_form_count(),
        index.posting_count(),
        bytes.len()
    );
    println!("query {query:?}");
    for r in index.search(&embedder, &query, 0.3, 5)? {
        println!("  {:.3}  {:<24} {}", r.score, r.entry_id, r.surface_form);
    }
    Ok(())
}
