//! Re-rank an n-best list: fuzzy match against the narrow context, then
//! semantic match against the full index.

use context_asr::dialogue::{derive_narrow_context, DialogueSnapshot};
use context_asr::rerank::{rerank_nbest, NBestList, RerankThresholds};
use context_asr::retrieval::{build_index, TaskCatalog, TrigramEmbedder};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let embedder = TrigramEmbedder::default();
    let index = build_index(&TaskCatalog::bundled(), &embedder)?;
    let thresholds = RerankThresholds::default();
    let turns = [
        (DialogueSnapshot::searching(), vec!["how to camper for outdoor plants", "how to care for outdoor plants"]),
        (DialogueSnapshot::executing("bake-bread"), vec!["start and other task", "start another task"]),
        (DialogueSnapshot::executing("bake-bread"), vec!["start another task", "start and other task"]),
        (DialogueSnapshot::searching(), vec!["quantum chromodynamics"]),
    ];
    for (snapshot, hyps) in turns {
        let nbest = NBestList::new(hyps)?;
        let narrow = derive_narrow_context(&snapshot);
        let out = rerank_nbest(&nbest, &narrow, &index, &embedder, &thresholds)?;
        println!("{:?}\n  examined {} in the fuzzy pass\n  {:?}\n", nbest.hypotheses(), out.examined, out.decision);
    }
    Ok(())
}
