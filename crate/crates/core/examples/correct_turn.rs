//! Run the full correction pipeline on a few turns and print each outcome
//! as JSON.

use context_asr::dialogue::{DialogueSnapshot, Intent, IntentLabel};
use context_asr::g2p::Lexicon;
use context_asr::pipeline::{Pipeline, PipelineConfig};
use context_asr::rerank::NBestList;
use context_asr::retrieval::{build_index, TaskCatalog, TrigramEmbedder};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let embedder = TrigramEmbedder::default();
    let index = build_index(&TaskCatalog::bundled(), &embedder)?;
    let pipeline = Pipeline::new(Lexicon::bundled(), index, Box::new(embedder), PipelineConfig::default())?;

    let plants = DialogueSnapshot::selecting([
        "how to care for indoor plants",
        "how to water indoor plants",
        "how to fertilize indoor plants",
    ]);
    let turns = [
        (vec!["how can i fix a leaky bathroom for sit"], DialogueSnapshot::searching(), IntentLabel::Search),
        (vec!["cartoon electric guitar"], DialogueSnapshot::searching(), IntentLabel::Search),
        (vec!["waiter", "water"], plants.clone(), IntentLabel::Select),
        (vec!["option to", "option two"], plants, IntentLabel::Select),
        (vec!["go bag"], DialogueSnapshot::executing("bake-bread"), IntentLabel::Command),
        (vec!["how to bake bred"], DialogueSnapshot::ended(), IntentLabel::Search),
    ];
    for (hyps, snapshot, label) in turns {
        let nbest = NBestList::new(hyps)?;
        let out = pipeline.correct(&nbest, &snapshot, &Intent::certain(label))?;
        println!("[{}] {:?}", snapshot.state, nbest.best());
        println!("{}\n", serde_json::to_string(&out)?);
    }
    Ok(())
}
