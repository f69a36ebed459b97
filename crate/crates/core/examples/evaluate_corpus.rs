//! Generate a seeded synthetic corpus over the bundled catalog and score
//! the engine on it.
//!
//!     cargo run --example evaluate_corpus -- [turns] [seed]

use context_asr::eval::{evaluate, generate_corpus, CorpusConfig, EvalConfig, Judgment};
use context_asr::g2p::Lexicon;
use context_asr::pipeline::{Pipeline, PipelineConfig};
use context_asr::retrieval::{build_index, TaskCatalog, TrigramEmbedder};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let mut args = std::env::args().skip(1);
    let turns = args.next().map(|s| s.parse()).transpose()?.unwrap_or(200);
    let seed = args.next().map(|s| s.parse()).transpose()?.unwrap_or(7);

    let catalog = TaskCatalog::bundled();
    let lexicon = Lexicon::bundled();
    let corpus = generate_corpus(&catalog, &lexicon, &CorpusConfig { turns, seed, ..Default::default() })?;

    let embedder = TrigramEmbedder::default();
    let index = build_index(&catalog, &embedder)?;
    let pipeline = Pipeline::new(lexicon, index, Box::new(embedder), PipelineConfig::default())?;
    let eval = evaluate(&corpus, &pipeline, &EvalConfig::default())?;

    print!("{}", eval.report.table());
    for kind in [Judgment::FP, Judgment::FN] {
        println!("\nfirst {kind:?} turns:");
        for (turn, r) in corpus.iter().zip(&eval.turns).filter(|(_, r)| r.judgment == kind).take(5) {
            println!(
                "  {:<8} heard {:?}, output {:?}, said {:?}",
                format!("{:?}", turn.intent_label),
                turn.nbest.best(),
                r.outcome.output_text(&turn.nbest),
                turn.gold_transcript
            );
        }
    }
    Ok(())
}
