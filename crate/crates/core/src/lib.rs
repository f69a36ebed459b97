//! Context-aware correction of ASR errors in task-oriented dialogue.
//!
//! A turn's n-best hypotheses are re-ranked against what the user is
//! likely to say in the current dialogue state; failing that, task phrases
//! that sound like part of the best hypothesis are spliced into it.
//!
//! ```
//! use context_asr::dialogue::{DialogueSnapshot, Intent, IntentLabel};
//! use context_asr::g2p::Lexicon;
//! use context_asr::pipeline::{Pipeline, PipelineConfig};
//! use context_asr::rerank::NBestList;
//! use context_asr::retrieval::{build_index, TaskCatalog, TaskEntry, TrigramEmbedder};
//!
//! let embedder = TrigramEmbedder::default();
//! let catalog = TaskCatalog::new(vec![TaskEntry::new("faucet", "how to fix a bathroom faucet")]);
//! let index = build_index(&catalog, &embedder).unwrap();
//! let pipeline = Pipeline::new(Lexicon::bundled(), index, Box::new(embedder), PipelineConfig::default()).unwrap();
//!
//! let nbest = NBestList::new(["how can i fix a leaky bathroom for sit"]).unwrap();
//! let outcome = pipeline
//!     .correct(&nbest, &DialogueSnapshot::searching(), &Intent::certain(IntentLabel::Search))
//!     .unwrap();
//! assert_eq!(outcome.corrected_text.as_deref(), Some("how can i fix a leaky bathroom faucet"));
//! ```

pub mod augment;
pub mod cli;
pub mod dialogue;
pub mod eval;
pub mod g2p;
pub mod phonetics;
pub mod pipeline;
pub mod rerank;
pub mod retrieval;
pub mod text;
