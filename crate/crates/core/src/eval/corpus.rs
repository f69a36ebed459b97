use std::fs::File;
use std::io::{BufRead, BufReader, Write};
use std::path::Path;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::noise::{inject_errors, NoiseConfig};
use super::EvalError;
use crate::augment::{expand_partial_matches, TemplateGenerator, VariationGenerator};
use crate::dialogue::{DialogueSnapshot, IntentLabel};
use crate::g2p::{number_words, Lexicon};
use crate::rerank::NBestList;
use crate::retrieval::TaskCatalog;
use crate::text;

/// One annotated user turn.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnnotatedTurn {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub id: Option<String>,
    pub nbest: NBestList,
    pub gold_transcript: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gold_target: Option<String>,
    pub intent_label: IntentLabel,
    pub snapshot: DialogueSnapshot,
    pub has_error: bool,
}

impl AnnotatedTurn {
    pub fn validate(&self) -> Result<(), String> {
        if text::normalize(&self.gold_transcript).is_empty() {
            return Err("empty gold transcript".into());
        }
        let differs = !text::same_text(self.nbest.best(), &self.gold_transcript);
        if differs != self.has_error {
            return Err(format!("has_error is {} but best hypothesis {} gold", self.has_error, if differs { "differs from" } else { "equals" }));
        }
        self.snapshot.validate().map_err(|e| e.to_string())
    }
}

/// Read a line-delimited JSON corpus; blank lines are skipped.
pub fn read_corpus<R: BufRead>(reader: R) -> Result<Vec<AnnotatedTurn>, EvalError> {
    let mut out = Vec::new();
    for (i, line) in reader.lines().enumerate() {
        let line = line?;
        if line.trim().is_empty() {
            continue;
        }
        let turn: AnnotatedTurn =
            serde_json::from_str(&line).map_err(|e| EvalError::Format { line: i + 1, message: e.to_string() })?;
        turn.validate().map_err(|message| EvalError::Format { line: i + 1, message })?;
        out.push(turn);
    }
    Ok(out)
}

pub fn load_corpus(path: impl AsRef<Path>) -> Result<Vec<AnnotatedTurn>, EvalError> {
    read_corpus(BufReader::new(File::open(path)?))
}

pub fn write_corpus<W: Write>(mut w: W, turns: &[AnnotatedTurn]) -> Result<(), EvalError> {
    for t in turns {
        let line = serde_json::to_string(t).map_err(|e| EvalError::Format { line: 0, message: e.to_string() })?;
        writeln!(w, "{line}")?;
    }
    Ok(())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorpusConfig {
    pub turns: usize,
    pub seed: u64,
    /// Share of turns whose best hypothesis is corrupted.
    pub error_rate: f64,
    /// Share of turns that select among presented options.
    pub select_share: f64,
    /// Options presented on a selection turn.
    pub options: usize,
    pub noise: NoiseConfig,
}

impl Default for CorpusConfig {
    fn default() -> Self {
        Self {
            turns: 200,
            seed: 7,
            error_rate: 0.6,
            select_share: 0.4,
            options: 3,
            noise: NoiseConfig { corruption_prob: 0.25, ..Default::default() },
        }
    }
}

/// How a user picks `chosen` from `options`: the full title, a phrase
/// only that option contains, or its ordinal, in a 2:2:1 mix.
fn selection_utterance(options: &[String], chosen: &str, rng: &mut ChaCha8Rng) -> String {
    let pos = options.iter().position(|o| o == chosen).expect("chosen option is presented");
    let partials: Vec<String> = expand_partial_matches(options)
        .into_iter()
        .filter(|p| p.option == chosen && p.partial.split(' ').count() <= 3)
        .map(|p| p.partial)
        .collect();
    match rng.gen_range(0..5) {
        0 | 1 => text::normalize(chosen),
        2 | 3 if !partials.is_empty() => partials.choose(rng).expect("non-empty").clone(),
        _ => format!("option {}", number_words(&(pos + 1).to_string()).join(" ")),
    }
}

/// A search query for `form`: the form itself half the time, otherwise a
/// paraphrase that no catalog task lists verbatim.
fn search_utterance(catalog: &TaskCatalog, form: &str, rng: &mut ChaCha8Rng) -> String {
    if rng.gen_bool(0.5) {
        return text::normalize(form);
    }
    let listed = |t: &str| catalog.entries.iter().any(|e| e.surface_forms.iter().any(|f| text::same_text(f, t)));
    let fresh: Vec<String> = TemplateGenerator
        .generate(form, PARAPHRASES)
        .unwrap_or_default()
        .into_iter()
        .filter(|v| !listed(v))
        .collect();
    fresh.choose(rng).map_or_else(|| text::normalize(form), |v| text::normalize(v))
}

const PARAPHRASES: usize = 4;

/// Synthetic search and selection turns over `catalog`.
///
/// Selection turns pick among `options` presented titles using
/// [`selection_utterance`]; search turns use [`search_utterance`].
///
/// Error turns alternate between having the gold transcript among the
/// alternates and not, so exactly half of them (rounded up) contain it.
/// Clean turns keep the gold transcript as the best hypothesis.
pub fn generate_corpus(catalog: &TaskCatalog, lexicon: &Lexicon, config: &CorpusConfig) -> Result<Vec<AnnotatedTurn>, EvalError> {
    catalog.validate().map_err(|e| EvalError::Noise(e.to_string()))?;
    config.noise.validate()?;
    if config.options == 0 || config.options > catalog.len() {
        return Err(EvalError::Noise(format!("cannot present {} options from {} tasks", config.options, catalog.len())));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let mut error_turns = 0usize;
    let mut out = Vec::with_capacity(config.turns);
    for i in 0..config.turns {
        let select = rng.gen_bool(config.select_share);
        let has_error = rng.gen_bool(config.error_rate);
        let turn_seed: u64 = rng.gen();
        let entry = catalog.entries.choose(&mut rng).expect("validated catalog is non-empty");

        let (gold, gold_target, intent, snapshot) = if select {
            let mut options = vec![entry.canonical_text.clone()];
            while options.len() < config.options {
                let other = &catalog.entries.choose(&mut rng).expect("non-empty").canonical_text;
                if !options.iter().any(|o| text::same_text(o, other)) {
                    options.push(other.clone());
                }
            }
            options.shuffle(&mut rng);
            let gold = selection_utterance(&options, &entry.canonical_text, &mut rng);
            (gold, entry.canonical_text.clone(), IntentLabel::Select, DialogueSnapshot::selecting(options))
        } else {
            let form = entry.surface_forms.choose(&mut rng).expect("entries have a surface form");
            let query = search_utterance(catalog, form, &mut rng);
            (query, entry.id.clone(), IntentLabel::Search, DialogueSnapshot::searching())
        };

        let noise = if has_error {
            error_turns += 1;
            NoiseConfig { gold_in_nbest: error_turns % 2 == 1, min_corruptions: config.noise.min_corruptions.max(1), ..config.noise.clone() }
        } else {
            NoiseConfig { corruption_prob: 0.0, min_corruptions: 0, gold_in_nbest: true, ..config.noise.clone() }
        };
        let injected = inject_errors(&gold, lexicon, &noise, turn_seed)?;
        let turn = AnnotatedTurn {
            id: Some(format!("syn-{i:04}")),
            has_error: !text::same_text(injected.nbest.best(), &gold),
            nbest: injected.nbest,
            gold_transcript: gold,
            gold_target: Some(gold_target),
            intent_label: intent,
            snapshot,
        };
        out.push(turn);
    }
    Ok(out)
}
