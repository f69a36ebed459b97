//! Per-turn correction: trigger check, n-best re-ranking, phonetic context
//! ranking, and a single broad-context retry against the task index.

use std::collections::HashSet;
use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::dialogue::{
    derive_narrow_context, should_trigger, DialogueError, DialogueSnapshot, DialogueState, EntryKind, Intent,
    NarrowEntry,
};
use crate::g2p::{phonemize_phrase, Lexicon};
use crate::phonetics::{rank_context, ContextCandidate, PhoneticThresholds};
use crate::rerank::{rerank_nbest, Method, NBestList, RerankDecision, RerankError, RerankHit, RerankThresholds};
use crate::retrieval::{cosine, Embedder, SearchIndex, DEFAULT_TOP_K};
use crate::text;

/// Narrow contexts longer than this are filtered by embedding similarity
/// before phonetic ranking.
pub const NARROW_PREFILTER_LIMIT: usize = 50;

#[derive(Debug, thiserror::Error)]
pub enum PipelineError {
    #[error(transparent)]
    Dialogue(#[from] DialogueError),
    #[error(transparent)]
    Rerank(#[from] RerankError),
    #[error("invalid config: {0}")]
    Config(String),
    #[error("cannot write trace: {0}")]
    Trace(String),
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Endpoints {
    pub embedder: Option<String>,
    pub generator: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    pub rerank: RerankThresholds,
    pub phonetic: PhoneticThresholds,
    pub broad_search_k: usize,
    /// Compare phonemes without stress digits.
    pub strip_stress: bool,
    pub endpoints: Endpoints,
}

impl Default for PipelineConfig {
    fn default() -> Self {
        Self {
            rerank: RerankThresholds::default(),
            phonetic: PhoneticThresholds::default(),
            broad_search_k: DEFAULT_TOP_K,
            strip_stress: false,
            endpoints: Endpoints::default(),
        }
    }
}

impl PipelineConfig {
    pub fn validate(&self) -> Result<(), PipelineError> {
        self.rerank.validate()?;
        self.phonetic.validate().map_err(PipelineError::Config)?;
        if self.broad_search_k == 0 {
            return Err(PipelineError::Config("broad_search_k must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OutcomeKind {
    NoTrigger,
    NoCorrectionNeeded,
    Corrected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ContextSource {
    Narrow,
    Broad,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectionOutcome {
    pub kind: OutcomeKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub corrected_text: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub target: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub method: Option<Method>,
    /// Fuzzy percent, cosine, or phoneme coverage depending on `method`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub score: Option<f64>,
    /// Context entry that supported the decision.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub matched: Option<String>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub context: Option<ContextSource>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub prompt: Option<String>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub diagnostics: Vec<String>,
}

impl CorrectionOutcome {
    fn bare(kind: OutcomeKind, diagnostics: Vec<String>) -> Self {
        Self {
            kind,
            corrected_text: None,
            target: None,
            method: None,
            score: None,
            matched: None,
            context: None,
            prompt: None,
            diagnostics,
        }
    }

    /// Text the system would act on: the correction, or else the best
    /// hypothesis unchanged.
    pub fn output_text<'a>(&'a self, nbest: &'a NBestList) -> &'a str {
        self.corrected_text.as_deref().unwrap_or(nbest.best())
    }

    pub fn is_corrected(&self) -> bool {
        self.kind == OutcomeKind::Corrected
    }
}

pub fn confirmation_prompt(text: &str) -> String {
    format!("Did you mean {text}?")
}

struct Decision {
    corrected: bool,
    text: String,
    target: String,
    method: Method,
    score: f64,
    matched: String,
}

impl From<(bool, RerankHit)> for Decision {
    fn from((corrected, h): (bool, RerankHit)) -> Self {
        Decision { corrected, text: h.text, target: h.target, method: h.method, score: h.score, matched: h.matched }
    }
}

/// Corrects turns against one task index.
pub struct Pipeline {
    lexicon: Lexicon,
    index: SearchIndex,
    embedder: Box<dyn Embedder>,
    config: PipelineConfig,
}

impl Pipeline {
    pub fn new(
        lexicon: Lexicon,
        index: SearchIndex,
        embedder: Box<dyn Embedder>,
        config: PipelineConfig,
    ) -> Result<Self, PipelineError> {
        config.validate()?;
        Ok(Self { lexicon, index, embedder, config })
    }

    pub fn config(&self) -> &PipelineConfig {
        &self.config
    }

    pub fn index(&self) -> &SearchIndex {
        &self.index
    }

    pub fn embedder(&self) -> &dyn Embedder {
        self.embedder.as_ref()
    }

    pub fn lexicon(&self) -> &Lexicon {
        &self.lexicon
    }

    /// Correct one turn.
    pub fn correct(
        &self,
        nbest: &NBestList,
        snapshot: &DialogueSnapshot,
        intent: &Intent,
    ) -> Result<CorrectionOutcome, PipelineError> {
        snapshot.validate()?;
        let mut diag = Vec::new();
        if !should_trigger(snapshot, intent) {
            return Ok(CorrectionOutcome::bare(OutcomeKind::NoTrigger, diag));
        }

        let narrow = derive_narrow_context(snapshot);
        if let Some(d) = self.rank_against(nbest, &narrow, &mut diag) {
            return Ok(self.finish(nbest, snapshot, d, ContextSource::Narrow, diag));
        }

        let broad = self.broad_context(nbest, &mut diag);
        if !broad.is_empty() {
            if let Some(d) = self.rank_against(nbest, &broad, &mut diag) {
                return Ok(self.finish(nbest, snapshot, d, ContextSource::Broad, diag));
            }
        }
        Ok(CorrectionOutcome::bare(OutcomeKind::NoCorrectionNeeded, diag))
    }

    /// A catalog task whose title is on screen resolves to that option.
    fn resolve_target(&self, snapshot: &DialogueSnapshot, target: String) -> String {
        let Some(entry) = self.index.entry(&target) else { return target };
        snapshot
            .presented_options
            .iter()
            .find(|o| text::same_text(o, &entry.canonical_text))
            .cloned()
            .unwrap_or(target)
    }

    fn finish(
        &self,
        nbest: &NBestList,
        snapshot: &DialogueSnapshot,
        d: Decision,
        source: ContextSource,
        diag: Vec<String>,
    ) -> CorrectionOutcome {
        let corrected = d.corrected && !text::same_text(&d.text, nbest.best());
        let target = if d.method == Method::Semantic || source == ContextSource::Broad {
            self.resolve_target(snapshot, d.target)
        } else {
            d.target
        };
        let mut out = CorrectionOutcome {
            target: Some(target),
            method: Some(d.method),
            score: Some(d.score),
            matched: Some(d.matched),
            context: Some(source),
            ..CorrectionOutcome::bare(OutcomeKind::NoCorrectionNeeded, diag)
        };
        if corrected {
            out.kind = OutcomeKind::Corrected;
            out.prompt = Some(confirmation_prompt(&d.text));
            out.corrected_text = Some(d.text);
        }
        out
    }

    /// Re-rank, then phonetic ranking, against one context.
    fn rank_against(&self, nbest: &NBestList, context: &[NarrowEntry], diag: &mut Vec<String>) -> Option<Decision> {
        match rerank_nbest(nbest, context, &self.index, self.embedder.as_ref(), &self.config.rerank) {
            Ok(out) => match out.decision {
                RerankDecision::NoCorrectionNeeded(h) => return Some((false, h).into()),
                RerankDecision::Corrected(h) => return Some((true, h).into()),
                RerankDecision::None => {}
            },
            Err(e) => diag.push(format!("semantic re-ranking skipped: {e}")),
        }
        if context.is_empty() {
            return None;
        }
        self.phonetic(nbest.best(), context, diag)
    }

    fn phonetic(&self, best: &str, context: &[NarrowEntry], diag: &mut Vec<String>) -> Option<Decision> {
        let hyp = match phonemize_phrase(&self.lexicon, best) {
            Ok(p) => p,
            Err(e) => {
                diag.push(format!("phonetic ranking skipped: {e}"));
                return None;
            }
        };
        let hyp = if self.config.strip_stress { hyp.strip_stress() } else { hyp };

        let pool: Vec<&NarrowEntry> = if context.len() > NARROW_PREFILTER_LIMIT {
            self.prefilter(best, context, diag)
        } else {
            context.iter().collect()
        };

        let mut candidates = Vec::with_capacity(pool.len());
        for e in pool {
            match phonemize_phrase(&self.lexicon, &e.text) {
                Ok(p) => candidates.push(ContextCandidate {
                    text: e.text.clone(),
                    phrase: if self.config.strip_stress { p.strip_stress() } else { p },
                    target: e.target.clone(),
                }),
                Err(err) => diag.push(format!("context entry {:?} skipped: {err}", e.text)),
            }
        }
        let ranked = rank_context(&hyp, &candidates, &self.config.phonetic)?;
        let c = &candidates[ranked.index];
        Some(Decision {
            corrected: true,
            text: ranked.rewritten,
            target: c.target.clone(),
            method: Method::Phonetic,
            score: ranked.lcs.coverage,
            matched: c.text.clone(),
        })
    }

    fn prefilter<'a>(&self, best: &str, context: &'a [NarrowEntry], diag: &mut Vec<String>) -> Vec<&'a NarrowEntry> {
        let alpha = self.config.phonetic.alpha;
        let texts: Vec<String> = context.iter().map(|e| e.text.clone()).collect();
        let scored = self
            .embedder
            .embed(best)
            .and_then(|q| self.embedder.embed_batch(&texts).map(|vs| (q, vs)))
            .and_then(|(q, vs)| vs.iter().map(|v| cosine(&q, v)).collect::<Result<Vec<f64>, _>>());
        match scored {
            Ok(scores) => context.iter().zip(scores).filter(|(_, s)| *s >= alpha).map(|(e, _)| e).collect(),
            Err(e) => {
                diag.push(format!("narrow pre-filter skipped: {e}"));
                context.iter().collect()
            }
        }
    }

    /// Union of per-hypothesis index results at `alpha`, deduplicated by
    /// surface form, in hypothesis then score order.
    fn broad_context(&self, nbest: &NBestList, diag: &mut Vec<String>) -> Vec<NarrowEntry> {
        let mut seen = HashSet::new();
        let mut out = Vec::new();
        for hyp in nbest.hypotheses() {
            match self.index.search(self.embedder.as_ref(), hyp, self.config.phonetic.alpha, self.config.broad_search_k) {
                Ok(results) => {
                    for r in results {
                        if seen.insert(text::normalize(&r.surface_form)) {
                            out.push(NarrowEntry::new(r.surface_form, r.entry_id, EntryKind::Catalog));
                        }
                    }
                }
                Err(e) => diag.push(format!("broad search skipped for {hyp:?}: {e}")),
            }
        }
        out
    }
}

/// One line of a session trace.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub turn: usize,
    pub state: DialogueState,
    pub nbest: NBestList,
    pub intent: Intent,
    pub narrow: Vec<NarrowEntry>,
    pub outcome: CorrectionOutcome,
}

impl TraceRecord {
    pub fn new(turn: usize, nbest: &NBestList, snapshot: &DialogueSnapshot, intent: &Intent, outcome: &CorrectionOutcome) -> Self {
        Self {
            turn,
            state: snapshot.state,
            nbest: nbest.clone(),
            intent: *intent,
            narrow: derive_narrow_context(snapshot),
            outcome: outcome.clone(),
        }
    }
}

/// Append records as line-delimited JSON.
pub fn write_trace<W: Write>(mut w: W, records: &[TraceRecord]) -> Result<(), PipelineError> {
    for r in records {
        let line = serde_json::to_string(r).map_err(|e| PipelineError::Trace(e.to_string()))?;
        writeln!(w, "{line}").map_err(|e| PipelineError::Trace(e.to_string()))?;
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dialogue::IntentLabel;
    use crate::retrieval::{build_index, TaskCatalog, TaskEntry, TrigramEmbedder};

    fn pipeline(entries: Vec<TaskEntry>) -> Pipeline {
        let e = TrigramEmbedder::default();
        let index = build_index(&TaskCatalog::new(entries), &e).unwrap();
        Pipeline::new(Lexicon::bundled(), index, Box::new(e), PipelineConfig::default()).unwrap()
    }

    fn bundled() -> Pipeline {
        let e = TrigramEmbedder::default();
        let index = build_index(&TaskCatalog::bundled(), &e).unwrap();
        Pipeline::new(Lexicon::bundled(), index, Box::new(e), PipelineConfig::default()).unwrap()
    }

    fn search() -> Intent {
        Intent::certain(IntentLabel::Search)
    }

    #[test]
    fn faucet_phonetic_splice() {
        let p = pipeline(vec![TaskEntry::new("faucet", "how to fix a bathroom faucet")]);
        let nbest = NBestList::new(["how can i fix a leaky bathroom for sit"]).unwrap();
        let out = p.correct(&nbest, &DialogueSnapshot::searching(), &search()).unwrap();
        assert_eq!(out.kind, OutcomeKind::Corrected);
        assert_eq!(out.corrected_text.as_deref(), Some("how can i fix a leaky bathroom faucet"));
        assert_eq!(out.method, Some(Method::Phonetic));
        assert_eq!(out.context, Some(ContextSource::Broad));
        assert_eq!(out.target.as_deref(), Some("faucet"));
        assert_eq!(out.prompt.as_deref(), Some("Did you mean how can i fix a leaky bathroom faucet?"));
    }

    #[test]
    fn cartoon_guitar() {
        let out = bundled()
            .correct(&NBestList::new(["cartoon electric guitar"]).unwrap(), &DialogueSnapshot::searching(), &search())
            .unwrap();
        assert_eq!(out.corrected_text.as_deref(), Some("tune an electric guitar"));
        assert_eq!(out.method, Some(Method::Phonetic));
    }

    #[test]
    fn start_another_task_is_left_alone() {
        let out = bundled()
            .correct(
                &NBestList::new(["start another task", "start and other task"]).unwrap(),
                &DialogueSnapshot::executing("bake-bread"),
                &Intent::certain(IntentLabel::Command),
            )
            .unwrap();
        assert_eq!(out.kind, OutcomeKind::NoCorrectionNeeded);
        assert_eq!(out.method, Some(Method::Fuzzy));
        assert!(out.prompt.is_none());
    }

    #[test]
    fn no_trigger_states() {
        let p = bundled();
        let nbest = NBestList::new(["how can i fix a leaky bathroom for sit"]).unwrap();
        let out = p.correct(&nbest, &DialogueSnapshot::ended(), &search()).unwrap();
        assert_eq!(out.kind, OutcomeKind::NoTrigger);
        let out = p
            .correct(&nbest, &DialogueSnapshot::executing("t"), &Intent::certain(IntentLabel::Question))
            .unwrap();
        assert_eq!(out.kind, OutcomeKind::NoTrigger);
    }

    #[test]
    fn nothing_close_falls_through() {
        let p = pipeline(vec![TaskEntry::new("bread", "bake bread")]);
        let out = p
            .correct(&NBestList::new(["quantum chromodynamics"]).unwrap(), &DialogueSnapshot::searching(), &search())
            .unwrap();
        assert_eq!(out.kind, OutcomeKind::NoCorrectionNeeded);
        assert!(out.method.is_none());
    }

    #[test]
    fn selection_partial_resolves_to_option() {
        let snap = DialogueSnapshot::selecting([
            "how to care for indoor plants",
            "how to water indoor plants",
            "how to fertilize indoor plants",
        ]);
        let out = bundled()
            .correct(&NBestList::new(["waiter", "water"]).unwrap(), &snap, &Intent::certain(IntentLabel::Select))
            .unwrap();
        assert_eq!(out.kind, OutcomeKind::Corrected);
        assert_eq!(out.corrected_text.as_deref(), Some("water"));
        assert_eq!(out.target.as_deref(), Some("how to water indoor plants"));
    }

    #[test]
    fn trace_lines_are_json() {
        let p = bundled();
        let nbest = NBestList::new(["cartoon electric guitar"]).unwrap();
        let snap = DialogueSnapshot::searching();
        let out = p.correct(&nbest, &snap, &search()).unwrap();
        let mut buf = Vec::new();
        write_trace(&mut buf, &[TraceRecord::new(0, &nbest, &snap, &search(), &out)]).unwrap();
        let line = String::from_utf8(buf).unwrap();
        let back: TraceRecord = serde_json::from_str(line.trim()).unwrap();
        assert_eq!(back.outcome, out);
        assert_eq!(line.lines().count(), 1);
    }

    #[test]
    fn config_validation() {
        let mut c = PipelineConfig::default();
        c.broad_search_k = 0;
        assert!(c.validate().is_err());
        let mut c = PipelineConfig::default();
        c.rerank.fuzzy_min = 101;
        assert!(c.validate().is_err());
    }
}
