//! N-best re-ranking against context.
//!
//! Phase A scores hypotheses best to worst by fuzzy string similarity to
//! the narrow context and stops at the first hit. Phase B, reached only
//! without a fuzzy hit, scores every hypothesis by its best indexed-search
//! cosine over the full catalog.

use serde::{Deserialize, Serialize};

use crate::dialogue::NarrowEntry;
use crate::retrieval::{Embedder, RetrievalError, SearchIndex};
use crate::text;

/// Longest n-best list accepted.
pub const MAX_HYPOTHESES: usize = 5;

#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum RerankError {
    #[error("n-best list must hold 1 to {MAX_HYPOTHESES} hypotheses, got {0}")]
    NBestSize(usize),
    #[error("hypothesis {0} is empty")]
    EmptyHypothesis(usize),
    #[error("{0} confidences for {1} hypotheses")]
    ConfidenceCount(usize, usize),
    #[error("cannot compare empty text")]
    EmptyInput,
    #[error("fuzzy_min {0} outside [0, 100]")]
    FuzzyMin(u8),
    #[error("cosine_min {0} outside [0, 1]")]
    CosineMin(f64),
}

/// ASR hypotheses, best first.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawNBest")]
pub struct NBestList {
    hypotheses: Vec<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    confidences: Option<Vec<f64>>,
}

#[derive(Deserialize)]
struct RawNBest {
    hypotheses: Vec<String>,
    #[serde(default)]
    confidences: Option<Vec<f64>>,
}

impl TryFrom<RawNBest> for NBestList {
    type Error = RerankError;

    fn try_from(raw: RawNBest) -> Result<Self, RerankError> {
        let list = NBestList::new(raw.hypotheses)?;
        match raw.confidences {
            Some(c) => list.with_confidences(c),
            None => Ok(list),
        }
    }
}

impl NBestList {
    pub fn new<I, S>(hypotheses: I) -> Result<Self, RerankError>
    where
        I: IntoIterator<Item = S>,
        S: Into<String>,
    {
        let hypotheses: Vec<String> = hypotheses.into_iter().map(Into::into).collect();
        if hypotheses.is_empty() || hypotheses.len() > MAX_HYPOTHESES {
            return Err(RerankError::NBestSize(hypotheses.len()));
        }
        if let Some(i) = hypotheses.iter().position(|h| h.trim().is_empty()) {
            return Err(RerankError::EmptyHypothesis(i));
        }
        Ok(Self { hypotheses, confidences: None })
    }

    pub fn with_confidences(mut self, confidences: Vec<f64>) -> Result<Self, RerankError> {
        if confidences.len() != self.hypotheses.len() {
            return Err(RerankError::ConfidenceCount(confidences.len(), self.hypotheses.len()));
        }
        self.confidences = Some(confidences);
        Ok(self)
    }

    pub fn best(&self) -> &str {
        &self.hypotheses[0]
    }

    pub fn hypotheses(&self) -> &[String] {
        &self.hypotheses
    }

    pub fn confidences(&self) -> Option<&[f64]> {
        self.confidences.as_deref()
    }

    pub fn len(&self) -> usize {
        self.hypotheses.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RerankThresholds {
    /// Integer percent.
    pub fuzzy_min: u8,
    pub cosine_min: f64,
}

impl Default for RerankThresholds {
    fn default() -> Self {
        Self { fuzzy_min: 96, cosine_min: 0.8 }
    }
}

impl RerankThresholds {
    pub fn validate(&self) -> Result<(), RerankError> {
        if self.fuzzy_min > 100 {
            return Err(RerankError::FuzzyMin(self.fuzzy_min));
        }
        if !(0.0..=1.0).contains(&self.cosine_min) {
            return Err(RerankError::CosineMin(self.cosine_min));
        }
        Ok(())
    }
}

fn levenshtein<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    let mut prev: Vec<usize> = (0..=b.len()).collect();
    let mut cur = vec![0; b.len() + 1];
    for (i, x) in a.iter().enumerate() {
        cur[0] = i + 1;
        for (j, y) in b.iter().enumerate() {
            let sub = prev[j] + usize::from(x != y);
            cur[j + 1] = sub.min(prev[j + 1] + 1).min(cur[j] + 1);
        }
        std::mem::swap(&mut prev, &mut cur);
    }
    prev[b.len()]
}

/// Edit distance between two token (or symbol) sequences.
pub fn edit_distance<T: PartialEq>(a: &[T], b: &[T]) -> usize {
    levenshtein(a, b)
}

/// Character-level similarity in percent of the normalized texts:
/// `round(100 * (1 - lev / max_len))`.
pub fn fuzzy_ratio(a: &str, b: &str) -> Result<u8, RerankError> {
    let a: Vec<char> = text::normalize(a).chars().collect();
    let b: Vec<char> = text::normalize(b).chars().collect();
    if a.is_empty() || b.is_empty() {
        return Err(RerankError::EmptyInput);
    }
    let d = levenshtein(&a, &b) as f64;
    let max = a.len().max(b.len()) as f64;
    Ok((100.0 * (1.0 - d / max)).round() as u8)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Method {
    Fuzzy,
    Semantic,
    Phonetic,
}

/// The hypothesis a phase settled on and the context that supports it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RerankHit {
    /// Position in the n-best list.
    pub rank: usize,
    pub text: String,
    pub method: Method,
    pub score: f64,
    /// Context entry or catalog surface form that matched.
    pub matched: String,
    /// Full option, command, suggestion, or task id the match resolves to.
    pub target: String,
}

#[derive(Debug, Clone, PartialEq)]
pub enum RerankDecision {
    /// The best hypothesis itself is supported.
    NoCorrectionNeeded(RerankHit),
    /// A lower-ranked hypothesis is supported.
    Corrected(RerankHit),
    /// Nothing reached either threshold.
    None,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RerankOutcome {
    pub decision: RerankDecision,
    /// Hypotheses fuzzy-scored in Phase A before it stopped.
    pub examined: usize,
}

fn best_fuzzy<'a>(hyp: &str, narrow: &'a [NarrowEntry]) -> Option<(u8, &'a NarrowEntry)> {
    let mut best: Option<(u8, &NarrowEntry)> = None;
    for e in narrow {
        let Ok(score) = fuzzy_ratio(hyp, &e.text) else { continue };
        if best.is_none_or(|(s, _)| score > s) {
            best = Some((score, e));
        }
    }
    best
}

/// Re-rank `nbest` against `narrow` and the full `index`.
pub fn rerank_nbest(
    nbest: &NBestList,
    narrow: &[NarrowEntry],
    index: &SearchIndex,
    embedder: &dyn Embedder,
    thresholds: &RerankThresholds,
) -> Result<RerankOutcome, RetrievalError> {
    let best_text = nbest.best();
    let decide = |hit: RerankHit| {
        if hit.rank == 0 || text::same_text(&hit.text, best_text) {
            RerankDecision::NoCorrectionNeeded(hit)
        } else {
            RerankDecision::Corrected(hit)
        }
    };

    let mut examined = 0;
    for (rank, hyp) in nbest.hypotheses().iter().enumerate() {
        examined += 1;
        if let Some((score, entry)) = best_fuzzy(hyp, narrow) {
            if score >= thresholds.fuzzy_min {
                let hit = RerankHit {
                    rank,
                    text: hyp.clone(),
                    method: Method::Fuzzy,
                    score: f64::from(score),
                    matched: entry.text.clone(),
                    target: entry.target.clone(),
                };
                return Ok(RerankOutcome { decision: decide(hit), examined });
            }
        }
    }

    let mut winner: Option<RerankHit> = None;
    for (rank, hyp) in nbest.hypotheses().iter().enumerate() {
        let found = match index.best_score(embedder, hyp, thresholds.cosine_min) {
            Ok(r) => r,
            Err(RetrievalError::EmptyQuery) => None,
            Err(e) => return Err(e),
        };
        if let Some(r) = found {
            if winner.as_ref().is_none_or(|w| r.score > w.score) {
                winner = Some(RerankHit {
                    rank,
                    text: hyp.clone(),
                    method: Method::Semantic,
                    score: r.score,
                    matched: r.surface_form,
                    target: r.entry_id,
                });
            }
        }
    }
    Ok(RerankOutcome { decision: winner.map_or(RerankDecision::None, decide), examined })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::retrieval::{build_index, TaskCatalog, TaskEntry, TrigramEmbedder};

    fn entries(xs: &[&str]) -> Vec<NarrowEntry> {
        xs.iter().map(|s| NarrowEntry::option(*s)).collect()
    }

    fn index() -> (SearchIndex, TrigramEmbedder) {
        let e = TrigramEmbedder::default();
        let catalog = TaskCatalog::new(vec![
            TaskEntry::new("take-care-plant", "take care plant")
                .with_forms(["how to care for plants", "take care of a plant"]),
            TaskEntry::new("guitar", "tune an electric guitar"),
        ]);
        (build_index(&catalog, &e).unwrap(), e)
    }

    #[test]
    fn fuzzy_examples() {
        assert_eq!(fuzzy_ratio("wood fence", "wood fence").unwrap(), 100);
        assert_eq!(fuzzy_ratio("fence", "hence").unwrap(), 80);
        assert_eq!(fuzzy_ratio("wood fence", "wood fences").unwrap(), 91);
        assert_eq!(fuzzy_ratio("Wood  Fence!", "wood fence").unwrap(), 100);
        assert_eq!(fuzzy_ratio("", "x"), Err(RerankError::EmptyInput));
        assert_eq!(fuzzy_ratio("?!", "x"), Err(RerankError::EmptyInput));
    }

    #[test]
    fn nbest_validation() {
        assert!(NBestList::new(Vec::<String>::new()).is_err());
        assert!(NBestList::new(vec!["a"; 6]).is_err());
        assert_eq!(NBestList::new(["a", " "]), Err(RerankError::EmptyHypothesis(1)));
        let n = NBestList::new(["a", "b"]).unwrap();
        assert!(n.clone().with_confidences(vec![0.5]).is_err());
        let json = serde_json::to_string(&n).unwrap();
        assert_eq!(json, r#"{"hypotheses":["a","b"]}"#);
        assert_eq!(serde_json::from_str::<NBestList>(&json).unwrap(), n);
        assert!(serde_json::from_str::<NBestList>(r#"{"hypotheses":[]}"#).is_err());
    }

    #[test]
    fn exact_best_needs_no_correction() {
        let (idx, e) = index();
        let nbest = NBestList::new(["how to water indoor plants", "how to water in door plants"]).unwrap();
        let narrow = entries(&["how to water indoor plants", "how to care for indoor plants"]);
        let out = rerank_nbest(&nbest, &narrow, &idx, &e, &RerankThresholds::default()).unwrap();
        assert!(matches!(out.decision, RerankDecision::NoCorrectionNeeded(ref h) if h.method == Method::Fuzzy));
        assert_eq!(out.examined, 1);
    }

    #[test]
    fn fuzzy_hit_on_lower_rank_corrects() {
        let (idx, e) = index();
        let nbest = NBestList::new(["how to water in door plans", "how to water indoor plants"]).unwrap();
        let narrow = entries(&["how to water indoor plants", "how to care for indoor plants"]);
        let out = rerank_nbest(&nbest, &narrow, &idx, &e, &RerankThresholds::default()).unwrap();
        let RerankDecision::Corrected(hit) = out.decision else { panic!() };
        assert_eq!((hit.rank, hit.method, hit.score), (1, Method::Fuzzy, 100.0));
        assert_eq!(out.examined, 2);
    }

    #[test]
    fn camper_selects_second_hypothesis() {
        let (idx, e) = index();
        let nbest = NBestList::new(["how to camper for outdoor plants", "how to care for outdoor plants"]).unwrap();
        let out = rerank_nbest(&nbest, &[], &idx, &e, &RerankThresholds::default()).unwrap();
        let RerankDecision::Corrected(hit) = out.decision else { panic!("{:?}", out.decision) };
        assert_eq!(hit.text, "how to care for outdoor plants");
        assert_eq!(hit.method, Method::Semantic);
        assert_eq!(hit.target, "take-care-plant");
        assert!(hit.score >= 0.8);
    }

    #[test]
    fn nothing_above_thresholds_is_none() {
        let (idx, e) = index();
        let nbest = NBestList::new(["cartoon electric guitar"]).unwrap();
        let out = rerank_nbest(&nbest, &[], &idx, &e, &RerankThresholds::default()).unwrap();
        assert_eq!(out.decision, RerankDecision::None);
    }

    #[test]
    fn semantic_tie_goes_to_earlier_rank() {
        let (idx, e) = index();
        let nbest = NBestList::new(["bake bread", "how to care for plants", "how to care for plants!"]).unwrap();
        let out = rerank_nbest(&nbest, &[], &idx, &e, &RerankThresholds::default()).unwrap();
        let RerankDecision::Corrected(hit) = out.decision else { panic!() };
        assert_eq!(hit.rank, 1);
    }

    #[test]
    fn edit_distance_on_words() {
        let a = ["how", "to", "make", "a", "snowflake", "of", "paper"];
        let b = ["how", "to", "make", "a", "snowflake", "out", "of", "paper"];
        assert_eq!(edit_distance(&a, &b), 1);
        assert_eq!(edit_distance::<&str>(&[], &b), 8);
    }
}
