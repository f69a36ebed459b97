//! Indexed search over task surface forms.
//!
//! Candidates come from a token inverted index (every stored surface form
//! sharing at least one token with the query); they are then scored by
//! cosine similarity of embeddings and cut at a threshold.

mod catalog;
mod embed;
mod persist;

use std::collections::{BTreeMap, BTreeSet, HashSet};

use serde::{Deserialize, Serialize};

pub use catalog::{TaskCatalog, TaskEntry};
pub use embed::{Embedder, HttpEmbedder, TrigramEmbedder, DEFAULT_DIMENSION};
pub use persist::{INDEX_MAGIC, INDEX_VERSION};

use crate::text;

/// Default number of results per search.
pub const DEFAULT_TOP_K: usize = 10;

#[derive(Debug, thiserror::Error)]
pub enum RetrievalError {
    #[error("query is empty after normalization")]
    EmptyQuery,
    #[error("cannot embed empty text")]
    EmptyText,
    #[error("threshold {0} outside [0, 1]")]
    InvalidThreshold(f64),
    #[error("k must be at least 1")]
    InvalidK,
    #[error("duplicate task id {0:?}")]
    DuplicateId(String),
    #[error("catalog is empty")]
    EmptyCatalog,
    #[error("task {0:?} has an empty surface form")]
    EmptySurfaceForm(String),
    #[error("dimension mismatch: expected {0}, got {1}")]
    DimensionMismatch(usize, usize),
    #[error("similarity undefined for a zero vector")]
    ZeroVector,
    #[error("embedding service error: {0}")]
    Service(String),
    #[error("index built with embedder {stored:?}, queried with {given:?}")]
    EmbedderMismatch { stored: String, given: String },
    #[error("malformed data: {0}")]
    Format(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Cosine similarity. Values within 1e-6 of ±1 snap to ±1 so that equal
/// embeddings compare as exactly 1 despite f32 storage.
pub fn cosine(u: &[f32], v: &[f32]) -> Result<f64, RetrievalError> {
    if u.len() != v.len() {
        return Err(RetrievalError::DimensionMismatch(u.len(), v.len()));
    }
    let (mut dot, mut nu, mut nv) = (0f64, 0f64, 0f64);
    for (&a, &b) in u.iter().zip(v) {
        let (a, b) = (f64::from(a), f64::from(b));
        dot += a * b;
        nu += a * a;
        nv += b * b;
    }
    if nu == 0.0 || nv == 0.0 {
        return Err(RetrievalError::ZeroVector);
    }
    let s = (dot / (nu.sqrt() * nv.sqrt())).clamp(-1.0, 1.0);
    Ok(if 1.0 - s.abs() <= 1e-6 { s.signum() } else { s })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoredResult {
    pub entry_id: String,
    pub surface_form: String,
    pub score: f64,
}

#[derive(Debug, Clone, PartialEq)]
struct StoredForm {
    entry: usize,
    text: String,
}

/// Immutable search index over a [`TaskCatalog`].
#[derive(Debug, Clone, PartialEq)]
pub struct SearchIndex {
    embedder_id: String,
    dimension: usize,
    entries: Vec<TaskEntry>,
    forms: Vec<StoredForm>,
    /// Row-major, `forms.len() * dimension`, each row unit length.
    vectors: Vec<f32>,
    postings: BTreeMap<String, Vec<usize>>,
}

/// Build an index: one unit vector per surface form plus token postings.
pub fn build_index(catalog: &TaskCatalog, embedder: &dyn Embedder) -> Result<SearchIndex, RetrievalError> {
    catalog.validate()?;
    let dimension = embedder.dimension();
    let mut forms = Vec::new();
    let mut entries = Vec::with_capacity(catalog.len());
    for (entry, e) in catalog.entries.iter().enumerate() {
        let mut seen = HashSet::new();
        let mut kept = TaskEntry { surface_forms: Vec::new(), ..e.clone() };
        for f in &e.surface_forms {
            if seen.insert(text::normalize(f)) {
                forms.push(StoredForm { entry, text: f.clone() });
                kept.surface_forms.push(f.clone());
            }
        }
        entries.push(kept);
    }

    let texts: Vec<String> = forms.iter().map(|f| f.text.clone()).collect();
    let embedded = embedder.embed_batch(&texts)?;
    let mut vectors = Vec::with_capacity(forms.len() * dimension);
    for v in embedded {
        if v.len() != dimension {
            return Err(RetrievalError::DimensionMismatch(dimension, v.len()));
        }
        let wide: Vec<f64> = v.iter().map(|&x| f64::from(x)).collect();
        if wide.iter().all(|&x| x == 0.0) {
            return Err(RetrievalError::ZeroVector);
        }
        vectors.extend(embed::unit(&wide));
    }

    let mut postings: BTreeMap<String, Vec<usize>> = BTreeMap::new();
    for (idx, f) in forms.iter().enumerate() {
        let tokens: BTreeSet<String> = text::tokenize(&f.text).into_iter().collect();
        for t in tokens {
            postings.entry(t).or_default().push(idx);
        }
    }

    Ok(SearchIndex {
        embedder_id: embedder.id(),
        dimension,
        entries,
        forms,
        vectors,
        postings,
    })
}

impl SearchIndex {
    pub fn dimension(&self) -> usize {
        self.dimension
    }

    pub fn embedder_id(&self) -> &str {
        &self.embedder_id
    }

    pub fn entries(&self) -> &[TaskEntry] {
        &self.entries
    }

    pub fn entry(&self, id: &str) -> Option<&TaskEntry> {
        self.entries.iter().find(|e| e.id == id)
    }

    pub fn surface_form_count(&self) -> usize {
        self.forms.len()
    }

    pub fn posting_count(&self) -> usize {
        self.postings.len()
    }

    /// Stored surface forms containing `token`.
    pub fn postings(&self, token: &str) -> Vec<&str> {
        self.postings
            .get(token)
            .map(|ids| ids.iter().map(|&i| self.forms[i].text.as_str()).collect())
            .unwrap_or_default()
    }

    fn vector(&self, form: usize) -> &[f32] {
        &self.vectors[form * self.dimension..(form + 1) * self.dimension]
    }

    /// Top-`k` surface forms scoring at least `threshold`.
    ///
    /// Results are sorted by descending score, ties by entry id and then
    /// surface form, with one result per distinct surface form.
    pub fn search(
        &self,
        embedder: &dyn Embedder,
        query: &str,
        threshold: f64,
        k: usize,
    ) -> Result<Vec<ScoredResult>, RetrievalError> {
        if !(0.0..=1.0).contains(&threshold) {
            return Err(RetrievalError::InvalidThreshold(threshold));
        }
        if k == 0 {
            return Err(RetrievalError::InvalidK);
        }
        let tokens = text::tokenize(query);
        if tokens.is_empty() {
            return Err(RetrievalError::EmptyQuery);
        }
        if embedder.id() != self.embedder_id {
            return Err(RetrievalError::EmbedderMismatch {
                stored: self.embedder_id.clone(),
                given: embedder.id(),
            });
        }

        let mut candidates: BTreeSet<usize> = BTreeSet::new();
        for t in &tokens {
            if let Some(ids) = self.postings.get(t) {
                candidates.extend(ids);
            }
        }
        if candidates.is_empty() {
            candidates.extend(0..self.forms.len());
        }

        let q = embedder.embed(query)?;
        let mut scored = Vec::with_capacity(candidates.len());
        for idx in candidates {
            let score = cosine(&q, self.vector(idx))?;
            if score >= threshold {
                scored.push((score, idx));
            }
        }
        scored.sort_by(|a, b| {
            b.0.total_cmp(&a.0)
                .then_with(|| self.entries[self.forms[a.1].entry].id.cmp(&self.entries[self.forms[b.1].entry].id))
                .then_with(|| self.forms[a.1].text.cmp(&self.forms[b.1].text))
        });

        let mut seen = HashSet::new();
        Ok(scored
            .into_iter()
            .filter(|&(_, idx)| seen.insert(text::normalize(&self.forms[idx].text)))
            .take(k)
            .map(|(score, idx)| {
                let f = &self.forms[idx];
                ScoredResult {
                    entry_id: self.entries[f.entry].id.clone(),
                    surface_form: f.text.clone(),
                    score,
                }
            })
            .collect())
    }

    /// Largest search score for `query`, 0 when nothing passes.
    pub fn best_score(
        &self,
        embedder: &dyn Embedder,
        query: &str,
        threshold: f64,
    ) -> Result<Option<ScoredResult>, RetrievalError> {
        Ok(self.search(embedder, query, threshold, 1)?.into_iter().next())
    }
}
