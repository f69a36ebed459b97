//! Offline context augmentation.
//!
//! Public task titles are mapped onto the private catalog by embedding
//! similarity, the mapped titles are clustered, and paraphrases generated
//! for each cluster representative inherit the representative's task. The
//! result is an enriched catalog ready for [`crate::retrieval::build_index`].
//! Nothing here runs during correction.

mod generator;
mod kmeans;
mod partial;

use std::collections::HashMap;
use std::fs;
use std::path::Path;

use serde::{Deserialize, Serialize};

pub use generator::{generate_variations, HttpGenerator, TableGenerator, TemplateGenerator, VariationGenerator};
pub use kmeans::{cluster_centroids, kmeans, Clustering, MAX_ITERATIONS};
pub use partial::{
    expand_partial_matches, inject_result, inject_result_at, PartialMatch, INJECT_POSITION, MAX_RESULTS,
    STOP_TOKENS,
};

use crate::retrieval::{cosine, Embedder, RetrievalError, TaskCatalog};
use crate::text;

#[derive(Debug, thiserror::Error)]
pub enum AugmentError {
    #[error("requested {requested} clusters from {available} items")]
    TooManyClusters { requested: usize, available: usize },
    #[error("invalid augmentation config: {0}")]
    Config(String),
    #[error("variation generator failed: {0}")]
    Generator(String),
    #[error("variation generator failed after {completed} of {total} centroids: {reason}")]
    Interrupted { completed: usize, total: usize, reason: String, checkpoint: Box<AugmentCheckpoint> },
    #[error("malformed data: {0}")]
    Format(String),
    #[error(transparent)]
    Retrieval(#[from] RetrievalError),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Provenance {
    Original,
    PublicMapped,
    Generated,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VariationRecord {
    pub text: String,
    pub target: String,
    pub provenance: Provenance,
}

/// Surface text → canonical task id, unique on normalized text.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct VariationMap {
    records: Vec<VariationRecord>,
    #[serde(skip)]
    keys: HashMap<String, usize>,
}

impl VariationMap {
    /// Insert unless the normalized text is already mapped.
    pub fn insert(&mut self, text: &str, target: &str, provenance: Provenance) -> bool {
        let key = text::normalize(text);
        if key.is_empty() || self.keys.contains_key(&key) {
            return false;
        }
        self.keys.insert(key, self.records.len());
        self.records.push(VariationRecord { text: text.to_owned(), target: target.to_owned(), provenance });
        true
    }

    pub fn get(&self, text: &str) -> Option<&VariationRecord> {
        self.keys.get(&text::normalize(text)).map(|&i| &self.records[i])
    }

    pub fn records(&self) -> &[VariationRecord] {
        &self.records
    }

    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn count(&self, provenance: Provenance) -> usize {
        self.records.iter().filter(|r| r.provenance == provenance).count()
    }

    fn rebuild_keys(&mut self) {
        self.keys = self.records.iter().enumerate().map(|(i, r)| (text::normalize(&r.text), i)).collect();
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AugmentConfig {
    /// Public items map to a private task only above this cosine.
    pub sim_threshold: f64,
    pub n_clusters: usize,
    pub k_variations: usize,
    pub seed: u64,
}

impl Default for AugmentConfig {
    fn default() -> Self {
        Self { sim_threshold: 0.5, n_clusters: 8, k_variations: 3, seed: 0 }
    }
}

impl AugmentConfig {
    pub fn validate(&self) -> Result<(), AugmentError> {
        if !(0.0..=1.0).contains(&self.sim_threshold) {
            return Err(AugmentError::Config(format!("sim_threshold {} outside [0, 1]", self.sim_threshold)));
        }
        if self.n_clusters == 0 {
            return Err(AugmentError::Config("n_clusters must be positive".into()));
        }
        if self.k_variations == 0 {
            return Err(AugmentError::Config("k_variations must be positive".into()));
        }
        Ok(())
    }
}

/// Pair every public text with its most similar private task title and
/// keep the pair when the cosine exceeds `sim_threshold`. Identical
/// embeddings (cosine exactly 1) are always kept.
pub fn map_public_to_private(
    public: &[String],
    private: &TaskCatalog,
    embedder: &dyn Embedder,
    sim_threshold: f64,
) -> Result<VariationMap, AugmentError> {
    let mut map = VariationMap::default();
    if public.is_empty() || private.is_empty() {
        return Ok(map);
    }
    let titles: Vec<String> = private.entries.iter().map(|e| e.canonical_text.clone()).collect();
    let title_vecs = embedder.embed_batch(&titles)?;
    for x in public {
        if text::normalize(x).is_empty() {
            continue;
        }
        let xv = embedder.embed(x)?;
        let mut best = (0usize, f64::NEG_INFINITY);
        for (i, yv) in title_vecs.iter().enumerate() {
            let s = cosine(yv, &xv)?;
            if s > best.1 {
                best = (i, s);
            }
        }
        if best.1 > sim_threshold || best.1 == 1.0 {
            map.insert(x, &private.entries[best.0].id, Provenance::PublicMapped);
        }
    }
    Ok(map)
}

/// State saved when generation stops partway, enough to resume without
/// re-running mapping or clustering.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AugmentCheckpoint {
    pub config: AugmentConfig,
    pub mapped: Vec<VariationRecord>,
    /// `(centroid text, target id)` in cluster order.
    pub centroids: Vec<(String, String)>,
    /// Variations for the first `completed.len()` centroids.
    pub completed: Vec<Vec<String>>,
}

impl AugmentCheckpoint {
    pub fn save(&self, path: impl AsRef<Path>) -> Result<(), AugmentError> {
        let json = serde_json::to_string_pretty(self).map_err(|e| AugmentError::Format(e.to_string()))?;
        fs::write(path, json)?;
        Ok(())
    }

    pub fn load(path: impl AsRef<Path>) -> Result<Self, AugmentError> {
        serde_json::from_str(&fs::read_to_string(path)?).map_err(|e| AugmentError::Format(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AugmentStats {
    pub public_mapped: usize,
    pub clusters: usize,
    pub generated: usize,
    /// Requested variations that were not produced or collided with an
    /// existing surface form.
    pub dropped: usize,
}

#[derive(Debug, Clone, PartialEq)]
pub struct AugmentOutput {
    pub catalog: TaskCatalog,
    pub map: VariationMap,
    pub stats: AugmentStats,
}

/// Map → cluster → generate, then fold everything into the catalog.
pub fn build_augmented_catalog(
    public: &[String],
    private: &TaskCatalog,
    config: &AugmentConfig,
    embedder: &dyn Embedder,
    generator: &dyn VariationGenerator,
) -> Result<AugmentOutput, AugmentError> {
    config.validate()?;
    private.validate()?;
    let mapped = map_public_to_private(public, private, embedder, config.sim_threshold)?;
    let texts: Vec<String> = mapped.records().iter().map(|r| r.text.clone()).collect();
    let n_clusters = config.n_clusters.min(texts.len());
    let centroids = if n_clusters == 0 {
        Vec::new()
    } else {
        cluster_centroids(&texts, embedder, n_clusters, config.seed)?
            .into_iter()
            .map(|c| {
                let target = mapped.get(&c).map(|r| r.target.clone()).unwrap_or_default();
                (c, target)
            })
            .collect()
    };
    let checkpoint = AugmentCheckpoint {
        config: *config,
        mapped: mapped.records().to_vec(),
        centroids,
        completed: Vec::new(),
    };
    resume_augmented_catalog(checkpoint, private, generator)
}

/// Continue generation from a checkpoint and assemble the catalog.
pub fn resume_augmented_catalog(
    mut checkpoint: AugmentCheckpoint,
    private: &TaskCatalog,
    generator: &dyn VariationGenerator,
) -> Result<AugmentOutput, AugmentError> {
    let k = checkpoint.config.k_variations;
    let total = checkpoint.centroids.len();
    while checkpoint.completed.len() < total {
        let (centroid, _) = &checkpoint.centroids[checkpoint.completed.len()];
        match generate_variations(centroid, k, generator) {
            Ok(v) => checkpoint.completed.push(v),
            Err(e) => {
                return Err(AugmentError::Interrupted {
                    completed: checkpoint.completed.len(),
                    total,
                    reason: e.to_string(),
                    checkpoint: Box::new(checkpoint),
                })
            }
        }
    }

    let mut map = VariationMap::default();
    for e in &private.entries {
        for f in &e.surface_forms {
            map.insert(f, &e.id, Provenance::Original);
        }
    }
    let mut stats = AugmentStats { clusters: total, ..Default::default() };
    for r in &checkpoint.mapped {
        if map.insert(&r.text, &r.target, Provenance::PublicMapped) {
            stats.public_mapped += 1;
        }
    }
    for ((_, target), variations) in checkpoint.centroids.iter().zip(&checkpoint.completed) {
        stats.dropped += k - variations.len();
        for v in variations {
            if map.insert(v, target, Provenance::Generated) {
                stats.generated += 1;
            } else {
                stats.dropped += 1;
            }
        }
    }
    map.rebuild_keys();

    let mut catalog = private.clone();
    for r in map.records() {
        if r.provenance != Provenance::Original {
            if let Some(entry) = catalog.get_mut(&r.target) {
                entry.add_form(r.text.clone());
            }
        }
    }
    Ok(AugmentOutput { catalog, map, stats })
}
