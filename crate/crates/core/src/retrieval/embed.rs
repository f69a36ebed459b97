use std::time::Duration;

use serde::{Deserialize, Serialize};

use super::RetrievalError;
use crate::text;

/// Maps text to a fixed-dimension vector.
pub trait Embedder: Send + Sync {
    fn dimension(&self) -> usize;

    /// Identifier persisted alongside an index so a mismatched embedder can
    /// be detected at load time.
    fn id(&self) -> String;

    fn embed(&self, text: &str) -> Result<Vec<f32>, RetrievalError>;

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f32>>, RetrievalError> {
        texts.iter().map(|t| self.embed(t)).collect()
    }
}

pub const DEFAULT_DIMENSION: usize = 256;

/// Character-trigram hashing embedder.
///
/// The normalized text is padded with one space on each side, every
/// character trigram is hashed with 64-bit FNV-1a into `dimension`
/// buckets, counts are used as weights, and the result is L2-normalized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TrigramEmbedder {
    dimension: usize,
}

impl Default for TrigramEmbedder {
    fn default() -> Self {
        Self { dimension: DEFAULT_DIMENSION }
    }
}

impl TrigramEmbedder {
    pub fn new(dimension: usize) -> Self {
        assert!(dimension > 0, "embedding dimension must be positive");
        Self { dimension }
    }
}

pub(crate) fn fnv1a(bytes: &[u8]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &b in bytes {
        h ^= u64::from(b);
        h = h.wrapping_mul(0x0100_0000_01b3);
    }
    h
}

impl Embedder for TrigramEmbedder {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn id(&self) -> String {
        format!("trigram-fnv1a-{}", self.dimension)
    }

    fn embed(&self, input: &str) -> Result<Vec<f32>, RetrievalError> {
        let normalized = text::normalize(input);
        if normalized.is_empty() {
            return Err(RetrievalError::EmptyText);
        }
        let padded: Vec<char> = format!(" {normalized} ").chars().collect();
        let mut counts = vec![0f64; self.dimension];
        let mut buf = [0u8; 12];
        for w in padded.windows(3) {
            let mut len = 0;
            for c in w {
                len += c.encode_utf8(&mut buf[len..]).len();
            }
            counts[(fnv1a(&buf[..len]) % self.dimension as u64) as usize] += 1.0;
        }
        Ok(unit(&counts))
    }
}

pub(crate) fn unit(v: &[f64]) -> Vec<f32> {
    let norm = v.iter().map(|x| x * x).sum::<f64>().sqrt();
    v.iter().map(|x| (x / norm) as f32).collect()
}

#[derive(Serialize)]
struct EmbedRequest<'a> {
    texts: &'a [String],
}

#[derive(Deserialize)]
struct EmbedResponse {
    vectors: Vec<Vec<f32>>,
}

/// Client for an external embedding service.
///
/// Sends `{"texts": [...]}` as a JSON POST and expects
/// `{"vectors": [[...], ...]}` back, one vector per text.
pub struct HttpEmbedder {
    endpoint: String,
    dimension: usize,
    agent: ureq::Agent,
}

impl HttpEmbedder {
    pub fn new(endpoint: impl Into<String>, dimension: usize, timeout: Duration) -> Self {
        let agent = ureq::Agent::config_builder()
            .timeout_global(Some(timeout))
            .http_status_as_error(true)
            .build()
            .into();
        Self { endpoint: endpoint.into(), dimension, agent }
    }
}

impl Embedder for HttpEmbedder {
    fn dimension(&self) -> usize {
        self.dimension
    }

    fn id(&self) -> String {
        format!("http-{}", self.dimension)
    }

    fn embed(&self, text: &str) -> Result<Vec<f32>, RetrievalError> {
        let mut out = self.embed_batch(&[text.to_owned()])?;
        Ok(out.remove(0))
    }

    fn embed_batch(&self, texts: &[String]) -> Result<Vec<Vec<f32>>, RetrievalError> {
        if texts.iter().any(|t| text::normalize(t).is_empty()) {
            return Err(RetrievalError::EmptyText);
        }
        let service = |e: ureq::Error| RetrievalError::Service(format!("{}: {e}", self.endpoint));
        let resp: EmbedResponse = self
            .agent
            .post(&self.endpoint)
            .send_json(EmbedRequest { texts })
            .map_err(service)?
            .body_mut()
            .read_json()
            .map_err(service)?;
        if resp.vectors.len() != texts.len() {
            return Err(RetrievalError::Service(format!(
                "expected {} vectors, got {}",
                texts.len(),
                resp.vectors.len()
            )));
        }
        resp.vectors
            .into_iter()
            .map(|v| {
                if v.len() != self.dimension {
                    return Err(RetrievalError::DimensionMismatch(self.dimension, v.len()));
                }
                let wide: Vec<f64> = v.iter().map(|&x| f64::from(x)).collect();
                if wide.iter().all(|&x| x == 0.0) {
                    return Err(RetrievalError::ZeroVector);
                }
                Ok(unit(&wide))
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::retrieval::cosine;

    #[test]
    fn fnv_reference_values() {
        assert_eq!(fnv1a(b""), 0xcbf29ce484222325);
        assert_eq!(fnv1a(b"a"), 0xaf63dc4c8601ec8c);
        assert_eq!(fnv1a(b"foobar"), 0x85944171f73967e8);
    }

    #[test]
    fn unit_norm_and_dimension() {
        let e = TrigramEmbedder::default();
        for t in ["fix faucet", "a", "how to make a snowflake out of paper"] {
            let v = e.embed(t).unwrap();
            assert_eq!(v.len(), 256);
            let n: f64 = v.iter().map(|&x| f64::from(x) * f64::from(x)).sum::<f64>().sqrt();
            assert!((n - 1.0).abs() < 1e-6);
        }
        assert_eq!(TrigramEmbedder::new(64).embed("x").unwrap().len(), 64);
    }

    #[test]
    fn self_similarity_is_one() {
        let e = TrigramEmbedder::default();
        let v = e.embed("tune an electric guitar").unwrap();
        assert_eq!(cosine(&v, &v).unwrap(), 1.0);
    }

    #[test]
    fn empty_text_rejected() {
        assert!(matches!(TrigramEmbedder::default().embed(" ?! "), Err(RetrievalError::EmptyText)));
    }

    /// Brute-force trigram overlap: cosine of raw trigram count vectors
    /// (no hashing). The hashed embedding must rank the pairs the same way.
    #[test]
    fn related_texts_rank_above_unrelated() {
        use std::collections::HashMap;
        fn grams(t: &str) -> HashMap<String, f64> {
            let chars: Vec<char> = format!(" {} ", text::normalize(t)).chars().collect();
            let mut m = HashMap::new();
            for w in chars.windows(3) {
                *m.entry(w.iter().collect()).or_insert(0.0) += 1.0;
            }
            m
        }
        fn overlap(a: &str, b: &str) -> f64 {
            let (ga, gb) = (grams(a), grams(b));
            let dot: f64 = ga.iter().map(|(k, v)| v * gb.get(k).copied().unwrap_or(0.0)).sum();
            let na: f64 = ga.values().map(|v| v * v).sum::<f64>().sqrt();
            let nb: f64 = gb.values().map(|v| v * v).sum::<f64>().sqrt();
            dot / (na * nb)
        }
        let near = overlap("fix faucet", "fix a faucet");
        let far = overlap("fix faucet", "tune guitar");
        assert!(near > far);

        let e = TrigramEmbedder::default();
        let q = e.embed("fix faucet").unwrap();
        let a = cosine(&q, &e.embed("fix a faucet").unwrap()).unwrap();
        let b = cosine(&q, &e.embed("tune guitar").unwrap()).unwrap();
        assert!(a > b);
    }
}
